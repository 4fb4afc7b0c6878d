fn main() {
    std::process::exit(heston_adi::cli::run(std::env::args_os()));
}
