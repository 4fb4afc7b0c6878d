//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 when a
//! numerical method fails.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, ErrorReport, Problem, SchemeChoice};
use crate::model::{ModelConfig, OptionKind};
use crate::reference::{self, PricingQuery};
use crate::timestep::{self, NamedScheme, SchemeConfig};

#[derive(Debug, Parser)]
#[command(name = "heston-adi", version, about = "ADI finite-difference experiments for the Heston PDE")]
struct Cli {
    /// Worker threads for independent experiment cells (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-difference price at one point, with the semi-analytic price
    /// for European calls.
    Price(PriceArgs),
    /// Global spatial errors against the semi-analytic pricer.
    SpatialError(SpatialArgs),
    /// Global temporal errors for one scheme.
    TemporalError(TemporalArgs),
    /// Temporal errors over increasing step counts with a monotonicity verdict.
    StabilitySweep(TemporalArgs),
    /// Down-and-out call studies.
    Barrier(BarrierArgs),
    /// Power-iteration estimate of the spectral radius of the semi-discrete operator.
    SpectralRadius(SpectralArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Benchmark parameter set 1-4.
    #[arg(long, default_value_t = 1, conflicts_with = "config")]
    case: u32,

    /// JSON model configuration, used instead of a benchmark case.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ModelArgs {
    fn problem(&self) -> Result<Problem> {
        match &self.config {
            None => Problem::european(self.case),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let (params, spec, domain) = ModelConfig::from_json(&text)?.resolve()?;
                Problem::new(0, params, spec, domain)
            }
        }
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 50)]
    m2: usize,

    /// Defaults to `2 * m2`.
    #[arg(long)]
    m1: Option<usize>,
}

impl GridArgs {
    fn sizes(&self) -> (usize, usize) {
        (self.m1.unwrap_or(2 * self.m2), self.m2)
    }
}

#[derive(Debug, Args)]
struct SchemeArgs {
    /// One of cn, do, cs, mcs, hv1, hv2, rkc.
    #[arg(long, default_value = "mcs")]
    scheme: NamedScheme,

    /// Overrides the scheme's default theta.
    #[arg(long)]
    theta: Option<f64>,

    /// Start with two backward-Euler half steps.
    #[arg(long)]
    damping: bool,
}

impl SchemeArgs {
    fn choice(&self) -> Result<SchemeChoice> {
        let mut choice = SchemeChoice::new(self.scheme, self.damping);
        if let Some(theta) = self.theta {
            choice = choice.with_theta(theta);
        }
        choice.config(1, 1.0).validate()?;
        Ok(choice)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write CSV here instead of printing a table.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PriceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    scheme: SchemeArgs,

    #[arg(long, default_value_t = 100)]
    steps: usize,

    /// Asset price.
    #[arg(long)]
    s: f64,

    /// Variance.
    #[arg(long)]
    v: f64,
}

#[derive(Debug, Args)]
struct SpatialArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Grid sizes in v; the s grid uses `2 * m2`.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    m2: Vec<usize>,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct TemporalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    scheme: SchemeArgs,

    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100,200,500,1000")]
    steps: Vec<usize>,

    /// Step counts `lo,hi` whose errors enter the order fit.
    #[arg(long, value_delimiter = ',', default_values_t = [50, 1000])]
    fit: Vec<usize>,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BarrierArgs {
    /// Benchmark parameter set 1-4.
    #[arg(long, default_value_t = 1)]
    case: u32,

    #[arg(long, default_value_t = 95.0)]
    barrier: f64,

    /// Use rho = 0 and r_d = r_f = 0.03.
    #[arg(long)]
    validation: bool,

    /// Grid sizes in v for the spatial study.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    m2: Vec<usize>,

    /// Run a temporal study with these step counts instead of the spatial one.
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,

    #[command(flatten)]
    scheme: SchemeArgs,

    #[arg(long, value_delimiter = ',', default_values_t = [50, 1000])]
    fit: Vec<usize>,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SpectralArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,

    /// Also report the RKC stage count for this many steps.
    #[arg(long)]
    steps: Option<usize>,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut (dyn Write + Send) = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.jobs {
        None => dispatch(cli.command, out, err),
        Some(0) => Err(Error::Config("--jobs must be >= 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => Err(Error::Config(format!("cannot start thread pool: {e}"))),
        },
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("output failed: {e}"))
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    match command {
        Command::Price(a) => price(a, out),
        Command::SpatialError(a) => {
            let problem = a.model.problem()?;
            let _ = writeln!(err, "spatial errors for m2 in {:?}", a.m2);
            let studies = harness::spatial_study(&problem, &a.m2)?;
            for s in &studies {
                let _ = writeln!(err, "m2 = {}: relative error {:.4e}", s.report.m2, s.relative);
            }
            let reports: Vec<ErrorReport> = studies.into_iter().map(|s| s.report).collect();
            emit(&reports, &a.out, out)
        }
        Command::TemporalError(a) => {
            let reports = temporal(&a, err)?;
            emit(&reports, &a.out, out)
        }
        Command::StabilitySweep(a) => {
            let reports = temporal(&a, err)?;
            let v = harness::verdict(reports);
            emit(&v.reports, &a.out, out)?;
            writeln!(
                out,
                "monotone: {}  max error: {:.6e}  peak: {}",
                v.monotone,
                v.max_error,
                v.peak.map_or("none".to_string(), |p| format!("{p:.6e}"))
            )
            .map_err(io_err)
        }
        Command::Barrier(a) => barrier(a, out, err),
        Command::SpectralRadius(a) => {
            let problem = a.model.problem()?;
            let (m1, m2) = a.grid.sizes();
            let op = problem.build(m1, m2)?;
            let est = timestep::estimate_spectral_radius(&op);
            writeln!(
                out,
                "spectral radius: {:.6e} (m1 = {m1}, m2 = {m2}, iterations = {}, converged = {})",
                est.value, est.iterations, est.converged
            )
            .map_err(io_err)?;
            if let Some(n) = a.steps {
                if n == 0 {
                    return Err(Error::Config("number of steps must be >= 1".into()));
                }
                let dt = problem.spec.maturity / n as f64;
                writeln!(out, "rkc stages for N = {n}: {}", timestep::rkc_stage_count(dt, est.value))
                    .map_err(io_err)?;
            }
            Ok(())
        }
    }
}

fn price(a: PriceArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let problem = a.model.problem()?;
    let (m1, m2) = a.grid.sizes();
    let choice = a.scheme.choice()?;
    let op = problem.build(m1, m2)?;
    let s_mesh = op.grid().s_mesh().nodes();
    if !(a.s >= s_mesh[0] && a.s <= s_mesh[m1] && a.v >= 0.0 && a.v <= problem.domain.v_max) {
        return Err(Error::Domain(format!(
            "({}, {}) lies outside [{}, {}] x [0, {}]",
            a.s, a.v, s_mesh[0], s_mesh[m1], problem.domain.v_max
        )));
    }
    let cfg: SchemeConfig = choice.config(a.steps, problem.spec.maturity);
    let u = timestep::solve(&op, &cfg)?;
    let fd = harness::interpolate_solution(&op, &u, a.s, a.v);
    writeln!(out, "fd price:        {fd:.10}").map_err(io_err)?;
    if problem.spec.kind == OptionKind::EuropeanCall {
        let exact = reference::call_price(&PricingQuery {
            params: problem.params,
            spot: a.s,
            variance: a.v,
            strike: problem.spec.strike,
            maturity: problem.spec.maturity,
        })?;
        writeln!(out, "reference price: {exact:.10}").map_err(io_err)?;
        writeln!(out, "difference:      {:.3e}", fd - exact).map_err(io_err)?;
    }
    Ok(())
}

fn fit_window(fit: &[usize]) -> Result<(usize, usize)> {
    match fit {
        [lo, hi] if lo <= hi => Ok((*lo, *hi)),
        _ => Err(Error::Config(format!("--fit expects lo,hi with lo <= hi, got {fit:?}"))),
    }
}

fn attach_order_if_possible(reports: &mut [ErrorReport], fit: &[usize]) -> Result<()> {
    let (lo, hi) = fit_window(fit)?;
    let usable = reports
        .iter()
        .filter(|r| (lo..=hi).contains(&r.steps) && r.error > 0.0)
        .count();
    if usable >= 3 {
        harness::attach_temporal_order(reports, lo, hi)?;
    }
    Ok(())
}

fn temporal(a: &TemporalArgs, err: &mut (dyn Write + Send)) -> Result<Vec<ErrorReport>> {
    let choice = a.scheme.choice()?;
    let problem = a.model.problem()?;
    let (m1, m2) = a.grid.sizes();
    fit_window(&a.fit)?;
    if a.steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("--steps must be strictly increasing".into()));
    }
    let _ = writeln!(
        err,
        "{} (theta = {:.6}, damping = {}) on {m1}x{m2}, N in {:?}",
        choice.named.label, choice.named.theta, choice.damping, a.steps
    );
    let mut reports = harness::temporal_errors(&problem, &choice, &a.steps, m1, m2)?;
    attach_order_if_possible(&mut reports, &a.fit)?;
    Ok(reports)
}

fn barrier(a: BarrierArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    let problem = if a.validation {
        Problem::barrier_validation(a.case, a.barrier)?
    } else {
        Problem::barrier(a.case, a.barrier)?
    };
    let reports = match &a.steps {
        None => {
            let _ = writeln!(err, "barrier self-convergence for m2 in {:?}", a.m2);
            harness::barrier_selfconvergence(&problem, &a.m2)?
        }
        Some(steps) => {
            let choice = a.scheme.choice()?;
            let m2 = *a.m2.last().ok_or_else(|| Error::Config("empty --m2".into()))?;
            let _ = writeln!(err, "barrier temporal errors on {}x{m2}, N in {steps:?}", 2 * m2);
            let mut reports = harness::temporal_errors(&problem, &choice, steps, 2 * m2, m2)?;
            attach_order_if_possible(&mut reports, &a.fit)?;
            reports
        }
    };
    emit(&reports, &a.out, out)
}

fn emit(reports: &[ErrorReport], target: &OutputArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    match &target.output {
        Some(path) => std::fs::write(path, harness::to_csv(reports))
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => out.write_all(table(reports).as_bytes()).map_err(io_err),
    }
}

fn table(reports: &[ErrorReport]) -> String {
    let mut s = format!(
        "{:>4} {:>6} {:>9} {:>7} {:>5} {:>5} {:>6} {:>13} {:>7}\n",
        "case", "scheme", "theta", "damping", "m1", "m2", "N", "error", "order"
    );
    for r in reports {
        let order = r.order.map_or(String::new(), |p| format!("{p:.3}"));
        s.push_str(&format!(
            "{:>4} {:>6} {:>9.6} {:>7} {:>5} {:>5} {:>6} {:>13.6e} {:>7}\n",
            r.case, r.scheme, r.theta, r.damping, r.m1, r.m2, r.steps, r.error, order
        ));
    }
    s
}
