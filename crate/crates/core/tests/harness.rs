use heston_adi::harness::{
    attach_temporal_order, barrier_selfconvergence, interpolate_solution, stability_sweep, temporal_errors, to_csv,
    Problem, SchemeChoice,
};
use heston_adi::timestep::{self, SchemeConfig};
use heston_adi::Error;

fn choice(s: &str, damping: bool) -> SchemeChoice {
    SchemeChoice::new(s.parse().unwrap(), damping)
}

#[test]
fn temporal_studies_are_bitwise_reproducible() {
    let problem = Problem::european(3).unwrap();
    let steps = [2, 4, 8, 16, 32];
    let a = temporal_errors(&problem, &choice("mcs", true), &steps, 20, 10).unwrap();
    let b = temporal_errors(&problem, &choice("mcs", true), &steps, 20, 10).unwrap();
    assert_eq!(to_csv(&a), to_csv(&b));
}

#[test]
fn damped_hv2_converges_at_second_order_on_a_small_grid() {
    let problem = Problem::european(1).unwrap();
    let mut r = temporal_errors(&problem, &choice("hv2", true), &[10, 20, 40, 80, 160], 30, 15).unwrap();
    let p = attach_temporal_order(&mut r, 10, 160).unwrap();
    assert!((1.7..=2.3).contains(&p), "order {p}");
    assert!(r.iter().all(|x| x.order == Some(p)));
}

#[test]
fn sweeps_reject_unordered_step_lists() {
    let problem = Problem::european(1).unwrap();
    let e = stability_sweep(&problem, &choice("do", false), &[10, 5], 20, 10).unwrap_err();
    assert!(matches!(e, Error::Config(_)));
    assert!(temporal_errors(&problem, &choice("do", false), &[], 20, 10).is_err());
}

#[test]
fn interpolation_reproduces_nodal_values() {
    let problem = Problem::european(2).unwrap();
    let op = problem.build(30, 15).unwrap();
    let u = timestep::solve(&op, &SchemeConfig::new("hv2".parse().unwrap(), 20, 1.0, true)).unwrap();
    let g = op.grid();
    for (i, j) in [(3, 2), (10, 5), (20, 11)] {
        let (s, v) = (g.s_mesh().nodes()[i], g.v_mesh().nodes()[j]);
        let x = interpolate_solution(&op, &u, s, v);
        assert!((x - u[g.index(i, j)]).abs() <= 1e-10 * (1.0 + x.abs()));
    }
}

#[test]
fn barrier_self_convergence_errors_shrink() {
    let problem = Problem::barrier_validation(4, 95.0).unwrap();
    let r = barrier_selfconvergence(&problem, &[10, 20, 40]).unwrap();
    assert_eq!(r.len(), 3);
    assert!(r.windows(2).all(|w| w[1].error < w[0].error), "{r:?}");
    assert!(r[0].order.unwrap() > 1.0);
    assert!(barrier_selfconvergence(&Problem::european(1).unwrap(), &[10]).is_err());
}
