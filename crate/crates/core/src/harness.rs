//! Convergence and stability experiments: global spatial and temporal
//! errors over a fixed measurement region, order fits, and CSV output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::discretization::{self, OperatorSplit};
use crate::error::{Error, Result};
use crate::grid::{self, TensorGrid};
use crate::model::{self, DomainSpec, HestonParams, OptionKind, OptionSpec};
use crate::reference::{self, PricingQuery};
use crate::timestep::{self, NamedScheme, Scheme, SchemeConfig};

/// Open box `s_lo < s < s_hi`, `v_lo < v < v_hi` of grid nodes on which
/// errors are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRegion {
    pub s_lo: f64,
    pub s_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl MeasurementRegion {
    /// `K/2 < s < 3K/2`, `0 < v < 1`.
    pub fn for_strike(strike: f64) -> Self {
        Self {
            s_lo: 0.5 * strike,
            s_hi: 1.5 * strike,
            v_lo: 0.0,
            v_hi: 1.0,
        }
    }

    pub fn contains(&self, s: f64, v: f64) -> bool {
        self.s_lo < s && s < self.s_hi && self.v_lo < v && v < self.v_hi
    }

    /// Unknown indices `(k, i, j)` of the grid nodes inside the region.
    pub fn nodes(&self, grid: &TensorGrid) -> Vec<(usize, usize, usize)> {
        let s = grid.s_mesh().nodes();
        let v = grid.v_mesh().nodes();
        let mut out = Vec::new();
        for j in 0..grid.m2() {
            for i in 1..=grid.m1() {
                if self.contains(s[i], v[j]) {
                    out.push((grid.index(i, j), i, j));
                }
            }
        }
        out
    }
}

/// One experiment outcome, serialized as a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub case: u32,
    pub scheme: String,
    pub theta: f64,
    pub damping: bool,
    pub m1: usize,
    pub m2: usize,
    pub steps: usize,
    pub error: f64,
    /// Fitted order of the series this report belongs to.
    pub order: Option<f64>,
}

pub const CSV_HEADER: &str = "case,scheme,theta,damping,m1,m2,N,error,order";

pub fn to_csv(reports: &[ErrorReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let order = r.order.map(|p| format!("{p:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:.12},{},{},{},{},{:.9e},{}",
            r.case, r.scheme, r.theta, r.damping, r.m1, r.m2, r.steps, r.error, order
        );
    }
    out
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn fit_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 samples, got {}", samples.len())));
    }
    if let Some((h, e)) = samples.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite())) {
        return Err(Error::DegenerateFit(format!("non-positive sample (h = {h}, e = {e})")));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(h, _)| h.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all step sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// A fully specified pricing problem. `case` labels the output rows (0 for
/// models read from a configuration file).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub case: u32,
    pub params: HestonParams,
    pub spec: OptionSpec,
    pub domain: DomainSpec,
}

impl Problem {
    pub fn new(case: u32, params: HestonParams, spec: OptionSpec, domain: DomainSpec) -> Result<Self> {
        let (params, spec) = model::validate(params, spec)?;
        model::validate_domain(&spec, &domain)?;
        Ok(Self {
            case,
            params,
            spec,
            domain,
        })
    }

    pub fn european(case: u32) -> Result<Self> {
        let (p, s, d) = model::benchmark_case(case)?;
        Self::new(case, p, s, d)
    }

    pub fn barrier(case: u32, barrier: f64) -> Result<Self> {
        let (p, s, d) = model::barrier_case(case, barrier)?;
        Self::new(case, p, s, d)
    }

    /// Barrier variant with `rho = 0` and `r_d = r_f = 0.03`.
    pub fn barrier_validation(case: u32, barrier: f64) -> Result<Self> {
        let (mut p, s, d) = model::barrier_case(case, barrier)?;
        p.rho = 0.0;
        p.r_d = 0.03;
        p.r_f = 0.03;
        Self::new(case, p, s, d)
    }

    pub fn build(&self, m1: usize, m2: usize) -> Result<OperatorSplit> {
        build_operator(&self.params, &self.spec, &self.domain, m1, m2)
    }

    fn cache_key(&self) -> String {
        format!("{:?}|{:?}|{:?}", self.params, self.spec, self.domain)
    }
}

/// Meshes and assembles the semi-discrete system on an `m1 x m2` grid.
pub fn build_operator(
    params: &HestonParams,
    spec: &OptionSpec,
    domain: &DomainSpec,
    m1: usize,
    m2: usize,
) -> Result<OperatorSplit> {
    let s = grid::build_s_mesh(m1, spec.strike, domain.c, domain.s_max, spec.lower_s())?;
    let v = grid::build_v_mesh(m2, domain.v_max, domain.d)?;
    discretization::assemble(&TensorGrid::new(s, v), params, spec, domain)
}

fn max_diff(a: &[f64], b: &[f64], nodes: &[(usize, usize, usize)]) -> f64 {
    nodes.iter().map(|&(k, _, _)| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

fn hv2_config(steps: usize, horizon: f64) -> SchemeConfig {
    SchemeConfig::new(hv2(), steps, horizon, true)
}

fn hv2() -> NamedScheme {
    "hv2".parse().expect("hv2 is a known scheme")
}

/// Outcome of [`spatial_error`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialError {
    pub report: ErrorReport,
    /// Max relative error over region nodes whose exact value is at least 1.
    pub relative: f64,
}

const SPATIAL_START_STEPS: usize = 25;
const SPATIAL_MAX_STEPS: usize = 1 << 16;

/// Global spatial error of a European benchmark case on an `m1 x m2` grid.
pub fn spatial_error(case: u32, m1: usize, m2: usize) -> Result<SpatialError> {
    spatial_error_for(&Problem::european(case)?, m1, m2)
}

/// Global spatial error of a European call problem on an `m1 x m2` grid.
///
/// The semi-discrete system is integrated with damped HV2; the step count is
/// doubled until the measured error moves by less than 1%.
pub fn spatial_error_for(problem: &Problem, m1: usize, m2: usize) -> Result<SpatialError> {
    if m1 < 10 || m2 < 10 {
        return Err(Error::Config(format!("spatial error needs m1, m2 >= 10, got {m1}x{m2}")));
    }
    if problem.spec.kind != OptionKind::EuropeanCall {
        return Err(Error::Config("exact prices are available for European calls only".into()));
    }
    let case = problem.case;
    let (params, spec) = (problem.params, problem.spec);
    let op = problem.build(m1, m2)?;
    let region = MeasurementRegion::for_strike(spec.strike);
    let nodes = region.nodes(op.grid());
    let s = op.grid().s_mesh().nodes();
    let v = op.grid().v_mesh().nodes();
    let exact: Vec<f64> = {
        nodes
            .par_iter()
            .map(|&(_, i, j)| {
                reference::call_price(&PricingQuery {
                    params,
                    spot: s[i],
                    variance: v[j],
                    strike: spec.strike,
                    maturity: spec.maturity,
                })
            })
            .collect::<Result<_>>()?
    };
    let measure = |u: &[f64]| {
        let mut abs: f64 = 0.0;
        let mut rel: f64 = 0.0;
        for (&(k, _, _), &x) in nodes.iter().zip(&exact) {
            let d = (u[k] - x).abs();
            abs = abs.max(d);
            if x >= 1.0 {
                rel = rel.max(d / x);
            }
        }
        (abs, rel)
    };

    let mut steps = SPATIAL_START_STEPS;
    let mut prev = measure(&timestep::solve(&op, &hv2_config(steps, spec.maturity))?);
    loop {
        steps *= 2;
        let cur = measure(&timestep::solve(&op, &hv2_config(steps, spec.maturity))?);
        if (cur.0 - prev.0).abs() < 0.01 * cur.0 {
            return Ok(SpatialError {
                report: ErrorReport {
                    case,
                    scheme: "hv2".into(),
                    theta: timestep::theta_hv2(),
                    damping: true,
                    m1,
                    m2,
                    steps,
                    error: cur.0,
                    order: None,
                },
                relative: cur.1,
            });
        }
        if steps >= SPATIAL_MAX_STEPS {
            return Err(Error::Convergence(format!(
                "spatial error did not settle in time by N = {steps} ({} vs {})",
                prev.0, cur.0
            )));
        }
        prev = cur;
    }
}

/// Spatial errors on `m1 = 2 m2` for each `m2`, with the fitted order
/// (`h = 1/m2`) attached to every report.
pub fn spatial_study(problem: &Problem, m2s: &[usize]) -> Result<Vec<SpatialError>> {
    let mut out = m2s
        .par_iter()
        .map(|&m2| spatial_error_for(problem, 2 * m2, m2))
        .collect::<Result<Vec<_>>>()?;
    if out.len() >= 3 {
        let p = fit_order(
            &out.iter()
                .map(|r| (1.0 / r.report.m2 as f64, r.report.error))
                .collect::<Vec<_>>(),
        )?;
        for r in &mut out {
            r.report.order = Some(p);
        }
    }
    Ok(out)
}

/// Time-stepping choice for temporal experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeChoice {
    pub named: NamedScheme,
    pub damping: bool,
}

impl SchemeChoice {
    pub fn new(named: NamedScheme, damping: bool) -> Self {
        Self { named, damping }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.named.theta = theta;
        self
    }

    pub fn config(&self, steps: usize, horizon: f64) -> SchemeConfig {
        SchemeConfig::new(self.named, steps, horizon, self.damping)
    }
}

const REF_MIN_STEPS: usize = 5000;
const REF_MAX_DOUBLINGS: usize = 3;

type RefKey = (String, usize, usize, usize);

fn reference_cache() -> &'static Mutex<HashMap<RefKey, Arc<OnceLock<Vec<f64>>>>> {
    static CACHE: OnceLock<Mutex<HashMap<RefKey, Arc<OnceLock<Vec<f64>>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Damped HV2 solution with `steps` steps, memoized per process.
fn reference_solution(problem: &Problem, op: &OperatorSplit, steps: usize) -> Result<Vec<f64>> {
    let key = (
        problem.cache_key(),
        op.grid().m1(),
        op.grid().m2(),
        steps,
    );
    let cell = reference_cache().lock().expect("cache lock").entry(key).or_default().clone();
    if let Some(u) = cell.get() {
        return Ok(u.clone());
    }
    let u = timestep::solve(op, &hv2_config(steps, op.spec().maturity))?;
    Ok(cell.get_or_init(|| u).clone())
}

/// Temporal errors of `choice` on an `m1 x m2` grid for each step count.
///
/// The reference is damped HV2 with `max(10 N_max, 5000)` steps, accepted
/// once it differs from the run with twice as many steps by less than 1% of
/// the smallest measured error.
pub fn temporal_errors(
    problem: &Problem,
    choice: &SchemeChoice,
    steps: &[usize],
    m1: usize,
    m2: usize,
) -> Result<Vec<ErrorReport>> {
    if steps.is_empty() || steps.contains(&0) {
        return Err(Error::Config("step counts must be >= 1".into()));
    }
    choice.config(1, 1.0).validate()?;
    let op = problem.build(m1, m2)?;
    let horizon = op.spec().maturity;
    let nodes = MeasurementRegion::for_strike(op.spec().strike).nodes(op.grid());
    let mut spectral = None;
    if choice.named.scheme == Scheme::Rkc {
        spectral = Some(timestep::estimate_spectral_radius(&op).value);
    }
    let runs = steps
        .par_iter()
        .map(|&n| {
            let mut cfg = choice.config(n, horizon);
            cfg.spectral_radius = spectral;
            timestep::solve(&op, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let n_max = *steps.iter().max().expect("non-empty");
    let mut n_ref = (10 * n_max).max(REF_MIN_STEPS);
    let mut reference = reference_solution(problem, &op, n_ref)?;
    let mut errors: Vec<f64> = runs.iter().map(|u| max_diff(u, &reference, &nodes)).collect();
    for _ in 0..=REF_MAX_DOUBLINGS {
        let finer = reference_solution(problem, &op, 2 * n_ref)?;
        let drift = max_diff(&reference, &finer, &nodes);
        let smallest = errors.iter().copied().fold(f64::INFINITY, f64::min);
        if drift < 0.01 * smallest || drift == 0.0 {
            return Ok(steps
                .iter()
                .zip(errors)
                .map(|(&n, error)| ErrorReport {
                    case: problem.case,
                    scheme: choice.named.label.into(),
                    theta: choice.named.theta,
                    damping: choice.damping,
                    m1,
                    m2,
                    steps: n,
                    error,
                    order: None,
                })
                .collect());
        }
        n_ref *= 2;
        reference = finer;
        errors = runs.iter().map(|u| max_diff(u, &reference, &nodes)).collect();
    }
    Err(Error::Convergence(format!(
        "time reference not converged at N = {n_ref} relative to the smallest measured error"
    )))
}

/// Temporal error of a single run.
pub fn temporal_error(problem: &Problem, choice: &SchemeChoice, steps: usize, m1: usize, m2: usize) -> Result<ErrorReport> {
    Ok(temporal_errors(problem, choice, &[steps], m1, m2)?.remove(0))
}

/// Fits the temporal order over the reports whose step counts lie in
/// `[n_lo, n_hi]` (`h = 1/N`), and stores it in every report.
pub fn attach_temporal_order(reports: &mut [ErrorReport], n_lo: usize, n_hi: usize) -> Result<f64> {
    let samples: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| (n_lo..=n_hi).contains(&r.steps))
        .map(|r| (1.0 / r.steps as f64, r.error))
        .collect();
    let p = fit_order(&samples)?;
    for r in reports.iter_mut() {
        r.order = Some(p);
    }
    Ok(p)
}

/// Verdict of [`stability_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepVerdict {
    pub reports: Vec<ErrorReport>,
    /// No error exceeds its predecessor by more than [`UPTICK_TOLERANCE`].
    pub monotone: bool,
    pub max_error: f64,
    /// Largest error at an interior point of the sweep that exceeds both
    /// neighbours, if any.
    pub peak: Option<f64>,
}

pub const UPTICK_TOLERANCE: f64 = 0.05;

pub fn is_monotone(errors: &[f64]) -> bool {
    errors.windows(2).all(|w| w[1] <= (1.0 + UPTICK_TOLERANCE) * w[0])
}

/// Temporal errors over an increasing list of step counts and whether they
/// decrease monotonically.
pub fn stability_sweep(
    problem: &Problem,
    choice: &SchemeChoice,
    steps: &[usize],
    m1: usize,
    m2: usize,
) -> Result<SweepVerdict> {
    if steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("step counts must be strictly increasing".into()));
    }
    let reports = temporal_errors(problem, choice, steps, m1, m2)?;
    Ok(verdict(reports))
}

pub fn verdict(reports: Vec<ErrorReport>) -> SweepVerdict {
    let errors: Vec<f64> = reports.iter().map(|r| r.error).collect();
    let peak = errors
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .map(|w| w[1])
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    SweepVerdict {
        monotone: is_monotone(&errors),
        max_error: errors.iter().copied().fold(0.0, f64::max),
        peak,
        reports,
    }
}

/// Cubic Lagrange weights for `x` on the four nodes starting at `lo`.
fn lagrange4(nodes: &[f64], lo: usize, x: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for (a, wa) in w.iter_mut().enumerate() {
        for b in 0..4 {
            if a != b {
                *wa *= (x - nodes[lo + b]) / (nodes[lo + a] - nodes[lo + b]);
            }
        }
    }
    w
}

/// First node of the 4-point stencil around `x`, clamped to the mesh.
fn stencil_start(nodes: &[f64], x: f64) -> usize {
    let cell = nodes.partition_point(|&n| n <= x).saturating_sub(1);
    cell.saturating_sub(1).min(nodes.len() - 4)
}

/// Solution on all nodes `(s_i, v_j)`, `0 <= i <= m1`, `0 <= j <= m2`,
/// with boundary data filled in; indexed `[j][i]`.
fn full_field(op: &OperatorSplit, u: &[f64]) -> Vec<Vec<f64>> {
    let g = op.grid();
    let bv = model::boundary_values(op.params(), op.spec(), op.spec().maturity);
    let s = g.s_mesh().nodes();
    let v = g.v_mesh().nodes();
    (0..=g.m2())
        .map(|j| {
            (0..=g.m1())
                .map(|i| {
                    if j == g.m2() {
                        bv.top_dirichlet(s[i])
                    } else if i == 0 {
                        bv.left_dirichlet(v[j])
                    } else {
                        u[g.index(i, j)]
                    }
                })
                .collect()
        })
        .collect()
}

/// Tensor-product cubic interpolation of a full field.
fn interpolate(grid: &TensorGrid, field: &[Vec<f64>], s: f64, v: f64) -> f64 {
    let sn = grid.s_mesh().nodes();
    let vn = grid.v_mesh().nodes();
    let (i0, j0) = (stencil_start(sn, s), stencil_start(vn, v));
    let (ws, wv) = (lagrange4(sn, i0, s), lagrange4(vn, j0, v));
    let mut acc = 0.0;
    for (b, wb) in wv.iter().enumerate() {
        for (a, wa) in ws.iter().enumerate() {
            acc += wa * wb * field[j0 + b][i0 + a];
        }
    }
    acc
}

/// Cubic interpolation of a solution vector of `op` at `(s, v)`.
pub fn interpolate_solution(op: &OperatorSplit, u: &[f64], s: f64, v: f64) -> f64 {
    interpolate(op.grid(), &full_field(op, u), s, v)
}

/// Step count for the time integration in the self-convergence study.
pub const BARRIER_STEPS: usize = 400;

/// Spatial self-convergence of a barrier problem on `m1 = 2 m2` grids.
///
/// Errors are measured against the solution on a grid with twice the finest
/// `m2`, interpolated to the coarse nodes. All runs use damped HV2 with the
/// same step count.
pub fn barrier_selfconvergence(problem: &Problem, m2s: &[usize]) -> Result<Vec<ErrorReport>> {
    if problem.spec.barrier.is_none() {
        return Err(Error::Config("self-convergence study needs a barrier problem".into()));
    }
    let finest = *m2s.iter().max().ok_or_else(|| Error::Config("empty grid list".into()))?;
    let spec = problem.spec;
    let cfg = hv2_config(BARRIER_STEPS, spec.maturity);
    let fine_m2 = 2 * finest;
    let fine = problem.build(2 * fine_m2, fine_m2)?;
    let fine_field = full_field(&fine, &timestep::solve(&fine, &cfg)?);

    let mut reports = m2s
        .par_iter()
        .map(|&m2| {
            let op = problem.build(2 * m2, m2)?;
            let u = timestep::solve(&op, &cfg)?;
            let s = op.grid().s_mesh().nodes();
            let v = op.grid().v_mesh().nodes();
            let nodes = MeasurementRegion::for_strike(spec.strike).nodes(op.grid());
            let error = nodes
                .iter()
                .map(|&(k, i, j)| (u[k] - interpolate(fine.grid(), &fine_field, s[i], v[j])).abs())
                .fold(0.0, f64::max);
            Ok(ErrorReport {
                case: problem.case,
                scheme: "hv2".into(),
                theta: timestep::theta_hv2(),
                damping: true,
                m1: 2 * m2,
                m2,
                steps: BARRIER_STEPS,
                error,
                order: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if reports.len() >= 3 {
        let p = fit_order(
            &reports
                .iter()
                .map(|r| (1.0 / r.m2 as f64, r.error))
                .collect::<Vec<_>>(),
        )?;
        for r in &mut reports {
            r.order = Some(p);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_power_laws() {
        let p = fit_order(&[(1.0, 1.0), (0.5, 0.25), (0.25, 0.0625)]).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        let p = fit_order(&[1.0, 0.5, 0.25, 0.125].map(|h| (h, 3.0 * h))).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_perturbed_power_law() {
        // Regression slope computed independently: 2.00414...
        let p = fit_order(&[1.0, 0.5, 0.25, 0.125].map(|h: f64| (h, h * h + 0.01 * h.powi(3)))).unwrap();
        assert!(p > 2.0 && p < 2.1);
        assert!((p - 2.0041).abs() < 1e-3);
    }

    #[test]
    fn fit_rejects_bad_samples() {
        assert!(matches!(fit_order(&[(1.0, 1.0), (0.5, 0.5)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            fit_order(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.1)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(fit_order(&[(1.0, 1.0), (1.0, 0.5), (1.0, 0.1)]).is_err());
    }

    #[test]
    fn region_is_open() {
        let r = MeasurementRegion::for_strike(100.0);
        assert!(r.contains(100.0, 0.5));
        assert!(!r.contains(50.0, 0.5));
        assert!(!r.contains(150.0, 0.5));
        assert!(!r.contains(100.0, 0.0));
        assert!(!r.contains(100.0, 1.0));
    }

    #[test]
    fn monotonicity_tolerance() {
        assert!(is_monotone(&[1.0, 0.5, 0.52, 0.1]));
        assert!(!is_monotone(&[1.0, 0.5, 0.53, 0.1]));
        let v = verdict(
            [1.0, 3.0, 0.5]
                .iter()
                .map(|&error| ErrorReport {
                    case: 2,
                    scheme: "hv1".into(),
                    theta: 0.3,
                    damping: false,
                    m1: 20,
                    m2: 10,
                    steps: 1,
                    error,
                    order: None,
                })
                .collect(),
        );
        assert!(!v.monotone);
        assert_eq!(v.peak, Some(3.0));
        assert_eq!(v.max_error, 3.0);
    }

    #[test]
    fn cubic_interpolation_exact_on_cubics() {
        let s = grid::build_s_mesh(12, 100.0, 20.0, 800.0, 0.0).unwrap();
        let v = grid::build_v_mesh(8, 5.0, 0.01).unwrap();
        let g = TensorGrid::new(s, v);
        let f = |s: f64, v: f64| 1.0 + 0.3 * s - 2e-4 * s * s * v + 1e-7 * s.powi(3) + v.powi(3);
        let field: Vec<Vec<f64>> = g
            .v_mesh()
            .nodes()
            .iter()
            .map(|&v| g.s_mesh().nodes().iter().map(|&s| f(s, v)).collect())
            .collect();
        for (s, v) in [(0.0, 0.0), (97.3, 0.04), (450.0, 4.9), (800.0, 5.0), (130.0, 0.7)] {
            let got = interpolate(&g, &field, s, v);
            assert!((got - f(s, v)).abs() < 1e-9 * (1.0 + f(s, v).abs()), "({s},{v}): {got}");
        }
    }

    #[test]
    fn csv_layout() {
        let r = ErrorReport {
            case: 1,
            scheme: "do".into(),
            theta: 0.5,
            damping: true,
            m1: 100,
            m2: 50,
            steps: 10,
            error: 1.5e-3,
            order: Some(1.01),
        };
        let csv = to_csv(&[r.clone(), ErrorReport { order: None, ..r }]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "1,do,0.500000000000,true,100,50,10,1.500000000e-3,1.010000");
        assert!(lines[2].ends_with(','));
    }

    #[test]
    fn temporal_reference_is_self_consistent() {
        let problem = Problem::european(1).unwrap();
        let op = problem.build(20, 10).unwrap();
        let a = reference_solution(&problem, &op, 400).unwrap();
        let b = reference_solution(&problem, &op, 400).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn barrier_problem_setup() {
        let p = Problem::barrier_validation(3, 95.0).unwrap();
        assert_eq!((p.params.rho, p.params.r_d, p.params.r_f), (0.0, 0.03, 0.03));
        assert_eq!(p.spec.barrier, Some(95.0));
        assert_eq!(p.domain.s_max, 1400.0);
        assert!(Problem::european(5).is_err());
        assert!(Problem::barrier(1, 120.0).is_err());
    }
}
