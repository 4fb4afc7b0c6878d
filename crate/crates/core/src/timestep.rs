//! Time integration of split linear systems `U' = F0 + F1 + F2`,
//! `F_j(t, w) = A_j w + b_j(t)`.
//!
//! The ADI schemes treat `F0` explicitly and `F1`, `F2` implicitly one
//! direction at a time; their linear systems `(I - theta dt A_j)` are factored
//! once per `(theta, dt)` and reused for every step.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::discretization::{OperatorSplit, Part};
use crate::error::{Error, Result};
use crate::linalg::{
    self, BandedFactorization, BandedMatrix, CsrMatrix, InterleavedFactorization, SPECTRAL_MAX_ITERS, SPECTRAL_TOL,
};

/// Solves `M x = b` in place for a fixed, pre-factored `M`.
pub trait LinearSolve: Send + Sync {
    fn solve_in_place(&self, b: &mut [f64]) -> Result<()>;
}

/// A linear ODE system split as `A = A0 + A1 + A2`, `b = b0 + b1 + b2`.
pub trait SplitSystem: Sync {
    fn dim(&self) -> usize;

    /// `out = A_part w`.
    fn apply_matrix(&self, part: Part, w: &[f64], out: &mut [f64]);

    /// `out += b_part(t)`.
    fn add_forcing(&self, part: Part, t: f64, out: &mut [f64]);

    /// `out += scale * b_part(t)`.
    fn add_scaled_forcing(&self, part: Part, t: f64, scale: f64, out: &mut [f64]) {
        let mut b = vec![0.0; out.len()];
        self.add_forcing(part, t, &mut b);
        axpy(out, scale, &b);
    }

    /// Factors `I - alpha A_part` for `part` in {`AlongS`, `AlongV`}.
    fn factor_directional(&self, part: Part, alpha: f64) -> Result<Box<dyn LinearSolve>>;

    /// Factors `I - alpha A` for the unsplit operator.
    fn factor_full(&self, alpha: f64) -> Result<Box<dyn LinearSolve>>;

    fn initial(&self) -> Vec<f64>;

    /// `out = F_part(t, w)`.
    fn eval(&self, part: Part, t: f64, w: &[f64], out: &mut [f64]) {
        self.apply_matrix(part, w, out);
        self.add_forcing(part, t, out);
    }
}

/// Banded LU of a sparse matrix under a symmetric permutation of its unknowns.
pub struct PermutedBandedSolver {
    /// `order[new] = old`.
    order: Option<Vec<usize>>,
    factors: BandedFactorization,
}

impl PermutedBandedSolver {
    /// Factors `matrix`, optionally reordered by `order` (`order[new] = old`).
    pub fn new(matrix: &CsrMatrix, order: Option<Vec<usize>>) -> Result<Self> {
        let n = matrix.n_rows();
        let inverse = order.as_ref().map(|ord| {
            let mut inv = vec![0usize; n];
            for (new, &old) in ord.iter().enumerate() {
                inv[old] = new;
            }
            inv
        });
        let map = |k: usize| inverse.as_ref().map_or(k, |inv| inv[k]);
        let (mut lower, mut upper) = (0usize, 0usize);
        for (r, c, _) in matrix.triplets() {
            let (r, c) = (map(r), map(c));
            if r > c {
                lower = lower.max(r - c);
            } else {
                upper = upper.max(c - r);
            }
        }
        let mut band = BandedMatrix::zeros(n, lower, upper);
        for (r, c, v) in matrix.triplets() {
            band.add_to(map(r), map(c), v);
        }
        Ok(Self {
            order,
            factors: linalg::banded_factor(&band)?,
        })
    }
}

impl LinearSolve for PermutedBandedSolver {
    fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        match &self.order {
            None => self.factors.solve_in_place(b),
            Some(order) => {
                let mut tmp: Vec<f64> = order.iter().map(|&old| b[old]).collect();
                self.factors.solve_in_place(&mut tmp)?;
                for (new, &old) in order.iter().enumerate() {
                    b[old] = tmp[new];
                }
                Ok(())
            }
        }
    }
}

/// Banded solves along contiguous grid lines of equal length, run
/// interleaved on a transposed copy of the right-hand side.
struct TransposedLines {
    factors: InterleavedFactorization,
    len: usize,
    count: usize,
}

impl LinearSolve for TransposedLines {
    fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        if b.len() != self.len * self.count {
            return Err(Error::Dimension {
                expected: self.len * self.count,
                got: b.len(),
            });
        }
        let mut t = vec![0.0; b.len()];
        for (line, chunk) in b.chunks_exact(self.len).enumerate() {
            for (q, &x) in chunk.iter().enumerate() {
                t[q * self.count + line] = x;
            }
        }
        self.factors.solve_in_place(&mut t)?;
        for (line, chunk) in b.chunks_exact_mut(self.len).enumerate() {
            for (q, x) in chunk.iter_mut().enumerate() {
                *x = t[q * self.count + line];
            }
        }
        Ok(())
    }
}

impl LinearSolve for InterleavedFactorization {
    fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        InterleavedFactorization::solve_in_place(self, b)
    }
}

impl SplitSystem for OperatorSplit {
    fn dim(&self) -> usize {
        OperatorSplit::dim(self)
    }

    fn apply_matrix(&self, part: Part, w: &[f64], out: &mut [f64]) {
        self.mul_matrix(part, w, out);
    }

    fn add_forcing(&self, part: Part, t: f64, out: &mut [f64]) {
        OperatorSplit::add_forcing(self, part, t, out);
    }

    fn add_scaled_forcing(&self, part: Part, t: f64, scale: f64, out: &mut [f64]) {
        OperatorSplit::add_scaled_forcing(self, part, t, scale, out);
    }

    fn factor_directional(&self, part: Part, alpha: f64) -> Result<Box<dyn LinearSolve>> {
        let (m1, m2) = (self.grid().m1(), self.grid().m2());
        match part {
            Part::AlongS => {
                let lines = (0..m2)
                    .map(|j| linalg::banded_factor(&self.s_line_system(j, alpha)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(TransposedLines {
                    factors: InterleavedFactorization::new(&lines)?,
                    len: m1,
                    count: m2,
                }))
            }
            Part::AlongV => {
                let lines = (1..=m1)
                    .map(|i| linalg::banded_factor(&self.v_line_system(i, alpha)))
                    .collect::<Result<Vec<_>>>()?;
                // v-lines interleave: unknown (i, j) sits at j * m1 + (i - 1).
                Ok(Box::new(InterleavedFactorization::new(&lines)?))
            }
            other => Err(Error::Config(format!("no directional solver for {other:?}"))),
        }
    }

    fn factor_full(&self, alpha: f64) -> Result<Box<dyn LinearSolve>> {
        let m = self.matrix(Part::Full).shifted(1.0, -alpha);
        let (m1, m2) = (self.grid().m1(), self.grid().m2());
        // Number the shorter direction fastest to minimize the bandwidth.
        let order = (m2 < m1).then(|| {
            let mut ord = Vec::with_capacity(m1 * m2);
            for i in 1..=m1 {
                for j in 0..m2 {
                    ord.push(self.grid().index(i, j));
                }
            }
            ord
        });
        Ok(Box::new(PermutedBandedSolver::new(&m, order)?))
    }

    fn initial(&self) -> Vec<f64> {
        OperatorSplit::initial(self).to_vec()
    }
}

/// Forcing callback of a [`MatrixSplit`]: `out += b_part(t)` for a split part.
pub type ForcingFn = Arc<dyn Fn(Part, f64, &mut [f64]) + Send + Sync>;

/// Split system given by explicit matrices; used for small model problems.
#[derive(Clone)]
pub struct MatrixSplit {
    mats: [CsrMatrix; 3],
    full: CsrMatrix,
    forcing: Option<ForcingFn>,
    initial: Vec<f64>,
}

impl MatrixSplit {
    pub fn new(mats: [CsrMatrix; 3], initial: Vec<f64>) -> Self {
        let full = mats[0].add(&mats[1]).add(&mats[2]);
        Self {
            mats,
            full,
            forcing: None,
            initial,
        }
    }

    /// Scalar test problem `u' = (z0 + z1 + z2) u / dt`.
    pub fn scalar(z: [f64; 3], dt: f64) -> Self {
        let m = |zj: f64| CsrMatrix::from_triplets(1, 1, vec![(0, 0, zj / dt)]);
        Self::new([m(z[0]), m(z[1]), m(z[2])], vec![1.0])
    }

    pub fn with_forcing(mut self, forcing: ForcingFn) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Self {
        self.initial = initial;
        self
    }

    fn part_matrix(&self, part: Part) -> &CsrMatrix {
        match part {
            Part::Full => &self.full,
            Part::Mixed => &self.mats[0],
            Part::AlongS => &self.mats[1],
            Part::AlongV => &self.mats[2],
        }
    }
}

impl SplitSystem for MatrixSplit {
    fn dim(&self) -> usize {
        self.full.n_rows()
    }

    fn apply_matrix(&self, part: Part, w: &[f64], out: &mut [f64]) {
        self.part_matrix(part).mul_vec_into(w, out);
    }

    fn add_forcing(&self, part: Part, t: f64, out: &mut [f64]) {
        if let Some(f) = &self.forcing {
            match part {
                Part::Full => Part::SPLIT.iter().for_each(|&p| f(p, t, out)),
                p => f(p, t, out),
            }
        }
    }

    fn factor_directional(&self, part: Part, alpha: f64) -> Result<Box<dyn LinearSolve>> {
        let m = self.part_matrix(part).shifted(1.0, -alpha);
        Ok(Box::new(PermutedBandedSolver::new(&m, None)?))
    }

    fn factor_full(&self, alpha: f64) -> Result<Box<dyn LinearSolve>> {
        let m = self.full.shifted(1.0, -alpha);
        Ok(Box::new(PermutedBandedSolver::new(&m, None)?))
    }

    fn initial(&self) -> Vec<f64> {
        self.initial.clone()
    }
}

/// Time-stepping method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    CrankNicolson,
    Douglas,
    CraigSneyd,
    ModifiedCraigSneyd,
    HundsdorferVerwer,
    Rkc,
}

impl Scheme {
    pub fn is_adi(self) -> bool {
        !matches!(self, Scheme::CrankNicolson | Scheme::Rkc)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Scheme::CrankNicolson => "cn",
            Scheme::Douglas => "do",
            Scheme::CraigSneyd => "cs",
            Scheme::ModifiedCraigSneyd => "mcs",
            Scheme::HundsdorferVerwer => "hv",
            Scheme::Rkc => "rkc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

pub const THETA_HV1: f64 = 1.0 - 0.5 * std::f64::consts::SQRT_2;
pub fn theta_hv2() -> f64 {
    0.5 + 3f64.sqrt() / 6.0
}

/// A scheme together with its parameter, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedScheme {
    pub scheme: Scheme,
    pub theta: f64,
    pub label: &'static str,
}

impl FromStr for NamedScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (scheme, theta, label) = match s.to_ascii_lowercase().as_str() {
            "cn" => (Scheme::CrankNicolson, 0.5, "cn"),
            "do" => (Scheme::Douglas, 0.5, "do"),
            "cs" => (Scheme::CraigSneyd, 0.5, "cs"),
            "mcs" => (Scheme::ModifiedCraigSneyd, 1.0 / 3.0, "mcs"),
            "hv1" => (Scheme::HundsdorferVerwer, THETA_HV1, "hv1"),
            "hv" | "hv2" => (Scheme::HundsdorferVerwer, theta_hv2(), "hv2"),
            "rkc" => (Scheme::Rkc, 0.0, "rkc"),
            other => {
                return Err(Error::Config(format!(
                    "unknown scheme '{other}' (expected cn, do, cs, mcs, hv1, hv2, rkc)"
                )))
            }
        };
        Ok(Self { scheme, theta, label })
    }
}

/// Parameters of one time integration over `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Implicitness of the ADI correctors; ignored by CN and RKC.
    pub theta: f64,
    /// RKC damping parameter.
    pub eps: f64,
    /// Replace the first step by two backward-Euler half steps.
    pub damping: bool,
    pub steps: usize,
    pub horizon: f64,
    /// Spectral radius of `A` for the RKC stage count; estimated when `None`.
    pub spectral_radius: Option<f64>,
}

pub const RKC_EPS: f64 = 10.0;

impl SchemeConfig {
    pub fn new(named: NamedScheme, steps: usize, horizon: f64, damping: bool) -> Self {
        Self {
            scheme: named.scheme,
            theta: named.theta,
            eps: RKC_EPS,
            damping,
            steps,
            horizon,
            spectral_radius: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("number of steps must be >= 1".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.scheme.is_adi() && !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!("theta must be > 0, got {}", self.theta)));
        }
        if self.scheme == Scheme::Rkc && !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("RKC eps must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Factorizations and stage vectors for the ADI schemes at a fixed
/// `(theta, dt)`.
pub struct StepWorkspace {
    theta: f64,
    dt: f64,
    solve_s: Box<dyn LinearSolve>,
    solve_v: Box<dyn LinearSolve>,
    f_old: [Vec<f64>; 3],
    f_new: [Vec<f64>; 3],
    y0: Vec<f64>,
    y: Vec<f64>,
    rhs: Vec<f64>,
}

impl StepWorkspace {
    pub fn new(sys: &(impl SplitSystem + ?Sized), theta: f64, dt: f64) -> Result<Self> {
        let n = sys.dim();
        Ok(Self {
            theta,
            dt,
            solve_s: sys.factor_directional(Part::AlongS, theta * dt)?,
            solve_v: sys.factor_directional(Part::AlongV, theta * dt)?,
            f_old: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            f_new: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            y0: vec![0.0; n],
            y: vec![0.0; n],
            rhs: vec![0.0; n],
        })
    }

    fn ensure(&mut self, sys: &(impl SplitSystem + ?Sized), theta: f64, dt: f64) -> Result<()> {
        if self.theta != theta || self.dt != dt || self.y.len() != sys.dim() {
            *self = Self::new(sys, theta, dt)?;
        }
        Ok(())
    }
}

fn check_dim(sys: &(impl SplitSystem + ?Sized), u: &[f64]) -> Result<()> {
    if u.len() != sys.dim() {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Forward-Euler predictor `Y0 = U + dt F(t0, U)` followed by the two
/// unidirectional correctors. Leaves `F_j(t0, U)` in `ws.f_old`, `Y0` in
/// `ws.y0` and `Y2` in `ws.y`.
fn douglas_stages(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    u: &[f64],
    ws: &mut StepWorkspace,
) -> Result<()> {
    let dt = ws.dt;
    for (k, &part) in Part::SPLIT.iter().enumerate() {
        sys.eval(part, t0, u, &mut ws.f_old[k]);
    }
    ws.y0.copy_from_slice(u);
    for f in &ws.f_old {
        axpy(&mut ws.y0, dt, f);
    }
    let y0 = std::mem::take(&mut ws.y0);
    let old = std::mem::take(&mut ws.f_old);
    ws.y.copy_from_slice(&y0);
    corrector(sys, t0 + dt, &old, ws)?;
    ws.y0 = y0;
    ws.f_old = old;
    Ok(())
}

/// Two correctors on `ws.y`:
/// `Y_j = Y_{j-1} + theta dt (F_j(t1, Y_j) - subtract[j])`.
fn corrector(
    sys: &(impl SplitSystem + ?Sized),
    t1: f64,
    subtract: &[Vec<f64>; 3],
    ws: &mut StepWorkspace,
) -> Result<()> {
    let a = ws.theta * ws.dt;
    for (k, part) in [(1usize, Part::AlongS), (2, Part::AlongV)] {
        ws.rhs.copy_from_slice(&ws.y);
        axpy(&mut ws.rhs, -a, &subtract[k]);
        sys.add_scaled_forcing(part, t1, a, &mut ws.rhs);
        let solver = match part {
            Part::AlongS => ws.solve_s.as_ref(),
            _ => ws.solve_v.as_ref(),
        };
        solver.solve_in_place(&mut ws.rhs)?;
        std::mem::swap(&mut ws.y, &mut ws.rhs);
    }
    Ok(())
}

fn eval_parts(sys: &(impl SplitSystem + ?Sized), t: f64, w: &[f64], out: &mut [Vec<f64>; 3]) {
    for (k, &part) in Part::SPLIT.iter().enumerate() {
        sys.eval(part, t, w, &mut out[k]);
    }
}

/// Douglas scheme; returns `U_n = Y2`.
pub fn step_do(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    theta: f64,
    u: &[f64],
    ws: &mut StepWorkspace,
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    ws.ensure(sys, theta, dt)?;
    douglas_stages(sys, t0, u, ws)?;
    Ok(ws.y.clone())
}

/// Craig–Sneyd scheme: Douglas stages, a second predictor correcting the
/// explicit mixed part with weight 1/2, and two more correctors.
pub fn step_cs(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    theta: f64,
    u: &[f64],
    ws: &mut StepWorkspace,
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    ws.ensure(sys, theta, dt)?;
    douglas_stages(sys, t0, u, ws)?;
    let t1 = t0 + dt;
    sys.eval(Part::Mixed, t1, &ws.y, &mut ws.f_new[0]);
    ws.y.copy_from_slice(&ws.y0);
    axpy(&mut ws.y, 0.5 * dt, &ws.f_new[0]);
    axpy(&mut ws.y, -0.5 * dt, &ws.f_old[0]);
    let old = std::mem::take(&mut ws.f_old);
    let res = corrector(sys, t1, &old, ws);
    ws.f_old = old;
    res?;
    Ok(ws.y.clone())
}

/// Modified Craig–Sneyd scheme.
pub fn step_mcs(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    theta: f64,
    u: &[f64],
    ws: &mut StepWorkspace,
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    ws.ensure(sys, theta, dt)?;
    douglas_stages(sys, t0, u, ws)?;
    let t1 = t0 + dt;
    let mut f_new = std::mem::take(&mut ws.f_new);
    eval_parts(sys, t1, &ws.y, &mut f_new);
    ws.y.copy_from_slice(&ws.y0);
    axpy(&mut ws.y, theta * dt, &f_new[0]);
    axpy(&mut ws.y, -theta * dt, &ws.f_old[0]);
    let c = (0.5 - theta) * dt;
    if c != 0.0 {
        for k in 0..3 {
            axpy(&mut ws.y, c, &f_new[k]);
            axpy(&mut ws.y, -c, &ws.f_old[k]);
        }
    }
    ws.f_new = f_new;
    let old = std::mem::take(&mut ws.f_old);
    let res = corrector(sys, t1, &old, ws);
    ws.f_old = old;
    res?;
    Ok(ws.y.clone())
}

/// Hundsdorfer–Verwer scheme. The second correctors difference against
/// `F_j(t_n, Y2)`.
pub fn step_hv(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    theta: f64,
    u: &[f64],
    ws: &mut StepWorkspace,
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    ws.ensure(sys, theta, dt)?;
    douglas_stages(sys, t0, u, ws)?;
    let t1 = t0 + dt;
    let mut f_new = std::mem::take(&mut ws.f_new);
    eval_parts(sys, t1, &ws.y, &mut f_new);
    ws.y.copy_from_slice(&ws.y0);
    for k in 0..3 {
        axpy(&mut ws.y, 0.5 * dt, &f_new[k]);
        axpy(&mut ws.y, -0.5 * dt, &ws.f_old[k]);
    }
    let res = corrector(sys, t1, &f_new, ws);
    ws.f_new = f_new;
    res?;
    Ok(ws.y.clone())
}

/// Crank–Nicolson step with a pre-factored `I - dt/2 A`.
pub fn step_cn(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    u: &[f64],
    half_step_solver: &dyn LinearSolve,
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    let mut f = vec![0.0; u.len()];
    sys.eval(Part::Full, t0, u, &mut f);
    let mut rhs = u.to_vec();
    axpy(&mut rhs, 0.5 * dt, &f);
    f.iter_mut().for_each(|x| *x = 0.0);
    sys.add_forcing(Part::Full, t0 + dt, &mut f);
    axpy(&mut rhs, 0.5 * dt, &f);
    half_step_solver.solve_in_place(&mut rhs)?;
    Ok(rhs)
}

/// Backward-Euler step `(I - h A) U1 = U0 + h b(t0 + h)` with a pre-factored
/// `I - h A`.
pub fn step_backward_euler(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    h: f64,
    u: &[f64],
    solver: &dyn LinearSolve,
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    let mut b = vec![0.0; u.len()];
    sys.add_forcing(Part::Full, t0 + h, &mut b);
    let mut rhs = u.to_vec();
    axpy(&mut rhs, h, &b);
    solver.solve_in_place(&mut rhs)?;
    Ok(rhs)
}

/// Smallest `nu >= sqrt(1 + 3 dt r)`, at least two.
pub fn rkc_stage_count(dt: f64, spectral_radius: f64) -> usize {
    let nu = (1.0 + 3.0 * dt * spectral_radius).sqrt().ceil();
    (nu as usize).max(2)
}

/// Coefficients of the damped second-order Runge–Kutta–Chebyshev method.
#[derive(Debug, Clone)]
pub struct RkcCoefficients {
    /// Per stage `j = 1..=nu` (index `j - 1`): `mu, nu, mu_tilde, gamma_tilde, c_{j-1}`.
    stages: Vec<RkcStage>,
}

#[derive(Debug, Clone, Copy)]
struct RkcStage {
    mu: f64,
    nu: f64,
    mu_t: f64,
    gamma_t: f64,
    /// Time fraction at which the previous stage lives.
    c_prev: f64,
}

impl RkcCoefficients {
    pub fn new(stages: usize, eps: f64) -> Self {
        assert!(stages >= 2, "RKC needs at least two stages");
        let s = stages as f64;
        let w0 = 1.0 + eps / (s * s);
        let t1 = w0 * w0 - 1.0;
        let t2 = t1.sqrt();
        let arg = s * (w0 + t2).ln();
        let w1 = arg.sinh() * t1 / (arg.cosh() * s * t2 - w0 * arg.sinh());

        // Chebyshev polynomial T_j and its first two derivatives at w0.
        let (mut z_m2, mut dz_m2, mut d2z_m2) = (1.0, 0.0, 0.0);
        let (mut z_m1, mut dz_m1, mut d2z_m1) = (w0, 1.0, 0.0);
        let b_start = 1.0 / (4.0 * w0 * w0);
        let (mut b_m2, mut b_m1) = (b_start, b_start);
        let (mut c_m2, mut c_m1) = (0.0, w1 * b_start);

        let mut out = Vec::with_capacity(stages);
        out.push(RkcStage {
            mu: 0.0,
            nu: 0.0,
            mu_t: w1 * b_start,
            gamma_t: 0.0,
            c_prev: 0.0,
        });
        for _ in 2..=stages {
            let z = 2.0 * w0 * z_m1 - z_m2;
            let dz = 2.0 * w0 * dz_m1 - dz_m2 + 2.0 * z_m1;
            let d2z = 2.0 * w0 * d2z_m1 - d2z_m2 + 4.0 * dz_m1;
            let b = d2z / (dz * dz);
            let a_m1 = 1.0 - z_m1 * b_m1;
            let mu = 2.0 * w0 * b / b_m1;
            let nu = -b / b_m2;
            let mu_t = mu * w1 / w0;
            out.push(RkcStage {
                mu,
                nu,
                mu_t,
                gamma_t: -a_m1 * mu_t,
                c_prev: c_m1,
            });
            let c = mu * c_m1 + nu * c_m2 + mu_t * (1.0 - a_m1);
            (c_m2, c_m1) = (c_m1, c);
            (z_m2, z_m1) = (z_m1, z);
            (dz_m2, dz_m1) = (dz_m1, dz);
            (d2z_m2, d2z_m1) = (d2z_m1, d2z);
            (b_m2, b_m1) = (b_m1, b);
        }
        Self { stages: out }
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// One RKC step with precomputed coefficients.
pub fn step_rkc_with(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    coeffs: &RkcCoefficients,
    u: &[f64],
) -> Result<Vec<f64>> {
    check_dim(sys, u)?;
    let n = u.len();
    let mut f0 = vec![0.0; n];
    sys.eval(Part::Full, t0, u, &mut f0);
    let mut y_m2 = u.to_vec();
    let mut y_m1 = u.to_vec();
    axpy(&mut y_m1, coeffs.stages[0].mu_t * dt, &f0);
    let mut f = vec![0.0; n];
    let mut y = vec![0.0; n];
    for st in &coeffs.stages[1..] {
        sys.eval(Part::Full, t0 + st.c_prev * dt, &y_m1, &mut f);
        let w = 1.0 - st.mu - st.nu;
        for k in 0..n {
            y[k] = w * u[k] + st.mu * y_m1[k] + st.nu * y_m2[k] + dt * (st.mu_t * f[k] + st.gamma_t * f0[k]);
        }
        std::mem::swap(&mut y_m2, &mut y_m1);
        std::mem::swap(&mut y_m1, &mut y);
    }
    Ok(y_m1)
}

/// One RKC step with `stages` stages and damping `eps`.
pub fn step_rkc(
    sys: &(impl SplitSystem + ?Sized),
    t0: f64,
    dt: f64,
    stages: usize,
    eps: f64,
    u: &[f64],
) -> Result<Vec<f64>> {
    step_rkc_with(sys, t0, dt, &RkcCoefficients::new(stages, eps), u)
}

/// Power-iteration estimate of the spectral radius of `A`.
pub fn estimate_spectral_radius(sys: &(impl SplitSystem + ?Sized)) -> linalg::SpectralEstimate {
    linalg::spectral_radius(
        sys.dim(),
        |x, y| sys.apply_matrix(Part::Full, x, y),
        SPECTRAL_TOL,
        SPECTRAL_MAX_ITERS,
    )
}

/// Result of [`solve_detailed`].
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub u: Vec<f64>,
    /// RKC stage count used, when the scheme is RKC.
    pub rkc_stages: Option<usize>,
    pub spectral_radius: Option<f64>,
}

/// Integrates from `t = 0` to `cfg.horizon` in `cfg.steps` steps.
///
/// With damping, the first step is replaced by two backward-Euler steps of
/// size `dt/2` on the unsplit operator, after which the scheme proceeds from
/// `t = dt`.
pub fn solve(sys: &(impl SplitSystem + ?Sized), cfg: &SchemeConfig) -> Result<Vec<f64>> {
    Ok(solve_detailed(sys, cfg)?.u)
}

pub fn solve_detailed(sys: &(impl SplitSystem + ?Sized), cfg: &SchemeConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let dt = cfg.dt();
    let mut u = sys.initial();
    check_dim(sys, &u)?;
    let mut first = 0usize;

    // CN and the damping steps share the factorization of I - dt/2 A.
    let needs_half = cfg.damping || cfg.scheme == Scheme::CrankNicolson;
    let half = if needs_half {
        Some(sys.factor_full(0.5 * dt)?)
    } else {
        None
    };
    if cfg.damping {
        let h = 0.5 * dt;
        let solver = half.as_deref().expect("factored above");
        u = step_backward_euler(sys, 0.0, h, &u, solver)?;
        u = step_backward_euler(sys, h, h, &u, solver)?;
        first = 1;
    }

    let mut rkc_stages = None;
    let mut spectral_radius = None;
    match cfg.scheme {
        Scheme::CrankNicolson => {
            let solver = half.as_deref().expect("factored above");
            for n in first..cfg.steps {
                u = step_cn(sys, n as f64 * dt, dt, &u, solver)?;
            }
        }
        Scheme::Rkc => {
            let r = match cfg.spectral_radius {
                Some(r) => r,
                None => estimate_spectral_radius(sys).value,
            };
            let stages = rkc_stage_count(dt, r);
            let coeffs = RkcCoefficients::new(stages, cfg.eps);
            for n in first..cfg.steps {
                u = step_rkc_with(sys, n as f64 * dt, dt, &coeffs, &u)?;
            }
            rkc_stages = Some(stages);
            spectral_radius = Some(r);
        }
        adi => {
            let mut ws = StepWorkspace::new(sys, cfg.theta, dt)?;
            let step = match adi {
                Scheme::Douglas => step_do,
                Scheme::CraigSneyd => step_cs,
                Scheme::ModifiedCraigSneyd => step_mcs,
                Scheme::HundsdorferVerwer => step_hv,
                _ => unreachable!(),
            };
            for n in first..cfg.steps {
                u = step(sys, n as f64 * dt, dt, cfg.theta, &u, &mut ws)?;
            }
        }
    }
    Ok(SolveOutput {
        u,
        rkc_stages,
        spectral_radius,
    })
}
