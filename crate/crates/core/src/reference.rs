//! Semi-analytic European call prices under the Heston model.
//!
//! Prices follow from Fourier inversion of the characteristic function of
//! `ln S_T`. The characteristic function is evaluated in the form whose
//! complex logarithm stays on the principal branch for all real arguments,
//! so no branch tracking is needed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{HestonParams, OptionSpec};

/// A single pricing request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingQuery {
    pub params: HestonParams,
    pub spot: f64,
    pub variance: f64,
    pub strike: f64,
    pub maturity: f64,
}

impl PricingQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return Err(Error::Range(format!("spot must be > 0, got {}", self.spot)));
        }
        if !(self.variance >= 0.0 && self.variance.is_finite()) {
            return Err(Error::Range(format!("variance must be >= 0, got {}", self.variance)));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::Range(format!("strike must be > 0, got {}", self.strike)));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::Range(format!("maturity must be > 0, got {}", self.maturity)));
        }
        Ok(())
    }
}

/// `E[exp(i u ln S_T)]` given `S_0 = spot`, `v_0 = variance`.
pub fn char_fn(params: &HestonParams, spot: f64, variance: f64, maturity: f64, u: Complex64) -> Complex64 {
    let HestonParams {
        kappa,
        eta,
        sigma,
        rho,
        r_d,
        r_f,
    } = *params;
    let i = Complex64::i();
    let iu = i * u;
    let beta = kappa - rho * sigma * iu;
    let d = (beta * beta + sigma * sigma * (iu + u * u)).sqrt();
    let minus = beta - d;
    let g = minus / (beta + d);
    let e = (-d * maturity).exp();
    let one = Complex64::new(1.0, 0.0);
    let s2 = sigma * sigma;
    let drift = iu * (spot.ln() + (r_d - r_f) * maturity);
    let mean_term = eta * kappa / s2 * (minus * maturity - 2.0 * ((one - g * e) / (one - g)).ln());
    let var_term = variance / s2 * minus * (one - e) / (one - g * e);
    (drift + mean_term + var_term).exp()
}

/// The two exercise probabilities of the call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probabilities {
    /// Probability of exercise under the share measure.
    pub p1: f64,
    /// Probability of exercise under the risk-neutral measure.
    pub p2: f64,
}

const QUAD_ABS_TOL: f64 = 1e-11;
const TAIL_TOL: f64 = 1e-12;
const U_START: f64 = 200.0;
const MAX_DOUBLINGS: usize = 16;

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = h * XGK[k];
        let sum = f(c - x) + f(c + x);
        kron += WGK[k] * sum;
        if k % 2 == 1 {
            gauss += WG[k / 2] * sum;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`, bisecting the interval with the largest error estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut pieces = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let (total_err, worst) = pieces
            .iter()
            .enumerate()
            .fold((0.0, 0usize), |(sum, w), (k, p)| {
                let w = if p.2 .1 > pieces[w].2 .1 { k } else { w };
                (sum + p.2 .1, w)
            });
        if total_err <= tol {
            break;
        }
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(&f, lo, mid)));
        pieces.push((mid, hi, gk15(&f, mid, hi)));
    }
    pieces
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.2 .0, e + p.2 .1))
}

/// Computes `P1` and `P2` by Fourier inversion.
pub fn probabilities(q: &PricingQuery) -> Result<Probabilities> {
    q.validate()?;
    let forward_growth = q.spot * ((q.params.r_d - q.params.r_f) * q.maturity).exp();
    let ln_k = q.strike.ln();
    let i = Complex64::i();
    let cf = |u: Complex64| char_fn(&q.params, q.spot, q.variance, q.maturity, u);
    // Integrand Re[e^{-iu ln K} phi_j(u) / (iu)].
    let integrand = |u: f64, shifted: bool| -> f64 {
        let phi = if shifted {
            cf(Complex64::new(u, -1.0)) / forward_growth
        } else {
            cf(Complex64::new(u, 0.0))
        };
        ((-i * u * ln_k).exp() * phi / (i * u)).re
    };
    let envelope = |u: f64, shifted: bool| -> f64 {
        let phi = if shifted {
            cf(Complex64::new(u, -1.0)) / forward_growth
        } else {
            cf(Complex64::new(u, 0.0))
        };
        phi.norm() / u
    };

    let mut probs = [0.0; 2];
    for (slot, shifted) in [(0usize, true), (1, false)] {
        let f = |u: f64| integrand(u, shifted);
        let (mut total, _) = integrate(f, 0.0, U_START, QUAD_ABS_TOL);
        let mut hi = U_START;
        let mut doublings = 0;
        while envelope(hi, shifted) >= TAIL_TOL {
            if doublings == MAX_DOUBLINGS {
                return Err(Error::Quadrature(format!(
                    "integrand tail still {:.3e} at u = {hi}",
                    envelope(hi, shifted)
                )));
            }
            total += integrate(f, hi, 2.0 * hi, QUAD_ABS_TOL).0;
            hi *= 2.0;
            doublings += 1;
        }
        probs[slot] = 0.5 + total / PI;
    }
    Ok(Probabilities {
        p1: probs[0],
        p2: probs[1],
    })
}

fn discounts(q: &PricingQuery) -> (f64, f64) {
    (
        q.spot * (-q.params.r_f * q.maturity).exp(),
        q.strike * (-q.params.r_d * q.maturity).exp(),
    )
}

pub fn call_from(q: &PricingQuery, p: &Probabilities) -> f64 {
    let (fwd, k) = discounts(q);
    fwd * p.p1 - k * p.p2
}

pub fn put_from(q: &PricingQuery, p: &Probabilities) -> f64 {
    let (fwd, k) = discounts(q);
    k * (1.0 - p.p2) - fwd * (1.0 - p.p1)
}

/// European call price `s e^{-r_f T} P1 - K e^{-r_d T} P2`.
pub fn call_price(q: &PricingQuery) -> Result<f64> {
    let p = probabilities(q)?;
    Ok(call_from(q, &p))
}

/// Exact call prices on a tensor of nodes, `out[j][i]` at `(s_nodes[i], v_nodes[j])`.
pub fn price_surface(params: &HestonParams, spec: &OptionSpec, s_nodes: &[f64], v_nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
    v_nodes
        .par_iter()
        .map(|&v| {
            s_nodes
                .iter()
                .map(|&s| {
                    call_price(&PricingQuery {
                        params: *params,
                        spot: s,
                        variance: v,
                        strike: spec.strike,
                        maturity: spec.maturity,
                    })
                })
                .collect()
        })
        .collect()
}
