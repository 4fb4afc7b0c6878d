//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use heston_adi::discretization::{OperatorSplit, Part};
use heston_adi::model::{boundary_values, HestonParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Weights of the `deriv`-th derivative (1 or 2) at `at` of the quadratic
/// interpolant through `x`.
pub fn lagrange_weights(x: [f64; 3], at: f64, deriv: u32) -> [f64; 3] {
    let mut w = [0.0; 3];
    for k in 0..3 {
        let denom: f64 = (0..3).filter(|&m| m != k).map(|m| x[k] - x[m]).product();
        let others: Vec<f64> = (0..3).filter(|&m| m != k).map(|m| x[m]).collect();
        w[k] = match deriv {
            1 => ((at - others[0]) + (at - others[1])) / denom,
            2 => 2.0 / denom,
            _ => panic!("derivative order {deriv} not supported"),
        };
    }
    w
}

/// A value and the magnitude sum of the products that formed it.
#[derive(Debug, Clone, Copy, Default)]
pub struct Scaled {
    pub value: f64,
    pub scale: f64,
}

impl Scaled {
    fn add(&mut self, c: f64, u: f64) {
        self.value += c * u;
        self.scale += (c * u).abs();
    }
}

/// Semi-discrete action `(A U + b(t))` computed node by node from the PDE,
/// without the split. `interior[k]` holds the unknowns.
pub fn monolithic_action(op: &OperatorSplit, t: f64, interior: &[f64]) -> Vec<Scaled> {
    let g = op.grid();
    let (m1, m2) = (g.m1(), g.m2());
    let s = g.s_mesh().nodes();
    let v = g.v_mesh().nodes();
    let p = *op.params();
    let bv = boundary_values(&p, op.spec(), t);
    let u = |i: usize, j: usize| -> f64 {
        if j == m2 {
            bv.top_dirichlet(s[i])
        } else if i == 0 {
            bv.left_dirichlet(v[j])
        } else {
            interior[g.index(i, j)]
        }
    };
    let mut out = vec![Scaled::default(); g.len()];
    for j in 0..m2 {
        for i in 1..=m1 {
            let mut acc = Scaled::default();
            let (si, vj) = (s[i], v[j]);
            let diff_s = 0.5 * si * si * vj;
            let conv_s = (p.r_d - p.r_f) * si;
            if i < m1 {
                let xs = [s[i - 1], s[i], s[i + 1]];
                let d1 = lagrange_weights(xs, si, 1);
                let d2 = lagrange_weights(xs, si, 2);
                for k in 0..3 {
                    acc.add(diff_s * d2[k] + conv_s * d1[k], u(i + k - 1, j));
                }
                if j > 0 {
                    let ys = [v[j - 1], v[j], v[j + 1]];
                    let dy = lagrange_weights(ys, vj, 1);
                    let mix = p.rho * p.sigma * si * vj;
                    for k in 0..3 {
                        for l in 0..3 {
                            acc.add(mix * d1[k] * dy[l], u(i + k - 1, j + l - 1));
                        }
                    }
                }
            } else {
                let h = s[m1] - s[m1 - 1];
                let gn = bv.right_neumann();
                let virt = u(m1, j) + h * gn;
                acc.add(diff_s / (h * h), u(m1 - 1, j));
                acc.add(-2.0 * diff_s / (h * h), u(m1, j));
                acc.add(diff_s / (h * h), virt);
                acc.add(conv_s, gn);
            }
            let drift = p.kappa * (p.eta - vj);
            let (lo, at) = if j == 0 {
                (0, 0)
            } else if vj > 1.0 && drift < 0.0 {
                (j - 2, 2)
            } else {
                (j - 1, 1)
            };
            let dv = lagrange_weights([v[lo], v[lo + 1], v[lo + 2]], v[lo + at], 1);
            for k in 0..3 {
                acc.add(drift * dv[k], u(i, lo + k));
            }
            if j > 0 {
                let d2 = lagrange_weights([v[j - 1], v[j], v[j + 1]], vj, 2);
                for k in 0..3 {
                    acc.add(0.5 * p.sigma * p.sigma * vj * d2[k], u(i, j + k - 1));
                }
            }
            acc.add(-p.r_d, u(i, j));
            out[g.index(i, j)] = acc;
        }
    }
    out
}

/// `A_part w + b_part(t)` through the library.
pub fn split_action(op: &OperatorSplit, part: Part, t: f64, w: &[f64]) -> Vec<f64> {
    op.apply(part, t, w).expect("dimensions agree")
}

/// Black–Scholes call with domestic and foreign rates.
pub fn black_scholes_call(spot: f64, strike: f64, maturity: f64, vol: f64, r_d: f64, r_f: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    let sd = vol * maturity.sqrt();
    let d1 = ((spot / strike).ln() + (r_d - r_f + 0.5 * vol * vol) * maturity) / sd;
    let d2 = d1 - sd;
    spot * (-r_f * maturity).exp() * n.cdf(d1) - strike * (-r_d * maturity).exp() * n.cdf(d2)
}

/// Monte Carlo estimate of a call and its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
}

/// Full-truncation Euler for the variance with log-Euler for the asset.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_call(
    params: &HestonParams,
    spot: f64,
    variance: f64,
    strike: f64,
    maturity: f64,
    paths: usize,
    steps: usize,
    seed: u64,
) -> McEstimate {
    const CHUNK: usize = 50_000;
    let dt = maturity / steps as f64;
    let sq_dt = dt.sqrt();
    let rho_c = (1.0 - params.rho * params.rho).sqrt();
    let discount = (-params.r_d * maturity).exp();
    let chunks = paths.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
            let count = CHUNK.min(paths - c * CHUNK);
            let (mut a, mut b) = (0.0, 0.0);
            for _ in 0..count {
                let (mut x, mut v) = (spot.ln(), variance);
                for _ in 0..steps {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    let vp = v.max(0.0);
                    let sv = vp.sqrt() * sq_dt;
                    x += (params.r_d - params.r_f - 0.5 * vp) * dt + sv * z1;
                    v += params.kappa * (params.eta - vp) * dt
                        + params.sigma * sv * (params.rho * z1 + rho_c * z2);
                }
                let pay = discount * (x.exp() - strike).max(0.0);
                a += pay;
                b += pay * pay;
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let n = paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    McEstimate {
        price: mean,
        std_error: (var / n).sqrt(),
    }
}

/// Dense LU with partial pivoting; solves `a x = b`.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .expect("non-empty column");
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}
