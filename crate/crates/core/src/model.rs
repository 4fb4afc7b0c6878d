//! Heston parameters, option contracts and the boundary data of the pricing
//! problem.
//!
//! Time `t` runs forward from the payoff: `u(s, v, t)` is the option value
//! when `t` units of time remain until maturity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the Heston PDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    /// Mean-reversion rate of the variance.
    pub kappa: f64,
    /// Long-term mean of the variance.
    pub eta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Correlation between the asset and variance Brownian motions.
    pub rho: f64,
    /// Domestic interest rate.
    pub r_d: f64,
    /// Foreign interest rate (or continuous dividend yield).
    pub r_f: f64,
}

impl HestonParams {
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.kappa * self.eta > self.sigma * self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    EuropeanCall,
    DownAndOutCall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub kind: OptionKind,
    pub strike: f64,
    pub maturity: f64,
    /// Present iff `kind` is [`OptionKind::DownAndOutCall`].
    pub barrier: Option<f64>,
}

impl OptionSpec {
    pub fn european_call(strike: f64, maturity: f64) -> Self {
        Self {
            kind: OptionKind::EuropeanCall,
            strike,
            maturity,
            barrier: None,
        }
    }

    pub fn down_and_out_call(strike: f64, maturity: f64, barrier: f64) -> Self {
        Self {
            kind: OptionKind::DownAndOutCall,
            strike,
            maturity,
            barrier: Some(barrier),
        }
    }

    /// Lower end of the `s` domain: the barrier for knock-out contracts, else 0.
    pub fn lower_s(&self) -> f64 {
        self.barrier.unwrap_or(0.0)
    }
}

/// Truncation of the computational domain and mesh concentration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub s_max: f64,
    pub v_max: f64,
    /// Concentration of `s` nodes around the strike.
    pub c: f64,
    /// Concentration of `v` nodes around zero.
    pub d: f64,
}

impl DomainSpec {
    /// `S = 8K` (`14K` for barrier contracts), `V = 5`, `c = K/5`, `d = V/500`.
    pub fn default_for(spec: &OptionSpec) -> Self {
        let factor = match spec.kind {
            OptionKind::EuropeanCall => 8.0,
            OptionKind::DownAndOutCall => 14.0,
        };
        let v_max = 5.0;
        Self {
            s_max: factor * spec.strike,
            v_max,
            c: spec.strike / 5.0,
            d: v_max / 500.0,
        }
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Range(format!("{name} must be finite, got {x}")))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    check_finite(name, x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("{name} must be > 0, got {x}")))
    }
}

/// Checks all parameter and contract invariants and returns the pair unchanged.
pub fn validate(params: HestonParams, spec: OptionSpec) -> Result<(HestonParams, OptionSpec)> {
    check_positive("kappa", params.kappa)?;
    check_positive("eta", params.eta)?;
    check_positive("sigma", params.sigma)?;
    check_finite("rho", params.rho)?;
    if !(-1.0..=1.0).contains(&params.rho) {
        return Err(Error::Range(format!("rho must lie in [-1, 1], got {}", params.rho)));
    }
    check_finite("r_d", params.r_d)?;
    check_finite("r_f", params.r_f)?;
    check_positive("K", spec.strike)?;
    check_positive("T", spec.maturity)?;
    match (spec.kind, spec.barrier) {
        (OptionKind::EuropeanCall, None) => {}
        (OptionKind::EuropeanCall, Some(_)) => {
            return Err(Error::Range("a European call takes no barrier".into()));
        }
        (OptionKind::DownAndOutCall, None) => {
            return Err(Error::Range("a down-and-out call needs a barrier".into()));
        }
        (OptionKind::DownAndOutCall, Some(b)) => {
            if !(b.is_finite() && b > 0.0 && b < spec.strike) {
                return Err(Error::Barrier {
                    barrier: b,
                    strike: spec.strike,
                });
            }
        }
    }
    if !params.feller_satisfied() {
        return Err(Error::FellerViolation {
            lhs: 2.0 * params.kappa * params.eta,
            rhs: params.sigma * params.sigma,
        });
    }
    Ok((params, spec))
}

pub fn validate_domain(spec: &OptionSpec, domain: &DomainSpec) -> Result<()> {
    check_positive("V", domain.v_max)?;
    check_positive("c", domain.c)?;
    check_positive("d", domain.d)?;
    check_finite("S", domain.s_max)?;
    if domain.s_max <= spec.strike {
        return Err(Error::Range(format!(
            "S = {} must exceed K = {}",
            domain.s_max, spec.strike
        )));
    }
    Ok(())
}

/// The four parameter sets used throughout the convergence studies.
pub fn benchmark_case(id: u32) -> Result<(HestonParams, OptionSpec, DomainSpec)> {
    let (kappa, eta, sigma, rho, r_d, r_f, maturity) = match id {
        1 => (1.5, 0.04, 0.3, -0.9, 0.025, 0.0, 1.0),
        2 => (3.0, 0.12, 0.04, 0.6, 0.01, 0.04, 1.0),
        3 => (0.6067, 0.0707, 0.2928, -0.7571, 0.03, 0.0, 3.0),
        4 => (2.5, 0.06, 0.5, -0.1, 0.0507, 0.0469, 0.25),
        other => return Err(Error::UnknownCase(other)),
    };
    let params = HestonParams {
        kappa,
        eta,
        sigma,
        rho,
        r_d,
        r_f,
    };
    let spec = OptionSpec::european_call(100.0, maturity);
    Ok((params, spec, DomainSpec::default_for(&spec)))
}

/// Barrier variant of a benchmark case: same model, knock-out at `barrier`
/// and the wider `S = 14K` truncation.
pub fn barrier_case(id: u32, barrier: f64) -> Result<(HestonParams, OptionSpec, DomainSpec)> {
    let (params, call, _) = benchmark_case(id)?;
    let spec = OptionSpec::down_and_out_call(call.strike, call.maturity, barrier);
    validate(params, spec)?;
    Ok((params, spec, DomainSpec::default_for(&spec)))
}

/// Payoff `max(0, s - K)`; knock-out contracts reject `s` below the barrier.
pub fn payoff(spec: &OptionSpec, s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::Domain(format!("negative asset price {s}")));
    }
    if let Some(b) = spec.barrier {
        if s < b {
            return Err(Error::Domain(format!("s = {s} lies below the barrier {b}")));
        }
    }
    Ok((s - spec.strike).max(0.0))
}

/// Boundary data of the truncated problem at a fixed time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    lower_s: f64,
    discount_f: f64,
}

impl BoundaryValues {
    /// Dirichlet value on the lower `s` edge (`s = 0` or `s = B`).
    pub fn left_dirichlet(&self, _v: f64) -> f64 {
        0.0
    }

    /// Dirichlet value on the upper `v` edge, `(s - s_low) e^{-r_f t}`.
    pub fn top_dirichlet(&self, s: f64) -> f64 {
        (s - self.lower_s) * self.discount_f
    }

    /// Neumann datum `du/ds` on the `s = S` edge.
    pub fn right_neumann(&self) -> f64 {
        self.discount_f
    }
}

pub fn boundary_values(params: &HestonParams, spec: &OptionSpec, t: f64) -> BoundaryValues {
    BoundaryValues {
        lower_s: spec.lower_s(),
        discount_f: (-params.r_f * t).exp(),
    }
}

/// JSON model configuration. Missing domain keys take [`DomainSpec::default_for`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kappa: f64,
    pub eta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub rd: f64,
    pub rf: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
    #[serde(rename = "K")]
    pub strike: f64,
    #[serde(default = "default_kind")]
    pub kind: OptionKind,
    #[serde(default)]
    pub barrier: Option<f64>,
    #[serde(rename = "S", default)]
    pub s_max: Option<f64>,
    #[serde(rename = "V", default)]
    pub v_max: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
}

fn default_kind() -> OptionKind {
    OptionKind::EuropeanCall
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Validates and resolves defaults.
    pub fn resolve(&self) -> Result<(HestonParams, OptionSpec, DomainSpec)> {
        let params = HestonParams {
            kappa: self.kappa,
            eta: self.eta,
            sigma: self.sigma,
            rho: self.rho,
            r_d: self.rd,
            r_f: self.rf,
        };
        let spec = OptionSpec {
            kind: self.kind,
            strike: self.strike,
            maturity: self.maturity,
            barrier: self.barrier,
        };
        let (params, spec) = validate(params, spec)?;
        let mut domain = DomainSpec::default_for(&spec);
        if let Some(s) = self.s_max {
            domain.s_max = s;
        }
        if let Some(v) = self.v_max {
            domain.v_max = v;
            if self.d.is_none() {
                domain.d = v / 500.0;
            }
        }
        if let Some(c) = self.c {
            domain.c = c;
        }
        if let Some(d) = self.d {
            domain.d = d;
        }
        validate_domain(&spec, &domain)?;
        Ok((params, spec, domain))
    }
}
