//! Finite-difference pricing of options under the Heston stochastic volatility
//! model.
//!
//! The two-dimensional Heston PDE (asset price `s`, variance `v`) is
//! semi-discretized on sinh-stretched non-uniform meshes, split into a
//! mixed-derivative part and one part per spatial direction, and integrated in
//! time with ADI schemes (Douglas, Craig–Sneyd, modified Craig–Sneyd,
//! Hundsdorfer–Verwer), Crank–Nicolson or a Runge–Kutta–Chebyshev method.
//! A semi-analytic Fourier pricer provides exact European call prices for
//! error measurement.
//!
//! Module map:
//!
//! * [`model`]: parameters, option contracts, benchmark cases, boundary data.
//! * [`grid`]: non-uniform meshes and the unknown-index map.
//! * [`discretization`]: stencils and assembly of the split operator.
//! * [`linalg`]: sparse and banded matrices, banded LU, power iteration.
//! * [`timestep`]: one-step schemes and the solve driver.
//! * [`reference`]: semi-analytic European call prices.
//! * [`harness`]: spatial/temporal error studies and order fitting.
//! * [`cli`]: command-line front end.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod reference;
pub mod timestep;

pub use error::{Error, Result};
