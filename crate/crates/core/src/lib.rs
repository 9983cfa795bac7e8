//! Class-one Whittaker functions on SO(2n+1, ℝ).
//!
//! Three independent evaluation routes are provided and cross-checked:
//! the Weyl-symmetrized power series ([`series`]), recursive quadrature of
//! the exponential and K-Bessel integral representations ([`quadrature`]),
//! and the Mellin–Barnes recursion for the Mellin transform ([`mellin`]).

pub mod coefficients;
pub mod error;
pub mod report;
pub mod rootdata;
pub mod series;
pub mod mellin;
pub mod quadrature;
pub mod specfun;
pub mod verify;
pub mod wide;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use report::EvalReport;
pub use rootdata::{RadialPoint, SpectralParameter, WeylElement};

pub type ComplexScalar = Complex64;

/// `{re, im}` form used in every JSON artifact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl From<Cx> for Complex64 {
    fn from(z: Cx) -> Self {
        Complex64::new(z.re, z.im)
    }
}
