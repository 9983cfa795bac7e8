//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use whittaker_core::SpectralParameter;

/// A regular parameter of rank `n <= 4`, well away from the walls so the
/// series stays in double-double.
pub fn sample_nu(n: usize) -> SpectralParameter {
    let table = [(0.21, 0.33), (-0.12, 0.41), (0.07, -0.25), (0.31, 0.12)];
    let nu = table[..n].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    SpectralParameter::new(nu).expect("sample parameter is valid")
}
