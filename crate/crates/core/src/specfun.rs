//! Scalar kernels: log-Gamma, Pochhammer, K-Bessel of complex order and
//! Gauss's 2F1 at unit argument. Double precision throughout.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance to a non-positive integer below which a Gamma pole is reported.
pub const POLE_TOL: f64 = 1e-10;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `Γ(z)` carried as modulus logarithm and phase.
///
/// `phase` is the principal argument of `Γ(z)`, in `(-π, π]`. Products of
/// such values are formed by adding fields; wrap the phase only when needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGammaValue {
    pub log_modulus: f64,
    pub phase: f64,
}

impl LogGammaValue {
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }

    /// `log_modulus + i·phase`.
    pub fn ln(self) -> Complex64 {
        Complex64::new(self.log_modulus, self.phase)
    }
}

/// Distance from `z` to the nearest non-positive integer.
pub fn pole_distance(z: Complex64) -> f64 {
    let k = z.re.round().min(0.0);
    Complex64::new(z.re - k, z.im).norm()
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `sin(πz)` with the real part reduced exactly before scaling.
fn sin_pi(z: Complex64) -> Complex64 {
    let k = z.re.round();
    let x = z.re - k;
    let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
    let (s, c) = (PI * x).sin_cos();
    let y = PI * z.im;
    Complex64::new(sign * s * y.cosh(), sign * c * y.sinh())
}

fn lanczos_ln(z: Complex64) -> Complex64 {
    // ln Γ(z) for Re z >= 1/2
    let zm = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (zm + k as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm + 0.5) * t.ln() - t + a.ln()
}

pub fn log_gamma(z: Complex64) -> Result<LogGammaValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("log_gamma of non-finite argument {z}")));
    }
    if pole_distance(z) < POLE_TOL {
        return Err(Error::Pole(format!("Gamma({}{:+}i) is within {POLE_TOL:e} of a pole", z.re, z.im)));
    }
    let l = if z.re < 0.5 {
        Complex64::new(PI.ln(), 0.0) - sin_pi(z).ln() - lanczos_ln(1.0 - z)
    } else {
        lanczos_ln(z)
    };
    Ok(LogGammaValue { log_modulus: l.re, phase: wrap_phase(l.im) })
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(LogGammaValue::to_complex)
}

/// `1/Γ(z)`, which is entire: zero at the poles of `Γ`.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(v) => Complex64::from_polar((-v.log_modulus).exp(), -v.phase),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// Pochhammer symbol `(a)_k = Γ(a+k)/Γ(a)` for any integer `k`.
pub fn pochhammer(a: Complex64, k: i64) -> Result<Complex64> {
    if k < 0 {
        // (a)_{-k} = (-1)^k / (1-a)_k
        let d = pochhammer(1.0 - a, -k)?;
        if d.norm() < POLE_TOL {
            return Err(Error::Pole(format!("(a)_{k} with a = {a}: reflected factor vanishes")));
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign / d);
    }
    if k <= 64 {
        let mut p = Complex64::new(1.0, 0.0);
        for j in 0..k {
            p *= a + j as f64;
        }
        return Ok(p);
    }
    match (log_gamma(a + k as f64), log_gamma(a)) {
        (Ok(num), Ok(den)) => Ok((num.ln() - den.ln()).exp()),
        // a at (or near) a pole of Γ: the product is still a polynomial value
        _ => {
            let mut p = Complex64::new(1.0, 0.0);
            for j in 0..k {
                p *= a + j as f64;
            }
            Ok(p)
        }
    }
}

/// `K_ν(z) = ∫₀^∞ exp(-z cosh t) cosh(ν t) dt`, `Re z > 0`.
///
/// The order is symmetrized first, so `bessel_k(ν, z) == bessel_k(-ν, z)`
/// holds bit for bit.
pub fn bessel_k(order: Complex64, arg: Complex64) -> Result<Complex64> {
    if !(arg.re > 0.0) {
        return Err(Error::InvalidInput(format!("bessel_k needs Re(arg) > 0, got {arg}")));
    }
    let s = if order.re > 0.0 || (order.re == 0.0 && order.im >= 0.0) { order } else { -order };
    let x = arg.re;
    let sr = s.re.abs();
    // log-modulus bound of the integrand: -x cosh t + |Re s| t
    let bound = |t: f64| -x * t.cosh() + sr * t;
    let mut gmax = bound(0.0);
    let mut t = 0.0;
    let cut = (1e-18f64).ln();
    loop {
        t += 0.125;
        let g = bound(t);
        gmax = gmax.max(g);
        if g < gmax + cut || t > 40.0 {
            break;
        }
    }
    if gmax < -745.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let upper = t;
    let real_arg = arg.im == 0.0;
    let f = |t: f64| -> Complex64 {
        let e = (s * t).exp();
        let ch = 0.5 * (e + 1.0 / e);
        let c = t.cosh();
        let damp = if real_arg {
            Complex64::new((-x * c).exp(), 0.0)
        } else {
            (-arg * c).exp()
        };
        damp * ch
    };

    let mut n = 32usize;
    let mut h = upper / n as f64;
    let mut sum = 0.5 * f(0.0);
    for k in 1..=n {
        sum += f(k as f64 * h);
    }
    let mut prev = sum * h;
    for _ in 0..12 {
        let mut add = Complex64::new(0.0, 0.0);
        for k in 0..n {
            add += f((2 * k + 1) as f64 * h * 0.5);
        }
        sum += add;
        n *= 2;
        h *= 0.5;
        let cur = sum * h;
        if (cur - prev).norm() <= 1e-13 * cur.norm() || cur.norm() < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "bessel_k({order}, {arg}): trapezoid refinement did not settle at {n} nodes"
    )))
}

/// `2F1(a, b; c; 1)` from Gauss's Gamma-ratio formula.
pub fn gauss_2f1_unit(a: Complex64, b: Complex64, c: Complex64) -> Result<Complex64> {
    let g1 = gamma(c - a - b)?;
    let g2 = gamma(c)?;
    Ok(g1 * g2 * rgamma(c - a) * rgamma(c - b))
}

/// Partial-sum evaluation of `2F1(a, b; c; 1)`, compared against the
/// Gamma-ratio value.
#[derive(Debug, Clone, Copy)]
pub struct Gauss2F1Diagnostic {
    pub series_value: Complex64,
    pub ratio_value: Complex64,
    pub terms: usize,
    /// `|series - ratio| / |ratio|`.
    pub relative_discrepancy: f64,
    pub terminating: bool,
}

fn nonpositive_integer(z: Complex64) -> Option<usize> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        Some((-z.re) as usize)
    } else {
        None
    }
}

pub fn gauss_2f1_series(a: Complex64, b: Complex64, c: Complex64, max_terms: usize) -> Result<Gauss2F1Diagnostic> {
    let terminate_at = nonpositive_integer(a).into_iter().chain(nonpositive_integer(b)).min();
    let excess = c - a - b;
    if terminate_at.is_none() && excess.re <= 0.0 {
        return Err(Error::DivergentSeries(format!("Re(c-a-b) = {} <= 0", excess.re)));
    }
    let ratio_value = gauss_2f1_unit(a, b, c)?;
    let limit = terminate_at.map_or(max_terms, |k| k.min(max_terms));
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut k = 0usize;
    while k < limit {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0));
        sum += term;
        k += 1;
    }
    if terminate_at.is_none() {
        // terms behave like C k^{a+b-c-1}; Euler-Maclaurin estimate of the remainder
        sum += term * (k as f64 / excess - 0.5);
    }
    let relative_discrepancy = (sum - ratio_value).norm() / ratio_value.norm().max(f64::MIN_POSITIVE);
    Ok(Gauss2F1Diagnostic {
        series_value: sum,
        ratio_value,
        terms: k + 1,
        relative_discrepancy,
        terminating: terminate_at.is_some(),
    })
}
