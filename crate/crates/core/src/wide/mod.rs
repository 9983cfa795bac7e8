//! Extended-precision scalars for the cancellation-prone Weyl sums.
//!
//! [`WideReal`] abstracts over [`Dd`] (double-double, ~32 digits) and
//! [`Mp`] (256-bit, ~77 digits). Complex values are `num_complex::Complex<T>`;
//! the free functions here supply the transcendental pieces that
//! `num_complex` only provides for `Float` types.

mod dd;
mod mp;

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

pub use dd::Dd;
pub use mp::Mp;

pub trait WideReal: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + 'static {
    /// Unit roundoff.
    const EPS: f64;
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin_cos(&self) -> (Self, Self);
    fn atan2(y: &Self, x: &Self) -> Self;
    fn pi() -> Self;
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;
    fn stirling() -> &'static Stirling<Self>;

    fn abs(&self) -> Self {
        if self.to_f64() < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Stirling-series data for `ln Γ(w)`, valid once `Re w >= shift_re`.
pub struct Stirling<T> {
    pub shift_re: f64,
    pub half_ln_2pi: T,
    /// `B_{2k} / (2k (2k-1))` for k = 1, 2, ...
    pub coeffs: Vec<T>,
}

/// Even-index Bernoulli numbers `B_2, B_4, ..., B_{2k}` as exact rationals.
fn bernoulli_even(count: usize) -> Vec<BigRational> {
    let m_max = 2 * count;
    let mut b: Vec<BigRational> = Vec::with_capacity(m_max + 1);
    b.push(BigRational::one());
    for m in 1..=m_max {
        // B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            acc += bj * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    (1..=count).map(|k| b[2 * k].clone()).collect()
}

fn stirling_coeffs<T: WideReal>(count: usize) -> Vec<T> {
    bernoulli_even(count)
        .into_iter()
        .enumerate()
        .map(|(i, bk)| {
            let k = (i + 1) as i64;
            let r = bk / BigRational::from_integer(BigInt::from(2 * k * (2 * k - 1)));
            T::from_ratio(r.numer(), r.denom())
        })
        .collect()
}

static DD_STIRLING: Lazy<Stirling<Dd>> = Lazy::new(|| Stirling {
    shift_re: 25.0,
    half_ln_2pi: Dd::HALF_LN_2PI,
    coeffs: stirling_coeffs::<Dd>(18),
});

static MP_STIRLING: Lazy<Stirling<Mp>> = Lazy::new(|| Stirling {
    shift_re: 60.0,
    half_ln_2pi: (Mp::from_f64(2.0) * Mp::pi()).ln() * Mp::from_f64(0.5),
    coeffs: stirling_coeffs::<Mp>(44),
});

fn bigint_to_dd(x: &BigInt) -> Dd {
    let hi = x.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() {
        return Dd::from_f64(hi);
    }
    let rest = x - f64_to_bigint(hi);
    Dd::from_f64(hi) + Dd::from_f64(rest.to_f64().unwrap_or(0.0))
}

fn f64_to_bigint(x: f64) -> BigInt {
    // x is an integer-valued f64
    let bits = x.abs();
    let (mant, exp) = {
        let b = bits.to_bits();
        let e = ((b >> 52) & 0x7ff) as i64;
        let m = if e == 0 { (b & ((1 << 52) - 1)) << 1 } else { (b & ((1 << 52) - 1)) | (1 << 52) };
        (m, e - 1075)
    };
    let mut v = BigInt::from(mant);
    if exp >= 0 {
        v <<= exp as usize;
    } else {
        v >>= (-exp) as usize;
    }
    if x < 0.0 {
        -v
    } else {
        v
    }
}

impl WideReal for Dd {
    const EPS: f64 = Dd::EPS;
    const NAME: &'static str = "double-double";

    fn from_f64(x: f64) -> Dd {
        Dd::from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        Dd::to_f64(*self)
    }
    fn exp(&self) -> Dd {
        Dd::exp(*self)
    }
    fn ln(&self) -> Dd {
        Dd::ln(*self)
    }
    fn sin_cos(&self) -> (Dd, Dd) {
        Dd::sin_cos(*self)
    }
    fn atan2(y: &Dd, x: &Dd) -> Dd {
        Dd::atan2(*y, *x)
    }
    fn pi() -> Dd {
        Dd::PI
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Dd {
        let sign = if num.is_negative() { -1.0 } else { 1.0 };
        (bigint_to_dd(&num.abs()) / bigint_to_dd(den)).mul_f64(sign)
    }
    fn stirling() -> &'static Stirling<Dd> {
        &DD_STIRLING
    }
    fn abs(&self) -> Dd {
        Dd::abs(*self)
    }
}

impl WideReal for Mp {
    const EPS: f64 = Mp::EPS;
    const NAME: &'static str = "mp256";

    fn from_f64(x: f64) -> Mp {
        Mp::from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        Mp::to_f64(self)
    }
    fn exp(&self) -> Mp {
        Mp::exp(self)
    }
    fn ln(&self) -> Mp {
        Mp::ln(self)
    }
    fn sin_cos(&self) -> (Mp, Mp) {
        Mp::sin_cos(self)
    }
    fn atan2(y: &Mp, x: &Mp) -> Mp {
        Mp::atan2(y, x)
    }
    fn pi() -> Mp {
        Mp::pi()
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Mp {
        Mp::parse(&num.to_string()) / Mp::parse(&den.to_string())
    }
    fn stirling() -> &'static Stirling<Mp> {
        &MP_STIRLING
    }
}

pub fn c_from<T: WideReal>(z: Complex64) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

pub fn c_to_f64<T: WideReal>(z: &Complex<T>) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

/// `|z|` rounded to f64.
pub fn c_abs<T: WideReal>(z: &Complex<T>) -> f64 {
    c_to_f64(z).norm()
}

pub fn c_scale<T: WideReal>(z: &Complex<T>, s: &T) -> Complex<T> {
    Complex::new(z.re.clone() * s.clone(), z.im.clone() * s.clone())
}

pub fn c_exp<T: WideReal>(z: &Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m.clone() * c, m * s)
}

/// Principal-branch complex logarithm.
pub fn c_ln<T: WideReal>(z: &Complex<T>) -> Complex<T> {
    let r2 = z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone();
    Complex::new(r2.ln() * T::from_f64(0.5), T::atan2(&z.im, &z.re))
}

/// `x^z` for a positive real base, using the real logarithm of the base.
pub fn real_pow<T: WideReal>(x: &T, z: &Complex<T>) -> Complex<T> {
    let l = x.ln();
    c_exp(&c_scale(z, &l))
}

/// `ln Γ(z)` modulo `2πi`, by upward shift and the Stirling series.
///
/// The caller is responsible for keeping `z` away from the poles; the
/// branch of the imaginary part is irrelevant once exponentiated.
pub fn c_ln_gamma<T: WideReal>(z: &Complex<T>) -> Complex<T> {
    let st = T::stirling();
    let re = z.re.to_f64();
    let shift = if re < st.shift_re { (st.shift_re - re).ceil() as usize } else { 0 };
    let mut w = z.clone();
    let mut prod = Complex::new(T::one(), T::zero());
    for _ in 0..shift {
        prod = prod * w.clone();
        w = Complex::new(w.re + T::one(), w.im);
    }
    let half = T::from_f64(0.5);
    let lw = c_ln(&w);
    let mut s = (Complex::new(w.re.clone() - half, w.im.clone())) * lw - w.clone()
        + Complex::new(st.half_ln_2pi.clone(), T::zero());
    let inv = Complex::new(T::one(), T::zero()) / w.clone();
    let inv2 = inv.clone() * inv.clone();
    let mut p = inv;
    for c in &st.coeffs {
        s = s + c_scale(&p, c);
        p = p * inv2.clone();
    }
    if shift > 0 {
        s = s - c_ln(&prod);
    }
    s
}

/// `Γ(z)` in extended precision.
pub fn c_gamma<T: WideReal>(z: &Complex<T>) -> Complex<T> {
    c_exp(&c_ln_gamma(z))
}
