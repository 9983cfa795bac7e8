//! Double-double real arithmetic (an unevaluated sum `hi + lo` of two f64).
//!
//! Gives roughly 32 significant digits. Addition, multiplication and
//! division follow the accurate variants of Hida, Li and Bailey's QD
//! library; the transcendental functions use argument reduction plus
//! Taylor series, with `ln` obtained by one Newton step on `exp`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const fn dd(hi: f64, lo: f64) -> Dd {
    Dd { hi, lo }
}

impl Dd {
    pub const ZERO: Dd = dd(0.0, 0.0);
    pub const ONE: Dd = dd(1.0, 0.0);
    pub const PI: Dd = dd(std::f64::consts::PI, 1.2246467991473532e-16);
    pub const TWO_PI: Dd = dd(std::f64::consts::TAU, 2.4492935982947064e-16);
    pub const HALF_PI: Dd = dd(std::f64::consts::FRAC_PI_2, 6.123233995736766e-17);
    const HALF_PI_3: f64 = -1.4973849048591698e-33;
    pub const LN2: Dd = dd(std::f64::consts::LN_2, 2.3190468138462996e-17);
    const LN2_3: f64 = 5.707708438416212e-34;
    pub const HALF_LN_2PI: Dd = dd(0.9189385332046728, -3.8782941580672414e-17);
    /// Unit roundoff, 2^-104.
    pub const EPS: f64 = 4.930380657631324e-32;

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        dd(x, 0.0)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (s, e) = quick_two_sum(p, e + self.lo * b);
        dd(s, e)
    }

    #[inline]
    pub fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        dd(self.hi * f, self.lo * f)
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (s, e) = quick_two_sum(p, e);
        dd(s, e)
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::ZERO } else { dd(f64::NAN, f64::NAN) };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        Dd::from_f64(ax) + (self - Dd::from_f64(ax).sqr()).mul_f64(x * 0.5)
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.7 {
            return dd(f64::INFINITY, 0.0);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        // r = x - k ln2, carried to third-word accuracy
        let r = self - Dd::LN2.mul_f64(k) - Dd::from_f64(Dd::LN2_3 * k);
        // expm1 of r / 2^10 by Taylor series, then undo the scaling with
        // (1 + p)^2 - 1 = p (2 + p)
        let r = r.ldexp(-10);
        let mut term = r;
        let mut p = r;
        for j in 2..=14 {
            term = (term * r) / Dd::from_f64(j as f64);
            p = p + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            p = p * (p + Dd::from_f64(2.0));
        }
        let out = p + Dd::ONE;
        // k can reach 1074 near the underflow edge; split the power of two
        let k = k as i32;
        if k.abs() > 1000 {
            out.ldexp(k / 2).ldexp(k - k / 2)
        } else {
            out.ldexp(k)
        }
    }

    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return dd(f64::NAN, f64::NAN);
        }
        let y = Dd::from_f64(self.hi.ln());
        // one Newton step for exp(y) = x doubles the number of correct digits
        y + self * (-y).exp() - Dd::ONE
    }

    fn sin_cos_taylor(r: Dd) -> (Dd, Dd) {
        let r2 = r.sqr();
        let mut s = r;
        let mut term = r;
        let mut j = 1.0;
        loop {
            term = -(term * r2) / Dd::from_f64((j + 1.0) * (j + 2.0));
            s = s + term;
            j += 2.0;
            if term.hi.abs() < 1e-36 || j > 40.0 {
                break;
            }
        }
        let mut c = Dd::ONE;
        let mut term = Dd::ONE;
        let mut j = 0.0;
        loop {
            term = -(term * r2) / Dd::from_f64((j + 1.0) * (j + 2.0));
            c = c + term;
            j += 2.0;
            if term.hi.abs() < 1e-36 || j > 40.0 {
                break;
            }
        }
        (s, c)
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(self) -> (Dd, Dd) {
        if self.hi == 0.0 {
            return (Dd::ZERO, Dd::ONE);
        }
        let k = (self.hi / Dd::HALF_PI.hi).round();
        let r = self - Dd::HALF_PI.mul_f64(k) - Dd::from_f64(Dd::HALF_PI_3 * k);
        let (s, c) = Dd::sin_cos_taylor(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    /// Two-argument arctangent, refined from the f64 value by one Newton step.
    pub fn atan2(y: Dd, x: Dd) -> Dd {
        if x.hi == 0.0 && y.hi == 0.0 {
            return Dd::ZERO;
        }
        let t0 = Dd::from_f64(y.hi.atan2(x.hi));
        let (s, c) = t0.sin_cos();
        // rotate (x, y) by -t0; the residual angle is tiny
        let xr = x * c + y * s;
        let yr = y * c - x * s;
        t0 + yr / xr
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (s, e) = quick_two_sum(s, e + f);
        dd(s, e)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        dd(-self.hi, -self.lo)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (s, e) = quick_two_sum(p, e);
        dd(s, e)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (s, e) = quick_two_sum(q1, q2);
        dd(s, e) + Dd::from_f64(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = self / b;
        let q = if q.hi < 0.0 { -((-q).floor_()) } else { q.floor_() };
        self - b * q
    }
}

impl Dd {
    fn floor_(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (s, e) = quick_two_sum(hi, self.lo.floor());
            dd(s, e)
        } else {
            dd(hi, 0.0)
        }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Zero for Dd {
    fn zero() -> Dd {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Dd {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        debug_assert_eq!(radix, 10);
        s.parse::<f64>().map(Dd::from_f64)
    }
}
