//! Fixed 256-bit binary floating point, backed by `astro-float`.
//!
//! Used only when the Weyl-group sum cancels beyond what double-double
//! can carry (roughly more than 25 digits lost).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_traits::{Num, One, Zero};

pub const PRECISION_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Mp(pub(crate) BigFloat);

impl Mp {
    /// Unit roundoff at 256 bits.
    pub const EPS: f64 = 8.636168555094445e-78;

    pub fn from_f64(x: f64) -> Mp {
        Mp(BigFloat::from_f64(x, PRECISION_BITS))
    }

    pub fn parse(s: &str) -> Mp {
        Mp(with_consts(|cc| BigFloat::parse(s, astro_float::Radix::Dec, PRECISION_BITS, RM, cc)))
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let (words, _, sign, exp, _) = self.0.as_raw_parts().expect("finite value");
        // mantissa words are little-endian with the leading bit set in the last word;
        // the value is 0.m * 2^exp
        let top = *words.last().unwrap() as f64;
        let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
        let frac = top * 2f64.powi(-64) + next * 2f64.powi(-128);
        let mut e = exp as i32;
        let mut v = frac;
        // apply the binary exponent in steps that stay inside the f64 range
        while e > 1000 {
            v *= 2f64.powi(1000);
            e -= 1000;
        }
        while e < -1000 {
            v *= 2f64.powi(-1000);
            e += 1000;
        }
        v *= 2f64.powi(e);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    pub fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    pub fn exp(&self) -> Mp {
        Mp(with_consts(|cc| self.0.exp(PRECISION_BITS, RM, cc)))
    }

    pub fn ln(&self) -> Mp {
        Mp(with_consts(|cc| self.0.ln(PRECISION_BITS, RM, cc)))
    }

    pub fn sin_cos(&self) -> (Mp, Mp) {
        with_consts(|cc| {
            (
                Mp(self.0.sin(PRECISION_BITS, RM, cc)),
                Mp(self.0.cos(PRECISION_BITS, RM, cc)),
            )
        })
    }

    pub fn sqrt(&self) -> Mp {
        Mp(self.0.sqrt(PRECISION_BITS, RM))
    }

    pub fn pi() -> Mp {
        Mp(with_consts(|cc| cc.pi(PRECISION_BITS, RM)))
    }

    pub fn atan2(y: &Mp, x: &Mp) -> Mp {
        let pi = Mp::pi();
        if x.0.is_zero() {
            let half = Mp::from_f64(0.5) * pi;
            return if y.0.is_negative() { -half } else if y.0.is_zero() { Mp::zero() } else { half };
        }
        let t = Mp(with_consts(|cc| (y.clone() / x.clone()).0.atan(PRECISION_BITS, RM, cc)));
        if x.0.is_positive() {
            t
        } else if y.0.is_negative() {
            t - pi
        } else {
            t + pi
        }
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({:e})", self.to_f64())
    }
}

macro_rules! bin_op {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            #[inline]
            fn $method(self, rhs: Mp) -> Mp {
                Mp(self.0.$inner(&rhs.0, PRECISION_BITS, RM))
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);
bin_op!(Div, div, div);

impl Rem for Mp {
    type Output = Mp;
    fn rem(self, rhs: Mp) -> Mp {
        Mp(self.0.rem(&rhs.0))
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(self.0.neg())
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Mp) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Mp) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Zero for Mp {
    fn zero() -> Mp {
        Mp::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Mp {
    fn one() -> Mp {
        Mp::from_f64(1.0)
    }
}

impl Num for Mp {
    type FromStrRadixErr = ();
    fn from_str_radix(s: &str, radix: u32) -> Result<Mp, ()> {
        if radix != 10 {
            return Err(());
        }
        Ok(Mp::parse(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_f64() {
        for &x in &[1.0, -2.5, 3.0e-200, 7.25e250, std::f64::consts::PI] {
            assert_eq!(Mp::from_f64(x).to_f64(), x);
        }
        assert_eq!(Mp::zero().to_f64(), 0.0);
    }

    #[test]
    fn pi_and_atan2() {
        let four_atan = Mp::atan2(&Mp::one(), &Mp::one()) * Mp::from_f64(4.0);
        let diff = (four_atan - Mp::pi()).to_f64().abs();
        assert!(diff < 1e-70, "{diff:e}");
        let t = Mp::atan2(&Mp::from_f64(1.0), &Mp::from_f64(-2.0)).to_f64();
        assert!((t - 1f64.atan2(-2.0)).abs() < 1e-15);
    }

    #[test]
    fn exp_ln_inverse() {
        let x = Mp::from_f64(3.75);
        let back = x.exp().ln() - x;
        assert!(back.to_f64().abs() < 1e-70);
    }
}
