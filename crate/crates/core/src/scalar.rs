//! Exact scalars: complex numbers with rational real and imaginary parts.
//!
//! All piecewise geometry and values in this crate stay in `Rat` so that
//! measures, integrals and comparisons are exact; floating point enters only
//! when a norm raises a value to an irrational power.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // falls back to a quotient of truncated parts; desk-scale inputs never hit this
        let n = x.numer().to_f64().unwrap_or(f64::MAX);
        let d = x.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// 2^k as an exact rational, k of either sign.
pub fn two_pow(k: i32) -> Rat {
    let one = BigInt::from(1);
    if k >= 0 {
        Rat::from(one << (k as usize))
    } else {
        Rat::new(one.clone(), one << ((-k) as usize))
    }
}

/// Parses "3/4", "-7", or a finite decimal like "0.25" into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::from(0)
        } else {
            whole.parse().ok()?
        };
        let digits: BigInt = frac.parse().ok()?;
        let den = BigInt::from(10).pow(frac.len() as u32);
        let frac_part = Rat::new(digits, den);
        let whole_part = Rat::from(whole);
        return Some(if neg {
            whole_part - frac_part
        } else {
            whole_part + frac_part
        });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from(n))
}

/// Exact square root when the argument is the square of a rational.
pub fn rat_sqrt_exact(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let sn = x.numer().sqrt();
    let sd = x.denom().sqrt();
    if &(&sn * &sn) == x.numer() && &(&sd * &sd) == x.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    pub re: Rat,
    pub im: Rat,
}

impl Scalar {
    pub fn new(re: Rat, im: Rat) -> Self {
        Scalar { re, im }
    }

    pub fn real(re: Rat) -> Self {
        Scalar { re, im: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::real(rat_int(n))
    }

    pub fn from_pair(num: i64, den: i64) -> Self {
        Scalar::real(rat(num, den))
    }

    pub fn zero() -> Self {
        Scalar::real(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// |z|^2, always exact.
    pub fn modulus_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// |z| when it is rational (real or imaginary axis, or a Pythagorean pair).
    pub fn try_modulus(&self) -> Option<Rat> {
        if self.im.is_zero() {
            return Some(self.re.abs());
        }
        if self.re.is_zero() {
            return Some(self.im.abs());
        }
        rat_sqrt_exact(&self.modulus_sq())
    }

    pub fn modulus_f64(&self) -> f64 {
        if self.im.is_zero() {
            rat_to_f64(&self.re).abs()
        } else {
            rat_to_f64(&self.modulus_sq()).sqrt()
        }
    }

    pub fn scale(&self, c: &Rat) -> Scalar {
        Scalar::new(&self.re * c, &self.im * c)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sqrt() {
        assert_eq!(rat_sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rat_sqrt_exact(&rat(2, 1)), None);
        assert_eq!(rat_sqrt_exact(&rat(0, 1)), Some(rat(0, 1)));
        assert_eq!(rat_sqrt_exact(&rat(-1, 1)), None);
    }

    #[test]
    fn modulus_paths() {
        // axis values are exact
        assert_eq!(Scalar::from_int(-2).try_modulus(), Some(rat_int(2)));
        // Pythagorean pair 3+4i has rational modulus
        let z = Scalar::new(rat_int(3), rat_int(4));
        assert_eq!(z.try_modulus(), Some(rat_int(5)));
        // 1+i does not
        let w = Scalar::new(rat_int(1), rat_int(1));
        assert_eq!(w.try_modulus(), None);
        assert!((w.modulus_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn arithmetic() {
        let a = Scalar::new(rat(1, 2), rat_int(1));
        let b = Scalar::new(rat(1, 2), rat_int(-1));
        assert_eq!(&a + &b, Scalar::real(rat_int(1)));
        assert_eq!(&a * &b, Scalar::real(rat(5, 4)));
        assert_eq!((&a - &a).is_zero(), true);
    }

    #[test]
    fn two_pow_signs() {
        assert_eq!(two_pow(3), rat_int(8));
        assert_eq!(two_pow(-2), rat(1, 4));
        assert_eq!(two_pow(0), rat_int(1));
    }
}
