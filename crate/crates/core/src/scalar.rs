//! Scalars shared by the exact and floating pipelines.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = BigRational;

/// Field operations needed by group arithmetic.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    fn from_rational(q: &Rational) -> Self;
    fn approx(&self) -> f64;
    fn magnitude(&self) -> Self;
    fn positive(&self) -> bool;
}

impl Scalar for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn is_nil(&self) -> bool {
        *self == 0.0
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn positive(&self) -> bool {
        *self > 0.0
    }
}

impl Scalar for Rational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn approx(&self) -> f64 {
        rational_to_f64(self)
    }
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
    fn positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(n));
    }
    let v: f64 = s.parse().ok()?;
    Rational::from_float(v)
}

/// Exact r-th root of a nonnegative rational, if it exists.
pub fn exact_root(a: &Rational, r: u32) -> Option<Rational> {
    if a.is_negative() {
        return None;
    }
    let n = a.numer().nth_root(r);
    let d = a.denom().nth_root(r);
    if num::pow(n.clone(), r as usize) == *a.numer() && num::pow(d.clone(), r as usize) == *a.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// A finite sum of radicals `a^(1/r)` with nonnegative rational `a`.
///
/// Perfect powers are folded into the rational part, so two sums built from
/// the same radicands compare equal. Equality is sound but not complete:
/// distinct radicand multisets may still denote the same real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    pub rational: Rational,
    pub radicals: Vec<(u32, Rational)>,
}

impl RootSum {
    pub fn zero() -> Self {
        RootSum { rational: Zero::zero(), radicals: Vec::new() }
    }

    pub fn push_root(&mut self, a: Rational, r: u32) {
        let a = Signed::abs(&a);
        if Zero::is_zero(&a) {
            return;
        }
        let mut r = r;
        let mut a = a;
        // lower the root index while the radicand is a perfect power
        loop {
            if r == 1 {
                self.rational += a;
                return;
            }
            let mut lowered = false;
            for d in 2..=r {
                if r.is_multiple_of(d) {
                    if let Some(b) = exact_root(&a, d) {
                        a = b;
                        r /= d;
                        lowered = true;
                        break;
                    }
                }
            }
            if !lowered {
                break;
            }
        }
        let pos = self.radicals.partition_point(|t| (t.0, &t.1) < (r, &a));
        self.radicals.insert(pos, (r, a));
    }

    /// `lambda * self` for positive rational `lambda`, with each radical
    /// rewritten as `(lambda^r a)^(1/r)`.
    pub fn scaled(&self, lambda: &Rational) -> RootSum {
        let mut out = RootSum { rational: &self.rational * lambda, radicals: Vec::new() };
        for (r, a) in &self.radicals {
            out.push_root(num::pow(lambda.clone(), *r as usize) * a, *r);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = rational_to_f64(&self.rational);
        for (r, a) in &self.radicals {
            v += rational_to_f64(a).powf(1.0 / *r as f64);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        Zero::is_zero(&self.rational) && self.radicals.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("-2"), Some(int(-2)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn root_sum_reduces_perfect_powers() {
        let mut s = RootSum::zero();
        s.push_root(rat(9, 4), 2);
        s.push_root(int(8), 3);
        assert_eq!(s.rational, rat(7, 2));
        assert!(s.radicals.is_empty());
        let mut t = RootSum::zero();
        t.push_root(int(4), 4);
        assert_eq!(t.radicals, vec![(2, int(2))]);
    }

    #[test]
    fn root_sum_scaling_matches_direct_construction() {
        let mut s = RootSum::zero();
        s.push_root(int(2), 2);
        s.push_root(int(1), 1);
        let lam = rat(3, 2);
        let mut direct = RootSum::zero();
        direct.push_root(rat(9, 4) * int(2), 2);
        direct.push_root(rat(3, 2), 1);
        assert_eq!(s.scaled(&lam), direct);
    }
}
