//! Sparse multivariate polynomials with exact rational coefficients.

use crate::scalar::{rational_to_f64, Rational, Scalar};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A polynomial in `nvars` variables, stored as exponent vector -> coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (i, k) in e.iter().enumerate() {
                if *k > 0 {
                    write!(f, "*x{}^{}", i, k)?;
                }
            }
        }
        Ok(())
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn monomial(exponents: Vec<u32>, c: Rational) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, c: Rational) {
        debug_assert_eq!(exponents.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponents);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Rational::one());
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-Rational::one());
        out
    }

    /// `self += c * other`
    pub fn add_assign_scaled(&mut self, other: &Polynomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (e, v) in &other.terms {
            self.add_term(e.clone(), v * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, va * vb);
            }
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[var] > 0 {
                let mut f = e.clone();
                f[var] -= 1;
                out.add_term(f, v * Rational::from_integer(e[var].into()));
            }
        }
        out
    }

    /// Sets variables `keep..nvars` to zero and drops them.
    pub fn truncate_vars(&self, keep: usize) -> Polynomial {
        let mut out = Self::zero(keep);
        for (e, v) in &self.terms {
            if e[keep..].iter().all(|&k| k == 0) {
                out.add_term(e[..keep].to_vec(), v.clone());
            }
        }
        out
    }

    /// Re-indexes the variables: variable `i` becomes `map[i]` in a ring with `nvars` variables.
    pub fn remap_vars(&self, nvars: usize, map: &[usize]) -> Polynomial {
        let mut out = Self::zero(nvars);
        for (e, v) in &self.terms {
            let mut f = vec![0; nvars];
            for (i, k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            out.add_term(f, v.clone());
        }
        out
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest weighted degree of a term, `None` for the zero polynomial.
    pub fn weighted_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| weighted(e, weights)).max()
    }

    pub fn is_homogeneous(&self, weights: &[u32], degree: u32) -> bool {
        self.terms.keys().all(|e| weighted(e, weights) == degree)
    }

    /// Drops every term of weighted degree above `max`.
    pub fn truncate_weight(&self, weights: &[u32], max: u32) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            if weighted(e, weights) <= max {
                out.terms.insert(e.clone(), v.clone());
            }
        }
        out
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::nil();
        for (e, v) in &self.terms {
            let mut t = S::from_rational(v);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t * x[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, v)| {
                    let pows = e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect();
                    (rational_to_f64(v), pows)
                })
                .collect(),
        }
    }
}

fn weighted(e: &[u32], weights: &[u32]) -> u32 {
    e.iter().zip(weights).map(|(k, w)| k * w).sum()
}

/// Floating point evaluator for a fixed polynomial.
#[derive(Clone, Debug, Default)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, pows) in &self.terms {
            let mut t = *c;
            for &(i, k) in pows {
                t *= if k == 1 { x[i] } else { x[i].powi(k) };
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A tuple of polynomials with per-variable weights (weight `r` for `x_{r,i}`).
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMap {
    pub weights: Vec<u32>,
    pub components: Vec<Polynomial>,
}

impl PolynomialMap {
    pub fn new(weights: Vec<u32>, components: Vec<Polynomial>) -> Self {
        PolynomialMap { weights, components }
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    pub fn constant_terms(&self) -> Vec<Rational> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }

    pub fn weighted_degrees(&self) -> Vec<Option<u32>> {
        self.components.iter().map(|c| c.weighted_degree(&self.weights)).collect()
    }

    pub fn compile(&self) -> Vec<CompiledPoly> {
        self.components.iter().map(|c| c.compile()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn product_and_derivative() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = x.mul(&y).add(&x.mul(&x).scale(&rat(1, 2)));
        assert_eq!(p.derivative(0), y.add(&x));
        assert_eq!(p.eval(&[int(2), int(3)]), int(8));
        assert_eq!(p.compile().eval(&[2.0, 3.0]), 8.0);
    }

    #[test]
    fn weighted_degree_is_additive_under_products() {
        let w = [1, 1, 2];
        let a = Polynomial::var(3, 0).add(&Polynomial::var(3, 1));
        let b = Polynomial::var(3, 2);
        let ab = a.mul(&b);
        assert_eq!(ab.weighted_degree(&w), Some(3));
        assert!(ab.is_homogeneous(&w, 3));
        assert_eq!(Polynomial::zero(3).weighted_degree(&w), None);
    }

    #[test]
    fn constant_term_is_value_at_zero() {
        let p = Polynomial::constant(2, rat(5, 3)).add(&Polynomial::var(2, 1));
        assert_eq!(p.eval(&[int(0), int(0)]), rat(5, 3));
        assert_eq!(p.constant_term(), rat(5, 3));
    }
}
