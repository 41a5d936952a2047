//! Left-invariant vector fields, operator words and their normal forms.

use crate::algebra::StratifiedAlgebra;
use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, Polynomial, PolynomialMap};
use crate::scalar::{Rational, Scalar};
use num::{One, Zero};
use std::collections::BTreeMap;

/// A derivation `Σ_j c_j(x) ∂/∂x_j` with polynomial coefficients.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub index: usize,
    pub coeffs: Vec<Polynomial>,
    compiled: Vec<CompiledPoly>,
}

impl VectorField {
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(f.nvars());
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.derivative(j);
            if !d.is_zero() {
                out = out.add(&c.mul(&d));
            }
        }
        out
    }

    /// Coefficient vector at a floating point.
    pub fn at(&self, p: &[f64]) -> Vec<f64> {
        self.compiled.iter().map(|c| c.eval(p)).collect()
    }

    pub fn at_exact<S: Scalar>(&self, p: &[S]) -> Vec<S> {
        self.coeffs.iter().map(|c| c.eval(p)).collect()
    }
}

/// `X_c = ∂/∂t (p · exp(t e_c))|_{t=0}` for every flat basis index `c`.
pub fn left_invariant_fields(alg: &StratifiedAlgebra) -> &[VectorField] {
    alg.fields_cache().get_or_init(|| {
        let n = alg.dim();
        let bch = alg.bch_polynomials();
        (0..n)
            .map(|c| {
                let coeffs: Vec<Polynomial> = bch.iter().map(|b| b.derivative(n + c).truncate_vars(n)).collect();
                let compiled = coeffs.iter().map(|p| p.compile()).collect();
                VectorField { index: c, coeffs, compiled }
            })
            .collect()
    })
}

pub fn left_invariant_field(alg: &StratifiedAlgebra, r: usize, i: usize) -> Result<&VectorField> {
    let idx = alg.index(r, i)?;
    Ok(&left_invariant_fields(alg)[idx])
}

/// A word `X_{a_1} ⋯ X_{a_m}` over flat basis indices, acting right to left.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorWord {
    pub letters: Vec<usize>,
}

impl OperatorWord {
    pub fn new(letters: Vec<usize>) -> Self {
        OperatorWord { letters }
    }

    pub fn from_labels(alg: &StratifiedAlgebra, labels: &[(usize, usize)]) -> Result<Self> {
        let letters = labels.iter().map(|&(r, i)| alg.index(r, i)).collect::<Result<_>>()?;
        Ok(OperatorWord { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Flat indices list strata first, so the lexicographic order on `(r, j)`
    /// is the numeric order on indices.
    pub fn is_ordered(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn weight(&self, alg: &StratifiedAlgebra) -> usize {
        self.letters.iter().map(|&a| alg.stratum_of(a)).sum()
    }
}

/// All ordered words with `1..=max_len` letters, shortest first.
pub fn ordered_words(n: usize, max_len: usize) -> Vec<OperatorWord> {
    let mut out = Vec::new();
    fn rec(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<OperatorWord>) {
        if cur.len() == len {
            out.push(OperatorWord::new(cur.clone()));
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(n, len, a, cur, out);
            cur.pop();
        }
    }
    for len in 1..=max_len {
        rec(n, len, 0, &mut Vec::new(), &mut out);
    }
    out
}

pub fn apply_word_poly(alg: &StratifiedAlgebra, word: &OperatorWord, f: &Polynomial) -> Polynomial {
    let fields = left_invariant_fields(alg);
    let mut g = f.clone();
    for &a in word.letters.iter().rev() {
        g = fields[a].apply(&g);
    }
    g
}

/// Applies the composed derivation to every component.
pub fn apply_field(alg: &StratifiedAlgebra, word: &OperatorWord, map: &PolynomialMap) -> PolynomialMap {
    PolynomialMap::new(
        map.weights.clone(),
        map.components.iter().map(|c| apply_word_poly(alg, word, c)).collect(),
    )
}

/// A linear combination of operator words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordCombination {
    pub terms: BTreeMap<OperatorWord, Rational>,
}

impl WordCombination {
    pub fn apply(&self, alg: &StratifiedAlgebra, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(f.nvars());
        for (w, c) in &self.terms {
            out.add_assign_scaled(&apply_word_poly(alg, w, f), c);
        }
        out
    }
}

/// Rewrites a word as a combination of ordered words using
/// `X_a X_b = X_b X_a + X_{[a,b]}`; brackets above the top stratum vanish.
pub fn normalize_operator_word(alg: &StratifiedAlgebra, word: &OperatorWord) -> WordCombination {
    let mut pending: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    pending.insert(word.letters.clone(), Rational::one());
    let mut done: BTreeMap<OperatorWord, Rational> = BTreeMap::new();
    while let Some((w, c)) = pending.pop_first() {
        if c.is_zero() {
            continue;
        }
        let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1]) else {
            let e = done.entry(OperatorWord::new(w)).or_insert_with(Rational::zero);
            *e += c;
            continue;
        };
        let mut swapped = w.clone();
        swapped.swap(i, i + 1);
        *pending.entry(swapped).or_insert_with(Rational::zero) += &c;
        for k in alg.constants().iter().filter(|k| k.a == w[i] && k.b == w[i + 1]) {
            let mut shorter = w[..i].to_vec();
            shorter.push(k.l);
            shorter.extend_from_slice(&w[i + 2..]);
            *pending.entry(shorter).or_insert_with(Rational::zero) += &c * &k.c;
        }
    }
    done.retain(|_, c| !c.is_zero());
    WordCombination { terms: done }
}

/// Right translation `p · exp(t e_a)` in floating point.
pub fn flow(alg: &StratifiedAlgebra, p: &[f64], a: usize, t: f64) -> Vec<f64> {
    let mut e = vec![0.0; alg.dim()];
    e[a] = t;
    alg.mul_f64(p, &e)
}

/// Central-difference estimate of `W f(p)` for a word of left-invariant fields.
///
/// `W f(p)` is the mixed partial `∂_{t_1}⋯∂_{t_m} f(p e^{t_1 a_1} ⋯ e^{t_m a_m})` at 0,
/// estimated with one symmetric difference per letter (error `O(h^2)`).
pub fn fd_word_derivative(
    alg: &StratifiedAlgebra,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    word: &[usize],
    h: f64,
) -> Vec<f64> {
    let m = word.len();
    if m == 0 {
        return f(p);
    }
    let mut acc: Option<Vec<f64>> = None;
    for mask in 0..(1usize << m) {
        let mut q = p.to_vec();
        let mut sign = 1.0;
        for (j, &a) in word.iter().enumerate() {
            let s = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            sign *= s;
            q = flow(alg, &q, a, s * h);
        }
        let v = f(&q);
        match acc.as_mut() {
            None => acc = Some(v.into_iter().map(|x| sign * x).collect()),
            Some(a) => a.iter_mut().zip(v).for_each(|(a, x)| *a += sign * x),
        }
    }
    let scale = (2.0 * h).powi(m as i32);
    acc.unwrap().into_iter().map(|x| x / scale).collect()
}

/// One Richardson step on top of [`fd_word_derivative`] (error `O(h^4)`).
pub fn fd_word_derivative_richardson(
    alg: &StratifiedAlgebra,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    word: &[usize],
    h: f64,
) -> Vec<f64> {
    let coarse = fd_word_derivative(alg, f, p, word, h);
    let fine = fd_word_derivative(alg, f, p, word, h / 2.0);
    fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

/// Exact word derivatives of a polynomial map, compiled for floating evaluation.
#[derive(Clone, Debug)]
pub struct PolynomialDerivatives {
    words: BTreeMap<Vec<usize>, Vec<CompiledPoly>>,
    base: Vec<CompiledPoly>,
}

impl PolynomialDerivatives {
    pub fn new(alg: &StratifiedAlgebra, map: &PolynomialMap, words: &[OperatorWord]) -> Self {
        let mut table = BTreeMap::new();
        for w in words {
            table.entry(w.letters.clone()).or_insert_with(|| apply_field(alg, w, map).compile());
        }
        PolynomialDerivatives { words: table, base: map.compile() }
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.base.iter().map(|c| c.eval(p)).collect()
    }

    pub fn word(&self, p: &[f64], word: &[usize]) -> Result<Vec<f64>> {
        let comps = self
            .words
            .get(word)
            .ok_or_else(|| Error::InvalidConfig(format!("word {word:?} was not precomputed")))?;
        Ok(comps.iter().map(|c| c.eval(p)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn heisenberg_fields() {
        let alg = StratifiedAlgebra::h3();
        let x1 = left_invariant_field(&alg, 1, 1).unwrap();
        assert_eq!(x1.coeffs[0], Polynomial::constant(3, int(1)));
        assert!(x1.coeffs[1].is_zero());
        assert_eq!(x1.coeffs[2], Polynomial::var(3, 1).scale(&rat(-1, 2)));
        let x3 = left_invariant_field(&alg, 2, 1).unwrap();
        assert_eq!(x3.coeffs[2], Polynomial::constant(3, int(1)));
        assert!(x3.coeffs[0].is_zero() && x3.coeffs[1].is_zero());
        assert!(left_invariant_field(&alg, 3, 1).is_err());
    }

    #[test]
    fn field_matrix_at_identity_is_identity() {
        for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::h5(), StratifiedAlgebra::engel()] {
            let n = alg.dim();
            let zero = vec![Rational::zero(); n];
            for (c, f) in left_invariant_fields(&alg).iter().enumerate() {
                let col = f.at_exact(&zero);
                for (j, v) in col.iter().enumerate() {
                    assert_eq!(*v, if j == c { int(1) } else { int(0) });
                }
            }
        }
    }

    #[test]
    fn heisenberg_word_actions() {
        let alg = StratifiedAlgebra::h3();
        let x3 = Polynomial::var(3, 2);
        let x1 = Polynomial::var(3, 0);
        let w = |l: &[usize]| OperatorWord::new(l.to_vec());
        assert_eq!(apply_word_poly(&alg, &w(&[0]), &x1), Polynomial::constant(3, int(1)));
        assert_eq!(apply_word_poly(&alg, &w(&[0]), &x3), Polynomial::var(3, 1).scale(&rat(-1, 2)));
        assert_eq!(apply_word_poly(&alg, &w(&[0, 1]), &x3), Polynomial::constant(3, rat(1, 2)));
        assert_eq!(apply_word_poly(&alg, &w(&[1, 0]), &x3), Polynomial::constant(3, rat(-1, 2)));
    }

    #[test]
    fn normalize_examples() {
        let alg = StratifiedAlgebra::h3();
        let ordered = OperatorWord::new(vec![0, 1]);
        let n = normalize_operator_word(&alg, &ordered);
        assert_eq!(n.terms.len(), 1);
        assert_eq!(n.terms[&ordered], int(1));
        let n = normalize_operator_word(&alg, &OperatorWord::new(vec![1, 0]));
        assert_eq!(n.terms.len(), 2);
        assert_eq!(n.terms[&OperatorWord::new(vec![0, 1])], int(1));
        assert_eq!(n.terms[&OperatorWord::new(vec![2])], int(-1));
    }

    #[test]
    fn ordered_word_counts() {
        assert_eq!(ordered_words(3, 2).len(), 9);
        assert_eq!(ordered_words(4, 3).len(), 34);
        assert!(ordered_words(4, 3).iter().all(|w| w.is_ordered()));
    }
}
