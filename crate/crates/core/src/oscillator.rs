//! Veronese maps, their exact wedge bound and the pasted oscillator.
//!
//! The Veronese map sends `exp(x)` to the list of scaled monomials
//! `x^α / α!` with `1 ≤ |α| ≤ s`. Its derivatives along the ordered words of
//! length at most `s` form a square family whose wedge is exactly 1 at every
//! point. The pasted oscillator places cut-off translates of it on a colored
//! 1-net and stacks one block per color.

use crate::algebra::{neg, StratifiedAlgebra};
use crate::error::{Error, Result};
use crate::fields::{apply_field, fd_word_derivative_richardson, ordered_words, OperatorWord};
use crate::multilinear::{gram_det_exact, wedge_norm};
use crate::nets::{verify_coloring, CarnotCloud, Coloring};
use crate::poly::{CompiledPoly, Polynomial, PolynomialMap};
use crate::scalar::{int, Rational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// Exponent vectors `α` with `1 ≤ |α| ≤ s`, by total degree then lexicographically.
pub fn veronese_exponents(n: usize, s: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(n: usize, left: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n - 1 {
            cur[i] = left;
            out.push(cur.clone());
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(n, left - e, i + 1, cur, out);
        }
        cur[i] = 0;
    }
    for d in 1..=s as u32 {
        rec(n, d, 0, &mut vec![0; n], &mut out);
    }
    out
}

fn factorial(k: u32) -> Rational {
    (1..=k as i64).fold(int(1), |acc, j| acc * int(j))
}

/// Components `x^α / α!` over [`veronese_exponents`].
pub fn veronese_map(alg: &StratifiedAlgebra) -> PolynomialMap {
    let comps = veronese_exponents(alg.dim(), alg.step())
        .into_iter()
        .map(|a| {
            let denom = a.iter().fold(int(1), |acc, &e| acc * factorial(e));
            Polynomial::monomial(a, int(1) / denom)
        })
        .collect();
    PolynomialMap::new(alg.weights().to_vec(), comps)
}

/// Symbolic derivatives `Wφ` of a polynomial map along a fixed word family.
#[derive(Clone, Debug)]
pub struct WordJet {
    pub words: Vec<OperatorWord>,
    exact: Vec<PolynomialMap>,
    compiled: Vec<Vec<CompiledPoly>>,
}

impl WordJet {
    pub fn new(alg: &StratifiedAlgebra, map: &PolynomialMap, words: Vec<OperatorWord>) -> Self {
        let exact: Vec<PolynomialMap> = words.iter().map(|w| apply_field(alg, w, map)).collect();
        let compiled = exact.iter().map(|m| m.compile()).collect();
        WordJet { words, exact, compiled }
    }

    /// The full ordered-word family of length `1..=s` for the Veronese map.
    pub fn veronese(alg: &StratifiedAlgebra) -> Self {
        Self::new(alg, &veronese_map(alg), ordered_words(alg.dim(), alg.step()))
    }

    pub fn rows_exact(&self, p: &[Rational]) -> Vec<Vec<Rational>> {
        self.exact.iter().map(|m| m.eval(p)).collect()
    }

    pub fn rows(&self, p: &[f64]) -> Vec<Vec<f64>> {
        self.compiled.iter().map(|cs| cs.iter().map(|c| c.eval(p)).collect()).collect()
    }

    /// `|∧_W Wφ(p)|²` in exact arithmetic.
    pub fn wedge_squared_exact(&self, p: &[Rational]) -> Rational {
        gram_det_exact(&self.rows_exact(p))
    }

    pub fn wedge(&self, p: &[f64]) -> f64 {
        wedge_norm(&self.rows(p)).unwrap_or(0.0)
    }
}

/// Wedge norm of `{Wφ(p)}` over all ordered words of length `1..=s`, from
/// exact symbolic derivatives of a polynomial map.
pub fn wedge_lower_bound(alg: &StratifiedAlgebra, map: &PolynomialMap, p: &[f64]) -> f64 {
    WordJet::new(alg, map, ordered_words(alg.dim(), alg.step())).wedge(p)
}

/// `ρ(G(x))` with the homogeneous gauge `G = (Σ |x_{r,i}|^{2s!/r})^{1/(2s!)}`
/// and a `C^∞` step `ρ` equal to 1 on `[0, inner]` and 0 on `[outer, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { inner: 1.0, outer: 1.5 }
    }
}

fn bump_tail(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

impl Cutoff {
    pub fn rho(&self, g: f64) -> f64 {
        if g <= self.inner {
            return 1.0;
        }
        if g >= self.outer {
            return 0.0;
        }
        let t = (g - self.inner) / (self.outer - self.inner);
        let a = bump_tail(1.0 - t);
        a / (a + bump_tail(t))
    }

    pub fn eval(&self, alg: &StratifiedAlgebra, x: &[f64]) -> f64 {
        self.rho(gauge(alg, x))
    }
}

/// The smooth homogeneous gauge; bounded above by the quasinorm.
pub fn gauge(alg: &StratifiedAlgebra, x: &[f64]) -> f64 {
    let s = alg.step() as u32;
    let big = 2 * (1..=s).product::<u32>();
    let sum: f64 = x
        .iter()
        .zip(alg.weights())
        .map(|(v, &r)| v.abs().powi((big / r) as i32))
        .sum();
    sum.powf(1.0 / big as f64)
}

/// `φ⁰(p) = ⊕_colors Σ_{g in class} η(g⁻¹p) V(g⁻¹p)`.
#[derive(Clone, Debug)]
pub struct OscillatorMap {
    alg: Arc<StratifiedAlgebra>,
    pub cutoff: Cutoff,
    veronese: Vec<CompiledPoly>,
    /// Coordinates of the net members of each color.
    pub classes: Vec<Vec<Vec<f64>>>,
}

impl OscillatorMap {
    pub fn algebra(&self) -> &StratifiedAlgebra {
        &self.alg
    }

    pub fn block_len(&self) -> usize {
        self.veronese.len()
    }

    pub fn num_components(&self) -> usize {
        self.classes.len() * self.veronese.len()
    }

    fn block(&self, class: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.veronese.len()];
        for g in class {
            let x = self.alg.mul_f64(&neg(g), p);
            let w = self.cutoff.eval(&self.alg, &x);
            if w > 0.0 {
                out.iter_mut().zip(&self.veronese).for_each(|(o, c)| *o += w * c.eval(&x));
            }
        }
        out
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.classes.iter().flat_map(|c| self.block(c, p)).collect()
    }

    /// Net members of each color whose cutoff is nonzero at `p`.
    pub fn active_pieces(&self, p: &[f64]) -> Vec<usize> {
        self.classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .filter(|g| self.cutoff.eval(&self.alg, &self.alg.mul_f64(&neg(g), p)) > 0.0)
                    .count()
            })
            .collect()
    }

    /// Finite-difference `Wφ⁰(p)` (central differences plus one Richardson step).
    pub fn word_derivative(&self, p: &[f64], word: &[usize], h: f64) -> Vec<f64> {
        fd_word_derivative_richardson(&self.alg, &|x| self.eval(x), p, word, h)
    }

    /// Wedge over all ordered words of length `1..=s`, by finite differences.
    pub fn wedge(&self, p: &[f64], h: f64) -> f64 {
        let rows: Vec<Vec<f64>> = ordered_words(self.alg.dim(), self.alg.step())
            .iter()
            .map(|w| self.word_derivative(p, &w.letters, h))
            .collect();
        wedge_norm(&rows).unwrap_or(0.0)
    }

    /// Largest Euclidean norm of `Wφ⁰` over words of each length `1..=max_len`
    /// and all sample points.
    pub fn derivative_profile(&self, points: &[Vec<f64>], max_len: usize, h: f64) -> Vec<f64> {
        let words_by_len: Vec<Vec<Vec<usize>>> = (1..=max_len)
            .map(|l| {
                ordered_words(self.alg.dim(), l)
                    .into_iter()
                    .filter(|w| w.len() == l)
                    .map(|w| w.letters)
                    .collect()
            })
            .collect();
        words_by_len
            .iter()
            .map(|ws| {
                points
                    .par_iter()
                    .map(|p| {
                        ws.iter()
                            .map(|w| self.word_derivative(p, w, h).iter().map(|x| x * x).sum::<f64>().sqrt())
                            .fold(0.0, f64::max)
                    })
                    .reduce(|| 0.0, f64::max)
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path, points: &[Vec<f64>]) -> Result<()> {
        let rows: Vec<Vec<f64>> = points.par_iter().map(|p| self.eval(p)).collect();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["point".to_string()];
        header.extend((0..self.num_components()).map(|c| format!("c{c}")));
        w.write_record(&header)?;
        for (i, r) in rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(r.iter().map(|x| format!("{x:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pastes cut-off Veronese translates over a coloring of a net in `cloud`.
pub fn paste_oscillator(cloud: &CarnotCloud, cutoff: Cutoff, coloring: &Coloring) -> Result<OscillatorMap> {
    let bad: usize = verify_coloring(cloud, coloring).iter().map(|r| r.separation_violations.len()).sum();
    if bad > 0 {
        return Err(Error::InvalidColoring(format!("{bad} same-color pairs closer than {}", coloring.coarse_sep)));
    }
    if coloring.colors.len() != coloring.net.members.len() {
        return Err(Error::InvalidColoring("color list does not match the net".into()));
    }
    let classes = coloring
        .classes()
        .into_iter()
        .map(|ms| ms.into_iter().map(|i| cloud.points[i].clone()).collect())
        .collect();
    let veronese = veronese_map(&cloud.alg).compile();
    Ok(OscillatorMap { alg: cloud.alg.clone(), cutoff, veronese, classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{color_net, greedy_maximal_net};
    use crate::scalar::rat;

    #[test]
    fn veronese_components_h3() {
        let alg = StratifiedAlgebra::h3();
        let v = veronese_map(&alg);
        assert_eq!(v.len(), 9);
        assert_eq!(v.components[0], Polynomial::var(3, 0));
        assert_eq!(v.components[3], Polynomial::monomial(vec![2, 0, 0], rat(1, 2)));
        assert_eq!(v.components[4], Polynomial::monomial(vec![1, 1, 0], int(1)));
        assert!(v.eval(&[0.0; 3]).iter().all(|&x| x == 0.0));
        assert_eq!(veronese_exponents(3, 3).len(), 19);
    }

    #[test]
    fn mixed_word_on_product_component() {
        let alg = StratifiedAlgebra::h3();
        let v = veronese_map(&alg);
        let w = OperatorWord::new(vec![0, 1]);
        let d = apply_field(&alg, &w, &v);
        assert_eq!(d.components[4].eval(&[int(0), int(0), int(0)]), int(1));
    }

    #[test]
    fn exact_unit_wedge() {
        for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::engel()] {
            let jet = WordJet::veronese(&alg);
            let zero = vec![int(0); alg.dim()];
            assert_eq!(jet.wedge_squared_exact(&zero), int(1));
            let p: Vec<Rational> = (0..alg.dim()).map(|i| rat(3 - 2 * i as i64, 7)).collect();
            assert_eq!(jet.wedge_squared_exact(&p), int(1));
        }
    }

    #[test]
    fn cutoff_shape() {
        let c = Cutoff::default();
        assert_eq!(c.rho(0.5), 1.0);
        assert_eq!(c.rho(1.0), 1.0);
        assert_eq!(c.rho(1.5), 0.0);
        assert!((c.rho(1.25) - 0.5).abs() < 1e-12);
        let alg = StratifiedAlgebra::h3();
        let x = [0.3, -0.4, 0.2];
        assert!(gauge(&alg, &x) <= alg.quasinorm(&x));
    }

    #[test]
    fn pasted_map_matches_veronese_near_center() {
        let alg = Arc::new(StratifiedAlgebra::h3());
        let pts = vec![vec![0.0; 3], vec![5.0, 0.0, 0.0]];
        let cloud = CarnotCloud::new(alg.clone(), pts);
        let net = greedy_maximal_net(&cloud, 1.0).unwrap();
        let col = color_net(&cloud, &net, 3.0);
        let osc = paste_oscillator(&cloud, Cutoff::default(), &col).unwrap();
        assert_eq!(col.num_colors, 1);
        let p = [0.2, 0.1, 0.05];
        let v = veronese_map(&alg).eval(&p);
        assert_eq!(osc.eval(&p), v);
        let far = [2.5, 0.0, 0.0];
        assert!(osc.eval(&far).iter().all(|&x| x == 0.0));
    }
}
