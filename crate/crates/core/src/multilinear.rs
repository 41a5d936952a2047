//! Wedge norms, pseudoinverses and Gram–Schmidt.

use crate::error::{Error, Result};
use crate::scalar::Rational;
use nalgebra::DMatrix;
use num::{One, Zero};

/// Relative tolerance on pivots of `TT*` below which a map counts as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Relative residual below which a Gram–Schmidt prefix counts as degenerate.
pub const GS_TOL: f64 = 1e-10;

fn check_dims(vs: &[Vec<f64>]) -> Result<usize> {
    let d = vs.first().map_or(0, |v| v.len());
    for v in vs {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    Ok(d)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn gram_matrix(us: &[Vec<f64>], vs: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(us.len(), vs.len(), |i, j| dot(&us[i], &vs[j]))
}

/// Determinant of a symmetric positive semidefinite matrix by pivoted
/// Cholesky; a nonpositive pivot ends the factorization and yields 0.
pub fn psd_determinant(g: &DMatrix<f64>) -> f64 {
    let (det, _) = pivoted_cholesky(g);
    det
}

/// Returns the determinant and the smallest accepted pivot.
fn pivoted_cholesky(g: &DMatrix<f64>) -> (f64, f64) {
    let n = g.nrows();
    let mut a = g.clone();
    let mut det = 1.0;
    let mut min_pivot = f64::INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, best) = (k..n).map(|i| (i, a[(perm[i], perm[i])])).fold((k, f64::NEG_INFINITY), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        });
        if best <= 0.0 {
            return (0.0, 0.0);
        }
        perm.swap(k, piv);
        let pk = perm[k];
        det *= best;
        min_pivot = min_pivot.min(best);
        let l = best.sqrt();
        for &pi in &perm[k + 1..] {
            a[(pi, pk)] /= l;
        }
        for ii in k + 1..n {
            let pi = perm[ii];
            for jj in k + 1..=ii {
                let pj = perm[jj];
                let v = a[(pi, pk)] * a[(pj, pk)];
                a[(pi, pj)] -= v;
                if pi != pj {
                    a[(pj, pi)] = a[(pi, pj)];
                }
            }
        }
    }
    (det, if n == 0 { 1.0 } else { min_pivot })
}

/// `|v_1 ∧ ⋯ ∧ v_n| = sqrt(det(v_i·v_j))`.
pub fn wedge_norm(vs: &[Vec<f64>]) -> Result<f64> {
    check_dims(vs)?;
    Ok(psd_determinant(&gram_matrix(vs, vs)).max(0.0).sqrt())
}

/// `⟨u_1∧⋯∧u_n, v_1∧⋯∧v_n⟩ = det(u_i·v_j)`.
pub fn polarized_wedge_inner(us: &[Vec<f64>], vs: &[Vec<f64>]) -> Result<f64> {
    if us.len() != vs.len() {
        return Err(Error::DimensionMismatch { expected: us.len(), got: vs.len() });
    }
    let d = check_dims(us)?;
    let e = check_dims(vs)?;
    if !us.is_empty() && d != e {
        return Err(Error::DimensionMismatch { expected: d, got: e });
    }
    if us.is_empty() {
        return Ok(1.0);
    }
    Ok(gram_matrix(us, vs).determinant())
}

/// `|v_1∧⋯∧v_n| ≤ |v_1∧⋯∧v_i|·|v_{i+1}∧⋯∧v_n|` up to a relative tolerance.
pub fn wedge_cauchy_schwarz_check(vs: &[Vec<f64>], split: usize, tol: f64) -> bool {
    if split == 0 || split >= vs.len() {
        return false;
    }
    let (Ok(all), Ok(a), Ok(b)) = (wedge_norm(vs), wedge_norm(&vs[..split]), wedge_norm(&vs[split..])) else {
        return false;
    };
    all <= a * b * (1.0 + tol) + tol
}

/// Coordinates of `v_1 ∧ ⋯ ∧ v_n` in the basis `e_I`, `I` ranging over
/// increasing `n`-subsets of `0..D` in lexicographic order.
pub fn exterior_coordinates(vs: &[Vec<f64>]) -> Vec<f64> {
    let n = vs.len();
    let d = vs.first().map_or(0, |v| v.len());
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    if n > d {
        return out;
    }
    loop {
        let m = DMatrix::from_fn(n, n, |i, j| vs[i][idx[j]]);
        out.push(if n == 0 { 1.0 } else { m.determinant() });
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < d - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Minimum-norm right inverse `T*(TT*)^{-1}` of a full-row-rank matrix.
pub fn pseudoinverse(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    pseudoinverse_with_tol(t, RANK_TOL)
}

pub fn pseudoinverse_with_tol(t: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let scale = t.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let ttt = t * t.transpose();
    let (det, min_pivot) = pivoted_cholesky(&ttt);
    if t.nrows() > t.ncols() || scale == 0.0 || min_pivot <= rel_tol * scale * scale {
        return Err(Error::Singular { det });
    }
    let chol = ttt.cholesky().ok_or(Error::Singular { det })?;
    Ok(t.transpose() * chol.inverse())
}

/// Gram–Schmidt with one reorthogonalization pass.
///
/// The residual norm of `w_i` equals `|∧_{j≤i} w_j| / |∧_{j<i} w_j|`, which is
/// the quantity checked against the degeneracy tolerance.
pub fn gram_schmidt(ws: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    gram_schmidt_with_tol(ws, GS_TOL)
}

pub fn gram_schmidt_with_tol(ws: &[Vec<f64>], rel_tol: f64) -> Result<Vec<Vec<f64>>> {
    check_dims(ws)?;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(ws.len());
    for (i, w) in ws.iter().enumerate() {
        let norm_w = dot(w, w).sqrt();
        let mut v = w.clone();
        for _ in 0..2 {
            for u in &out {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let ratio = dot(&v, &v).sqrt();
        if norm_w == 0.0 || ratio <= rel_tol * norm_w {
            return Err(Error::DegeneratePrefix { len: i + 1, ratio });
        }
        v.iter_mut().for_each(|x| *x /= ratio);
        out.push(v);
    }
    Ok(out)
}

/// Exact Gram determinant `det(v_i·v_j)` of rational vectors.
pub fn gram_det_exact(vs: &[Vec<Rational>]) -> Rational {
    let n = vs.len();
    let mut g: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| vs[i].iter().zip(&vs[j]).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
                .collect()
        })
        .collect();
    det_exact(&mut g)
}

/// Determinant by Gaussian elimination over the rationals (destroys input).
pub fn det_exact(m: &mut [Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Rational::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &piv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn wedge_examples() {
        let e = |v: &[f64]| v.to_vec();
        assert!((wedge_norm(&[e(&[1., 0., 0.]), e(&[0., 1., 0.])]).unwrap() - 1.0).abs() < 1e-15);
        assert!((wedge_norm(&[e(&[1., 1., 0.]), e(&[1., -1., 0.])]).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(wedge_norm(&[e(&[1., 2., 3.]), e(&[2., 4., 6.])]).unwrap(), 0.0);
        assert!(wedge_norm(&[e(&[1., 2.]), e(&[1.])]).is_err());
    }

    #[test]
    fn brute_force_exterior_matches_example() {
        let c = exterior_coordinates(&[vec![1., 1., 0.], vec![1., -1., 0.]]);
        let n: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 2.0).abs() < 1e-14);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn polarized_examples() {
        let us = vec![vec![1., 0., 0., 0.], vec![0., 1., 0., 0.]];
        let vs = vec![vec![0., 0., 1., 0.], vec![0., 0., 0., 1.]];
        assert_eq!(polarized_wedge_inner(&us, &us).unwrap(), 1.0);
        assert_eq!(polarized_wedge_inner(&us, &vs).unwrap(), 0.0);
        assert!(polarized_wedge_inner(&us, &vs[..1]).is_err());
    }

    #[test]
    fn pseudoinverse_examples() {
        let t = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        let p = pseudoinverse(&t).unwrap();
        assert_eq!(p[(0, 0)], 0.5);
        assert_eq!(p[(1, 0)], 0.0);
        let q = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((pseudoinverse(&q).unwrap() - q.transpose()).norm() < 1e-15);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(pseudoinverse(&s), Err(Error::Singular { .. })));
    }

    #[test]
    fn gram_schmidt_examples() {
        let out = gram_schmidt(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(out, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let err = gram_schmidt(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DegeneratePrefix { len: 2, .. }));
    }

    #[test]
    fn exact_gram_determinant() {
        let vs = vec![vec![int(1), int(1), int(0)], vec![int(1), int(-1), int(0)]];
        assert_eq!(gram_det_exact(&vs), int(4));
    }
}
