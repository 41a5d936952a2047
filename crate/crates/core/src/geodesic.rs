//! Upper bounds for the Carnot–Carathéodory distance and quasinorm calibration.
//!
//! A horizontal path is a product `exp(u_1) ⋯ exp(u_T)` of horizontal
//! exponentials, integrated exactly with the BCH product. The controls are
//! driven to the endpoint by minimum-norm Gauss–Newton steps: each step solves
//! the linearized endpoint equation for the control vector of least energy, so
//! feasible iterates drift toward constant-speed paths of small length.

use crate::algebra::{neg, StratifiedAlgebra};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CcOptions {
    pub segments: usize,
    pub iterations: usize,
    pub restarts: usize,
    /// Feasibility threshold on the quasinorm of the endpoint residual.
    pub tol: f64,
    pub seed: u64,
}

impl Default for CcOptions {
    fn default() -> Self {
        CcOptions { segments: 8, iterations: 60, restarts: 4, tol: 1e-6, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcEstimate {
    pub length: f64,
    pub residual: f64,
    pub controls: Vec<Vec<f64>>,
}

fn endpoint(alg: &StratifiedAlgebra, u: &[f64], k: usize) -> Vec<f64> {
    let n = alg.dim();
    let mut x = vec![0.0; n];
    let mut step = vec![0.0; n];
    for seg in u.chunks(k) {
        step[..k].copy_from_slice(seg);
        x = alg.mul_f64(&x, &step);
    }
    x
}

/// `log(E(u)^{-1} g)` in exponential coordinates.
fn residual(alg: &StratifiedAlgebra, u: &[f64], k: usize, g: &[f64]) -> Vec<f64> {
    alg.mul_f64(&neg(&endpoint(alg, u, k)), g)
}

fn path_length(u: &[f64], k: usize) -> f64 {
    u.chunks(k).map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt()).sum()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn jacobian(alg: &StratifiedAlgebra, u: &[f64], k: usize, g: &[f64]) -> DMatrix<f64> {
    let n = alg.dim();
    let h = 1e-6;
    let mut j = DMatrix::zeros(n, u.len());
    let mut w = u.to_vec();
    for c in 0..u.len() {
        w[c] = u[c] + h;
        let plus = residual(alg, &w, k, g);
        w[c] = u[c] - h;
        let minus = residual(alg, &w, k, g);
        w[c] = u[c];
        for r in 0..n {
            j[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    j
}

/// Runs one restart and returns the best feasible iterate, if any.
fn descend(alg: &StratifiedAlgebra, g: &[f64], mut u: Vec<f64>, opts: &CcOptions) -> Option<CcEstimate> {
    let k = alg.horizontal_dim();
    let mu = 1e3;
    let merit = |u: &[f64], e: &[f64]| 0.5 * u.iter().map(|x| x * x).sum::<f64>() + mu * norm2(e);
    let mut e = residual(alg, &u, k, g);
    let mut best: Option<CcEstimate> = None;
    let consider = |u: &[f64], e: &[f64], best: &mut Option<CcEstimate>| {
        let res = alg.quasinorm(e);
        if res < opts.tol {
            let len = path_length(u, k);
            if best.as_ref().is_none_or(|b| len < b.length) {
                *best = Some(CcEstimate { length: len, residual: res, controls: u.chunks(k).map(|c| c.to_vec()).collect() });
            }
        }
    };
    consider(&u, &e, &mut best);
    for _ in 0..opts.iterations {
        let jac = jacobian(alg, &u, k, g);
        let uv = DVector::from_column_slice(&u);
        let rhs = &jac * &uv - DVector::from_column_slice(&e);
        let Ok(pinv) = jac.clone().svd(true, true).pseudo_inverse(1e-10) else { break };
        let target = pinv * rhs;
        let m0 = merit(&u, &e);
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..12 {
            let trial: Vec<f64> = u.iter().zip(target.iter()).map(|(a, t)| a + alpha * (t - a)).collect();
            let et = residual(alg, &trial, k, g);
            if merit(&trial, &et) < m0 {
                u = trial;
                e = et;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        consider(&u, &e, &mut best);
        if !accepted {
            break;
        }
    }
    best
}

/// Length of a feasible piecewise-horizontal path from `p` to `q`.
///
/// Restarts follow fixed per-restart schedules and the best feasible iterate
/// is kept, so the result never increases with `iterations`.
pub fn cc_upper_bound(alg: &StratifiedAlgebra, p: &[f64], q: &[f64], opts: &CcOptions) -> Result<CcEstimate> {
    if opts.segments == 0 {
        return Err(Error::InvalidConfig("at least one segment is required".into()));
    }
    let g = alg.mul_f64(&neg(p), q);
    let scale = alg.quasinorm(&g);
    let k = alg.horizontal_dim();
    if scale == 0.0 {
        return Ok(CcEstimate { length: 0.0, residual: 0.0, controls: vec![vec![0.0; k]; opts.segments] });
    }
    // solve for the unit-size target and rescale by homogeneity
    let gu = alg.dilate_f64(1.0 / scale, &g);
    let t = opts.segments;
    let mut best: Option<CcEstimate> = None;
    let mut best_residual = f64::INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add(restart as u64));
        let sigma = 1.0 / (t as f64).sqrt();
        let mut u: Vec<f64> = (0..t * k).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        if restart == 0 {
            for seg in u.chunks_mut(k) {
                for (c, x) in seg.iter_mut().enumerate() {
                    *x = 0.1 * *x + gu[c] / t as f64;
                }
            }
        }
        if let Some(est) = descend(alg, &gu, u.clone(), opts) {
            if best.as_ref().is_none_or(|b| est.length < b.length) {
                best = Some(est);
            }
        } else {
            best_residual = best_residual.min(alg.quasinorm(&residual(alg, &u, k, &gu)));
        }
    }
    match best {
        Some(b) => Ok(CcEstimate {
            length: b.length * scale,
            residual: b.residual * scale,
            controls: b.controls.into_iter().map(|c| c.into_iter().map(|x| x * scale).collect()).collect(),
        }),
        None => Err(Error::Infeasible { residual: best_residual * scale, tol: opts.tol }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPair {
    pub i: usize,
    pub j: usize,
    pub quasi: f64,
    pub cc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_low: f64,
    pub c_high: f64,
    pub pairs: Vec<CalibrationPair>,
    pub infeasible: usize,
}

/// Empirical constants with `c_low·N(p^{-1}q) ≤ cc ≤ c_high·N(p^{-1}q)` on sampled pairs.
pub fn calibrate_equivalence(
    alg: &StratifiedAlgebra,
    points: &[Vec<f64>],
    samples: usize,
    opts: &CcOptions,
) -> Result<Calibration> {
    if points.len() < 2 {
        return Err(Error::DegenerateCloud("calibration needs two distinct points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut picks = Vec::with_capacity(samples);
    while picks.len() < samples {
        let i = rng.random_range(0..points.len());
        let j = rng.random_range(0..points.len());
        if alg.quasimetric(&points[i], &points[j]) > 0.0 {
            picks.push((i, j));
        }
        if picks.is_empty() && rng.random_range(0..1000) == 0 {
            return Err(Error::DegenerateCloud("all sampled pairs coincide".into()));
        }
    }
    let results: Vec<Option<CalibrationPair>> = picks
        .par_iter()
        .map(|&(i, j)| {
            let quasi = alg.quasimetric(&points[i], &points[j]);
            cc_upper_bound(alg, &points[i], &points[j], opts).ok().map(|e| CalibrationPair { i, j, quasi, cc: e.length })
        })
        .collect();
    let infeasible = results.iter().filter(|r| r.is_none()).count();
    let pairs: Vec<CalibrationPair> = results.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(Error::Infeasible { residual: f64::NAN, tol: opts.tol });
    }
    let ratios = pairs.iter().map(|p| p.cc / p.quasi);
    let (c_low, c_high) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(Calibration { c_low, c_high, pairs, infeasible })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_and_horizontal_targets() {
        let alg = StratifiedAlgebra::h3();
        let o = CcOptions::default();
        let p = [0.3, -0.2, 0.7];
        assert_eq!(cc_upper_bound(&alg, &p, &p, &o).unwrap().length, 0.0);
        let e = cc_upper_bound(&alg, &[0.0; 3], &[1.0, 0.0, 0.0], &o).unwrap();
        assert!((e.length - 1.0).abs() < 1e-6, "{}", e.length);
    }

    #[test]
    fn vertical_target_approaches_the_circle() {
        // the optimal loop is a circle enclosing unit area: length 2√π
        let alg = StratifiedAlgebra::h3();
        let circle = 2.0 * std::f64::consts::PI.sqrt();
        let mut prev = f64::INFINITY;
        for segments in [4, 8, 16] {
            let o = CcOptions { segments, ..CcOptions::default() };
            let e = cc_upper_bound(&alg, &[0.0; 3], &[0.0, 0.0, 1.0], &o).unwrap();
            // best T-segment loop: the regular T-gon of unit area
            let t = segments as f64;
            let polygon = 2.0 * (t * (std::f64::consts::PI / t).tan()).sqrt();
            assert!(e.length >= circle - 1e-6 && e.length <= prev + 1e-9, "{segments}: {}", e.length);
            assert!((e.length - polygon).abs() < 1e-3, "{segments}: {} vs {polygon}", e.length);
            assert!(e.residual < 1e-6);
            prev = e.length;
        }
    }
}
