//! Lipschitz extension of orthonormal frames on doubling clouds.
//!
//! Pipeline for one new field: maximal `δ`-net, Moser–Tardos resampling of
//! random unit vectors until nearby net vectors are almost orthogonal, a
//! quadratic partition of unity to interpolate them over the whole cloud, and a
//! final Gram–Schmidt step against the existing fields.

use crate::error::{Error, Result};
use crate::nets::{estimate_doubling, greedy_maximal_net, MetricSpace, Net, ScaledMetric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// Per-point orthonormal tuples `v_1(p), …, v_m(p)` in `R^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameField {
    pub dim: usize,
    pub m: usize,
    /// Point-major storage: point `p`, field `i` occupies `[(p*m + i)*D ..][..D]`.
    pub data: Vec<f64>,
    /// Declared Lipschitz bound of each field.
    pub lipschitz: Vec<f64>,
}

impl FrameField {
    /// The frame with no fields in `R^dim`.
    pub fn empty(dim: usize) -> Self {
        FrameField { dim, m: 0, data: Vec::new(), lipschitz: Vec::new() }
    }

    /// The same orthonormal tuple at every point.
    pub fn constant(points: usize, basis: &[Vec<f64>]) -> Self {
        let dim = basis.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(points * basis.len() * dim);
        for _ in 0..points {
            for v in basis {
                data.extend_from_slice(v);
            }
        }
        FrameField { dim, m: basis.len(), data, lipschitz: vec![0.0; basis.len()] }
    }

    /// Builds a frame from per-point vector lists.
    pub fn from_vectors(dim: usize, per_point: Vec<Vec<Vec<f64>>>, lipschitz: Vec<f64>) -> Result<Self> {
        let m = lipschitz.len();
        let mut data = Vec::with_capacity(per_point.len() * m * dim);
        for vs in per_point {
            if vs.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: vs.len() });
            }
            for v in vs {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
                }
                data.extend(v);
            }
        }
        Ok(FrameField { dim, m, data, lipschitz })
    }

    pub fn points(&self, cloud_len: usize) -> usize {
        if self.m == 0 {
            cloud_len
        } else {
            self.data.len() / (self.m * self.dim)
        }
    }

    pub fn get(&self, p: usize, i: usize) -> &[f64] {
        let off = (p * self.m + i) * self.dim;
        &self.data[off..off + self.dim]
    }

    pub fn at(&self, p: usize) -> Vec<&[f64]> {
        (0..self.m).map(|i| self.get(p, i)).collect()
    }

    /// Largest `|v_i·v_j − δ_ij|` over all points.
    pub fn orthonormality_defect(&self, points: usize) -> f64 {
        (0..points)
            .into_par_iter()
            .map(|p| {
                let mut worst: f64 = 0.0;
                for i in 0..self.m {
                    for j in i..self.m {
                        let d = dot(self.get(p, i), self.get(p, j)) - if i == j { 1.0 } else { 0.0 };
                        worst = worst.max(d.abs());
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Appends one field given as per-point vectors.
    pub fn push_field(&self, new: &[Vec<f64>], lipschitz: f64) -> FrameField {
        let points = new.len();
        let m = self.m + 1;
        let mut data = Vec::with_capacity(points * m * self.dim);
        for (p, v) in new.iter().enumerate() {
            for i in 0..self.m {
                data.extend_from_slice(self.get(p, i));
            }
            data.extend_from_slice(v);
        }
        let mut lip = self.lipschitz.clone();
        lip.push(lipschitz);
        FrameField { dim: self.dim, m, data, lipschitz: lip }
    }

    pub fn write_csv(&self, path: &Path, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["point".to_string(), "field".to_string()];
        header.extend((0..self.dim).map(|c| format!("c{c}")));
        w.write_record(&header)?;
        for p in 0..points {
            for i in 0..self.m {
                let mut row = vec![p.to_string(), i.to_string()];
                row.extend(self.get(p, i).iter().map(|x| format!("{x:e}")));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConfig {
    /// Declared doubling constant.
    pub k: f64,
    /// Number of fields already present.
    pub m: usize,
    /// Ambient dimension `D`.
    pub dim: usize,
    pub seed: u64,
    /// Resample budget is `budget_factor · |net|`.
    pub budget_factor: usize,
    /// Bad events look at net pairs closer than `event_radius · δ`.
    pub event_radius: f64,
    /// Fail on violated diagnostic bounds instead of only reporting them.
    pub strict: bool,
}

impl ExtensionConfig {
    pub fn new(k: f64, m: usize, dim: usize, seed: u64) -> Self {
        ExtensionConfig { k, m, dim, seed, budget_factor: 100, event_radius: 2.0, strict: true }
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    fn m_eff(&self) -> f64 {
        self.m.max(1) as f64
    }

    /// `δ = 1/(8Km)`.
    pub fn delta(&self) -> f64 {
        1.0 / (8.0 * self.k * self.m_eff())
    }

    /// `ε = 1/(4K²)`.
    pub fn eps_cap(&self) -> f64 {
        1.0 / (4.0 * self.k * self.k)
    }

    /// `224 K⁴ log K`.
    pub fn gap_required(&self) -> f64 {
        224.0 * self.k.powi(4) * self.k.ln()
    }

    pub fn gap_flag(&self) -> bool {
        self.dim >= self.m && (self.dim - self.m) as f64 >= self.gap_required()
    }

    /// `150 K⁵ m (m+1)`.
    pub fn lipschitz_bound(&self) -> f64 {
        let m = self.m_eff();
        150.0 * self.k.powi(5) * m * (m + 1.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.k >= 2.0) {
            return Err(Error::InvalidConfig(format!("doubling constant must be at least 2, got {}", self.k)));
        }
        if self.m >= self.dim {
            return Err(Error::NoComplement(self.dim));
        }
        Ok(())
    }
}

/// Uniform unit vector in the orthogonal complement of an orthonormal `basis`.
pub fn sample_orthocomplement_unit(basis: &[&[f64]], dim: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if basis.len() >= dim {
        return Err(Error::NoComplement(dim));
    }
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for _ in 0..2 {
            for b in basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            return Ok(v);
        }
    }
}

/// Net vectors `v'(p)` with `|v'(p)·v'(q)| ≤ ε` for all close net pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteAssignment {
    pub net: Net,
    pub vectors: Vec<Vec<f64>>,
    pub resamples: usize,
    /// Number of net points with at least one neighbor inside the event radius.
    pub events: usize,
    pub close_pairs: usize,
    pub max_close_dot: f64,
    /// Exhaustive recount of violated close pairs after termination.
    pub violations_after: usize,
}

fn neighbor_lists(cloud: &dyn MetricSpace, net: &Net, radius: f64) -> Vec<Vec<usize>> {
    let mem = &net.members;
    (0..mem.len())
        .into_par_iter()
        .map(|a| (0..mem.len()).filter(|&b| b != a && cloud.dist(mem[a], mem[b]) < radius).collect())
        .collect()
}

/// Moser–Tardos resampling on the events
/// `A_p = {∃ q in the net, 0 < d(p,q) < 2δ, |v'(p)·v'(q)| > ε}`.
///
/// The lowest-index violated event is handled first and all of its variables
/// (`v'(p)` and the `v'(q)` it looks at) are redrawn.
pub fn lll_resample(
    cloud: &dyn MetricSpace,
    net: &Net,
    frame: &FrameField,
    config: &ExtensionConfig,
) -> Result<DiscreteAssignment> {
    config.validate()?;
    let radius = config.event_radius * config.delta();
    let eps = config.eps_cap();
    let nbrs = neighbor_lists(cloud, net, radius);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draw = |a: usize, rng: &mut ChaCha8Rng| -> Result<Vec<f64>> {
        let p = net.members[a];
        let basis = frame.at(p);
        sample_orthocomplement_unit(&basis, config.dim, rng)
    };
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(net.len());
    for a in 0..net.len() {
        vs.push(draw(a, &mut rng)?);
    }
    let violated = |a: usize, vs: &[Vec<f64>]| nbrs[a].iter().any(|&b| dot(&vs[a], &vs[b]).abs() > eps);
    let mut bad: BTreeSet<usize> = (0..net.len()).filter(|&a| violated(a, &vs)).collect();
    let budget = config.budget_factor * net.len().max(1);
    let mut resamples = 0;
    while let Some(&a) = bad.iter().next() {
        if resamples >= budget {
            return Err(Error::ResampleBudget { resamples, surviving: bad.len() });
        }
        resamples += 1;
        let mut touched: BTreeSet<usize> = BTreeSet::new();
        vs[a] = draw(a, &mut rng)?;
        touched.insert(a);
        for &b in &nbrs[a] {
            vs[b] = draw(b, &mut rng)?;
            touched.insert(b);
        }
        let mut recheck: BTreeSet<usize> = touched.clone();
        for &t in &touched {
            recheck.extend(nbrs[t].iter().copied());
        }
        for c in recheck {
            if violated(c, &vs) {
                bad.insert(c);
            } else {
                bad.remove(&c);
            }
        }
    }
    let (close_pairs, violations_after, max_close_dot) = (0..net.len())
        .into_par_iter()
        .map(|a| {
            let mut cnt = 0usize;
            let mut viol = 0usize;
            let mut mx: f64 = 0.0;
            for &b in nbrs[a].iter().filter(|&&b| b > a) {
                let d = dot(&vs[a], &vs[b]).abs();
                cnt += 1;
                mx = mx.max(d);
                if d > eps {
                    viol += 1;
                }
            }
            (cnt, viol, mx)
        })
        .reduce(|| (0, 0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1, x.2.max(y.2)));
    Ok(DiscreteAssignment {
        net: net.clone(),
        events: nbrs.iter().filter(|n| !n.is_empty()).count(),
        vectors: vs,
        resamples,
        close_pairs,
        max_close_dot,
        violations_after,
    })
}

fn tent(d: f64, delta: f64) -> f64 {
    if d <= delta {
        1.0
    } else if d <= 2.0 * delta {
        2.0 - d / delta
    } else {
        0.0
    }
}

/// Weights `(position in net.members, φ_q(p))` with `Σ φ_q(p)² = 1`.
fn partition_positions(cloud: &dyn MetricSpace, net: &Net, delta: f64, p: usize) -> Result<Vec<(usize, f64)>> {
    let raw: Vec<(usize, f64)> = net
        .members
        .iter()
        .enumerate()
        .filter_map(|(k, &q)| {
            let t = tent(cloud.dist(p, q), delta);
            (t > 0.0).then_some((k, t))
        })
        .collect();
    let s: f64 = raw.iter().map(|(_, t)| t * t).sum::<f64>().sqrt();
    if s == 0.0 {
        return Err(Error::NotCovered(p));
    }
    Ok(raw.into_iter().map(|(k, t)| (k, t / s)).collect())
}

/// The quadratic partition of unity at cloud point `p`, as `(net member, weight)`.
pub fn quadratic_partition(cloud: &dyn MetricSpace, net: &Net, delta: f64, p: usize) -> Result<Vec<(usize, f64)>> {
    Ok(partition_positions(cloud, net, delta, p)?.into_iter().map(|(k, w)| (net.members[k], w)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCertificate {
    pub value: f64,
    pub witness: Option<(usize, usize)>,
    pub pairs: usize,
    pub exhaustive: bool,
}

/// Largest `|f(p) − f(q)| / d(p,q)` over all pairs (up to 5000 points) or 10⁶ seeded pairs.
pub fn empirical_lipschitz(
    cloud: &dyn MetricSpace,
    values: &(dyn Fn(usize) -> Vec<f64> + Sync),
    seed: u64,
) -> LipschitzCertificate {
    let n = cloud.len();
    let cache: Vec<Vec<f64>> = (0..n).into_par_iter().map(values).collect();
    let ratio = |i: usize, j: usize| -> f64 {
        let d = cloud.dist(i, j);
        if d == 0.0 {
            return 0.0;
        }
        dist2(&cache[i], &cache[j]) / d
    };
    let best = |a: (f64, usize, usize), b: (f64, usize, usize)| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a };
    if n <= 5000 {
        let r = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| (ratio(i, j), i, j)).fold((0.0, 0, 0), best))
            .reduce(|| (0.0, 0, 0), best);
        LipschitzCertificate {
            value: r.0,
            witness: (r.0 > 0.0).then_some((r.1, r.2)),
            pairs: n * n.saturating_sub(1) / 2,
            exhaustive: true,
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(usize, usize)> = (0..1_000_000).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        let r = pairs.par_iter().map(|&(i, j)| (ratio(i, j), i, j)).reduce(|| (0.0, 0, 0), best);
        LipschitzCertificate { value: r.0, witness: (r.0 > 0.0).then_some((r.1, r.2)), pairs: pairs.len(), exhaustive: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionDiagnostics {
    pub config: ExtensionConfig,
    pub delta: f64,
    pub eps_cap: f64,
    pub gap_required: f64,
    pub gap_flag: bool,
    /// `"guaranteed"` when the dimension gap holds, otherwise `"best-effort"`.
    pub label: String,
    pub points: usize,
    pub net_size: usize,
    pub resamples: usize,
    pub events: usize,
    pub close_pairs: usize,
    pub max_close_dot: f64,
    pub violations_after: usize,
    pub norm_sq_min: f64,
    pub norm_sq_max: f64,
    pub norm_sq_witnesses: (usize, usize),
    pub max_perp_dot: f64,
    pub perp_bound: f64,
    pub perp_witness: usize,
    pub lipschitz: LipschitzCertificate,
    pub lipschitz_bound: f64,
    pub orthonormality_defect: f64,
    pub bound_norm_pass: bool,
    pub bound_perp_pass: bool,
    pub bound_lipschitz_pass: bool,
    pub doubling_estimate: f64,
    pub warnings: Vec<String>,
}

impl ExtensionDiagnostics {
    pub fn passed(&self) -> bool {
        self.violations_after == 0 && self.bound_norm_pass && self.bound_perp_pass && self.bound_lipschitz_pass
    }
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub frame: FrameField,
    pub diagnostics: ExtensionDiagnostics,
    pub assignment: DiscreteAssignment,
}

/// Adds one field to a 1-Lipschitz orthonormal frame.
pub fn extend_frame(cloud: &dyn MetricSpace, frame: &FrameField, config: &ExtensionConfig) -> Result<Extension> {
    config.validate()?;
    let n = cloud.len();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    if frame.m != config.m || (frame.m > 0 && frame.dim != config.dim) {
        return Err(Error::InvalidConfig(format!(
            "frame has m={} D={}, config has m={} D={}",
            frame.m, frame.dim, config.m, config.dim
        )));
    }
    if frame.m > 0 && frame.points(n) != n {
        return Err(Error::DimensionMismatch { expected: n, got: frame.points(n) });
    }
    let delta = config.delta();
    let net = greedy_maximal_net(cloud, delta)?;
    let assignment = lll_resample(cloud, &net, frame, config)?;
    let per_point: Vec<(Vec<f64>, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|p| -> Result<(Vec<f64>, f64, f64)> {
            let weights = partition_positions(cloud, &net, delta, p)?;
            let mut v = vec![0.0; config.dim];
            for (k, w) in weights {
                v.iter_mut().zip(&assignment.vectors[k]).for_each(|(x, y)| *x += w * y);
            }
            let norm_sq = dot(&v, &v);
            let perp = (0..frame.m).map(|i| dot(&v, frame.get(p, i)).abs()).fold(0.0, f64::max);
            Ok((v, norm_sq, perp))
        })
        .collect::<Result<_>>()?;
    let mut norm_sq_min = (f64::INFINITY, 0);
    let mut norm_sq_max = (f64::NEG_INFINITY, 0);
    let mut perp_max = (0.0, 0);
    for (p, (_, sq, perp)) in per_point.iter().enumerate() {
        if *sq < norm_sq_min.0 {
            norm_sq_min = (*sq, p);
        }
        if *sq > norm_sq_max.0 {
            norm_sq_max = (*sq, p);
        }
        if *perp > perp_max.0 {
            perp_max = (*perp, p);
        }
    }
    let new_field: Vec<Vec<f64>> = per_point
        .par_iter()
        .enumerate()
        .map(|(p, (v, _, _))| -> Result<Vec<f64>> {
            let mut w = v.clone();
            for _ in 0..2 {
                for i in 0..frame.m {
                    let b = frame.get(p, i);
                    let c = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nrm = dot(&w, &w).sqrt();
            if nrm <= 1e-12 {
                return Err(Error::DegeneratePrefix { len: frame.m + 1, ratio: nrm });
            }
            Ok(w.into_iter().map(|x| x / nrm).collect())
        })
        .collect::<Result<_>>()?;
    let lipschitz = empirical_lipschitz(cloud, &|p| new_field[p].clone(), config.seed);
    let lipschitz_bound = config.lipschitz_bound();
    let perp_bound = 1.0 / (4.0 * config.m_eff());
    let out = frame.push_field(&new_field, lipschitz_bound);
    let doubling = estimate_doubling(cloud, &net, 200, 3, None, config.seed);
    let mut warnings = Vec::new();
    if doubling.k_estimate > config.k {
        warnings.push(format!(
            "empirical doubling estimate {:.3} exceeds declared K = {}",
            doubling.k_estimate, config.k
        ));
    }
    if !config.gap_flag() {
        warnings.push(format!(
            "D - m = {} is below the gap {:.1}; result is best-effort",
            config.dim - config.m,
            config.gap_required()
        ));
    }
    let diagnostics = ExtensionDiagnostics {
        config: config.clone(),
        delta,
        eps_cap: config.eps_cap(),
        gap_required: config.gap_required(),
        gap_flag: config.gap_flag(),
        label: if config.gap_flag() { "guaranteed" } else { "best-effort" }.to_string(),
        points: n,
        net_size: net.len(),
        resamples: assignment.resamples,
        events: assignment.events,
        close_pairs: assignment.close_pairs,
        max_close_dot: assignment.max_close_dot,
        violations_after: assignment.violations_after,
        norm_sq_min: norm_sq_min.0,
        norm_sq_max: norm_sq_max.0,
        norm_sq_witnesses: (norm_sq_min.1, norm_sq_max.1),
        max_perp_dot: perp_max.0,
        perp_bound,
        perp_witness: perp_max.1,
        bound_norm_pass: norm_sq_min.0 >= 0.75 && norm_sq_max.0 <= 1.25,
        bound_perp_pass: frame.m == 0 || perp_max.0 <= perp_bound,
        bound_lipschitz_pass: lipschitz.value <= lipschitz_bound,
        lipschitz,
        lipschitz_bound,
        orthonormality_defect: out.orthonormality_defect(n),
        doubling_estimate: doubling.k_estimate,
        warnings,
    };
    if config.strict && !diagnostics.passed() {
        return Err(Error::ExtensionFailed(serde_json::to_string(&diagnostics)?));
    }
    Ok(Extension { frame: out, diagnostics, assignment })
}

/// Adds `count` fields one at a time. Before each step the metric is
/// multiplied by the running frame's empirical Lipschitz constant (when it
/// exceeds 1) so the input frame is 1-Lipschitz, as the single step requires.
pub fn extend_frame_repeated(
    cloud: &dyn MetricSpace,
    frame: &FrameField,
    count: usize,
    config: &ExtensionConfig,
) -> Result<(FrameField, Vec<ExtensionDiagnostics>)> {
    let mut current = frame.clone();
    let mut reports = Vec::with_capacity(count);
    for step in 0..count {
        let n = cloud.len();
        let mut lip: f64 = 0.0;
        for i in 0..current.m {
            let cert = empirical_lipschitz(cloud, &|p| current.get(p, i).to_vec(), config.seed);
            lip = lip.max(cert.value);
        }
        let factor = lip.max(1.0);
        let scaled = ScaledMetric { inner: cloud, factor };
        let mut cfg = config.clone();
        cfg.m = current.m;
        cfg.seed = config.seed.wrapping_add(step as u64);
        let ext = extend_frame(&scaled, &current, &cfg)?;
        let mut f = ext.frame;
        if let Some(l) = f.lipschitz.last_mut() {
            *l *= factor;
        }
        debug_assert_eq!(f.points(n), n);
        current = f;
        reports.push(ext.diagnostics);
    }
    Ok((current, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::EuclideanCloud;

    #[test]
    fn config_constants() {
        let c = ExtensionConfig::new(2.0, 1, 3000, 0);
        assert_eq!(c.delta(), 1.0 / 16.0);
        assert_eq!(c.eps_cap(), 1.0 / 16.0);
        assert!((c.gap_required() - 224.0 * 16.0 * 2f64.ln()).abs() < 1e-9);
        assert!((c.gap_required() - 2484.3).abs() < 0.1);
        assert!(c.gap_flag());
        assert!(!ExtensionConfig::new(2.0, 1, 2000, 0).gap_flag());
        assert_eq!(c.lipschitz_bound(), 9600.0);
    }

    #[test]
    fn complement_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e1 = [1.0, 0.0];
        let v = sample_orthocomplement_unit(&[&e1], 2, &mut rng).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1].abs() - 1.0).abs() < 1e-15);
        let basis: Vec<Vec<f64>> = (0..3).map(|i| (0..6).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let refs: Vec<&[f64]> = basis.iter().map(|b| b.as_slice()).collect();
        let v = sample_orthocomplement_unit(&refs, 6, &mut rng).unwrap();
        assert!(basis.iter().all(|b| dot(b, &v).abs() < 1e-10));
        assert!(matches!(sample_orthocomplement_unit(&[&e1, &[0.0, 1.0]], 2, &mut rng), Err(Error::NoComplement(2))));
    }

    #[test]
    fn partition_examples() {
        let c = EuclideanCloud { points: vec![vec![0.0], vec![1.0], vec![2.0]] };
        let net = Net { delta: 1.0, members: vec![0, 2] };
        let w = quadratic_partition(&c, &net, 1.0, 1).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|(_, x)| (x - 0.5f64.sqrt()).abs() < 1e-15));
        let iso = EuclideanCloud { points: vec![vec![0.0], vec![10.0]] };
        let net = Net { delta: 1.0, members: vec![0, 1] };
        assert_eq!(quadratic_partition(&iso, &net, 1.0, 0).unwrap(), vec![(0, 1.0)]);
        let lone = Net { delta: 1.0, members: vec![0] };
        assert!(matches!(quadratic_partition(&iso, &lone, 1.0, 1), Err(Error::NotCovered(1))));
    }

    #[test]
    fn single_point_extension() {
        let c = EuclideanCloud { points: vec![vec![0.0]] };
        let frame = FrameField::constant(1, &[vec![1.0, 0.0, 0.0]]);
        let ext = extend_frame(&c, &frame, &ExtensionConfig::new(2.0, 1, 3, 0).with_strict(false)).unwrap();
        let v = ext.frame.get(0, 1);
        assert!(dot(v, &[1.0, 0.0, 0.0]).abs() < 1e-12 && (dot(v, v) - 1.0).abs() < 1e-12);
        assert_eq!(ext.assignment.resamples, 0);
        assert!(ext.diagnostics.passed());
    }

    #[test]
    fn far_apart_net_points_need_no_resampling() {
        let c = EuclideanCloud { points: vec![vec![0.0], vec![1.0]] };
        let frame = FrameField::constant(2, &[vec![1.0, 0.0, 0.0, 0.0]]);
        let cfg = ExtensionConfig::new(2.0, 1, 4, 3);
        let net = greedy_maximal_net(&c, cfg.delta()).unwrap();
        let a = lll_resample(&c, &net, &frame, &cfg).unwrap();
        assert_eq!((a.resamples, a.events, a.violations_after), (0, 0, 0));
    }
}
