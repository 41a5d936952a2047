//! Metric clouds, maximal nets, colorings and doubling diagnostics.

use crate::algebra::StratifiedAlgebra;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A finite point set with a pair-distance oracle.
pub trait MetricSpace: Sync {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quasimetrics satisfy the triangle inequality only up to a constant.
    fn is_quasi(&self) -> bool {
        false
    }
}

/// Points of a Carnot group under the quasimetric `N(p^{-1} q)`.
#[derive(Clone, Debug)]
pub struct CarnotCloud {
    pub alg: Arc<StratifiedAlgebra>,
    pub points: Vec<Vec<f64>>,
}

impl CarnotCloud {
    pub fn new(alg: Arc<StratifiedAlgebra>, points: Vec<Vec<f64>>) -> Self {
        CarnotCloud { alg, points }
    }
}

impl MetricSpace for CarnotCloud {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.alg.quasimetric(&self.points[i], &self.points[j])
    }
    fn is_quasi(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct EuclideanCloud {
    pub points: Vec<Vec<f64>>,
}

impl MetricSpace for EuclideanCloud {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// Points on the flat torus `(R / period Z)^d`.
#[derive(Clone, Debug)]
pub struct FlatTorus {
    pub points: Vec<Vec<f64>>,
    pub period: f64,
}

impl FlatTorus {
    pub fn random(n: usize, dim: usize, period: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>() * period).collect()).collect();
        FlatTorus { points, period }
    }
}

impl MetricSpace for FlatTorus {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| {
                let d = (a - b).abs() % self.period;
                let d = d.min(self.period - d);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// A metric multiplied by a constant factor.
pub struct ScaledMetric<'a> {
    pub inner: &'a dyn MetricSpace,
    pub factor: f64,
}

impl MetricSpace for ScaledMetric<'_> {
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.factor * self.inner.dist(i, j)
    }
    fn is_quasi(&self) -> bool {
        self.inner.is_quasi()
    }
}

/// Dense precomputed distances.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
    quasi: bool,
}

impl DistanceMatrix {
    pub fn from_metric(m: &dyn MetricSpace) -> Self {
        let n = m.len();
        let d: Vec<f64> = (0..n * n).into_par_iter().map(|k| m.dist(k / n, k % n)).collect();
        DistanceMatrix { n, d, quasi: m.is_quasi() }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let d: Vec<f64> = (0..n * n).into_par_iter().map(|k| f(k / n, k % n)).collect();
        DistanceMatrix { n, d, quasi: false }
    }
}

impl MetricSpace for DistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
    fn is_quasi(&self) -> bool {
        self.quasi
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct MetricReport {
    pub asymmetric: Vec<(usize, usize)>,
    pub diagonal_violations: Vec<(usize, usize)>,
    pub triangle_violations: Vec<(usize, usize, usize)>,
    pub triangle_checked: bool,
}

impl MetricReport {
    pub fn is_valid(&self) -> bool {
        self.asymmetric.is_empty() && self.diagonal_violations.is_empty() && self.triangle_violations.is_empty()
    }
}

/// Samples the metric axioms; the triangle inequality is skipped for quasimetrics.
pub fn check_metric(m: &dyn MetricSpace, samples: usize, seed: u64) -> MetricReport {
    let n = m.len();
    let mut rep = MetricReport { triangle_checked: !m.is_quasi(), ..Default::default() };
    if n == 0 {
        return rep;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (i, j, k) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let dij = m.dist(i, j);
        if (dij - m.dist(j, i)).abs() > 1e-12 * (1.0 + dij) {
            rep.asymmetric.push((i, j));
        }
        if dij < 0.0 || (i == j) != (dij == 0.0) {
            rep.diagonal_violations.push((i, j));
        }
        if rep.triangle_checked && m.dist(i, k) > dij + m.dist(j, k) + 1e-12 {
            rep.triangle_violations.push((i, j, k));
        }
    }
    rep
}

/// Member indices of a `δ`-separated subset of a cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub delta: f64,
    pub members: Vec<usize>,
}

impl Net {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Scans the cloud in order and keeps every point at distance `≥ δ` from all kept points.
pub fn greedy_maximal_net(cloud: &dyn MetricSpace, delta: f64) -> Result<Net> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!("net separation must be positive, got {delta}")));
    }
    let mut members: Vec<usize> = Vec::new();
    for i in 0..cloud.len() {
        if members.iter().all(|&m| cloud.dist(m, i) >= delta) {
            members.push(i);
        }
    }
    Ok(Net { delta, members })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub separation_violations: Vec<(usize, usize, f64)>,
    pub covering_violations: Vec<usize>,
}

impl NetReport {
    pub fn is_valid(&self) -> bool {
        self.separation_violations.is_empty() && self.covering_violations.is_empty()
    }
}

fn separation_violations(cloud: &dyn MetricSpace, members: &[usize], delta: f64) -> Vec<(usize, usize, f64)> {
    (0..members.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            (a + 1..members.len()).filter_map(move |b| {
                let d = cloud.dist(members[a], members[b]);
                (d < delta).then_some((members[a], members[b], d))
            })
        })
        .collect()
}

/// Separation over all member pairs plus covering of every cloud point.
pub fn verify_net(cloud: &dyn MetricSpace, net: &Net) -> NetReport {
    let covering_violations = (0..cloud.len())
        .into_par_iter()
        .filter(|&i| !net.members.iter().any(|&m| cloud.dist(m, i) <= net.delta))
        .collect();
    NetReport { separation_violations: separation_violations(cloud, &net.members, net.delta), covering_violations }
}

/// Separation only (for subsets that need not cover).
pub fn verify_separation(cloud: &dyn MetricSpace, net: &Net) -> NetReport {
    NetReport { separation_violations: separation_violations(cloud, &net.members, net.delta), covering_violations: vec![] }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCount {
    pub center: usize,
    pub radius: f64,
    pub count: usize,
    pub bound: f64,
    pub ok: bool,
}

/// `|N_δ ∩ B_R(center)| ≤ (2R/δ + 1)^{n_h}`.
pub fn ball_count_check(cloud: &dyn MetricSpace, net: &Net, radius: f64, center: usize, n_h: usize) -> BallCount {
    let count = net.members.iter().filter(|&&m| cloud.dist(center, m) < radius).count();
    let bound = (2.0 * radius / net.delta + 1.0).powi(n_h as i32);
    BallCount { center, radius, count, bound, ok: count as f64 <= bound }
}

/// Runs [`ball_count_check`] at every cloud point for each radius and returns the failures.
pub fn volumetric_audit(cloud: &dyn MetricSpace, net: &Net, radii: &[f64], n_h: usize) -> (usize, Vec<BallCount>) {
    let checks: Vec<BallCount> = (0..cloud.len())
        .into_par_iter()
        .flat_map_iter(|c| radii.iter().map(move |&r| ball_count_check(cloud, net, r, c, n_h)))
        .collect();
    let total = checks.len();
    (total, checks.into_iter().filter(|b| !b.ok).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coloring {
    pub net: Net,
    pub coarse_sep: f64,
    /// Color of each net member, aligned with `net.members`.
    pub colors: Vec<usize>,
    pub num_colors: usize,
}

impl Coloring {
    /// Cloud indices of each color class.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors];
        for (k, &c) in self.colors.iter().enumerate() {
            out[c].push(self.net.members[k]);
        }
        out
    }
}

/// Greedy coloring in member order: each member takes the smallest color not
/// used by an earlier member closer than `coarse_sep`.
pub fn color_net(cloud: &dyn MetricSpace, net: &Net, coarse_sep: f64) -> Coloring {
    let m = net.members.len();
    let mut colors: Vec<usize> = Vec::with_capacity(m);
    let mut num_colors = 0;
    for a in 0..m {
        let mut used: Vec<bool> = vec![false; num_colors + 1];
        for b in 0..a {
            if cloud.dist(net.members[a], net.members[b]) < coarse_sep {
                used[colors[b]] = true;
            }
        }
        let c = used.iter().position(|u| !u).unwrap();
        num_colors = num_colors.max(c + 1);
        colors.push(c);
    }
    Coloring { net: net.clone(), coarse_sep, colors, num_colors }
}

/// Every class must be `coarse_sep`-separated.
pub fn verify_coloring(cloud: &dyn MetricSpace, coloring: &Coloring) -> Vec<NetReport> {
    coloring
        .classes()
        .into_iter()
        .map(|members| verify_separation(cloud, &Net { delta: coloring.coarse_sep, members }))
        .collect()
}

/// `1 + max_x #{members y ≠ x : d(x,y) < sep}`, the greedy color bound.
pub fn max_conflict_degree(cloud: &dyn MetricSpace, net: &Net, sep: f64) -> usize {
    net.members
        .par_iter()
        .map(|&a| net.members.iter().filter(|&&b| b != a && cloud.dist(a, b) < sep).count())
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingProfile {
    /// Smallest `K` with `|N_δ ∩ B_{2^m δ}(x)| ≤ K^{m+1}` at all sampled centers.
    pub k_estimate: f64,
    pub n_h: Option<usize>,
    pub centers: usize,
    pub max_m: u32,
}

pub fn estimate_doubling(
    cloud: &dyn MetricSpace,
    net: &Net,
    centers: usize,
    max_m: u32,
    n_h: Option<usize>,
    seed: u64,
) -> DoublingProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = if centers >= cloud.len() {
        (0..cloud.len()).collect()
    } else {
        (0..centers).map(|_| rng.random_range(0..cloud.len())).collect()
    };
    let k = picks
        .par_iter()
        .map(|&x| {
            let mut k: f64 = 1.0;
            for m in 0..=max_m {
                let r = net.delta * 2f64.powi(m as i32);
                let c = net.members.iter().filter(|&&q| cloud.dist(x, q) < r).count().max(1);
                k = k.max((c as f64).powf(1.0 / (m + 1) as f64));
            }
            k
        })
        .reduce(|| 1.0, f64::max);
    DoublingProfile { k_estimate: k, n_h, centers: picks.len(), max_m }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> EuclideanCloud {
        EuclideanCloud { points: (0..n).map(|i| vec![i as f64]).collect() }
    }

    #[test]
    fn single_point_net() {
        let c = line(1);
        assert_eq!(greedy_maximal_net(&c, 5.0).unwrap().members, vec![0]);
        assert!(matches!(greedy_maximal_net(&line(0), 1.0), Err(Error::EmptyCloud)));
    }

    #[test]
    fn integer_line_is_its_own_net() {
        let c = line(10);
        let net = greedy_maximal_net(&c, 1.0).unwrap();
        assert_eq!(net.members, (0..10).collect::<Vec<_>>());
        assert!(verify_net(&c, &net).is_valid());
    }

    #[test]
    fn duplicate_member_breaks_separation() {
        let mut pts = line(5).points;
        pts.push(vec![2.0]);
        let c = EuclideanCloud { points: pts };
        let net = Net { delta: 1.0, members: vec![0, 1, 2, 3, 4, 5] };
        let rep = verify_net(&c, &net);
        assert_eq!(rep.separation_violations, vec![(2, 5, 0.0)]);
    }

    #[test]
    fn line_coloring_uses_three_classes() {
        let c = line(10);
        let net = greedy_maximal_net(&c, 1.0).unwrap();
        let col = color_net(&c, &net, 3.0);
        assert_eq!(col.num_colors, 3);
        assert_eq!(col.classes(), vec![vec![0, 3, 6, 9], vec![1, 4, 7], vec![2, 5, 8]]);
        assert!(verify_coloring(&c, &col).iter().all(|r| r.is_valid()));
        let single = color_net(&line(1), &greedy_maximal_net(&line(1), 1.0).unwrap(), 3.0);
        assert_eq!(single.num_colors, 1);
    }

    #[test]
    fn torus_distance_wraps() {
        let t = FlatTorus { points: vec![vec![0.05, 0.5], vec![0.95, 0.5]], period: 1.0 };
        assert!((t.dist(0, 1) - 0.1).abs() < 1e-12);
    }
}
