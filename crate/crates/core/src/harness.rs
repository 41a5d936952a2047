//! Discrete balls, distortion measurement, ε-sweeps and run reports.

use crate::algebra::StratifiedAlgebra;
use crate::error::{Error, Result};
use crate::nets::MetricSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::Instant;

/// Default cap on the number of generated lattice points.
pub const BALL_BUDGET: usize = 2_000_000;

/// Expected size `2R⁴/3` of the lattice ball in the Heisenberg group.
pub fn heisenberg_ball_estimate(r: f64) -> usize {
    (2.0 * r.powi(4) / 3.0).ceil() as usize
}

/// Lattice points of the Heisenberg group with quasinorm below `r`.
///
/// Breadth-first search from the identity by right multiplication with
/// `exp(±X1)`, `exp(±X2)`, `exp(±X3)`, keeping nodes with quasinorm below
/// `1.4 r`, then filtering. Output is sorted lexicographically.
pub fn generate_heisenberg_ball(alg: &StratifiedAlgebra, r: f64, budget: usize) -> Result<Vec<Vec<f64>>> {
    if alg.strata_dims() != [2, 1] {
        return Err(Error::InvalidConfig(format!("expected the Heisenberg algebra, got strata {:?}", alg.strata_dims())));
    }
    if !(r >= 2.0) {
        return Err(Error::InvalidConfig(format!("ball radius must be at least 2, got {r}")));
    }
    let estimated = heisenberg_ball_estimate(1.4 * r);
    if estimated > budget {
        return Err(Error::TooLarge { estimated, budget });
    }
    // coordinates (x1, x2, 2·x3) are integers on the lattice
    let key = |p: &[f64]| -> (i64, i64, i64) { (p[0].round() as i64, p[1].round() as i64, (2.0 * p[2]).round() as i64) };
    let gens: [[f64; 3]; 6] = [[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]];
    let limit = 1.4 * r;
    let mut seen: BTreeSet<(i64, i64, i64)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert((0, 0, 0));
    queue.push_back(vec![0.0; 3]);
    let mut out = Vec::new();
    while let Some(p) = queue.pop_front() {
        if alg.quasinorm(&p) < r {
            out.push(p.clone());
        }
        for g in &gens {
            let q = alg.mul_f64(&p, g);
            if alg.quasinorm(&q) < limit && seen.insert(key(&q)) {
                queue.push_back(q);
            }
        }
    }
    out.sort_by_key(|p| key(p));
    Ok(out)
}

/// Independent enumeration of `{(a, b, c) : a, b ∈ Z, c ∈ ab/2 + Z, N < r}`.
pub fn heisenberg_lattice_direct(alg: &StratifiedAlgebra, r: f64) -> Vec<Vec<f64>> {
    let m = r.ceil() as i64;
    let mut out = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            for c2 in -(2 * m * m)..=(2 * m * m) {
                if (c2 - a * b).rem_euclid(2) != 0 {
                    continue;
                }
                let p = vec![a as f64, b as f64, c2 as f64 / 2.0];
                if alg.quasinorm(&p) < r {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Smallest pairwise distance in a cloud.
pub fn min_separation(cloud: &dyn MetricSpace) -> f64 {
    let n = cloud.len();
    (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| cloud.dist(i, j)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub i: usize,
    pub j: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionReport {
    /// `max ratio / min ratio`; infinite when a pair collapses.
    pub distortion: f64,
    pub expansion: PairRatio,
    pub contraction: PairRatio,
    pub exponent: f64,
    pub pairs: usize,
    pub exhaustive: bool,
    #[serde(skip)]
    pub runtime: std::time::Duration,
}

fn ratio(cloud: &dyn MetricSpace, values: &[Vec<f64>], exponent: f64, i: usize, j: usize) -> f64 {
    let num: f64 = values[i].iter().zip(&values[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    num / cloud.dist(i, j).powf(exponent)
}

fn better(a: PairRatio, b: PairRatio, larger: bool) -> PairRatio {
    let wins = if larger { b.ratio > a.ratio } else { b.ratio < a.ratio };
    if wins || (b.ratio == a.ratio && (b.i, b.j) < (a.i, a.j)) {
        b
    } else {
        a
    }
}

/// Improves an extreme pair by scanning all replacements of either endpoint.
fn refine(cloud: &dyn MetricSpace, values: &[Vec<f64>], exponent: f64, mut best: PairRatio, larger: bool) -> (PairRatio, usize) {
    let n = cloud.len();
    let mut evaluated = 0;
    loop {
        let start = best.clone();
        for anchor in [start.i, start.j] {
            let cand = (0..n)
                .into_par_iter()
                .filter(|&k| k != anchor && cloud.dist(anchor, k) > 0.0)
                .map(|k| {
                    let (i, j) = if anchor < k { (anchor, k) } else { (k, anchor) };
                    PairRatio { i, j, ratio: ratio(cloud, values, exponent, i, j) }
                })
                .reduce_with(|a, b| better(a, b, larger));
            evaluated += n;
            if let Some(c) = cand {
                best = better(best, c, larger);
            }
        }
        if best == start {
            return (best, evaluated);
        }
    }
}

/// Distortion of `p ↦ values[p]` against the snowflake `d^{exponent}`.
///
/// Exhaustive over pairs up to 3000 points; otherwise 10⁶ seeded pairs with
/// both extremes refined by endpoint replacement.
pub fn distortion(cloud: &dyn MetricSpace, values: &[Vec<f64>], exponent: f64, seed: u64) -> Result<DistortionReport> {
    let start = Instant::now();
    let n = cloud.len();
    if n < 2 {
        return Err(Error::DegenerateCloud("distortion needs at least two points".into()));
    }
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: values.len() });
    }
    let fold = |acc: (Option<PairRatio>, Option<PairRatio>), pr: PairRatio| {
        (
            Some(match acc.0 {
                Some(a) => better(a, pr.clone(), true),
                None => pr.clone(),
            }),
            Some(match acc.1 {
                Some(a) => better(a, pr, false),
                None => pr,
            }),
        )
    };
    let merge = |a: (Option<PairRatio>, Option<PairRatio>), b: (Option<PairRatio>, Option<PairRatio>)| {
        let pick = |x: Option<PairRatio>, y: Option<PairRatio>, larger| match (x, y) {
            (Some(x), Some(y)) => Some(better(x, y, larger)),
            (x, None) => x,
            (None, y) => y,
        };
        (pick(a.0, b.0, true), pick(a.1, b.1, false))
    };
    let exhaustive = n <= 3000;
    let (hi, lo, pairs) = if exhaustive {
        let r = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .filter(|&j| cloud.dist(i, j) > 0.0)
                    .map(|j| PairRatio { i, j, ratio: ratio(cloud, values, exponent, i, j) })
                    .fold((None, None), fold)
            })
            .reduce(|| (None, None), merge);
        (r.0, r.1, n * (n - 1) / 2)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picks: Vec<(usize, usize)> = (0..1_000_000)
            .map(|_| {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                (i.min(j), i.max(j))
            })
            .filter(|(i, j)| i != j)
            .collect();
        let r = picks
            .par_iter()
            .filter(|&&(i, j)| cloud.dist(i, j) > 0.0)
            .map(|&(i, j)| PairRatio { i, j, ratio: ratio(cloud, values, exponent, i, j) })
            .fold(|| (None, None), fold)
            .reduce(|| (None, None), merge);
        let (hi, e1) = refine(cloud, values, exponent, r.0.ok_or(Error::DegenerateCloud("all pairs coincide".into()))?, true);
        let (lo, e2) = refine(cloud, values, exponent, r.1.unwrap(), false);
        (Some(hi), Some(lo), picks.len() + e1 + e2)
    };
    let (hi, lo) = match (hi, lo) {
        (Some(h), Some(l)) => (h, l),
        _ => return Err(Error::DegenerateCloud("all pairs coincide".into())),
    };
    let d = if lo.ratio == 0.0 { f64::INFINITY } else { hi.ratio / lo.ratio };
    Ok(DistortionReport { distortion: d, expansion: hi, contraction: lo, exponent, pairs, exhaustive, runtime: start.elapsed() })
}

/// Recomputes a witness ratio.
pub fn witness_ratio(cloud: &dyn MetricSpace, values: &[Vec<f64>], exponent: f64, w: &PairRatio) -> f64 {
    ratio(cloud, values, exponent, w.i, w.j)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub distortion: Option<f64>,
    pub holder_upper: Option<f64>,
    pub holder_lower: Option<f64>,
    pub error: Option<String>,
}

/// Builds an embedding of the cloud for each `ε` and measures its distortion
/// against `d^{1−ε}`.
pub fn sweep_epsilon(
    cloud: &dyn MetricSpace,
    epsilons: &[f64],
    seed: u64,
    builder: &dyn Fn(f64) -> Result<Vec<Vec<f64>>>,
) -> Result<Vec<SweepRow>> {
    if epsilons.len() < 3 {
        return Err(Error::InvalidConfig("a sweep needs at least three values of epsilon".into()));
    }
    Ok(epsilons
        .iter()
        .map(|&eps| match builder(eps).and_then(|v| distortion(cloud, &v, 1.0 - eps, seed)) {
            Ok(r) if r.distortion.is_finite() => SweepRow {
                epsilon: eps,
                distortion: Some(r.distortion),
                holder_upper: Some(r.expansion.ratio),
                holder_lower: Some(r.contraction.ratio),
                error: None,
            },
            Ok(r) => SweepRow {
                epsilon: eps,
                distortion: None,
                holder_upper: Some(r.expansion.ratio),
                holder_lower: Some(0.0),
                error: Some(format!("pair ({}, {}) collapses", r.contraction.i, r.contraction.j)),
            },
            Err(e) => SweepRow { epsilon: eps, distortion: None, holder_upper: None, holder_lower: None, error: Some(e.to_string()) },
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub used: usize,
    pub dropped: usize,
}

/// Least-squares slope of `log y` against `log x` over rows with finite
/// positive values.
pub fn fit_loglog(points: &[(f64, Option<f64>)]) -> Result<SlopeFit> {
    let good: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(x, y)| y.filter(|y| *y > 0.0 && y.is_finite() && x > 0.0).map(|y| (x.ln(), y.ln())))
        .collect();
    let used = good.len();
    if used < 2 {
        return Err(Error::InvalidConfig(format!("slope fit needs two usable rows, got {used}")));
    }
    let n = used as f64;
    let mx = good.iter().map(|p| p.0).sum::<f64>() / n;
    let my = good.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = good.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("slope fit needs distinct abscissae".into()));
    }
    let slope = good.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let stderr = if used > 2 {
        let rss: f64 = good.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit { slope, stderr, intercept, used, dropped: points.len() - used })
}

/// Slope of `log(distortion)` against `log(1/ε)`.
pub fn fit_loglog_slope(rows: &[SweepRow]) -> Result<SlopeFit> {
    fit_loglog(&rows.iter().map(|r| (1.0 / r.epsilon, r.distortion)).collect::<Vec<_>>())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epsilon", "distortion", "holder_upper", "holder_lower", "error"])?;
    let f = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([format!("{:e}", r.epsilon), f(r.distortion), f(r.holder_upper), f(r.holder_lower), r.error.clone().unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points_csv(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = points.first().map_or(0, |p| p.len());
    let mut header = vec!["point".to_string()];
    header.extend((0..dim).map(|c| format!("x{c}")));
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(p.iter().map(|x| format!("{x:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a cloud written by [`write_points_csv`] (or any CSV whose first column is an index).
pub fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display()))))
            .collect::<Result<_>>()?;
        out.push(row);
    }
    Ok(out)
}

/// Artifact files a run directory may contain.
pub const ARTIFACTS: [&str; 8] = [
    "validate.json",
    "net.json",
    "color.json",
    "extend_frame.json",
    "oscillator.json",
    "embed.json",
    "distortion.json",
    "sweep.json",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
    /// The artifact's own `pass` field, when it has one.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub artifacts: Vec<ArtifactEntry>,
    pub configs: BTreeMap<String, Value>,
    pub all_pass: bool,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let mut s = String::from("carnot run report\n");
        for a in &self.artifacts {
            let verdict = match a.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "----",
            };
            s.push_str(&format!("  {verdict}  {:<20} {}\n", a.name, &a.sha256[..16]));
        }
        s.push_str(&format!("overall: {}\n", if self.all_pass { "PASS" } else { "FAIL" }));
        s
    }
}

/// Collects the artifacts of a run directory into one report. Pure function
/// of the files' contents.
pub fn report(dir: &Path) -> Result<RunReport> {
    let mut artifacts = Vec::new();
    let mut configs = BTreeMap::new();
    for name in ARTIFACTS {
        let path = dir.join(name);
        if !path.is_file() {
            continue;
        }
        let bytes = std::fs::read(&path)?;
        let value: Value = serde_json::from_slice(&bytes)?;
        let pass = value.get("pass").and_then(Value::as_bool);
        if let Some(c) = value.get("config") {
            configs.insert(name.trim_end_matches(".json").to_string(), c.clone());
        }
        artifacts.push(ArtifactEntry { name: name.to_string(), sha256: hex::encode(Sha256::digest(&bytes)), pass });
    }
    if artifacts.is_empty() {
        return Err(Error::MissingArtifacts(ARTIFACTS.iter().map(|s| s.to_string()).collect()));
    }
    let all_pass = artifacts.iter().all(|a| a.pass != Some(false));
    Ok(RunReport { artifacts, configs, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::EuclideanCloud;

    #[test]
    fn small_ball_contents() {
        let alg = StratifiedAlgebra::h3();
        let b = generate_heisenberg_ball(&alg, 2.0, BALL_BUDGET).unwrap();
        for p in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] {
            assert!(b.iter().any(|q| q.as_slice() == p), "{p:?}");
        }
        let mut direct = heisenberg_lattice_direct(&alg, 2.0);
        let mut bfs = b.clone();
        let k = |p: &Vec<f64>| (p[0] as i64, p[1] as i64, (2.0 * p[2]) as i64);
        direct.sort_by_key(k);
        bfs.sort_by_key(k);
        assert_eq!(bfs, direct);
        assert!(matches!(generate_heisenberg_ball(&alg, 100.0, 1000), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn distortion_examples() {
        let c = EuclideanCloud { points: vec![vec![0.0], vec![1.0]] };
        let r = distortion(&c, &[vec![0.0], vec![1.0]], 1.0, 0).unwrap();
        assert_eq!(r.distortion, 1.0);
        let c3 = EuclideanCloud { points: vec![vec![0.0], vec![1.0], vec![3.0]] };
        let r = distortion(&c3, &[vec![0.0], vec![5.0], vec![15.0]], 1.0, 0).unwrap();
        assert!((r.distortion - 1.0).abs() < 1e-15);
        let r = distortion(&c3, &[vec![0.0], vec![0.0], vec![1.0]], 1.0, 0).unwrap();
        assert!(r.distortion.is_infinite());
        assert_eq!((r.contraction.i, r.contraction.j), (0, 1));
    }

    #[test]
    fn slope_recovers_power_laws() {
        let eps = [0.25, 0.125, 0.0625, 0.03125];
        for (law, want) in [(0.5, 0.5), (1.0, 1.0)] {
            let rows: Vec<SweepRow> = eps
                .iter()
                .map(|&e| SweepRow { epsilon: e, distortion: Some(3.0 * e.powf(-law)), holder_upper: None, holder_lower: None, error: None })
                .collect();
            let fit = fit_loglog_slope(&rows).unwrap();
            assert!((fit.slope - want).abs() < 1e-12 && fit.stderr < 1e-12);
        }
    }

    #[test]
    fn empty_run_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(report(dir.path()), Err(Error::MissingArtifacts(v)) if v.len() == ARTIFACTS.len()));
    }
}
