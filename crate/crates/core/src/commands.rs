//! Subcommand implementations behind the `carnot` binary.
//!
//! Each command writes one JSON artifact (plus optional CSV) into the output
//! directory and returns the artifact. Artifacts carry no timings, so reruns
//! with the same seed are byte-identical.

use crate::algebra::{ScalarMode, StratifiedAlgebra};
use crate::embed::{
    assemble_weierstrass, assouad_baseline, holder_diagnostics, trig_features, AssouadConfig, EmbeddingConfig,
    EmbeddingMap, LacunaryFamily, Layout,
};
use crate::error::{Error, Result};
use crate::frame::{extend_frame_repeated, ExtensionConfig, ExtensionDiagnostics, FrameField};
use crate::harness::{
    distortion, fit_loglog_slope, generate_heisenberg_ball, report as collect_report, sweep_epsilon, write_points_csv,
    write_sweep_csv, DistortionReport, SlopeFit, SweepRow, BALL_BUDGET,
};
use crate::nets::{
    color_net, greedy_maximal_net, max_conflict_degree, verify_coloring, verify_net, volumetric_audit, CarnotCloud,
    FlatTorus, MetricSpace,
};
use crate::oscillator::{paste_oscillator, Cutoff, WordJet};
use crate::scalar::{rat, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Options shared by all subcommands.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Common {
    pub seed: u64,
    pub scalar: ScalarMode,
    pub tol: f64,
    pub out: PathBuf,
}

impl Default for Common {
    fn default() -> Self {
        Common { seed: 0, scalar: ScalarMode::ExactRational, tol: 1e-9, out: PathBuf::from("out") }
    }
}

fn write_artifact(common: &Common, name: &str, value: &Value) -> Result<PathBuf> {
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

/// Looks up a bundled algebra by name or reads a JSON spec file.
pub fn load_algebra(name_or_path: &str) -> Result<StratifiedAlgebra> {
    if let Some(a) = StratifiedAlgebra::bundled(name_or_path) {
        return Ok(a);
    }
    let text = std::fs::read_to_string(name_or_path)?;
    StratifiedAlgebra::from_json(&text)
}

/// Random points with quasinorm below `radius`, by rejection from the box
/// `|x_{r,i}| < radius^r`.
pub fn sample_quasiball(alg: &StratifiedAlgebra, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let p: Vec<f64> = alg.weights().iter().map(|&w| rng.random_range(-1.0..1.0) * radius.powi(w as i32)).collect();
        if alg.quasinorm(&p) < radius {
            pts.push(p);
        }
    }
    pts
}

/// Rational points with coordinates `a/q`, `|a| ≤ q`, seeded.
pub fn sample_rational_points(alg: &StratifiedAlgebra, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..alg.dim())
                .map(|_| {
                    let q = rng.random_range(1..=9i64);
                    rat(rng.random_range(-q..=q), q)
                })
                .collect()
        })
        .collect()
}

/// The Heisenberg lattice ball for `h3`, otherwise a seeded quasiball sample.
pub fn group_cloud(alg: Arc<StratifiedAlgebra>, radius: f64, points: usize, seed: u64) -> Result<CarnotCloud> {
    let pts = if alg.strata_dims() == [2, 1] {
        generate_heisenberg_ball(&alg, radius, BALL_BUDGET)?
    } else {
        sample_quasiball(&alg, radius, points, seed)
    };
    Ok(CarnotCloud::new(alg, pts))
}

pub fn validate(common: &Common, spec: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(spec)?;
    let alg = StratifiedAlgebra::from_json(&text)?.with_mode(common.scalar);
    let report = alg.validate();
    let value = json!({
        "config": { "spec": spec.display().to_string(), "scalar": common.scalar },
        "report": report,
        "pass": report.is_valid(),
    });
    write_artifact(common, "validate.json", &value)?;
    Ok(value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetOptions {
    pub group: String,
    pub radius: f64,
    pub delta: f64,
    /// Sample size for groups other than the Heisenberg group.
    pub points: usize,
}

pub fn net(common: &Common, opts: &NetOptions) -> Result<Value> {
    let alg = Arc::new(load_algebra(&opts.group)?);
    let cloud = group_cloud(alg.clone(), opts.radius, opts.points, common.seed)?;
    let net = greedy_maximal_net(&cloud, opts.delta)?;
    let check = verify_net(&cloud, &net);
    let n_h = alg.homogeneous_dim();
    let radii: Vec<f64> = (0..4).map(|k| opts.delta * 2f64.powi(k)).collect();
    let (audited, failures) = volumetric_audit(&cloud, &net, &radii, n_h);
    let value = json!({
        "config": opts,
        "cloud_size": cloud.len(),
        "net_size": net.len(),
        "members": net.members,
        "separation_violations": check.separation_violations.len(),
        "covering_violations": check.covering_violations.len(),
        "volumetric_checks": audited,
        "volumetric_failures": failures,
        "pass": check.is_valid() && failures.is_empty(),
    });
    write_artifact(common, "net.json", &value)?;
    Ok(value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColorOptions {
    pub net: NetOptions,
    /// Coarse separation as a multiple of `δ`.
    pub factor: f64,
}

pub fn color(common: &Common, opts: &ColorOptions) -> Result<Value> {
    let alg = Arc::new(load_algebra(&opts.net.group)?);
    let cloud = group_cloud(alg.clone(), opts.net.radius, opts.net.points, common.seed)?;
    let net = greedy_maximal_net(&cloud, opts.net.delta)?;
    let sep = opts.factor * opts.net.delta;
    let coloring = color_net(&cloud, &net, sep);
    let bad: usize = verify_coloring(&cloud, &coloring).iter().map(|r| r.separation_violations.len()).sum();
    let bound = 7f64.powi(alg.homogeneous_dim() as i32);
    let value = json!({
        "config": opts,
        "net_size": net.len(),
        "colors": coloring.num_colors,
        "color_bound": bound,
        "max_conflict_degree": max_conflict_degree(&cloud, &net, sep),
        "class_sizes": coloring.classes().iter().map(|c| c.len()).collect::<Vec<_>>(),
        "separation_violations": bad,
        "pass": bad == 0 && (coloring.num_colors as f64) <= bound,
    });
    write_artifact(common, "color.json", &value)?;
    Ok(value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameOptions {
    pub points: usize,
    pub torus_dim: usize,
    pub k: f64,
    pub dim: usize,
    pub count: usize,
    pub write_frame: bool,
}

/// Extends the constant frame `e_1` on a seeded flat-torus cloud.
pub fn extend_frame_cmd(common: &Common, opts: &FrameOptions) -> Result<(Value, FrameField)> {
    let cloud = FlatTorus::random(opts.points, opts.torus_dim, 1.0, common.seed);
    let mut e1 = vec![0.0; opts.dim];
    e1[0] = 1.0;
    let frame = FrameField::constant(cloud.len(), &[e1]);
    let mut cfg = ExtensionConfig::new(opts.k, 1, opts.dim, common.seed);
    cfg.strict = false;
    let (out, diags): (FrameField, Vec<ExtensionDiagnostics>) = extend_frame_repeated(&cloud, &frame, opts.count, &cfg)?;
    let defect = out.orthonormality_defect(cloud.len());
    if opts.write_frame {
        std::fs::create_dir_all(&common.out)?;
        out.write_csv(&common.out.join("frame.csv"), cloud.len())?;
    }
    let value = json!({
        "config": opts,
        "seed": common.seed,
        "steps": diags,
        "orthonormality_defect": defect,
        "pass": diags.iter().all(|d| d.passed()) && defect <= common.tol,
    });
    write_artifact(common, "extend_frame.json", &value)?;
    Ok((value, out))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OscillatorOptions {
    pub group: String,
    pub radius: f64,
    pub samples: usize,
    pub exact_points: usize,
    pub h: f64,
    pub threshold: f64,
}

pub fn oscillator(common: &Common, opts: &OscillatorOptions) -> Result<Value> {
    let alg = Arc::new(load_algebra(&opts.group)?);
    let jet = WordJet::veronese(&alg);
    let (exact_ok, exact_min) = match common.scalar {
        ScalarMode::ExactRational => {
            let pts = sample_rational_points(&alg, opts.exact_points, common.seed);
            let one = crate::scalar::int(1);
            let ok = pts.par_iter().all(|p| jet.wedge_squared_exact(p) == one);
            (ok, 1.0)
        }
        ScalarMode::Floating => {
            let pts = sample_quasiball(&alg, 1.0, opts.exact_points, common.seed);
            let m = pts.par_iter().map(|p| jet.wedge(p)).reduce(|| f64::INFINITY, f64::min);
            ((m - 1.0).abs() <= common.tol.max(1e-9), m)
        }
    };
    let domain = sample_quasiball(&alg, opts.radius, opts.samples.max(1) * 4, common.seed);
    let cloud = CarnotCloud::new(alg.clone(), domain);
    let net = greedy_maximal_net(&cloud, 1.0)?;
    let coloring = color_net(&cloud, &net, 3.0);
    let osc = paste_oscillator(&cloud, Cutoff::default(), &coloring)?;
    let sample: Vec<Vec<f64>> = cloud.points.iter().take(opts.samples).cloned().collect();
    let wedges: Vec<f64> = sample.par_iter().map(|p| osc.wedge(p, opts.h)).collect();
    let pasted_min = wedges.iter().copied().fold(f64::INFINITY, f64::min);
    let overlap = sample.par_iter().map(|p| osc.active_pieces(p).into_iter().max().unwrap_or(0)).max().unwrap_or(0);
    let value = json!({
        "config": opts,
        "scalar": common.scalar,
        "words": jet.words.len(),
        "exact_points": opts.exact_points,
        "exact_wedge_is_one": exact_ok,
        "exact_wedge_min": exact_min,
        "net_size": net.len(),
        "colors": coloring.num_colors,
        "components": osc.num_components(),
        "pasted_wedge_min": pasted_min,
        "max_same_color_pieces": overlap,
        "pass": exact_ok && pasted_min >= opts.threshold,
    });
    write_artifact(common, "oscillator.json", &value)?;
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builder {
    Assouad,
    Weierstrass,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedOptions {
    pub builder: Builder,
    pub radius: f64,
    pub epsilon: f64,
    /// `A = 2^a`.
    pub a: u32,
    pub layout: Layout,
    /// Scale range of the Weierstrass family.
    pub m1: i32,
    pub m2: i32,
}

/// Builds the requested embedding on the discrete Heisenberg ball.
pub fn build_embedding(cloud: &CarnotCloud, opts: &EmbedOptions) -> Result<EmbeddingMap> {
    let alg = cloud.alg.clone();
    match opts.builder {
        Builder::Assouad => {
            let cfg = AssouadConfig { epsilon: opts.epsilon, base: 2f64.powi(opts.a as i32), tail: None, layout: opts.layout };
            Ok(assouad_baseline(cloud, &cfg)?.0)
        }
        Builder::Weierstrass => {
            let cfg = EmbeddingConfig::new(&alg, opts.a, opts.epsilon, opts.m1, opts.m2);
            let coords: Vec<usize> = (0..alg.dim()).collect();
            let d = 2 * coords.len();
            let fam = LacunaryFamily::rescaled(alg.clone(), trig_features(coords), d, cfg.base(), opts.m1..=opts.m2, opts.layout, "trig");
            assemble_weierstrass(&alg, &fam, &cfg)
        }
    }
}

fn heisenberg_cloud(radius: f64) -> Result<CarnotCloud> {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let pts = generate_heisenberg_ball(&alg, radius, BALL_BUDGET)?;
    Ok(CarnotCloud::new(alg, pts))
}

pub fn embed(common: &Common, opts: &EmbedOptions) -> Result<Value> {
    let cloud = heisenberg_cloud(opts.radius)?;
    let map = build_embedding(&cloud, opts)?;
    let cfg = EmbeddingConfig::new(&cloud.alg, opts.a, opts.epsilon, opts.m1, opts.m2);
    let sample: Vec<Vec<f64>> = cloud.points.iter().step_by((cloud.len() / 400).max(1)).cloned().collect();
    let holder = holder_diagnostics(&cloud.alg, &map, &sample, &cfg);
    std::fs::create_dir_all(&common.out)?;
    map.write_csv(&common.out.join("embedding.csv"), &cloud.points)?;
    write_points_csv(&common.out.join("cloud.csv"), &cloud.points)?;
    let value = json!({
        "config": opts,
        "points": cloud.len(),
        "dim": map.dim,
        "provenance_hash": map.hash,
        "holder": holder,
        "pass": holder.measured.is_finite(),
    });
    write_artifact(common, "embed.json", &value)?;
    Ok(value)
}

pub fn distortion_cmd(common: &Common, opts: &EmbedOptions) -> Result<(Value, DistortionReport)> {
    let cloud = heisenberg_cloud(opts.radius)?;
    let map = build_embedding(&cloud, opts)?;
    let vals = map.eval_all(&cloud.points);
    let rep = distortion(&cloud, &vals, 1.0 - opts.epsilon, common.seed)?;
    let value = json!({
        "config": opts,
        "points": cloud.len(),
        "provenance_hash": map.hash,
        "report": rep,
        "pass": rep.distortion.is_finite(),
    });
    write_artifact(common, "distortion.json", &value)?;
    Ok((value, rep))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    pub embed: EmbedOptions,
    pub epsilons: Vec<f64>,
    /// Accepted slope window for `log distortion` against `log 1/ε`.
    pub window: (f64, f64),
}

pub fn sweep(common: &Common, opts: &SweepOptions) -> Result<(Value, Vec<SweepRow>, Option<SlopeFit>)> {
    if opts.epsilons.iter().any(|&e| !(e > 0.0 && e <= 0.25)) {
        return Err(Error::InvalidConfig("sweep presets restrict epsilon to (0, 1/4]".into()));
    }
    let cloud = heisenberg_cloud(opts.embed.radius)?;
    let rows = sweep_epsilon(&cloud, &opts.epsilons, common.seed, &|eps| {
        let mut o = opts.embed.clone();
        o.epsilon = eps;
        Ok(build_embedding(&cloud, &o)?.eval_all(&cloud.points))
    })?;
    let fit = fit_loglog_slope(&rows).ok();
    std::fs::create_dir_all(&common.out)?;
    write_sweep_csv(&common.out.join("sweep.csv"), &rows)?;
    let pass = fit.as_ref().is_some_and(|f| f.slope >= opts.window.0 && f.slope <= opts.window.1);
    let value = json!({ "config": opts, "rows": rows, "fit": fit, "pass": pass });
    write_artifact(common, "sweep.json", &value)?;
    Ok((value, rows, fit))
}

pub fn report(common: &Common) -> Result<(Value, String)> {
    let rep = collect_report(&common.out)?;
    let value = serde_json::to_value(&rep)?;
    std::fs::write(common.out.join("report.json"), serde_json::to_string_pretty(&value)? + "\n")?;
    Ok((value, rep.summary()))
}

/// Default metric cloud summary used by several commands.
pub fn cloud_summary(cloud: &dyn MetricSpace) -> Value {
    json!({ "points": cloud.len(), "quasi": cloud.is_quasi() })
}
