//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fail.

use carnot::commands::{self, Builder, ColorOptions, Common, EmbedOptions, FrameOptions, NetOptions, OscillatorOptions, SweepOptions};
use carnot::embed::{
    assemble_weierstrass, bilinear_form_b, build_isometry_field, concatenate_scales, explicit_solve, holder_diagnostics,
    perpendicularity_residual, t_matrix, trig_features, EmbeddingConfig, FdJet, Grid, IsometryConfig, Jet, LacunaryFamily,
    Layout, PolyJet,
};
use carnot::fields::{fd_word_derivative, left_invariant_fields};
use carnot::frame::{extend_frame, ExtensionConfig, FrameField};
use carnot::harness::{fit_loglog, generate_heisenberg_ball, BALL_BUDGET};
use carnot::multilinear::pseudoinverse;
use carnot::nets::{color_net, greedy_maximal_net, verify_coloring, volumetric_audit, CarnotCloud, FlatTorus};
use carnot::oscillator::{paste_oscillator, veronese_map, Cutoff, WordJet};
use carnot::scalar::{int, rat, Rational};
use carnot::{GroupPoint, StratifiedAlgebra};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;
use std::time::{Duration, Instant};

// Pinned tolerances.
const C1_TRIPLES: usize = 10_000;
const C1_BUDGET: Duration = Duration::from_secs(30);
const C2_MIN_ORDER: f64 = 1.9;
const C3_PASTED_MIN: f64 = 0.9;
const C4_BUDGET: Duration = Duration::from_secs(300);
const C5_PINV_TOL: f64 = 1e-10;
const C5_MIN_RATIO: f64 = 1.8;
const C6_PERP_TOL: f64 = 1e-7;
const C7_ORTHO: (f64, f64) = (-0.65, -0.35);
const C7_SHARED_MAX: f64 = -0.8;
const C7_BUDGET: Duration = Duration::from_secs(600);
const C8_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let q = rng.random_range(1..=7i64);
    rat(rng.random_range(-3 * q..=3 * q), q)
}

fn rational_point(alg: &StratifiedAlgebra, rng: &mut ChaCha8Rng) -> GroupPoint<Rational> {
    alg.point((0..alg.dim()).map(|_| random_rational(rng)).collect()).unwrap()
}

fn quasiball(alg: &StratifiedAlgebra, r: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    commands::sample_quasiball(alg, r, n, seed)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::h5(), StratifiedAlgebra::engel()] {
        let bad: usize = (0..C1_TRIPLES)
            .into_par_iter()
            .filter(|&t| {
                let mut rng = ChaCha8Rng::seed_from_u64(t as u64);
                let (p, q, r) = (rational_point(&alg, &mut rng), rational_point(&alg, &mut rng), rational_point(&alg, &mut rng));
                let lam = rat(rng.random_range(1..=9), rng.random_range(1..=9));
                let pq = alg.bch_product(&p, &q).unwrap();
                let assoc = alg.bch_product(&pq, &r).unwrap() == alg.bch_product(&p, &alg.bch_product(&q, &r).unwrap()).unwrap();
                let hom = alg.dilate(&lam, &pq).unwrap()
                    == alg.bch_product(&alg.dilate(&lam, &p).unwrap(), &alg.dilate(&lam, &q).unwrap()).unwrap();
                let scaled = alg.dilate(&lam, &p).unwrap();
                let homog = alg.quasinorm_exact(scaled.as_slice()) == alg.quasinorm_exact(p.as_slice()).scaled(&lam);
                !(assoc && hom && homog)
            })
            .count();
        if bad > 0 {
            failures.push(format!("{}: {bad}", alg.name()));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < C1_BUDGET,
        format!("3 algebras x {C1_TRIPLES} triples, failures {failures:?}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = f64::INFINITY;
    for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::engel()] {
        let n = alg.dim();
        let fields = left_invariant_fields(&alg);
        let orders: Vec<f64> = (0..50u64)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let b: f64 = rng.random_range(0.0..6.0);
                let f = |x: &[f64]| vec![(a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + b).sin()];
                let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let phase = a.iter().zip(&p).map(|(a, x)| a * x).sum::<f64>() + b;
                let (mut e1, mut e2) = (0.0f64, 0.0f64);
                for (c, field) in fields.iter().enumerate() {
                    let exact: f64 = field.at(&p).iter().zip(&a).map(|(v, a)| v * a).sum::<f64>() * phase.cos();
                    e1 = e1.max((fd_word_derivative(&alg, &f, &p, &[c], 2e-2)[0] - exact).abs());
                    e2 = e2.max((fd_word_derivative(&alg, &f, &p, &[c], 1e-2)[0] - exact).abs());
                }
                (e1 / e2).log2()
            })
            .collect();
        worst = orders.into_iter().fold(worst, f64::min);
    }
    outcome(worst >= C2_MIN_ORDER, format!("100 functions, minimum observed order {worst:.3}"))
}

fn criterion_3() -> Outcome {
    let mut exact_ok = true;
    for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::engel()] {
        let jet = WordJet::veronese(&alg);
        let pts = commands::sample_rational_points(&alg, 100, 3);
        exact_ok &= pts.par_iter().all(|p| jet.wedge_squared_exact(p) == int(1));
    }
    let alg = Arc::new(StratifiedAlgebra::h3());
    let pts = quasiball(&alg, 4.0, 4000, 0);
    let cloud = CarnotCloud::new(alg.clone(), pts);
    let net = greedy_maximal_net(&cloud, 1.0).unwrap();
    let coloring = color_net(&cloud, &net, 3.0);
    let osc = paste_oscillator(&cloud, Cutoff::default(), &coloring).unwrap();
    let min = cloud.points[..1000].par_iter().map(|p| osc.wedge(p, 1e-2)).reduce(|| f64::INFINITY, f64::min);
    outcome(
        exact_ok && min >= C3_PASTED_MIN,
        format!("exact wedge == 1 at 200 rational points: {exact_ok}; pasted min over 1000 points {min:.3e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let mut e1 = vec![0.0; 2490];
    e1[0] = 1.0;
    for seed in 0..3 {
        let start = Instant::now();
        let cloud = FlatTorus::random(2000, 1, 1.0, seed);
        let frame = FrameField::constant(2000, &[e1.clone()]);
        let cfg = ExtensionConfig::new(2.0, 1, 2490, seed);
        match extend_frame(&cloud, &frame, &cfg) {
            Ok(ext) => {
                let d = &ext.diagnostics;
                let pass = d.gap_flag && d.passed() && d.lipschitz.exhaustive && start.elapsed() < C4_BUDGET;
                ok &= pass;
                lines.push(format!(
                    "seed {seed}: events left {}, |v|^2 in [{:.3}, {:.3}], perp {:.1e}, Lip {:.1} <= {}, {:.1}s",
                    d.violations_after,
                    d.norm_sq_min,
                    d.norm_sq_max,
                    d.max_perp_dot,
                    d.lipschitz.value,
                    d.lipschitz_bound,
                    start.elapsed().as_secs_f64()
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("seed {seed}: {e}"));
            }
        }
    }
    outcome(ok, lines.join("; "))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_pinv = 0.0f64;
    for _ in 0..100 {
        let rows = rng.random_range(2..8);
        let cols = rows + rng.random_range(0..6);
        let t = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        let r = (&t * pseudoinverse(&t).unwrap() - DMatrix::identity(rows, rows)).amax();
        worst_pinv = worst_pinv.max(r);
    }
    let alg = Arc::new(StratifiedAlgebra::h3());
    let psi = PolyJet::new(alg.clone(), veronese_map(&alg), 2);
    for p in quasiball(&alg, 1.0, 50, 5) {
        let t = t_matrix(&alg, &psi, &p);
        let r = (&t * pseudoinverse(&t).unwrap() - DMatrix::identity(t.nrows(), t.nrows())).amax();
        worst_pinv = worst_pinv.max(r);
    }
    let f = |p: &[f64]| {
        let off = 0.3 * p[0].sin();
        DMatrix::from_row_slice(2, 2, &[1.0 + 0.2 * p[1] * p[1], off, off, 1.0 + 0.1 * p[2]])
    };
    let grid = Grid::centered(&[0.5, 0.5, 0.25], &[5, 5, 5]);
    let mut errs = Vec::new();
    for h in [0.1, 0.05, 0.025, 0.0125] {
        let (a, ps) = (alg.clone(), psi.clone());
        let phi = FdJet::new(alg.clone(), psi.dim(), h, move |x| explicit_solve(&a, &ps, &f(x), x).unwrap().phi);
        let err = grid
            .points()
            .par_iter()
            .map(|p| (bilinear_form_b(&alg, &phi, &psi, p).unwrap() - f(p)).amax())
            .reduce(|| 0.0, f64::max);
        errs.push(err);
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        worst_pinv <= C5_PINV_TOL && min_ratio >= C5_MIN_RATIO,
        format!("max |T T+ - I| {worst_pinv:.1e}; FD error ratios {ratios:.3?}"),
    )
}

fn criterion_6() -> Outcome {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let psi = PolyJet::new(alg.clone(), veronese_map(&alg), 2);
    let cloud = CarnotCloud::new(alg.clone(), quasiball(&alg, 2.0, 200, 1));
    let cfg = IsometryConfig { d0: 3, dim: 200, m_scale: 1.0, a_scale: 1.0, k: 2.0, seed: 0 };
    match build_isometry_field(&alg, &psi, &cloud, &cfg) {
        Ok(u) => {
            let (r1, r2) = perpendicularity_residual(&alg, &psi, &cloud, &u);
            outcome(r1.max(r2) <= C6_PERP_TOL, format!("200 points, max |U.X_i psi| {r1:.1e}, max |U.X_iX_j psi| {r2:.1e}"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let alg = Arc::new(StratifiedAlgebra::h3());
    let pts = quasiball(&alg, 4.0, 300, 2);
    let epsilons: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
    let slope = |layout: Layout| {
        let fam = LacunaryFamily::rescaled(alg.clone(), trig_features(vec![0]), 2, 2.0, -10..=250, layout, "x1");
        let rows: Vec<(f64, Option<f64>)> = epsilons
            .iter()
            .map(|&e| {
                let cfg = EmbeddingConfig::new(&alg, 1, e, -10, 250);
                let phi = assemble_weierstrass(&alg, &fam, &cfg).unwrap();
                (e, Some(holder_diagnostics(&alg, &phi, &pts, &cfg).measured))
            })
            .collect();
        fit_loglog(&rows).unwrap().slope
    };
    let (ortho, shared) = (slope(Layout::Orthogonal), slope(Layout::Shared));
    outcome(
        ortho >= C7_ORTHO.0 && ortho <= C7_ORTHO.1 && shared <= C7_SHARED_MAX && start.elapsed() < C7_BUDGET,
        format!("Hoelder slope vs eps: orthogonal {ortho:.3}, shared {shared:.3}, {:.1}s", start.elapsed().as_secs_f64()),
    )
}

/// Block `m` recomputed straight from `ψ`, and the self-similarity
/// `Φ₁(δ_2 p) = 2^{1−ε} Φ₁(p)` of an untruncated shared sum.
fn criterion_8() -> Outcome {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let psi = trig_features(vec![0, 1, 2]);
    let eps = 0.25;
    let pts = quasiball(&alg, 3.0, 1000, 8);
    let mut worst_block = 0.0f64;
    for a in [1u32, 2, 3] {
        let (m1, m2) = (-60, 250);
        let cfg = EmbeddingConfig::new(&alg, a, eps, m1, m2);
        let base = cfg.base();
        let fam = LacunaryFamily::rescaled(alg.clone(), psi.clone(), 6, base, m1..=m2, Layout::Shared, "trig");
        let phi1 = assemble_weierstrass(&alg, &fam, &cfg).unwrap();
        let full = concatenate_scales(alg.clone(), &phi1, &cfg);
        let origin = psi(&[0.0, 0.0, 0.0]);
        let direct = |p: &[f64]| -> Vec<f64> {
            let mut out = Vec::new();
            for m in 1..=a as i32 {
                let lam = 2f64.powi(1 - m);
                let q = alg.dilate_f64(lam, p);
                let mut block = vec![0.0; 6];
                for k in m1..=m2 {
                    let amp = base.powi(k);
                    let v = psi(&alg.dilate_f64(1.0 / amp, &q));
                    for (b, (x, o)) in block.iter_mut().zip(v.iter().zip(&origin)) {
                        *b += base.powf(-(k as f64) * eps) * amp * (x - o);
                    }
                }
                out.extend(block.into_iter().map(|x| 2f64.powf((m - 1) as f64 * (1.0 - eps)) * x));
            }
            out
        };
        let w = pts
            .par_iter()
            .map(|p| full.eval(p).iter().zip(direct(p)).map(|(x, y)| (x - y).abs() / (1.0 + y.abs())).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        worst_block = worst_block.max(w);
    }
    let cfg = EmbeddingConfig::new(&alg, 1, eps, -60, 250);
    let fam = LacunaryFamily::rescaled(alg.clone(), psi.clone(), 6, 2.0, -60..=250, Layout::Shared, "trig");
    let phi1 = assemble_weierstrass(&alg, &fam, &cfg).unwrap();
    let factor = 2f64.powf(1.0 - eps);
    let worst_similar = pts
        .par_iter()
        .map(|p| {
            let lhs = phi1.eval(&alg.dilate_f64(2.0, p));
            let rhs = phi1.eval(p);
            lhs.iter().zip(&rhs).map(|(l, r)| (l - factor * r).abs() / (1.0 + l.abs())).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst_block <= C8_TOL && worst_similar <= C8_TOL,
        format!("1000 points, block identity {worst_block:.1e}, self-similarity {worst_similar:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let h3 = Arc::new(StratifiedAlgebra::h3());
    let lattice = CarnotCloud::new(h3.clone(), generate_heisenberg_ball(&h3, 8.0, BALL_BUDGET).unwrap());
    let mut clouds = vec![("h3 lattice R=8", lattice)];
    for (name, alg) in [("h5 sample", StratifiedAlgebra::h5()), ("engel sample", StratifiedAlgebra::engel())] {
        let alg = Arc::new(alg);
        let pts = quasiball(&alg, 4.0, 2000, 9);
        clouds.push((name, CarnotCloud::new(alg, pts)));
    }
    for (name, cloud) in &clouds {
        let n_h = cloud.alg.homogeneous_dim();
        for delta in [1.0, 2.0, 4.0] {
            let net = greedy_maximal_net(cloud, delta).unwrap();
            let radii: Vec<f64> = (0..4).map(|k| delta * 2f64.powi(k)).collect();
            let (checked, failures) = volumetric_audit(cloud, &net, &radii, n_h);
            let coloring = color_net(cloud, &net, 3.0 * delta);
            let sep_bad: usize = verify_coloring(cloud, &coloring).iter().map(|r| r.separation_violations.len()).sum();
            let bound = 7f64.powi(n_h as i32);
            ok &= failures.is_empty() && sep_bad == 0 && (coloring.num_colors as f64) <= bound;
            lines.push(format!("{name} d={delta}: {checked} checks, {} violations, {} colors", failures.len(), coloring.num_colors));
        }
    }
    outcome(ok, lines.join("; "))
}

fn pipeline(out: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let common = Common { out: out.to_path_buf(), seed: 7, ..Common::default() };
    let net = NetOptions { group: "h3".into(), radius: 4.0, delta: 2.0, points: 500 };
    let embed = EmbedOptions { builder: Builder::Assouad, radius: 4.0, epsilon: 0.125, a: 1, layout: Layout::Orthogonal, m1: -10, m2: 60 };
    let spec = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/engel.json");
    commands::validate(&common, &spec).unwrap();
    commands::net(&common, &net).unwrap();
    commands::color(&common, &ColorOptions { net: net.clone(), factor: 3.0 }).unwrap();
    commands::extend_frame_cmd(&common, &FrameOptions { points: 300, torus_dim: 1, k: 2.0, dim: 2490, count: 1, write_frame: true }).unwrap();
    commands::oscillator(
        &common,
        &OscillatorOptions { group: "h3".into(), radius: 3.0, samples: 100, exact_points: 20, h: 1e-2, threshold: 0.9 },
    )
    .unwrap();
    commands::embed(&common, &embed).unwrap();
    commands::distortion_cmd(&common, &embed).unwrap();
    let weier = EmbedOptions { builder: Builder::Weierstrass, ..embed.clone() };
    commands::sweep(&common, &SweepOptions { embed: weier, epsilons: vec![0.25, 0.125, 0.0625], window: (0.0, 10.0) }).unwrap();
    commands::report(&common).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (pipeline(a.path()), pipeline(b.path()));
    let json = fa.iter().filter(|f| f.0.ends_with(".json")).count();
    let differing: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    outcome(
        fa.len() == fb.len() && differing.is_empty() && json >= 9,
        format!("{} files ({json} JSON) compared byte for byte, differing {differing:?}", fa.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("algebra exactness", criterion_1),
        ("vector-field finite differences", criterion_2),
        ("Veronese freeness", criterion_3),
        ("frame extension", criterion_4),
        ("pseudoinverse and explicit solve", criterion_5),
        ("isometry field", criterion_6),
        ("Hoelder rate separation", criterion_7),
        ("scale concatenation", criterion_8),
        ("doubling and volumetric bounds", criterion_9),
        ("determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let o = run();
        failed += usize::from(!o.pass);
        println!("{id} {:<34} {}  {}", name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
