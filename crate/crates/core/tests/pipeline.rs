use carnot::commands::{self, Builder, Common, EmbedOptions, SweepOptions};
use carnot::embed::{assouad_baseline, AssouadConfig, Layout};
use carnot::harness::{
    distortion, generate_heisenberg_ball, heisenberg_ball_estimate, heisenberg_lattice_direct, min_separation, report,
    BALL_BUDGET,
};
use carnot::nets::CarnotCloud;
use carnot::{Error, StratifiedAlgebra};
use std::sync::Arc;

fn lattice(r: f64) -> CarnotCloud {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let pts = generate_heisenberg_ball(&alg, r, BALL_BUDGET).unwrap();
    CarnotCloud::new(alg, pts)
}

#[test]
fn ball_growth_matches_homogeneous_dimension() {
    let alg = StratifiedAlgebra::h3();
    let counts: Vec<usize> = [4.0, 8.0, 16.0].iter().map(|&r| generate_heisenberg_ball(&alg, r, BALL_BUDGET).unwrap().len()).collect();
    for w in counts.windows(2) {
        let ratio = w[1] as f64 / w[0] as f64;
        assert!((8.0..=32.0).contains(&ratio), "{counts:?}");
    }
    let est = heisenberg_ball_estimate(8.0) as f64;
    assert!((counts[1] as f64 / est - 1.0).abs() < 0.05);
}

#[test]
fn bfs_ball_equals_direct_enumeration() {
    let alg = StratifiedAlgebra::h3();
    let mut bfs = generate_heisenberg_ball(&alg, 8.0, BALL_BUDGET).unwrap();
    let mut direct = heisenberg_lattice_direct(&alg, 8.0);
    bfs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    direct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(bfs, direct);
    assert!(min_separation(&lattice(4.0)) >= 1.0 - 1e-12);
}

#[test]
fn oversized_ball_is_refused() {
    let alg = StratifiedAlgebra::h3();
    assert!(matches!(generate_heisenberg_ball(&alg, 200.0, BALL_BUDGET), Err(Error::TooLarge { .. })));
}

#[test]
fn assouad_distortion_is_reproducible() {
    let cloud = lattice(8.0);
    let cfg = AssouadConfig { epsilon: 0.125, base: 2.0, tail: None, layout: Layout::Orthogonal };
    let run = || {
        let (map, _) = assouad_baseline(&cloud, &cfg).unwrap();
        distortion(&cloud, &map.eval_all(&cloud.points), 0.875, 0).unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.distortion.is_finite() && a.distortion >= 1.0);
    assert_eq!(a.distortion.to_bits(), b.distortion.to_bits());
    assert_eq!(a.expansion, b.expansion);
    assert_eq!(a.contraction, b.contraction);
}

/// Per-scale orthogonal blocks put Assouad's map in the Pythagorean regime.
#[test]
fn block_orthogonal_sweep_has_square_root_rate() {
    let dir = tempfile::tempdir().unwrap();
    let common = Common { out: dir.path().to_path_buf(), ..Common::default() };
    let embed = EmbedOptions { builder: Builder::Assouad, radius: 8.0, epsilon: 0.125, a: 1, layout: Layout::Orthogonal, m1: 0, m2: 0 };
    let opts = SweepOptions { embed, epsilons: vec![0.25, 0.125, 0.0625, 0.03125], window: (0.35, 0.65) };
    let (value, rows, fit) = commands::sweep(&common, &opts).unwrap();
    let fit = fit.unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.error.is_none()));
    assert!((0.35..=0.65).contains(&fit.slope), "slope {}", fit.slope);
    assert_eq!(value["pass"], true);
    assert!(dir.path().join("sweep.csv").is_file());
}

#[test]
fn report_requires_artifacts_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let common = Common { out: dir.path().to_path_buf(), ..Common::default() };
    assert!(matches!(report(dir.path()), Err(Error::MissingArtifacts(_))));
    let spec = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/h5.json");
    commands::validate(&common, &spec).unwrap();
    let embed = EmbedOptions { builder: Builder::Weierstrass, radius: 4.0, epsilon: 0.25, a: 1, layout: Layout::Orthogonal, m1: -4, m2: 40 };
    commands::embed(&common, &embed).unwrap();
    let (first, summary) = commands::report(&common).unwrap();
    let (second, _) = commands::report(&common).unwrap();
    assert_eq!(first, second);
    assert!(summary.contains("validate.json") && summary.contains("embed.json"));
    assert_eq!(first["all_pass"], true);
}

#[test]
fn bundled_specs_validate() {
    let dir = tempfile::tempdir().unwrap();
    let common = Common { out: dir.path().to_path_buf(), ..Common::default() };
    for name in ["h3", "h5", "engel"] {
        let spec = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("data/{name}.json"));
        assert_eq!(commands::validate(&common, &spec).unwrap()["pass"], true, "{name}");
    }
}

#[test]
fn sweep_rejects_large_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let common = Common { out: dir.path().to_path_buf(), ..Common::default() };
    let embed = EmbedOptions { builder: Builder::Assouad, radius: 4.0, epsilon: 0.1, a: 1, layout: Layout::Orthogonal, m1: 0, m2: 0 };
    let opts = SweepOptions { embed, epsilons: vec![0.4, 0.2, 0.1], window: (0.0, 1.0) };
    assert!(matches!(commands::sweep(&common, &opts), Err(Error::InvalidConfig(_))));
}
