//! Weierstrass sums over lacunary scales: orthogonal blocks versus shared coordinates.

use carnot::commands::sample_quasiball;
use carnot::embed::{assemble_weierstrass, concatenate_scales, holder_diagnostics, trig_features, EmbeddingConfig, LacunaryFamily, Layout};
use carnot::harness::fit_loglog;
use carnot::{Result, StratifiedAlgebra};
use std::sync::Arc;

fn main() -> Result<()> {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let pts = sample_quasiball(&alg, 4.0, 300, 2);
    let epsilons: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
    for layout in [Layout::Orthogonal, Layout::Shared] {
        let family = LacunaryFamily::rescaled(alg.clone(), trig_features(vec![0]), 2, 2.0, -10..=250, layout, "x1");
        let mut rows = Vec::new();
        for &eps in &epsilons {
            let cfg = EmbeddingConfig::new(&alg, 1, eps, -10, 250);
            let phi = assemble_weierstrass(&alg, &family, &cfg)?;
            let diag = holder_diagnostics(&alg, &phi, &pts, &cfg);
            println!("{layout:?} eps {eps:<9} Hoelder constant {:>8.3} (Pythagorean prediction {:.3})", diag.measured, diag.predicted_m);
            rows.push((eps, Some(diag.measured)));
        }
        println!("{layout:?}: log-log slope against eps {:.3}", fit_loglog(&rows)?.slope);
    }

    let cfg = EmbeddingConfig::new(&alg, 3, 0.25, -20, 120);
    let family = LacunaryFamily::rescaled(alg.clone(), trig_features(vec![0, 1, 2]), 6, cfg.base(), -20..=120, Layout::Orthogonal, "trig");
    let phi1 = assemble_weierstrass(&alg, &family, &cfg)?;
    let full = concatenate_scales(alg.clone(), &phi1, &cfg);
    println!("concatenated map: {} blocks of {} -> dimension {}, hash {}", cfg.a, phi1.dim, full.dim, &full.hash[..16]);
    Ok(())
}
