//! The Veronese map is exactly free; pasting it over a colored net keeps it free.

use carnot::commands::{sample_quasiball, sample_rational_points};
use carnot::nets::{color_net, greedy_maximal_net, CarnotCloud};
use carnot::oscillator::{paste_oscillator, veronese_exponents, Cutoff, WordJet};
use carnot::scalar::int;
use carnot::{Result, StratifiedAlgebra};
use std::sync::Arc;

fn main() -> Result<()> {
    for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::engel()] {
        let jet = WordJet::veronese(&alg);
        let pts = sample_rational_points(&alg, 50, 0);
        let all_one = pts.iter().all(|p| jet.wedge_squared_exact(p) == int(1));
        println!(
            "{}: {} Veronese components, {} ordered words, exact wedge = 1 at 50 rational points: {all_one}",
            alg.name(),
            veronese_exponents(alg.dim(), alg.step()).len(),
            jet.words.len()
        );
    }

    let alg = Arc::new(StratifiedAlgebra::h3());
    let cloud = CarnotCloud::new(alg.clone(), sample_quasiball(&alg, 3.0, 1500, 0));
    let net = greedy_maximal_net(&cloud, 1.0)?;
    let coloring = color_net(&cloud, &net, 3.0);
    let osc = paste_oscillator(&cloud, Cutoff::default(), &coloring)?;
    let min = cloud.points.iter().take(300).map(|p| osc.wedge(p, 1e-2)).fold(f64::INFINITY, f64::min);
    println!(
        "pasted map: net {}, {} colors, {} components, minimum wedge over 300 points {min:.3e}",
        net.len(),
        coloring.num_colors,
        osc.num_components()
    );
    Ok(())
}
