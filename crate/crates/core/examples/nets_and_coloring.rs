//! Nets, colorings and the volumetric audit on the discrete Heisenberg ball.

use carnot::harness::{generate_heisenberg_ball, min_separation, BALL_BUDGET};
use carnot::nets::{color_net, estimate_doubling, MetricSpace, greedy_maximal_net, verify_coloring, verify_net, volumetric_audit, CarnotCloud};
use carnot::{Result, StratifiedAlgebra};
use std::sync::Arc;

fn main() -> Result<()> {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let pts = generate_heisenberg_ball(&alg, 8.0, BALL_BUDGET)?;
    let cloud = CarnotCloud::new(alg.clone(), pts);
    let n_h = alg.homogeneous_dim();
    println!("lattice ball R=8: {} points, min separation {:.3}", cloud.len(), min_separation(&cloud));

    for delta in [1.0, 2.0, 4.0] {
        let net = greedy_maximal_net(&cloud, delta)?;
        let ok = verify_net(&cloud, &net).is_valid();
        let radii: Vec<f64> = (0..4).map(|k| delta * 2f64.powi(k)).collect();
        let (checks, failures) = volumetric_audit(&cloud, &net, &radii, n_h);
        let coloring = color_net(&cloud, &net, 3.0 * delta);
        let bad: usize = verify_coloring(&cloud, &coloring).iter().map(|r| r.separation_violations.len()).sum();
        let doubling = estimate_doubling(&cloud, &net, 200, 3, Some(n_h), 0);
        println!(
            "delta {delta}: net {} (valid {ok}), {checks} ball checks with {} violations, {} colors (bound {}), {bad} color clashes, K ~ {:.2}",
            net.len(),
            failures.len(),
            coloring.num_colors,
            7usize.pow(n_h as u32),
            doubling.k_estimate
        );
    }
    Ok(())
}
