//! Assouad's embedding of the Heisenberg lattice ball and its distortion as eps shrinks.
//!
//! Pass the ball radius as the first argument (default 8).

use carnot::embed::{assouad_baseline, AssouadConfig, Layout};
use carnot::harness::{fit_loglog_slope, generate_heisenberg_ball, sweep_epsilon, BALL_BUDGET};
use carnot::nets::{CarnotCloud, MetricSpace};
use carnot::{Result, StratifiedAlgebra};
use std::sync::Arc;

fn main() -> Result<()> {
    let radius: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8.0);
    let alg = Arc::new(StratifiedAlgebra::h3());
    let cloud = CarnotCloud::new(alg.clone(), generate_heisenberg_ball(&alg, radius, BALL_BUDGET)?);
    println!("lattice ball R={radius}: {} points", cloud.len());

    let epsilons = [0.25, 0.125, 0.0625, 0.03125];
    let rows = sweep_epsilon(&cloud, &epsilons, 0, &|eps| {
        let cfg = AssouadConfig { epsilon: eps, base: 2.0, tail: None, layout: Layout::Orthogonal };
        let (map, scales) = assouad_baseline(&cloud, &cfg)?;
        println!("eps {eps}: {} scales, dimension {}", scales.len(), map.dim);
        Ok(map.eval_all(&cloud.points))
    })?;
    for r in &rows {
        println!("eps {:<8} distortion {:?}", r.epsilon, r.distortion);
    }
    let fit = fit_loglog_slope(&rows)?;
    println!("slope of log distortion against log(1/eps): {:.3} +- {:.3}", fit.slope, fit.stderr);
    Ok(())
}
