//! Isometry columns perpendicular to the jet of psi, and the mollifier low-pass.

use carnot::commands::sample_quasiball;
use carnot::embed::{build_isometry_field, mollifier_lowpass, perpendicularity_residual, Grid, IsometryConfig, LowPass, PolyJet};
use carnot::nets::CarnotCloud;
use carnot::oscillator::veronese_map;
use carnot::{Result, StratifiedAlgebra};
use std::sync::Arc;

fn main() -> Result<()> {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let psi = PolyJet::new(alg.clone(), veronese_map(&alg), 2);
    let cloud = CarnotCloud::new(alg.clone(), sample_quasiball(&alg, 2.0, 200, 1));
    let cfg = IsometryConfig { d0: 3, dim: 200, m_scale: 1.0, a_scale: 1.0, k: 2.0, seed: 0 };
    let u = build_isometry_field(&alg, &psi, &cloud, &cfg)?;
    let (r1, r2) = perpendicularity_residual(&alg, &psi, &cloud, &u);
    println!("isometry field: {} columns in R^{}, constant {}, residuals {r1:.1e} / {r2:.1e}", u.d0, u.dim, u.constant);

    let grid = Grid::centered(&[2.0, 2.0, 2.0], &[21, 21, 21]);
    let values: Vec<f64> = grid.points().iter().map(|p| (3.0 * p[0]).sin() + p[2]).collect();
    for n in [0.5, 1.0, 20.0] {
        match mollifier_lowpass(&alg, &grid, &values, n) {
            Ok((smoothed, mode)) => {
                let change = smoothed.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                println!("N = {n}: {mode:?}, max change {change:.3}");
            }
            Err(e) => println!("N = {n}: {e}"),
        }
    }
    let lp = LowPass::new(&alg, 2.0, 9);
    let f = |x: &[f64]| vec![(3.0 * x[0]).sin()];
    println!("pointwise low-pass of sin(3x1) at 0.5: {:.4} (raw {:.4})", lp.apply(&alg, &f, &[0.5, 0.0, 0.0])[0], 1.5f64.sin());
    Ok(())
}
