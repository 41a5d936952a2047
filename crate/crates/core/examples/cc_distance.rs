//! Carnot–Carathéodory distance upper bounds and their comparison with the quasinorm.

use carnot::commands::sample_quasiball;
use carnot::geodesic::{calibrate_equivalence, cc_upper_bound, CcOptions};
use carnot::{Result, StratifiedAlgebra};

fn main() -> Result<()> {
    let alg = StratifiedAlgebra::h3();
    let origin = [0.0, 0.0, 0.0];
    let vertical = [0.0, 0.0, 1.0];
    for segments in [4, 8, 16] {
        let opts = CcOptions { segments, ..CcOptions::default() };
        let est = cc_upper_bound(&alg, &origin, &vertical, &opts)?;
        println!("d(0, exp(e3)) <= {:.4} with {segments} segments (geodesic value {:.4})", est.length, 2.0 * std::f64::consts::PI.sqrt());
    }
    let horizontal = cc_upper_bound(&alg, &origin, &[1.0, 0.0, 0.0], &CcOptions::default())?;
    println!("d(0, exp(e1)) <= {:.6}", horizontal.length);

    let pts = sample_quasiball(&alg, 2.0, 200, 0);
    let opts = CcOptions { iterations: 200, restarts: 8, tol: 1e-5, ..CcOptions::default() };
    let cal = calibrate_equivalence(&alg, &pts, 100, &opts)?;
    println!("{:.3} N <= d_cc <= {:.3} N over {} pairs ({} infeasible)", cal.c_low, cal.c_high, cal.pairs.len(), cal.infeasible);
    Ok(())
}
