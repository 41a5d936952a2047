//! Solving B(phi, psi) = F pointwise with the pseudoinverse of T_psi.

use carnot::embed::{bilinear_form_b, explicit_solve, FdJet, Grid, Jet, PolyJet};
use carnot::oscillator::veronese_map;
use carnot::{Result, StratifiedAlgebra};
use nalgebra::DMatrix;
use std::sync::Arc;

fn target(p: &[f64]) -> DMatrix<f64> {
    let off = 0.3 * p[0].sin();
    DMatrix::from_row_slice(2, 2, &[1.0 + 0.2 * p[1] * p[1], off, off, 1.0 + 0.1 * p[2]])
}

fn main() -> Result<()> {
    let alg = Arc::new(StratifiedAlgebra::h3());
    let psi = PolyJet::new(alg.clone(), veronese_map(&alg), 2);
    let p = [0.3, -0.2, 0.1];
    let sol = explicit_solve(&alg, &psi, &target(&p), &p)?;
    println!("at {p:?}: |wedge T| = {:.4}, |T phi - (0,-F,0)| = {:.1e}", sol.wedge, sol.residual);

    let grid = Grid::centered(&[0.5, 0.5, 0.25], &[5, 5, 5]);
    let mut prev: Option<f64> = None;
    for h in [0.1, 0.05, 0.025, 0.0125] {
        let (a, ps) = (alg.clone(), psi.clone());
        let phi = FdJet::new(alg.clone(), psi.dim(), h, move |x| explicit_solve(&a, &ps, &target(x), x).map(|s| s.phi).unwrap_or_default());
        let mut err: f64 = 0.0;
        for q in grid.points() {
            err = err.max((bilinear_form_b(&alg, &phi, &psi, &q)? - target(&q)).amax());
        }
        match prev {
            Some(e) => println!("h {h:<7} max |B(phi, psi) - F| = {err:.3e}  (ratio {:.3})", e / err),
            None => println!("h {h:<7} max |B(phi, psi) - F| = {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
