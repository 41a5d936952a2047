//! Gram determinants, wedge norms, pseudoinverses and Gram–Schmidt.

use carnot::multilinear::{gram_det_exact, gram_schmidt, pseudoinverse, wedge_cauchy_schwarz_check, wedge_norm};
use carnot::scalar::rat;
use carnot::Result;
use nalgebra::DMatrix;

fn main() -> Result<()> {
    let vs = vec![vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, -1.0], vec![2.0, 0.0, 1.0, 0.5]];
    println!("|v1 ^ v2 ^ v3| = {:.6}", wedge_norm(&vs)?);
    println!("Cauchy-Schwarz for the split 1|2: {}", wedge_cauchy_schwarz_check(&vs, 1, 1e-12));

    let exact = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(-1, 1), rat(2, 5)]];
    println!("exact Gram determinant = {}", gram_det_exact(&exact));

    let es = gram_schmidt(&vs)?;
    println!("orthonormalized wedge = {:.12}", wedge_norm(&es)?);

    let t = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, -1.0]);
    let tp = pseudoinverse(&t)?;
    println!("|T T+ - I| = {:.2e}", (&t * &tp - DMatrix::identity(2, 2)).amax());
    Ok(())
}
