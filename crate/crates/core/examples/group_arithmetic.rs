//! Exact group law, dilations and the quasinorm on the Engel group.

use carnot::scalar::rat;
use carnot::{Result, StratifiedAlgebra};

fn main() -> Result<()> {
    let alg = StratifiedAlgebra::engel();
    println!("{}: strata {:?}, homogeneous dimension {}", alg.name(), alg.strata_dims(), alg.homogeneous_dim());
    println!("validation: {:?}", alg.validate().is_valid());

    let p = alg.point(vec![rat(1, 2), rat(-1, 3), rat(2, 1), rat(0, 1)])?;
    let q = alg.point(vec![rat(3, 4), rat(1, 1), rat(-1, 5), rat(1, 7)])?;
    let r = alg.point(vec![rat(-2, 1), rat(1, 2), rat(0, 1), rat(3, 2)])?;
    let pq = alg.bch_product(&p, &q)?;
    println!("p*q = {:?}", pq.as_slice().iter().map(|x| x.to_string()).collect::<Vec<_>>());

    let left = alg.bch_product(&pq, &r)?;
    let right = alg.bch_product(&p, &alg.bch_product(&q, &r)?)?;
    println!("associative: {}", left == right);
    println!("p * p^-1 = id: {}", alg.bch_product(&p, &alg.inverse(&p))? == alg.identity());

    let lam = rat(3, 2);
    let hom = alg.dilate(&lam, &pq)? == alg.bch_product(&alg.dilate(&lam, &p)?, &alg.dilate(&lam, &q)?)?;
    println!("dilation is a homomorphism: {hom}");

    let n = alg.quasinorm_exact(p.as_slice());
    let n_scaled = alg.quasinorm_exact(alg.dilate(&lam, &p)?.as_slice());
    println!("N(p) = {:.6}, N(delta_3/2 p) = {:.6}, exact homogeneity: {}", n.to_f64(), n_scaled.to_f64(), n_scaled == n.scaled(&lam));
    Ok(())
}
