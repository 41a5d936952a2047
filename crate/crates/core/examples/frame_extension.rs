//! Lipschitz extension of an orthonormal frame on a circle of 2000 points.

use carnot::frame::{extend_frame, extend_frame_repeated, ExtensionConfig, FrameField};
use carnot::nets::FlatTorus;
use carnot::Result;

fn main() -> Result<()> {
    let (n, dim) = (2000, 2490);
    let cloud = FlatTorus::random(n, 1, 1.0, 0);
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    let frame = FrameField::constant(n, &[e1]);

    let cfg = ExtensionConfig::new(2.0, 1, dim, 0);
    println!("delta {:.4}, eps cap {:.4}, dimension gap {:.1} (have {dim})", cfg.delta(), cfg.eps_cap(), cfg.gap_required());
    let ext = extend_frame(&cloud, &frame, &cfg)?;
    let d = &ext.diagnostics;
    println!(
        "net {}, events {}, resamples {}, events left {}, |v|^2 in [{:.3}, {:.3}], Lipschitz {:.2} <= {}",
        d.net_size, d.events, d.resamples, d.violations_after, d.norm_sq_min, d.norm_sq_max, d.lipschitz.value, d.lipschitz_bound
    );

    let small = FlatTorus::random(400, 1, 1.0, 1);
    let base = FrameField::constant(400, &[{
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        v
    }]);
    let (grown, steps) = extend_frame_repeated(&small, &base, 3, &ExtensionConfig::new(2.0, 1, dim, 1).with_strict(false))?;
    println!("three more fields on 400 points: orthonormality defect {:.1e}", grown.orthonormality_defect(400));
    for (i, s) in steps.iter().enumerate() {
        println!("  step {i}: {} (passed {})", s.label, s.passed());
    }
    Ok(())
}
