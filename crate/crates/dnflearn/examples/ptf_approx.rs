//! Spectrum matching with the clipped-update chain: build a bounded function
//! whose low-degree coefficients track a DNF's, and watch the trace.

use dnflearn::approx::{ptf_approx, ApproxParams, ChainBackend};
use dnflearn::boolcore::{random_dnf, Point};
use dnflearn::spectrum::{diff_inf_norm, exact_uniform_transform, PointFn};

fn main() -> dnflearn::Result<()> {
    let f = random_dnf(10, 3, 3, false, 5)?;
    println!("target: {f}");

    let gamma = 0.05;
    let d = 10;
    let target = exact_uniform_transform(&f)?.to_sparse(Some(d));
    let p = ApproxParams::new(gamma, 0.1, d, ChainBackend::Exact)?;
    let (chain, steps) = ptf_approx(&target, &p)?;

    println!("chain of {} updates (cap {}):", steps.len(), p.improper_step_cap());
    for s in steps.iter().take(12) {
        println!("  mask {:#05x}  coeff {:+.4}  violation {:.4}", s.mask, s.coefficient, s.diff);
    }
    if steps.len() > 12 {
        println!("  ... {} more", steps.len() - 12);
    }

    let gs = exact_uniform_transform(&chain)?.to_sparse(Some(d));
    println!(
        "final sup-norm gap {:.5} (guarantee: {})",
        diff_inf_norm(&gs, &target, Some(d))?,
        5.0 * gamma
    );
    let max_abs = Point::all(10)
        .map(|x| chain.value(x).abs())
        .fold(0.0f64, f64::max);
    println!("output bound: max |g(x)| = {max_abs:.6}");
    Ok(())
}
