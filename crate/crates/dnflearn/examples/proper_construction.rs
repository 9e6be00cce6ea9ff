//! The proper construction: +/- gamma updates with a single projection,
//! integer-multiple coefficients, and the exact potential falling by at
//! least 2 gamma^2 per step.

use dnflearn::approx::{
    annotate_potentials, ptf_construct_prod, ApproxParams, ChainBackend,
};
use dnflearn::boolcore::random_dnf;
use dnflearn::dist::ProductDistribution;
use dnflearn::spectrum::exact_mu_transform;

fn main() -> dnflearn::Result<()> {
    let f = random_dnf(8, 3, 3, false, 11)?;
    let mu = ProductDistribution::new(vec![0.25; 8])?;
    println!("target: {f}  (mu = 0.25 everywhere)");

    let gamma = 0.1;
    let target = exact_mu_transform(&f, &mu, Some(8))?;
    let p = ApproxParams::new(gamma, 0.1, 8, ChainBackend::Exact)?;
    let (chain, mut steps) = ptf_construct_prod(&target, &mu, &p)?;
    annotate_potentials(&f, chain.basis(), gamma, &mut steps)?;

    println!(
        "{} steps (cap {}); integer weight {} (cap {})",
        steps.len(),
        p.proper_step_cap(),
        chain.integer_weight(),
        (1.0 / (2.0 * gamma * gamma)).ceil()
    );
    println!("potential trajectory (E(0) = 1, drop >= 2 gamma^2 = {}):", 2.0 * gamma * gamma);
    for s in steps.iter().take(15) {
        println!(
            "  mask {:#04x}  update {:+.2}  E(t) = {:.5}",
            s.mask,
            s.coefficient,
            s.potential.unwrap()
        );
    }
    println!("g' coefficients (all integer multiples of gamma):");
    for (&mask, &count) in chain.counts() {
        println!("  {mask:#04x}: {count} * gamma = {:+.3}", count as f64 * gamma);
    }
    Ok(())
}
