//! Heavy-coefficient recovery with membership queries: the sampled
//! prefix-bucket search against the exact spectrum of a random DNF.

use dnflearn::boolcore::random_dnf;
use dnflearn::oracles::MembershipOracle;
use dnflearn::recovery::{km_uniform, Backend, RecoveryParams};
use dnflearn::spectrum::{diff_inf_norm, exact_uniform_transform};

fn main() -> dnflearn::Result<()> {
    let f = random_dnf(12, 4, 3, false, 42)?;
    println!("target: {f}");

    let theta = 0.05;
    let mut p = RecoveryParams::new(theta, 0.05, Backend::Sampled)?;
    p.seed = 7;
    let mut mq = MembershipOracle::new(&f);
    let report = km_uniform(&mut mq, &p)?;

    let exact = exact_uniform_transform(&f)?.to_sparse(None);
    let heavy = exact.heavy(theta);
    println!(
        "recovered {} coefficients with {} membership queries (exact heavy set: {})",
        report.spectrum.norms().l0,
        report.access_count,
        heavy.norms().l0
    );
    println!(
        "sup-norm gap to the exact spectrum: {:.5} (contract: {theta})",
        diff_inf_norm(&report.spectrum, &exact, None)?
    );
    for (&mask, &v) in report.spectrum.entries() {
        println!("  {mask:#06b}  est {v:+.4}  exact {:+.4}", exact.coeff(mask));
    }
    Ok(())
}
