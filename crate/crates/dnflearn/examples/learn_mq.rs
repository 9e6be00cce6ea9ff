//! End-to-end DNF learning with membership queries over a biased product
//! distribution: heavy-coefficient collection, spectrum matching, and exact
//! error measurement.

use dnflearn::boolcore::random_dnf;
use dnflearn::dist::ProductDistribution;
use dnflearn::learners::{derive_params, learn_dnf_mq_prod, measure_error, ErrorMode, LearnerConfig};
use dnflearn::oracles::MembershipOracle;

fn main() -> dnflearn::Result<()> {
    let n = 12;
    let f = random_dnf(n, 4, 3, false, 23)?;
    let mu = ProductDistribution::new(vec![
        0.3, -0.4, 0.0, 0.2, -0.1, 0.5, 0.25, -0.3, 0.0, 0.1, -0.2, 0.4,
    ])?;
    println!("target: {f}");

    let mut cfg = LearnerConfig::new(4, 0.1, 0.1, 0.5)?;
    cfg.seed = 99;
    let dp = derive_params(cfg.s, cfg.epsilon, cfg.c, n)?;
    println!(
        "derived: epsilon' = {:.5}, d = {}, gamma = {:.6}",
        dp.epsilon_prime, dp.degree, dp.gamma
    );

    let mut mq = MembershipOracle::new(&f);
    let h = learn_dnf_mq_prod(&mut mq, &mu, &cfg)?;
    let e = measure_error(&h, &f, &mu, ErrorMode::Exact)?;
    println!(
        "hypothesis: {} spectrum-matching steps, {} membership queries",
        h.steps, h.access.queries
    );
    println!("exact error Pr_mu[f != h] = {:.6} (target {})", e.value, cfg.epsilon);
    Ok(())
}
