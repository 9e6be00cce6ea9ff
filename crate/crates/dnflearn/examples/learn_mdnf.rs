//! Attribute-efficient monotone-DNF learning from examples: influence-based
//! variable elimination, then low-degree collection over the survivors.

use dnflearn::boolcore::parse_dnf;
use dnflearn::dist::ProductDistribution;
use dnflearn::learners::{
    learn_mdnf_uniform, measure_error, survivor_cap, ErrorMode, LearnerConfig,
};
use dnflearn::oracles::ExampleOracle;

fn main() -> dnflearn::Result<()> {
    // 20 variables, only 3 relevant
    let f = parse_dnf("n=20; 1 | 2 & 3")?;
    println!("target: {f}");

    let mut ex = ExampleOracle::new(&f, ProductDistribution::uniform(20), 77)?;
    let mut cfg = LearnerConfig::new(2, 0.1, 0.1, 1.0)?;
    cfg.seed = 5;
    let h = learn_mdnf_uniform(&mut ex, &cfg)?;

    let m = h.variable_set.unwrap();
    let kept: Vec<u32> = (0..20).filter(|i| m >> i & 1 == 1).collect();
    println!(
        "surviving variables (1-based): {:?}  (cap {:.1})",
        kept.iter().map(|i| i + 1).collect::<Vec<_>>(),
        survivor_cap(cfg.s, h.params.gamma)
    );
    let e = measure_error(&h, &f, ex.mu(), ErrorMode::Exact)?;
    println!("exact error = {:.6} (target {})", e.value, cfg.epsilon);
    Ok(())
}
