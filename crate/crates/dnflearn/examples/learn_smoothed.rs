//! Learning over smoothed product distributions: the means are perturbed
//! around a hidden center and never revealed, so the learner estimates them
//! and replaces the query-based search with the greedy downward-closed one.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dnflearn::boolcore::parse_dnf;
use dnflearn::dist::perturb;
use dnflearn::learners::{learn_dnf_smoothed, measure_error, ErrorMode, LearnerConfig};
use dnflearn::oracles::ExampleOracle;

fn main() -> dnflearn::Result<()> {
    let f = parse_dnf("n=10; 1 & 2 | 3 & 4")?;
    println!("target: {f}");

    let mut hits = 0;
    let trials = 5;
    for seed in 0..trials {
        // nature draws the means around the (here adversarially zero) center
        let mut rng = ChaCha12Rng::seed_from_u64(500 + seed);
        let mu = perturb(&[0.0; 10], 0.25, &mut rng)?;
        let mut ex = ExampleOracle::new(&f, mu.clone(), seed)?;
        let mut cfg = LearnerConfig::new(2, 0.15, 0.1, 0.25)?;
        cfg.seed = seed;
        let h = learn_dnf_smoothed(&mut ex, &cfg)?;
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact)?;
        let ok = e.value <= cfg.epsilon;
        hits += ok as u32;
        println!(
            "trial {seed}: error {:.5} ({}) with {} examples, mu-hat within {:.3} of truth",
            e.value,
            if ok { "pass" } else { "miss" },
            h.access.examples,
            h.mu_estimate
                .as_ref()
                .unwrap()
                .iter()
                .zip(mu.mu())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        );
    }
    println!("{hits}/{trials} trials within epsilon");
    Ok(())
}
