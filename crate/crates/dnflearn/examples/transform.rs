//! Exact Fourier transforms of a small DNF: the uniform parity basis and a
//! biased product basis, with Parseval's identity checked in both.

use dnflearn::boolcore::parse_dnf;
use dnflearn::dist::ProductDistribution;
use dnflearn::spectrum::{exact_mu_transform, exact_uniform_transform, write_spectrum};

fn main() -> dnflearn::Result<()> {
    let f = parse_dnf("n=4; 1 | 2 & !3")?;
    println!("f = {f}");

    let uniform = exact_uniform_transform(&f)?.to_sparse(None);
    println!("\nuniform spectrum:");
    let mut buf = Vec::new();
    write_spectrum(&mut buf, &uniform)?;
    print!("{}", String::from_utf8_lossy(&buf));
    println!("Parseval: sum of squares = {:.12}", uniform.norms().l2 * uniform.norms().l2);

    let mu = ProductDistribution::new(vec![0.5, -0.25, 0.0, 0.3])?;
    let biased = exact_mu_transform(&f, &mu, None)?;
    println!("\nproduct spectrum at mu = {:?}:", mu.mu());
    let mut buf = Vec::new();
    write_spectrum(&mut buf, &biased)?;
    print!("{}", String::from_utf8_lossy(&buf));
    println!("Parseval: sum of squares = {:.12}", biased.norms().l2 * biased.norms().l2);
    Ok(())
}
