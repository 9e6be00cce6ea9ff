//! Sign-representing polynomials and the error-vs-spectrum-gap inequality:
//! expand a DNF's threshold polynomial, truncate it to low degree, and
//! verify the resulting error bound exactly.

use dnflearn::boolcore::{parse_dnf, Point};
use dnflearn::dist::ProductDistribution;
use dnflearn::spectrum::FnTarget;
use dnflearn::structural::{
    bound_degree, term_mu_l1, truncated_dnf_polynomial, verify_error_bound, BoundFamily,
};

fn main() -> dnflearn::Result<()> {
    let f = parse_dnf("n=10; 1 & 2 | 3 & !4 | 5 & 6 & 7")?;
    let mu = ProductDistribution::new(vec![0.3, -0.2, 0.4, 0.0, 0.25, -0.4, 0.1, 0.2, -0.3, 0.0])?;
    let (s, epsilon) = (3usize, 0.05);
    let c = mu.c_bound();
    println!("f = {f}");
    println!("c = {c:.3}, theorem degree = {}", bound_degree(s as f64, epsilon, c)?);
    // deliberately truncate below the longest term so the error terms bite
    let d = 2;

    for (k, t) in f.terms().iter().enumerate() {
        println!("term {k}: exact mu-basis L1 = {:.4} (cap (2-c)^(len/2))", term_mu_l1(t, &mu)?);
    }

    let trunc = truncated_dnf_polynomial(&f, &mu, d)?;
    println!(
        "truncated sign polynomial: L1 = {:.4}, truncation error = {:.6}, {} long terms dropped",
        trunc.l1,
        trunc.truncation_error,
        trunc.long_terms
    );

    // the degree-d part of the sign polynomial as an approximator g
    let p = trunc.truncated.clone();
    let g = FnTarget::new(10, move |x: Point| p.eval(x, None).unwrap());
    let report = verify_error_bound(&f, &g, &mu, d, &BoundFamily::Dnf { s, epsilon })?;
    println!(
        "bound check: E|f-g| = {:.6} <= {:.6} (gap {:.6}, slack {:.6}, passes: {})",
        report.lhs,
        report.rhs,
        report.gap,
        report.slack,
        report.passes()
    );
    Ok(())
}
