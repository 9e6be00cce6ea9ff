//! Access models: membership queries and the example oracle EX(D_mu, f),
//! plus empirical estimators for expectations, single coefficients and
//! variable influence, each with an explicit (accuracy, confidence) contract.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::boolcore::{IndexMask, Point, MAX_EXACT_DIM};
use crate::dist::ProductDistribution;
use crate::error::{Error, Result};
use crate::spectrum::PointFn;

/// Membership access: get f(x) at any chosen point. Counts queries and
/// optionally enforces a budget.
pub struct MembershipOracle<'a> {
    target: &'a dyn PointFn,
    query_count: u64,
    budget: Option<u64>,
}

impl<'a> MembershipOracle<'a> {
    pub fn new(target: &'a dyn PointFn) -> Self {
        MembershipOracle {
            target,
            query_count: 0,
            budget: None,
        }
    }

    pub fn with_budget(target: &'a dyn PointFn, budget: u64) -> Self {
        MembershipOracle {
            target,
            query_count: 0,
            budget: Some(budget),
        }
    }

    pub fn dim(&self) -> u32 {
        self.target.dim()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn query(&mut self, x: Point) -> Result<f64> {
        if let Some(b) = self.budget {
            if self.query_count >= b {
                return Err(Error::BudgetExhausted(format!(
                    "membership query budget {b} exhausted"
                )));
            }
        }
        self.query_count += 1;
        Ok(self.target.value(x))
    }
}

/// Example access: i.i.d. draws (x, f(x)) with x ~ D_mu. Counts samples and
/// optionally enforces a budget. Single-owner; clone_with_seed gives an
/// independent stream over the same target for parallel trials.
pub struct ExampleOracle<'a> {
    target: &'a dyn PointFn,
    mu: ProductDistribution,
    rng: ChaCha12Rng,
    sample_count: u64,
    budget: Option<u64>,
}

impl<'a> ExampleOracle<'a> {
    pub fn new(target: &'a dyn PointFn, mu: ProductDistribution, seed: u64) -> Result<Self> {
        if target.dim() != mu.dim() {
            return Err(Error::DimensionMismatch(target.dim(), mu.dim()));
        }
        Ok(ExampleOracle {
            target,
            mu,
            rng: ChaCha12Rng::seed_from_u64(seed),
            sample_count: 0,
            budget: None,
        })
    }

    pub fn set_budget(&mut self, budget: Option<u64>) {
        self.budget = budget;
    }

    pub fn dim(&self) -> u32 {
        self.target.dim()
    }

    pub fn mu(&self) -> &ProductDistribution {
        &self.mu
    }

    /// Direct handle on the target, for exact-oracle backends that bypass
    /// sampling (the access model is then full enumeration, not EX queries).
    pub fn target(&self) -> &'a dyn PointFn {
        self.target
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn clone_with_seed(&self, seed: u64) -> ExampleOracle<'a> {
        ExampleOracle {
            target: self.target,
            mu: self.mu.clone(),
            rng: ChaCha12Rng::seed_from_u64(seed),
            sample_count: 0,
            budget: self.budget,
        }
    }

    pub fn draw(&mut self) -> Result<(Point, f64)> {
        if let Some(b) = self.budget {
            if self.sample_count >= b {
                return Err(Error::BudgetExhausted(format!(
                    "example budget {b} exhausted"
                )));
            }
        }
        self.sample_count += 1;
        let x = self.mu.sample_point(&mut self.rng);
        Ok((x, self.target.value(x)))
    }
}

fn check_eta_delta(eta: f64, delta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "need eta, delta in (0,1); got eta={eta}, delta={delta}"
        )));
    }
    Ok(())
}

/// Hoeffding sample count for a statistic bounded by B:
/// `N = ceil(B^2 * 2 ln(2/delta) / eta^2)`.
pub fn expectation_sample_count(bound: f64, eta: f64, delta: f64) -> u64 {
    (bound * bound * 2.0 * (2.0 / delta).ln() / (eta * eta)).ceil() as u64
}

/// Estimates `E_mu[statistic(x, f(x))]` within `eta` with probability
/// `>= 1 - delta`, for a statistic bounded by `bound` in magnitude.
pub fn estimate_expectation(
    src: &mut ExampleOracle,
    statistic: impl Fn(Point, f64) -> f64,
    bound: f64,
    eta: f64,
    delta: f64,
) -> Result<f64> {
    check_eta_delta(eta, delta)?;
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::InvalidParam(format!("bad statistic bound {bound}")));
    }
    let count = expectation_sample_count(bound, eta, delta);
    let mut acc = 0.0;
    for _ in 0..count {
        let (x, fx) = src.draw()?;
        acc += statistic(x, fx);
    }
    Ok(acc / count as f64)
}

/// Sample count for a single-coefficient estimate. The worst-case bound pays
/// for the growth of |phi_{mu,a}| with degree; the refined variant drops that
/// dependence (validated empirically by the acceptance suite).
pub fn coefficient_sample_count(
    mu: &ProductDistribution,
    degree: u32,
    eta: f64,
    delta: f64,
    refined_sampling: bool,
) -> u64 {
    if refined_sampling {
        (8.0 * (2.0 / delta).ln() / (eta * eta)).ceil() as u64
    } else {
        let c = mu.c_bound();
        let blowup = (2.0 / c).powi(degree as i32);
        ((2.0 * (2.0 / delta).ln() / (eta * eta)).ceil() * blowup).ceil() as u64
    }
}

/// Empirical mean of `f(x) phi_{mu,a}(x)`: an estimate of the coefficient
/// at `a` in the oracle's own basis.
pub fn estimate_coefficient(
    src: &mut ExampleOracle,
    a: IndexMask,
    eta: f64,
    delta: f64,
    refined_sampling: bool,
) -> Result<f64> {
    check_eta_delta(eta, delta)?;
    if a.dim() != src.dim() {
        return Err(Error::DimensionMismatch(a.dim(), src.dim()));
    }
    let count = coefficient_sample_count(src.mu(), a.degree(), eta, delta, refined_sampling);
    let mu = src.mu().clone();
    let mut acc = 0.0;
    for _ in 0..count {
        let (x, fx) = src.draw()?;
        acc += fx * mu.basis_eval_unchecked(a, x);
    }
    Ok(acc / count as f64)
}

/// Conditioned samples needed per side of the influence estimator.
pub fn influence_side_count(eta: f64, delta: f64) -> u64 {
    (2.0 * (4.0 / delta).ln() / (eta * eta)).ceil() as u64
}

/// Influence of variable `i` on a monotone target (monotonicity is
/// caller-asserted, not checked): `(E[f_{i,1}] - E[f_{i,-1}]) / 2`,
/// each conditional mean taken over received examples with x_i fixed.
/// Valid under product distributions by coordinate independence.
///
/// Budget: the stream is conditioned, so roughly half of it is discarded per
/// side; the draw allowance carries the factor `2 / (1 - |mu_i|)` so the
/// confidence contract holds under skewed coordinates.
pub fn estimate_influence(
    src: &mut ExampleOracle,
    i: u32,
    eta: f64,
    delta: f64,
) -> Result<f64> {
    check_eta_delta(eta, delta)?;
    let n = src.dim();
    if i >= n {
        return Err(Error::InvalidParam(format!("variable {i} out of range")));
    }
    let side = influence_side_count(eta, delta);
    let mu_i = src.mu().mu_i(i);
    let allowance = (2.0 * side as f64 * 2.0 / (1.0 - mu_i.abs())).ceil() as u64 + side;
    let mut sums = [0.0f64; 2];
    let mut counts = [0u64; 2];
    let mut drawn = 0u64;
    while counts[0] < side || counts[1] < side {
        if drawn >= allowance {
            return Err(Error::BudgetExhausted(format!(
                "influence estimate for variable {i}: conditioned samples short after {drawn} draws"
            )));
        }
        let (x, fx) = src.draw()?;
        drawn += 1;
        let b = usize::from(x.coord(i) > 0.0); // 0 for x_i = -1, 1 for +1
        if counts[b] < side {
            sums[b] += fx;
            counts[b] += 1;
        }
    }
    let mean_hi = sums[1] / side as f64;
    let mean_lo = sums[0] / side as f64;
    Ok((mean_hi - mean_lo) / 2.0)
}

/// Exact influence under D_mu by full enumeration (n <= 24):
/// `(E_mu[f_{i,1}] - E_mu[f_{i,-1}]) / 2`.
pub fn exact_influence(f: &dyn PointFn, mu: &ProductDistribution, i: u32) -> Result<f64> {
    let n = f.dim();
    if n != mu.dim() {
        return Err(Error::DimensionMismatch(n, mu.dim()));
    }
    if i >= n {
        return Err(Error::InvalidParam(format!("variable {i} out of range")));
    }
    if n > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(
            "exact influence needs n <= 24".to_string(),
        ));
    }
    let mut diff = 0.0;
    for x in Point::all(n) {
        // weight of the other n-1 coordinates
        let xi_hi = x.with_coord(i, true);
        if x.bits() != xi_hi.bits() {
            continue; // visit each pair once, at the x_i = +1 representative
        }
        let xi_lo = x.with_coord(i, false);
        let w = mu.point_probability(xi_hi)? / ((1.0 + mu.mu_i(i)) / 2.0);
        diff += w * (f.value(xi_hi) - f.value(xi_lo));
    }
    Ok(diff / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolcore::{parse_dnf, random_dnf};
    use crate::dist::Basis;
    use crate::spectrum::{exact_mu_transform, exact_uniform_transform, FnTarget};
    use rand::Rng;

    #[test]
    fn counters_match_formulas_exactly() {
        let f = random_dnf(8, 2, 3, false, 1).unwrap();
        let mu = ProductDistribution::uniform(8);
        let mut ex = ExampleOracle::new(&f, mu, 11).unwrap();
        estimate_expectation(&mut ex, |_, fx| fx, 1.0, 0.2, 0.1).unwrap();
        assert_eq!(ex.sample_count(), expectation_sample_count(1.0, 0.2, 0.1));
        let before = ex.sample_count();
        let a = IndexMask::new(8, 0b101).unwrap();
        estimate_coefficient(&mut ex, a, 0.2, 0.1, true).unwrap();
        assert_eq!(
            ex.sample_count() - before,
            coefficient_sample_count(ex.mu(), 2, 0.2, 0.1, true)
        );
    }

    #[test]
    fn membership_budget_enforced() {
        let f = random_dnf(4, 2, 2, false, 1).unwrap();
        let mut mo = MembershipOracle::with_budget(&f, 2);
        let x = Point::new(4, 0).unwrap();
        assert!(mo.query(x).is_ok());
        assert!(mo.query(x).is_ok());
        assert!(matches!(mo.query(x), Err(Error::BudgetExhausted(_))));
        assert_eq!(mo.query_count(), 2);
    }

    #[test]
    fn constant_statistic_is_exact() {
        let f = random_dnf(6, 2, 3, false, 2).unwrap();
        let mut ex = ExampleOracle::new(&f, ProductDistribution::uniform(6), 7).unwrap();
        let est = estimate_expectation(&mut ex, |_, _| 1.0, 1.0, 0.1, 0.1).unwrap();
        assert_eq!(est, 1.0);
        // f = chi_1, statistic f * chi_1 is the constant 1
        let chi = FnTarget::new(6, |x| IndexMask::new(6, 1).unwrap().parity_at(x));
        let mut ex = ExampleOracle::new(&chi, ProductDistribution::uniform(6), 7).unwrap();
        let est = estimate_expectation(
            &mut ex,
            |x, fx| fx * IndexMask::new(6, 1).unwrap().parity_at(x),
            1.0,
            0.1,
            0.1,
        )
        .unwrap();
        assert_eq!(est, 1.0);
    }

    #[test]
    fn coefficient_estimates_match_exact_transform() {
        let n = 10u32;
        let f = random_dnf(n, 3, 4, false, 13).unwrap();
        let mu = ProductDistribution::new(vec![0.2; n as usize]).unwrap();
        let exact = exact_mu_transform(&f, &mu, None).unwrap();
        let (eta, delta) = (0.1, 0.05);
        let a = IndexMask::new(n, 0b11).unwrap();
        let base = ExampleOracle::new(&f, mu, 0).unwrap();
        let trials = 200;
        let mut misses = 0;
        for t in 0..trials {
            let mut ex = base.clone_with_seed(1000 + t);
            let est = estimate_coefficient(&mut ex, a, eta, delta, false).unwrap();
            if (est - exact.coeff(0b11)).abs() > eta {
                misses += 1;
            }
        }
        assert!(
            misses as f64 <= delta * trials as f64 * 2.0,
            "{misses}/{trials} misses"
        );
        // refined variant hits the same contract on this instance
        let mut misses = 0;
        for t in 0..trials {
            let mut ex = base.clone_with_seed(5000 + t);
            let est = estimate_coefficient(&mut ex, a, eta, delta, true).unwrap();
            if (est - exact.coeff(0b11)).abs() > eta {
                misses += 1;
            }
        }
        assert!(misses as f64 <= delta * trials as f64 * 2.0);
    }

    #[test]
    fn dictator_and_or_influence() {
        let f = parse_dnf("n=4; 1").unwrap();
        let mu = ProductDistribution::uniform(4);
        assert!((exact_influence(&f, &mu, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(exact_influence(&f, &mu, 1).unwrap().abs() < 1e-12);
        // OR(x1, x2): flipping x1 matters iff x2 = -1, so I_1 = 1/2.
        let or = parse_dnf("n=4; 1 | 2").unwrap();
        assert!((exact_influence(&or, &mu, 0).unwrap() - 0.5).abs() < 1e-12);

        let mut ex = ExampleOracle::new(&or, mu, 3).unwrap();
        let est = estimate_influence(&mut ex, 0, 0.1, 0.05).unwrap();
        assert!((est - 0.5).abs() < 0.1);
    }

    #[test]
    fn influence_estimator_unbiased() {
        let or = parse_dnf("n=4; 1 | 2").unwrap();
        let mu = ProductDistribution::new(vec![0.3, -0.2, 0.1, 0.0]).unwrap();
        let exact = exact_influence(&or, &mu, 0).unwrap();
        let base = ExampleOracle::new(&or, mu, 0).unwrap();
        let reps = 10_000u64;
        let (eta, delta) = (0.25, 0.25);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in 0..reps {
            let mut ex = base.clone_with_seed(t);
            let est = estimate_influence(&mut ex, 0, eta, delta).unwrap();
            sum += est;
            sumsq += est * est;
        }
        let mean = sum / reps as f64;
        let var = (sumsq / reps as f64 - mean * mean).max(0.0);
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se + 1e-12,
            "mean {mean} vs exact {exact}, se {se}"
        );
    }

    #[test]
    fn kkl_identity_uniform() {
        // I_i(f) = sum over masks containing i of fhat(a)^2, exhaustive n <= 10.
        let mu = ProductDistribution::uniform(10);
        for seed in 0..4 {
            let f = random_dnf(10, 3, 4, true, seed).unwrap();
            let spec = exact_uniform_transform(&f).unwrap().to_sparse(None);
            for i in 0..10 {
                let slice = spec.slice_containing(i);
                let weight: f64 = slice.entries().values().map(|v| v * v).sum();
                let inf = exact_influence(&f, &mu, i).unwrap();
                assert!((inf - weight).abs() < 1e-9, "i={i}: {inf} vs {weight}");
            }
        }
    }

    #[test]
    fn product_influence_identity() {
        // Brute-force determination of the product-basis analogue: for every
        // monotone f and c-bounded mu checked,
        //   I_{D_mu,i}(f) = ||fhat_mu(S_i)||_2^2 / (1 - mu_i^2).
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for seed in 0..4u64 {
            let n = 8u32;
            let f = random_dnf(n, 3, 4, true, seed).unwrap();
            let mu = ProductDistribution::new(
                (0..n).map(|_| rng.gen_range(-0.6..0.6)).collect(),
            )
            .unwrap();
            let spec = exact_mu_transform(&f, &mu, None).unwrap();
            for i in 0..n {
                let weight: f64 = spec
                    .slice_containing(i)
                    .entries()
                    .values()
                    .map(|v| v * v)
                    .sum();
                let kappa = 1.0 - mu.mu_i(i) * mu.mu_i(i);
                let inf = exact_influence(&f, &mu, i).unwrap();
                assert!(
                    (inf - weight / kappa).abs() < 1e-9,
                    "i={i}: {inf} vs {}",
                    weight / kappa
                );
            }
        }
    }

    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn example_oracle_basis_tag() {
        let f = random_dnf(5, 2, 3, false, 8).unwrap();
        let mu = ProductDistribution::new(vec![0.1; 5]).unwrap();
        let ex = ExampleOracle::new(&f, mu.clone(), 0).unwrap();
        assert!(Basis::Product(mu).compatible(&Basis::Product(ex.mu().clone())));
    }
}
