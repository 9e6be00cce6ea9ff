//! End-to-end learners: the membership-query product-distribution DNF
//! learner, the smoothed-product learner, and the monotone-DNF learners
//! (uniform and product), plus exact and sampled error measurement and a
//! confidence-amplification wrapper.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::approx::{
    ptf_approx_prod, ApproxParams, ChainBackend, ChainStep, ClippedChain, ProperChain,
};
use crate::boolcore::{sign_pm, IndexMask, Point, MAX_EXACT_DIM};
use crate::dist::{Basis, ProductDistribution};
use crate::error::{Error, Result};
use crate::oracles::{estimate_influence, exact_influence, ExampleOracle, MembershipOracle};
use crate::recovery::{ekm_product, gfc, low_degree, Backend, RecoveryParams};
use crate::spectrum::{PointFn, SparseSpectrum};

/// Deterministic seed splitting: one master seed, labelled streams.
/// SplitMix64 finalizer over `master xor phi64 * stream`; stable across
/// versions, documented in the manifest format.
pub fn split_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct LearnerConfig {
    /// Term-count parameter of the target class.
    pub s: u32,
    pub epsilon: f64,
    pub delta: f64,
    /// Boundedness constant of the distribution family.
    pub c: f64,
    pub backend: Backend,
    pub seed: u64,
    /// Floor on the sampled influence-estimation accuracy. The literal
    /// gamma^2/3 accuracy is often below feasible sample budgets; estimates
    /// run at max(gamma^2/3, floor), with the substitution recorded in the
    /// hypothesis provenance. Zero means literal.
    pub influence_eta_floor: f64,
    /// Accuracy for the smoothed learner's per-coordinate mean estimation.
    pub mu_eta: f64,
}

impl LearnerConfig {
    pub fn new(s: u32, epsilon: f64, delta: f64, c: f64) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidParam("need s >= 1".to_string()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "need epsilon, delta in (0,1); got {epsilon}, {delta}"
            )));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidParam(format!("need c in (0,1]; got {c}")));
        }
        Ok(LearnerConfig {
            s,
            epsilon,
            delta,
            c,
            backend: Backend::ExactOracle,
            seed: 0,
            influence_eta_floor: 0.0,
            mu_eta: 0.01,
        })
    }
}

/// The derived parameter triple, a pure function of (s, epsilon, c, n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub epsilon_prime: f64,
    pub degree: u32,
    pub gamma: f64,
}

/// `epsilon' = epsilon/9`; `d = floor(log(s/epsilon') / log(2/(2-c)))`
/// capped at n; `gamma = epsilon' / (2 (2-c)^{d/2} s + 1)`. With these, a
/// spectrum gap of `5 gamma` on `B_d` yields error
/// `<= 5 epsilon' + 4 epsilon' = epsilon`.
pub fn derive_params(s: u32, epsilon: f64, c: f64, n: u32) -> Result<DerivedParams> {
    if s < 1 || !(epsilon > 0.0 && epsilon < 1.0) || !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "derive_params needs s >= 1, epsilon in (0,1), c in (0,1]; got s={s}, \
             epsilon={epsilon}, c={c}"
        )));
    }
    let ep = epsilon / 9.0;
    let ratio = (2.0 / (2.0 - c)).log2();
    let d_raw = ((s as f64 / ep).log2() / ratio).floor();
    let degree = if d_raw.is_finite() && d_raw >= 0.0 {
        (d_raw as u32).min(n)
    } else {
        n
    };
    let gamma = ep / (2.0 * (2.0 - c).powf(degree as f64 / 2.0) * s as f64 + 1.0);
    Ok(DerivedParams {
        epsilon_prime: ep,
        degree,
        gamma,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum HypothesisKind {
    /// sign of a clipped-update chain.
    Clipped(ClippedChain),
    /// sign of a proper chain's polynomial.
    Proper(ProperChain),
}

/// Oracle accesses consumed while building a hypothesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessCounts {
    pub examples: u64,
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub learner: &'static str,
    pub kind: HypothesisKind,
    pub params: DerivedParams,
    /// Ambient input dimension (the chain may live on fewer variables).
    pub n: u32,
    /// Surviving variable set of the MDNF learners, as a bit mask.
    pub variable_set: Option<u64>,
    /// When present, the chain is over these original variables, in order;
    /// classification projects the input first (attribute efficiency: the
    /// construction cost depends on the survivor count, not on n).
    pub projection: Option<Vec<u32>>,
    /// The smoothed learner's estimated means.
    pub mu_estimate: Option<Vec<f64>>,
    pub access: AccessCounts,
    /// Construction trace length (spectrum-matching steps).
    pub steps: usize,
}

impl Hypothesis {
    pub fn dim(&self) -> u32 {
        self.n
    }

    fn chain_point(&self, x: Point) -> Point {
        match &self.projection {
            None => x,
            Some(vars) => {
                let mut bits = 0u64;
                for (j, &i) in vars.iter().enumerate() {
                    if x.bits() >> i & 1 == 1 {
                        bits |= 1u64 << j;
                    }
                }
                Point::new(vars.len() as u32, bits).expect("projected bits fit")
            }
        }
    }

    /// The real-valued bounded function `g` behind the classifier.
    pub fn real_value(&self, x: Point) -> f64 {
        let p = self.chain_point(x);
        match &self.kind {
            HypothesisKind::Clipped(c) => c.value(p),
            HypothesisKind::Proper(pr) => pr.value(p),
        }
    }

    /// The boolean classifier `sign(g(x))`.
    pub fn classify(&self, x: Point) -> f64 {
        let p = self.chain_point(x);
        match &self.kind {
            HypothesisKind::Clipped(c) => sign_pm(c.value(p)),
            HypothesisKind::Proper(pr) => pr.classify(p),
        }
    }
}

fn chain_params(dp: &DerivedParams, delta: f64, seed: u64) -> Result<ApproxParams> {
    // Phase 2 always uses the exact chain-spectrum backend: the chain is the
    // learner's own construction, so transforming it is internal computation,
    // not target access.
    let mut ap = ApproxParams::new(dp.gamma, delta, dp.degree, ChainBackend::Exact)?;
    ap.seed = seed;
    Ok(ap)
}

/// DNF learner with membership queries over a known c-bounded product
/// distribution: collect gamma-accurate heavy mu-coefficients up to degree d,
/// then match the spectrum with a clipped chain; return sign(g). Succeeds
/// (error <= epsilon) with probability >= 1/2 per run.
pub fn learn_dnf_mq_prod(
    mq: &mut MembershipOracle,
    mu: &ProductDistribution,
    cfg: &LearnerConfig,
) -> Result<Hypothesis> {
    let n = mq.dim();
    let dp = derive_params(cfg.s, cfg.epsilon, cfg.c, n)?;
    let queries_before = mq.query_count();
    let mut rp = RecoveryParams::new(dp.gamma, 0.25, cfg.backend)?;
    rp.degree_cap = Some(dp.degree);
    rp.seed = split_seed(cfg.seed, 1);
    let rep = ekm_product(mq, mu, &rp)?;
    let ap = chain_params(&dp, 0.25, split_seed(cfg.seed, 2))?;
    let (chain, steps) = ptf_approx_prod(&rep.spectrum, mu, &ap)?;
    Ok(Hypothesis {
        learner: "dnf-mq-prod",
        kind: HypothesisKind::Clipped(chain),
        params: dp,
        n,
        projection: None,
        variable_set: None,
        mu_estimate: None,
        access: AccessCounts {
            examples: 0,
            queries: mq.query_count() - queries_before,
        },
        steps: steps.len(),
    })
}

/// Per-coordinate mean estimation for the smoothed learner: empirical means
/// of `eta`-accuracy (union bound over coordinates), clamped into the
/// c-bounded cube.
pub fn estimate_mu(
    ex: &mut ExampleOracle,
    eta: f64,
    delta: f64,
    c: f64,
) -> Result<ProductDistribution> {
    let n = ex.dim();
    if !(eta > 0.0 && eta < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "need eta, delta in (0,1); got {eta}, {delta}"
        )));
    }
    let count = (2.0 * (2.0 * n as f64 / delta).ln() / (eta * eta)).ceil() as u64;
    let mut sums = vec![0.0f64; n as usize];
    for _ in 0..count {
        let (x, _) = ex.draw()?;
        for (i, s) in sums.iter_mut().enumerate() {
            *s += x.coord(i as u32);
        }
    }
    let lim = 1.0 - c;
    let mu: Vec<f64> = sums
        .iter()
        .map(|s| (s / count as f64).clamp(-lim, lim))
        .collect();
    ProductDistribution::new(mu)
}

/// Smoothed-model DNF learner: the distribution's means are unknown
/// (perturbed around a hidden center), so phase 0 estimates them from
/// examples and phase 1 replaces EKM with the greedy downward-closed search.
pub fn learn_dnf_smoothed(ex: &mut ExampleOracle, cfg: &LearnerConfig) -> Result<Hypothesis> {
    let n = ex.dim();
    let dp = derive_params(cfg.s, cfg.epsilon, cfg.c, n)?;
    let samples_before = ex.sample_count();
    let mu_hat = estimate_mu(ex, cfg.mu_eta, 0.125, cfg.c)?;
    let mu_samples = ex.sample_count() - samples_before;

    // all further access runs against the target through the estimated-mean
    // lens; with eta small the phi_{mu-hat} coefficients track the true ones
    let mut lens = ExampleOracle::new(ex.target(), mu_hat.clone(), split_seed(cfg.seed, 3))?;
    let mut rp = RecoveryParams::new(dp.gamma, 0.125, cfg.backend)?;
    rp.degree_cap = Some(dp.degree);
    rp.seed = split_seed(cfg.seed, 4);
    let rep = gfc(&mut lens, &rp)?;
    let ap = chain_params(&dp, 0.125, split_seed(cfg.seed, 5))?;
    let (chain, steps) = ptf_approx_prod(&rep.spectrum, &mu_hat, &ap)?;
    Ok(Hypothesis {
        learner: "dnf-smoothed",
        kind: HypothesisKind::Clipped(chain),
        params: dp,
        n,
        projection: None,
        variable_set: None,
        mu_estimate: Some(mu_hat.mu().to_vec()),
        access: AccessCounts {
            examples: mu_samples + lens.sample_count(),
            queries: 0,
        },
        steps: steps.len(),
    })
}

/// Surviving variables given influence estimates: keep i when
/// `estimate >= threshold`. Public so exact influences can be injected.
pub fn survivors_from_influences(estimates: &[f64], threshold: f64) -> u64 {
    let mut m = 0u64;
    for (i, &e) in estimates.iter().enumerate() {
        if e >= threshold {
            m |= 1u64 << i;
        }
    }
    m
}

/// The Th 5.3 cap on the surviving set size.
pub fn survivor_cap(s: u32, gamma: f64) -> f64 {
    s as f64 * (3.0 * s as f64 / (gamma * gamma)).log2()
}

struct MdnfPhase1 {
    variable_set: u64,
}

/// Influence-based variable elimination. `accuracy` is the estimator
/// accuracy; `threshold` the survival cutoff on the estimate.
fn mdnf_eliminate(
    ex: &mut ExampleOracle,
    cfg: &LearnerConfig,
    dp: &DerivedParams,
    accuracy: f64,
    threshold: f64,
) -> Result<MdnfPhase1> {
    let n = ex.dim();
    let mut estimates = Vec::with_capacity(n as usize);
    match cfg.backend {
        Backend::ExactOracle => {
            for i in 0..n {
                estimates.push(exact_influence(ex.target(), ex.mu(), i)?);
            }
        }
        Backend::Sampled => {
            let eta = accuracy.max(cfg.influence_eta_floor);
            let per_delta = 0.25 / n as f64;
            let mut src = ex.clone_with_seed(split_seed(cfg.seed, 6));
            for i in 0..n {
                estimates.push(estimate_influence(&mut src, i, eta, per_delta)?);
            }
        }
    }
    let variable_set = survivors_from_influences(&estimates, threshold);
    let cap = survivor_cap(cfg.s, dp.gamma);
    if (variable_set.count_ones() as f64) > cap {
        return Err(Error::ContractViolation(format!(
            "surviving set size {} exceeds s log2(3s/gamma^2) = {cap:.2}: influence \
             estimates broke their accuracy contract",
            variable_set.count_ones()
        )));
    }
    Ok(MdnfPhase1 { variable_set })
}

fn mdnf_finish(
    ex: &mut ExampleOracle,
    cfg: &LearnerConfig,
    dp: DerivedParams,
    phase1: MdnfPhase1,
    learner: &'static str,
    samples_before: u64,
) -> Result<Hypothesis> {
    let n = ex.dim();
    let vars = IndexMask::new(n, phase1.variable_set)?;
    let mut rp = RecoveryParams::new(dp.gamma, 0.125, cfg.backend)?;
    rp.degree_cap = Some(dp.degree.min(vars.degree()));
    rp.variable_set = Some(vars);
    rp.seed = split_seed(cfg.seed, 7);
    let rep = low_degree(ex, &rp)?;

    // attribute efficiency: build the chain over the survivors only and
    // project inputs at classification time, so phase 2 cost depends on |M|
    let var_list: Vec<u32> = (0..n).filter(|i| phase1.variable_set >> i & 1 == 1).collect();
    let m = (var_list.len() as u32).max(1);
    let compress = |mask: u64| -> u64 {
        let mut cm = 0u64;
        for (j, &i) in var_list.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cm |= 1u64 << j;
            }
        }
        cm
    };
    let mu_m = ProductDistribution::new(
        var_list
            .iter()
            .map(|&i| ex.mu().mu_i(i))
            .chain(std::iter::repeat(0.0))
            .take(m as usize)
            .collect(),
    )?;
    let target_basis = match rep.spectrum.basis() {
        Basis::Uniform => Basis::Uniform,
        Basis::Product(_) => Basis::Product(mu_m.clone()),
    };
    let mut target = SparseSpectrum::new(m, target_basis);
    for (&mask, &v) in rep.spectrum.entries() {
        target.insert(compress(mask), v);
    }
    let ap = chain_params(&dp, 0.125, split_seed(cfg.seed, 8))?;
    let (chain, steps) = ptf_approx_prod(&target, &mu_m, &ap)?;
    Ok(Hypothesis {
        learner,
        kind: HypothesisKind::Clipped(chain),
        params: dp,
        n,
        projection: Some(var_list),
        variable_set: Some(phase1.variable_set),
        mu_estimate: None,
        access: AccessCounts {
            examples: ex.sample_count() - samples_before,
            queries: 0,
        },
        steps: steps.len(),
    })
}

/// Monotone-DNF learner from uniform examples: estimate every influence to
/// accuracy gamma^2/3, eliminate variables whose estimate falls below
/// 2 gamma^2 / 3, then run the low-degree collection over the survivors and
/// match the spectrum.
pub fn learn_mdnf_uniform(ex: &mut ExampleOracle, cfg: &LearnerConfig) -> Result<Hypothesis> {
    if !ex.mu().is_uniform() {
        return Err(Error::InvalidParam(
            "learn_mdnf_uniform needs a uniform example oracle".to_string(),
        ));
    }
    let samples_before = ex.sample_count();
    let dp = derive_params(cfg.s, cfg.epsilon, 1.0, ex.dim())?;
    let g2 = dp.gamma * dp.gamma;
    let phase1 = mdnf_eliminate(ex, cfg, &dp, g2 / 3.0, 2.0 * g2 / 3.0)?;
    mdnf_finish(ex, cfg, dp, phase1, "mdnf-uniform", samples_before)
}

/// Product-distribution monotone-DNF learner. The influence threshold is
/// scaled by `c' = 4c(1-c)` — both the accuracy and the cutoff, following
/// the stated product-version constants literally; the uniform and product
/// constants are asymmetric in the underlying statements, and either choice
/// is sound because the verified identity
/// `sum of squared mu-coefficients over S_i = (1 - mu_i^2) * influence`
/// makes the spectral weight a lower bound on the influence.
pub fn learn_mdnf_prod(ex: &mut ExampleOracle, cfg: &LearnerConfig) -> Result<Hypothesis> {
    if ex.mu().is_uniform() {
        // coincidence: identical trace to the uniform learner
        let mut h = learn_mdnf_uniform(ex, cfg)?;
        h.learner = "mdnf-prod";
        return Ok(h);
    }
    let samples_before = ex.sample_count();
    let dp = derive_params(cfg.s, cfg.epsilon, cfg.c, ex.dim())?;
    let c_prime = 4.0 * cfg.c * (1.0 - cfg.c);
    if c_prime <= 0.0 {
        return Err(Error::InvalidParam(
            "c' = 4c(1-c) degenerates at c = 1 with a non-uniform mu".to_string(),
        ));
    }
    let g2 = dp.gamma * dp.gamma;
    let phase1 = mdnf_eliminate(ex, cfg, &dp, c_prime * g2 / 3.0, c_prime * g2 / 3.0)?;
    mdnf_finish(ex, cfg, dp, phase1, "mdnf-prod", samples_before)
}

// --- error measurement -------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorMode {
    /// Full enumeration under the distribution; n <= 24.
    Exact,
    /// Empirical error over fresh samples; band reported as 3/sqrt(N).
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub value: f64,
    /// Half-width of the reported confidence band (0 for exact).
    pub band: f64,
}

/// `Pr_mu[f != h]`.
pub fn measure_error(
    h: &Hypothesis,
    f: &dyn PointFn,
    mu: &ProductDistribution,
    mode: ErrorMode,
) -> Result<ErrorEstimate> {
    let n = f.dim();
    if n != h.dim() || n != mu.dim() {
        return Err(Error::DimensionMismatch(n, h.dim().min(mu.dim())));
    }
    match mode {
        ErrorMode::Exact => {
            if n > MAX_EXACT_DIM {
                return Err(Error::InvalidParam(
                    "exact error measurement needs n <= 24".to_string(),
                ));
            }
            let mut err = 0.0;
            for x in Point::all(n) {
                if h.classify(x) != f.value(x) {
                    err += mu.point_probability(x)?;
                }
            }
            Ok(ErrorEstimate { value: err, band: 0.0 })
        }
        ErrorMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParam("need samples >= 1".to_string()));
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut bad = 0u64;
            for _ in 0..samples {
                let x = mu.sample_point(&mut rng);
                if h.classify(x) != f.value(x) {
                    bad += 1;
                }
            }
            Ok(ErrorEstimate {
                value: bad as f64 / samples as f64,
                band: 3.0 / (samples as f64).sqrt(),
            })
        }
    }
}

/// Confidence amplification: each learner succeeds with probability >= 1/2
/// per run, so repeat with independent seeds and return the first hypothesis
/// whose measured error clears epsilon plus the measurement band;
/// `ceil(log2(1/delta))` repetitions. Returns the best-seen hypothesis with
/// its measurement when none clears the bar.
pub fn amplify<R>(
    cfg: &LearnerConfig,
    f: &dyn PointFn,
    mu: &ProductDistribution,
    mode: ErrorMode,
    mut run: R,
) -> Result<(Hypothesis, ErrorEstimate)>
where
    R: FnMut(u64) -> Result<Hypothesis>,
{
    let reps = ((1.0 / cfg.delta).log2().ceil() as u64).max(1);
    let mut best: Option<(Hypothesis, ErrorEstimate)> = None;
    for r in 0..reps {
        let h = run(split_seed(cfg.seed, 100 + r))?;
        let mode_r = match mode {
            ErrorMode::Exact => ErrorMode::Exact,
            ErrorMode::Sampled { samples, seed } => ErrorMode::Sampled {
                samples,
                seed: split_seed(seed, 200 + r),
            },
        };
        let e = measure_error(&h, f, mu, mode_r)?;
        if e.value <= cfg.epsilon + e.band {
            return Ok((h, e));
        }
        if best.as_ref().map_or(true, |(_, b)| e.value < b.value) {
            best = Some((h, e));
        }
    }
    Ok(best.expect("reps >= 1"))
}

/// Replay a construction trace for the manifest (step count, final gap).
pub fn trace_summary(steps: &[ChainStep]) -> (usize, f64) {
    let max_diff = steps.iter().map(|s| s.diff).fold(0.0f64, f64::max);
    (steps.len(), max_diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolcore::{parse_dnf, random_dnf, DnfFormula, Term};
    use crate::dist::perturb;
    use crate::spectrum::{exact_mu_transform, exact_uniform_transform, FnTarget};

    #[test]
    fn parameter_trace() {
        // s = 4, epsilon = 0.18, c = 1
        let dp = derive_params(4, 0.18, 1.0, 20).unwrap();
        assert!((dp.epsilon_prime - 0.02).abs() < 1e-15);
        assert_eq!(dp.degree, 7); // floor(log2 200)
        assert!((dp.gamma - 0.02 / 9.0).abs() < 1e-15);
        // degree caps at n
        let dp2 = derive_params(4, 0.18, 1.0, 5).unwrap();
        assert_eq!(dp2.degree, 5);
    }

    #[test]
    fn mq_single_literal_exact_zero_error() {
        let f = parse_dnf("n=6; 1").unwrap();
        let mu = ProductDistribution::uniform(6);
        let cfg = LearnerConfig::new(1, 0.2, 0.1, 1.0).unwrap();
        let mut mq = MembershipOracle::new(&f);
        let h = learn_dnf_mq_prod(&mut mq, &mu, &cfg).unwrap();
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(h.access.queries > 0);
    }

    #[test]
    fn mq_exact_backend_deterministic_bound() {
        // with exact backends every probabilistic step is replaced by its
        // oracle, so error <= epsilon deterministically
        let mu = ProductDistribution::new(vec![0.3, -0.4, 0.0, 0.2, -0.1, 0.5, 0.25, -0.3, 0.0, 0.1])
            .unwrap();
        for seed in 0..5 {
            let f = random_dnf(10, 3, 4, false, seed).unwrap();
            let mut cfg = LearnerConfig::new(3, 0.2, 0.1, 0.5).unwrap();
            cfg.seed = seed;
            let mut mq = MembershipOracle::new(&f);
            let h = learn_dnf_mq_prod(&mut mq, &mu, &cfg).unwrap();
            let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
            assert!(e.value <= 0.2, "seed {seed}: error {}", e.value);
        }
    }

    #[test]
    fn mq_sampled_backend_trial() {
        let f = random_dnf(10, 2, 3, false, 7).unwrap();
        let mu = ProductDistribution::uniform(10);
        let mut cfg = LearnerConfig::new(2, 0.2, 0.1, 1.0).unwrap();
        cfg.backend = Backend::Sampled;
        cfg.seed = 11;
        let mut mq = MembershipOracle::new(&f);
        let h = learn_dnf_mq_prod(&mut mq, &mu, &cfg).unwrap();
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
        assert!(e.value <= 0.2, "error {}", e.value);
    }

    #[test]
    fn error_is_bounded_by_l1_gap() {
        // Pr[f != sign(g)] <= E|f - g| for the real-valued hypothesis
        let f = random_dnf(8, 2, 3, false, 3).unwrap();
        let mu = ProductDistribution::uniform(8);
        let cfg = LearnerConfig::new(2, 0.3, 0.1, 1.0).unwrap();
        let mut mq = MembershipOracle::new(&f);
        let h = learn_dnf_mq_prod(&mut mq, &mu, &cfg).unwrap();
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
        let mut l1 = 0.0;
        for x in Point::all(8) {
            l1 += mu.point_probability(x).unwrap() * (f.value(x) - h.real_value(x)).abs();
        }
        assert!(e.value <= l1 + 1e-12);
    }

    #[test]
    fn mdnf_uniform_small_or() {
        let f = parse_dnf("n=12; 1 | 2").unwrap();
        let mut ex = ExampleOracle::new(&f, ProductDistribution::uniform(12), 5).unwrap();
        let cfg = LearnerConfig::new(2, 0.15, 0.1, 1.0).unwrap();
        let h = learn_mdnf_uniform(&mut ex, &cfg).unwrap();
        let m = h.variable_set.unwrap();
        assert_eq!(m & 0b11, 0b11, "relevant variables must survive");
        assert!((m.count_ones() as f64) <= survivor_cap(2, h.params.gamma));
        let e = measure_error(&h, &f, ex.mu(), ErrorMode::Exact).unwrap();
        assert!(e.value <= 0.15, "error {}", e.value);
    }

    #[test]
    fn mdnf_elimination_soundness_injection() {
        // no variable with exact max_{a in S_i} |fhat(a)| > gamma may be
        // eliminated when estimates meet their contract: inject exact
        // influences and check against the exact spectrum
        for seed in 0..10 {
            let f = random_dnf(10, 3, 3, true, seed).unwrap();
            let dp = derive_params(3, 0.15, 1.0, 10).unwrap();
            let exact: Vec<f64> = (0..10)
                .map(|i| exact_influence(&f, &ProductDistribution::uniform(10), i).unwrap())
                .collect();
            let m = survivors_from_influences(&exact, 2.0 * dp.gamma * dp.gamma / 3.0);
            let spec = exact_uniform_transform(&f).unwrap().to_sparse(None);
            for i in 0..10u32 {
                if m >> i & 1 == 1 {
                    continue;
                }
                let worst = spec
                    .entries()
                    .iter()
                    .filter(|(&a, _)| a >> i & 1 == 1)
                    .map(|(_, &v)| v.abs())
                    .fold(0.0f64, f64::max);
                assert!(
                    worst <= dp.gamma,
                    "seed {seed}: eliminated variable {i} with coefficient {worst}"
                );
            }
        }
    }

    #[test]
    fn mdnf_prod_uniform_coincides() {
        let f = parse_dnf("n=8; 1 | 2 & 3").unwrap();
        let mu = ProductDistribution::uniform(8);
        let cfg = LearnerConfig::new(2, 0.15, 0.1, 1.0).unwrap();
        let mut ex1 = ExampleOracle::new(&f, mu.clone(), 5).unwrap();
        let h1 = learn_mdnf_uniform(&mut ex1, &cfg).unwrap();
        let mut ex2 = ExampleOracle::new(&f, mu.clone(), 5).unwrap();
        let h2 = learn_mdnf_prod(&mut ex2, &cfg).unwrap();
        assert_eq!(h1.kind, h2.kind);
        assert_eq!(h1.variable_set, h2.variable_set);
        assert_eq!(h2.learner, "mdnf-prod");
    }

    #[test]
    fn mdnf_prod_small_instance() {
        // f = x1 or (x2 and x3), c = 0.5
        let f = parse_dnf("n=10; 1 | 2 & 3").unwrap();
        let mu = ProductDistribution::new(vec![0.25, -0.5, 0.4, 0.0, 0.5, -0.25, 0.3, 0.1, -0.4, 0.2])
            .unwrap();
        let cfg = LearnerConfig::new(2, 0.15, 0.1, 0.5).unwrap();
        let mut ex = ExampleOracle::new(&f, mu.clone(), 21).unwrap();
        let h = learn_mdnf_prod(&mut ex, &cfg).unwrap();
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
        assert!(e.value <= 0.15, "error {}", e.value);
        // eliminated variables carry no mu-coefficient above gamma
        let m = h.variable_set.unwrap();
        let spec = exact_mu_transform(&f, &mu, None).unwrap();
        for i in 0..10u32 {
            if m >> i & 1 == 1 {
                continue;
            }
            for (&a, &v) in spec.entries() {
                if a >> i & 1 == 1 {
                    assert!(v.abs() <= h.params.gamma, "var {i} mask {a:#x} coeff {v}");
                }
            }
        }
    }

    #[test]
    fn smoothed_constant_target() {
        let f = FnTarget::new(8, |_| 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mu = perturb(&[0.0; 8], 0.25, &mut rng).unwrap();
        let mut ex = ExampleOracle::new(&f, mu.clone(), 17).unwrap();
        let mut cfg = LearnerConfig::new(1, 0.15, 0.1, 0.25).unwrap();
        cfg.seed = 4;
        let h = learn_dnf_smoothed(&mut ex, &cfg).unwrap();
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn smoothed_two_term_trials() {
        let f = parse_dnf("n=10; 1 & 2 | 3 & 4").unwrap();
        let mut hits = 0;
        for seed in 0..10u64 {
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + seed);
            let mu = perturb(&[0.0; 10], 0.25, &mut rng).unwrap();
            let mut ex = ExampleOracle::new(&f, mu.clone(), seed).unwrap();
            let mut cfg = LearnerConfig::new(2, 0.15, 0.1, 0.25).unwrap();
            cfg.seed = seed;
            let h = learn_dnf_smoothed(&mut ex, &cfg).unwrap();
            let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
            if e.value <= 0.15 {
                hits += 1;
            }
        }
        assert!(hits >= 9, "only {hits}/10 trials within epsilon");
    }

    #[test]
    fn smoothed_determinism() {
        let f = parse_dnf("n=8; 1 | 2 & 3").unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mu = perturb(&[0.0; 8], 0.25, &mut rng).unwrap();
        let mut cfg = LearnerConfig::new(2, 0.2, 0.1, 0.25).unwrap();
        cfg.seed = 13;
        let mut ex1 = ExampleOracle::new(&f, mu.clone(), 31).unwrap();
        let h1 = learn_dnf_smoothed(&mut ex1, &cfg).unwrap();
        let mut ex2 = ExampleOracle::new(&f, mu.clone(), 31).unwrap();
        let h2 = learn_dnf_smoothed(&mut ex2, &cfg).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn measure_error_trivial_cases() {
        // h identically +1 against f = x1 under uniform: error 1/2
        let mut t = crate::spectrum::SparseSpectrum::new(6, crate::dist::Basis::Uniform);
        t.insert(0, 1.0);
        let p = ApproxParams::new(0.1, 0.1, 6, ChainBackend::Exact).unwrap();
        let (chain, _) = crate::approx::ptf_approx(&t, &p).unwrap();
        let h = Hypothesis {
            learner: "manual",
            kind: HypothesisKind::Clipped(chain),
            params: derive_params(1, 0.1, 1.0, 6).unwrap(),
            n: 6,
            projection: None,
            variable_set: None,
            mu_estimate: None,
            access: AccessCounts::default(),
            steps: 0,
        };
        let f = FnTarget::new(6, |x: Point| x.coord(0));
        let mu = ProductDistribution::uniform(6);
        let e = measure_error(&h, &f, &mu, ErrorMode::Exact).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
        // sampled agrees within the band
        let es = measure_error(
            &h,
            &f,
            &mu,
            ErrorMode::Sampled {
                samples: 100_000,
                seed: 1,
            },
        )
        .unwrap();
        assert!((es.value - 0.5).abs() <= es.band);
    }

    #[test]
    fn amplify_returns_passing_hypothesis() {
        let f = random_dnf(8, 2, 3, false, 40).unwrap();
        let mu = ProductDistribution::uniform(8);
        let mut cfg = LearnerConfig::new(2, 0.2, 0.05, 1.0).unwrap();
        cfg.seed = 77;
        let (h, e) = amplify(&cfg, &f, &mu, ErrorMode::Exact, |seed| {
            let mut mq = MembershipOracle::new(&f);
            let mut c = cfg.clone();
            c.seed = seed;
            learn_dnf_mq_prod(&mut mq, &mu, &c)
        })
        .unwrap();
        assert!(e.value <= cfg.epsilon);
        assert_eq!(h.learner, "dnf-mq-prod");
    }

    #[test]
    fn monotone_target_helper() {
        // random_dnf(monotone = true) produces monotone formulas: raising any
        // coordinate never lowers the value
        for seed in 0..5 {
            let f: DnfFormula = random_dnf(8, 3, 3, true, seed).unwrap();
            for t in f.terms() {
                let t: &Term = t;
                assert_eq!(t.negatives().bits(), 0);
            }
        }
    }
}
