//! Heavy-coefficient recovery: KM over the uniform basis, EKM-style recovery
//! in a product basis, the Low Degree algorithm, and Greedy Feature
//! Construction for smoothed product distributions.
//!
//! Each algorithm runs against an oracle in one of two backends: `Sampled`
//! follows the stated access model, `ExactOracle` enumerates and transforms
//! (turning the probabilistic contract into a deterministic one for tests).

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::boolcore::{IndexMask, Point, MAX_EXACT_DIM};
use crate::dist::{Basis, ProductDistribution};
use crate::error::{Error, Result};
use crate::oracles::{ExampleOracle, MembershipOracle};
use crate::spectrum::{
    fwht_in_place, mu_transform_in_place, phi_sum_transform_in_place, SparseSpectrum,
};

/// Which access discipline a recovery run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Estimate from samples/queries per the access model.
    Sampled,
    /// Enumerate every point (through the oracle where there is one) and
    /// transform exactly.
    ExactOracle,
}

/// Parameters shared by all recovery operations.
#[derive(Debug, Clone)]
pub struct RecoveryParams {
    /// Heaviness threshold; coefficients of magnitude >= theta are promised.
    pub theta: f64,
    /// Confidence parameter.
    pub delta: f64,
    /// Restrict the search to degree <= d.
    pub degree_cap: Option<u32>,
    /// Restrict the search to masks inside this variable set.
    pub variable_set: Option<IndexMask>,
    pub backend: Backend,
    /// Seed for the run's own randomness (query points, estimator streams).
    pub seed: u64,
    /// Force the pairwise bucket-weight estimator even at exact-table scale.
    pub force_pairwise: bool,
}

impl RecoveryParams {
    pub fn new(theta: f64, delta: f64, backend: Backend) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidParam(format!("theta = {theta} not in (0,1]")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!("delta = {delta} not in (0,1)")));
        }
        Ok(RecoveryParams {
            theta,
            delta,
            degree_cap: None,
            variable_set: None,
            backend,
            seed: 0,
            force_pairwise: false,
        })
    }

    /// Output support cap: at most `4/theta^2` entries are reported.
    pub fn support_cap(&self) -> usize {
        (4.0 / (self.theta * self.theta)).ceil() as usize
    }

    fn scope_allows(&self, mask: u64) -> bool {
        self.degree_cap.map_or(true, |d| mask.count_ones() <= d)
            && self
                .variable_set
                .map_or(true, |vars| mask & !vars.bits() == 0)
    }
}

/// One visited node of the prefix-bucket tree, for audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketNode {
    /// Fixed low bits of the mask.
    pub prefix: u64,
    /// How many low coordinates the prefix fixes.
    pub len: u32,
    /// (Estimated) bucket weight `W(P) = sum over extensions of coeff^2`.
    pub weight: f64,
}

/// A recovery run's output plus its accounting.
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub spectrum: SparseSpectrum,
    /// Membership queries or examples consumed.
    pub access_count: u64,
    /// Visited prefix-tree nodes (KM/EKM) or candidates (GFC/Low Degree).
    pub trace: Vec<BucketNode>,
    /// Peak size of the candidate frontier (GFC).
    pub frontier_peak: usize,
}

// --- prefix-bucket machinery -------------------------------------------------

/// Per-level bucket weights from a dense coefficient table:
/// `levels[k][p] = sum_{a = p mod 2^k} c[a]^2`. `levels[n]` is `c^2` itself.
fn bucket_levels(coeffs: &[f64], n: u32) -> Vec<Vec<f64>> {
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(n as usize + 1);
    let mut cur: Vec<f64> = coeffs.iter().map(|c| c * c).collect();
    levels.push(cur.clone());
    for k in (0..n).rev() {
        let half = 1usize << k;
        let mut next = vec![0.0; half];
        for p in 0..half {
            next[p] = cur[p] + cur[p + half];
        }
        levels.push(next.clone());
        cur = next;
    }
    levels.reverse(); // levels[k] now has 2^k entries
    levels
}

/// Runs the recursive prefix search over a dense coefficient table (exact or
/// estimated). Prune below `theta^2/2` (ties kept); at full length keep
/// entries with `|value| >= theta/2` inside the search scope.
fn prefix_search(
    coeffs: &[f64],
    n: u32,
    p: &RecoveryParams,
    basis: Basis,
    trace: &mut Vec<BucketNode>,
) -> SparseSpectrum {
    let levels = bucket_levels(coeffs, n);
    let prune = p.theta * p.theta / 2.0;
    let mut out = SparseSpectrum::new(n, basis);
    // iterative DFS to keep the recursion shallow-friendly
    let mut stack = vec![(0u64, 0u32)];
    while let Some((prefix, len)) = stack.pop() {
        let w = levels[len as usize][prefix as usize];
        trace.push(BucketNode {
            prefix,
            len,
            weight: w,
        });
        if w < prune {
            continue;
        }
        if len == n {
            let v = coeffs[prefix as usize];
            if v.abs() >= p.theta / 2.0 && p.scope_allows(prefix) {
                out.insert(prefix, v);
            }
            continue;
        }
        stack.push((prefix | (1u64 << len), len + 1));
        stack.push((prefix, len + 1));
    }
    out.truncate_support(p.support_cap());
    out
}

/// Sample count for the accumulation-table estimator: every coefficient of
/// the table within `theta/4` simultaneously, by a union bound over all
/// `2^n` masks. The product-basis variant uses the refined (degree-free)
/// per-coefficient count.
fn table_sample_count(n: u32, theta: f64, delta: f64, product: bool) -> u64 {
    let per = if product { 128.0 } else { 32.0 };
    let union = (n as f64 + 2.0) * std::f64::consts::LN_2 + (1.0 / delta).ln();
    (per * union / (theta * theta)).ceil() as u64
}

/// Shared KM/EKM core over a membership oracle. `mu = None` means uniform.
fn km_core(
    mq: &mut MembershipOracle,
    mu: Option<&ProductDistribution>,
    p: &RecoveryParams,
) -> Result<RecoveryReport> {
    let n = mq.dim();
    if let Some(m) = mu {
        if m.dim() != n {
            return Err(Error::DimensionMismatch(m.dim(), n));
        }
    }
    if n > MAX_EXACT_DIM && !p.force_pairwise {
        return Err(Error::InvalidParam(
            "table-backed recovery needs n <= 24; use the pairwise estimator".to_string(),
        ));
    }
    let uniform = ProductDistribution::uniform(n);
    let dist = mu.unwrap_or(&uniform);
    let basis = match mu {
        Some(m) => Basis::Product(m.clone()),
        None => Basis::Uniform,
    };
    if p.force_pairwise {
        return km_pairwise(mq, dist, basis, p);
    }
    let size = 1usize << n;
    let mut table = vec![0.0f64; size];
    let access_before = mq.query_count();
    match p.backend {
        Backend::ExactOracle => {
            for x in Point::all(n) {
                table[x.bits() as usize] = mq.query(x)?;
            }
            match mu {
                Some(m) => mu_transform_in_place(&mut table, m),
                None => fwht_in_place(&mut table),
            }
        }
        Backend::Sampled => {
            let count = table_sample_count(n, p.theta, p.delta, mu.is_some());
            let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
            for _ in 0..count {
                let x = dist.sample_point(&mut rng);
                table[x.bits() as usize] += mq.query(x)?;
            }
            // sum of point masses -> empirical coefficient means
            phi_sum_transform_in_place(&mut table, dist);
            for v in table.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    let mut trace = Vec::new();
    let spectrum = prefix_search(&table, n, p, basis, &mut trace);
    Ok(RecoveryReport {
        spectrum,
        access_count: mq.query_count() - access_before,
        trace,
        frontier_peak: 0,
    })
}

// --- pairwise bucket-weight estimation (streaming, any n) --------------------

/// Inner partial mean `h_P(y) = E_z[f(zy) phi_P(z)]` estimated with `m`
/// prefix draws at a fixed suffix `y`.
fn inner_mean(
    mq: &mut MembershipOracle,
    dist: &ProductDistribution,
    rng: &mut ChaCha12Rng,
    y_bits: u64,
    len: u32,
    prefix: u64,
    m: u64,
) -> Result<f64> {
    let n = mq.dim();
    let a = IndexMask::new(n, prefix)?;
    let mut acc = 0.0;
    let low_mask = (1u64 << len) - 1;
    for _ in 0..m {
        let z = dist.sample_point(rng).bits() & low_mask;
        let x = Point::new(n, (y_bits & !low_mask) | z)?;
        acc += mq.query(x)? * dist.basis_eval_unchecked(a, x);
    }
    Ok(acc / m as f64)
}

/// `W(P) = E_y[h_P(y)^2]` estimated by the product of two independent inner
/// means per suffix draw (unbiased for the square).
fn bucket_weight_pairwise(
    mq: &mut MembershipOracle,
    dist: &ProductDistribution,
    rng: &mut ChaCha12Rng,
    prefix: u64,
    len: u32,
    m_outer: u64,
    m_inner: u64,
) -> Result<f64> {
    if len == 0 {
        return Ok(1.0); // boolean target: W(empty prefix) = E[f^2] = 1
    }
    let mut acc = 0.0;
    for _ in 0..m_outer {
        let y = dist.sample_point(rng).bits();
        let s1 = inner_mean(mq, dist, rng, y, len, prefix, m_inner)?;
        let s2 = inner_mean(mq, dist, rng, y, len, prefix, m_inner)?;
        acc += s1 * s2;
    }
    Ok(acc / m_outer as f64)
}

fn km_pairwise(
    mq: &mut MembershipOracle,
    dist: &ProductDistribution,
    basis: Basis,
    p: &RecoveryParams,
) -> Result<RecoveryReport> {
    let n = mq.dim();
    let theta = p.theta;
    // at most 8n/theta^2 surviving nodes across all levels; split delta
    let node_budget = (8.0 * n as f64 / (theta * theta)).ceil();
    let node_delta = p.delta / (2.0 * node_budget);
    let m_outer = (64.0 * (2.0 / node_delta).ln() / (theta * theta)).ceil() as u64;
    let m_inner = m_outer;
    let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
    let access_before = mq.query_count();
    let prune = theta * theta / 2.0;
    let mut trace = Vec::new();
    let mut out = SparseSpectrum::new(n, basis);
    let mut stack = vec![(0u64, 0u32)];
    let mut visited = 0f64;
    while let Some((prefix, len)) = stack.pop() {
        visited += 1.0;
        if visited > 4.0 * node_budget {
            return Err(Error::BudgetExhausted(
                "pairwise prefix tree exceeded its node budget".to_string(),
            ));
        }
        let w = bucket_weight_pairwise(mq, dist, &mut rng, prefix, len, m_outer, m_inner)?;
        trace.push(BucketNode {
            prefix,
            len,
            weight: w,
        });
        if w < prune {
            continue;
        }
        if len == n {
            if !p.scope_allows(prefix) {
                continue;
            }
            let a = IndexMask::new(n, prefix)?;
            let m = (32.0 * (2.0 / node_delta).ln() / (theta * theta)).ceil() as u64;
            let mut acc = 0.0;
            for _ in 0..m {
                let x = dist.sample_point(&mut rng);
                acc += mq.query(x)? * dist.basis_eval_unchecked(a, x);
            }
            let v = acc / m as f64;
            if v.abs() >= theta / 2.0 {
                out.insert(prefix, v);
            }
            continue;
        }
        stack.push((prefix | (1u64 << len), len + 1));
        stack.push((prefix, len + 1));
    }
    out.truncate_support(p.support_cap());
    Ok(RecoveryReport {
        spectrum: out,
        access_count: mq.query_count() - access_before,
        trace,
        frontier_peak: 0,
    })
}

// --- public operations -------------------------------------------------------

/// KM under the uniform distribution: with probability >= 1 - delta,
/// `||fhat - out||_inf <= theta` and `||out||_0 <= 4/theta^2`.
pub fn km_uniform(mq: &mut MembershipOracle, p: &RecoveryParams) -> Result<RecoveryReport> {
    km_core(mq, None, p)
}

/// EKM-style recovery in the mu-basis; same contract with mu-coefficients.
pub fn ekm_product(
    mq: &mut MembershipOracle,
    mu: &ProductDistribution,
    p: &RecoveryParams,
) -> Result<RecoveryReport> {
    if mu.is_uniform() {
        // basis coincidence: identical table, transform and tree
        let mut r = km_core(mq, None, p)?;
        let entries: Vec<(u64, f64)> = r
            .spectrum
            .entries()
            .iter()
            .map(|(&m, &v)| (m, v))
            .collect();
        let mut s = SparseSpectrum::new(mq.dim(), Basis::Product(mu.clone()));
        for (m, v) in entries {
            s.insert(m, v);
        }
        r.spectrum = s;
        return Ok(r);
    }
    km_core(mq, Some(mu), p)
}

/// The Low Degree algorithm: estimate every coefficient with mask inside
/// `variable_set` and degree <= `degree_cap`, keep `|estimate| >= theta/2`.
pub fn low_degree(ex: &mut ExampleOracle, p: &RecoveryParams) -> Result<RecoveryReport> {
    let n = ex.dim();
    let d = p.degree_cap.unwrap_or(n);
    let vars = match p.variable_set {
        Some(v) => v,
        None => IndexMask::new(n, if n == 64 { u64::MAX } else { (1u64 << n) - 1 })?,
    };
    let m_count = vars.degree();
    if d > m_count {
        return Err(Error::InvalidParam(format!(
            "degree cap {d} exceeds |variable_set| = {m_count}"
        )));
    }
    if m_count > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(
            "low_degree needs |variable_set| <= 24".to_string(),
        ));
    }
    let var_list: Vec<u32> = vars.vars().collect();
    let mu = ex.mu().clone();
    let basis = Basis::Product(mu.clone());
    // number of masks in scope, for the confidence split
    let mask_total: f64 = {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 0..=d.min(m_count) {
            if k > 0 {
                binom = binom * (m_count - k + 1) as f64 / k as f64;
            }
            acc += binom;
        }
        acc
    };
    let access_before = ex.sample_count();
    let msize = 1usize << m_count;
    let mut table = vec![0.0f64; msize];
    // the projected distribution over the M coordinates
    let mu_m = ProductDistribution::new(var_list.iter().map(|&j| mu.mu_i(j)).collect())?;
    match p.backend {
        Backend::ExactOracle => {
            let f = ex.target();
            let full = crate::spectrum::exact_mu_transform(f, &mu, Some(d))?;
            let mut out = SparseSpectrum::new(n, basis);
            for (&m, &v) in full.entries() {
                if p.scope_allows(m) && m & !vars.bits() == 0 && v.abs() >= p.theta / 2.0 {
                    out.insert(m, v);
                }
            }
            out.truncate_support(p.support_cap());
            return Ok(RecoveryReport {
                spectrum: out,
                access_count: 0,
                trace: Vec::new(),
                frontier_peak: 0,
            });
        }
        Backend::Sampled => {
            let per_delta = p.delta / mask_total;
            let count = crate::oracles::coefficient_sample_count(
                &mu,
                d,
                p.theta / 2.0,
                per_delta,
                true,
            );
            for _ in 0..count {
                let (x, fx) = ex.draw()?;
                // project x onto the M coordinates, in var_list order
                let mut bits = 0u64;
                for (k, &j) in var_list.iter().enumerate() {
                    if x.coord(j) > 0.0 {
                        bits |= 1u64 << k;
                    }
                }
                table[bits as usize] += fx;
            }
            phi_sum_transform_in_place(&mut table, &mu_m);
            for v in table.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    let mut out = SparseSpectrum::new(n, basis);
    let mut trace = Vec::new();
    for pm in 0..msize as u64 {
        if pm.count_ones() > d {
            continue;
        }
        // unproject the mask back to the full variable space
        let mut mask = 0u64;
        for (k, &j) in var_list.iter().enumerate() {
            if pm & (1u64 << k) != 0 {
                mask |= 1u64 << j;
            }
        }
        let v = table[pm as usize];
        trace.push(BucketNode {
            prefix: mask,
            len: n,
            weight: v * v,
        });
        if v.abs() >= p.theta / 2.0 {
            out.insert(mask, v);
        }
    }
    out.truncate_support(p.support_cap());
    Ok(RecoveryReport {
        spectrum: out,
        access_count: ex.sample_count() - access_before,
        trace,
        frontier_peak: 0,
    })
}

/// Greedy Feature Construction over a perturbed product distribution:
/// breadth-first growth of a downward-closed candidate family. A candidate
/// survives if its coefficient estimate (accuracy theta/4) has magnitude
/// >= theta/2; survivors are extended by every single variable. The total
/// number of candidates explored is capped at `16 * 2^d / theta^2`.
pub fn gfc(ex: &mut ExampleOracle, p: &RecoveryParams) -> Result<RecoveryReport> {
    let n = ex.dim();
    let d = p.degree_cap.unwrap_or(n);
    let mu = ex.mu().clone();
    let basis = Basis::Product(mu.clone());
    let theta = p.theta;
    let cap = (16.0 * (1u64 << d.min(40)) as f64 / (theta * theta)).ceil() as usize;
    let per_delta = p.delta / cap as f64;
    let access_before = ex.sample_count();

    // exact backend shares one dense transform across all candidates
    let exact = match p.backend {
        Backend::ExactOracle => {
            if n > MAX_EXACT_DIM {
                return Err(Error::InvalidParam("exact gfc needs n <= 24".to_string()));
            }
            Some(crate::spectrum::exact_mu_transform(ex.target(), &mu, None)?)
        }
        Backend::Sampled => None,
    };

    let estimate = |ex: &mut ExampleOracle, mask: u64| -> Result<f64> {
        match &exact {
            Some(s) => Ok(s.coeff(mask)),
            None => {
                let a = IndexMask::new(n, mask)?;
                crate::oracles::estimate_coefficient(ex, a, theta / 4.0, per_delta, true)
            }
        }
    };

    let mut out = SparseSpectrum::new(n, basis);
    let mut trace = Vec::new();
    let mut frontier: Vec<u64> = vec![0];
    let mut explored = 0usize;
    let mut frontier_peak = 1usize;
    while !frontier.is_empty() {
        let mut survivors = std::collections::BTreeSet::new();
        let mut level_degree = 0;
        for &mask in &frontier {
            explored += 1;
            if explored > cap {
                return Err(Error::BudgetExhausted(format!(
                    "gfc frontier cap {cap} exceeded (unlucky perturbation or theta too small)"
                )));
            }
            let v = estimate(ex, mask)?;
            trace.push(BucketNode {
                prefix: mask,
                len: mask.count_ones(),
                weight: v * v,
            });
            if v.abs() < theta / 2.0 {
                continue;
            }
            if p.scope_allows(mask) {
                out.insert(mask, v);
            }
            survivors.insert(mask);
            level_degree = mask.count_ones();
        }
        // a candidate enters the next level only if every one-bit-down parent
        // survived this one: keeps the explored family downward-closed, which
        // is exactly what heavy ancestors license.
        let mut next = std::collections::BTreeSet::new();
        if level_degree < d {
            let all_parents_survived = |ext: u64| -> bool {
                let mut bits = ext;
                while bits != 0 {
                    let low = bits & bits.wrapping_neg();
                    if !survivors.contains(&(ext & !low)) {
                        return false;
                    }
                    bits &= bits - 1;
                }
                true
            };
            for &mask in &survivors {
                for j in 0..n {
                    let ext = mask | (1u64 << j);
                    if ext != mask && !next.contains(&ext) && all_parents_survived(ext) {
                        next.insert(ext);
                    }
                }
            }
        }
        frontier_peak = frontier_peak.max(next.len());
        frontier = next.into_iter().collect();
    }
    out.truncate_support(p.support_cap());
    Ok(RecoveryReport {
        spectrum: out,
        access_count: ex.sample_count() - access_before,
        trace,
        frontier_peak,
    })
}
