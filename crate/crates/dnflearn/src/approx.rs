//! Spectrum-matching construction: build a bounded function whose low-degree
//! coefficients match a target vector — the clipped-update chain (improper)
//! and the proper single-projection variant — plus the potential-function
//! instrumentation used in their analyses.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::boolcore::{clip_unit, sign_pm, IndexMask, Point, SparsePolynomial, MAX_EXACT_DIM};
use crate::dist::{Basis, ProductDistribution};
use crate::error::{Error, Result};
use crate::oracles::MembershipOracle;
use crate::recovery::{ekm_product, km_uniform, Backend, RecoveryParams};
use crate::spectrum::{
    fwht_in_place, mu_transform_in_place, PointFn, SparseSpectrum,
};

/// How a construction run reads back its own chain's spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainBackend {
    /// Transform the chain's value table exactly (n <= 24); deterministic.
    Exact,
    /// Run KM/EKM against the chain as a membership oracle, per the access
    /// model, with per-iteration confidence split.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct ApproxParams {
    pub gamma: f64,
    pub delta: f64,
    /// Degree bound d: only B_d coefficients are matched.
    pub degree: u32,
    pub backend: ChainBackend,
    pub seed: u64,
}

impl ApproxParams {
    pub fn new(gamma: f64, delta: f64, degree: u32, backend: ChainBackend) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "need gamma, delta in (0,1); got {gamma}, {delta}"
            )));
        }
        Ok(ApproxParams {
            gamma,
            delta,
            degree,
            backend,
            seed: 0,
        })
    }

    /// Step cap of the improper chain.
    pub fn improper_step_cap(&self) -> usize {
        (4.0 / (7.0 * self.gamma * self.gamma)).ceil() as usize
    }

    /// Step cap of the proper variant.
    pub fn proper_step_cap(&self) -> usize {
        (1.0 / (2.0 * self.gamma * self.gamma)).ceil() as usize
    }
}

/// One construction step, for audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStep {
    pub mask: u64,
    /// The appended coefficient (improper) or +/- gamma (proper).
    pub coefficient: f64,
    /// The violation |g_t(a) - target(a)| that triggered the step.
    pub diff: f64,
    /// Exact potential E(t) before the step, when recorded.
    pub potential: Option<f64>,
}

/// The improper construction's output: `h_0 = 0`;
/// `h_{t+1}(x) = P_1(h_t(x) + c_t * basis_{a_t}(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedChain {
    n: u32,
    basis: Basis,
    updates: Vec<(u64, f64)>,
}

impl ClippedChain {
    pub fn new(n: u32, basis: Basis) -> Self {
        ClippedChain {
            n,
            basis,
            updates: Vec::new(),
        }
    }

    /// Rebuild a chain from an explicit update list (masks validated
    /// against `n`, and a product basis against its dimension).
    pub fn from_updates(n: u32, basis: Basis, updates: Vec<(u64, f64)>) -> Result<Self> {
        if let Basis::Product(mu) = &basis {
            if mu.dim() != n {
                return Err(Error::DimensionMismatch(mu.dim(), n));
            }
        }
        for &(mask, _) in &updates {
            IndexMask::new(n, mask)?;
        }
        Ok(ClippedChain { n, basis, updates })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn updates(&self) -> &[(u64, f64)] {
        &self.updates
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    fn basis_value(&self, mask: u64, x: Point) -> f64 {
        let a = IndexMask::new(self.n, mask).expect("chain mask in range");
        match &self.basis {
            Basis::Uniform => a.parity_at(x),
            Basis::Product(mu) => mu.basis_eval_unchecked(a, x),
        }
    }
}

impl PointFn for ClippedChain {
    fn dim(&self) -> u32 {
        self.n
    }

    /// O(T * n) per point: replay the update-then-clip chain.
    fn value(&self, x: Point) -> f64 {
        let mut h = 0.0;
        for &(mask, c) in &self.updates {
            h = clip_unit(h + c * self.basis_value(mask, x));
        }
        h
    }
}

/// The proper construction's output: `g' = gamma * sum of signed basis
/// functions` with integer multiplicities; hypothesis `P_1(g')`, classifier
/// `sign(g')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProperChain {
    n: u32,
    basis: Basis,
    gamma: f64,
    counts: BTreeMap<u64, i64>,
}

impl ProperChain {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Integer multiplicities: `g'` coefficient at `a` is `gamma * count`.
    pub fn counts(&self) -> &BTreeMap<u64, i64> {
        &self.counts
    }

    /// `||p||_1` of the integer vector.
    pub fn integer_weight(&self) -> i64 {
        self.counts.values().map(|c| c.abs()).sum()
    }

    pub fn gprime_polynomial(&self) -> Result<SparsePolynomial> {
        let mut p = SparsePolynomial::new(self.n, self.basis.clone())?;
        for (&m, &c) in &self.counts {
            p.set(IndexMask::new(self.n, m)?, self.gamma * c as f64)?;
        }
        Ok(p)
    }

    pub fn gprime_value(&self, x: Point) -> f64 {
        let mut acc = 0.0;
        for (&mask, &c) in &self.counts {
            let a = IndexMask::new(self.n, mask).expect("chain mask in range");
            let b = match &self.basis {
                Basis::Uniform => a.parity_at(x),
                Basis::Product(mu) => mu.basis_eval_unchecked(a, x),
            };
            acc += self.gamma * c as f64 * b;
        }
        acc
    }

    /// The boolean classifier `sign(g')`.
    pub fn classify(&self, x: Point) -> f64 {
        sign_pm(self.gprime_value(x))
    }
}

impl PointFn for ProperChain {
    fn dim(&self) -> u32 {
        self.n
    }

    /// The bounded hypothesis `P_1(g'(x))`.
    fn value(&self, x: Point) -> f64 {
        clip_unit(self.gprime_value(x))
    }
}

// --- engine ------------------------------------------------------------------

fn transform_table(table: &[f64], basis: &Basis) -> Vec<f64> {
    let mut c = table.to_vec();
    match basis {
        Basis::Uniform => fwht_in_place(&mut c),
        Basis::Product(mu) => mu_transform_in_place(&mut c, mu),
    }
    c
}

fn basis_table(n: u32, basis: &Basis, mask: u64) -> Vec<f64> {
    let a = IndexMask::new(n, mask).expect("mask in range");
    Point::all(n)
        .map(|x| match basis {
            Basis::Uniform => a.parity_at(x),
            Basis::Product(mu) => mu.basis_eval_unchecked(a, x),
        })
        .collect()
}

/// The chain's own spectrum estimate, per backend. `values` is the current
/// bounded chain's value table.
fn chain_spectrum(
    values: &[f64],
    n: u32,
    basis: &Basis,
    gamma: f64,
    per_delta: f64,
    degree: u32,
    backend: ChainBackend,
    seed: u64,
) -> Result<SparseSpectrum> {
    match backend {
        ChainBackend::Exact => {
            let c = transform_table(values, basis);
            let mut s = SparseSpectrum::new(n, basis.clone());
            for (mask, &v) in c.iter().enumerate() {
                if (mask as u64).count_ones() <= degree && v.abs() >= crate::spectrum::ZERO_DROP {
                    s.insert(mask as u64, v);
                }
            }
            Ok(s)
        }
        ChainBackend::Sampled => {
            let vt = values.to_vec();
            let target = crate::spectrum::FnTarget::new(n, move |x| vt[x.bits() as usize]);
            let mut mq = MembershipOracle::new(&target);
            let mut p = RecoveryParams::new(gamma / 2.0, per_delta, Backend::Sampled)?;
            p.seed = seed;
            p.degree_cap = Some(degree);
            let r = match basis {
                Basis::Uniform => km_uniform(&mut mq, &p)?,
                Basis::Product(mu) => ekm_product(&mut mq, mu, &p)?,
            };
            Ok(r.spectrum)
        }
    }
}

/// Smallest mask in `B_d` where the two vectors differ by more than the
/// threshold, or None.
fn first_violation(
    gt: &SparseSpectrum,
    target: &SparseSpectrum,
    degree: u32,
    threshold: f64,
) -> Option<(u64, f64)> {
    let mut masks: Vec<u64> = gt
        .entries()
        .keys()
        .chain(target.entries().keys())
        .copied()
        .filter(|m| m.count_ones() <= degree)
        .collect();
    masks.sort_unstable();
    masks.dedup();
    for m in masks {
        let diff = (gt.coeff(m) - target.coeff(m)).abs();
        if diff > threshold {
            return Some((m, diff));
        }
    }
    None
}

/// Exact potential `E(t) = E_mu[(f - g)(f - 2g' + g)]`
/// `= E[(f-g)^2] + 2 E[(f-g)(g - g')]` over the chain's own basis measure.
pub fn potential(
    f: &dyn PointFn,
    g_values: &[f64],
    gprime_values: &[f64],
    basis: &Basis,
) -> Result<f64> {
    let n = f.dim();
    if g_values.len() != 1usize << n || gprime_values.len() != 1usize << n {
        return Err(Error::InvalidParam("value table length mismatch".to_string()));
    }
    let uniform = ProductDistribution::uniform(n);
    let mu = match basis {
        Basis::Uniform => &uniform,
        Basis::Product(m) => m,
    };
    let mut acc = 0.0;
    for x in Point::all(n) {
        let fv = f.value(x);
        let g = g_values[x.bits() as usize];
        let gp = gprime_values[x.bits() as usize];
        acc += mu.point_probability(x)? * (fv - g) * (fv - 2.0 * gp + g);
    }
    Ok(acc)
}

/// Exact potential of a proper chain against a target function.
pub fn proper_potential(f: &dyn PointFn, chain: &ProperChain) -> Result<f64> {
    let n = f.dim();
    if n > MAX_EXACT_DIM {
        return Err(Error::InvalidParam("potential needs n <= 24".to_string()));
    }
    let gp: Vec<f64> = Point::all(n).map(|x| chain.gprime_value(x)).collect();
    let g: Vec<f64> = gp.iter().map(|&v| clip_unit(v)).collect();
    potential(f, &g, &gp, &chain.basis)
}

/// Fill in the exact potential `E(t)` (the value before each step) of a
/// proper-construction trace by replaying it against the target function.
pub fn annotate_potentials(
    f: &dyn PointFn,
    basis: &Basis,
    gamma: f64,
    steps: &mut [ChainStep],
) -> Result<()> {
    let mut partial = ProperChain {
        n: f.dim(),
        basis: basis.clone(),
        gamma,
        counts: BTreeMap::new(),
    };
    for s in steps.iter_mut() {
        s.potential = Some(proper_potential(f, &partial)?);
        let d = if s.coefficient > 0.0 { 1 } else { -1 };
        let e = partial.counts.entry(s.mask).or_insert(0);
        *e += d;
        if *e == 0 {
            partial.counts.remove(&s.mask);
        }
    }
    Ok(())
}

fn check_target(target: &SparseSpectrum, want_product: Option<&ProductDistribution>) -> Result<()> {
    let want = match want_product {
        None => Basis::Uniform,
        Some(mu) => Basis::Product(mu.clone()),
    };
    if target.basis().compatible(&want) {
        Ok(())
    } else {
        Err(Error::BasisMismatch(
            "target spectrum basis does not match the construction".to_string(),
        ))
    }
}

fn construct(
    target: &SparseSpectrum,
    p: &ApproxParams,
    proper: bool,
) -> Result<(ClippedChain, ProperChain, Vec<ChainStep>)> {
    let n = target.dim();
    if n > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(
            "construction needs n <= 24 for chain table maintenance".to_string(),
        ));
    }
    let basis = target.basis().clone();
    let size = 1usize << n;
    let cap = if proper {
        p.proper_step_cap()
    } else {
        p.improper_step_cap()
    };
    let per_delta = p.delta / cap as f64;
    let stop = 7.0 * p.gamma / 2.0;
    let mut rng = ChaCha12Rng::seed_from_u64(p.seed);

    let mut chain = ClippedChain::new(n, basis.clone());
    let mut proper_chain = ProperChain {
        n,
        basis: basis.clone(),
        gamma: p.gamma,
        counts: BTreeMap::new(),
    };
    // value tables: g (bounded) and, for the proper variant, the raw g'
    let mut g_values = vec![0.0f64; size];
    let mut gp_values = vec![0.0f64; size];
    let mut steps = Vec::new();

    for t in 0..=cap {
        let gt = chain_spectrum(
            &g_values,
            n,
            &basis,
            p.gamma,
            per_delta,
            p.degree,
            p.backend,
            p.seed ^ rng.gen::<u64>(),
        )?;
        let viol = first_violation(&gt, target, p.degree, stop);
        let (mask, diff) = match viol {
            None => {
                return Ok((chain, proper_chain, steps));
            }
            Some(v) => v,
        };
        if t == cap {
            return Err(Error::ContractViolation(format!(
                "construction still violating after {cap} steps: backend contract broken \
                 (mask {mask:#x}, diff {diff})"
            )));
        }
        let coeff = if proper {
            p.gamma * (target.coeff(mask) - gt.coeff(mask)).signum()
        } else {
            target.coeff(mask) - gt.coeff(mask)
        };
        steps.push(ChainStep {
            mask,
            coefficient: coeff,
            diff,
            potential: None,
        });
        let bt = basis_table(n, &basis, mask);
        if proper {
            let delta_count = if coeff > 0.0 { 1 } else { -1 };
            let e = proper_chain.counts.entry(mask).or_insert(0);
            *e += delta_count;
            if *e == 0 {
                proper_chain.counts.remove(&mask);
            }
            for (i, b) in bt.iter().enumerate() {
                gp_values[i] += coeff * b;
                g_values[i] = clip_unit(gp_values[i]);
            }
        } else {
            chain.updates.push((mask, coeff));
            for (i, b) in bt.iter().enumerate() {
                g_values[i] = clip_unit(g_values[i] + coeff * b);
            }
        }
    }
    unreachable!("loop returns or errors at t = cap");
}

/// PTFapprox: build a bounded `g` with `||ghat(B_d) - target||_inf <= 7gamma/2`
/// at the estimate level, hence `||fhat(B_d) - ghat(B_d)||_inf <= 5gamma`
/// whenever the target was gamma-accurate for `f`. Uniform basis.
pub fn ptf_approx(
    target: &SparseSpectrum,
    p: &ApproxParams,
) -> Result<(ClippedChain, Vec<ChainStep>)> {
    check_target(target, None)?;
    let (chain, _, steps) = construct(target, p, false)?;
    Ok((chain, steps))
}

/// PTFapproxProd: the same loop with phi_{mu,a} updates in the mu-basis.
pub fn ptf_approx_prod(
    target: &SparseSpectrum,
    mu: &ProductDistribution,
    p: &ApproxParams,
) -> Result<(ClippedChain, Vec<ChainStep>)> {
    check_target(target, Some(mu))?;
    let (chain, _, steps) = construct(target, p, false)?;
    Ok((chain, steps))
}

/// PTFconstructProd: +/- gamma updates on the raw sum `g'`, projection applied
/// once at evaluation; output coefficients are integer multiples of gamma
/// with `||p||_1 <= 1/(2 gamma^2)`.
pub fn ptf_construct_prod(
    target: &SparseSpectrum,
    mu: &ProductDistribution,
    p: &ApproxParams,
) -> Result<(ProperChain, Vec<ChainStep>)> {
    check_target(target, Some(mu))?;
    let (_, chain, steps) = construct(target, p, true)?;
    let cap = (1.0 / (2.0 * p.gamma * p.gamma)).ceil() as i64;
    if chain.integer_weight() > cap {
        return Err(Error::ContractViolation(format!(
            "proper chain weight {} exceeds 1/(2 gamma^2) = {cap}",
            chain.integer_weight()
        )));
    }
    Ok((chain, steps))
}

/// Uniform-basis proper construction (mu = 0), for completeness.
pub fn ptf_construct_uniform(
    target: &SparseSpectrum,
    p: &ApproxParams,
) -> Result<(ProperChain, Vec<ChainStep>)> {
    check_target(target, None)?;
    let (_, chain, steps) = construct(target, p, true)?;
    Ok((chain, steps))
}

// --- wire format -------------------------------------------------------------
//
// Same header as spectra, then ordered `mask-hex coefficient` update lines.

pub fn write_chain<W: Write>(w: &mut W, chain: &ClippedChain) -> Result<()> {
    match &chain.basis {
        Basis::Uniform => writeln!(w, "chain basis=uniform n={}", chain.n)?,
        Basis::Product(mu) => {
            let list = mu
                .mu()
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "chain basis=product n={} mu={}", chain.n, list)?;
        }
    }
    for (m, c) in &chain.updates {
        writeln!(w, "{m:x} {c}")?;
    }
    Ok(())
}

pub fn read_chain<R: BufRead>(r: &mut R) -> Result<ClippedChain> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 3 || fields[0] != "chain" {
        return Err(Error::Parse("missing chain header".to_string()));
    }
    let n: u32 = fields[2]
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad chain header {header:?}")))?;
    let basis = match fields[1] {
        "basis=uniform" => Basis::Uniform,
        "basis=product" => {
            let mu_text = fields
                .get(3)
                .and_then(|f| f.strip_prefix("mu="))
                .ok_or_else(|| Error::Parse("product chain header missing mu=".to_string()))?;
            let mu = mu_text
                .split(',')
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad mu value {t:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Basis::Product(ProductDistribution::new(mu)?)
        }
        other => return Err(Error::Parse(format!("unknown chain basis {other:?}"))),
    };
    let mut chain = ClippedChain::new(n, basis);
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (mask_text, val_text) = line
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("bad chain line {line:?}")))?;
        let mask = u64::from_str_radix(mask_text, 16)
            .map_err(|_| Error::Parse(format!("bad mask {mask_text:?}")))?;
        IndexMask::new(n, mask)?;
        let c: f64 = val_text
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient {val_text:?}")))?;
        chain.updates.push((mask, c));
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolcore::random_dnf;
    use crate::spectrum::{
        diff_inf_norm, exact_mu_transform, exact_uniform_transform, FnTarget,
    };

    fn exact_target_uniform(f: &dyn PointFn, d: u32) -> SparseSpectrum {
        exact_uniform_transform(f).unwrap().to_sparse(Some(d))
    }

    fn chain_spectrum_exact(chain: &ClippedChain, d: u32) -> SparseSpectrum {
        match chain.basis() {
            Basis::Uniform => exact_uniform_transform(chain).unwrap().to_sparse(Some(d)),
            Basis::Product(mu) => exact_mu_transform(chain, &mu.clone(), Some(d)).unwrap(),
        }
    }

    #[test]
    fn tiny_target_returns_empty_chain() {
        let mut t = SparseSpectrum::new(6, Basis::Uniform);
        t.insert(0b1, 0.1);
        let p = ApproxParams::new(0.05, 0.1, 6, ChainBackend::Exact).unwrap();
        // ||target||_inf = 0.1 <= 7 * 0.05 / 2 = 0.175: stop at t = 0
        let (chain, steps) = ptf_approx(&t, &p).unwrap();
        assert!(chain.is_empty());
        assert!(steps.is_empty());
    }

    #[test]
    fn or_target_five_gamma_guarantee() {
        let f = crate::boolcore::parse_dnf("n=4; 1 | 2").unwrap();
        let gamma = 0.05;
        let target = exact_target_uniform(&f, 4);
        let p = ApproxParams::new(gamma, 0.1, 4, ChainBackend::Exact).unwrap();
        let (chain, steps) = ptf_approx(&target, &p).unwrap();
        assert!(!steps.is_empty());
        let gs = chain_spectrum_exact(&chain, 4);
        let fs = exact_target_uniform(&f, 4);
        assert!(diff_inf_norm(&gs, &fs, Some(4)).unwrap() <= 5.0 * gamma);
        // output bounded
        for x in Point::all(4) {
            assert!(chain.value(x).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn iteration_cap_and_l2_decrement() {
        let gamma = 0.1;
        let p = ApproxParams::new(gamma, 0.1, 8, ChainBackend::Exact).unwrap();
        for seed in 0..20 {
            let f = random_dnf(8, 3, 4, false, seed).unwrap();
            let target = exact_target_uniform(&f, 8);
            let (chain, steps) = ptf_approx(&target, &p).unwrap();
            assert!(steps.len() <= p.improper_step_cap());
            // L2 decrement >= 7 gamma^2 / 4 at every step, replayed exactly
            let table_f: Vec<f64> = Point::all(8).map(|x| f.value(x)).collect();
            let mut g = vec![0.0f64; 256];
            let l2 = |g: &[f64]| -> f64 {
                g.iter()
                    .zip(&table_f)
                    .map(|(gv, fv)| (fv - gv) * (fv - gv))
                    .sum::<f64>()
                    / 256.0
            };
            let mut prev = l2(&g);
            assert!((prev - 1.0).abs() < 1e-12);
            for &(mask, c) in chain.updates() {
                let bt = super::basis_table(8, &Basis::Uniform, mask);
                // clipping never hurts: compare against the unclipped update
                let unclipped: Vec<f64> = g
                    .iter()
                    .zip(&bt)
                    .map(|(gv, b)| gv + c * b)
                    .collect();
                for (i, b) in bt.iter().enumerate() {
                    g[i] = clip_unit(g[i] + c * b);
                }
                assert!(l2(&g) <= l2(&unclipped) + 1e-12);
                let cur = l2(&g);
                assert!(
                    prev - cur >= 7.0 * gamma * gamma / 4.0 - 1e-9,
                    "decrement {} at seed {seed}",
                    prev - cur
                );
                prev = cur;
            }
        }
    }

    #[test]
    fn prod_uniform_coincidence() {
        let f = random_dnf(6, 2, 3, false, 4).unwrap();
        let gamma = 0.1;
        let target_u = exact_target_uniform(&f, 6);
        let p = ApproxParams::new(gamma, 0.1, 6, ChainBackend::Exact).unwrap();
        let (cu, su) = ptf_approx(&target_u, &p).unwrap();
        let mu0 = ProductDistribution::uniform(6);
        let target_p = exact_mu_transform(&f, &mu0, Some(6)).unwrap();
        let (cp, sp) = ptf_approx_prod(&target_p, &mu0, &p).unwrap();
        assert_eq!(cu.updates().len(), cp.updates().len());
        for (a, b) in su.iter().zip(sp.iter()) {
            assert_eq!(a.mask, b.mask);
            assert!((a.coefficient - b.coefficient).abs() < 1e-12);
        }
    }

    #[test]
    fn prod_exact_guarantee() {
        let f = random_dnf(8, 3, 4, false, 6).unwrap();
        let mu = ProductDistribution::new(vec![0.5, -0.5, 0.25, 0.5, 0.0, -0.25, 0.5, 0.1])
            .unwrap();
        let gamma = 0.08;
        let target = exact_mu_transform(&f, &mu, Some(8)).unwrap();
        let p = ApproxParams::new(gamma, 0.1, 8, ChainBackend::Exact).unwrap();
        let (chain, _) = ptf_approx_prod(&target, &mu, &p).unwrap();
        let gs = exact_mu_transform(&chain, &mu, Some(8)).unwrap();
        assert!(diff_inf_norm(&gs, &target, Some(8)).unwrap() <= 4.0 * gamma + 1e-12);
        for x in Point::all(8) {
            assert!(chain.value(x).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn empty_target_empty_chain() {
        let t = SparseSpectrum::new(6, Basis::Product(ProductDistribution::new(vec![0.3; 6]).unwrap()));
        let mu = ProductDistribution::new(vec![0.3; 6]).unwrap();
        let p = ApproxParams::new(0.1, 0.1, 6, ChainBackend::Exact).unwrap();
        let (chain, _) = ptf_approx_prod(&t, &mu, &p).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn proper_chain_structure() {
        let f = random_dnf(8, 3, 4, false, 9).unwrap();
        let mu = ProductDistribution::new(vec![0.25; 8]).unwrap();
        let gamma = 0.1;
        let target = exact_mu_transform(&f, &mu, Some(8)).unwrap();
        let p = ApproxParams::new(gamma, 0.1, 8, ChainBackend::Exact).unwrap();
        let (chain, steps) = ptf_construct_prod(&target, &mu, &p).unwrap();
        assert!(steps.len() <= p.proper_step_cap());
        // coefficients are integer multiples of gamma; weight bounded
        let gp = chain.gprime_polynomial().unwrap();
        for (_, &v) in gp.coeffs() {
            let k = v / gamma;
            assert!((k - k.round()).abs() < 1e-9);
        }
        assert!(chain.integer_weight() as f64 <= 1.0 / (2.0 * gamma * gamma));
        assert!(gp.l1_norm() <= 1.0 / (2.0 * gamma) + 1e-9);
        // 5 gamma guarantee, exact backend: holds deterministically
        let gs = exact_mu_transform(&chain, &mu, Some(8)).unwrap();
        assert!(diff_inf_norm(&gs, &target, Some(8)).unwrap() <= 4.0 * gamma + 1e-12);
        // bounded output
        for x in Point::all(8) {
            assert!(chain.value(x).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn proper_parity_trace() {
        // f = chi_a, gamma = 0.25: g' accumulates on a until within 7g/2
        let a_mask = 0b11u64;
        let chi = FnTarget::new(4, move |x| {
            IndexMask::new(4, a_mask).unwrap().parity_at(x)
        });
        let gamma = 0.25;
        let target = exact_target_uniform(&chi, 4);
        let p = ApproxParams::new(gamma, 0.1, 4, ChainBackend::Exact).unwrap();
        let (chain, steps) = ptf_construct_uniform(&target, &p).unwrap();
        assert!(steps.iter().all(|s| s.mask == a_mask));
        let gs = chain_spectrum_sparse(&chain, 4);
        assert!((gs.coeff(a_mask) - 1.0).abs() <= 5.0 * gamma);
    }

    fn chain_spectrum_sparse(chain: &ProperChain, d: u32) -> SparseSpectrum {
        match chain.basis() {
            Basis::Uniform => exact_uniform_transform(chain).unwrap().to_sparse(Some(d)),
            Basis::Product(mu) => exact_mu_transform(chain, &mu.clone(), Some(d)).unwrap(),
        }
    }

    #[test]
    fn potential_contract() {
        // E(0) = 1 for any boolean f; decrement >= 2 gamma^2 per step
        let gamma = 0.1;
        for seed in 0..5 {
            let f = random_dnf(8, 3, 3, false, seed).unwrap();
            let mu = ProductDistribution::new(vec![0.25; 8]).unwrap();
            let target = exact_mu_transform(&f, &mu, Some(8)).unwrap();
            let p = ApproxParams::new(gamma, 0.1, 8, ChainBackend::Exact).unwrap();
            let (chain, steps) = ptf_construct_prod(&target, &mu, &p).unwrap();
            // replay the trace, computing the exact potential at every prefix
            let mut partial = ProperChain {
                n: 8,
                basis: chain.basis().clone(),
                gamma,
                counts: BTreeMap::new(),
            };
            let mut prev = proper_potential(&f, &partial).unwrap();
            assert!((prev - 1.0).abs() < 1e-12, "E(0) = {prev}");
            for s in &steps {
                let d = if s.coefficient > 0.0 { 1 } else { -1 };
                let e = partial.counts.entry(s.mask).or_insert(0);
                *e += d;
                if *e == 0 {
                    partial.counts.remove(&s.mask);
                }
                let cur = proper_potential(&f, &partial).unwrap();
                assert!(cur >= -1e-9, "E(t) < 0");
                assert!(
                    prev - cur >= 2.0 * gamma * gamma - 1e-9,
                    "potential decrement {} at seed {seed}",
                    prev - cur
                );
                prev = cur;
            }
        }
    }

    #[test]
    fn sampled_backend_runs() {
        let f = random_dnf(6, 2, 3, false, 2).unwrap();
        let gamma = 0.2;
        let target = exact_target_uniform(&f, 6);
        let mut p = ApproxParams::new(gamma, 0.2, 6, ChainBackend::Sampled).unwrap();
        p.seed = 9;
        let (chain, steps) = ptf_approx(&target, &p).unwrap();
        assert!(steps.len() <= p.improper_step_cap());
        let gs = chain_spectrum_exact(&chain, 6);
        assert!(diff_inf_norm(&gs, &target, Some(6)).unwrap() <= 4.0 * gamma + 1e-12);
    }

    #[test]
    fn chain_wire_roundtrip() {
        let f = random_dnf(8, 3, 4, false, 12).unwrap();
        let mu = ProductDistribution::new(vec![0.25; 8]).unwrap();
        let target = exact_mu_transform(&f, &mu, Some(8)).unwrap();
        let p = ApproxParams::new(0.1, 0.1, 8, ChainBackend::Exact).unwrap();
        let (chain, _) = ptf_approx_prod(&target, &mu, &p).unwrap();
        let mut buf = Vec::new();
        write_chain(&mut buf, &chain).unwrap();
        let back = read_chain(&mut &buf[..]).unwrap();
        assert_eq!(chain, back);
        for x in Point::all(8) {
            assert!((chain.value(x) - back.value(x)).abs() < 1e-15);
        }
    }
}
