//! Exact Fourier transforms and spectra: fast Walsh-Hadamard for the uniform
//! basis, weighted staged transforms for product bases, sparse spectra, norms,
//! restrictions and the spectrum wire format.
//!
//! Everything here is the ground-truth oracle for the recovery and
//! construction algorithms.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::boolcore::{IndexMask, Point, MAX_EXACT_DIM};
use crate::dist::{Basis, ProductDistribution};
use crate::error::{Error, Result};

/// Round-off entries below this magnitude are dropped by exact transforms.
/// Far below any algorithmic threshold used in the crate.
pub const ZERO_DROP: f64 = 1e-12;

/// A function handle: anything evaluable on points of a fixed dimension.
pub trait PointFn {
    fn dim(&self) -> u32;
    fn value(&self, x: Point) -> f64;

    /// The full value table over `2^n` points in mask order.
    fn truth_table(&self) -> Vec<f64> {
        let n = self.dim();
        assert!(n <= MAX_EXACT_DIM, "truth table needs n <= 24");
        Point::all(n).map(|x| self.value(x)).collect()
    }
}

impl PointFn for crate::boolcore::DnfFormula {
    fn dim(&self) -> u32 {
        self.dim()
    }
    fn value(&self, x: Point) -> f64 {
        self.eval(x)
    }
}

impl PointFn for crate::boolcore::TermThresholdFunction {
    fn dim(&self) -> u32 {
        self.dim()
    }
    fn value(&self, x: Point) -> f64 {
        self.eval(x)
    }
}

/// Closure adapter for ad-hoc targets.
pub struct FnTarget<F: Fn(Point) -> f64> {
    n: u32,
    f: F,
}

impl<F: Fn(Point) -> f64> FnTarget<F> {
    pub fn new(n: u32, f: F) -> Self {
        FnTarget { n, f }
    }
}

impl<F: Fn(Point) -> f64> PointFn for FnTarget<F> {
    fn dim(&self) -> u32 {
        self.n
    }
    fn value(&self, x: Point) -> f64 {
        (self.f)(x)
    }
}

// --- dense transforms --------------------------------------------------------

fn check_table_len(len: usize) -> Result<u32> {
    if !len.is_power_of_two() || len == 0 {
        return Err(Error::InvalidParam(format!(
            "table length {len} is not a power of two"
        )));
    }
    let n = len.trailing_zeros();
    if n > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(format!("n = {n} exceeds exact limit")));
    }
    Ok(n)
}

/// In-place forward uniform transform: values -> coefficients
/// `c[a] = 2^-n sum_x f(x) chi_a(x)`.
pub fn fwht_in_place(values: &mut [f64]) {
    let len = values.len();
    let mut step = 1;
    while step < len {
        let mut base = 0;
        while base < len {
            for i in base..base + step {
                let vm = values[i]; // x_bit = 0, i.e. x_i = -1
                let vp = values[i + step];
                values[i] = 0.5 * (vm + vp);
                values[i + step] = 0.5 * (vp - vm);
            }
            base += step << 1;
        }
        step <<= 1;
    }
}

/// In-place inverse uniform transform: coefficients -> values.
pub fn fwht_inverse_in_place(coeffs: &mut [f64]) {
    let len = coeffs.len();
    let mut step = 1;
    while step < len {
        let mut base = 0;
        while base < len {
            for i in base..base + step {
                let c0 = coeffs[i];
                let c1 = coeffs[i + step];
                coeffs[i] = c0 - c1;
                coeffs[i + step] = c0 + c1;
            }
            base += step << 1;
        }
        step <<= 1;
    }
}

/// Forward transform for one coordinate of a product basis, applied to the
/// whole table; coordinate `k` means bit position `k`.
pub(crate) fn mu_butterfly_coord(values: &mut [f64], k: u32, mu_k: f64) {
    let len = values.len();
    let step = 1usize << k;
    let pm = (1.0 - mu_k) / 2.0;
    let pp = (1.0 + mu_k) / 2.0;
    let r = (1.0 - mu_k * mu_k).sqrt();
    let fm = (-1.0 - mu_k) / r;
    let fp = (1.0 - mu_k) / r;
    let mut base = 0;
    while base < len {
        for i in base..base + step {
            let vm = values[i];
            let vp = values[i + step];
            values[i] = pm * vm + pp * vp;
            values[i + step] = pm * fm * vm + pp * fp * vp;
        }
        base += step << 1;
    }
}

pub(crate) fn mu_inverse_coord(values: &mut [f64], k: u32, mu_k: f64) {
    let len = values.len();
    let step = 1usize << k;
    let r = (1.0 - mu_k * mu_k).sqrt();
    let fm = (-1.0 - mu_k) / r;
    let fp = (1.0 - mu_k) / r;
    let mut base = 0;
    while base < len {
        for i in base..base + step {
            let c0 = values[i];
            let c1 = values[i + step];
            values[i] = c0 + c1 * fm;
            values[i + step] = c0 + c1 * fp;
        }
        base += step << 1;
    }
}

/// Unweighted basis-sum butterfly for one coordinate: turns a table of point
/// masses `w[x]` into `sum_x w[x] phi_a(x)` over all `a`. Used by empirical
/// (sampled) estimators; with `mu = 0` this is the plain `sum w chi_a`.
pub(crate) fn phi_sum_coord(values: &mut [f64], k: u32, mu_k: f64) {
    let len = values.len();
    let step = 1usize << k;
    let r = (1.0 - mu_k * mu_k).sqrt();
    let fm = (-1.0 - mu_k) / r;
    let fp = (1.0 - mu_k) / r;
    let mut base = 0;
    while base < len {
        for i in base..base + step {
            let vm = values[i];
            let vp = values[i + step];
            values[i] = vm + vp;
            values[i + step] = fm * vm + fp * vp;
        }
        base += step << 1;
    }
}

/// Full in-place product-basis forward transform: values -> mu-coefficients.
pub fn mu_transform_in_place(values: &mut [f64], mu: &ProductDistribution) {
    for k in 0..mu.dim() {
        mu_butterfly_coord(values, k, mu.mu_i(k));
    }
}

/// Full in-place product-basis inverse transform: mu-coefficients -> values.
pub fn mu_inverse_in_place(coeffs: &mut [f64], mu: &ProductDistribution) {
    for k in 0..mu.dim() {
        mu_inverse_coord(coeffs, k, mu.mu_i(k));
    }
}

/// Full in-place unweighted basis-sum transform of a point-mass table.
pub fn phi_sum_transform_in_place(values: &mut [f64], mu: &ProductDistribution) {
    for k in 0..mu.dim() {
        phi_sum_coord(values, k, mu.mu_i(k));
    }
}

// --- spectra -----------------------------------------------------------------

/// The full uniform-basis coefficient vector of a function on `n <= 24` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSpectrum {
    n: u32,
    values: Vec<f64>,
}

impl DenseSpectrum {
    pub fn from_values(n: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << n {
            return Err(Error::InvalidParam(format!(
                "dense spectrum needs 2^{n} entries, got {}",
                values.len()
            )));
        }
        Ok(DenseSpectrum { n, values })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn coeff(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    /// Sparse view: drops round-off zeros; optional degree cap.
    pub fn to_sparse(&self, degree_cap: Option<u32>) -> SparseSpectrum {
        let mut entries = BTreeMap::new();
        for (mask, &v) in self.values.iter().enumerate() {
            if v.abs() < ZERO_DROP {
                continue;
            }
            if let Some(d) = degree_cap {
                if (mask as u64).count_ones() > d {
                    continue;
                }
            }
            entries.insert(mask as u64, v);
        }
        SparseSpectrum {
            n: self.n,
            basis: Basis::Uniform,
            entries,
        }
    }
}

/// A succinct coefficient vector: map from index mask to value, tagged with
/// the basis it lives in. No explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    n: u32,
    basis: Basis,
    entries: BTreeMap<u64, f64>,
}

/// The four standard norms of a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl SparseSpectrum {
    pub fn new(n: u32, basis: Basis) -> Self {
        SparseSpectrum {
            n,
            basis,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn entries(&self) -> &BTreeMap<u64, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn coeff(&self, mask: u64) -> f64 {
        self.entries.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn insert(&mut self, mask: u64, v: f64) {
        if v == 0.0 {
            self.entries.remove(&mask);
        } else {
            self.entries.insert(mask, v);
        }
    }

    /// Standard norms over the stored entries.
    pub fn norms(&self) -> Norms {
        let mut l1 = 0.0;
        let mut l2sq = 0.0;
        let mut linf = 0.0f64;
        for &v in self.entries.values() {
            l1 += v.abs();
            l2sq += v * v;
            linf = linf.max(v.abs());
        }
        Norms {
            l0: self.entries.len(),
            l1,
            l2: l2sq.sqrt(),
            linf,
        }
    }

    /// Keeps entries with `degree <= d` (if given) and `mask subset of
    /// variables` (if given).
    pub fn restrict(&self, degree_cap: Option<u32>, variables: Option<u64>) -> SparseSpectrum {
        let entries = self
            .entries
            .iter()
            .filter(|(m, _)| {
                degree_cap.map_or(true, |d| m.count_ones() <= d)
                    && variables.map_or(true, |vars| *m & !vars == 0)
            })
            .map(|(&m, &v)| (m, v))
            .collect();
        SparseSpectrum {
            n: self.n,
            basis: self.basis.clone(),
            entries,
        }
    }

    /// The `S_i` slice: entries whose mask contains variable `i`.
    pub fn slice_containing(&self, i: u32) -> SparseSpectrum {
        let bit = 1u64 << i;
        let entries = self
            .entries
            .iter()
            .filter(|(m, _)| *m & bit != 0)
            .map(|(&m, &v)| (m, v))
            .collect();
        SparseSpectrum {
            n: self.n,
            basis: self.basis.clone(),
            entries,
        }
    }

    /// Entries with `|value| >= theta`.
    pub fn heavy(&self, theta: f64) -> SparseSpectrum {
        assert!(theta > 0.0);
        let entries = self
            .entries
            .iter()
            .filter(|(_, v)| v.abs() >= theta)
            .map(|(&m, &v)| (m, v))
            .collect();
        SparseSpectrum {
            n: self.n,
            basis: self.basis.clone(),
            entries,
        }
    }

    /// Keeps the `cap` largest entries by magnitude (ties by mask order).
    pub fn truncate_support(&mut self, cap: usize) {
        if self.entries.len() <= cap {
            return;
        }
        let mut items: Vec<(u64, f64)> = self.entries.iter().map(|(&m, &v)| (m, v)).collect();
        items.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap().then(a.0.cmp(&b.0)));
        items.truncate(cap);
        self.entries = items.into_iter().collect();
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }
}

/// `fwht`: the exact uniform transform of a value table.
pub fn fwht(truth_table: &[f64]) -> Result<DenseSpectrum> {
    let n = check_table_len(truth_table.len())?;
    let mut values = truth_table.to_vec();
    fwht_in_place(&mut values);
    DenseSpectrum::from_values(n, values)
}

/// Exact uniform transform of a function handle, as a dense spectrum.
pub fn exact_uniform_transform(f: &dyn PointFn) -> Result<DenseSpectrum> {
    if f.dim() > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(
            "exact transform needs n <= 24".to_string(),
        ));
    }
    fwht(&f.truth_table())
}

/// Exact product-basis transform: `f_mu(a) = E_mu[f(x) phi_{mu,a}(x)]`,
/// optionally degree-capped, with round-off entries dropped.
pub fn exact_mu_transform(
    f: &dyn PointFn,
    mu: &ProductDistribution,
    degree_cap: Option<u32>,
) -> Result<SparseSpectrum> {
    let n = f.dim();
    if n != mu.dim() {
        return Err(Error::DimensionMismatch(n, mu.dim()));
    }
    if n > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(
            "exact transform needs n <= 24".to_string(),
        ));
    }
    let mut table = f.truth_table();
    mu_transform_in_place(&mut table, mu);
    let mut entries = BTreeMap::new();
    for (mask, &v) in table.iter().enumerate() {
        if v.abs() < ZERO_DROP {
            continue;
        }
        if let Some(d) = degree_cap {
            if (mask as u64).count_ones() > d {
                continue;
            }
        }
        entries.insert(mask as u64, v);
    }
    Ok(SparseSpectrum {
        n,
        basis: Basis::Product(mu.clone()),
        entries,
    })
}

/// `diff_inf_norm`: max over the union of supports (optionally restricted to
/// degree <= d) of `|u(a) - v(a)|`; absent entries read as zero.
pub fn diff_inf_norm(u: &SparseSpectrum, v: &SparseSpectrum, restrict: Option<u32>) -> Result<f64> {
    if u.n != v.n {
        return Err(Error::DimensionMismatch(u.n, v.n));
    }
    if !u.basis.compatible(&v.basis) {
        return Err(Error::BasisMismatch(
            "diff_inf_norm across different bases".to_string(),
        ));
    }
    let mut best = 0.0f64;
    let keep = |m: u64| restrict.map_or(true, |d| m.count_ones() <= d);
    for (&m, &a) in &u.entries {
        if keep(m) {
            best = best.max((a - v.coeff(m)).abs());
        }
    }
    for (&m, &b) in &v.entries {
        if keep(m) && !u.entries.contains_key(&m) {
            best = best.max(b.abs());
        }
    }
    Ok(best)
}

/// `heavy_coefficients` over a dense spectrum.
pub fn heavy_coefficients_dense(v: &DenseSpectrum, theta: f64) -> SparseSpectrum {
    v.to_sparse(None).heavy(theta)
}

// --- wire format -------------------------------------------------------------
//
// Header line `basis=uniform n=<n>` or `basis=product n=<n> mu=<m1>,<m2>,...`,
// then one `mask-hex value` line per entry. Values print in Rust's shortest
// round-trip form, so the round trip is bit-exact.

pub fn write_spectrum<W: Write>(w: &mut W, s: &SparseSpectrum) -> Result<()> {
    match &s.basis {
        Basis::Uniform => writeln!(w, "basis=uniform n={}", s.n)?,
        Basis::Product(mu) => {
            let list = mu
                .mu()
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "basis=product n={} mu={}", s.n, list)?;
        }
    }
    for (m, v) in &s.entries {
        writeln!(w, "{m:x} {v}")?;
    }
    Ok(())
}

pub fn read_spectrum<R: BufRead>(r: &mut R) -> Result<SparseSpectrum> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(Error::Parse("missing spectrum header".to_string()));
    }
    let n: u32 = fields[1]
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
    let basis = match fields[0] {
        "basis=uniform" => Basis::Uniform,
        "basis=product" => {
            let mu_text = fields
                .get(2)
                .and_then(|f| f.strip_prefix("mu="))
                .ok_or_else(|| Error::Parse("product header missing mu=".to_string()))?;
            let mu = mu_text
                .split(',')
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad mu value {t:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Basis::Product(ProductDistribution::new(mu)?)
        }
        other => return Err(Error::Parse(format!("unknown basis {other:?}"))),
    };
    let mut s = SparseSpectrum::new(n, basis);
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (mask_text, val_text) = line
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("bad entry line {line:?}")))?;
        let mask = u64::from_str_radix(mask_text, 16)
            .map_err(|_| Error::Parse(format!("bad mask {mask_text:?}")))?;
        let v: f64 = val_text
            .parse()
            .map_err(|_| Error::Parse(format!("bad value {val_text:?}")))?;
        IndexMask::new(n, mask)?;
        s.insert(mask, v);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolcore::random_dnf;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Independent O(4^n) transform used as the oracle for the fast paths.
    pub(crate) fn naive_uniform_transform(table: &[f64]) -> Vec<f64> {
        let n = table.len().trailing_zeros();
        let mut out = vec![0.0; table.len()];
        for a in 0..table.len() {
            let mut acc = 0.0;
            for x in 0..table.len() {
                let am = IndexMask::new(n, a as u64).unwrap();
                acc += table[x] * am.parity_at(Point::new(n, x as u64).unwrap());
            }
            out[a] = acc / table.len() as f64;
        }
        out
    }

    fn or2_table() -> Vec<f64> {
        // OR(x1, x2) as +/-1 on 2 bits: false only at (-1,-1) = index 0.
        vec![-1.0, 1.0, 1.0, 1.0]
    }

    #[test]
    fn fwht_known_values() {
        let s = fwht(&or2_table()).unwrap();
        assert!((s.coeff(0b00) - 0.5).abs() < 1e-15);
        assert!((s.coeff(0b01) - 0.5).abs() < 1e-15);
        assert!((s.coeff(0b10) - 0.5).abs() < 1e-15);
        assert!((s.coeff(0b11) + 0.5).abs() < 1e-15);

        // single parity chi_{1}
        let chi: Vec<f64> = Point::all(3)
            .map(|x| IndexMask::new(3, 0b001).unwrap().parity_at(x))
            .collect();
        let s = fwht(&chi).unwrap();
        for m in 0..8u64 {
            let expect = if m == 0b001 { 1.0 } else { 0.0 };
            assert!((s.coeff(m) - expect).abs() < 1e-15);
        }

        let ones = vec![1.0; 16];
        let s = fwht(&ones).unwrap();
        assert!((s.coeff(0) - 1.0).abs() < 1e-15);
        assert!(s.values()[1..].iter().all(|v| v.abs() < 1e-15));

        assert!(fwht(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn fwht_matches_naive() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for n in 2..=10u32 {
            let table: Vec<f64> = (0..1usize << n)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let fast = fwht(&table).unwrap();
            let naive = naive_uniform_transform(&table);
            for (a, &v) in naive.iter().enumerate() {
                assert!((fast.coeff(a as u64) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let table: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut c = table.clone();
        fwht_in_place(&mut c);
        fwht_inverse_in_place(&mut c);
        for (a, b) in table.iter().zip(&c) {
            assert!((a - b).abs() < 1e-10);
        }
        let mu = ProductDistribution::new(vec![0.4, -0.3, 0.2, 0.0, 0.5, -0.45, 0.1, 0.05])
            .unwrap();
        let mut d = table.clone();
        mu_transform_in_place(&mut d, &mu);
        mu_inverse_in_place(&mut d, &mu);
        for (a, b) in table.iter().zip(&d) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mu_transform_consistency() {
        // At mu = 0 the product transform equals the uniform one.
        let f = random_dnf(8, 3, 4, false, 5).unwrap();
        let uni = exact_uniform_transform(&f).unwrap();
        let mu0 = ProductDistribution::uniform(8);
        let prod = exact_mu_transform(&f, &mu0, None).unwrap();
        for m in 0..256u64 {
            assert!((uni.coeff(m) - prod.coeff(m)).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_transform_orthonormality_and_parseval() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let n = 8u32;
        let mu = ProductDistribution::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect())
            .unwrap();
        // transform of a basis function is a single unit entry
        let a = IndexMask::new(n, 0b1011).unwrap();
        let muc = mu.clone();
        let phi = FnTarget::new(n, move |x| muc.basis_eval_unchecked(a, x));
        let s = exact_mu_transform(&phi, &mu, None).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.coeff(0b1011) - 1.0).abs() < 1e-9);

        // Parseval for a random DNF
        let f = random_dnf(n, 3, 4, false, 77).unwrap();
        let s = exact_mu_transform(&f, &mu, None).unwrap();
        let sum: f64 = s.entries().values().map(|v| v * v).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mu_transform_against_naive_weighted_sum() {
        // Independent oracle: direct weighted sums with point probabilities.
        let n = 6u32;
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let mu = ProductDistribution::new((0..n).map(|_| rng.gen_range(-0.6..0.6)).collect())
            .unwrap();
        let f = random_dnf(n, 2, 3, false, 9).unwrap();
        let s = exact_mu_transform(&f, &mu, None).unwrap();
        for a_bits in 0..1u64 << n {
            let a = IndexMask::new(n, a_bits).unwrap();
            let mut acc = 0.0;
            for x in Point::all(n) {
                acc += mu.point_probability(x).unwrap()
                    * f.eval(x)
                    * mu.basis_eval(a, x).unwrap();
            }
            assert!(
                (s.coeff(a_bits) - acc).abs() < 1e-10,
                "mask {a_bits:b}: {} vs {acc}",
                s.coeff(a_bits)
            );
        }
    }

    #[test]
    fn norms_and_restrict() {
        let mut s = SparseSpectrum::new(4, Basis::Uniform);
        assert_eq!(
            s.norms(),
            Norms {
                l0: 0,
                l1: 0.0,
                l2: 0.0,
                linf: 0.0
            }
        );
        s.insert(0b0001, -0.5);
        s.insert(0b0110, 0.5);
        let n = s.norms();
        assert_eq!(n.l0, 2);
        assert!((n.l1 - 1.0).abs() < 1e-15);
        assert!((n.l2 - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((n.linf - 0.5).abs() < 1e-15);

        let or = fwht(&or2_table()).unwrap().to_sparse(None);
        assert!((or.norms().l1 - 2.0).abs() < 1e-12);
        let s1 = or.slice_containing(0);
        assert_eq!(s1.len(), 2);
        assert!((s1.coeff(0b01) - 0.5).abs() < 1e-15);
        assert!((s1.coeff(0b11) + 0.5).abs() < 1e-15);
        let d0 = or.restrict(Some(0), None);
        assert_eq!(d0.len(), 1);
        assert!((d0.coeff(0) - 0.5).abs() < 1e-15);
        let empty = SparseSpectrum::new(2, Basis::Uniform).restrict(Some(1), None);
        assert!(empty.is_empty());
    }

    #[test]
    fn diff_inf_norm_contract() {
        let mut u = SparseSpectrum::new(4, Basis::Uniform);
        u.insert(0b0011, 1.0);
        assert_eq!(diff_inf_norm(&u, &u, None).unwrap(), 0.0);
        let v = SparseSpectrum::new(4, Basis::Uniform);
        assert_eq!(diff_inf_norm(&u, &v, None).unwrap(), 1.0);
        let mut w = u.clone();
        w.insert(0b0000, 1.0); // degree 0 matches in both after restriction
        let mut u2 = u.clone();
        u2.insert(0b0000, 1.0);
        assert_eq!(diff_inf_norm(&u2, &w, Some(0)).unwrap(), 0.0);
        let mu = ProductDistribution::new(vec![0.5; 4]).unwrap();
        let p = SparseSpectrum::new(4, Basis::Product(mu));
        assert!(diff_inf_norm(&u, &p, None).is_err());
    }

    #[test]
    fn heavy_contract() {
        let or = fwht(&or2_table()).unwrap().to_sparse(None);
        assert!(or.heavy(0.6).is_empty());
        assert_eq!(or.heavy(0.5).len(), 4);
        // boolean function: at most 1/theta^2 entries of magnitude >= theta
        let f = random_dnf(10, 3, 5, false, 2).unwrap();
        let s = exact_uniform_transform(&f).unwrap().to_sparse(None);
        for theta in [0.3, 0.1, 0.05] {
            assert!(s.heavy(theta).len() as f64 <= 1.0 / (theta * theta));
        }
    }

    #[test]
    fn wire_roundtrip_bit_exact() {
        let f = random_dnf(10, 3, 5, false, 4).unwrap();
        let mu = ProductDistribution::new(vec![0.25; 10]).unwrap();
        let s = exact_mu_transform(&f, &mu, Some(4)).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &s).unwrap();
        let back = read_spectrum(&mut &buf[..]).unwrap();
        assert_eq!(s, back);
    }
}
