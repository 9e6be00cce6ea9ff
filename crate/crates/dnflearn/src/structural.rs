//! Constructive sign-representing polynomials for DNFs and term-threshold
//! functions, exact term L1 norms under product bases, and the
//! error-vs-spectrum-gap bound verifiers.

use crate::boolcore::{
    clip_unit, DnfFormula, IndexMask, Point, SparsePolynomial, Term, TermThresholdFunction,
    MAX_EXACT_DIM,
};
use crate::dist::{Basis, ProductDistribution};
use crate::error::{Error, Result};
use crate::spectrum::{diff_inf_norm, exact_mu_transform, FnTarget, PointFn};

const L1_SLACK: f64 = 1e-9;

/// Both sides of an error-vs-spectrum-gap inequality, computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub family: String,
    /// `E_mu[|f - g|]`, exact.
    pub lhs: f64,
    /// The bound's value.
    pub rhs: f64,
    /// `rhs - lhs`; a passing report has slack >= -1e-9.
    pub slack: f64,
    /// `||fhat(B_d) - ghat(B_d)||_inf`, exact.
    pub gap: f64,
    pub c: f64,
    pub d: Option<u32>,
    pub epsilon: Option<f64>,
    /// The scale parameter: s for the DNF family, W_1^1(h) for the LTF family,
    /// `||phat(B_d)||_1` for the exact-lemma family.
    pub scale: f64,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.slack >= -L1_SLACK
    }
}

/// Which inequality `verify_error_bound` checks.
pub enum BoundFamily<'a> {
    /// `E|f-g| <= (2 (2-c)^{d/2} s + 1) * gap_d + 4 eps` for an s-term DNF.
    Dnf { s: usize, epsilon: f64 },
    /// `E|f-g| <= (2 (2-c)^{d/2} + 1) W * gap_d + 4 eps` for an LTF of terms
    /// with representation weight `W = W_1^1(h)`.
    Ltf { w1: f64, epsilon: f64 },
    /// `E|f-g| <= gap_d * ||phat(B_d)||_1 + 2 E|p' - p|` for a supplied
    /// 1-sign-representing p and its degree-d part p' (p' = p's restriction
    /// to B_d when p itself has higher degree).
    ExactLemma { p: &'a SparsePolynomial },
}

/// Adds `scale * t` (the `{0,1}` term) to `acc` in the uniform basis:
/// `t = prod_{j in T} (1 + sigma_j x_j)/2`, so the coefficient at `a subset T`
/// is `prod_{j in a} sigma_j / 2^|T|`.
fn add_term_uniform(acc: &mut SparsePolynomial, t: &Term, scale: f64) -> Result<()> {
    let n = t.dim();
    let support = t.support();
    let len = t.len();
    if len > MAX_EXACT_DIM {
        return Err(Error::InvalidParam("term too long to expand".to_string()));
    }
    let base = scale / (1u64 << len) as f64;
    // iterate subsets of the support mask
    let mut sub = support;
    loop {
        let sign = if (sub & t.negatives().bits()).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        acc.add_to(IndexMask::new(n, sub)?, sign * base)?;
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & support;
    }
    Ok(())
}

/// The exact mu-basis expansion of the `{0,1}` term, scaled. Per coordinate
/// `(1 + sigma_j x_j)/2` with `x_j = mu_j + sqrt(1-mu_j^2) phi_j` gives the
/// coefficient at `a subset T` as
/// `prod_{j in a} sigma_j sqrt(1-mu_j^2)/2 * prod_{j in T \ a} (1+sigma_j mu_j)/2`.
fn add_term_mu(
    acc: &mut SparsePolynomial,
    t: &Term,
    mu: &ProductDistribution,
    scale: f64,
) -> Result<()> {
    let n = t.dim();
    if mu.dim() != n {
        return Err(Error::DimensionMismatch(mu.dim(), n));
    }
    let support = t.support();
    if t.len() > MAX_EXACT_DIM {
        return Err(Error::InvalidParam("term too long to expand".to_string()));
    }
    let sigma = |j: u32| -> f64 {
        if t.negatives().contains_var(j) {
            -1.0
        } else {
            1.0
        }
    };
    let mut sub = support;
    loop {
        let mut coeff = scale;
        for j in 0..n {
            if support & (1u64 << j) == 0 {
                continue;
            }
            let m = mu.mu_i(j);
            if sub & (1u64 << j) != 0 {
                coeff *= sigma(j) * (1.0 - m * m).sqrt() / 2.0;
            } else {
                coeff *= (1.0 + sigma(j) * m) / 2.0;
            }
        }
        acc.add_to(IndexMask::new(n, sub)?, coeff)?;
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & support;
    }
    Ok(())
}

/// `Pr_mu[t = 1] = prod_{j in T} (1 + sigma_j mu_j)/2`, exact.
pub fn term_probability(t: &Term, mu: &ProductDistribution) -> Result<f64> {
    if mu.dim() != t.dim() {
        return Err(Error::DimensionMismatch(mu.dim(), t.dim()));
    }
    let mut p = 1.0;
    for j in t.positives().vars() {
        p *= (1.0 + mu.mu_i(j)) / 2.0;
    }
    for j in t.negatives().vars() {
        p *= (1.0 - mu.mu_i(j)) / 2.0;
    }
    Ok(p)
}

/// `dnf_sign_polynomial`: `p(x) = 2 sum_i t_i(x) - 1` in the uniform basis.
/// Sign-represents f with margin 1; `||phat||_1 <= 2s + 1`.
pub fn dnf_sign_polynomial(f: &DnfFormula) -> Result<SparsePolynomial> {
    let mut p = SparsePolynomial::new(f.dim(), Basis::Uniform)?;
    for t in f.terms() {
        add_term_uniform(&mut p, t, 2.0)?;
    }
    p.add_to(IndexMask::new(f.dim(), 0)?, -1.0)?;
    let s = f.term_count() as f64;
    debug_assert!(p.l1_norm() <= 2.0 * s + 1.0 + L1_SLACK);
    Ok(p)
}

/// Same construction in the mu-basis.
pub fn dnf_sign_polynomial_mu(
    f: &DnfFormula,
    mu: &ProductDistribution,
) -> Result<SparsePolynomial> {
    let mut p = SparsePolynomial::new(f.dim(), Basis::Product(mu.clone()))?;
    for t in f.terms() {
        add_term_mu(&mut p, t, mu, 2.0)?;
    }
    p.add_to(IndexMask::new(f.dim(), 0)?, -1.0)?;
    Ok(p)
}

/// The exact mu-basis expansion of a single `{0,1}` term.
pub fn term_mu_polynomial(t: &Term, mu: &ProductDistribution) -> Result<SparsePolynomial> {
    let mut p = SparsePolynomial::new(t.dim(), Basis::Product(mu.clone()))?;
    add_term_mu(&mut p, t, mu, 1.0)?;
    Ok(p)
}

/// `term_mu_l1`: exact `||that_mu||_1`, asserted against the `(2-c)^{d/2}`
/// bound at the instance's own c.
pub fn term_mu_l1(t: &Term, mu: &ProductDistribution) -> Result<f64> {
    let l1 = term_mu_polynomial(t, mu)?.l1_norm();
    let c = mu.c_bound();
    let bound = (2.0 - c).powf(t.len() as f64 / 2.0);
    if l1 > bound + L1_SLACK {
        return Err(Error::ContractViolation(format!(
            "term L1 {l1} exceeds (2-c)^(d/2) = {bound}"
        )));
    }
    Ok(l1)
}

/// Output of the truncation constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPolynomial {
    /// The full sign polynomial p.
    pub full: SparsePolynomial,
    /// p with contributions of long terms removed.
    pub truncated: SparsePolynomial,
    /// Exact `||phat'(B_d)||_1`.
    pub l1: f64,
    /// Exact `E_mu[|p' - p|]`.
    pub truncation_error: f64,
    /// How many terms were dropped / replaced.
    pub long_terms: usize,
}

/// `truncated_dnf_polynomial`: the Th on DNF approximation's `p'`, i.e.
/// `2 sum_{short terms} t_i - 1`, with its exact degree-d L1 norm and the
/// exact truncation error `E_mu[|p' - p|] = 2 sum_{long} Pr[t_i = 1]`.
pub fn truncated_dnf_polynomial(
    f: &DnfFormula,
    mu: &ProductDistribution,
    d: u32,
) -> Result<TruncatedPolynomial> {
    let full = dnf_sign_polynomial_mu(f, mu)?;
    let mut truncated = SparsePolynomial::new(f.dim(), Basis::Product(mu.clone()))?;
    let mut err = 0.0;
    let mut long_terms = 0;
    for t in f.terms() {
        if t.len() <= d {
            add_term_mu(&mut truncated, t, mu, 2.0)?;
        } else {
            long_terms += 1;
            err += 2.0 * term_probability(t, mu)?;
        }
    }
    truncated.add_to(IndexMask::new(f.dim(), 0)?, -1.0)?;
    let l1 = truncated.l1_norm();
    let c = mu.c_bound();
    let s = f.term_count() as f64;
    let l1_bound = 2.0 * (2.0 - c).powf(d as f64 / 2.0) * s + 1.0;
    if l1 > l1_bound + L1_SLACK {
        return Err(Error::ContractViolation(format!(
            "truncated DNF polynomial L1 {l1} exceeds {l1_bound}"
        )));
    }
    Ok(TruncatedPolynomial {
        full,
        truncated,
        l1,
        truncation_error: err,
        long_terms,
    })
}

/// `threshold_truncated_polynomial`: for `F = sign(sum w_i u_i + w_0)` with
/// `u_i = 2 t_i - 1`, replace each long term's `u_i` by the constant -1:
/// `p' = sum_{i not in M} w_i u_i + w_0 - sum_{i in M} w_i`. Requires the
/// linear form to 1-sign-represent F (checked exhaustively).
pub fn threshold_truncated_polynomial(
    h: &TermThresholdFunction,
    mu: &ProductDistribution,
    d: u32,
) -> Result<TruncatedPolynomial> {
    h.check_sign_representation()?;
    let n = h.dim();
    let mut full = SparsePolynomial::new(n, Basis::Product(mu.clone()))?;
    let mut truncated = SparsePolynomial::new(n, Basis::Product(mu.clone()))?;
    let origin = IndexMask::new(n, 0)?;
    full.add_to(origin, h.bias())?;
    truncated.add_to(origin, h.bias())?;
    let mut err = 0.0;
    let mut long_terms = 0;
    for (t, &w) in h.terms().iter().zip(h.weights()) {
        // u_i = 2 t_i - 1
        add_term_mu(&mut full, t, mu, 2.0 * w)?;
        full.add_to(origin, -w)?;
        if t.len() <= d {
            add_term_mu(&mut truncated, t, mu, 2.0 * w)?;
            truncated.add_to(origin, -w)?;
        } else {
            long_terms += 1;
            truncated.add_to(origin, -w)?;
            // E|u_i + 1| = 2 Pr[t_i = 1]
            err += w.abs() * 2.0 * term_probability(t, mu)?;
        }
    }
    let l1 = truncated.l1_norm();
    let c = mu.c_bound();
    let l1_bound = h.weight_l1() * (2.0 * (2.0 - c).powf(d as f64 / 2.0) + 1.0);
    if l1 > l1_bound + L1_SLACK {
        return Err(Error::ContractViolation(format!(
            "truncated threshold polynomial L1 {l1} exceeds {l1_bound}"
        )));
    }
    Ok(TruncatedPolynomial {
        full,
        truncated,
        l1,
        truncation_error: err,
        long_terms,
    })
}

/// The degree for the DNF approximation theorem:
/// `d = floor(log2(scale/eps) / log2(2/(2-c)))`, both logs base 2 so the
/// ratio has no base dependence. `scale` is s (DNF) or W_1^1(h) (LTF).
pub fn bound_degree(scale: f64, epsilon: f64, c: f64) -> Result<u32> {
    if !(scale >= 1.0) || !(epsilon > 0.0) || !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "bound_degree(scale={scale}, eps={epsilon}, c={c})"
        )));
    }
    let num = (scale / epsilon).log2();
    let den = (2.0 / (2.0 - c)).log2();
    Ok((num / den).floor().max(0.0) as u32)
}

/// Computes `E_mu[|f - g|]` and the bound value of the chosen family exactly
/// (full enumeration; g is clipped to [-1,1] defensively). Exact scale only.
pub fn verify_error_bound(
    f: &dyn PointFn,
    g: &dyn PointFn,
    mu: &ProductDistribution,
    d: u32,
    family: &BoundFamily,
) -> Result<BoundReport> {
    let n = f.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch(n, g.dim()));
    }
    if n > 20 {
        return Err(Error::InvalidParam(
            "verify_error_bound needs n <= 20".to_string(),
        ));
    }
    let mut lhs = 0.0;
    for x in Point::all(n) {
        lhs += mu.point_probability(x)? * (f.value(x) - clip_unit(g.value(x))).abs();
    }
    let fs = exact_mu_transform(f, mu, Some(d))?;
    let gn = n;
    let gt = FnTarget::new(gn, |x| clip_unit(g.value(x)));
    let gs = exact_mu_transform(&gt, mu, Some(d))?;
    let gap = diff_inf_norm(&fs, &gs, Some(d))?;
    let c = mu.c_bound();
    let growth = (2.0 - c).powf(d as f64 / 2.0);
    let (name, rhs, eps, scale) = match family {
        BoundFamily::Dnf { s, epsilon } => (
            "dnf",
            (2.0 * growth * *s as f64 + 1.0) * gap + 4.0 * epsilon,
            Some(*epsilon),
            *s as f64,
        ),
        BoundFamily::Ltf { w1, epsilon } => (
            "ltf",
            (2.0 * growth + 1.0) * w1 * gap + 4.0 * epsilon,
            Some(*epsilon),
            *w1,
        ),
        BoundFamily::ExactLemma { p } => {
            if p.dim() != n {
                return Err(Error::DimensionMismatch(p.dim(), n));
            }
            // p' = the degree-d part of p; the residual term is exact.
            let mut pd = SparsePolynomial::new(n, p.basis().clone())?;
            for (&m, &v) in p.coeffs() {
                if m.count_ones() <= d {
                    pd.set(IndexMask::new(n, m)?, v)?;
                }
            }
            let mut resid = 0.0;
            if pd != **p {
                for x in Point::all(n) {
                    let diff = p.eval(x, None)? - pd.eval(x, None)?;
                    resid += mu.point_probability(x)? * diff.abs();
                }
            }
            let l1 = pd.l1_norm();
            ("exact-lemma", gap * l1 + 2.0 * resid, None, l1)
        }
    };
    Ok(BoundReport {
        family: name.to_string(),
        lhs,
        rhs,
        slack: rhs - lhs,
        gap,
        c,
        d: Some(d),
        epsilon: eps,
        scale,
    })
}
