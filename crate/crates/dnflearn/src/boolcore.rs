//! Core boolean-function representations: points and coefficient indices as
//! bit masks, terms, DNF formulas, sparse polynomials and the `[-1,1]`
//! projection, plus seeded random instance generation.
//!
//! Conventions used throughout the crate:
//! - a `Point` is an assignment in `{-1,+1}^n`; bit `i` set means `x_i = +1`;
//! - an `IndexMask` is a coefficient index `a` in `{0,1}^n`; its degree is the
//!   popcount;
//! - `sign(0) = +1` everywhere.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dist::{Basis, ProductDistribution};
use crate::error::{Error, Result};

/// Largest dimension representable in a single machine word mask.
pub const MAX_DIM: u32 = 63;
/// Largest dimension for which exact `2^n`-table paths are allowed.
pub const MAX_EXACT_DIM: u32 = 24;

/// Global sign convention: `sign(0) = +1`.
#[inline]
pub fn sign_pm(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn check_dim(n: u32) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidParam(format!(
            "dimension must be in 1..={MAX_DIM}, got {n}"
        )));
    }
    Ok(())
}

fn check_bits(n: u32, bits: u64) -> Result<()> {
    check_dim(n)?;
    if n < 64 && bits >> n != 0 {
        return Err(Error::InvalidParam(format!(
            "bits {bits:#x} exceed dimension {n}"
        )));
    }
    Ok(())
}

/// An assignment `x` in `{-1,+1}^n`, stored as an n-bit mask (bit set = +1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    n: u32,
    bits: u64,
}

impl Point {
    pub fn new(n: u32, bits: u64) -> Result<Self> {
        check_bits(n, bits)?;
        Ok(Point { n, bits })
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Value of coordinate `i` as `+1.0` or `-1.0`.
    #[inline]
    pub fn coord(&self, i: u32) -> f64 {
        debug_assert!(i < self.n);
        if self.bits >> i & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Returns the point with coordinate `i` forced to `b` (`+1` if true).
    #[inline]
    pub fn with_coord(&self, i: u32, b: bool) -> Point {
        debug_assert!(i < self.n);
        let bits = if b {
            self.bits | 1 << i
        } else {
            self.bits & !(1 << i)
        };
        Point { n: self.n, bits }
    }

    /// Iterates over all `2^n` points in mask order. Requires `n <= MAX_EXACT_DIM`.
    pub fn all(n: u32) -> impl Iterator<Item = Point> {
        assert!(n <= MAX_EXACT_DIM, "exhaustive enumeration needs n <= 24");
        (0u64..1 << n).map(move |bits| Point { n, bits })
    }
}

/// A coefficient index `a` in `{0,1}^n`; `degree(a) = popcount`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexMask {
    n: u32,
    bits: u64,
}

impl IndexMask {
    pub fn new(n: u32, bits: u64) -> Result<Self> {
        check_bits(n, bits)?;
        Ok(IndexMask { n, bits })
    }

    pub fn empty(n: u32) -> Self {
        IndexMask { n, bits: 0 }
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.bits.count_ones()
    }

    #[inline]
    pub fn contains_var(&self, i: u32) -> bool {
        self.bits >> i & 1 == 1
    }

    #[inline]
    pub fn is_subset_of(&self, other: u64) -> bool {
        self.bits & !other == 0
    }

    /// Parity `chi_a(x) = prod_{i in a} x_i`.
    #[inline]
    pub fn parity_at(&self, x: Point) -> f64 {
        debug_assert_eq!(self.n, x.n);
        // x_i = -1 on unset bits of x, so the sign is the parity of a & !x.
        if (self.bits & !x.bits).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).filter(move |i| self.contains_var(*i))
    }
}

/// An AND of literals: `positives` un-negated, `negatives` negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    positives: IndexMask,
    negatives: IndexMask,
}

impl Term {
    pub fn new(positives: IndexMask, negatives: IndexMask) -> Result<Self> {
        if positives.dim() != negatives.dim() {
            return Err(Error::DimensionMismatch(positives.dim(), negatives.dim()));
        }
        if positives.bits() & negatives.bits() != 0 {
            return Err(Error::InvalidParam(
                "term literal masks overlap".to_string(),
            ));
        }
        Ok(Term {
            positives,
            negatives,
        })
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.positives.dim()
    }

    #[inline]
    pub fn positives(&self) -> IndexMask {
        self.positives
    }

    #[inline]
    pub fn negatives(&self) -> IndexMask {
        self.negatives
    }

    /// Mask of all variables mentioned by the term.
    #[inline]
    pub fn support(&self) -> u64 {
        self.positives.bits() | self.negatives.bits()
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.support().count_ones()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.support() == 0
    }
}

/// `eval_term`: the `{0,1}` value of a term at a point. The empty term is 1.
#[inline]
pub fn eval_term(t: &Term, x: Point) -> Result<u8> {
    if t.dim() != x.dim() {
        return Err(Error::DimensionMismatch(t.dim(), x.dim()));
    }
    Ok(eval_term_unchecked(t, x))
}

#[inline]
pub fn eval_term_unchecked(t: &Term, x: Point) -> u8 {
    let pos_ok = t.positives.bits() & !x.bits() == 0;
    let neg_ok = t.negatives.bits() & x.bits() == 0;
    (pos_ok && neg_ok) as u8
}

/// An s-term DNF over `{-1,+1}^n`, evaluated to `{-1,+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    n: u32,
    terms: Vec<Term>,
}

impl DnfFormula {
    pub fn new(n: u32, terms: Vec<Term>) -> Result<Self> {
        check_dim(n)?;
        if terms.is_empty() {
            return Err(Error::InvalidParam(
                "empty DNF disallowed; use a 1-term degenerate formula".to_string(),
            ));
        }
        for t in &terms {
            if t.dim() != n {
                return Err(Error::DimensionMismatch(n, t.dim()));
            }
        }
        Ok(DnfFormula { n, terms })
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// True iff every term has empty negatives.
    pub fn is_monotone(&self) -> bool {
        self.terms.iter().all(|t| t.negatives.bits() == 0)
    }

    /// Union of all term supports.
    pub fn support(&self) -> u64 {
        self.terms.iter().fold(0, |m, t| m | t.support())
    }

    #[inline]
    pub fn eval(&self, x: Point) -> f64 {
        debug_assert_eq!(self.n, x.dim());
        for t in &self.terms {
            if eval_term_unchecked(t, x) == 1 {
                return 1.0;
            }
        }
        -1.0
    }
}

/// `eval_dnf`: +1 iff some term is satisfied, else -1.
pub fn eval_dnf(f: &DnfFormula, x: Point) -> Result<f64> {
    if f.dim() != x.dim() {
        return Err(Error::DimensionMismatch(f.dim(), x.dim()));
    }
    Ok(f.eval(x))
}

/// The projection `P_1` of a real value to `[-1,1]`. Rejects NaN.
pub fn project_unit(v: f64) -> Result<f64> {
    if v.is_nan() {
        return Err(Error::NonFinite("project_unit on NaN".to_string()));
    }
    Ok(clip_unit(v))
}

/// Hot-path clip assuming a non-NaN input.
#[inline]
pub fn clip_unit(v: f64) -> f64 {
    if v > 1.0 {
        1.0
    } else if v < -1.0 {
        -1.0
    } else {
        v
    }
}

/// Integer-weight threshold of terms: `f(x) = sign(sum w_i u_i(x) + w_0)`
/// where each `u_i` is the `{-1,+1}` value of a term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermThresholdFunction {
    terms: Vec<Term>,
    weights: Vec<f64>,
    bias: f64,
}

impl TermThresholdFunction {
    pub fn new(terms: Vec<Term>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if terms.is_empty() || terms.len() != weights.len() {
            return Err(Error::InvalidParam(
                "term/weight arity mismatch".to_string(),
            ));
        }
        let n = terms[0].dim();
        for t in &terms {
            if t.dim() != n {
                return Err(Error::DimensionMismatch(n, t.dim()));
            }
        }
        Ok(TermThresholdFunction {
            terms,
            weights,
            bias,
        })
    }

    pub fn dim(&self) -> u32 {
        self.terms[0].dim()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// `W_1^1(h) = |w_0| + sum |w_i|` of the representing linear form.
    pub fn weight_l1(&self) -> f64 {
        self.bias.abs() + self.weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    /// The linear form `q(y(x)) = sum w_i u_i(x) + w_0`.
    pub fn linear_form(&self, x: Point) -> f64 {
        let mut q = self.bias;
        for (t, w) in self.terms.iter().zip(&self.weights) {
            let u = 2.0 * eval_term_unchecked(t, x) as f64 - 1.0;
            q += w * u;
        }
        q
    }

    pub fn eval(&self, x: Point) -> f64 {
        sign_pm(self.linear_form(x))
    }

    /// Exhaustively checks that the linear form 1-sign-represents the function
    /// (`|q(x)| >= 1` everywhere). Desk scale only.
    pub fn check_sign_representation(&self) -> Result<()> {
        let n = self.dim();
        if n > MAX_EXACT_DIM {
            return Err(Error::InvalidParam(
                "sign-representation check needs n <= 24".to_string(),
            ));
        }
        for x in Point::all(n) {
            if self.linear_form(x).abs() < 1.0 {
                return Err(Error::ContractViolation(format!(
                    "|q(x)| < 1 at x = {:#x}",
                    x.bits()
                )));
            }
        }
        Ok(())
    }
}

/// A sparse multilinear polynomial `p(x) = sum_a p(a) * basis_a(x)` in the
/// uniform (parity) or a product basis. No explicit zero coefficients stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial {
    n: u32,
    basis: Basis,
    coeffs: BTreeMap<u64, f64>,
}

impl SparsePolynomial {
    pub fn new(n: u32, basis: Basis) -> Result<Self> {
        check_dim(n)?;
        if let Basis::Product(mu) = &basis {
            if mu.dim() != n {
                return Err(Error::DimensionMismatch(n, mu.dim()));
            }
        }
        Ok(SparsePolynomial {
            n,
            basis,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, f64> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u64) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    /// Sets a coefficient; zero removes the entry.
    pub fn set(&mut self, mask: IndexMask, v: f64) -> Result<()> {
        if mask.dim() != self.n {
            return Err(Error::DimensionMismatch(mask.dim(), self.n));
        }
        if v == 0.0 {
            self.coeffs.remove(&mask.bits());
        } else {
            self.coeffs.insert(mask.bits(), v);
        }
        Ok(())
    }

    pub fn add_to(&mut self, mask: IndexMask, dv: f64) -> Result<()> {
        let cur = self.coeff(mask.bits());
        self.set(mask, cur + dv)
    }

    pub fn max_degree(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|m| m.count_ones())
            .max()
            .unwrap_or(0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|v| v.abs()).sum()
    }

    /// Evaluates at `x`. A product-basis polynomial carries its own mu; the
    /// optional argument, when given, must agree with the basis tag.
    pub fn eval(&self, x: Point, mu: Option<&ProductDistribution>) -> Result<f64> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch(x.dim(), self.n));
        }
        match (&self.basis, mu) {
            (Basis::Uniform, Some(_)) => {
                return Err(Error::BasisMismatch(
                    "uniform polynomial evaluated with a mu argument".to_string(),
                ))
            }
            (Basis::Product(own), Some(given)) if own != given => {
                return Err(Error::BasisMismatch(
                    "mu argument differs from the polynomial's basis".to_string(),
                ))
            }
            _ => {}
        }
        let mut acc = 0.0;
        match &self.basis {
            Basis::Uniform => {
                for (&m, &c) in &self.coeffs {
                    let a = IndexMask { n: self.n, bits: m };
                    acc += c * a.parity_at(x);
                }
            }
            Basis::Product(own) => {
                for (&m, &c) in &self.coeffs {
                    let a = IndexMask { n: self.n, bits: m };
                    acc += c * own.basis_eval_unchecked(a, x);
                }
            }
        }
        Ok(acc)
    }
}

/// `eval_sparse_poly` per the module contract; see [`SparsePolynomial::eval`].
pub fn eval_sparse_poly(
    p: &SparsePolynomial,
    x: Point,
    mu: Option<&ProductDistribution>,
) -> Result<f64> {
    p.eval(x, mu)
}

/// Generates a random s-term DNF: each term has independently uniform length
/// in `[1, max_len]` over distinct variables. Deterministic given the seed.
pub fn random_dnf(n: u32, s: usize, max_len: u32, monotone: bool, seed: u64) -> Result<DnfFormula> {
    check_dim(n)?;
    if s == 0 {
        return Err(Error::InvalidParam("need s >= 1".to_string()));
    }
    if max_len == 0 || max_len > n {
        return Err(Error::InvalidParam(format!(
            "need 1 <= max_len <= n, got max_len={max_len}, n={n}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(s);
    for _ in 0..s {
        let len = rng.gen_range(1..=max_len);
        let mut pos = 0u64;
        let mut neg = 0u64;
        let mut picked = 0u64;
        while (pos | neg).count_ones() < len {
            let i = rng.gen_range(0..n);
            if picked >> i & 1 == 1 {
                continue;
            }
            picked |= 1 << i;
            if monotone || rng.gen_bool(0.5) {
                pos |= 1 << i;
            } else {
                neg |= 1 << i;
            }
        }
        terms.push(Term::new(
            IndexMask::new(n, pos)?,
            IndexMask::new(n, neg)?,
        )?);
    }
    DnfFormula::new(n, terms)
}

// --- textual DNF format ------------------------------------------------------
//
// `n=<int>; term | term | ...` with each term `[!]<1-based var>&...`.
// The always-true empty term is spelled `T`.

impl fmt::Display for DnfFormula {
    fn fmt(&self, fo: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fo, "n={}; ", self.n)?;
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(fo, " | ")?;
            }
            if t.is_empty() {
                write!(fo, "T")?;
                continue;
            }
            let mut first = true;
            for i in 0..self.n {
                let lit = if t.positives.contains_var(i) {
                    Some(false)
                } else if t.negatives.contains_var(i) {
                    Some(true)
                } else {
                    None
                };
                if let Some(negated) = lit {
                    if !first {
                        write!(fo, "&")?;
                    }
                    first = false;
                    if negated {
                        write!(fo, "!")?;
                    }
                    write!(fo, "{}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}

pub fn parse_dnf(text: &str) -> Result<DnfFormula> {
    let text = text.trim();
    let rest = text
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse("expected leading n=<int>".to_string()))?;
    let (head, body) = rest
        .split_once(';')
        .ok_or_else(|| Error::Parse("expected ';' after dimension".to_string()))?;
    let n: u32 = head
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension {head:?}")))?;
    let mut terms = Vec::new();
    for raw in body.split('|') {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(Error::Parse("empty term between '|'".to_string()));
        }
        if raw == "T" {
            terms.push(Term::new(IndexMask::empty(n), IndexMask::empty(n))?);
            continue;
        }
        let mut pos = 0u64;
        let mut neg = 0u64;
        for lit in raw.split('&') {
            let lit = lit.trim();
            let (negated, num) = match lit.strip_prefix('!') {
                Some(v) => (true, v),
                None => (false, lit),
            };
            let idx: u32 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad literal {lit:?}")))?;
            if idx == 0 || idx > n {
                return Err(Error::Parse(format!("variable {idx} out of range 1..={n}")));
            }
            let bit = 1u64 << (idx - 1);
            if (pos | neg) & bit != 0 {
                return Err(Error::Parse(format!("variable {idx} repeated in a term")));
            }
            if negated {
                neg |= bit;
            } else {
                pos |= bit;
            }
        }
        terms.push(Term::new(IndexMask::new(n, pos)?, IndexMask::new(n, neg)?)?);
    }
    DnfFormula::new(n, terms)
}
