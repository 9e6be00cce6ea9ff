//! Product distributions `D_mu` over `{-1,+1}^n`: sampling, point
//! probabilities, the orthonormal basis `phi_{mu,a}`, c-boundedness and the
//! smoothed-model perturbation.

use rand::Rng;

use crate::boolcore::{IndexMask, Point};
use crate::error::{Error, Result};

/// A product distribution with mean vector `mu` in `(-1,1)^n`.
///
/// `x_i = +1` with probability `(1+mu_i)/2`, independently. The c-bound is
/// always recomputed from `mu`, never trusted from input.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDistribution {
    mu: Vec<f64>,
}

impl ProductDistribution {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() || mu.len() > 63 {
            return Err(Error::InvalidParam(format!(
                "mu must have 1..=63 coordinates, got {}",
                mu.len()
            )));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !m.is_finite() || m.abs() >= 1.0 {
                return Err(Error::InvalidParam(format!(
                    "mu[{i}] = {m} outside (-1,1)"
                )));
            }
        }
        Ok(ProductDistribution { mu })
    }

    /// The uniform distribution (`mu = 0`).
    pub fn uniform(n: u32) -> Self {
        ProductDistribution {
            mu: vec![0.0; n as usize],
        }
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.mu.len() as u32
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    #[inline]
    pub fn mu_i(&self, i: u32) -> f64 {
        self.mu[i as usize]
    }

    pub fn is_uniform(&self) -> bool {
        self.mu.iter().all(|&m| m == 0.0)
    }

    /// Largest `c` with every `mu_i` in `[-1+c, 1-c]`; in `(0,1]`.
    pub fn c_bound(&self) -> f64 {
        1.0 - self
            .mu
            .iter()
            .map(|m| m.abs())
            .fold(0.0f64, f64::max)
    }

    /// Draws a point; bit `i` set with probability `(1+mu_i)/2`.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        let n = self.dim();
        if self.is_uniform() {
            // one word of randomness covers all coordinates
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let bits = rng.gen::<u64>() & mask;
            return Point::new(n, bits).expect("sampled bits fit dimension");
        }
        let mut bits = 0u64;
        for (i, &m) in self.mu.iter().enumerate() {
            if rng.gen::<f64>() < (1.0 + m) / 2.0 {
                bits |= 1 << i;
            }
        }
        Point::new(self.dim(), bits).expect("sampled bits fit dimension")
    }

    /// `phi_{mu,a}(x) = prod_{a_i=1} (x_i - mu_i)/sqrt(1-mu_i^2)`.
    pub fn basis_eval(&self, a: IndexMask, x: Point) -> Result<f64> {
        if a.dim() != self.dim() || x.dim() != self.dim() {
            return Err(Error::DimensionMismatch(a.dim(), self.dim()));
        }
        Ok(self.basis_eval_unchecked(a, x))
    }

    #[inline]
    pub fn basis_eval_unchecked(&self, a: IndexMask, x: Point) -> f64 {
        let mut v = 1.0;
        for i in a.vars() {
            let m = self.mu[i as usize];
            v *= (x.coord(i) - m) / (1.0 - m * m).sqrt();
        }
        v
    }

    /// `Pr_mu[x] = prod_i (1 + mu_i x_i)/2`.
    pub fn point_probability(&self, x: Point) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch(x.dim(), self.dim()));
        }
        let mut p = 1.0;
        for (i, &m) in self.mu.iter().enumerate() {
            p *= (1.0 + m * x.coord(i as u32)) / 2.0;
        }
        Ok(p)
    }
}

/// The basis tag carried by sparse polynomials and spectra.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    Uniform,
    Product(ProductDistribution),
}

impl Basis {
    pub fn mu(&self) -> Option<&ProductDistribution> {
        match self {
            Basis::Uniform => None,
            Basis::Product(mu) => Some(mu),
        }
    }

    /// Both tags denote the same inner product (`product(0)` == uniform).
    pub fn compatible(&self, other: &Basis) -> bool {
        match (self, other) {
            (Basis::Uniform, Basis::Uniform) => true,
            (Basis::Product(a), Basis::Product(b)) => a == b,
            (Basis::Uniform, Basis::Product(m)) | (Basis::Product(m), Basis::Uniform) => {
                m.is_uniform()
            }
        }
    }
}

/// Smoothed-model perturbation: each `mu_i` uniform in `[mu_bar_i - c, mu_bar_i + c]`.
/// Requires `mu_bar` to be 2c-bounded so the result is c-bounded.
pub fn perturb<R: Rng>(mu_bar: &[f64], c: f64, rng: &mut R) -> Result<ProductDistribution> {
    if !(c > 0.0 && c <= 0.5) {
        return Err(Error::InvalidParam(format!("need c in (0, 1/2], got {c}")));
    }
    for (i, &m) in mu_bar.iter().enumerate() {
        if m.abs() > 1.0 - 2.0 * c + 1e-15 {
            return Err(Error::InvalidParam(format!(
                "mu_bar[{i}] = {m} is not 2c-bounded for c = {c}"
            )));
        }
    }
    let mu = mu_bar
        .iter()
        .map(|&m| m + rng.gen_range(-c..=c))
        .collect::<Vec<_>>();
    ProductDistribution::new(mu)
}

/// Estimates `mu` coordinate-wise from samples: empirical means over
/// `N = ceil(2 ln(2n/delta) / eta^2)` draws.
pub fn estimate_mu<R: Rng, F: FnMut(&mut R) -> Point>(
    n: u32,
    eta: f64,
    delta: f64,
    rng: &mut R,
    mut draw: F,
) -> Result<(ProductDistribution, u64)> {
    if !(eta > 0.0 && eta < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(
            "estimate_mu needs eta, delta in (0,1)".to_string(),
        ));
    }
    let count = (2.0 * (2.0 * n as f64 / delta).ln() / (eta * eta)).ceil() as u64;
    let mut sums = vec![0.0f64; n as usize];
    for _ in 0..count {
        let x = draw(rng);
        for i in 0..n {
            sums[i as usize] += x.coord(i);
        }
    }
    let mu = sums
        .into_iter()
        // Clamp strictly inside (-1,1) so the estimate is a valid mean vector.
        .map(|s| (s / count as f64).clamp(-1.0 + 1e-9, 1.0 - 1e-9))
        .collect::<Vec<_>>();
    Ok((ProductDistribution::new(mu)?, count))
}
