//! Learning DNF expressions and polynomial threshold functions from heavy
//! low-degree Fourier coefficients, over uniform, product and smoothed
//! product distributions.

pub mod approx;
pub mod boolcore;
pub mod dist;
pub mod error;
pub mod harness;
pub mod learners;
pub mod oracles;
pub mod recovery;
pub mod spectrum;
pub mod structural;

pub use boolcore::{DnfFormula, IndexMask, Point, SparsePolynomial, Term, TermThresholdFunction};
pub use dist::{Basis, ProductDistribution};
pub use error::{Error, Result};
pub use spectrum::{DenseSpectrum, PointFn, SparseSpectrum};
