//! Holonomy-bound toolkit: exact power series, hypergeometric Padé
//! families, conformal maps onto slit and lune domains, capacity
//! integrals, the bound evaluator, 2-adic zeta values and the arithmetic
//! certificate searches.

pub mod capacity;
pub mod confmaps;
pub mod dioph;
pub mod error;
pub mod holobound;
pub mod hyperpade;
pub mod numeric;
pub mod padiczeta;
pub mod regressions;
pub mod series;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use series::{ExactSeries, Rational, Series};

/// Series over `f64`.
pub type FloatSeries = Series<f64>;
/// Series over `Complex64`.
pub type ComplexSeries = Series<Complex64>;
