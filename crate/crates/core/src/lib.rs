//! Certified lower bounds on the maximum delay margin of unstable SISO LTI
//! plants via analytic interpolation, and synthesis of rational controllers
//! achieving those margins together with gain and phase margin constraints.

pub mod error;
pub mod rational;
pub mod regions;
pub mod weights;
pub mod outer;
pub mod pick;
pub mod approx;
pub mod margin;
pub mod synthesis;
pub mod benchmarks;

pub use error::{Error, Result};

/// Concrete f64 aliases used throughout the analysis pipeline.
pub type Poly = rational::Polynomial<f64>;
pub type Rational = rational::RationalFunction<f64>;
pub type PlantF64 = rational::Plant<f64>;
pub type C64 = num_complex::Complex<f64>;
