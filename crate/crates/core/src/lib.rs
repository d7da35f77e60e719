//! Numerical toolkit for autonomous Caputo fractional differential equations
//! ᶜD^α x = g(x), 0 < α < 1: Mittag-Leffler evaluation, a fractional
//! Adams predictor-corrector, global attractors and decay envelopes of
//! scalar fields, product-form triangular systems, one-parameter
//! bifurcation sweeps and the function-space operators T_τ.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the precision to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod caputo_solver;
pub mod field_expr;
pub mod function_space;
pub mod mittag_leffler;
pub mod scalar_analysis;
pub mod triangular;
mod quad;
mod real;

pub use real::Real;

pub type Problem = caputo_solver::CaputoProblem<f64>;
pub type Trajectory = caputo_solver::Trajectory<f64>;
pub type ZeroSet = scalar_analysis::ZeroSet<f64>;
pub type AttractorInterval = scalar_analysis::AttractorInterval<f64>;
pub type DissipativityCertificate = scalar_analysis::DissipativityCertificate<f64>;
pub type HeteroclinicOrbit = scalar_analysis::HeteroclinicOrbit<f64>;
pub type BoundReport = scalar_analysis::BoundReport<f64>;
pub type ProductAttractor = triangular::ProductAttractor<f64>;
pub type BifurcationDiagram = bifurcation::BifurcationDiagram<f64>;
pub type SampledFunction = function_space::SampledFunction<f64>;
pub type MlQuery = mittag_leffler::MlQuery<f64>;
