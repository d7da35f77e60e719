//! The space of continuous functions ℝ⁺ → ℝ^d with the metric ρ of
//! uniform convergence on compacts, and the operators T_τ through which the
//! forced Volterra equation becomes a semigroup.

mod sampled;
mod semigroup;

pub use sampled::{SampleError, SampledFunction};
pub use semigroup::{
    apply_t, rho, semigroup_defect, state_space_defect, RhoParams, SemigroupDefect, SemigroupError, TauImage,
};
