use super::{scalar_fn, AnalysisError, ZeroSet};
use crate::caputo_solver::Trajectory;
use crate::field_expr::VectorField;
use crate::real::{ls_slope, Real};

/// Where a scalar solution ends up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit<T> {
    State(T),
    MinusInfinity,
    PlusInfinity,
}

impl<T: Real> Limit<T> {
    pub fn state(&self) -> Option<T> {
        match *self {
            Limit::State(x) => Some(x),
            _ => None,
        }
    }
}

/// Predicts lim x(t, η) from the sign pattern of g between its zeros.
///
/// The solution moves monotonically in the direction of sign g(η) and can
/// neither reach nor cross a zero, so it settles on the next zero in that
/// direction, or leaves to ±∞ when there is none.
pub fn classify_limit<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    zs: &ZeroSet<T>,
    eta: T,
) -> Result<Limit<T>, AnalysisError> {
    let g = scalar_fn(field)?;
    if let Some(j) = zs.position(eta) {
        return Ok(Limit::State(zs.zeros[j]));
    }
    // first zero strictly above η
    let above = zs.zeros.partition_point(|&z| z <= eta);
    let left = above.checked_sub(1);
    let hyperbolic = |j: usize| !zs.degenerate[j];
    let rising = match (left, (above < zs.len()).then_some(above)) {
        // g > 0 on an interval iff it rises through the zero on its left
        (Some(l), _) if hyperbolic(l) => zs.derivs[l] > T::zero(),
        (_, Some(r)) if hyperbolic(r) => zs.derivs[r] < T::zero(),
        _ => g(eta)? > T::zero(),
    };
    Ok(if rising {
        zs.zeros.get(above).map_or(Limit::PlusInfinity, |&z| Limit::State(z))
    } else {
        above
            .checked_sub(1)
            .map_or(Limit::MinusInfinity, |j| Limit::State(zs.zeros[j]))
    })
}

/// Power-law fit of the distance to a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    /// Slope of log|x(t) - x*| against log t.
    pub slope: T,
    pub points: usize,
    pub window: (T, T),
}

/// Minimum number of usable samples for [`rate_fit`].
pub const RATE_FIT_MIN_POINTS: usize = 20;

/// Fits |x(t) - x*| ~ C t^slope over [t_end/100, t_end].
pub fn rate_fit<T: Real>(traj: &Trajectory<T>, x_star: T) -> Result<RateFit<T>, AnalysisError> {
    rate_fit_component(traj, 0, x_star)
}

/// [`rate_fit`] applied to one coordinate of a vector trajectory.
pub fn rate_fit_component<T: Real>(
    traj: &Trajectory<T>,
    component: usize,
    x_star: T,
) -> Result<RateFit<T>, AnalysisError> {
    if let Some(e) = &traj.escape {
        return Err(AnalysisError::Escaped(e.index));
    }
    if component >= traj.dim {
        return Err(AnalysisError::Precondition(format!(
            "component {component} of a {}-dimensional trajectory",
            traj.dim
        )));
    }
    let t_end = traj.time(traj.len() - 1);
    let start = t_end / T::lit(100.0);
    let floor = T::lit(1e-12);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, x) in traj.component(component).enumerate() {
        let t = traj.time(i);
        let d = (x - x_star).abs();
        if t >= start && t > T::zero() && d > floor {
            xs.push(t.ln());
            ys.push(d.ln());
        }
    }
    if xs.len() < RATE_FIT_MIN_POINTS {
        return Err(AnalysisError::InsufficientData {
            usable: xs.len(),
            required: RATE_FIT_MIN_POINTS,
        });
    }
    Ok(RateFit {
        slope: ls_slope(&xs, &ys),
        points: xs.len(),
        window: (start, t_end),
    })
}
