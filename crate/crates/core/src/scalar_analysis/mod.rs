//! Qualitative theory of scalar equations D^α x = g(x).
//!
//! Under the dissipativity condition (H1) ⟨x, g(x)⟩ ≤ a - b‖x‖² and the
//! non-degeneracy condition (H2) g'(x*) ≠ 0 on the zero set 𝓝(g), the
//! global attractor is [min 𝓝(g), max 𝓝(g)], every solution converges to a
//! zero at rate t^{-α}, and consecutive zeros are joined by heteroclinic
//! orbits. This module turns those statements into checks on sampled fields
//! and solver output.

mod envelope;
mod heteroclinic;
mod limits;
mod zeros;

pub use envelope::{
    default_lipschitz, envelope_check, gamma_rate_constant, lower_bound_check, BoundReport,
};
pub use heteroclinic::{backward_extend, heteroclinic_orbit, BackwardExtension, HeteroclinicOrbit};
pub use limits::{classify_limit, rate_fit, rate_fit_component, Limit, RateFit, RATE_FIT_MIN_POINTS};
pub use zeros::{attractor_interval, find_zeros, find_zeros_tolerant, AttractorInterval, ZeroSet};

use crate::caputo_solver::SolveError;
use crate::field_expr::{EvalError, VectorField};
use crate::mittag_leffler::MlError;
use crate::real::Real;

/// Smallest |g'| accepted at a zero.
pub const H2_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("(H2) fails: g'({zero}) = {derivative}")]
    H2Violation { zero: f64, derivative: f64 },
    #[error("{0}")]
    Precondition(String),
    #[error("degenerate basin: {0}")]
    DegenerateBasin(String),
    #[error("only {usable} usable points, need {required}")]
    InsufficientData { usable: usize, required: usize },
    #[error("no sign change of x(t_back, zeta) - eta on ({lo}, {hi})")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("backward extension stalled with residual {residual}")]
    NoConvergence { residual: f64 },
    #[error("trajectory escaped at grid index {0}")]
    Escaped(usize),
}

/// g as a function of one real variable; the field must be scalar.
pub(crate) fn scalar_fn<'a, T: Real, F: VectorField<T> + ?Sized>(
    field: &'a F,
) -> Result<impl Fn(T) -> Result<T, EvalError> + 'a, AnalysisError> {
    if field.dim() != 1 {
        return Err(AnalysisError::Precondition(format!(
            "expected a scalar field, got dimension {}",
            field.dim()
        )));
    }
    Ok(move |x: T| {
        let mut out = [T::zero()];
        field.eval_into(&[x], &mut out)?;
        Ok(out[0])
    })
}

/// Evenly spaced points lo, ..., hi (n ≥ 2 of them).
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> impl Iterator<Item = T> {
    let last = T::from_usize_exact(n - 1);
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * T::from_usize_exact(i) / last
        }
    })
}

/// Points of the cube [lo, hi]^dim on a tensor grid with about `n` points
/// in total (exactly `n` when dim = 1).
pub fn cube_grid<T: Real>(scan: (T, T), dim: usize, n: usize) -> Vec<Vec<T>> {
    let per_axis = if dim == 1 {
        n
    } else {
        ((n as f64).powf(1.0 / dim as f64).ceil() as usize).max(2)
    };
    let axis: Vec<T> = linspace(scan.0, scan.1, per_axis).collect();
    let mut idx = vec![0usize; dim];
    let mut out = Vec::with_capacity(per_axis.pow(dim as u32));
    loop {
        out.push(idx.iter().map(|&k| axis[k]).collect());
        let mut c = 0;
        loop {
            if c == dim {
                return out;
            }
            idx[c] += 1;
            if idx[c] < per_axis {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// A sampled (H1) certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityCertificate<T> {
    pub a: T,
    pub b: T,
    /// Every coordinate was sampled over this interval.
    pub scan: (T, T),
    /// min over the samples of a - b‖x‖² - ⟨x, g(x)⟩.
    pub worst_margin: T,
    pub worst_at: Vec<T>,
}

impl<T: Real> DissipativityCertificate<T> {
    /// Radius √(a/b) of the ball containing every zero.
    pub fn radius(&self) -> T {
        (self.a / self.b).sqrt()
    }

    /// [-√(a/b) - 1, √(a/b) + 1].
    pub fn default_scan(&self) -> (T, T) {
        let r = self.radius() + T::one();
        (-r, r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum H1Outcome<T> {
    Pass(DissipativityCertificate<T>),
    /// The inequality fails at `at` inside the scan; nothing is claimed
    /// about the field beyond the scan interval.
    Fail { at: Vec<T>, margin: T },
}

impl<T> H1Outcome<T> {
    pub fn certificate(&self) -> Option<&DissipativityCertificate<T>> {
        match self {
            H1Outcome::Pass(c) => Some(c),
            H1Outcome::Fail { .. } => None,
        }
    }
}

fn inner_product<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

/// Samples a - b‖x‖² - ⟨x, g(x)⟩ ≥ 0 on about `n_samples` points of the
/// cube scan^d.
pub fn check_h1<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    a: T,
    b: T,
    scan: (T, T),
    n_samples: usize,
) -> Result<H1Outcome<T>, AnalysisError> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(AnalysisError::Precondition("(H1) needs a > 0 and b > 0".into()));
    }
    if n_samples < 1000 || !(scan.0 < scan.1) {
        return Err(AnalysisError::Precondition(
            "(H1) scan needs lo < hi and at least 1000 samples".into(),
        ));
    }
    let mut worst: (T, Option<Vec<T>>) = (T::infinity(), None);
    for x in cube_grid(scan, field.dim(), n_samples) {
        let gx = field.eval(&x)?;
        let margin = a - b * inner_product(&x, &x) - inner_product(&x, &gx);
        if margin < worst.0 {
            worst = (margin, Some(x));
        }
    }
    let (margin, at) = (worst.0, worst.1.unwrap_or_default());
    Ok(if margin >= T::zero() {
        H1Outcome::Pass(DissipativityCertificate {
            a,
            b,
            scan,
            worst_margin: margin,
            worst_at: at,
        })
    } else {
        H1Outcome::Fail { at, margin }
    })
}

/// Looks for constants (a, b) that pass [`check_h1`] on `scan`.
///
/// For each trial b the smallest admissible a is max(b‖x‖² + ⟨x, g(x)⟩);
/// the trial is rejected when that maximum sits in the outer tenth of the
/// scan, since the inequality is then probably failing beyond it.
pub fn search_h1<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    scan: (T, T),
    n_samples: usize,
) -> Result<Option<DissipativityCertificate<T>>, AnalysisError> {
    let width = scan.1 - scan.0;
    let (inner_lo, inner_hi) = (scan.0 + width / T::lit(10.0), scan.1 - width / T::lit(10.0));
    let points = cube_grid(scan, field.dim(), n_samples);
    let values = points.iter().map(|x| field.eval(x)).collect::<Result<Vec<_>, _>>()?;
    for b in [1.0, 0.5, 0.25, 0.1, 0.01] {
        let b = T::lit(b);
        let mut best = (T::neg_infinity(), 0);
        for (k, (x, gx)) in points.iter().zip(&values).enumerate() {
            let v = b * inner_product(x, x) + inner_product(x, gx);
            if v > best.0 {
                best = (v, k);
            }
        }
        if points[best.1].iter().any(|&c| c < inner_lo || c > inner_hi) {
            continue;
        }
        let a = (best.0 * T::lit(1.01)).max(T::lit(1e-6));
        if let H1Outcome::Pass(c) = check_h1(field, a, b, scan, n_samples)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
