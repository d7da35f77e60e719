use super::{scalar_fn, AnalysisError, ZeroSet};
use crate::caputo_solver::{solve_pece, CaputoProblem};
use crate::field_expr::VectorField;
use crate::real::Real;

/// Logit range searched by the bisection; σ(±700) is within 1e-304 of 0 or 1.
const LOGIT_RANGE: f64 = 700.0;

/// Result of solving x(t_back, ζ) = η for ζ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardExtension<T> {
    /// x(-t_back, η).
    pub zeta: T,
    /// x(t_back, ζ) - η.
    pub residual: T,
    pub solves: usize,
}

/// Open interval (zeros[j-1], zeros[j]) strictly containing η.
fn enclosing<T: Real>(zs: &ZeroSet<T>, eta: T) -> Result<(T, T), AnalysisError> {
    let j = zs.zeros.partition_point(|&z| z <= eta);
    if j == 0 || j == zs.len() {
        return Err(AnalysisError::Precondition(format!(
            "eta = {eta} is not between two adjacent zeros"
        )));
    }
    Ok((zs.zeros[j - 1], zs.zeros[j]))
}

/// x(-t_back, η): the initial value whose forward solution reaches η at t_back.
///
/// ζ ↦ x(t_back, ζ) is increasing, so ζ is found by bisection over the open
/// interval between the zeros around η. The interval is parameterised as
/// ζ = lo + (hi - lo) σ(u) with the logistic σ, which resolves the
/// exponentially thin neighbourhoods of the repelling zero that long
/// horizons require.
pub fn backward_extend<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    zs: &ZeroSet<T>,
    alpha: T,
    eta: T,
    t_back: T,
    dt: T,
    tol: T,
) -> Result<BackwardExtension<T>, AnalysisError> {
    scalar_fn(field).map(drop)?;
    if zs.position(eta).is_some() {
        return Ok(BackwardExtension {
            zeta: eta,
            residual: T::zero(),
            solves: 0,
        });
    }
    let (lo, hi) = enclosing(zs, eta)?;
    let problem = CaputoProblem::new(alpha, vec![eta], t_back, dt)?;
    let width = hi - lo;
    let point = |u: T| {
        if u < T::zero() {
            lo + width / (T::one() + (-u).exp())
        } else {
            hi - width / (T::one() + u.exp())
        }
    };
    let mut solves = 0;
    let mut miss = |u: T| -> Result<T, AnalysisError> {
        solves += 1;
        let tr = solve_pece(field, &problem.with_x0(vec![point(u)])?)?;
        if let Some(e) = &tr.escape {
            return Err(AnalysisError::Escaped(e.index));
        }
        Ok(tr.last()[0] - eta)
    };

    let (mut a, mut b) = (-T::lit(LOGIT_RANGE), T::lit(LOGIT_RANGE));
    let (fa, fb) = (miss(a)?, miss(b)?);
    if !(fa <= T::zero() && fb >= T::zero()) {
        return Err(AnalysisError::BracketFailure {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..200 {
        let m = a + (b - a) / T::lit(2.0);
        if m <= a || m >= b || point(a) == point(b) {
            break;
        }
        let fm = miss(m)?;
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm == T::zero() {
            break;
        }
        if fm < T::zero() {
            a = m;
        } else {
            b = m;
        }
    }
    if best.1.abs() > tol {
        return Err(AnalysisError::NoConvergence {
            residual: best.1.as_f64(),
        });
    }
    Ok(BackwardExtension {
        zeta: point(best.0),
        residual: best.1,
        solves,
    })
}

/// A full-time solution joining two adjacent steady states.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroclinicOrbit<T> {
    /// Limit as t → -∞.
    pub source: T,
    /// Limit as t → +∞.
    pub target: T,
    pub eta: T,
    /// Increasing times in [-T_back, T_fwd]; negative entries come from
    /// backward extensions, the rest from one forward solve.
    pub times: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> HeteroclinicOrbit<T> {
    /// Every value lies strictly between source and target.
    pub fn stays_between(&self) -> bool {
        let (lo, hi) = if self.source < self.target {
            (self.source, self.target)
        } else {
            (self.target, self.source)
        };
        self.values.iter().all(|&v| lo < v && v < hi)
    }

    /// Value at the earliest time.
    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        *self.values.last().expect("an orbit has at least one point")
    }
}

/// Number of backward horizons t_back, t_back/2, ... that are sampled.
pub const BACKWARD_HORIZONS: usize = 8;

/// Heteroclinic orbit through η in the interval (zeros[k], zeros[k+1]).
///
/// On an interval where g > 0 the orbit leaves the left zero and approaches
/// the right one; where g < 0 it runs from right to left.
#[allow(clippy::too_many_arguments)]
pub fn heteroclinic_orbit<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    alpha: T,
    zs: &ZeroSet<T>,
    interval_index: usize,
    eta: T,
    t_back: T,
    t_fwd: T,
    dt: T,
) -> Result<HeteroclinicOrbit<T>, AnalysisError> {
    if interval_index + 1 >= zs.len() {
        return Err(AnalysisError::Precondition(format!(
            "interval {interval_index} is not bounded by two zeros (there are {})",
            zs.len()
        )));
    }
    let (left, right) = (zs.zeros[interval_index], zs.zeros[interval_index + 1]);
    if !(left < eta && eta < right) {
        return Err(AnalysisError::Precondition(format!(
            "eta = {eta} is not inside ({left}, {right})"
        )));
    }
    let g = scalar_fn(field)?;
    let (source, target) = if g(eta)? > T::zero() {
        (left, right)
    } else {
        (right, left)
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    let tol = T::lit(1e-10);
    for k in (0..BACKWARD_HORIZONS).map(|k| BACKWARD_HORIZONS - 1 - k) {
        let s = t_back / T::lit(2.0).powi(k as i32);
        if s < dt * T::lit(2.0) {
            continue;
        }
        let back = backward_extend(field, zs, alpha, eta, s, dt, tol)?;
        times.push(-s);
        values.push(back.zeta);
    }
    times.reverse();
    values.reverse();

    let forward = solve_pece(field, &CaputoProblem::new(alpha, vec![eta], t_fwd, dt)?)?;
    if let Some(e) = &forward.escape {
        return Err(AnalysisError::Escaped(e.index));
    }
    for (t, x) in forward.iter() {
        times.push(t);
        values.push(x[0]);
    }
    Ok(HeteroclinicOrbit {
        source,
        target,
        eta,
        times,
        values,
    })
}
