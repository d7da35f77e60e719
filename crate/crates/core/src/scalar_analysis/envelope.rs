use super::{linspace, scalar_fn, AnalysisError, ZeroSet};
use crate::caputo_solver::Trajectory;
use crate::field_expr::{scalar_derivative, VectorField};
use crate::mittag_leffler::ml_decay;
use crate::real::Real;

/// Test points used to validate ε and to evaluate the minimum in γ.
const GRID: usize = 1000;
const ENVELOPE_SLACK: f64 = 1e-3;

/// Rate γ > 0 with |x(t, η) - x*| ≤ E_α(-γ t^α) |η - x*|.
///
/// With f(w) = g(x* + w) and ζ = η - x* (mirrored so that ζ < 0), ε is the
/// first radius |ζ|/2^k for which |f(w)| ≥ |f'(0)|/2 |w| holds on a test
/// grid of [-ε, ε], and
///
/// γ = min(|f'(0)|/2, min_{w ∈ [ζ, -ε]} f(w)/|w|).
pub fn gamma_rate_constant<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    zs: &ZeroSet<T>,
    x_star: T,
    eta: T,
) -> Result<T, AnalysisError> {
    let g = scalar_fn(field)?;
    let d0 = scalar_derivative(&g, x_star)?;
    if !(d0 < T::zero()) {
        return Err(AnalysisError::Precondition(format!(
            "x* = {x_star} is not a stable steady state (g' = {d0})"
        )));
    }
    let half_slope = d0.abs() / T::lit(2.0);
    if eta == x_star {
        return Ok(half_slope);
    }
    let (lo, hi) = if eta < x_star { (eta, x_star) } else { (x_star, eta) };
    let own = zs.position(x_star);
    if let Some((_, &z)) = zs
        .zeros
        .iter()
        .enumerate()
        .find(|&(j, &z)| Some(j) != own && lo <= z && z <= hi)
    {
        return Err(AnalysisError::DegenerateBasin(format!(
            "the zero {z} lies between eta = {eta} and x* = {x_star}"
        )));
    }

    let mirror = eta > x_star;
    let f = |w: T| -> Result<T, AnalysisError> {
        Ok(if mirror { -g(x_star - w)? } else { g(x_star + w)? })
    };
    let zeta = -(eta - x_star).abs();

    let mut eps = zeta.abs() / T::lit(2.0);
    'radius: loop {
        if eps < T::tol(1e-14) {
            return Err(AnalysisError::DegenerateBasin(
                "no radius satisfies the mean-value bound".into(),
            ));
        }
        for w in linspace(-eps, eps, GRID) {
            if w != T::zero() && f(w)?.abs() < half_slope * w.abs() {
                eps = eps / T::lit(2.0);
                continue 'radius;
            }
        }
        break;
    }

    let mut gamma = half_slope;
    for w in linspace(zeta, -eps, GRID) {
        gamma = gamma.min(f(w)? / w.abs());
    }
    if !(gamma > T::zero()) {
        return Err(AnalysisError::DegenerateBasin(format!(
            "g does not push eta = {eta} towards x* = {x_star}"
        )));
    }
    Ok(gamma)
}

/// Outcome of comparing a trajectory with a Mittag-Leffler envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<T> {
    pub holds: bool,
    /// Largest observed/allowed ratio (upper bounds) or allowed/observed
    /// ratio (lower bounds); ≤ 1 when the bound holds.
    pub worst_ratio: T,
    pub worst_index: usize,
    pub first_violation: Option<usize>,
    pub checked: usize,
}

struct Tally<T> {
    worst: (T, usize),
    first_violation: Option<usize>,
    checked: usize,
}

impl<T: Real> Tally<T> {
    fn new() -> Self {
        Self {
            worst: (T::neg_infinity(), 0),
            first_violation: None,
            checked: 0,
        }
    }

    fn add(&mut self, i: usize, ratio: T, violated: bool) {
        self.checked += 1;
        if ratio > self.worst.0 {
            self.worst = (ratio, i);
        }
        if violated && self.first_violation.is_none() {
            self.first_violation = Some(i);
        }
    }

    fn report(self) -> BoundReport<T> {
        BoundReport {
            holds: self.first_violation.is_none(),
            worst_ratio: self.worst.0,
            worst_index: self.worst.1,
            first_violation: self.first_violation,
            checked: self.checked,
        }
    }
}

fn scalar_run<T: Real>(traj: &Trajectory<T>) -> Result<(), AnalysisError> {
    if traj.dim != 1 {
        return Err(AnalysisError::Precondition("expected a scalar trajectory".into()));
    }
    match &traj.escape {
        Some(e) => Err(AnalysisError::Escaped(e.index)),
        None => Ok(()),
    }
}

/// Checks |x(t_n) - x*| ≤ E_α(-γ t_n^α) |η - x*| (1 + 1e-3) on the whole grid.
pub fn envelope_check<T: Real>(
    traj: &Trajectory<T>,
    x_star: T,
    gamma: T,
) -> Result<BoundReport<T>, AnalysisError> {
    scalar_run(traj)?;
    let d0 = (traj.initial()[0] - x_star).abs();
    let slack = T::one() + T::lit(ENVELOPE_SLACK);
    let mut tally = Tally::new();
    for (i, (t, x)) in traj.iter().enumerate() {
        let dist = (x[0] - x_star).abs();
        let bound = ml_decay(traj.alpha, gamma, t)? * d0;
        let ratio = if bound > T::zero() {
            dist / bound
        } else if dist > T::zero() {
            T::infinity()
        } else {
            T::zero()
        };
        tally.add(i, ratio, dist > bound * slack);
    }
    Ok(tally.report())
}

/// Checks d(x(t_n), 𝓝(g)) ≥ E_α(-L t_n^α) d(η, 𝓝(g)) (1 - 1e-3) on the whole grid.
pub fn lower_bound_check<T: Real>(
    traj: &Trajectory<T>,
    zs: &ZeroSet<T>,
    lipschitz: T,
) -> Result<BoundReport<T>, AnalysisError> {
    scalar_run(traj)?;
    if zs.is_empty() {
        return Err(AnalysisError::Precondition("the zero set is empty".into()));
    }
    let d0 = zs.distance(traj.initial()[0]);
    let slack = T::one() - T::lit(ENVELOPE_SLACK);
    let mut tally = Tally::new();
    for (i, (t, x)) in traj.iter().enumerate() {
        let dist = zs.distance(x[0]);
        let bound = ml_decay(traj.alpha, lipschitz, t)? * d0;
        let ratio = if dist > T::zero() {
            bound / dist
        } else if bound > T::zero() {
            T::infinity()
        } else {
            T::zero()
        };
        tally.add(i, ratio, dist < bound * slack);
    }
    Ok(tally.report())
}

/// 1.1 · max |g'| over the hull of {η} and [min 𝓝(g), max 𝓝(g)].
pub fn default_lipschitz<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    zs: &ZeroSet<T>,
    eta: T,
) -> Result<T, AnalysisError> {
    let g = scalar_fn(field)?;
    let lo = zs.zeros.first().map_or(eta, |&z| z.min(eta));
    let hi = zs.zeros.last().map_or(eta, |&z| z.max(eta));
    let mut l = T::zero();
    let n = if hi > lo { GRID } else { 2 };
    for x in linspace(lo, hi, n) {
        l = l.max(scalar_derivative(&g, x)?.abs());
    }
    Ok(l * T::lit(1.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caputo_solver::{solve_pece, CaputoProblem};
    use crate::field_expr::FieldDef;
    use crate::scalar_analysis::find_zeros;

    fn bound(src: &str) -> FieldDef {
        FieldDef::parse(&[src], &[]).unwrap()
    }

    #[test]
    fn linear_gamma_is_half_the_slope() {
        let f = bound("-x");
        let g = f.bind::<f64>(&[]).unwrap();
        let zs = find_zeros(&g, (-3.0, 3.0), 1000).unwrap();
        let gamma = gamma_rate_constant(&g, &zs, 0.0, -1.0).unwrap();
        assert!((gamma - 0.5).abs() < 1e-9);
        let gamma = gamma_rate_constant(&g, &zs, 0.0, 0.0).unwrap();
        assert!((gamma - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cubic_gamma_matches_fine_grid_formula() {
        let f = bound("x - x^3");
        let g = f.bind::<f64>(&[]).unwrap();
        let zs = find_zeros(&g, (-3.0, 3.0), 1000).unwrap();
        let gamma = gamma_rate_constant(&g, &zs, zs.zeros[2], 0.5).unwrap();
        // f(w) = -(1 + w) w (2 + w); ε = 1/4 and the minimum of (1+w)(2+w) on [-1/2, -1/4]
        let fine = (0..=100_000)
            .map(|i| -0.5 + 0.25 * i as f64 / 1e5)
            .map(|w| (1.0 + w) * (2.0 + w))
            .fold(1.0, f64::min);
        assert!((gamma - fine).abs() < 1e-6, "{gamma} vs {fine}");
        assert!(gamma > 0.0);
    }

    #[test]
    fn gamma_rejects_points_across_a_zero() {
        let f = bound("x - x^3");
        let g = f.bind::<f64>(&[]).unwrap();
        let zs = find_zeros(&g, (-3.0, 3.0), 1000).unwrap();
        assert!(matches!(
            gamma_rate_constant(&g, &zs, zs.zeros[2], -0.5),
            Err(AnalysisError::DegenerateBasin(_))
        ));
        assert!(matches!(
            gamma_rate_constant(&g, &zs, zs.zeros[1], 0.5),
            Err(AnalysisError::Precondition(_))
        ));
    }

    #[test]
    fn linear_envelope_and_lower_bound() {
        let f = bound("-x");
        let g = f.bind::<f64>(&[]).unwrap();
        let zs = find_zeros(&g, (-3.0, 3.0), 1000).unwrap();
        let p = CaputoProblem::new(0.5, vec![1.0], 5.0, 1e-3).unwrap();
        let tr = solve_pece(&g, &p).unwrap();
        let up = envelope_check(&tr, 0.0, 0.5).unwrap();
        assert!(up.holds, "{up:?}");
        let low = lower_bound_check(&tr, &zs, 1.0).unwrap();
        assert!(low.holds, "{low:?}");
        // exact solution: the lower envelope is attained up to solver error
        assert!((low.worst_ratio - 1.0).abs() < 1e-3, "{low:?}");
        let low = lower_bound_check(&tr, &zs, 1e-6).unwrap();
        assert!(!low.holds);
    }

    #[test]
    fn lipschitz_default_on_cubic() {
        let f = bound("x - x^3");
        let g = f.bind::<f64>(&[]).unwrap();
        let zs = find_zeros(&g, (-3.0, 3.0), 1000).unwrap();
        let l = default_lipschitz(&g, &zs, 0.5).unwrap();
        // max |1 - 3x²| on [-1, 1] is 2
        assert!((l - 2.2).abs() < 1e-6);
    }
}
