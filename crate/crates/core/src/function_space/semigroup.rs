use super::{SampleError, SampledFunction};
use crate::caputo_solver::weights::{trap_end, trap_interior, trap_start};
use crate::caputo_solver::{volterra, SolveError};
use crate::field_expr::VectorField;
use crate::mittag_leffler::{gamma, mittag_leffler, MlError};
use crate::real::{norm, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemigroupError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("samples cover [0, {have}] but [0, {needed}] is required")]
    GridDomain { needed: f64, have: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Truncation of the series defining ρ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RhoParams {
    n_max: usize,
}

impl RhoParams {
    pub const DEFAULT_N_MAX: usize = 20;

    pub fn new(n_max: usize) -> Result<Self, SemigroupError> {
        if n_max == 0 {
            return Err(SemigroupError::Invalid("n_max must be at least 1".into()));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

impl Default for RhoParams {
    fn default() -> Self {
        Self {
            n_max: Self::DEFAULT_N_MAX,
        }
    }
}

/// ρ(f, h) = Σ_{n=1}^{n_max} 2^{-n} ρ_n / (1 + ρ_n), ρ_n = sup_{[0,n]} ‖f - h‖.
///
/// `h` is re-sampled onto the grid of `f` when the steps differ. Both must
/// cover [0, n_max].
pub fn rho<T: Real>(f: &SampledFunction<T>, h: &SampledFunction<T>, p: RhoParams) -> Result<T, SemigroupError> {
    if f.dim() != h.dim() {
        return Err(SemigroupError::Invalid(format!(
            "dimensions differ: {} and {}",
            f.dim(),
            h.dim()
        )));
    }
    let horizon = T::from_usize_exact(p.n_max);
    let slack = T::one() - T::lit(1e-12);
    for g in [f, h] {
        if g.extent() < horizon * slack {
            return Err(SemigroupError::GridDomain {
                needed: p.n_max as f64,
                have: g.extent().as_f64(),
            });
        }
    }
    let h = if h.step() == f.step() {
        std::borrow::Cow::Borrowed(h)
    } else {
        std::borrow::Cow::Owned(h.resample(f.step(), f.extent().min(h.extent()))?.0)
    };
    let mut total = T::zero();
    let mut sup = T::zero();
    let mut i = 0;
    let mut diff = vec![T::zero(); f.dim()];
    let mut weight = T::one();
    for n in 1..=p.n_max {
        let edge = T::from_usize_exact(n) * (T::one() + T::lit(1e-12));
        while i < f.len().min(h.len()) && f.theta(i) <= edge {
            for ((d, a), b) in diff.iter_mut().zip(f.at(i)).zip(h.at(i)) {
                *d = *a - *b;
            }
            sup = sup.max(norm(&diff));
            i += 1;
        }
        weight = weight / T::lit(2.0);
        total = total + weight * sup / (T::one() + sup);
    }
    Ok(total)
}

/// T_τ f together with bookkeeping about the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauImage<T> {
    pub image: SampledFunction<T>,
    /// τ actually used (the nearest multiple of dt).
    pub tau: T,
    pub snap_error: T,
    /// `f` had to be extended by its last value to cover [0, τ + Θ].
    pub extended: bool,
}

/// (T_τ f)(θ) = f(τ + θ) + (1/Γ(α)) ∫_0^τ (τ + θ - s)^{α-1} g(x_f(s)) ds on
/// θ ∈ [0, theta_out], where x_f solves the forced Volterra equation on [0, τ].
///
/// The output grid has step `dt`; τ is snapped to a multiple of it. At θ = 0
/// the solver's endpoint x_f(τ) is returned; for θ > 0 the integral is the
/// product-trapezoidal rule over the solver grid, whose kernel is smooth there.
pub fn apply_t<T: Real, F: VectorField<T> + ?Sized>(
    tau: T,
    f: &SampledFunction<T>,
    field: &F,
    alpha: T,
    dt: T,
    theta_out: T,
) -> Result<TauImage<T>, SemigroupError> {
    if !(tau >= T::zero()) || !(theta_out >= T::zero()) {
        return Err(SemigroupError::Invalid("tau and theta_out must be non-negative".into()));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(SemigroupError::Invalid(format!("alpha = {alpha} is not in (0, 1)")));
    }
    if f.dim() != field.dim() {
        return Err(SemigroupError::Invalid(format!(
            "f has dimension {}, the field {}",
            f.dim(),
            field.dim()
        )));
    }
    let k = (tau / dt).round().to_usize().unwrap_or(0);
    let m_out = (theta_out / dt).round().to_usize().unwrap_or(0);
    let tau_grid = dt * T::from_usize_exact(k);
    let (grid, extended) = f.resample(dt, dt * T::from_usize_exact(k + m_out))?;
    let d = f.dim();
    let snap_error = (tau_grid - tau).abs();

    if k == 0 {
        return Ok(TauImage {
            image: grid,
            tau: tau_grid,
            snap_error,
            extended,
        });
    }

    let traj = volterra(field, alpha, dt, k, |n| grid.at(n))?;
    if let Some(e) = &traj.escape {
        return Err(SolveError::Invalid(format!("the forced solution escaped at grid index {}", e.index)).into());
    }
    let gs = traj
        .states
        .chunks_exact(d)
        .map(|x| field.eval(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| SolveError::Eval { t: 0.0, source })?;
    let scale = dt.powf(alpha) / gamma(alpha + T::lit(2.0))?;

    let mut values = Vec::with_capacity((m_out + 1) * d);
    values.extend_from_slice(traj.last());
    let mut acc = vec![T::zero(); d];
    for m in 1..=m_out {
        let n = k + m;
        acc.iter_mut().for_each(|a| *a = T::zero());
        let mut add = |w: T, gj: &[T]| {
            for (a, &v) in acc.iter_mut().zip(gj) {
                *a = *a + w * v;
            }
        };
        add(trap_start(alpha, n), &gs[0]);
        for (j, gj) in gs.iter().enumerate().take(k).skip(1) {
            add(trap_interior(alpha, n - j - 1), gj);
        }
        add(trap_end(alpha, m + 1), &gs[k]);
        for (c, a) in acc.iter().enumerate() {
            values.push(grid.at(n)[c] + scale * *a);
        }
    }
    Ok(TauImage {
        image: SampledFunction::new(dt, d, values)?,
        tau: tau_grid,
        snap_error,
        extended,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupDefect<T> {
    /// ρ(T_{τ1+τ2} f, T_{τ1} T_{τ2} f).
    pub defect: T,
    pub snap_error: T,
    pub extended: bool,
}

/// Distance between T_{τ1+τ2} f and T_{τ1}(T_{τ2} f), measured with ρ over
/// θ ∈ [0, n_max].
#[allow(clippy::too_many_arguments)]
pub fn semigroup_defect<T: Real, F: VectorField<T> + ?Sized>(
    tau1: T,
    tau2: T,
    f: &SampledFunction<T>,
    field: &F,
    alpha: T,
    dt: T,
    p: RhoParams,
) -> Result<SemigroupDefect<T>, SemigroupError> {
    let theta = T::from_usize_exact(p.n_max);
    let direct = apply_t(tau1 + tau2, f, field, alpha, dt, theta)?;
    let inner = apply_t(tau2, f, field, alpha, dt, tau1 + theta)?;
    let outer = apply_t(tau1, &inner.image, field, alpha, dt, theta)?;
    Ok(SemigroupDefect {
        defect: rho(&direct.image, &outer.image, p)?,
        snap_error: direct.snap_error.max(inner.snap_error).max(outer.snap_error),
        extended: direct.extended || inner.extended || outer.extended,
    })
}

/// |E_α(-λ(t+s)^α) - E_α(-λ t^α) E_α(-λ s^α)|: how far the solution map of
/// D^α x = -λx is from composing like a flow.
pub fn state_space_defect<T: Real>(alpha: T, t: T, s: T, lambda: T) -> Result<T, MlError> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(MlError::InvalidParameter {
            name: "alpha",
            value: alpha.as_f64(),
        });
    }
    if !(t >= T::zero() && s >= T::zero() && lambda > T::zero()) {
        return Err(MlError::InvalidParameter {
            name: "t, s, lambda",
            value: t.min(s).min(lambda).as_f64(),
        });
    }
    let e = |u: T| mittag_leffler(alpha, T::one(), -lambda * u.powf(alpha));
    Ok((e(t + s)? - e(t)? * e(s)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_expr::FnField;

    fn linear() -> FnField<impl Fn(&[f64], &mut [f64]) + Sync> {
        FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = -x[0])
    }

    fn zero() -> FnField<impl Fn(&[f64], &mut [f64]) + Sync> {
        FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0)
    }

    #[test]
    fn rho_examples() {
        let p = RhoParams::new(30).unwrap();
        let f = SampledFunction::constant(&[0.0f64], 0.5, 30.0).unwrap();
        let h = SampledFunction::constant(&[1.0], 0.5, 30.0).unwrap();
        assert_eq!(rho(&f, &f, p).unwrap(), 0.0);
        assert!((rho(&f, &h, p).unwrap() - 0.5).abs() <= 2f64.powi(-30));
        let short = SampledFunction::constant(&[1.0], 0.5, 10.0).unwrap();
        assert!(matches!(rho(&f, &short, p), Err(SemigroupError::GridDomain { .. })));
    }

    #[test]
    fn rho_is_symmetric() {
        let p = RhoParams::default();
        let f = SampledFunction::from_fn(0.1, 201, 2, |t: f64| vec![t.sin(), t.cos()]).unwrap();
        let h = SampledFunction::from_fn(0.05, 401, 2, |t: f64| vec![(t * 0.3).sin(), 1.0 / (1.0 + t)]).unwrap();
        let a = rho(&f, &h, p).unwrap();
        let b = rho(&h, &f, p).unwrap();
        assert!(a > 0.0 && (a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn identity_and_shift() {
        let f = SampledFunction::from_fn(0.01, 3001, 1, |t: f64| vec![(t * 0.7).cos()]).unwrap();
        let same = apply_t(0.0, &f, &linear(), 0.5, 0.01, 20.0).unwrap();
        assert_eq!(rho(&same.image, &f, RhoParams::default()).unwrap(), 0.0);

        let shifted = apply_t(0.5, &f, &zero(), 0.5, 0.01, 20.0).unwrap();
        for i in 0..shifted.image.len() {
            assert_eq!(shifted.image.at(i)[0], f.at(i + 50)[0]);
        }
        let d = semigroup_defect(0.5, 0.5, &f, &zero(), 0.5, 0.01, RhoParams::default()).unwrap();
        assert_eq!(d.defect, 0.0);
    }

    #[test]
    fn linear_flow_from_constant_history() {
        let f = SampledFunction::constant(&[1.0], 1e-3, 1.0).unwrap();
        let out = apply_t(1.0, &f, &linear(), 0.5, 1e-3, 0.0).unwrap();
        let exact = mittag_leffler(0.5, 1.0, -1.0).unwrap();
        assert!((out.image.at(0)[0] - exact).abs() < 1e-3);
    }

    #[test]
    fn first_step_jump_scales_like_dt_alpha() {
        // θ ↦ (T_τ f)(θ) behaves like C + c θ^α near θ = 0, so the gap between
        // the solver endpoint and the first quadrature value is O(dt^α)
        let jump = |dt: f64| {
            let f = SampledFunction::constant(&[1.0], dt, 1.0).unwrap();
            let out = apply_t(0.5, &f, &linear(), 0.5, dt, 2.0 * dt).unwrap();
            out.image.at(1)[0] - out.image.at(0)[0]
        };
        let ratio = jump(2e-3) / jump(5e-4);
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn state_space_examples() {
        assert!(state_space_defect(1.0, 1.0, 1.0, 1.0).unwrap() < 1e-12);
        assert!(state_space_defect(0.5, 1.0, 1.0, 1.0).unwrap() > 0.01);
        assert!(state_space_defect(0.5, 1e-8, 1.0, 1.0).unwrap() < 1e-3);
    }
}
