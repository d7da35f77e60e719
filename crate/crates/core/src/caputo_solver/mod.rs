//! Fractional Adams predictor–corrector for D^α x = g(x), 0 < α < 1.
//!
//! The solver works on the equivalent Volterra equation
//!
//! x(t) = f(t) + (1/Γ(α)) ∫_0^t (t - s)^{α-1} g(x(s)) ds
//!
//! with f ≡ x0 for the initial value problem and a sampled forcing f for the
//! forced equation. The predictor is the product rectangle rule, the
//! corrector the product trapezoidal rule iterated to a fixed point.

mod convergence;
pub(crate) mod weights;

pub use convergence::{convergence_order, ConvergenceStudy, Order};

use crate::field_expr::{EvalError, VectorField};
use crate::function_space::SampledFunction;
use crate::mittag_leffler::gamma;
use crate::real::Real;

/// States beyond this magnitude terminate the run with an escape marker.
pub const ESCAPE_THRESHOLD: f64 = 1e8;
/// Largest admissible number of steps.
pub const MAX_STEPS: usize = 10_000_000;
pub const CORRECTOR_TOL: f64 = 1e-12;
pub const CORRECTOR_MAX_ITER: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("field evaluation failed at t = {t}: {source}")]
    Eval { t: f64, source: EvalError },
}

/// Numerical settings of an initial value problem. The vector field is
/// passed separately to the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CaputoProblem<T> {
    alpha: T,
    x0: Vec<T>,
    t_end: T,
    dt: T,
}

fn check_settings<T: Real>(alpha: T, t_end: T, dt: T) -> Result<usize, SolveError> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(SolveError::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(SolveError::Invalid(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > dt) || !t_end.is_finite() {
        return Err(SolveError::Invalid(format!("t_end = {t_end} must exceed dt = {dt}")));
    }
    let steps = (t_end / dt).round();
    if steps > T::from_usize_exact(MAX_STEPS) {
        return Err(SolveError::Invalid(format!(
            "t_end / dt = {steps} exceeds the step budget {MAX_STEPS}"
        )));
    }
    Ok(steps.to_usize().expect("bounded step count"))
}

impl<T: Real> CaputoProblem<T> {
    pub fn new(alpha: T, x0: Vec<T>, t_end: T, dt: T) -> Result<Self, SolveError> {
        check_settings(alpha, t_end, dt)?;
        if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::Invalid("x0 must be a non-empty finite vector".into()));
        }
        Ok(Self { alpha, x0, t_end, dt })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn x0(&self) -> &[T] {
        &self.x0
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Number of steps; the grid is 0, dt, ..., steps·dt.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().expect("validated")
    }

    /// The same problem with another step size or initial value.
    pub fn with_dt(&self, dt: T) -> Result<Self, SolveError> {
        Self::new(self.alpha, self.x0.clone(), self.t_end, dt)
    }

    pub fn with_x0(&self, x0: Vec<T>) -> Result<Self, SolveError> {
        Self::new(self.alpha, x0, self.t_end, self.dt)
    }
}

/// Where and in which direction a run left the region |x| ≤ [`ESCAPE_THRESHOLD`].
#[derive(Debug, Clone, PartialEq)]
pub struct Escape {
    /// Grid index of the first state beyond the threshold (the last stored state).
    pub index: usize,
    /// Sign of each component of that state.
    pub direction: Vec<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverMeta<T> {
    /// Corrector iterations summed over all steps.
    pub corrector_iterations: usize,
    /// Largest final corrector update over all steps.
    pub max_corrector_residual: T,
    /// Steps whose corrector fell back to Newton's method.
    pub newton_steps: usize,
}

/// Uniform-grid solution. `states` is row-major with `dim` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub alpha: T,
    pub dt: T,
    pub dim: usize,
    pub states: Vec<T>,
    pub meta: SolverMeta<T>,
    pub escape: Option<Escape>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, i: usize) -> T {
        self.dt * T::from_usize_exact(i)
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[T] {
        self.state(self.len() - 1)
    }

    pub fn initial(&self) -> &[T] {
        self.state(0)
    }

    /// Values of coordinate `c` along the grid.
    pub fn component(&self, c: usize) -> impl Iterator<Item = T> + '_ {
        self.states.iter().skip(c).step_by(self.dim).copied()
    }

    /// Number of grid points holding solution values; the escape marker is
    /// excluded.
    pub fn solution_len(&self) -> usize {
        self.escape.as_ref().map_or(self.len(), |e| e.index)
    }

    pub fn escaped(&self) -> bool {
        self.escape.is_some()
    }

    /// Iterates `(t, state)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (T, &[T])> + '_ {
        self.states
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, s)| (self.time(i), s))
    }
}

/// Largest step for which the corrector map x ↦ f + dt^α/Γ(α+2) (Σ + g(x))
/// is a contraction when g has Lipschitz constant `lipschitz`.
pub fn contraction_dt<T: Real>(alpha: T, lipschitz: T) -> Result<T, SolveError> {
    let g2 = gamma(alpha + T::lit(2.0)).map_err(|e| SolveError::Invalid(e.to_string()))?;
    if !(lipschitz > T::zero()) {
        return Ok(T::infinity());
    }
    Ok((g2 / lipschitz).powf(T::one() / alpha))
}

/// Solves D^α x = g(x), x(0) = x0.
pub fn solve_pece<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    problem: &CaputoProblem<T>,
) -> Result<Trajectory<T>, SolveError> {
    if problem.x0.len() != field.dim() {
        return Err(SolveError::Invalid(format!(
            "x0 has {} components, the field has {}",
            problem.x0.len(),
            field.dim()
        )));
    }
    let x0 = problem.x0.clone();
    volterra(field, problem.alpha, problem.dt, problem.steps(), |_| x0.as_slice())
}

/// Solves x(t) = f(t) + (1/Γ(α)) ∫_0^t (t - s)^{α-1} g(x(s)) ds for a sampled forcing f.
///
/// The forcing must cover [0, t_end]; it is re-sampled by linear
/// interpolation when its step differs from `dt`.
pub fn solve_svie<T: Real, F: VectorField<T> + ?Sized>(
    forcing: &SampledFunction<T>,
    field: &F,
    alpha: T,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>, SolveError> {
    let steps = check_settings(alpha, t_end, dt)?;
    if forcing.dim() != field.dim() {
        return Err(SolveError::Invalid(format!(
            "forcing has dimension {}, the field {}",
            forcing.dim(),
            field.dim()
        )));
    }
    let horizon = dt * T::from_usize_exact(steps);
    if forcing.extent() < horizon * (T::one() - T::lit(1e-12)) {
        return Err(SolveError::Invalid(format!(
            "forcing covers [0, {}] but the solve needs [0, {}]",
            forcing.extent(),
            horizon
        )));
    }
    let (grid, _) = forcing
        .resample(dt, horizon)
        .map_err(|e| SolveError::Invalid(e.to_string()))?;
    volterra(field, alpha, dt, steps, |n| grid.at(n))
}

/// Shared predictor–corrector loop; `forcing(n)` is f(t_n).
pub(crate) fn volterra<'f, T, F>(
    field: &F,
    alpha: T,
    dt: T,
    steps: usize,
    forcing: impl Fn(usize) -> &'f [T],
) -> Result<Trajectory<T>, SolveError>
where
    T: Real + 'f,
    F: VectorField<T> + ?Sized,
{
    let d = field.dim();
    let gamma1 = gamma(alpha + T::one()).map_err(|e| SolveError::Invalid(e.to_string()))?;
    let gamma2 = gamma(alpha + T::lit(2.0)).map_err(|e| SolveError::Invalid(e.to_string()))?;
    let pred_scale = dt.powf(alpha) / gamma1;
    let corr_scale = dt.powf(alpha) / gamma2;
    let threshold = T::lit(ESCAPE_THRESHOLD);
    let tol = T::tol(CORRECTOR_TOL);

    let rect: Vec<T> = (0..steps).map(|k| weights::rect(alpha, k)).collect();
    let interior: Vec<T> = (0..steps).map(|k| weights::trap_interior(alpha, k)).collect();

    let eval_err = |n: usize, source| SolveError::Eval {
        t: (dt * T::from_usize_exact(n)).as_f64(),
        source,
    };

    let mut states = Vec::with_capacity((steps + 1) * d);
    states.extend_from_slice(forcing(0));
    let mut g_hist = vec![T::zero(); (steps + 1) * d];
    field
        .eval_into(&states[..d], &mut g_hist[..d])
        .map_err(|e| eval_err(0, e))?;

    let mut meta = SolverMeta::<T>::default();
    let mut escape = None;
    let mut pred_sum = vec![T::zero(); d];
    let mut corr_sum = vec![T::zero(); d];
    let mut x_new = vec![T::zero(); d];
    let mut x_next = vec![T::zero(); d];
    let mut g_new = vec![T::zero(); d];

    for n in 0..steps {
        let target = n + 1;
        history_sums(&g_hist, d, n, alpha, &rect, &interior, &mut pred_sum, &mut corr_sum);
        let f_next = forcing(target);
        for i in 0..d {
            x_new[i] = f_next[i] + pred_scale * pred_sum[i];
        }
        let mut escaped = escapes(&x_new, threshold);
        let mut residual = T::zero();
        if !escaped {
            let mut converged = false;
            let mut previous = T::infinity();
            for _ in 0..CORRECTOR_MAX_ITER {
                field.eval_into(&x_new, &mut g_new).map_err(|e| eval_err(target, e))?;
                residual = T::zero();
                for i in 0..d {
                    x_next[i] = f_next[i] + corr_scale * (corr_sum[i] + g_new[i]);
                    residual = residual.max((x_next[i] - x_new[i]).abs() / T::one().max(x_next[i].abs()));
                }
                std::mem::swap(&mut x_new, &mut x_next);
                meta.corrector_iterations += 1;
                if escapes(&x_new, threshold) {
                    escaped = true;
                    break;
                }
                if residual <= tol {
                    converged = true;
                    break;
                }
                if residual >= previous {
                    break;
                }
                previous = residual;
            }
            if !converged {
                let current = &states[n * d..(n + 1) * d];
                let implicit = Implicit {
                    field,
                    f: f_next,
                    sum: &corr_sum,
                    scale: corr_scale,
                };
                if let Some((x, r, iters)) = implicit.newton(current, tol) {
                    x_new.copy_from_slice(&x);
                    residual = r;
                    escaped = escapes(&x_new, threshold);
                    meta.corrector_iterations += iters;
                    meta.newton_steps += 1;
                }
            }
        }
        states.extend_from_slice(&x_new);
        if escaped {
            escape = Some(Escape {
                index: target,
                direction: x_new.iter().map(|v| sign(*v)).collect(),
            });
            break;
        }
        meta.max_corrector_residual = meta.max_corrector_residual.max(residual);
        field
            .eval_into(&x_new, &mut g_hist[target * d..(target + 1) * d])
            .map_err(|e| eval_err(target, e))?;
    }

    Ok(Trajectory {
        alpha,
        dt,
        dim: d,
        states,
        meta,
        escape,
    })
}

/// The trapezoidal step x = f + scale (sum + g(x)).
struct Implicit<'a, T, F: ?Sized> {
    field: &'a F,
    f: &'a [T],
    sum: &'a [T],
    scale: T,
}

const NEWTON_MAX_ITER: usize = 50;

impl<T: Real, F: VectorField<T> + ?Sized> Implicit<'_, T, F> {
    fn residual(&self, x: &[T]) -> Option<Vec<T>> {
        let mut g = vec![T::zero(); x.len()];
        self.field.eval_into(x, &mut g).ok()?;
        Some((0..x.len()).map(|i| x[i] - self.f[i] - self.scale * (self.sum[i] + g[i])).collect())
    }

    /// Damped Newton iteration with a forward-difference Jacobian, started
    /// from `start`. Returns the root, its last relative update and the
    /// number of iterations, or `None` when no root was reached.
    fn newton(&self, start: &[T], tol: T) -> Option<(Vec<T>, T, usize)> {
        let d = start.len();
        let mut x = start.to_vec();
        let mut h = self.residual(&x)?;
        for iter in 1..=NEWTON_MAX_ITER {
            let mut jac = vec![T::zero(); d * d];
            for j in 0..d {
                let step = T::tol(1e-7) * T::one().max(x[j].abs());
                let mut xp = x.clone();
                xp[j] = xp[j] + step;
                let hp = self.residual(&xp)?;
                for i in 0..d {
                    jac[i * d + j] = (hp[i] - h[i]) / step;
                }
            }
            let dx = solve_linear(jac, h.iter().map(|v| -*v).collect())?;
            let update = x
                .iter()
                .zip(&dx)
                .fold(T::zero(), |m, (a, b)| m.max(b.abs() / T::one().max((*a + *b).abs())));
            if update <= tol {
                let root: Vec<T> = x.iter().zip(&dx).map(|(a, b)| *a + *b).collect();
                return Some((root, update, iter));
            }
            let h_norm = crate::real::norm(&h);
            let mut lambda = T::one();
            loop {
                let trial: Vec<T> = x.iter().zip(&dx).map(|(a, b)| *a + lambda * *b).collect();
                if let Some(ht) = self.residual(&trial) {
                    if crate::real::norm(&ht) < h_norm {
                        x = trial;
                        h = ht;
                        break;
                    }
                }
                lambda = lambda / T::lit(2.0);
                if lambda < T::tol(1e-10) {
                    return None;
                }
            }
        }
        None
    }
}

/// Gaussian elimination with partial pivoting on a row-major d×d system.
fn solve_linear<T: Real>(mut a: Vec<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let d = b.len();
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| a[i * d + col].abs().partial_cmp(&a[j * d + col].abs()).unwrap())?;
        if !(a[pivot * d + col].abs() > T::zero()) {
            return None;
        }
        for k in 0..d {
            a.swap(col * d + k, pivot * d + k);
        }
        b.swap(col, pivot);
        for row in col + 1..d {
            let factor = a[row * d + col] / a[col * d + col];
            for k in col..d {
                a[row * d + k] = a[row * d + k] - factor * a[col * d + k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); d];
    for row in (0..d).rev() {
        let mut acc = b[row];
        for k in row + 1..d {
            acc = acc - a[row * d + k] * x[k];
        }
        x[row] = acc / a[row * d + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn sign<T: Real>(v: T) -> i8 {
    if v > T::zero() {
        1
    } else if v < T::zero() {
        -1
    } else {
        0
    }
}

fn escapes<T: Real>(x: &[T], threshold: T) -> bool {
    x.iter().any(|v| !(v.abs() <= threshold))
}

/// Memory terms for the step to node n+1:
/// pred = Σ_{j=0}^{n} b_{n-j} g_j and corr = a_0 g_0 + Σ_{j=1}^{n} c_{n-j} g_j.
#[allow(clippy::too_many_arguments)]
#[allow(clippy::needless_range_loop)]
fn history_sums<T: Real>(
    g: &[T],
    d: usize,
    n: usize,
    alpha: T,
    rect: &[T],
    interior: &[T],
    pred: &mut [T],
    corr: &mut [T],
) {
    let start = weights::trap_start(alpha, n + 1);
    for i in 0..d {
        pred[i] = rect[n] * g[i];
        corr[i] = start * g[i];
    }
    if n == 0 {
        return;
    }
    if d == 1 {
        // g_j pairs with weight index n - j; four independent partial sums
        let gs = &g[1..=n];
        let (mut p, mut c) = ([T::zero(); 4], [T::zero(); 4]);
        let chunks = n / 4;
        for q in 0..chunks {
            for l in 0..4 {
                let j = q * 4 + l;
                let k = n - 1 - j;
                p[l] = p[l] + rect[k] * gs[j];
                c[l] = c[l] + interior[k] * gs[j];
            }
        }
        for j in chunks * 4..n {
            let k = n - 1 - j;
            p[0] = p[0] + rect[k] * gs[j];
            c[0] = c[0] + interior[k] * gs[j];
        }
        pred[0] = pred[0] + (p[0] + p[1]) + (p[2] + p[3]);
        corr[0] = corr[0] + (c[0] + c[1]) + (c[2] + c[3]);
        return;
    }
    for j in 1..=n {
        let k = n - j;
        let (b, c) = (rect[k], interior[k]);
        let row = &g[j * d..(j + 1) * d];
        for i in 0..d {
            pred[i] = pred[i] + b * row[i];
            corr[i] = corr[i] + c * row[i];
        }
    }
}
