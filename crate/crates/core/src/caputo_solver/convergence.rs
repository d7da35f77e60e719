use super::{solve_pece, CaputoProblem, SolveError};
use crate::field_expr::VectorField;
use crate::real::{ls_slope, norm, Real};

/// Errors below this are indistinguishable from an exact solver.
const EXACT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order<T> {
    /// Every level reproduced the reference to within round-off.
    Exact,
    Slope(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub dts: Vec<T>,
    /// ‖x_dt(t_end) - x_ref(t_end)‖ per level.
    pub errors: Vec<T>,
    pub reference_dt: T,
    pub order: Order<T>,
}

/// Empirical order of `solve_pece` at t_end.
///
/// Solves at dt, dt/2, ..., dt/2^{levels-1} and compares each endpoint with a
/// reference solve at dt/2^levels; the order is the least-squares slope of
/// log(error) against log(dt).
pub fn convergence_order<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    problem: &CaputoProblem<T>,
    levels: usize,
) -> Result<ConvergenceStudy<T>, SolveError> {
    if levels < 3 {
        return Err(SolveError::Invalid(format!("need at least 3 levels, got {levels}")));
    }
    let two = T::lit(2.0);
    let dts: Vec<T> = (0..levels).map(|i| problem.dt() / two.powi(i as i32)).collect();
    let reference_dt = problem.dt() / two.powi(levels as i32);
    let reference = solve_pece(field, &problem.with_dt(reference_dt)?)?;
    if reference.escaped() {
        return Err(SolveError::Invalid("reference solution escaped".into()));
    }
    let x_ref = reference.last().to_vec();
    let mut errors = Vec::with_capacity(levels);
    for &dt in &dts {
        let tr = solve_pece(field, &problem.with_dt(dt)?)?;
        let diff: Vec<T> = tr.last().iter().zip(&x_ref).map(|(a, b)| *a - *b).collect();
        errors.push(norm(&diff));
    }
    let order = if errors.iter().all(|&e| e < T::lit(EXACT_FLOOR)) {
        Order::Exact
    } else {
        let xs: Vec<T> = dts.iter().map(|d| d.ln()).collect();
        let ys: Vec<T> = errors.iter().map(|e| e.max(T::min_positive_value()).ln()).collect();
        Order::Slope(ls_slope(&xs, &ys))
    };
    Ok(ConvergenceStudy {
        dts,
        errors,
        reference_dt,
        order,
    })
}
