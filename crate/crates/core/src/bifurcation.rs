//! One-parameter families D^α x = g(γ, x): zero-set sweeps, branch
//! tracking, fold and pitchfork detection, and divergence to -∞.

use crate::caputo_solver::{solve_pece, CaputoProblem};
use crate::field_expr::{FieldDef, VectorField};
use crate::mittag_leffler::gamma as gamma_fn;
use crate::real::{ls_slope, Real};
use crate::scalar_analysis::{find_zeros_tolerant, linspace, AnalysisError, ZeroSet};

/// Grid points used for the square-root fit.
pub const FOLD_FIT_POINTS: usize = 10;
/// Accepted deviation of the fitted exponent from 1/2.
pub const FOLD_EXPONENT_TOL: f64 = 0.1;

/// A connected curve of zeros across consecutive parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    /// Index of the first parameter value on the branch.
    pub start: usize,
    pub xs: Vec<T>,
    pub stable: Vec<bool>,
}

impl<T> Branch<T> {
    pub fn end(&self) -> usize {
        self.start + self.xs.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationDiagram<T> {
    pub parameter: String,
    pub gammas: Vec<T>,
    pub zero_sets: Vec<ZeroSet<T>>,
    pub branches: Vec<Branch<T>>,
}

impl<T: Real> BifurcationDiagram<T> {
    /// Zero counts per parameter value, degenerate zeros included.
    pub fn counts(&self) -> Vec<usize> {
        self.zero_sets.iter().map(ZeroSet::len).collect()
    }

    /// Parameter values without steady states, where every solution diverges.
    pub fn divergent(&self) -> Vec<bool> {
        self.zero_sets.iter().map(ZeroSet::is_empty).collect()
    }

    /// Stability of zero j at parameter index k: g' < 0.
    pub fn is_stable(&self, k: usize, j: usize) -> bool {
        self.zero_sets[k].is_stable(j)
    }
}

fn param_position(family: &FieldDef, name: &str) -> Result<usize, AnalysisError> {
    family
        .param_index(name)
        .ok_or_else(|| AnalysisError::Precondition(format!("the family has no parameter '{name}'")))
}

/// Zero sets of g(γ_i, ·) on `scan` for γ_i = lo + (hi - lo) i/(M-1).
///
/// `base` holds values for all declared parameters; the entry of `param` is
/// overwritten. Zeros with |g'| < 1e-6 are kept and flagged degenerate.
pub fn sweep<T: Real>(
    family: &FieldDef,
    param: &str,
    base: &[T],
    range: (T, T),
    m: usize,
    scan: (T, T),
) -> Result<BifurcationDiagram<T>, AnalysisError> {
    if m < 3 {
        return Err(AnalysisError::Precondition("a sweep needs at least 3 parameter values".into()));
    }
    let slot = param_position(family, param)?;
    let gammas: Vec<T> = linspace(range.0, range.1, m).collect();
    let mut params = base.to_vec();
    let mut zero_sets = Vec::with_capacity(m);
    for &gamma in &gammas {
        params[slot] = gamma;
        let g = family.bind(&params)?;
        zero_sets.push(zeros_at(&g, scan)?);
    }
    let branches = connect(&zero_sets);
    Ok(BifurcationDiagram {
        parameter: param.to_string(),
        gammas,
        zero_sets,
        branches,
    })
}

fn zeros_at<T: Real, F: VectorField<T> + ?Sized>(g: &F, scan: (T, T)) -> Result<ZeroSet<T>, AnalysisError> {
    find_zeros_tolerant(g, scan, 1000)
}

/// Nearest-neighbour matching of zeros between consecutive parameter values.
fn connect<T: Real>(sets: &[ZeroSet<T>]) -> Vec<Branch<T>> {
    let mut branches: Vec<Branch<T>> = Vec::new();
    for (k, zs) in sets.iter().enumerate() {
        let open: Vec<usize> = (0..branches.len())
            .filter(|&b| k > 0 && branches[b].end() == k - 1)
            .collect();
        let mut pairs = Vec::new();
        for &b in &open {
            let last = *branches[b].xs.last().expect("branches are non-empty");
            for (j, &z) in zs.zeros.iter().enumerate() {
                pairs.push(((z - last).abs(), b, j));
            }
        }
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite distances"));
        let mut used_branch = vec![false; branches.len()];
        let mut used_zero = vec![false; zs.len()];
        for (_, b, j) in pairs {
            if used_branch[b] || used_zero[j] {
                continue;
            }
            used_branch[b] = true;
            used_zero[j] = true;
            branches[b].xs.push(zs.zeros[j]);
            branches[b].stable.push(zs.is_stable(j));
        }
        for (j, &z) in zs.zeros.iter().enumerate() {
            if !used_zero[j] {
                branches.push(Branch {
                    start: k,
                    xs: vec![z],
                    stable: vec![zs.is_stable(j)],
                });
            }
        }
    }
    branches
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    SaddleNode,
    Pitchfork,
    None,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::SaddleNode => "saddle-node",
            Label::Pitchfork => "pitchfork",
            Label::None => "none",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification<T> {
    pub label: Label,
    /// Parameter value of the bifurcation.
    pub gamma_star: Option<T>,
    /// Fitted exponent p of half-separation ~ c |γ - γ*|^p of the new branches.
    pub exponent: Option<T>,
    pub reason: String,
}

impl<T> Classification<T> {
    fn none(reason: impl Into<String>) -> Self {
        Self {
            label: Label::None,
            gamma_star: None,
            exponent: None,
            reason: reason.into(),
        }
    }
}

/// Recognises a saddle-node (0 → 2 zeros) or pitchfork (1 → 3 zeros) in a
/// diagram, requiring the new zeros to separate like √|γ - γ*|.
pub fn classify<T: Real>(diag: &BifurcationDiagram<T>) -> Classification<T> {
    let counts = diag.counts();
    let n = counts.len();
    // orient so that the zero count grows with the index
    let order: Vec<usize> = if counts[0] <= counts[n - 1] {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let (low, high) = (counts[order[0]], counts[order[n - 1]]);
    let kind = match (low, high) {
        (0, 2) => Label::SaddleNode,
        (1, 3) => Label::Pitchfork,
        _ => return Classification::none(format!("zero count goes from {low} to {high}")),
    };
    let seq: Vec<usize> = order.iter().map(|&k| counts[k]).collect();
    if seq.windows(2).any(|w| w[1] < w[0]) {
        return Classification::none("zero count is not monotone in the parameter");
    }
    let first_high = order[seq.iter().position(|&c| c == high).expect("high count occurs")];
    let last_low = order[seq.iter().rposition(|&c| c == low).expect("low count occurs")];

    // γ*: a grid value carrying a degenerate zero, else between the two regimes
    let fold = order
        .iter()
        .copied()
        .find(|&k| diag.zero_sets[k].degenerate.iter().any(|&d| d));
    let gamma_star = match fold {
        Some(k) => diag.gammas[k],
        None => (diag.gammas[first_high] + diag.gammas[last_low]) / T::lit(2.0),
    };

    if kind == Label::Pitchfork {
        let before = &diag.zero_sets[last_low].zeros;
        let after = &diag.zero_sets[first_high].zeros;
        let spread = (after[2] - after[0]) / T::lit(2.0);
        if (after[1] - before[0]).abs() >= spread {
            return Classification::none("the middle zero does not continue the single branch");
        }
    }

    let high_side: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| counts[k] == high && (diag.gammas[k] - gamma_star).abs() > T::lit(1e-12))
        .take(FOLD_FIT_POINTS)
        .collect();
    if high_side.len() < 3 {
        return Classification::none("too few parameter values beyond the bifurcation");
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &k in &high_side {
        let z = &diag.zero_sets[k].zeros;
        let half = (z[z.len() - 1] - z[0]) / T::lit(2.0);
        if half > T::zero() {
            xs.push((diag.gammas[k] - gamma_star).abs().ln());
            ys.push(half.ln());
        }
    }
    if xs.len() < 3 {
        return Classification::none("the new zeros do not separate");
    }
    let p = ls_slope(&xs, &ys);
    let ok = (p - T::lit(0.5)).abs() <= T::lit(FOLD_EXPONENT_TOL);
    Classification {
        label: if ok { kind } else { Label::None },
        gamma_star: Some(gamma_star),
        exponent: Some(p),
        reason: if ok {
            format!("{} zeros become {} at gamma* = {}", low, high, gamma_star)
        } else {
            format!("branch separation exponent {p} is not 1/2")
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport<T> {
    /// The run escaped towards -∞.
    pub diverged: bool,
    pub escape_time: Option<T>,
    /// With an upper bound c ≥ sup g supplied: x(t) ≤ η + c t^α / Γ(α+1)
    /// held along the run.
    pub bound_holds: Option<bool>,
}

/// Runs the solver from `x0` and reports whether it escapes to -∞.
///
/// When `sup_g` bounds g from above (γ for g = γ - x²), the trajectory is
/// also compared with x(t) ≤ η + sup_g t^α / Γ(α+1).
pub fn divergence_check<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    alpha: T,
    x0: T,
    t_end: T,
    dt: T,
    sup_g: Option<T>,
) -> Result<DivergenceReport<T>, AnalysisError> {
    let tr = solve_pece(field, &CaputoProblem::new(alpha, vec![x0], t_end, dt)?)?;
    let diverged = tr.escape.as_ref().is_some_and(|e| e.direction[0] < 0);
    let escape_time = tr.escape.as_ref().map(|e| tr.time(e.index));
    let bound_holds = match sup_g {
        Some(c) => {
            let scale = c / gamma_fn(alpha + T::one())?;
            let slack = T::lit(1e-9);
            Some(tr.iter().all(|(t, x)| x[0] <= x0 + scale * t.powf(alpha) + slack * (T::one() + x0.abs())))
        }
        None => None,
    };
    Ok(DivergenceReport {
        diverged,
        escape_time,
        bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(src: &str) -> FieldDef {
        FieldDef::parse(&[src], &["gamma"]).unwrap()
    }

    #[test]
    fn saddle_node() {
        let f = family("gamma - x^2");
        let d = sweep(&f, "gamma", &[0.0f64], (-1.0, 1.0), 201, (-3.0, 3.0)).unwrap();
        let counts = d.counts();
        assert!(counts[..100].iter().all(|&c| c == 0));
        assert_eq!(counts[100], 1);
        assert!(d.zero_sets[100].degenerate[0]);
        assert!(counts[101..].iter().all(|&c| c == 2));
        let c = classify(&d);
        assert_eq!(c.label, Label::SaddleNode, "{c:?}");
        assert!((c.exponent.unwrap() - 0.5).abs() < 1e-6);
        assert_eq!(c.gamma_star, Some(0.0));
        for k in 101..201 {
            let r = d.gammas[k].sqrt();
            let z = &d.zero_sets[k].zeros;
            assert!((z[0] + r).abs() < 1e-9 && (z[1] - r).abs() < 1e-9);
            assert!(!d.is_stable(k, 0) && d.is_stable(k, 1));
        }
        assert!(d.divergent()[0] && !d.divergent()[200]);
    }

    #[test]
    fn pitchfork() {
        let f = family("gamma*x - x^3");
        let d = sweep(&f, "gamma", &[0.0f64], (-1.0, 1.0), 201, (-3.0, 3.0)).unwrap();
        let counts = d.counts();
        assert!(counts[..=100].iter().all(|&c| c == 1));
        assert!(counts[101..].iter().all(|&c| c == 3));
        let c = classify(&d);
        assert_eq!(c.label, Label::Pitchfork, "{c:?}");
        // the zero branch persists through the bifurcation
        assert!(d.branches.iter().any(|b| b.start == 0 && b.end() == 200));
    }

    #[test]
    fn no_bifurcation() {
        let f = family("1 + 0*gamma");
        let d = sweep(&f, "gamma", &[0.0f64], (-1.0, 1.0), 21, (-3.0, 3.0)).unwrap();
        assert!(d.counts().iter().all(|&c| c == 0));
        assert_eq!(classify(&d).label, Label::None);

        let f = family("-x");
        let d = sweep(&f, "gamma", &[0.0f64], (-1.0, 1.0), 21, (-3.0, 3.0)).unwrap();
        assert_eq!(classify(&d).label, Label::None);
    }

    #[test]
    fn reversed_saddle() {
        let f = family("-gamma - x^2");
        let d = sweep(&f, "gamma", &[0.0f64], (-1.0, 1.0), 201, (-3.0, 3.0)).unwrap();
        assert_eq!(classify(&d).label, Label::SaddleNode);
    }

    #[test]
    fn divergence() {
        let f = family("gamma - x^2");
        let run = |gamma: f64, x0: f64| {
            let g = f.bind(&[gamma]).unwrap();
            divergence_check(&g, 0.6, x0, 20.0, 1e-3, Some(gamma)).unwrap()
        };
        let r = run(-0.5, 0.0);
        assert!(r.diverged && r.bound_holds == Some(true), "{r:?}");
        let r = run(0.25, 0.0);
        assert!(!r.diverged && r.bound_holds == Some(true));
        assert!(run(0.25, -1.0).diverged);
    }

    #[test]
    fn unknown_parameter() {
        let f = family("gamma - x^2");
        assert!(sweep(&f, "mu", &[0.0], (-1.0, 1.0), 5, (-3.0, 3.0)).is_err());
    }
}
