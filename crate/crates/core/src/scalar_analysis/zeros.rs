use super::{linspace, scalar_fn, AnalysisError, H2_THRESHOLD};
use crate::field_expr::{scalar_derivative, EvalError, VectorField};
use crate::real::Real;

/// Bracket width at which bisection stops.
const BISECT_TOL: f64 = 1e-12;
/// Zeros closer than this are merged.
const MERGE_TOL: f64 = 1e-9;

/// Sorted zeros of a scalar field with g' at each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet<T> {
    pub zeros: Vec<T>,
    pub derivs: Vec<T>,
    /// |g'| < 1e-6; only produced by [`find_zeros_tolerant`].
    pub degenerate: Vec<bool>,
}

impl<T: Real> ZeroSet<T> {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn is_stable(&self, j: usize) -> bool {
        self.derivs[j] < T::zero()
    }

    /// Set when the count is even, which for a dissipative field means the
    /// scan missed a zero.
    pub fn even_count_warning(&self) -> Option<String> {
        self.len().is_multiple_of(2).then(|| {
            format!(
                "{} zeros found; a dissipative field has an odd number, the scan interval may be too small",
                self.len()
            )
        })
    }

    /// Odd count, stable outermost zeros, and alternating derivative signs.
    pub fn has_dissipative_structure(&self) -> bool {
        self.len() % 2 == 1
            && !self.degenerate.iter().any(|&d| d)
            && self
                .derivs
                .iter()
                .enumerate()
                .all(|(j, &d)| if j % 2 == 0 { d < T::zero() } else { d > T::zero() })
    }

    /// Distance from `x` to the nearest zero.
    pub fn distance(&self, x: T) -> T {
        self.zeros
            .iter()
            .fold(T::infinity(), |acc, &z| acc.min((x - z).abs()))
    }

    /// The zero equal to `x` up to the merge tolerance.
    pub fn position(&self, x: T) -> Option<usize> {
        self.zeros
            .iter()
            .position(|&z| (z - x).abs() <= T::tol(MERGE_TOL) * T::one().max(z.abs()))
    }
}

/// [min 𝓝(g), max 𝓝(g)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> AttractorInterval<T> {
    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn distance(&self, x: T) -> T {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            T::zero()
        }
    }
}

pub fn attractor_interval<T: Real>(zs: &ZeroSet<T>) -> Result<AttractorInterval<T>, AnalysisError> {
    match (zs.zeros.first(), zs.zeros.last()) {
        (Some(&lo), Some(&hi)) => Ok(AttractorInterval { lo, hi }),
        _ => Err(AnalysisError::Precondition("the zero set is empty".into())),
    }
}

/// Zeros of g on `scan`, refined to 1e-12, rejecting any with |g'| < 1e-6.
pub fn find_zeros<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    scan: (T, T),
    resolution: usize,
) -> Result<ZeroSet<T>, AnalysisError> {
    let zs = find_zeros_tolerant(field, scan, resolution)?;
    if let Some(j) = zs.degenerate.iter().position(|&d| d) {
        return Err(AnalysisError::H2Violation {
            zero: zs.zeros[j].as_f64(),
            derivative: zs.derivs[j].as_f64(),
        });
    }
    Ok(zs)
}

/// As [`find_zeros`], but marks non-hyperbolic zeros instead of failing.
///
/// Besides sign changes between grid points this also finds tangential
/// zeros (local extrema of g touching zero), which are the only zeros a
/// fold produces.
pub fn find_zeros_tolerant<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    scan: (T, T),
    resolution: usize,
) -> Result<ZeroSet<T>, AnalysisError> {
    if resolution < 1000 || !(scan.0 < scan.1) {
        return Err(AnalysisError::Precondition(
            "zero scan needs lo < hi and at least 1000 subintervals".into(),
        ));
    }
    let g = scalar_fn(field)?;
    let xs: Vec<T> = linspace(scan.0, scan.1, resolution + 1).collect();
    let gs = xs.iter().map(|&x| g(x)).collect::<Result<Vec<T>, _>>()?;
    let scale = gs.iter().fold(T::one(), |m, v| m.max(v.abs()));

    let mut found = Vec::new();
    for k in 0..xs.len() {
        if gs[k] == T::zero() {
            found.push(xs[k]);
            continue;
        }
        if k + 1 < xs.len() && gs[k] * gs[k + 1] < T::zero() {
            found.push(bisect(&g, xs[k], xs[k + 1], gs[k])?);
        }
        if k >= 1 && k + 1 < xs.len() {
            let (l, m, r) = (gs[k - 1], gs[k], gs[k + 1]);
            let same_sign = l * m > T::zero() && m * r > T::zero();
            if same_sign && m.abs() < l.abs() && m.abs() <= r.abs() {
                touch(&g, xs[k - 1], xs[k + 1], m.signum(), scale, &mut found)?;
            }
        }
    }

    found.sort_by(|a, b| a.partial_cmp(b).expect("zeros are finite"));
    let merge = T::tol(MERGE_TOL);
    found.dedup_by(|b, a| (*b - *a).abs() <= merge);

    let mut derivs = Vec::with_capacity(found.len());
    let mut degenerate = Vec::with_capacity(found.len());
    for &z in &found {
        let d = scalar_derivative(&g, z)?;
        derivs.push(d);
        degenerate.push(d.abs() < T::lit(H2_THRESHOLD));
    }
    Ok(ZeroSet {
        zeros: found,
        derivs,
        degenerate,
    })
}

fn bisect<T: Real>(
    g: &impl Fn(T) -> Result<T, EvalError>,
    mut a: T,
    mut b: T,
    mut ga: T,
) -> Result<T, EvalError> {
    let tol = T::tol(BISECT_TOL);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = a + (b - a) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == T::zero() {
            return Ok(m);
        }
        if (gm > T::zero()) == (ga > T::zero()) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(a + (b - a) / T::lit(2.0))
}

/// Handles a grid cell triple where g keeps its sign but |g| dips: either g
/// crosses zero twice between the samples, or touches it.
fn touch<T: Real>(
    g: &impl Fn(T) -> Result<T, EvalError>,
    lo: T,
    hi: T,
    sign: T,
    scale: T,
    found: &mut Vec<T>,
) -> Result<(), EvalError> {
    let s = |x: T| g(x).map(|v| v * sign);
    let (xm, vm) = golden_min(&s, lo, hi)?;
    if vm < T::zero() {
        let glo = g(lo)?;
        found.push(bisect(g, lo, xm, glo)?);
        found.push(bisect(g, xm, hi, g(xm)?)?);
    } else if vm <= T::tol(1e-12) * scale {
        found.push(xm);
    }
    Ok(())
}

fn golden_min<T: Real>(
    f: &impl Fn(T) -> Result<T, EvalError>,
    mut a: T,
    mut b: T,
) -> Result<(T, T), EvalError> {
    let r = T::lit(0.618_033_988_749_894_8);
    let tol = T::tol(BISECT_TOL);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        if fc < T::zero() {
            return Ok((c, fc));
        }
        if fd < T::zero() {
            return Ok((d, fd));
        }
    }
    let x = a + (b - a) / T::lit(2.0);
    Ok((x, f(x)?))
}
