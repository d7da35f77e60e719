//! Triangular fields in product form g_i(x) = h_i(x_1, ..., x_{i-1}) f_i(x_i).
//!
//! When every h_i keeps one sign, the sign of g_i is the sign of f_i up to a
//! constant, so each coordinate inherits the scalar theory: the attractor is
//! the product of the intervals [min 𝓝(f_i), max 𝓝(f_i)] and every solution
//! converges to a point of 𝓝(f_1) × ... × 𝓝(f_d).

use crate::field_expr::catalog::CatalogTriangular;
use crate::field_expr::{BinOp, BoundField, EvalError, ExprAst, ExprError, FieldDef, FnField};
use crate::real::Real;
use crate::scalar_analysis::{
    attractor_interval, classify_limit, cube_grid, find_zeros, search_h1, AnalysisError, AttractorInterval,
    DissipativityCertificate, Limit, ZeroSet,
};

/// Smallest |h_i| accepted on the validation box.
pub const H_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TriangularError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("h{component} reads x{variable}, only x1..x{} are allowed", component - 1)]
    HDependency { component: usize, variable: usize },
    #[error("f{component} reads x{variable}, only x{component} is allowed")]
    FDependency { component: usize, variable: usize },
    #[error("h{component} vanishes or changes sign near {witness:?} (value {value})")]
    VanishingH {
        component: usize,
        witness: Vec<f64>,
        value: f64,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// h and f factors of a product-form triangular field. Indices in error
/// messages are 1-based like the variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularField {
    h: Vec<ExprAst>,
    f: Vec<ExprAst>,
    parameters: Vec<String>,
    assembled: FieldDef,
}

impl TriangularField {
    /// Parses `h[i]` and `f[i]` as expressions in x1..xd (aliases x, y, z for d ≤ 3).
    pub fn parse<S: AsRef<str>>(h: &[S], f: &[S], parameters: &[S]) -> Result<Self, TriangularError> {
        if h.len() != f.len() {
            return Err(ExprError::Definition(format!("{} h factors but {} f factors", h.len(), f.len())).into());
        }
        let h = FieldDef::parse(h, parameters)?;
        let f = FieldDef::parse(f, parameters)?;
        Self::from_factors(h.components().to_vec(), f.components().to_vec(), h.parameters().to_vec())
    }

    pub fn from_factors(h: Vec<ExprAst>, f: Vec<ExprAst>, parameters: Vec<String>) -> Result<Self, TriangularError> {
        for (i, (hi, fi)) in h.iter().zip(&f).enumerate() {
            if let Some(&v) = hi.variables().iter().find(|&&v| v >= i) {
                return Err(TriangularError::HDependency {
                    component: i + 1,
                    variable: v + 1,
                });
            }
            if let Some(&v) = fi.variables().iter().find(|&&v| v != i) {
                return Err(TriangularError::FDependency {
                    component: i + 1,
                    variable: v + 1,
                });
            }
        }
        let components = h
            .iter()
            .zip(&f)
            .map(|(hi, fi)| ExprAst::Bin(BinOp::Mul, Box::new(hi.clone()), Box::new(fi.clone())))
            .collect();
        let assembled = FieldDef::from_components(components, parameters.clone())?;
        Ok(Self {
            h,
            f,
            parameters,
            assembled,
        })
    }

    pub fn from_catalog(entry: &CatalogTriangular) -> Result<Self, TriangularError> {
        Self::parse(entry.h, entry.f, &[])
    }

    pub fn dimension(&self) -> usize {
        self.h.len()
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    /// The field g with g_i = h_i f_i.
    pub fn field(&self) -> &FieldDef {
        &self.assembled
    }

    /// f_i as a scalar field in its own variable.
    pub fn factor(&self, i: usize) -> FieldDef {
        let ast = self.f[i].map_vars(&|_| 0);
        FieldDef::from_components(vec![ast], self.parameters.clone()).expect("f_i reads only x_i")
    }

    pub fn h_value<T: Real>(&self, i: usize, x: &[T], params: &[T]) -> T {
        self.h[i].eval(x, params)
    }
}

/// Range and sign of one h factor over the validation box.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorRange<T> {
    pub min_abs: T,
    pub positive: bool,
    /// Where |h| is smallest.
    pub witness: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangularReport<T> {
    pub h: Vec<FactorRange<T>>,
    /// None when no (H1) constants were found on the box.
    pub h1: Option<DissipativityCertificate<T>>,
    pub zero_sets: Vec<ZeroSet<T>>,
}

impl<T: Real> TriangularReport<T> {
    pub fn passed(&self) -> bool {
        self.h1.is_some() && self.zero_sets.iter().all(|z| !z.is_empty())
    }
}

/// Checks that every h_i is bounded away from zero with constant sign on
/// box^{i-1}, that the assembled field satisfies (H1) on the box, and that
/// each f_i satisfies (H2) there.
pub fn validate_triangular<T: Real>(
    tf: &TriangularField,
    params: &[T],
    scan: (T, T),
    n_samples: usize,
) -> Result<TriangularReport<T>, TriangularError> {
    let mut ranges = Vec::with_capacity(tf.dimension());
    let d = tf.dimension();
    for i in 0..d {
        let points = if i == 0 {
            vec![vec![T::zero(); d]]
        } else {
            cube_grid(scan, i, n_samples)
                .into_iter()
                .map(|mut p| {
                    p.resize(d, T::zero());
                    p
                })
                .collect()
        };
        let mut min: Option<(T, Vec<T>)> = None;
        let mut sign = None;
        for p in points {
            let v = tf.h_value(i, &p, params);
            let bad = !v.is_finite() || v.abs() <= T::lit(H_FLOOR);
            let flipped = sign.is_some_and(|s| s != (v > T::zero()));
            if bad || flipped {
                return Err(TriangularError::VanishingH {
                    component: i + 1,
                    witness: p[..i].iter().map(|c| c.as_f64()).collect(),
                    value: v.as_f64(),
                });
            }
            sign = Some(v > T::zero());
            if min.as_ref().is_none_or(|(m, _)| v.abs() < *m) {
                min = Some((v.abs(), p[..i].to_vec()));
            }
        }
        let (min_abs, witness) = min.expect("at least one sample");
        ranges.push(FactorRange {
            min_abs,
            positive: sign.unwrap_or(true),
            witness,
        });
    }
    let g = tf.field().bind(params)?;
    let h1 = search_h1(&g, scan, n_samples.max(1000))?;
    let zero_sets = (0..d)
        .map(|i| {
            let fi = tf.factor(i);
            let bound = fi.bind(params)?;
            Ok(find_zeros(&bound, scan, n_samples.max(1000))?)
        })
        .collect::<Result<Vec<_>, TriangularError>>()?;
    Ok(TriangularReport {
        h: ranges,
        h1,
        zero_sets,
    })
}

/// Product of the scalar attractors of the f_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductAttractor<T> {
    pub intervals: Vec<AttractorInterval<T>>,
    pub zero_sets: Vec<ZeroSet<T>>,
}

impl<T: Real> ProductAttractor<T> {
    /// Largest coordinate distance from `x` to the box.
    pub fn distance(&self, x: &[T]) -> T {
        self.intervals
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (iv, &c)| acc.max(iv.distance(c)))
    }
}

pub fn product_attractor<T: Real>(
    tf: &TriangularField,
    params: &[T],
    scan: (T, T),
    resolution: usize,
) -> Result<ProductAttractor<T>, TriangularError> {
    let mut intervals = Vec::new();
    let mut zero_sets = Vec::new();
    for i in 0..tf.dimension() {
        let fi = tf.factor(i);
        let zs = find_zeros(&fi.bind(params)?, scan, resolution)?;
        intervals.push(attractor_interval(&zs)?);
        zero_sets.push(zs);
    }
    Ok(ProductAttractor { intervals, zero_sets })
}

/// Predicted limit of each coordinate of x(t, x0).
///
/// Coordinate i follows D^α x_i = h_i(t) f_i(x_i) with h_i(t) of fixed sign,
/// so the scalar classification applies to sign(h_i) f_i.
pub fn componentwise_limits<T: Real>(
    tf: &TriangularField,
    params: &[T],
    attractor: &ProductAttractor<T>,
    x0: &[T],
) -> Result<Vec<Limit<T>>, TriangularError> {
    if x0.len() != tf.dimension() {
        return Err(EvalError::Shape {
            what: "initial state components",
            expected: tf.dimension(),
            found: x0.len(),
        }
        .into());
    }
    let mut out = Vec::with_capacity(x0.len());
    for (i, &xi) in x0.iter().enumerate() {
        let sign = tf.h_value(i, x0, params).signum();
        let fi = tf.factor(i);
        let bound: BoundField<'_, T> = fi.bind(params)?;
        let signed = FnField::new(1, |x: &[T], o: &mut [T]| {
            o[0] = sign * bound.component(0, x).unwrap_or(T::nan());
        });
        let mut zs = attractor.zero_sets[i].clone();
        for d in &mut zs.derivs {
            *d = *d * sign;
        }
        out.push(classify_limit(&signed, &zs, xi)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_expr::catalog::{FIG2, SEC3TEXT};

    #[test]
    fn dependency_rules() {
        assert!(matches!(
            TriangularField::parse(&["y", "1"], &["x", "y"], &[]),
            Err(TriangularError::HDependency { component: 1, variable: 2 })
        ));
        assert!(matches!(
            TriangularField::parse(&["1", "1"], &["x", "x*y"], &[]),
            Err(TriangularError::FDependency { component: 2, variable: 1 })
        ));
        let tf = TriangularField::parse(&["1", "1 + x^2"], &["-x", "-y"], &[]).unwrap();
        assert_eq!(tf.dimension(), 2);
        let v = crate::field_expr::eval_field(tf.field(), &[1.0, 2.0], &[]).unwrap();
        assert_eq!(v, vec![-1.0, -4.0]);
    }

    #[test]
    fn fig2_validates() {
        let tf = TriangularField::from_catalog(&FIG2).unwrap();
        let rep = validate_triangular::<f64>(&tf, &[], (-2.0, 2.0), 1000).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.h[1].min_abs - 1.0).abs() < 1e-4);
        assert!(rep.h.iter().all(|h| h.positive));
    }

    #[test]
    fn vanishing_h_is_reported() {
        let tf = TriangularField::parse(&["1", "x"], &["-x", "-y"], &[]).unwrap();
        match validate_triangular::<f64>(&tf, &[], (-2.0, 2.0), 1001) {
            Err(TriangularError::VanishingH { component: 2, witness, .. }) => assert!(witness[0].abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        // on an even grid zero is skipped but the sign change is caught
        match validate_triangular::<f64>(&tf, &[], (-2.0, 2.0), 1000) {
            Err(TriangularError::VanishingH { component: 2, witness, .. }) => assert!(witness[0].abs() < 0.01),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_dimensional() {
        let tf = TriangularField::parse(&["1"], &["-x"], &[]).unwrap();
        assert!(validate_triangular::<f64>(&tf, &[], (-2.0, 2.0), 1000).unwrap().passed());
        let pa = product_attractor::<f64>(&tf, &[], (-3.0, 3.0), 1000).unwrap();
        assert_eq!((pa.intervals[0].lo, pa.intervals[0].hi), (0.0, 0.0));
    }

    #[test]
    fn boxes() {
        let tf = TriangularField::from_catalog(&FIG2).unwrap();
        let pa = product_attractor::<f64>(&tf, &[], (-3.0, 3.0), 1000).unwrap();
        for iv in &pa.intervals {
            assert!((iv.lo + 1.0).abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);
        }
        let tf = TriangularField::from_catalog(&SEC3TEXT).unwrap();
        let pa = product_attractor::<f64>(&tf, &[], (-3.0, 3.0), 1000).unwrap();
        assert!(pa.intervals[0].lo.abs() < 1e-12 && (pa.intervals[0].hi - 1.0).abs() < 1e-12);
        assert!((pa.intervals[1].lo + 1.0).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        let tf = TriangularField::from_catalog(&FIG2).unwrap();
        let pa = product_attractor::<f64>(&tf, &[], (-3.0, 3.0), 1000).unwrap();
        let lim = |x0: &[f64]| -> Vec<f64> {
            componentwise_limits(&tf, &[], &pa, x0)
                .unwrap()
                .iter()
                .map(|l| l.state().unwrap().round())
                .collect()
        };
        assert_eq!(lim(&[0.5, 0.5]), vec![1.0, 1.0]);
        assert_eq!(lim(&[0.0, -0.5]), vec![0.0, -1.0]);
        assert_eq!(lim(&[-1.0, 0.0]), vec![-1.0, 0.0]);
    }

    #[test]
    fn negative_h_flips_the_direction() {
        let tf = TriangularField::parse(&["1", "-(1 + x^2)"], &["-x", "y*(1 - y^2)"], &[]).unwrap();
        let pa = product_attractor::<f64>(&tf, &[], (-3.0, 3.0), 1000).unwrap();
        let l = componentwise_limits(&tf, &[], &pa, &[0.3, 0.5]).unwrap();
        assert_eq!(l[1].state().unwrap().abs(), 0.0);
    }
}
