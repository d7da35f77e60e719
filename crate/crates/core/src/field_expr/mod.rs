//! Vector fields g: ℝ^d → ℝ^d given as text, e.g. `"x - x^3"` or `"gamma - x^2"`.
//!
//! Grammar and precedence: `^` (right-associative) binds tighter than unary
//! minus, which binds tighter than `*` `/`, then `+` `-`. Functions are
//! `exp sin cos tanh abs`. Implicit multiplication (`2x`) is rejected.
//! Variables are `x1..xd`, with `x y z` accepted as aliases when d ≤ 3.

mod ast;
pub mod catalog;
mod parser;

pub use ast::{BinOp, ExprAst, Func, Printed};

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function '{function}' takes {expected} argument(s), got {found} (offset {offset})")]
    Arity {
        function: &'static str,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("invalid field definition: {0}")]
    Definition(String),
}

impl ExprError {
    /// Byte offset of the problem in the source text, when there is one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownIdentifier { offset, .. }
            | ExprError::Arity { offset, .. } => Some(*offset),
            ExprError::Definition(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("component {component} evaluated to a non-finite value")]
    NonFinite { component: usize },
    #[error("expected {expected} {what}, got {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Parses one expression over `dimension` variables and the named parameters.
pub fn parse_expr(src: &str, dimension: usize, params: &[String]) -> Result<ExprAst, ExprError> {
    parser::parse(src, &parser::Scope { dimension, params })
}

/// A parsed vector field with named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    dimension: usize,
    components: Vec<ExprAst>,
    parameters: Vec<String>,
}

impl FieldDef {
    /// One expression per coordinate; the dimension is the number of components.
    pub fn parse<S: AsRef<str>>(components: &[S], parameters: &[S]) -> Result<Self, ExprError> {
        let dimension = components.len();
        if dimension == 0 {
            return Err(ExprError::Definition("a field needs at least one component".into()));
        }
        let parameters: Vec<String> = parameters.iter().map(|p| p.as_ref().to_string()).collect();
        for (i, name) in parameters.iter().enumerate() {
            let ok_ident = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok_ident {
                return Err(ExprError::Definition(format!("'{name}' is not a valid parameter name")));
            }
            if parser::variable_index(name, dimension).is_some() || Func::from_name(name).is_some() {
                return Err(ExprError::Definition(format!(
                    "parameter '{name}' shadows a variable or function"
                )));
            }
            if parameters[..i].contains(name) {
                return Err(ExprError::Definition(format!("parameter '{name}' declared twice")));
            }
        }
        let components = components
            .iter()
            .map(|src| parse_expr(src.as_ref(), dimension, &parameters))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            dimension,
            components,
            parameters,
        })
    }

    /// Builds a field from already parsed components.
    pub fn from_components(components: Vec<ExprAst>, parameters: Vec<String>) -> Result<Self, ExprError> {
        let dimension = components.len();
        if dimension == 0 {
            return Err(ExprError::Definition("a field needs at least one component".into()));
        }
        for c in &components {
            if c.variables().iter().any(|&v| v >= dimension) {
                return Err(ExprError::Definition("variable index exceeds the dimension".into()));
            }
            if c.parameters().iter().any(|&p| p >= parameters.len()) {
                return Err(ExprError::Definition("undeclared parameter index".into()));
            }
        }
        Ok(Self {
            dimension,
            components,
            parameters,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn components(&self) -> &[ExprAst] {
        &self.components
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p == name)
    }

    /// Canonical text of component `i`.
    pub fn component_text(&self, i: usize) -> String {
        self.components[i].display(&self.parameters).to_string()
    }

    /// Binds parameter values, producing an evaluable field.
    pub fn bind<T: Real>(&self, params: &[T]) -> Result<BoundField<'_, T>, EvalError> {
        if params.len() != self.parameters.len() {
            return Err(EvalError::Shape {
                what: "parameter values",
                expected: self.parameters.len(),
                found: params.len(),
            });
        }
        Ok(BoundField {
            def: self,
            params: params.to_vec(),
        })
    }
}

/// Anything the solvers can integrate: a map ℝ^d → ℝ^d that may fail.
pub trait VectorField<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// Writes g(x) into `out`; fails when a component is not finite.
    fn eval_into(&self, x: &[T], out: &mut [T]) -> Result<(), EvalError>;

    fn eval(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        let mut out = vec![T::zero(); self.dim()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

/// A [`FieldDef`] together with parameter values.
#[derive(Debug, Clone)]
pub struct BoundField<'a, T> {
    def: &'a FieldDef,
    params: Vec<T>,
}

impl<'a, T: Real> BoundField<'a, T> {
    pub fn def(&self) -> &'a FieldDef {
        self.def
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Component `i` alone.
    pub fn component(&self, i: usize, x: &[T]) -> Result<T, EvalError> {
        let v = self.def.components[i].eval(x, &self.params);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { component: i })
        }
    }
}

impl<T: Real> VectorField<T> for BoundField<'_, T> {
    fn dim(&self) -> usize {
        self.def.dimension
    }

    fn eval_into(&self, x: &[T], out: &mut [T]) -> Result<(), EvalError> {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.component(i, x)?;
        }
        Ok(())
    }
}

/// Wraps a closure `g(x, out)` as a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(&[T], &mut [T]) + Sync> VectorField<T> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, x: &[T], out: &mut [T]) -> Result<(), EvalError> {
        (self.f)(x, out);
        match out.iter().position(|v| !v.is_finite()) {
            Some(component) => Err(EvalError::NonFinite { component }),
            None => Ok(()),
        }
    }
}

/// g(state) for a parsed field.
pub fn eval_field<T: Real>(f: &FieldDef, state: &[T], params: &[T]) -> Result<Vec<T>, EvalError> {
    if state.len() != f.dimension {
        return Err(EvalError::Shape {
            what: "state components",
            expected: f.dimension,
            found: state.len(),
        });
    }
    f.bind(params)?.eval(state)
}

/// ∂g_component/∂x_coordinate by a central difference with
/// h = max(1e-6, 1e-6·|x_coordinate|).
pub fn numeric_derivative<T: Real>(
    f: &FieldDef,
    component: usize,
    state: &[T],
    coordinate: usize,
    params: &[T],
) -> Result<T, EvalError> {
    if component >= f.dimension || coordinate >= f.dimension || state.len() != f.dimension {
        return Err(EvalError::Shape {
            what: "indices within the dimension",
            expected: f.dimension,
            found: component.max(coordinate).max(state.len()),
        });
    }
    let bound = f.bind(params)?;
    central_difference(|x| bound.component(component, x), state, coordinate)
}

pub(crate) fn central_difference<T: Real>(
    g: impl Fn(&[T]) -> Result<T, EvalError>,
    state: &[T],
    coordinate: usize,
) -> Result<T, EvalError> {
    let rel = T::lit(1e-6);
    let h = rel.max(rel * state[coordinate].abs());
    let mut x = state.to_vec();
    x[coordinate] = state[coordinate] + h;
    let up = g(&x)?;
    x[coordinate] = state[coordinate] - h;
    let down = g(&x)?;
    Ok((up - down) / (h + h))
}

/// Derivative of a scalar function with the same step rule.
pub fn scalar_derivative<T: Real>(g: impl Fn(T) -> Result<T, EvalError>, x: T) -> Result<T, EvalError> {
    central_difference(|s: &[T]| g(s[0]), &[x], 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(src: &[&str], params: &[&str]) -> FieldDef {
        FieldDef::parse(src, params).unwrap()
    }

    #[test]
    fn evaluates_spec_examples() {
        let cubic = field(&["x - x^3"], &[]);
        assert_eq!(eval_field(&cubic, &[2.0], &[]).unwrap(), vec![-6.0]);
        let saddle = field(&["gamma - x^2"], &["gamma"]);
        assert_eq!(eval_field(&saddle, &[3.0], &[1.0]).unwrap(), vec![-8.0]);
        let tri = field(&["x", "y*(1-y^2)*(1+x^2)"], &[]);
        assert_eq!(eval_field(&tri, &[1.0, 2.0], &[]).unwrap()[1], -12.0);
        let pitch = field(&["gamma*x - x^3"], &["gamma"]);
        assert_eq!(eval_field(&pitch, &[2.0], &[4.0]).unwrap(), vec![0.0]);
        assert_eq!(eval_field(&cubic, &[1.0], &[]).unwrap(), vec![0.0]);
    }

    #[test]
    fn syntax_error_offsets() {
        let err = parse_expr("x +* 2", 1, &[]).unwrap_err();
        assert_eq!(err.offset(), Some(3));
        assert!(matches!(err, ExprError::Syntax { .. }));
        let err = parse_expr("2x", 1, &[]).unwrap_err();
        assert_eq!(err.offset(), Some(1));
        assert!(parse_expr("(x", 1, &[]).is_err());
        assert!(parse_expr("x)", 1, &[]).is_err());
        assert!(parse_expr("", 1, &[]).is_err());
        assert!(parse_expr("x $ 2", 1, &[]).is_err());
        assert!(parse_expr("1e999", 1, &[]).is_err());
    }

    #[test]
    fn identifier_and_arity_errors() {
        match parse_expr("y + 1", 1, &[]).unwrap_err() {
            ExprError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "y");
                assert_eq!(offset, 0);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse_expr("exp(x, 1)", 1, &[]).unwrap_err(),
            ExprError::Arity { found: 2, .. }
        ));
        assert!(matches!(
            parse_expr("sin + 1", 1, &[]).unwrap_err(),
            ExprError::Arity { found: 0, .. }
        ));
        assert!(parse_expr("x4", 3, &[]).is_err());
        assert!(parse_expr("x", 4, &[]).is_err());
        assert!(parse_expr("x4", 4, &[]).is_ok());
    }

    #[test]
    fn precedence_and_associativity() {
        let e = |s: &str| parse_expr(s, 1, &[]).unwrap().eval(&[2.0f64], &[]);
        assert_eq!(e("-x^2"), -4.0);
        assert_eq!(e("2^3^2"), 512.0);
        assert_eq!(e("x^-1"), 0.5);
        assert_eq!(e("1 - 2 - 3"), -4.0);
        assert_eq!(e("8 / 2 / 2"), 2.0);
        assert_eq!(e("2 * -x"), -4.0);
        assert_eq!(e("abs(-3) + exp(0) + cos(0) + sin(0) + tanh(0)"), 5.0);
    }

    #[test]
    fn non_finite_results_name_the_component() {
        let f = field(&["1", "1/x1"], &[]);
        assert_eq!(
            eval_field(&f, &[0.0, 0.0], &[]).unwrap_err(),
            EvalError::NonFinite { component: 1 }
        );
    }

    #[test]
    fn derivatives() {
        let cubic = field(&["x - x^3"], &[]);
        assert!((numeric_derivative(&cubic, 0, &[0.0], 0, &[]).unwrap() - 1.0f64).abs() < 1e-8);
        assert!((numeric_derivative(&cubic, 0, &[1.0], 0, &[]).unwrap() + 2.0f64).abs() < 1e-8);
        let lin = field(&["-x"], &[]);
        assert!((numeric_derivative(&lin, 0, &[5.0], 0, &[]).unwrap() + 1.0f64).abs() < 1e-10);
    }

    #[test]
    fn bad_parameter_declarations() {
        assert!(FieldDef::parse(&["x"], &["x"]).is_err());
        assert!(FieldDef::parse(&["x"], &["exp"]).is_err());
        assert!(FieldDef::parse(&["x"], &["a", "a"]).is_err());
        assert!(FieldDef::parse(&["x"], &["2a"]).is_err());
        assert!(FieldDef::parse::<&str>(&[], &[]).is_err());
        let f = field(&["a*x"], &["a"]);
        assert!(f.bind::<f64>(&[]).is_err());
    }
}
