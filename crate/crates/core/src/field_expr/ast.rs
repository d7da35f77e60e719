use std::collections::BTreeSet;
use std::fmt;

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Tanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Sin, Func::Cos, Func::Tanh, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }
}

/// Parsed scalar expression. Variables and parameters are stored by
/// zero-based index; names live in the owning [`super::FieldDef`].
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num(f64),
    Var(usize),
    Param(usize),
    Neg(Box<ExprAst>),
    Bin(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

/// Integer exponents up to this magnitude are evaluated with `powi`.
const POWI_LIMIT: f64 = 64.0;

impl ExprAst {
    pub fn eval<T: Real>(&self, state: &[T], params: &[T]) -> T {
        match self {
            ExprAst::Num(v) => T::lit(*v),
            ExprAst::Var(i) => state[*i],
            ExprAst::Param(i) => params[*i],
            ExprAst::Neg(e) => -e.eval(state, params),
            ExprAst::Call(f, e) => f.apply(e.eval(state, params)),
            ExprAst::Bin(op, l, r) => {
                let a = l.eval(state, params);
                match op {
                    BinOp::Add => a + r.eval(state, params),
                    BinOp::Sub => a - r.eval(state, params),
                    BinOp::Mul => a * r.eval(state, params),
                    BinOp::Div => a / r.eval(state, params),
                    BinOp::Pow => match r.integer_literal() {
                        Some(n) => a.powi(n),
                        None => a.powf(r.eval(state, params)),
                    },
                }
            }
        }
    }

    fn integer_literal(&self) -> Option<i32> {
        match self {
            ExprAst::Num(v) if v.fract() == 0.0 && v.abs() <= POWI_LIMIT => Some(*v as i32),
            ExprAst::Neg(e) => e.integer_literal().map(|n| -n),
            _ => None,
        }
    }

    /// Indices of the variables the expression reads.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ExprAst::Var(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    pub fn parameters(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ExprAst::Param(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    /// Copy with every variable index `i` replaced by `map(i)`.
    pub fn map_vars(&self, map: &impl Fn(usize) -> usize) -> ExprAst {
        match self {
            ExprAst::Var(i) => ExprAst::Var(map(*i)),
            ExprAst::Num(_) | ExprAst::Param(_) => self.clone(),
            ExprAst::Neg(e) => ExprAst::Neg(Box::new(e.map_vars(map))),
            ExprAst::Call(f, e) => ExprAst::Call(*f, Box::new(e.map_vars(map))),
            ExprAst::Bin(op, l, r) => ExprAst::Bin(*op, Box::new(l.map_vars(map)), Box::new(r.map_vars(map))),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&ExprAst)) {
        f(self);
        match self {
            ExprAst::Neg(e) | ExprAst::Call(_, e) => e.visit(f),
            ExprAst::Bin(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            _ => {}
        }
    }

    /// Renders with the given parameter names; variables print as `x1`, `x2`, ...
    pub fn display<'a>(&'a self, params: &'a [String]) -> Printed<'a> {
        Printed { ast: self, params }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprAst::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprAst::Neg(_) => 3,
            ExprAst::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

pub struct Printed<'a> {
    ast: &'a ExprAst,
    params: &'a [String],
}

impl Printed<'_> {
    fn child<'b>(&'b self, ast: &'b ExprAst) -> Printed<'b> {
        Printed {
            ast,
            params: self.params,
        }
    }

    fn write_wrapped(&self, f: &mut fmt::Formatter<'_>, ast: &ExprAst, wrap: bool) -> fmt::Result {
        if wrap {
            write!(f, "({})", self.child(ast))
        } else {
            write!(f, "{}", self.child(ast))
        }
    }
}

impl fmt::Display for Printed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ast {
            ExprAst::Num(v) => write!(f, "{v}"),
            ExprAst::Var(i) => write!(f, "x{}", i + 1),
            ExprAst::Param(i) => match self.params.get(*i) {
                Some(name) => f.write_str(name),
                None => write!(f, "p{i}"),
            },
            ExprAst::Neg(e) => {
                f.write_str("-")?;
                self.write_wrapped(f, e, e.precedence() < 3)
            }
            ExprAst::Call(func, e) => write!(f, "{}({})", func.name(), self.child(e)),
            ExprAst::Bin(op, l, r) => {
                let p = self.ast.precedence();
                let (sym, right_assoc) = match op {
                    BinOp::Add => (" + ", false),
                    BinOp::Sub => (" - ", false),
                    BinOp::Mul => (" * ", false),
                    BinOp::Div => (" / ", false),
                    BinOp::Pow => ("^", true),
                };
                let wrap_l = l.precedence() < p || (right_assoc && l.precedence() == p);
                let wrap_r = r.precedence() < p || (!right_assoc && r.precedence() == p);
                self.write_wrapped(f, l, wrap_l)?;
                f.write_str(sym)?;
                self.write_wrapped(f, r, wrap_r)
            }
        }
    }
}
