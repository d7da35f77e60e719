//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```

use super::ast::{BinOp, ExprAst, Func};
use super::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })?;
                if !v.is_finite() {
                    return Err(ExprError::Syntax {
                        offset: start,
                        message: format!("number '{text}' is out of range"),
                    });
                }
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(src[start..i].to_string())
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// Resolves identifiers to variable or parameter slots.
pub(crate) struct Scope<'a> {
    pub dimension: usize,
    pub params: &'a [String],
}

impl Scope<'_> {
    fn resolve(&self, name: &str) -> Option<ExprAst> {
        if let Some(i) = variable_index(name, self.dimension) {
            return Some(ExprAst::Var(i));
        }
        self.params
            .iter()
            .position(|p| p == name)
            .map(ExprAst::Param)
    }
}

/// `x1..xd` always; `x`, `y`, `z` as aliases when d ≤ 3.
pub(crate) fn variable_index(name: &str, dimension: usize) -> Option<usize> {
    let alias = match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => None,
    };
    if let Some(i) = alias {
        return (dimension <= 3 && i < dimension).then_some(i);
    }
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    (1..=dimension).contains(&k).then(|| k - 1)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: &'a Scope<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprAst::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprAst::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(ExprAst::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(ExprAst::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprAst, ExprError> {
        let (tok, offset) = self.bump();
        let node = match tok {
            Tok::Num(v) => ExprAst::Num(v),
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax("expected ')'");
                }
                self.bump();
                inner
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.call(func, offset)?
                } else if let Some(node) = self.scope.resolve(&name) {
                    node
                } else {
                    return Err(ExprError::UnknownIdentifier { name, offset });
                }
            }
            Tok::End => {
                return Err(ExprError::Syntax {
                    offset,
                    message: "unexpected end of input".into(),
                })
            }
            _ => {
                return Err(ExprError::Syntax {
                    offset,
                    message: "expected a number, identifier or '('".into(),
                })
            }
        };
        if matches!(self.peek(), Tok::Num(_) | Tok::Ident(_) | Tok::LParen) {
            return self.syntax("implicit multiplication is not supported; use '*'");
        }
        Ok(node)
    }

    fn call(&mut self, func: Func, offset: usize) -> Result<ExprAst, ExprError> {
        let arity_error = |found| ExprError::Arity {
            function: func.name(),
            expected: 1,
            found,
            offset,
        };
        if *self.peek() != Tok::LParen {
            return Err(arity_error(0));
        }
        self.bump();
        if *self.peek() == Tok::RParen {
            return Err(arity_error(0));
        }
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        if *self.peek() != Tok::RParen {
            return self.syntax("expected ')' or ','");
        }
        self.bump();
        if args.len() != 1 {
            return Err(arity_error(args.len()));
        }
        Ok(ExprAst::Call(func, Box::new(args.pop().expect("one argument"))))
    }
}

pub(crate) fn parse(src: &str, scope: &Scope<'_>) -> Result<ExprAst, ExprError> {
    if src.trim().is_empty() {
        return Err(ExprError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, scope };
    let ast = p.expr()?;
    match p.peek() {
        Tok::End => Ok(ast),
        Tok::RParen => p.syntax("unbalanced ')'"),
        _ => p.syntax("expected an operator"),
    }
}
