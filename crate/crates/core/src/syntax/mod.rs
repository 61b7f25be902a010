//! Text front-end: equations and exponential-polynomial expressions in,
//! canonical text out.
//!
//! ```text
//! equation  := sum '=' sum
//! sum       := term (('+' | '-') term)*
//! term      := unary (('*' | '/') unary)*
//! unary     := ('-' | '+') unary | power
//! power     := atom ('^' unary)?
//! atom      := number [x | y… | i] | 'x' | 'i' | y… | func '(' sum ')' | '(' sum ')'
//! y…        := 'y' '''* | 'y' '^' '(' integer ')'
//! func      := 'exp' | 'sin' | 'cos'
//! ```
//!
//! Multiplication is explicit except that a numeric literal may directly
//! precede `x`, `i` or a derivative of `y` (`2x`, `3i`, `2y'`).

mod lexer;
mod lower;
mod parser;
mod render;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::expoly::ExpPoly;
use crate::operator::LinOp;

pub use lower::lower_rhs;
pub use parser::{
    parse_conditions, parse_equation, parse_equation_rearranged, parse_expr, parse_root_list,
};
pub use render::{render, render_real, render_real_form};

/// Deepest parenthesis/unary nesting the parser accepts.
pub const MAX_DEPTH: usize = 128;

/// Largest integer power and derivative order accepted in input.
pub const MAX_POWER: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("the unknown y appears nonlinearly at position {position}")]
    NonlinearTerm { position: usize },
    #[error("the unknown y appears on the right-hand side at position {position}")]
    UnknownOnRhs { position: usize },
    #[error("the coefficient of y at position {position} is not constant")]
    NonConstantCoefficient { position: usize },
    #[error("the equation contains no derivative of y")]
    DegenerateEquation,
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Complex64),
    X,
    /// `y^(order)`; `pos` is the byte offset of the `y`.
    Y {
        order: usize,
        pos: usize,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Byte offset of the first occurrence of `y`, if any.
    pub fn find_y(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::X => None,
            Expr::Y { pos, .. } => Some(*pos),
            Expr::Neg(a) | Expr::Call(_, a) => a.find_y(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.find_y().or_else(|| b.find_y()),
        }
    }

    /// Direct numeric evaluation at `x`, with complex arithmetic throughout.
    /// `None` if the expression mentions `y`.
    pub fn eval(&self, x: f64) -> Option<Complex64> {
        Some(match self {
            Expr::Num(c) => *c,
            Expr::X => Complex64::new(x, 0.0),
            Expr::Y { .. } => return None,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => a.eval(x)? / b.eval(x)?,
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let e = b.eval(x)?;
                if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= i32::MAX as f64 {
                    base.powi(e.re as i32)
                } else {
                    base.powc(e)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        })
    }
}

/// A parsed linear equation `Σ c_d y^(d) = rhs`.
///
/// `lhs` lists the nonzero derivative coefficients, highest order first.
/// Terms of the left-hand side that do not involve `y` have been moved into
/// `rhs` with their sign flipped.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationAst {
    pub lhs: Vec<(usize, Complex64)>,
    pub rhs: Expr,
}

impl EquationAst {
    /// The monic operator and the correspondingly scaled right-hand side.
    pub fn lower(&self) -> Result<(LinOp, ExpPoly), ParseError> {
        let (order, lead) = match self.lhs.first() {
            Some(&(order, lead)) if order >= 1 => (order, lead),
            _ => return Err(ParseError::DegenerateEquation),
        };
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order];
        for &(d, c) in &self.lhs[1..] {
            // p_k multiplies y^(n-k)
            coeffs[order - d - 1] = c / lead;
        }
        let op = LinOp::new(coeffs).map_err(|e| ParseError::UnsupportedForm(e.to_string()))?;
        let rhs = lower_rhs(&self.rhs)?.scale(lead.inv());
        Ok((op, rhs))
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
