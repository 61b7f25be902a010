use num_complex::Complex64;

use super::{Expr, Func, ParseError, MAX_POWER};
use crate::expoly::{ExpPoly, MERGE_TOL};
use crate::poly::Poly;

/// Lowers an expression into the exponential-polynomial algebra.
///
/// `sin` and `cos` go through the Euler formula, products are expanded, and
/// division is only by nonzero constants. Anything outside the class, such
/// as `exp(x^2)` or `1/x`, is an [`ParseError::UnsupportedForm`].
pub fn lower_rhs(e: &Expr) -> Result<ExpPoly, ParseError> {
    Ok(match e {
        Expr::Num(c) => ExpPoly::constant(*c),
        Expr::X => ExpPoly::from_poly(Poly::monomial(Complex64::new(1.0, 0.0), 1)),
        Expr::Y { pos, .. } => return Err(ParseError::UnknownOnRhs { position: *pos }),
        Expr::Neg(a) => -lower_rhs(a)?,
        Expr::Add(a, b) => lower_rhs(a)? + lower_rhs(b)?,
        Expr::Sub(a, b) => lower_rhs(a)? - lower_rhs(b)?,
        Expr::Mul(a, b) => lower_rhs(a)? * lower_rhs(b)?,
        Expr::Div(a, b) => {
            let num = lower_rhs(a)?;
            let den = as_constant(&lower_rhs(b)?)
                .ok_or_else(|| ParseError::UnsupportedForm("division by a non-constant".into()))?;
            if den == Complex64::new(0.0, 0.0) {
                return Err(ParseError::UnsupportedForm("division by zero".into()));
            }
            num.scale(den.inv())
        }
        Expr::Pow(a, b) => {
            let base = lower_rhs(a)?;
            let k = as_constant(&lower_rhs(b)?)
                .filter(|k| k.im == 0.0 && k.re.fract() == 0.0 && k.re >= 0.0)
                .ok_or_else(|| {
                    ParseError::UnsupportedForm("exponent must be a nonnegative integer".into())
                })?
                .re;
            if k > MAX_POWER as f64 {
                return Err(ParseError::UnsupportedForm(format!(
                    "exponent {k} exceeds {MAX_POWER}"
                )));
            }
            power(&base, k as usize)
        }
        Expr::Call(f, a) => {
            let (c0, c1) = linear_argument(&lower_rhs(a)?, *f)?;
            let i = Complex64::new(0.0, 1.0);
            match f {
                Func::Exp => ExpPoly::exp(c1).scale(c0.exp()),
                Func::Cos | Func::Sin => {
                    let up = ExpPoly::exp(i * c1).scale((i * c0).exp());
                    let down = ExpPoly::exp(-i * c1).scale((-i * c0).exp());
                    if *f == Func::Cos {
                        (up + down).scale(Complex64::new(0.5, 0.0))
                    } else {
                        (up - down).scale(Complex64::new(0.0, -0.5))
                    }
                }
            }
        }
    })
}

/// Value of a constant subexpression; `None` if it depends on `x`.
pub(crate) fn constant_value(e: &Expr) -> Result<Option<Complex64>, ParseError> {
    Ok(as_constant(&lower_rhs(e)?))
}

fn as_constant(f: &ExpPoly) -> Option<Complex64> {
    match f.terms() {
        [] => Some(Complex64::new(0.0, 0.0)),
        [t] if t.exponent.norm() <= MERGE_TOL && t.poly.degree() == Some(0) => {
            Some(t.poly.coeff(0))
        }
        _ => None,
    }
}

/// Splits `c0 + c1·x` out of a function argument.
fn linear_argument(arg: &ExpPoly, f: Func) -> Result<(Complex64, Complex64), ParseError> {
    match arg.terms() {
        [] => Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))),
        [t] if t.exponent.norm() <= MERGE_TOL && t.poly.degree().unwrap_or(0) <= 1 => {
            Ok((t.poly.coeff(0), t.poly.coeff(1)))
        }
        _ => Err(ParseError::UnsupportedForm(format!(
            "{f} needs an argument of the form a + b*x"
        ))),
    }
}

fn power(base: &ExpPoly, mut k: usize) -> ExpPoly {
    let mut acc = ExpPoly::constant(Complex64::new(1.0, 0.0));
    let mut sq = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &sq;
        }
        k >>= 1;
        if k > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}
