use std::collections::BTreeMap;

use num_complex::Complex64;

use super::lexer::{tokenize, Tok, Token};
use super::lower::constant_value;
use super::{EquationAst, Expr, Func, ParseError, MAX_DEPTH, MAX_POWER};
use crate::solver::InitialCondition;

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    depth: usize,
}

const ATOM_START: &[&str] = &[
    "number", "'x'", "'y'", "'i'", "'exp'", "'sin'", "'cos'", "'('",
];

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Self {
            tokens: tokenize(src)?,
            at: 0,
            depth: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            position: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::Syntax {
                position: self.pos(),
                expected: vec![format!("at most {MAX_DEPTH} levels of nesting")],
                found: self.peek().describe(),
            });
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let out = match self.peek() {
            Tok::Minus => {
                self.bump();
                Expr::Neg(Box::new(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek().clone();
        match token {
            Tok::Num(v) => {
                self.bump();
                let num = Expr::Num(Complex64::new(v, 0.0));
                // Literal coefficient: 2x, 3i, 2y'
                if matches!(self.peek(), Tok::Ident(s) if s == "x" || s == "y" || s == "i") {
                    self.enter()?;
                    let rest = self.power()?;
                    self.depth -= 1;
                    return Ok(Expr::Mul(Box::new(num), Box::new(rest)));
                }
                Ok(num)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => {
                    self.bump();
                    Ok(Expr::X)
                }
                "i" => {
                    self.bump();
                    Ok(Expr::Num(Complex64::new(0.0, 1.0)))
                }
                "y" => self.unknown(),
                "exp" | "sin" | "cos" => {
                    self.bump();
                    let func = match name.as_str() {
                        "exp" => Func::Exp,
                        "sin" => Func::Sin,
                        _ => Func::Cos,
                    };
                    self.expect(Tok::LParen, "'('")?;
                    self.enter()?;
                    let arg = self.sum()?;
                    self.depth -= 1;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                _ => Err(self.error(ATOM_START)),
            },
            Tok::LParen => {
                self.bump();
                self.enter()?;
                let inner = self.sum()?;
                self.depth -= 1;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.error(ATOM_START)),
        }
    }

    /// `y`, `y'…` or `y^(k)`.
    fn unknown(&mut self) -> Result<Expr, ParseError> {
        let pos = self.bump().pos;
        let mut order = 0;
        while *self.peek() == Tok::Prime {
            self.bump();
            order += 1;
        }
        if order == 0 && *self.peek() == Tok::Caret && *self.peek_at(1) == Tok::LParen {
            self.bump();
            self.bump();
            order = self.small_integer("derivative order")?;
            self.expect(Tok::RParen, "')'")?;
        }
        if order > MAX_POWER {
            return Err(ParseError::UnsupportedForm(format!(
                "derivative order {order} exceeds {MAX_POWER}"
            )));
        }
        Ok(Expr::Y { order, pos })
    }

    fn small_integer(&mut self, what: &str) -> Result<usize, ParseError> {
        match *self.peek() {
            Tok::Num(v) if v.fract() == 0.0 && v >= 0.0 && v <= MAX_POWER as f64 => {
                self.bump();
                Ok(v as usize)
            }
            _ => Err(self.error(&[&format!("{what} (integer 0..={MAX_POWER})")])),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]))
        }
    }
}

/// Parses an expression in `x` such as `x*exp(-x) + cos(2x)`.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.sum()?;
    p.finish()?;
    Ok(e)
}

/// Parses a linear constant-coefficient equation such as `y'' + 2y' + y = x*exp(-x)`.
///
/// The unknown must not appear on the right-hand side; see
/// [`parse_equation_rearranged`] for input like `y' = y`.
pub fn parse_equation(text: &str) -> Result<EquationAst, ParseError> {
    let (lhs, rhs) = split_equation(text)?;
    if let Some(position) = rhs.find_y() {
        return Err(ParseError::UnknownOnRhs { position });
    }
    collect(&lhs, rhs)
}

/// Like [`parse_equation`], but terms in `y` on the right-hand side are
/// moved to the left first, so `y' = y` reads as `y' - y = 0`.
pub fn parse_equation_rearranged(text: &str) -> Result<EquationAst, ParseError> {
    let (lhs, rhs) = split_equation(text)?;
    if rhs.find_y().is_none() {
        return collect(&lhs, rhs);
    }
    let moved = Expr::Sub(Box::new(lhs), Box::new(rhs));
    collect(&moved, Expr::Num(Complex64::new(0.0, 0.0)))
}

fn split_equation(text: &str) -> Result<(Expr, Expr), ParseError> {
    let mut p = Parser::new(text)?;
    let lhs = p.sum()?;
    if *p.peek() != Tok::Eq {
        return Err(p.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "'='"]));
    }
    p.bump();
    let rhs = p.sum()?;
    p.finish()?;
    Ok((lhs, rhs))
}

fn collect(lhs: &Expr, rhs: Expr) -> Result<EquationAst, ParseError> {
    let lin = linearize(lhs)?;
    let mut lhs_terms: Vec<(usize, Complex64)> = lin
        .derivs
        .into_iter()
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .collect();
    lhs_terms.sort_by_key(|t| std::cmp::Reverse(t.0));
    let rhs = lin.free.into_iter().fold(rhs, |acc, (scale, e)| {
        Expr::Sub(
            Box::new(acc),
            Box::new(Expr::Mul(Box::new(Expr::Num(scale)), Box::new(e))),
        )
    });
    Ok(EquationAst {
        lhs: lhs_terms,
        rhs,
    })
}

/// Linear form of a left-hand side: derivative coefficients plus scaled
/// subexpressions free of `y`.
#[derive(Default)]
struct Linear {
    derivs: BTreeMap<usize, Complex64>,
    free: Vec<(Complex64, Expr)>,
}

impl Linear {
    fn scaled(mut self, c: Complex64) -> Self {
        for v in self.derivs.values_mut() {
            *v *= c;
        }
        for (s, _) in &mut self.free {
            *s *= c;
        }
        self
    }

    fn merge(mut self, other: Linear) -> Self {
        for (d, c) in other.derivs {
            *self.derivs.entry(d).or_default() += c;
        }
        self.free.extend(other.free);
        self
    }
}

fn linearize(e: &Expr) -> Result<Linear, ParseError> {
    let Some(ypos) = e.find_y() else {
        return Ok(Linear {
            derivs: BTreeMap::new(),
            free: vec![(Complex64::new(1.0, 0.0), e.clone())],
        });
    };
    let neg_one = Complex64::new(-1.0, 0.0);
    match e {
        Expr::Y { order, .. } => Ok(Linear {
            derivs: BTreeMap::from([(*order, Complex64::new(1.0, 0.0))]),
            free: Vec::new(),
        }),
        Expr::Neg(a) => Ok(linearize(a)?.scaled(neg_one)),
        Expr::Add(a, b) => Ok(linearize(a)?.merge(linearize(b)?)),
        Expr::Sub(a, b) => Ok(linearize(a)?.merge(linearize(b)?.scaled(neg_one))),
        Expr::Mul(a, b) => {
            let (with_y, other) = match (a.find_y(), b.find_y()) {
                (Some(_), Some(position)) => return Err(ParseError::NonlinearTerm { position }),
                (Some(_), None) => (a, b),
                _ => (b, a),
            };
            let c = constant_value(other)?
                .ok_or(ParseError::NonConstantCoefficient { position: ypos })?;
            Ok(linearize(with_y)?.scaled(c))
        }
        Expr::Div(a, b) => {
            if let Some(position) = b.find_y() {
                return Err(ParseError::NonlinearTerm { position });
            }
            let c =
                constant_value(b)?.ok_or(ParseError::NonConstantCoefficient { position: ypos })?;
            if c == Complex64::new(0.0, 0.0) {
                return Err(ParseError::UnsupportedForm("division by zero".into()));
            }
            Ok(linearize(a)?.scaled(c.inv()))
        }
        Expr::Pow(..) | Expr::Call(..) => Err(ParseError::NonlinearTerm { position: ypos }),
        Expr::Num(_) | Expr::X => unreachable!("no y in leaf"),
    }
}

/// Parses `y(0)=1, y'(0)=0` style initial conditions.
pub fn parse_conditions(text: &str) -> Result<Vec<InitialCondition>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        if !matches!(p.peek(), Tok::Ident(s) if s == "y") {
            return Err(p.error(&["'y'"]));
        }
        let Expr::Y { order, .. } = p.unknown()? else {
            unreachable!()
        };
        let at = p.pos();
        p.expect(Tok::LParen, "'('")?;
        let point_expr = p.sum()?;
        p.expect(Tok::RParen, "')'")?;
        p.expect(Tok::Eq, "'='")?;
        let value_expr = p.sum()?;
        let point = real_constant(&point_expr, at)?;
        let value = constant_value(&value_expr)?.ok_or_else(|| {
            ParseError::UnsupportedForm("condition value must be constant".into())
        })?;
        out.push(InitialCondition {
            order,
            point,
            value,
        });
        match p.peek() {
            Tok::Comma => {
                p.bump();
            }
            Tok::End => return Ok(out),
            _ => return Err(p.error(&["','", "end of input"])),
        }
    }
}

/// Parses `1:2, -1:1` style `root:multiplicity` lists.
pub fn parse_root_list(text: &str) -> Result<Vec<(Complex64, usize)>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        let root_expr = p.sum()?;
        let root = constant_value(&root_expr)?
            .ok_or_else(|| ParseError::UnsupportedForm("root must be constant".into()))?;
        p.expect(Tok::Colon, "':'")?;
        let mult = p.small_integer("multiplicity")?;
        if mult == 0 {
            return Err(ParseError::UnsupportedForm(
                "multiplicity must be positive".into(),
            ));
        }
        out.push((root, mult));
        match p.peek() {
            Tok::Comma => {
                p.bump();
            }
            Tok::End => return Ok(out),
            _ => return Err(p.error(&["','", "end of input"])),
        }
    }
}

fn real_constant(e: &Expr, position: usize) -> Result<f64, ParseError> {
    match constant_value(e)? {
        Some(c) if c.im == 0.0 => Ok(c.re),
        _ => Err(ParseError::Syntax {
            position,
            expected: vec!["real constant point".into()],
            found: "non-real or non-constant expression".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::lower_rhs;

    fn r(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn spec_equation() {
        let eq = parse_equation("y'' + 2y' + y = x*exp(-x)").unwrap();
        assert_eq!(eq.lhs, vec![(2, r(1.0)), (1, r(2.0)), (0, r(1.0))]);
        let rhs = lower_rhs(&eq.rhs).unwrap();
        let want = crate::ExpPoly::monomial(r(1.0), 1, r(-1.0));
        assert_eq!(rhs, want);
    }

    #[test]
    fn first_order_zero_rhs() {
        let eq = parse_equation("y' = 0").unwrap();
        assert_eq!(eq.lhs, vec![(1, r(1.0))]);
        assert!(lower_rhs(&eq.rhs).unwrap().is_zero());
    }

    #[test]
    fn nonlinear_rejected() {
        assert!(matches!(
            parse_equation("y*y' = 1"),
            Err(ParseError::NonlinearTerm { position: 2 })
        ));
        assert!(matches!(
            parse_equation("y^2 = 1"),
            Err(ParseError::NonlinearTerm { .. })
        ));
        assert!(matches!(
            parse_equation("sin(y) = 1"),
            Err(ParseError::NonlinearTerm { .. })
        ));
        assert!(matches!(
            parse_equation("1/y = 1"),
            Err(ParseError::NonlinearTerm { .. })
        ));
    }

    #[test]
    fn unknown_on_rhs() {
        assert!(matches!(
            parse_equation("y' = y"),
            Err(ParseError::UnknownOnRhs { position: 5 })
        ));
    }

    #[test]
    fn rearranged_moves_unknown_left() {
        let eq = parse_equation_rearranged("y' = y + x").unwrap();
        assert_eq!(eq.lhs, vec![(1, r(1.0)), (0, r(-1.0))]);
        let rhs = lower_rhs(&eq.rhs).unwrap();
        assert_eq!(
            rhs,
            crate::ExpPoly::from_poly(crate::Poly::from_real(&[0.0, 1.0]))
        );
        assert_eq!(
            parse_equation_rearranged("y'' + y = x").unwrap(),
            parse_equation("y'' + y = x").unwrap()
        );
        assert!(matches!(
            parse_equation_rearranged("y' = y*y"),
            Err(ParseError::NonlinearTerm { .. })
        ));
    }

    #[test]
    fn variable_coefficient() {
        assert!(matches!(
            parse_equation("x*y' = 1"),
            Err(ParseError::NonConstantCoefficient { position: 2 })
        ));
    }

    #[test]
    fn derivative_syntaxes_agree() {
        let a = parse_equation("y''' - y^(1) = 0").unwrap();
        let b = parse_equation("y^(3) - y' = 0").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lhs, vec![(3, r(1.0)), (1, r(-1.0))]);
    }

    #[test]
    fn coefficients_fold_and_normalize() {
        let eq = parse_equation("2*y'' + 3*y'/2 - (1+i)*y + y'' = 4").unwrap();
        assert_eq!(eq.lhs[0], (2, r(3.0)));
        assert_eq!(eq.lhs[1], (1, r(1.5)));
        assert_eq!(eq.lhs[2], (0, Complex64::new(-1.0, -1.0)));
        let (op, rhs) = eq.lower().unwrap();
        assert_eq!(op.coeffs()[0], r(0.5));
        assert!((rhs.max_abs() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lhs_free_terms_move_right() {
        let (op, rhs) = parse_equation("y' + x = 0").unwrap().lower().unwrap();
        assert_eq!(op.coeffs(), &[r(0.0)]);
        assert_eq!(
            rhs,
            crate::ExpPoly::from_poly(crate::Poly::from_real(&[0.0, -1.0]))
        );
    }

    #[test]
    fn degenerate_equations() {
        assert_eq!(
            parse_equation("y = x").unwrap().lower().unwrap_err(),
            ParseError::DegenerateEquation
        );
        assert_eq!(
            parse_equation("y' - y' = 1").unwrap().lower().unwrap_err(),
            ParseError::DegenerateEquation
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let cases = [
            ("y'' + = 1", 6),
            ("y' = 1 1", 7),
            ("y' = (x", 7),
            ("y' 1", 3),
            ("x y = 1", 2),
            ("y' = 2(x)", 6),
            ("y' = foo(x)", 5),
        ];
        for (src, pos) in cases {
            match parse_equation(src) {
                Err(ParseError::Syntax {
                    position, expected, ..
                }) => {
                    assert_eq!(position, pos, "{src}");
                    assert!(!expected.is_empty());
                }
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn nesting_is_bounded() {
        let deep = format!("{}x{}", "(".repeat(1000), ")".repeat(1000));
        assert!(matches!(parse_expr(&deep), Err(ParseError::Syntax { .. })));
        let minus = format!("{}x", "-".repeat(5000));
        assert!(parse_expr(&minus).is_err());
    }

    #[test]
    fn literal_suffix_binds_tighter_than_power() {
        let e = parse_expr("2x^2").unwrap();
        assert_eq!(
            lower_rhs(&e).unwrap(),
            crate::ExpPoly::from_poly(crate::Poly::monomial(r(2.0), 2))
        );
        let e = parse_expr("3i").unwrap();
        assert_eq!(e.eval(0.0), Some(Complex64::new(0.0, 3.0)));
    }

    #[test]
    fn conditions() {
        let c = parse_conditions("y(0)=1, y'(0) = -2, y^(2)(0)=i").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!((c[1].order, c[1].point, c[1].value), (1, 0.0, r(-2.0)));
        assert_eq!(c[2].value, Complex64::new(0.0, 1.0));
        assert!(parse_conditions("y(x)=1").is_err());
        assert!(parse_conditions("y(0)=1,").is_err());
    }

    #[test]
    fn root_lists() {
        let roots = parse_root_list("1:2, -1:1, 1+i : 3").unwrap();
        assert_eq!(
            roots,
            vec![(r(1.0), 2), (r(-1.0), 1), (Complex64::new(1.0, 1.0), 3)]
        );
        assert!(parse_root_list("1:0").is_err());
        assert!(parse_root_list("1:1.5").is_err());
        assert!(parse_root_list("x:1").is_err());
    }
}
