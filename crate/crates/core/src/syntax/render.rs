use num_complex::Complex64;

use crate::error::Result;
use crate::expoly::{ExpPoly, RealExpPoly, CLEANUP_REL};
use crate::poly::Poly;

/// Canonical text for `f`, parseable by [`parse_expr`](super::parse_expr).
///
/// Terms appear in canonical exponent order; within a term, powers of `x`
/// ascend: `(1 + 2*x)*exp(-x) + x^2*exp(2*x)`.
pub fn render(f: &ExpPoly) -> String {
    join_signed(
        f.terms()
            .iter()
            .map(|t| with_factors(poly_factor(&t.poly), exp_factor(t.exponent), None)),
    )
}

/// Real form of `f` using `exp`, `cos` and `sin`; fails unless `f` is
/// conjugate-closed.
pub fn render_real(f: &ExpPoly) -> Result<String> {
    Ok(render_real_form(&f.realify()?))
}

pub fn render_real_form(f: &RealExpPoly) -> String {
    let mut pieces = Vec::new();
    for t in f.terms() {
        let exp = (t.rate != 0.0).then(|| format!("exp({})", linear(real(t.rate))));
        if t.freq == 0.0 {
            pieces.push(with_factors(real_poly_factor(&t.cos_part), exp, None));
            continue;
        }
        let arg = linear(real(t.freq));
        if !t.cos_part.is_empty() {
            pieces.push(with_factors(
                real_poly_factor(&t.cos_part),
                exp.clone(),
                Some(format!("cos({arg})")),
            ));
        }
        if !t.sin_part.is_empty() {
            pieces.push(with_factors(
                real_poly_factor(&t.sin_part),
                exp,
                Some(format!("sin({arg})")),
            ));
        }
    }
    join_signed(pieces.into_iter())
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Coefficient-side factor of a term.
enum Factor {
    /// Coefficient 1 with no power of `x`.
    One,
    MinusOne,
    Text(String),
}

fn with_factors(coef: Factor, exp: Option<String>, trig: Option<String>) -> String {
    let tail: Vec<String> = exp.into_iter().chain(trig).collect();
    let tail = tail.join("*");
    match (coef, tail.is_empty()) {
        (Factor::One, true) => "1".into(),
        (Factor::MinusOne, true) => "-1".into(),
        (Factor::Text(s), true) => s,
        (Factor::One, false) => tail,
        (Factor::MinusOne, false) => format!("-{tail}"),
        (Factor::Text(s), false) => format!("{s}*{tail}"),
    }
}

fn poly_factor(p: &Poly) -> Factor {
    let monomials: Vec<(usize, Complex64)> = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| (k, snap(c)))
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .collect();
    factor_from_monomials(monomials)
}

fn real_poly_factor(p: &[f64]) -> Factor {
    factor_from_monomials(
        p.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, &c)| (k, real(c)))
            .collect(),
    )
}

fn factor_from_monomials(monomials: Vec<(usize, Complex64)>) -> Factor {
    match monomials.as_slice() {
        [] => Factor::Text("0".into()),
        [(0, c)] if *c == real(1.0) => Factor::One,
        [(0, c)] if *c == real(-1.0) => Factor::MinusOne,
        [(k, c)] => Factor::Text(monomial(*c, *k)),
        many => Factor::Text(format!(
            "({})",
            join_signed(many.iter().map(|&(k, c)| monomial(c, k)))
        )),
    }
}

fn x_power(k: usize) -> String {
    if k == 1 {
        "x".into()
    } else {
        format!("x^{k}")
    }
}

fn monomial(c: Complex64, k: usize) -> String {
    if k == 0 {
        return number(c);
    }
    if c == real(1.0) {
        x_power(k)
    } else if c == real(-1.0) {
        format!("-{}", x_power(k))
    } else {
        format!("{}*{}", number(c), x_power(k))
    }
}

/// `λx` as it appears inside `exp(·)`, `cos(·)`, `sin(·)`.
fn linear(lambda: Complex64) -> String {
    let lambda = snap(lambda);
    if lambda == real(1.0) {
        "x".into()
    } else if lambda == real(-1.0) {
        "-x".into()
    } else {
        format!("{}*x", number(lambda))
    }
}

fn exp_factor(lambda: Complex64) -> Option<String> {
    (snap(lambda) != Complex64::new(0.0, 0.0)).then(|| format!("exp({})", linear(lambda)))
}

/// Drops a real or imaginary part that is noise relative to the modulus.
fn snap(c: Complex64) -> Complex64 {
    let cut = CLEANUP_REL * c.norm();
    Complex64::new(
        if c.re.abs() <= cut { 0.0 } else { c.re },
        if c.im.abs() <= cut { 0.0 } else { c.im },
    )
}

fn number(c: Complex64) -> String {
    let c = snap(c);
    match (c.re != 0.0, c.im != 0.0) {
        (_, false) => decimal(c.re),
        (false, true) => imaginary(c.im),
        (true, true) => {
            let im = imaginary(c.im.abs());
            let sign = if c.im < 0.0 { '-' } else { '+' };
            format!("({} {sign} {im})", decimal(c.re))
        }
    }
}

fn imaginary(v: f64) -> String {
    if v == 1.0 {
        "i".into()
    } else if v == -1.0 {
        "-i".into()
    } else {
        format!("{}i", decimal(v))
    }
}

/// Shortest decimal of `v` rounded to 15 significant digits.
pub(crate) fn decimal(v: f64) -> String {
    let rounded: f64 = format!("{v:.14e}")
        .parse()
        .expect("float formatting round-trips");
    if rounded == 0.0 {
        return "0".into();
    }
    let a = rounded.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn join_signed(parts: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, p) in parts.enumerate() {
        if i == 0 {
            out.push_str(&p);
        } else if let Some(rest) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&p);
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}
