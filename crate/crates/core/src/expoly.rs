//! Exponential-polynomials `Σ e^(λx)·p_λ(x)`.
//!
//! Every value is kept canonical: exponents are pairwise farther apart than
//! [`MERGE_TOL`], terms are sorted by `(re λ, im λ)`, no term has a zero
//! polynomial part, and coefficients below [`CLEANUP_REL`] times their term's
//! largest coefficient are removed after each operation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{cmp_complex, Poly};

/// Two exponents closer than this are the same term.
pub const MERGE_TOL: f64 = 1e-9;

/// Coefficients at or below this fraction of their term's maximum are dropped.
pub const CLEANUP_REL: f64 = 1e-12;

/// Tolerance for matching conjugate partners in [`ExpPoly::realify`].
pub const CONJUGATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub exponent: Complex64,
    pub poly: Poly,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::term(Complex64::new(0.0, 0.0), p)
    }

    /// `e^(λx)·p(x)`
    pub fn term(exponent: Complex64, poly: Poly) -> Self {
        Self::from_terms([Term { exponent, poly }])
    }

    /// `e^(λx)`
    pub fn exp(exponent: Complex64) -> Self {
        Self::term(exponent, Poly::one())
    }

    /// `c·x^k·e^(λx)`
    pub fn monomial(c: Complex64, k: usize, exponent: Complex64) -> Self {
        Self::term(exponent, Poly::monomial(c, k))
    }

    /// Builds a canonical value, merging exponents within [`MERGE_TOL`].
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            if t.poly.is_zero() {
                continue;
            }
            match merged
                .iter_mut()
                .find(|m| (m.exponent - t.exponent).norm() <= MERGE_TOL)
            {
                Some(m) => m.poly = &m.poly + &t.poly,
                None => merged.push(t),
            }
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .map(|t| Term {
                exponent: t.exponent,
                poly: cleanup(t.poly),
            })
            .filter(|t| !t.poly.is_zero())
            .collect();
        terms.sort_by(|a, b| cmp_complex(&a.exponent, &b.exponent));
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Polynomial part of the term whose exponent is within [`MERGE_TOL`] of `exponent`.
    pub fn term_at(&self, exponent: Complex64) -> Option<&Poly> {
        self.terms
            .iter()
            .find(|t| (t.exponent - exponent).norm() <= MERGE_TOL)
            .map(|t| &t.poly)
    }

    /// Multiplies by a constant.
    pub fn scale(&self, c: Complex64) -> Self {
        self.map_terms(|t| Term {
            exponent: t.exponent,
            poly: t.poly.scale(c),
        })
    }

    /// Multiplies by `e^(cx)`: every exponent shifts by `c`.
    pub fn scale_exp(&self, c: Complex64) -> Self {
        self.map_terms(|t| Term {
            exponent: t.exponent + c,
            poly: t.poly.clone(),
        })
    }

    /// `d/dx [e^(λx) p] = e^(λx) (λp + p')`
    pub fn derivative(&self) -> Self {
        self.map_terms(|t| Term {
            exponent: t.exponent,
            poly: &t.poly.scale(t.exponent) + &t.poly.derivative(),
        })
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |f, _| f.derivative())
    }

    /// One antiderivative with the integration constant set to zero.
    ///
    /// For `c ≠ 0` the result is `e^(cx)·T(x)` with `deg T = deg p`, found from
    /// `cT + T' = p` top-down, which is the integration-by-parts recurrence
    /// `∫x^n e^(cx) = x^n e^(cx)/c − (n/c)∫x^(n−1) e^(cx)`. For `c = 0` it is
    /// the power rule, raising the degree by one.
    pub fn antiderivative(&self) -> Self {
        self.map_terms(|t| Term {
            exponent: t.exponent,
            poly: antiderivative_poly(t.exponent, &t.poly),
        })
    }

    /// `I_m`: `m`-fold antiderivative with zero constants.
    pub fn iterated_antiderivative(&self, m: usize) -> Self {
        (0..m).fold(self.clone(), |f, _| f.antiderivative())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let xc = Complex64::new(x, 0.0);
        self.terms
            .iter()
            .map(|t| (t.exponent * x).exp() * t.poly.eval(xc))
            .sum()
    }

    /// Complex conjugate of the function on the real line.
    pub fn conj(&self) -> Self {
        self.map_terms(|t| Term {
            exponent: t.exponent.conj(),
            poly: t.poly.conj(),
        })
    }

    /// Largest coefficient modulus over all terms.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.poly.max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Termwise equality: `distance ≤ tol · max(1, |self|, |other|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.max_abs()).max(other.max_abs());
        self.distance(other) <= tol * scale
    }

    /// Rewrites conjugate pairs of terms as `e^(αx)(C(x)cos βx + S(x)sin βx)`
    /// with real polynomials.
    ///
    /// Fails with [`Error::NotConjugateClosed`] unless every term `e^(λx)p`
    /// has a partner `e^(λ̄x)p̄`, which is exactly when the function is real
    /// on the real line.
    pub fn realify(&self) -> Result<RealExpPoly> {
        let scale = 1f64.max(self.max_abs());
        let tol = CONJUGATE_TOL * scale;
        let mut used = vec![false; self.terms.len()];
        let mut out = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let lambda = t.exponent;
            if lambda.im.abs() <= MERGE_TOL {
                if t.poly.coeffs().iter().any(|c| c.im.abs() > tol) {
                    return Err(Error::NotConjugateClosed);
                }
                out.push(RealTerm::new(
                    lambda.re,
                    0.0,
                    t.poly.coeffs().iter().map(|c| c.re).collect(),
                    Vec::new(),
                ));
                continue;
            }
            let j = (0..self.terms.len())
                .find(|&j| !used[j] && (self.terms[j].exponent - lambda.conj()).norm() <= MERGE_TOL)
                .ok_or(Error::NotConjugateClosed)?;
            used[j] = true;
            let partner = &self.terms[j].poly;
            if (&t.poly - &partner.conj()).max_abs() > tol {
                return Err(Error::NotConjugateClosed);
            }
            // Keep the upper-half-plane member as p so that β > 0.
            let (upper, lower) = if lambda.im > 0.0 {
                (&t.poly, partner)
            } else {
                (partner, &t.poly)
            };
            let p = (upper + &lower.conj()).scale(Complex64::new(0.5, 0.0));
            // e^(iβx)p + e^(−iβx)p̄ = 2Re(p)cos βx − 2Im(p)sin βx
            out.push(RealTerm::new(
                lambda.re,
                lambda.im.abs(),
                p.coeffs().iter().map(|c| 2.0 * c.re).collect(),
                p.coeffs().iter().map(|c| -2.0 * c.im).collect(),
            ));
        }
        let mut terms: Vec<RealTerm> = out.into_iter().filter(|t| !t.is_zero()).collect();
        terms.sort_by(|a, b| a.rate.total_cmp(&b.rate).then(a.freq.total_cmp(&b.freq)));
        Ok(RealExpPoly { terms })
    }

    fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Self {
        Self::from_terms(self.terms.iter().map(f))
    }
}

fn antiderivative_poly(c: Complex64, p: &Poly) -> Poly {
    let Some(n) = p.degree() else {
        return Poly::zero();
    };
    let a = p.coeffs();
    if c.norm() <= MERGE_TOL {
        let mut out = vec![Complex64::new(0.0, 0.0); n + 2];
        for (k, &ak) in a.iter().enumerate() {
            out[k + 1] = ak / (k + 1) as f64;
        }
        return Poly::new(out);
    }
    let inv = c.inv();
    let mut t = vec![Complex64::new(0.0, 0.0); n + 1];
    t[n] = a[n] * inv;
    for k in (0..n).rev() {
        t[k] = (a[k] - t[k + 1] * (k + 1) as f64) * inv;
    }
    Poly::new(t)
}

fn cleanup(p: Poly) -> Poly {
    let cut = CLEANUP_REL * p.max_abs();
    Poly::new(
        p.into_coeffs()
            .into_iter()
            .map(|c| {
                if c.norm() <= cut {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect(),
    )
}

impl Add for &ExpPoly {
    type Output = ExpPoly;

    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::from_terms(self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;

    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &-rhs
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;

    fn neg(self) -> ExpPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;

    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::from_terms(self.terms.iter().flat_map(|a| {
            rhs.terms.iter().map(move |b| Term {
                exponent: a.exponent + b.exponent,
                poly: &a.poly * &b.poly,
            })
        }))
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for ExpPoly {
            type Output = ExpPoly;
            fn $method(self, rhs: ExpPoly) -> ExpPoly {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for ExpPoly {
    type Output = ExpPoly;

    fn neg(self) -> ExpPoly {
        -&self
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::render(self))
    }
}

/// `e^(rate·x)·(C(x) cos(freq·x) + S(x) sin(freq·x))` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RealTerm {
    pub rate: f64,
    /// Nonnegative; zero for purely exponential terms, which use `cos_part` only.
    pub freq: f64,
    pub cos_part: Vec<f64>,
    pub sin_part: Vec<f64>,
}

impl RealTerm {
    fn new(rate: f64, freq: f64, mut cos_part: Vec<f64>, mut sin_part: Vec<f64>) -> Self {
        let max = cos_part
            .iter()
            .chain(&sin_part)
            .map(|c| c.abs())
            .fold(0.0, f64::max);
        for c in cos_part.iter_mut().chain(sin_part.iter_mut()) {
            if c.abs() <= CLEANUP_REL * max {
                *c = 0.0;
            }
        }
        for part in [&mut cos_part, &mut sin_part] {
            while part.last() == Some(&0.0) {
                part.pop();
            }
        }
        Self {
            rate,
            freq,
            cos_part,
            sin_part,
        }
    }

    fn is_zero(&self) -> bool {
        self.cos_part.is_empty() && self.sin_part.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let horner = |p: &[f64]| p.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        (self.rate * x).exp()
            * (horner(&self.cos_part) * (self.freq * x).cos()
                + horner(&self.sin_part) * (self.freq * x).sin())
    }
}

/// Real form of a conjugate-closed [`ExpPoly`], used for display.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealExpPoly {
    terms: Vec<RealTerm>,
}

impl RealExpPoly {
    pub fn terms(&self) -> &[RealTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }
}

impl fmt::Display for RealExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::render_real_form(self))
    }
}
