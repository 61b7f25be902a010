//! Constant-coefficient linear differential operators.
//!
//! `L[y] = y^(n) + p_1 y^(n-1) + … + p_n y` corresponds one-to-one to its
//! monic characteristic polynomial `r^n + p_1 r^(n-1) + … + p_n`, and
//! composition of operators corresponds to multiplication of polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expoly::{ExpPoly, Term};
use crate::poly::{cmp_complex, find_roots, Factorization, Poly};

/// Anything that acts linearly on exponential-polynomials.
pub trait Operator {
    fn order(&self) -> usize;
    fn apply(&self, y: &ExpPoly) -> ExpPoly;
}

/// Monic operator stored as `[p_1, …, p_n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp {
    coeffs: Vec<Complex64>,
}

impl LinOp {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "operator order must be at least 1".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::InvalidInput(
                "non-finite operator coefficient".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// Normalizes `p` to monic and reads off the operator.
    pub fn from_char_poly(p: &Poly) -> Result<Self> {
        let lead = match (p.degree(), p.leading()) {
            (Some(d), Some(lead)) if d >= 1 => lead,
            _ => {
                return Err(Error::InvalidInput(
                    "characteristic polynomial must have degree at least 1".into(),
                ))
            }
        };
        let inv = lead.inv();
        let n = p.coeffs().len() - 1;
        Self::new((1..=n).map(|k| p.coeffs()[n - k] * inv).collect())
    }

    /// `[p_1, …, p_n]`
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `r^n + p_1 r^(n-1) + … + p_n`, lowest power first.
    pub fn char_poly(&self) -> Poly {
        let mut c: Vec<Complex64> = self.coeffs.iter().rev().copied().collect();
        c.push(Complex64::new(1.0, 0.0));
        Poly::new(c)
    }

    pub fn factor(&self, cluster_tol: f64) -> Result<FactoredOp> {
        FactoredOp::from_factorization(&find_roots(&self.char_poly(), cluster_tol)?)
    }
}

impl Operator for LinOp {
    fn order(&self) -> usize {
        self.coeffs.len()
    }

    fn apply(&self, y: &ExpPoly) -> ExpPoly {
        let n = self.coeffs.len();
        // Σ a_k y^(k) with a_n = 1, a_k = p_(n-k)
        let mut acc = y.scale(self.coeffs[n - 1]);
        let mut d = y.clone();
        for k in 1..=n {
            d = d.derivative();
            let a = if k == n {
                Complex64::new(1.0, 0.0)
            } else {
                self.coeffs[n - 1 - k]
            };
            acc = &acc + &d.scale(a);
        }
        acc
    }
}

/// `L = (D − r_1)^m_1 ⋯ (D − r_k)^m_k` with distinct roots.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredOp {
    factors: Vec<(Complex64, usize)>,
}

impl FactoredOp {
    /// Accepts factors in any order and sorts them canonically.
    ///
    /// Roots must be pairwise farther apart than the default cluster tolerance
    /// and multiplicities positive.
    pub fn new(mut factors: Vec<(Complex64, usize)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput(
                "operator needs at least one factor".into(),
            ));
        }
        if factors.iter().any(|&(_, m)| m == 0) {
            return Err(Error::InvalidInput(
                "multiplicities must be positive".into(),
            ));
        }
        if factors
            .iter()
            .any(|(r, _)| !(r.re.is_finite() && r.im.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite root".into()));
        }
        for (i, (a, _)) in factors.iter().enumerate() {
            for (b, _) in &factors[i + 1..] {
                if (a - b).norm() <= crate::poly::DEFAULT_CLUSTER_TOL {
                    return Err(Error::InvalidInput(format!("repeated root {a}")));
                }
            }
        }
        factors.sort_by(|a, b| cmp_complex(&a.0, &b.0));
        Ok(Self { factors })
    }

    /// Drops the leading coefficient: operators are monic.
    pub fn from_factorization(f: &Factorization) -> Result<Self> {
        Self::new(f.pairs.clone())
    }

    pub fn factors(&self) -> &[(Complex64, usize)] {
        &self.factors
    }

    /// Multiplicity of `root` within `tol`, zero if it is not a root.
    pub fn multiplicity_of(&self, root: Complex64, tol: f64) -> usize {
        self.factors
            .iter()
            .find(|(r, _)| (r - root).norm() <= tol)
            .map_or(0, |&(_, m)| m)
    }

    pub fn char_poly(&self) -> Poly {
        Poly::from_roots(&self.factors)
    }

    pub fn to_linop(&self) -> LinOp {
        LinOp::from_char_poly(&self.char_poly()).expect("order is at least 1")
    }
}

impl Operator for FactoredOp {
    fn order(&self) -> usize {
        self.factors.iter().map(|&(_, m)| m).sum()
    }

    fn apply(&self, y: &ExpPoly) -> ExpPoly {
        apply_factors(&self.factors, y)
    }
}

/// `(D − r)[e^(λx)p] = e^(λx)((λ − r)p + p')`
fn apply_first_order(root: Complex64, y: &ExpPoly) -> ExpPoly {
    ExpPoly::from_terms(y.terms().iter().map(|t| Term {
        exponent: t.exponent,
        poly: &t.poly.scale(t.exponent - root) + &t.poly.derivative(),
    }))
}

/// Applies `(D − r)` repeatedly in the given factor order, innermost first.
pub fn apply_factors(factors: &[(Complex64, usize)], y: &ExpPoly) -> ExpPoly {
    factors.iter().fold(y.clone(), |acc, &(root, mult)| {
        (0..mult).fold(acc, |a, _| apply_first_order(root, &a))
    })
}

/// Whether applying the factors in order `a` and in order `b` gives the same
/// function within `1e-9` termwise. Returns `false` if `a` and `b` are not
/// permutations of one another.
pub fn compose_check(a: &[(Complex64, usize)], b: &[(Complex64, usize)], y: &ExpPoly) -> bool {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| cmp_complex(&x.0, &y.0).then(x.1.cmp(&y.1)));
    sb.sort_by(|x, y| cmp_complex(&x.0, &y.0).then(x.1.cmp(&y.1)));
    if sa != sb {
        return false;
    }
    apply_factors(a, y).approx_eq(&apply_factors(b, y), 1e-9)
}
