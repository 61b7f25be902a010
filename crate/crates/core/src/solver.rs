//! General solutions of `L[y] = f` for exponential-polynomial `f`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expoly::{ExpPoly, Term, MERGE_TOL};
use crate::operator::{FactoredOp, Operator};
use crate::poly::Poly;

/// Residual bound for a solution to count as verified.
pub const VERIFY_TOL: f64 = 1e-8;

/// Default number of sample points on `[-1, 1]` used by [`verify_solution`].
pub const DEFAULT_VERIFY_POINTS: usize = 50;

/// One basis function `x^power · e^(root·x)` with its constant label.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisElement {
    pub root: Complex64,
    pub power: usize,
    pub label: String,
    pub function: ExpPoly,
}

/// `Σ_i (C_i1 + C_i2 x + … + C_im_i x^(m_i−1)) e^(r_i x)`
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousSolution {
    elements: Vec<BasisElement>,
}

impl HomogeneousSolution {
    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn basis(&self) -> Vec<ExpPoly> {
        self.elements.iter().map(|e| e.function.clone()).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.elements.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Σ c_k · basis_k`
    pub fn combine(&self, constants: &[Complex64]) -> ExpPoly {
        assert_eq!(constants.len(), self.elements.len());
        self.elements
            .iter()
            .zip(constants)
            .fold(ExpPoly::zero(), |acc, (e, &c)| &acc + &e.function.scale(c))
    }

    /// Real basis spanning the same space: each conjugate pair
    /// `x^l e^((α ± iβ)x)` becomes `x^l e^(αx) cos βx`, `x^l e^(αx) sin βx`.
    ///
    /// Every returned function is conjugate-closed. Fails when a complex root
    /// has no conjugate partner of equal multiplicity.
    pub fn real_basis(&self) -> Result<Vec<ExpPoly>> {
        let half = Complex64::new(0.5, 0.0);
        let half_over_i = Complex64::new(0.0, -0.5);
        let mut out = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let r = e.root;
            if r.im.abs() <= MERGE_TOL {
                out.push(e.function.clone());
                continue;
            }
            let has_partner = self
                .elements
                .iter()
                .any(|o| o.power == e.power && (o.root - r.conj()).norm() <= MERGE_TOL);
            if !has_partner {
                return Err(Error::NotConjugateClosed);
            }
            if r.im > 0.0 {
                continue;
            }
            // e is the lower member α − iβ; emit cos and sin at its position.
            let xl = Poly::monomial(Complex64::new(1.0, 0.0), e.power);
            let up = ExpPoly::term(r.conj(), xl.clone());
            let down = ExpPoly::term(r, xl);
            out.push((&up + &down).scale(half));
            out.push((&up - &down).scale(half_over_i));
        }
        Ok(out)
    }
}

/// Homogeneous plus one particular solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FullSolution {
    pub homogeneous: HomogeneousSolution,
    pub particular: ExpPoly,
}

/// Predicted shape `e^(bx) · x^resonance_order · S(x)` with `deg S = degree`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnsatzForm {
    pub exponent: Complex64,
    pub resonance_order: usize,
    pub degree: usize,
}

impl AnsatzForm {
    /// Degree of the polynomial part of the predicted particular solution.
    pub fn predicted_degree(&self) -> usize {
        self.degree + self.resonance_order
    }

    pub fn is_resonant(&self) -> bool {
        self.resonance_order > 0
    }
}

/// `y^(order)(point) = value`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialCondition {
    pub order: usize,
    pub point: f64,
    pub value: Complex64,
}

/// Back-substitution residuals of a candidate solution.
///
/// Both numbers are normalized by `max(1, |f|)`: the symbolic one by the
/// largest coefficient of `f`, the pointwise one by the largest sampled value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verification {
    pub symbolic: f64,
    pub pointwise: f64,
}

impl Verification {
    pub fn max(&self) -> f64 {
        self.symbolic.max(self.pointwise)
    }

    pub fn is_verified(&self) -> bool {
        self.symbolic <= VERIFY_TOL && self.pointwise <= VERIFY_TOL
    }

    /// Worst of two reports.
    pub fn worst(self, other: Self) -> Self {
        Self {
            symbolic: self.symbolic.max(other.symbolic),
            pointwise: self.pointwise.max(other.pointwise),
        }
    }
}

fn constant_label(i: usize, j: usize) -> String {
    if i < 10 && j < 10 {
        format!("C{i}{j}")
    } else {
        format!("C{i}_{j}")
    }
}

/// The `n` basis functions `x^l e^(r_i x)`, `l < m_i`, in canonical root order.
pub fn homogeneous_solution(op: &FactoredOp) -> HomogeneousSolution {
    let elements = op
        .factors()
        .iter()
        .enumerate()
        .flat_map(|(i, &(root, mult))| {
            (0..mult).map(move |l| BasisElement {
                root,
                power: l,
                label: constant_label(i + 1, l + 1),
                function: ExpPoly::monomial(Complex64::new(1.0, 0.0), l, root),
            })
        })
        .collect();
    HomogeneousSolution { elements }
}

/// Row `d` holds the `d`-th derivatives of the basis at `x0`.
pub fn wronskian(basis: &[ExpPoly], x0: f64) -> DMatrix<Complex64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (col, f) in basis.iter().enumerate() {
        let mut d = f.clone();
        for row in 0..n {
            m[(row, col)] = d.eval(x0);
            d = d.derivative();
        }
    }
    m
}

/// `|det W(x0)|` after dividing every row by its largest modulus.
pub fn normalized_wronskian_det(basis: &[ExpPoly], x0: f64) -> f64 {
    let mut w = wronskian(basis, x0);
    normalize_rows(&mut w);
    w.determinant().norm()
}

/// Column counterpart of [`normalize_rows`].
fn normalize_columns(m: &mut DMatrix<Complex64>) -> Vec<f64> {
    let mut scales = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let max = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let s = if max > 0.0 { max } else { 1.0 };
        col /= Complex64::new(s, 0.0);
        scales.push(s);
    }
    scales
}

/// Divides every row by its largest modulus and returns the divisors.
fn normalize_rows(m: &mut DMatrix<Complex64>) -> Vec<f64> {
    let mut scales = Vec::with_capacity(m.nrows());
    for mut row in m.row_iter_mut() {
        let max = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let s = if max > 0.0 { max } else { 1.0 };
        row /= Complex64::new(s, 0.0);
        scales.push(s);
    }
    scales
}

/// One particular solution of `L[y] = f` with every integration constant zero.
///
/// Each term of `f` is pushed through `g ← e^(r x)·I_m[e^(−r x)·g]` for the
/// factors of `L` in canonical order. The result is then stripped of the
/// components `x^l e^(r_i x)`, `l < m_i`, which lie in the homogeneous span.
pub fn particular_solution(op: &FactoredOp, f: &ExpPoly) -> ExpPoly {
    particular_solution_in_order(op, op.factors(), f)
}

/// [`particular_solution`] with the factors peeled in the order given.
/// `order` must be a permutation of `op.factors()`.
pub fn particular_solution_in_order(
    op: &FactoredOp,
    order: &[(Complex64, usize)],
    f: &ExpPoly,
) -> ExpPoly {
    let raw = f.terms().iter().fold(ExpPoly::zero(), |acc, t| {
        let mut g = ExpPoly::from_terms([t.clone()]);
        for &(root, mult) in order {
            g = g
                .scale_exp(-root)
                .iterated_antiderivative(mult)
                .scale_exp(root);
        }
        &acc + &g
    });
    drop_homogeneous_part(op, &raw)
}

fn drop_homogeneous_part(op: &FactoredOp, y: &ExpPoly) -> ExpPoly {
    ExpPoly::from_terms(y.terms().iter().map(|t| {
        let m = op.multiplicity_of(t.exponent, MERGE_TOL);
        let mut c = t.poly.coeffs().to_vec();
        for coeff in c.iter_mut().take(m) {
            *coeff = Complex64::new(0.0, 0.0);
        }
        Term {
            exponent: t.exponent,
            poly: Poly::new(c),
        }
    }))
}

/// Predicts the particular-solution shape for a right-hand side `e^(bx)·Q_j(x)`.
pub fn ansatz_form(op: &FactoredOp, b: Complex64, j: usize) -> AnsatzForm {
    AnsatzForm {
        exponent: b,
        resonance_order: op.multiplicity_of(b, MERGE_TOL),
        degree: j,
    }
}

pub fn solve(op: &FactoredOp, f: &ExpPoly) -> FullSolution {
    FullSolution {
        homogeneous: homogeneous_solution(op),
        particular: particular_solution(op, f),
    }
}

/// Picks the constants of `solution` that satisfy `n` initial conditions
/// given at one point, one per derivative order `0..n`.
pub fn fit_initial_conditions(
    solution: &FullSolution,
    order: usize,
    conditions: &[InitialCondition],
) -> Result<ExpPoly> {
    let basis = solution.homogeneous.basis();
    if basis.len() != order {
        return Err(Error::InvalidInput(format!(
            "basis has {} functions for an order-{order} operator",
            basis.len()
        )));
    }
    if conditions.len() != order {
        return Err(Error::InvalidInput(format!(
            "expected {order} initial conditions, got {}",
            conditions.len()
        )));
    }
    let x0 = conditions[0].point;
    if conditions.iter().any(|c| c.point != x0) {
        return Err(Error::InvalidInput(
            "all initial conditions must be given at the same point".into(),
        ));
    }
    let mut seen = vec![false; order];
    for c in conditions {
        if c.order >= order || std::mem::replace(&mut seen[c.order], true) {
            return Err(Error::InvalidInput(format!(
                "derivative orders must be 0..{order}, each exactly once"
            )));
        }
    }

    let w = wronskian(&basis, x0);
    let mut rhs = DVector::zeros(order);
    for c in conditions {
        let p = solution.particular.nth_derivative(c.order).eval(x0);
        rhs[c.order] = c.value - p;
    }
    // Row and column equilibration: e^(rx0) columns can differ by many
    // orders of magnitude without the system being ill-posed.
    let mut scaled = w.clone();
    let row_scale = normalize_rows(&mut scaled);
    let col_scale = normalize_columns(&mut scaled);
    let det = scaled.clone().determinant().norm();
    if !det.is_finite() || det < 1e-13 {
        return Err(Error::SingularSystem(
            "Wronskian at the initial point is numerically singular".into(),
        ));
    }
    let row_scaled_rhs =
        DVector::from_iterator(order, rhs.iter().zip(&row_scale).map(|(&v, &s)| v / s));
    let z = scaled
        .lu()
        .solve(&row_scaled_rhs)
        .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))?;
    let constants = DVector::from_iterator(order, z.iter().zip(&col_scale).map(|(&v, &s)| v / s));
    if constants
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(Error::SingularSystem(
            "initial-value constants are not finite".into(),
        ));
    }
    let residual = (&w * &constants - &rhs).camax();
    let scale = 1f64.max(rhs.camax());
    if residual > 1e-9 * scale {
        return Err(Error::SingularSystem(format!(
            "linear solve residual {residual:e} exceeds 1e-9"
        )));
    }
    Ok(&solution.particular + &solution.homogeneous.combine(constants.as_slice()))
}

/// Substitutes `y` into `L[y] = f` and measures the residual `L[y] − f`
/// symbolically and at `points` uniform samples on `[-1, 1]`.
pub fn verify_solution<O: Operator + ?Sized>(
    op: &O,
    f: &ExpPoly,
    y: &ExpPoly,
    points: usize,
) -> Verification {
    let residual = &op.apply(y) - f;
    let symbolic = residual.max_abs() / 1f64.max(f.max_abs());
    let xs: Vec<f64> = match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64)
            .collect(),
    };
    let f_scale = xs.iter().map(|&x| f.eval(x).norm()).fold(1.0, f64::max);
    let pointwise = xs
        .iter()
        .map(|&x| residual.eval(x).norm())
        .fold(0.0, f64::max)
        / f_scale;
    Verification {
        symbolic,
        pointwise,
    }
}
