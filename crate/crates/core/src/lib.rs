//! Symbolic solver for linear ordinary differential equations with constant
//! coefficients.
//!
//! The right-hand sides handled here are exponential-polynomials, finite
//! sums of terms `e^(λx)·p(x)`. That class is closed under differentiation,
//! antidifferentiation and constant-coefficient operators, so every step of
//! the pipeline stays symbolic:
//!
//! 1. the characteristic polynomial of the operator is factored into
//!    `(r - r_1)^m_1 ⋯ (r - r_k)^m_k` ([`poly::find_roots`]);
//! 2. the homogeneous basis `x^l·e^(r_i x)`, `l < m_i`, is read off the
//!    factorization ([`solver::homogeneous_solution`]);
//! 3. a particular solution is obtained by peeling one factor at a time,
//!    `f ← e^(r x)·I_m[e^(-r x)·f]`, where `I_m` is m-fold antidifferentiation
//!    with zero constants ([`solver::particular_solution`]);
//! 4. every answer can be checked by substituting it back
//!    ([`solver::verify_solution`]).
//!
//! ```
//! use ccode::{parse_equation, solver, Complex64};
//!
//! let eq = parse_equation("y'' - 3y' + 2y = exp(3x)").unwrap();
//! let (op, rhs) = eq.lower().unwrap();
//! let factored = op.factor(ccode::poly::DEFAULT_CLUSTER_TOL).unwrap();
//! let y = solver::particular_solution(&factored, &rhs);
//!
//! // y = e^(3x)/2
//! let part = y.term_at(Complex64::new(3.0, 0.0)).unwrap();
//! assert!((part.coeffs()[0] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
//! assert!(solver::verify_solution(&op, &rhs, &y, 50).is_verified());
//! ```

pub mod error;
pub mod expoly;
pub mod operator;
pub mod poly;
pub mod solver;
pub mod syntax;

pub use error::{Error, Result};
pub use expoly::{ExpPoly, RealExpPoly};
pub use num_complex::Complex64;
pub use operator::{FactoredOp, LinOp, Operator};
pub use poly::{find_roots, Factorization, Poly};
pub use syntax::{parse_equation, parse_expr, render, render_real, EquationAst, ParseError};

/// The ground field of every computation.
pub type ComplexScalar = Complex64;

// Rust snippets in the guide are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/exp_polys.md")]
    mod exp_polys {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/homogeneous.md")]
    mod homogeneous {}
    #[doc = include_str!("../../../book/src/particular.md")]
    mod particular {}
    #[doc = include_str!("../../../book/src/input_format.md")]
    mod input_format {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
