#![allow(dead_code)]

use ccode::{Complex64, ExpPoly, FactoredOp, Poly};
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `{0, ±1, ±2, ±i, 1±i}`
pub const GRID: [(f64, f64); 9] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (2.0, 0.0),
    (-2.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (1.0, 1.0),
    (1.0, -1.0),
];

pub fn grid_root() -> impl Strategy<Value = Complex64> {
    prop::sample::select(GRID.to_vec()).prop_map(|(re, im)| c(re, im))
}

pub fn coeff() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

/// Distinct grid roots, multiplicities `1..=max_mult`, total order `1..=max_order`.
pub fn grid_factors(
    max_order: usize,
    max_mult: usize,
) -> impl Strategy<Value = Vec<(Complex64, usize)>> {
    (
        Just(GRID.to_vec()).prop_shuffle(),
        prop::collection::vec(1..=max_mult, GRID.len()),
        1..=max_order,
    )
        .prop_map(|(roots, mults, order)| {
            let mut left = order;
            let mut out = Vec::new();
            for ((re, im), m) in roots.into_iter().zip(mults) {
                if left == 0 {
                    break;
                }
                let m = m.min(left);
                out.push((c(re, im), m));
                left -= m;
            }
            out
        })
}

pub fn grid_op(max_order: usize) -> impl Strategy<Value = FactoredOp> {
    grid_factors(max_order, 3).prop_map(|f| FactoredOp::new(f).unwrap())
}

/// Sums of up to `max_terms` terms `e^(λx)p(x)` with grid exponents and `deg p ≤ max_deg`.
pub fn grid_expoly(max_terms: usize, max_deg: usize) -> impl Strategy<Value = ExpPoly> {
    prop::collection::vec(
        (grid_root(), prop::collection::vec(coeff(), 1..=max_deg + 1)),
        1..=max_terms,
    )
    .prop_map(|terms| {
        terms.into_iter().fold(ExpPoly::zero(), |acc, (lambda, p)| {
            acc + ExpPoly::term(lambda, Poly::new(p))
        })
    })
}

/// Like [`grid_expoly`] but with exponents anywhere in `[-3, 3]²`.
pub fn any_expoly(max_terms: usize, max_deg: usize) -> impl Strategy<Value = ExpPoly> {
    let exponent = prop_oneof![
        grid_root(),
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| c(re, im)),
    ];
    prop::collection::vec(
        (exponent, prop::collection::vec(coeff(), 1..=max_deg + 1)),
        1..=max_terms,
    )
    .prop_map(|terms| {
        terms.into_iter().fold(ExpPoly::zero(), |acc, (lambda, p)| {
            acc + ExpPoly::term(lambda, Poly::new(p))
        })
    })
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
