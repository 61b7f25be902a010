//! Dense complex polynomials and root finding with multiplicities.
//!
//! Roots are computed with the Aberth simultaneous iteration on the monic
//! polynomial. Multiple roots come out of the iteration as tight clusters of
//! simple approximations, so the raw roots are grouped by single-linkage
//! clustering and every candidate grouping is certified by expanding
//! `leading · Π (r - r_i)^m_i` and comparing it with the input coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default single-linkage distance below which two roots are the same root.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Relative per-coefficient tolerance of the reconstruction certificate.
pub const RECONSTRUCTION_REL_TOL: f64 = 1e-8;

/// Absolute floor of the reconstruction certificate for near-zero coefficients.
pub const RECONSTRUCTION_ABS_TOL: f64 = 1e-10;

const MAX_ITER: usize = 500;

/// Dense univariate polynomial, coefficients lowest power first.
///
/// The zero polynomial is the empty coefficient vector; otherwise the last
/// coefficient is nonzero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        while coeffs
            .last()
            .is_some_and(|c| *c == Complex64::new(0.0, 0.0))
        {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c·x^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Monic product `Π (r - root)^mult`.
    pub fn from_roots(pairs: &[(Complex64, usize)]) -> Self {
        let mut acc = Self::one();
        for &(root, mult) in pairs {
            let factor = Self::new(vec![-root, Complex64::new(1.0, 0.0)]);
            for _ in 0..mult {
                acc = &acc * &factor;
            }
        }
        acc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    /// Coefficient of `x^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Largest coefficient modulus, zero for the zero polynomial.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})r"),
                _ => format!("({c})r^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Orders complex numbers by real part, then imaginary part.
pub fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `P(r) = leading · Π (r - root)^mult` with pairwise distinct roots.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub pairs: Vec<(Complex64, usize)>,
    pub leading: Complex64,
}

impl Factorization {
    pub fn degree(&self) -> usize {
        self.pairs.iter().map(|&(_, m)| m).sum()
    }

    pub fn roots(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.pairs.iter().map(|&(r, _)| r)
    }

    /// Expands the factorization back into coefficient form.
    pub fn expand(&self) -> Poly {
        Poly::from_roots(&self.pairs).scale(self.leading)
    }

    /// Coefficient-wise comparison of the expansion with `p`, using the
    /// relative tolerance with an absolute floor for near-zero coefficients.
    pub fn reconstructs(&self, p: &Poly) -> bool {
        reconstruction_ok(&self.expand(), p)
    }
}

fn reconstruction_ok(rebuilt: &Poly, p: &Poly) -> bool {
    let n = rebuilt.coeffs.len().max(p.coeffs.len());
    (0..n).all(|k| {
        let want = p.coeff(k);
        let err = (rebuilt.coeff(k) - want).norm();
        err <= (RECONSTRUCTION_REL_TOL * want.norm()).max(RECONSTRUCTION_ABS_TOL)
    })
}

/// Factors `p` into distinct roots with multiplicities.
///
/// Roots closer than `cluster_tol` are always merged. Coarser single-linkage
/// groupings are accepted when their certified reconstruction still matches
/// `p`, which is what recovers multiplicities from slightly perturbed input.
/// If no grouping certifies, the tolerance is widened tenfold once before
/// giving up with [`Error::NonConvergence`].
pub fn find_roots(p: &Poly, cluster_tol: f64) -> Result<Factorization> {
    let degree = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => {
            return Err(Error::InvalidInput(
                "root finding needs a polynomial of degree at least 1".into(),
            ))
        }
    };
    if !p.is_finite() {
        return Err(Error::InvalidInput("non-finite coefficient".into()));
    }
    if !(cluster_tol >= 0.0 && cluster_tol.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bad cluster tolerance {cluster_tol}"
        )));
    }
    let leading = p.leading().expect("nonzero");
    let monic = p.scale(leading.inv());

    // Exact zero roots are split off before iterating.
    let zeros = monic.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let deflated = Poly::new(monic.coeffs[zeros..].to_vec());
    let mut raw = vec![Complex64::new(0.0, 0.0); zeros];
    if deflated.degree().unwrap_or(0) > 0 {
        raw.extend(aberth(&deflated)?);
    }
    debug_assert_eq!(raw.len(), degree);

    let mut tol = cluster_tol;
    for _ in 0..2 {
        if let Some(pairs) = certified_clustering(&raw, &monic, tol) {
            return Ok(Factorization { pairs, leading });
        }
        tol *= 10.0;
    }
    Err(Error::NonConvergence(format!(
        "no root clustering reproduces the degree-{degree} polynomial"
    )))
}

/// Aberth–Ehrlich iteration on a monic polynomial with nonzero constant term.
fn aberth(monic: &Poly) -> Result<Vec<Complex64>> {
    let n = monic.degree().expect("nonzero");
    let a = monic.coeffs();
    let deriv = monic.derivative();
    let abs_coeffs = Poly::new(a.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect());

    // Start on a circle around the root centroid that encloses every root.
    let center = -a[n - 1] / n as f64;
    let radius = fujiwara_bound(a).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect();

    let eps = f64::EPSILON;
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        for j in 0..n {
            let zj = z[j];
            let pz = monic.eval(zj);
            let bound = 64.0 * eps * abs_coeffs.eval(Complex64::new(zj.norm(), 0.0)).re;
            if pz.norm() <= bound {
                done[j] = true;
                continue;
            }
            let dpz = deriv.eval(zj);
            let mut sum = Complex64::new(0.0, 0.0);
            for (k, &zk) in z.iter().enumerate() {
                if k != j {
                    let diff = zj - zk;
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let step = if dpz.norm() == 0.0 {
                Complex64::new(eps.sqrt() * (1.0 + zj.norm()), 0.0)
            } else {
                let ratio = pz / dpz;
                ratio / (Complex64::new(1.0, 0.0) - ratio * sum)
            };
            if !(step.re.is_finite() && step.im.is_finite()) {
                return Err(Error::NonConvergence("Aberth step overflowed".into()));
            }
            z[j] = zj - step;
            done[j] = step.norm() <= 4.0 * eps * zj.norm().max(eps);
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence(format!(
        "Aberth iteration did not reach its residual target in {MAX_ITER} sweeps"
    )))
}

/// Upper bound on root moduli: `2·max |a_(n-k)|^(1/k)`.
fn fujiwara_bound(monic: &[Complex64]) -> f64 {
    let n = monic.len() - 1;
    (1..=n)
        .map(|k| {
            let c = monic[n - k].norm();
            if k == n {
                (c / 2.0).powf(1.0 / k as f64)
            } else {
                c.powf(1.0 / k as f64)
            }
        })
        .fold(0.0, f64::max)
        * 2.0
}

/// Tries single-linkage groupings from coarsest down to the one at `tol`
/// and returns the first whose reconstruction certifies.
fn certified_clustering(
    raw: &[Complex64],
    monic: &Poly,
    tol: f64,
) -> Option<Vec<(Complex64, usize)>> {
    let n = raw.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push(((raw[i] - raw[j]).norm(), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Kruskal merge history; levels[k] is the partition after k merges.
    let mut uf = UnionFind::new(n);
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut finest = 0;
    levels.push(uf.labels());
    for &(d, i, j) in &edges {
        if uf.union(i, j) {
            levels.push(uf.labels());
            if d <= tol {
                finest = levels.len() - 1;
            }
        }
    }

    let real_input = monic.is_real();
    for labels in levels[finest..].iter().rev() {
        let pairs = clusters_to_pairs(raw, labels, monic, real_input);
        let rebuilt = Poly::from_roots(&pairs);
        if reconstruction_ok(&rebuilt, monic) {
            return Some(pairs);
        }
    }
    None
}

fn clusters_to_pairs(
    raw: &[Complex64],
    labels: &[usize],
    monic: &Poly,
    real_input: bool,
) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (&z, &label) in raw.iter().zip(labels) {
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, members)) => members.push(z),
            None => groups.push((label, vec![z])),
        }
    }
    let mut pairs: Vec<(Complex64, usize)> = groups
        .into_iter()
        .map(|(_, members)| {
            let m = members.len();
            let centroid = members.iter().sum::<Complex64>() / m as f64;
            let spread = members
                .iter()
                .map(|z| (z - centroid).norm())
                .fold(0.0, f64::max);
            (polish(monic, centroid, m, spread), m)
        })
        .collect();
    if real_input {
        symmetrize_conjugates(&mut pairs);
    }
    for (z, _) in &mut pairs {
        *z = snap_components(*z);
    }
    pairs.sort_by(|a, b| cmp_complex(&a.0, &b.0));
    pairs
}

/// Newton on the `(m-1)`-th derivative, where a root of multiplicity `m` is
/// simple. Steps that leave the cluster's neighbourhood are rejected.
fn polish(monic: &Poly, start: Complex64, mult: usize, spread: f64) -> Complex64 {
    let mut g = monic.clone();
    for _ in 1..mult {
        g = g.derivative();
    }
    let dg = g.derivative();
    let reach = spread.max(1e-8 * (1.0 + start.norm()));
    let mut z = start;
    let mut gz = g.eval(z).norm();
    for _ in 0..8 {
        let d = dg.eval(z);
        if d.norm() == 0.0 || gz == 0.0 {
            break;
        }
        let next = z - g.eval(z) / d;
        let gn = g.eval(next).norm();
        if gn.is_nan() || gn >= gz || (next - start).norm() > reach {
            break;
        }
        z = next;
        gz = gn;
    }
    z
}

/// Pairs each upper-half-plane root of a real polynomial with its nearest
/// lower-half-plane partner of equal multiplicity and makes them exact
/// conjugates. Near-real roots become real.
fn symmetrize_conjugates(pairs: &mut [(Complex64, usize)]) {
    let n = pairs.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let (zi, mi) = pairs[i];
        let partner = (0..n)
            .filter(|&j| j != i && !used[j] && pairs[j].1 == mi)
            .map(|j| (j, (pairs[j].0 - zi.conj()).norm()))
            .filter(|&(_, d)| d < (zi.im.abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        used[i] = true;
        match partner {
            Some((j, _)) => {
                used[j] = true;
                let avg = (zi + pairs[j].0.conj()) / 2.0;
                pairs[i].0 = avg;
                pairs[j].0 = avg.conj();
            }
            None => pairs[i].0.im = 0.0,
        }
    }
}

/// Zeros a real or imaginary part that is rounding noise relative to the modulus.
fn snap_components(z: Complex64) -> Complex64 {
    let cut = 1e-14 * z.norm();
    Complex64::new(
        if z.re.abs() <= cut { 0.0 } else { z.re },
        if z.im.abs() <= cut { 0.0 } else { z.im },
    )
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|i| self.find(i)).collect()
    }
}
