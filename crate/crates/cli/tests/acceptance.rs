//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p ccode-cli --test acceptance`.

use std::collections::BTreeSet;
use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ccode::operator::apply_factors;
use ccode::poly::{find_roots, DEFAULT_CLUSTER_TOL};
use ccode::solver::{
    ansatz_form, homogeneous_solution, normalized_wronskian_det, particular_solution,
    verify_solution,
};
use ccode::syntax::{lower_rhs, parse_equation, parse_expr};
use ccode::{render, Complex64, ExpPoly, FactoredOp, Operator, Poly};
use ccode_cli::SolveOptions;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid() -> [Complex64; 8] {
    [
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
        c(2.0, 0.0),
        c(-2.0, 0.0),
        c(0.0, 1.0),
        c(0.0, -1.0),
        c(1.0, 1.0),
    ]
}

/// Distinct grid roots with multiplicities in `1..=max_mult`, total order in `1..=max_order`.
fn grid_factors(
    rng: &mut ChaCha8Rng,
    max_order: usize,
    max_mult: usize,
) -> Vec<(Complex64, usize)> {
    let mut roots = grid().to_vec();
    roots.shuffle(rng);
    let order = rng.random_range(1..=max_order);
    let mut left = order;
    let mut out = Vec::new();
    for r in roots {
        if left == 0 {
            break;
        }
        let m = rng.random_range(1..=max_mult.min(left));
        out.push((r, m));
        left -= m;
    }
    out
}

/// The 60 distinct grid operators shared by criteria 1-3.
fn operator_set() -> Vec<FactoredOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = BTreeSet::new();
    let mut ops = Vec::new();
    while ops.len() < 60 {
        let op = FactoredOp::new(grid_factors(&mut rng, 6, 3)).unwrap();
        let key = format!("{:?}", op.factors());
        if seen.insert(key) {
            ops.push(op);
        }
    }
    ops
}

fn random_complex(rng: &mut ChaCha8Rng, span: f64) -> Complex64 {
    c(rng.random_range(-span..span), rng.random_range(-span..span))
}

fn random_exponent(rng: &mut ChaCha8Rng) -> Complex64 {
    if rng.random_bool(0.4) {
        *grid().choose(rng).unwrap()
    } else {
        random_complex(rng, 3.0)
    }
}

/// Random exponential-polynomial with up to `max_terms` terms of degree at most `max_deg`.
fn random_expoly(rng: &mut ChaCha8Rng, max_terms: usize, max_deg: usize) -> ExpPoly {
    (0..rng.random_range(1..=max_terms)).fold(ExpPoly::zero(), |acc, _| {
        let deg = rng.random_range(0..=max_deg);
        let coeffs = (0..=deg).map(|_| random_complex(rng, 2.0)).collect();
        acc + ExpPoly::term(random_exponent(rng), Poly::new(coeffs))
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn homogeneous_soundness() -> Outcome {
    let ops = operator_set();
    let mut worst_residual: f64 = 0.0;
    let mut worst_det = f64::INFINITY;
    for op in &ops {
        let lin = op.to_linop();
        let h = homogeneous_solution(op);
        for f in h.basis() {
            worst_residual = worst_residual
                .max(op.apply(&f).max_abs())
                .max(lin.apply(&f).max_abs());
        }
        worst_det = worst_det.min(normalized_wronskian_det(&h.basis(), 0.0));
    }
    outcome(
        worst_residual <= 1e-9 && worst_det > 1e-9,
        format!(
            "{} operators, max residual {worst_residual:.2e}, min normalized det {worst_det:.2e}",
            ops.len()
        ),
    )
}

struct RhsCase {
    op: FactoredOp,
    b: Complex64,
    j: usize,
    f: ExpPoly,
    y: ExpPoly,
}

fn rhs_cases() -> Vec<RhsCase> {
    let mut cases = Vec::new();
    for op in operator_set() {
        for b in grid() {
            for j in 0..=3 {
                let f = ExpPoly::monomial(c(1.0, 0.0), j, b);
                let y = particular_solution(&op, &f);
                cases.push(RhsCase {
                    op: op.clone(),
                    b,
                    j,
                    f,
                    y,
                });
            }
        }
    }
    cases
}

fn particular_round_trip(cases: &[RhsCase]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for case in cases {
        let v = verify_solution(&case.op.to_linop(), &case.f, &case.y, 50);
        worst = worst.max(v.max());
        if !v.is_verified() {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "{} cases, {failures} over tolerance, max residual {worst:.2e}",
            cases.len()
        ),
    )
}

fn resonance_degree_law(cases: &[RhsCase]) -> Outcome {
    let mut resonant = 0;
    let mut failures = 0;
    for case in cases {
        let m = case.op.multiplicity_of(case.b, 1e-9);
        let ansatz = ansatz_form(&case.op, case.b, case.j);
        let single_exponent = case.y.terms().len() == 1;
        let degree = case.y.term_at(case.b).and_then(Poly::degree);
        let ok = single_exponent
            && degree == Some(case.j + m)
            && ansatz.predicted_degree() == case.j + m
            && ansatz.is_resonant() == (m > 0);
        if m > 0 {
            resonant += 1;
        }
        if !ok {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "{resonant} resonant and {} non-resonant cases, {failures} mismatches",
            cases.len() - resonant
        ),
    )
}

fn permutations(items: &[Complex64]) -> Vec<Vec<Complex64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn commutativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = 0;
    let mut orders = 0;
    for _ in 0..100 {
        let factors = if rng.random_bool(0.5) {
            grid_factors(&mut rng, 5, 3)
        } else {
            let n = rng.random_range(1..=5);
            (0..n).map(|_| (random_complex(&mut rng, 2.0), 1)).collect()
        };
        let op = FactoredOp::new(factors).unwrap();
        let y = random_expoly(&mut rng, 3, 3);
        let reference = op.to_linop().apply(&y);
        let sequence: Vec<Complex64> = op
            .factors()
            .iter()
            .flat_map(|&(r, m)| std::iter::repeat_n(r, m))
            .collect();
        for order in permutations(&sequence) {
            orders += 1;
            let singles: Vec<(Complex64, usize)> = order.into_iter().map(|r| (r, 1)).collect();
            if !apply_factors(&singles, &y).approx_eq(&reference, 1e-9) {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("100 operators, {orders} factor orders, {failures} disagreements"),
    )
}

fn leibniz_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    for _ in 0..100 {
        let y = random_expoly(&mut rng, 3, 4);
        let a = random_exponent(&mut rng);
        let m = rng.random_range(0..=4);
        let lhs = y.scale_exp(-a).nth_derivative(m);
        let rhs = (0..=m)
            .fold(ExpPoly::zero(), |acc, k| {
                let weight = (-a).powu((m - k) as u32) * binomial(m, k);
                acc + y.nth_derivative(k).scale(weight)
            })
            .scale_exp(-a);
        if !lhs.approx_eq(&rhs, 1e-9) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("100 triples, {failures} mismatches"))
}

fn factorization_certification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let want = grid_factors(&mut rng, 8, 3);
        let p = Poly::from_roots(&want);
        let ok = match find_roots(&p, DEFAULT_CLUSTER_TOL) {
            Ok(fact) => {
                let err = (&fact.expand() - &p).max_abs();
                worst = worst.max(err);
                fact.pairs.len() == want.len()
                    && want.iter().all(|&(root, mult)| {
                        fact.pairs
                            .iter()
                            .any(|&(r, m)| m == mult && (r - root).norm() <= 1e-6)
                    })
                    && err <= 1e-8
            }
            Err(_) => false,
        };
        if !ok {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("100 polynomials, {failures} failures, max coefficient error {worst:.2e}"),
    )
}

fn antiderivative_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    for _ in 0..500 {
        let f = random_expoly(&mut rng, 4, 5);
        if !f.antiderivative().derivative().approx_eq(&f, 1e-10) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("500 values, {failures} mismatches"))
}

const FUZZ_SEEDS: &[&str] = &[
    "y'' - 2y' + y = 0",
    "y' - y = exp(x)",
    "y'' + y = x*exp(2x)*sin(x)",
    "y^(3) + 3y'' + 3y' + y = cos(2*x - 1)^2",
    "(1 + 2i)*x^2*exp((1 - i)*x) - 0.5e-3",
    "2y'' = -4y + exp(-x/2)",
];

const FUZZ_ALPHABET: &[&str] = &[
    "y", "x", "i", "'", "^", "(", ")", "*", "/", "+", "-", "=", "exp", "sin", "cos", "1e", "9",
    "0.", ".", " ", "^(", "99999999", "1e400", ",", ":", "é", "\u{0}",
];

fn mutate(rng: &mut ChaCha8Rng, s: &str) -> String {
    let mut chars: Vec<String> = s.chars().map(String::from).collect();
    for _ in 0..rng.random_range(1..=4) {
        let pos = rng.random_range(0..=chars.len());
        match rng.random_range(0..3) {
            0 if pos < chars.len() => {
                chars.remove(pos);
            }
            1 if pos < chars.len() => {
                chars[pos] = FUZZ_ALPHABET.choose(rng).unwrap().to_string();
            }
            _ => chars.insert(pos, FUZZ_ALPHABET.choose(rng).unwrap().to_string()),
        }
    }
    chars.concat()
}

fn parser_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    for _ in 0..500 {
        let f = random_expoly(&mut rng, 4, 4);
        let text = render(&f);
        let back = parse_expr(&text).ok().and_then(|e| lower_rhs(&e).ok());
        if !back.is_some_and(|g| g.approx_eq(&f, 1e-10)) {
            failures += 1;
        }
    }

    let mut corpus: Vec<String> = Vec::new();
    for _ in 0..1200 {
        let seed = FUZZ_SEEDS.choose(&mut rng).unwrap();
        corpus.push(mutate(&mut rng, seed));
    }
    corpus.push("(".repeat(10_000));
    corpus.push("-".repeat(10_000) + "x");
    corpus.push("x^".repeat(5_000) + "2");
    corpus.push("y".to_string() + &"'".repeat(10_000) + " = 0");
    corpus.push("exp(".repeat(300) + "x" + &")".repeat(300));

    let prev = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let crashes = corpus
        .iter()
        .filter(|s| {
            panic::catch_unwind(|| {
                let _ = parse_equation(s).map(|eq| eq.lower());
                let _ = parse_expr(s).map(|e| lower_rhs(&e));
            })
            .is_err()
        })
        .count();
    panic::set_hook(prev);

    outcome(
        failures == 0 && crashes == 0,
        format!(
            "500 round trips with {failures} mismatches, {} fuzz inputs with {crashes} crashes",
            corpus.len()
        ),
    )
}

fn golden_reports() -> Outcome {
    let cases: [(&str, &str, SolveOptions); 3] = [
        (
            "second_order_repeated",
            "y'' - 2y' + y = 0",
            SolveOptions::default(),
        ),
        (
            "first_order_resonant",
            "y' - y = exp(x)",
            SolveOptions::default(),
        ),
        (
            "oscillator_ivp",
            "y'' + y = 0",
            SolveOptions {
                real: true,
                ivp: Some("y(0)=0, y'(0)=1".into()),
                ..SolveOptions::default()
            },
        ),
    ];
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut problems = Vec::new();
    for (name, eq, opts) in &cases {
        let run = || ccode_cli::solve(eq, opts).map(|o| o.report.to_json());
        let (first, second) = match (run(), run()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                problems.push(format!("{name}: solve failed"));
                continue;
            }
        };
        if first != second {
            problems.push(format!("{name}: runs differ"));
        }
        if !first.contains("\"status\": \"verified\"") {
            problems.push(format!("{name}: not verified"));
        }
        match std::fs::read_to_string(dir.join(format!("{name}.json"))) {
            Ok(golden) if golden.trim_end() == first => {}
            Ok(_) => problems.push(format!("{name}: differs from golden file")),
            Err(_) => problems.push(format!("{name}: golden file missing")),
        }
    }
    let detail = if problems.is_empty() {
        "3 reports verified, repeatable and equal to golden files".to_string()
    } else {
        problems.join("; ")
    };
    outcome(problems.is_empty(), detail)
}

fn main() -> ExitCode {
    let mut cases: Option<Vec<RhsCase>> = None;
    let mut all_pass = true;
    let mut report = |n: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} {verdict} {name}: {} ({:.2} s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        all_pass &= o.pass;
    };
    report(1, "homogeneous soundness", &mut homogeneous_soundness);
    report(2, "particular-solution round trip", &mut || {
        particular_round_trip(cases.get_or_insert_with(rhs_cases))
    });
    report(3, "resonance degree law", &mut || {
        resonance_degree_law(cases.get_or_insert_with(rhs_cases))
    });
    report(4, "commutativity", &mut commutativity);
    report(5, "Leibniz identity", &mut leibniz_identity);
    report(
        6,
        "factorization certification",
        &mut factorization_certification,
    );
    report(7, "antiderivative inverse", &mut antiderivative_inverse);
    report(8, "parser round trip and fuzz", &mut parser_round_trip);
    report(9, "golden reports", &mut golden_reports);
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
