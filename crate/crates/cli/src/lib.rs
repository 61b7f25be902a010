//! Report building behind the `ccode` command-line tool.
//!
//! The binary is a thin clap wrapper; everything it prints comes from
//! [`solve`] and [`verify`] so that tests can drive the same code paths.

use std::fmt::Write as _;

use ccode::solver::{self, Verification, DEFAULT_VERIFY_POINTS};
use ccode::syntax::{lower_rhs, parse_conditions, parse_equation_rearranged, parse_root_list};
use ccode::{
    parse_expr, render, render_real, ExpPoly, FactoredOp, Factorization, LinOp, ParseError,
};
use num_complex::Complex64;
use serde::Serialize;

/// Exit status for a verified result.
pub const EXIT_OK: i32 = 0;
/// A residual exceeded the verification tolerance.
pub const EXIT_UNVERIFIED: i32 = 1;
/// Malformed input or flags.
pub const EXIT_USAGE: i32 = 2;
/// Root finding or a linear solve failed.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Parse(ParseError),
    Usage(String),
    Numeric(ccode::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(
                ccode::Error::NonConvergence(_) | ccode::Error::SingularSystem(_),
            ) => EXIT_NUMERIC,
            CliError::Numeric(_) => EXIT_USAGE,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(ParseError::Syntax { .. }) => "SyntaxError",
            CliError::Parse(ParseError::NonlinearTerm { .. }) => "NonlinearTerm",
            CliError::Parse(ParseError::UnknownOnRhs { .. }) => "UnknownOnRhs",
            CliError::Parse(ParseError::NonConstantCoefficient { .. }) => "NonConstantCoefficient",
            CliError::Parse(ParseError::DegenerateEquation) => "DegenerateEquation",
            CliError::Parse(ParseError::UnsupportedForm(_)) => "UnsupportedForm",
            CliError::Usage(_) => "UsageError",
            CliError::Numeric(ccode::Error::NonConvergence(_)) => "NonConvergence",
            CliError::Numeric(ccode::Error::SingularSystem(_)) => "SingularSystem",
            CliError::Numeric(ccode::Error::NotConjugateClosed) => "NotConjugateClosed",
            CliError::Numeric(ccode::Error::InvalidInput(_)) => "InvalidInput",
        }
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            CliError::Parse(
                ParseError::Syntax { position, .. }
                | ParseError::NonlinearTerm { position }
                | ParseError::UnknownOnRhs { position }
                | ParseError::NonConstantCoefficient { position },
            ) => Some(*position),
            _ => None,
        }
    }

    /// One-line JSON diagnostic.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Diagnostic<'a> {
            error: &'a str,
            message: String,
            position: Option<usize>,
        }
        serde_json::to_string(&Diagnostic {
            error: self.kind(),
            message: self.to_string(),
            position: self.position(),
        })
        .expect("diagnostic serializes")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<ccode::Error> for CliError {
    fn from(e: ccode::Error) -> Self {
        CliError::Numeric(e)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub real: bool,
    pub ivp: Option<String>,
    pub roots: Option<String>,
    pub verify_points: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            real: false,
            ivp: None,
            roots: None,
            verify_points: DEFAULT_VERIFY_POINTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootEntry {
    pub root: [String; 2],
    pub multiplicity: usize,
}

/// Structured result of `ccode solve`. Keys are fixed; numbers are decimal
/// strings with 15 significant digits and complex numbers are `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub equation: String,
    /// Monic characteristic polynomial, lowest power first.
    pub characteristic_polynomial: Vec<[String; 2]>,
    pub factorization: Vec<RootEntry>,
    pub homogeneous_basis: Vec<String>,
    pub particular_solution: String,
    pub fitted_solution: Option<String>,
    pub residual_symbolic: String,
    pub residual_pointwise: String,
    pub status: String,
}

impl SolveReport {
    pub fn is_verified(&self) -> bool {
        self.status == "verified"
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_verified() {
            EXIT_OK
        } else {
            EXIT_UNVERIFIED
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self, labels: &[String]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "equation:            {}", self.equation);
        let roots: Vec<String> = self
            .factorization
            .iter()
            .map(|r| {
                format!(
                    "{} (multiplicity {})",
                    complex_text(&r.root),
                    r.multiplicity
                )
            })
            .collect();
        let _ = writeln!(s, "roots:               {}", roots.join(", "));
        let _ = writeln!(
            s,
            "homogeneous basis:   {}",
            self.homogeneous_basis.join(", ")
        );
        let general: Vec<String> = labels
            .iter()
            .zip(&self.homogeneous_basis)
            .map(|(c, f)| {
                if f == "1" {
                    c.clone()
                } else {
                    format!("{c}*{}", wrap(f))
                }
            })
            .collect();
        let mut general = general.join(" + ");
        if self.particular_solution != "0" {
            general = format!("{general} + {}", wrap(&self.particular_solution));
        }
        let _ = writeln!(s, "general solution:    y = {general}");
        let _ = writeln!(s, "particular solution: {}", self.particular_solution);
        if let Some(fitted) = &self.fitted_solution {
            let _ = writeln!(s, "fitted solution:     {fitted}");
        }
        let _ = writeln!(
            s,
            "residuals:           symbolic {}, pointwise {}",
            self.residual_symbolic, self.residual_pointwise
        );
        let _ = writeln!(s, "status:              {}", self.status);
        s
    }
}

fn wrap(f: &str) -> String {
    if f.contains(" + ") || f.contains(" - ") {
        format!("({f})")
    } else {
        f.to_string()
    }
}

fn complex_text(c: &[String; 2]) -> String {
    let re: f64 = c[0].parse().unwrap_or(f64::NAN);
    let im: f64 = c[1].parse().unwrap_or(f64::NAN);
    render(&ExpPoly::constant(Complex64::new(re, im)))
}

/// `[re, im]` with 15 significant digits each.
pub fn complex_pair(c: Complex64) -> [String; 2] {
    [number(c.re), number(c.im)]
}

/// Scientific notation with 15 significant digits; negative zero prints as zero.
pub fn number(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.14e}")
}

fn status(v: &Verification) -> String {
    if v.is_verified() {
        "verified"
    } else {
        "unverified"
    }
    .to_string()
}

/// Constant labels of the homogeneous basis, aligned with the report's basis.
pub fn basis_labels(
    n: usize,
    homogeneous: &solver::HomogeneousSolution,
    real: bool,
) -> Vec<String> {
    if real {
        (1..=n).map(|k| format!("C{k}")).collect()
    } else {
        homogeneous.labels().iter().map(|s| s.to_string()).collect()
    }
}

/// Everything `ccode solve` computes, with the rendered report.
pub struct SolveOutcome {
    pub report: SolveReport,
    pub labels: Vec<String>,
}

/// Runs parse → factor → solve → (fit) → verify → render.
pub fn solve(equation: &str, opts: &SolveOptions) -> Result<SolveOutcome, CliError> {
    let ast = parse_equation_rearranged(equation)?;
    let (op, rhs) = ast.lower()?;
    let factored = match &opts.roots {
        Some(text) => user_factorization(&op, text)?,
        None => op.factor(ccode::poly::DEFAULT_CLUSTER_TOL)?,
    };

    let solution = solver::solve(&factored, &rhs);
    let points = opts.verify_points;
    let mut check = solver::verify_solution(&op, &rhs, &solution.particular, points);
    for f in solution.homogeneous.basis() {
        check = check.worst(solver::verify_solution(&op, &ExpPoly::zero(), &f, points));
    }

    let fitted = match &opts.ivp {
        Some(text) => {
            let conditions = parse_conditions(text)?;
            if conditions.len() != op.coeffs().len() {
                return Err(CliError::Usage(format!(
                    "an order-{} equation needs {} initial conditions, got {}",
                    op.coeffs().len(),
                    op.coeffs().len(),
                    conditions.len()
                )));
            }
            let y = solver::fit_initial_conditions(&solution, op.coeffs().len(), &conditions)
                .map_err(|e| match e {
                    ccode::Error::InvalidInput(m) => CliError::Usage(m),
                    other => CliError::Numeric(other),
                })?;
            check = check.worst(solver::verify_solution(&op, &rhs, &y, points));
            Some(y)
        }
        None => None,
    };

    let show = |f: &ExpPoly| -> Result<String, CliError> {
        if opts.real {
            Ok(render_real(f)?)
        } else {
            Ok(render(f))
        }
    };
    let basis = if opts.real {
        solution.homogeneous.real_basis()?
    } else {
        solution.homogeneous.basis()
    };
    let homogeneous_basis = basis.iter().map(&show).collect::<Result<Vec<_>, _>>()?;
    let labels = basis_labels(basis.len(), &solution.homogeneous, opts.real);

    let report = SolveReport {
        equation: equation.to_string(),
        characteristic_polynomial: op
            .char_poly()
            .coeffs()
            .iter()
            .map(|&c| complex_pair(c))
            .collect(),
        factorization: factored
            .factors()
            .iter()
            .map(|&(root, multiplicity)| RootEntry {
                root: complex_pair(root),
                multiplicity,
            })
            .collect(),
        homogeneous_basis,
        particular_solution: show(&solution.particular)?,
        fitted_solution: fitted.as_ref().map(&show).transpose()?,
        residual_symbolic: number(check.symbolic),
        residual_pointwise: number(check.pointwise),
        status: status(&check),
    };
    Ok(SolveOutcome { report, labels })
}

/// Checks a `root:multiplicity` list against the operator before using it.
fn user_factorization(op: &LinOp, text: &str) -> Result<FactoredOp, CliError> {
    let pairs = parse_root_list(text)?;
    let factored = FactoredOp::new(pairs).map_err(|e| CliError::Usage(e.to_string()))?;
    let claimed = Factorization {
        pairs: factored.factors().to_vec(),
        leading: Complex64::new(1.0, 0.0),
    };
    if !claimed.reconstructs(&op.char_poly()) {
        return Err(CliError::Usage(
            "the given roots do not factor the characteristic polynomial".into(),
        ));
    }
    Ok(factored)
}

/// Structured result of `ccode verify`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub equation: String,
    pub candidate: String,
    pub residual_symbolic: String,
    pub residual_pointwise: String,
    pub status: String,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.status == "verified" {
            EXIT_OK
        } else {
            EXIT_UNVERIFIED
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        format!(
            "residuals: symbolic {}, pointwise {}\nstatus: {}\n",
            self.residual_symbolic, self.residual_pointwise, self.status
        )
    }
}

/// Substitutes `candidate` into `equation`.
pub fn verify(equation: &str, candidate: &str, points: usize) -> Result<VerifyReport, CliError> {
    let (op, rhs) = parse_equation_rearranged(equation)?.lower()?;
    let y = lower_rhs(&parse_expr(candidate)?)?;
    let check = solver::verify_solution(&op, &rhs, &y, points);
    Ok(VerifyReport {
        equation: equation.to_string(),
        candidate: candidate.to_string(),
        residual_symbolic: number(check.symbolic),
        residual_pointwise: number(check.pointwise),
        status: status(&check),
    })
}
