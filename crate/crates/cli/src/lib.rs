//! Batch front end for the boundary-problem solver.

use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use greenop_core::boundary::{self, BoundaryProblem, DiffOperator, GreenKernel, Operator};
use greenop_core::coeffalg::parse::parse_function;
use greenop_core::coeffalg::{CoeffFunction, IntDiffAlgebra};
use greenop_core::confluence::{check_confluence, ConfluenceReport};
use greenop_core::intdiffop::{compact, parse_condition, parse_normal};
use greenop_core::intdiffpoly::Poly;
use greenop_core::Error;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "greenop", version, about = "Symbolic Green's operators for linear boundary problems")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Computes the Green's operator and kernel of a regular problem.
    Solve {
        /// Inline problem such as `D^2,[E[0],E[1]]`, or a JSON problem file.
        problem: Option<String>,
        /// Monic differential operator.
        #[arg(long)]
        op: Option<String>,
        /// Boundary condition, repeated once per condition.
        #[arg(long = "cond")]
        conds: Vec<String>,
        /// JSON problem file.
        #[arg(long = "problem", conflicts_with = "problem")]
        problem_file: Option<String>,
        /// Fundamental system of the operator, comma separated.
        #[arg(long, value_delimiter = ',')]
        fundsys: Vec<String>,
        /// Forcing function to apply the Green's operator to.
        #[arg(long)]
        forcing: Option<String>,
    },
    /// Composes two problems; the first is applied last.
    Compose {
        /// Outer problem, inline or a JSON file.
        left: String,
        /// Inner problem, inline or a JSON file.
        right: String,
    },
    /// Factors a problem along a factorization of its operator.
    Factor {
        /// Problem to factor, inline or a JSON file.
        problem: String,
        /// Left factor `T1` of `T = T1*T2`.
        #[arg(long)]
        left: String,
        /// Right factor `T2` of `T = T1*T2`.
        #[arg(long)]
        right: String,
        /// Fundamental system of the right factor, comma separated.
        #[arg(long, value_delimiter = ',')]
        fundsys: Vec<String>,
    },
    /// Normalizes an integro-differential operator.
    Normalize {
        /// Operator expression such as `A*x*D`.
        expr: String,
        /// Also print the differential, integral and boundary parts.
        #[arg(long)]
        decompose: bool,
    },
    /// Arithmetic in integro-differential polynomials.
    Poly {
        /// Polynomial such as `u*I(u'^2)`.
        expr: String,
        /// Multiplies by a second polynomial before applying operations.
        #[arg(long)]
        times: Option<String>,
        /// Operations applied in order.
        #[arg(long = "apply", value_enum)]
        ops: Vec<PolyOp>,
    },
    /// Checks confluence of the rewrite system for integro-differential operators.
    Confluence {
        /// Print the reduction trace of every fork.
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolyOp {
    Derive,
    Integrate,
    Evaluate,
}

/// Exit status, standard output and diagnostic output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        Error::SingularProblem => 3,
        Error::NotInvertibleWronskian(_) => 4,
        Error::BudgetExceeded(_) => 5,
        _ => 1,
    }
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {}\n", e) },
    }
}

fn execute(cli: &Cli) -> greenop_core::Result<(i32, String)> {
    let f = cli.format;
    match &cli.command {
        Command::Solve { problem, op, conds, problem_file, fundsys, forcing } => {
            let p = match (problem, problem_file, op) {
                (Some(s), _, _) => load_problem(s)?,
                (None, Some(path), _) => BoundaryProblem::from_json(&read(path)?)?,
                (None, None, Some(t)) => {
                    let conds = conds.iter().map(|c| parse_condition(c)).collect::<greenop_core::Result<Vec<_>>>()?;
                    BoundaryProblem::new(DiffOperator::parse(t)?, conds)?
                }
                _ => return Err(Error::parse(0, "solve needs a problem, --problem FILE or --op")),
            };
            let u = parse_list(fundsys)?;
            Ok((0, solve(&p, u.as_deref(), forcing.as_deref(), f)?))
        }
        Command::Compose { left, right } => {
            let c = boundary::compose(&load_problem(left)?, &load_problem(right)?)?;
            Ok((0, problem_out(&c, f)))
        }
        Command::Factor { problem, left, right, fundsys } => {
            let p = load_problem(problem)?;
            let u = parse_list(fundsys)?;
            let (l, r) = boundary::factor(&p, &DiffOperator::parse(left)?, &DiffOperator::parse(right)?, u.as_deref())?;
            Ok((0, factor_out(&l, &r, f)))
        }
        Command::Normalize { expr, decompose } => Ok((0, normalize_out(&parse_normal(expr)?, *decompose, f))),
        Command::Poly { expr, times, ops } => {
            let mut p = Poly::parse(expr)?;
            if let Some(t) = times {
                p = p.mul(&Poly::parse(t)?);
            }
            for op in ops {
                p = match op {
                    PolyOp::Derive => p.derive(),
                    PolyOp::Integrate => p.integrate(),
                    PolyOp::Evaluate => p.evaluate(),
                };
            }
            Ok((0, poly_out(&p, f)))
        }
        Command::Confluence { trace } => {
            let report = check_confluence()?;
            let code = if report.success() { 0 } else { 1 };
            Ok((code, confluence_out(&report, *trace, f)))
        }
    }
}

fn read(path: &str) -> greenop_core::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("{}: {}", path, e)))
}

/// An inline problem `T,[β…]` or the path of a JSON problem file.
pub fn load_problem(src: &str) -> greenop_core::Result<BoundaryProblem> {
    if Path::new(src).is_file() {
        BoundaryProblem::from_json(&read(src)?)
    } else {
        BoundaryProblem::parse_inline(src)
    }
}

fn parse_list(items: &[String]) -> greenop_core::Result<Option<Vec<CoeffFunction>>> {
    if items.is_empty() {
        return Ok(None);
    }
    items.iter().map(|s| parse_function(s.trim())).collect::<greenop_core::Result<Vec<_>>>().map(Some)
}

fn json_text(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("serializable"))
}

fn problem_value(p: &BoundaryProblem) -> Value {
    serde_json::from_str(&p.to_json()).expect("valid json")
}

fn kernel_value(k: &GreenKernel) -> Value {
    let pairs = |v: &[(CoeffFunction, CoeffFunction)]| -> Value { v.iter().map(|(a, b)| json!([compact(a), compact(b)])).collect() };
    let (lower, global) = k.regions();
    json!({ "lower": pairs(&lower), "upper": pairs(&global), "text": k.render() })
}

fn solve(p: &BoundaryProblem, fundsys: Option<&[CoeffFunction]>, forcing: Option<&str>, f: Format) -> greenop_core::Result<String> {
    let g = boundary::solve(p, fundsys)?;
    let kernel = boundary::greens_function(&g).ok();
    let solution = forcing.map(|src| match parse_function(src) {
        Ok(h) => Solution::Closed(boundary::apply_green(&g, &h)),
        Err(_) => Solution::Integral(kernel.as_ref().map(|k| k.integral_text(src))),
    });
    Ok(match f {
        Format::Text => {
            let mut out = format!("problem: {}\n", p.render());
            match &kernel {
                Some(k) => {
                    out.push_str(&format!("green: {}\n", k.operator_text()));
                    out.push_str(&format!("kernel: {}\n", k.render()));
                }
                None => out.push_str(&format!("green: {}\n", g.render())),
            }
            match &solution {
                Some(Solution::Closed(u)) => out.push_str(&format!("solution: u(x) = {}\n", compact(u))),
                Some(Solution::Integral(Some(t))) => out.push_str(&format!("solution: {}\n", t)),
                Some(Solution::Integral(None)) => out.push_str("solution: forcing is not an exponential polynomial\n"),
                None => {}
            }
            out
        }
        Format::Latex => {
            let mut out = format!("{}\n{}\n", p.latex(), g.latex());
            if let Some(k) = &kernel {
                out.push_str(&k.latex());
                out.push('\n');
            }
            if let Some(Solution::Closed(u)) = &solution {
                out.push_str(&format!("u(x) = {}\n", u.latex()));
            }
            out
        }
        Format::Json => {
            let mut v = json!({ "problem": problem_value(p), "green": g.to_json_value() });
            if let Some(k) = &kernel {
                v["kernel"] = kernel_value(k);
            }
            match &solution {
                Some(Solution::Closed(u)) => v["solution"] = json!(compact(u)),
                Some(Solution::Integral(t)) => v["solution"] = json!(t),
                None => {}
            }
            json_text(&v)
        }
    })
}

enum Solution {
    Closed(CoeffFunction),
    Integral(Option<String>),
}

fn problem_out(p: &BoundaryProblem, f: Format) -> String {
    match f {
        Format::Text => format!("{}\n", p.render()),
        Format::Latex => format!("{}\n", p.latex()),
        Format::Json => json_text(&problem_value(p)),
    }
}

fn factor_out(l: &BoundaryProblem, r: &BoundaryProblem, f: Format) -> String {
    match f {
        Format::Text => format!("left: {}\nright: {}\n", l.render(), r.render()),
        Format::Latex => format!("{}\n{}\n", l.latex(), r.latex()),
        Format::Json => json_text(&json!({ "left": problem_value(l), "right": problem_value(r) })),
    }
}

fn normalize_out(n: &Operator, decompose: bool, f: Format) -> String {
    let (t, g, b) = n.decompose();
    match (f, decompose) {
        (Format::Text, false) => format!("{}\n", n.render()),
        (Format::Text, true) => format!("{}\nT: {}\nG: {}\nB: {}\n", n.render(), t.render(), g.render(), b.render()),
        (Format::Latex, false) => format!("{}\n", n.latex()),
        (Format::Latex, true) => format!("{}\n{}\n{}\n{}\n", n.latex(), t.latex(), g.latex(), b.latex()),
        (Format::Json, _) => format!("{}\n", n.to_json()),
    }
}

fn poly_out(p: &Poly, f: Format) -> String {
    match f {
        Format::Text => format!("{}\n", p.render()),
        Format::Latex => format!("{}\n", p.latex()),
        Format::Json => json_text(&json!({ "poly": p.render() })),
    }
}

fn confluence_out(r: &ConfluenceReport, trace: bool, f: Format) -> String {
    match f {
        Format::Json => {
            let fork = |x: &greenop_core::confluence::ForkResult| {
                json!({
                    "rules": [x.sigma, x.tau],
                    "word": x.word,
                    "s_polynomial": x.s_polynomial,
                    "trivial": x.trivial,
                    "residue": x.residue,
                })
            };
            json_text(&json!({
                "ambiguities": r.forks.iter().map(fork).collect::<Vec<_>>(),
                "ground_forks": r.ground_forks.iter().map(fork).collect::<Vec<_>>(),
                "nontrivial": r.nontrivial(),
                "expected_nontrivial": r.expected_nontrivial,
                "all_resolved": r.all_resolved(),
            }))
        }
        _ if trace => {
            let mut out = String::new();
            for x in r.forks.iter().chain(&r.ground_forks) {
                out.push_str(&x.line());
                out.push('\n');
                for step in &x.trace {
                    out.push_str(&format!("  {}\n", step));
                }
            }
            for line in r.render().lines().skip(r.forks.len() + r.ground_forks.len()) {
                out.push_str(line);
                out.push('\n');
            }
            out
        }
        _ => r.render(),
    }
}
