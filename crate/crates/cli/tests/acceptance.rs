//! Acceptance suite: one PASS/FAIL line per criterion, each under a pinned time limit.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{rand_coeff, rand_exppoly, rand_idp, rand_poly, rand_regular_problem, rand_word, rng, R};
use greenop_core::boundary::{compose, factor, greens_function, solve, span_equal, BoundaryProblem, DiffOperator};
use greenop_core::coeffalg::parse::parse_function;
use greenop_core::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra};
use greenop_core::confluence::check_confluence;
use greenop_core::intdiffop::{apply_literal, normalize, parse_condition, parse_normal};
use greenop_core::intdiffpoly::Poly;
use greenop_core::ncreduce::NCPoly;
use rand::Rng;

const TIME_LIMIT: Duration = Duration::from_secs(10);
const RANDOM_INSTANCES: usize = 200;
const COMPOSITION_PAIRS: usize = 20;
const MAX_PAIR_ORDER: usize = 3;
const GOLDEN_RUNS: usize = 2;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn problem(src: &str) -> Result<BoundaryProblem, String> {
    BoundaryProblem::parse_inline(src).map_err(|e| e.to_string())
}

fn func(src: &str) -> CoeffFunction {
    parse_function(src).unwrap()
}

fn two_point_kernel() -> Outcome {
    let g = solve(&problem("D^2,[E[0],E[1]]")?, None).map_err(|e| e.to_string())?;
    let k = greens_function(&g).map_err(|e| e.to_string())?;
    let (lower, upper) = k.regions();
    ensure!(lower == vec![(func("x-1"), func("x"))], "lower region {:?}", lower);
    ensure!(upper == vec![(func("x"), func("x-1"))], "upper region {:?}", upper);
    ensure!(k.render() == "g(x,ξ) = ξ(x-1) [ξ≤x]; x(ξ-1) [ξ>x]", "kernel {}", k.render());
    Ok(())
}

fn forcing_x() -> Outcome {
    let g = solve(&problem("D^2,[E[0],E[1]]")?, None).map_err(|e| e.to_string())?;
    let u = g.apply(&CoeffFunction::x());
    ensure!(u == func("(1/6)*x^3 - (1/6)*x"), "u = {}", u.render());
    ensure!(u.derive().derive() == CoeffFunction::x(), "u'' = {}", u.derive().derive().render());
    ensure!(u.evaluate().is_zero(), "u(0) = {}", u.evaluate().render());
    ensure!(u.char_value(&CharSym::at(Gauss::one())).is_zero(), "u(1) nonzero");
    Ok(())
}

fn rewrite_identities() -> Outcome {
    for (word, expected) in [("D*A", "1"), ("A*A", "x*A - A*x"), ("A*x*D", "x - A")] {
        let nf = parse_normal(word).map_err(|e| e.to_string())?;
        ensure!(nf.render() == expected, "{} -> {}", word, nf.render());
        ensure!(nf == parse_normal(expected).map_err(|e| e.to_string())?, "{} not canonical", expected);
    }
    let mut r = rng(3);
    for word in ["D*A", "A*A", "A*x*D"] {
        let p = greenop_core::intdiffop::parse_operator(word).map_err(|e| e.to_string())?;
        let nf = normalize(&p).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let f = rand_exppoly(&mut r);
            ensure!(nf.apply(&f) == apply_literal(&p, &f), "{} action differs on {}", word, f.render());
        }
    }
    Ok(())
}

fn axioms_hold(f: &CoeffFunction, g: &CoeffFunction) -> Outcome {
    let int = |h: &CoeffFunction| h.integrate();
    let d = |h: &CoeffFunction| h.derive();
    let e = |h: &CoeffFunction| h.evaluate();
    ensure!(d(&int(f)) == *f, "section fails for {}", f.render());
    let lhs = int(&d(f)).mul(&int(&d(g))).add(&int(&d(&f.mul(g))));
    let rhs = int(&d(f)).mul(g).add(&f.mul(&int(&d(g))));
    ensure!(lhs == rhs, "differential Baxter fails for {}, {}", f.render(), g.render());
    ensure!(f.mul(&int(g)) == int(&f.mul(g)).add(&int(&d(f).mul(&int(g)))), "integration by parts fails for {}, {}", f.render(), g.render());
    ensure!(
        int(&f.mul(&d(g))) == f.mul(g).sub(&int(&d(f).mul(g))).sub(&e(f).mul(&e(g))),
        "evaluated integration by parts fails for {}, {}",
        f.render(),
        g.render()
    );
    ensure!(int(f).mul(&int(g)) == int(&f.mul(&int(g))).add(&int(&g.mul(&int(f)))), "Baxter fails for {}, {}", f.render(), g.render());
    ensure!(e(&f.mul(g)) == e(f).mul(&e(g)), "evaluation not multiplicative for {}, {}", f.render(), g.render());
    Ok(())
}

fn axiom_suite() -> Outcome {
    let mut r = rng(4);
    for _ in 0..RANDOM_INSTANCES {
        axioms_hold(&rand_poly(&mut r), &rand_poly(&mut r))?;
    }
    for _ in 0..RANDOM_INSTANCES {
        axioms_hold(&rand_exppoly(&mut r), &rand_exppoly(&mut r))?;
    }
    Ok(())
}

fn composition() -> Outcome {
    let c = compose(&problem("D,[E[0]]")?, &problem("D,[E[0]]")?).map_err(|e| e.to_string())?;
    ensure!(c == problem("D^2,[E[0],E[0]*D]")?, "composite {}", c.render());
    let mut r: R = rng(5);
    for _ in 0..COMPOSITION_PAIRS {
        let n1 = r.gen_range(1..=MAX_PAIR_ORDER);
        let n2 = r.gen_range(1..=MAX_PAIR_ORDER);
        let (p1, p2) = (rand_regular_problem(&mut r, n1), rand_regular_problem(&mut r, n2));
        let c = compose(&p1, &p2).map_err(|e| e.to_string())?;
        let g = solve(&c, None).map_err(|e| e.to_string())?;
        let g1 = solve(&p1, None).map_err(|e| e.to_string())?;
        let g2 = solve(&p2, None).map_err(|e| e.to_string())?;
        ensure!(g == g2.multiply(&g1).map_err(|e| e.to_string())?, "G differs for {} o {}", p1.render(), p2.render());
    }
    Ok(())
}

fn factorization() -> Outcome {
    let p = problem("D^2,[E[0],E[1]]")?;
    let d = DiffOperator::parse("D").map_err(|e| e.to_string())?;
    let (left, right) = factor(&p, &d, &d, None).map_err(|e| e.to_string())?;
    ensure!(right == problem("D,[E[0]]")?, "right {}", right.render());
    ensure!(left.op == d && span_equal(&left.conds, &[parse_condition("E[1]*A").map_err(|e| e.to_string())?]), "left {}", left.render());
    let back = compose(&left, &right).map_err(|e| e.to_string())?;
    ensure!(back.op == p.op && span_equal(&back.conds, &p.conds), "round trip {}", back.render());

    let p = problem("D^4+4,[E[0],E[1],E[0]*D,E[1]*D]")?;
    let t1 = DiffOperator::parse("D^2-2*i").map_err(|e| e.to_string())?;
    let t2 = DiffOperator::parse("D^2+2*i").map_err(|e| e.to_string())?;
    let (left, right) = factor(&p, &t1, &t2, None).map_err(|e| e.to_string())?;
    let back = compose(&left, &right).map_err(|e| e.to_string())?;
    ensure!(back.op == p.op && span_equal(&back.conds, &p.conds), "fourth-order round trip {}", back.render());
    Ok(())
}

fn confluence() -> Outcome {
    let report = check_confluence().map_err(|e| e.to_string())?;
    ensure!(report.all_resolved(), "unresolved forks:\n{}", report.render());
    ensure!(report.count_matches(), "count mismatch: {} nontrivial", report.nontrivial());
    ensure!(report.nontrivial() == 17, "{} nontrivial", report.nontrivial());
    Ok(())
}

fn nest(first: u32, depth: u32) -> String {
    let mut s = String::new();
    for k in 0..depth {
        s.push_str(&format!("I(u^{}", first + k));
        if k + 1 < depth {
            s.push('*');
        }
    }
    s + &")".repeat(depth as usize)
}

fn binomial(n: u32, k: u32) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) as usize / (i + 1) as usize)
}

fn idp(src: &str) -> Result<Poly, String> {
    Poly::parse(src).map_err(|e| e.to_string())
}

fn canonical_forms() -> Outcome {
    let two_by_one = idp(&nest(2, 2))?.mul(&idp(&nest(10, 1))?);
    ensure!(two_by_one.len() == 3, "2x1 shuffle has {} summands", two_by_one.len());
    for m in 1..=3 {
        for n in 1..=3 {
            let prod = idp(&nest(2, m))?.mul(&idp(&nest(10, n))?);
            ensure!(prod.len() == binomial(m + n, n), "{}x{} shuffle has {} summands", m, n, prod.len());
        }
    }
    let i = idp("u*u'")?.integrate();
    ensure!(i == idp("(1/2)*u^2 - (1/2)*u0^2")?, "integral {}", i.render());
    let mut r = rng(8);
    for _ in 0..RANDOM_INSTANCES {
        let q = rand_idp(&mut r);
        ensure!(q.integrate().derive() == q, "derive o integrate differs on {}", q.render());
    }
    Ok(())
}

fn decomposition() -> Outcome {
    let mut r = rng(9);
    for _ in 0..RANDOM_INSTANCES {
        let p = NCPoly::word(rand_word(&mut r, 6));
        let nf = normalize(&p).map_err(|e| e.to_string())?;
        let (t, g, b) = nf.decompose();
        ensure!(t.int_part().is_empty() && t.bound_part().is_empty(), "T mistyped for {}", p.render());
        ensure!(g.diff_part().is_empty() && g.bound_part().is_empty(), "G mistyped for {}", p.render());
        ensure!(b.diff_part().is_empty() && b.int_part().is_empty(), "B mistyped for {}", p.render());
        ensure!(t.add(&g).add(&b) == nf, "parts do not sum back for {}", p.render());
        for _ in 0..2 {
            let f = rand_coeff(&mut r);
            ensure!(nf.apply(&f) == apply_literal(&p, &f), "action differs for {} on {}", p.render(), f.render());
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut cases: Vec<_> = fs::read_dir(&dir).map_err(|e| e.to_string())?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    cases.retain(|p| p.extension().and_then(|e| e.to_str()) == Some("args"));
    cases.sort();
    ensure!(!cases.is_empty(), "empty golden corpus");
    for case in cases {
        let args: Vec<String> = fs::read_to_string(&case).map_err(|e| e.to_string())?.lines().map(String::from).collect();
        let expected = fs::read(case.with_extension("out")).map_err(|e| e.to_string())?;
        for _ in 0..GOLDEN_RUNS {
            let out = Command::new(env!("CARGO_BIN_EXE_greenop"))
                .args(&args)
                .current_dir(env!("CARGO_MANIFEST_DIR"))
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(out.status.success(), "{} exited with {}", case.display(), out.status);
            ensure!(out.stdout == expected, "{} differs from its golden output", case.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("two-point Green's function", two_point_kernel),
        ("forcing by x", forcing_x),
        ("operator rewrite identities", rewrite_identities),
        ("axiom suite", axiom_suite),
        ("composition", composition),
        ("factorization", factorization),
        ("confluence", confluence),
        ("integro-differential polynomials", canonical_forms),
        ("normal-form decomposition", decomposition),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check().and_then(|()| {
            let elapsed = start.elapsed();
            if elapsed > TIME_LIMIT {
                Err(format!("took {:.2?}, limit {:.0?}", elapsed, TIME_LIMIT))
            } else {
                Ok(())
            }
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {}: PASS  {} ({:.2}s)", k + 1, name, secs),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {} ({:.2}s): {}", k + 1, name, secs, msg);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
