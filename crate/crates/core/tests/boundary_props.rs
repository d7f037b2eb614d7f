mod common;

use common::{rand_regular_problem, rng};
use greenop_core::boundary::{
    apply_green, compose, condition_times, constant_coeff_fundsys, factor, fundamental_right_inverse, greens_function, greens_operator, projector,
    solve, span_equal, BoundaryProblem, DiffOperator, Operator,
};
use greenop_core::coeffalg::parse::parse_function;
use greenop_core::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra};
use greenop_core::intdiffop::parse_condition;
use proptest::prelude::*;
use rand::Rng;

fn problem(src: &str) -> BoundaryProblem {
    BoundaryProblem::parse_inline(src).unwrap()
}

fn green(p: &BoundaryProblem) -> Operator {
    solve(p, None).unwrap()
}

#[test]
fn two_point_kernel() {
    let g = green(&problem("D^2,[E[0],E[1]]"));
    let k = greens_function(&g).unwrap();
    assert_eq!(k.render(), "g(x,ξ) = ξ(x-1) [ξ≤x]; x(ξ-1) [ξ>x]");
    assert_eq!(k.operator_text(), "(x-1)*A*x + x*(R.A)*(x-1) - x*A*(x-1)");
    let (lower, upper) = k.regions();
    let x = CoeffFunction::x();
    let xm1 = parse_function("x-1").unwrap();
    assert_eq!(lower, vec![(xm1.clone(), x.clone())]);
    assert_eq!(upper, vec![(x, xm1)]);
}

#[test]
fn forcing_by_x() {
    let g = green(&problem("D^2,[E[0],E[1]]"));
    let u = apply_green(&g, &CoeffFunction::x());
    assert_eq!(u, parse_function("(1/6)*x^3 - (1/6)*x").unwrap());
    assert_eq!(u.derive().derive(), CoeffFunction::x());
    assert!(u.evaluate().is_zero());
    assert!(u.char_value(&CharSym::at(Gauss::one())).is_zero());
}

#[test]
fn composition_of_first_order_problems() {
    let c = compose(&problem("D,[E[0]]"), &problem("D,[E[0]]")).unwrap();
    assert_eq!(c.render(), "D^2, [E[0], E[0]*D]");
    assert_eq!(c.op, DiffOperator::parse("D^2").unwrap());
}

#[test]
fn factor_along_first_derivatives() {
    let p = problem("D^2,[E[0],E[1]]");
    let d = DiffOperator::parse("D").unwrap();
    let (left, right) = factor(&p, &d, &d, None).unwrap();
    assert_eq!(right.render(), "D, [E[0]]");
    assert!(span_equal(&left.conds, &[parse_condition("E[1]*A").unwrap()]));
    let back = compose(&left, &right).unwrap();
    assert_eq!(back.op, p.op);
    assert!(span_equal(&back.conds, &p.conds));
}

#[test]
fn fourth_order_factorization_round_trips() {
    let p = problem("D^4+4,[E[0],E[1],E[0]*D,E[1]*D]");
    let t1 = DiffOperator::parse("D^2-2*i").unwrap();
    let t2 = DiffOperator::parse("D^2+2*i").unwrap();
    let (left, right) = factor(&p, &t1, &t2, None).unwrap();
    assert_eq!(left.order(), 2);
    assert_eq!(right.order(), 2);
    let back = compose(&left, &right).unwrap();
    assert_eq!(back.op, p.op);
    assert!(span_equal(&back.conds, &p.conds));
}

#[test]
fn singular_problem_is_rejected() {
    let p = problem("D^2,[E[0]*D,E[1]*D]");
    assert_eq!(solve(&p, None), Err(greenop_core::Error::SingularProblem));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn green_operator_identities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let p = rand_regular_problem(&mut r, n);
        let u = constant_coeff_fundsys(&p.op).unwrap();
        let g = greens_operator(&p, &u).unwrap();
        let t = p.op.to_normal();
        let proj = projector(&u, &p.conds).unwrap();
        prop_assert_eq!(t.multiply(&g).unwrap(), Operator::identity());
        for b in &p.conds {
            prop_assert!(condition_times(b, &g).unwrap().is_zero());
        }
        prop_assert_eq!(g.multiply(&t).unwrap(), Operator::identity().sub(&proj));
        prop_assert_eq!(proj.multiply(&proj).unwrap(), proj.clone());
        let fri = fundamental_right_inverse(&p.op, &u).unwrap();
        prop_assert_eq!(Operator::identity().sub(&proj).multiply(&fri).unwrap(), g);
    }

    #[test]
    fn composed_green_operator_is_the_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n1 = r.gen_range(1..=2);
        let n2 = r.gen_range(1..=3 - n1);
        let (p1, p2) = (rand_regular_problem(&mut r, n1), rand_regular_problem(&mut r, n2));
        let c = compose(&p1, &p2).unwrap();
        prop_assert_eq!(green(&c), green(&p2).multiply(&green(&p1)).unwrap());
    }

    #[test]
    fn factor_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let roots: Vec<Gauss> = (0..3).map(|_| Gauss::int(r.gen_range(-1..=2))).collect();
        let k = r.gen_range(1..=2);
        let op = DiffOperator::from_roots(&roots).unwrap();
        let p = loop {
            let q = rand_regular_problem(&mut r, 3);
            if let Ok(q) = BoundaryProblem::new(op.clone(), q.conds) {
                if greenop_core::boundary::is_regular(&q, &constant_coeff_fundsys(&op).unwrap()) {
                    break q;
                }
            }
        };
        let t1 = DiffOperator::from_roots(&roots[..k]).unwrap();
        let t2 = DiffOperator::from_roots(&roots[k..]).unwrap();
        let (left, right) = factor(&p, &t1, &t2, None).unwrap();
        let back = compose(&left, &right).unwrap();
        prop_assert_eq!(&back.op, &p.op);
        prop_assert!(span_equal(&back.conds, &p.conds));
        prop_assert_eq!(green(&back), green(&p));
    }

    #[test]
    fn problem_json_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let p = rand_regular_problem(&mut r, n);
        prop_assert_eq!(BoundaryProblem::from_json(&p.to_json()).unwrap(), p.clone());
        prop_assert_eq!(BoundaryProblem::parse_inline(&p.render()).unwrap(), p);
    }
}
