mod common;

use common::{rand_coeff, rng};
use greenop_core::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra};
use greenop_core::confluence::{build_parametrized_system, check_confluence, check_system, residue, substitute_generic, Fhat};
use greenop_core::intdiffop::{operator_rules, operator_system};
use greenop_core::ncreduce::{s_polynomial, Bindings, Bound, Letter, NCPoly, RewriteSystem};
use proptest::prelude::*;
use rand::seq::SliceRandom;

#[test]
fn seventeen_nontrivial_forks_all_resolve() {
    let report = check_confluence().unwrap();
    assert_eq!(report.forks.len(), 18);
    assert_eq!(report.nontrivial(), 17);
    assert!(report.count_matches());
    assert!(report.all_resolved(), "{}", report.render());
    assert_eq!(report.ground_forks.len(), 6);
    assert!(report.render().ends_with("18 ambiguities, 17 nontrivial, 6 ground forks, all residues zero: yes\n"));
}

#[test]
fn nine_schemas_with_generic_instances() {
    let set = build_parametrized_system();
    assert_eq!(set.system.rules().len(), 9);
    let u = set.generic.funcs[0].clone();
    let baxter = set.system.rules().iter().find(|r| r.name == "baxter").unwrap();
    let mut b = Bindings::new();
    b.insert("f", Bound::Func(u.clone()));
    let iu = u.integrate();
    let expected = NCPoly::word(vec![Letter::Func(iu.clone()), Letter::Integ]).sub(&NCPoly::word(vec![Letter::Integ, Letter::Func(iu)]));
    assert_eq!((baxter.rewrite)(&b), expected);

    let absorb = set.system.rules().iter().find(|r| r.name == "char-absorb").unwrap();
    let (phi, psi) = (set.generic.chars[0].clone(), set.generic.chars[1].clone());
    let mut b = Bindings::new();
    b.insert("phi", Bound::Char(phi));
    b.insert("psi", Bound::Char(psi.clone()));
    assert_eq!((absorb.rewrite)(&b), NCPoly::letter(Letter::Char(psi)));
}

#[test]
fn minimal_baxter_fork() {
    let set = build_parametrized_system();
    let amb = set.system.find_ambiguities(&set.generic).into_iter().find(|a| a.sigma == "baxter" && a.tau == "baxter").unwrap();
    let s = s_polynomial(&amb);
    let (u, v) = (set.generic.funcs[0].clone(), set.generic.funcs[1].clone());
    let (iu, iv) = (u.integrate(), v.integrate());
    use Letter::{Func, Integ};
    let expected = NCPoly::word(vec![Func(iu.clone()), Integ, Func(v.clone()), Integ])
        .sub(&NCPoly::word(vec![Integ, Func(iu), Func(v), Integ]))
        .sub(&NCPoly::word(vec![Integ, Func(u.clone()), Func(iv.clone()), Integ]))
        .add(&NCPoly::word(vec![Integ, Func(u), Integ, Func(iv)]));
    assert_eq!(s.len(), 4);
    assert!(s == expected || s == expected.neg(), "{}", s.render());
    assert!(residue(&set.system, &s).unwrap().0.is_zero());
}

#[test]
fn single_section_rule_has_no_ambiguities() {
    let rules = operator_rules::<Fhat>().into_iter().filter(|r| r.name == "section").collect();
    let set = build_parametrized_system();
    let report = check_system(&RewriteSystem::new(rules).unwrap(), &set.generic, 0).unwrap();
    assert!(report.forks.is_empty());
    assert!(report.success());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn substituted_forks_reduce_to_zero(seed in any::<u64>()) {
        let mut r = rng(seed);
        let set = build_parametrized_system();
        let concrete = operator_system::<CoeffFunction>();
        let funcs = [rand_coeff(&mut r), rand_coeff(&mut r), rand_coeff(&mut r)];
        let pts = [Gauss::zero(), Gauss::one(), Gauss::ratio(1, 2)];
        let points = [pts.choose(&mut r).unwrap().clone(), pts.choose(&mut r).unwrap().clone(), pts.choose(&mut r).unwrap().clone()];
        for amb in set.system.find_ambiguities(&set.generic) {
            let s = substitute_generic(&s_polynomial(&amb), &funcs, &points);
            let (res, _) = residue(&concrete, &s).unwrap();
            prop_assert!(res.is_zero(), "{}/{}: {}", amb.sigma, amb.tau, res.render());
        }
    }
}

#[test]
fn substitution_maps_generic_characters_to_points() {
    let set = build_parametrized_system();
    let p = NCPoly::letter(Letter::Char(set.generic.chars[1].clone()));
    let s = substitute_generic(&p, &[CoeffFunction::x(), CoeffFunction::x(), CoeffFunction::x()], &[Gauss::zero(), Gauss::one(), Gauss::one()]);
    assert_eq!(s, NCPoly::letter(Letter::Char(CharSym::at(Gauss::one()))));
}
