mod common;

use common::{rand_coeff, rand_exppoly, rand_poly, rng, R};
use greenop_core::coeffalg::parse::parse_function;
use greenop_core::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra};
use proptest::prelude::*;

type F = CoeffFunction;

fn pair(seed: u64, exp: bool) -> (F, F) {
    let mut r: R = rng(seed);
    if exp {
        (rand_exppoly(&mut r), rand_exppoly(&mut r))
    } else {
        (rand_poly(&mut r), rand_poly(&mut r))
    }
}

fn int(f: &F) -> F {
    f.integrate()
}

fn d(f: &F) -> F {
    f.derive()
}

fn e(f: &F) -> F {
    f.evaluate()
}

fn check_axioms(f: &F, g: &F) -> Result<(), TestCaseError> {
    prop_assert_eq!(d(&int(f)), f.clone());
    let lhs = int(&d(f)).mul(&int(&d(g))).add(&int(&d(&f.mul(g))));
    let rhs = int(&d(f)).mul(g).add(&f.mul(&int(&d(g))));
    prop_assert_eq!(lhs, rhs);
    prop_assert_eq!(f.mul(&int(g)), int(&f.mul(g)).add(&int(&d(f).mul(&int(g)))));
    prop_assert_eq!(int(&f.mul(&d(g))), f.mul(g).sub(&int(&d(f).mul(g))).sub(&e(f).mul(&e(g))));
    prop_assert_eq!(int(f).mul(&int(g)), int(&f.mul(&int(g))).add(&int(&g.mul(&int(f)))));
    prop_assert_eq!(e(&f.mul(g)), e(f).mul(&e(g)));
    prop_assert!(e(&int(f)).is_zero());
    prop_assert!(d(&e(f)).is_zero());
    prop_assert_eq!(e(f), f.sub(&int(&d(f))));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn polynomial_axioms(seed in any::<u64>()) {
        let (f, g) = pair(seed, false);
        check_axioms(&f, &g)?;
    }

    #[test]
    fn exponential_axioms(seed in any::<u64>()) {
        let (f, g) = pair(seed, true);
        check_axioms(&f, &g)?;
    }

    #[test]
    fn point_evaluation_is_multiplicative(seed in any::<u64>()) {
        let (f, g) = pair(seed, true);
        let one = CharSym::at(Gauss::one());
        prop_assert_eq!(f.mul(&g).char_value(&one), f.char_value(&one).mul(&g.char_value(&one)));
    }

    #[test]
    fn ring_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g, h) = (rand_exppoly(&mut r), rand_exppoly(&mut r), rand_exppoly(&mut r));
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
        prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
        prop_assert_eq!(f.mul(&g), g.mul(&f));
        prop_assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn canonical_form_has_no_zero_terms(seed in any::<u64>()) {
        let (f, g) = pair(seed, true);
        for h in [f.add(&g), f.mul(&g), d(&f), int(&g), f.sub(&f)] {
            prop_assert!(h.terms().all(|(_, c)| !c.is_zero()));
        }
    }

    #[test]
    fn constants_are_the_kernel_of_the_derivation(seed in any::<u64>()) {
        let f = rand_coeff(&mut rng(seed));
        prop_assert_eq!(d(&f).is_zero(), f.constant_value().is_some());
    }

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let f = rand_coeff(&mut rng(seed));
        prop_assert_eq!(parse_function(&f.render()).unwrap(), f);
    }
}

#[test]
fn worked_values() {
    let p = |s: &str| parse_function(s).unwrap();
    assert_eq!(p("x").mul(&p("x")), p("x^2"));
    assert_eq!(p("exp(x)").mul(&p("exp(-x)")), F::one());
    assert_eq!(d(&p("x*exp(x)")), p("exp(x) + x*exp(x)"));
    assert_eq!(int(&p("exp(x)")), p("exp(x) - 1"));
    assert_eq!(int(&p("x*exp(x)")), p("x*exp(x) - exp(x) + 1"));
    assert_eq!(p("x - 1").char_value(&CharSym::at(Gauss::one())), F::zero());
    assert_eq!(p("exp(2*x)").evaluate_at(&Gauss::one()).render(), "exp(2)");
    assert!(p("2*exp(3*x)").is_invertible());
    assert!(!p("x").is_invertible());
    assert_eq!(p("2*exp(3*x)").invert().unwrap(), p("(1/2)*exp(-3*x)"));
}
