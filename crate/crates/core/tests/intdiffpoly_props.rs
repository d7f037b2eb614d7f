mod common;

use common::{rand_idp, rand_poly, rng};
use greenop_core::coeffalg::IntDiffAlgebra;
use greenop_core::intdiffpoly::Poly;
use proptest::prelude::*;

fn p(s: &str) -> Poly {
    Poly::parse(s).unwrap()
}

/// `I(a1*I(a2*…))` with integrands `u^2, u^3, …` starting at `u^first`.
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

#[test]
fn shuffle_counts() {
    assert_eq!(p(&nest(2, 2)).mul(&p(&nest(10, 1))).len(), 3);
    for m in 1..=3 {
        for n in 1..=3 {
            let prod = p(&nest(2, m)).mul(&p(&nest(10, n)));
            assert_eq!(prod.len(), binomial(m + n, n), "m={} n={}", m, n);
        }
    }
}

#[test]
fn integration_by_parts() {
    assert_eq!(p("u*u'").integrate(), p("(1/2)*u^2 - (1/2)*u0^2"));
    assert_eq!(p("u'").integrate(), p("u - u0"));
    assert_eq!(p("u'^2").integrate().render(), "I(u'^2)");
}

#[test]
fn nested_term_expansion() {
    let lhs = p("(4*u*u'*I((x+3)*u'^3))*(u'*I(u''^2)) + I(x^6*u*u''^5*I((x^2+5*x)*u^3*u'^2*I(u)))");
    let rhs = p(concat!(
        "4*u*u'^2*I(x*u'^3*I(u''^2)) + 4*u*u'^2*I(u''^2*I(x*u'^3)) + 12*u*u'^2*I(u'^3*I(u''^2)) + 12*u*u'^2*I(u''^2*I(u'^3))",
        " + I(x^6*u*u''^5*I(x^2*u^3*u'^2*I(u))) + 5*I(x^6*u*u''^5*I(x*u^3*u'^2*I(u)))"
    ));
    assert_eq!(lhs, rhs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivation_inverts_integration(seed in any::<u64>()) {
        let q = rand_idp(&mut rng(seed));
        prop_assert_eq!(q.integrate().derive(), q);
    }

    #[test]
    fn evaluation_is_the_projector(seed in any::<u64>()) {
        let q = rand_idp(&mut rng(seed));
        prop_assert_eq!(q.evaluate(), q.sub(&q.derive().integrate()));
        prop_assert!(q.evaluate().derive().is_zero());
    }

    #[test]
    fn algebra_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (rand_idp(&mut r), rand_idp(&mut r), rand_idp(&mut r));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).derive(), a.derive().mul(&b).add(&a.mul(&b.derive())));
        prop_assert_eq!(a.mul(&b).evaluate(), a.evaluate().mul(&b.evaluate()));
    }

    #[test]
    fn baxter_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (rand_idp(&mut r), rand_idp(&mut r));
        let lhs = a.integrate().mul(&b.integrate());
        let rhs = a.mul(&b.integrate()).integrate().add(&b.mul(&a.integrate()).integrate());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (rand_idp(&mut r), rand_idp(&mut r));
        let f = rand_poly(&mut r);
        let s = |q: &Poly| q.substitute_fn(&f);
        prop_assert_eq!(s(&a.mul(&b)), s(&a).mul(&s(&b)));
        prop_assert_eq!(s(&a.add(&b)), s(&a).add(&s(&b)));
        prop_assert_eq!(s(&a.derive()), s(&a).derive());
        prop_assert_eq!(s(&a.integrate()), s(&a).integrate());
        prop_assert_eq!(s(&a.evaluate()), s(&a).evaluate());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let q = rand_idp(&mut rng(seed));
        prop_assert_eq!(p(&q.render()), q);
    }
}
