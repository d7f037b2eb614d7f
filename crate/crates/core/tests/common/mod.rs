//! Seeded random generators shared by the property tests.
#![allow(dead_code)]

use greenop_core::boundary::{constant_coeff_fundsys, is_regular, BoundaryProblem, DiffOperator};
use greenop_core::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra, Scalar};
use greenop_core::intdiffop::BoundaryCondition;
use greenop_core::intdiffpoly::Poly;
use greenop_core::ncreduce::{Letter, NCPoly, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type R = ChaCha8Rng;

pub fn rng(seed: u64) -> R {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_scalar(r: &mut R) -> Scalar {
    let n = r.gen_range(-4..=4);
    let d = r.gen_range(1..=3);
    Scalar::ratio(n, d)
}

fn nonzero_scalar(r: &mut R) -> Scalar {
    loop {
        let s = small_scalar(r);
        if !s.is_zero() {
            return s;
        }
    }
}

/// A random element of `K[x]` of degree at most 3.
pub fn rand_poly(r: &mut R) -> CoeffFunction {
    let mut f = CoeffFunction::zero();
    for k in 0..=r.gen_range(0..=3) {
        f = f.plus(&CoeffFunction::monomial(small_scalar(r), k, Gauss::zero()));
    }
    f
}

/// A random exponential polynomial with frequencies in `{0, ±1, 2, i, 1/2}`.
pub fn rand_exppoly(r: &mut R) -> CoeffFunction {
    let freqs = [Gauss::zero(), Gauss::one(), Gauss::int(-1), Gauss::int(2), Gauss::i(), Gauss::ratio(1, 2)];
    let mut f = CoeffFunction::zero();
    for _ in 0..r.gen_range(1..=3) {
        let k = r.gen_range(0..=2);
        let lambda = freqs.choose(r).unwrap().clone();
        f = f.plus(&CoeffFunction::monomial(small_scalar(r), k, lambda));
    }
    f
}

/// A nonzero random function, polynomial or exponential.
pub fn rand_coeff(r: &mut R) -> CoeffFunction {
    loop {
        let f = if r.gen_bool(0.5) { rand_poly(r) } else { rand_exppoly(r) };
        if !f.is_zero() {
            return f;
        }
    }
}

pub fn rand_letter(r: &mut R) -> Letter<CoeffFunction> {
    match r.gen_range(0..6) {
        0 | 1 => Letter::Deriv,
        2 | 3 => Letter::Integ,
        4 => Letter::Char(if r.gen_bool(0.5) { CharSym::eval0() } else { CharSym::at(Gauss::one()) }),
        _ => Letter::Func(rand_poly_nonzero(r)),
    }
}

fn rand_poly_nonzero(r: &mut R) -> CoeffFunction {
    loop {
        let f = rand_poly(r);
        if !f.is_zero() {
            return f;
        }
    }
}

pub fn rand_word(r: &mut R, max_len: usize) -> Word<CoeffFunction> {
    (0..r.gen_range(1..=max_len)).map(|_| rand_letter(r)).collect()
}

/// A random operator: a short sum of random words.
pub fn rand_operator(r: &mut R) -> NCPoly<CoeffFunction> {
    let mut p = NCPoly::zero();
    for _ in 0..r.gen_range(1..=3) {
        p = p.add(&NCPoly::monomial(nonzero_scalar(r), rand_word(r, 5)));
    }
    p
}

/// A random element of `F{u}` built from `u`, its derivatives, products and integrals.
pub fn rand_idp(r: &mut R) -> Poly {
    fn atom(r: &mut R, depth: u32) -> Poly {
        match r.gen_range(0..if depth == 0 { 3 } else { 5 }) {
            0 => Poly::var(r.gen_range(0..=2)),
            1 => Poly::from_coeff(&rand_poly(r)),
            2 => Poly::var(r.gen_range(0..=1)).mul(&Poly::var(r.gen_range(0..=1))),
            3 => atom(r, depth - 1).integrate(),
            _ => atom(r, depth - 1).mul(&atom(r, depth - 1)),
        }
    }
    let mut p = Poly::zero();
    for _ in 0..r.gen_range(1..=2) {
        p = p.add(&atom(r, 2).scale(&small_scalar(r)));
    }
    p
}

/// A constant-coefficient operator of the given order with roots drawn from `{-1, 0, 1, 2}`.
pub fn rand_const_op(r: &mut R, order: usize) -> DiffOperator {
    let roots: Vec<Gauss> = (0..order).map(|_| Gauss::int(r.gen_range(-1..=2))).collect();
    DiffOperator::from_roots(&roots).unwrap()
}

/// A local or Stieltjes condition of order below `n`.
pub fn rand_condition(r: &mut R, n: usize) -> BoundaryCondition<CoeffFunction> {
    let mut b = BoundaryCondition::zero();
    let at = |r: &mut R| if r.gen_bool(0.5) { CharSym::eval0() } else { CharSym::at(Gauss::one()) };
    for _ in 0..r.gen_range(1..=2) {
        let phi = at(r);
        b.add_local(&phi, r.gen_range(0..n as u32), &nonzero_scalar(r));
    }
    if r.gen_bool(0.25) {
        b.add_global(&CharSym::at(Gauss::one()), &rand_poly_nonzero(r));
    }
    b
}

/// A regular problem of order `n` with a constant-coefficient operator.
pub fn rand_regular_problem(r: &mut R, n: usize) -> BoundaryProblem {
    loop {
        let op = rand_const_op(r, n);
        let conds = (0..n).map(|_| rand_condition(r, n)).collect();
        let Ok(p) = BoundaryProblem::new(op, conds) else { continue };
        let u = constant_coeff_fundsys(&p.op).unwrap();
        if is_regular(&p, &u) {
            return p;
        }
    }
}
