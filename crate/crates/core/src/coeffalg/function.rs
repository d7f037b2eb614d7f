//! Exponential polynomials `Σ c·x^k·e^{λx}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::gauss::Gauss;
use super::scalar::Scalar;
use super::{CharSym, IntDiffAlgebra};
use crate::error::Error;

/// Basis word `x^k·e^{λx}`, ordered by `k` and then by `λ`.
pub type BasisKey = (u32, Gauss);

/// An element of `K[x, e^{Kx}]` in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct CoeffFunction {
    terms: BTreeMap<BasisKey, Scalar>,
}

impl CoeffFunction {
    pub fn zero() -> Self {
        CoeffFunction::default()
    }

    pub fn one() -> Self {
        CoeffFunction::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        CoeffFunction::monomial(c, 0, Gauss::zero())
    }

    pub fn int(n: i64) -> Self {
        CoeffFunction::constant(Scalar::int(n))
    }

    pub fn x() -> Self {
        CoeffFunction::monomial(Scalar::one(), 1, Gauss::zero())
    }

    pub fn x_pow(k: u32) -> Self {
        CoeffFunction::monomial(Scalar::one(), k, Gauss::zero())
    }

    /// `e^{λx}`.
    pub fn exp_lin(lambda: Gauss) -> Self {
        CoeffFunction::monomial(Scalar::one(), 0, lambda)
    }

    pub fn monomial(c: Scalar, k: u32, lambda: Gauss) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((k, lambda), c);
        }
        CoeffFunction { terms }
    }

    /// Builds from `(coefficient, k, λ)` triples, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Scalar, u32, Gauss)>>(it: I) -> Self {
        let mut f = CoeffFunction::zero();
        for (c, k, l) in it {
            f.add_term((k, l), c);
        }
        f
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&BasisKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: u32, lambda: &Gauss) -> Scalar {
        self.terms.get(&(k, lambda.clone())).cloned().unwrap_or_else(Scalar::zero)
    }

    fn add_term(&mut self, key: BasisKey, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&key) {
            Some(v) => {
                *v = v.add(&c);
                v.is_zero()
            }
            None => {
                self.terms.insert(key.clone(), c);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn plus(&self, o: &CoeffFunction) -> CoeffFunction {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }

    pub fn minus(&self, o: &CoeffFunction) -> CoeffFunction {
        self.plus(&o.negate())
    }

    pub fn negate(&self) -> CoeffFunction {
        CoeffFunction { terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect() }
    }

    pub fn times(&self, o: &CoeffFunction) -> CoeffFunction {
        let mut r = CoeffFunction::zero();
        for ((k1, l1), c1) in &self.terms {
            for ((k2, l2), c2) in &o.terms {
                r.add_term((k1 + k2, l1 + l2), c1.mul(c2));
            }
        }
        r
    }

    pub fn scaled(&self, s: &Scalar) -> CoeffFunction {
        if s.is_zero() {
            return CoeffFunction::zero();
        }
        CoeffFunction { terms: self.terms.iter().map(|(k, c)| (k.clone(), c.mul(s))).collect() }
    }

    pub fn pow(&self, e: u32) -> CoeffFunction {
        let mut acc = CoeffFunction::one();
        for _ in 0..e {
            acc = acc.times(self);
        }
        acc
    }

    pub fn derivative(&self) -> CoeffFunction {
        let mut r = CoeffFunction::zero();
        for ((k, l), c) in &self.terms {
            if *k > 0 {
                r.add_term((k - 1, l.clone()), c.mul_gauss(&Gauss::int(*k as i64)));
            }
            if !l.is_zero() {
                r.add_term((*k, l.clone()), c.mul_gauss(l));
            }
        }
        r
    }

    /// Antiderivative with value 0 at the initialization point 0.
    pub fn integral(&self) -> CoeffFunction {
        let mut r = CoeffFunction::zero();
        for ((k, l), c) in &self.terms {
            if l.is_zero() {
                r.add_term((k + 1, Gauss::zero()), c.mul_gauss(&Gauss::ratio(1, *k as i64 + 1)));
                continue;
            }
            let linv = l.inv();
            // falling factorial k!/(k-j)!, sign (-1)^j, power λ^{-(j+1)}
            let mut ff = BigInt::from(1);
            let mut lp = linv.clone();
            for j in 0..=*k {
                if j > 0 {
                    ff *= BigInt::from(k - j + 1);
                    lp = &lp * &linv;
                }
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let factor = &Gauss::from_rational(BigRational::from_integer(ff.clone() * sign)) * &lp;
                r.add_term((k - j, l.clone()), c.mul_gauss(&factor));
                if j == *k {
                    r.add_term((0, Gauss::zero()), c.mul_gauss(&factor).neg());
                }
            }
        }
        r
    }

    /// Value at the point `c`: `Σ coef·c^k·exp(λc)`.
    pub fn evaluate_at(&self, c: &Gauss) -> Scalar {
        let mut acc = Scalar::zero();
        for ((k, l), coef) in &self.terms {
            let ck = c.pow(*k);
            if ck.is_zero() {
                continue;
            }
            let e = l * c;
            let ev = if e.is_zero() { Scalar::one() } else { Scalar::exp(e) };
            acc = acc.add(&coef.mul(&ev).mul_gauss(&ck));
        }
        acc
    }

    /// Units are exactly the single terms `c·e^{λx}`.
    pub fn is_invertible(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().map(|(k, _)| *k == 0).unwrap_or(false)
    }

    pub fn invert(&self) -> Result<CoeffFunction, Error> {
        if !self.is_invertible() {
            return Err(Error::NotAUnit(self.render()));
        }
        let ((_, l), c) = self.terms.iter().next().expect("one term");
        Ok(CoeffFunction::monomial(c.inv(), 0, -l))
    }

    /// Canonical terms in ascending basis order.
    pub fn basis_terms(&self) -> Vec<(Scalar, BasisKey)> {
        self.terms.iter().map(|(k, c)| (c.clone(), k.clone())).collect()
    }

    pub fn constant_value(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            if let Some(((0, l), c)) = self.terms.iter().next() {
                if l.is_zero() {
                    return Some(c.clone());
                }
            }
        }
        None
    }

    /// Largest power of `x` present.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(k, _)| *k).max()
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|(_, l)| l.is_zero())
    }

    fn basis_text(k: u32, l: &Gauss) -> String {
        let mut parts = Vec::new();
        match k {
            0 => {}
            1 => parts.push("x".to_string()),
            _ => parts.push(format!("x^{}", k)),
        }
        if !l.is_zero() {
            parts.push(format!("exp({})", lambda_text(l)));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    fn basis_latex(k: u32, l: &Gauss) -> String {
        let mut parts = Vec::new();
        match k {
            0 => {}
            1 => parts.push("x".to_string()),
            _ => parts.push(format!("x^{{{}}}", k)),
        }
        if !l.is_zero() {
            let lt = if l.is_one() {
                String::new()
            } else if (-l).is_one() {
                "-".to_string()
            } else if l.is_atomic() || l.is_real() {
                l.latex()
            } else {
                format!("({})", l.latex())
            };
            parts.push(format!("e^{{{}x}}", lt));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }

    fn render_terms(&self, basis: impl Fn(u32, &Gauss) -> String, coef: impl Fn(&Scalar) -> String, times: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, ((k, l), c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = if neg { c.neg() } else { c.clone() };
            let is_unit_word = *k == 0 && l.is_zero();
            let body = if is_unit_word {
                coef(&a)
            } else if a.is_one() {
                basis(*k, l)
            } else {
                format!("{}{}{}", coef(&a), times, basis(*k, l))
            };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    pub fn render(&self) -> String {
        self.render_terms(CoeffFunction::basis_text, |c| c.render_factor(), "*")
    }

    pub fn latex(&self) -> String {
        self.render_terms(
            CoeffFunction::basis_latex,
            |c| {
                if c.as_gauss().map(|g| g.is_atomic()).unwrap_or(false) {
                    c.latex()
                } else {
                    format!("\\left({}\\right)", c.latex())
                }
            },
            " ",
        )
    }
}

fn lambda_text(l: &Gauss) -> String {
    if l.is_one() {
        "x".to_string()
    } else if (-l).is_one() {
        "-x".to_string()
    } else if l.is_atomic() {
        format!("{}*x", l.render())
    } else if l.is_negative() && (-l).is_atomic() {
        format!("-{}*x", (-l).render())
    } else {
        format!("({})*x", l.render())
    }
}

impl fmt::Display for CoeffFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl IntDiffAlgebra for CoeffFunction {
    fn zero() -> Self {
        CoeffFunction::zero()
    }
    fn one() -> Self {
        CoeffFunction::one()
    }
    fn from_scalar(s: &Scalar) -> Self {
        CoeffFunction::constant(s.clone())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        self.plus(o)
    }
    fn neg(&self) -> Self {
        self.negate()
    }
    fn mul(&self, o: &Self) -> Self {
        self.times(o)
    }
    fn scale(&self, s: &Scalar) -> Self {
        self.scaled(s)
    }
    fn derive(&self) -> Self {
        self.derivative()
    }
    fn integrate(&self) -> Self {
        self.integral()
    }
    fn evaluate(&self) -> Self {
        CoeffFunction::constant(self.evaluate_at(&Gauss::zero()))
    }
    fn char_value(&self, ch: &CharSym) -> Self {
        match ch {
            CharSym::Point(c) => CoeffFunction::constant(self.evaluate_at(c)),
            CharSym::Generic(name) => {
                panic!("generic character {} has no value on exponential polynomials", name)
            }
        }
    }
    fn basis_expand(&self) -> Vec<(Scalar, Self)> {
        self.terms.iter().map(|((k, l), c)| (c.clone(), CoeffFunction::monomial(Scalar::one(), *k, l.clone()))).collect()
    }
    fn as_scalar(&self) -> Option<Scalar> {
        self.constant_value()
    }
    fn char_split(word: &Self) -> (Self, Vec<Self>) {
        let mut atoms = Vec::new();
        if let Some(((k, l), _)) = word.terms.iter().next() {
            for _ in 0..*k {
                atoms.push(CoeffFunction::x());
            }
            if !l.is_zero() {
                atoms.push(CoeffFunction::exp_lin(l.clone()));
            }
        }
        (CoeffFunction::one(), atoms)
    }
    fn render(&self) -> String {
        CoeffFunction::render(self)
    }
    fn latex(&self) -> String {
        CoeffFunction::latex(self)
    }
    fn leading_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.terms.keys().next_back().cmp(&o.terms.keys().next_back())
    }
}
