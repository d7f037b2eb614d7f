//! Adjoins symbolic character values `φ(a)` as new constants.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeffalg::{CharSym, IntDiffAlgebra, Scalar};

/// A product `Π φ(a)^e` of character values on multiplicative atoms.
pub type CharMonomial<C> = BTreeMap<(CharSym, C), u32>;

/// Elements `Σ c_m·m` with `c_m ∈ C` and `m` a character monomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CharExt<C: IntDiffAlgebra> {
    terms: BTreeMap<CharMonomial<C>, C>,
}

impl<C: IntDiffAlgebra> CharExt<C> {
    pub fn lift(c: &C) -> Self {
        let mut out = Self::zero();
        out.add_term(BTreeMap::new(), c.clone());
        out
    }

    /// The symbol `φ(a)` for an atom `a`.
    pub fn value_symbol(ch: &CharSym, atom: &C) -> Self {
        let mut m = BTreeMap::new();
        m.insert((ch.clone(), atom.clone()), 1);
        let mut out = Self::zero();
        out.add_term(m, C::one());
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CharMonomial<C>, &C)> {
        self.terms.iter()
    }

    fn add_term(&mut self, m: CharMonomial<C>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    fn monomial_mul(a: &CharMonomial<C>, b: &CharMonomial<C>) -> CharMonomial<C> {
        let mut out = a.clone();
        for (k, e) in b {
            *out.entry(k.clone()).or_insert(0) += e;
        }
        out
    }

    fn render_monomial(m: &CharMonomial<C>, latex: bool) -> String {
        m.iter()
            .map(|((ch, a), e)| {
                let base = if latex { format!("{}\\left({}\\right)", ch.latex(), a.latex()) } else { format!("{}({})", ch.render(), a.render()) };
                if *e == 1 {
                    base
                } else {
                    format!("{}^{}", base, e)
                }
            })
            .collect::<Vec<_>>()
            .join(if latex { " " } else { "*" })
    }

    fn render_with(&self, latex: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.is_empty() {
                    if latex {
                        c.latex()
                    } else {
                        c.render()
                    }
                } else if c.is_one() {
                    Self::render_monomial(m, latex)
                } else {
                    let cf = if latex { format!("\\left({}\\right)", c.latex()) } else { c.render_factor() };
                    format!("{}{}{}", cf, if latex { " " } else { "*" }, Self::render_monomial(m, latex))
                }
            })
            .collect();
        let mut out = String::new();
        for (i, part) in parts.iter().enumerate() {
            match (i, part.strip_prefix('-')) {
                (0, _) => out.push_str(part),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                (_, None) => {
                    out.push_str(" + ");
                    out.push_str(part);
                }
            }
        }
        out
    }
}

impl<C: IntDiffAlgebra> IntDiffAlgebra for CharExt<C> {
    fn zero() -> Self {
        CharExt { terms: BTreeMap::new() }
    }
    fn one() -> Self {
        Self::lift(&C::one())
    }
    fn from_scalar(s: &Scalar) -> Self {
        Self::lift(&C::from_scalar(s))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(Self::monomial_mul(ma, mb), ca.mul(cb));
            }
        }
        out
    }
    fn scale(&self, s: &Scalar) -> Self {
        self.map(|c| c.scale(s))
    }
    fn derive(&self) -> Self {
        self.map(|c| c.derive())
    }
    fn integrate(&self) -> Self {
        self.map(|c| c.integrate())
    }
    fn evaluate(&self) -> Self {
        self.map(|c| c.evaluate())
    }
    /// Generic characters split basis words into atoms and keep their values symbolic.
    fn char_value(&self, ch: &CharSym) -> Self {
        if ch.is_eval0() {
            return self.evaluate();
        }
        if let CharSym::Point(_) = ch {
            return self.map(|c| c.char_value(ch));
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (s, b) in c.basis_expand() {
                let (fixed, atoms) = C::char_split(&b);
                let mut value = Self::lift(&fixed.scale(&s));
                for a in atoms {
                    value = value.mul(&Self::value_symbol(ch, &a));
                }
                let mut mono = Self::zero();
                mono.add_term(m.clone(), C::one());
                out = out.add(&value.mul(&mono));
            }
        }
        out
    }
    fn basis_expand(&self) -> Vec<(Scalar, Self)> {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            for (s, b) in c.basis_expand() {
                let mut e = Self::zero();
                e.add_term(m.clone(), b);
                out.push((s, e));
            }
        }
        out
    }
    fn as_scalar(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        match self.terms.iter().next() {
            Some((m, c)) if self.terms.len() == 1 && m.is_empty() => c.as_scalar(),
            _ => None,
        }
    }
    fn char_split(word: &Self) -> (Self, Vec<Self>) {
        let Some((m, b)) = word.terms.iter().next() else { return (Self::one(), Vec::new()) };
        let (fixed, atoms) = C::char_split(b);
        let mut f = Self::zero();
        f.add_term(m.clone(), fixed);
        (f, atoms.iter().map(Self::lift).collect())
    }
    fn render(&self) -> String {
        self.render_with(false)
    }
    fn latex(&self) -> String {
        self.render_with(true)
    }
    fn is_constant(&self) -> bool {
        self.terms.values().all(|c| c.is_constant())
    }
}

impl<C: IntDiffAlgebra> fmt::Display for CharExt<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
