//! Integro-differential operators: the rewrite system and normal forms `T + G + B`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::coeffalg::parse::{function_expr, Cursor, Tok};
use crate::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra, Scalar};
use crate::error::{Error, Result};
use crate::ncreduce::{Bindings, Letter, NCPoly, Pat, RewriteSystem, RuleSchema, Word};

/// An unreduced operator expression.
pub type OperatorPoly<C> = NCPoly<C>;

fn f_hole<C>(name: &'static str) -> Pat<C> {
    Pat::Func { name, optional: false }
}

fn f_opt<C>(name: &'static str) -> Pat<C> {
    Pat::Func { name, optional: true }
}

fn c_hole<C>(name: &'static str) -> Pat<C> {
    Pat::Char { name }
}

fn lit<C>(l: Letter<C>) -> Pat<C> {
    Pat::Lit(l)
}

fn w<C: IntDiffAlgebra>(letters: Vec<Letter<C>>) -> NCPoly<C> {
    NCPoly::word(letters)
}

/// The nine rule schemas, in declaration order.
pub fn operator_rules<C: IntDiffAlgebra>() -> Vec<RuleSchema<C>> {
    use Letter::{Char, Deriv, Func, Integ};
    vec![
        RuleSchema::new("func-mult", vec![f_hole("f"), f_hole("g")], |b: &Bindings<C>| NCPoly::func(b.func("f").mul(b.func("g")))),
        RuleSchema::new("leibniz", vec![lit(Deriv), f_hole("f")], |b: &Bindings<C>| {
            let f = b.func("f");
            w(vec![Func(f.clone()), Deriv]).add(&NCPoly::func(f.derive()))
        }),
        RuleSchema::new("deriv-char", vec![lit(Deriv), c_hole("phi")], |_: &Bindings<C>| NCPoly::zero()),
        RuleSchema::new("section", vec![lit(Deriv), lit(Integ)], |_: &Bindings<C>| NCPoly::one()),
        RuleSchema::new("char-eval", vec![c_hole("phi"), f_hole("f")], |b: &Bindings<C>| {
            let phi = b.char("phi");
            w(vec![Func(b.func("f").char_value(phi)), Char(phi.clone())])
        }),
        RuleSchema::new("char-absorb", vec![c_hole("phi"), c_hole("psi")], |b: &Bindings<C>| NCPoly::letter(Char(b.char("psi").clone()))),
        RuleSchema::new("baxter", vec![lit(Integ), f_opt("f"), lit(Integ)], |b: &Bindings<C>| {
            let f = b.func("f");
            let i = f.integrate();
            w(vec![Func(i.clone()), Integ]).sub(&w(vec![Integ, Func(i)]))
        }),
        RuleSchema::new("int-deriv", vec![lit(Integ), f_opt("f"), lit(Deriv)], |b: &Bindings<C>| {
            let f = b.func("f");
            NCPoly::func(f.clone()).sub(&w(vec![Integ, Func(f.derive())])).sub(&w(vec![Func(f.evaluate()), Letter::eval0()]))
        }),
        RuleSchema::new("int-char", vec![lit(Integ), f_opt("f"), c_hole("phi")], |b: &Bindings<C>| {
            w(vec![Func(b.func("f").integrate()), Char(b.char("phi").clone())])
        }),
    ]
}

/// Ground simplification of one monomial: scalar functions fold into the
/// coefficient, other constants move to the front, zero functions annihilate,
/// and `e∫ = 0`.
pub fn ground_simplify<C: IntDiffAlgebra>(c: &Scalar, word: &Word<C>) -> NCPoly<C> {
    let mut coeff = c.clone();
    let mut constant = C::one();
    let mut out: Word<C> = Vec::with_capacity(word.len());
    for l in word {
        if let Letter::Func(f) = l {
            if f.is_zero() {
                return NCPoly::zero();
            }
            if let Some(s) = f.as_scalar() {
                coeff = coeff.mul(&s);
                continue;
            }
            if f.is_constant() {
                constant = constant.mul(f);
                continue;
            }
        }
        out.push(l.clone());
    }
    if !constant.is_one() {
        match out.first_mut() {
            Some(Letter::Func(g)) => *g = constant.mul(g),
            _ => out.insert(0, Letter::Func(constant)),
        }
    }
    let killed = out.windows(2).any(|p| matches!((&p[0], &p[1]), (Letter::Char(ch), Letter::Integ) if ch.is_eval0()));
    if killed {
        return NCPoly::zero();
    }
    NCPoly::monomial(coeff, out)
}

/// The operator rewrite system with its ground simplifier.
pub fn operator_system<C: IntDiffAlgebra>() -> RewriteSystem<C> {
    RewriteSystem::new(operator_rules()).expect("the operator rules have no inclusion ambiguities").with_ground(ground_simplify::<C>)
}

/// Splits every function letter over the basis.
pub fn basis_expand_poly<C: IntDiffAlgebra>(p: &NCPoly<C>) -> NCPoly<C> {
    let mut out = NCPoly::zero();
    for (word, c) in p.terms() {
        let mut partial: Vec<(Scalar, Word<C>)> = vec![(c.clone(), Vec::new())];
        for l in word {
            match l {
                Letter::Func(f) => {
                    let mut next = Vec::new();
                    for (s, pw) in &partial {
                        for (t, b) in f.basis_expand() {
                            let mut nw = pw.clone();
                            if !b.is_one() {
                                nw.push(Letter::Func(b));
                            }
                            next.push((s.mul(&t), nw));
                        }
                    }
                    partial = next;
                }
                other => {
                    for (_, pw) in partial.iter_mut() {
                        pw.push(other.clone());
                    }
                }
            }
        }
        for (s, pw) in partial {
            out.add_term(pw, s);
        }
    }
    out
}

/// The per-character data `Σ a_i φ∂^i + φ∫g`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CondPart<C> {
    pub local: BTreeMap<u32, Scalar>,
    pub global: C,
}

impl<C: IntDiffAlgebra> CondPart<C> {
    fn empty() -> Self {
        CondPart { local: BTreeMap::new(), global: C::zero() }
    }

    fn is_zero(&self) -> bool {
        self.local.is_empty() && self.global.is_zero()
    }
}

/// A Stieltjes boundary condition in normal form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BoundaryCondition<C> {
    parts: BTreeMap<CharSym, CondPart<C>>,
}

impl<C: IntDiffAlgebra> Default for BoundaryCondition<C> {
    fn default() -> Self {
        BoundaryCondition::zero()
    }
}

impl<C: IntDiffAlgebra> BoundaryCondition<C> {
    pub fn zero() -> Self {
        BoundaryCondition { parts: BTreeMap::new() }
    }

    /// `a·φ∂^i`.
    pub fn local(phi: CharSym, i: u32, a: Scalar) -> Self {
        let mut b = BoundaryCondition::zero();
        b.add_local(&phi, i, &a);
        b
    }

    /// `φ∫g`.
    pub fn global(phi: CharSym, g: C) -> Self {
        let mut b = BoundaryCondition::zero();
        b.add_global(&phi, &g);
        b
    }

    pub fn parts(&self) -> &BTreeMap<CharSym, CondPart<C>> {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    fn tidy(&mut self, phi: &CharSym) {
        if self.parts.get(phi).map(|p| p.is_zero()).unwrap_or(false) {
            self.parts.remove(phi);
        }
    }

    pub fn add_local(&mut self, phi: &CharSym, i: u32, a: &Scalar) {
        let part = self.parts.entry(phi.clone()).or_insert_with(CondPart::empty);
        let v = part.local.get(&i).map(|x| x.add(a)).unwrap_or_else(|| a.clone());
        if v.is_zero() {
            part.local.remove(&i);
        } else {
            part.local.insert(i, v);
        }
        self.tidy(phi);
    }

    pub fn add_global(&mut self, phi: &CharSym, g: &C) {
        if phi.is_eval0() {
            return;
        }
        let part = self.parts.entry(phi.clone()).or_insert_with(CondPart::empty);
        part.global = part.global.add(g);
        self.tidy(phi);
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (phi, p) in &o.parts {
            for (i, a) in &p.local {
                r.add_local(phi, *i, a);
            }
            r.add_global(phi, &p.global);
        }
        r
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut r = BoundaryCondition::zero();
        for (phi, p) in &self.parts {
            for (i, a) in &p.local {
                r.add_local(phi, *i, &a.mul(s));
            }
            r.add_global(phi, &p.global.scale(s));
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::int(-1))
    }

    /// The operator `Σ_φ (Σ a_i φ∂^i + φ∫g)`.
    pub fn to_poly(&self) -> NCPoly<C> {
        let mut p = NCPoly::zero();
        for (phi, part) in &self.parts {
            for (i, a) in &part.local {
                let mut word = vec![Letter::Char(phi.clone())];
                word.extend(std::iter::repeat_n(Letter::Deriv, *i as usize));
                p.add_term(word, a.clone());
            }
            if !part.global.is_zero() {
                p = p.add(&NCPoly::word(vec![Letter::Char(phi.clone()), Letter::Integ, Letter::Func(part.global.clone())]));
            }
        }
        basis_expand_poly(&operator_system::<C>().simplify(&p))
    }

    /// The value on `u`, as a constant element.
    pub fn apply(&self, u: &C) -> C {
        let mut acc = C::zero();
        for (phi, part) in &self.parts {
            for (i, a) in &part.local {
                let mut d = u.clone();
                for _ in 0..*i {
                    d = d.derive();
                }
                acc = acc.add(&d.char_value(phi).scale(a));
            }
            if !part.global.is_zero() {
                acc = acc.add(&part.global.mul(u).integrate().char_value(phi));
            }
        }
        acc
    }

    /// The characters appearing in the condition.
    pub fn characters(&self) -> Vec<CharSym> {
        self.parts.keys().cloned().collect()
    }

    /// The highest derivative order among local terms.
    pub fn max_order(&self) -> Option<u32> {
        self.parts.values().filter_map(|p| p.local.keys().next_back().copied()).max()
    }

    pub fn render(&self) -> String {
        let mut terms = Vec::new();
        for (phi, part) in &self.parts {
            for (i, a) in part.local.iter().rev() {
                terms.push(Term { coef: C::from_scalar(a), rest: with_derivs(vec![phi.render()], *i) });
            }
            if !part.global.is_zero() {
                let (k, g) = split_global(&C::one(), &part.global);
                let mut rest = vec![phi.render(), "A".to_string()];
                push_func(&mut rest, &g);
                terms.push(Term { coef: k, rest });
            }
        }
        join_terms(&terms)
    }

    pub fn latex(&self) -> String {
        let mut terms = Vec::new();
        for (phi, part) in &self.parts {
            for (i, a) in part.local.iter().rev() {
                terms.push(LatexTerm { coef: C::from_scalar(a), rest: latex_derivs(vec![phi.latex()], *i) });
            }
            if !part.global.is_zero() {
                let (k, g) = split_global(&C::one(), &part.global);
                let mut rest = vec![phi.latex(), "\\int".to_string()];
                push_func_latex(&mut rest, &g);
                terms.push(LatexTerm { coef: k, rest });
            }
        }
        join_latex(&terms)
    }
}

impl<C: IntDiffAlgebra> fmt::Display for BoundaryCondition<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// An operator in the normal form `Σ f_i∂^i + Σ f∫g + Σ f·β`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalOperator<C: IntDiffAlgebra> {
    diff: BTreeMap<u32, C>,
    /// Keyed by the basis word `g`; the value is the function `f` of `f∫g`.
    int: BTreeMap<C, C>,
    /// Keyed by the basis word `f`.
    bound: BTreeMap<C, BoundaryCondition<C>>,
}

impl<C: IntDiffAlgebra> Default for NormalOperator<C> {
    fn default() -> Self {
        NormalOperator::zero()
    }
}

impl<C: IntDiffAlgebra> NormalOperator<C> {
    pub fn zero() -> Self {
        NormalOperator { diff: BTreeMap::new(), int: BTreeMap::new(), bound: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        NormalOperator::function(C::one())
    }

    /// Multiplication by `f`.
    pub fn function(f: C) -> Self {
        NormalOperator::from_parts(BTreeMap::from([(0, f)]), Vec::new(), Vec::new())
    }

    pub fn from_parts(diff: BTreeMap<u32, C>, int: Vec<(C, C)>, bound: Vec<(C, BoundaryCondition<C>)>) -> Self {
        let mut p = NCPoly::zero();
        for (i, f) in diff {
            let mut word = vec![Letter::Func(f)];
            word.extend(std::iter::repeat_n(Letter::Deriv, i as usize));
            p.add_term(word, Scalar::one());
        }
        for (f, g) in int {
            p.add_term(vec![Letter::Func(f), Letter::Integ, Letter::Func(g)], Scalar::one());
        }
        for (f, b) in bound {
            p = p.add(&NCPoly::func(f).mul(&b.to_poly()));
        }
        partition(&operator_system::<C>().simplify(&p)).expect("parts are in normal form")
    }

    /// The differential operator `Σ c_i ∂^i`.
    pub fn differential(coeffs: &[C]) -> Self {
        NormalOperator::from_parts(coeffs.iter().cloned().enumerate().map(|(i, c)| (i as u32, c)).collect(), Vec::new(), Vec::new())
    }

    pub fn boundary(b: &BoundaryCondition<C>) -> Self {
        NormalOperator::from_parts(BTreeMap::new(), Vec::new(), vec![(C::one(), b.clone())])
    }

    pub fn is_zero(&self) -> bool {
        self.diff.is_empty() && self.int.is_empty() && self.bound.is_empty()
    }

    pub fn diff_part(&self) -> &BTreeMap<u32, C> {
        &self.diff
    }

    /// The pairs `(f, g)` of `Σ f∫g`, ordered by `g`.
    pub fn int_part(&self) -> Vec<(C, C)> {
        self.int.iter().map(|(g, f)| (f.clone(), g.clone())).collect()
    }

    /// The pairs `(f, β)` of `Σ f·β`, ordered by `f`.
    pub fn bound_part(&self) -> Vec<(C, BoundaryCondition<C>)> {
        self.bound.iter().map(|(f, b)| (f.clone(), b.clone())).collect()
    }

    pub fn order(&self) -> Option<u32> {
        self.diff.keys().next_back().copied()
    }

    /// The operator as a polynomial over the alphabet.
    pub fn flatten(&self) -> NCPoly<C> {
        let mut p = NCPoly::zero();
        for (i, f) in &self.diff {
            let mut word = vec![Letter::Func(f.clone())];
            word.extend(std::iter::repeat_n(Letter::Deriv, *i as usize));
            p = p.add(&NCPoly::word(word));
        }
        for (g, f) in &self.int {
            p = p.add(&NCPoly::word(vec![Letter::Func(f.clone()), Letter::Integ, Letter::Func(g.clone())]));
        }
        for (f, b) in &self.bound {
            p = p.add(&NCPoly::func(f.clone()).mul(&b.to_poly()));
        }
        basis_expand_poly(&operator_system::<C>().simplify(&p))
    }

    pub fn add(&self, o: &Self) -> Self {
        partition(&self.flatten().add(&o.flatten())).expect("sum of normal forms")
    }

    pub fn sub(&self, o: &Self) -> Self {
        partition(&self.flatten().sub(&o.flatten())).expect("difference of normal forms")
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        partition(&self.flatten().scale(s)).expect("multiple of a normal form")
    }

    pub fn multiply(&self, o: &Self) -> Result<Self> {
        normalize(&self.flatten().mul(&o.flatten()))
    }

    /// The action on a function.
    pub fn apply(&self, u: &C) -> C {
        let mut acc = C::zero();
        let mut d = u.clone();
        let top = self.order().unwrap_or(0);
        for i in 0..=top {
            if let Some(f) = self.diff.get(&i) {
                acc = acc.add(&f.mul(&d));
            }
            d = d.derive();
        }
        for (g, f) in &self.int {
            acc = acc.add(&f.mul(&g.mul(u).integrate()));
        }
        for (f, b) in &self.bound {
            acc = acc.add(&f.mul(&b.apply(u)));
        }
        acc
    }

    /// The three projections of the direct decomposition.
    pub fn decompose(&self) -> (Self, Self, Self) {
        (
            NormalOperator { diff: self.diff.clone(), int: BTreeMap::new(), bound: BTreeMap::new() },
            NormalOperator { diff: BTreeMap::new(), int: self.int.clone(), bound: BTreeMap::new() },
            NormalOperator { diff: BTreeMap::new(), int: BTreeMap::new(), bound: self.bound.clone() },
        )
    }

    /// The boundary condition `B` if the operator is `1·B`.
    pub fn as_condition(&self) -> Option<BoundaryCondition<C>> {
        if !self.diff.is_empty() || !self.int.is_empty() {
            return None;
        }
        match self.bound.len() {
            0 => Some(BoundaryCondition::zero()),
            1 => self.bound.get(&C::one()).cloned(),
            _ => None,
        }
    }

    fn terms(&self) -> Vec<Term<C>> {
        let mut terms = Vec::new();
        for (i, f) in self.diff.iter().rev() {
            terms.push(Term { coef: f.clone(), rest: with_derivs(Vec::new(), *i) });
        }
        for (g, f) in &self.int {
            let mut rest = vec!["A".to_string()];
            push_func(&mut rest, g);
            terms.push(Term { coef: f.clone(), rest });
        }
        for (f, b) in &self.bound {
            for (phi, part) in &b.parts {
                for (i, a) in part.local.iter().rev() {
                    terms.push(Term { coef: f.scale(a), rest: with_derivs(vec![phi.render()], *i) });
                }
                if !part.global.is_zero() {
                    let (k, g) = split_global(f, &part.global);
                    let mut rest = vec![phi.render(), "A".to_string()];
                    push_func(&mut rest, &g);
                    terms.push(Term { coef: k, rest });
                }
            }
        }
        terms
    }

    pub fn render(&self) -> String {
        join_terms(&self.terms())
    }

    pub fn latex(&self) -> String {
        let mut terms = Vec::new();
        for (i, f) in self.diff.iter().rev() {
            terms.push(LatexTerm { coef: f.clone(), rest: latex_derivs(Vec::new(), *i) });
        }
        for (g, f) in &self.int {
            let mut rest = vec!["\\int".to_string()];
            push_func_latex(&mut rest, g);
            terms.push(LatexTerm { coef: f.clone(), rest });
        }
        for (f, b) in &self.bound {
            for (phi, part) in &b.parts {
                for (i, a) in part.local.iter().rev() {
                    terms.push(LatexTerm { coef: f.scale(a), rest: latex_derivs(vec![phi.latex()], *i) });
                }
                if !part.global.is_zero() {
                    let (k, g) = split_global(f, &part.global);
                    let mut rest = vec![phi.latex(), "\\int".to_string()];
                    push_func_latex(&mut rest, &g);
                    terms.push(LatexTerm { coef: k, rest });
                }
            }
        }
        join_latex(&terms)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Json {
            diff: BTreeMap<String, String>,
            int: Vec<(String, String)>,
            boundary: Vec<(String, String)>,
        }
        let j = Json {
            diff: self.diff.iter().map(|(i, f)| (i.to_string(), f.render())).collect(),
            int: self.int.iter().map(|(g, f)| (f.render(), g.render())).collect(),
            boundary: self.bound.iter().map(|(f, b)| (f.render(), b.render())).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("serializable")
    }
}

impl<C: IntDiffAlgebra> fmt::Display for NormalOperator<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Partitions an irreducible, basis-expanded polynomial into `T + G + B`.
fn partition<C: IntDiffAlgebra>(p: &NCPoly<C>) -> Result<NormalOperator<C>> {
    let p = basis_expand_poly(p);
    let mut n = NormalOperator::zero();
    for (word, c) in p.terms() {
        let mut it = word.iter().peekable();
        let f = match it.peek() {
            Some(Letter::Func(f)) => {
                let f = f.clone();
                it.next();
                f
            }
            _ => C::one(),
        };
        let phi = match it.peek() {
            Some(Letter::Char(ch)) => {
                let ch = ch.clone();
                it.next();
                Some(ch)
            }
            _ => None,
        };
        let rest: Vec<&Letter<C>> = it.collect();
        let shape_err = || Error::Precondition(format!("word {} is not in normal form", crate::ncreduce::render_word(word)));
        let int_g = match rest.as_slice() {
            [Letter::Integ] => Some(C::one()),
            [Letter::Integ, Letter::Func(g)] => Some(g.clone()),
            _ => None,
        };
        match (phi, int_g) {
            (None, Some(g)) => {
                let v = n.int.get(&g).map(|x: &C| x.add(&f.scale(c))).unwrap_or_else(|| f.scale(c));
                if v.is_zero() {
                    n.int.remove(&g);
                } else {
                    n.int.insert(g, v);
                }
            }
            (Some(phi), Some(g)) => {
                let b = n.bound.entry(f.clone()).or_default();
                b.add_global(&phi, &g.scale(c));
                if b.is_zero() {
                    n.bound.remove(&f);
                }
            }
            (phi, None) => {
                if !rest.iter().all(|l| matches!(l, Letter::Deriv)) {
                    return Err(shape_err());
                }
                let i = rest.len() as u32;
                match phi {
                    None => {
                        let v = n.diff.get(&i).map(|x: &C| x.add(&f.scale(c))).unwrap_or_else(|| f.scale(c));
                        if v.is_zero() {
                            n.diff.remove(&i);
                        } else {
                            n.diff.insert(i, v);
                        }
                    }
                    Some(phi) => {
                        let b = n.bound.entry(f.clone()).or_default();
                        b.add_local(&phi, i, c);
                        if b.is_zero() {
                            n.bound.remove(&f);
                        }
                    }
                }
            }
        }
    }
    Ok(n)
}

/// Total reduction modulo the operator rules, basis expansion, and the `T + G + B` split.
pub fn normalize<C: IntDiffAlgebra>(p: &NCPoly<C>) -> Result<NormalOperator<C>> {
    let r = operator_system::<C>().total_reduce(p)?;
    partition(&r)
}

/// The normal form of a condition; every monomial must start with a character.
pub fn stieltjes_normal_form<C: IntDiffAlgebra>(p: &NCPoly<C>) -> Result<BoundaryCondition<C>> {
    for (word, _) in p.terms() {
        if !matches!(word.first(), Some(Letter::Char(_))) {
            return Err(Error::NotABoundaryCondition(crate::ncreduce::render_word(word)));
        }
    }
    let n = normalize(p)?;
    n.as_condition().ok_or_else(|| Error::NotABoundaryCondition(p.render()))
}

/// The action of an unreduced operator, letters applied right to left.
pub fn apply_literal<C: IntDiffAlgebra>(p: &NCPoly<C>, u: &C) -> C {
    let mut acc = C::zero();
    for (word, c) in p.terms() {
        let mut v = u.clone();
        for l in word.iter().rev() {
            v = match l {
                Letter::Deriv => v.derive(),
                Letter::Integ => v.integrate(),
                Letter::Char(ch) => v.char_value(ch),
                Letter::Func(f) => f.mul(&v),
                Letter::Indet(n, _) => panic!("indeterminate {} has no action", n),
            };
        }
        acc = acc.add(&v.scale(c));
    }
    acc
}

struct Term<C> {
    coef: C,
    rest: Vec<String>,
}

struct LatexTerm<C> {
    coef: C,
    rest: Vec<String>,
}

fn with_derivs(mut rest: Vec<String>, i: u32) -> Vec<String> {
    match i {
        0 => {}
        1 => rest.push("D".into()),
        _ => rest.push(format!("D^{}", i)),
    }
    rest
}

fn latex_derivs(mut rest: Vec<String>, i: u32) -> Vec<String> {
    match i {
        0 => {}
        1 => rest.push("\\partial".into()),
        _ => rest.push(format!("\\partial^{{{}}}", i)),
    }
    rest
}

/// Text of a function used as an operator factor, without spaces.
pub fn compact<C: IntDiffAlgebra>(f: &C) -> String {
    f.render().replace(' ', "")
}

fn func_factor<C: IntDiffAlgebra>(f: &C) -> String {
    if f.basis_expand().len() > 1 {
        format!("({})", compact(f))
    } else {
        let s = compact(f);
        if s.contains('+') || s[1..].contains('-') {
            format!("({})", s)
        } else {
            s
        }
    }
}

fn push_func<C: IntDiffAlgebra>(rest: &mut Vec<String>, g: &C) {
    if !g.is_one() {
        rest.push(func_factor(g));
    }
}

fn push_func_latex<C: IntDiffAlgebra>(rest: &mut Vec<String>, g: &C) {
    if !g.is_one() {
        if g.basis_expand().len() > 1 {
            rest.push(format!("\\left({}\\right)", g.latex()));
        } else {
            rest.push(g.latex());
        }
    }
}

/// Moves the scalar of a single-term global integrand into the coefficient.
fn split_global<C: IntDiffAlgebra>(f: &C, g: &C) -> (C, C) {
    let terms = g.basis_expand();
    if terms.len() == 1 {
        (f.scale(&terms[0].0), terms[0].1.clone())
    } else {
        (f.clone(), g.clone())
    }
}

/// Splits off a leading minus sign of a single-term coefficient.
fn sign_split<C: IntDiffAlgebra>(f: &C) -> (bool, C) {
    let terms = f.basis_expand();
    if terms.len() == 1 && terms[0].0.term_count() == 1 && terms[0].0.is_negative() {
        (true, f.neg())
    } else {
        (false, f.clone())
    }
}

fn join_terms<C: IntDiffAlgebra>(terms: &[Term<C>]) -> String {
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        let (neg, coef) = sign_split(&t.coef);
        let mut factors = Vec::new();
        if !coef.is_one() || t.rest.is_empty() {
            if t.rest.is_empty() && coef.basis_expand().len() > 1 && terms.len() == 1 {
                factors.push(compact(&coef));
            } else {
                factors.push(func_factor(&coef));
            }
        }
        factors.extend(t.rest.iter().cloned());
        let body = factors.join("*");
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn join_latex<C: IntDiffAlgebra>(terms: &[LatexTerm<C>]) -> String {
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        let (neg, coef) = sign_split(&t.coef);
        let mut factors = Vec::new();
        if !coef.is_one() || t.rest.is_empty() {
            if coef.basis_expand().len() > 1 && !t.rest.is_empty() {
                factors.push(format!("\\left({}\\right)", coef.latex()));
            } else {
                factors.push(coef.latex());
            }
        }
        factors.extend(t.rest.iter().cloned());
        let body = factors.join(" ");
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

enum Val {
    Fun(CoeffFunction),
    Op(NCPoly<CoeffFunction>),
}

impl Val {
    fn into_op(self) -> NCPoly<CoeffFunction> {
        match self {
            Val::Fun(f) => {
                if f.is_zero() {
                    NCPoly::zero()
                } else if let Some(s) = f.constant_value() {
                    NCPoly::constant(s)
                } else {
                    NCPoly::func(f)
                }
            }
            Val::Op(p) => p,
        }
    }

    fn add(self, o: Val) -> Val {
        match (self, o) {
            (Val::Fun(a), Val::Fun(b)) => Val::Fun(a.plus(&b)),
            (a, b) => Val::Op(a.into_op().add(&b.into_op())),
        }
    }

    fn mul(self, o: Val) -> Val {
        match (self, o) {
            (Val::Fun(a), Val::Fun(b)) => Val::Fun(a.times(&b)),
            (a, b) => Val::Op(a.into_op().mul(&b.into_op())),
        }
    }

    fn neg(self) -> Val {
        match self {
            Val::Fun(a) => Val::Fun(a.negate()),
            Val::Op(p) => Val::Op(p.neg()),
        }
    }
}

/// Parses operator text such as `E[1]*A*(x-1) + D^2 - 3*x*D`.
pub fn parse_operator(src: &str) -> Result<NCPoly<CoeffFunction>> {
    let mut c = Cursor::new(src)?;
    if c.at_end() {
        return Err(c.error("empty expression"));
    }
    let v = op_expr(&mut c)?;
    c.expect_end()?;
    Ok(v.into_op())
}

/// Parses a boundary condition and returns its normal form.
pub fn parse_condition(src: &str) -> Result<BoundaryCondition<CoeffFunction>> {
    let p = parse_operator(src)?;
    stieltjes_normal_form(&p)
}

fn op_expr(c: &mut Cursor) -> Result<Val> {
    let mut acc = op_term(c)?;
    loop {
        if c.eat_sym('+') {
            acc = acc.add(op_term(c)?);
        } else if c.eat_sym('-') {
            acc = acc.add(op_term(c)?.neg());
        } else {
            return Ok(acc);
        }
    }
}

fn op_starts_atom(t: Option<&Tok>) -> bool {
    match t {
        Some(Tok::Num(_)) | Some(Tok::Sym('(')) => true,
        Some(Tok::Ident(s)) => matches!(s.as_str(), "x" | "i" | "exp" | "D" | "A" | "E" | "L" | "R"),
        _ => false,
    }
}

fn op_term(c: &mut Cursor) -> Result<Val> {
    let mut acc = op_unary(c)?;
    loop {
        if c.eat_sym('*') || c.eat_sym('.') {
            acc = acc.mul(op_unary(c)?);
        } else if c.is_sym('/') {
            let pos = c.pos();
            c.bump();
            let d = match op_unary(c)? {
                Val::Fun(f) => f,
                Val::Op(_) => return Err(Error::parse(pos, "division by an operator")),
            };
            acc = acc.mul(Val::Fun(crate::coeffalg::parse::divisor_inverse(&d, pos)?));
        } else if op_starts_atom(c.peek()) {
            acc = acc.mul(op_unary(c)?);
        } else {
            return Ok(acc);
        }
    }
}

fn op_unary(c: &mut Cursor) -> Result<Val> {
    if c.eat_sym('-') {
        return Ok(op_unary(c)?.neg());
    }
    if c.eat_sym('+') {
        return op_unary(c);
    }
    let base = op_atom(c)?;
    if c.eat_sym('^') {
        let e = c.exponent()?;
        return Ok(match base {
            Val::Fun(f) => Val::Fun(f.pow(e)),
            Val::Op(p) => {
                let mut acc = NCPoly::one();
                for _ in 0..e {
                    acc = acc.mul(&p);
                }
                Val::Op(acc)
            }
        });
    }
    Ok(base)
}

fn point(c: &mut Cursor) -> Result<Gauss> {
    let pos = c.pos();
    c.expect_sym('[')?;
    let f = function_expr(c)?;
    c.expect_sym(']')?;
    f.constant_value().and_then(|s| s.as_gauss()).ok_or_else(|| Error::parse(pos, "evaluation point must be a Gaussian rational"))
}

fn op_atom(c: &mut Cursor) -> Result<Val> {
    let pos = c.pos();
    let letter = |l: Letter<CoeffFunction>| Ok(Val::Op(NCPoly::letter(l)));
    match c.peek().cloned() {
        Some(Tok::Ident(s)) => match s.as_str() {
            "D" => {
                c.bump();
                letter(Letter::Deriv)
            }
            "A" => {
                c.bump();
                letter(Letter::Integ)
            }
            "L" => {
                c.bump();
                letter(Letter::Char(CharSym::Point(Gauss::zero())))
            }
            "R" => {
                c.bump();
                letter(Letter::Char(CharSym::Point(Gauss::one())))
            }
            "E" => {
                c.bump();
                let g = point(c)?;
                letter(Letter::Char(CharSym::Point(g)))
            }
            "x" | "i" | "exp" => {
                let f = function_atom_only(c)?;
                Ok(Val::Fun(f))
            }
            other => Err(Error::parse(pos, format!("unknown symbol '{}'", other))),
        },
        Some(Tok::Num(_)) => Ok(Val::Fun(function_atom_only(c)?)),
        Some(Tok::Sym('(')) => {
            c.bump();
            let v = op_expr(c)?;
            c.expect_sym(')')?;
            Ok(v)
        }
        _ => Err(Error::parse(pos, "expected an operator or function")),
    }
}

/// A single function atom: a number, `x`, `i` or `exp(...)`.
fn function_atom_only(c: &mut Cursor) -> Result<CoeffFunction> {
    let pos = c.pos();
    match c.bump() {
        Some(Tok::Num(n)) => Ok(CoeffFunction::constant(Scalar::from_gauss(Gauss::from_rational(num_rational::BigRational::from_integer(n))))),
        Some(Tok::Ident(s)) if s == "x" => Ok(CoeffFunction::x()),
        Some(Tok::Ident(s)) if s == "i" => Ok(CoeffFunction::constant(Scalar::from_gauss(Gauss::i()))),
        Some(Tok::Ident(s)) if s == "exp" => {
            c.expect_sym('(')?;
            let arg = function_expr(c)?;
            c.expect_sym(')')?;
            crate::coeffalg::parse::exp_of(&arg).ok_or_else(|| Error::parse(pos, "exp argument must be linear in x"))
        }
        _ => Err(Error::parse(pos, "expected a function")),
    }
}

/// Parses and normalizes operator text.
pub fn parse_normal(src: &str) -> Result<NormalOperator<CoeffFunction>> {
    normalize(&parse_operator(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> NormalOperator<CoeffFunction> {
        parse_normal(s).unwrap()
    }

    #[test]
    fn section_rule() {
        assert_eq!(n("D*A").render(), "1");
    }

    #[test]
    fn baxter_rule() {
        assert_eq!(n("A*A").render(), "x*A - A*x");
    }

    #[test]
    fn integral_of_derivative() {
        assert_eq!(n("A*x*D").render(), "x - A");
    }

    #[test]
    fn evaluation_kills_integral() {
        assert!(n("E[0]*A*x").is_zero());
    }

    #[test]
    fn condition_prints() {
        assert_eq!(n("E[1]*A*(x-1)").render(), "E[1]*A*(x-1)");
        assert_eq!(n("L + R*D").render(), "E[0] + E[1]*D");
    }

    #[test]
    fn json_identity() {
        assert_eq!(NormalOperator::<CoeffFunction>::identity().to_json(), r#"{"diff":{"0":"1"},"int":[],"boundary":[]}"#);
    }

    #[test]
    fn stieltjes_of_integral_derivative() {
        let b = parse_condition("E[1]*A*x*D").unwrap();
        assert_eq!(b.render(), "E[1] - E[1]*A");
    }

    #[test]
    fn not_a_condition() {
        assert!(matches!(parse_condition("D + E[0]"), Err(Error::NotABoundaryCondition(_))));
    }
}
