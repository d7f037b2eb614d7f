//! Integro-differential polynomials `F{u}` in canonical form.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::coeffalg::parse::{divisor_inverse, exp_of, function_expr, Cursor, Tok};
use crate::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra, Scalar};
use crate::error::{Error, Result};

/// Names the indeterminate of one polynomial layer.
pub trait Indeterminate: Clone + Copy + Eq + Ord + fmt::Debug + Default + Send + Sync + 'static {
    const NAME: &'static str;
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Hash)]
pub struct U;
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Hash)]
pub struct V;
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Hash)]
pub struct W;

impl Indeterminate for U {
    const NAME: &'static str = "u";
}
impl Indeterminate for V {
    const NAME: &'static str = "v";
}
impl Indeterminate for W {
    const NAME: &'static str = "w";
}

/// A multi-index `β`, denoting `Π u_i^{β_i}`; no trailing zeros.
pub type MultiIndex = Vec<u32>;

fn trim(mut m: MultiIndex) -> MultiIndex {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

fn midx_add(a: &[u32], b: &[u32]) -> MultiIndex {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    trim(out)
}

fn unit(i: usize, e: u32) -> MultiIndex {
    let mut m = vec![0; i + 1];
    m[i] = e;
    trim(m)
}

/// Classes of differential monomials.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MonomialClass {
    Quasiconstant,
    Quasilinear,
    Functional,
}

pub fn classify(beta: &[u32]) -> MonomialClass {
    match beta.iter().rposition(|&b| b > 0) {
        None => MonomialClass::Quasiconstant,
        Some(k) if beta[k] == 1 => MonomialClass::Quasilinear,
        Some(_) => MonomialClass::Functional,
    }
}

/// Quasilinear of positive order, so integration by parts lowers the order.
fn reducible_by_parts(beta: &[u32]) -> Option<usize> {
    match beta.iter().rposition(|&b| b > 0) {
        Some(k) if k >= 1 && beta[k] == 1 => Some(k),
        _ => None,
    }
}

/// `∫f₁u^{γ₁}∫⋯∫fₙu^{γₙ}` with basis-word coefficients.
pub type IntegralTerm<C> = Vec<(C, MultiIndex)>;

/// `f u(0)^α u^β J` with `f` and all inner coefficients basis words.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct IdpTerm<C> {
    pub f: C,
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub j: IntegralTerm<C>,
}

/// An integro-differential polynomial over `C` in the indeterminate `M`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct IntDiffPoly<C: IntDiffAlgebra, M: Indeterminate = U> {
    terms: BTreeMap<IdpTerm<C>, Scalar>,
    marker: PhantomData<M>,
}

fn shuffle<C: Clone + Ord>(a: &[(C, MultiIndex)], b: &[(C, MultiIndex)]) -> BTreeMap<IntegralTerm<C>, u64> {
    let mut out = BTreeMap::new();
    if a.is_empty() || b.is_empty() {
        out.insert(if a.is_empty() { b.to_vec() } else { a.to_vec() }, 1);
        return out;
    }
    for (first, rest_a, rest_b) in [(&a[0], &a[1..], b), (&b[0], a, &b[1..])] {
        for (tail, m) in shuffle(rest_a, rest_b) {
            let mut w = vec![first.clone()];
            w.extend(tail);
            *out.entry(w).or_insert(0) += m;
        }
    }
    out
}

impl<C: IntDiffAlgebra, M: Indeterminate> IntDiffPoly<C, M> {
    fn from_map(terms: BTreeMap<IdpTerm<C>, Scalar>) -> Self {
        IntDiffPoly { terms, marker: PhantomData }
    }

    pub fn name() -> &'static str {
        M::NAME
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IdpTerm<C>, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_key(&mut self, k: IdpTerm<C>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    /// `c·u(0)^α u^β J`, expanding `c` and every coefficient of `J` over the basis.
    pub fn term(c: &C, alpha: &[u32], beta: &[u32], j: &[(C, MultiIndex)]) -> Self {
        let mut partial: Vec<(Scalar, IntegralTerm<C>)> = vec![(Scalar::one(), Vec::new())];
        for (g, gamma) in j {
            let mut next = Vec::new();
            for (s, pj) in &partial {
                for (t, b) in g.basis_expand() {
                    let mut nj = pj.clone();
                    nj.push((b, gamma.clone()));
                    next.push((s.mul(&t), nj));
                }
            }
            partial = next;
        }
        let mut out = Self::zero();
        for (t, b) in c.basis_expand() {
            for (s, pj) in &partial {
                let k = IdpTerm { f: b.clone(), alpha: trim(alpha.to_vec()), beta: trim(beta.to_vec()), j: pj.clone() };
                out.add_key(k, t.mul(s));
            }
        }
        out
    }

    pub fn from_coeff(c: &C) -> Self {
        Self::term(c, &[], &[], &[])
    }

    /// The `k`-th derivative `u_k` of the indeterminate.
    pub fn var(k: usize) -> Self {
        Self::term(&C::one(), &[], &unit(k, 1), &[])
    }

    /// The initial value `u_k(0)`.
    pub fn initial(k: usize) -> Self {
        Self::term(&C::one(), &unit(k, 1), &[], &[])
    }

    fn from_key(k: &IdpTerm<C>) -> Self {
        let mut out = Self::zero();
        out.add_key(k.clone(), Scalar::one());
        out
    }

    fn with_alpha(&self, alpha: &[u32]) -> Self {
        if alpha.is_empty() {
            return self.clone();
        }
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let mut k = k.clone();
            k.alpha = midx_add(&k.alpha, alpha);
            out.add_key(k, c.clone());
        }
        out
    }

    fn key_mul(a: &IdpTerm<C>, b: &IdpTerm<C>) -> Self {
        let f = a.f.mul(&b.f);
        let alpha = midx_add(&a.alpha, &b.alpha);
        let beta = midx_add(&a.beta, &b.beta);
        let mut out = Self::zero();
        for (j, m) in shuffle(&a.j, &b.j) {
            let mut key_terms = Self::zero();
            for (t, fb) in f.basis_expand() {
                key_terms.add_key(IdpTerm { f: fb, alpha: alpha.clone(), beta: beta.clone(), j: j.clone() }, t.mul(&Scalar::int(m as i64)));
            }
            out = IntDiffAlgebra::add(&out, &key_terms);
        }
        out
    }

    fn key_derive(k: &IdpTerm<C>) -> Self {
        let mut out = Self::term(&k.f.derive(), &k.alpha, &k.beta, &k.j);
        for (i, &b) in k.beta.iter().enumerate() {
            if b == 0 {
                continue;
            }
            let mut nb = k.beta.clone();
            nb[i] -= 1;
            let nb = midx_add(&nb, &unit(i + 1, 1));
            out = IntDiffAlgebra::add(&out, &Self::term(&k.f, &k.alpha, &nb, &k.j).scale(&Scalar::int(b as i64)));
        }
        if let Some(((f1, g1), rest)) = k.j.split_first() {
            let f = k.f.mul(f1);
            out = IntDiffAlgebra::add(&out, &Self::term(&f, &k.alpha, &midx_add(&k.beta, g1), rest));
        }
        out
    }

    /// The big integral of `f u^β J` with `α = 0`.
    fn key_integrate(f: &C, beta: &[u32], j: &[(C, MultiIndex)]) -> Self {
        if beta.is_empty() {
            let g = f.integrate();
            return match j.split_first() {
                None => Self::from_coeff(&g),
                Some(((f1, g1), rest)) => {
                    let mut nested = vec![(g.mul(f1), g1.clone())];
                    nested.extend(rest.iter().cloned());
                    Self::term(&g, &[], &[], j).sub(&Self::term(&C::one(), &[], &[], &nested))
                }
            };
        }
        match reducible_by_parts(beta) {
            None => {
                let mut nested = vec![(f.clone(), beta.to_vec())];
                nested.extend(j.iter().cloned());
                Self::term(&C::one(), &[], &[], &nested)
            }
            Some(k) => {
                let s = beta[k - 1] + 1;
                let mut v = beta.to_vec();
                v[k] = 0;
                v[k - 1] = 0;
                let v = trim(v);
                let wv = midx_add(&v, &unit(k - 1, s));
                let whole = Self::term(f, &[], &wv, j);
                let inner = Self::term(f, &[], &v, j).derive().mul(&Self::term(&C::one(), &[], &unit(k - 1, s), &[]));
                let r = whole.sub(&inner.integrate()).sub(&whole.evaluate());
                r.scale(&Scalar::from_gauss(Gauss::from_rational(BigRational::new(BigInt::from(1), BigInt::from(s)))))
            }
        }
    }

    /// Image of `u ↦ target` with coefficients mapped by `lift`.
    pub fn substitute<T: IntDiffAlgebra>(&self, target: &T, lift: &dyn Fn(&C) -> T) -> T {
        let mut derivs: Vec<T> = vec![target.clone()];
        let mut need = 0usize;
        for k in self.terms.keys() {
            need = need.max(k.alpha.len()).max(k.beta.len());
            for (_, g) in &k.j {
                need = need.max(g.len());
            }
        }
        while derivs.len() < need {
            let d = derivs.last().expect("nonempty").derive();
            derivs.push(d);
        }
        let power = |m: &[u32], vals: &dyn Fn(usize) -> T| -> T {
            let mut acc = T::one();
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    acc = acc.mul(&vals(i));
                }
            }
            acc
        };
        let at = |i: usize| derivs[i].clone();
        let at0 = |i: usize| derivs[i].evaluate();
        let mut out = T::zero();
        for (k, c) in &self.terms {
            let mut inner = T::one();
            for (g, gamma) in k.j.iter().rev() {
                inner = lift(g).mul(&power(gamma, &at)).mul(&inner).integrate();
            }
            let t = lift(&k.f).mul(&power(&k.alpha, &at0)).mul(&power(&k.beta, &at)).mul(&inner);
            out = out.add(&t.scale(c));
        }
        out
    }

    fn render_key(k: &IdpTerm<C>, latex: bool) -> String {
        let name = M::NAME;
        let mut parts: Vec<String> = Vec::new();
        if !k.f.is_one() {
            parts.push(if latex { latex_factor(&k.f) } else { k.f.render_factor() });
        }
        for (i, &e) in k.alpha.iter().enumerate() {
            if e > 0 {
                let base = if latex { format!("{}({})", latex_deriv(name, i), 0) } else { format!("{}0{}", name, primes(i)) };
                parts.push(power_text(&base, e, latex));
            }
        }
        for (i, &e) in k.beta.iter().enumerate() {
            if e > 0 {
                let base = if latex { latex_deriv(name, i) } else { format!("{}{}", name, primes(i)) };
                parts.push(power_text(&base, e, latex));
            }
        }
        if !k.j.is_empty() {
            parts.push(Self::render_integral(&k.j, latex));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(if latex { " " } else { "*" })
        }
    }

    fn render_integral(j: &[(C, MultiIndex)], latex: bool) -> String {
        let Some(((f, g), rest)) = j.split_first() else { return String::new() };
        let k = IdpTerm { f: f.clone(), alpha: Vec::new(), beta: g.clone(), j: rest.to_vec() };
        let body = Self::render_key(&k, latex);
        if latex {
            format!("\\int {}", body)
        } else {
            format!("I({})", body)
        }
    }

    fn render_with(&self, latex: bool) -> String {
        let mut out = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative() && c.term_count() == 1;
            let c = if neg { c.neg() } else { c.clone() };
            let body = Self::render_key(k, latex);
            let body = if c.is_one() {
                body
            } else if body == "1" {
                if latex {
                    c.latex()
                } else {
                    c.render()
                }
            } else if latex {
                format!("{} {}", scalar_latex_factor(&c), body)
            } else {
                format!("{}*{}", c.render_factor(), body)
            };
            if i == 0 {
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
}

fn primes(i: usize) -> String {
    if i <= 2 {
        "'".repeat(i)
    } else {
        format!("[{}]", i)
    }
}

fn latex_deriv(name: &str, i: usize) -> String {
    if i <= 2 {
        format!("{}{}", name, "'".repeat(i))
    } else {
        format!("{}^{{({})}}", name, i)
    }
}

fn power_text(base: &str, e: u32, latex: bool) -> String {
    match (e, latex) {
        (1, _) => base.to_string(),
        (_, false) => format!("{}^{}", base, e),
        (_, true) => format!("{{{}}}^{{{}}}", base, e),
    }
}

fn latex_factor<C: IntDiffAlgebra>(c: &C) -> String {
    if c.basis_expand().len() > 1 {
        format!("\\left({}\\right)", c.latex())
    } else {
        c.latex()
    }
}

fn scalar_latex_factor(c: &Scalar) -> String {
    if c.term_count() == 1 {
        c.latex()
    } else {
        format!("\\left({}\\right)", c.latex())
    }
}

impl<C: IntDiffAlgebra, M: Indeterminate> IntDiffAlgebra for IntDiffPoly<C, M> {
    fn zero() -> Self {
        Self::from_map(BTreeMap::new())
    }
    fn one() -> Self {
        Self::from_coeff(&C::one())
    }
    fn from_scalar(s: &Scalar) -> Self {
        Self::from_coeff(&C::from_scalar(s))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_key(k.clone(), c.clone());
        }
        out
    }
    fn neg(&self) -> Self {
        Self::from_map(self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect())
    }
    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out = out.add(&Self::key_mul(a, b).scale(&ca.mul(cb)));
            }
        }
        out
    }
    fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self::from_map(self.terms.iter().map(|(k, c)| (k.clone(), c.mul(s))).collect())
    }
    fn derive(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out = out.add(&Self::key_derive(k).scale(c));
        }
        out
    }
    fn integrate(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out = out.add(&Self::key_integrate(&k.f, &k.beta, &k.j).with_alpha(&k.alpha).scale(c));
        }
        out
    }
    /// `e[f u(0)^α u^β J] = f(0) u(0)^{α+β} δ_J`.
    fn evaluate(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if k.j.is_empty() {
                out = out.add(&Self::term(&k.f.evaluate(), &midx_add(&k.alpha, &k.beta), &[], &[]).scale(c));
            }
        }
        out
    }
    /// Only the evaluation at 0 is available on polynomials; other characters
    /// need the character extension.
    fn char_value(&self, ch: &CharSym) -> Self {
        if ch.is_eval0() || self.is_constant() {
            return self.evaluate();
        }
        panic!("character {} on {} needs the character extension", ch.render(), self.render())
    }
    fn basis_expand(&self) -> Vec<(Scalar, Self)> {
        self.terms.iter().map(|(k, c)| (c.clone(), Self::from_key(k))).collect()
    }
    fn as_scalar(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next().expect("one term");
        (k.alpha.is_empty() && k.beta.is_empty() && k.j.is_empty()).then(|| k.f.as_scalar().map(|s| s.mul(c))).flatten()
    }
    fn char_split(word: &Self) -> (Self, Vec<Self>) {
        let Some((k, _)) = word.terms.iter().next() else { return (Self::one(), Vec::new()) };
        let (fixed, atoms) = C::char_split(&k.f);
        let fixed = Self::term(&fixed, &k.alpha, &[], &[]);
        let mut out: Vec<Self> = atoms.iter().map(Self::from_coeff).collect();
        for (i, &e) in k.beta.iter().enumerate() {
            for _ in 0..e {
                out.push(Self::var(i));
            }
        }
        if !k.j.is_empty() {
            out.push(Self::term(&C::one(), &[], &[], &k.j));
        }
        (fixed, out)
    }
    fn render(&self) -> String {
        self.render_with(false)
    }
    fn latex(&self) -> String {
        self.render_with(true)
    }
    fn leading_cmp(&self, o: &Self) -> Ordering {
        self.terms.keys().next_back().cmp(&o.terms.keys().next_back())
    }
    fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| k.beta.is_empty() && k.j.is_empty() && k.f.is_constant())
    }
}

impl<C: IntDiffAlgebra, M: Indeterminate> fmt::Display for IntDiffPoly<C, M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `F{u}` over exponential polynomials.
pub type Poly = IntDiffPoly<CoeffFunction, U>;

impl<M: Indeterminate> IntDiffPoly<CoeffFunction, M> {
    /// Reads the text syntax, e.g. `x*u*u' + u0^2 - I(u'^2)`.
    pub fn parse(src: &str) -> Result<Self> {
        let mut c = Cursor::new(src)?;
        if c.at_end() {
            return Err(c.error("empty expression"));
        }
        let p = Self::expr(&mut c)?;
        c.expect_end()?;
        Ok(p)
    }

    /// Substitutes an exponential polynomial for the indeterminate.
    pub fn substitute_fn(&self, target: &CoeffFunction) -> CoeffFunction {
        self.substitute(target, &|f: &CoeffFunction| f.clone())
    }

    fn expr(c: &mut Cursor) -> Result<Self> {
        let mut acc = Self::product(c)?;
        loop {
            if c.eat_sym('+') {
                acc = acc.add(&Self::product(c)?);
            } else if c.eat_sym('-') {
                acc = acc.sub(&Self::product(c)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_atom(c: &Cursor) -> bool {
        match c.peek() {
            Some(Tok::Num(_)) | Some(Tok::Sym('(')) => true,
            Some(Tok::Ident(s)) => {
                let n0 = format!("{}0", M::NAME);
                s == "x" || s == "i" || s == "exp" || s == "I" || s == M::NAME || *s == n0
            }
            _ => false,
        }
    }

    fn product(c: &mut Cursor) -> Result<Self> {
        let mut acc = Self::unary(c)?;
        loop {
            if c.eat_sym('*') {
                acc = acc.mul(&Self::unary(c)?);
            } else if c.is_sym('/') {
                let pos = c.pos();
                c.bump();
                let d = Self::unary(c)?;
                let coeff = d.as_coefficient().ok_or_else(|| Error::parse(pos, "division by a non-constant"))?;
                acc = acc.mul(&Self::from_coeff(&divisor_inverse(&coeff, pos)?));
            } else if Self::starts_atom(c) {
                acc = acc.mul(&Self::unary(c)?);
            } else {
                return Ok(acc);
            }
        }
    }

    /// The polynomial as a pure coefficient, if it is one.
    pub fn as_coefficient(&self) -> Option<CoeffFunction> {
        let mut out = CoeffFunction::zero();
        for (k, c) in &self.terms {
            if !(k.alpha.is_empty() && k.beta.is_empty() && k.j.is_empty()) {
                return None;
            }
            out = out.plus(&k.f.scaled(c));
        }
        Some(out)
    }

    fn unary(c: &mut Cursor) -> Result<Self> {
        if c.eat_sym('-') {
            return Ok(Self::unary(c)?.neg());
        }
        if c.eat_sym('+') {
            return Self::unary(c);
        }
        let base = Self::atom(c)?;
        if c.eat_sym('^') {
            let e = c.exponent()?;
            let mut acc = Self::one();
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn derivative_order(c: &mut Cursor) -> Result<usize> {
        if c.eat_sym('[') {
            let pos = c.pos();
            let k = match c.bump() {
                Some(Tok::Num(n)) => usize::try_from(n).map_err(|_| Error::parse(pos, "derivative order too large"))?,
                _ => return Err(Error::parse(pos, "expected a derivative order")),
            };
            c.expect_sym(']')?;
            return Ok(k);
        }
        let mut k = 0;
        while c.eat_sym('\'') {
            k += 1;
        }
        Ok(k)
    }

    fn atom(c: &mut Cursor) -> Result<Self> {
        let pos = c.pos();
        let n0 = format!("{}0", M::NAME);
        match c.bump() {
            Some(Tok::Num(n)) => Ok(Self::from_scalar(&Scalar::from_gauss(Gauss::from_rational(BigRational::from_integer(n))))),
            Some(Tok::Ident(s)) if s == "x" => Ok(Self::from_coeff(&CoeffFunction::x())),
            Some(Tok::Ident(s)) if s == "i" => Ok(Self::from_scalar(&Scalar::from_gauss(Gauss::i()))),
            Some(Tok::Ident(s)) if s == "exp" => {
                c.expect_sym('(')?;
                let arg = function_expr(c)?;
                c.expect_sym(')')?;
                let f = exp_of(&arg).ok_or_else(|| Error::parse(pos, "exp argument must be a + λ*x"))?;
                Ok(Self::from_coeff(&f))
            }
            Some(Tok::Ident(s)) if s == M::NAME => Ok(Self::var(Self::derivative_order(c)?)),
            Some(Tok::Ident(s)) if s == n0 => Ok(Self::initial(Self::derivative_order(c)?)),
            Some(Tok::Ident(s)) if s == "I" => {
                c.expect_sym('(')?;
                let p = Self::expr(c)?;
                c.expect_sym(')')?;
                Ok(p.integrate())
            }
            Some(Tok::Sym('(')) => {
                let p = Self::expr(c)?;
                c.expect_sym(')')?;
                Ok(p)
            }
            _ => Err(Error::parse(pos, format!("expected a number, x, i, exp(...), {}, {}, I(...) or '('", M::NAME, n0))),
        }
    }
}
