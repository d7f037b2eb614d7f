//! Noncommutative polynomials over words and reduction modulo rule schemas.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coeffalg::{CharSym, IntDiffAlgebra, Scalar};
use crate::error::{Error, Result};

/// Default number of rewrite steps before a reduction gives up.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// A letter of the operator alphabet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Letter<C> {
    Deriv,
    Integ,
    Char(CharSym),
    Func(C),
    Indet(String, u32),
}

pub type Word<C> = Vec<Letter<C>>;

impl<C: IntDiffAlgebra> Letter<C> {
    fn rank(&self) -> u8 {
        match self {
            Letter::Deriv => 4,
            Letter::Integ => 3,
            Letter::Char(_) => 2,
            Letter::Func(_) => 1,
            Letter::Indet(..) => 0,
        }
    }

    pub fn eval0() -> Self {
        Letter::Char(CharSym::eval0())
    }

    pub fn render(&self) -> String {
        match self {
            Letter::Deriv => "D".into(),
            Letter::Integ => "A".into(),
            Letter::Char(c) => c.render(),
            Letter::Func(f) => f.render_factor(),
            Letter::Indet(n, k) => format!("{}{}", n, "'".repeat(*k as usize)),
        }
    }

    pub fn latex(&self) -> String {
        match self {
            Letter::Deriv => "\\partial".into(),
            Letter::Integ => "\\int".into(),
            Letter::Char(c) => c.latex(),
            Letter::Func(f) => {
                let s = f.latex();
                if f.basis_expand().len() > 1 {
                    format!("\\left({}\\right)", s)
                } else {
                    s
                }
            }
            Letter::Indet(n, k) => format!("{}{}", n, "'".repeat(*k as usize)),
        }
    }
}

/// Letter precedence `Deriv > Integ > Char > Func > Indet`; functions by leading basis word.
pub fn letter_cmp<C: IntDiffAlgebra>(a: &Letter<C>, b: &Letter<C>) -> Ordering {
    a.rank().cmp(&b.rank()).then_with(|| match (a, b) {
        (Letter::Char(x), Letter::Char(y)) => x.cmp(y),
        (Letter::Func(x), Letter::Func(y)) => x.leading_cmp(y),
        (Letter::Indet(n, i), Letter::Indet(m, j)) => (n, i).cmp(&(m, j)),
        _ => Ordering::Equal,
    })
}

/// Graded lexicographic preorder on words.
pub fn word_cmp<C: IntDiffAlgebra>(v: &[Letter<C>], w: &[Letter<C>]) -> Ordering {
    v.len().cmp(&w.len()).then_with(|| {
        for (a, b) in v.iter().zip(w) {
            let o = letter_cmp(a, b);
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    })
}

pub fn word_less<C: IntDiffAlgebra>(v: &[Letter<C>], w: &[Letter<C>]) -> bool {
    word_cmp(v, w) == Ordering::Less
}

/// `word_cmp` refined by structural order into a total order.
pub fn word_total_cmp<C: IntDiffAlgebra>(v: &[Letter<C>], w: &[Letter<C>]) -> Ordering {
    word_cmp(v, w).then_with(|| v.cmp(w))
}

pub fn render_word<C: IntDiffAlgebra>(w: &[Letter<C>]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|l| l.render()).collect::<Vec<_>>().join("*")
}

pub fn latex_word<C: IntDiffAlgebra>(w: &[Letter<C>]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|l| l.latex()).collect::<Vec<_>>().join(" ")
}

/// Left and right cofactors of the leftmost occurrence of `rule_word` in `target`.
pub fn reduction_multipliers<C: IntDiffAlgebra>(target: &[Letter<C>], rule_word: &[Letter<C>]) -> Option<(Word<C>, Word<C>)> {
    if rule_word.len() > target.len() {
        return None;
    }
    (0..=target.len() - rule_word.len())
        .find(|&i| &target[i..i + rule_word.len()] == rule_word)
        .map(|i| (target[..i].to_vec(), target[i + rule_word.len()..].to_vec()))
}

/// A finite linear combination of words.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NCPoly<C: IntDiffAlgebra> {
    terms: BTreeMap<Word<C>, Scalar>,
}

impl<C: IntDiffAlgebra> Default for NCPoly<C> {
    fn default() -> Self {
        NCPoly::zero()
    }
}

impl<C: IntDiffAlgebra> NCPoly<C> {
    pub fn zero() -> Self {
        NCPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        NCPoly::word(Vec::new())
    }

    pub fn constant(c: Scalar) -> Self {
        NCPoly::monomial(c, Vec::new())
    }

    pub fn word(w: Word<C>) -> Self {
        NCPoly::monomial(Scalar::one(), w)
    }

    pub fn letter(l: Letter<C>) -> Self {
        NCPoly::word(vec![l])
    }

    pub fn func(f: C) -> Self {
        NCPoly::letter(Letter::Func(f))
    }

    pub fn monomial(c: Scalar, w: Word<C>) -> Self {
        let mut p = NCPoly::zero();
        p.add_term(w, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Scalar, Word<C>)>>(it: I) -> Self {
        let mut p = NCPoly::zero();
        for (c, w) in it {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, w: Word<C>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word<C>, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word<C>) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Terms in descending word order.
    pub fn sorted_terms(&self) -> Vec<(&Word<C>, &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| word_total_cmp(b.0, a.0));
        v
    }

    /// The largest word and its coefficient.
    pub fn leading(&self) -> Option<(&Word<C>, &Scalar)> {
        self.terms.iter().max_by(|a, b| word_total_cmp(a.0, b.0))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        NCPoly { terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        NCPoly::from_terms(self.terms.iter().map(|(w, c)| (c.mul(s), w.clone())))
    }

    /// Free concatenation product.
    pub fn mul(&self, o: &Self) -> Self {
        let mut r = NCPoly::zero();
        for (v, a) in &self.terms {
            for (w, b) in &o.terms {
                let mut vw = v.clone();
                vw.extend(w.iter().cloned());
                r.add_term(vw, a.mul(b));
            }
        }
        r
    }

    /// `left·self·right` for words.
    pub fn sandwich(&self, left: &[Letter<C>], right: &[Letter<C>]) -> Self {
        NCPoly::from_terms(self.terms.iter().map(|(w, c)| {
            let mut x = left.to_vec();
            x.extend(w.iter().cloned());
            x.extend(right.iter().cloned());
            (c.clone(), x)
        }))
    }

    #[allow(clippy::redundant_closure)]
    pub fn render(&self) -> String {
        render_terms(self.sorted_terms().into_iter(), |w| render_word(w), |c| c.render_factor(), |c| c.render(), "*")
    }

    pub fn latex(&self) -> String {
        render_terms(self.sorted_terms().into_iter(), |w| latex_word(w), latex_factor, |c| c.latex(), " ")
    }
}

fn latex_factor(c: &Scalar) -> String {
    if c.term_count() == 1 {
        c.latex()
    } else {
        format!("\\left({}\\right)", c.latex())
    }
}

fn render_terms<'a, C: IntDiffAlgebra + 'a>(
    terms: impl Iterator<Item = (&'a Word<C>, &'a Scalar)>,
    word: impl Fn(&Word<C>) -> String,
    factor: impl Fn(&Scalar) -> String,
    plain: impl Fn(&Scalar) -> String,
    times: &str,
) -> String {
    let mut out = String::new();
    for (i, (w, c)) in terms.enumerate() {
        let neg = c.is_negative() && c.term_count() == 1;
        let c = if neg { c.neg() } else { c.clone() };
        let body = if w.is_empty() {
            plain(&c)
        } else if c.is_one() {
            word(w)
        } else {
            format!("{}{}{}", factor(&c), times, word(w))
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

impl<C: IntDiffAlgebra> fmt::Display for NCPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// One element of a rule pattern.
#[derive(Clone, Debug, PartialEq)]
pub enum Pat<C> {
    Lit(Letter<C>),
    /// A function hole; an optional hole also matches the empty word as `1`.
    Func {
        name: &'static str,
        optional: bool,
    },
    Char {
        name: &'static str,
    },
}

/// Values bound to the holes of a pattern.
#[derive(Clone, Debug, PartialEq)]
pub enum Bound<C> {
    Func(C),
    Char(CharSym),
}

#[derive(Clone, Debug, Default)]
pub struct Bindings<C> {
    map: BTreeMap<&'static str, Bound<C>>,
}

impl<C: IntDiffAlgebra> Bindings<C> {
    pub fn new() -> Self {
        Bindings { map: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: &'static str, b: Bound<C>) {
        self.map.insert(name, b);
    }

    pub fn func(&self, name: &str) -> &C {
        match self.map.get(name) {
            Some(Bound::Func(f)) => f,
            _ => panic!("unbound function hole {}", name),
        }
    }

    pub fn char(&self, name: &str) -> &CharSym {
        match self.map.get(name) {
            Some(Bound::Char(c)) => c,
            _ => panic!("unbound character hole {}", name),
        }
    }
}

pub type Rewriter<C> = Arc<dyn Fn(&Bindings<C>) -> NCPoly<C> + Send + Sync>;

/// A rewrite rule whose left side may contain function and character holes.
#[derive(Clone)]
pub struct RuleSchema<C: IntDiffAlgebra> {
    pub name: String,
    pub pattern: Vec<Pat<C>>,
    pub rewrite: Rewriter<C>,
}

impl<C: IntDiffAlgebra> fmt::Debug for RuleSchema<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleSchema").field("name", &self.name).field("pattern", &self.pattern).finish()
    }
}

impl<C: IntDiffAlgebra> RuleSchema<C> {
    pub fn new(name: impl Into<String>, pattern: Vec<Pat<C>>, rewrite: impl Fn(&Bindings<C>) -> NCPoly<C> + Send + Sync + 'static) -> Self {
        RuleSchema { name: name.into(), pattern, rewrite: Arc::new(rewrite) }
    }

    /// A ground rule `word → rhs`.
    pub fn literal(name: impl Into<String>, word: Word<C>, rhs: NCPoly<C>) -> Self {
        let pattern = word.into_iter().map(Pat::Lit).collect();
        RuleSchema::new(name, pattern, move |_| rhs.clone())
    }

    /// The left side as a word, if the pattern has no holes.
    pub fn literal_word(&self) -> Option<Word<C>> {
        self.pattern
            .iter()
            .map(|p| match p {
                Pat::Lit(l) => Some(l.clone()),
                _ => None,
            })
            .collect()
    }

    /// Matches the pattern at `pos`; returns the matched length and bindings.
    pub fn match_at(&self, word: &[Letter<C>], pos: usize) -> Option<(usize, Bindings<C>)> {
        let mut b = Bindings::new();
        let mut i = pos;
        for p in &self.pattern {
            match p {
                Pat::Lit(l) => {
                    if word.get(i) != Some(l) {
                        return None;
                    }
                    i += 1;
                }
                Pat::Func { name, optional } => match word.get(i) {
                    Some(Letter::Func(f)) => {
                        b.insert(name, Bound::Func(f.clone()));
                        i += 1;
                    }
                    _ if *optional => b.insert(name, Bound::Func(C::one())),
                    _ => return None,
                },
                Pat::Char { name } => match word.get(i) {
                    Some(Letter::Char(c)) => {
                        b.insert(name, Bound::Char(c.clone()));
                        i += 1;
                    }
                    _ => return None,
                },
            }
        }
        if i == pos {
            return None;
        }
        Some((i - pos, b))
    }
}

/// Which occurrence a reduction step rewrites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Leftmost,
    Rightmost,
}

pub type GroundFn<C> = Arc<dyn Fn(&Scalar, &Word<C>) -> NCPoly<C> + Send + Sync>;

/// One recorded rewrite step.
#[derive(Clone, Debug)]
pub struct Step<C: IntDiffAlgebra> {
    pub rule: String,
    pub position: usize,
    pub coeff: Scalar,
    pub before: Word<C>,
    pub after: NCPoly<C>,
}

impl<C: IntDiffAlgebra> Step<C> {
    pub fn line(&self) -> String {
        let before = NCPoly::monomial(self.coeff.clone(), self.before.clone());
        format!("{} @ {} : {} => {}", self.rule, self.position, before.render(), self.after.render())
    }
}

/// Worklist key ordered by `word_total_cmp`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Key<C: IntDiffAlgebra>(Word<C>);

impl<C: IntDiffAlgebra> Ord for Key<C> {
    fn cmp(&self, o: &Self) -> Ordering {
        word_total_cmp(&self.0, &o.0)
    }
}

impl<C: IntDiffAlgebra> PartialOrd for Key<C> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn add_key<C: IntDiffAlgebra>(m: &mut BTreeMap<Key<C>, Scalar>, w: Word<C>, c: Scalar) {
    if c.is_zero() {
        return;
    }
    let k = Key(w);
    match m.get_mut(&k) {
        Some(v) => {
            *v = v.add(&c);
            if v.is_zero() {
                m.remove(&k);
            }
        }
        None => {
            m.insert(k, c);
        }
    }
}

/// An overlap `W = AB`, `V = BC` of two rule instances.
#[derive(Clone, Debug)]
pub struct Ambiguity<C: IntDiffAlgebra> {
    pub sigma: String,
    pub tau: String,
    pub a: Word<C>,
    pub b: Word<C>,
    pub c: Word<C>,
    /// Right side of the `sigma` instance on `AB`.
    pub f: NCPoly<C>,
    /// Right side of the `tau` instance on `BC`.
    pub g: NCPoly<C>,
}

impl<C: IntDiffAlgebra> Ambiguity<C> {
    /// The overlap word `ABC`.
    pub fn word(&self) -> Word<C> {
        let mut w = self.a.clone();
        w.extend(self.b.iter().cloned());
        w.extend(self.c.iter().cloned());
        w
    }

    /// The two one-step reducts `f·C` and `A·g`.
    pub fn reducts(&self) -> (NCPoly<C>, NCPoly<C>) {
        (self.f.sandwich(&[], &self.c), self.g.sandwich(&self.a, &[]))
    }
}

/// `f·C − A·g`.
pub fn s_polynomial<C: IntDiffAlgebra>(amb: &Ambiguity<C>) -> NCPoly<C> {
    let (l, r) = amb.reducts();
    l.sub(&r)
}

/// Generic values substituted for holes when enumerating ambiguities.
#[derive(Clone, Debug)]
pub struct Generic<C> {
    pub funcs: Vec<C>,
    pub chars: Vec<CharSym>,
}

impl<C> Generic<C> {
    pub fn none() -> Self {
        Generic { funcs: Vec::new(), chars: Vec::new() }
    }
}

/// Unifies two pattern elements at the same position.
fn unify<C: IntDiffAlgebra>(a: &Pat<C>, b: &Pat<C>) -> Option<Option<Letter<C>>> {
    match (a, b) {
        (Pat::Lit(x), Pat::Lit(y)) => (x == y).then(|| Some(x.clone())),
        (Pat::Lit(l @ Letter::Func(_)), Pat::Func { .. }) | (Pat::Func { .. }, Pat::Lit(l @ Letter::Func(_))) => Some(Some(l.clone())),
        (Pat::Lit(l @ Letter::Char(_)), Pat::Char { .. }) | (Pat::Char { .. }, Pat::Lit(l @ Letter::Char(_))) => Some(Some(l.clone())),
        (Pat::Func { .. }, Pat::Func { .. }) | (Pat::Char { .. }, Pat::Char { .. }) => Some(None),
        _ => None,
    }
}

/// A rule system with an optional ground simplifier applied to every monomial.
#[derive(Clone)]
pub struct RewriteSystem<C: IntDiffAlgebra> {
    rules: Vec<RuleSchema<C>>,
    ground: Option<GroundFn<C>>,
    budget: usize,
    strategy: Strategy,
}

impl<C: IntDiffAlgebra> fmt::Debug for RewriteSystem<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RewriteSystem").field("rules", &self.rules).field("budget", &self.budget).finish()
    }
}

impl<C: IntDiffAlgebra> RewriteSystem<C> {
    /// Builds a system; rejects inclusion ambiguities.
    pub fn new(rules: Vec<RuleSchema<C>>) -> Result<Self> {
        for (i, s) in rules.iter().enumerate() {
            for (j, t) in rules.iter().enumerate() {
                if i == j || t.pattern.len() > s.pattern.len() || t.pattern.is_empty() {
                    continue;
                }
                for off in 0..=s.pattern.len() - t.pattern.len() {
                    let hit = t.pattern.iter().enumerate().all(|(k, p)| unify(&s.pattern[off + k], p).is_some());
                    if hit {
                        return Err(Error::InclusionAmbiguity(s.name.clone(), t.name.clone()));
                    }
                }
            }
        }
        Ok(RewriteSystem { rules, ground: None, budget: DEFAULT_BUDGET, strategy: Strategy::Leftmost })
    }

    pub fn with_ground(mut self, g: impl Fn(&Scalar, &Word<C>) -> NCPoly<C> + Send + Sync + 'static) -> Self {
        self.ground = Some(Arc::new(g));
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn rules(&self) -> &[RuleSchema<C>] {
        &self.rules
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Applies the ground simplifier to every monomial.
    pub fn simplify(&self, p: &NCPoly<C>) -> NCPoly<C> {
        match &self.ground {
            None => p.clone(),
            Some(g) => {
                let mut r = NCPoly::zero();
                for (w, c) in p.terms() {
                    r = r.add(&g(c, w));
                }
                r
            }
        }
    }

    /// The rule, position, length and bindings of the occurrence the strategy picks.
    pub fn find_match(&self, word: &[Letter<C>]) -> Option<(usize, usize, usize, Bindings<C>)> {
        let positions: Vec<usize> = match self.strategy {
            Strategy::Leftmost => (0..word.len()).collect(),
            Strategy::Rightmost => (0..word.len()).rev().collect(),
        };
        for pos in positions {
            for (ri, r) in self.rules.iter().enumerate() {
                if let Some((len, b)) = r.match_at(word, pos) {
                    return Some((ri, pos, len, b));
                }
            }
        }
        None
    }

    fn step(&self, c: &Scalar, w: &Word<C>) -> Option<Step<C>> {
        let (ri, pos, len, b) = self.find_match(w)?;
        let rule = &self.rules[ri];
        let rhs = (rule.rewrite)(&b);
        let replaced = rhs.sandwich(&w[..pos], &w[pos + len..]).scale(c);
        let after = self.simplify(&replaced);
        Some(Step { rule: rule.name.clone(), position: pos, coeff: c.clone(), before: w.clone(), after })
    }

    pub fn is_reducible(&self, w: &[Letter<C>]) -> bool {
        self.find_match(w).is_some()
    }

    /// Rewrites the largest reducible monomial once; `None` if `p` is irreducible.
    pub fn reduce_once(&self, p: &NCPoly<C>) -> Option<NCPoly<C>> {
        let p = self.simplify(p);
        for (w, c) in p.sorted_terms() {
            if let Some(s) = self.step(c, w) {
                let mut r = p.clone();
                r.add_term(w.clone(), c.neg());
                return Some(r.add(&s.after));
            }
        }
        None
    }

    pub fn total_reduce(&self, p: &NCPoly<C>) -> Result<NCPoly<C>> {
        self.run(p, None)
    }

    /// Total reduction together with the list of rewrite steps.
    pub fn total_reduce_traced(&self, p: &NCPoly<C>) -> Result<(NCPoly<C>, Vec<Step<C>>)> {
        let mut steps = Vec::new();
        let r = self.run(p, Some(&mut steps))?;
        Ok((r, steps))
    }

    fn run(&self, p: &NCPoly<C>, mut trace: Option<&mut Vec<Step<C>>>) -> Result<NCPoly<C>> {
        let mut work: BTreeMap<Key<C>, Scalar> = BTreeMap::new();
        let mut done: BTreeMap<Key<C>, Scalar> = BTreeMap::new();
        for (w, c) in self.simplify(p).terms() {
            add_key(&mut work, w.clone(), c.clone());
        }
        let mut steps = 0usize;
        while let Some((Key(w), c)) = work.pop_last() {
            match self.step(&c, &w) {
                None => add_key(&mut done, w, c),
                Some(s) => {
                    steps += 1;
                    if steps > self.budget {
                        return Err(Error::BudgetExceeded(self.budget));
                    }
                    for (nw, nc) in s.after.terms() {
                        let k = Key(nw.clone());
                        let mut nc = nc.clone();
                        if let Some(old) = done.remove(&k) {
                            nc = nc.add(&old);
                        }
                        add_key(&mut work, k.0, nc);
                    }
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(s);
                    }
                }
            }
        }
        Ok(NCPoly::from_terms(done.into_iter().map(|(k, c)| (c, k.0))))
    }

    /// All overlap ambiguities, with holes instantiated by `generic` in order of appearance.
    pub fn find_ambiguities(&self, generic: &Generic<C>) -> Vec<Ambiguity<C>> {
        let mut out = Vec::new();
        for s in &self.rules {
            for t in &self.rules {
                let (m, n) = (s.pattern.len(), t.pattern.len());
                for k in 1..m.min(n) {
                    if let Some(a) = self.overlap(s, t, k, generic) {
                        out.push(a);
                    }
                }
            }
        }
        out
    }

    fn overlap(&self, s: &RuleSchema<C>, t: &RuleSchema<C>, k: usize, generic: &Generic<C>) -> Option<Ambiguity<C>> {
        let (m, n) = (s.pattern.len(), t.pattern.len());
        let total = m + n - k;
        let mut letters: Vec<Letter<C>> = Vec::with_capacity(total);
        let (mut nf, mut nc) = (0usize, 0usize);
        for j in 0..total {
            let sp = (j < m).then(|| &s.pattern[j]);
            let tp = (j + k >= m).then(|| &t.pattern[j + k - m]);
            let fixed = match (sp, tp) {
                (Some(x), Some(y)) => unify(x, y)?,
                (Some(Pat::Lit(l)), None) | (None, Some(Pat::Lit(l))) => Some(l.clone()),
                _ => None,
            };
            let letter = match fixed {
                Some(l) => l,
                None => match sp.or(tp).unwrap() {
                    Pat::Func { .. } => {
                        nf += 1;
                        Letter::Func(generic.funcs.get(nf - 1).cloned().expect("not enough generic functions"))
                    }
                    Pat::Char { .. } => {
                        nc += 1;
                        Letter::Char(generic.chars.get(nc - 1).cloned().expect("not enough generic characters"))
                    }
                    Pat::Lit(l) => l.clone(),
                },
            };
            letters.push(letter);
        }
        let (_, bs) = s.match_at(&letters, 0)?;
        let (_, bt) = t.match_at(&letters, m - k)?;
        Some(Ambiguity {
            sigma: s.name.clone(),
            tau: t.name.clone(),
            a: letters[..m - k].to_vec(),
            b: letters[m - k..m].to_vec(),
            c: letters[m..].to_vec(),
            f: (s.rewrite)(&bs),
            g: (t.rewrite)(&bt),
        })
    }

    /// Adds a rule, keeping the system free of inclusion ambiguities.
    fn push_oriented(&mut self, p: &NCPoly<C>, counter: &mut usize) -> Result<()> {
        let mut pending = vec![p.clone()];
        while let Some(q) = pending.pop() {
            let q = self.total_reduce(&q)?;
            let Some((lw, lc)) = q.leading().map(|(w, c)| (w.clone(), c.clone())) else { continue };
            let mut rhs = q.clone();
            rhs.add_term(lw.clone(), lc.neg());
            let rhs = rhs.scale(&lc.inv()).neg();
            *counter += 1;
            let mut kept = Vec::new();
            for r in self.rules.drain(..) {
                let contains = match r.literal_word() {
                    Some(w) => (0..w.len()).any(|i| w.len() - i >= lw.len() && w[i..i + lw.len()] == lw[..]),
                    None => false,
                };
                if contains {
                    let w = r.literal_word().unwrap();
                    let old = NCPoly::word(w.clone()).sub(&(r.rewrite)(&Bindings::new()));
                    pending.push(old);
                } else {
                    kept.push(r);
                }
            }
            kept.push(RuleSchema::literal(format!("b{}", counter), lw, rhs));
            self.rules = kept;
            let mut fixed = Vec::new();
            for r in &self.rules {
                match r.literal_word() {
                    Some(w) => {
                        let rhs = self.total_reduce(&(r.rewrite)(&Bindings::new()))?;
                        fixed.push(RuleSchema::literal(r.name.clone(), w, rhs));
                    }
                    None => fixed.push(r.clone()),
                }
            }
            self.rules = fixed;
        }
        Ok(())
    }
}

/// Completes `system` by orienting nonzero reduced S-polynomials into new rules.
pub fn buchberger<C: IntDiffAlgebra>(system: &RewriteSystem<C>, generic: &Generic<C>, max_rules: usize) -> Result<RewriteSystem<C>> {
    let mut sys = system.clone();
    let mut counter = 0usize;
    loop {
        let mut changed = false;
        for amb in sys.find_ambiguities(generic) {
            let r = sys.total_reduce(&s_polynomial(&amb))?;
            if !r.is_zero() {
                sys.push_oriented(&r, &mut counter)?;
                changed = true;
                break;
            }
        }
        if !changed {
            return Ok(sys);
        }
        if sys.rules.len() > max_rules || counter > max_rules * 10 {
            return Err(Error::BudgetExceeded(max_rules));
        }
    }
}
