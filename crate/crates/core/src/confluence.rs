//! Certifies that the operator rewrite system is confluent by reducing its generic S-polynomials.

use crate::charext::CharExt;
use crate::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra};
use crate::error::Result;
use crate::intdiffop::{basis_expand_poly, operator_system};
use crate::intdiffpoly::{IntDiffPoly, U, V, W};
use crate::ncreduce::{render_word, s_polynomial, Generic, Letter, NCPoly, RewriteSystem, Word};

/// `F{u}{v}{w}` with symbolic character values adjoined.
pub type Fhat = CharExt<IntDiffPoly<IntDiffPoly<IntDiffPoly<CoeffFunction, U>, V>, W>>;

type Pu = IntDiffPoly<CoeffFunction, U>;
type Puv = IntDiffPoly<Pu, V>;
type Puvw = IntDiffPoly<Puv, W>;

/// The generic `u`, `v`, `w` of `F̂`.
pub fn generic_functions() -> Vec<Fhat> {
    let u = Puvw::from_coeff(&Puv::from_coeff(&Pu::var(0)));
    let v = Puvw::from_coeff(&Puv::var(0));
    let w = Puvw::var(0);
    [u, v, w].iter().map(Fhat::lift).collect()
}

pub fn generic_characters() -> Vec<CharSym> {
    ["phi", "psi", "chi"].iter().map(|s| CharSym::Generic((*s).into())).collect()
}

/// The operator rewrite system over `F̂` with its generic parameters.
pub struct ParamRuleSet {
    pub system: RewriteSystem<Fhat>,
    pub generic: Generic<Fhat>,
}

pub fn build_parametrized_system() -> ParamRuleSet {
    ParamRuleSet { system: operator_system::<Fhat>(), generic: Generic { funcs: generic_functions(), chars: generic_characters() } }
}

/// One checked fork.
#[derive(Clone, Debug)]
pub struct ForkResult {
    pub sigma: String,
    pub tau: String,
    pub word: String,
    pub s_polynomial: String,
    pub trivial: bool,
    pub trace: Vec<String>,
    pub residue: String,
    pub resolved: bool,
}

impl ForkResult {
    pub fn line(&self) -> String {
        format!("{}/{} {} : {}{}", self.sigma, self.tau, self.word, self.residue, if self.trivial { " (trivial)" } else { "" })
    }
}

/// Outcome of the confluence check.
#[derive(Clone, Debug)]
pub struct ConfluenceReport {
    pub forks: Vec<ForkResult>,
    /// Forks of the ground simplifier's `e∫ → 0` against the rules.
    pub ground_forks: Vec<ForkResult>,
    pub expected_nontrivial: usize,
}

impl ConfluenceReport {
    pub fn nontrivial(&self) -> usize {
        self.forks.iter().filter(|f| !f.trivial).count()
    }

    pub fn all_resolved(&self) -> bool {
        self.forks.iter().chain(&self.ground_forks).all(|f| f.resolved)
    }

    pub fn count_matches(&self) -> bool {
        self.nontrivial() == self.expected_nontrivial
    }

    pub fn success(&self) -> bool {
        self.all_resolved()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.forks {
            out.push_str(&f.line());
            out.push('\n');
        }
        for f in &self.ground_forks {
            out.push_str(&format!("ground {}\n", f.line()));
        }
        out.push_str(&format!(
            "{} ambiguities, {} nontrivial, {} ground forks, all residues zero: {}\n",
            self.forks.len(),
            self.nontrivial(),
            self.ground_forks.len(),
            if self.all_resolved() { "yes" } else { "no" }
        ));
        if !self.count_matches() {
            out.push_str(&format!("count mismatch: expected {} nontrivial\n", self.expected_nontrivial));
        }
        out
    }
}

/// Merges adjacent functions and folds scalars; no operator rewriting.
fn coefficient_collapse<C: IntDiffAlgebra>(p: &NCPoly<C>) -> NCPoly<C> {
    let mut out = NCPoly::zero();
    'terms: for (w, c) in p.terms() {
        let mut coeff = c.clone();
        let mut word: Word<C> = Vec::new();
        for l in w {
            match (l, word.last_mut()) {
                (Letter::Func(f), Some(Letter::Func(g))) => *g = g.mul(f),
                _ => word.push(l.clone()),
            }
        }
        let mut folded = Vec::new();
        for l in word {
            if let Letter::Func(f) = &l {
                if f.is_zero() {
                    continue 'terms;
                }
                if let Some(s) = f.as_scalar() {
                    coeff = coeff.mul(&s);
                    continue;
                }
            }
            folded.push(l);
        }
        out = out.add(&NCPoly::monomial(coeff, folded));
    }
    basis_expand_poly(&out)
}

/// Total reduction, basis expansion, and total reduction again.
pub fn residue<C: IntDiffAlgebra>(sys: &RewriteSystem<C>, p: &NCPoly<C>) -> Result<(NCPoly<C>, Vec<String>)> {
    let (r, steps) = sys.total_reduce_traced(p)?;
    let (r, more) = sys.total_reduce_traced(&basis_expand_poly(&r))?;
    let trace = steps.iter().chain(more.iter()).map(|s| s.line()).collect();
    Ok((r, trace))
}

/// Checks every overlap ambiguity of `sys` with the given generic parameters.
pub fn check_system<C: IntDiffAlgebra>(sys: &RewriteSystem<C>, generic: &Generic<C>, expected: usize) -> Result<ConfluenceReport> {
    let mut forks = Vec::new();
    for amb in sys.find_ambiguities(generic) {
        let s = s_polynomial(&amb);
        let trivial = coefficient_collapse(&s).is_zero();
        let (r, trace) = residue(sys, &s)?;
        forks.push(ForkResult {
            sigma: amb.sigma.clone(),
            tau: amb.tau.clone(),
            word: render_word(&amb.word()),
            s_polynomial: s.render(),
            trivial,
            trace,
            residue: r.render(),
            resolved: r.is_zero(),
        });
    }
    Ok(ConfluenceReport { forks, ground_forks: Vec::new(), expected_nontrivial: expected })
}

/// Words `e∫…` and `…e∫` overlapping an operator rule; each one-step reduct must vanish.
fn ground_fork_words(u: &Fhat, phi: &CharSym) -> Vec<Word<Fhat>> {
    use Letter::{Char, Deriv, Func, Integ};
    let e = Letter::eval0();
    vec![
        vec![e.clone(), Integ, Func(u.clone()), Integ],
        vec![e.clone(), Integ, Func(u.clone()), Deriv],
        vec![e.clone(), Integ, Func(u.clone()), Char(phi.clone())],
        vec![Char(phi.clone()), e.clone(), Integ],
        vec![Deriv, e.clone(), Integ],
        vec![Integ, Func(u.clone()), e, Integ],
    ]
}

fn check_ground_forks(set: &ParamRuleSet) -> Result<Vec<ForkResult>> {
    let u = &set.generic.funcs[0];
    let phi = &set.generic.chars[0];
    let mut out = Vec::new();
    for word in ground_fork_words(u, phi) {
        for rule in set.system.rules() {
            for pos in 0..word.len() {
                let Some((len, b)) = rule.match_at(&word, pos) else { continue };
                let reduct = (rule.rewrite)(&b).sandwich(&word[..pos], &word[pos + len..]);
                let (r, trace) = residue(&set.system, &reduct)?;
                out.push(ForkResult {
                    sigma: "eval-int".into(),
                    tau: rule.name.clone(),
                    word: render_word(&word),
                    s_polynomial: reduct.render(),
                    trivial: false,
                    trace,
                    residue: r.render(),
                    resolved: r.is_zero(),
                });
            }
        }
    }
    Ok(out)
}

/// The full check over `F̂`: 17 nontrivial S-polynomials expected.
pub fn check_confluence() -> Result<ConfluenceReport> {
    let set = build_parametrized_system();
    let mut report = check_system(&set.system, &set.generic, 17)?;
    report.ground_forks = check_ground_forks(&set)?;
    Ok(report)
}

/// Substitutes concrete functions for `u`, `v`, `w` and evaluation points for
/// the generic characters in a generic operator polynomial.
pub fn substitute_generic(p: &NCPoly<Fhat>, funcs: &[CoeffFunction; 3], points: &[Gauss; 3]) -> NCPoly<CoeffFunction> {
    let chars = generic_characters();
    let point = |ch: &CharSym| -> CharSym {
        match chars.iter().position(|c| c == ch) {
            Some(i) => CharSym::Point(points[i].clone()),
            None => ch.clone(),
        }
    };
    let mut out = NCPoly::zero();
    for (w, c) in p.terms() {
        let word = w
            .iter()
            .map(|l| match l {
                Letter::Func(f) => Letter::Func(substitute_fhat(f, funcs, &point)),
                Letter::Char(ch) => Letter::Char(point(ch)),
                other => substitute_letter(other),
            })
            .collect();
        out = out.add(&NCPoly::monomial(c.clone(), word));
    }
    out
}

fn substitute_letter(l: &Letter<Fhat>) -> Letter<CoeffFunction> {
    match l {
        Letter::Deriv => Letter::Deriv,
        Letter::Integ => Letter::Integ,
        Letter::Indet(n, k) => Letter::Indet(n.clone(), *k),
        Letter::Char(_) | Letter::Func(_) => unreachable!("handled by the caller"),
    }
}

fn substitute_fhat(f: &Fhat, funcs: &[CoeffFunction; 3], point: &dyn Fn(&CharSym) -> CharSym) -> CoeffFunction {
    let [a, b, c] = funcs;
    let lift_v = |p: &Puv| p.substitute(b, &|q: &Pu| q.substitute_fn(a));
    let concrete = |q: &Puvw| q.substitute(c, &lift_v);
    let mut out = CoeffFunction::zero();
    for (m, coeff) in f.terms() {
        let mut term = concrete(coeff);
        for ((ch, atom), e) in m {
            let value = concrete(atom).char_value(&point(ch));
            term = term.mul(&value.pow(*e));
        }
        out = out.plus(&term);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncreduce::RuleSchema;

    #[test]
    fn single_rule_has_no_ambiguities() {
        let rules: Vec<RuleSchema<Fhat>> = crate::intdiffop::operator_rules().into_iter().filter(|r| r.name == "section").collect();
        let sys = RewriteSystem::new(rules).unwrap();
        let set = build_parametrized_system();
        assert!(sys.find_ambiguities(&set.generic).is_empty());
    }

    #[test]
    fn baxter_fork_resolves() {
        let set = build_parametrized_system();
        let amb = set.system.find_ambiguities(&set.generic).into_iter().find(|a| a.sigma == "baxter" && a.tau == "baxter").unwrap();
        let (r, _) = residue(&set.system, &s_polynomial(&amb)).unwrap();
        assert!(r.is_zero(), "{}", r.render());
    }
}
