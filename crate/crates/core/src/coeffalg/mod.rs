//! Coefficient algebras with derivation, integral, evaluation and characters.

pub mod function;
pub mod gauss;
pub mod parse;
pub mod scalar;

use std::cmp::Ordering;
use std::fmt;

pub use function::CoeffFunction;
pub use gauss::Gauss;
pub use scalar::{ExpPoly, Scalar};

/// A multiplicative functional: evaluation at a point, or a generic symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CharSym {
    Point(Gauss),
    Generic(String),
}

/// Alias kept for the point-evaluation case.
pub type Character = CharSym;

impl CharSym {
    /// The evaluation `e` at the initialization point 0.
    pub fn eval0() -> Self {
        CharSym::Point(Gauss::zero())
    }

    pub fn at(c: Gauss) -> Self {
        CharSym::Point(c)
    }

    pub fn is_eval0(&self) -> bool {
        matches!(self, CharSym::Point(c) if c.is_zero())
    }

    pub fn point(&self) -> Option<&Gauss> {
        match self {
            CharSym::Point(c) => Some(c),
            CharSym::Generic(_) => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            CharSym::Point(c) => format!("E[{}]", c.render()),
            CharSym::Generic(n) => n.clone(),
        }
    }

    pub fn latex(&self) -> String {
        match self {
            CharSym::Point(c) => format!("\\mathrm{{e}}_{{{}}}", c.latex()),
            CharSym::Generic(n) => n.clone(),
        }
    }
}

impl fmt::Display for CharSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// An ordinary integro-differential algebra over the scalars.
///
/// `Ord` is structural and only used for container keys; `basis_expand` defines
/// the canonical form and `leading_cmp` the order used by rewriting.
pub trait IntDiffAlgebra: Clone + Eq + Ord + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_scalar(s: &Scalar) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: &Scalar) -> Self;
    fn derive(&self) -> Self;
    /// The distinguished integral; a section of `derive` with `evaluate(integrate(f)) = 0`.
    fn integrate(&self) -> Self;
    /// The evaluation `e = 1 - ∫∂`, returned as a constant element.
    fn evaluate(&self) -> Self;
    /// The value of a character, returned as a constant element.
    fn char_value(&self, ch: &CharSym) -> Self;
    /// Canonical expansion over the basis, in ascending basis order.
    fn basis_expand(&self) -> Vec<(Scalar, Self)>;
    /// The element as a scalar multiple of `1`, if it is one.
    fn as_scalar(&self) -> Option<Scalar>;
    /// Splits a basis word into a part fixed by every character and multiplicative atoms.
    fn char_split(word: &Self) -> (Self, Vec<Self>);
    fn render(&self) -> String;
    fn latex(&self) -> String;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn is_one(&self) -> bool {
        self.as_scalar().map(|s| s.is_one()).unwrap_or(false)
    }

    /// Rendering safe to place in a product.
    fn render_factor(&self) -> String {
        let terms = self.basis_expand();
        if terms.len() == 1 && terms[0].0.is_one() {
            self.render()
        } else if terms.len() == 1 && terms[0].1.is_one() && terms[0].0.term_count() == 1 && !terms[0].0.is_negative() {
            terms[0].0.render_factor()
        } else {
            format!("({})", self.render())
        }
    }

    /// Compares leading basis words.
    fn leading_cmp(&self, o: &Self) -> Ordering {
        let a = self.basis_expand();
        let b = o.basis_expand();
        a.last().map(|t| &t.1).cmp(&b.last().map(|t| &t.1))
    }

    fn is_constant(&self) -> bool {
        self.derive().is_zero()
    }
}
