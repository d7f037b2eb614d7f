//! Scalars: ℚ(i) extended by symbolic constants `exp(q)`.
//!
//! A scalar is a fraction of two finite sums `Σ c·exp(q)`. Distinct exponents are
//! linearly independent, so the sums form an integral domain and the fractions a field.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::gauss::{rational_gcd, Gauss};

/// A finite sum `Σ c·exp(q)` keyed by exponent `q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ExpPoly {
    terms: BTreeMap<Gauss, Gauss>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn constant(c: Gauss) -> Self {
        ExpPoly::monomial(Gauss::zero(), c)
    }

    pub fn monomial(q: Gauss, c: Gauss) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(q, c);
        }
        ExpPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Gauss, &Gauss)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().map(|(q, c)| q.is_zero() && c.is_one()).unwrap_or(false)
    }

    fn add_term(&mut self, q: Gauss, c: Gauss) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&q) {
            Some(v) => {
                *v = &*v + &c;
                v.is_zero()
            }
            None => {
                self.terms.insert(q, c);
                return;
            }
        };
        if remove {
            self.terms.remove(&q);
        }
    }

    pub fn add(&self, o: &ExpPoly) -> ExpPoly {
        let mut r = self.clone();
        for (q, c) in &o.terms {
            r.add_term(q.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly { terms: self.terms.iter().map(|(q, c)| (q.clone(), -c)).collect() }
    }

    pub fn mul(&self, o: &ExpPoly) -> ExpPoly {
        let mut r = ExpPoly::zero();
        for (q1, c1) in &self.terms {
            for (q2, c2) in &o.terms {
                r.add_term(q1 + q2, c1 * c2);
            }
        }
        r
    }

    pub fn scale(&self, c: &Gauss) -> ExpPoly {
        if c.is_zero() {
            return ExpPoly::zero();
        }
        ExpPoly { terms: self.terms.iter().map(|(q, v)| (q.clone(), v * c)).collect() }
    }

    pub fn shift(&self, by: &Gauss) -> ExpPoly {
        ExpPoly { terms: self.terms.iter().map(|(q, v)| (q + by, v.clone())).collect() }
    }

    fn first(&self) -> Option<(&Gauss, &Gauss)> {
        self.terms.iter().next()
    }

    fn single(&self) -> Option<(&Gauss, &Gauss)> {
        if self.terms.len() == 1 {
            self.first()
        } else {
            None
        }
    }

    fn render_with(&self, exp_fmt: impl Fn(&Gauss) -> String, coef_fmt: impl Fn(&Gauss) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (q, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = if neg { -c } else { c.clone() };
            let body = if q.is_zero() {
                coef_fmt(&a)
            } else if a.is_one() {
                exp_fmt(q)
            } else {
                format!("{}*{}", coef_fmt(&a), exp_fmt(q))
            };
            match (idx, neg) {
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (0, false) => out.push_str(&body),
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    fn render(&self) -> String {
        self.render_with(
            |q| format!("exp({})", q.render()),
            |c| {
                if c.is_atomic() {
                    c.render()
                } else {
                    format!("({})", c.render())
                }
            },
        )
    }

    fn latex(&self) -> String {
        let s = self.render_with(
            |q| format!("e^{{{}}}", q.latex()),
            |c| {
                if c.is_atomic() {
                    c.latex()
                } else {
                    format!("\\left({}\\right)", c.latex())
                }
            },
        );
        s.replace('*', " ")
    }
}

/// A scalar `num/den`. The denominator is `1` whenever it is a unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Scalar {
    num: ExpPoly,
    den: ExpPoly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { num: ExpPoly::zero(), den: ExpPoly::constant(Gauss::one()) }
    }

    pub fn one() -> Self {
        Scalar::from_gauss(Gauss::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::from_gauss(Gauss::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::from_gauss(Gauss::ratio(n, d))
    }

    pub fn from_gauss(c: Gauss) -> Self {
        Scalar { num: ExpPoly::constant(c), den: ExpPoly::constant(Gauss::one()) }
    }

    /// The symbolic constant `exp(q)`.
    pub fn exp(q: Gauss) -> Self {
        Scalar { num: ExpPoly::monomial(q, Gauss::one()), den: ExpPoly::constant(Gauss::one()) }
    }

    pub fn from_exp_poly(p: ExpPoly) -> Self {
        Scalar { num: p, den: ExpPoly::constant(Gauss::one()) }
    }

    pub fn numer(&self) -> &ExpPoly {
        &self.num
    }

    pub fn denom(&self) -> &ExpPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// The value as a Gaussian rational, if it has no exponential part.
    pub fn as_gauss(&self) -> Option<Gauss> {
        if !self.den.is_one() {
            return None;
        }
        if self.num.is_zero() {
            return Some(Gauss::zero());
        }
        match self.num.single() {
            Some((q, c)) if q.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    /// Number of printed summands; fractions count as one.
    pub fn term_count(&self) -> usize {
        if self.den.is_one() {
            self.num.len()
        } else {
            1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.den.is_one() && self.num.len() == 1 && self.num.first().map(|(_, c)| c.is_negative()).unwrap_or(false)
    }

    fn make(num: ExpPoly, den: ExpPoly) -> Scalar {
        assert!(!den.is_zero(), "scalar with zero denominator");
        if num.is_zero() {
            return Scalar::zero();
        }
        if den.single().is_some() {
            return Scalar::normalized(num, den);
        }
        let (num, den) = cancel_common(num, den);
        Scalar::normalized(num, den)
    }

    /// Scales `num/den` so that the denominator is `1` or has leading term `exp(0)`.
    fn normalized(num: ExpPoly, den: ExpPoly) -> Scalar {
        if num.is_zero() {
            return Scalar::zero();
        }
        let (q, c) = den.first().map(|(q, c)| (q.clone(), c.clone())).expect("nonzero");
        let inv = c.inv();
        let shift = -q;
        let den = if den.len() == 1 { ExpPoly::constant(Gauss::one()) } else { den.shift(&shift).scale(&inv) };
        Scalar { num: num.shift(&shift).scale(&inv), den }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: self.num.add(&o.num), den: self.den.clone() };
        }
        if self.den == o.den {
            return Scalar::make(self.num.add(&o.num), self.den.clone());
        }
        for (a, b) in [(self, o), (o, self)] {
            if a.den.is_one() {
                return Scalar::normalized(b.num.add(&a.num.mul(&b.den)), b.den.clone());
            }
        }
        match split_common(&self.den, &o.den) {
            Some((g, b, d)) => {
                let t = self.num.mul(&d).add(&o.num.mul(&b));
                if t.is_zero() {
                    return Scalar::zero();
                }
                let (t, g) = cancel_common(t, g);
                Scalar::normalized(t, b.mul(&d).mul(&g))
            }
            None => Scalar::make(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)),
        }
    }

    pub fn neg(&self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: self.num.mul(&o.num), den: self.den.clone() };
        }
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        for (a, b) in [(self, o), (o, self)] {
            if a.den.is_one() && a.num.len() == 1 {
                return Scalar { num: b.num.mul(&a.num), den: b.den.clone() };
            }
        }
        if self.den == o.den {
            return Scalar::normalized(self.num.mul(&o.num), self.den.mul(&o.den));
        }
        let (n1, d2) = cancel_common(self.num.clone(), o.den.clone());
        let (n2, d1) = cancel_common(o.num.clone(), self.den.clone());
        Scalar::normalized(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn mul_gauss(&self, c: &Gauss) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero scalar");
        Scalar::make(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Scalar) -> Scalar {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn render(&self) -> String {
        if self.den.is_one() {
            self.num.render()
        } else {
            format!("({})/({})", self.num.render(), self.den.render())
        }
    }

    /// Rendering safe to place in a product.
    pub fn render_factor(&self) -> String {
        if let Some(g) = self.as_gauss() {
            return g.render_factor();
        }
        if self.den.is_one() && self.num.len() == 1 {
            let (_, c) = self.num.first().expect("one term");
            if c.is_one() {
                return self.num.render();
            }
        }
        format!("({})", self.render())
    }

    pub fn latex(&self) -> String {
        if self.den.is_one() {
            self.num.latex()
        } else {
            format!("\\frac{{{}}}{{{}}}", self.num.latex(), self.den.latex())
        }
    }
}

impl From<Gauss> for Scalar {
    fn from(g: Gauss) -> Self {
        Scalar::from_gauss(g)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Removes the common factor of `num` and `den` when all exponents lie on one
/// rational line; otherwise only monomial factors are removed.
fn cancel_common(num: ExpPoly, den: ExpPoly) -> (ExpPoly, ExpPoly) {
    match split_common(&num, &den) {
        Some((_, n, d)) => (n, d),
        None => (num, den),
    }
}

/// `(g, a/g, b/g)` for a nontrivial common factor `g`, when all exponents lie on one rational line.
fn split_common(a: &ExpPoly, b: &ExpPoly) -> Option<(ExpPoly, ExpPoly, ExpPoly)> {
    let qa = a.first().map(|(q, _)| q.clone()).expect("nonzero");
    let qb = b.first().map(|(q, _)| q.clone()).expect("nonzero");
    let a0 = a.shift(&-&qa);
    let b0 = b.shift(&-&qb);
    let exps: Vec<&Gauss> = a0.terms.keys().chain(b0.terms.keys()).collect();
    let dir = (*exps.iter().find(|q| !q.is_zero())?).clone();
    let mut ratios = Vec::new();
    for q in &exps {
        ratios.push(q.rational_multiple_of(&dir)?);
    }
    let g = rational_gcd(&ratios);
    let step = Gauss::new(&dir.re * &g, &dir.im * &g);
    let to_dense = |p: &ExpPoly| -> (i64, Vec<Gauss>) {
        let pairs: Vec<(i64, Gauss)> = p
            .terms
            .iter()
            .map(|(q, c)| {
                let r = q.rational_multiple_of(&step).unwrap_or_else(BigRational::zero);
                let n: i64 = num_traits::ToPrimitive::to_i64(&r.to_integer()).expect("exponent fits");
                (n, c.clone())
            })
            .collect();
        let lo = pairs.iter().map(|(n, _)| *n).min().unwrap_or(0);
        let hi = pairs.iter().map(|(n, _)| *n).max().unwrap_or(0);
        let mut v = vec![Gauss::zero(); (hi - lo + 1) as usize];
        for (n, c) in pairs {
            v[(n - lo) as usize] = c;
        }
        (lo, v)
    };
    let (la, da) = to_dense(&a0);
    let (lb, db) = to_dense(&b0);
    let g_poly = poly_gcd(&da, &db);
    if g_poly.len() <= 1 {
        return None;
    }
    let (qa_poly, _) = poly_divrem(&da, &g_poly);
    let (qb_poly, _) = poly_divrem(&db, &g_poly);
    let from_dense = |lo: i64, v: &[Gauss], base: &Gauss| -> ExpPoly {
        let mut p = ExpPoly::zero();
        for (i, c) in v.iter().enumerate() {
            let k = BigRational::from_integer((lo + i as i64).into());
            let q = Gauss::new(&step.re * &k, &step.im * &k);
            p.add_term(&q + base, c.clone());
        }
        p
    };
    Some((from_dense(0, &g_poly, &Gauss::zero()), from_dense(la, &qa_poly, &qa), from_dense(lb, &qb_poly, &qb)))
}

fn poly_trim(mut v: Vec<Gauss>) -> Vec<Gauss> {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    v
}

fn poly_divrem(a: &[Gauss], b: &[Gauss]) -> (Vec<Gauss>, Vec<Gauss>) {
    let b = poly_trim(b.to_vec());
    let mut r = poly_trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lb = b.last().expect("nonzero divisor").inv();
    let mut q = vec![Gauss::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().expect("nonempty") * &lb;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(&c * bc);
        }
        q[shift] = c;
        r = poly_trim(r);
    }
    (poly_trim(q), r)
}

fn poly_monic(v: Vec<Gauss>) -> Vec<Gauss> {
    match v.last() {
        Some(l) if !l.is_one() => {
            let inv = l.inv();
            v.iter().map(|c| c * &inv).collect()
        }
        _ => v,
    }
}

fn poly_gcd(a: &[Gauss], b: &[Gauss]) -> Vec<Gauss> {
    let mut x = poly_monic(poly_trim(a.to_vec()));
    let mut y = poly_monic(poly_trim(b.to_vec()));
    while !y.is_empty() {
        let (_, r) = poly_divrem(&x, &y);
        x = y;
        y = poly_monic(r);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_constants_multiply() {
        let a = Scalar::exp(Gauss::int(2));
        let b = Scalar::exp(Gauss::int(-2));
        assert!(a.mul(&b).is_one());
        assert_eq!(a.render(), "exp(2)");
    }

    #[test]
    fn fractions_cancel() {
        let e = Scalar::exp(Gauss::int(1));
        let num = e.mul(&e).sub(&Scalar::one());
        let den = e.sub(&Scalar::one());
        let q = num.div(&den);
        assert_eq!(q, e.add(&Scalar::one()));
    }

    #[test]
    fn fraction_is_canonical() {
        let e = Scalar::exp(Gauss::int(1));
        let d = e.sub(&e.inv());
        let a = d.inv();
        let b = Scalar::exp(Gauss::int(3)).div(&Scalar::exp(Gauss::int(4)).sub(&Scalar::exp(Gauss::int(2))));
        assert_eq!(a, b);
        assert!(a.mul(&d).is_one());
    }

    #[test]
    fn render_negative_terms() {
        let s = Scalar::exp(Gauss::int(-1)).sub(&Scalar::exp(Gauss::int(1)));
        assert_eq!(s.render(), "exp(-1) - exp(1)");
        assert_eq!(Scalar::ratio(1, 2).render_factor(), "(1/2)");
    }
}
