//! Boundary problems, Green's operators and Green's functions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coeffalg::parse::parse_function;
use crate::coeffalg::{CharSym, CoeffFunction, Gauss, IntDiffAlgebra, Scalar};
use crate::error::{Error, Result};
use crate::intdiffop::{compact, parse_condition, parse_normal, stieltjes_normal_form, BoundaryCondition, NormalOperator};

pub type Condition = BoundaryCondition<CoeffFunction>;
pub type Operator = NormalOperator<CoeffFunction>;

/// A monic differential operator `∂^n + c_{n-1}∂^{n-1} + … + c_0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOperator {
    coeffs: Vec<CoeffFunction>,
}

impl DiffOperator {
    /// From the lower coefficients `c_0 … c_{n-1}`.
    pub fn new(coeffs: Vec<CoeffFunction>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("differential operator of order 0".into()));
        }
        Ok(DiffOperator { coeffs })
    }

    /// `Π (∂ - λ_i)`.
    pub fn from_roots(roots: &[Gauss]) -> Result<Self> {
        let mut poly = vec![Gauss::one()];
        for r in roots {
            let mut next = vec![Gauss::zero(); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] = &next[k + 1] + c;
                next[k] = &next[k] - &(c * r);
            }
            poly = next;
        }
        poly.pop();
        DiffOperator::new(poly.into_iter().map(|c| CoeffFunction::constant(Scalar::from_gauss(c))).collect())
    }

    /// Reads a monic differential operator from text such as `D^2 - 1`.
    pub fn parse(src: &str) -> Result<Self> {
        DiffOperator::from_normal(&parse_normal(src)?)
    }

    pub fn from_normal(op: &Operator) -> Result<Self> {
        let (d, i, b) = op.decompose();
        if !i.is_zero() || !b.is_zero() {
            return Err(Error::Precondition(format!("{} is not a differential operator", op.render())));
        }
        let n = d.order().ok_or_else(|| Error::Precondition("zero operator".into()))?;
        let diff = d.diff_part();
        if !diff[&n].is_one() {
            return Err(Error::Precondition(format!("{} is not monic", op.render())));
        }
        DiffOperator::new((0..n).map(|i| diff.get(&i).cloned().unwrap_or_else(CoeffFunction::zero)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[CoeffFunction] {
        &self.coeffs
    }

    pub fn to_normal(&self) -> Operator {
        let mut all = self.coeffs.clone();
        all.push(CoeffFunction::one());
        NormalOperator::differential(&all)
    }

    pub fn apply(&self, u: &CoeffFunction) -> CoeffFunction {
        self.to_normal().apply(u)
    }

    pub fn compose(&self, o: &DiffOperator) -> Result<DiffOperator> {
        DiffOperator::from_normal(&self.to_normal().multiply(&o.to_normal())?)
    }

    pub fn render(&self) -> String {
        self.to_normal().render()
    }

    /// The constant coefficients, if all coefficients are Gaussian rationals.
    pub fn constant_coeffs(&self) -> Option<Vec<Gauss>> {
        self.coeffs.iter().map(|c| c.constant_value().and_then(|s| s.as_gauss())).collect()
    }
}

/// A fundamental system `u_1 … u_n`.
pub type FundamentalSystem = Vec<CoeffFunction>;

/// A boundary problem `(T, [β_1 … β_n])`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoundaryProblem {
    pub op: DiffOperator,
    pub conds: Vec<Condition>,
}

impl BoundaryProblem {
    /// Checks that there are `order` linearly independent conditions.
    pub fn new(op: DiffOperator, conds: Vec<Condition>) -> Result<Self> {
        if conds.len() != op.order() {
            return Err(Error::Precondition(format!("{} conditions for an operator of order {}", conds.len(), op.order())));
        }
        if condition_rank(&conds) != conds.len() {
            return Err(Error::Precondition("boundary conditions are linearly dependent".into()));
        }
        Ok(BoundaryProblem { op, conds })
    }

    /// Reads `"<operator>,[<cond>, …]"`, e.g. `D,[E[0]]`.
    pub fn parse_inline(src: &str) -> Result<Self> {
        let open = src.find('[').ok_or_else(|| Error::parse(src.len(), "expected '[' starting the condition list"))?;
        let head = src[..open].trim_end();
        let head = head.strip_suffix(',').ok_or_else(|| Error::parse(open, "expected ',' before the condition list"))?;
        let close = src.rfind(']').filter(|&c| c > open).ok_or_else(|| Error::parse(src.len(), "expected ']'"))?;
        if !src[close + 1..].trim().is_empty() {
            return Err(Error::parse(close + 1, "unexpected trailing input"));
        }
        let op = DiffOperator::parse(head)?;
        let conds = split_top_level(&src[open + 1..close])
            .into_iter()
            .map(|(off, s)| parse_condition(s).map_err(|e| shift_error(e, open + 1 + off)))
            .collect::<Result<Vec<_>>>()?;
        BoundaryProblem::new(op, conds)
    }

    /// Reads the JSON problem format.
    pub fn from_json(src: &str) -> Result<Self> {
        let f: ProblemFile = serde_json::from_str(src).map_err(|e| Error::parse(e.column(), e.to_string()))?;
        f.to_problem()
    }

    pub fn to_json(&self) -> String {
        let f = ProblemFile {
            operator: OperatorSpec { order: self.op.order(), coeffs: self.op.coeffs.iter().map(compact).collect() },
            conditions: self.conds.iter().map(|c| c.render()).collect(),
        };
        serde_json::to_string(&f).expect("serializable")
    }

    pub fn order(&self) -> usize {
        self.op.order()
    }

    /// Text form `T, [β_1, …]`.
    pub fn render(&self) -> String {
        format!("{}, [{}]", self.op.render(), self.conds.iter().map(|c| c.render()).collect::<Vec<_>>().join(", "))
    }

    pub fn latex(&self) -> String {
        format!("\\left({}, [{}]\\right)", self.op.to_normal().latex(), self.conds.iter().map(|c| c.latex()).collect::<Vec<_>>().join(", "))
    }
}

fn shift_error(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + by, msg },
        other => other,
    }
}

/// Splits on commas outside brackets and parentheses; yields offsets.
fn split_top_level(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() || !out.is_empty() {
        out.push((start, &s[start..]));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct OperatorSpec {
    order: usize,
    coeffs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    operator: OperatorSpec,
    conditions: Vec<String>,
}

impl ProblemFile {
    fn to_problem(&self) -> Result<BoundaryProblem> {
        if self.operator.coeffs.len() != self.operator.order {
            return Err(Error::parse(0, "coefficient count differs from the order"));
        }
        let coeffs = self.operator.coeffs.iter().map(|c| parse_function(c)).collect::<Result<Vec<_>>>()?;
        let conds = self.conditions.iter().map(|c| parse_condition(c)).collect::<Result<Vec<_>>>()?;
        BoundaryProblem::new(DiffOperator::new(coeffs)?, conds)
    }
}

// ---------------------------------------------------------------------------
// Linear algebra

trait Ring: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Ring for CoeffFunction {
    fn zero() -> Self {
        CoeffFunction::zero()
    }
    fn is_zero(&self) -> bool {
        IntDiffAlgebra::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self.plus(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.times(o)
    }
    fn neg(&self) -> Self {
        self.negate()
    }
}

impl Ring for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
}

/// Laplace expansion by memoized column subsets; `m` must be nonempty.
#[allow(clippy::needless_range_loop)]
fn det<T: Ring>(m: &[Vec<T>]) -> T {
    let n = m.len();
    // dp[mask]: determinant of the rows 0..popcount(mask) restricted to columns in mask
    let mut dp: BTreeMap<u32, T> = BTreeMap::new();
    for j in 0..n {
        dp.insert(1 << j, m[0][j].clone());
    }
    for row in 1..n {
        let mut next: BTreeMap<u32, T> = BTreeMap::new();
        for (mask, v) in &dp {
            if v.is_zero() {
                continue;
            }
            for (j, entry) in m[row].iter().enumerate() {
                if mask & (1 << j) != 0 || entry.is_zero() {
                    continue;
                }
                let above = (mask >> (j + 1)).count_ones();
                let term = v.mul(entry);
                let term = if above % 2 == 1 { term.neg() } else { term };
                let e = next.entry(mask | (1 << j)).or_insert_with(T::zero);
                *e = e.add(&term);
            }
        }
        dp = next;
    }
    dp.remove(&((1u32 << n) - 1)).unwrap_or_else(T::zero)
}

/// Rank of a scalar matrix.
#[allow(clippy::needless_range_loop)]
pub fn scalar_rank(m: &[Vec<Scalar>]) -> usize {
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].inv();
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].mul(&inv);
                for c in col..cols {
                    let v = a[r][c].sub(&f.mul(&a[rank][c]));
                    a[r][c] = v;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Reduced row echelon form; returns the matrix and its pivot columns.
#[allow(clippy::needless_range_loop)]
pub fn rref(m: &[Vec<Scalar>]) -> (Vec<Vec<Scalar>>, Vec<usize>) {
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].inv();
        for c in col..cols {
            a[rank][c] = a[rank][c].mul(&inv);
        }
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..cols {
                    let v = a[r][c].sub(&f.mul(&a[rank][c]));
                    a[r][c] = v;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    a.truncate(rank);
    (a, pivots)
}

/// Inverse of a square scalar matrix, if regular.
pub fn scalar_inverse(m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let aug: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn scalar_det(m: &[Vec<Scalar>]) -> Scalar {
    if m.is_empty() {
        return Scalar::one();
    }
    det(m)
}

fn function_det(m: &[Vec<CoeffFunction>]) -> CoeffFunction {
    if m.is_empty() {
        return CoeffFunction::one();
    }
    det(m)
}

/// Coordinates of conditions over `(φ, i)` and `(φ, basis word of the integrand)`.
fn condition_coordinates(conds: &[Condition]) -> Vec<Vec<Scalar>> {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Coord {
        Local(CharSym, u32),
        Global(CharSym, CoeffFunction),
    }
    let mut keys: BTreeMap<Coord, usize> = BTreeMap::new();
    let mut rows: Vec<BTreeMap<Coord, Scalar>> = Vec::new();
    for c in conds {
        let mut row = BTreeMap::new();
        for (phi, part) in c.parts() {
            for (i, a) in &part.local {
                row.insert(Coord::Local(phi.clone(), *i), a.clone());
            }
            for (s, w) in part.global.basis_expand() {
                row.insert(Coord::Global(phi.clone(), w), s);
            }
        }
        for k in row.keys() {
            let n = keys.len();
            keys.entry(k.clone()).or_insert(n);
        }
        rows.push(row);
    }
    let order: Vec<Coord> = keys.keys().cloned().collect();
    rows.iter().map(|row| order.iter().map(|k| row.get(k).cloned().unwrap_or_else(Scalar::zero)).collect()).collect()
}

/// Dimension of the span of the conditions.
pub fn condition_rank(conds: &[Condition]) -> usize {
    if conds.is_empty() {
        return 0;
    }
    scalar_rank(&condition_coordinates(conds))
}

/// Whether two lists of conditions span the same space.
pub fn span_equal(a: &[Condition], b: &[Condition]) -> bool {
    let ra = condition_rank(a);
    let rb = condition_rank(b);
    let mut all = a.to_vec();
    all.extend(b.iter().cloned());
    ra == rb && condition_rank(&all) == ra
}

// ---------------------------------------------------------------------------
// Fundamental systems

/// `β_i(u_j)`.
pub fn evaluation_matrix(conds: &[Condition], fundsys: &[CoeffFunction]) -> Vec<Vec<Scalar>> {
    conds.iter().map(|b| fundsys.iter().map(|u| b.apply(u).constant_value().expect("conditions take constant values")).collect()).collect()
}

pub fn is_regular(problem: &BoundaryProblem, fundsys: &[CoeffFunction]) -> bool {
    !scalar_det(&evaluation_matrix(&problem.conds, fundsys)).is_zero()
}

/// The Wronskian matrix `(u_j^{(i)})`.
pub fn wronskian_matrix(fundsys: &[CoeffFunction]) -> Vec<Vec<CoeffFunction>> {
    let n = fundsys.len();
    let mut rows = Vec::with_capacity(n);
    let mut cur: Vec<CoeffFunction> = fundsys.to_vec();
    for _ in 0..n {
        rows.push(cur.clone());
        cur = cur.iter().map(|u| u.derivative()).collect();
    }
    rows
}

pub fn wronskian(fundsys: &[CoeffFunction]) -> CoeffFunction {
    function_det(&wronskian_matrix(fundsys))
}

/// Checks `T·u_i = 0` and returns the fundamental system.
pub fn check_fundsys(op: &DiffOperator, fundsys: &[CoeffFunction]) -> Result<()> {
    if fundsys.len() != op.order() {
        return Err(Error::Precondition(format!("{} functions for an operator of order {}", fundsys.len(), op.order())));
    }
    for u in fundsys {
        if !IntDiffAlgebra::is_zero(&op.apply(u)) {
            return Err(Error::Precondition(format!("{} is not annihilated by {}", u.render(), op.render())));
        }
    }
    Ok(())
}

/// Variation of constants: `T^◆ = Σ u_i ∫ d^{-1} d_i`.
pub fn fundamental_right_inverse(op: &DiffOperator, fundsys: &[CoeffFunction]) -> Result<Operator> {
    check_fundsys(op, fundsys)?;
    let w = wronskian_matrix(fundsys);
    let d = function_det(&w);
    let dinv = d.invert().map_err(|_| Error::NotInvertibleWronskian(d.render()))?;
    let n = fundsys.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        let mut wi = w.clone();
        for (r, row) in wi.iter_mut().enumerate() {
            row[i] = if r == n - 1 { CoeffFunction::one() } else { CoeffFunction::zero() };
        }
        let di = function_det(&wi);
        let g = dinv.times(&di);
        if !IntDiffAlgebra::is_zero(&g) {
            pairs.push((fundsys[i].clone(), g));
        }
    }
    Ok(NormalOperator::from_parts(BTreeMap::new(), pairs, Vec::new()))
}

/// `Σ μ_i e^{λ_i x}∫e^{-λ_i x}` for distinct roots.
pub fn fri_constant_coeff(roots: &[Gauss]) -> Result<Operator> {
    for (i, a) in roots.iter().enumerate() {
        if roots[..i].contains(a) {
            return Err(Error::RepeatedRoot(a.render()));
        }
    }
    let mut pairs = Vec::new();
    for (i, l) in roots.iter().enumerate() {
        let mut prod = Gauss::one();
        for (j, m) in roots.iter().enumerate() {
            if i != j {
                prod = &prod * &(l - m);
            }
        }
        let mu = Scalar::from_gauss(prod.inv());
        pairs.push((CoeffFunction::exp_lin(l.clone()).scaled(&mu), CoeffFunction::exp_lin(-l)));
    }
    Ok(NormalOperator::from_parts(BTreeMap::new(), pairs, Vec::new()))
}

fn eval_poly(p: &[Gauss], z: &Gauss) -> Gauss {
    p.iter().rev().fold(Gauss::zero(), |acc, c| &(&acc * z) + c)
}

fn deflate(p: &[Gauss], z: &Gauss) -> Vec<Gauss> {
    let n = p.len() - 1;
    let mut q = vec![Gauss::zero(); n];
    let mut carry = Gauss::zero();
    for k in (1..=n).rev() {
        carry = &(&carry * z) + &p[k];
        q[k - 1] = carry.clone();
    }
    q
}

/// Best rational approximation with bounded denominator.
fn rationalize(x: f64, max_den: i64) -> num_rational::BigRational {
    use num_bigint::BigInt;
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        let ai = a as i64;
        let h2 = ai.saturating_mul(h1).saturating_add(h0);
        let k2 = ai.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den || k2 <= 0 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    num_rational::BigRational::new(BigInt::from(h1), BigInt::from(k1))
}

fn to_f64(g: &Gauss) -> (f64, f64) {
    use num_traits::ToPrimitive;
    (g.re.to_f64().unwrap_or(0.0), g.im.to_f64().unwrap_or(0.0))
}

/// Approximate complex roots by the Durand–Kerner iteration.
fn approx_roots(p: &[Gauss]) -> Vec<(f64, f64)> {
    let n = p.len() - 1;
    let lead = to_f64(&p[n]);
    let coeffs: Vec<(f64, f64)> = p.iter().map(to_f64).collect();
    let cmul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let cdiv = |a: (f64, f64), b: (f64, f64)| {
        let d = b.0 * b.0 + b.1 * b.1;
        ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
    };
    let eval = |z: (f64, f64)| {
        let mut acc = (0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = cmul(acc, z);
            acc = (acc.0 + c.0, acc.1 + c.1);
        }
        cdiv(acc, lead)
    };
    let mut zs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let base = (0.4f64, 0.9f64);
            let mut z = (1.0, 0.0);
            for _ in 0..k {
                z = cmul(z, base);
            }
            z
        })
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den = cmul(den, (zs[i].0 - zs[j].0, zs[i].1 - zs[j].1));
                }
            }
            let step = cdiv(eval(zs[i]), den);
            zs[i] = (zs[i].0 - step.0, zs[i].1 - step.1);
            delta = delta.max(step.0.abs() + step.1.abs());
        }
        if delta < 1e-14 {
            break;
        }
    }
    zs
}

/// Gaussian-rational roots with multiplicities of `Σ p_k λ^k`.
pub fn gauss_roots(p: &[Gauss]) -> Result<Vec<(Gauss, usize)>> {
    let mut poly = p.to_vec();
    while poly.last().map(|c| c.is_zero()).unwrap_or(false) {
        poly.pop();
    }
    let mut found: Vec<(Gauss, usize)> = Vec::new();
    while poly.len() > 1 {
        let mut progress = false;
        for (re, im) in approx_roots(&poly) {
            for den in [1_000i64, 100_000] {
                let z = Gauss::new(rationalize(re, den), rationalize(im, den));
                if eval_poly(&poly, &z).is_zero() {
                    poly = deflate(&poly, &z);
                    match found.iter_mut().find(|(r, _)| *r == z) {
                        Some(e) => e.1 += 1,
                        None => found.push((z, 1)),
                    }
                    progress = true;
                    break;
                }
            }
            if progress {
                break;
            }
        }
        if !progress {
            return Err(Error::Precondition("characteristic roots are not all Gaussian rationals".into()));
        }
    }
    found.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(found)
}

/// The characteristic roots of a constant-coefficient operator.
pub fn characteristic_roots(op: &DiffOperator) -> Result<Vec<(Gauss, usize)>> {
    let mut p = op.constant_coeffs().ok_or_else(|| Error::Precondition("operator has nonconstant coefficients".into()))?;
    p.push(Gauss::one());
    gauss_roots(&p)
}

/// `{x^j e^{λx}}` from the characteristic roots.
pub fn constant_coeff_fundsys(op: &DiffOperator) -> Result<FundamentalSystem> {
    let mut out = Vec::new();
    for (l, m) in characteristic_roots(op)? {
        for j in 0..m {
            out.push(CoeffFunction::monomial(Scalar::one(), j as u32, l.clone()));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Green's operators

/// `P = Σ u_i β̃_i` with `β̃ = M^{-1}β`.
pub fn projector(fundsys: &[CoeffFunction], conds: &[Condition]) -> Result<Operator> {
    let m = evaluation_matrix(conds, fundsys);
    let inv = scalar_inverse(&m).ok_or(Error::SingularProblem)?;
    let mut bound = Vec::new();
    for (i, u) in fundsys.iter().enumerate() {
        let mut bt = Condition::zero();
        for (j, b) in conds.iter().enumerate() {
            if !inv[i][j].is_zero() {
                bt = bt.add(&b.scale(&inv[i][j]));
            }
        }
        bound.push((u.clone(), bt));
    }
    Ok(NormalOperator::from_parts(BTreeMap::new(), Vec::new(), bound))
}

/// `G = (1 - P)T^◆ = T^◆ - Σ u_i Σ_j (M^{-1})_{ij} β_j T^◆`.
pub fn greens_operator(problem: &BoundaryProblem, fundsys: &[CoeffFunction]) -> Result<Operator> {
    let fri = fundamental_right_inverse(&problem.op, fundsys)?;
    let inv = scalar_inverse(&evaluation_matrix(&problem.conds, fundsys)).ok_or(Error::SingularProblem)?;
    let images = problem.conds.iter().map(|b| condition_times(b, &fri)).collect::<Result<Vec<_>>>()?;
    let mut bound = Vec::new();
    for (u, row) in fundsys.iter().zip(&inv) {
        let mut bt = Condition::zero();
        for (img, s) in images.iter().zip(row) {
            if !s.is_zero() {
                bt = bt.add(&img.scale(s));
            }
        }
        bound.push((u.clone(), bt));
    }
    Ok(fri.sub(&NormalOperator::from_parts(BTreeMap::new(), Vec::new(), bound)))
}

/// Solves with a derived fundamental system when `T` has constant coefficients.
pub fn solve(problem: &BoundaryProblem, fundsys: Option<&[CoeffFunction]>) -> Result<Operator> {
    let derived;
    let u = match fundsys {
        Some(u) => u,
        None => {
            derived = constant_coeff_fundsys(&problem.op)?;
            &derived
        }
    };
    greens_operator(problem, u)
}

pub fn apply_green(g: &Operator, f: &CoeffFunction) -> CoeffFunction {
    g.apply(f)
}

/// `β·U` as a boundary condition.
pub fn condition_times(b: &Condition, op: &Operator) -> Result<Condition> {
    stieltjes_normal_form(&b.to_poly().mul(&op.flatten()))
}

/// `(T_1T_2, B_2 + B_1·T_2)`, conditions of `P_2` first.
pub fn compose(p1: &BoundaryProblem, p2: &BoundaryProblem) -> Result<BoundaryProblem> {
    let op = p1.op.compose(&p2.op)?;
    let t2 = p2.op.to_normal();
    let mut conds = p2.conds.clone();
    for b in &p1.conds {
        conds.push(condition_times(b, &t2)?);
    }
    Ok(BoundaryProblem { op, conds })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Factors `problem` along `T = T_1T_2`; returns `(left, right)`.
pub fn factor(
    problem: &BoundaryProblem,
    t1: &DiffOperator,
    t2: &DiffOperator,
    fundsys2: Option<&[CoeffFunction]>,
) -> Result<(BoundaryProblem, BoundaryProblem)> {
    if t1.compose(t2)? != problem.op {
        return Err(Error::Precondition(format!("{} is not the product of {} and {}", problem.op.render(), t1.render(), t2.render())));
    }
    let derived;
    let u2 = match fundsys2 {
        Some(u) => u,
        None => {
            derived = constant_coeff_fundsys(t2)?;
            &derived
        }
    };
    check_fundsys(t2, u2)?;
    let n2 = t2.order();
    let mut right = None;
    for subset in combinations(problem.conds.len(), n2) {
        let conds: Vec<Condition> = subset.iter().map(|&i| problem.conds[i].clone()).collect();
        let candidate = BoundaryProblem { op: t2.clone(), conds };
        if is_regular(&candidate, u2) {
            right = Some(candidate);
            break;
        }
    }
    let right = right.ok_or(Error::NoRegularRightFactor)?;
    let g2 = greens_operator(&right, u2)?;
    let mut left_conds: Vec<Condition> = Vec::new();
    for b in &problem.conds {
        let c = condition_times(b, &g2)?;
        if c.is_zero() {
            continue;
        }
        let mut trial = left_conds.clone();
        trial.push(c.clone());
        if condition_rank(&trial) == trial.len() {
            left_conds = trial;
        }
    }
    let left = BoundaryProblem::new(t1.clone(), left_conds)?;
    Ok((left, right))
}

// ---------------------------------------------------------------------------
// Green's functions

/// `g(x,ξ) = Σ_lower a(x)b(ξ)·[ξ≤x] + Σ_global c(x)d(ξ)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GreenKernel {
    pub lower: Vec<(CoeffFunction, CoeffFunction)>,
    pub global: Vec<(CoeffFunction, CoeffFunction)>,
}

pub fn greens_function(g: &Operator) -> Result<GreenKernel> {
    if !g.diff_part().is_empty() {
        return Err(Error::NotAKernelOperator("operator has a differential part".into()));
    }
    let lower = g.int_part();
    let mut global = Vec::new();
    let right = CharSym::Point(Gauss::one());
    for (f, b) in g.bound_part() {
        for (phi, part) in b.parts() {
            if !part.local.is_empty() {
                return Err(Error::NotAKernelOperator(format!("local condition term at {}", phi.render())));
            }
            if *phi != right {
                return Err(Error::NotAKernelOperator(format!("character {} outside {{E[0], E[1]}}", phi.render())));
            }
            global.push((f.clone(), part.global.clone()));
        }
    }
    Ok(GreenKernel { lower, global })
}

/// A kernel as a sum of rank-one products `a(x)·b(ξ)`.
pub type RankOne = Vec<(CoeffFunction, CoeffFunction)>;

/// Bilinear coefficients of `Σ a(x)b(ξ)` over basis words.
fn coefficient_table(pairs: &[(CoeffFunction, CoeffFunction)]) -> BTreeMap<(CoeffFunction, CoeffFunction), Scalar> {
    let mut t: BTreeMap<(CoeffFunction, CoeffFunction), Scalar> = BTreeMap::new();
    for (a, b) in pairs {
        for (s, wa) in a.basis_expand() {
            for (r, wb) in b.basis_expand() {
                let e = t.entry((wa.clone(), wb)).or_insert_with(Scalar::zero);
                *e = e.add(&s.mul(&r));
            }
        }
    }
    t.retain(|_, v| !v.is_zero());
    t
}

/// Minimal rank-one decomposition with monic `b` factors.
pub fn rank_one_terms(pairs: &[(CoeffFunction, CoeffFunction)]) -> RankOne {
    let t = coefficient_table(pairs);
    if t.is_empty() {
        return Vec::new();
    }
    let rows: Vec<CoeffFunction> = t.keys().map(|(a, _)| a.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().rev().collect();
    let cols: Vec<CoeffFunction> = t.keys().map(|(_, b)| b.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().rev().collect();
    let m: Vec<Vec<Scalar>> =
        rows.iter().map(|a| cols.iter().map(|b| t.get(&(a.clone(), b.clone())).cloned().unwrap_or_else(Scalar::zero)).collect()).collect();
    let (r, pivots) = rref(&m);
    let mut out = Vec::new();
    for (k, row) in r.iter().enumerate() {
        let b = CoeffFunction::from_terms(cols.iter().zip(row).filter(|(_, s)| !s.is_zero()).map(|(w, s)| {
            let ((deg, l), _) = w.terms().next().map(|(k, v)| (k.clone(), v.clone())).expect("basis word");
            (s.clone(), deg, l)
        }));
        let a = CoeffFunction::from_terms(rows.iter().enumerate().filter(|(i, _)| !m[*i][pivots[k]].is_zero()).map(|(i, w)| {
            let ((deg, l), _) = w.terms().next().map(|(k, v)| (k.clone(), v.clone())).expect("basis word");
            (m[i][pivots[k]].clone(), deg, l)
        }));
        out.push((a, b));
    }
    out
}

impl GreenKernel {
    /// `(ξ ≤ x region, ξ > x region)` as rank-one sums.
    pub fn regions(&self) -> (RankOne, RankOne) {
        let mut lower = self.lower.clone();
        lower.extend(self.global.iter().cloned());
        (rank_one_terms(&lower), rank_one_terms(&self.global))
    }

    /// Text such as `g(x,ξ) = ξ(x-1) [ξ≤x]; x(ξ-1) [ξ>x]`.
    pub fn render(&self) -> String {
        let (lo, up) = self.regions();
        format!("g(x,ξ) = {} [ξ≤x]; {} [ξ>x]", render_rank_one(&lo), render_rank_one(&up))
    }

    pub fn latex(&self) -> String {
        let (lo, up) = self.regions();
        format!("g(x,\\xi) = \\begin{{cases}} {} & \\xi \\le x \\\\ {} & \\xi > x \\end{{cases}}", latex_rank_one(&lo), latex_rank_one(&up))
    }

    /// `G = Σ a*A*b + Σ c*(R.A)*d - Σ c*A*d` from the two regions.
    pub fn operator_text(&self) -> String {
        let (lo, up) = self.regions();
        let mut terms: Vec<(bool, String)> = Vec::new();
        for (a, b) in &lo {
            terms.push(op_term(a, "A", b));
        }
        for (c, d) in &up {
            terms.push(op_term(c, "(R.A)", d));
            let (neg, body) = op_term(c, "A", d);
            terms.push((!neg, body));
        }
        join_signed(&terms)
    }

    /// `u(x) = ∫[0,x] … dξ + ∫[x,1] … dξ` for an opaque forcing term.
    pub fn integral_text(&self, forcing: &str) -> String {
        let (lo, up) = self.regions();
        let f = if forcing.contains('x') { in_xi(forcing) } else { format!("{}(ξ)", forcing.trim()) };
        let part = |r: &RankOne, range: &str| -> Option<String> {
            if r.is_empty() {
                return None;
            }
            let k = render_rank_one(r);
            let k = if r.len() > 1 { format!("({})", k) } else { k };
            Some(format!("∫[{}] {}*{} dξ", range, k, f))
        };
        let pieces: Vec<String> = [part(&lo, "0,x"), part(&up, "x,1")].into_iter().flatten().collect();
        if pieces.is_empty() {
            "u(x) = 0".into()
        } else {
            format!("u(x) = {}", pieces.join(" + "))
        }
    }
}

fn in_xi(s: &str) -> String {
    s.replace("exp", "\u{0}").replace('x', "ξ").replace('\u{0}', "exp")
}

fn is_single(f: &CoeffFunction) -> bool {
    f.len() == 1
}

/// `(negative?, text)` of a single-term function as a factor.
fn factor_text(f: &CoeffFunction) -> (bool, String) {
    if is_single(f) && f.terms().next().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        let g = f.negate();
        (true, if g.is_one() { String::new() } else { compact(&g) })
    } else if f.is_one() {
        (false, String::new())
    } else if is_single(f) {
        (false, compact(f))
    } else {
        (false, format!("({})", compact(f)))
    }
}

fn render_rank_one(terms: &RankOne) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut signed = Vec::new();
    for (a, b) in terms {
        let (na, ta) = factor_text(a);
        let (nb, tb) = factor_text(b);
        let tb = in_xi(&tb);
        let mut singles = Vec::new();
        let mut multis = Vec::new();
        for t in [tb, ta] {
            if t.is_empty() {
                continue;
            }
            if t.starts_with('(') {
                multis.push(t);
            } else {
                singles.push(t);
            }
        }
        let mut body = singles.join("*");
        for m in multis {
            body.push_str(&m);
        }
        if body.is_empty() {
            body.push('1');
        }
        signed.push((na != nb, body));
    }
    join_signed(&signed)
}

fn latex_rank_one(terms: &RankOne) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut signed = Vec::new();
    for (a, b) in terms {
        let (na, a) =
            if is_single(a) && a.terms().next().map(|(_, c)| c.is_negative()).unwrap_or(false) { (true, a.negate()) } else { (false, a.clone()) };
        let (nb, b) =
            if is_single(b) && b.terms().next().map(|(_, c)| c.is_negative()).unwrap_or(false) { (true, b.negate()) } else { (false, b.clone()) };
        let wrap = |f: &CoeffFunction, xi: bool| -> String {
            let s = f.latex();
            let s = if xi { s.replace("exp", "\u{0}").replace('x', "\\xi ").replace('\u{0}', "exp") } else { s };
            if f.is_one() {
                String::new()
            } else if is_single(f) {
                s
            } else {
                format!("\\left({}\\right)", s)
            }
        };
        let mut body = format!("{}{}", wrap(&b, true), wrap(&a, false));
        if body.is_empty() {
            body.push('1');
        }
        signed.push((na != nb, body.trim().to_string()));
    }
    join_signed(&signed)
}

fn op_term(a: &CoeffFunction, mid: &str, b: &CoeffFunction) -> (bool, String) {
    let (na, ta) = factor_text(a);
    let (nb, tb) = factor_text(b);
    let mut parts = Vec::new();
    if !ta.is_empty() {
        parts.push(ta);
    }
    parts.push(mid.to_string());
    if !tb.is_empty() {
        parts.push(tb);
    }
    (na != nb, parts.join("*"))
}

fn join_signed(terms: &[(bool, String)]) -> String {
    let mut out = String::new();
    for (k, (neg, body)) in terms.iter().enumerate() {
        if k == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> BoundaryProblem {
        BoundaryProblem::parse_inline("D^2,[E[0], E[1]]").unwrap()
    }

    #[test]
    fn fri_of_second_derivative() {
        let op = DiffOperator::parse("D^2").unwrap();
        let f = fundamental_right_inverse(&op, &[CoeffFunction::one(), CoeffFunction::x()]).unwrap();
        assert_eq!(f.render(), "x*A - A*x");
    }

    #[test]
    fn kernel_of_two_point_problem() {
        let g = solve(&two_point(), None).unwrap();
        let k = greens_function(&g).unwrap();
        assert_eq!(k.render(), "g(x,ξ) = ξ(x-1) [ξ≤x]; x(ξ-1) [ξ>x]");
        assert_eq!(k.operator_text(), "(x-1)*A*x + x*(R.A)*(x-1) - x*A*(x-1)");
    }

    #[test]
    fn forcing_x() {
        let g = solve(&two_point(), None).unwrap();
        let u = g.apply(&CoeffFunction::x());
        assert_eq!(u, parse_function("(x^3 - x)/6").unwrap());
    }

    #[test]
    fn characteristic_roots_of_d4_plus_4() {
        let op = DiffOperator::parse("D^4 + 4").unwrap();
        let r = characteristic_roots(&op).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|(_, m)| *m == 1));
    }
}
