//! Truncated Baker-Campbell-Hausdorff series and the arithmetic around it.
//!
//! `Φ(X, Y) = log(exp X · exp Y)` is computed by composing truncated series
//! in the free associative algebra on `X, Y`. Its homogeneous pieces `u_n`
//! are Lie elements, so they can be evaluated in any Lie algebra through the
//! Dynkin-Specht-Wever projection `P ↦ (1/n) Σ c_w [w_1, [w_2, … w_n]]`.
//! That gives the group-law polynomials of a lattice without choosing a
//! Hall basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, valuation_unchecked, ArithError, PExponent, PadicApprox, Valuation};
use crate::lie::LieAlgebra;
use crate::linalg::{IntMatrix, RationalMatrix};
use crate::rational::{format_q, q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BchError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("powerful condition fails for bracket [{i}, {j}]")]
    NotPowerful { i: usize, j: usize },
    #[error("truncation degree must be positive")]
    Degree,
}

pub type Result<T> = std::result::Result<T, BchError>;

/// A word in the letters `X = 0`, `Y = 1`, ordered by length, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u8>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &c in &self.0 {
            write!(f, "{}", if c == 0 { 'X' } else { 'Y' })?;
        }
        Ok(())
    }
}

impl Word {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "1" {
            return Some(Word(vec![]));
        }
        s.chars()
            .map(|c| match c {
                'X' => Some(0),
                'Y' => Some(1),
                _ => None,
            })
            .collect::<Option<Vec<u8>>>()
            .map(Word)
    }
}

/// Non-commutative polynomial in `X, Y` truncated above degree `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCPolynomial {
    degree: usize,
    terms: BTreeMap<Word, Q>,
}

impl NCPolynomial {
    pub fn zero(degree: usize) -> Self {
        NCPolynomial { degree, terms: BTreeMap::new() }
    }

    pub fn one(degree: usize) -> Self {
        Self::monomial(degree, Word(vec![]), Q::one())
    }

    pub fn monomial(degree: usize, w: Word, c: Q) -> Self {
        let mut p = Self::zero(degree);
        p.add_term(w, c);
        p
    }

    pub fn x(degree: usize) -> Self {
        Self::monomial(degree, Word(vec![0]), Q::one())
    }

    pub fn y(degree: usize) -> Self {
        Self::monomial(degree, Word(vec![1]), Q::one())
    }

    fn add_term(&mut self, w: Word, c: Q) {
        if w.0.len() > self.degree || c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Word, Q> {
        &self.terms
    }

    pub fn coefficient(&self, w: &str) -> Q {
        Word::parse(w).and_then(|w| self.terms.get(&w).cloned()).unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.degree = self.degree.min(other.degree);
        out.terms.retain(|w, _| w.0.len() <= out.degree);
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.degree);
        for (w, x) in &self.terms {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let degree = self.degree.min(other.degree);
        let mut acc: BTreeMap<Word, Q> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if a.0.len() + b.0.len() > degree {
                    continue;
                }
                let mut w = a.0.clone();
                w.extend_from_slice(&b.0);
                *acc.entry(Word(w)).or_insert_with(Q::zero) += x * y;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        NCPolynomial { degree, terms: acc }
    }

    /// The degree-`k` homogeneous part.
    pub fn homogeneous(&self, k: usize) -> Self {
        NCPolynomial {
            degree: self.degree,
            terms: self.terms.iter().filter(|(w, _)| w.0.len() == k).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    fn constant_term(&self) -> Q {
        self.terms.get(&Word(vec![])).cloned().unwrap_or_else(Q::zero)
    }

    /// `exp(f)` for `f` without constant term.
    pub fn exp(&self) -> Self {
        assert!(self.constant_term().is_zero(), "exp needs a series without constant term");
        let mut out = Self::one(self.degree);
        let mut power = Self::one(self.degree);
        let mut fact = Q::one();
        for k in 1..=self.degree {
            power = power.mul(self);
            fact *= q(k as i64);
            out = out.add(&power.scale(&fact.recip()));
        }
        out
    }

    /// `log(1 + f)` for `f` without constant term.
    pub fn log1p(&self) -> Self {
        assert!(self.constant_term().is_zero(), "log1p needs a series without constant term");
        let mut out = Self::zero(self.degree);
        let mut power = Self::one(self.degree);
        for k in 1..=self.degree {
            power = power.mul(self);
            let c = if k % 2 == 1 { q(1) } else { q(-1) } / q(k as i64);
            out = out.add(&power.scale(&c));
        }
        out
    }

    /// Word-to-coefficient map with `"num/den"` values.
    pub fn to_json(&self) -> BTreeMap<String, String> {
        self.terms.iter().map(|(w, c)| (w.to_string(), format_q(c))).collect()
    }
}

/// `log(exp X · exp Y)` truncated at degree `n`.
pub fn bch_series(n: usize) -> Result<NCPolynomial> {
    if n == 0 {
        return Err(BchError::Degree);
    }
    let z = NCPolynomial::x(n).exp().mul(&NCPolynomial::y(n).exp()).sub(&NCPolynomial::one(n));
    Ok(z.log1p())
}

// ---- Nilpotent matrices -------------------------------------------------

/// Polynomial in `t` with matrix coefficients, truncated at `t^n`.
type MatSeries = Vec<RationalMatrix>;

fn series_mul(a: &MatSeries, b: &MatSeries) -> MatSeries {
    let n = a.len() - 1;
    let dim = a[0].rows();
    let mut out = vec![RationalMatrix::zeros(dim, dim); n + 1];
    for i in 0..=n {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..=n - i {
            if !b[j].is_zero() {
                out[i + j] = out[i + j].add(&a[i].mul(&b[j]));
            }
        }
    }
    out
}

fn exp_t(x: &RationalMatrix, n: usize) -> MatSeries {
    let mut out = Vec::with_capacity(n + 1);
    let mut power = RationalMatrix::identity(x.rows());
    let mut fact = Q::one();
    out.push(power.clone());
    for k in 1..=n {
        power = power.mul(x);
        fact *= q(k as i64);
        out.push(power.scale(&fact.recip()));
    }
    out
}

fn is_nilpotent(x: &RationalMatrix) -> bool {
    let mut power = x.clone();
    for _ in 1..x.rows().max(1) {
        power = power.mul(x);
    }
    power.is_zero()
}

/// `u_1, …, u_n` with `log(exp(tx) exp(ty)) = Σ t^k u_k`.
pub fn bch_evaluate_nilpotent(x: &RationalMatrix, y: &RationalMatrix, n: usize) -> Result<Vec<RationalMatrix>> {
    if n == 0 {
        return Err(BchError::Degree);
    }
    if x.rows() != x.cols() || y.shape() != x.shape() {
        return Err(BchError::Shape(format!("{:?} and {:?}", x.shape(), y.shape())));
    }
    if !is_nilpotent(x) || !is_nilpotent(y) {
        return Err(BchError::NotNilpotent);
    }
    let dim = x.rows();
    let mut z = series_mul(&exp_t(x, n), &exp_t(y, n));
    z[0] = RationalMatrix::zeros(dim, dim);
    let mut out = vec![RationalMatrix::zeros(dim, dim); n + 1];
    let mut power: MatSeries = (0..=n).map(|k| if k == 0 { RationalMatrix::identity(dim) } else { RationalMatrix::zeros(dim, dim) }).collect();
    for k in 1..=n {
        power = series_mul(&power, &z);
        let c = if k % 2 == 1 { q(1) } else { q(-1) } / q(k as i64);
        for (o, pk) in out.iter_mut().zip(&power) {
            *o = o.add(&pk.scale(&c));
        }
    }
    out.remove(0);
    Ok(out)
}

fn min_valuation(m: &RationalMatrix, p: u64) -> Valuation {
    m.nonzeros().map(|(_, _, x)| valuation_unchecked(x, p)).min().unwrap_or(Valuation::Infinite)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationCheck {
    pub n: usize,
    pub required: i64,
    pub observed: Valuation,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilpotentReport {
    pub p: u64,
    /// Smallest entry valuation on the lattice basis.
    pub lattice_floor: i64,
    pub checks: Vec<ValuationCheck>,
    pub first_term_ok: bool,
}

impl NilpotentReport {
    pub fn is_ok(&self) -> bool {
        self.first_term_ok && self.checks.iter().all(|c| c.ok)
    }
}

/// Checks `[B_i, B_j] ∈ p^κ L` for the lattice `L` spanned by `basis`.
pub fn check_powerful_lattice(basis: &[RationalMatrix], p: u64) -> Result<()> {
    let kappa = arith::kappa(p) as i64;
    let vecs: Vec<Vec<Q>> = basis.iter().map(RationalMatrix::to_vec).collect();
    let cols = RationalMatrix::from_columns(vecs.first().map_or(0, Vec::len), &vecs);
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i + 1) {
            let br = a.mul(b).sub(&b.mul(a));
            let coords = crate::linalg::solve_vec(&cols, &br.to_vec()).ok_or(BchError::NotPowerful { i, j })?;
            if coords.iter().any(|c| !c.is_zero() && valuation_unchecked(c, p) < Valuation::Finite(kappa)) {
                return Err(BchError::NotPowerful { i, j });
            }
        }
    }
    Ok(())
}

/// Runs [`bch_evaluate_nilpotent`] and scans entry valuations of `u_n`
/// against `κ(n-1) - h_n` plus the valuation floor of the lattice.
pub fn nilpotent_valuation_scan(
    x: &RationalMatrix,
    y: &RationalMatrix,
    lattice: &[RationalMatrix],
    p: u64,
    n: usize,
) -> Result<NilpotentReport> {
    check_powerful_lattice(lattice, p)?;
    let floor = lattice.iter().map(|b| min_valuation(b, p)).min().and_then(Valuation::finite).unwrap_or(0);
    let u = bch_evaluate_nilpotent(x, y, n)?;
    let mut checks = Vec::with_capacity(n);
    for (k, term) in u.iter().enumerate() {
        let c = arith::bch_constants(k as u64 + 1, p)?;
        let required = c.bound_exponent + floor;
        let observed = min_valuation(term, p);
        checks.push(ValuationCheck { n: k + 1, required, observed, ok: observed >= Valuation::Finite(required) });
    }
    Ok(NilpotentReport { p, lattice_floor: floor, checks, first_term_ok: u[0] == x.add(y) })
}

// ---- Commutative polynomials ---------------------------------------------

/// Polynomial in `nvars` commuting variables, exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl GaussPolynomial {
    pub fn zero(nvars: usize) -> Self {
        GaussPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, Q::one())
    }

    pub fn monomial(nvars: usize, exponents: Vec<u32>, c: Q) -> Self {
        assert_eq!(exponents.len(), nvars, "exponent length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exponents, c);
        }
        GaussPolynomial { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        GaussPolynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    fn mul_truncated(&self, other: &Self, degree: Option<u32>) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                if degree.map_or(true, |d| e.iter().sum::<u32>() <= d) {
                    out.add_term(e, x * y);
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn truncate(&self, degree: u32) -> Self {
        GaussPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() <= degree).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// `f(g_1, …, g_nvars)`, dropping terms above `degree` when given.
    pub fn substitute(&self, images: &[GaussPolynomial], degree: Option<u32>) -> Self {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let target = images.first().map_or(0, |g| g.nvars);
        let mut powers: HashMap<(usize, u32), GaussPolynomial> = HashMap::new();
        let mut out = GaussPolynomial::zero(target);
        for (e, c) in &self.terms {
            let mut term = GaussPolynomial::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = powers
                    .entry((i, k))
                    .or_insert_with(|| {
                        (0..k).fold(GaussPolynomial::constant(target, Q::one()), |acc, _| acc.mul_truncated(&images[i], degree))
                    })
                    .clone();
                term = term.mul_truncated(&pw, degree);
                if term.is_zero() {
                    break;
                }
            }
            out = out.add(&term);
        }
        out
    }
}

/// `max_n |a_n| ρ^{|n|}`.
pub fn gauss_norm(f: &GaussPolynomial, rho: &PExponent, p: u64) -> PExponent {
    f.terms.iter().fold(PExponent::zero(p), |acc, (e, c)| {
        let deg: u32 = e.iter().sum();
        acc.max(PExponent::abs_of(c, p).mul(&rho.pow(&q(deg as i64))))
    })
}

// ---- Group law ------------------------------------------------------------

type PolyVec = Vec<GaussPolynomial>;

fn bracket(g: &LieAlgebra, u: &PolyVec, v: &PolyVec, degree: u32) -> PolyVec {
    let d = g.dim();
    let nvars = u[0].nvars();
    let mut out = vec![GaussPolynomial::zero(nvars); d];
    for i in 0..d {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..d {
            if i == j || v[j].is_zero() {
                continue;
            }
            let prod = u[i].mul_truncated(&v[j], Some(degree));
            for (k, c) in g.basis_bracket(i, j).iter().enumerate() {
                if !c.is_zero() {
                    out[k] = out[k].add(&prod.scale(c));
                }
            }
        }
    }
    out
}

/// Applies a Lie polynomial in `X, Y` to `x, y` through the right-normed
/// projection, degree by degree.
pub fn evaluate_lie_polynomial(g: &LieAlgebra, f: &NCPolynomial, x: &PolyVec, y: &PolyVec, degree: u32) -> PolyVec {
    let nvars = x[0].nvars();
    let mut memo: HashMap<Vec<u8>, PolyVec> = HashMap::new();
    let mut out = vec![GaussPolynomial::zero(nvars); g.dim()];
    for (w, c) in f.terms() {
        let n = w.0.len();
        if n == 0 {
            continue;
        }
        let value = right_normed(g, &w.0, x, y, degree, &mut memo);
        let scale = c / q(n as i64);
        for (o, v) in out.iter_mut().zip(&value) {
            *o = o.add(&v.scale(&scale));
        }
    }
    out
}

fn right_normed(
    g: &LieAlgebra,
    w: &[u8],
    x: &PolyVec,
    y: &PolyVec,
    degree: u32,
    memo: &mut HashMap<Vec<u8>, PolyVec>,
) -> PolyVec {
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let head = if w[0] == 0 { x } else { y };
    let value = if w.len() == 1 { head.clone() } else { bracket(g, head, &right_normed(g, &w[1..], x, y, degree, memo), degree) };
    memo.insert(w.to_vec(), value.clone());
    value
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientViolation {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub required: i64,
    pub observed: i64,
}

#[derive(Debug, Clone)]
pub struct GroupLaw {
    pub p: u64,
    pub degree: usize,
    /// `Φ_i` in the variables `a_1..a_d, b_1..b_d`.
    pub polynomials: Vec<GaussPolynomial>,
    pub valuation_violations: Vec<CoefficientViolation>,
    pub associative: bool,
}

impl GroupLaw {
    pub fn is_ok(&self) -> bool {
        self.valuation_violations.is_empty() && self.associative
    }
}

/// Checks `c_{ij}^k ∈ p^κ Z_p` for every structure constant.
pub fn check_powerful(g: &LieAlgebra, p: u64) -> Result<()> {
    arith::p_valuation(&Q::zero(), p)?;
    let kappa = Valuation::Finite(arith::kappa(p) as i64);
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            if g.basis_bracket(i, j).iter().any(|c| valuation_unchecked(c, p) < kappa) {
                return Err(BchError::NotPowerful { i, j });
            }
        }
    }
    Ok(())
}

fn law_in(g: &LieAlgebra, series: &NCPolynomial, a: &PolyVec, b: &PolyVec, degree: u32) -> PolyVec {
    evaluate_lie_polynomial(g, series, a, b, degree)
}

pub fn group_law_polynomials(g: &LieAlgebra, p: u64, n: usize) -> Result<GroupLaw> {
    check_powerful(g, p)?;
    let d = g.dim();
    let series = bch_series(n)?;
    let degree = n as u32;
    let a: PolyVec = (0..d).map(|i| GaussPolynomial::var(2 * d, i)).collect();
    let b: PolyVec = (0..d).map(|i| GaussPolynomial::var(2 * d, d + i)).collect();
    let polynomials = law_in(g, &series, &a, &b, degree);

    let mut valuation_violations = Vec::new();
    for (i, f) in polynomials.iter().enumerate() {
        for (e, c) in f.terms() {
            let k: u32 = e.iter().sum();
            let required = arith::bch_constants(k as u64, p)?.bound_exponent;
            let observed = valuation_unchecked(c, p).finite().expect("nonzero coefficient");
            if observed < required {
                valuation_violations.push(CoefficientViolation { component: i, exponents: e.clone(), required, observed });
            }
        }
    }

    // Φ(Φ(a,b),c) = Φ(a,Φ(b,c)) modulo degree n+1, in 3d variables.
    let v3 = |k: usize| -> PolyVec { (0..d).map(|i| GaussPolynomial::var(3 * d, k * d + i)).collect() };
    let (x, y, z) = (v3(0), v3(1), v3(2));
    let compose = |u: &PolyVec, v: &PolyVec| -> PolyVec {
        let images: Vec<GaussPolynomial> = u.iter().chain(v).cloned().collect();
        polynomials.iter().map(|f| f.substitute(&images, Some(degree))).collect()
    };
    let lhs = compose(&compose(&x, &y), &z);
    let rhs = compose(&x, &compose(&y, &z));
    Ok(GroupLaw { p, degree: n, polynomials, valuation_violations, associative: lhs == rhs })
}

// ---- Lattice contraction ----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub source_norm: PExponent,
    pub image_norm: PExponent,
    pub holds: bool,
    /// Smith diagonal of `alpha`.
    pub elementary_divisors: Vec<String>,
    /// Closed-form image norm, available when `alpha` is diagonal.
    pub structured_norm: Option<PExponent>,
    pub structured_match: Option<bool>,
}

/// `|α(x^n)|_ρ ≤ |x^n|_ρ` where `α(x_i) = Σ_j α_ij x_j`.
pub fn lattice_contraction_check(alpha: &IntMatrix, n: &[u32], rho: &PExponent) -> Result<ContractionReport> {
    let d = alpha.rows();
    if alpha.cols() != d || n.len() != d {
        return Err(BchError::Shape(format!("alpha is {}x{}, exponent has length {}", d, alpha.cols(), n.len())));
    }
    let p = rho.p;
    arith::p_valuation(&Q::zero(), p)?;
    let images: Vec<GaussPolynomial> = (0..d)
        .map(|i| {
            GaussPolynomial::from_terms(
                d,
                (0..d).map(|j| {
                    let mut e = vec![0; d];
                    e[j] = 1;
                    (e, Q::from_integer(alpha.get(i, j).clone()))
                }),
            )
        })
        .collect();
    let source = GaussPolynomial::monomial(d, n.to_vec(), Q::one());
    let image = source.substitute(&images, None);
    let source_norm = gauss_norm(&source, rho, p);
    let image_norm = gauss_norm(&image, rho, p);

    let smith = crate::linalg::smith_normal_form(alpha);
    let elementary_divisors = smith.diagonal().iter().map(BigInt::to_string).collect();
    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || alpha.get(i, j).is_zero()));
    let structured_norm = diagonal.then(|| {
        let mut norm = PExponent::one(p);
        for i in 0..d {
            if n[i] == 0 {
                continue;
            }
            let a = Q::from_integer(alpha.get(i, i).clone());
            norm = norm.mul(&PExponent::abs_of(&a, p).pow(&q(n[i] as i64))).mul(&rho.pow(&q(n[i] as i64)));
        }
        norm
    });
    let structured_match = structured_norm.as_ref().map(|s| s == &image_norm);
    Ok(ContractionReport { holds: image_norm <= source_norm, source_norm, image_norm, elementary_divisors, structured_norm, structured_match })
}

// ---- D_r norms --------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub alpha: Vec<u32>,
    pub residue: String,
    pub precision: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrExpansion {
    /// Nonzero coefficients of `Π (1+b_i)^{ν_i} - 1`, ordered by degree.
    pub series: Vec<SeriesTerm>,
    pub norm: PExponent,
    /// Largest `p^{-precision} r^{κ|α|}` over coefficients whose residue
    /// vanished; the true norm is at most `max(norm, error_bar)`.
    pub error_bar: PExponent,
    pub bound: PExponent,
    pub holds: bool,
}

fn multi_indices(d: usize, max: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 1..=max {
        for m in crate::lie::monomials(d, total) {
            let e: Vec<u32> = m.into_iter().map(|x| x as u32).collect();
            out.push(e);
        }
    }
    out
}

/// Expands `(1+b_1)^{ν_1}⋯(1+b_d)^{ν_d} - 1` to degree `n` and bounds its
/// norm `sup |c_α| r^{κ|α|}` against `r^κ`.
pub fn dr_norm_and_expansion(nu: &[PadicApprox], r: &PExponent, p: u64, n: usize) -> Result<DrExpansion> {
    arith::p_valuation(&Q::zero(), p)?;
    if nu.iter().any(|x| x.p() != p) || r.p != p {
        return Err(BchError::Arith(ArithError::PrimeMismatch(p, nu.iter().map(PadicApprox::p).find(|&x| x != p).unwrap_or(r.p))));
    }
    let kappa = q(arith::kappa(p) as i64);
    let d = nu.len();
    let mut binomials: Vec<Vec<PadicApprox>> = Vec::with_capacity(d);
    for x in nu {
        binomials.push((0..=n as u64).map(|k| arith::padic_binomial(x, k)).collect::<std::result::Result<_, _>>()?);
    }
    let mut series = Vec::new();
    let mut norm = PExponent::zero(p);
    let mut error_bar = PExponent::zero(p);
    for alpha in multi_indices(d, n) {
        let mut c = binomials[0][alpha[0] as usize].clone();
        for i in 1..d {
            c = c.mul(&binomials[i][alpha[i] as usize])?;
        }
        let deg: u32 = alpha.iter().sum();
        let weight = r.pow(&(&kappa * q(deg as i64)));
        match c.valuation() {
            Some(v) => {
                norm = norm.max(PExponent::new(p, q(-(v as i64))).mul(&weight));
                series.push(SeriesTerm { alpha, residue: c.residue().to_string(), precision: c.precision() });
            }
            None => {
                error_bar = error_bar.max(PExponent::new(p, q(-(c.precision() as i64))).mul(&weight));
            }
        }
    }
    let bound = r.pow(&kappa);
    let holds = norm <= bound && error_bar <= bound;
    Ok(DrExpansion { series, norm, error_bar, bound, holds })
}
