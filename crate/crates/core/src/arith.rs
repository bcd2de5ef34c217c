//! Exact `p`-adic arithmetic.
//!
//! Absolute values are normalized by `|p| = 1/p` and are always `p`-powers
//! (or zero), so they are stored as exact rational exponents: the value
//! `p^e` is a [`PExponent`] with exponent `e`. Nothing here touches floating
//! point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{q, qf, Q};

/// Default bound for the `k` and `m` searches in [`radius_params`].
pub const DEFAULT_SEARCH_BOUND: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("insufficient precision: need more than {needed} p-adic digits, have {have}")]
    InsufficientPrecision { needed: u32, have: u32 },
    #[error("value is not a p-adic integer (negative valuation)")]
    NotIntegral,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("search bound {0} exhausted")]
    SearchExhausted(u32),
    #[error("mismatched primes {0} and {1}")]
    PrimeMismatch(u64, u64),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(p: u64) -> Result<(), ArithError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(ArithError::NotPrime(p))
    }
}

/// `p`-adic valuation; `Infinite` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// Valuation of a nonzero integer; `None` for zero.
pub fn int_valuation(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (quo, rem) = n.div_rem(&p);
        if !rem.is_zero() {
            return Some(v);
        }
        n = quo;
        v += 1;
    }
}

pub fn p_valuation(x: &Q, p: u64) -> Result<Valuation, ArithError> {
    check_prime(p)?;
    Ok(valuation_unchecked(x, p))
}

pub(crate) fn valuation_unchecked(x: &Q, p: u64) -> Valuation {
    match (int_valuation(x.numer(), p), int_valuation(x.denom(), p)) {
        (None, _) => Valuation::Infinite,
        (Some(a), Some(b)) => Valuation::Finite(a as i64 - b as i64),
        (Some(_), None) => unreachable!("denominator is never zero"),
    }
}

/// A value `p^exponent`, or zero.
///
/// Ordering is the ordering of real numbers: zero is below every nonzero
/// value, and nonzero values compare by exponent. Values over different
/// primes are not comparable; comparing them panics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PExponent {
    pub p: u64,
    pub is_zero: bool,
    pub exponent: Q,
}

impl PExponent {
    pub fn new(p: u64, exponent: Q) -> Self {
        PExponent { p, is_zero: false, exponent }
    }

    pub fn zero(p: u64) -> Self {
        PExponent { p, is_zero: true, exponent: Q::zero() }
    }

    pub fn one(p: u64) -> Self {
        Self::new(p, Q::zero())
    }

    /// `|x|` under `|p| = 1/p`.
    pub fn abs_of(x: &Q, p: u64) -> Self {
        match valuation_unchecked(x, p) {
            Valuation::Infinite => Self::zero(p),
            Valuation::Finite(v) => Self::new(p, q(-v)),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "PExponent over different primes");
        if self.is_zero || other.is_zero {
            return Self::zero(self.p);
        }
        Self::new(self.p, &self.exponent + &other.exponent)
    }

    /// `self^k` for a rational power `k` (zero stays zero for `k > 0`).
    pub fn pow(&self, k: &Q) -> Self {
        if self.is_zero {
            return self.clone();
        }
        Self::new(self.p, &self.exponent * k)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for PExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.p, other.p, "PExponent over different primes");
        match (self.is_zero, other.is_zero) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.exponent.cmp(&other.exponent),
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            write!(f, "0")
        } else {
            write!(f, "{}^({})", self.p, crate::rational::format_q(&self.exponent))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PExponentJson {
    p: u64,
    exp_num: String,
    exp_den: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    zero: bool,
}

impl Serialize for PExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PExponentJson {
            p: self.p,
            exp_num: self.exponent.numer().to_string(),
            exp_den: self.exponent.denom().to_string(),
            zero: self.is_zero,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PExponentJson::deserialize(d)?;
        let num: BigInt = j.exp_num.parse().map_err(serde::de::Error::custom)?;
        let den: BigInt = j.exp_den.parse().map_err(serde::de::Error::custom)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero exponent denominator"));
        }
        if j.zero {
            Ok(PExponent::zero(j.p))
        } else {
            Ok(PExponent::new(j.p, Q::new(num, den)))
        }
    }
}

/// A `p`-adic integer known modulo `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicApprox {
    p: u64,
    precision: u32,
    residue: BigInt,
}

fn p_pow(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

impl PadicApprox {
    pub fn new(residue: BigInt, precision: u32, p: u64) -> Result<Self, ArithError> {
        check_prime(p)?;
        if precision == 0 {
            return Err(ArithError::OutOfRange("precision must be at least 1".into()));
        }
        let modulus = p_pow(p, precision);
        Ok(PadicApprox { p, precision, residue: residue.mod_floor(&modulus) })
    }

    pub fn from_int(n: i64, precision: u32, p: u64) -> Result<Self, ArithError> {
        Self::new(BigInt::from(n), precision, p)
    }

    /// Image of a rational with nonnegative valuation.
    pub fn from_rational(x: &Q, precision: u32, p: u64) -> Result<Self, ArithError> {
        check_prime(p)?;
        if int_valuation(x.denom(), p).unwrap_or(0) > 0 {
            return Err(ArithError::NotIntegral);
        }
        let modulus = p_pow(p, precision.max(1));
        let inv = mod_inverse(x.denom(), &modulus).expect("denominator is a p-unit");
        Self::new(x.numer() * inv, precision, p)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> BigInt {
        p_pow(self.p, self.precision)
    }

    /// Valuation, known exactly when below the precision; `None` when the
    /// residue vanishes (valuation at least `precision`).
    pub fn valuation(&self) -> Option<u32> {
        int_valuation(&self.residue, self.p).map(|v| v as u32)
    }

    /// Largest `v` such that the value is certainly divisible by `p^v`.
    pub fn valuation_lower_bound(&self) -> u32 {
        self.valuation().unwrap_or(self.precision)
    }

    fn check_same_prime(&self, other: &Self) -> Result<(), ArithError> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(ArithError::PrimeMismatch(self.p, other.p))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ArithError> {
        self.check_same_prime(other)?;
        Self::new(&self.residue + &other.residue, self.precision.min(other.precision), self.p)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.check_same_prime(other)?;
        Self::new(&self.residue - &other.residue, self.precision.min(other.precision), self.p)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ArithError> {
        self.check_same_prime(other)?;
        Self::new(&self.residue * &other.residue, self.precision.min(other.precision), self.p)
    }

    pub fn sub_int(&self, n: i64) -> Self {
        Self::new(&self.residue - BigInt::from(n), self.precision, self.p).expect("valid")
    }

    /// Division by a `p`-adic unit; precision is unchanged.
    pub fn div_unit(&self, u: &BigInt) -> Result<Self, ArithError> {
        let modulus = self.modulus();
        let inv = mod_inverse(u, &modulus).ok_or(ArithError::OutOfRange(format!("{u} is not a unit")))?;
        Self::new(&self.residue * inv, self.precision, self.p)
    }

    /// Division by `p^k`. The residue must be divisible by `p^k`, and the
    /// result is known only modulo `p^(precision - k)`.
    pub fn div_p_power(&self, k: u32) -> Result<Self, ArithError> {
        if k >= self.precision {
            return Err(ArithError::InsufficientPrecision { needed: k, have: self.precision });
        }
        let pk = p_pow(self.p, k);
        let (quo, rem) = self.residue.div_rem(&pk);
        if !rem.is_zero() {
            return Err(ArithError::NotIntegral);
        }
        Self::new(quo, self.precision - k, self.p)
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.p, self.precision)
    }
}

#[derive(Serialize, Deserialize)]
struct PadicJson {
    residue: String,
    #[serde(rename = "M")]
    m: u32,
    p: u64,
}

impl Serialize for PadicApprox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PadicJson { residue: self.residue.to_string(), m: self.precision, p: self.p }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicApprox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PadicJson::deserialize(d)?;
        let r: BigInt = j.residue.parse().map_err(serde::de::Error::custom)?;
        PadicApprox::new(r, j.m, j.p).map_err(serde::de::Error::custom)
    }
}

fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(modulus).extended_gcd(modulus);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(modulus))
    } else if modulus.is_one() {
        Some(BigInt::zero())
    } else {
        None
    }
}

/// `v_p(k!)` by Legendre's formula.
pub fn factorial_valuation(k: u64, p: u64) -> u32 {
    let mut v = 0u64;
    let mut pk = p;
    while pk <= k {
        v += k / pk;
        match pk.checked_mul(p) {
            Some(next) => pk = next,
            None => break,
        }
    }
    v as u32
}

/// `binom(nu, k)` for a `p`-adic integer `nu`, known modulo
/// `p^(M - v_p(k!))`.
pub fn padic_binomial(nu: &PadicApprox, k: u64) -> Result<PadicApprox, ArithError> {
    let loss = factorial_valuation(k, nu.p);
    if nu.precision <= loss {
        return Err(ArithError::InsufficientPrecision { needed: loss, have: nu.precision });
    }
    let mut num = PadicApprox::new(BigInt::one(), nu.precision, nu.p)?;
    let mut unit_part = BigInt::one();
    let pb = BigInt::from(nu.p);
    for i in 0..k {
        num = num.mul(&nu.sub_int(i as i64))?;
        let mut f = BigInt::from(i + 1);
        while (&f % &pb).is_zero() {
            f /= &pb;
        }
        unit_part *= f;
    }
    num.div_unit(&unit_part)?.div_p_power(loss)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BchConstants {
    pub kappa: u32,
    pub h_n: u64,
    pub bound_exponent: i64,
}

/// `κ = 1` for odd `p`, `κ = 2` for `p = 2`.
pub fn kappa(p: u64) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

pub fn bch_constants(n: u64, p: u64) -> Result<BchConstants, ArithError> {
    check_prime(p)?;
    if n == 0 {
        return Err(ArithError::OutOfRange("n must be positive".into()));
    }
    let kappa = kappa(p);
    let h_n = (n - 1) / (p - 1);
    let bound_exponent = kappa as i64 * (n as i64 - 1) - h_n as i64;
    Ok(BchConstants { kappa, h_n, bound_exponent })
}

/// The radius `ρ* = p^(κ - 1/(p-1))`.
pub fn rho_star(p: u64) -> Result<PExponent, ArithError> {
    check_prime(p)?;
    Ok(PExponent::new(p, q(kappa(p) as i64) - qf(1, p as i64 - 1)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusParams {
    pub h: u32,
    pub ell: u32,
    #[serde(rename = "in_sR")]
    pub in_sr: bool,
    #[serde(rename = "m")]
    pub m_witness: Option<u32>,
}

fn check_radius(r: &PExponent, p: u64) -> Result<(), ArithError> {
    check_prime(p)?;
    if r.p != p {
        return Err(ArithError::PrimeMismatch(r.p, p));
    }
    if r.is_zero || r.exponent <= q(-1) || r.exponent >= Q::zero() {
        return Err(ArithError::OutOfRange(format!("r = {r} is not in (1/p, 1)")));
    }
    Ok(())
}

fn check_field(p: u64, e: u32, q_res: u64) -> Result<(), ArithError> {
    if e == 0 {
        return Err(ArithError::OutOfRange("ramification index must be positive".into()));
    }
    let mut x = q_res;
    if x < p {
        return Err(ArithError::OutOfRange(format!("residue cardinality {q_res} is not a power of {p}")));
    }
    while x % p == 0 {
        x /= p;
    }
    if x != 1 {
        return Err(ArithError::OutOfRange(format!("residue cardinality {q_res} is not a power of {p}")));
    }
    Ok(())
}

fn big_pow_q(base: u64, k: u32) -> Q {
    Q::from_integer(p_pow(base, k))
}

/// All `m ≤ bound` with `p^(-1/(p-1) - 1/(e q^m)) < r^(κ p^m) < p^(-1/(p-1))`.
pub fn sr_witnesses(r: &PExponent, p: u64, e: u32, q_res: u64, bound: u32) -> Result<Vec<u32>, ArithError> {
    check_radius(r, p)?;
    check_field(p, e, q_res)?;
    let kap = q(kappa(p) as i64);
    let crit = -qf(1, p as i64 - 1);
    let mut out = Vec::new();
    for m in 0..=bound {
        let mid = &kap * big_pow_q(p, m) * &r.exponent;
        let lower = &crit - Q::from_integer(BigInt::one()) / (q(e as i64) * big_pow_q(q_res, m));
        if lower < mid && mid < crit {
            out.push(m);
        }
    }
    Ok(out)
}

pub fn radius_params(r: &PExponent, p: u64, e: u32, q_res: u64) -> Result<RadiusParams, ArithError> {
    radius_params_bounded(r, p, e, q_res, DEFAULT_SEARCH_BOUND)
}

/// [`radius_params`] with an explicit bound on the `k` and `m` searches.
pub fn radius_params_bounded(
    r: &PExponent,
    p: u64,
    e: u32,
    q_res: u64,
    bound: u32,
) -> Result<RadiusParams, ArithError> {
    check_radius(r, p)?;
    check_field(p, e, q_res)?;
    let kap = q(kappa(p) as i64);
    let r_kappa = &kap * &r.exponent;
    let crit = -qf(1, p as i64 - 1);

    // h = min{k : r^κ < p^(-1/((p-1) p^k))}
    let h = (0..=bound)
        .find(|&k| r_kappa < &crit / big_pow_q(p, k))
        .ok_or(ArithError::SearchExhausted(bound))?;

    // ell = min{m : |ϖ|^m p^h r^(κ p^h) < p^(-1/(p-1))}, with |ϖ| = p^(-1/e)
    let base = q(h as i64) + &kap * big_pow_q(p, h) * &r.exponent;
    let ell = (0..=bound)
        .find(|&m| &base - qf(m as i64, e as i64) < crit)
        .ok_or(ArithError::SearchExhausted(bound))?;

    let witnesses = sr_witnesses(r, p, e, q_res, bound)?;
    Ok(RadiusParams { h, ell, in_sr: !witnesses.is_empty(), m_witness: witnesses.first().copied() })
}

/// `r(ρ) = p^(-ρ/(κ(p-1)))` for `ρ ∈ (0, 1]`.
pub fn r_of_rho(rho: &Q, p: u64) -> Result<PExponent, ArithError> {
    check_prime(p)?;
    if *rho <= Q::zero() || *rho > q(1) {
        return Err(ArithError::OutOfRange(format!("rho = {rho} is not in (0, 1]")));
    }
    Ok(PExponent::new(p, -rho / q(kappa(p) as i64 * (p as i64 - 1))))
}

/// The level bound `ε · c · e(F/Q_p)`, with `ε` left as a caller-supplied
/// constant since it is not pinned down by the source material.
pub fn uniform_level_bound(epsilon: &Q, c: &Q, ramification: u32) -> Q {
    epsilon * c * q(ramification as i64)
}

/// Integer part of a nonnegative rational, for callers that need `u32`s.
pub fn floor_u32(x: &Q) -> Option<u32> {
    x.floor().to_integer().to_u32()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(p_valuation(&q(8), 2).unwrap(), Valuation::Finite(3));
        assert_eq!(p_valuation(&qf(1, 9), 3).unwrap(), Valuation::Finite(-2));
        assert_eq!(p_valuation(&q(0), 5).unwrap(), Valuation::Infinite);
        assert_eq!(p_valuation(&q(3), 4), Err(ArithError::NotPrime(4)));
    }

    #[test]
    fn pexponent_order() {
        let z = PExponent::zero(3);
        let a = PExponent::new(3, qf(-7, 2));
        let b = PExponent::new(3, qf(1, 5));
        assert!(z < a && a < b);
        assert_eq!(a.mul(&b).exponent, qf(-33, 10));
        assert!(a.mul(&z).is_zero);
        assert_eq!(PExponent::abs_of(&qf(9, 2), 3), PExponent::new(3, q(-2)));
        assert_eq!(rho_star(3).unwrap().exponent, qf(1, 2));
        assert_eq!(rho_star(2).unwrap().exponent, q(1));
    }

    #[test]
    fn padic_precision_loss() {
        let x = PadicApprox::from_int(40, 6, 2).unwrap();
        let y = x.div_p_power(3).unwrap();
        assert_eq!(y.precision(), 3);
        assert_eq!(y.residue(), &BigInt::from(5));
        assert_eq!(x.div_p_power(4), Err(ArithError::NotIntegral));
        assert!(matches!(x.div_p_power(6), Err(ArithError::InsufficientPrecision { .. })));
        let third = PadicApprox::from_rational(&qf(1, 3), 11, 2).unwrap();
        assert_eq!(third.residue(), &BigInt::from(683));
        assert_eq!(PadicApprox::from_rational(&qf(1, 2), 5, 2), Err(ArithError::NotIntegral));
    }

    #[test]
    fn binomial_examples() {
        let nu = PadicApprox::from_int(5, 10, 2).unwrap();
        let b0 = padic_binomial(&nu, 0).unwrap();
        assert_eq!(b0.residue(), &BigInt::one());
        let b2 = padic_binomial(&nu, 2).unwrap();
        assert_eq!((b2.residue().clone(), b2.precision()), (BigInt::from(10), 9));
        let short = PadicApprox::from_int(5, 3, 2).unwrap();
        assert!(matches!(padic_binomial(&short, 4), Err(ArithError::InsufficientPrecision { .. })));
    }

    #[test]
    fn binomial_of_one_third() {
        // 683 ≡ 1/3 mod 2^11; binom(1/3, 2) = -1/9, a 2-adic unit.
        let nu = PadicApprox::new(BigInt::from(683), 11, 2).unwrap();
        let b = padic_binomial(&nu, 2).unwrap();
        assert_eq!(b.precision(), 10);
        let expected = PadicApprox::from_rational(&qf(-1, 9), 10, 2).unwrap();
        assert_eq!(b, expected);
        assert_eq!(b.valuation(), Some(0));
    }

    #[test]
    fn constants() {
        let c = |n, p| {
            let b = bch_constants(n, p).unwrap();
            (b.kappa, b.h_n, b.bound_exponent)
        };
        assert_eq!(c(1, 3), (1, 0, 0));
        assert_eq!(c(5, 3), (1, 2, 2));
        assert_eq!(c(4, 2), (2, 3, 3));
    }

    #[test]
    fn r_of_rho_examples() {
        assert_eq!(r_of_rho(&q(1), 3).unwrap().exponent, qf(-1, 2));
        assert_eq!(r_of_rho(&q(1), 2).unwrap().exponent, qf(-1, 2));
        assert_eq!(r_of_rho(&qf(1, 2), 5).unwrap().exponent, qf(-1, 8));
        assert!(r_of_rho(&q(0), 5).is_err());
        assert!(r_of_rho(&qf(3, 2), 5).is_err());
    }

    #[test]
    fn radius_rejects_bad_input() {
        assert!(radius_params(&PExponent::new(3, q(-1)), 3, 1, 3).is_err());
        assert!(radius_params(&PExponent::new(3, q(0)), 3, 1, 3).is_err());
        assert!(radius_params(&PExponent::new(3, qf(-1, 4)), 3, 1, 6).is_err());
        assert!(radius_params(&PExponent::new(3, qf(-1, 4)), 3, 0, 3).is_err());
    }

    #[test]
    fn radius_below_threshold_has_h_zero() {
        // r^κ < p^(-1/(p-1)) already at k = 0.
        let r = PExponent::new(3, qf(-3, 5));
        assert_eq!(radius_params(&r, 3, 1, 3).unwrap().h, 0);
        let r2 = PExponent::new(2, qf(-3, 5));
        assert_eq!(radius_params(&r2, 2, 1, 2).unwrap().h, 0);
    }

    #[test]
    fn pexponent_json() {
        let a = PExponent::new(5, qf(-1, 8));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"p":5,"exp_num":"-1","exp_den":"8"}"#);
        assert_eq!(serde_json::from_str::<PExponent>(&s).unwrap(), a);
        let x = PadicApprox::from_int(10, 9, 2).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"residue":"10","M":9,"p":2}"#);
        assert_eq!(serde_json::from_str::<PadicApprox>(&s).unwrap(), x);
    }
}
