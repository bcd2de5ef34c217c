//! Oracles shared by the integration tests. Each one is written from the
//! textbook definition and shares no code with the library beyond the
//! matrix and rational containers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use wallforge::complexes::ChainComplex;
use wallforge::linalg::RationalMatrix;
use wallforge::rational::{q, qf, Q};

// ---------------------------------------------------------------- ranks

/// A prime unrelated to the one used inside the library.
pub const ORACLE_PRIME: u64 = 1_000_000_007;

fn mod_p(x: &Q) -> u64 {
    let p = BigInt::from(ORACLE_PRIME);
    let n = x.numer().mod_floor(&p).to_u64().unwrap();
    let d = x.denom().mod_floor(&p).to_u64().unwrap();
    assert!(d != 0, "denominator divisible by the oracle prime");
    n * pow_mod(d, ORACLE_PRIME - 2) % ORACLE_PRIME
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % ORACLE_PRIME as u128) as u64;
        }
        b = (b as u128 * b as u128 % ORACLE_PRIME as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Rank over `F_ORACLE_PRIME` by plain Gaussian elimination. Equal to the
/// rational rank except with negligible probability on these inputs.
pub fn rank_mod_p(m: &RationalMatrix) -> usize {
    let (r, c) = m.shape();
    let mut a = vec![vec![0u64; c]; r];
    for (i, j, x) in m.nonzeros() {
        a[i][j] = mod_p(x);
    }
    let mut rank = 0;
    for col in 0..c {
        let Some(piv) = (rank..r).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][col], ORACLE_PRIME - 2);
        for j in col..c {
            a[rank][j] = (a[rank][j] as u128 * inv as u128 % ORACLE_PRIME as u128) as u64;
        }
        for i in 0..r {
            if i != rank && a[i][col] != 0 {
                let f = a[i][col];
                for j in col..c {
                    let sub = (f as u128 * a[rank][j] as u128 % ORACLE_PRIME as u128) as u64;
                    a[i][j] = (a[i][j] + ORACLE_PRIME - sub) % ORACLE_PRIME;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers of a chain complex (`d(n): C_n → C_{n-1}`) from ranks.
pub fn betti_oracle(c: &ChainComplex) -> Vec<usize> {
    let rank = |n: i64| if n > c.lo() && n <= c.hi() { rank_mod_p(&c.d(n)) } else { 0 };
    c.degrees().map(|n| c.dim(n) - rank(n) - rank(n + 1)).collect()
}

/// Every composite `d(n-1) d(n)` is exactly zero.
pub fn squares_to_zero(c: &ChainComplex) -> bool {
    (c.lo() + 2..=c.hi()).all(|n| c.d(n - 1).mul(&c.d(n)).is_zero())
}

// ------------------------------------------------------ p-adic helpers

pub fn v_p_int(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// `v_p(x)` for nonzero `x`.
pub fn v_p(x: &Q, p: u64) -> i64 {
    v_p_int(x.numer(), p) as i64 - v_p_int(x.denom(), p) as i64
}

// ------------------------------------------- noncommutative polynomials

/// Words in `X = 0`, `Y = 1` with rational coefficients.
pub type Nc = BTreeMap<Vec<u8>, Q>;

pub fn nc_add(a: &Nc, b: &Nc, s: &Q) -> Nc {
    let mut out = a.clone();
    for (w, c) in b {
        let e = out.entry(w.clone()).or_insert_with(Q::zero);
        *e += c * s;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn nc_mul(a: &Nc, b: &Nc) -> Nc {
    let mut out = Nc::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut w = u.clone();
            w.extend(v);
            *out.entry(w).or_insert_with(Q::zero) += x * y;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn nc_bracket(a: &Nc, b: &Nc) -> Nc {
    nc_add(&nc_mul(a, b), &nc_mul(b, a), &q(-1))
}

pub fn letter(l: u8) -> Nc {
    Nc::from([(vec![l], q(1))])
}

/// Right-normed bracket `[l_1, [l_2, … [l_{n-1}, l_n]]]` of a word.
pub fn right_normed(w: &[u8]) -> Nc {
    let (last, rest) = w.split_last().unwrap();
    rest.iter().rev().fold(letter(*last), |acc, &l| nc_bracket(&letter(l), &acc))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Dynkin's formula for `log(e^X e^Y)` through degree `n`:
/// `Σ_k (-1)^(k-1)/k Σ [X^r1 Y^s1 … X^rk Y^sk] / ((Σ r_i+s_i) Π r_i! s_i!)`.
pub fn dynkin_bch(n: usize) -> Nc {
    let mut out = Nc::new();
    for k in 1..=n {
        // pairs (r_i, s_i) with r_i + s_i ≥ 1 and total ≤ n
        let mut stack: Vec<Vec<(usize, usize)>> = vec![vec![]];
        while let Some(seq) = stack.pop() {
            let used: usize = seq.iter().map(|(r, s)| r + s).sum();
            if seq.len() == k {
                let mut word = Vec::new();
                for &(r, s) in &seq {
                    word.extend(std::iter::repeat(0u8).take(r));
                    word.extend(std::iter::repeat(1u8).take(s));
                }
                let denom: BigInt = seq.iter().map(|&(r, s)| factorial(r) * factorial(s)).product::<BigInt>() * BigInt::from(used);
                let sign = if k % 2 == 1 { 1 } else { -1 };
                let coeff = Q::new(BigInt::from(sign), denom * BigInt::from(k));
                out = nc_add(&out, &right_normed(&word), &coeff);
                continue;
            }
            for r in 0..=n - used {
                for s in 0..=n - used - r {
                    if r + s >= 1 {
                        let mut next = seq.clone();
                        next.push((r, s));
                        stack.push(next);
                    }
                }
            }
        }
    }
    out
}

/// The degree ≤ 3 part of BCH, written out by hand:
/// `X + Y + ½[X,Y] + 1/12 [X,[X,Y]] + 1/12 [Y,[Y,X]]`.
pub fn bch_degree_three() -> Nc {
    let w = |s: &str| s.bytes().map(|b| if b == b'X' { 0 } else { 1 }).collect::<Vec<u8>>();
    [
        ("X", q(1)),
        ("Y", q(1)),
        ("XY", qf(1, 2)),
        ("YX", qf(-1, 2)),
        ("XXY", qf(1, 12)),
        ("XYX", qf(-1, 6)),
        ("YXX", qf(1, 12)),
        ("YYX", qf(1, 12)),
        ("YXY", qf(-1, 6)),
        ("XYY", qf(1, 12)),
    ]
    .into_iter()
    .map(|(s, c)| (w(s), c))
    .collect()
}

/// Lyndon words of length `n` over `{0,1}` (Duval's algorithm).
pub fn lyndon_words(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut w: Vec<i32> = vec![-1];
    while !w.is_empty() {
        let last = w.len() - 1;
        w[last] += 1;
        if w.len() == n {
            out.push(w.iter().map(|&x| x as u8).collect());
        }
        let m = w.len();
        while w.len() < n {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&1) {
            w.pop();
        }
    }
    out
}

fn is_lyndon(w: &[u8]) -> bool {
    (1..w.len()).all(|i| w < &w[i..])
}

/// The standard bracketing: `P(w) = [P(u), P(v)]` with `v` the longest
/// proper Lyndon suffix.
pub fn lyndon_bracket(w: &[u8]) -> Nc {
    if w.len() == 1 {
        return letter(w[0]);
    }
    let split = (1..w.len()).find(|&i| is_lyndon(&w[i..])).unwrap();
    nc_bracket(&lyndon_bracket(&w[..split]), &lyndon_bracket(&w[split..]))
}

/// Coordinates of a homogeneous Lie element in the Lyndon basis. The
/// smallest word of `P(w)` is `w` with coefficient 1, so peeling off the
/// smallest remaining word is a triangular solve.
pub fn lyndon_coordinates(f: &Nc) -> BTreeMap<Vec<u8>, Q> {
    let mut rest = f.clone();
    let mut coords = BTreeMap::new();
    while let Some((w, c)) = rest.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
        assert!(is_lyndon(&w), "smallest word {w:?} of a Lie element is not Lyndon");
        rest = nc_add(&rest, &lyndon_bracket(&w), &-c.clone());
        coords.insert(w, c);
    }
    coords
}

pub fn homogeneous(f: &Nc, n: usize) -> Nc {
    f.iter().filter(|(w, _)| w.len() == n).map(|(w, c)| (w.clone(), c.clone())).collect()
}

/// The words and coefficients of a library series, re-keyed for the
/// oracles.
pub fn from_library(f: &wallforge::bch::NCPolynomial) -> Nc {
    f.terms().iter().map(|(w, c)| (w.0.clone(), c.clone())).collect()
}

/// `Σ c_w w(x, y)` evaluated on matrices.
pub fn evaluate_on_matrices(f: &Nc, x: &RationalMatrix, y: &RationalMatrix) -> RationalMatrix {
    let n = x.rows();
    let mut acc = RationalMatrix::zeros(n, n);
    for (w, c) in f {
        let prod = w.iter().fold(RationalMatrix::identity(n), |m, &l| m.mul(if l == 0 { x } else { y }));
        acc = acc.add(&prod.scale(c));
    }
    acc
}

// -------------------------------------------------------------- radius

/// `h`, `ell` and the first `S_R` witness, from real-number comparisons on
/// `r = p^a`. Returns `None` when some comparison is too close to call in
/// floating point.
pub fn radius_oracle(a: f64, p: u64, e: u32, q_res: u64) -> Option<(u32, u32, Option<u32>)> {
    let pf = p as f64;
    let kappa = if p == 2 { 2.0 } else { 1.0 };
    let r = pf.powf(a);
    let crit = pf.powf(-1.0 / (pf - 1.0));
    let clear = |x: f64, y: f64| (x - y).abs() > 1e-9 * y.abs().max(1e-300);
    let mut h = None;
    for k in 0..64 {
        let lhs = r.powf(kappa);
        let rhs = pf.powf(-1.0 / ((pf - 1.0) * pf.powi(k)));
        if !clear(lhs, rhs) {
            return None;
        }
        if lhs < rhs {
            h = Some(k as u32);
            break;
        }
    }
    let h = h?;
    let uniformizer = pf.powf(-1.0 / e as f64);
    let mut ell = None;
    for m in 0..64 {
        let lhs = uniformizer.powi(m) * pf.powi(h as i32) * r.powf(kappa * pf.powi(h as i32));
        if !clear(lhs, crit) {
            return None;
        }
        if lhs < crit {
            ell = Some(m as u32);
            break;
        }
    }
    let mut witness = None;
    for m in 0..=12 {
        let mid = r.powf(kappa * pf.powi(m));
        let lower = crit * pf.powf(-1.0 / (e as f64 * (q_res as f64).powi(m)));
        if !clear(mid, lower) || !clear(mid, crit) {
            return None;
        }
        if lower < mid && mid < crit {
            witness = Some(m as u32);
            break;
        }
    }
    Some((h, ell?, witness))
}

// ------------------------------------------------------- crossed Ext

/// The matrix of `σ` on `V = Λ^1` inside the exterior algebra on `r`
/// generators, whose basis is the subsets in size-then-lex order.
pub fn degree_one_block(sigma: &RationalMatrix, r: usize) -> RationalMatrix {
    sigma.block(1, 1, r, r)
}

pub fn trace(m: &RationalMatrix) -> Q {
    (0..m.rows()).map(|i| m.get(i, i).clone()).sum()
}

/// `tr(g | Sym^n V)` for `dim V ≤ 2`, from `1/det(1 - t g)`.
pub fn sym_trace(g: &RationalMatrix, n: usize) -> Q {
    match g.rows() {
        1 => num_traits::pow(g.get(0, 0).clone(), n),
        2 => {
            let (a, b) = (trace(g), g.det().unwrap());
            let mut c = vec![q(1), a.clone()];
            for k in 2..=n {
                let next = &a * &c[k - 1] - &b * &c[k - 2];
                c.push(next);
            }
            c[n].clone()
        }
        d => panic!("sym_trace oracle handles dim ≤ 2, got {d}"),
    }
}

/// `dim Ext^n_{Λ(V) ⋊ Q}(E, M)` for `M = E ⊗ W`, via
/// `Ext_{Λ(V)}(E, E) = Sym(V*)` and character averaging.
pub fn crossed_ext_oracle(v_reps: &[RationalMatrix], w_reps: &[RationalMatrix], n: usize) -> usize {
    let avg: Q = v_reps.iter().zip(w_reps).map(|(g, w)| sym_trace(g, n) * trace(w)).sum::<Q>() / q(v_reps.len() as i64);
    assert!(avg.is_integer() && !avg.is_negative(), "character average {avg} is not a dimension");
    avg.to_integer().to_usize().unwrap()
}

/// `M = Λ(V)` itself: self-injective, so only `Hom(E, Λ(V)) = Λ^top V`
/// survives, with `Q` acting by the determinant.
pub fn regular_ext_oracle(v_reps: &[RationalMatrix], n: usize) -> usize {
    if n > 0 {
        return 0;
    }
    let avg: Q = v_reps.iter().map(|g| g.det().unwrap()).sum::<Q>() / q(v_reps.len() as i64);
    avg.to_integer().to_usize().unwrap()
}

// ----------------------------------------------------------------- wall

/// `Σ_h d^(k-h) d^(h) = 0` recomputed from the stored maps.
pub fn identity_violations(w: &wallforge::wall::WallAssembly) -> Vec<(usize, usize, usize)> {
    let mut bad = Vec::new();
    for qq in 0..=w.top() as i64 {
        for j in 0..=w.columns[qq as usize].len() as i64 {
            for k in 0..=qq {
                let mut acc: Option<wallforge::linalg::RationalMatrix> = None;
                for h in 0..=k {
                    let term = w.get(qq - h, j + h - 1, k - h).unwrap().mul(&w.get(qq, j, h).unwrap());
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term),
                    });
                }
                if !acc.unwrap().is_zero() {
                    bad.push((qq as usize, j as usize, k as usize));
                }
            }
        }
    }
    bad
}

// ------------------------------------------------------------- documents

use serde_json::Value;

/// SHA-256 of the canonical `{kind, job, result, certificate, dump}`.
pub fn redigest(doc: &mut Value) {
    use sha2::{Digest, Sha256};
    let body = serde_json::json!({
        "kind": doc["kind"], "job": doc["job"], "result": doc["result"],
        "certificate": doc["certificate"], "dump": doc["dump"],
    });
    doc["digest"] = Value::String(hex::encode(Sha256::digest(serde_json::to_string(&body).unwrap().as_bytes())));
}

/// Rewrites the first string leaf that parses as a rational, returning
/// the path taken.
pub fn perturb_first_number(v: &mut Value, path: &mut Vec<String>) -> bool {
    match v {
        Value::String(s) if wallforge::rational::parse_q(s).is_ok() => {
            let x = wallforge::rational::parse_q(s).unwrap() + q(1);
            *s = wallforge::rational::format_q(&x);
            true
        }
        Value::Number(n) => {
            let x = n.as_i64().unwrap_or(0) + 1;
            *v = Value::from(x);
            true
        }
        Value::Array(items) => items.iter_mut().enumerate().any(|(i, x)| {
            path.push(i.to_string());
            perturb_first_number(x, path) || {
                path.pop();
                false
            }
        }),
        Value::Object(m) => m.iter_mut().any(|(k, x)| {
            path.push(k.clone());
            perturb_first_number(x, path) || {
                path.pop();
                false
            }
        }),
        _ => false,
    }
}

pub fn wallforge(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_wallforge")).args(args).output().expect("runs")
}

pub fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// One invocation per subcommand, with file inputs where they exist.
pub fn cli_jobs() -> Vec<Vec<String>> {
    let jobs: Vec<String> = vec![
        "ce-homology --builtin sl2".into(),
        format!("ce-homology --lie {} --adjoint", data("heisenberg.json")),
        "wall-demo --group S3 --degrees 3".into(),
        "wall-build --random --group Z3 --seed 2 --top 2 --max-len 3 --truncate 1".into(),
        format!("wall-build --input {}", data("wall_z2.json")),
        "tree-ss --p 3 --radius 2 --dim 2".into(),
        format!("tree-ss --system {}", data("tree_constant.json")),
        "pushout-check --p 2 --radius 2 --copies 3 --z 0,1,2".into(),
        "cosimplicial-check --p 3 --radius 1 --z 0,1 --q 0 --j-max 3".into(),
        "bch-verify --degree 5 --primes 2,3".into(),
        "group-law --builtin heisenberg --scale 3 --p 3 --degree 3".into(),
        format!("norms --p 3 --poly {} --rho -1/2 --nu 1,3,1/2 --alpha 3,0;0,9 --monomial 1,1", data("poly.json")),
        "radius --p 3 --r -1/4 --q 9 --e 2".into(),
        "ext-crossed --case L1-Z2-neg/E --case L2-Z3-rot/V2 --n-max 3".into(),
    ];
    jobs.into_iter().map(|j| j.split_whitespace().map(String::from).collect()).collect()
}
