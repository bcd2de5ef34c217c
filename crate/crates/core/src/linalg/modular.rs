//! Multimodular kernels with an exact certificate.
//!
//! The reduced row echelon form is computed modulo several 62-bit primes,
//! combined by CRT and lifted by rational reconstruction. A candidate kernel
//! `K` is accepted only if `A K = 0` holds exactly. Since the rank mod `p`
//! never exceeds the rational rank, an accepted `K` spans the whole kernel,
//! and it coincides with the kernel read off the rational RREF.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{SparseRow, Q};

const MAX_PRIMES: usize = 48;

fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &b in &BASES {
        let mut x = pow(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below `2^62`, largest first.
fn primes() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while !is_prime(n) {
            n -= 2;
        }
        let p = n;
        n -= 2;
        Some(p)
    })
}

fn reduce(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64_digits().1.first().copied().unwrap_or(0)
}

/// Pivot columns and, for each pivot row, its entries on the free columns.
struct ModRref {
    pivots: Vec<usize>,
    free_entries: Vec<Vec<u64>>,
}

fn rref_mod(rows: &[SparseRow], cols: usize, perm: &[usize], p: u64) -> ModRref {
    // `perm[k]` is the original column scanned k-th
    let mut inv = vec![0; cols];
    for (k, &c) in perm.iter().enumerate() {
        inv[c] = k;
    }
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![0u64; cols];
            for (c, x) in r {
                v[inv[*c]] = reduce(x, p);
            }
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        let Some(pr) = (next..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(next, pr);
        let inv_p = pow(m[next][col], p - 2, p);
        for x in m[next].iter_mut() {
            *x = mul(*x, inv_p, p);
        }
        let pivot = m[next].clone();
        for (r, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if r != next && f != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot).skip(col) {
                    if y != 0 {
                        *x = (*x + p - mul(f, y, p)) % p;
                    }
                }
            }
        }
        pivots.push(col);
        next += 1;
        if next == m.len() {
            break;
        }
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    let free_entries = (0..pivots.len()).map(|k| free.iter().map(|&f| m[k][f]).collect()).collect();
    ModRref { pivots: pivots.into_iter().map(|k| perm[k]).collect(), free_entries }
}

/// `n/d ≡ u (mod m)` with `|n|, d ≤ sqrt(m/2)`.
fn reconstruct(u: &BigInt, m: &BigInt, bound: &BigInt) -> Option<Q> {
    let (mut r0, mut r1) = (m.clone(), u.clone());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || &t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Q::new(r1, t1))
}

fn verify(rows: &[SparseRow], x: &[Q]) -> bool {
    let mut l = BigInt::one();
    for v in x {
        l = l.lcm(v.denom());
    }
    let y: Vec<BigInt> = x.iter().map(|v| (v * Q::from_integer(l.clone())).to_integer()).collect();
    rows.iter().all(|r| r.iter().fold(BigInt::zero(), |acc, (c, a)| acc + a * &y[*c]).is_zero())
}

/// Pivot columns (in scan order) and kernel basis (ordered by free column)
/// of the integer matrix with the given rows. `None` if no certificate was
/// found within the prime budget.
pub(super) fn kernel(rows: &[SparseRow], cols: usize, perm: &[usize]) -> Option<(Vec<usize>, Vec<Vec<Q>>)> {
    let mut best: Option<(Vec<usize>, Vec<Vec<BigInt>>, BigInt)> = None;
    for p in primes().take(MAX_PRIMES) {
        let rr = rref_mod(rows, cols, perm, p);
        match &mut best {
            Some((piv, _, _)) if rr.pivots.len() < piv.len() => continue,
            Some((piv, _, _)) if rr.pivots == *piv => {}
            Some((piv, _, _)) if rr.pivots.len() == piv.len() && perm_key(&rr.pivots, perm) > perm_key(piv, perm) => {
                continue;
            }
            _ => {
                let res = rr.free_entries.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
                best = Some((rr.pivots, res, BigInt::from(p)));
                if let Some(out) = attempt(rows, cols, best.as_ref().expect("set")) {
                    return Some(out);
                }
                continue;
            }
        }
        let (_, res, m) = best.as_mut().expect("matched");
        let pb = BigInt::from(p);
        let m_inv = BigInt::from(pow(reduce(m, p), p - 2, p));
        for (row, new) in res.iter_mut().zip(&rr.free_entries) {
            for (x, &xp) in row.iter_mut().zip(new) {
                let delta = (BigInt::from(xp) - &*x).mod_floor(&pb) * &m_inv % &pb;
                *x += &*m * delta;
            }
        }
        *m *= &pb;
        if let Some(out) = attempt(rows, cols, best.as_ref().expect("set")) {
            return Some(out);
        }
    }
    None
}

fn perm_key(pivots: &[usize], perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &c) in perm.iter().enumerate() {
        inv[c] = k;
    }
    pivots.iter().map(|&c| inv[c]).collect()
}

fn attempt(rows: &[SparseRow], cols: usize, state: &(Vec<usize>, Vec<Vec<BigInt>>, BigInt)) -> Option<(Vec<usize>, Vec<Vec<Q>>)> {
    let (pivots, res, m) = state;
    let bound = (m / 2u32).sqrt();
    let mut is_pivot = vec![false; cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    let mut kernel = Vec::with_capacity(free.len());
    for (j, &f) in free.iter().enumerate() {
        let mut x = vec![Q::zero(); cols];
        x[f] = Q::one();
        for (k, &c) in pivots.iter().enumerate() {
            let u = &res[k][j];
            if !u.is_zero() {
                x[c] = -reconstruct(u, m, &bound)?;
            }
        }
        if !verify(rows, &x) {
            return None;
        }
        kernel.push(x);
    }
    Some((pivots.clone(), kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_are_prime() {
        let ps: Vec<u64> = primes().take(3).collect();
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
        assert!(ps.iter().all(|&p| is_prime(p) && p < 1 << 62));
        assert!(!is_prime(561) && is_prime(1_000_000_007));
    }

    #[test]
    fn reconstructs_fractions() {
        let m = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        let bound = (&m / 2u32).sqrt();
        let x = Q::new(BigInt::from(-355), BigInt::from(113));
        let inv = BigInt::from(113).extended_gcd(&m).x.mod_floor(&m);
        let u = (x.numer() * inv).mod_floor(&m);
        assert_eq!(reconstruct(&u, &m, &bound), Some(x));
    }
}
