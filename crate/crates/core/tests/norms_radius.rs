mod common;

use common::*;
use proptest::prelude::*;
use wallforge::arith::{self, PExponent, PadicApprox};
use wallforge::bch::{self, GaussPolynomial};
use wallforge::linalg::IntMatrix;
use wallforge::rational::{q, qf, Q};

fn norm_oracle(f: &GaussPolynomial, rho: &Q, p: u64) -> Option<Q> {
    f.terms().iter().map(|(e, c)| q(-v_p(c, p)) + rho * q(e.iter().sum::<u32>() as i64)).max()
}

#[test]
fn gauss_norm_examples() {
    let x = GaussPolynomial::var(1, 0);
    let f = x.mul(&x).scale(&q(2)).add(&x);
    let n = bch::gauss_norm(&f, &PExponent::new(2, q(1)), 2);
    assert_eq!(n, PExponent::new(2, q(1)));
    assert!(bch::gauss_norm(&GaussPolynomial::zero(1), &PExponent::new(2, q(1)), 2).is_zero);
    assert_eq!(bch::gauss_norm(&GaussPolynomial::constant(1, q(1)), &PExponent::new(5, qf(-7, 3)), 5), PExponent::one(5));
}

#[test]
fn contraction_examples() {
    let rho = PExponent::new(3, q(0));
    let id = bch::lattice_contraction_check(&IntMatrix::identity(2), &[2, 1], &rho).unwrap();
    assert!(id.holds && id.image_norm == id.source_norm);
    let diag = bch::lattice_contraction_check(&IntMatrix::from_i64(&[&[3, 0], &[0, 1]]), &[1, 0], &rho).unwrap();
    assert_eq!(diag.image_norm, PExponent::new(3, q(-1)));
    assert_eq!(diag.structured_match, Some(true));
    let zero = bch::lattice_contraction_check(&IntMatrix::zeros(2, 2), &[1, 1], &rho).unwrap();
    assert!(zero.holds && zero.image_norm.is_zero);
}

#[test]
fn dr_examples() {
    let r = PExponent::new(3, qf(-1, 2));
    let zero = bch::dr_norm_and_expansion(&vec![PadicApprox::from_int(0, 20, 3).unwrap(); 2], &r, 3, 5).unwrap();
    assert!(zero.series.is_empty() && zero.norm.is_zero);
    let one = bch::dr_norm_and_expansion(&[PadicApprox::from_int(1, 20, 3).unwrap()], &r, 3, 5).unwrap();
    assert_eq!(one.series.len(), 1);
    assert_eq!(one.norm, one.bound);
    let nu = [PadicApprox::from_int(3, 30, 3).unwrap(), PadicApprox::from_rational(&qf(1, 1 - 3), 30, 3).unwrap()];
    let mixed = bch::dr_norm_and_expansion(&nu, &r, 3, 5).unwrap();
    assert!(mixed.holds);
    // Coefficient of b_1: ν_1 = 3, so |3| r = 3^(-3/2); of b_2: |−1/2| r = 3^(-1/2).
    assert_eq!(mixed.norm, PExponent::new(3, qf(-1, 2)));
}

#[test]
fn radius_examples() {
    let r = arith::radius_params(&PExponent::new(3, qf(-1, 4)), 3, 1, 3).unwrap();
    assert_eq!((r.h, r.ell, r.in_sr, r.m_witness), (1, 1, true, Some(1)));
    // r^κ = 2^(-3/4): h = 1, ell = 1; the S_R inequality is an equality at
    // m = 1 and fails strictly elsewhere.
    let r = arith::radius_params(&PExponent::new(2, qf(-3, 8)), 2, 1, 2).unwrap();
    assert_eq!((r.h, r.ell, r.in_sr, r.m_witness), (1, 1, false, None));
    // Below the first threshold h = 0.
    let r = arith::radius_params(&PExponent::new(5, qf(-1, 3)), 5, 1, 5).unwrap();
    assert_eq!(r.h, 0);
    assert!(arith::radius_params(&PExponent::new(3, q(-1)), 3, 1, 3).is_err());
    assert!(arith::radius_params(&PExponent::new(3, q(0)), 3, 1, 3).is_err());
}

#[test]
fn sr_witness_is_unique() {
    for p in [2u64, 3, 5] {
        for den in 2..30 {
            for num in 1..den {
                let r = PExponent::new(p, qf(-num, den));
                let w = arith::sr_witnesses(&r, p, 1, p, 64).unwrap();
                assert!(w.len() <= 1, "p={p}, r=p^(-{num}/{den}): witnesses {w:?}");
            }
        }
    }
}

fn poly() -> impl Strategy<Value = GaussPolynomial> {
    prop::collection::vec(((0u32..4, 0u32..4), -20i64..=20, 0u32..3, 1i64..5), 1..=6).prop_map(|terms| {
        GaussPolynomial::from_terms(
            2,
            terms.into_iter().filter(|t| t.1 != 0).map(|((a, b), num, k, den)| (vec![a, b], qf(num * 3i64.pow(k), den))),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_norm_is_multiplicative(f in poly(), g in poly(), p in prop::sample::select(vec![2u64, 3, 5]), rn in -8i64..=8, rd in 1i64..=5) {
        prop_assume!(!f.is_zero() && !g.is_zero());
        let rho = qf(rn, rd);
        let r = PExponent::new(p, rho.clone());
        let fg = f.mul(&g);
        prop_assert_eq!(bch::gauss_norm(&f, &r, p).exponent, norm_oracle(&f, &rho, p).unwrap());
        prop_assert_eq!(bch::gauss_norm(&fg, &r, p).exponent, norm_oracle(&f, &rho, p).unwrap() + norm_oracle(&g, &rho, p).unwrap());
    }

    #[test]
    fn radius_agrees_with_the_real_number_oracle(
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
        num in 1i64..50,
        den in 2i64..51,
        e in 1u32..=3,
        f in 1u32..=2,
    ) {
        prop_assume!(num < den);
        let q_res = p.pow(f);
        let lib = arith::radius_params(&PExponent::new(p, qf(-num, den)), p, e, q_res).unwrap();
        if let Some((h, ell, w)) = radius_oracle(-(num as f64) / den as f64, p, e, q_res) {
            prop_assert_eq!((lib.h, lib.ell, lib.m_witness), (h, ell, w));
            prop_assert_eq!(lib.in_sr, w.is_some());
        }
    }

    #[test]
    fn diagonal_contractions_match_the_closed_form(a in 1i64..30, b in 1i64..30, n0 in 0u32..4, n1 in 0u32..4, rn in -3i64..=0) {
        let alpha = IntMatrix::from_i64(&[&[a, 0], &[0, b]]);
        let rep = bch::lattice_contraction_check(&alpha, &[n0, n1], &PExponent::new(3, q(rn))).unwrap();
        prop_assert!(rep.holds);
        prop_assert_eq!(rep.structured_match, Some(true));
    }
}
