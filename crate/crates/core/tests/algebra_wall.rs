mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wallforge::groupalg::{self, AModule, Algebra, FiniteGroup};
use wallforge::lie::{self, LieAlgebra, LieModule};
use wallforge::linalg::{PivotOrder, RationalMatrix};
use wallforge::rational::{q, Q};
use wallforge::wall;

fn padded(v: &[usize], len: usize) -> Vec<usize> {
    let mut v = v.to_vec();
    v.resize(len, 0);
    v
}

#[test]
fn sl2_adjoint_and_abelian_homology() {
    let g = LieAlgebra::sl2();
    // Whitehead: a nontrivial simple module has no homology at all.
    assert_eq!(lie::lie_homology(&g, &LieModule::adjoint(&g)).unwrap(), vec![0, 0, 0, 0]);
    // Abelian: H_j(E^d, E) = Λ^j, of dimension d choose j.
    for d in 1..=4usize {
        let a = LieAlgebra::abelian(d);
        let b = lie::lie_homology(&a, &LieModule::trivial(&a, 1)).unwrap();
        let binom: Vec<usize> = (0..=d).map(|j| (0..j).fold(1, |acc, i| acc * (d - i) / (i + 1))).collect();
        assert_eq!(b, binom);
    }
}

#[test]
fn heisenberg_scaling_does_not_change_homology() {
    for s in [q(1), q(3), q(-2), Q::new(1.into(), 7.into())] {
        let g = LieAlgebra::heisenberg_scaled(s);
        assert_eq!(lie::lie_homology(&g, &LieModule::trivial(&g, 1)).unwrap(), vec![1, 2, 2, 1]);
    }
}

#[test]
fn ext_over_group_algebras_is_the_multiplicity_of_e() {
    for g in FiniteGroup::all_up_to_order_8() {
        let a = Algebra::group_algebra(&g);
        let e = AModule::trivial(&a).unwrap();
        let reg = AModule::regular(&a);
        assert_eq!(groupalg::ext_dims(&a, &e, &reg, 3), vec![1, 0, 0, 0], "{}", g.order());
        if let Some(sign) = g.sign_character() {
            let rho: Vec<RationalMatrix> = sign.iter().map(|c| RationalMatrix::scalar(1, c)).collect();
            let m = AModule::from_group_rep(rho);
            assert_eq!(groupalg::ext_dims(&a, &e, &m, 2), vec![0, 0, 0]);
        }
    }
}

#[test]
fn exterior_ext_is_symmetric_powers() {
    // Ext^n_{Λ(E^r)}(E, E) = Sym^n, of dimension C(n + r - 1, r - 1).
    for r in 1..=3usize {
        let a = Algebra::exterior(r);
        let e = AModule::trivial(&a).unwrap();
        let expected: Vec<usize> = (0..=3usize).map(|n| (1..r).fold(1, |acc, i| acc * (n + i) / i)).collect();
        assert_eq!(groupalg::ext_dims(&a, &e, &e, 3), expected, "r = {r}");
    }
}

#[test]
fn two_periodic_resolutions_are_exact() {
    for g in FiniteGroup::all_up_to_order_8() {
        let tp = groupalg::two_periodic_resolution(&g, 5);
        let aug = tp.augmented();
        assert!(squares_to_zero(&aug));
        let b = betti_oracle(&aug);
        // Degrees -1..=4 are exact; the top term is not followed by anything.
        assert!(b[..b.len() - 1].iter().all(|&x| x == 0), "{b:?}");
    }
}

#[test]
fn wall_demo_on_small_groups() {
    for name in ["Z2", "Z3", "S3", "Z2xZ2"] {
        let Some(g) = groupalg::named_group(name) else { continue };
        let w = wall::wall_demo(&g, 3).unwrap();
        assert!(identity_violations(&w).is_empty(), "{name}");
        let cert = w.certify().unwrap();
        assert!(cert.is_ok(), "{name}: {cert:?}");
    }
}

#[test]
fn trivial_module_wall_computes_ext() {
    for name in ["Z2", "Z3", "S3"] {
        let g = groupalg::named_group(name).unwrap();
        let w = wall::trivial_module_wall(&g, 3).unwrap();
        let e = AModule::trivial(&w.algebra).unwrap();
        assert_eq!(wall::ext_via_wall(&w, &e, 3).unwrap(), groupalg::ext_dims(&w.algebra, &e, &e, 3));
    }
}

#[test]
fn wall_dump_round_trip() {
    let g = groupalg::named_group("S3").unwrap();
    let w = wall::wall_demo(&g, 2).unwrap();
    let cert = w.certify().unwrap();
    let dump = w.to_dump(cert.clone());
    let json = serde_json::to_string(&dump).unwrap();
    let back: wall::WallDump = serde_json::from_str(&json).unwrap();
    let w2 = wall::WallAssembly::from_dump(&back).unwrap();
    assert_eq!(w2.certify().unwrap(), cert);
    assert_eq!(w2.maps, w.maps);
}

#[test]
fn mismatched_columns_are_refused() {
    let g = groupalg::named_group("Z2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, base) = wall::random_base(&mut rng, &g, 1).unwrap();
    let mut columns = wall::random_columns(&mut rng, &a, &base, 2).unwrap();
    columns.pop();
    assert!(matches!(wall::build_wall(&a, &base, columns), Err(wall::WallError::Invalid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ce_complexes_square_to_zero(seed in any::<u64>(), d in 1usize..=4, m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, module) = lie::random_lie_pair(&mut rng, d, m);
        let c = lie::ce_complex(&g, &module).unwrap();
        prop_assert!(squares_to_zero(&c));
        let b = c.betti_numbers().unwrap();
        prop_assert_eq!(&b, &betti_oracle(&c));
        let alternating: i64 = b.iter().enumerate().map(|(n, &x)| if n % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
        prop_assert_eq!(alternating, c.euler_characteristic());
    }

    #[test]
    fn homology_is_basis_independent(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, module) = lie::random_lie_pair(&mut rng, d, 2);
        // A unimodular upper-triangular change of basis.
        let p = RationalMatrix::from_fn(d, d, |i, j| if i == j { q(1) } else if i < j { q(((seed >> (i + j)) % 5) as i64 - 2) } else { q(0) });
        let g2 = g.change_basis(&p).unwrap();
        // Actions transform with the basis of g, not of the module.
        let actions: Vec<RationalMatrix> = (0..d)
            .map(|i| (0..d).fold(RationalMatrix::zeros(module.dim(), module.dim()), |acc, k| acc.add(&module.actions()[k].scale(p.get(k, i)))))
            .collect();
        let m2 = LieModule::new(module.dim(), actions).unwrap();
        prop_assert_eq!(lie::lie_homology(&g, &module).unwrap(), lie::lie_homology(&g2, &m2).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn random_walls_match_their_base(seed in any::<u64>(), which in 0usize..3, top in 1usize..=3, max_len in 1usize..=4) {
        let g = groupalg::named_group(["Z2", "Z3", "S3"][which]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, base) = wall::random_base(&mut rng, &g, top).unwrap();
        let columns = wall::random_columns(&mut rng, &a, &base, max_len).unwrap();
        let w = wall::build_wall(&a, &base, columns).unwrap();
        prop_assert!(identity_violations(&w).is_empty());
        let total = w.total_complex_unchecked().unwrap();
        prop_assert!(squares_to_zero(&total));
        let (tb, bb) = (betti_oracle(&total), betti_oracle(&base.complex().unwrap()));
        let len = tb.len().max(bb.len());
        prop_assert_eq!(padded(&tb, len), padded(&bb, len));
        // Different lifts, same homology.
        let r = w.rebuilt_with(PivotOrder::Reverse).unwrap();
        prop_assert!(identity_violations(&r).is_empty());
        prop_assert_eq!(r.certify().unwrap().total_betti, w.certify().unwrap().total_betti);
    }
}
