mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use common::*;
use proptest::prelude::*;
use wallforge::linalg::RationalMatrix;
use wallforge::rational::q;
use wallforge::tree::{self, Augmentation, Facet, Restriction, Subcomplex, TreeCoefficientSystem, TreeVertex};

/// BFS over `neighbors`, recording layer sizes.
fn layers(p: u64, radius: usize) -> Vec<usize> {
    let mut seen: HashSet<TreeVertex> = HashSet::from([TreeVertex::base()]);
    let mut frontier = vec![TreeVertex::base()];
    let mut sizes = vec![1];
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &frontier {
            for w in v.neighbors(p) {
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        sizes.push(next.len());
        frontier = next;
    }
    sizes
}

#[test]
fn the_tree_is_regular() {
    for p in [2u64, 3, 5, 7] {
        // Layer k of a (p+1)-regular tree has (p+1) p^(k-1) vertices.
        let expected: Vec<usize> = (0..=3).map(|k| if k == 0 { 1 } else { (p as usize + 1) * (p as usize).pow(k - 1) }).collect();
        assert_eq!(layers(p, 3), expected, "p = {p}");
        for v in tree::ball(p, 2).unwrap().vertices() {
            let nb = v.neighbors(p);
            assert_eq!(nb.iter().collect::<HashSet<_>>().len(), p as usize + 1);
            for w in &nb {
                assert_eq!(tree::distance(p, v, w), 1);
                assert!(w.neighbors(p).contains(v), "adjacency is symmetric");
            }
        }
    }
}

#[test]
fn ball_distances_and_sizes() {
    for p in [2u64, 3, 5] {
        for radius in 0..=3usize {
            let y = tree::ball(p, radius).unwrap();
            assert_eq!(y.vertices().len() as u64, tree::ball_size(p, radius as u32));
            assert_eq!(y.edges().len(), y.vertices().len() - 1);
            assert!(y.vertices().iter().all(|v| tree::distance(p, &TreeVertex::base(), v) <= radius));
        }
    }
}

/// `C_1 → C_0` with `d(e) = head - tail`, assembled here from the system's
/// raw data.
fn ss_oracle(cs: &TreeCoefficientSystem) -> RationalMatrix {
    let vdims: Vec<usize> = cs.vertex_spaces().iter().map(|f| f.dim).collect();
    let edims: Vec<usize> = cs.edge_spaces().iter().map(|f| f.dim).collect();
    let voff: Vec<usize> = vdims.iter().scan(0, |acc, d| { let o = *acc; *acc += d; Some(o) }).collect();
    let mut d = RationalMatrix::zeros(vdims.iter().sum(), edims.iter().sum());
    let mut col = 0;
    for (e, &(t, h)) in cs.tree().edges().iter().enumerate() {
        let r = &cs.restrictions()[e];
        for j in 0..edims[e] {
            for i in 0..vdims[h] {
                d.add_at(voff[h] + i, col + j, r.head.get(i, j));
            }
            for i in 0..vdims[t] {
                d.add_at(voff[t] + i, col + j, &-r.tail.get(i, j).clone());
            }
        }
        col += edims[e];
    }
    d
}

fn random_system(p: u64, radius: usize, seed: &[i64]) -> TreeCoefficientSystem {
    let y = tree::ball(p, radius).unwrap();
    let mut it = seed.iter().cycle();
    let mut next = move || *it.next().unwrap();
    let vertex_spaces: Vec<Facet> = (0..y.vertices().len()).map(|_| Facet::new(next().rem_euclid(3) as usize)).collect();
    let edge_spaces: Vec<Facet> = (0..y.edges().len()).map(|_| Facet::new(next().rem_euclid(3) as usize)).collect();
    let restrictions = y
        .edges()
        .iter()
        .zip(&edge_spaces)
        .map(|(&(t, h), e)| Restriction {
            tail: RationalMatrix::from_fn(vertex_spaces[t].dim, e.dim, |_, _| q(next())),
            head: RationalMatrix::from_fn(vertex_spaces[h].dim, e.dim, |_, _| q(next())),
        })
        .collect();
    TreeCoefficientSystem::new(y, vertex_spaces, edge_spaces, restrictions, None).unwrap()
}

/// Connected components of the subgraph on `verts`.
fn components(y: &tree::FiniteSubtree, verts: &BTreeSet<usize>) -> usize {
    let mut seen = HashSet::new();
    let mut count = 0;
    for &s in verts {
        if !seen.insert(s) {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &(a, b) in y.edges() {
                let w = if a == v { b } else if b == v { a } else { continue };
                if verts.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

#[test]
fn scaled_constant_systems_are_augmented() {
    let y = tree::ball(3, 2).unwrap();
    let ne = y.edges().len();
    let nv = y.vertices().len();
    let restrictions = (0..ne)
        .map(|e| {
            let c = RationalMatrix::scalar(2, &q(e as i64 + 2));
            Restriction { tail: c.clone(), head: c }
        })
        .collect();
    let aug = Augmentation { dim: 2, maps: vec![RationalMatrix::identity(2); nv] };
    let cs = TreeCoefficientSystem::new(y, vec![Facet::new(2); nv], vec![Facet::new(2); ne], restrictions, Some(aug)).unwrap();
    let ss = tree::ss_chain_complex(&cs).unwrap();
    assert_eq!(ss.complex.d(1), ss_oracle(&cs));
    assert!(ss.augmentation.unwrap().component(0).mul(&ss.complex.d(1)).is_zero());
    assert_eq!(betti_oracle(&ss.complex), vec![2, 0]);
}

#[test]
fn incompatible_augmentation_is_refused() {
    let y = tree::ball(2, 1).unwrap();
    let (nv, ne) = (y.vertices().len(), y.edges().len());
    let mut restrictions = vec![Restriction { tail: RationalMatrix::identity(1), head: RationalMatrix::identity(1) }; ne];
    restrictions[0].head = RationalMatrix::scalar(1, &q(2));
    let aug = Augmentation { dim: 1, maps: vec![RationalMatrix::identity(1); nv] };
    let err = TreeCoefficientSystem::new(y, vec![Facet::new(1); nv], vec![Facet::new(1); ne], restrictions, Some(aug)).unwrap_err();
    assert!(matches!(err, tree::TreeError::Augmentation { edge: 0, .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ss_complex_matches_the_oracle(p in prop::sample::select(vec![2u64, 3]), radius in 0usize..=2, seed in prop::collection::vec(-3i64..=3, 8..40)) {
        let cs = random_system(p, radius, &seed);
        let ss = tree::ss_chain_complex(&cs).unwrap();
        prop_assert_eq!(ss.complex.d(1), ss_oracle(&cs));
        let b = ss.complex.betti_numbers().unwrap();
        prop_assert_eq!(&b, &betti_oracle(&ss.complex));
        prop_assert_eq!(b[0] as i64 - b[1] as i64, ss.complex.euler_characteristic());
    }

    #[test]
    fn pushout_homology_counts_components(
        p in prop::sample::select(vec![2u64, 3]),
        radius in 1usize..=2,
        picks in prop::collection::btree_set(0usize..13, 1..6),
        copies in 1usize..=4,
    ) {
        let y = tree::ball(p, radius).unwrap();
        let verts: BTreeSet<usize> = picks.into_iter().filter(|&v| v < y.vertices().len()).collect();
        prop_assume!(!verts.is_empty());
        let z = Subcomplex::induced(&y, verts.iter().copied().collect()).unwrap();
        let c = components(&y, &verts);
        prop_assert_eq!(z.is_convex(&y), c == 1);
        let po = tree::pushout_complex(&y, &z, copies).unwrap();
        // χ = k χ(Y) - (k-1) χ(Z) with Y contractible and Z a forest.
        let expected = vec![1, (copies - 1) * (c - 1)];
        prop_assert_eq!(po.betti().map(|(a, b)| vec![a, b]).unwrap(), expected.clone());
        prop_assert_eq!(betti_oracle(&po.complex), expected);
    }

    #[test]
    fn cosimplicial_rows_on_convex_subtrees(p in prop::sample::select(vec![2u64, 3]), centre in 0usize..4, q_dim in 0usize..=1) {
        let y = tree::ball(p, 2).unwrap();
        let v = &y.vertices()[centre];
        let star: Vec<usize> = std::iter::once(centre)
            .chain(v.neighbors(p).iter().filter_map(|w| y.vertex_index(w)))
            .collect();
        let z = Subcomplex::induced(&y, star).unwrap();
        prop_assert!(z.is_convex(&y));
        let report = tree::cosimplicial_row_check(&y, &z, q_dim, 3).unwrap();
        prop_assert!(report.ok, "{:?}", report);
        prop_assert_eq!(report.cohomology[0], z.cells(q_dim).len());
    }
}

#[test]
fn non_convex_rows_are_refused() {
    let y = tree::ball(2, 2).unwrap();
    let z = Subcomplex::induced(&y, vec![1, 2]).unwrap();
    assert_eq!(tree::cosimplicial_row_check(&y, &z, 0, 2).unwrap_err(), tree::TreeError::NotConvex);
}
