//! The Bruhat-Tits tree of `PGL_2(Q_p)` and chain complexes on finite
//! pieces of it.
//!
//! A vertex is the homothety class of the lattice spanned by the columns of
//! `[[p^m, u], [0, 1]]`, with `u` reduced modulo `p^m` to a rational in
//! `[0, p^m)` whose denominator is a power of `p`. That normal form is
//! unique, so vertices compare and hash exactly.
//!
//! Edges of a [`FiniteSubtree`] are stored once, oriented from the
//! lexicographically smaller endpoint to the larger one, and the
//! Schneider-Stuhler differential sends an edge value to
//! `r_head(v) - r_tail(v)`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, valuation_unchecked, Valuation};
use crate::complexes::{ChainComplex, ChainMap, ComplexError};
use crate::linalg::RationalMatrix;
use crate::rational::{format_q, parse_q, q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("singular matrix")]
    Singular,
    #[error("invalid subtree: {0}")]
    Subtree(String),
    #[error("invalid coefficient system: {0}")]
    System(String),
    #[error("augmentation not compatible on edge {edge} ({tail} -> {head})")]
    Augmentation { edge: usize, tail: String, head: String },
    #[error("element does not stabilize edge {0}")]
    NotStabilizing(String),
    #[error("subcomplex is not geodesically convex")]
    NotConvex,
    #[error("vertices are not connected inside the subtree")]
    Disconnected,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

pub type Result<T> = std::result::Result<T, TreeError>;

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(TreeError::NotPrime(p))
    }
}

fn p_power(p: u64, m: i64) -> Q {
    let base = q(p as i64);
    if m >= 0 {
        num_traits::pow(base, m as usize)
    } else {
        num_traits::pow(base.recip(), (-m) as usize)
    }
}

fn val(x: &Q, p: u64) -> Option<i64> {
    match valuation_unchecked(x, p) {
        Valuation::Finite(v) => Some(v),
        Valuation::Infinite => None,
    }
}

fn mod_inverse(b: &BigInt, modulus: &BigInt) -> BigInt {
    let e = b.mod_floor(modulus).extended_gcd(modulus);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(modulus)
}

/// The representative of `u + p^m Z_p` in `[0, p^m)` with `p`-power
/// denominator. Works for any rational `u`, since `Z[1/p]` is dense.
fn reduce_translation(u: &Q, m: i64, p: u64) -> Q {
    if u.is_zero() {
        return Q::zero();
    }
    let pb = BigInt::from(p);
    let mut b = u.denom().clone();
    let mut k: i64 = 0;
    while (&b % &pb).is_zero() {
        b /= &pb;
        k += 1;
    }
    let e = m + k;
    if e <= 0 {
        return Q::zero();
    }
    let modulus = num_traits::pow(pb.clone(), e as usize);
    let c = (u.numer() * mod_inverse(&b, &modulus)).mod_floor(&modulus);
    Q::new(c, num_traits::pow(pb, k as usize))
}

/// A vertex of the tree in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    m: i64,
    u: Q,
}

impl TreeVertex {
    pub fn new(p: u64, m: i64, u: Q) -> Result<Self> {
        check_prime(p)?;
        Ok(Self::canonical(p, m, &u))
    }

    fn canonical(p: u64, m: i64, u: &Q) -> Self {
        TreeVertex { m, u: reduce_translation(u, m, p) }
    }

    /// The class of the standard lattice `Z_p^2`.
    pub fn base() -> Self {
        TreeVertex { m: 0, u: Q::zero() }
    }

    pub fn level(&self) -> i64 {
        self.m
    }

    pub fn translation(&self) -> &Q {
        &self.u
    }

    /// Lattice matrix `[[p^m, u], [0, 1]]`, row-major.
    fn lattice(&self, p: u64) -> [Q; 4] {
        [p_power(p, self.m), self.u.clone(), Q::zero(), Q::one()]
    }

    /// Normal form of the class spanned by the columns of `a`.
    fn from_lattice(p: u64, a: &[Q; 4]) -> Result<Self> {
        let [x, y, z, w] = a.clone();
        // Columns (x, z) and (y, w); make the second column carry the
        // smaller valuation in the bottom row.
        let (c1, c2) = match (val(&z, p), val(&w, p)) {
            (None, None) => return Err(TreeError::Singular),
            (Some(vz), Some(vw)) if vz < vw => (Some((y, w)), (x, z)),
            (Some(_), None) => (Some((y, w)), (x, z)),
            _ => (Some((x, z)), (y, w)),
        };
        let (top1, bot1) = c1.expect("first column");
        let (top2, bot2) = c2;
        let top1 = top1 - &top2 * (&bot1 / &bot2);
        if top1.is_zero() {
            return Err(TreeError::Singular);
        }
        let a11 = top1 / &bot2;
        let u = top2 / &bot2;
        let m = val(&a11, p).expect("nonzero");
        Ok(Self::canonical(p, m, &u))
    }

    /// The `p + 1` neighbours, in a fixed order.
    pub fn neighbors(&self, p: u64) -> Vec<TreeVertex> {
        let step = p_power(p, self.m);
        let mut out: Vec<TreeVertex> =
            (0..p).map(|i| Self::canonical(p, self.m + 1, &(&self.u + &step * q(i as i64)))).collect();
        out.push(Self::canonical(p, self.m - 1, &self.u));
        out
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, format_q(&self.u))
    }
}

/// Distance via the elementary divisors of `L_v^{-1} L_w`.
pub fn distance(p: u64, v: &TreeVertex, w: &TreeVertex) -> usize {
    let inv_scale = p_power(p, -v.m);
    let inv = [inv_scale.clone(), -&v.u * &inv_scale, Q::zero(), Q::one()];
    let n = mat_mul(&inv, &w.lattice(p));
    let det = &n[0] * &n[3] - &n[1] * &n[2];
    let vmin = n.iter().filter_map(|x| val(x, p)).min().expect("nonzero matrix");
    (val(&det, p).expect("invertible") - 2 * vmin) as usize
}

fn mat_mul(a: &[Q; 4], b: &[Q; 4]) -> [Q; 4] {
    [
        &a[0] * &b[0] + &a[1] * &b[2],
        &a[0] * &b[1] + &a[1] * &b[3],
        &a[2] * &b[0] + &a[3] * &b[2],
        &a[2] * &b[1] + &a[3] * &b[3],
    ]
}

/// An element of `GL_2(Q)` acting on the tree of `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    entries: [Q; 4],
}

impl GroupElement {
    /// Row-major `[[a, b], [c, d]]`.
    pub fn new(a: Q, b: Q, c: Q, d: Q) -> Result<Self> {
        let g = GroupElement { entries: [a, b, c, d] };
        if g.det().is_zero() {
            return Err(TreeError::Singular);
        }
        Ok(g)
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        GroupElement { entries: [Q::one(), Q::zero(), Q::zero(), Q::one()] }
    }

    pub fn entries(&self) -> &[Q; 4] {
        &self.entries
    }

    pub fn det(&self) -> Q {
        let e = &self.entries;
        &e[0] * &e[3] - &e[1] * &e[2]
    }

    pub fn mul(&self, other: &Self) -> Self {
        GroupElement { entries: mat_mul(&self.entries, &other.entries) }
    }
}

pub fn act_vertex(p: u64, g: &GroupElement, v: &TreeVertex) -> Result<TreeVertex> {
    check_prime(p)?;
    TreeVertex::from_lattice(p, &mat_mul(&g.entries, &v.lattice(p)))
}

/// Unique path from `u` to `v` in the whole tree, endpoints included.
pub fn geodesic(p: u64, u: &TreeVertex, v: &TreeVertex) -> Vec<TreeVertex> {
    let mut path = vec![u.clone()];
    let mut d = distance(p, u, v);
    while d > 0 {
        let here = path.last().expect("nonempty");
        let next = here
            .neighbors(p)
            .into_iter()
            .find(|w| distance(p, w, v) + 1 == d)
            .expect("some neighbour is closer");
        path.push(next);
        d -= 1;
    }
    path
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub tail: TreeVertex,
    pub head: TreeVertex,
}

impl OrientedEdge {
    pub fn new(p: u64, tail: TreeVertex, head: TreeVertex) -> Result<Self> {
        check_prime(p)?;
        if distance(p, &tail, &head) != 1 {
            return Err(TreeError::Subtree(format!("{tail} and {head} are not adjacent")));
        }
        Ok(OrientedEdge { tail, head })
    }

    pub fn reversed(&self) -> Self {
        OrientedEdge { tail: self.head.clone(), head: self.tail.clone() }
    }
}

/// `+1` if `g` fixes both endpoints of `e`, `-1` if it swaps them.
pub fn orientation_character(p: u64, g: &GroupElement, e: &OrientedEdge) -> Result<i8> {
    let t = act_vertex(p, g, &e.tail)?;
    let h = act_vertex(p, g, &e.head)?;
    if t == e.tail && h == e.head {
        Ok(1)
    } else if t == e.head && h == e.tail {
        Ok(-1)
    } else {
        Err(TreeError::NotStabilizing(format!("{} -> {}", e.tail, e.head)))
    }
}

/// A finite connected subcomplex of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubtree {
    p: u64,
    vertices: Vec<TreeVertex>,
    /// `(tail, head)` indices with `vertices[tail] < vertices[head]`.
    edges: Vec<(usize, usize)>,
    index: HashMap<TreeVertex, usize>,
}

impl FiniteSubtree {
    /// Edges may be given in either direction; they are reoriented.
    pub fn new(p: u64, vertices: Vec<TreeVertex>, edges: Vec<(usize, usize)>) -> Result<Self> {
        check_prime(p)?;
        if vertices.is_empty() {
            return Err(TreeError::Subtree("no vertices".into()));
        }
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            let c = TreeVertex::canonical(p, v.m, &v.u);
            if &c != v {
                return Err(TreeError::Subtree(format!("vertex {i} is not in normal form")));
            }
            if index.insert(v.clone(), i).is_some() {
                return Err(TreeError::Subtree(format!("vertex {v} repeated")));
            }
        }
        let mut seen = HashSet::new();
        let mut oriented = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(TreeError::Subtree(format!("edge ({a}, {b}) out of range")));
            }
            if distance(p, &vertices[a], &vertices[b]) != 1 {
                return Err(TreeError::Subtree(format!("{} and {} are not adjacent", vertices[a], vertices[b])));
            }
            let e = if vertices[a] < vertices[b] { (a, b) } else { (b, a) };
            if !seen.insert(e) {
                return Err(TreeError::Subtree(format!("edge ({a}, {b}) repeated")));
            }
            oriented.push(e);
        }
        let t = FiniteSubtree { p, vertices, edges: oriented, index };
        if t.components(&(0..t.vertices.len()).collect::<Vec<_>>(), &(0..t.edges.len()).collect::<Vec<_>>()) != 1 {
            return Err(TreeError::Subtree("not connected".into()));
        }
        Ok(t)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_index(&self, v: &TreeVertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.iter().position(|&(t, h)| (t, h) == (a, b) || (t, h) == (b, a))
    }

    pub fn oriented_edge(&self, e: usize) -> OrientedEdge {
        let (t, h) = self.edges[e];
        OrientedEdge { tail: self.vertices[t].clone(), head: self.vertices[h].clone() }
    }

    /// Connected components of the subgraph on the given cells.
    fn components(&self, verts: &[usize], edges: &[usize]) -> usize {
        let mut parent: HashMap<usize, usize> = verts.iter().map(|&v| (v, v)).collect();
        fn find(parent: &mut HashMap<usize, usize>, x: usize) -> usize {
            let mut r = x;
            while parent[&r] != r {
                r = parent[&r];
            }
            parent.insert(x, r);
            r
        }
        let mut count = verts.len();
        for &e in edges {
            let (a, b) = self.edges[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent.insert(ra, rb);
                count -= 1;
            }
        }
        count
    }

    /// Path between two vertex indices using edges of this subtree.
    pub fn path(&self, from: usize, to: usize) -> Result<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut prev = vec![usize::MAX; self.vertices.len()];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if prev[to] == usize::MAX {
            return Err(TreeError::Disconnected);
        }
        let mut path = vec![to];
        while *path.last().expect("nonempty") != from {
            path.push(prev[*path.last().expect("nonempty")]);
        }
        path.reverse();
        Ok(path)
    }
}

/// All vertices within distance `radius` of the base vertex.
pub fn ball(p: u64, radius: usize) -> Result<FiniteSubtree> {
    check_prime(p)?;
    let mut vertices = vec![TreeVertex::base()];
    let mut depth = vec![0usize];
    let mut seen: HashSet<TreeVertex> = HashSet::from([TreeVertex::base()]);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < vertices.len() {
        if depth[i] < radius {
            for w in vertices[i].neighbors(p) {
                if seen.insert(w.clone()) {
                    edges.push((i, vertices.len()));
                    vertices.push(w);
                    depth.push(depth[i] + 1);
                }
            }
        }
        i += 1;
    }
    FiniteSubtree::new(p, vertices, edges)
}

/// `1 + (p+1)(p^R - 1)/(p - 1)`.
pub fn ball_size(p: u64, radius: u32) -> u64 {
    1 + (p + 1) * (p.pow(radius) - 1) / (p - 1)
}

/// A subcomplex of a [`FiniteSubtree`], not necessarily connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcomplex {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl Subcomplex {
    pub fn new(y: &FiniteSubtree, mut vertices: Vec<usize>, mut edges: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        edges.sort_unstable();
        edges.dedup();
        if let Some(&v) = vertices.iter().find(|&&v| v >= y.vertices.len()) {
            return Err(TreeError::Subtree(format!("vertex {v} not in the ambient subtree")));
        }
        for &e in &edges {
            let Some(&(a, b)) = y.edges.get(e) else {
                return Err(TreeError::Subtree(format!("edge {e} not in the ambient subtree")));
            };
            if vertices.binary_search(&a).is_err() || vertices.binary_search(&b).is_err() {
                return Err(TreeError::Subtree(format!("edge {e} has an endpoint outside the subcomplex")));
            }
        }
        Ok(Subcomplex { vertices, edges })
    }

    /// The full subcomplex on a vertex set.
    pub fn induced(y: &FiniteSubtree, vertices: Vec<usize>) -> Result<Self> {
        let set: HashSet<usize> = vertices.iter().copied().collect();
        let edges = (0..y.edges.len()).filter(|&e| set.contains(&y.edges[e].0) && set.contains(&y.edges[e].1)).collect();
        Self::new(y, vertices, edges)
    }

    pub fn whole(y: &FiniteSubtree) -> Self {
        Subcomplex { vertices: (0..y.vertices.len()).collect(), edges: (0..y.edges.len()).collect() }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Cells of dimension `q` (0 or 1), as indices into the ambient subtree.
    pub fn cells(&self, q: usize) -> &[usize] {
        if q == 0 {
            &self.vertices
        } else {
            &self.edges
        }
    }

    /// Whether every tree geodesic between two of its vertices stays inside,
    /// edges included.
    pub fn is_convex(&self, y: &FiniteSubtree) -> bool {
        let verts: HashSet<&TreeVertex> = self.vertices.iter().map(|&v| &y.vertices[v]).collect();
        let edges: HashSet<(usize, usize)> = self.edges.iter().map(|&e| y.edges[e]).collect();
        for (i, &a) in self.vertices.iter().enumerate() {
            for &b in &self.vertices[i + 1..] {
                let path = geodesic(y.p, &y.vertices[a], &y.vertices[b]);
                for pair in path.windows(2) {
                    if !verts.contains(&pair[1]) {
                        return false;
                    }
                    let (s, t) = (y.index[&pair[0]], y.index[&pair[1]]);
                    let e = if y.vertices[s] < y.vertices[t] { (s, t) } else { (t, s) };
                    if !edges.contains(&e) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Dimension and label of the space attached to one facet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Facet {
    pub fn new(dim: usize) -> Self {
        Facet { dim, label: None }
    }
}

/// Restriction maps of one edge, relative to its stored orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    pub tail: RationalMatrix,
    pub head: RationalMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Augmentation {
    pub dim: usize,
    /// One map `A_v -> V` per vertex.
    pub maps: Vec<RationalMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCoefficientSystem {
    tree: FiniteSubtree,
    vertex_spaces: Vec<Facet>,
    edge_spaces: Vec<Facet>,
    restrictions: Vec<Restriction>,
    augmentation: Option<Augmentation>,
}

impl TreeCoefficientSystem {
    pub fn new(
        tree: FiniteSubtree,
        vertex_spaces: Vec<Facet>,
        edge_spaces: Vec<Facet>,
        restrictions: Vec<Restriction>,
        augmentation: Option<Augmentation>,
    ) -> Result<Self> {
        let bad = |s: String| Err(TreeError::System(s));
        if vertex_spaces.len() != tree.vertices.len() {
            return bad(format!("{} vertex spaces for {} vertices", vertex_spaces.len(), tree.vertices.len()));
        }
        if edge_spaces.len() != tree.edges.len() || restrictions.len() != tree.edges.len() {
            return bad(format!("edge data does not match {} edges", tree.edges.len()));
        }
        for (e, (&(t, h), r)) in tree.edges.iter().zip(&restrictions).enumerate() {
            let de = edge_spaces[e].dim;
            if r.tail.shape() != (vertex_spaces[t].dim, de) || r.head.shape() != (vertex_spaces[h].dim, de) {
                return bad(format!("restriction maps of edge {e} have the wrong shape"));
            }
        }
        if let Some(aug) = &augmentation {
            if aug.maps.len() != tree.vertices.len() {
                return bad("one augmentation map per vertex is required".into());
            }
            for (v, m) in aug.maps.iter().enumerate() {
                if m.shape() != (aug.dim, vertex_spaces[v].dim) {
                    return bad(format!("augmentation map at vertex {v} has the wrong shape"));
                }
            }
            for (e, (&(t, h), r)) in tree.edges.iter().zip(&restrictions).enumerate() {
                if aug.maps[t].mul(&r.tail) != aug.maps[h].mul(&r.head) {
                    return Err(TreeError::Augmentation {
                        edge: e,
                        tail: tree.vertices[t].to_string(),
                        head: tree.vertices[h].to_string(),
                    });
                }
            }
        }
        Ok(TreeCoefficientSystem { tree, vertex_spaces, edge_spaces, restrictions, augmentation })
    }

    /// `E^dim` on every facet with identity restrictions and augmentation.
    pub fn constant(tree: FiniteSubtree, dim: usize) -> Self {
        let nv = tree.vertices.len();
        let ne = tree.edges.len();
        let id = RationalMatrix::identity(dim);
        TreeCoefficientSystem {
            vertex_spaces: vec![Facet::new(dim); nv],
            edge_spaces: vec![Facet::new(dim); ne],
            restrictions: vec![Restriction { tail: id.clone(), head: id.clone() }; ne],
            augmentation: Some(Augmentation { dim, maps: vec![id; nv] }),
            tree,
        }
    }

    pub fn tree(&self) -> &FiniteSubtree {
        &self.tree
    }

    pub fn vertex_spaces(&self) -> &[Facet] {
        &self.vertex_spaces
    }

    pub fn edge_spaces(&self) -> &[Facet] {
        &self.edge_spaces
    }

    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    pub fn augmentation(&self) -> Option<&Augmentation> {
        self.augmentation.as_ref()
    }

    pub fn without_augmentation(mut self) -> Self {
        self.augmentation = None;
        self
    }
}

/// The Schneider-Stuhler complex `C_1 -> C_0` and, when present, its
/// augmentation to `V` in degree 0.
#[derive(Debug, Clone)]
pub struct SsComplex {
    pub complex: ChainComplex,
    pub augmentation: Option<ChainMap>,
}

fn offsets(dims: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    dims.map(|d| {
        let o = acc;
        acc += d;
        o
    })
    .collect()
}

pub fn ss_chain_complex(cs: &TreeCoefficientSystem) -> Result<SsComplex> {
    let voff = offsets(cs.vertex_spaces.iter().map(|f| f.dim));
    let eoff = offsets(cs.edge_spaces.iter().map(|f| f.dim));
    let c0: usize = cs.vertex_spaces.iter().map(|f| f.dim).sum();
    let c1: usize = cs.edge_spaces.iter().map(|f| f.dim).sum();
    let mut d = RationalMatrix::zeros(c0, c1);
    for (e, (&(t, h), r)) in cs.tree.edges.iter().zip(&cs.restrictions).enumerate() {
        d.set_block(voff[h], eoff[e], &r.head);
        let mut block = d.block(voff[t], eoff[e], r.tail.rows(), r.tail.cols());
        block = block.sub(&r.tail);
        d.set_block(voff[t], eoff[e], &block);
    }
    let complex = ChainComplex::new(0, vec![c0, c1], vec![d])?;
    let augmentation = match &cs.augmentation {
        None => None,
        Some(aug) => {
            let blocks: Vec<&RationalMatrix> = aug.maps.iter().collect();
            let eps = RationalMatrix::hstack(&blocks);
            let eps = if blocks.is_empty() { RationalMatrix::zeros(aug.dim, 0) } else { eps };
            let target = ChainComplex::concentrated(0, aug.dim);
            Some(ChainMap::new(complex.clone(), target, BTreeMap::from([(0, eps)]))?)
        }
    };
    Ok(SsComplex { complex, augmentation })
}

/// A cell of an iterated pushout: shared (from `Z`) or in one copy of `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PushoutCell {
    pub copy: Option<usize>,
    pub index: usize,
}

/// `copies` copies of `Y` glued along `Z`, as a 1-dimensional complex.
#[derive(Debug, Clone)]
pub struct Pushout {
    pub copies: usize,
    pub vertices: Vec<PushoutCell>,
    /// Edge cells with their endpoints as indices into `vertices`.
    pub edges: Vec<(PushoutCell, usize, usize)>,
    pub complex: ChainComplex,
}

impl Pushout {
    pub fn betti(&self) -> Result<(usize, usize)> {
        let b = self.complex.betti_range(0, 1)?;
        Ok((b[0], b[1]))
    }

    /// Trivial reduced homology: connected with no cycles.
    pub fn is_acyclic(&self) -> Result<bool> {
        Ok(self.betti()? == (1, 0))
    }
}

/// Cells of `P_j` in degree `q`: shared cells first, then each copy's
/// private cells in ambient order.
fn pushout_cells(y: &FiniteSubtree, z: &Subcomplex, q: usize, copies: usize) -> Vec<PushoutCell> {
    let total = if q == 0 { y.vertices.len() } else { y.edges.len() };
    let shared: HashSet<usize> = z.cells(q).iter().copied().collect();
    let mut out: Vec<PushoutCell> = z.cells(q).iter().map(|&i| PushoutCell { copy: None, index: i }).collect();
    for c in 0..copies {
        out.extend((0..total).filter(|i| !shared.contains(i)).map(|i| PushoutCell { copy: Some(c), index: i }));
    }
    out
}

pub fn pushout_complex(y: &FiniteSubtree, z: &Subcomplex, copies: usize) -> Result<Pushout> {
    if copies == 0 {
        return Err(TreeError::Subtree("at least one copy is required".into()));
    }
    let z = Subcomplex::new(y, z.vertices.clone(), z.edges.clone())?;
    let vertices = pushout_cells(y, &z, 0, copies);
    let edge_cells = pushout_cells(y, &z, 1, copies);
    let vindex: HashMap<PushoutCell, usize> = vertices.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let shared_v: HashSet<usize> = z.vertices.iter().copied().collect();
    let locate = |copy: Option<usize>, v: usize| {
        let cell = if shared_v.contains(&v) { PushoutCell { copy: None, index: v } } else { PushoutCell { copy, index: v } };
        vindex[&cell]
    };
    let mut d = RationalMatrix::zeros(vertices.len(), edge_cells.len());
    let mut edges = Vec::with_capacity(edge_cells.len());
    for (k, cell) in edge_cells.iter().enumerate() {
        let (t, h) = y.edges[cell.index];
        let (t, h) = (locate(cell.copy, t), locate(cell.copy, h));
        d.add_at(h, k, &Q::one());
        d.add_at(t, k, &-Q::one());
        edges.push((*cell, t, h));
    }
    let complex = ChainComplex::new(0, vec![vertices.len(), edge_cells.len()], vec![d])?;
    Ok(Pushout { copies, vertices, edges, complex })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosimplicialReport {
    pub q: usize,
    pub j_max: usize,
    /// `dim X^j` for `j = 0..=j_max`.
    pub dims: Vec<usize>,
    /// Cohomology of the alternating-sum complex in degrees `0..j_max`.
    pub cohomology: Vec<usize>,
    pub expected_degree0: usize,
    /// `fold ∘ d^j` equals `0` (even `j`) or `fold` (odd `j`).
    pub alternation: Vec<bool>,
    pub cosimplicial_identities: bool,
    pub ok: bool,
}

/// Coface `δ^i : X^j -> X^{j+1}` induced by the injection skipping `i`.
fn coface(y: &FiniteSubtree, z: &Subcomplex, q: usize, j: usize, i: usize) -> RationalMatrix {
    let src = pushout_cells(y, z, q, j + 1);
    let dst = pushout_cells(y, z, q, j + 2);
    let index: HashMap<PushoutCell, usize> = dst.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut m = RationalMatrix::zeros(dst.len(), src.len());
    for (k, cell) in src.iter().enumerate() {
        let image = PushoutCell { copy: cell.copy.map(|c| if c < i { c } else { c + 1 }), index: cell.index };
        m.set(index[&image], k, Q::one());
    }
    m
}

/// Collapse `X^j -> C_q(Y)` identifying all copies.
fn fold(y: &FiniteSubtree, z: &Subcomplex, q: usize, j: usize) -> RationalMatrix {
    let cells = pushout_cells(y, z, q, j + 1);
    let total = if q == 0 { y.vertices.len() } else { y.edges.len() };
    let mut m = RationalMatrix::zeros(total, cells.len());
    for (k, cell) in cells.iter().enumerate() {
        m.set(cell.index, k, Q::one());
    }
    m
}

/// Raw data of the cosimplicial row `j ↦ C_q(P_j)`.
#[derive(Debug, Clone)]
pub struct CosimplicialRow {
    /// `dim X^j` for `j = 0..=j_max`.
    pub dims: Vec<usize>,
    /// `d^j = Σ (-1)^i δ^i : X^j -> X^{j+1}`.
    pub diffs: Vec<RationalMatrix>,
    /// `fold_j : X^j -> C_q(Y)`.
    pub folds: Vec<RationalMatrix>,
    /// `δ^b δ^a = δ^a δ^{b-1}` for `a < b`.
    pub identities: bool,
}

impl CosimplicialRow {
    /// The alternating-sum complex, cochain degree `j` in chain degree `-j`.
    pub fn complex(&self) -> Result<ChainComplex> {
        let j_max = self.dims.len() - 1;
        let dims: Vec<usize> = self.dims.iter().rev().copied().collect();
        let diffs: Vec<RationalMatrix> = self.diffs.iter().rev().cloned().collect();
        Ok(ChainComplex::new(-(j_max as i64), dims, diffs)?.as_cochain())
    }
}

pub fn cosimplicial_row(y: &FiniteSubtree, z: &Subcomplex, q: usize, j_max: usize) -> Result<CosimplicialRow> {
    if q > 1 {
        return Err(TreeError::Subtree(format!("no cells of dimension {q} in a tree")));
    }
    let z = Subcomplex::new(y, z.vertices.clone(), z.edges.clone())?;
    if !z.is_convex(y) {
        return Err(TreeError::NotConvex);
    }
    let cofaces: Vec<Vec<RationalMatrix>> =
        (0..j_max).map(|j| (0..=j + 1).map(|i| coface(y, &z, q, j, i)).collect()).collect();
    let mut identities = true;
    for j in 0..j_max.saturating_sub(1) {
        for b in 0..=j + 2 {
            for a in 0..b {
                if cofaces[j + 1][b].mul(&cofaces[j][a]) != cofaces[j + 1][a].mul(&cofaces[j][b - 1]) {
                    identities = false;
                }
            }
        }
    }
    let diffs = cofaces
        .iter()
        .map(|row| {
            row.iter().enumerate().fold(RationalMatrix::zeros(row[0].rows(), row[0].cols()), |acc, (i, m)| {
                if i % 2 == 0 {
                    acc.add(m)
                } else {
                    acc.sub(m)
                }
            })
        })
        .collect();
    let dims = (0..=j_max).map(|j| pushout_cells(y, &z, q, j + 1).len()).collect();
    let folds = (0..=j_max).map(|j| fold(y, &z, q, j)).collect();
    Ok(CosimplicialRow { dims, diffs, folds, identities })
}

pub fn cosimplicial_row_check(y: &FiniteSubtree, z: &Subcomplex, q: usize, j_max: usize) -> Result<CosimplicialReport> {
    let row = cosimplicial_row(y, z, q, j_max)?;
    let complex = row.complex()?;
    let cohomology: Vec<usize> =
        (0..j_max as i64).map(|n| complex.cohomology(n).map(|h| h.dim)).collect::<std::result::Result<_, _>>()?;
    // fold ∘ d^j is 0 for even j and fold for odd j.
    let alternation: Vec<bool> = (0..j_max)
        .map(|j| {
            let lhs = row.folds[j + 1].mul(&row.diffs[j]);
            if j % 2 == 0 {
                lhs.is_zero()
            } else {
                lhs == row.folds[j]
            }
        })
        .collect();
    let expected_degree0 = z.cells(q).len();
    let ok = row.identities
        && alternation.iter().all(|&b| b)
        && cohomology.first().map_or(true, |&h| h == expected_degree0)
        && cohomology.iter().skip(1).all(|&h| h == 0);
    Ok(CosimplicialReport {
        q,
        j_max,
        dims: row.dims,
        cohomology,
        expected_degree0,
        alternation,
        cosimplicial_identities: row.identities,
        ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub m: i64,
    #[serde(with = "crate::rational::as_string")]
    pub u: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeJson {
    pub p: u64,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&FiniteSubtree> for SubtreeJson {
    fn from(t: &FiniteSubtree) -> Self {
        SubtreeJson {
            p: t.p,
            vertices: t.vertices.iter().map(|v| VertexJson { m: v.m, u: v.u.clone() }).collect(),
            edges: t.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl SubtreeJson {
    /// Vertices are canonicalized on the way in.
    pub fn into_subtree(self) -> Result<FiniteSubtree> {
        check_prime(self.p)?;
        let p = self.p;
        let vertices = self.vertices.iter().map(|v| TreeVertex::canonical(p, v.m, &v.u)).collect();
        FiniteSubtree::new(p, vertices, self.edges.iter().map(|e| (e[0], e[1])).collect())
    }
}

/// Coefficient system on a subtree. Restriction maps are relative to the
/// edge as written (`edges[e][0]` is the tail); they are swapped if the
/// stored orientation differs, which only changes signs in `C_1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientSystemJson {
    pub tree: SubtreeJson,
    pub vertex_spaces: Vec<Facet>,
    pub edge_spaces: Vec<Facet>,
    pub restrictions: Vec<Restriction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<Augmentation>,
}

impl From<&TreeCoefficientSystem> for CoefficientSystemJson {
    fn from(cs: &TreeCoefficientSystem) -> Self {
        CoefficientSystemJson {
            tree: SubtreeJson::from(&cs.tree),
            vertex_spaces: cs.vertex_spaces.clone(),
            edge_spaces: cs.edge_spaces.clone(),
            restrictions: cs.restrictions.clone(),
            augmentation: cs.augmentation.clone(),
        }
    }
}

impl CoefficientSystemJson {
    pub fn into_system(self) -> Result<TreeCoefficientSystem> {
        let written: Vec<(usize, usize)> = self.tree.edges.iter().map(|e| (e[0], e[1])).collect();
        let tree = self.tree.into_subtree()?;
        if self.restrictions.len() != written.len() {
            return Err(TreeError::System(format!("{} restrictions for {} edges", self.restrictions.len(), written.len())));
        }
        let restrictions = written
            .iter()
            .zip(self.restrictions)
            .enumerate()
            .map(|(e, (&(a, _), r))| if tree.edges[e].0 == a { r } else { Restriction { tail: r.head, head: r.tail } })
            .collect();
        TreeCoefficientSystem::new(tree, self.vertex_spaces, self.edge_spaces, restrictions, self.augmentation)
    }
}

/// Parses a vertex from `m` and a `"num/den"` translation.
pub fn parse_vertex(p: u64, m: i64, u: &str) -> Result<TreeVertex> {
    let u = parse_q(u).map_err(|e| TreeError::Subtree(e.to_string()))?;
    TreeVertex::new(p, m, u)
}

/// Whether a rational has a `p`-power denominator.
pub fn has_p_power_denominator(x: &Q, p: u64) -> bool {
    let mut d = x.denom().abs();
    let pb = BigInt::from(p);
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    d.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;
    use proptest::prelude::*;

    fn v(p: u64, m: i64, u: Q) -> TreeVertex {
        TreeVertex::new(p, m, u).unwrap()
    }

    #[test]
    fn canonical_forms() {
        let a = v(2, 2, q(5));
        assert_eq!(a.translation(), &q(1));
        assert_eq!(TreeVertex::canonical(2, a.m, &a.u), a);
        assert_eq!(v(2, 0, qf(3, 2)).translation(), &qf(1, 2));
        assert_eq!(v(2, -1, qf(3, 4)).translation(), &qf(1, 4));
        // 1/3 is a 2-adic unit; mod 4 it is 3.
        assert_eq!(v(2, 2, qf(1, 3)).translation(), &q(3));
        assert!(has_p_power_denominator(v(3, 1, qf(5, 7)).translation(), 3));
    }

    #[test]
    fn ball_counts() {
        for (p, r) in [(2, 0), (2, 1), (3, 2), (5, 2), (2, 3)] {
            let b = ball(p, r).unwrap();
            assert_eq!(b.vertices().len() as u64, ball_size(p, r as u32));
            assert_eq!(b.edges().len(), b.vertices().len() - 1);
        }
    }

    #[test]
    fn neighbours_are_adjacent_and_distinct() {
        for p in [2, 3, 5] {
            let x = v(p, 1, q(1));
            let ns = x.neighbors(p);
            let set: HashSet<_> = ns.iter().collect();
            assert_eq!(set.len() as u64, p + 1);
            assert!(ns.iter().all(|n| distance(p, &x, n) == 1));
        }
    }

    #[test]
    fn action_examples() {
        let p = 3;
        let base = TreeVertex::base();
        assert_eq!(act_vertex(p, &GroupElement::identity(), &base).unwrap(), base);
        let d = GroupElement::from_i64(3, 0, 0, 1).unwrap();
        let image = act_vertex(p, &d, &base).unwrap();
        assert_eq!(image, v(p, 1, q(0)));
        assert_eq!(distance(p, &base, &image), 1);
        let k = GroupElement::from_i64(2, 1, 1, 1).unwrap();
        assert_eq!(act_vertex(p, &k, &base).unwrap(), base);
        assert!(matches!(GroupElement::from_i64(1, 2, 2, 4), Err(TreeError::Singular)));
    }

    #[test]
    fn orientation_examples() {
        for p in [2u64, 3] {
            let pi = p as i64;
            let base = TreeVertex::base();
            let up = v(p, 1, q(0));
            let down = v(p, -1, q(0));
            let edge = OrientedEdge::new(p, base.clone(), up.clone()).unwrap();
            assert_eq!(orientation_character(p, &GroupElement::identity(), &edge).unwrap(), 1);
            // Under the column-span convention the transpose swaps this edge.
            let w = GroupElement::from_i64(0, pi, 1, 0).unwrap();
            assert_eq!(orientation_character(p, &w, &edge).unwrap(), -1);
            assert_eq!(orientation_character(p, &w, &edge.reversed()).unwrap(), -1);
            let w2 = GroupElement::from_i64(0, 1, pi, 0).unwrap();
            assert!(orientation_character(p, &w2, &edge).is_err());
            let other = OrientedEdge::new(p, base.clone(), down).unwrap();
            assert_eq!(orientation_character(p, &w2, &other).unwrap(), -1);
            let iwahori = GroupElement::from_i64(1, pi, 1, 1 + pi).unwrap();
            assert_eq!(orientation_character(p, &iwahori, &edge).unwrap(), 1);
        }
    }

    #[test]
    fn geodesics_and_convexity() {
        let p = 2;
        let base = TreeVertex::base();
        assert_eq!(geodesic(p, &base, &base), vec![base.clone()]);
        let n = base.neighbors(p);
        assert_eq!(geodesic(p, &base, &n[0]), vec![base.clone(), n[0].clone()]);
        assert_eq!(geodesic(p, &n[0], &n[1]), vec![n[0].clone(), base.clone(), n[1].clone()]);

        let y = ball(p, 1).unwrap();
        let leaves = Subcomplex::new(&y, vec![1, 2], vec![]).unwrap();
        assert!(!leaves.is_convex(&y));
        assert!(Subcomplex::induced(&y, vec![0, 1, 2]).unwrap().is_convex(&y));
        // Vertices present but the connecting edge missing.
        assert!(!Subcomplex::new(&y, vec![0, 1], vec![]).unwrap().is_convex(&y));
        assert_eq!(y.path(1, 2).unwrap(), vec![1, 0, 2]);
    }

    #[test]
    fn subtree_validation() {
        let p = 2;
        let base = TreeVertex::base();
        let far = v(p, 2, q(0));
        assert!(FiniteSubtree::new(p, vec![base.clone(), far.clone()], vec![(0, 1)]).is_err());
        assert!(FiniteSubtree::new(p, vec![base.clone(), far], vec![]).is_err());
        assert!(FiniteSubtree::new(4, vec![base], vec![]).is_err());
    }

    #[test]
    fn ss_examples() {
        let b = ball(2, 2).unwrap();
        let ss = ss_chain_complex(&TreeCoefficientSystem::constant(b, 1)).unwrap();
        assert_eq!(ss.complex.betti_range(0, 1).unwrap(), vec![1, 0]);
        let aug = ss.augmentation.unwrap();
        assert!(aug.violations().is_empty());

        let edge = ball(2, 0).unwrap();
        assert_eq!(edge.vertices().len(), 1);
        let e = FiniteSubtree::new(2, vec![TreeVertex::base(), v(2, 1, q(0))], vec![(1, 0)]).unwrap();
        let zero_edge = TreeCoefficientSystem::new(
            e.clone(),
            vec![Facet::new(2), Facet::new(1)],
            vec![Facet::new(0)],
            vec![Restriction { tail: RationalMatrix::zeros(2, 0), head: RationalMatrix::zeros(1, 0) }],
            None,
        )
        .unwrap();
        let ss = ss_chain_complex(&zero_edge).unwrap();
        assert!(ss.complex.d(1).is_zero());
        assert_eq!(ss.complex.betti_range(0, 1).unwrap(), vec![3, 0]);

        let ss = ss_chain_complex(&TreeCoefficientSystem::constant(e, 1)).unwrap();
        assert_eq!(ss.complex.d(1), RationalMatrix::from_i64(&[&[-1], &[1]]));
        assert_eq!(ss.complex.betti_range(0, 1).unwrap(), vec![1, 0]);
    }

    #[test]
    fn incompatible_augmentation_is_reported() {
        let e = FiniteSubtree::new(3, vec![TreeVertex::base(), v(3, 1, q(0))], vec![(0, 1)]).unwrap();
        let id = RationalMatrix::identity(1);
        let err = TreeCoefficientSystem::new(
            e,
            vec![Facet::new(1); 2],
            vec![Facet::new(1)],
            vec![Restriction { tail: id.clone(), head: id.scale(&q(2)) }],
            Some(Augmentation { dim: 1, maps: vec![id.clone(), id] }),
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::Augmentation { edge: 0, .. }));
    }

    #[test]
    fn pushout_examples() {
        let y = ball(2, 1).unwrap();
        let point = Subcomplex::new(&y, vec![0], vec![]).unwrap();
        let once = pushout_complex(&y, &point, 1).unwrap();
        assert_eq!(once.vertices.len(), y.vertices().len());
        assert_eq!(once.edges.len(), y.edges().len());
        let twice = pushout_complex(&y, &point, 2).unwrap();
        assert_eq!(twice.betti().unwrap(), (1, 0));
        let leaves = Subcomplex::new(&y, vec![1, 2], vec![]).unwrap();
        assert_eq!(pushout_complex(&y, &leaves, 2).unwrap().betti().unwrap(), (1, 1));
        assert!(Subcomplex::new(&y, vec![1], vec![0]).is_err());
    }

    #[test]
    fn cosimplicial_examples() {
        let y = ball(2, 1).unwrap();
        let point = Subcomplex::new(&y, vec![0], vec![]).unwrap();
        let r0 = cosimplicial_row_check(&y, &point, 0, 3).unwrap();
        assert!(r0.ok, "{r0:?}");
        assert_eq!(r0.cohomology, vec![1, 0, 0]);
        let r1 = cosimplicial_row_check(&y, &point, 1, 3).unwrap();
        assert!(r1.ok);
        assert_eq!(r1.cohomology, vec![0, 0, 0]);
        let whole = cosimplicial_row_check(&y, &Subcomplex::whole(&y), 0, 3).unwrap();
        assert!(whole.ok);
        assert_eq!(whole.cohomology[0], y.vertices().len());
        let leaves = Subcomplex::new(&y, vec![1, 2], vec![]).unwrap();
        assert_eq!(cosimplicial_row_check(&y, &leaves, 0, 3), Err(TreeError::NotConvex));
    }

    #[test]
    fn json_round_trip() {
        let cs = TreeCoefficientSystem::constant(ball(3, 1).unwrap(), 2);
        let text = serde_json::to_string(&CoefficientSystemJson::from(&cs)).unwrap();
        let back: CoefficientSystemJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_system().unwrap(), cs);
        let sub: SubtreeJson = serde_json::from_str(r#"{"p":2,"vertices":[{"m":0,"u":"0"},{"m":1,"u":"5/1"}],"edges":[[1,0]]}"#).unwrap();
        let t = sub.into_subtree().unwrap();
        assert_eq!(t.vertices()[1], v(2, 1, q(1)));
        assert_eq!(t.edges(), &[(0, 1)]);
    }

    fn unit_matrix(p: i64) -> impl Strategy<Value = GroupElement> {
        (-6i64..=6, -6i64..=6, -6i64..=6, -6i64..=6)
            .prop_filter("p-unit determinant", move |(a, b, c, d)| (a * d - b * c).rem_euclid(p) != 0)
            .prop_map(|(a, b, c, d)| GroupElement::from_i64(a, b, c, d).unwrap())
    }

    fn edge_stabilizer(p: i64) -> impl Strategy<Value = GroupElement> {
        (any::<bool>(), 1i64..=6, -6i64..=6, -6i64..=6, 1i64..=6)
            .prop_filter("units on the diagonal", move |(_, a, _, _, d)| a % p != 0 && d % p != 0)
            .prop_map(move |(swap, a, b, c, d)| {
                let iw = GroupElement::from_i64(a, p * b, c, d).unwrap();
                if swap {
                    GroupElement::from_i64(0, p, 1, 0).unwrap().mul(&iw)
                } else {
                    iw
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn action_preserves_distance((p, g) in prop::sample::select(vec![2u64, 3]).prop_flat_map(|p| (Just(p), unit_matrix(p as i64))), seed in 0usize..1000) {
            let b = ball(p, 3).unwrap();
            let n = b.vertices().len();
            let (x, y) = (&b.vertices()[seed % n], &b.vertices()[(seed * 7 + 3) % n]);
            let gx = act_vertex(p, &g, x).unwrap();
            let gy = act_vertex(p, &g, y).unwrap();
            prop_assert_eq!(distance(p, &gx, &gy), distance(p, x, y));
            prop_assert_eq!(act_vertex(p, &GroupElement::identity(), x).unwrap(), x.clone());
        }

        #[test]
        fn unit_matrices_fix_the_base(g in unit_matrix(3)) {
            prop_assert_eq!(act_vertex(3, &g, &TreeVertex::base()).unwrap(), TreeVertex::base());
        }

        #[test]
        fn character_is_multiplicative(g in edge_stabilizer(3), h in edge_stabilizer(3)) {
            let e = OrientedEdge::new(3, TreeVertex::base(), v(3, 1, q(0))).unwrap();
            let cg = orientation_character(3, &g, &e).unwrap();
            let ch = orientation_character(3, &h, &e).unwrap();
            prop_assert_eq!(orientation_character(3, &g.mul(&h), &e).unwrap(), cg * ch);
        }

        #[test]
        fn canonicalization_is_idempotent(p in prop::sample::select(vec![2u64, 3, 5]), m in -3i64..4, n in -200i64..200, d in 1i64..50) {
            let x = v(p, m, qf(n, d));
            prop_assert!(has_p_power_denominator(x.translation(), p));
            prop_assert_eq!(TreeVertex::canonical(p, m, x.translation()), x.clone());
            let shifted = v(p, m, qf(n, d) + p_power(p, m) * q(n));
            prop_assert_eq!(shifted, x);
        }
    }
}
