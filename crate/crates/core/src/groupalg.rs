//! Finite groups, finite-dimensional algebras and their modules.
//!
//! Algebras are stored by their left-multiplication matrices `L_i` (so
//! `e_i e_j = L_i e_j`). A module is a list of matrices `ρ(e_i)`. The free
//! module `A^r` uses the basis index `g * dim A + i` for `e_i` in slot `g`.

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::complexes::ChainComplex;
use crate::lie::subsets;
use crate::linalg::{self, IncrementalSpan, PivotOrder, RationalMatrix};
use crate::rational::{q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupAlgError {
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("cocycle condition fails at {0:?}")]
    Cocycle((usize, usize, usize)),
    #[error("crossed product not associative at basis triple {0:?}")]
    NotAssociative((usize, usize, usize)),
    #[error("operators must commute and be invertible: {0}")]
    Operators(String),
    #[error("lifting failed: {0}")]
    Lift(String),
}

type Result<T> = std::result::Result<T, GroupAlgError>;

fn unit_vec(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

// ---------------------------------------------------------------- groups

/// A finite group by its multiplication table; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub name: String,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutations: Option<Vec<Vec<usize>>>,
}

impl FiniteGroup {
    pub fn from_table(name: &str, table: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(GroupAlgError::InvalidGroup("table must be n x n with entries < n".into()));
        }
        if (0..n).any(|g| table[0][g] != g || table[g][0] != g) {
            return Err(GroupAlgError::InvalidGroup("element 0 is not the identity".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupAlgError::InvalidGroup(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == 0 && table[b][a] == 0)
                .ok_or_else(|| GroupAlgError::InvalidGroup(format!("element {a} has no inverse")))?;
        }
        let g = FiniteGroup { name: name.into(), table, inverse, generators, permutations: None };
        if g.generated_closure().len() != n {
            return Err(GroupAlgError::InvalidGroup("generators do not generate the group".into()));
        }
        Ok(g)
    }

    /// The group generated by permutations of `0..k`, composed right to left.
    pub fn from_permutations(name: &str, gens: &[Vec<usize>]) -> Result<Self> {
        let k = gens.first().map_or(0, Vec::len);
        let id: Vec<usize> = (0..k).collect();
        let compose = |a: &[usize], b: &[usize]| -> Vec<usize> { b.iter().map(|&x| a[x]).collect() };
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let p = compose(&elems[i], g);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(p);
                }
            }
        }
        let n = elems.len();
        let table: Vec<Vec<usize>> =
            (0..n).map(|a| (0..n).map(|b| index[&compose(&elems[a], &elems[b])]).collect()).collect();
        let generators = gens.iter().map(|g| index[g]).collect();
        let mut g = Self::from_table(name, table, generators)?;
        g.permutations = Some(elems);
        Ok(g)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let gens = if n > 1 { vec![1] } else { vec![] };
        Self::from_table(&format!("Z{n}"), table, gens).expect("cyclic group")
    }

    pub fn direct_product(a: &Self, b: &Self) -> Self {
        let (n, m) = (a.order(), b.order());
        let table = (0..n * m)
            .map(|x| (0..n * m).map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m)).collect())
            .collect();
        let gens = a.generators.iter().map(|&g| g * m).chain(b.generators.iter().copied()).collect();
        Self::from_table(&format!("{}x{}", a.name, b.name), table, gens).expect("direct product")
    }

    pub fn symmetric(k: usize) -> Self {
        if k < 2 {
            return Self::trivial();
        }
        let cycle: Vec<usize> = (0..k).map(|i| (i + 1) % k).collect();
        let mut swap: Vec<usize> = (0..k).collect();
        swap.swap(0, 1);
        let gens = if k == 2 { vec![swap] } else { vec![cycle, swap] };
        Self::from_permutations(&format!("S{k}"), &gens).expect("symmetric group")
    }

    /// Symmetries of the `n`-gon, order `2n`.
    pub fn dihedral(n: usize) -> Self {
        let r: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let s: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        Self::from_permutations(&format!("D{n}"), &[r, s]).expect("dihedral group")
    }

    /// Quaternion group; elements `±1, ±i, ±j, ±k` packed as `4 * sign + unit`.
    pub fn quaternion() -> Self {
        // unit products: (row, col) -> (sign, unit) for 1, i, j, k
        const T: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let table = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (s, u) = T[a % 4][b % 4];
                        ((a / 4 + b / 4 + s) % 2) * 4 + u
                    })
                    .collect()
            })
            .collect();
        Self::from_table("Q8", table, vec![1, 2]).expect("quaternion group")
    }

    /// One representative of each isomorphism class of order at most 8.
    pub fn all_up_to_order_8() -> Vec<Self> {
        let z = Self::cyclic;
        vec![
            z(1),
            z(2),
            z(3),
            z(4),
            Self::direct_product(&z(2), &z(2)),
            z(5),
            z(6),
            Self::symmetric(3),
            z(7),
            z(8),
            Self::direct_product(&z(4), &z(2)),
            Self::direct_product(&Self::direct_product(&z(2), &z(2)), &z(2)),
            Self::dihedral(4),
            Self::quaternion(),
        ]
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn permutations(&self) -> Option<&[Vec<usize>]> {
        self.permutations.as_deref()
    }

    fn generated_closure(&self) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut out = vec![0];
        let mut i = 0;
        while i < out.len() {
            for &s in &self.generators {
                let h = self.mul(out[i], s);
                if !seen[h] {
                    seen[h] = true;
                    out.push(h);
                }
            }
            i += 1;
        }
        out
    }

    /// Extends generator images to a homomorphism into `GL_n`, checking
    /// every relation met along the way.
    pub fn representation(&self, images: &[RationalMatrix]) -> Result<Vec<RationalMatrix>> {
        if images.len() != self.generators.len() {
            return Err(GroupAlgError::InvalidModule("one image per generator required".into()));
        }
        let n = images.first().map_or(1, RationalMatrix::rows);
        let mut rho: Vec<Option<RationalMatrix>> = vec![None; self.order()];
        rho[0] = Some(RationalMatrix::identity(n));
        let mut queue = VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            for (&s, img) in self.generators.iter().zip(images) {
                let h = self.mul(g, s);
                let m = rho[g].as_ref().expect("visited").mul(img);
                match &rho[h] {
                    Some(existing) if *existing != m => {
                        return Err(GroupAlgError::InvalidModule(format!("images violate a relation at element {h}")))
                    }
                    Some(_) => {}
                    None => {
                        rho[h] = Some(m);
                        queue.push_back(h);
                    }
                }
            }
        }
        let rho: Vec<RationalMatrix> = rho.into_iter().map(|m| m.expect("generated")).collect();
        // the BFS checks only generator steps; confirm the full table
        for a in 0..self.order() {
            for b in 0..self.order() {
                if rho[a].mul(&rho[b]) != rho[self.mul(a, b)] {
                    return Err(GroupAlgError::InvalidModule(format!("not a homomorphism at ({a},{b})")));
                }
            }
        }
        Ok(rho)
    }

    /// Sign of each element for a permutation group.
    pub fn sign_character(&self) -> Option<Vec<Q>> {
        let perms = self.permutations.as_ref()?;
        Some(
            perms
                .iter()
                .map(|p| {
                    let inv = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
                    if inv % 2 == 0 {
                        q(1)
                    } else {
                        q(-1)
                    }
                })
                .collect(),
        )
    }
}

// -------------------------------------------------------------- algebras

/// A finite-dimensional associative unital algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Algebra {
    dim: usize,
    left: Vec<RationalMatrix>,
    unit: Vec<Q>,
    augmentation: Option<Vec<Q>>,
    pub labels: Vec<String>,
}

impl Algebra {
    /// From structure constants `e_i e_j = Σ_k c[i][j][k] e_k`.
    pub fn from_constants(c: &[Vec<Vec<Q>>], unit: Vec<Q>, augmentation: Option<Vec<Q>>) -> Result<Self> {
        let dim = c.len();
        let left = (0..dim).map(|i| RationalMatrix::from_fn(dim, dim, |k, j| c[i][j][k].clone())).collect();
        Self::from_left_matrices(left, unit, augmentation)
    }

    pub fn from_left_matrices(left: Vec<RationalMatrix>, unit: Vec<Q>, augmentation: Option<Vec<Q>>) -> Result<Self> {
        let dim = left.len();
        let a = Algebra { dim, left, unit, augmentation, labels: (0..dim).map(|i| format!("e{i}")).collect() };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        if self.unit.len() != d || self.left.iter().any(|l| l.shape() != (d, d)) {
            return Err(GroupAlgError::InvalidAlgebra("shape".into()));
        }
        if self.left_mul(&self.unit) != RationalMatrix::identity(d) {
            return Err(GroupAlgError::InvalidAlgebra("unit does not act as the identity on the left".into()));
        }
        for i in 0..d {
            if self.left[i].mul_vec(&self.unit) != unit_vec(d, i) {
                return Err(GroupAlgError::InvalidAlgebra(format!("unit fails on the right of e{i}")));
            }
        }
        for i in 0..d {
            for j in 0..d {
                let lhs = self.left[i].mul(&self.left[j]);
                let rhs = self.left_mul(&self.left[i].column(j));
                if lhs != rhs {
                    return Err(GroupAlgError::InvalidAlgebra(format!("associativity fails for (e{i}, e{j}, ·)")));
                }
            }
        }
        if let Some(eps) = &self.augmentation {
            if eps.len() != d || dot(eps, &self.unit) != Q::one() {
                return Err(GroupAlgError::InvalidAlgebra("augmentation must send 1 to 1".into()));
            }
            for i in 0..d {
                for j in 0..d {
                    if dot(eps, &self.left[i].column(j)) != &eps[i] * &eps[j] {
                        return Err(GroupAlgError::InvalidAlgebra(format!("augmentation not multiplicative at ({i},{j})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group_algebra(g: &FiniteGroup) -> Self {
        let n = g.order();
        let left = (0..n)
            .map(|a| {
                let mut m = RationalMatrix::zeros(n, n);
                for b in 0..n {
                    m.set(g.mul(a, b), b, Q::one());
                }
                m
            })
            .collect();
        let mut a = Self::from_left_matrices(left, unit_vec(n, 0), Some(vec![Q::one(); n])).expect("group algebra");
        a.labels = (0..n).map(|i| format!("g{i}")).collect();
        a
    }

    /// The exterior algebra `Λ[x_0..x_{r-1}]` on the subset basis (ordered by
    /// degree, then lexicographically).
    pub fn exterior(r: usize) -> Self {
        let basis = exterior_basis(r);
        let index: HashMap<&Vec<usize>, usize> = basis.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let d = basis.len();
        let left = basis
            .iter()
            .map(|s| {
                let mut m = RationalMatrix::zeros(d, d);
                for (j, t) in basis.iter().enumerate() {
                    if s.iter().any(|x| t.contains(x)) {
                        continue;
                    }
                    let inversions = s.iter().map(|&a| t.iter().filter(|&&b| b < a).count()).sum::<usize>();
                    let mut u: Vec<usize> = s.iter().chain(t).copied().collect();
                    u.sort_unstable();
                    m.set(index[&u], j, if inversions % 2 == 0 { q(1) } else { q(-1) });
                }
                m
            })
            .collect();
        let mut a = Self::from_left_matrices(left, unit_vec(d, 0), Some(unit_vec(d, 0))).expect("exterior algebra");
        a.labels = basis
            .iter()
            .map(|s| if s.is_empty() { "1".into() } else { s.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join("") })
            .collect();
        a
    }

    /// The field itself.
    pub fn field() -> Self {
        Self::from_left_matrices(vec![RationalMatrix::identity(1)], vec![q(1)], Some(vec![q(1)])).expect("field")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The Jacobson radical, as the kernel of the trace form
    /// `(x, y) ↦ tr(L_x L_y)` (valid in characteristic zero).
    pub fn radical(&self) -> Vec<Vec<Q>> {
        let d = self.dim;
        let nz: Vec<Vec<(usize, usize, &Q)>> = self.left.iter().map(|l| l.nonzeros().collect()).collect();
        let form = RationalMatrix::from_fn(d, d, |i, j| {
            // tr(L_i L_j) = Σ_{k,l} (L_i)_{kl} (L_j)_{lk}
            nz[i].iter().map(|&(k, l, v)| v * self.left[j].get(l, k)).sum()
        });
        linalg::kernel_basis(&form)
    }

    pub fn unit(&self) -> &[Q] {
        &self.unit
    }

    pub fn augmentation(&self) -> Option<&[Q]> {
        self.augmentation.as_deref()
    }

    pub fn left_matrices(&self) -> &[RationalMatrix] {
        &self.left
    }

    /// Matrix of `x ↦ a x`.
    pub fn left_mul(&self, a: &[Q]) -> RationalMatrix {
        combine(&self.left, a, self.dim)
    }

    /// Matrix of `x ↦ x b`.
    pub fn right_mul(&self, b: &[Q]) -> RationalMatrix {
        let cols: Vec<Vec<Q>> = (0..self.dim).map(|i| self.mul(&unit_vec(self.dim, i), b)).collect();
        RationalMatrix::from_columns(self.dim, &cols)
    }

    pub fn mul(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        self.left_mul(a).mul_vec(b)
    }

    /// Structure constant `c_{ij}^k`.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Q {
        self.left[i].get(k, j)
    }
}

/// Subsets of `0..r` ordered by size, then lexicographically.
pub fn exterior_basis(r: usize) -> Vec<Vec<usize>> {
    (0..=r).flat_map(|k| subsets(r, k)).collect()
}

/// The automorphism of `Λ[x_0..x_{r-1}]` induced by a linear map `g` of
/// the degree-one part (minors of `g` in higher degrees).
pub fn exterior_automorphism(r: usize, g: &RationalMatrix) -> RationalMatrix {
    let basis = exterior_basis(r);
    RationalMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        let (t, s) = (&basis[i], &basis[j]);
        if t.len() != s.len() {
            return Q::zero();
        }
        if s.is_empty() {
            return Q::one();
        }
        g.select_rows(t).select_columns(s).det().expect("square minor")
    })
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

fn combine(mats: &[RationalMatrix], coeffs: &[Q], n: usize) -> RationalMatrix {
    let mut out = RationalMatrix::zeros(n, n);
    for (c, m) in coeffs.iter().zip(mats) {
        if !c.is_zero() {
            out = out.add(&m.scale(c));
        }
    }
    out
}

/// `e = (1/|Q|) Σ_q q` in `E[Q]`.
pub fn averaging_idempotent(g: &FiniteGroup) -> Vec<Q> {
    vec![Q::new(1.into(), (g.order() as i64).into()); g.order()]
}

// --------------------------------------------------------------- modules

/// A left module: `actions[i] = ρ(e_i)`. Optional generators are used for
/// presentations (e.g. the standard basis of a free module).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AModule {
    dim: usize,
    actions: Vec<RationalMatrix>,
    generators: Option<Vec<Vec<Q>>>,
}

impl AModule {
    pub fn new(a: &Algebra, dim: usize, actions: Vec<RationalMatrix>) -> Result<Self> {
        let m = AModule { dim, actions, generators: None };
        m.validate(a)?;
        Ok(m)
    }

    /// No axioms are checked; callers replaying stored data run
    /// [`AModule::validate`] themselves.
    pub fn new_unchecked(dim: usize, actions: Vec<RationalMatrix>) -> Self {
        AModule { dim, actions, generators: None }
    }

    pub fn validate(&self, a: &Algebra) -> Result<()> {
        if self.actions.len() != a.dim || self.actions.iter().any(|r| r.shape() != (self.dim, self.dim)) {
            return Err(GroupAlgError::InvalidModule("one dim x dim matrix per algebra basis element".into()));
        }
        if self.act(&a.unit) != RationalMatrix::identity(self.dim) {
            return Err(GroupAlgError::InvalidModule("unit does not act as the identity".into()));
        }
        for i in 0..a.dim {
            for j in 0..a.dim {
                if self.actions[i].mul(&self.actions[j]) != self.act(&a.left[i].column(j)) {
                    return Err(GroupAlgError::InvalidModule(format!("ρ(e{i})ρ(e{j}) ≠ ρ(e{i}e{j})")));
                }
            }
        }
        Ok(())
    }

    /// `A^r` with its standard generators.
    pub fn free(a: &Algebra, r: usize) -> Self {
        let actions = a.left.iter().map(|l| RationalMatrix::block_diag(&vec![l; r])).collect();
        let dim = a.dim * r;
        let gens = (0..r).map(|g| free_unit(a, r, g)).collect();
        AModule { dim, actions, generators: Some(gens) }
    }

    pub fn regular(a: &Algebra) -> Self {
        Self::free(a, 1)
    }

    /// The one-dimensional module through the augmentation.
    pub fn trivial(a: &Algebra) -> Result<Self> {
        let eps = a.augmentation.as_ref().ok_or_else(|| GroupAlgError::InvalidAlgebra("no augmentation".into()))?;
        Ok(AModule { dim: 1, actions: eps.iter().map(|e| RationalMatrix::scalar(1, e)).collect(), generators: None })
    }

    /// `E[Q]`-module from a representation of `Q`.
    pub fn from_group_rep(rho: Vec<RationalMatrix>) -> Self {
        let dim = rho.first().map_or(0, RationalMatrix::rows);
        AModule { dim, actions: rho, generators: None }
    }

    pub fn zero(a: &Algebra) -> Self {
        AModule { dim: 0, actions: vec![RationalMatrix::zeros(0, 0); a.dim], generators: Some(vec![]) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn actions(&self) -> &[RationalMatrix] {
        &self.actions
    }

    pub fn act(&self, a: &[Q]) -> RationalMatrix {
        combine(&self.actions, a, self.dim)
    }

    pub fn with_generators(mut self, gens: Vec<Vec<Q>>) -> Self {
        self.generators = Some(gens);
        self
    }

    pub fn direct_sum(mods: &[&AModule]) -> Self {
        let n = mods.first().map_or(0, |m| m.actions.len());
        let dim = mods.iter().map(|m| m.dim).sum();
        let actions = (0..n)
            .map(|i| RationalMatrix::block_diag(&mods.iter().map(|m| &m.actions[i]).collect::<Vec<_>>()))
            .collect();
        let generators = if mods.iter().all(|m| m.generators.is_some()) {
            let mut gens = Vec::new();
            let mut off = 0;
            for m in mods {
                for g in m.generators.as_ref().expect("checked") {
                    let mut v = vec![Q::zero(); dim];
                    v[off..off + m.dim].clone_from_slice(g);
                    gens.push(v);
                }
                off += m.dim;
            }
            Some(gens)
        } else {
            None
        };
        AModule { dim, actions, generators }
    }

    /// The submodule generated by `vectors`.
    pub fn generated_span(&self, vectors: &[Vec<Q>]) -> IncrementalSpan {
        let mut span = IncrementalSpan::new(self.dim);
        for v in vectors {
            self.absorb(&mut span, v);
        }
        span
    }

    fn absorb(&self, span: &mut IncrementalSpan, v: &[Q]) {
        if span.contains(v) {
            return;
        }
        for r in &self.actions {
            span.insert(&r.mul_vec(v));
        }
    }

    /// Greedy generators: candidates are taken in order and kept when not
    /// already in the generated submodule.
    pub fn greedy_generators(&self, candidates: &[Vec<Q>]) -> Vec<Vec<Q>> {
        self.greedy_generators_mod(candidates, IncrementalSpan::new(self.dim))
    }

    /// Greedy generators modulo a starting subspace. When `span` starts as
    /// `rad(A)·N` for the submodule `N` spanned by the candidates, Nakayama's
    /// lemma guarantees the result still generates `N`.
    pub fn greedy_generators_mod(&self, candidates: &[Vec<Q>], mut span: IncrementalSpan) -> Vec<Vec<Q>> {
        let mut gens = Vec::new();
        for c in candidates {
            if span.is_full() {
                break;
            }
            if !span.contains(c) {
                gens.push(c.clone());
                self.absorb(&mut span, c);
            }
        }
        gens
    }

    /// Generators of the submodule `N` spanned by `candidates` (a basis),
    /// modulo the submodule `start ⊆ N`. Each step tries a seeded generic
    /// combination of the candidates, which over a semisimple top generates
    /// as much as any single element can; if it adds nothing, the first
    /// uncovered candidate is used instead.
    pub fn generic_generators(&self, candidates: &[Vec<Q>], mut span: IncrementalSpan, target: usize) -> Vec<Vec<Q>> {
        use rand::SeedableRng;
        let mut gens = Vec::new();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed ^ target as u64);
        while span.dim() < target {
            let ks = generic_coefficients(&mut rng, candidates.len());
            let mut v = combine_vectors(candidates, &ks, self.dim);
            if span.contains(&v) {
                v = candidates.iter().find(|c| !span.contains(c)).expect("span below target").clone();
            }
            self.absorb(&mut span, &v);
            gens.push(v);
        }
        gens
    }

    /// Submodule on a basis of an invariant subspace.
    pub fn submodule(&self, basis: &[Vec<Q>]) -> Result<AModule> {
        let b = RationalMatrix::from_columns(self.dim, basis);
        let mut actions = Vec::new();
        for r in &self.actions {
            let img = r.mul(&b);
            let c = linalg::solve(&b, &img)
                .map_err(|e| GroupAlgError::InvalidModule(e.to_string()))?
                .ok_or_else(|| GroupAlgError::InvalidModule("subspace is not a submodule".into()))?;
            actions.push(c);
        }
        Ok(AModule { dim: basis.len(), actions, generators: None })
    }

    /// Quotient by an invariant subspace; returns the module and the projection.
    pub fn quotient(&self, sub: &[Vec<Q>]) -> Result<(AModule, RationalMatrix)> {
        self.quotient_split(sub).map(|(m, p, _)| (m, p))
    }

    /// Quotient with both the projection and a linear section of it.
    pub fn quotient_split(&self, sub: &[Vec<Q>]) -> Result<(AModule, RationalMatrix, RationalMatrix)> {
        let qt = linalg::quotient(self.dim, sub);
        let mut actions = Vec::new();
        for r in &self.actions {
            for v in sub {
                if !qt.projection.mul_vec(&r.mul_vec(v)).iter().all(Zero::is_zero) {
                    return Err(GroupAlgError::InvalidModule("subspace is not a submodule".into()));
                }
            }
            actions.push(qt.projection.mul(r).mul(&qt.section));
        }
        let generators =
            self.generators.as_ref().map(|gs| gs.iter().map(|g| qt.projection.mul_vec(g)).collect());
        Ok((AModule { dim: qt.projection.rows(), actions, generators }, qt.projection, qt.section))
    }

    /// Is `f: self → other` `A`-linear?
    pub fn is_hom_to(&self, other: &AModule, f: &RationalMatrix) -> bool {
        f.shape() == (other.dim, self.dim)
            && self.actions.iter().zip(&other.actions).all(|(a, b)| f.mul(a) == b.mul(f))
    }

    pub fn presentation(&self) -> Presentation {
        let gens = match &self.generators {
            Some(g) => g.clone(),
            None => {
                let std: Vec<Vec<Q>> = (0..self.dim).map(|i| unit_vec(self.dim, i)).collect();
                self.greedy_generators(&std)
            }
        };
        Presentation::new(self, gens)
    }
}

fn free_unit(a: &Algebra, r: usize, g: usize) -> Vec<Q> {
    slot(&a.unit, r, g)
}

/// The `g`-th standard generator of `A^r`.
fn slot(unit: &[Q], r: usize, g: usize) -> Vec<Q> {
    let ad = unit.len();
    let mut v = vec![Q::zero(); ad * r];
    v[g * ad..(g + 1) * ad].clone_from_slice(unit);
    v
}

/// `M` as a quotient of `A^r`: generators `m_g`, the surjection
/// `π(e_i in slot g) = ρ(e_i) m_g`, a linear section of `π`, and a basis of
/// the relation module `ker π`.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub generators: Vec<Vec<Q>>,
    pub surjection: RationalMatrix,
    pub section: RationalMatrix,
    pub relations: Vec<Vec<Q>>,
}

impl Presentation {
    fn new(m: &AModule, generators: Vec<Vec<Q>>) -> Self {
        let ad = m.actions.len();
        let r = generators.len();
        let mut cols = Vec::with_capacity(r * ad);
        for g in &generators {
            for act in &m.actions {
                cols.push(act.mul_vec(g));
            }
        }
        let surjection = RationalMatrix::from_columns(m.dim, &cols);
        let free = m.generators.as_ref().is_some_and(|_| surjection == RationalMatrix::identity(m.dim));
        let (section, relations) = if free {
            (RationalMatrix::identity(m.dim), vec![])
        } else {
            let sec = linalg::solve(&surjection, &RationalMatrix::identity(m.dim))
                .expect("shape")
                .expect("generators span the module");
            (sec, linalg::kernel_basis(&surjection))
        };
        Presentation { generators, surjection, section, relations }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Matrix (`r·dim Y` columns) of the constraint `Σ_{g,i} k_{g,i} ρ_Y(e_i) y_g = 0`
    /// for all relations `k`, acting on the stacked images `y = (y_g)`.
    pub fn relation_constraints(&self, y: &AModule) -> RationalMatrix {
        let ad = y.actions.len();
        let yd = y.dim;
        let r = self.rank();
        let mut m = RationalMatrix::zeros(self.relations.len() * yd, r * yd);
        for (t, k) in self.relations.iter().enumerate() {
            for g in 0..r {
                let blk = combine(&y.actions, &k[g * ad..(g + 1) * ad], yd);
                m.set_block(t * yd, g * yd, &blk);
            }
        }
        m
    }

    /// Basis (as stacked generator images) of `Hom_A(M, Y)`.
    pub fn hom_basis(&self, y: &AModule) -> Vec<Vec<Q>> {
        let r = self.rank();
        if self.relations.is_empty() {
            return (0..r * y.dim).map(|i| unit_vec(r * y.dim, i)).collect();
        }
        linalg::kernel_basis(&self.relation_constraints(y))
    }

    /// The homomorphism `M → Y` with generator images `y`.
    pub fn hom_from_images(&self, y: &AModule, images: &[Q]) -> RationalMatrix {
        let ad = y.actions.len();
        let r = self.rank();
        let mut psi_cols = Vec::with_capacity(r * ad);
        for g in 0..r {
            let yg = &images[g * y.dim..(g + 1) * y.dim];
            for act in &y.actions {
                psi_cols.push(act.mul_vec(yg));
            }
        }
        RationalMatrix::from_columns(y.dim, &psi_cols).mul(&self.section)
    }

    /// Generator images of a homomorphism `f: M → Y`.
    pub fn images_of(&self, f: &RationalMatrix) -> Vec<Q> {
        self.generators.iter().flat_map(|g| f.mul_vec(g)).collect()
    }
}

/// `Hom_A(C_•, N)` for a complex of modules, in the coordinates of the
/// generator-image bases. `modules[k]` sits in degree `c.lo() + k`.
pub fn hom_complex(c: &ChainComplex, modules: &[AModule], n: &AModule) -> Result<ChainComplex> {
    let pres: Vec<Presentation> = modules.iter().map(AModule::presentation).collect();
    let bases: Vec<Vec<Vec<Q>>> = pres.iter().map(|p| p.hom_basis(n)).collect();
    let lo = c.lo();
    let len = modules.len();
    let mut diffs = Vec::new();
    // cochain degree -k holds Hom(C_k); δ: Hom(C_{k-1}) → Hom(C_k) is f ↦ f∘d_k
    for idx in (1..len).rev() {
        let deg = lo + idx as i64;
        let d = c.d(deg);
        let (src_p, src_b) = (&pres[idx - 1], &bases[idx - 1]);
        let (tgt_p, tgt_b) = (&pres[idx], &bases[idx]);
        let tgt_dim = tgt_p.rank() * n.dim;
        let mut cols = Vec::new();
        for y in src_b {
            let f = src_p.hom_from_images(n, y);
            let composite = f.mul(&d);
            cols.push(tgt_p.images_of(&composite));
        }
        let image = RationalMatrix::from_columns(tgt_dim, &cols);
        let coords = if tgt_p.relations.is_empty() {
            image
        } else {
            let b = RationalMatrix::from_columns(tgt_dim, tgt_b);
            linalg::solve(&b, &image)
                .expect("shape")
                .ok_or_else(|| GroupAlgError::Lift(format!("d_{deg} is not A-linear")))?
        };
        diffs.push(coords);
    }
    let dims: Vec<usize> = bases.iter().rev().map(Vec::len).collect();
    let cc = ChainComplex::new(-(lo + len as i64 - 1), dims, diffs).map_err(|e| GroupAlgError::Lift(e.to_string()))?;
    Ok(cc.as_cochain())
}

/// `{m : ρ(q) m = m for all q}` for a representation given per group element.
pub fn invariants(rho: &[RationalMatrix]) -> Vec<Vec<Q>> {
    let Some(first) = rho.first() else { return vec![] };
    let n = first.rows();
    let id = RationalMatrix::identity(n);
    let blocks: Vec<RationalMatrix> = rho.iter().map(|r| r.sub(&id)).collect();
    let refs: Vec<&RationalMatrix> = blocks.iter().collect();
    linalg::kernel_basis(&RationalMatrix::vstack(&refs))
}

// ------------------------------------------------------- free resolutions

/// A free resolution `A^{r_n} → … → A^{r_0} → M`.
#[derive(Debug, Clone)]
pub struct FreeResolution {
    pub algebra_dim: usize,
    pub unit: Vec<Q>,
    pub ranks: Vec<usize>,
    /// `diffs[n-1] = d_n : A^{r_n} → A^{r_{n-1}}`.
    pub diffs: Vec<RationalMatrix>,
    pub augmentation: RationalMatrix,
    /// Whether a zero kernel was reached below the requested length.
    pub terminated: bool,
}

impl FreeResolution {
    /// Dimension of the kernel of the last map (the top differential, or the
    /// augmentation). Computed on demand since it is rarely needed.
    pub fn top_kernel_dim(&self) -> usize {
        let d = self.diffs.last().unwrap_or(&self.augmentation);
        d.cols() - d.rank()
    }

    pub fn length(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    pub fn complex(&self) -> ChainComplex {
        let dims = self.ranks.iter().map(|r| r * self.algebra_dim).collect();
        ChainComplex::new(0, dims, self.diffs.clone()).expect("resolution differentials compose to zero")
    }

    /// The resolution with `M` attached in degree `-1`.
    pub fn augmented_complex(&self) -> ChainComplex {
        let mut dims = vec![self.augmentation.rows()];
        dims.extend(self.ranks.iter().map(|r| r * self.algebra_dim));
        let mut diffs = vec![self.augmentation.clone()];
        diffs.extend(self.diffs.iter().cloned());
        ChainComplex::new(-1, dims, diffs).expect("augmented resolution")
    }

    pub fn modules(&self, a: &Algebra) -> Vec<AModule> {
        self.ranks.iter().map(|&r| AModule::free(a, r)).collect()
    }
}

fn cover_matrix(ambient: &AModule, gens: &[Vec<Q>]) -> RationalMatrix {
    let mut cols = Vec::with_capacity(gens.len() * ambient.actions.len());
    for g in gens {
        for act in &ambient.actions {
            cols.push(act.mul_vec(g));
        }
    }
    RationalMatrix::from_columns(ambient.dim, &cols)
}

fn generic_coefficients(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<i64> {
    use rand::Rng;
    (0..n).map(|_| rng.gen_range(0..=1)).collect()
}

fn combine_vectors(vs: &[Vec<Q>], ks: &[i64], dim: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); dim];
    for (c, &k) in vs.iter().zip(ks) {
        if k != 0 {
            let kq = Q::from_integer(k.into());
            for (vi, ci) in v.iter_mut().zip(c) {
                if !ci.is_zero() {
                    *vi += ci * &kq;
                }
            }
        }
    }
    v
}

/// Generator selection mod `p`: returns exact generators, or `None` if a
/// denominator vanishes mod `p`.
fn modular_generators(radical: &[Vec<Q>], ambient: &AModule, candidates: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    use rand::SeedableRng;
    let acts: Vec<linalg::ModMatrix> = ambient.actions.iter().map(linalg::matrix_mod_p).collect::<Option<_>>()?;
    let rad: Vec<linalg::ModMatrix> =
        radical.iter().map(|j| linalg::matrix_mod_p(&ambient.act(j))).collect::<Option<_>>()?;
    let cands: Vec<Vec<u64>> = candidates.iter().map(|c| linalg::vector_mod_p(c)).collect::<Option<_>>()?;
    let mut span = linalg::ModularSpan::new(ambient.dim);
    for j in &rad {
        for c in &cands {
            span.insert(&j.mul_vec(c));
        }
    }
    // a sparse complement of rad(A)·N in N; generators are mixed from it only
    let mut probe = span.clone();
    let tops: Vec<usize> = (0..cands.len()).filter(|&i| probe.insert(&cands[i])).collect();
    let top_vecs: Vec<Vec<Q>> = tops.iter().map(|&i| candidates[i].clone()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed ^ candidates.len() as u64);
    let mut gens = Vec::new();
    while span.dim() < candidates.len() {
        let ks = generic_coefficients(&mut rng, tops.len());
        let mut v = combine_vectors(&top_vecs, &ks, ambient.dim);
        let mut vm = linalg::vector_mod_p(&v)?;
        if span.contains(&vm) {
            let i = tops.iter().copied().find(|&i| !span.contains(&cands[i]))?;
            v = candidates[i].clone();
            vm = cands[i].clone();
        }
        for act in &acts {
            span.insert(&act.mul_vec(&vm));
        }
        gens.push(v);
    }
    Some(gens)
}

fn free_cover(a: &Algebra, radical: &[Vec<Q>], ambient: &AModule, candidates: &[Vec<Q>]) -> (usize, RationalMatrix) {
    let _ = a;
    // rank mod p never exceeds the rational rank and the image lies in N,
    // so reaching dim N mod p already certifies surjectivity
    if let Some(gens) = modular_generators(radical, ambient, candidates) {
        return (gens.len(), cover_matrix(ambient, &gens));
    }
    // exact fallback
    let mut start = IncrementalSpan::new(ambient.dim);
    for j in radical {
        let rj = ambient.act(j);
        for c in candidates {
            start.insert(&rj.mul_vec(c));
        }
    }
    let mut probe = start.clone();
    let tops: Vec<Vec<Q>> = candidates.iter().filter(|c| probe.insert(c)).cloned().collect();
    let gens = ambient.generic_generators(&tops, start, candidates.len());
    (gens.len(), cover_matrix(ambient, &gens))
}

/// Free resolution of `M` through degree `length`, choosing generators
/// greedily from kernel bases (scanned in the given order).
pub fn free_resolution_with(a: &Algebra, m: &AModule, length: usize, order: PivotOrder) -> FreeResolution {
    let arrange = |mut v: Vec<Vec<Q>>| {
        if order == PivotOrder::Reverse {
            v.reverse();
        }
        v
    };
    let std: Vec<Vec<Q>> = arrange((0..m.dim).map(|i| unit_vec(m.dim, i)).collect());
    let radical = a.radical();
    let (r0, aug) = free_cover(a, &radical, m, &std);
    let mut ranks = vec![r0];
    let mut diffs = Vec::new();
    let mut current = aug.clone();
    let mut terminated = false;
    for _ in 0..length {
        let kernel = linalg::rank_kernel_image_with(&current, order).kernel_basis;
        if kernel.is_empty() {
            terminated = true;
            break;
        }
        let ambient = AModule::free(a, *ranks.last().expect("nonempty"));
        let (r, d) = free_cover(a, &radical, &ambient, &arrange(kernel));
        ranks.push(r);
        diffs.push(d.clone());
        current = d;
    }
    FreeResolution { algebra_dim: a.dim, unit: a.unit.clone(), ranks, diffs, augmentation: aug, terminated }
}

pub fn free_resolution(a: &Algebra, m: &AModule, length: usize) -> FreeResolution {
    free_resolution_with(a, m, length, PivotOrder::Forward)
}

/// `Hom_A(A^{r_{n}}, N) → Hom_A(A^{r_{n+1}}, N)` in generator-image
/// coordinates: block `(g, h) = Σ_i d(e_g)_{h,i} ρ_N(e_i)`.
fn free_dual(d: &RationalMatrix, unit: &[Q], n: &AModule) -> RationalMatrix {
    let ad = unit.len();
    let (src_r, tgt_r) = (d.cols() / ad, d.rows() / ad);
    let nd = n.dim;
    let mut out = RationalMatrix::zeros(src_r * nd, tgt_r * nd);
    for g in 0..src_r {
        let col = d.mul_vec(&slot(unit, src_r, g));
        for h in 0..tgt_r {
            let blk = combine(&n.actions, &col[h * ad..(h + 1) * ad], nd);
            out.set_block(g * nd, h * nd, &blk);
        }
    }
    out
}

/// The cochain complex `Hom_A(P_•, N)` of a free resolution, degrees `0..=L`.
pub fn free_hom_complex(res: &FreeResolution, n: &AModule) -> ChainComplex {
    let dims: Vec<usize> = res.ranks.iter().rev().map(|r| r * n.dim).collect();
    let diffs: Vec<RationalMatrix> = res.diffs.iter().rev().map(|d| free_dual(d, &res.unit, n)).collect();
    let lo = -(res.ranks.len() as i64 - 1);
    ChainComplex::new(lo, dims, diffs).expect("dual of a complex").as_cochain()
}

/// `dim Ext^n_A(M, N)` for `n = 0..=n_max`.
pub fn ext_dims(a: &Algebra, m: &AModule, n: &AModule, n_max: usize) -> Vec<usize> {
    ext_dims_with(a, m, n, n_max, PivotOrder::Forward)
}

pub fn ext_dims_with(a: &Algebra, m: &AModule, n: &AModule, n_max: usize, order: PivotOrder) -> Vec<usize> {
    let res = free_resolution_with(a, m, n_max + 1, order);
    let hom = free_hom_complex(&res, n);
    (0..=n_max as i64).map(|k| hom.cohomology(k).map(|h| h.dim).unwrap_or(0)).collect()
}

// -------------------------------------------------- two-periodic resolution

#[derive(Debug, Clone)]
pub struct TwoPeriodic {
    /// `P_k = E[Q]` for `k = 0..=n_terms`; `d_k = (1-e)·` for odd `k`, `e·` for even `k`.
    pub complex: ChainComplex,
    pub augmentation: RationalMatrix,
    pub idempotent: Vec<Q>,
}

impl TwoPeriodic {
    pub fn augmented(&self) -> ChainComplex {
        let mut dims = vec![1];
        dims.extend_from_slice(self.complex.dims());
        let mut diffs = vec![self.augmentation.clone()];
        diffs.extend((1..=self.complex.hi()).map(|k| self.complex.d(k)));
        ChainComplex::new(-1, dims, diffs).expect("augmented")
    }
}

pub fn two_periodic_resolution(g: &FiniteGroup, n_terms: usize) -> TwoPeriodic {
    let a = Algebra::group_algebra(g);
    let e = averaging_idempotent(g);
    let one_minus_e: Vec<Q> = a.unit.iter().zip(&e).map(|(u, x)| u - x).collect();
    let (le, lf) = (a.left_mul(&e), a.left_mul(&one_minus_e));
    let n = g.order();
    let diffs = (1..=n_terms).map(|k| if k % 2 == 1 { lf.clone() } else { le.clone() }).collect();
    let complex = ChainComplex::new(0, vec![n; n_terms + 1], diffs).expect("(1-e)e = 0");
    let augmentation = RationalMatrix::from_fn(1, n, |_, _| Q::one());
    TwoPeriodic { complex, augmentation, idempotent: e }
}

// -------------------------------------------------------- crossed products

/// `Q` acting on `A` by algebra automorphisms (`maps[q]` is the matrix of `σ_q`).
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub group: FiniteGroup,
    pub maps: Vec<RationalMatrix>,
}

impl GroupAction {
    pub fn new(a: &Algebra, group: FiniteGroup, maps: Vec<RationalMatrix>) -> Result<Self> {
        if maps.len() != group.order() || maps.iter().any(|m| m.shape() != (a.dim, a.dim)) {
            return Err(GroupAlgError::InvalidAlgebra("one dim A x dim A matrix per group element".into()));
        }
        for (qi, s) in maps.iter().enumerate() {
            if s.mul_vec(&a.unit) != a.unit {
                return Err(GroupAlgError::InvalidAlgebra(format!("σ_{qi} does not fix the unit")));
            }
            for i in 0..a.dim {
                for j in 0..a.dim {
                    let lhs = s.mul_vec(&a.left[i].column(j));
                    let rhs = a.mul(&s.column(i), &s.column(j));
                    if lhs != rhs {
                        return Err(GroupAlgError::InvalidAlgebra(format!("σ_{qi} not multiplicative at ({i},{j})")));
                    }
                }
            }
            if let Some(eps) = &a.augmentation {
                if (0..a.dim).any(|i| dot(eps, &s.column(i)) != eps[i]) {
                    return Err(GroupAlgError::InvalidAlgebra(format!("σ_{qi} does not preserve the augmentation")));
                }
            }
        }
        for x in 0..group.order() {
            for y in 0..group.order() {
                if maps[x].mul(&maps[y]) != maps[group.mul(x, y)] {
                    return Err(GroupAlgError::InvalidAlgebra(format!("not an action at ({x},{y})")));
                }
            }
        }
        Ok(GroupAction { group, maps })
    }

    pub fn trivial(a: &Algebra, group: FiniteGroup) -> Self {
        let n = group.order();
        GroupAction { group, maps: vec![RationalMatrix::identity(a.dim); n] }
    }

    /// Action on `Λ[x_0..x_{r-1}]` through a representation on the generators.
    pub fn on_exterior(r: usize, group: FiniteGroup, rep: &[RationalMatrix]) -> Result<Self> {
        let a = Algebra::exterior(r);
        let maps = rep.iter().map(|g| exterior_automorphism(r, g)).collect();
        Self::new(&a, group, maps)
    }
}

/// Values `t(q, q')` in `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleTable {
    pub values: Vec<Vec<Vec<Q>>>,
}

impl CocycleTable {
    pub fn trivial(a: &Algebra, g: &FiniteGroup) -> Self {
        CocycleTable { values: vec![vec![a.unit.clone(); g.order()]; g.order()] }
    }

    /// Normalization, the cocycle identity
    /// `σ_q(t(q',q'')) t(q,q'q'') = t(q,q') t(qq',q'')` and the twisted action
    /// identity `σ_q σ_q'(a) t(q,q') = t(q,q') σ_{qq'}(a)`; the first failing
    /// triple is reported.
    pub fn validate(&self, a: &Algebra, act: &GroupAction) -> Result<()> {
        let g = &act.group;
        let n = g.order();
        let t = &self.values;
        for x in 0..n {
            if t[0][x] != a.unit || t[x][0] != a.unit {
                return Err(GroupAlgError::Cocycle((0, x, 0)));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let lhs = a.mul(&act.maps[x].mul_vec(&t[y][z]), &t[x][g.mul(y, z)]);
                    let rhs = a.mul(&t[x][y], &t[g.mul(x, y)][z]);
                    if lhs != rhs {
                        return Err(GroupAlgError::Cocycle((x, y, z)));
                    }
                }
                for i in 0..a.dim {
                    let lhs = a.mul(&act.maps[x].mul(&act.maps[y]).column(i), &t[x][y]);
                    let rhs = a.mul(&t[x][y], &act.maps[g.mul(x, y)].column(i));
                    if lhs != rhs {
                        return Err(GroupAlgError::Cocycle((x, y, i)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `A ⋊_t Q` on the basis `e_i # q` (index `q * dim A + i`).
#[derive(Debug, Clone)]
pub struct CrossedProduct {
    pub algebra: Algebra,
    pub base_dim: usize,
    /// Degree `q` of each basis element (the strong `Q`-grading).
    pub grading: Vec<usize>,
    pub action: GroupAction,
}

pub fn crossed_product(a: &Algebra, act: &GroupAction, cocycle: Option<&CocycleTable>) -> Result<CrossedProduct> {
    let trivial = CocycleTable::trivial(a, &act.group);
    let t = cocycle.unwrap_or(&trivial);
    t.validate(a, act)?;
    let g = &act.group;
    let (n, ad) = (g.order(), a.dim);
    let dim = n * ad;
    let mut left = Vec::with_capacity(dim);
    for x in 0..n {
        for i in 0..ad {
            let mut m = RationalMatrix::zeros(dim, dim);
            for y in 0..n {
                let ltx = a.right_mul(&t.values[x][y]);
                for j in 0..ad {
                    // e_i σ_x(e_j) t(x, y) # xy
                    let prod = ltx.mul_vec(&a.mul(&unit_vec(ad, i), &act.maps[x].column(j)));
                    let z = g.mul(x, y);
                    for (k, v) in prod.iter().enumerate() {
                        if !v.is_zero() {
                            m.set(z * ad + k, y * ad + j, v.clone());
                        }
                    }
                }
            }
            left.push(m);
        }
    }
    let mut unit = vec![Q::zero(); dim];
    unit[..ad].clone_from_slice(&a.unit);
    let augmentation = a.augmentation.as_ref().map(|eps| (0..n).flat_map(|_| eps.iter().cloned()).collect());
    let mut algebra = Algebra { dim, left, unit, augmentation, labels: vec![] };
    check_associative(&algebra)?;
    // a twisting cocycle need not be compatible with the augmentation
    if algebra.validate().is_err() {
        algebra.augmentation = None;
    }
    algebra.validate().map_err(|e| match e {
        GroupAlgError::InvalidAlgebra(s) => GroupAlgError::InvalidAlgebra(format!("crossed product: {s}")),
        other => other,
    })?;
    let labels = (0..n).flat_map(|x| a.labels.iter().map(move |l| format!("{l}#q{x}"))).collect();
    let algebra = Algebra { labels, ..algebra };
    Ok(CrossedProduct { algebra, base_dim: ad, grading: (0..dim).map(|i| i / ad).collect(), action: act.clone() })
}

fn check_associative(a: &Algebra) -> Result<()> {
    let d = a.dim;
    for i in 0..d {
        for j in 0..d {
            let lhs = a.left[i].mul(&a.left[j]);
            let rhs = a.left_mul(&a.left[i].column(j));
            if lhs != rhs {
                let k = (0..d).find(|&k| lhs.column(k) != rhs.column(k)).unwrap_or(0);
                return Err(GroupAlgError::NotAssociative((i, j, k)));
            }
        }
    }
    Ok(())
}

impl CrossedProduct {
    /// The `A⋊Q`-module with `ρ(a # q) = ρ_A(a) ρ_Q(q)`; requires
    /// `ρ_Q(q) ρ_A(a) ρ_Q(q)^{-1} = ρ_A(σ_q a)`.
    pub fn module(&self, rho_a: &AModule, rho_q: &[RationalMatrix]) -> Result<AModule> {
        let g = &self.action.group;
        if rho_q.len() != g.order() {
            return Err(GroupAlgError::InvalidModule("one matrix per group element".into()));
        }
        let actions: Vec<RationalMatrix> =
            (0..self.algebra.dim).map(|idx| rho_a.actions[idx % self.base_dim].mul(&rho_q[idx / self.base_dim])).collect();
        AModule::new(&self.algebra, rho_a.dim, actions)
    }

    /// Checks the strong grading: `B_q B_{q'} = B_{qq'}` as spans.
    pub fn strongly_graded(&self) -> bool {
        let g = &self.action.group;
        let ad = self.base_dim;
        let dim = self.algebra.dim;
        (0..g.order()).all(|x| {
            (0..g.order()).all(|y| {
                let mut vecs = Vec::new();
                for i in 0..ad {
                    for j in 0..ad {
                        vecs.push(self.algebra.mul(&unit_vec(dim, x * ad + i), &unit_vec(dim, y * ad + j)));
                    }
                }
                let z = g.mul(x, y);
                let inside = vecs.iter().all(|v| v.iter().enumerate().all(|(k, c)| c.is_zero() || k / ad == z));
                inside && linalg::span_basis(dim, &vecs).len() == ad
            })
        })
    }
}

// ---------------------------------------------- Q-action on Ext and compare

/// Semilinear lifts `φ_q : P_n → P_n` (`φ_q(a x) = σ_q(a) φ_q(x)`) of the
/// action `τ_q` on the resolved module.
fn semilinear_lifts(
    a: &Algebra,
    act: &GroupAction,
    res: &FreeResolution,
    tau: &[RationalMatrix],
) -> Result<Vec<Vec<RationalMatrix>>> {
    let ad = a.dim;
    let free_left = |r: usize, x: &[Q]| RationalMatrix::block_diag(&vec![&a.left_mul(x); r]);
    let mut out = Vec::new();
    for (qi, sigma) in act.maps.iter().enumerate() {
        let mut per_degree: Vec<RationalMatrix> = Vec::new();
        for n in 0..res.ranks.len() {
            let r = res.ranks[n];
            let dim = r * ad;
            let (lhs, targets): (&RationalMatrix, Vec<Vec<Q>>) = if n == 0 {
                let t = (0..r).map(|g| tau[qi].mul_vec(&res.augmentation.mul_vec(&slot(&a.unit, r, g)))).collect();
                (&res.augmentation, t)
            } else {
                let d = &res.diffs[n - 1];
                let prev = &per_degree[n - 1];
                let t = (0..r).map(|g| prev.mul_vec(&d.mul_vec(&slot(&a.unit, r, g)))).collect();
                (d, t)
            };
            let rhs = RationalMatrix::from_columns(lhs.rows(), &targets);
            let y = linalg::solve(lhs, &rhs)
                .expect("shape")
                .ok_or_else(|| GroupAlgError::Lift(format!("no lift of σ_{qi} in degree {n}")))?;
            let mut phi = RationalMatrix::zeros(dim, dim);
            for g in 0..r {
                let yg = y.column(g);
                for i in 0..ad {
                    let col = free_left(r, &sigma.column(i)).mul_vec(&yg);
                    for (row, v) in col.iter().enumerate() {
                        if !v.is_zero() {
                            phi.set(row, g * ad + i, v.clone());
                        }
                    }
                }
            }
            if n > 0 && res.diffs[n - 1].mul(&phi) != per_degree[n - 1].mul(&res.diffs[n - 1]) {
                return Err(GroupAlgError::Lift(format!("lift of σ_{qi} does not commute with d_{n}")));
            }
            per_degree.push(phi);
        }
        out.push(per_degree);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossedExtReport {
    /// `dim Ext^n_{A⋊Q}(E, M)`.
    pub crossed: Vec<usize>,
    /// `dim Ext^n_A(E, M)`.
    pub base: Vec<usize>,
    /// `dim (Ext^n_A(E, M))^Q`.
    pub invariant: Vec<usize>,
    pub equal: bool,
}

/// Compares `Ext_{A⋊Q}(E, M)` with the `Q`-invariants of `Ext_A(E, M)`, the
/// latter computed from semilinear lifts of `Q` through a free resolution.
pub fn crossed_ext_compare(a: &Algebra, act: &GroupAction, m_a: &AModule, m_q: &[RationalMatrix], n_max: usize) -> Result<CrossedExtReport> {
    let cp = crossed_product(a, act, None)?;
    let m_b = cp.module(m_a, m_q)?;
    let e_b = AModule::trivial(&cp.algebra)?;
    let crossed = ext_dims(&cp.algebra, &e_b, &m_b, n_max);

    let e_a = AModule::trivial(a)?;
    let res = free_resolution(a, &e_a, n_max + 1);
    let g = &act.group;
    let tau = vec![RationalMatrix::identity(1); g.order()];
    let lifts = semilinear_lifts(a, act, &res, &tau)?;
    let hom = free_hom_complex(&res, m_a);
    let ad = a.dim;
    let md = m_a.dim;
    let mut base = Vec::new();
    let mut invariant = Vec::new();
    for n in 0..=n_max {
        if n >= res.ranks.len() {
            base.push(0);
            invariant.push(0);
            continue;
        }
        let r = res.ranks[n];
        let dim = r * md;
        // (q·f)(e_g) = ρ_M(q) f(φ_{q^{-1}}(e_g)) on generator images
        let mut avg = RationalMatrix::zeros(dim, dim);
        for x in 0..g.order() {
            let phi = &lifts[g.inv(x)][n];
            let mut t = RationalMatrix::zeros(dim, dim);
            for gen in 0..r {
                let w = phi.mul_vec(&slot(&a.unit, r, gen));
                for h in 0..r {
                    let blk = m_q[x].mul(&combine(m_a.actions(), &w[h * ad..(h + 1) * ad], md));
                    t.set_block(gen * md, h * md, &blk);
                }
            }
            avg = avg.add(&t);
        }
        let avg = avg.scale(&Q::new(1.into(), (g.order() as i64).into()));
        let deg = n as i64;
        let delta_out = hom.d(-deg); // Hom(P_n) → Hom(P_{n+1})
        let delta_in = hom.d(-deg + 1); // Hom(P_{n-1}) → Hom(P_n)
        let z = if delta_out.rows() == 0 { identity_basis(dim) } else { linalg::kernel_basis(&delta_out) };
        let b: Vec<Vec<Q>> = if delta_in.cols() == 0 { vec![] } else { linalg::span_basis(dim, &delta_in.columns()) };
        base.push(z.len() - b.len());
        let mut span = IncrementalSpan::new(dim);
        for v in &b {
            span.insert(v);
        }
        let b_dim = span.dim();
        for v in &z {
            span.insert(&avg.mul_vec(v));
        }
        invariant.push(span.dim() - b_dim);
    }
    let equal = crossed == invariant;
    Ok(CrossedExtReport { crossed, base, invariant, equal })
}

fn identity_basis(n: usize) -> Vec<Vec<Q>> {
    (0..n).map(|i| unit_vec(n, i)).collect()
}

// ------------------------------------------------------------ hopf untwist

#[derive(Debug, Clone)]
pub struct HopfUntwist {
    /// `g ⊗ m ↦ g ⊗ g m` on `E[Q] ⊗ M` (index `g * dim M + i`).
    pub map: RationalMatrix,
    /// `g ⊗ m ↦ g ⊗ g^{-1} m`.
    pub inverse: RationalMatrix,
    /// `map ∘ (L_h ⊗ 1) = (L_h ⊗ ρ(h)) ∘ map` for all `h`.
    pub intertwines: bool,
    pub inverse_ok: bool,
}

pub fn hopf_untwist(g: &FiniteGroup, rho: &[RationalMatrix]) -> HopfUntwist {
    let n = g.order();
    let md = rho.first().map_or(0, RationalMatrix::rows);
    let dim = n * md;
    let build = |inv: bool| {
        let mut m = RationalMatrix::zeros(dim, dim);
        for x in 0..n {
            let r = if inv { &rho[g.inv(x)] } else { &rho[x] };
            m.set_block(x * md, x * md, r);
        }
        m
    };
    let map = build(false);
    let inverse = build(true);
    let regular = |h: usize| {
        let mut m = RationalMatrix::zeros(dim, dim);
        for x in 0..n {
            m.set_block(g.mul(h, x) * md, x * md, &RationalMatrix::identity(md));
        }
        m
    };
    let diagonal = |h: usize| {
        let mut m = RationalMatrix::zeros(dim, dim);
        for x in 0..n {
            m.set_block(g.mul(h, x) * md, x * md, &rho[h]);
        }
        m
    };
    let intertwines = (0..n).all(|h| map.mul(&regular(h)) == diagonal(h).mul(&map));
    let inverse_ok = map.mul(&inverse) == RationalMatrix::identity(dim) && inverse.mul(&map) == RationalMatrix::identity(dim);
    HopfUntwist { map, inverse, intertwines, inverse_ok }
}

// ------------------------------------------------ Koszul for commuting ops

/// Homology of `K(M; φ_1 - 1, …, φ_s - 1)` with `K_j = M ⊗ Λ^j E^s` and
/// `d(m ⊗ e_{i_1}∧…) = Σ_t (-1)^{t+1} (φ_{i_t} - 1) m ⊗ (…ê_{i_t}…)`.
pub fn koszul_commuting_operators(ops: &[RationalMatrix]) -> Result<Vec<usize>> {
    let m = ops.first().map_or(0, RationalMatrix::rows);
    for (i, a) in ops.iter().enumerate() {
        if a.shape() != (m, m) {
            return Err(GroupAlgError::Operators(format!("operator {i} has the wrong shape")));
        }
        if a.det().map(|d| d.is_zero()).unwrap_or(true) {
            return Err(GroupAlgError::Operators(format!("operator {i} is singular")));
        }
        for (j, b) in ops.iter().enumerate().skip(i + 1) {
            if a.mul(b) != b.mul(a) {
                return Err(GroupAlgError::Operators(format!("operators {i} and {j} do not commute")));
            }
        }
    }
    let c = koszul_complex(ops, m);
    Ok(c.betti_numbers().expect("validated"))
}

pub fn koszul_complex(ops: &[RationalMatrix], m: usize) -> ChainComplex {
    let s = ops.len();
    let id = RationalMatrix::identity(m);
    let phis: Vec<RationalMatrix> = ops.iter().map(|a| a.sub(&id)).collect();
    let dims: Vec<usize> = (0..=s).map(|j| m * subsets(s, j).len()).collect();
    let mut diffs = Vec::new();
    for j in 1..=s {
        let src = subsets(s, j);
        let tgt: HashMap<Vec<usize>, usize> = subsets(s, j - 1).into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut d = RationalMatrix::zeros(dims[j - 1], dims[j]);
        for (si, set) in src.iter().enumerate() {
            for (t, &x) in set.iter().enumerate() {
                let mut rest = set.clone();
                rest.remove(t);
                let blk = if t % 2 == 0 { phis[x].clone() } else { phis[x].neg() };
                d.set_block(tgt[&rest] * m, si * m, &blk);
            }
        }
        diffs.push(d);
    }
    ChainComplex::new(0, dims, diffs).expect("commuting operators give a complex")
}

// ------------------------------------------------------------------ JSON

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupJson {
    pub name: Option<String>,
    pub table: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
}

impl GroupJson {
    pub fn into_group(self) -> Result<FiniteGroup> {
        FiniteGroup::from_table(self.name.as_deref().unwrap_or("G"), self.table, self.generators)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub left: Vec<RationalMatrix>,
    #[serde(with = "crate::rational::vec_as_strings")]
    pub unit: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<Vec<String>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl From<&Algebra> for AlgebraJson {
    fn from(a: &Algebra) -> Self {
        AlgebraJson {
            left: a.left.clone(),
            unit: a.unit.clone(),
            augmentation: a.augmentation.as_ref().map(|e| e.iter().map(crate::rational::format_q).collect()),
            labels: a.labels.clone(),
        }
    }
}

impl AlgebraJson {
    pub fn into_algebra(self) -> Result<Algebra> {
        let augmentation = match self.augmentation {
            Some(e) => Some(
                e.iter()
                    .map(|x| crate::rational::parse_q(x).map_err(|err| GroupAlgError::InvalidAlgebra(err.to_string())))
                    .collect::<Result<Vec<Q>>>()?,
            ),
            None => None,
        };
        let mut a = Algebra::from_left_matrices(self.left, self.unit, augmentation)?;
        if !self.labels.is_empty() {
            a.labels = self.labels;
        }
        Ok(a)
    }
}

/// A module by its action matrices, one per algebra basis element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub dim: usize,
    pub actions: Vec<RationalMatrix>,
}

impl From<&AModule> for ModuleJson {
    fn from(m: &AModule) -> Self {
        ModuleJson { dim: m.dim, actions: m.actions.clone() }
    }
}

impl ModuleJson {
    pub fn into_module(self, a: &Algebra) -> Result<AModule> {
        AModule::new(a, self.dim, self.actions)
    }
}

/// Named groups for the command line: `Z<n>`, `S3`, `D4`, `Q8`, `Z2xZ2`, `Z4xZ2`, `Z2xZ2xZ2`.
pub fn named_group(name: &str) -> Option<FiniteGroup> {
    let parts: Vec<&str> = name.split('x').collect();
    if parts.len() > 1 {
        let groups: Option<Vec<FiniteGroup>> = parts.iter().map(|p| named_group(p)).collect();
        let groups = groups?;
        let mut acc = groups[0].clone();
        for g in &groups[1..] {
            acc = FiniteGroup::direct_product(&acc, g);
        }
        acc.name = name.to_string();
        // Same ceiling as the cyclic groups; anything larger is impractical.
        return (acc.order() <= 64).then_some(acc);
    }
    match name {
        "S3" => Some(FiniteGroup::symmetric(3)),
        "D4" => Some(FiniteGroup::dihedral(4)),
        "Q8" => Some(FiniteGroup::quaternion()),
        _ => {
            let n: usize = name.strip_prefix('Z')?.parse().ok()?;
            (1..=64).contains(&n).then(|| FiniteGroup::cyclic(n))
        }
    }
}

/// Configured `(A, Q, M)` triples for the crossed-product comparison.
pub struct CrossedCase {
    pub name: String,
    pub algebra: Algebra,
    pub action: GroupAction,
    pub module_a: AModule,
    pub module_q: Vec<RationalMatrix>,
}

impl CrossedCase {
    /// Crossed products of dimension above 12 take tens of seconds to
    /// resolve five steps deep.
    pub fn heavy(&self) -> bool {
        self.algebra.dim() * self.action.group.order() > 12
    }
}

pub fn crossed_suite() -> Vec<CrossedCase> {
    let m = |rows: &[&[i64]]| RationalMatrix::from_i64(rows);
    let one_dim = |v: i64| RationalMatrix::from_i64(&[&[v]]);
    let mut cases = Vec::new();
    let mut push = |name: &str, r: usize, group: FiniteGroup, gens_v: Vec<RationalMatrix>, modules: Vec<(&str, Option<Vec<RationalMatrix>>)>| {
        let rep_v = group.representation(&gens_v).expect("valid representation");
        let action = GroupAction::on_exterior(r, group.clone(), &rep_v).expect("valid action");
        let a = Algebra::exterior(r);
        for (mname, gens_m) in modules {
            let (module_a, module_q) = match gens_m {
                Some(gm) => {
                    let w = group.representation(&gm).expect("valid representation");
                    let dim = w[0].rows();
                    let eps = a.augmentation().expect("augmented").to_vec();
                    let acts = eps.iter().map(|e| RationalMatrix::scalar(dim, e)).collect();
                    (AModule::new(&a, dim, acts).expect("module"), w)
                }
                None => (AModule::regular(&a), action.maps.clone()),
            };
            cases.push(CrossedCase {
                name: format!("{name}/{mname}"),
                algebra: a.clone(),
                action: action.clone(),
                module_a,
                module_q,
            });
        }
    };
    let z2 = FiniteGroup::cyclic(2);
    push("L1-trivial-group", 1, FiniteGroup::trivial(), vec![], vec![("E", Some(vec![]))]);
    push("L1-Z2-neg", 1, z2.clone(), vec![one_dim(-1)], vec![("E", Some(vec![one_dim(1)])), ("sign", Some(vec![one_dim(-1)])), ("A", None)]);
    push("L1-Z2-id", 1, z2.clone(), vec![one_dim(1)], vec![("sign", Some(vec![one_dim(-1)]))]);
    push(
        "L1-S3-sign",
        1,
        FiniteGroup::symmetric(3),
        vec![one_dim(1), one_dim(-1)],
        vec![("E", Some(vec![one_dim(1), one_dim(1)])), ("sign", Some(vec![one_dim(1), one_dim(-1)]))],
    );
    push(
        "L2-Z2-swap",
        2,
        z2.clone(),
        vec![m(&[&[0, 1], &[1, 0]])],
        vec![("E", Some(vec![one_dim(1)])), ("sign", Some(vec![one_dim(-1)])), ("A", None)],
    );
    let rot = m(&[&[0, -1], &[1, -1]]);
    push("L2-Z3-rot", 2, FiniteGroup::cyclic(3), vec![rot.clone()], vec![("E", Some(vec![one_dim(1)])), ("V2", Some(vec![rot.clone()]))]);
    push(
        "L2-S3",
        2,
        FiniteGroup::symmetric(3),
        vec![rot.clone(), m(&[&[0, 1], &[1, 0]])],
        vec![
            ("E", Some(vec![one_dim(1), one_dim(1)])),
            ("sign", Some(vec![one_dim(1), one_dim(-1)])),
            ("A", None),
        ],
    );
    push(
        "L2-Z2xZ2-signs",
        2,
        FiniteGroup::direct_product(&z2, &z2),
        vec![m(&[&[-1, 0], &[0, 1]]), m(&[&[1, 0], &[0, -1]])],
        vec![("E", Some(vec![one_dim(1), one_dim(1)])), ("chi", Some(vec![one_dim(-1), one_dim(1)]))],
    );
    push("L2-Z6", 2, FiniteGroup::cyclic(6), vec![rot.neg()], vec![("E", Some(vec![one_dim(1)])), ("sign", Some(vec![one_dim(-1)]))]);
    cases
}
