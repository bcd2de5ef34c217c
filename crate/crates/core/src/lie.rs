//! Finite-dimensional Lie algebras and Chevalley-Eilenberg complexes.
//!
//! Basis of `Λ^j g`: increasing multi-indices `i_1 < ... < i_j`, listed
//! lexicographically. The CE differential on `M ⊗ Λ^j g` is
//!
//! ```text
//! d(m ⊗ x_1∧…∧x_j) = Σ_i (-1)^{i+1} (m·x_i) ⊗ x_1∧…x̂_i…∧x_j
//!                  + Σ_{i<k} (-1)^{i+k} m ⊗ [x_i,x_k]∧x_1∧…x̂_i…x̂_k…∧x_j
//! ```
//!
//! (positions counted from 1), where a left module is turned into a right
//! module by `m·x = -x·m`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complexes::ChainComplex;
use crate::linalg::RationalMatrix;
use crate::rational::{format_q, parse_q, q, Q};
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LieError {
    #[error("invalid Lie algebra: {0}")]
    Invalid(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
}

/// Structure constants `[x_i, x_j] = Σ_k c[i][j][k] x_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<Vec<Vec<Q>>>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LieReport {
    pub antisymmetry: Vec<(usize, usize)>,
    pub jacobi: Vec<(usize, usize, usize)>,
    pub module: Vec<(usize, usize)>,
}

impl LieReport {
    pub fn is_ok(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty() && self.module.is_empty()
    }
}

impl LieAlgebra {
    /// Builds from `(i, j, [(k, c)])` bracket triples; `[x_j, x_i]` is filled in
    /// by antisymmetry when only one order is given.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<(usize, Q)>)]) -> Result<Self, LieError> {
        let mut c = vec![vec![vec![Q::zero(); dim]; dim]; dim];
        let mut given = vec![vec![false; dim]; dim];
        for (i, j, terms) in brackets {
            if *i >= dim || *j >= dim || terms.iter().any(|(k, _)| *k >= dim) {
                return Err(LieError::Invalid(format!("bracket index out of range in [{i},{j}]")));
            }
            for (k, v) in terms {
                c[*i][*j][*k] += v;
            }
            given[*i][*j] = true;
        }
        for i in 0..dim {
            for j in 0..dim {
                if given[i][j] && !given[j][i] {
                    for k in 0..dim {
                        c[j][i][k] = -c[i][j][k].clone();
                    }
                }
            }
        }
        Ok(Self::from_constants(c))
    }

    pub fn from_constants(c: Vec<Vec<Vec<Q>>>) -> Self {
        let dim = c.len();
        LieAlgebra { dim, c, labels: (0..dim).map(|i| format!("x{i}")).collect() }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.dim, "label count");
        self.labels = labels;
        self
    }

    pub fn abelian(dim: usize) -> Self {
        Self::from_constants(vec![vec![vec![Q::zero(); dim]; dim]; dim])
    }

    /// Basis `(e, h, f)` with `[h,e] = 2e`, `[h,f] = -2f`, `[e,f] = h`.
    pub fn sl2() -> Self {
        Self::from_brackets(3, &[(1, 0, vec![(0, q(2))]), (1, 2, vec![(2, q(-2))]), (0, 2, vec![(1, q(1))])])
            .expect("valid")
            .with_labels(vec!["e".into(), "h".into(), "f".into()])
    }

    /// `[x, y] = z` on basis `(x, y, z)`.
    pub fn heisenberg() -> Self {
        Self::heisenberg_scaled(q(1))
    }

    /// `[x, y] = s z`.
    pub fn heisenberg_scaled(s: Q) -> Self {
        Self::from_brackets(3, &[(0, 1, vec![(2, s)])])
            .expect("valid")
            .with_labels(vec!["x".into(), "y".into(), "z".into()])
    }

    /// `span(t_1..t_s) ⋉ E^n` with `[t_i, v] = D_i v`; the `D_i` must commute
    /// for the result to satisfy Jacobi.
    pub fn semidirect_abelian(derivations: &[RationalMatrix]) -> Self {
        let s = derivations.len();
        let n = derivations.first().map_or(0, RationalMatrix::rows);
        let d = s + n;
        let mut c = vec![vec![vec![Q::zero(); d]; d]; d];
        for (i, dm) in derivations.iter().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    let v = dm.get(b, a);
                    if !v.is_zero() {
                        c[i][s + a][s + b] = v.clone();
                        c[s + a][i][s + b] = -v.clone();
                    }
                }
            }
        }
        Self::from_constants(c)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim + other.dim;
        let mut c = vec![vec![vec![Q::zero(); d]; d]; d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    c[i][j][k] = self.c[i][j][k].clone();
                }
            }
        }
        let o = self.dim;
        for i in 0..other.dim {
            for j in 0..other.dim {
                for k in 0..other.dim {
                    c[o + i][o + j][o + k] = other.c[i][j][k].clone();
                }
            }
        }
        Self::from_constants(c)
    }

    /// Structure constants in the basis `x'_a = Σ_i P[i][a] x_i`.
    pub fn change_basis(&self, p: &RationalMatrix) -> Result<Self, LieError> {
        let pinv = p.inverse().map_err(|_| LieError::Invalid("singular change of basis".into()))?;
        let d = self.dim;
        let mut c = vec![vec![vec![Q::zero(); d]; d]; d];
        for a in 0..d {
            for b in 0..d {
                let x = p.column(a);
                let y = p.column(b);
                let br = self.bracket(&x, &y);
                let new = pinv.mul_vec(&br);
                c[a][b] = new;
            }
        }
        Ok(Self::from_constants(c))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.c[i][j][k]
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> &[Q] {
        &self.c[i][j]
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let f = xi * yj;
                for (k, ck) in self.c[i][j].iter().enumerate() {
                    if !ck.is_zero() {
                        out[k] += &f * ck;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad(x_i)`.
    pub fn ad(&self, i: usize) -> RationalMatrix {
        RationalMatrix::from_fn(self.dim, self.dim, |k, j| self.c[i][j][k].clone())
    }
}

/// Checks antisymmetry, Jacobi and (optionally) the module axiom
/// `ρ([x_i,x_j]) = [ρ(x_i), ρ(x_j)]`, listing every violating index tuple.
pub fn validate_lie(g: &LieAlgebra, module: Option<&LieModule>) -> LieReport {
    let d = g.dim;
    let mut report = LieReport::default();
    for i in 0..d {
        for j in i..d {
            let ok = (0..d).all(|k| g.c[i][j][k] == -g.c[j][i][k].clone());
            if !ok {
                report.antisymmetry.push((i, j));
            }
        }
    }
    let unit = |i: usize| -> Vec<Q> {
        let mut v = vec![Q::zero(); d];
        v[i] = Q::one();
        v
    };
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                let (xi, xj, xk) = (unit(i), unit(j), unit(k));
                let a = g.bracket(&xi, &g.bracket(&xj, &xk));
                let b = g.bracket(&xj, &g.bracket(&xk, &xi));
                let c = g.bracket(&xk, &g.bracket(&xi, &xj));
                if a.iter().zip(&b).zip(&c).any(|((a, b), c)| !(a + b + c).is_zero()) {
                    report.jacobi.push((i, j, k));
                }
            }
        }
    }
    if let Some(m) = module {
        if m.actions.len() != d {
            report.module.push((d, d));
            return report;
        }
        for i in 0..d {
            for j in i..d {
                let lhs = m.act(&g.c[i][j]);
                let rhs = m.actions[i].mul(&m.actions[j]).sub(&m.actions[j].mul(&m.actions[i]));
                if lhs != rhs {
                    report.module.push((i, j));
                }
            }
        }
    }
    report
}

/// `ρ(x_i)` for each basis element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieModule {
    dim: usize,
    actions: Vec<RationalMatrix>,
}

impl LieModule {
    pub fn new(dim: usize, actions: Vec<RationalMatrix>) -> Result<Self, LieError> {
        if actions.iter().any(|a| a.shape() != (dim, dim)) {
            return Err(LieError::InvalidModule("action matrices must be dim x dim".into()));
        }
        Ok(LieModule { dim, actions })
    }

    pub fn trivial(g: &LieAlgebra, dim: usize) -> Self {
        LieModule { dim, actions: vec![RationalMatrix::zeros(dim, dim); g.dim] }
    }

    pub fn adjoint(g: &LieAlgebra) -> Self {
        LieModule { dim: g.dim, actions: (0..g.dim).map(|i| g.ad(i)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn actions(&self) -> &[RationalMatrix] {
        &self.actions
    }

    /// `ρ(Σ a_i x_i)`.
    pub fn act(&self, x: &[Q]) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(self.dim, self.dim);
        for (a, r) in x.iter().zip(&self.actions) {
            if !a.is_zero() {
                out = out.add(&r.scale(a));
            }
        }
        out
    }

    /// The module in the basis used by [`LieAlgebra::change_basis`] with the same `P`.
    pub fn change_basis(&self, p: &RationalMatrix) -> Self {
        let actions = (0..p.cols()).map(|a| self.act(&p.column(a))).collect();
        LieModule { dim: self.dim, actions }
    }
}

/// Increasing `j`-subsets of `0..d` in lexicographic order.
pub fn subsets(d: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < j - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, j, &mut Vec::new(), &mut out);
    out
}

fn subset_index(d: usize, j: usize) -> std::collections::HashMap<Vec<usize>, usize> {
    subsets(d, j).into_iter().enumerate().map(|(i, s)| (s, i)).collect()
}

/// Sorts `l ∧ rest` (with `rest` increasing) into a basis multi-index.
fn wedge_front(l: usize, rest: &[usize]) -> Option<(Vec<usize>, bool)> {
    if rest.contains(&l) {
        return None;
    }
    let pos = rest.iter().filter(|&&r| r < l).count();
    let mut v = rest.to_vec();
    v.insert(pos, l);
    Some((v, pos % 2 == 1))
}

fn validate_inputs(g: &LieAlgebra, m: &LieModule) -> Result<(), LieError> {
    let report = validate_lie(g, Some(m));
    if !report.is_ok() {
        return Err(LieError::Invalid(format!("{report:?}")));
    }
    Ok(())
}

/// The Chevalley-Eilenberg complex `M ⊗ Λ^• g`, degrees `0..=dim g`.
/// The basis of `M ⊗ Λ^j g` is indexed `subset * dim M + m`.
pub fn ce_complex(g: &LieAlgebra, m: &LieModule) -> Result<ChainComplex, LieError> {
    validate_inputs(g, m)?;
    let d = g.dim;
    let md = m.dim;
    let dims: Vec<usize> = (0..=d).map(|j| md * subsets(d, j).len()).collect();
    let mut diffs = Vec::new();
    for j in 1..=d {
        let src = subsets(d, j);
        let tgt = subset_index(d, j - 1);
        let mut mat = RationalMatrix::zeros(dims[j - 1], dims[j]);
        for (si, s) in src.iter().enumerate() {
            for (pos, &xi) in s.iter().enumerate() {
                // (-1)^{pos} (m·x_i) ⊗ ŝ with m·x = -ρ(x) m
                let mut rest = s.clone();
                rest.remove(pos);
                let ti = tgt[&rest];
                let f = if pos % 2 == 0 { q(-1) } else { q(1) };
                for (a, b, v) in m.actions[xi].nonzeros() {
                    mat.add_at(ti * md + a, si * md + b, &(&f * v));
                }
            }
            for p1 in 0..s.len() {
                for p2 in p1 + 1..s.len() {
                    let sign_pk = if (p1 + p2) % 2 == 0 { q(1) } else { q(-1) };
                    let rest: Vec<usize> =
                        s.iter().enumerate().filter(|&(t, _)| t != p1 && t != p2).map(|(_, &x)| x).collect();
                    for (l, cl) in g.c[s[p1]][s[p2]].iter().enumerate() {
                        if cl.is_zero() {
                            continue;
                        }
                        let Some((w, flip)) = wedge_front(l, &rest) else { continue };
                        let ti = tgt[&w];
                        let mut f = &sign_pk * cl;
                        if flip {
                            f = -f;
                        }
                        for a in 0..md {
                            mat.add_at(ti * md + a, si * md + a, &f);
                        }
                    }
                }
            }
        }
        diffs.push(mat);
    }
    let labels: Vec<Vec<String>> = (0..=d)
        .map(|j| {
            subsets(d, j)
                .iter()
                .flat_map(|s| {
                    let w = if s.is_empty() {
                        "1".to_string()
                    } else {
                        s.iter().map(|&i| g.labels[i].clone()).collect::<Vec<_>>().join("∧")
                    };
                    (0..md).map(move |a| format!("m{a}⊗{w}"))
                })
                .collect()
        })
        .collect();
    let c = ChainComplex::new(0, dims, diffs).map_err(|e| LieError::Invalid(e.to_string()))?;
    Ok(c.with_labels(labels))
}

/// `dim H_j(g, M)` for `j = 0..=dim g`.
pub fn lie_homology(g: &LieAlgebra, m: &LieModule) -> Result<Vec<usize>, LieError> {
    let c = ce_complex(g, m)?;
    Ok(c.betti_numbers().expect("validated"))
}

/// Exponent vectors of degree `k` in `d` variables, lexicographically decreasing.
pub fn monomials(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == d {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(i + 1, d, left - e, cur, out);
            cur.pop();
        }
    }
    if d == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedPiece {
    pub internal_degree: usize,
    /// `dim Sym^{n-j} ⊗ Λ^j` for `j = 0..=min(n, d)`.
    pub dims: Vec<usize>,
    pub betti: Vec<usize>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KoszulReport {
    pub pieces: Vec<GradedPiece>,
    pub all_exact: bool,
}

/// The Koszul complex `Sym(g) ⊗ Λ^• g` in internal degree `n`, with
/// `d(f ⊗ x_{i_1}∧…∧x_{i_j}) = Σ_t (-1)^{t+1} f x_{i_t} ⊗ (…x̂_{i_t}…)`.
pub fn koszul_graded_piece(d: usize, n: usize) -> ChainComplex {
    let top = n.min(d);
    let basis = |j: usize| -> (Vec<Vec<usize>>, Vec<Vec<usize>>) { (monomials(d, n - j), subsets(d, j)) };
    let dims: Vec<usize> = (0..=top)
        .map(|j| {
            let (a, b) = basis(j);
            a.len() * b.len()
        })
        .collect();
    let mut diffs = Vec::new();
    for j in 1..=top {
        let (src_m, src_s) = basis(j);
        let (tgt_m, tgt_s) = basis(j - 1);
        let mi: std::collections::HashMap<&Vec<usize>, usize> = tgt_m.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let si: std::collections::HashMap<&Vec<usize>, usize> = tgt_s.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut mat = RationalMatrix::zeros(dims[j - 1], dims[j]);
        for (a, mono) in src_m.iter().enumerate() {
            for (b, s) in src_s.iter().enumerate() {
                let col = a * src_s.len() + b;
                for (t, &x) in s.iter().enumerate() {
                    let mut m2 = mono.clone();
                    m2[x] += 1;
                    let mut rest = s.clone();
                    rest.remove(t);
                    let row = mi[&m2] * tgt_s.len() + si[&rest];
                    mat.add_at(row, col, &if t % 2 == 0 { q(1) } else { q(-1) });
                }
            }
        }
        diffs.push(mat);
    }
    ChainComplex::new(0, dims, diffs).expect("Koszul differential squares to zero")
}

/// Certifies exactness of the graded Koszul complex of `g` in internal
/// degrees `1..=n_max`. The associated graded of the CE resolution is this
/// complex, independently of the bracket.
pub fn graded_koszul_check(g: &LieAlgebra, n_max: usize) -> KoszulReport {
    let pieces: Vec<GradedPiece> = (1..=n_max)
        .map(|n| {
            let c = koszul_graded_piece(g.dim, n);
            let betti = c.betti_numbers().expect("validated");
            let exact = betti.iter().all(|&b| b == 0);
            GradedPiece { internal_degree: n, dims: c.dims().to_vec(), betti, exact }
        })
        .collect();
    let all_exact = pieces.iter().all(|p| p.exact);
    KoszulReport { pieces, all_exact }
}

/// A random Lie algebra of dimension `d` (built from valid families and
/// conjugated by a random integral change of basis) with a compatible
/// module of dimension `m`.
pub fn random_lie_pair<R: Rng>(rng: &mut R, d: usize, m: usize) -> (LieAlgebra, LieModule) {
    let rand_matrix = |rng: &mut R, n: usize| RationalMatrix::from_fn(n, n, |_, _| q(rng.gen_range(-2..=2)));
    let commuting = |rng: &mut R, base: &RationalMatrix, count: usize| -> Vec<RationalMatrix> {
        let n = base.rows();
        (0..count)
            .map(|_| {
                let (a, b, c) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-1..=1));
                RationalMatrix::scalar(n, &q(a)).add(&base.scale(&q(b))).add(&base.mul(base).scale(&q(c)))
            })
            .collect()
    };
    let family = if d >= 3 { rng.gen_range(0..4) } else { rng.gen_range(0..2) };
    let (g, module) = match family {
        0 => {
            let b = rand_matrix(rng, m);
            let acts = commuting(rng, &b, d);
            (LieAlgebra::abelian(d), LieModule::new(m, acts).expect("shape"))
        }
        1 => {
            let s = if d >= 3 { rng.gen_range(1..=2) } else { 1 };
            let n = d - s;
            let base = rand_matrix(rng, n);
            let ders = commuting(rng, &base, s);
            let g = LieAlgebra::semidirect_abelian(&ders);
            let b = rand_matrix(rng, m);
            let mut acts = commuting(rng, &b, s);
            acts.extend((0..n).map(|_| RationalMatrix::zeros(m, m)));
            (g, LieModule::new(m, acts).expect("shape"))
        }
        2 => {
            let g = LieAlgebra::sl2().direct_sum(&LieAlgebra::abelian(d - 3));
            let mut acts: Vec<RationalMatrix> = if m >= 2 && rng.gen_bool(0.5) {
                let e = RationalMatrix::from_i64(&[&[0, 1], &[0, 0]]);
                let h = RationalMatrix::from_i64(&[&[1, 0], &[0, -1]]);
                let f = RationalMatrix::from_i64(&[&[0, 0], &[1, 0]]);
                let pad = |x: &RationalMatrix| RationalMatrix::block_diag(&[x, &RationalMatrix::zeros(m - 2, m - 2)]);
                vec![pad(&e), pad(&h), pad(&f)]
            } else {
                vec![RationalMatrix::zeros(m, m); 3]
            };
            acts.extend((3..d).map(|_| RationalMatrix::scalar(m, &q(rng.gen_range(-2..=2)))));
            (g, LieModule::new(m, acts).expect("shape"))
        }
        _ => {
            let g = LieAlgebra::heisenberg().direct_sum(&LieAlgebra::abelian(d - 3));
            let b = rand_matrix(rng, m);
            let mut acts = commuting(rng, &b, 2);
            acts.push(RationalMatrix::zeros(m, m));
            acts.extend((3..d).map(|_| RationalMatrix::scalar(m, &q(rng.gen_range(-2..=2)))));
            (g, LieModule::new(m, acts).expect("shape"))
        }
    };
    // unit upper-triangular times a random permutation is always invertible
    let mut p = RationalMatrix::identity(d);
    for i in 0..d {
        for j in i + 1..d {
            p.set(i, j, q(rng.gen_range(-1..=1)));
        }
    }
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let p = p.select_columns(&perm);
    let g2 = g.change_basis(&p).expect("invertible");
    let m2 = module.change_basis(&p);
    (g2, m2)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LieJson {
    pub dim: usize,
    /// `[i, j, [[k, "num/den"], …]]`
    pub brackets: Vec<(usize, usize, Vec<(usize, String)>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl LieJson {
    pub fn into_algebra(self) -> Result<LieAlgebra, LieError> {
        let mut br = Vec::new();
        for (i, j, terms) in self.brackets {
            let mut t = Vec::new();
            for (k, s) in terms {
                t.push((k, parse_q(&s).map_err(|e| LieError::Invalid(e.to_string()))?));
            }
            br.push((i, j, t));
        }
        let g = LieAlgebra::from_brackets(self.dim, &br)?;
        match self.labels {
            Some(l) if l.len() == self.dim => Ok(g.with_labels(l)),
            Some(_) => Err(LieError::Invalid("label count".into())),
            None => Ok(g),
        }
    }
}

impl From<&LieAlgebra> for LieJson {
    fn from(g: &LieAlgebra) -> Self {
        let mut brackets = Vec::new();
        for i in 0..g.dim {
            for j in i + 1..g.dim {
                let terms: Vec<(usize, String)> = g.c[i][j]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| (k, format_q(v)))
                    .collect();
                if !terms.is_empty() {
                    brackets.push((i, j, terms));
                }
            }
        }
        LieJson { dim: g.dim, brackets, labels: Some(g.labels.clone()) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LieModuleJson {
    pub dim: usize,
    pub actions: Vec<RationalMatrix>,
}

impl LieModuleJson {
    pub fn into_module(self) -> Result<LieModule, LieError> {
        LieModule::new(self.dim, self.actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn classical_algebras_validate() {
        assert!(validate_lie(&LieAlgebra::abelian(4), None).is_ok());
        assert!(validate_lie(&LieAlgebra::sl2(), Some(&LieModule::adjoint(&LieAlgebra::sl2()))).is_ok());
        assert!(validate_lie(&LieAlgebra::heisenberg(), None).is_ok());
    }

    #[test]
    fn perturbed_jacobi_is_reported() {
        let mut c = LieAlgebra::sl2().c.clone();
        // [e,f] = h + e breaks Jacobi
        c[0][2][0] = q(1);
        c[2][0][0] = q(-1);
        let r = validate_lie(&LieAlgebra::from_constants(c), None);
        assert_eq!(r.jacobi, vec![(0, 1, 2)]);
        assert!(r.antisymmetry.is_empty());
        let mut c = LieAlgebra::sl2().c.clone();
        c[0][1][0] = q(5);
        assert_eq!(validate_lie(&LieAlgebra::from_constants(c), None).antisymmetry, vec![(0, 1)]);
    }

    #[test]
    fn homology_of_small_algebras() {
        let sl2 = LieAlgebra::sl2();
        assert_eq!(lie_homology(&sl2, &LieModule::trivial(&sl2, 1)).unwrap(), vec![1, 0, 0, 1]);
        assert_eq!(lie_homology(&sl2, &LieModule::adjoint(&sl2)).unwrap(), vec![0, 0, 0, 0]);
        let h = LieAlgebra::heisenberg();
        assert_eq!(lie_homology(&h, &LieModule::trivial(&h, 1)).unwrap(), vec![1, 2, 2, 1]);
        let a = LieAlgebra::abelian(4);
        assert_eq!(lie_homology(&a, &LieModule::trivial(&a, 1)).unwrap(), vec![1, 4, 6, 4, 1]);
        let one = LieAlgebra::abelian(1);
        assert_eq!(lie_homology(&one, &LieModule::trivial(&one, 1)).unwrap(), vec![1, 1]);
    }

    #[test]
    fn abelian_trivial_has_zero_differentials() {
        let a = LieAlgebra::abelian(3);
        let c = ce_complex(&a, &LieModule::trivial(&a, 2)).unwrap();
        assert_eq!(c.dims(), &[2, 6, 6, 2]);
        assert!((1..=3).all(|n| c.d(n).is_zero()));
    }

    #[test]
    fn invalid_module_rejected() {
        let sl2 = LieAlgebra::sl2();
        let bad = LieModule::new(1, vec![RationalMatrix::identity(1); 3]).unwrap();
        assert!(ce_complex(&sl2, &bad).is_err());
    }

    #[test]
    fn koszul_pieces() {
        let r = graded_koszul_check(&LieAlgebra::abelian(1), 6);
        assert!(r.all_exact);
        let r = graded_koszul_check(&LieAlgebra::abelian(2), 4);
        assert!(r.all_exact);
        assert_eq!(r.pieces[3].dims, vec![5, 8, 3]);
        let r = graded_koszul_check(&LieAlgebra::sl2(), 3);
        assert!(r.all_exact);
        // Sym^3(E^3), Sym^2 ⊗ Λ^1, Sym^1 ⊗ Λ^2, Λ^3
        assert_eq!(r.pieces[2].dims, vec![10, 18, 9, 1]);
    }

    #[test]
    fn random_pairs_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let d = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=3);
            let (g, module) = random_lie_pair(&mut rng, d, m);
            assert!(validate_lie(&g, Some(&module)).is_ok());
        }
    }
}
