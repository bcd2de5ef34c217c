//! Chain complexes of finite-dimensional rational vector spaces.
//!
//! Indexing is homological: `d_n : C_n → C_{n-1}`. A cochain complex is
//! stored as a chain complex in negative degrees (`C^n` sits in degree
//! `-n`) and flagged as such, so validation and homology share one path.
//!
//! Tensor products use the Koszul sign `d(x⊗y) = dx⊗y + (-1)^{deg x} x⊗dy`.
//! Hom complexes use plain precomposition `δf = f∘d` with no sign.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, RationalMatrix};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("d∘d ≠ 0 in degrees {0:?}")]
    NotAComplex(Vec<i64>),
    #[error("complex has not been validated")]
    Unvalidated,
    #[error("not a chain map in degrees {0:?}")]
    NotAChainMap(Vec<i64>),
    #[error("module structure mismatch: {0}")]
    ModuleMismatch(String),
    #[error("operation needs nonnegative degrees")]
    NegativeDegrees,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Presentation {
    #[default]
    Chain,
    Cochain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    lo: i64,
    dims: Vec<usize>,
    /// `diffs[k]` is `d_{lo+k+1}`.
    diffs: Vec<RationalMatrix>,
    labels: Option<Vec<Vec<String>>>,
    presentation: Presentation,
    validated: bool,
}

impl ChainComplex {
    /// Builds and validates a complex with `C_{lo+k}` of dimension
    /// `dims[k]` and `diffs[k] = d_{lo+k+1}`.
    pub fn new(lo: i64, dims: Vec<usize>, diffs: Vec<RationalMatrix>) -> Result<Self, ComplexError> {
        let mut c = Self::new_unchecked(lo, dims, diffs)?;
        let bad = validate_complex(&c);
        if !bad.is_empty() {
            return Err(ComplexError::NotAComplex(bad));
        }
        c.validated = true;
        Ok(c)
    }

    /// Checks shapes only; `d∘d = 0` is left to [`validate_complex`].
    pub fn new_unchecked(lo: i64, dims: Vec<usize>, diffs: Vec<RationalMatrix>) -> Result<Self, ComplexError> {
        let expected = dims.len().saturating_sub(1);
        if diffs.len() != expected {
            return Err(ComplexError::Shape(format!("{} terms need {} differentials, got {}", dims.len(), expected, diffs.len())));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.shape() != (dims[k], dims[k + 1]) {
                return Err(ComplexError::Shape(format!(
                    "d_{} has shape {:?}, expected {:?}",
                    lo + k as i64 + 1,
                    d.shape(),
                    (dims[k], dims[k + 1])
                )));
            }
        }
        Ok(ChainComplex { lo, dims, diffs, labels: None, presentation: Presentation::Chain, validated: false })
    }

    pub fn zero() -> Self {
        Self::concentrated(0, 0)
    }

    /// `E^dim` in a single degree.
    pub fn concentrated(degree: i64, dim: usize) -> Self {
        ChainComplex {
            lo: degree,
            dims: vec![dim],
            diffs: vec![],
            labels: None,
            presentation: Presentation::Chain,
            validated: true,
        }
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn labels(&self) -> Option<&Vec<Vec<String>>> {
        self.labels.as_ref()
    }

    pub fn as_cochain(mut self) -> Self {
        self.presentation = Presentation::Cochain;
        self
    }

    pub fn presentation(&self) -> Presentation {
        self.presentation
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Runs [`validate_complex`] and records the outcome.
    pub fn validate(&mut self) -> Result<(), ComplexError> {
        let bad = validate_complex(self);
        if bad.is_empty() {
            self.validated = true;
            Ok(())
        } else {
            Err(ComplexError::NotAComplex(bad))
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }

    pub fn dim(&self, n: i64) -> usize {
        if n < self.lo || n > self.hi() {
            0
        } else {
            self.dims[(n - self.lo) as usize]
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `d_n : C_n → C_{n-1}`, zero outside the stored range.
    pub fn d(&self, n: i64) -> RationalMatrix {
        if n > self.lo && n <= self.hi() {
            self.diffs[(n - self.lo - 1) as usize].clone()
        } else {
            RationalMatrix::zeros(self.dim(n - 1), self.dim(n))
        }
    }

    pub fn d_ref(&self, n: i64) -> Option<&RationalMatrix> {
        if n > self.lo && n <= self.hi() {
            Some(&self.diffs[(n - self.lo - 1) as usize])
        } else {
            None
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|n| sign(n) * self.dim(n) as i64).sum()
    }

    /// Homology dimensions for every stored degree, `lo..=hi`.
    pub fn betti_numbers(&self) -> Result<Vec<usize>, ComplexError> {
        if !self.validated {
            return Err(ComplexError::Unvalidated);
        }
        Ok(self.degrees().collect::<Vec<_>>().par_iter().map(|&n| homology_dim(self, n)).collect())
    }

    /// Betti numbers for degrees `0..=top`, padding with zeros.
    pub fn betti_range(&self, from: i64, to: i64) -> Result<Vec<usize>, ComplexError> {
        if !self.validated {
            return Err(ComplexError::Unvalidated);
        }
        Ok((from..=to).collect::<Vec<_>>().par_iter().map(|&n| homology_dim(self, n)).collect())
    }

    pub fn is_exact(&self) -> Result<bool, ComplexError> {
        Ok(self.betti_numbers()?.iter().all(|&b| b == 0))
    }

    /// Cohomology `H^n` of a cochain complex (homology in degree `-n`).
    pub fn cohomology(&self, n: i64) -> Result<Homology, ComplexError> {
        homology(self, -n)
    }

    pub fn shift(&self, k: i64) -> Self {
        let mut c = self.clone();
        c.lo += k;
        if k % 2 != 0 {
            c.diffs = c.diffs.iter().map(RationalMatrix::neg).collect();
        }
        c
    }

    /// Extends the stored range with zero spaces so it covers `lo..=hi`.
    pub fn padded(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        let dims: Vec<usize> = (lo..=hi).map(|n| self.dim(n)).collect();
        let diffs = (lo + 1..=hi).map(|n| self.d(n)).collect();
        ChainComplex { lo, dims, diffs, labels: None, presentation: self.presentation, validated: self.validated }
    }
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Degrees `n` with `d_n ∘ d_{n+1} ≠ 0`.
pub fn validate_complex(c: &ChainComplex) -> Vec<i64> {
    let degrees: Vec<i64> = (c.lo + 1..c.hi()).collect();
    let mut bad: Vec<i64> = degrees
        .par_iter()
        .filter(|&&n| !c.d(n).mul(&c.d(n + 1)).is_zero())
        .copied()
        .collect();
    bad.sort_unstable();
    bad
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homology {
    pub dim: usize,
    /// Cycles whose classes form a basis of `H_n`.
    pub representatives: Vec<Vec<Q>>,
}

fn homology_dim(c: &ChainComplex, n: i64) -> usize {
    let dn = c.dim(n);
    if dn == 0 {
        return 0;
    }
    let r_out = c.d_ref(n).map_or(0, RationalMatrix::rank);
    let r_in = c.d_ref(n + 1).map_or(0, RationalMatrix::rank);
    dn - r_out - r_in
}

pub fn homology(c: &ChainComplex, n: i64) -> Result<Homology, ComplexError> {
    if !c.validated {
        return Err(ComplexError::Unvalidated);
    }
    let dn = c.dim(n);
    let kernel = linalg::kernel_basis(&c.d(n));
    let image = linalg::rank_kernel_image(&c.d(n + 1)).image_basis;
    let chosen = linalg::extend_basis(dn, &image, &kernel);
    let representatives: Vec<Vec<Q>> = chosen.into_iter().map(|i| kernel[i].clone()).collect();
    Ok(Homology { dim: representatives.len(), representatives })
}

#[derive(Debug, Clone)]
pub struct Truncation {
    pub complex: ChainComplex,
    /// `C → τ_{≤d} C`; identity below `d`, the quotient map in degree `d`.
    pub projection: ChainMap,
}

/// Canonical truncation `τ_{≤d}`: degree `d` becomes `C_d / im d_{d+1}` and
/// everything above vanishes.
pub fn truncate_canonical(c: &ChainComplex, d: i64) -> Result<Truncation, ComplexError> {
    if !c.validated {
        return Err(ComplexError::Unvalidated);
    }
    if c.lo < 0 {
        return Err(ComplexError::NegativeDegrees);
    }
    let hi = c.hi();
    if d >= hi {
        let ids = c.degrees().map(|n| (n, RationalMatrix::identity(c.dim(n)))).collect();
        let projection = ChainMap::new(c.clone(), c.clone(), ids)?;
        return Ok(Truncation { complex: c.clone(), projection });
    }
    let top = d.max(c.lo - 1);
    if top < c.lo {
        let t = ChainComplex::concentrated(0, 0);
        let projection = ChainMap::new(c.clone(), t.clone(), BTreeMap::new())?;
        return Ok(Truncation { complex: t, projection });
    }
    let image = linalg::rank_kernel_image(&c.d(d + 1)).image_basis;
    let quot = linalg::quotient(c.dim(d), &image);
    let mut dims: Vec<usize> = (c.lo..d).map(|n| c.dim(n)).collect();
    dims.push(quot.projection.rows());
    let mut diffs: Vec<RationalMatrix> = (c.lo + 1..d).map(|n| c.d(n)).collect();
    if d > c.lo {
        diffs.push(c.d(d).mul(&quot.section));
    }
    let t = ChainComplex::new(c.lo, dims, diffs)?;
    let mut comps: BTreeMap<i64, RationalMatrix> = (c.lo..d).map(|n| (n, RationalMatrix::identity(c.dim(n)))).collect();
    comps.insert(d, quot.projection);
    let projection = ChainMap::new(c.clone(), t.clone(), comps)?;
    Ok(Truncation { complex: t, projection })
}

/// Offsets of the summands `C_i ⊗ D_{n-i}` inside `(C⊗D)_n`, by `i`.
pub fn tensor_offsets(c: &ChainComplex, d: &ChainComplex, n: i64) -> Vec<(i64, usize)> {
    let mut out = Vec::new();
    let mut off = 0;
    for i in c.degrees() {
        let j = n - i;
        let size = c.dim(i) * d.dim(j);
        if j >= d.lo() && j <= d.hi() {
            out.push((i, off));
            off += size;
        }
    }
    out
}

pub fn tensor_complex(c: &ChainComplex, d: &ChainComplex) -> Result<ChainComplex, ComplexError> {
    if !c.validated || !d.validated {
        return Err(ComplexError::Unvalidated);
    }
    let lo = c.lo + d.lo;
    let hi = c.hi() + d.hi();
    let dim_at = |n: i64| -> usize { c.degrees().map(|i| c.dim(i) * d.dim(n - i)).sum() };
    let dims: Vec<usize> = (lo..=hi).map(dim_at).collect();
    let mut diffs = Vec::new();
    for n in lo + 1..=hi {
        let mut m = RationalMatrix::zeros(dim_at(n - 1), dim_at(n));
        let src = tensor_offsets(c, d, n);
        let tgt: BTreeMap<i64, usize> = tensor_offsets(c, d, n - 1).into_iter().collect();
        for &(i, off) in &src {
            let j = n - i;
            // dx ⊗ y lands in C_{i-1} ⊗ D_j
            if let Some(&toff) = tgt.get(&(i - 1)) {
                let blk = c.d(i).kron(&RationalMatrix::identity(d.dim(j)));
                m.set_block(toff, off, &blk);
            }
            // (-1)^i x ⊗ dy lands in C_i ⊗ D_{j-1}
            if let Some(&toff) = tgt.get(&i) {
                let mut blk = RationalMatrix::identity(c.dim(i)).kron(&d.d(j));
                if i.rem_euclid(2) == 1 {
                    blk = blk.neg();
                }
                m.set_block(toff, off, &blk);
            }
        }
        diffs.push(m);
    }
    ChainComplex::new(lo, dims, diffs)
}

pub fn direct_sum(c: &ChainComplex, d: &ChainComplex) -> Result<ChainComplex, ComplexError> {
    if !c.validated || !d.validated {
        return Err(ComplexError::Unvalidated);
    }
    let lo = c.lo.min(d.lo);
    let hi = c.hi().max(d.hi());
    let dims = (lo..=hi).map(|n| c.dim(n) + d.dim(n)).collect();
    let diffs = (lo + 1..=hi).map(|n| RationalMatrix::block_diag(&[&c.d(n), &d.d(n)])).collect();
    ChainComplex::new(lo, dims, diffs)
}

/// `Hom(C, E^w)` as a cochain complex: `Hom(C_n, W)` sits in degree `-n`
/// and a map `f` (a `w x dim C_n` matrix, vectorized row-major) goes to
/// `f ∘ d_{n+1}`.
pub fn hom_into_module(c: &ChainComplex, w_dim: usize) -> Result<ChainComplex, ComplexError> {
    if !c.validated {
        return Err(ComplexError::Unvalidated);
    }
    if w_dim == 0 {
        return Ok(ChainComplex::concentrated(0, 0).as_cochain());
    }
    let id = RationalMatrix::identity(w_dim);
    let lo = -c.hi();
    let dims: Vec<usize> = (lo..=-c.lo).map(|k| c.dim(-k) * w_dim).collect();
    // degree k = -n maps to k-1 = -(n+1)
    let diffs = (lo + 1..=-c.lo).map(|k| id.kron(&c.d(-k + 1).transpose())).collect();
    Ok(ChainComplex::new(lo, dims, diffs)?.as_cochain())
}

/// `Hom_A(C_n, W)` for a complex of `A`-modules, as a cochain complex in the
/// coordinates of the returned bases.
#[derive(Debug, Clone)]
pub struct ModuleHom {
    pub complex: ChainComplex,
    /// `bases[n]` spans `Hom_A(C_n, W)` inside `w x dim C_n` matrices
    /// (vectorized row-major, one column per basis element).
    pub bases: BTreeMap<i64, RationalMatrix>,
}

/// Linear-constraint description of `{f : f ρ_C(a) = ρ_W(a) f for all a}`.
pub fn equivariant_hom_basis(
    c_actions: &[RationalMatrix],
    w_actions: &[RationalMatrix],
    c_dim: usize,
    w_dim: usize,
) -> Result<RationalMatrix, ComplexError> {
    if c_actions.len() != w_actions.len() {
        return Err(ComplexError::ModuleMismatch(format!(
            "{} source actions vs {} target actions",
            c_actions.len(),
            w_actions.len()
        )));
    }
    let n = c_dim * w_dim;
    if n == 0 {
        return Ok(RationalMatrix::zeros(0, 0));
    }
    let ic = RationalMatrix::identity(c_dim);
    let iw = RationalMatrix::identity(w_dim);
    let mut blocks = Vec::new();
    for (rc, rw) in c_actions.iter().zip(w_actions) {
        if rc.shape() != (c_dim, c_dim) || rw.shape() != (w_dim, w_dim) {
            return Err(ComplexError::ModuleMismatch("action matrix shape".into()));
        }
        // vec(f ρ_C) - vec(ρ_W f) for row-major vec
        blocks.push(iw.kron(&rc.transpose()).sub(&rw.kron(&ic)));
    }
    let refs: Vec<&RationalMatrix> = blocks.iter().collect();
    let constraints = if refs.is_empty() { RationalMatrix::zeros(0, n) } else { RationalMatrix::vstack(&refs) };
    Ok(linalg::kernel_matrix(&constraints))
}

pub fn hom_into_module_over(
    c: &ChainComplex,
    c_actions: &BTreeMap<i64, Vec<RationalMatrix>>,
    w_actions: &[RationalMatrix],
    w_dim: usize,
) -> Result<ModuleHom, ComplexError> {
    if !c.validated {
        return Err(ComplexError::Unvalidated);
    }
    let mut bases = BTreeMap::new();
    for n in c.degrees() {
        let acts = c_actions
            .get(&n)
            .ok_or_else(|| ComplexError::ModuleMismatch(format!("no action given in degree {n}")))?;
        bases.insert(n, equivariant_hom_basis(acts, w_actions, c.dim(n), w_dim)?);
    }
    let id = RationalMatrix::identity(w_dim);
    let lo = -c.hi();
    let dims: Vec<usize> = (lo..=-c.lo).map(|k| bases[&-k].cols()).collect();
    let mut diffs = Vec::new();
    for k in lo + 1..=-c.lo {
        let n = -k;
        let full = id.kron(&c.d(n + 1).transpose());
        let src = &bases[&n];
        let tgt = &bases[&(n + 1)];
        let image = full.mul(src);
        let coords = linalg::solve(tgt, &image)
            .map_err(|e| ComplexError::ModuleMismatch(e.to_string()))?
            .ok_or_else(|| ComplexError::ModuleMismatch(format!("d_{} is not module-linear", n + 1)))?;
        diffs.push(coords);
    }
    let complex = ChainComplex::new(lo, dims, diffs)?.as_cochain();
    Ok(ModuleHom { complex, bases })
}

#[derive(Debug, Clone)]
pub struct ChainMap {
    source: ChainComplex,
    target: ChainComplex,
    components: BTreeMap<i64, RationalMatrix>,
}

impl ChainMap {
    /// Missing components are zero. Fails unless `f d = d f` in every degree.
    pub fn new(
        source: ChainComplex,
        target: ChainComplex,
        components: BTreeMap<i64, RationalMatrix>,
    ) -> Result<Self, ComplexError> {
        for (&n, f) in &components {
            if f.shape() != (target.dim(n), source.dim(n)) {
                return Err(ComplexError::Shape(format!(
                    "f_{n} has shape {:?}, expected {:?}",
                    f.shape(),
                    (target.dim(n), source.dim(n))
                )));
            }
        }
        let m = ChainMap { source, target, components };
        let bad = m.violations();
        if bad.is_empty() {
            Ok(m)
        } else {
            Err(ComplexError::NotAChainMap(bad))
        }
    }

    pub fn identity(c: &ChainComplex) -> Self {
        let comps = c.degrees().map(|n| (n, RationalMatrix::identity(c.dim(n)))).collect();
        ChainMap { source: c.clone(), target: c.clone(), components: comps }
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex) -> Self {
        ChainMap { source: source.clone(), target: target.clone(), components: BTreeMap::new() }
    }

    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    pub fn component(&self, n: i64) -> RationalMatrix {
        self.components
            .get(&n)
            .cloned()
            .unwrap_or_else(|| RationalMatrix::zeros(self.target.dim(n), self.source.dim(n)))
    }

    fn range(&self) -> (i64, i64) {
        (self.source.lo.min(self.target.lo), self.source.hi().max(self.target.hi()))
    }

    pub fn violations(&self) -> Vec<i64> {
        let (lo, hi) = self.range();
        (lo..=hi + 1)
            .filter(|&n| {
                let lhs = self.component(n - 1).mul(&self.source.d(n));
                let rhs = self.target.d(n).mul(&self.component(n));
                lhs != rhs
            })
            .collect()
    }
}

/// `Cone(f)_n = C_{n-1} ⊕ D_n`, `d(c, x) = (-dc, f c + dx)`.
pub fn mapping_cone(f: &ChainMap) -> Result<ChainComplex, ComplexError> {
    let bad = f.violations();
    if !bad.is_empty() {
        return Err(ComplexError::NotAChainMap(bad));
    }
    let (s, t) = (&f.source, &f.target);
    let lo = (s.lo + 1).min(t.lo);
    let hi = (s.hi() + 1).max(t.hi());
    let dims: Vec<usize> = (lo..=hi).map(|n| s.dim(n - 1) + t.dim(n)).collect();
    let diffs = (lo + 1..=hi)
        .map(|n| {
            let (a, b) = (s.dim(n - 1), t.dim(n));
            let (a2, b2) = (s.dim(n - 2), t.dim(n - 1));
            let mut m = RationalMatrix::zeros(a2 + b2, a + b);
            m.set_block(0, 0, &s.d(n - 1).neg());
            m.set_block(a2, 0, &f.component(n - 1));
            m.set_block(a2, a, &t.d(n));
            m
        })
        .collect();
    ChainComplex::new(lo, dims, diffs)
}

/// `f` is a quasi-isomorphism iff its cone is exact.
pub fn is_quasi_isomorphism(f: &ChainMap) -> Result<bool, ComplexError> {
    mapping_cone(f)?.is_exact()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexJson {
    pub lo: i64,
    pub dims: Vec<usize>,
    /// `differentials[k]` is `d_{lo+k+1}`.
    pub differentials: Vec<RationalMatrix>,
    #[serde(default)]
    pub presentation: Presentation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<String>>>,
}

impl From<&ChainComplex> for ComplexJson {
    fn from(c: &ChainComplex) -> Self {
        ComplexJson {
            lo: c.lo,
            dims: c.dims.clone(),
            differentials: c.diffs.clone(),
            presentation: c.presentation,
            labels: c.labels.clone(),
        }
    }
}

impl ComplexJson {
    /// Shape-checked but not validated.
    pub fn into_unchecked(self) -> Result<ChainComplex, ComplexError> {
        let mut c = ChainComplex::new_unchecked(self.lo, self.dims, self.differentials)?;
        c.presentation = self.presentation;
        c.labels = self.labels;
        Ok(c)
    }

    pub fn into_complex(self) -> Result<ChainComplex, ComplexError> {
        let mut c = self.into_unchecked()?;
        c.validate()?;
        Ok(c)
    }
}
