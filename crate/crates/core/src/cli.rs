//! The `wallforge` command line.
//!
//! Every subcommand emits one JSON document:
//!
//! ```text
//! { "schema": "wallforge/1", "kind": …, "job": {options, inputs},
//!   "result": …, "certificate": {"ok": …, …}, "dump": …, "digest": … }
//! ```
//!
//! `job` records the parsed options and the contents of every input file,
//! so a document can be replayed without the original files. `dump` holds
//! raw matrices for the certificates that are checked from matrices, and
//! `digest` is a SHA-256 over everything else. Output is deterministic:
//! maps are ordered and randomized jobs take explicit seeds.
//!
//! Exit codes: 0 success, 1 invalid input, 2 failed certificate, 3 internal
//! error.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arith::{self, PExponent, PadicApprox};
use crate::bch::{self, GaussPolynomial};
use crate::complexes::ChainComplex;
use crate::groupalg::{self, AlgebraJson, AModule, ModuleJson};
use crate::lie::{self, LieAlgebra, LieJson, LieModule, LieModuleJson};
use crate::linalg::{IntMatrix, RationalMatrix};
use crate::rational::{format_q, parse_q, q, Q};
use crate::tree::{self, CoefficientSystemJson, Subcomplex, TreeCoefficientSystem};
use crate::wall::{self, Column, WallAssembly, WallDump, SCHEMA};

pub const THREADS_ENV: &str = "WALLFORGE_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Certificate(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Certificate(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Certificate(m) | CliError::Internal(m) => m,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

fn internal(e: impl ToString) -> CliError {
    CliError::Internal(e.to_string())
}

type Res<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "wallforge", version, about = "Exact homological-algebra workbench")]
pub struct Cli {
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print an aligned-text summary on stdout.
    #[arg(long, global = true)]
    pub text: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Chevalley-Eilenberg homology of a Lie algebra.
    CeHomology(CeArgs),
    /// The Wall assembly over a group algebra with 2-periodic columns.
    WallDemo(WallDemoArgs),
    /// Build and certify a Wall assembly from JSON or at random.
    WallBuild(WallBuildArgs),
    /// Schneider-Stuhler complex of a coefficient system on the tree.
    TreeSs(TreeSsArgs),
    /// Homology of iterated pushouts of a ball along a subcomplex.
    PushoutCheck(PushoutArgs),
    /// Cohomology and alternation of a cosimplicial row.
    CosimplicialCheck(CosimplicialArgs),
    /// BCH series and valuation bounds on powerful nilpotent examples.
    BchVerify(BchArgs),
    /// Group-law polynomials of a powerful Lie lattice.
    GroupLaw(GroupLawArgs),
    /// Gauss norms, lattice contraction and D_r expansions.
    Norms(NormsArgs),
    /// The radius parameters h, ell and membership in S_R.
    Radius(RadiusArgs),
    /// Crossed-product Ext comparison on the configured suite.
    ExtCrossed(ExtCrossedArgs),
    /// Re-check a document produced by another subcommand.
    VerifyReplay(ReplayArgs),
}

impl Command {
    fn kind(&self) -> &'static str {
        match self {
            Command::CeHomology(_) => "ce-homology",
            Command::WallDemo(_) => "wall-demo",
            Command::WallBuild(_) => "wall-build",
            Command::TreeSs(_) => "tree-ss",
            Command::PushoutCheck(_) => "pushout-check",
            Command::CosimplicialCheck(_) => "cosimplicial-check",
            Command::BchVerify(_) => "bch-verify",
            Command::GroupLaw(_) => "group-law",
            Command::Norms(_) => "norms",
            Command::Radius(_) => "radius",
            Command::ExtCrossed(_) => "ext-crossed",
            Command::VerifyReplay(_) => "verify-replay",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CeArgs {
    /// Lie algebra JSON (`{"dim", "brackets": [[i, j, [[k, "c"]]]]}`).
    #[arg(long, conflicts_with = "builtin")]
    pub lie: Option<PathBuf>,
    /// One of sl2, heisenberg, abelian<d>.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Module JSON (`{"dim", "actions": [...]}`); trivial of dimension 1 by default.
    #[arg(long, conflicts_with = "adjoint")]
    pub module: Option<PathBuf>,
    #[arg(long)]
    pub adjoint: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WallDemoArgs {
    #[arg(long, default_value = "Z2")]
    pub group: String,
    #[arg(long, default_value_t = 3)]
    pub degrees: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WallBuildArgs {
    /// Base complex and columns as JSON.
    #[arg(long, conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Use a random base complex over the group algebra of `--group`.
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value = "Z2")]
    pub group: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub top: usize,
    #[arg(long, default_value_t = 3)]
    pub max_len: usize,
    /// Also certify the truncation at this degree bound.
    #[arg(long)]
    pub truncate: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TreeSsArgs {
    /// Coefficient system JSON; overrides the constant system on a ball.
    #[arg(long)]
    pub system: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 2)]
    pub radius: usize,
    /// Dimension of the constant system.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long)]
    pub no_augmentation: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PushoutArgs {
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    /// Number of glued copies, `j + 1`.
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    /// Vertex indices of the subcomplex (ball order), comma separated.
    #[arg(long, default_value = "0")]
    pub z: String,
    /// Keep only these edge indices instead of the induced subcomplex.
    #[arg(long)]
    pub z_edges: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CosimplicialArgs {
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    #[arg(long, default_value = "0")]
    pub z: String,
    #[arg(long)]
    pub z_edges: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub q: usize,
    #[arg(long, default_value_t = 3)]
    pub j_max: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BchArgs {
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    #[arg(long, default_value = "2,3,5")]
    pub primes: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GroupLawArgs {
    #[arg(long, conflicts_with = "builtin")]
    pub lie: Option<PathBuf>,
    /// heisenberg, sl2 or abelian<d>, scaled by `--scale`.
    #[arg(long, default_value = "heisenberg")]
    pub builtin: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub scale: String,
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct NormsArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    /// Polynomial JSON (`{"nvars", "terms": [[[e…], "c"]]}`) for the Gauss norm.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Exponent of `ρ = p^rho`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub rho: String,
    /// Integer matrix rows `a,b;c,d` for the contraction check.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Monomial exponents for the contraction check.
    #[arg(long)]
    pub monomial: Option<String>,
    /// p-integral rationals `ν_1,…,ν_d` for the D_r expansion.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    /// Exponent of `r = p^r`.
    #[arg(long, default_value = "-1/2", allow_hyphen_values = true)]
    pub r: String,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    #[arg(long, default_value_t = 24)]
    pub precision: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RadiusArgs {
    #[arg(long)]
    pub p: u64,
    /// Exponent of `r = p^r`.
    #[arg(long, allow_hyphen_values = true)]
    pub r: String,
    #[arg(long, default_value_t = 1)]
    pub e: u32,
    #[arg(long)]
    pub q: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ExtCrossedArgs {
    /// Case names; all light cases when omitted.
    #[arg(long = "case")]
    pub cases: Vec<String>,
    /// Include the heavy cases when no case is named.
    #[arg(long)]
    pub heavy: bool,
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub dump: PathBuf,
}

/// Where input files come from: disk, or the `job.inputs` of a document.
enum Inputs {
    Files(RefCell<BTreeMap<String, Value>>),
    Embedded(BTreeMap<String, Value>),
}

impl Inputs {
    fn load(&self, key: &str, path: &std::path::Path) -> Res<Value> {
        match self {
            Inputs::Embedded(m) => m.get(key).cloned().ok_or_else(|| invalid(format!("document has no input {key:?}"))),
            Inputs::Files(m) => {
                let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                m.borrow_mut().insert(key.to_string(), v.clone());
                Ok(v)
            }
        }
    }

    fn recorded(&self) -> BTreeMap<String, Value> {
        match self {
            Inputs::Files(m) => m.borrow().clone(),
            Inputs::Embedded(m) => m.clone(),
        }
    }
}

fn parse_input<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Res<T> {
    serde_json::from_value(v).map_err(|e| invalid(format!("{what}: {e}")))
}

/// A complex re-checked from its matrices on replay.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComplexDump {
    pub name: String,
    pub lo: i64,
    pub dims: Vec<usize>,
    pub diffs: Vec<RationalMatrix>,
    /// Homology dimensions in degrees `lo..=hi`.
    pub homology: Vec<usize>,
}

impl ComplexDump {
    fn new(name: &str, c: &ChainComplex) -> Res<Self> {
        let homology = c.betti_numbers().map_err(internal)?;
        Ok(ComplexDump { name: name.into(), lo: c.lo(), dims: c.dims().to_vec(), diffs: (c.lo() + 1..=c.hi()).map(|n| c.d(n)).collect(), homology })
    }

    fn check(&self) -> std::result::Result<(), String> {
        let mut c = ChainComplex::new_unchecked(self.lo, self.dims.clone(), self.diffs.clone()).map_err(|e| e.to_string())?;
        c.validate().map_err(|e| format!("{}: {e}", self.name))?;
        let h = c.betti_numbers().map_err(|e| e.to_string())?;
        if h != self.homology {
            return Err(format!("{}: homology {:?}, stored {:?}", self.name, h, self.homology));
        }
        Ok(())
    }
}

/// `factors[0] · factors[1] · … == expected`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProductCheck {
    pub name: String,
    pub factors: Vec<RationalMatrix>,
    pub expected: RationalMatrix,
}

impl ProductCheck {
    fn check(&self) -> std::result::Result<(), String> {
        let mut acc = self.factors.first().cloned().ok_or_else(|| format!("{}: no factors", self.name))?;
        for f in &self.factors[1..] {
            acc = acc.try_mul(f).map_err(|e| format!("{}: {e}", self.name))?;
        }
        if acc != self.expected {
            return Err(format!("{}: product differs", self.name));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Dump {
    Complexes { complexes: Vec<ComplexDump>, products: Vec<ProductCheck> },
    Wall { walls: Vec<WallDump> },
    /// No matrices; replay re-runs the job and compares.
    Recompute,
}

struct Report {
    result: Value,
    certificate: Value,
    dump: Dump,
    text: Vec<(String, String)>,
}

fn certificate(ok: bool, mut fields: serde_json::Map<String, Value>) -> Value {
    fields.insert("ok".into(), Value::Bool(ok));
    Value::Object(fields)
}

fn fields(v: Value) -> serde_json::Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn parse_rational(s: &str, what: &str) -> Res<Q> {
    parse_q(s).map_err(|e| invalid(format!("{what}: {e}")))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Res<Vec<T>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse::<T>().map_err(|_| invalid(format!("{what}: cannot parse {t:?}")))).collect()
}

fn builtin_lie(name: &str) -> Res<LieAlgebra> {
    match name {
        "sl2" => Ok(LieAlgebra::sl2()),
        "heisenberg" => Ok(LieAlgebra::heisenberg()),
        other => match other.strip_prefix("abelian").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) if (1..=8).contains(&d) => Ok(LieAlgebra::abelian(d)),
            _ => Err(invalid(format!("unknown Lie algebra {other:?}"))),
        },
    }
}

fn group(name: &str) -> Res<groupalg::FiniteGroup> {
    groupalg::named_group(name).ok_or_else(|| invalid(format!("unknown group {name:?}")))
}

// ------------------------------------------------------------------ jobs

fn ce_homology(a: &CeArgs, inputs: &Inputs) -> Res<Report> {
    let g = match (&a.lie, &a.builtin) {
        (Some(path), _) => parse_input::<LieJson>(inputs.load("lie", path)?, "lie")?.into_algebra().map_err(invalid)?,
        (None, Some(name)) => builtin_lie(name)?,
        (None, None) => return Err(invalid("give --lie or --builtin")),
    };
    let m = match (&a.module, a.adjoint) {
        (Some(path), _) => parse_input::<LieModuleJson>(inputs.load("module", path)?, "module")?.into_module().map_err(invalid)?,
        (None, true) => LieModule::adjoint(&g),
        (None, false) => LieModule::trivial(&g, 1),
    };
    let report = lie::validate_lie(&g, Some(&m));
    if !report.is_ok() {
        return Err(invalid(format!("not a Lie algebra and module: {}", serde_json::to_string(&report).expect("serializable"))));
    }
    let c = lie::ce_complex(&g, &m).map_err(invalid)?;
    let betti = c.betti_numbers().map_err(internal)?;
    let d2_zero = crate::complexes::validate_complex(&c).is_empty();
    let text = betti.iter().enumerate().map(|(n, b)| (format!("H_{n}"), b.to_string())).collect();
    Ok(Report {
        result: json!({ "dim": g.dim(), "module_dim": m.dim(), "betti": betti, "euler_characteristic": c.euler_characteristic() }),
        certificate: certificate(d2_zero, fields(json!({ "delta_squared": if d2_zero { "zero" } else { "nonzero" } }))),
        dump: Dump::Complexes { complexes: vec![ComplexDump::new("chevalley-eilenberg", &c)?], products: vec![] },
        text,
    })
}

fn wall_report(walls: Vec<(&str, &WallAssembly)>) -> Res<Report> {
    let mut result = serde_json::Map::new();
    let mut cert = serde_json::Map::new();
    let mut dumps = Vec::new();
    let mut ok = true;
    let mut text = Vec::new();
    for (name, w) in walls {
        let c = w.certify().map_err(internal)?;
        ok &= c.is_ok();
        let nonzero: Vec<[usize; 3]> = w.maps.iter().filter(|(_, m)| !m.is_zero()).map(|(&(q, j, k), _)| [q, j, k]).collect();
        let d2 = if c.delta_squared_violations.is_empty() { "zero" } else { "nonzero" };
        result.insert(
            name.into(),
            json!({
                "total_dims": w.total_complex_unchecked().map_err(internal)?.dims(),
                "total_betti": c.total_betti,
                "base_betti": c.base_betti,
                "higher_maps": w.maps.len(),
                "nonzero_higher_maps": nonzero,
            }),
        );
        let mut entry = fields(to_value(&c));
        entry.insert("delta_squared".into(), json!(d2));
        entry.insert("ok".into(), json!(c.is_ok()));
        cert.insert(name.into(), Value::Object(entry));
        text.push((format!("{name} total Betti"), format!("{:?}", c.total_betti)));
        text.push((format!("{name} base Betti"), format!("{:?}", c.base_betti)));
        text.push((format!("{name} delta^2"), d2.into()));
        dumps.push(w.to_dump(c));
    }
    if let Some(first) = cert.values().next().cloned() {
        cert.insert("delta_squared".into(), first["delta_squared"].clone());
    }
    Ok(Report { result: Value::Object(result), certificate: certificate(ok, cert), dump: Dump::Wall { walls: dumps }, text })
}

fn wall_demo_job(a: &WallDemoArgs) -> Res<Report> {
    let g = group(&a.group)?;
    if a.degrees == 0 {
        return Err(invalid("--degrees must be positive"));
    }
    let w = wall::wall_demo(&g, a.degrees).map_err(wall_error)?;
    wall_report(vec![("wall", &w)])
}

fn wall_error(e: wall::WallError) -> CliError {
    match e {
        wall::WallError::Invalid(_) | wall::WallError::Column { .. } | wall::WallError::NotResolution(_) => invalid(e),
        other => CliError::Certificate(other.to_string()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WallInput {
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    algebra: Option<AlgebraJson>,
    base_modules: Vec<ModuleJson>,
    base_diffs: Vec<RationalMatrix>,
    #[serde(default)]
    columns: Option<Vec<wall::ColumnJson>>,
    /// Resolve every base term freely to this length when `columns` is absent.
    #[serde(default)]
    column_length: Option<usize>,
}

fn wall_build(a: &WallBuildArgs, inputs: &Inputs) -> Res<Report> {
    let w = match &a.input {
        Some(path) => {
            let inp: WallInput = parse_input(inputs.load("input", path)?, "wall input")?;
            let alg = match (&inp.algebra, &inp.group) {
                (Some(aj), _) => aj.clone().into_algebra().map_err(invalid)?,
                (None, Some(g)) => groupalg::Algebra::group_algebra(&group(g)?),
                (None, None) => return Err(invalid("wall input needs \"algebra\" or \"group\"")),
            };
            let modules = inp.base_modules.into_iter().map(|m| m.into_module(&alg).map_err(invalid)).collect::<Res<Vec<AModule>>>()?;
            let base = wall::BaseComplex::new(&alg, modules, inp.base_diffs).map_err(wall_error)?;
            let columns = match (inp.columns, inp.column_length) {
                (Some(cols), _) => cols
                    .into_iter()
                    .enumerate()
                    .map(|(q, c)| {
                        let modules = c.modules.into_iter().map(|m| m.into_module(&alg).map_err(invalid)).collect::<Res<Vec<_>>>()?;
                        let col = Column { modules, diffs: c.diffs, augmentation: c.augmentation };
                        let s = base.modules.get(q).ok_or_else(|| invalid("more columns than base terms"))?;
                        col.validate(&alg, s).map_err(|e| invalid(format!("column {q}: {e}")))?;
                        Ok(col)
                    })
                    .collect::<Res<Vec<_>>>()?,
                (None, Some(len)) => base.modules.iter().map(|s| Column::resolve(&alg, s, len).map_err(wall_error)).collect::<Res<Vec<_>>>()?,
                (None, None) => return Err(invalid("wall input needs \"columns\" or \"column_length\"")),
            };
            wall::build_wall(&alg, &base, columns).map_err(wall_error)?
        }
        None if a.random => {
            let g = group(&a.group)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let (alg, base) = wall::random_base(&mut rng, &g, a.top).map_err(wall_error)?;
            let columns = wall::random_columns(&mut rng, &alg, &base, a.max_len).map_err(wall_error)?;
            wall::build_wall(&alg, &base, columns).map_err(wall_error)?
        }
        None => return Err(invalid("give --input or --random")),
    };
    match a.truncate {
        Some(d) => {
            let t = w.truncated(d).map_err(wall_error)?;
            wall_report(vec![("wall", &w), ("truncated", &t)])
        }
        None => wall_report(vec![("wall", &w)]),
    }
}

fn tree_ss(a: &TreeSsArgs, inputs: &Inputs) -> Res<Report> {
    let constant = a.system.is_none();
    let cs = match &a.system {
        Some(path) => parse_input::<CoefficientSystemJson>(inputs.load("system", path)?, "system")?.into_system().map_err(invalid)?,
        None => TreeCoefficientSystem::constant(tree::ball(a.p, a.radius).map_err(invalid)?, a.dim),
    };
    let cs = if a.no_augmentation { cs.without_augmentation() } else { cs };
    let ss = tree::ss_chain_complex(&cs).map_err(invalid)?;
    let betti = ss.complex.betti_range(0, 1).map_err(internal)?;
    let mut products = Vec::new();
    let mut eps_d_zero = Value::Null;
    if let Some(aug) = &ss.augmentation {
        let eps = aug.component(0);
        let zero = RationalMatrix::zeros(eps.rows(), ss.complex.dim(1));
        eps_d_zero = json!(eps.mul(&ss.complex.d(1)) == zero);
        products.push(ProductCheck { name: "augmentation∘d".into(), factors: vec![eps, ss.complex.d(1)], expected: zero });
    }
    let expected = constant.then(|| vec![a.dim, 0]);
    let ok = eps_d_zero != json!(false) && expected.as_ref().map_or(true, |e| e == &betti);
    Ok(Report {
        result: json!({
            "p": cs.tree().p(),
            "vertices": cs.tree().vertices().len(),
            "edges": cs.tree().edges().len(),
            "betti": betti,
            "augmented": ss.augmentation.is_some(),
        }),
        certificate: certificate(ok, fields(json!({ "augmentation_kills_boundaries": eps_d_zero, "expected_betti": expected }))),
        dump: Dump::Complexes { complexes: vec![ComplexDump::new("schneider-stuhler", &ss.complex)?], products },
        text: vec![("H_0".into(), betti[0].to_string()), ("H_1".into(), betti[1].to_string())],
    })
}

fn subcomplex(y: &tree::FiniteSubtree, z: &str, z_edges: &Option<String>) -> Res<Subcomplex> {
    let verts: Vec<usize> = parse_list(z, "--z")?;
    match z_edges {
        Some(e) => Subcomplex::new(y, verts, parse_list(e, "--z-edges")?).map_err(invalid),
        None => Subcomplex::induced(y, verts).map_err(invalid),
    }
}

fn pushout_check(a: &PushoutArgs) -> Res<Report> {
    let y = tree::ball(a.p, a.radius).map_err(invalid)?;
    let z = subcomplex(&y, &a.z, &a.z_edges)?;
    let convex = z.is_convex(&y) && !z.vertices().is_empty();
    let po = tree::pushout_complex(&y, &z, a.copies).map_err(invalid)?;
    let (h0, h1) = po.betti().map_err(internal)?;
    let acyclic = (h0, h1) == (1, 0);
    Ok(Report {
        result: json!({ "vertices": po.vertices.len(), "edges": po.edges.len(), "betti": [h0, h1], "convex": convex, "acyclic": acyclic }),
        certificate: certificate(!convex || acyclic, fields(json!({ "convex_implies_acyclic": !convex || acyclic }))),
        dump: Dump::Complexes { complexes: vec![ComplexDump::new("pushout", &po.complex)?], products: vec![] },
        text: vec![("H_0".into(), h0.to_string()), ("H_1".into(), h1.to_string()), ("convex".into(), convex.to_string())],
    })
}

fn cosimplicial_check(a: &CosimplicialArgs) -> Res<Report> {
    let y = tree::ball(a.p, a.radius).map_err(invalid)?;
    let z = subcomplex(&y, &a.z, &a.z_edges)?;
    let report = tree::cosimplicial_row_check(&y, &z, a.q, a.j_max).map_err(invalid)?;
    let row = tree::cosimplicial_row(&y, &z, a.q, a.j_max).map_err(invalid)?;
    let complex = row.complex().map_err(internal)?;
    let products = (0..a.j_max)
        .map(|j| ProductCheck {
            name: format!("fold∘d^{j}"),
            factors: vec![row.folds[j + 1].clone(), row.diffs[j].clone()],
            expected: if j % 2 == 0 { RationalMatrix::zeros(row.folds[j].rows(), row.folds[j].cols()) } else { row.folds[j].clone() },
        })
        .collect();
    let text = report.cohomology.iter().enumerate().map(|(j, h)| (format!("H^{j}"), h.to_string())).collect();
    Ok(Report {
        result: to_value(&report),
        certificate: certificate(report.ok, fields(json!({ "alternation": report.alternation, "cosimplicial_identities": report.cosimplicial_identities }))),
        dump: Dump::Complexes { complexes: vec![ComplexDump::new("alternating-sum", &complex)?], products },
        text,
    })
}

/// Strictly upper-triangular `n x n` matrix from `(i, j, c)` entries.
fn upper(n: usize, entries: &[(usize, usize, Q)]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(n, n);
    for (i, j, c) in entries {
        m.set(*i, *j, c.clone());
    }
    m
}

/// Powerful nilpotent configurations: the Heisenberg lattice in 3x3 and the
/// standard filiform lattice in 4x4, both scaled by `p^κ`.
pub fn powerful_examples(p: u64) -> Vec<(String, RationalMatrix, RationalMatrix, Vec<RationalMatrix>)> {
    let s = num_traits::pow(q(p as i64), arith::kappa(p) as usize);
    let e = |n: usize, i: usize, j: usize| upper(n, &[(i, j, s.clone())]);
    let heis = vec![e(3, 0, 1), e(3, 1, 2), e(3, 0, 2)];
    let x3 = e(3, 0, 1).scale(&q(2)).add(&e(3, 0, 2));
    let y3 = e(3, 1, 2).scale(&q(-1)).add(&e(3, 0, 1));
    let filiform = vec![e(4, 0, 1), e(4, 1, 2), e(4, 2, 3), e(4, 0, 2), e(4, 1, 3), e(4, 0, 3)];
    let x4 = e(4, 0, 1).add(&e(4, 2, 3)).add(&e(4, 1, 3).scale(&q(3)));
    let y4 = e(4, 1, 2).add(&e(4, 0, 2).scale(&q(-2))).add(&e(4, 2, 3).scale(&q(5)));
    vec![("heisenberg".into(), x3, y3, heis), ("upper-4".into(), x4, y4, filiform)]
}

fn bch_verify(a: &BchArgs) -> Res<Report> {
    let primes: Vec<u64> = parse_list(&a.primes, "--primes")?;
    let phi = bch::bch_series(a.degree).map_err(invalid)?;
    let low = [("X", q(1)), ("Y", q(1)), ("XY", crate::rational::qf(1, 2)), ("YX", crate::rational::qf(-1, 2))];
    let low_ok = low.iter().all(|(w, c)| phi.coefficient(w) == *c) && phi.homogeneous(1).terms().len() == 2 && phi.homogeneous(2).terms().len() == 2;
    let mut scans = Vec::new();
    let mut ok = low_ok;
    for &p in &primes {
        for (name, x, y, lattice) in powerful_examples(p) {
            let r = bch::nilpotent_valuation_scan(&x, &y, &lattice, p, a.degree).map_err(invalid)?;
            ok &= r.is_ok();
            scans.push(json!({ "p": p, "example": name, "report": r, "ok": r.is_ok() }));
        }
    }
    Ok(Report {
        result: json!({ "series": phi.to_json(), "valuation_scans": scans }),
        certificate: certificate(ok, fields(json!({ "low_degree_components": low_ok }))),
        dump: Dump::Recompute,
        text: vec![("degree".into(), a.degree.to_string()), ("words".into(), phi.terms().len().to_string())],
    })
}

fn poly_json(f: &GaussPolynomial) -> Value {
    json!({ "nvars": f.nvars(), "terms": f.terms().iter().map(|(e, c)| json!([e, format_q(c)])).collect::<Vec<_>>() })
}

#[derive(Deserialize)]
struct PolyInput {
    nvars: usize,
    terms: Vec<(Vec<u32>, String)>,
}

fn group_law(a: &GroupLawArgs, inputs: &Inputs) -> Res<Report> {
    let g = match &a.lie {
        Some(path) => parse_input::<LieJson>(inputs.load("lie", path)?, "lie")?.into_algebra().map_err(invalid)?,
        None => {
            let s = parse_rational(&a.scale, "--scale")?;
            let g = builtin_lie(&a.builtin)?;
            g.change_basis(&RationalMatrix::scalar(g.dim(), &s)).map_err(invalid)?
        }
    };
    let law = bch::group_law_polynomials(&g, a.p, a.degree).map_err(invalid)?;
    Ok(Report {
        result: json!({
            "dim": g.dim(),
            "variables": (0..g.dim()).map(|i| format!("a{i}")).chain((0..g.dim()).map(|i| format!("b{i}"))).collect::<Vec<_>>(),
            "polynomials": law.polynomials.iter().map(poly_json).collect::<Vec<_>>(),
        }),
        certificate: certificate(law.is_ok(), fields(json!({ "associative": law.associative, "valuation_violations": law.valuation_violations }))),
        dump: Dump::Recompute,
        text: vec![("associative".into(), law.associative.to_string()), ("valuation violations".into(), law.valuation_violations.len().to_string())],
    })
}

fn parse_int_matrix(s: &str) -> Res<IntMatrix> {
    let rows: Vec<Vec<i64>> = s.split(';').map(|r| parse_list(r, "--alpha")).collect::<Res<_>>()?;
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(invalid("--alpha rows have different lengths"));
    }
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(IntMatrix::from_i64(&refs))
}

fn norms(a: &NormsArgs, inputs: &Inputs) -> Res<Report> {
    if !arith::is_prime(a.p) {
        return Err(invalid(format!("{} is not prime", a.p)));
    }
    let p = a.p;
    let mut result = serde_json::Map::new();
    let mut cert = serde_json::Map::new();
    let mut text = Vec::new();
    let mut ok = true;
    if let Some(path) = &a.poly {
        let pi: PolyInput = parse_input(inputs.load("poly", path)?, "poly")?;
        if pi.terms.iter().any(|(e, _)| e.len() != pi.nvars) {
            return Err(invalid("poly: exponent length differs from nvars"));
        }
        let terms = pi.terms.iter().map(|(e, c)| Ok((e.clone(), parse_rational(c, "poly")?))).collect::<Res<Vec<_>>>()?;
        let f = GaussPolynomial::from_terms(pi.nvars, terms);
        let rho = PExponent::new(p, parse_rational(&a.rho, "--rho")?);
        let n = bch::gauss_norm(&f, &rho, p);
        text.push(("gauss norm".into(), n.to_string()));
        result.insert("gauss_norm".into(), to_value(&n));
    }
    if let Some(alpha) = &a.alpha {
        let alpha = parse_int_matrix(alpha)?;
        let mono: Vec<u32> = parse_list(a.monomial.as_deref().ok_or_else(|| invalid("--alpha needs --monomial"))?, "--monomial")?;
        let rho = PExponent::new(p, parse_rational(&a.rho, "--rho")?);
        let r = bch::lattice_contraction_check(&alpha, &mono, &rho).map_err(invalid)?;
        ok &= r.holds && r.structured_match != Some(false);
        cert.insert("contraction".into(), json!(r.holds));
        text.push(("contraction".into(), r.holds.to_string()));
        result.insert("contraction".into(), to_value(&r));
    }
    if let Some(nu) = &a.nu {
        let nus = nu
            .split(',')
            .map(|s| PadicApprox::from_rational(&parse_rational(s, "--nu")?, a.precision, p).map_err(invalid))
            .collect::<Res<Vec<_>>>()?;
        let r = PExponent::new(p, parse_rational(&a.r, "--r")?);
        let ex = bch::dr_norm_and_expansion(&nus, &r, p, a.degree).map_err(invalid)?;
        ok &= ex.holds;
        cert.insert("dr_norm_within_bound".into(), json!(ex.holds));
        text.push(("D_r norm".into(), ex.norm.to_string()));
        text.push(("bound r^kappa".into(), ex.bound.to_string()));
        result.insert("dr_expansion".into(), to_value(&ex));
    }
    if result.is_empty() {
        return Err(invalid("give at least one of --poly, --alpha, --nu"));
    }
    Ok(Report { result: Value::Object(result), certificate: certificate(ok, cert), dump: Dump::Recompute, text })
}

fn radius(a: &RadiusArgs) -> Res<Report> {
    let r = PExponent::new(a.p, parse_rational(&a.r, "--r")?);
    let params = arith::radius_params(&r, a.p, a.e, a.q).map_err(invalid)?;
    let v = to_value(&params);
    let text = fields(v.clone()).into_iter().map(|(k, v)| (k, v.to_string())).collect();
    Ok(Report { result: v, certificate: certificate(true, serde_json::Map::new()), dump: Dump::Recompute, text })
}

fn ext_crossed(a: &ExtCrossedArgs) -> Res<Report> {
    let suite = groupalg::crossed_suite();
    let chosen: Vec<&groupalg::CrossedCase> = if a.cases.is_empty() {
        suite.iter().filter(|c| a.heavy || !c.heavy()).collect()
    } else {
        a.cases
            .iter()
            .map(|name| suite.iter().find(|c| &c.name == name).ok_or_else(|| invalid(format!("unknown case {name:?}"))))
            .collect::<Res<_>>()?
    };
    let rows: Vec<(String, groupalg::CrossedExtReport)> = {
        use rayon::prelude::*;
        chosen
            .par_iter()
            .map(|c| {
                groupalg::crossed_ext_compare(&c.algebra, &c.action, &c.module_a, &c.module_q, a.n_max)
                    .map(|r| (c.name.clone(), r))
                    .map_err(internal)
            })
            .collect::<Res<_>>()?
    };
    let ok = rows.iter().all(|(_, r)| r.equal);
    let text = rows.iter().map(|(n, r)| (n.clone(), format!("{:?} vs {:?}", r.crossed, r.invariant))).collect();
    Ok(Report {
        result: Value::Array(rows.iter().map(|(n, r)| json!({ "case": n, "report": r })).collect()),
        certificate: certificate(ok, fields(json!({ "cases": rows.len() }))),
        dump: Dump::Recompute,
        text,
    })
}

fn execute(cmd: &Command, inputs: &Inputs) -> Res<Report> {
    match cmd {
        Command::CeHomology(a) => ce_homology(a, inputs),
        Command::WallDemo(a) => wall_demo_job(a),
        Command::WallBuild(a) => wall_build(a, inputs),
        Command::TreeSs(a) => tree_ss(a, inputs),
        Command::PushoutCheck(a) => pushout_check(a),
        Command::CosimplicialCheck(a) => cosimplicial_check(a),
        Command::BchVerify(a) => bch_verify(a),
        Command::GroupLaw(a) => group_law(a, inputs),
        Command::Norms(a) => norms(a, inputs),
        Command::Radius(a) => radius(a),
        Command::ExtCrossed(a) => ext_crossed(a),
        Command::VerifyReplay(_) => Err(internal("verify-replay is not a job")),
    }
}

fn digest_of(kind: &Value, job: &Value, result: &Value, certificate: &Value, dump: &Value) -> String {
    let body = json!({ "kind": kind, "job": job, "result": result, "certificate": certificate, "dump": dump });
    hex::encode(Sha256::digest(serde_json::to_string(&body).expect("serializable").as_bytes()))
}

/// Runs one job and assembles its document. The certificate verdict is
/// returned alongside so callers can choose the exit code.
pub fn document(cmd: &Command) -> Res<(Value, bool, Vec<(String, String)>)> {
    let inputs = Inputs::Files(RefCell::new(BTreeMap::new()));
    let report = execute(cmd, &inputs)?;
    let kind = json!(cmd.kind());
    let job = json!({ "options": to_value(cmd), "inputs": inputs.recorded() });
    let dump = to_value(&report.dump);
    let ok = report.certificate["ok"] == json!(true);
    let digest = digest_of(&kind, &job, &report.result, &report.certificate, &dump);
    let doc = json!({
        "schema": SCHEMA,
        "kind": kind,
        "job": job,
        "result": report.result,
        "certificate": report.certificate,
        "dump": dump,
        "digest": digest,
    });
    Ok((doc, ok, report.text))
}

/// Re-checks a document: digest, stored matrices, and for matrix-free
/// results a re-run from the recorded job.
pub fn verify_document(text: &str) -> Res<Value> {
    if text.trim().is_empty() {
        return Err(invalid("empty dump"));
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| invalid(format!("not JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| invalid("dump is not an object"))?;
    if obj.is_empty() {
        return Err(invalid("empty dump"));
    }
    match obj.get("schema") {
        Some(Value::String(s)) if s == SCHEMA => {}
        Some(other) => return Err(invalid(format!("unsupported schema {other}"))),
        None => return Err(invalid("missing schema tag")),
    }
    let get = |k: &str| obj.get(k).cloned().ok_or_else(|| invalid(format!("missing field {k:?}")));
    let (kind, job, result, cert, dump_v, digest) = (get("kind")?, get("job")?, get("result")?, get("certificate")?, get("dump")?, get("digest")?);
    let mut checked = vec![];
    let cert_fail = |m: String| CliError::Certificate(m);

    if Value::String(digest_of(&kind, &job, &result, &cert, &dump_v)) != digest {
        return Err(cert_fail("digest mismatch".into()));
    }
    checked.push("digest");
    if cert.get("ok") != Some(&json!(true)) {
        return Err(cert_fail("stored certificate is not ok".into()));
    }
    let dump: Dump = serde_json::from_value(dump_v.clone()).map_err(|e| cert_fail(format!("dump: {e}")))?;
    match &dump {
        Dump::Complexes { complexes, products } => {
            for c in complexes {
                c.check().map_err(cert_fail)?;
            }
            for p in products {
                p.check().map_err(cert_fail)?;
            }
            checked.push("complexes");
        }
        Dump::Wall { walls } => {
            for d in walls {
                let w = WallAssembly::from_dump(d).map_err(|e| cert_fail(e.to_string()))?;
                let c = w.certify().map_err(|e| cert_fail(e.to_string()))?;
                if c != d.certificate || !c.is_ok() {
                    return Err(cert_fail("wall certificate does not replay".into()));
                }
            }
            checked.push("walls");
        }
        Dump::Recompute => {}
    }
    // Dumped data is checked on its own terms above; the result and
    // certificate are tied to the job by running it again.
    let cmd: Command = serde_json::from_value(job["options"].clone()).map_err(|e| invalid(format!("job: {e}")))?;
    let inputs: BTreeMap<String, Value> = serde_json::from_value(job["inputs"].clone()).map_err(|e| invalid(format!("job inputs: {e}")))?;
    let again = execute(&cmd, &Inputs::Embedded(inputs))?;
    if again.result != result || again.certificate != cert {
        return Err(cert_fail("recomputed result differs".into()));
    }
    if serde_json::to_value(&again.dump).ok().as_ref() != Some(&dump_v) {
        return Err(cert_fail("recomputed dump differs".into()));
    }
    checked.push("recompute");
    Ok(json!({ "schema": SCHEMA, "kind": "verify-replay", "replayed": kind, "checked": checked, "ok": true }))
}

fn aligned(rows: &[(String, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // Fails harmlessly if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let msg = e.render().to_string();
            return if code == 0 { Outcome { code, stdout: msg, stderr: String::new() } } else { Outcome { code, stdout: String::new(), stderr: msg } };
        }
    };
    configure_threads();
    let emit = |doc: &Value, text: Option<String>| -> Res<String> {
        let body = serde_json::to_string_pretty(doc).map_err(internal)? + "\n";
        match &cli.out {
            Some(path) => {
                std::fs::write(path, &body).map_err(|e| internal(format!("{}: {e}", path.display())))?;
                Ok(text.unwrap_or_default())
            }
            None => Ok(text.unwrap_or(body)),
        }
    };
    let outcome = match &cli.command {
        Command::VerifyReplay(a) => std::fs::read_to_string(&a.dump)
            .map_err(|e| invalid(format!("{}: {e}", a.dump.display())))
            .and_then(|t| verify_document(&t))
            .and_then(|v| {
                let text = cli.text.then(|| aligned(&[("replay".into(), "ok".into())]));
                emit(&v, text).map(|s| (s, true))
            }),
        cmd => document(cmd).and_then(|(doc, ok, rows)| {
            let text = cli.text.then(|| aligned(&rows));
            emit(&doc, text).map(|s| (s, ok))
        }),
    };
    match outcome {
        Ok((stdout, true)) => Outcome { code: 0, stdout, stderr: String::new() },
        Ok((stdout, false)) => Outcome { code: 2, stdout, stderr: "certificate failed\n".into() },
        Err(e) => Outcome { code: e.code(), stdout: String::new(), stderr: format!("error: {}\n", e.message()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok_json(args: &[&str]) -> Value {
        let o = run(std::iter::once("wallforge").chain(args.iter().copied()));
        assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
        serde_json::from_str(&o.stdout).unwrap()
    }

    #[test]
    fn radius_example() {
        let v = ok_json(&["radius", "--p", "3", "--r", "-1/4", "--e", "1", "--q", "3"]);
        assert_eq!(v["result"], json!({"h": 1, "ell": 1, "in_sR": true, "m": 1}));
        assert_eq!(v["schema"], json!(SCHEMA));
    }

    #[test]
    fn ce_builtin() {
        let v = ok_json(&["ce-homology", "--builtin", "sl2"]);
        assert_eq!(v["result"]["betti"], json!([1, 0, 0, 1]));
        assert_eq!(verify_document(&v.to_string()).unwrap()["ok"], json!(true));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["wallforge", "radius", "--p", "4", "--r", "-1/4", "--q", "4"]).code, 1);
        assert_eq!(run(["wallforge", "bogus"]).code, 1);
        assert_eq!(verify_document("").unwrap_err().code(), 1);
        assert_eq!(verify_document("{}").unwrap_err().code(), 1);
        let out = run(["wallforge", "cosimplicial-check", "--z", "1,2"]);
        assert_eq!(out.code, 1, "non-convex Z is refused");
    }

    #[test]
    fn tampering_is_caught() {
        let mut v = ok_json(&["pushout-check", "--p", "2", "--radius", "1", "--copies", "2"]);
        assert_eq!(v["result"]["betti"], json!([1, 0]));
        v["dump"]["complexes"][0]["diffs"][0]["entries"][0][2] = json!("7");
        assert_eq!(verify_document(&v.to_string()).unwrap_err().code(), 2);
    }
}
