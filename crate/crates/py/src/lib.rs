//! Python bindings. Rationals cross the boundary as strings such as
//! `"-3/4"`; Python ints are accepted wherever a rational is expected.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;
use wallforge::arith::{self, PExponent};
use wallforge::bch::{self, GaussPolynomial};
use wallforge::complexes;
use wallforge::groupalg;
use wallforge::lie;
use wallforge::linalg::RationalMatrix;
use wallforge::rational::{format_q, parse_q, Q};
use wallforge::{cli, wall};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(obj: &Bound<'_, PyAny>) -> PyResult<Q> {
    parse_q(obj.str()?.to_str()?).map_err(err)
}

fn matrix(rows: &[Vec<Bound<'_, PyAny>>]) -> PyResult<RationalMatrix> {
    let rows = rows.iter().map(|r| r.iter().map(rat).collect()).collect::<PyResult<Vec<Vec<Q>>>>()?;
    RationalMatrix::from_rows(rows).map_err(err)
}

fn strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| format_q(m.get(i, j))).collect()).collect()
}

/// Serializable values become plain Python dicts and lists.
fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite-dimensional Lie algebra over Q with structure constants.
#[pyclass(name = "LieAlgebra", module = "pywallforge", frozen)]
struct PyLieAlgebra(lie::LieAlgebra);

#[pymethods]
impl PyLieAlgebra {
    #[staticmethod]
    fn sl2() -> Self {
        Self(lie::LieAlgebra::sl2())
    }

    /// `[x, y] = s z`.
    #[staticmethod]
    #[pyo3(signature = (scale = None))]
    fn heisenberg(scale: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        Ok(Self(match scale {
            Some(s) => lie::LieAlgebra::heisenberg_scaled(rat(s)?),
            None => lie::LieAlgebra::heisenberg(),
        }))
    }

    #[staticmethod]
    fn abelian(dim: usize) -> Self {
        Self(lie::LieAlgebra::abelian(dim))
    }

    /// `brackets` lists `(i, j, [(k, c), ...])` for `[e_i, e_j] = Σ c e_k`.
    #[staticmethod]
    fn from_brackets(dim: usize, brackets: Vec<(usize, usize, Vec<(usize, Bound<'_, PyAny>)>)>) -> PyResult<Self> {
        let b = brackets
            .iter()
            .map(|(i, j, terms)| Ok((*i, *j, terms.iter().map(|(k, c)| Ok((*k, rat(c)?))).collect::<PyResult<Vec<_>>>()?)))
            .collect::<PyResult<Vec<_>>>()?;
        lie::LieAlgebra::from_brackets(dim, &b).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn bracket(&self, x: Vec<Bound<'_, PyAny>>, y: Vec<Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
        let (x, y): (Vec<Q>, Vec<Q>) = (x.iter().map(rat).collect::<PyResult<_>>()?, y.iter().map(rat).collect::<PyResult<_>>()?);
        if x.len() != self.0.dim() || y.len() != self.0.dim() {
            return Err(err(format!("vectors must have length {}", self.0.dim())));
        }
        Ok(self.0.bracket(&x, &y).iter().map(format_q).collect())
    }

    /// Chevalley-Eilenberg homology with coefficients in `"trivial"` or
    /// `"adjoint"`, or a module given by one action matrix per basis vector.
    #[pyo3(signature = (module = None, actions = None))]
    fn homology(&self, module: Option<&str>, actions: Option<Vec<Vec<Vec<Bound<'_, PyAny>>>>>) -> PyResult<Vec<usize>> {
        let m = match (module, actions) {
            (_, Some(a)) => {
                let mats = a.iter().map(|m| matrix(m)).collect::<PyResult<Vec<_>>>()?;
                let dim = mats.first().map_or(0, |m| m.rows());
                lie::LieModule::new(dim, mats).map_err(err)?
            }
            (None | Some("trivial"), None) => lie::LieModule::trivial(&self.0, 1),
            (Some("adjoint"), None) => lie::LieModule::adjoint(&self.0),
            (Some(other), None) => return Err(err(format!("unknown module {other:?}"))),
        };
        lie::lie_homology(&self.0, &m).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("LieAlgebra(dim={})", self.0.dim())
    }
}

/// A bounded chain complex of finite-dimensional Q-vector spaces.
#[pyclass(name = "ChainComplex", module = "pywallforge", frozen)]
struct PyChainComplex(complexes::ChainComplex);

#[pymethods]
impl PyChainComplex {
    /// `C_{lo+k}` has dimension `dims[k]`; `diffs[k]` is `d_{lo+k+1}` as a
    /// `dims[k] x dims[k+1]` matrix. Raises unless `d∘d = 0`.
    #[new]
    fn new(lo: i64, dims: Vec<usize>, diffs: Vec<Vec<Vec<Bound<'_, PyAny>>>>) -> PyResult<Self> {
        let diffs = diffs
            .iter()
            .zip(dims.iter().zip(dims.iter().skip(1)))
            .map(|(m, (&r, &c))| if m.is_empty() { Ok(RationalMatrix::zeros(r, c)) } else { matrix(m) })
            .collect::<PyResult<Vec<_>>>()?;
        complexes::ChainComplex::new(lo, dims, diffs).map(Self).map_err(err)
    }

    #[staticmethod]
    fn chevalley_eilenberg(g: &PyLieAlgebra) -> PyResult<Self> {
        lie::ce_complex(&g.0, &lie::LieModule::trivial(&g.0, 1)).map(Self).map_err(err)
    }

    fn betti_numbers(&self) -> PyResult<Vec<usize>> {
        self.0.betti_numbers().map_err(err)
    }

    fn euler_characteristic(&self) -> i64 {
        self.0.euler_characteristic()
    }

    fn dim(&self, n: i64) -> usize {
        self.0.dim(n)
    }

    fn d(&self, n: i64) -> Vec<Vec<String>> {
        strings(&self.0.d(n))
    }
}

/// A finite group by name: `Zn`, `S3`, `D4`, `Q8`, or products such as
/// `Z2xZ2`.
#[pyclass(name = "FiniteGroup", module = "pywallforge", frozen)]
struct PyFiniteGroup(groupalg::FiniteGroup);

#[pymethods]
impl PyFiniteGroup {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        groupalg::named_group(name).map(Self).ok_or_else(|| err(format!("unknown group {name:?}")))
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    /// Dimensions of `Ext^n(E, E)` over the group algebra for `n <= n_max`.
    fn ext_trivial(&self, n_max: usize) -> PyResult<Vec<usize>> {
        let a = groupalg::Algebra::group_algebra(&self.0);
        let e = groupalg::AModule::trivial(&a).map_err(err)?;
        Ok(groupalg::ext_dims(&a, &e, &e, n_max))
    }
}

/// An assembled Wall double complex with its higher maps.
#[pyclass(name = "WallAssembly", module = "pywallforge", frozen)]
struct PyWallAssembly(wall::WallAssembly);

#[pymethods]
impl PyWallAssembly {
    /// The two-periodic demonstration wall over `group` up to `degrees`.
    #[staticmethod]
    fn demo(group: &PyFiniteGroup, degrees: usize) -> PyResult<Self> {
        wall::wall_demo(&group.0, degrees).map(Self).map_err(err)
    }

    /// Resolves the trivial module in each column.
    #[staticmethod]
    fn trivial_module(group: &PyFiniteGroup, degrees: usize) -> PyResult<Self> {
        wall::trivial_module_wall(&group.0, degrees).map(Self).map_err(err)
    }

    #[getter]
    fn top(&self) -> usize {
        self.0.top()
    }

    /// The component `X_{q,j} -> X_{q-k, j+k-1}`.
    fn higher_map(&self, q: i64, j: i64, k: i64) -> PyResult<Vec<Vec<String>>> {
        self.0.get(q, j, k).map(|m| strings(&m)).map_err(err)
    }

    fn total_complex(&self) -> PyResult<PyChainComplex> {
        self.0.total_complex().map(PyChainComplex).map_err(err)
    }

    /// Identity, linearity, `δ² = 0` and quasi-isomorphism checks as a dict.
    fn certify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let c = self.0.certify().map_err(err)?;
        let d = to_py(py, &c)?;
        d.set_item("ok", c.is_ok())?;
        Ok(d)
    }
}

/// `(h, ell, in_sR, m)` for the radius `p^r`.
#[pyfunction]
fn radius_params<'py>(py: Python<'py>, p: u64, r: &Bound<'py, PyAny>, e: u32, q: u64) -> PyResult<Bound<'py, PyAny>> {
    let out = arith::radius_params(&PExponent::new(p, rat(r)?), p, e, q).map_err(err)?;
    to_py(py, &out)
}

/// Exponent of the Gauss norm `|f|_rho = p^x`, or `None` for `f = 0`.
/// `terms` lists `(exponents, coefficient)`.
#[pyfunction]
fn gauss_norm(nvars: usize, terms: Vec<(Vec<u32>, Bound<'_, PyAny>)>, p: u64, rho: &Bound<'_, PyAny>) -> PyResult<Option<String>> {
    let terms = terms.iter().map(|(e, c)| Ok((e.clone(), rat(c)?))).collect::<PyResult<Vec<_>>>()?;
    if terms.iter().any(|(e, _)| e.len() != nvars) {
        return Err(err(format!("every exponent vector needs {nvars} entries")));
    }
    let n = bch::gauss_norm(&GaussPolynomial::from_terms(nvars, terms), &PExponent::new(p, rat(rho)?), p);
    Ok((!n.is_zero).then(|| format_q(&n.exponent)))
}

/// Coefficient of `word` (over the letters `X`, `Y`) in `log(e^X e^Y)`.
#[pyfunction]
fn bch_coefficient(word: &str) -> PyResult<String> {
    if word.is_empty() || !word.chars().all(|c| c == 'X' || c == 'Y') {
        return Err(err("words use the letters X and Y"));
    }
    let series = bch::bch_series(word.len()).map_err(err)?;
    Ok(format_q(&series.coefficient(word)))
}

/// Runs the command-line tool in-process: `run(["ce-homology", "--builtin",
/// "sl2"])` returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let out = cli::run(std::iter::once("wallforge".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn pywallforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLieAlgebra>()?;
    m.add_class::<PyChainComplex>()?;
    m.add_class::<PyFiniteGroup>()?;
    m.add_class::<PyWallAssembly>()?;
    m.add_function(wrap_pyfunction!(radius_params, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_norm, m)?)?;
    m.add_function(wrap_pyfunction!(bch_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("SCHEMA", "wallforge/1")?;
    Ok(())
}
