//! Python bindings.
//!
//! Matrices cross the boundary as lists of rows (any nested sequence of
//! floats is accepted, including NumPy arrays). Errors raise
//! `lpvlft_py.LpvlftError`, whose message starts with the error category.

use nalgebra::{DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use lpvlft::analysis as an;
use lpvlft::format::{self, FalpvFile, LftFile, ModelFile, PsiRealizationFile};
use lpvlft::model::{self, PsiEvaluator};
use lpvlft::realization as re;
use lpvlft::transform as tr;

create_exception!(lpvlft_py, LpvlftError, PyValueError, "Error raised by the lpvlft core.");

fn err(e: lpvlft::Error) -> PyErr {
    LpvlftError::new_err(format!("[{}] {e}", e.category()))
}

type Rows = Vec<Vec<f64>>;

fn to_matrix(what: &str, rows: &Rows, cols_if_empty: usize) -> PyResult<DMatrix<f64>> {
    let cols = rows.first().map_or(cols_if_empty, |r| r.len());
    format::rows_to_matrix(what, rows, rows.len(), cols).map_err(err)
}

fn rows(m: &DMatrix<f64>) -> Rows {
    format::matrix_to_rows(m)
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

/// FALPV model `X(p) = X_0 + Σ_l X_l psi_l(p)` for `X` in `A, B, C, D`.
#[pyclass(name = "FalpvModel", module = "lpvlft_py", skip_from_py_object)]
#[derive(Clone)]
struct PyFalpv {
    inner: model::FalpvModel,
}

#[pymethods]
impl PyFalpv {
    /// `a`, `b`, `c`, `d` are lists of `n_psi + 1` matrices.
    #[new]
    fn new(n_p: usize, a: Vec<Rows>, b: Vec<Rows>, c: Vec<Rows>, d: Vec<Rows>) -> PyResult<Self> {
        let n_x = a.first().map_or(0, |m| m.len());
        let n_u = b.first().and_then(|m| m.first()).map_or(0, |r| r.len());
        let conv = |what: &str, list: &[Rows], cols: usize| -> PyResult<Vec<DMatrix<f64>>> {
            list.iter().map(|m| to_matrix(what, m, cols)).collect()
        };
        let inner = model::FalpvModel::new(
            n_p,
            conv("A", &a, n_x)?,
            conv("B", &b, n_u)?,
            conv("C", &c, n_x)?,
            conv("D", &d, n_u)?,
        )
        .map_err(err)?;
        Ok(PyFalpv { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match ModelFile::from_json(text).map_err(err)? {
            ModelFile::Falpv(f) => Ok(PyFalpv {
                inner: f.to_model().map_err(err)?,
            }),
            other => Err(LpvlftError::new_err(format!("[input] expected falpv, found {}", other.kind()))),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        ModelFile::Falpv(FalpvFile::from_model(&self.inner, None)).to_json().map_err(err)
    }

    /// `(n_x, n_u, n_y, n_p, n_psi)`.
    #[getter]
    fn dims(&self) -> (usize, usize, usize, usize, usize) {
        let d = self.inner.dims();
        (d.n_x, d.n_u, d.n_y, d.n_p, d.n_psi)
    }

    /// State transform `(T A_l T^{-1}, T B_l, C_l T^{-1}, D_l)`.
    fn similarity(&self, t: Rows) -> PyResult<Self> {
        let t = to_matrix("T", &t, 0)?;
        Ok(PyFalpv {
            inner: self.inner.similarity(&t).map_err(err)?,
        })
    }

    /// Frozen `(A, B, C, D)` for given psi values.
    fn eval_matrices(&self, psi_values: Vec<f64>) -> PyResult<(Rows, Rows, Rows, Rows)> {
        let m = self.inner.eval_matrices(&psi_values).map_err(err)?;
        Ok((rows(&m.a), rows(&m.b), rows(&m.c), rows(&m.d)))
    }

    /// `(reachable dim, observable dim)` of the FALPV model.
    fn minimality(&self) -> (usize, usize) {
        an::falpv_minimality(&self.inner)
    }

    fn __repr__(&self) -> String {
        let d = self.inner.dims();
        format!(
            "FalpvModel(n_x={}, n_u={}, n_y={}, n_p={}, n_psi={})",
            d.n_x, d.n_u, d.n_y, d.n_p, d.n_psi
        )
    }
}

/// Block-structured LFT `D + C Δ (I - A Δ)^{-1} B`.
#[pyclass(name = "LftModel", module = "lpvlft_py", skip_from_py_object)]
#[derive(Clone)]
struct PyLft {
    inner: model::LftModel,
}

#[pymethods]
impl PyLft {
    #[new]
    fn new(blocks: Vec<usize>, a: Rows, b: Rows, c: Rows, d: Rows) -> PyResult<Self> {
        let n: usize = blocks.iter().sum();
        let inputs = d.first().map_or(0, |r| r.len());
        let inner = model::LftModel::new(
            model::BlockStructure::new(blocks).map_err(err)?,
            to_matrix("A", &a, n)?,
            to_matrix("B", &b, inputs)?,
            to_matrix("C", &c, n)?,
            to_matrix("D", &d, inputs)?,
        )
        .map_err(err)?;
        Ok(PyLft { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = match ModelFile::from_json(text).map_err(err)? {
            ModelFile::Lft(f) => f,
            ModelFile::PsiRealization(f) => LftFile::from_model(f.to_model().map_err(err)?.lft(), None),
            other => return Err(LpvlftError::new_err(format!("[input] expected lft, found {}", other.kind()))),
        };
        Ok(PyLft {
            inner: file.to_model().map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        ModelFile::Lft(LftFile::from_model(&self.inner, None)).to_json().map_err(err)
    }

    #[getter]
    fn blocks(&self) -> Vec<usize> {
        self.inner.blocks().dims().to_vec()
    }
    #[getter]
    fn a(&self) -> Rows {
        rows(self.inner.a())
    }
    #[getter]
    fn b(&self) -> Rows {
        rows(self.inner.b())
    }
    #[getter]
    fn c(&self) -> Rows {
        rows(self.inner.c())
    }
    #[getter]
    fn d(&self) -> Rows {
        rows(self.inner.d())
    }

    /// Markov parameter `Y(word)`; letters are 1-based and `[]` gives `D`.
    fn formal_io_map(&self, word: Vec<usize>) -> PyResult<Rows> {
        Ok(rows(&self.inner.formal_io_map(&model::Word::new(word)).map_err(err)?))
    }

    /// Star product with `Δ = diag(p_i I_{n_i})`.
    fn star_at_point(&self, p: Vec<f64>) -> PyResult<Rows> {
        Ok(rows(&self.inner.star_at_point(&p).map_err(err)?))
    }

    fn is_minimal(&self) -> bool {
        re::is_minimal(&self.inner)
    }

    /// `(reachable, observable)` dimensions per block.
    fn minimality(&self) -> (Vec<usize>, Vec<usize>) {
        let r = re::minimality_report(&self.inner);
        (r.reachable, r.observable)
    }

    fn minimize(&self) -> PyResult<PyLft> {
        Ok(PyLft {
            inner: re::minimize_lft(&self.inner).map_err(err)?.lft,
        })
    }

    /// `(margin, P blocks)` of a block-diagonal Lyapunov certificate, or `None`.
    fn check_stability(&self) -> Option<(f64, Vec<Rows>)> {
        re::check_stability(&self.inner).map(|c| (c.margin, c.blocks.iter().map(rows).collect()))
    }

    /// `T_i A_ij T_j^{-1}`, `T_i B_i`, `C_i T_i^{-1}` for per-block `T_i`.
    fn similarity(&self, t: Vec<Rows>) -> PyResult<PyLft> {
        let t: Vec<DMatrix<f64>> = t.iter().map(|m| to_matrix("T", m, 0)).collect::<PyResult<_>>()?;
        Ok(PyLft {
            inner: self.inner.similarity(&t).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "LftModel(blocks={:?}, outputs={}, inputs={})",
            self.inner.blocks().dims(),
            self.inner.outputs(),
            self.inner.inputs()
        )
    }
}

/// Realization `psi(p) = H Δ_p (I - F Δ_p)^{-1} G`.
#[pyclass(name = "PsiRealization", module = "lpvlft_py", skip_from_py_object)]
#[derive(Clone)]
struct PyPsi {
    inner: model::PsiRealization,
}

#[pymethods]
impl PyPsi {
    #[new]
    fn new(blocks: Vec<usize>, f: Rows, g: Rows, h: Rows) -> PyResult<Self> {
        let n: usize = blocks.iter().sum();
        let inner = model::PsiRealization::new(
            model::BlockStructure::new(blocks).map_err(err)?,
            to_matrix("F", &f, n)?,
            to_matrix("G", &g, 1)?,
            to_matrix("H", &h, n)?,
        )
        .map_err(err)?;
        Ok(PyPsi { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match ModelFile::from_json(text).map_err(err)? {
            ModelFile::PsiRealization(f) => Ok(PyPsi {
                inner: f.to_model().map_err(err)?,
            }),
            other => Err(LpvlftError::new_err(format!(
                "[input] expected psi-realization, found {}",
                other.kind()
            ))),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        ModelFile::PsiRealization(PsiRealizationFile::from_model(&self.inner, None))
            .to_json()
            .map_err(err)
    }

    #[getter]
    fn blocks(&self) -> Vec<usize> {
        self.inner.blocks().dims().to_vec()
    }

    #[getter]
    fn lft(&self) -> PyLft {
        PyLft {
            inner: self.inner.lft().clone(),
        }
    }

    fn eval(&self, p: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval(&p).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "PsiRealization(blocks={:?}, n_psi={})",
            self.inner.blocks().dims(),
            self.inner.n_psi()
        )
    }
}

/// Output of the transformation: an LFT whose first block is the delay.
#[pyclass(name = "AssembledLft", module = "lpvlft_py", skip_from_py_object)]
#[derive(Clone)]
struct PyAssembled {
    inner: tr::AssembledLft,
}

#[pymethods]
impl PyAssembled {
    #[getter]
    fn lft(&self) -> PyLft {
        PyLft {
            inner: self.inner.lft().clone(),
        }
    }

    /// The LFT is driven by `p / scheduling_scale`.
    #[getter]
    fn scheduling_scale(&self) -> f64 {
        self.inner.scheduling_scale()
    }

    #[getter]
    fn blocks(&self) -> Vec<usize> {
        self.inner.lft().blocks().dims().to_vec()
    }

    fn to_json(&self) -> PyResult<String> {
        ModelFile::Lft(LftFile::from_assembled(&self.inner, None)).to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match ModelFile::from_json(text).map_err(err)? {
            ModelFile::Lft(f) => Ok(PyAssembled {
                inner: f.to_assembled().map_err(err)?,
            }),
            other => Err(LpvlftError::new_err(format!("[input] expected lft, found {}", other.kind()))),
        }
    }

    /// Closed-loop simulation from `x(0) = 0`; returns a dict with `x`, `y`, `z`.
    fn simulate<'py>(&self, py: Python<'py>, u: Rows, p: Rows) -> PyResult<Bound<'py, PyDict>> {
        let horizon = u.len();
        let u: Vec<DVector<f64>> = u.into_iter().map(DVector::from_vec).collect();
        let run = an::simulate_lft_loop(&self.inner, &u, &p, horizon).map_err(err)?;
        let out = trajectory_dict(py, &run.trajectory)?;
        out.set_item("z", vectors(&run.z))?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "AssembledLft(blocks={:?}, scheduling_scale={})",
            self.inner.lft().blocks().dims(),
            self.inner.scheduling_scale()
        )
    }
}

fn vectors(v: &[DVector<f64>]) -> Rows {
    v.iter().map(|x| x.iter().copied().collect()).collect()
}

fn trajectory_dict<'py>(py: Python<'py>, t: &an::Trajectory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x", vectors(&t.x))?;
    d.set_item("y", vectors(&t.y))?;
    Ok(d)
}

/// Python callable `psi(p) -> sequence of floats`.
struct CallablePsi<'py> {
    f: Bound<'py, PyAny>,
    n_p: usize,
    n_psi: usize,
}

impl PsiEvaluator for CallablePsi<'_> {
    fn n_p(&self) -> usize {
        self.n_p
    }
    fn n_psi(&self) -> usize {
        self.n_psi
    }
    fn eval(&self, p: &[f64]) -> lpvlft::Result<Vec<f64>> {
        let out = self
            .f
            .call1((p.to_vec(),))
            .and_then(|v| v.extract::<Vec<f64>>())
            .map_err(|e| lpvlft::Error::Precondition(format!("psi callable failed: {e}")))?;
        if out.len() != self.n_psi {
            return Err(lpvlft::Error::shape("psi callable output", self.n_psi, out.len()));
        }
        Ok(out)
    }
}

/// Psi source for `transform`: a realization or Taylor data.
fn psi_source(psi: &Bound<'_, PyAny>, order: Option<usize>) -> PyResult<tr::PsiSource> {
    if let Ok(r) = psi.extract::<PyRef<'_, PyPsi>>() {
        return Ok(tr::PsiSource::Realization(r.inner.clone()));
    }
    if let Ok(text) = psi.extract::<String>() {
        return match ModelFile::from_json(&text).map_err(err)? {
            ModelFile::PsiRealization(f) => Ok(tr::PsiSource::Realization(f.to_model().map_err(err)?)),
            ModelFile::PsiTaylor(f) => Ok(tr::PsiSource::Taylor {
                series: f.to_series().map_err(err)?,
                order: order.or(f.order).unwrap_or(f.depth.saturating_sub(1) / 2),
            }),
            other => Err(LpvlftError::new_err(format!("[input] expected a psi file, found {}", other.kind()))),
        };
    }
    Err(LpvlftError::new_err(
        "[input] psi must be a PsiRealization or the JSON text of a psi file",
    ))
}

/// Realize psi from Taylor data. `coefficients` maps words (tuples of 1-based
/// letters) to lists of `n_psi` values. Returns `(realization, scale, margin)`;
/// the realization represents `p ↦ psi(scale · p)`.
#[pyfunction]
#[pyo3(signature = (n_p, n_psi, depth, coefficients, order))]
fn realize_psi(
    n_p: usize,
    n_psi: usize,
    depth: usize,
    coefficients: Vec<(Vec<usize>, Vec<f64>)>,
    order: usize,
) -> PyResult<(PyPsi, f64, f64)> {
    let file = format::PsiTaylorFile {
        description: None,
        n_p,
        n_psi,
        depth,
        order: Some(order),
        coefficients: coefficients
            .into_iter()
            .map(|(word, value)| format::TaylorTerm { word, value })
            .collect(),
        closed_form: None,
    };
    let series = file.to_series().map_err(err)?;
    let r = tr::realize_psi(&tr::PsiSource::Taylor { series, order }).map_err(err)?;
    Ok((PyPsi { inner: r.psi }, r.scale, r.certificate.margin))
}

/// Transform an FALPV model. `psi` is a `PsiRealization` or the JSON text of
/// a psi-realization or psi-taylor file. Returns `(AssembledLft, report)`.
#[pyfunction]
#[pyo3(signature = (falpv, psi, fast_path = false, order = None, seed = 0))]
fn transform<'py>(
    py: Python<'py>,
    falpv: &PyFalpv,
    psi: &Bound<'py, PyAny>,
    fast_path: bool,
    order: Option<usize>,
    seed: u64,
) -> PyResult<(PyAssembled, Bound<'py, PyAny>)> {
    let source = psi_source(psi, order)?;
    let opts = tr::TransformOptions {
        fast_path,
        seed,
        ..tr::TransformOptions::default()
    };
    let out = tr::transform(&falpv.inner, &source, &opts).map_err(err)?;
    let report = serde_json::to_value(&out.report)
        .map_err(|e| LpvlftError::new_err(format!("[input] {e}")))?;
    Ok((PyAssembled { inner: out.assembled }, json_to_py(py, &report)?))
}

/// `(equivalent, counterexample word or None, deviation)`.
#[pyfunction]
#[pyo3(signature = (m1, m2, depth = None))]
fn formal_equivalence(m1: &PyLft, m2: &PyLft, depth: Option<usize>) -> PyResult<(bool, Option<Vec<usize>>, f64)> {
    let r = an::formal_equivalence(&m1.inner, &m2.inner, depth).map_err(err)?;
    Ok((
        r.equivalent(),
        r.counterexample.map(|w| w.letters().to_vec()),
        r.deviation,
    ))
}

/// Per-block similarity `T_i` with `m2 = T m1 T^{-1}`, or `None`.
#[pyfunction]
fn find_structured_isomorphism(m1: &PyLft, m2: &PyLft) -> PyResult<Option<Vec<Rows>>> {
    let t = an::find_structured_isomorphism(&m1.inner, &m2.inner).map_err(err)?;
    Ok(t.map(|t| t.iter().map(rows).collect()))
}

/// Simulate an FALPV model from `x(0) = 0`. `psi` is a `PsiRealization` or a
/// callable `psi(p) -> list`. Returns a dict with `x` and `y`.
#[pyfunction]
fn simulate_falpv<'py>(
    py: Python<'py>,
    falpv: &PyFalpv,
    psi: &Bound<'py, PyAny>,
    u: Rows,
    p: Rows,
) -> PyResult<Bound<'py, PyDict>> {
    let d = falpv.inner.dims();
    let horizon = u.len();
    let u: Vec<DVector<f64>> = u.into_iter().map(DVector::from_vec).collect();
    let traj = if let Ok(r) = psi.extract::<PyRef<'_, PyPsi>>() {
        an::simulate_falpv(&falpv.inner, &r.inner, &u, &p, horizon)
    } else {
        let callable = CallablePsi {
            f: psi.clone(),
            n_p: d.n_p,
            n_psi: d.n_psi,
        };
        an::simulate_falpv(&falpv.inner, &callable, &u, &p, horizon)
    }
    .map_err(err)?;
    trajectory_dict(py, &traj)
}

#[pymodule]
fn lpvlft_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LpvlftError", m.py().get_type::<LpvlftError>())?;
    m.add_class::<PyFalpv>()?;
    m.add_class::<PyLft>()?;
    m.add_class::<PyPsi>()?;
    m.add_class::<PyAssembled>()?;
    m.add_function(wrap_pyfunction!(realize_psi, m)?)?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(formal_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(find_structured_isomorphism, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_falpv, m)?)?;
    Ok(())
}
