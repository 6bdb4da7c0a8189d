//! Python bindings. Build with `--features extension-module` and import the
//! resulting library as `cvdistill`.

use cvdistill::fock::FockArray;
use cvdistill::networks::{self, ChainSpec, GraphSpec};
use cvdistill::photon::relative_purity;
use cvdistill::{bogoliubov_row, entanglement_increase, thermal_traces, CircuitElement, Error, GaussianState, PhotonOp, Subsystem};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_kind(kind: &str) -> PyResult<PhotonOp> {
    kind.parse::<PhotonOp>().map_err(to_py)
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

/// Gaussian state in the `(x_0..x_{m-1}, p_0..p_{m-1})` layout; vacuum covariance is the identity.
#[pyclass(name = "GaussianState", module = "cvdistill", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGaussianState {
    inner: GaussianState,
}

impl PyGaussianState {
    fn with(&self, elem: PyResult<CircuitElement>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.apply(&[elem?]).map_err(to_py)? })
    }
}

#[pymethods]
impl PyGaussianState {
    #[new]
    fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = GaussianState::new(DVector::from_vec(mean), matrix_from_rows(&cov)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn vacuum(modes: usize) -> Self {
        Self { inner: GaussianState::vacuum(modes) }
    }

    #[staticmethod]
    fn thermal(nu: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: GaussianState::thermal(&nu).map_err(to_py)? })
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean().iter().copied().collect()
    }

    #[getter]
    fn cov(&self) -> Vec<Vec<f64>> {
        matrix_rows(self.inner.cov())
    }

    fn purity(&self) -> PyResult<f64> {
        self.inner.purity().map_err(to_py)
    }

    fn symplectic_spectrum(&self) -> PyResult<Vec<f64>> {
        self.inner.symplectic_spectrum().map_err(to_py)
    }

    fn mean_photon_number(&self, g: usize) -> PyResult<f64> {
        self.inner.mean_photon_number(g).map_err(to_py)
    }

    fn reduce(&self, modes: Vec<usize>) -> PyResult<Self> {
        let sub = Subsystem::new(self.inner.modes(), modes).map_err(to_py)?;
        Ok(Self { inner: self.inner.reduce(&sub).map_err(to_py)? })
    }

    /// Returns `(S, nu)` with `V = S diag(nu, nu) S^T`.
    fn williamson(&self) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
        let d = self.inner.williamson().map_err(to_py)?;
        Ok((matrix_rows(d.symplectic.matrix()), d.nu))
    }

    /// Row `g` of the Bogoliubov map of the Williamson decomposition as `(k, l, alpha_g)`.
    fn bogoliubov_row(&self, g: usize) -> PyResult<(Vec<Complex64>, Vec<Complex64>, Complex64)> {
        let d = self.inner.williamson().map_err(to_py)?;
        let row = bogoliubov_row(&d, g).map_err(to_py)?;
        Ok((row.k, row.l, row.alpha_g))
    }

    fn two_mode_squeeze(&self, i: usize, j: usize, r: f64) -> PyResult<Self> {
        self.with(Ok(CircuitElement::TwoModeSqueezer { i, j, r }))
    }

    fn squeeze(&self, mode: usize, r: f64) -> PyResult<Self> {
        self.with(Ok(CircuitElement::SingleModeSqueezer { mode, r }))
    }

    fn beamsplitter(&self, i: usize, j: usize, theta: f64) -> PyResult<Self> {
        self.with(Ok(CircuitElement::BeamSplitter { i, j, theta }))
    }

    fn cz(&self, i: usize, j: usize, weight: f64) -> PyResult<Self> {
        self.with(Ok(CircuitElement::Cz { i, j, weight }))
    }

    fn displace(&self, mode: usize, alpha: Complex64) -> PyResult<Self> {
        self.with(CircuitElement::displace_mode(mode, alpha, self.inner.modes()).map_err(to_py))
    }

    fn __repr__(&self) -> String {
        format!("GaussianState(modes={})", self.inner.modes())
    }
}

/// Linear chain of `modes` two-mode squeezers with displacement `alpha` on mode `g`
/// (default: the middle mode).
#[pyfunction]
#[pyo3(signature = (modes, r, alpha=Complex64::new(0.0, 0.0), g=None))]
fn chain(modes: usize, r: f64, alpha: Complex64, g: Option<usize>) -> PyResult<PyGaussianState> {
    let mut spec = ChainSpec::new(modes, r, alpha);
    if let Some(g) = g {
        spec.g = g;
    }
    Ok(PyGaussianState { inner: networks::build_chain(&spec).map_err(to_py)? })
}

/// CZ graph state on a `rows x cols` grid from squeezed vacua.
#[pyfunction]
#[pyo3(signature = (rows, cols, squeezing_db, alpha=Complex64::new(0.0, 0.0), g=1))]
fn grid_graph(rows: usize, cols: usize, squeezing_db: f64, alpha: Complex64, g: usize) -> PyResult<PyGaussianState> {
    let spec = GraphSpec { adjacency: networks::grid_adjacency(rows, cols), squeezing_db, g, alpha_g: alpha };
    Ok(PyGaussianState { inner: networks::build_graph(&spec).map_err(to_py)? })
}

/// `(E_before, E_after, delta_E)` of the Renyi-2 entanglement across `subsystem | rest`.
#[pyfunction]
#[pyo3(signature = (state, subsystem, g, kind="subtract"))]
fn entanglement_change(state: &PyGaussianState, subsystem: Vec<usize>, g: usize, kind: &str) -> PyResult<(f64, f64, f64)> {
    let sub = Subsystem::new(state.inner.modes(), subsystem).map_err(to_py)?;
    let ch = entanglement_increase(&state.inner, &sub, g, parse_kind(kind)?).map_err(to_py)?;
    Ok((ch.before, ch.after, ch.delta))
}

/// Purity of the marginal on `subsystem` after the photon operation, relative to before.
#[pyfunction]
#[pyo3(signature = (state, subsystem, g, kind="subtract"))]
fn relative_purity_of(state: &PyGaussianState, subsystem: Vec<usize>, g: usize, kind: &str) -> PyResult<f64> {
    let sub = Subsystem::new(state.inner.modes(), subsystem).map_err(to_py)?;
    relative_purity(&state.inner, &sub, g, parse_kind(kind)?).map_err(to_py)
}

/// The eight thermal traces for a mode with covariance `diag(n, n)`.
#[pyfunction]
fn thermal_trace_values(n: f64) -> PyResult<Vec<f64>> {
    Ok(thermal_traces(n).map_err(to_py)?.values().to_vec())
}

/// Truncated-Fock evaluation of `delta_E` for a chain, independent of the phase-space formulas.
#[pyfunction]
#[pyo3(signature = (modes, r, subsystem, alpha=Complex64::new(0.0, 0.0), kind="subtract", cutoff=20))]
fn fock_chain_delta(
    modes: usize,
    r: f64,
    subsystem: Vec<usize>,
    alpha: Complex64,
    kind: &str,
    cutoff: usize,
) -> PyResult<f64> {
    let spec = ChainSpec::new(modes, r, alpha);
    let elems = networks::chain_elements(&spec).map_err(to_py)?;
    let st = FockArray::from_circuit(modes, cutoff, &elems, cvdistill::fock::DEFAULT_LEAK_TOL).map_err(to_py)?;
    let sub = Subsystem::new(modes, subsystem).map_err(to_py)?;
    let before = st.reduced_purity(&sub).map_err(to_py)?;
    let after = match parse_kind(kind)? {
        PhotonOp::Subtract => st.annihilate(spec.g),
        PhotonOp::Add => st.create(spec.g),
    }
    .and_then(|s| s.normalized())
    .and_then(|s| s.reduced_purity(&sub))
    .map_err(to_py)?;
    Ok(before.ln() - after.ln())
}

#[pymodule]
#[pyo3(name = "cvdistill")]
fn cvdistill_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianState>()?;
    m.add_function(wrap_pyfunction!(chain, m)?)?;
    m.add_function(wrap_pyfunction!(grid_graph, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_change, m)?)?;
    m.add_function(wrap_pyfunction!(relative_purity_of, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_trace_values, m)?)?;
    m.add_function(wrap_pyfunction!(fock_chain_delta, m)?)?;
    Ok(())
}
