//! Python bindings for `fiberphase`.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`, vectors
//! as flat lists. Input errors raise `ValueError`; numeric-domain failures
//! (for example a path through the south pole) raise `FiberPhaseError`.

use fiberphase::commands::{self, RunError};
use fiberphase::config::{OutputFormat, RunConfig};
use fiberphase::evolution::{self, Handedness};
use fiberphase::geometry::{self, FiberPath, FramePolicy, MomentumTrajectory, OmegaConvention};
use fiberphase::helicity;
use fiberphase::spin_algebra::{self, AngularMomentumRep, ComplexMatrix, ComplexVector};
use fiberphase::{FiberError, Tolerances};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(fiberphase_py, FiberPhaseError, PyException);

type Rows = Vec<Vec<Complex64>>;

fn py_err(e: FiberError) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        FiberPhaseError::new_err(format!("{}: {e}", e.kind()))
    }
}

fn run_err(e: RunError) -> PyErr {
    match e {
        RunError::Config(msg) => PyValueError::new_err(msg),
        RunError::Numeric(e) => py_err(e),
    }
}

fn rows(m: &ComplexMatrix) -> Rows {
    let d = m.dim();
    (0..d).map(|r| (0..d).map(|c| m.get(r, c)).collect()).collect()
}

fn from_rows(m: Rows) -> PyResult<ComplexMatrix> {
    let dim = m.len();
    if m.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let flat: Vec<Complex64> = m.into_iter().flatten().collect();
    ComplexMatrix::from_row_major(dim, &flat).map_err(py_err)
}

fn vector(v: &ComplexVector) -> Vec<Complex64> {
    v.iter().copied().collect()
}

fn rep(j: f64) -> PyResult<AngularMomentumRep> {
    spin_algebra::build_rep(j).map_err(py_err)
}

fn parse_convention(name: &str) -> PyResult<OmegaConvention> {
    match name {
        "geometric" => Ok(OmegaConvention::Geometric),
        "paper" => Ok(OmegaConvention::Paper),
        other => Err(PyValueError::new_err(format!("unknown omega convention {other:?}"))),
    }
}

fn parse_frame(name: &str) -> PyResult<FramePolicy> {
    match name {
        "native" => Ok(FramePolicy::Native),
        "align_initial_tangent" => Ok(FramePolicy::AlignInitialTangent),
        other => Err(PyValueError::new_err(format!("unknown frame policy {other:?}"))),
    }
}

fn parse_hand(name: &str) -> PyResult<Handedness> {
    match name {
        "right" | "+" => Ok(Handedness::Right),
        "left" | "-" => Ok(Handedness::Left),
        other => Err(PyValueError::new_err(format!("handedness must be 'right' or 'left', got {other:?}"))),
    }
}

/// J₁, J₂, J₃, J₊, J₋ for spin j in the basis m = j, j−1, …, −j.
#[pyfunction]
fn spin_matrices<'py>(py: Python<'py>, j: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = rep(j)?;
    let out = PyDict::new(py);
    for (name, m) in [("j1", &r.j1), ("j2", &r.j2), ("j3", &r.j3), ("jplus", &r.jplus), ("jminus", &r.jminus)] {
        out.set_item(name, rows(m))?;
    }
    Ok(out)
}

#[pyfunction]
fn mat_exp(m: Rows) -> PyResult<Rows> {
    let m = from_rows(m)?;
    Ok(rows(&spin_algebra::mat_exp(&m).map_err(py_err)?))
}

/// V = exp(βJ₊ − β*J₋) with β = −(λ/2)e^{−iγ}.
#[pyfunction]
fn build_v(j: f64, lambda: f64, gamma: f64) -> PyResult<Rows> {
    Ok(rows(&spin_algebra::build_v(&rep(j)?, lambda, gamma).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (radius, pitch, convention = "geometric"))]
fn helix_frequency(radius: f64, pitch: f64, convention: &str) -> PyResult<f64> {
    geometry::helix_frequency(radius, pitch, parse_convention(convention)?).map_err(py_err)
}

#[pyfunction]
fn k_vector(lambda: f64, gamma: f64, gamma_dot: f64, k: f64) -> PyResult<[f64; 3]> {
    let v = helicity::k_vector(lambda, gamma, gamma_dot, k).map_err(py_err)?;
    Ok([v.x, v.y, v.z])
}

#[pyfunction]
fn zeta(lambda: f64, gamma_dot: f64, k: f64) -> PyResult<f64> {
    helicity::zeta(lambda, gamma_dot, k).map_err(py_err)
}

/// σ[cosλ − x(1 − cosλ)]/ς with x = γ̇/k.
#[pyfunction]
fn helicity_expectation(lambda: f64, gamma_dot_over_k: f64, sigma: f64) -> PyResult<f64> {
    helicity::helicity_expectation_closed(lambda, gamma_dot_over_k, sigma).map_err(py_err)
}

/// Expectation in the instantaneous k̂·J eigenstate instead of |σ⟩.
#[pyfunction]
fn helicity_expectation_instantaneous(lambda: f64, gamma_dot_over_k: f64, sigma: f64) -> PyResult<f64> {
    helicity::helicity_expectation_instantaneous(lambda, gamma_dot_over_k, sigma).map_err(py_err)
}

/// ⟨ψ|K̂·J|ψ⟩ by direct matrix evaluation.
#[pyfunction]
fn helicity_expectation_matrix(j: f64, state: Vec<Complex64>, k_vec: [f64; 3]) -> PyResult<f64> {
    let r = rep(j)?;
    if state.len() != r.dim() {
        return Err(PyValueError::new_err(format!("state must have {} components", r.dim())));
    }
    let psi = ComplexVector::from_vec(state);
    helicity::helicity_expectation_matrix(&r, &psi, &k_vec.into()).map_err(py_err)
}

/// Sampled momentum direction k̂(t) of light travelling along a fiber.
#[pyclass(frozen, module = "fiberphase_py")]
struct Trajectory {
    inner: MomentumTrajectory,
}

#[pymethods]
impl Trajectory {
    /// Builds a trajectory from a JSON path description (the `path` block of a run config).
    #[staticmethod]
    #[pyo3(signature = (path_json, n_samples = 4096, frame = "native"))]
    fn from_json(path_json: &str, n_samples: usize, frame: &str) -> PyResult<Self> {
        let path: FiberPath = serde_json::from_str(path_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = geometry::trajectory_from_path(&path, n_samples, parse_frame(frame)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (radius, pitch, turns = 1.0, n_samples = 4096, frame = "native"))]
    fn helix(radius: f64, pitch: f64, turns: f64, n_samples: usize, frame: &str) -> PyResult<Self> {
        let path = FiberPath::helix(radius, pitch, turns);
        let inner = geometry::trajectory_from_path(&path, n_samples, parse_frame(frame)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn khat(&self) -> Vec<[f64; 3]> {
        self.inner.khat.iter().map(|k| [k.x, k.y, k.z]).collect()
    }

    #[getter]
    fn lambda_(&self) -> Vec<f64> {
        self.inner.lambda.clone()
    }

    #[getter]
    fn gamma(&self) -> Vec<f64> {
        self.inner.gamma.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Φ(t) = ∫₀ᵗ γ̇(1 − cosλ)dt′.
    fn geometric_phase(&self, t: f64) -> PyResult<f64> {
        evolution::geometric_phase(&self.inner, t).map_err(py_err)
    }

    /// Φ on every grid time.
    fn phase_curve(&self) -> PyResult<Vec<f64>> {
        Ok(evolution::phase_curve(&self.inner, &Tolerances::default()).map_err(py_err)?.phi)
    }

    /// ±Φ(t)/2 for "right" / "left" circular polarization.
    fn vacuum_phase(&self, t: f64, hand: &str) -> PyResult<f64> {
        evolution::vacuum_phase(&self.inner, t, parse_hand(hand)?).map_err(py_err)
    }

    fn dynamical_phase_residual(&self, t: f64) -> PyResult<f64> {
        evolution::dynamical_phase_residual(&self.inner, t).map_err(py_err)
    }

    /// U(t) = V(t)·exp(−iΦJ₃)·V(0)†.
    fn analytic_propagator(&self, j: f64, t: f64) -> PyResult<Rows> {
        Ok(rows(&evolution::analytic_propagator(&rep(j)?, &self.inner, t).map_err(py_err)?))
    }

    /// Time-ordered product of `n_steps` midpoint exponentials.
    fn oracle_propagator(&self, py: Python<'_>, j: f64, t: f64, n_steps: usize) -> PyResult<Rows> {
        let r = rep(j)?;
        let u = py.detach(|| evolution::oracle_propagator(&r, &self.inner, t, n_steps)).map_err(py_err)?;
        Ok(rows(&u))
    }

    /// Evolves Σ C_σ V(0)|σ⟩ to time t; `initial` is a list of (σ, C_σ).
    fn evolve_state(&self, j: f64, initial: Vec<(f64, Complex64)>, t: f64) -> PyResult<Vec<Complex64>> {
        let psi = evolution::evolve_state(&rep(j)?, &self.inner, &initial, t).map_err(py_err)?;
        Ok(vector(&psi))
    }

    fn max_invariant_residual(&self, j: f64, h: f64) -> PyResult<f64> {
        Ok(evolution::max_invariant_residual(&rep(j)?, &self.inner, h))
    }

    fn max_h_v_identity_residual(&self, j: f64, h: f64) -> PyResult<f64> {
        evolution::max_h_v_identity_residual(&rep(j)?, &self.inner, h).map_err(py_err)
    }
}

fn parse_config(config_json: &str) -> PyResult<RunConfig> {
    RunConfig::from_json(config_json).map_err(PyValueError::new_err)
}

fn render(report: &commands::Report, format: OutputFormat) -> Vec<(String, String)> {
    report.tables.iter().map(|(name, t)| (name.clone(), t.render(format))).collect()
}

fn parse_format(name: &str) -> PyResult<OutputFormat> {
    match name {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(PyValueError::new_err(format!("format must be 'csv' or 'json', got {other:?}"))),
    }
}

/// Runs the simulate command on a JSON config and returns the rendered table.
#[pyfunction]
#[pyo3(signature = (config_json, format = "csv"))]
fn simulate(py: Python<'_>, config_json: &str, format: &str) -> PyResult<String> {
    let cfg = parse_config(config_json)?;
    let format = parse_format(format)?;
    let report = py.detach(|| commands::simulate(&cfg)).map_err(run_err)?;
    Ok(render(&report, format).remove(0).1)
}

/// Returns `{"scan": ..., "scan_crossings": ...}` rendered tables.
#[pyfunction]
#[pyo3(signature = (config_json, format = "csv"))]
fn scan<'py>(py: Python<'py>, config_json: &str, format: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(config_json)?;
    let format = parse_format(format)?;
    let report = py.detach(|| commands::scan(&cfg)).map_err(run_err)?;
    let out = PyDict::new(py);
    for (name, text) in render(&report, format) {
        out.set_item(name, text)?;
    }
    Ok(out)
}

/// Runs the verification suite; returns (all_pass, rendered table).
#[pyfunction]
#[pyo3(signature = (config_json, format = "csv"))]
fn verify(py: Python<'_>, config_json: &str, format: &str) -> PyResult<(bool, String)> {
    let cfg = parse_config(config_json)?;
    let format = parse_format(format)?;
    let v = py.detach(|| commands::verify(&cfg)).map_err(run_err)?;
    Ok((v.all_pass, render(&v.report, format).remove(0).1))
}

#[pymodule]
fn fiberphase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FiberPhaseError", m.py().get_type::<FiberPhaseError>())?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(spin_matrices, m)?)?;
    m.add_function(wrap_pyfunction!(mat_exp, m)?)?;
    m.add_function(wrap_pyfunction!(build_v, m)?)?;
    m.add_function(wrap_pyfunction!(helix_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(k_vector, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(helicity_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(helicity_expectation_instantaneous, m)?)?;
    m.add_function(wrap_pyfunction!(helicity_expectation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
