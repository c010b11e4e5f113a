use std::collections::BTreeMap;
use std::path::PathBuf;

use adastab::diagnostics::{self, ConstantInputs, TrajectoryRecord};
use adastab::experiments::{run_experiment, Experiment, ExperimentConfig};
use adastab::optimizers::{self, AdaGradNormState, RmsPropState};
use adastab::problems;
use adastab::Vector;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: adastab::Error) -> PyErr {
    match e {
        adastab::Error::Io { .. } | adastab::Error::Diverged { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(xs: Vec<f64>) -> PyResult<Vector> {
    Vector::new(xs).map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A built-in objective, looked up by its config id.
#[pyclass(module = "adastab", frozen)]
struct Objective {
    inner: problems::Objective,
}

#[pymethods]
impl Objective {
    #[new]
    #[pyo3(signature = (id, dim))]
    fn new(id: &str, dim: usize) -> PyResult<Self> {
        Ok(Objective {
            inner: problems::Objective::by_id(id, dim, None).map_err(err)?,
        })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz
    }

    #[getter]
    fn g_inf(&self) -> f64 {
        self.inner.g_inf
    }

    fn value(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&vector(theta)?).map_err(err)
    }

    fn grad(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.grad(&vector(theta)?).map_err(err)?.into_inner())
    }
}

/// AdaGrad-Norm iterate `(θ, S, n)`.
#[pyclass(module = "adastab")]
struct AdaGradNorm {
    state: AdaGradNormState,
}

#[pymethods]
impl AdaGradNorm {
    #[new]
    #[pyo3(signature = (theta, alpha0 = 1.0, s0 = 1.0))]
    fn new(theta: Vec<f64>, alpha0: f64, s0: f64) -> PyResult<Self> {
        Ok(AdaGradNorm {
            state: AdaGradNormState::new(vector(theta)?, alpha0, s0).map_err(err)?,
        })
    }

    /// Applies one step with the given stochastic gradient.
    fn step(&mut self, g_hat: Vec<f64>) -> PyResult<()> {
        self.state = optimizers::adagrad_step(&self.state, &vector(g_hat)?).map_err(err)?;
        Ok(())
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.state.theta.as_slice().to_vec()
    }

    #[getter]
    fn s(&self) -> f64 {
        self.state.s
    }

    #[getter]
    fn n(&self) -> u64 {
        self.state.n
    }

    #[getter]
    fn step_size(&self) -> f64 {
        self.state.step_size()
    }
}

/// RMSProp iterate under the `β_n = 1 − 1/n`, `α_n⁽⁰⁾ = 1/√n` schedule.
#[pyclass(module = "adastab")]
struct RmsProp {
    state: RmsPropState,
}

#[pymethods]
impl RmsProp {
    #[new]
    #[pyo3(signature = (theta, beta1 = 0.9, eps = 1e-8, v0 = 1.0))]
    fn new(theta: Vec<f64>, beta1: f64, eps: f64, v0: f64) -> PyResult<Self> {
        Ok(RmsProp {
            state: RmsPropState::new(vector(theta)?, beta1, eps, v0).map_err(err)?,
        })
    }

    fn step(&mut self, g_hat: Vec<f64>) -> PyResult<()> {
        self.state = optimizers::rmsprop_step(&self.state, &vector(g_hat)?).map_err(err)?;
        Ok(())
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.state.theta.as_slice().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.state.v.as_slice().to_vec()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.state.n
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.state.alpha().into_inner()
    }
}

/// Descent-lemma constants as a dict.
#[pyfunction]
#[pyo3(signature = (lipschitz, sigma0, sigma1, alpha0, s0, beta1 = None))]
fn compute_constants<'py>(
    py: Python<'py>,
    lipschitz: f64,
    sigma0: f64,
    sigma1: f64,
    alpha0: f64,
    s0: f64,
    beta1: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let c = diagnostics::compute_constants(&ConstantInputs {
        lipschitz,
        sigma0,
        sigma1,
        alpha0,
        s0,
        beta1,
    })
    .map_err(err)?;
    let text = serde_json::to_string(&c).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

#[pyfunction]
#[pyo3(signature = (ghat1, lipschitz, sigma0, sigma1, alpha0, s0))]
fn compute_m(
    ghat1: f64,
    lipschitz: f64,
    sigma0: f64,
    sigma1: f64,
    alpha0: f64,
    s0: f64,
) -> PyResult<f64> {
    let c = diagnostics::compute_constants(&ConstantInputs {
        lipschitz,
        sigma0,
        sigma1,
        alpha0,
        s0,
        beta1: None,
    })
    .map_err(err)?;
    Ok(diagnostics::compute_m(ghat1, alpha0, s0, &c))
}

type ExcursionTuple = (u64, u64, u64, bool, bool);

/// Excursions of `ghat` (first entry is `ĝ(θ₁)`) as
/// `(tau_start, tau_mid, tau_end, reached_2delta, truncated)` tuples.
#[pyfunction]
fn partition_stopping_times(
    ghat: Vec<f64>,
    delta_tau: f64,
) -> PyResult<Vec<ExcursionTuple>> {
    Ok(diagnostics::partition_stopping_times(&ghat, delta_tau)
        .map_err(err)?
        .into_iter()
        .map(|e| (e.tau_start, e.tau_mid, e.tau_end, e.reached_2delta, e.truncated))
        .collect())
}

/// `(lhs, rhs, residual, pass)` for one accumulator update.
#[pyfunction]
fn check_step_identity(s_prev: f64, sgrad_sq: f64) -> (f64, f64, f64, bool) {
    let s = s_prev + sgrad_sq;
    let (gamma, lambda) = diagnostics::gamma_lambda(sgrad_sq, s_prev, s);
    let row = TrajectoryRecord {
        n: 1,
        g: 0.0,
        grad_norm: 0.0,
        sgrad_norm: sgrad_sq.sqrt(),
        s_prev,
        s,
        zeta: 0.0,
        gamma,
        lambda,
        ghat: 0.0,
        step_norm: 0.0,
        sigma_gamma: 0.0,
        rms: None,
    };
    let c = diagnostics::check_step_identity(&row);
    (c.lhs, c.rhs, c.residual, c.pass)
}

/// Runs a batch from config text; returns the batch summary as a dict.
#[pyfunction]
#[pyo3(signature = (config, out = None, threads = None))]
fn run_batch<'py>(
    py: Python<'py>,
    config: &str,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(config).map_err(err)?;
    let exp = Experiment::prepare(cfg).map_err(err)?;
    let summary = py
        .detach(|| run_experiment(&exp, threads, out.as_deref(), BTreeMap::new()))
        .map_err(err)?;
    let text =
        serde_json::to_string(&summary).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

#[pymodule]
#[pyo3(name = "adastab")]
fn adastab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Objective>()?;
    m.add_class::<AdaGradNorm>()?;
    m.add_class::<RmsProp>()?;
    m.add_function(wrap_pyfunction!(compute_constants, m)?)?;
    m.add_function(wrap_pyfunction!(compute_m, m)?)?;
    m.add_function(wrap_pyfunction!(partition_stopping_times, m)?)?;
    m.add_function(wrap_pyfunction!(check_step_identity, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    Ok(())
}
