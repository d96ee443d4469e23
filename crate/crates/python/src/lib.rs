//! Python bindings. Items and positions are 1-based on the Python side.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use gmssc::baselines;
use gmssc::costs;
use gmssc::harness::{self, ExperimentConfig};
use gmssc::model;
use gmssc::opgd::{self, OnlineConfig, StepRule};
use gmssc::projection::{self, ProjectionConfig};
use gmssc::rounding::{self, BlockSolver, RoundingParams};
use gmssc::sampling::derive_rng;
use gmssc::subgradient;

fn to_py(e: gmssc::Error) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Permutation", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPermutation {
    inner: model::Permutation,
}

#[pymethods]
impl PyPermutation {
    #[new]
    fn new(order: Vec<usize>) -> PyResult<Self> {
        Ok(PyPermutation {
            inner: model::Permutation::from_one_based(&order).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyPermutation {
            inner: model::Permutation::identity(n),
        }
    }

    #[getter]
    fn order(&self) -> Vec<usize> {
        self.inner.to_one_based()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn access_cost(&self, request: &PyRequest) -> PyResult<usize> {
        model::access_cost(&self.inner, &request.inner).map_err(to_py)
    }

    fn to_matrix(&self) -> PyDSMatrix {
        PyDSMatrix {
            inner: model::perm_to_matrix(&self.inner),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Permutation({:?})", self.inner.to_one_based())
    }
}

#[pyclass(name = "Request", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyRequest {
    inner: model::Request,
}

#[pymethods]
impl PyRequest {
    #[new]
    #[pyo3(signature = (items, k = 1))]
    fn new(items: Vec<usize>, k: usize) -> PyResult<Self> {
        Ok(PyRequest {
            inner: model::Request::from_one_based(&items, k).map_err(to_py)?,
        })
    }

    #[getter]
    fn items(&self) -> Vec<usize> {
        self.inner.items().iter().map(|e| e + 1).collect()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.demand()
    }

    fn __repr__(&self) -> String {
        format!("Request(items={:?}, k={})", self.items(), self.inner.demand())
    }
}

#[pyclass(name = "DSMatrix", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDSMatrix {
    inner: model::DSMatrix,
}

#[pymethods]
impl PyDSMatrix {
    /// Rows are items, columns positions.
    #[new]
    #[pyo3(signature = (rows, tolerance = model::DEFAULT_TOLERANCE))]
    fn new(rows: Vec<Vec<f64>>, tolerance: f64) -> PyResult<Self> {
        let m = model::SquareMatrix::from_rows(&rows).map_err(to_py)?;
        Ok(PyDSMatrix {
            inner: model::DSMatrix::new(m, tolerance).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn uniform(n: usize) -> Self {
        PyDSMatrix {
            inner: model::DSMatrix::uniform(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.matrix().to_rows()
    }

    /// Entry for 1-based item and position.
    fn get(&self, item: usize, position: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if item == 0 || position == 0 || item > n || position > n {
            return Err(PyValueError::new_err(format!("index outside 1..={n}")));
        }
        Ok(self.inner.get(item - 1, position - 1))
    }

    fn __repr__(&self) -> String {
        format!("DSMatrix({:?})", self.inner.matrix().to_rows())
    }
}

fn parse_requests(n: usize, requests: Vec<(Vec<usize>, usize)>) -> PyResult<model::Instance> {
    let reqs = requests
        .into_iter()
        .map(|(items, k)| model::Request::from_one_based(&items, k))
        .collect::<gmssc::Result<Vec<_>>>()
        .map_err(to_py)?;
    model::Instance::new(n, reqs).map_err(to_py)
}

#[pyfunction]
fn access_cost_matrix_form(a: &PyDSMatrix, request: &PyRequest) -> PyResult<f64> {
    model::access_cost_matrix_form(&a.inner, &request.inner).map_err(to_py)
}

/// SW cost; the closed form is used for unit demand.
#[pyfunction]
fn sw_cost(a: &PyDSMatrix, request: &PyRequest) -> PyResult<f64> {
    if request.inner.demand() == 1 {
        costs::sw_cost_closed(&a.inner, &request.inner).map_err(to_py)
    } else {
        Ok(costs::sw_cost(&a.inner, &request.inner).map_err(to_py)?.value)
    }
}

#[pyfunction]
#[pyo3(signature = (a, request, epsilon = costs::DEFAULT_EPSILON))]
fn fac_value(a: &PyDSMatrix, request: &PyRequest, epsilon: f64) -> PyResult<f64> {
    Ok(costs::fac_value(&a.inner, &request.inner, epsilon).map_err(to_py)?.value)
}

#[pyfunction]
fn sw_subgradient(a: &PyDSMatrix, request: &PyRequest) -> PyResult<Vec<Vec<f64>>> {
    Ok(subgradient::sw_subgradient_k1(&a.inner, &request.inner)
        .map_err(to_py)?
        .matrix()
        .to_rows())
}

#[pyfunction]
#[pyo3(signature = (rows, tol = 1e-9, max_iters = 100_000))]
fn project_birkhoff(rows: Vec<Vec<f64>>, tol: f64, max_iters: usize) -> PyResult<PyDSMatrix> {
    let m = model::SquareMatrix::from_rows(&rows).map_err(to_py)?;
    let p = projection::project_birkhoff(&m, &ProjectionConfig { tol, max_iters }).map_err(to_py)?;
    Ok(PyDSMatrix { inner: p.matrix })
}

#[pyfunction]
#[pyo3(signature = (a, r, solver = "exact", alpha = 0.25))]
fn round_deterministic(a: &PyDSMatrix, r: usize, solver: &str, alpha: f64) -> PyResult<PyPermutation> {
    let solver = match solver {
        "exact" => BlockSolver::exact(r),
        "fptas" => BlockSolver::fptas(r, alpha),
        "heuristic" => BlockSolver::heuristic(r),
        other => return Err(PyValueError::new_err(format!("unknown solver {other:?}"))),
    };
    Ok(PyPermutation {
        inner: rounding::round_deterministic(&a.inner, &solver).map_err(to_py)?,
    })
}

fn scheme(name: &str) -> PyResult<RoundingParams> {
    match name {
        "mssc" => Ok(RoundingParams::mssc()),
        "gmssc" => Ok(RoundingParams::gmssc()),
        other => Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    }
}

#[pyfunction]
#[pyo3(signature = (a, scheme_name = "mssc", seed = 0))]
fn round_randomized(a: &PyDSMatrix, scheme_name: &str, seed: u64) -> PyResult<PyPermutation> {
    let params = scheme(scheme_name)?;
    let mut rng = derive_rng(seed, 0);
    Ok(PyPermutation {
        inner: rounding::round_randomized(&a.inner, &params, &mut rng),
    })
}

#[pyfunction]
#[pyo3(signature = (a, request, samples, scheme_name = "mssc", seed = 0))]
fn expected_cost_estimate(
    a: &PyDSMatrix,
    request: &PyRequest,
    samples: usize,
    scheme_name: &str,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let params = scheme(scheme_name)?;
    let mut rng = derive_rng(seed, 0);
    rounding::expected_cost_estimate(&a.inner, &params, &request.inner, samples, &mut rng).map_err(to_py)
}

/// `requests` is a list of `(items, k)` pairs.
#[pyfunction]
fn flt_greedy(n: usize, requests: Vec<(Vec<usize>, usize)>) -> PyResult<PyPermutation> {
    let inst = parse_requests(n, requests)?;
    Ok(PyPermutation {
        inner: baselines::flt_greedy(&inst).map_err(to_py)?,
    })
}

#[pyfunction]
fn brute_force_opt(n: usize, requests: Vec<(Vec<usize>, usize)>) -> PyResult<(PyPermutation, usize)> {
    let inst = parse_requests(n, requests)?;
    let (pi, cost) = baselines::brute_force_opt(&inst).map_err(to_py)?;
    Ok((PyPermutation { inner: pi }, cost))
}

#[pyfunction]
#[pyo3(signature = (n, anchors, extra, rounds, seed = 0))]
fn generate_anchored(
    n: usize,
    anchors: Vec<usize>,
    extra: usize,
    rounds: usize,
    seed: u64,
) -> PyResult<Vec<(Vec<usize>, usize)>> {
    let inst = harness::generate_anchored(n, &anchors, extra, rounds, seed).map_err(to_py)?;
    Ok(inst
        .requests()
        .iter()
        .map(|r| (r.items().iter().map(|e| e + 1).collect(), r.demand()))
        .collect())
}

/// Runs a TOML experiment config and returns the results as CSV text.
#[pyfunction]
fn run_experiment(config_toml: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml(config_toml).map_err(to_py)?;
    let table = harness::run_experiment(&cfg).map_err(to_py)?;
    String::from_utf8(harness::table::csv_bytes(&table)).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Online projected gradient descent driven one unit-demand request at a time.
#[pyclass(name = "OnlineLearner")]
struct PyOnlineLearner {
    state: Option<opgd::OPGDState>,
    projection: ProjectionConfig,
}

#[pymethods]
impl PyOnlineLearner {
    /// `step` is "theory" or "sw-scaled"; the latter needs `max_request`.
    #[new]
    #[pyo3(signature = (n, epsilon = costs::DEFAULT_EPSILON, step = "theory", max_request = 1))]
    fn new(n: usize, epsilon: f64, step: &str, max_request: usize) -> PyResult<Self> {
        let mut state = opgd::opgd_init(n, epsilon).map_err(to_py)?;
        state.step_rule = match step {
            "theory" => StepRule::Theory,
            "sw-scaled" => StepRule::sw_scaled(n, max_request),
            other => return Err(PyValueError::new_err(format!("unknown step rule {other:?}"))),
        };
        Ok(PyOnlineLearner {
            state: Some(state),
            projection: OnlineConfig::default().projection,
        })
    }

    /// Index of the next round, starting at 1.
    #[getter]
    fn t(&self) -> usize {
        self.state.as_ref().map_or(0, |s| s.t)
    }

    fn matrix(&self) -> PyDSMatrix {
        PyDSMatrix {
            inner: self.state.as_ref().expect("state is always restored").a.clone(),
        }
    }

    /// Charges the current matrix for `request`, then takes a step.
    /// Returns the relaxed cost paid.
    fn observe(&mut self, request: &PyRequest) -> PyResult<f64> {
        let state = self.state.take().expect("state is always restored");
        let cost = costs::sw_cost_closed(&state.a, &request.inner);
        let g = subgradient::sw_subgradient_k1(&state.a, &request.inner);
        let (cost, g) = match (cost, g) {
            (Ok(c), Ok(g)) => (c, g),
            (Err(e), _) | (_, Err(e)) => {
                self.state = Some(state);
                return Err(to_py(e));
            }
        };
        let fallback = state.clone();
        match opgd::opgd_step(state, &g, &self.projection) {
            Ok(next) => {
                self.state = Some(next);
                Ok(cost)
            }
            Err(e) => {
                self.state = Some(fallback);
                Err(to_py(e))
            }
        }
    }
}

#[pymodule]
fn gmssc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPermutation>()?;
    m.add_class::<PyRequest>()?;
    m.add_class::<PyDSMatrix>()?;
    m.add_class::<PyOnlineLearner>()?;
    m.add_function(wrap_pyfunction!(access_cost_matrix_form, m)?)?;
    m.add_function(wrap_pyfunction!(sw_cost, m)?)?;
    m.add_function(wrap_pyfunction!(fac_value, m)?)?;
    m.add_function(wrap_pyfunction!(sw_subgradient, m)?)?;
    m.add_function(wrap_pyfunction!(project_birkhoff, m)?)?;
    m.add_function(wrap_pyfunction!(round_deterministic, m)?)?;
    m.add_function(wrap_pyfunction!(round_randomized, m)?)?;
    m.add_function(wrap_pyfunction!(expected_cost_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(flt_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_opt, m)?)?;
    m.add_function(wrap_pyfunction!(generate_anchored, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
