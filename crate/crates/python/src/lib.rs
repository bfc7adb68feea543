//! Python bindings for the `bwalk` core library.

use ::bwalk as core;
use core::analytic_fidelity::{maximize_fidelity, search_window, FidelityCurve};
use core::graph_space::{build_basis, stationary_state, Vertex};
use core::reduced_models::{numeric_eigensystem, reduced_matrix};
use core::transfer_protocols::{self, Placement, TransferReport};
use core::walk_operators::{evolve, CoinConfig, CoinFlavor, MarkedScenario};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn curve(name: &str) -> PyResult<FidelityCurve> {
    match name {
        "diff_gg" => Ok(FidelityCurve::DiffGG),
        "diff_gg_lagged" => Ok(FidelityCurve::DiffGGLagged),
        "diff_gi" => Ok(FidelityCurve::DiffGI),
        "same" => Ok(FidelityCurve::Same),
        "lackadaisical" => Ok(FidelityCurve::Lackadaisical),
        _ => Err(PyValueError::new_err(format!(
            "unknown curve {name:?}; expected diff_gg, diff_gg_lagged, diff_gi, same or lackadaisical"
        ))),
    }
}

fn flavor(name: &str) -> PyResult<CoinFlavor> {
    match name {
        "gg" => Ok(CoinFlavor::GG),
        "gi" => Ok(CoinFlavor::GI),
        _ => Err(PyValueError::new_err(format!("unknown flavor {name:?}; expected gg or gi"))),
    }
}

fn scenario(kind: &str, coin: &str) -> PyResult<MarkedScenario> {
    let f = flavor(coin)?;
    match kind {
        "diff" => Ok(MarkedScenario::diff(0, 0, f)),
        "same" => Ok(MarkedScenario::same(0, 1, f)),
        _ => Err(PyValueError::new_err(format!("unknown scenario {kind:?}; expected diff or same"))),
    }
}

fn placement(name: &str) -> PyResult<Placement> {
    name.parse().map_err(value_error)
}

/// Complete bipartite graph K(n1, n2) with optional loop weights.
#[pyclass(name = "BipartiteSpec", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PySpec(core::graph_space::BipartiteSpec);

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (n1, n2, l1 = 0.0, l2 = 0.0))]
    fn new(n1: usize, n2: usize, l1: f64, l2: f64) -> PyResult<Self> {
        core::graph_space::BipartiteSpec::with_loops(n1, n2, l1, l2)
            .map(PySpec)
            .map_err(value_error)
    }

    /// Loop weights l1 = n2/(2 n1), l2 = n1/(2 n2) used by the active switch.
    #[staticmethod]
    fn switch_weights(n1: usize, n2: usize) -> PyResult<Self> {
        core::graph_space::BipartiteSpec::switch_weights(n1, n2)
            .map(PySpec)
            .map_err(value_error)
    }

    #[getter]
    fn n1(&self) -> usize {
        self.0.n1()
    }

    #[getter]
    fn n2(&self) -> usize {
        self.0.n2()
    }

    #[getter]
    fn l1(&self) -> f64 {
        self.0.l1()
    }

    #[getter]
    fn l2(&self) -> f64 {
        self.0.l2()
    }

    /// Number of arcs in the walk's Hilbert space.
    fn dimension(&self) -> PyResult<usize> {
        Ok(build_basis(self.0).map_err(value_error)?.dimension())
    }

    /// ‖Uσ − σ‖ for the stationary state of the unmarked walk.
    fn stationary_residual(&self) -> PyResult<f64> {
        let basis = build_basis(self.0).map_err(value_error)?;
        let sigma = stationary_state(&basis).map_err(value_error)?;
        let image = evolve(&sigma, &CoinConfig::unmarked(basis), 1).map_err(value_error)?;
        image.distance(&sigma).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "BipartiteSpec(n1={}, n2={}, l1={}, l2={})",
            self.0.n1(),
            self.0.n2(),
            self.0.l1(),
            self.0.l2()
        )
    }
}

#[pyclass(name = "TransferReport", frozen, get_all)]
struct PyReport {
    scenario: &'static str,
    steps: usize,
    fidelity: f64,
    continuous_optimum: Option<(f64, f64)>,
    t1: Option<usize>,
    t2: Option<usize>,
    l1: Option<f64>,
    l2: Option<f64>,
    midpoint_sigma_fidelity: Option<f64>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "TransferReport(scenario={:?}, steps={}, fidelity={})",
            self.scenario, self.steps, self.fidelity
        )
    }
}

impl From<TransferReport> for PyReport {
    fn from(r: TransferReport) -> Self {
        PyReport {
            scenario: r.protocol.name(),
            steps: r.steps,
            fidelity: r.fidelity,
            continuous_optimum: r.continuous_optimum,
            t1: r.schedule.map(|s| s.t1),
            t2: r.schedule.map(|s| s.t2),
            l1: r.schedule.map(|s| s.l1),
            l2: r.schedule.map(|s| s.l2),
            midpoint_sigma_fidelity: r.midpoint_sigma_fidelity,
        }
    }
}

/// Closed-form fidelity of `curve` after `steps` (may be fractional).
#[pyfunction]
fn fidelity(curve_name: &str, n1: usize, n2: usize, steps: f64) -> PyResult<f64> {
    curve(curve_name)?.evaluate(n1, n2, steps).map_err(value_error)
}

/// Continuous and integer maxima of a closed form over the default window.
///
/// Returns `(steps, fidelity, integer_steps, integer_fidelity)`.
#[pyfunction]
fn maximize(curve_name: &str, n1: usize, n2: usize) -> PyResult<(f64, f64, usize, f64)> {
    let c = curve(curve_name)?;
    let f = c.bind(n1, n2).map_err(value_error)?;
    let m = maximize_fidelity(f, search_window(n1, n2), c.parity()).map_err(value_error)?;
    Ok((m.steps, m.fidelity, m.integer_steps, m.integer_fidelity))
}

/// Simulated two-marked transfer at the recommended step count.
#[pyfunction]
#[pyo3(signature = (n1, n2, scenario_kind = "diff", coin = "gg"))]
fn transfer(n1: usize, n2: usize, scenario_kind: &str, coin: &str) -> PyResult<PyReport> {
    let spec = core::graph_space::BipartiteSpec::new(n1, n2).map_err(value_error)?;
    let report = transfer_protocols::run_transfer(&spec, &scenario(scenario_kind, coin)?).map_err(value_error)?;
    Ok(report.into())
}

/// Simulated fidelity after each step 0..=max_steps.
#[pyfunction]
#[pyo3(signature = (n1, n2, max_steps, scenario_kind = "diff", coin = "gg"))]
fn simulate_series(n1: usize, n2: usize, max_steps: usize, scenario_kind: &str, coin: &str) -> PyResult<Vec<f64>> {
    let spec = core::graph_space::BipartiteSpec::new(n1, n2).map_err(value_error)?;
    transfer_protocols::simulate_transfer_series(&spec, &scenario(scenario_kind, coin)?, max_steps).map_err(value_error)
}

/// Loop-to-loop transfer with the mark switched from sender to receiver.
#[pyfunction]
#[pyo3(signature = (n1, n2, placement_name = "diff"))]
fn active_switch(n1: usize, n2: usize, placement_name: &str) -> PyResult<PyReport> {
    let (s, r) = placement(placement_name)?.endpoints();
    let report = transfer_protocols::run_active_switch(n1, n2, s, r).map_err(value_error)?;
    Ok(report.into())
}

type MaxRow = (usize, f64, f64, f64, f64);

/// `(n2, Fmax_gg, steps_gg, Fmax_gi, steps_gi)` for each n2 in lo..=hi.
#[pyfunction]
fn sweep_max_fidelity(n1: usize, lo: usize, hi: usize) -> PyResult<Vec<MaxRow>> {
    let rows = transfer_protocols::sweep_max_fidelity(n1, lo..=hi).map_err(value_error)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.n2, r.gg.fidelity, r.gg.steps, r.gi.fidelity, r.gi.steps))
        .collect())
}

fn reduced_scenario(kind: &str, coin: &str, marked: Option<(u8, usize)>) -> PyResult<MarkedScenario> {
    match (kind, marked) {
        ("single", Some((1, i))) => Ok(MarkedScenario::single(Vertex::v1(i))),
        ("single", Some((2, i))) => Ok(MarkedScenario::single(Vertex::v2(i))),
        ("single", _) => Err(PyValueError::new_err("single needs marked=(1 or 2, index)")),
        ("diff", _) => Ok(MarkedScenario::diff(0, 0, flavor(coin)?)),
        ("same", _) => Ok(MarkedScenario::same(0, 1, flavor(coin)?)),
        _ => Err(PyValueError::new_err(format!("unknown scenario {kind:?}"))),
    }
}

/// Reduced evolution matrix (rows of floats) and the walk power it represents.
#[pyfunction]
#[pyo3(signature = (spec, scenario_kind = "diff", coin = "gg", marked = None))]
fn reduced_operator(
    spec: &PySpec,
    scenario_kind: &str,
    coin: &str,
    marked: Option<(u8, usize)>,
) -> PyResult<(Vec<Vec<f64>>, u32)> {
    let op = reduced_matrix(&reduced_scenario(scenario_kind, coin, marked)?, &spec.0).map_err(value_error)?;
    let rows = op.matrix.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok((rows, op.power))
}

/// Eigenvalues of the reduced operator as complex numbers.
#[pyfunction]
#[pyo3(signature = (spec, scenario_kind = "diff", coin = "gg", marked = None))]
fn reduced_eigenvalues(
    spec: &PySpec,
    scenario_kind: &str,
    coin: &str,
    marked: Option<(u8, usize)>,
) -> PyResult<Vec<(f64, f64)>> {
    let op = reduced_matrix(&reduced_scenario(scenario_kind, coin, marked)?, &spec.0).map_err(value_error)?;
    Ok(numeric_eigensystem(&op.matrix)
        .eigenvalues
        .iter()
        .map(|z| (z.re, z.im))
        .collect())
}

#[pymodule]
fn bwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(maximize, m)?)?;
    m.add_function(wrap_pyfunction!(transfer, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_series, m)?)?;
    m.add_function(wrap_pyfunction!(active_switch, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_max_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_operator, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_eigenvalues, m)?)?;
    Ok(())
}
