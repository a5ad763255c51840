//! Python bindings for the `bsac` solver. Fields come back as nested lists:
//! bulk fields as `[nx][ny]`, surface fields as `{"bottom": [...], "top": [...]}`.

use std::path::PathBuf;

use bsac::config::RunFile;
use bsac::graph::MonotoneGraph;
use bsac::grid::{BulkField, SurfaceField};
use bsac::harness::{self, ConvergenceTable, Datum, ErrorNorms, RateFit};
use bsac::model::{Mode, ModelConfig};
use bsac::robin;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: bsac::Error) -> PyErr {
    match e {
        bsac::Error::Input(_) | bsac::Error::Config(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn bulk_list(u: &BulkField) -> Vec<Vec<f64>> {
    u.values.outer_iter().map(|row| row.to_vec()).collect()
}

fn surface_dict<'py>(py: Python<'py>, s: &SurfaceField) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("bottom", s.bottom.to_vec())?;
    d.set_item("top", s.top.to_vec())?;
    Ok(d)
}

/// A maximal monotone graph with its resolvent calculus.
#[pyclass(name = "Graph", frozen)]
struct PyGraph(MonotoneGraph);

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn obstacle(lower: f64, upper: f64) -> PyResult<Self> {
        MonotoneGraph::obstacle(lower, upper).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn cubic() -> Self {
        Self(MonotoneGraph::cubic())
    }

    #[staticmethod]
    fn polynomial(power: u32, coeff: f64) -> PyResult<Self> {
        MonotoneGraph::polynomial(power, coeff).map(Self).map_err(py_err)
    }

    fn domain(&self) -> (f64, f64) {
        let d = self.0.domain();
        (d.lo, d.hi)
    }

    fn beta_hat(&self, x: f64) -> f64 {
        self.0.beta_hat(x)
    }

    fn minimal_section(&self, x: f64) -> PyResult<f64> {
        self.0.minimal_section(x).map_err(py_err)
    }

    fn resolvent(&self, eps: f64, x: f64) -> PyResult<f64> {
        self.0.resolvent(eps, x).map_err(py_err)
    }

    fn yosida(&self, eps: f64, x: f64) -> PyResult<f64> {
        self.0.yosida(eps, x).map_err(py_err)
    }

    fn moreau_envelope(&self, eps: f64, x: f64) -> PyResult<f64> {
        self.0.moreau_envelope(eps, x).map_err(py_err)
    }

    fn resolvent_of_yosida(&self, eps: f64, lam: f64, x: f64) -> PyResult<f64> {
        self.0.resolvent_of_yosida(eps, lam, x).map_err(py_err)
    }

    fn step_resolvent(&self, eps: f64, dt: f64, x: f64) -> PyResult<f64> {
        self.0.step_resolvent(eps, dt, x).map_err(py_err)
    }

    fn compose_affine_domain(&self, alpha: f64, eta: f64) -> PyResult<(f64, f64)> {
        let d = self.0.compose_affine_domain(alpha, eta).map_err(py_err)?;
        Ok((d.lo, d.hi))
    }
}

/// A complete run configuration, built from the TOML run-file format.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig(ModelConfig);

#[pymethods]
impl PyConfig {
    /// Parses run-file text; relative CSV paths resolve against `base_dir`.
    #[staticmethod]
    #[pyo3(signature = (text, base_dir = None))]
    fn from_toml(text: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let base = base_dir.unwrap_or_else(|| PathBuf::from("."));
        let file = RunFile::parse(text).map_err(py_err)?;
        file.build(&base).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = RunFile::load(&path).map_err(py_err)?;
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        file.build(&base).map(Self).map_err(py_err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.grid.nx(), self.0.grid.ny())
    }

    #[getter]
    fn mode(&self) -> String {
        self.0.mode.to_string()
    }

    #[setter]
    fn set_mode(&mut self, mode: &str) -> PyResult<()> {
        self.0.mode = mode.parse::<Mode>().map_err(py_err)?;
        Ok(())
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k
    }

    #[setter]
    fn set_k(&mut self, k: f64) {
        self.0.k = k;
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps
    }

    #[setter]
    fn set_eps(&mut self, eps: f64) {
        self.0.eps = eps;
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[setter]
    fn set_dt(&mut self, dt: f64) {
        self.0.dt = dt;
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.0.t_end
    }

    #[setter]
    fn set_t_end(&mut self, t_end: f64) {
        self.0.t_end = t_end;
    }

    #[getter]
    fn u0(&self) -> Vec<Vec<f64>> {
        bulk_list(&self.0.u0)
    }

    #[getter]
    fn phi0<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        surface_dict(py, &self.0.phi0)
    }

    fn __repr__(&self) -> String {
        let c = &self.0;
        format!(
            "Config(mode={}, nx={}, ny={}, k={}, eps={}, dt={}, t_end={})",
            c.mode,
            c.grid.nx(),
            c.grid.ny(),
            c.k,
            c.eps,
            c.dt,
            c.t_end
        )
    }
}

/// Integrates to the final time. Returns samples (`step`, `t`, `u`, `phi`)
/// and, with `energy=True`, the per-step energy reports.
#[pyfunction]
#[pyo3(signature = (config, energy = true))]
fn run<'py>(py: Python<'py>, config: &PyConfig, energy: bool) -> PyResult<Bound<'py, PyDict>> {
    let c = config.0.clone();
    let traj = py
        .detach(move || match c.mode {
            Mode::Robin => robin::RobinSolver::new(c)?.run_with_observer(energy, |_, _| ()),
            Mode::Limit => bsac::limit::LimitSolver::new(c)?.run_with_observer(energy, |_, _| ()),
        })
        .map_err(py_err)?;
    let out = PyDict::new(py);
    let samples = traj
        .samples
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("step", s.step)?;
            d.set_item("t", s.t)?;
            d.set_item("u", bulk_list(&s.u))?;
            d.set_item("phi", surface_dict(py, &s.phi)?)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("samples", samples)?;
    let column = |f: fn(&bsac::model::EnergyReport) -> f64| traj.energy.iter().map(f).collect::<Vec<f64>>();
    let e = PyDict::new(py);
    e.set_item("time", column(|r| r.time))?;
    e.set_item("energy", column(|r| r.energy))?;
    e.set_item("bulk_dissipation", column(|r| r.bulk_dissipation))?;
    e.set_item("surface_dissipation", column(|r| r.surface_dissipation))?;
    e.set_item("forcing_power", column(|r| r.forcing_power))?;
    e.set_item("identity_residual", column(|r| r.identity_residual))?;
    out.set_item("energy", e)?;
    out.set_item("warnings", traj.warnings.clone())?;
    out.set_item("compatibility_defect", traj.compatibility_defect)?;
    Ok(out)
}

/// Time-steps until the increment drops below `tol`, then evaluates the
/// stationary residuals.
#[pyfunction]
#[pyo3(signature = (config, tol = 1e-8, max_iter = 1_000_000))]
fn steady_state<'py>(
    py: Python<'py>,
    config: &PyConfig,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let c = config.0.clone();
    let (st, res) = py
        .detach(move || {
            let st = robin::steady_state(&c, tol, max_iter)?;
            let res = robin::stationary_residual(&st.state, &c)?;
            Ok::<_, bsac::Error>((st, res))
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("iterations", st.iterations)?;
    d.set_item("increment", st.residual)?;
    d.set_item("u", bulk_list(&st.state.u))?;
    d.set_item("phi", surface_dict(py, &st.state.phi)?)?;
    d.set_item("bulk_res", res.bulk_res)?;
    d.set_item("surface_res", res.surface_res)?;
    d.set_item("robin_res", res.robin_res)?;
    Ok(d)
}

fn fit_dict<'py>(py: Python<'py>, f: &RateFit) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("slope", f.slope)?;
    d.set_item("intercept", f.intercept)?;
    d.set_item("r2", f.r2)?;
    d.set_item("excluded", f.excluded)?;
    d.set_item("degenerate", f.degenerate)?;
    Ok(d)
}

fn norms_dict<'py>(py: Python<'py>, n: &ErrorNorms) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x_omega", n.x_omega)?;
    d.set_item("x_gamma", n.x_gamma)?;
    d.set_item("boundary_mismatch", n.boundary_mismatch)?;
    Ok(d)
}

fn table_dict<'py>(py: Python<'py>, table: &ConvergenceTable) -> PyResult<Bound<'py, PyDict>> {
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("param", r.param)?;
            match &r.norms {
                Ok(n) => d.set_item("norms", norms_dict(py, n)?)?,
                Err(e) => d.set_item("error", e)?,
            }
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let fits = PyDict::new(py);
    for (name, f) in [
        ("x_omega", &table.fits.x_omega),
        ("x_gamma", &table.fits.x_gamma),
        ("boundary_mismatch", &table.fits.boundary_mismatch),
    ] {
        match f {
            Some(f) => fits.set_item(name, fit_dict(py, f)?)?,
            None => fits.set_item(name, py.None())?,
        }
    }
    let d = PyDict::new(py);
    d.set_item("rows", rows)?;
    d.set_item("fits", fits)?;
    Ok(d)
}

/// Robin runs at each `K` against the limit problem, with log-log fits.
#[pyfunction]
#[pyo3(signature = (config, ks = None))]
fn sweep_k<'py>(py: Python<'py>, config: &PyConfig, ks: Option<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let c = config.0.clone();
    let ks = ks.unwrap_or_else(harness::default_ks);
    let table = py.detach(move || harness::sweep_k(&c, &ks)).map_err(py_err)?;
    table_dict(py, &table)
}

/// Yosida parameter sweep against the unregularized run.
#[pyfunction]
fn sweep_eps<'py>(py: Python<'py>, config: &PyConfig, eps: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let c = config.0.clone();
    let table = py.detach(move || harness::sweep_eps(&c, &eps)).map_err(py_err)?;
    table_dict(py, &table)
}

/// Perturbs one datum (`u0`, `phi0`, `f` or `fGamma`) and reports the
/// difference per unit perturbation.
#[pyfunction]
#[pyo3(signature = (config, which, deltas = vec![1e-1, 1e-2, 1e-3]))]
fn ctsdep<'py>(
    py: Python<'py>,
    config: &PyConfig,
    which: &str,
    deltas: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let which: Datum = which.parse().map_err(py_err)?;
    let c = config.0.clone();
    let report = py.detach(move || harness::ctsdep(&c, &deltas, which)).map_err(py_err)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("delta", r.delta)?;
            d.set_item("diff", r.diff)?;
            d.set_item("ratio", r.ratio)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("which", report.which.to_string())?;
    d.set_item("rows", rows)?;
    d.set_item("spread", report.spread)?;
    Ok(d)
}

/// Least-squares slope of `log(error)` against `log(param)`.
#[pyfunction]
fn fit_rate<'py>(py: Python<'py>, params: Vec<f64>, errors: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let f = harness::fit_rate(&params, &errors).map_err(py_err)?;
    fit_dict(py, &f)
}

#[pymodule]
fn bsac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_k, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_eps, m)?)?;
    m.add_function(wrap_pyfunction!(ctsdep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    Ok(())
}
