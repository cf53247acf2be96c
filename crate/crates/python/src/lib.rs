//! Python bindings for simulation runs and studies, plus the small numerical
//! helpers they are built from.

use chemofv::mesh::{build_uniform_rect_mesh, locate_cell};
use chemofv::model::{preset as lookup_preset, ChemSource, Preset, PRESET_NAMES};
use chemofv::scheme::{beta_n as core_beta_n, BetaPolicy, FluxLimiter, SchemeKind, State};
use chemofv::sim::{self, discrete_norm as core_norm, RunConfig, ORACLE_WARMUP_STEPS};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_kind(name: &str) -> PyResult<SchemeKind> {
    SchemeKind::parse(name).ok_or_else(|| value_err(format!("unknown scheme variant `{name}`")))
}

/// Uniform rectangular finite volume mesh.
#[pyclass(name = "Mesh", module = "pychemofv", frozen)]
struct PyMesh {
    inner: chemofv::Mesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> PyResult<Self> {
        build_uniform_rect_mesh(x_range, y_range, nx, ny)
            .map(|inner| PyMesh { inner })
            .map_err(value_err)
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.num_cells()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.edges().len()
    }

    /// Largest cell diameter.
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn regularity(&self) -> f64 {
        self.inner.regularity()
    }

    fn centers(&self) -> Vec<(f64, f64)> {
        self.inner.cells().iter().map(|c| (c.center[0], c.center[1])).collect()
    }

    fn measures(&self) -> Vec<f64> {
        self.inner.measures().collect()
    }

    fn total_measure(&self) -> f64 {
        self.inner.total_measure()
    }

    /// Index of the cell containing `(x, y)`.
    fn locate(&self, x: f64, y: f64) -> PyResult<usize> {
        locate_cell(&self.inner, [x, y]).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        match self.inner.grid() {
            Some(g) => format!("Mesh({}x{} on {:?} x {:?})", g.nx, g.ny, g.x_range, g.y_range),
            None => format!("Mesh({} cells)", self.inner.num_cells()),
        }
    }
}

/// Final state and diagnostics of one run.
#[pyclass(name = "RunResult", module = "pychemofv", frozen, get_all)]
struct PyRunResult {
    u: Vec<f64>,
    c: Vec<f64>,
    steps: usize,
    time: f64,
    mass: Vec<f64>,
    min_u: Vec<f64>,
    max_c: Vec<f64>,
    checked_matrices: usize,
}

#[pymethods]
impl PyRunResult {
    fn __repr__(&self) -> String {
        format!("RunResult(steps={}, time={}, cells={})", self.steps, self.time, self.u.len())
    }
}

/// Builds a run configuration from a preset and optional overrides.
#[allow(clippy::too_many_arguments)]
fn configure(
    preset: &str,
    scheme: &str,
    dt: Option<f64>,
    t_final: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    chi: Option<f64>,
    epsilon: Option<f64>,
    beta_formula: bool,
) -> PyResult<RunConfig> {
    let p: Preset = lookup_preset(preset).map_err(value_err)?;
    let mut cfg = RunConfig::from_preset(&p).with_kind(parse_kind(scheme)?);
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    if let Some(t) = t_final {
        cfg.t_final = t;
    }
    if let Some(nx) = nx {
        cfg.grid.nx = nx;
    }
    if let Some(ny) = ny {
        cfg.grid.ny = ny;
    }
    if let Some(chi) = chi {
        cfg.model.chemo_sensitivity = chi;
    }
    if let Some(eps) = epsilon {
        cfg.epsilon = eps;
    }
    if beta_formula {
        cfg.variant.beta = BetaPolicy::Formula;
    }
    cfg.validate().map_err(value_err)?;
    Ok(cfg)
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

/// Mesh of a named preset.
#[pyfunction]
fn preset_mesh(name: &str) -> PyResult<PyMesh> {
    let p = lookup_preset(name).map_err(value_err)?;
    p.mesh().map(|inner| PyMesh { inner }).map_err(value_err)
}

/// Runs a preset, optionally overriding a few parameters.
#[pyfunction]
#[pyo3(signature = (preset, scheme = "corrected", dt = None, t_final = None, nx = None, ny = None,
                    chi = None, epsilon = None, beta_formula = false, strict = false))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    preset: &str,
    scheme: &str,
    dt: Option<f64>,
    t_final: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    chi: Option<f64>,
    epsilon: Option<f64>,
    beta_formula: bool,
    strict: bool,
) -> PyResult<PyRunResult> {
    let mut cfg = configure(preset, scheme, dt, t_final, nx, ny, chi, epsilon, beta_formula)?;
    cfg.strict = strict;
    let out = py.detach(|| sim::run(&cfg)).map_err(runtime_err)?;
    let recs = &out.diagnostics.records;
    let last = recs.last().expect("final record");
    Ok(PyRunResult {
        steps: last.step,
        time: last.time,
        mass: recs.iter().map(|r| r.mass).collect(),
        min_u: recs.iter().map(|r| r.min_u).collect(),
        max_c: recs.iter().map(|r| r.max_c).collect(),
        checked_matrices: out.checked_matrices,
        u: out.final_state.u,
        c: out.final_state.c,
    })
}

/// Convergence study of `variants` against a corrected reference run.
/// Returns `(variant, dt, relative L2 error, rate or None)` rows.
#[pyfunction]
#[pyo3(signature = (preset, dts, reference_dt, variants = vec!["corrected".to_string(), "plain".to_string()],
                    t_final = None, nx = None, ny = None))]
fn convergence_study(
    py: Python<'_>,
    preset: &str,
    dts: Vec<f64>,
    reference_dt: f64,
    variants: Vec<String>,
    t_final: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
) -> PyResult<Vec<(String, f64, f64, Option<f64>)>> {
    let base = configure(preset, "corrected", None, t_final, nx, ny, None, None, false)?;
    let kinds = variants.iter().map(|v| parse_kind(v)).collect::<PyResult<Vec<_>>>()?;
    let report = py
        .detach(|| sim::convergence_study(&base, reference_dt, &dts, &kinds))
        .map_err(runtime_err)?;
    Ok(report
        .tables
        .iter()
        .flat_map(|t| t.rows.iter().map(move |r| (t.variant.name().to_string(), r.dt, r.l2_error, r.rate)))
        .collect())
}

/// Distances of one corrected and one plain step to the coupled scheme.
/// Returns `(corrected_distance, plain_distance)`.
#[pyfunction]
#[pyo3(signature = (preset, dt, nx = None, ny = None, warmup = ORACLE_WARMUP_STEPS))]
fn oracle_check(preset: &str, dt: f64, nx: Option<usize>, ny: Option<usize>, warmup: usize) -> PyResult<(f64, f64)> {
    let cfg = configure(preset, "corrected", Some(dt), None, nx, ny, None, None, false)?;
    let r = sim::oracle_check(&cfg, warmup).map_err(runtime_err)?;
    Ok((r.corrected_distance, r.plain_distance))
}

/// Hybrid flux limiter `S(x)` for coefficients `mu`, `a` and floor `eps`.
#[pyfunction]
fn limiter_s(mu: f64, a: f64, eps: f64, x: f64) -> PyResult<f64> {
    Ok(FluxLimiter::new(mu, a, eps).map_err(value_err)?.s(x))
}

/// Safety factor for the correction term from the current and previous
/// cell densities.
#[pyfunction]
#[pyo3(signature = (u, u_prev, source = "saturated"))]
fn beta_n(u: Vec<f64>, u_prev: Vec<f64>, source: &str) -> PyResult<f64> {
    if u.len() != u_prev.len() {
        return Err(value_err("u and u_prev must have the same length"));
    }
    if u.iter().chain(&u_prev).any(|&v| !(v >= 0.0)) {
        return Err(value_err("densities must be nonnegative"));
    }
    let source = match source {
        "saturated" => ChemSource::Saturated,
        "linear" => ChemSource::Linear,
        other => return Err(value_err(format!("unknown source `{other}`"))),
    };
    let n = u.len();
    let state = State { u, c: vec![0.0; n], u_prev, step_index: 1, dt: 1.0 };
    Ok(core_beta_n(&state, source))
}

/// Discrete `L^p` norm of a cell field.
#[pyfunction]
#[pyo3(signature = (field, mesh, p = 2.0))]
fn discrete_norm(field: Vec<f64>, mesh: &PyMesh, p: f64) -> PyResult<f64> {
    if field.len() != mesh.inner.num_cells() {
        return Err(value_err("field length does not match the mesh"));
    }
    if !(p >= 1.0) {
        return Err(value_err("p must be at least 1"));
    }
    Ok(core_norm(&field, &mesh.inner, p))
}

#[pymodule]
fn pychemofv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_check, m)?)?;
    m.add_function(wrap_pyfunction!(limiter_s, m)?)?;
    m.add_function(wrap_pyfunction!(beta_n, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_norm, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
