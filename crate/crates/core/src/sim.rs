//! Time loop and convergence studies.

use std::io::Write;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LinearSolver;
use crate::mesh::{build_uniform_rect_mesh, EdgeKind, Mesh};
use crate::model::{make_initial_state, ChemDynamics, ChemSource, InitialConditionSpec, ModelSpec, Preset};
use crate::scheme::{
    equilibrate_chem, gradient_energy, mass, time_step_condition_holds, FluxLimiter, OracleOptions, SchemeKind,
    SchemeVariant, State, Stepper,
};

/// `ε` used for production runs.
pub const EPSILON_PRODUCTION: f64 = 1e-6;
/// `ε` used for reference solutions.
pub const EPSILON_REFERENCE: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Mesh> {
        build_uniform_rect_mesh(self.x_range, self.y_range, self.nx, self.ny)
    }

    pub fn area(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) * (self.y_range.1 - self.y_range.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub model: ModelSpec,
    pub ic: InitialConditionSpec,
    pub variant: SchemeVariant,
    pub dt: f64,
    pub t_final: f64,
    pub epsilon: f64,
    /// Snapshot cadence in steps; 0 keeps only the final state.
    pub snapshot_every: usize,
    /// Diagnostics cadence in steps; 0 records only the initial and final
    /// states.
    pub diagnostics_every: usize,
    /// Abort on invariant violations instead of logging them.
    pub strict: bool,
    pub solver: LinearSolver,
    pub oracle: OracleOptions,
}

impl RunConfig {
    /// Corrected scheme at the preset's reference step.
    pub fn from_preset(p: &Preset) -> Self {
        RunConfig {
            grid: GridSpec { x_range: p.x_range, y_range: p.y_range, nx: p.nx, ny: p.ny },
            model: p.model.clone(),
            ic: p.ic.clone(),
            variant: SchemeVariant::new(SchemeKind::CorrectedDecoupled),
            dt: p.dt_reference,
            t_final: p.t_final,
            epsilon: EPSILON_PRODUCTION,
            snapshot_every: 0,
            diagnostics_every: 1,
            strict: false,
            solver: LinearSolver::default(),
            oracle: OracleOptions::default(),
        }
    }

    pub fn with_kind(mut self, kind: SchemeKind) -> Self {
        self.variant.kind = kind;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Number of steps `N = round(T_f / Δt)` and whether `N Δt = T_f` holds.
    pub fn num_steps(&self) -> (usize, bool) {
        let ratio = self.t_final / self.dt;
        let n = ratio.round();
        (n as usize, (ratio - n).abs() <= 1e-9 * ratio.max(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!("final time must be nonnegative, got {}", self.t_final)));
        }
        self.model.validate()?;
        self.ic.validate()?;
        FluxLimiter::for_model(&self.model, self.epsilon)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagRecord {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub l2_u: f64,
    pub l2_c: f64,
    pub h1_u: f64,
    /// `Σ_σ τ_σ |Dc_σ|²` over interior edges.
    pub grad_energy_c: f64,
}

impl DiagRecord {
    pub fn measure(mesh: &Mesh, state: &State, time: f64) -> Self {
        let (min_u, max_u) = min_max(&state.u);
        let (min_c, max_c) = min_max(&state.c);
        DiagRecord {
            step: state.step_index,
            time,
            mass: mass(mesh, &state.u),
            min_u,
            max_u,
            min_c,
            max_c,
            l2_u: discrete_norm(&state.u, mesh, 2.0),
            l2_c: discrete_norm(&state.c, mesh, 2.0),
            h1_u: discrete_h1_seminorm(&state.u, mesh, 2.0),
            grad_energy_c: gradient_energy(mesh, &state.c),
        }
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub records: Vec<DiagRecord>,
}

impl Diagnostics {
    pub const CSV_HEADER: [&'static str; 9] =
        ["step", "time", "mass", "min_u", "max_u", "min_c", "max_c", "l2_u", "h1_u"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.records {
            w.write_record(&[
                r.step.to_string(),
                r.time.to_string(),
                r.mass.to_string(),
                r.min_u.to_string(),
                r.max_u.to_string(),
                r.min_c.to_string(),
                r.max_c.to_string(),
                r.l2_u.to_string(),
                r.h1_u.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub u: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: State,
    pub diagnostics: Diagnostics,
    pub snapshots: Vec<Snapshot>,
    /// Matrices that passed the strict structure checks.
    pub checked_matrices: usize,
    pub mesh: Mesh,
}

/// Initial state for `config`: seeded cell density, and for elliptic
/// dynamics a chemoattractant in equilibrium with it.
pub fn initial_state(config: &RunConfig, mesh: &Mesh) -> Result<State> {
    let mut state = make_initial_state(mesh, &config.ic).with_dt(config.dt);
    if config.model.chem_dynamics == ChemDynamics::Elliptic {
        state.c = equilibrate_chem(&state, &config.model, mesh, &config.solver)?;
    }
    Ok(state)
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mesh = config.grid.build()?;
    run_on(config, mesh)
}

/// Runs `config` on a prebuilt mesh.
pub fn run_on(config: &RunConfig, mesh: Mesh) -> Result<RunOutput> {
    config.validate()?;
    let state = initial_state(config, &mesh)?;
    run_from(config, mesh, state)
}

/// Advances `state` for `round(T_f/Δt)` steps.
pub fn run_from(config: &RunConfig, mesh: Mesh, mut state: State) -> Result<RunOutput> {
    config.validate()?;
    let (steps, exact) = config.num_steps();
    if !exact {
        warn!("T_f = {} is not a multiple of dt = {}; running {steps} steps", config.t_final, config.dt);
    }
    let lim = FluxLimiter::for_model(&config.model, config.epsilon)?;
    if !time_step_condition_holds(&lim, config.dt) {
        warn!("time step {} violates 1 - 2 a dt >= 0 with epsilon = 0", config.dt);
    }
    state.dt = config.dt;
    let monitor = InvariantMonitor::new(config, &mesh, &state);
    let mut stepper = Stepper::new(&mesh, &config.model, lim, config.variant, config.solver.clone())
        .strict(config.strict)
        .with_oracle_options(config.oracle);
    let mut diagnostics = Diagnostics::default();
    let mut snapshots = Vec::new();
    let start_step = state.step_index;
    let time_of = |s: &State| (s.step_index - start_step) as f64 * config.dt;

    let record = |s: &State, diags: &mut Diagnostics| -> Result<()> {
        let rec = DiagRecord::measure(&mesh, s, time_of(s));
        monitor.check(&rec)?;
        diags.records.push(rec);
        Ok(())
    };
    record(&state, &mut diagnostics)?;
    if config.snapshot_every > 0 {
        snapshots.push(snapshot(&state, time_of(&state)));
    }
    for k in 1..=steps {
        state = stepper.step(&state)?;
        let last = k == steps;
        if last || (config.diagnostics_every > 0 && k % config.diagnostics_every == 0) {
            record(&state, &mut diagnostics)?;
        }
        if config.snapshot_every > 0 && k % config.snapshot_every == 0 && !last {
            snapshots.push(snapshot(&state, time_of(&state)));
        }
    }
    if steps > 0 || config.snapshot_every == 0 {
        snapshots.push(snapshot(&state, time_of(&state)));
    }
    info!("run finished after {steps} steps (variant {})", config.variant.kind.name());
    Ok(RunOutput {
        final_state: state,
        diagnostics,
        snapshots,
        checked_matrices: stepper.checked_matrices(),
        mesh,
    })
}

fn snapshot(s: &State, time: f64) -> Snapshot {
    Snapshot { step: s.step_index, time, u: s.u.clone(), c: s.c.clone() }
}

/// Run-level invariants. Nonnegativity always applies, mass conservation
/// applies without growth. The elliptic saturated model also has the bounds
/// `c ≤ 2/γ` and `Σ_σ τ_σ |Dc_σ|² ≤ 4 m(Ω)/γ`.
struct InvariantMonitor {
    strict: bool,
    mass0: Option<f64>,
    c_bound: Option<(f64, f64)>,
}

impl InvariantMonitor {
    const NEG_TOL: f64 = 1e-12;
    const MASS_RTOL: f64 = 1e-10;
    const C_TOL: f64 = 1e-12;

    fn new(config: &RunConfig, mesh: &Mesh, state: &State) -> Self {
        let model = &config.model;
        let mass0 = (model.growth == crate::model::Growth::None).then(|| mass(mesh, &state.u));
        let c_bound = (model.chem_dynamics == ChemDynamics::Elliptic && model.chem_source == ChemSource::Saturated)
            .then(|| (2.0 / model.chem_decay, 4.0 * mesh.total_measure() / model.chem_decay));
        InvariantMonitor { strict: config.strict, mass0, c_bound }
    }

    fn check(&self, r: &DiagRecord) -> Result<()> {
        let mut problems = Vec::new();
        if r.min_u < -Self::NEG_TOL || r.min_c < -Self::NEG_TOL {
            problems.push(format!("negative values (min u {:e}, min c {:e})", r.min_u, r.min_c));
        }
        if let Some(m0) = self.mass0 {
            let drift = (r.mass - m0).abs() / m0.abs().max(f64::MIN_POSITIVE);
            if drift > Self::MASS_RTOL {
                problems.push(format!("relative mass drift {drift:e}"));
            }
        }
        if let Some((c_max, energy_max)) = self.c_bound {
            if r.max_c > c_max + Self::C_TOL {
                problems.push(format!("max c = {} exceeds {c_max}", r.max_c));
            }
            if r.grad_energy_c > energy_max {
                problems.push(format!("gradient energy {} exceeds {energy_max}", r.grad_energy_c));
            }
        }
        if problems.is_empty() {
            return Ok(());
        }
        let message = problems.join("; ");
        if self.strict {
            Err(Error::Invariant { step: r.step, message })
        } else {
            warn!("step {}: {message}", r.step);
            Ok(())
        }
    }
}

/// `(Σ_K m(K) |v_K|^p)^{1/p}`
pub fn discrete_norm(field: &[f64], mesh: &Mesh, p: f64) -> f64 {
    assert!(p >= 1.0, "discrete norm needs p >= 1");
    let sum: f64 = mesh.measures().zip(field).map(|(m, v)| m * v.abs().powf(p)).sum();
    sum.powf(1.0 / p)
}

/// `(Σ_σ m(σ)/d_σ^{p−1} |D_σ v|^p)^{1/p}` with zero jumps on the boundary.
pub fn discrete_h1_seminorm(field: &[f64], mesh: &Mesh, p: f64) -> f64 {
    assert!(p >= 1.0, "discrete seminorm needs p >= 1");
    let sum: f64 = mesh
        .edges()
        .iter()
        .filter_map(|e| match e.kind {
            EdgeKind::Interior { left, right } => {
                let jump = (field[left] - field[right]).abs();
                Some(e.measure / e.distance.powf(p - 1.0) * jump.powf(p))
            }
            EdgeKind::Boundary { .. } => None,
        })
        .sum();
    sum.powf(1.0 / p)
}

/// `‖field − reference‖₂ / ‖reference‖₂`
pub fn relative_l2_error(field: &[f64], reference: &[f64], mesh: &Mesh) -> Result<f64> {
    let n = mesh.num_cells();
    for len in [field.len(), reference.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let denom = discrete_norm(reference, mesh, 2.0);
    if denom == 0.0 {
        return Err(Error::Domain("reference field has zero L2 norm".into()));
    }
    let diff: Vec<f64> = field.iter().zip(reference).map(|(a, b)| a - b).collect();
    Ok(discrete_norm(&diff, mesh, 2.0) / denom)
}

/// Observed order between consecutive `(Δt, error)` pairs.
pub fn convergence_rate(dt_coarse: f64, err_coarse: f64, dt_fine: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (dt_coarse / dt_fine).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub dt: f64,
    pub l2_error: f64,
    /// Rate against the previous row; `None` on the first row.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantTable {
    pub variant: SchemeKind,
    pub rows: Vec<StudyRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyReport {
    pub reference_dt: f64,
    pub reference_u: Vec<f64>,
    pub tables: Vec<VariantTable>,
    /// `(variant, Δt, message)` for runs that failed.
    pub failures: Vec<(SchemeKind, f64, String)>,
    /// Matrices that passed the strict structure checks, over all runs.
    pub checked_matrices: usize,
}

impl StudyReport {
    pub fn table(&self, kind: SchemeKind) -> Option<&VariantTable> {
        self.tables.iter().find(|t| t.variant == kind)
    }

    pub const CSV_HEADER: [&'static str; 4] = ["variant", "dt", "l2_error", "rate"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for t in &self.tables {
            for r in &t.rows {
                w.write_record(&[
                    t.variant.name().to_string(),
                    r.dt.to_string(),
                    r.l2_error.to_string(),
                    r.rate.map(|x| x.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned text table: one row per Δt, an error and a rate column per
    /// variant.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let dts: Vec<f64> = self.tables.first().map(|t| t.rows.iter().map(|r| r.dt).collect()).unwrap_or_default();
        write!(out, "{:<10}", "dt")?;
        for t in &self.tables {
            write!(out, " {:>14} {:>7}", format!("L2 {}", t.variant.name()), "rate")?;
        }
        writeln!(out)?;
        for (i, dt) in dts.iter().enumerate() {
            write!(out, "{:<10}", format!("{dt:e}"))?;
            for t in &self.tables {
                match t.rows.get(i) {
                    Some(r) => {
                        let rate = r.rate.map(|x| format!("{x:.3}")).unwrap_or_else(|| "---".into());
                        write!(out, " {:>14} {:>7}", format!("{:.3e}", r.l2_error), rate)?;
                    }
                    None => write!(out, " {:>14} {:>7}", "failed", "---")?,
                }
            }
            writeln!(out)?;
        }
        writeln!(out, "reference: corrected scheme, dt = {:e}, epsilon = 0", self.reference_dt)?;
        Ok(())
    }
}

/// Reference solution with the corrected scheme at `reference_dt` (ε = 0),
/// then every variant at every step of `dt_list` (ε = 1e−6), all from the
/// same initial data. Errors are relative L2 errors of `u` at `T_f`.
pub fn convergence_study(
    base: &RunConfig,
    reference_dt: f64,
    dt_list: &[f64],
    variants: &[SchemeKind],
) -> Result<StudyReport> {
    if dt_list.is_empty() {
        return Err(Error::InvalidConfig("study needs at least one time step".into()));
    }
    if dt_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidConfig("study time steps must be strictly decreasing".into()));
    }
    let dt_min = *dt_list.last().expect("nonempty");
    if !(reference_dt > 0.0 && reference_dt <= dt_min) {
        return Err(Error::InvalidConfig(format!(
            "reference step {reference_dt} must be positive and not larger than {dt_min}"
        )));
    }
    let mesh = base.grid.build()?;

    let mut reference = base.clone().with_kind(SchemeKind::CorrectedDecoupled).with_dt(reference_dt);
    reference.epsilon = EPSILON_REFERENCE;
    reference.diagnostics_every = 0;
    reference.snapshot_every = 0;

    let jobs: Vec<(SchemeKind, f64)> = variants
        .iter()
        .flat_map(|&v| dt_list.iter().map(move |&dt| (v, dt)))
        .collect();
    let run_final = |cfg: &RunConfig| run_on(cfg, mesh.clone()).map(|o| (o.final_state.u, o.checked_matrices));
    let (reference_u, results) = rayon::join(
        || run_final(&reference),
        || {
            jobs.par_iter()
                .map(|&(kind, dt)| {
                    let mut cfg = base.clone().with_kind(kind).with_dt(dt);
                    cfg.epsilon = EPSILON_PRODUCTION;
                    cfg.diagnostics_every = 0;
                    cfg.snapshot_every = 0;
                    run_final(&cfg)
                })
                .collect::<Vec<_>>()
        },
    );
    let (reference_u, checked_matrices) = reference_u?;

    let mut report = StudyReport {
        reference_dt,
        reference_u,
        tables: Vec::new(),
        failures: Vec::new(),
        checked_matrices,
    };
    let mut results = jobs.iter().zip(results);
    for &kind in variants {
        let mut rows: Vec<StudyRow> = Vec::new();
        for _ in dt_list {
            let (&(_, dt), result) = results.next().expect("one result per job");
            let checked = result.as_ref().map_or(0, |r| r.1);
            report.checked_matrices += checked;
            match result.and_then(|(u, _)| relative_l2_error(&u, &report.reference_u, &mesh)) {
                Ok(err) => {
                    let rate = rows
                        .last()
                        .filter(|prev| prev.dt != dt)
                        .map(|prev| convergence_rate(prev.dt, prev.l2_error, dt, err));
                    rows.push(StudyRow { dt, l2_error: err, rate });
                }
                Err(e) => report.failures.push((kind, dt, e.to_string())),
            }
        }
        report.tables.push(VariantTable { variant: kind, rows });
    }
    if !report.failures.is_empty() {
        let message = report
            .failures
            .iter()
            .map(|(k, dt, e)| format!("{} at dt={dt}: {e}", k.name()))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::StudyAborted { message, partial: Box::new(report) });
    }
    Ok(report)
}

/// Values of the cell column whose centers are nearest to `x = x0`,
/// ordered by `y`.
pub fn extract_contour(field: &[f64], mesh: &Mesh, x0: f64) -> Result<Vec<(f64, f64)>> {
    if field.len() != mesh.num_cells() {
        return Err(Error::DimensionMismatch { expected: mesh.num_cells(), found: field.len() });
    }
    let ((xmin, xmax), _) = mesh.bounds();
    if !(x0 >= xmin && x0 <= xmax) {
        return Err(Error::InvalidConfig(format!("x0 = {x0} lies outside [{xmin}, {xmax}]")));
    }
    let best = mesh
        .cells()
        .iter()
        .map(|c| (c.center[0] - x0).abs())
        .fold(f64::INFINITY, f64::min);
    // ties between two columns go to the one with the smaller x
    let target = mesh
        .cells()
        .iter()
        .filter(|c| (c.center[0] - x0).abs() <= best * (1.0 + 1e-12) + 1e-14)
        .map(|c| c.center[0])
        .fold(f64::INFINITY, f64::min);
    let mut profile: Vec<(f64, f64)> = mesh
        .cells()
        .iter()
        .filter(|c| (c.center[0] - target).abs() <= 1e-12 * (1.0 + target.abs()))
        .map(|c| (c.center[1], field[c.index]))
        .collect();
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub dt: f64,
    pub corrected_distance: f64,
    pub plain_distance: f64,
    pub oracle_iterations: usize,
    pub checked_matrices: usize,
    /// Discrete L2 norm of the oracle cell density.
    pub oracle_norm: f64,
}

impl OracleComparison {
    /// Distances below this multiple of the oracle norm are roundoff.
    pub const ROUNDOFF: f64 = 1e-13;

    /// `corrected ≤ plain`, up to roundoff in both distances.
    pub fn corrected_wins(&self) -> bool {
        self.corrected_distance <= self.plain_distance + Self::ROUNDOFF * self.oracle_norm
    }
}

/// Default number of coupled steps taken before the comparison, so that the
/// correction term sees a nontrivial history.
pub const ORACLE_WARMUP_STEPS: usize = 3;

/// One step of each decoupled scheme and of the coupled scheme from a common state.
/// The state is prepared by `warmup` coupled steps from the initial data.
/// Distances are discrete L2 norms of the cell density difference.
pub fn oracle_check(config: &RunConfig, warmup: usize) -> Result<OracleComparison> {
    config.validate()?;
    let mesh = config.grid.build()?;
    let limit = config.oracle.cell_limit;
    if mesh.num_cells() > limit {
        return Err(Error::OracleTooLarge { cells: mesh.num_cells(), limit });
    }
    let lim = FluxLimiter::for_model(&config.model, config.epsilon)?;
    let stepper = |kind: SchemeKind| {
        let variant = SchemeVariant { kind, ..config.variant };
        Stepper::new(&mesh, &config.model, lim, variant, config.solver.clone())
            .strict(config.strict)
            .with_oracle_options(config.oracle)
    };
    let mut oracle = stepper(SchemeKind::CoupledOracle);
    let mut state = initial_state(config, &mesh)?;
    for _ in 0..warmup {
        state = oracle.step(&state)?;
    }
    let reference = oracle.step(&state)?;
    let mut corrected_stepper = stepper(SchemeKind::CorrectedDecoupled);
    let mut plain_stepper = stepper(SchemeKind::PlainDecoupled);
    let corrected = corrected_stepper.step(&state)?;
    let plain = plain_stepper.step(&state)?;
    let distance = |s: &State| {
        let d: Vec<f64> = s.u.iter().zip(&reference.u).map(|(a, b)| a - b).collect();
        discrete_norm(&d, &mesh, 2.0)
    };
    Ok(OracleComparison {
        dt: config.dt,
        corrected_distance: distance(&corrected),
        plain_distance: distance(&plain),
        oracle_iterations: oracle.oracle_iterations(),
        checked_matrices: oracle.checked_matrices()
            + corrected_stepper.checked_matrices()
            + plain_stepper.checked_matrices(),
        oracle_norm: discrete_norm(&reference.u, &mesh, 2.0),
    })
}
