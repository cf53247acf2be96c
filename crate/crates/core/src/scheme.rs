//! Decoupled time steppers and their building blocks.
//!
//! One step of the decoupled schemes solves two linear systems:
//!
//! * chemoattractant: `B c^{n+1} = G^n` with
//!   `B_KK = Σ_σ τ_σ + γ m(K) [+ m(K)/Δt]`, `B_KL = −τ_σ` and
//!   `G_K = m(K) f(u_K^n) [+ m(K) c_K^n/Δt] [+ β_n T_K^n]`;
//! * cell density: `A^n u^{n+1} = F^n` with
//!   `A_KK = m(K)/Δt + Σ_σ τ_σ (μ + a S(Dc_{K,σ}))`,
//!   `A_KL = −τ_σ (μ + a S(−Dc_{K,σ}))` and `F_K = m(K) u_K^n / Δt`,
//!
//! where `Dc_{K,σ} = c_L − c_K`, sums run over interior edges and the
//! bracketed terms are present only in the variants that use them.
//! `B` has row dominance slack `γ m(K)` and `A` has column dominance slack
//! `m(K)/Δt`, so both are nonsingular M-matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LinearSolver, Prepared, SparseMatrix};
use crate::mesh::{EdgeKind, Mesh};
use crate::model::{ChemDynamics, ChemSource, Growth, ModelSpec};

/// Hybrid central/upwind limiter for the chemotactic flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxLimiter {
    mu: f64,
    a: f64,
    eps: f64,
    threshold: f64,
}

impl FluxLimiter {
    /// Requires `a > 0`, `μ > 0` and `0 ≤ ε ≤ μ`, which keeps
    /// `μ + a S(x) ≥ ε` for every `x`.
    pub fn new(mu: f64, a: f64, eps: f64) -> Result<Self> {
        if !(mu > 0.0 && a > 0.0) {
            return Err(Error::InvalidModel(format!("limiter needs mu > 0 and a > 0, got mu={mu} a={a}")));
        }
        if !(eps >= 0.0 && eps <= mu) {
            return Err(Error::InvalidModel(format!("limiter needs 0 <= epsilon <= mu, got epsilon={eps}")));
        }
        Ok(FluxLimiter {
            mu,
            a,
            eps,
            threshold: 2.0 * (mu - eps) / a,
        })
    }

    pub fn for_model(model: &ModelSpec, eps: f64) -> Result<Self> {
        FluxLimiter::new(model.cell_diffusion, model.chemo_sensitivity, eps)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// `2(μ − ε)/a`
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    #[inline]
    pub fn s(&self, x: f64) -> f64 {
        if x < -self.threshold {
            0.0
        } else if x <= self.threshold {
            0.5 * x
        } else {
            x
        }
    }
}

pub fn limiter_s(lim: &FluxLimiter, x: f64) -> f64 {
    lim.s(x)
}

/// Cell averages at one time level plus the previous cell density, which the
/// correction term needs.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub c: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub step_index: usize,
    pub dt: f64,
}

impl State {
    /// Initial state: `u_prev = u`, so the first correction vanishes. The
    /// time step is left at zero until set with [`State::with_dt`].
    pub fn new(u: Vec<f64>, c: Vec<f64>) -> Self {
        State {
            u_prev: u.clone(),
            u,
            c,
            step_index: 0,
            dt: 0.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn num_cells(&self) -> usize {
        self.u.len()
    }

    fn check(&self, mesh: &Mesh) -> Result<()> {
        let n = mesh.num_cells();
        for len in [self.u.len(), self.c.len(), self.u_prev.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Chemoattractant first with the lagged correction `β_n T^n`.
    CorrectedDecoupled,
    /// Chemoattractant first, source evaluated at `u^n`.
    PlainDecoupled,
    /// Cell density first with `c^n`, then chemoattractant with `u^{n+1}`.
    Lagged,
    /// Fixed-point solution of the coupled scheme; small meshes only.
    CoupledOracle,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::CorrectedDecoupled,
        SchemeKind::PlainDecoupled,
        SchemeKind::Lagged,
        SchemeKind::CoupledOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::CorrectedDecoupled => "corrected",
            SchemeKind::PlainDecoupled => "plain",
            SchemeKind::Lagged => "lagged",
            SchemeKind::CoupledOracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<SchemeKind> {
        match s {
            "corrected" | "corrected-decoupled" => Some(SchemeKind::CorrectedDecoupled),
            "plain" | "plain-decoupled" => Some(SchemeKind::PlainDecoupled),
            "lagged" => Some(SchemeKind::Lagged),
            "oracle" | "coupled-oracle" => Some(SchemeKind::CoupledOracle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaPolicy {
    /// The safety factor that keeps the chemoattractant right-hand side
    /// nonnegative.
    Formula,
    /// `β_n = 1`.
    #[default]
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeVariant {
    pub kind: SchemeKind,
    pub beta: BetaPolicy,
    pub oracle_cell_limit: usize,
}

impl SchemeVariant {
    pub const DEFAULT_ORACLE_CELL_LIMIT: usize = 4096;

    pub fn new(kind: SchemeKind) -> Self {
        SchemeVariant {
            kind,
            beta: BetaPolicy::default(),
            oracle_cell_limit: Self::DEFAULT_ORACLE_CELL_LIMIT,
        }
    }

    pub fn with_beta(mut self, beta: BetaPolicy) -> Self {
        self.beta = beta;
        self
    }

    fn is_corrected(&self) -> bool {
        self.kind == SchemeKind::CorrectedDecoupled
    }
}

/// `T_K^n = m(K) (f(u_K^n) − f(u_K^{n−1}))`; identically zero at `n = 0`.
pub fn correction_term(state: &State, model: &ModelSpec, mesh: &Mesh) -> Vec<f64> {
    if state.step_index == 0 {
        return vec![0.0; state.u.len()];
    }
    let f = model.chem_source;
    mesh.measures()
        .zip(state.u.iter().zip(&state.u_prev))
        .map(|(m, (&u, &up))| m * (f.eval(u) - f.eval(up)))
        .collect()
}

/// Safety factor `β_n ∈ (0, 1]` for the correction term.
///
/// With `g` the chemoattractant source and
/// `T* = {K : 2 g(u_K^n) − g(u_K^{n−1}) < 0}`, returns 1 if `T*` is empty and
/// otherwise `min_{K∈T*} g(u_K^n) / (g(u_K^{n−1}) − g(u_K^n))`. The value is
/// zero only if some `u_K^n = 0` while `u_K^{n−1} > 0`.
pub fn beta_n(state: &State, source: ChemSource) -> f64 {
    if state.step_index == 0 {
        return 1.0;
    }
    let mut beta = 1.0_f64;
    for (&u, &up) in state.u.iter().zip(&state.u_prev) {
        let (g, gp) = (source.eval(u), source.eval(up));
        if 2.0 * g - gp < 0.0 {
            debug_assert!(gp > g);
            beta = beta.min(g / (gp - g));
        }
    }
    beta
}

fn resolve_beta(variant: &SchemeVariant, state: &State, model: &ModelSpec) -> f64 {
    match variant.beta {
        BetaPolicy::Fixed => 1.0,
        BetaPolicy::Formula => beta_n(state, model.chem_source),
    }
}

fn require_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTimeStep(dt))
    }
}

/// Matrix of the chemoattractant equation. It depends only on the mesh, the
/// model and (parabolic dynamics) the time step.
pub fn assemble_chem_matrix(model: &ModelSpec, mesh: &Mesh, dt: f64) -> Result<SparseMatrix> {
    let parabolic = model.chem_dynamics == ChemDynamics::Parabolic;
    if parabolic {
        require_dt(dt)?;
    }
    let edges = mesh.edges();
    let rows = (0..mesh.num_cells())
        .map(|k| {
            let m = mesh.measure(k);
            let mut row = Vec::with_capacity(5);
            let mut diag = 0.0;
            for &e in mesh.cell_edges(k) {
                let edge = &edges[e];
                if let Some(l) = edge.other(k) {
                    diag += edge.transmissibility;
                    row.push((l, -edge.transmissibility));
                }
            }
            diag += model.chem_decay * m;
            if parabolic {
                diag += m / dt;
            }
            row.push((k, diag));
            row
        })
        .collect();
    SparseMatrix::from_rows(rows)
}

/// Uncorrected chemoattractant right-hand side `m(K) f(u_K) [+ m(K) c_K/Δt]`.
fn chem_rhs_plain(u: &[f64], c_old: &[f64], model: &ModelSpec, mesh: &Mesh, dt: f64) -> Vec<f64> {
    let parabolic = model.chem_dynamics == ChemDynamics::Parabolic;
    mesh.measures()
        .zip(u.iter().zip(c_old))
        .map(|(m, (&u, &c))| {
            let g = m * model.chem_source.eval(u);
            if parabolic {
                g + m * c / dt
            } else {
                g
            }
        })
        .collect()
}

/// Chemoattractant system `(B, G)` for one step.
///
/// The source is evaluated at `state.u`. For [`SchemeKind::Lagged`] the
/// caller passes the intermediate state carrying `u^{n+1}` and `c^n`. The
/// correction `β T^n` is added for the corrected variant only.
pub fn assemble_chem_system(
    state: &State,
    model: &ModelSpec,
    mesh: &Mesh,
    variant: &SchemeVariant,
    beta: f64,
) -> Result<(SparseMatrix, Vec<f64>)> {
    state.check(mesh)?;
    let b = assemble_chem_matrix(model, mesh, state.dt)?;
    let g = chem_rhs(state, model, mesh, variant, beta);
    Ok((b, g))
}

fn chem_rhs(state: &State, model: &ModelSpec, mesh: &Mesh, variant: &SchemeVariant, beta: f64) -> Vec<f64> {
    let mut g = chem_rhs_plain(&state.u, &state.c, model, mesh, state.dt);
    if variant.is_corrected() {
        let t = correction_term(state, model, mesh);
        g.iter_mut().zip(&t).for_each(|(gk, tk)| *gk += beta * tk);
    }
    g
}

/// Diagonal and right-hand side contributions of the growth term in cell `k`.
fn growth_parts(growth: Growth, m: f64, u: f64) -> (f64, f64) {
    match growth {
        Growth::None => (0.0, 0.0),
        // −r m u^n (1 − u^{n+1}) on the left-hand side
        Growth::QuadraticLogistic { rate } => (rate * m * u, rate * m * u),
        // −m u^{n+1} u^n (1 − u^n) on the left-hand side
        Growth::CubicLogistic => (-m * u * (1.0 - u), 0.0),
    }
}

/// Cell density system `(A^n, F^n)` given the chemoattractant `c_new` that
/// drives the convective flux.
pub fn assemble_cell_system(
    state: &State,
    c_new: &[f64],
    model: &ModelSpec,
    mesh: &Mesh,
    lim: &FluxLimiter,
) -> Result<(SparseMatrix, Vec<f64>)> {
    state.check(mesh)?;
    if c_new.len() != mesh.num_cells() {
        return Err(Error::DimensionMismatch { expected: mesh.num_cells(), found: c_new.len() });
    }
    let dt = state.dt;
    require_dt(dt)?;
    let (mu, a) = (lim.mu(), lim.a());
    let edges = mesh.edges();
    let mut rows = Vec::with_capacity(mesh.num_cells());
    let mut rhs = Vec::with_capacity(mesh.num_cells());
    for k in 0..mesh.num_cells() {
        let m = mesh.measure(k);
        let uk = state.u[k];
        let (growth_diag, growth_rhs) = growth_parts(model.growth, m, uk);
        let time_diag = m / dt;
        if !(time_diag + growth_diag > 0.0) {
            return Err(Error::Structure(format!(
                "cell {k}: growth linearization makes the diagonal slack {:e} nonpositive; reduce the time step",
                time_diag + growth_diag
            )));
        }
        let mut row = Vec::with_capacity(5);
        let mut diag = time_diag;
        for &e in mesh.cell_edges(k) {
            let edge = &edges[e];
            if let Some(l) = edge.other(k) {
                let dc = c_new[l] - c_new[k];
                diag += edge.transmissibility * (mu + a * lim.s(dc));
                row.push((l, -edge.transmissibility * (mu + a * lim.s(-dc))));
            }
        }
        row.push((k, diag + growth_diag));
        rows.push(row);
        rhs.push(m * uk / dt + growth_rhs);
    }
    Ok((SparseMatrix::from_rows(rows)?, rhs))
}

/// Expected minimum dominance slacks used by the strict structure checks.
fn expected_cell_slack(model: &ModelSpec, mesh: &Mesh, u: &[f64], dt: f64) -> Vec<f64> {
    mesh.measures()
        .zip(u)
        .map(|(m, &u)| m / dt + growth_parts(model.growth, m, u).0)
        .collect()
}

fn expected_chem_slack(model: &ModelSpec, mesh: &Mesh) -> Vec<f64> {
    mesh.measures().map(|m| model.chem_decay * m).collect()
}

/// Relative slack shortfall tolerated by the structure checks.
pub const SLACK_RTOL: f64 = 1e-12;

/// Verifies the sign pattern and row dominance of a chemoattractant matrix.
pub fn verify_chem_matrix(b: &SparseMatrix, model: &ModelSpec, mesh: &Mesh) -> Result<()> {
    let rep = b.structure();
    if !rep.diag_positive || !rep.offdiag_nonpositive {
        return Err(Error::Structure("chemoattractant matrix has a wrong sign pattern".into()));
    }
    for (k, (&slack, want)) in rep.row_slack.iter().zip(expected_chem_slack(model, mesh)).enumerate() {
        if !(slack >= want * (1.0 - SLACK_RTOL)) {
            return Err(Error::Structure(format!("chemoattractant row {k}: slack {slack:e} < {want:e}")));
        }
    }
    Ok(())
}

/// Verifies the sign pattern and column dominance of a cell matrix.
pub fn verify_cell_matrix(a: &SparseMatrix, model: &ModelSpec, mesh: &Mesh, u: &[f64], dt: f64) -> Result<()> {
    let rep = a.structure();
    if !rep.diag_positive || !rep.offdiag_nonpositive {
        return Err(Error::Structure("cell matrix has a wrong sign pattern".into()));
    }
    for (k, (&slack, want)) in rep.col_slack.iter().zip(expected_cell_slack(model, mesh, u, dt)).enumerate() {
        if !(slack >= want * (1.0 - SLACK_RTOL)) {
            return Err(Error::Structure(format!("cell column {k}: slack {slack:e} < {want:e}")));
        }
    }
    Ok(())
}

/// Rejects values below `−1e−12 · max|v|`.
fn check_nonnegative(field: &'static str, v: &[f64], step: usize) -> Result<()> {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = -1e-12 * scale.max(f64::MIN_POSITIVE);
    match v.iter().enumerate().find(|(_, &x)| !(x >= floor)) {
        Some((cell, &value)) => Err(Error::Negativity { field, value, cell, step }),
        None => Ok(()),
    }
}

/// Chemoattractant in equilibrium with `state.u` (elliptic dynamics).
pub fn equilibrate_chem(state: &State, model: &ModelSpec, mesh: &Mesh, solver: &LinearSolver) -> Result<Vec<f64>> {
    state.check(mesh)?;
    let mut elliptic = model.clone();
    elliptic.chem_dynamics = ChemDynamics::Elliptic;
    let b = assemble_chem_matrix(&elliptic, mesh, state.dt)?;
    let g = chem_rhs_plain(&state.u, &state.c, &elliptic, mesh, state.dt);
    Ok(solver.solve(&b, &g)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub cell_limit: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-12,
            max_iter: 200,
            cell_limit: SchemeVariant::DEFAULT_ORACLE_CELL_LIMIT,
        }
    }
}

/// Stepping context for one configuration, holding a cached factorization of
/// the chemoattractant matrix, which is constant for a fixed time step.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    mesh: &'a Mesh,
    model: &'a ModelSpec,
    lim: FluxLimiter,
    variant: SchemeVariant,
    solver: LinearSolver,
    oracle: OracleOptions,
    strict: bool,
    chem_cache: Option<(u64, Prepared)>,
    checked_matrices: usize,
    oracle_iterations: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(mesh: &'a Mesh, model: &'a ModelSpec, lim: FluxLimiter, variant: SchemeVariant, solver: LinearSolver) -> Self {
        Stepper {
            mesh,
            model,
            lim,
            variant,
            solver,
            oracle: OracleOptions {
                cell_limit: variant.oracle_cell_limit,
                ..Default::default()
            },
            strict: false,
            chem_cache: None,
            checked_matrices: 0,
            oracle_iterations: 0,
        }
    }

    /// Strict mode verifies the M-matrix structure of every assembled matrix,
    /// per-step mass conservation (no growth) and nonnegativity.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn with_oracle_options(mut self, oracle: OracleOptions) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn variant(&self) -> &SchemeVariant {
        &self.variant
    }

    pub fn limiter(&self) -> &FluxLimiter {
        &self.lim
    }

    /// Number of matrices that passed the strict structure check.
    pub fn checked_matrices(&self) -> usize {
        self.checked_matrices
    }

    /// Fixed-point iterations used by the last oracle step.
    pub fn oracle_iterations(&self) -> usize {
        self.oracle_iterations
    }

    fn chem_solver(&mut self, dt: f64) -> Result<&Prepared> {
        let key = match self.model.chem_dynamics {
            ChemDynamics::Parabolic => dt.to_bits(),
            ChemDynamics::Elliptic => 0,
        };
        if self.chem_cache.as_ref().map(|(k, _)| *k) != Some(key) {
            let b = assemble_chem_matrix(self.model, self.mesh, dt)?;
            if self.strict {
                verify_chem_matrix(&b, self.model, self.mesh)?;
            }
            self.chem_cache = Some((key, self.solver.prepare(b, true)?));
        }
        if self.strict {
            self.checked_matrices += 1;
        }
        Ok(&self.chem_cache.as_ref().expect("cache filled above").1)
    }

    fn solve_chem(&mut self, rhs: &[f64], guess: &[f64], dt: f64) -> Result<Vec<f64>> {
        let prepared = self.chem_solver(dt)?;
        Ok(prepared.solve(rhs, Some(guess))?.0)
    }

    fn solve_cell(&mut self, state: &State, c_drive: &[f64]) -> Result<Vec<f64>> {
        let (a, f) = assemble_cell_system(state, c_drive, self.model, self.mesh, &self.lim)?;
        if self.strict {
            verify_cell_matrix(&a, self.model, self.mesh, &state.u, state.dt)?;
            self.checked_matrices += 1;
        }
        Ok(self.solver.prepare(a, false)?.solve(&f, Some(&state.u))?.0)
    }

    /// Advances one step with the configured variant.
    pub fn step(&mut self, state: &State) -> Result<State> {
        state.check(self.mesh)?;
        require_dt(state.dt)?;
        let (u_new, c_new) = match self.variant.kind {
            SchemeKind::CorrectedDecoupled | SchemeKind::PlainDecoupled => {
                let beta = resolve_beta(&self.variant, state, self.model);
                let g = chem_rhs(state, self.model, self.mesh, &self.variant, beta);
                let c_new = self.solve_chem(&g, &state.c, state.dt)?;
                let u_new = self.solve_cell(state, &c_new)?;
                (u_new, c_new)
            }
            SchemeKind::Lagged => {
                let u_new = self.solve_cell(state, &state.c)?;
                let g = chem_rhs_plain(&u_new, &state.c, self.model, self.mesh, state.dt);
                let c_new = self.solve_chem(&g, &state.c, state.dt)?;
                (u_new, c_new)
            }
            SchemeKind::CoupledOracle => self.coupled_fixed_point(state)?,
        };
        let next = State {
            u_prev: state.u.clone(),
            u: u_new,
            c: c_new,
            step_index: state.step_index + 1,
            dt: state.dt,
        };
        self.post_check(state, &next)?;
        Ok(next)
    }

    fn post_check(&self, old: &State, new: &State) -> Result<()> {
        check_nonnegative("u", &new.u, new.step_index)?;
        if self.strict {
            check_nonnegative("c", &new.c, new.step_index)?;
            if self.model.growth == Growth::None {
                let before = mass(self.mesh, &old.u);
                let after = mass(self.mesh, &new.u);
                if (after - before).abs() > 1e-10 * before.abs() {
                    return Err(Error::Invariant {
                        step: new.step_index,
                        message: format!("mass changed from {before:e} to {after:e}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Coupled scheme by fixed-point iteration: start from the uncorrected
    /// chemoattractant, then alternate the two solves with the source taken
    /// at the current cell iterate until the max-norm change of
    /// `(u, c)` drops below the tolerance.
    fn coupled_fixed_point(&mut self, state: &State) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.mesh.num_cells();
        if n > self.oracle.cell_limit {
            return Err(Error::OracleTooLarge { cells: n, limit: self.oracle.cell_limit });
        }
        if !(self.oracle.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("oracle tolerance must be positive, got {}", self.oracle.tol)));
        }
        let dt = state.dt;
        let g0 = chem_rhs_plain(&state.u, &state.c, self.model, self.mesh, dt);
        let mut c = self.solve_chem(&g0, &state.c, dt)?;
        let mut u = state.u.clone();
        let mut change = f64::INFINITY;
        for iter in 1..=self.oracle.max_iter {
            let u_next = self.solve_cell(state, &c)?;
            let g = chem_rhs_plain(&u_next, &state.c, self.model, self.mesh, dt);
            let c_next = self.solve_chem(&g, &c, dt)?;
            change = max_abs_diff(&u_next, &u).max(max_abs_diff(&c_next, &c));
            u = u_next;
            c = c_next;
            if change <= self.oracle.tol {
                self.oracle_iterations = iter;
                return Ok((u, c));
            }
        }
        Err(Error::OracleDiverged { iterations: self.oracle.max_iter, residual: change })
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn mass(mesh: &Mesh, u: &[f64]) -> f64 {
    mesh.measures().zip(u).map(|(m, u)| m * u).sum()
}

/// One decoupled step (or oracle step) of `variant` from `state`.
pub fn step(
    state: &State,
    model: &ModelSpec,
    mesh: &Mesh,
    lim: &FluxLimiter,
    variant: &SchemeVariant,
    solver: &LinearSolver,
) -> Result<State> {
    Stepper::new(mesh, model, *lim, *variant, solver.clone()).step(state)
}

/// One step of the coupled scheme, solved by fixed-point iteration.
pub fn step_coupled_oracle(
    state: &State,
    model: &ModelSpec,
    mesh: &Mesh,
    lim: &FluxLimiter,
    solver: &LinearSolver,
    options: OracleOptions,
) -> Result<State> {
    let variant = SchemeVariant {
        oracle_cell_limit: options.cell_limit,
        ..SchemeVariant::new(SchemeKind::CoupledOracle)
    };
    Stepper::new(mesh, model, *lim, variant, solver.clone())
        .with_oracle_options(options)
        .step(state)
}

/// Warns when `1 − 2aΔt < 0` with `ε = 0`.
pub fn time_step_condition_holds(lim: &FluxLimiter, dt: f64) -> bool {
    !(1.0 - 2.0 * lim.a() * dt < 0.0 && lim.epsilon() == 0.0)
}

/// Energy `Σ_σ τ_σ |Dc_σ|²` over interior edges, each edge counted once.
pub fn gradient_energy(mesh: &Mesh, c: &[f64]) -> f64 {
    mesh.edges()
        .iter()
        .filter_map(|e| match e.kind {
            EdgeKind::Interior { left, right } => Some(e.transmissibility * (c[right] - c[left]).powi(2)),
            EdgeKind::Boundary { .. } => None,
        })
        .sum()
}
