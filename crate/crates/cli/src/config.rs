//! Configuration documents and their layering.
//!
//! A configuration is resolved in three layers, later layers winning: the
//! preset (from `--preset` or the file's top-level `preset` key), the
//! configuration file, then `--set section.key=value` overrides. Layers are
//! merged as TOML tables and deserialized once at the end, so unknown keys are
//! rejected wherever they come from.

use std::path::Path;

use chemofv::linalg::LinearSolver;
use chemofv::model::{preset, ChemDynamics, ChemSource, Growth, InitialConditionSpec, ModelSpec, Preset, Region};
use chemofv::scheme::{BetaPolicy, OracleOptions, SchemeKind, SchemeVariant};
use chemofv::sim::{GridSpec, RunConfig, EPSILON_PRODUCTION};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub meta: Meta,
    pub domain: Domain,
    pub model: Model,
    pub scheme: Scheme,
    pub time: Time,
    pub ic: Ic,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub study: Study,
}

/// Provenance of a resolved configuration. Ignored when a manifest is read
/// back as a configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthKind {
    None,
    QuadraticLogistic,
    CubicLogistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub mu: f64,
    pub chi: f64,
    pub gamma: f64,
    pub chem_dynamics: ChemDynamics,
    pub chem_source: ChemSource,
    pub growth: GrowthKind,
    /// Only read for quadratic logistic growth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub variant: String,
    pub epsilon: f64,
    pub beta_policy: BetaPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Time {
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ic {
    pub base_u: f64,
    pub base_c: f64,
    pub region: Region,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    /// CSV snapshots plus one legacy VTK file per field.
    #[serde(rename = "csv+vtk")]
    CsvVtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "one")]
    pub diagnostics_every: usize,
    #[serde(default)]
    pub format: OutputFormat,
}

fn one() -> usize {
    1
}

impl Default for Output {
    fn default() -> Self {
        Output { directory: None, snapshot_every: 0, diagnostics_every: 1, format: OutputFormat::Csv }
    }
}

/// Convergence-study settings; filled from the preset when there is one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Study {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn from_preset(p: &Preset) -> Self {
        let (growth, growth_rate) = match p.model.growth {
            Growth::None => (GrowthKind::None, None),
            Growth::QuadraticLogistic { rate } => (GrowthKind::QuadraticLogistic, Some(rate)),
            Growth::CubicLogistic => (GrowthKind::CubicLogistic, None),
        };
        ConfigFile {
            preset: None,
            meta: Meta::default(),
            domain: Domain { x_range: p.x_range, y_range: p.y_range, nx: p.nx, ny: p.ny },
            model: Model {
                mu: p.model.cell_diffusion,
                chi: p.model.chemo_sensitivity,
                gamma: p.model.chem_decay,
                chem_dynamics: p.model.chem_dynamics,
                chem_source: p.model.chem_source,
                growth,
                growth_rate,
            },
            scheme: Scheme {
                variant: SchemeKind::CorrectedDecoupled.name().into(),
                epsilon: EPSILON_PRODUCTION,
                beta_policy: BetaPolicy::default(),
            },
            time: Time { dt: p.dt_reference, t_final: p.t_final },
            ic: Ic { base_u: p.ic.base_u, base_c: p.ic.base_c, region: p.ic.region.clone(), seed: p.ic.seed },
            output: Output::default(),
            study: Study {
                dt_list: Some(p.dt_list.clone()),
                reference_dt: Some(p.dt_reference),
                variants: Some(vec![
                    SchemeKind::CorrectedDecoupled.name().into(),
                    SchemeKind::PlainDecoupled.name().into(),
                ]),
            },
        }
    }

    pub fn scheme_kind(&self) -> Result<SchemeKind, CliError> {
        parse_kind(&self.scheme.variant)
    }

    pub fn to_run_config(&self) -> Result<RunConfig, CliError> {
        let growth = match self.model.growth {
            GrowthKind::None => Growth::None,
            GrowthKind::CubicLogistic => Growth::CubicLogistic,
            GrowthKind::QuadraticLogistic => Growth::QuadraticLogistic {
                rate: self.model.growth_rate.ok_or_else(|| {
                    CliError::Usage("model.growth_rate is required for quadratic-logistic growth".into())
                })?,
            },
        };
        let config = RunConfig {
            grid: GridSpec {
                x_range: self.domain.x_range,
                y_range: self.domain.y_range,
                nx: self.domain.nx,
                ny: self.domain.ny,
            },
            model: ModelSpec {
                cell_diffusion: self.model.mu,
                chemo_sensitivity: self.model.chi,
                chem_decay: self.model.gamma,
                chem_dynamics: self.model.chem_dynamics,
                chem_source: self.model.chem_source,
                growth,
            },
            ic: InitialConditionSpec {
                base_u: self.ic.base_u,
                base_c: self.ic.base_c,
                region: self.ic.region.clone(),
                seed: self.ic.seed,
            },
            variant: SchemeVariant::new(self.scheme_kind()?).with_beta(self.scheme.beta_policy),
            dt: self.time.dt,
            t_final: self.time.t_final,
            epsilon: self.scheme.epsilon,
            snapshot_every: self.output.snapshot_every,
            diagnostics_every: self.output.diagnostics_every,
            strict: false,
            solver: LinearSolver::default(),
            oracle: OracleOptions::default(),
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        config.grid.build().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }

    /// Self-contained copy suitable for feeding back with `--config`.
    pub fn manifest(&self, command: &str, preset_name: Option<&str>, directory: &Path) -> ConfigFile {
        let mut m = self.clone();
        m.preset = None;
        m.meta = Meta {
            version: Some(env!("CARGO_PKG_VERSION").into()),
            command: Some(command.into()),
            preset: preset_name.map(str::to_string),
        };
        m.output.directory = Some(directory.display().to_string());
        m
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialize configuration: {e}")))
    }
}

pub fn parse_kind(name: &str) -> Result<SchemeKind, CliError> {
    SchemeKind::parse(name).ok_or_else(|| {
        CliError::Usage(format!("unknown scheme variant `{name}` (expected corrected, plain, lagged or oracle)"))
    })
}

/// Recursively overlays `over` onto `base`.
fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a
/// bare string so that `--set scheme.variant=plain` works unquoted.
fn parse_override_value(raw: &str) -> Value {
    let raw = raw.trim();
    match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

fn apply_override(table: &mut Table, item: &str) -> Result<(), CliError> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{item}` is not of the form section.key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.len() < 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Usage(format!("override key `{path}` must look like section.key")));
    }
    let mut node = table;
    for key in &keys[..keys.len() - 1] {
        let entry = node.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Usage(format!("override key `{path}`: `{key}` is not a section")))?;
    }
    node.insert(keys[keys.len() - 1].to_string(), parse_override_value(raw));
    Ok(())
}

/// The inputs of one resolution.
#[derive(Debug, Default, Clone)]
pub struct Sources<'a> {
    pub config_path: Option<&'a Path>,
    pub preset: Option<&'a str>,
    pub overrides: &'a [String],
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: ConfigFile,
    pub preset_name: Option<String>,
}

pub fn resolve(sources: &Sources<'_>) -> Result<Resolved, CliError> {
    let file_table = match sources.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
            toml::from_str::<Table>(&text)
                .map_err(|e| CliError::Usage(format!("cannot parse config `{}`: {e}", path.display())))?
        }
        None => Table::new(),
    };
    let file_preset = match file_table.get("preset") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(CliError::Usage("`preset` must be a string".into())),
        None => None,
    };
    let preset_name = sources.preset.map(str::to_string).or(file_preset);

    let mut table = match &preset_name {
        Some(name) => {
            let p = preset(name).map_err(|e| CliError::Usage(e.to_string()))?;
            Table::try_from(ConfigFile::from_preset(&p))
                .map_err(|e| CliError::Runtime(format!("cannot tabulate preset: {e}")))?
        }
        None => Table::new(),
    };
    merge(&mut table, file_table);
    for item in sources.overrides {
        apply_override(&mut table, item)?;
    }
    // provenance is informational; a manifest's [meta] never feeds back
    table.remove("meta");
    table.remove("preset");
    let file: ConfigFile = table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Usage(format!("invalid configuration: {}", e.message())))?;
    Ok(Resolved { file, preset_name })
}
