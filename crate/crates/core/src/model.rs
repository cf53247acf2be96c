//! Continuous chemotaxis models and the experiment presets built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::scheme::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChemDynamics {
    /// `0 = Δc − γc + source(u)`
    Elliptic,
    /// `∂t c = Δc − γc + source(u)`
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChemSource {
    /// Michaelis-Menten production `u / (u + 1)`.
    Saturated,
    /// Linear production `u`.
    Linear,
}

impl ChemSource {
    /// Source value without the domain check; callers guarantee `u ≥ 0`.
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            ChemSource::Saturated => u / (u + 1.0),
            ChemSource::Linear => u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Growth {
    None,
    /// `r·u(1 − u)`
    QuadraticLogistic { rate: f64 },
    /// `u²(1 − u)`
    CubicLogistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// μ
    pub cell_diffusion: f64,
    /// a (or χ)
    pub chemo_sensitivity: f64,
    /// γ
    pub chem_decay: f64,
    pub chem_dynamics: ChemDynamics,
    pub chem_source: ChemSource,
    pub growth: Growth,
}

impl ModelSpec {
    /// The parabolic-elliptic model with saturated production and unit decay.
    pub fn parabolic_elliptic(cell_diffusion: f64, chemo_sensitivity: f64) -> Self {
        ModelSpec {
            cell_diffusion,
            chemo_sensitivity,
            chem_decay: 1.0,
            chem_dynamics: ChemDynamics::Elliptic,
            chem_source: ChemSource::Saturated,
            growth: Growth::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} must be positive, got {v}")))
            }
        };
        positive("cell diffusion", self.cell_diffusion)?;
        positive("chemotactic sensitivity", self.chemo_sensitivity)?;
        positive("chemoattractant decay", self.chem_decay)?;
        if let Growth::QuadraticLogistic { rate } = self.growth {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(Error::InvalidModel(format!("growth rate must be nonnegative, got {rate}")));
            }
        }
        Ok(())
    }

    pub fn chem_source_value(&self, u: f64) -> Result<f64> {
        chem_source_value(self, u)
    }
}

pub fn chem_source_value(spec: &ModelSpec, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("chemoattractant source needs u >= 0, got {u}")));
    }
    Ok(spec.chem_source.eval(u))
}

/// Region where the initial cell density is perturbed; membership is decided
/// by the cell center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Region {
    Empty,
    /// Open rectangle `x × y`.
    Rect { x: (f64, f64), y: (f64, f64) },
    /// Open disk.
    Disk { center: Point, radius: f64 },
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Empty => false,
            Region::Rect { x, y } => p[0] > x.0 && p[0] < x.1 && p[1] > y.0 && p[1] < y.1,
            Region::Disk { center, radius } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                (dx * dx + dy * dy).sqrt() < *radius
            }
        }
    }

    /// Intersection with the box `x_range × y_range`.
    pub fn clip(&self, x_range: (f64, f64), y_range: (f64, f64)) -> Region {
        match self {
            Region::Rect { x, y } => {
                let x = (x.0.max(x_range.0), x.1.min(x_range.1));
                let y = (y.0.max(y_range.0), y.1.min(y_range.1));
                if x.0 >= x.1 || y.0 >= y.1 {
                    Region::Empty
                } else {
                    Region::Rect { x, y }
                }
            }
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionSpec {
    pub base_u: f64,
    pub base_c: f64,
    pub region: Region,
    pub seed: u64,
}

impl InitialConditionSpec {
    /// Amplitude of the random perturbation; fixed to one.
    pub const PERTURBATION_AMPLITUDE: f64 = 1.0;
    /// Number of uniform draws averaged per perturbed cell.
    pub const DRAWS_PER_CELL: usize = 10;

    pub fn uniform(base_u: f64, base_c: f64) -> Self {
        InitialConditionSpec {
            base_u,
            base_c,
            region: Region::Empty,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_u >= 0.0 && self.base_c >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "initial values must be nonnegative, got u={} c={}",
                self.base_u, self.base_c
            )));
        }
        if let Region::Disk { radius, .. } = self.region {
            if !(radius >= 0.0) {
                return Err(Error::InvalidModel(format!("disk radius must be nonnegative, got {radius}")));
            }
        }
        Ok(())
    }
}

/// Cell-averaged initial data. Cells whose center lies in the perturbation
/// region get `base_u + ε_K`, with `ε_K` the mean of ten uniform draws on
/// `[0, 1)` from a ChaCha8 stream seeded by `ic.seed`, consumed in cell order.
pub fn make_initial_state(mesh: &Mesh, ic: &InitialConditionSpec) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(ic.seed);
    let u: Vec<f64> = mesh
        .cells()
        .iter()
        .map(|cell| {
            if ic.region.contains(cell.center) {
                let sum: f64 = (0..InitialConditionSpec::DRAWS_PER_CELL)
                    .map(|_| rng.random::<f64>())
                    .sum();
                let eps = sum / InitialConditionSpec::DRAWS_PER_CELL as f64;
                ic.base_u + InitialConditionSpec::PERTURBATION_AMPLITUDE * eps
            } else {
                ic.base_u
            }
        })
        .collect();
    State::new(u, vec![ic.base_c; mesh.num_cells()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Time steps of the published error table, largest first.
    pub dt_list: Vec<f64>,
    /// Time step of the reference solution (or the single run step).
    pub dt_reference: f64,
    pub t_final: f64,
    pub model: ModelSpec,
    pub ic: InitialConditionSpec,
}

pub const TEST4_CHI_VALUES: [f64; 5] = [6.0, 7.4, 20.0, 70.0, 80.0];

impl Preset {
    pub fn test1() -> Self {
        let x_range = (-3.5, 3.5);
        let y_range = (-35.0, 35.0);
        Preset {
            name: "test1".into(),
            x_range,
            y_range,
            nx: 35,
            ny: 350,
            dt_list: vec![5.0, 1.0, 5e-1, 1e-1, 5e-2, 1e-2],
            dt_reference: 1e-3,
            t_final: 150.0,
            model: ModelSpec::parabolic_elliptic(0.25, 2.0),
            ic: InitialConditionSpec {
                base_u: 1.0,
                base_c: 0.0,
                region: Region::Rect { x: (-4.5, 4.5), y: (-1.0, 1.0) }.clip(x_range, y_range),
                seed: 1,
            },
        }
    }

    pub fn test2() -> Self {
        let mut p = Preset::test1();
        p.name = "test2".into();
        p.model.chem_dynamics = ChemDynamics::Parabolic;
        p.ic.base_c = 1.0 / 32.0;
        p
    }

    pub fn test3() -> Self {
        Preset {
            name: "test3".into(),
            x_range: (-8.0, 8.0),
            y_range: (-8.0, 8.0),
            nx: 100,
            ny: 100,
            dt_list: vec![5e-1, 1e-1, 5e-2, 1e-2, 5e-3, 1e-3],
            dt_reference: 1e-4,
            t_final: 30.0,
            model: ModelSpec {
                cell_diffusion: 0.0625,
                chemo_sensitivity: 6.0,
                chem_decay: 16.0,
                chem_dynamics: ChemDynamics::Parabolic,
                chem_source: ChemSource::Linear,
                growth: Growth::QuadraticLogistic { rate: 2.0 },
            },
            ic: InitialConditionSpec {
                base_u: 1.0,
                base_c: 1.0 / 32.0,
                region: Region::Disk { center: [0.0, 0.0], radius: 0.7 },
                seed: 1,
            },
        }
    }

    pub fn test4(chi: f64) -> Self {
        Preset {
            name: "test4".into(),
            x_range: (-10.0, 10.0),
            y_range: (-10.0, 10.0),
            nx: 150,
            ny: 150,
            dt_list: vec![1e-1],
            dt_reference: 1e-1,
            t_final: 150.0,
            model: ModelSpec {
                cell_diffusion: 0.0625,
                chemo_sensitivity: chi,
                chem_decay: 32.0,
                chem_dynamics: ChemDynamics::Parabolic,
                chem_source: ChemSource::Linear,
                growth: Growth::CubicLogistic,
            },
            ic: InitialConditionSpec {
                base_u: 1.0,
                base_c: 1.0 / 32.0,
                region: Region::Disk { center: [0.0, 0.0], radius: 1.0 },
                seed: 1,
            },
        }
    }

    /// Test 1 on `(−3.5, 3.5)²`, 48×48 cells, `T_f = 10`.
    pub fn test1_desk() -> Self {
        let x_range = (-3.5, 3.5);
        let y_range = (-3.5, 3.5);
        let mut p = Preset::test1();
        p.name = "test1-desk".into();
        p.x_range = x_range;
        p.y_range = y_range;
        p.nx = 48;
        p.ny = 48;
        p.dt_list = vec![1e-1, 5e-2, 1e-2];
        p.dt_reference = 1e-4;
        p.t_final = 10.0;
        p.ic.region = Region::Rect { x: (-4.5, 4.5), y: (-1.0, 1.0) }.clip(x_range, y_range);
        p
    }

    pub fn test2_desk() -> Self {
        let mut p = Preset::test1_desk();
        p.name = "test2-desk".into();
        p.model.chem_dynamics = ChemDynamics::Parabolic;
        p.ic.base_c = 1.0 / 32.0;
        p
    }

    /// Test 3 on 64×64 cells with `Δt = 10⁻²`.
    pub fn test3_desk() -> Self {
        let mut p = Preset::test3();
        p.name = "test3-desk".into();
        p.nx = 64;
        p.ny = 64;
        p.dt_list = vec![1e-1, 5e-2, 1e-2];
        p.dt_reference = 1e-2;
        p
    }

    /// Test 4 run to `t = 30` with `Δt = 0.02`.
    pub fn test4_desk(chi: f64) -> Self {
        let mut p = Preset::test4(chi);
        p.name = "test4-desk".into();
        p.t_final = 30.0;
        p.dt_list = vec![2e-2];
        p.dt_reference = 2e-2;
        p
    }

    pub fn mesh(&self) -> Result<Mesh> {
        crate::mesh::build_uniform_rect_mesh(self.x_range, self.y_range, self.nx, self.ny)
    }
}

/// Looks up a preset by name. `test4` defaults to `χ = 80`; another
/// sensitivity is selected with `test4:<chi>` (likewise `test4-desk:<chi>`).
pub fn preset(name: &str) -> Result<Preset> {
    let (base, chi) = match name.split_once(':') {
        Some((base, chi)) => {
            let chi: f64 = chi
                .parse()
                .map_err(|_| Error::UnknownPreset(name.to_string()))?;
            (base, Some(chi))
        }
        None => (name, None),
    };
    let p = match (base, chi) {
        ("test1", None) => Preset::test1(),
        ("test2", None) => Preset::test2(),
        ("test3", None) => Preset::test3(),
        ("test4", chi) => Preset::test4(chi.unwrap_or(80.0)),
        ("test1-desk", None) => Preset::test1_desk(),
        ("test2-desk", None) => Preset::test2_desk(),
        ("test3-desk", None) => Preset::test3_desk(),
        ("test4-desk", chi) => Preset::test4_desk(chi.unwrap_or(80.0)),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(p)
}

pub const PRESET_NAMES: [&str; 8] = [
    "test1",
    "test2",
    "test3",
    "test4",
    "test1-desk",
    "test2-desk",
    "test3-desk",
    "test4-desk",
];
