use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{catalog_lookup, BasisFamily, BoundaryOp, FamilyId};
use crate::diagnostics::{Domain, ENERGY_SPACING};
use crate::error::{Error, Result};
use crate::gp::{BasisSize, GroupNoise, TrainConfig};
use crate::oracles::FieldSpec;

/// Current config schema version.
pub const CONFIG_VERSION: u32 = 1;

/// Where training observations come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    /// Node lattice of `domain` at a fixed time carrying `u` and optionally `u_t`.
    InitialSlice {
        domain: Domain,
        spacing: f64,
        initial: FieldSpec,
        #[serde(default)]
        velocity: Option<FieldSpec>,
        #[serde(default)]
        time: f64,
    },
    /// `points` equispaced points around the perimeter of a 2D box, for
    /// stationary problems.
    BoxBoundary {
        domain: Domain,
        points: usize,
        values: FieldSpec,
    },
}

/// Zero-valued observations on the arc `(r cos φ, r sin φ)`,
/// `φ ∈ [angles[0], angles[1]]`, on an equispaced angle × time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollocationSpec {
    pub radius: f64,
    pub angles: [f64; 2],
    #[serde(default = "default_collocation_op")]
    pub operator: BoundaryOp,
    pub n_space: usize,
    pub n_time: usize,
    pub time_range: [f64; 2],
}

/// Separation-of-variables reference on `(0, L)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleTruth {
    pub length: f64,
    pub cutoff: usize,
    pub initial: FieldSpec,
    #[serde(default)]
    pub velocity: Option<FieldSpec>,
}

/// Reference solution; present parts are summed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSpec {
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub rectangle_series: Option<RectangleTruth>,
}

fn default_collocation_op() -> BoundaryOp {
    BoundaryOp::Dirichlet
}

fn default_spacing() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    pub domain: Domain,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Inclusive time window sampled at `time_step`; absent for stationary problems.
    #[serde(default)]
    pub time_range: Option<[f64; 2]>,
    #[serde(default)]
    pub time_step: Option<f64>,
    /// Times written as snapshot grids.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn default_energy_spacing() -> f64 {
    ENERGY_SPACING
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    pub times: Vec<f64>,
    #[serde(default = "default_energy_spacing")]
    pub spacing: f64,
    /// Defaults to the evaluation domain.
    #[serde(default)]
    pub domain: Option<Domain>,
}

fn default_boundary_samples() -> usize {
    200
}
fn default_pde_points() -> usize {
    100
}
fn default_fd_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSpec {
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
    #[serde(default = "default_pde_points")]
    pub pde_points: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        Self {
            boundary_samples: default_boundary_samples(),
            pde_points: default_pde_points(),
            fd_step: default_fd_step(),
        }
    }
}

/// Published full-scale values carried into reports for context.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceValues {
    #[serde(default)]
    pub median_abs: Option<f64>,
    #[serde(default)]
    pub rel: Option<f64>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub family: FamilyId,
    /// Side length of discrete families.
    #[serde(default)]
    pub length: Option<f64>,
    #[serde(default)]
    pub basis_count: Option<usize>,
    #[serde(default)]
    pub discrete_cutoff: Option<usize>,
    pub data: DataSpec,
    #[serde(default)]
    pub collocation: Vec<CollocationSpec>,
    /// Particular solution `u_p`; the model learns `v = u − u_p`.
    #[serde(default)]
    pub particular_solution: Option<FieldSpec>,
    #[serde(default)]
    pub noise_floor: Option<f64>,
    #[serde(default)]
    pub group_noise: Option<GroupNoise>,
    #[serde(default)]
    pub train: TrainConfig,
    pub evaluation: EvalSpec,
    #[serde(default)]
    pub truth: Option<TruthSpec>,
    #[serde(default)]
    pub energy: Option<EnergySpec>,
    #[serde(default)]
    pub residuals: ResidualSpec,
    #[serde(default)]
    pub reference: Option<ReferenceValues>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The family with this config's side length applied.
    pub fn basis(&self) -> Result<BasisFamily> {
        let f = catalog_lookup(self.family);
        match self.length {
            Some(l) => f.with_length(l),
            None => Ok(f),
        }
    }

    pub fn basis_size(&self) -> Result<BasisSize> {
        let discrete = catalog_lookup(self.family).is_discrete();
        match (discrete, self.basis_count, self.discrete_cutoff) {
            (false, Some(n), None) => Ok(BasisSize::Count(n)),
            (true, None, Some(j)) => Ok(BasisSize::Cutoff(j)),
            (true, _, _) => Err(Error::Config(format!(
                "{} is discrete: set discrete_cutoff and not basis_count",
                self.family
            ))),
            (false, _, _) => Err(Error::Config(format!(
                "{} is continuous: set basis_count and not discrete_cutoff",
                self.family
            ))),
        }
    }

    /// Spatial dimension of the family.
    fn spatial_dim(&self, family: &BasisFamily) -> usize {
        family.dim - usize::from(family.operator.has_time())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        let family = self.basis()?;
        let size = self.basis_size()?;
        if matches!(size, BasisSize::Count(0) | BasisSize::Cutoff(0)) {
            return bad("basis size must be at least 1".into());
        }
        if self.length.is_some() && !family.is_discrete() {
            return bad("length applies only to discrete families".into());
        }
        self.train.validate()?;
        let sdim = self.spatial_dim(&family);
        let has_time = family.operator.has_time();
        match &self.data {
            DataSpec::InitialSlice {
                domain,
                spacing,
                initial,
                velocity,
                ..
            } => {
                if !has_time {
                    return bad("initial-slice data needs a time-dependent family".into());
                }
                domain.validate()?;
                if domain.dim() != sdim {
                    return bad(format!("data domain has dimension {} but the family has {sdim} space dimensions", domain.dim()));
                }
                if !(*spacing > 0.0) {
                    return bad("data spacing must be positive".into());
                }
                for f in std::iter::once(initial).chain(velocity) {
                    let built = f.build()?;
                    if built.dim() != sdim {
                        return bad(format!("initial field has dimension {}, expected {sdim}", built.dim()));
                    }
                }
            }
            DataSpec::BoxBoundary { domain, points, values } => {
                if has_time {
                    return bad("box-boundary data is for stationary families".into());
                }
                if !matches!(domain, Domain::Box { lo, .. } if lo.len() == 2) {
                    return bad("box-boundary data needs a 2D box domain".into());
                }
                domain.validate()?;
                if *points < 4 {
                    return bad("box-boundary data needs at least 4 points".into());
                }
                if values.build()?.dim() != 2 {
                    return bad("boundary values must be a planar field".into());
                }
            }
        }
        for c in &self.collocation {
            if !has_time {
                return bad("collocation curves need a time-dependent family".into());
            }
            if c.n_space == 0 || c.n_time == 0 {
                return bad("collocation counts must be at least 1".into());
            }
            if c.time_range[1] < c.time_range[0] {
                return bad("collocation time range is reversed".into());
            }
            if sdim != 2 || !(c.radius > 0.0) || c.angles[1] < c.angles[0] {
                return bad("collocation arcs need a planar family, a positive radius and increasing angles".into());
            }
            if c.operator == BoundaryOp::Neumann {
                return bad("Neumann collocation on arcs is not supported: the normal derivative is not a single multi-index".into());
            }
        }
        if let Some(p) = &self.particular_solution {
            if p.build()?.dim() != family.dim {
                return bad("particular solution must be a spacetime field".into());
            }
        }
        if let Some(f) = self.noise_floor {
            if !(f > 0.0) {
                return bad("noise_floor must be positive".into());
            }
        }
        let ev = &self.evaluation;
        ev.domain.validate()?;
        if ev.domain.dim() != sdim || !(ev.spacing > 0.0) {
            return bad("evaluation domain must match the spatial dimension with positive spacing".into());
        }
        match (has_time, ev.time_range, ev.time_step) {
            (true, Some([a, b]), Some(s)) if b >= a && s > 0.0 => {}
            (true, _, _) => return bad("evaluation needs time_range and a positive time_step".into()),
            (false, None, None) => {}
            (false, _, _) => return bad("stationary families take no evaluation times".into()),
        }
        if let Some(t) = &self.truth {
            if let Some(f) = &t.field {
                if f.build()?.dim() != family.dim {
                    return bad("truth field must be defined on the family's coordinates".into());
                }
            }
            if let Some(r) = &t.rectangle_series {
                if family.dim != 3 {
                    return bad("rectangle series truth needs a 2D wave family".into());
                }
                if r.cutoff == 0 || !(r.length > 0.0) {
                    return bad("rectangle series needs a positive length and cutoff".into());
                }
            }
            if t.field.is_none() && t.rectangle_series.is_none() {
                return bad("truth section is empty".into());
            }
        }
        if let Some(e) = &self.energy {
            if !has_time {
                return bad("energy needs a time-dependent family".into());
            }
            if e.times.is_empty() || !(e.spacing > 0.0) {
                return bad("energy needs times and a positive spacing".into());
            }
            if let Some(d) = &e.domain {
                d.validate()?;
                if d.dim() != sdim {
                    return bad("energy domain dimension mismatch".into());
                }
            }
        }
        if !(self.residuals.fd_step > 0.0) {
            return bad("fd_step must be positive".into());
        }
        Ok(())
    }
}
