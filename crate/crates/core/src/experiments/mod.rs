//! Experiment configs, dataset generation, hybrid collocation, inhomogeneous
//! composition and end-to-end runs.

mod compose;
mod config;
mod dataset;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::MultiIndex;
use crate::diagnostics::{
    boundary_residual, energy_series, l1_metrics, pde_residual_fd, BoundarySampler, Domain,
    EnergySeries, ModelPredictor, Predictor,
};
use crate::error::{Error, Result};
use crate::gp::checkpoint::Checkpoint;
use crate::gp::{fit_with_trace, posterior_coeffs, Dataset, ObservationGroup};
use crate::oracles::{FieldSpec, RectangleSeries, SharedField};

pub use compose::{compose_inhomogeneous, Composed};
pub use config::{
    CollocationSpec, DataSpec, EnergySpec, EvalSpec, ExperimentConfig, RectangleTruth,
    ReferenceValues, ResidualSpec, TruthSpec, CONFIG_VERSION,
};
pub use dataset::{box_perimeter, build_dataset, hybrid_collocation, linspace};

/// File name of the trained model written next to the snapshots.
pub const CHECKPOINT_FILE: &str = "model.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub initial_value: usize,
    pub initial_velocity: usize,
    pub boundary_collocation: usize,
}

impl DatasetSummary {
    fn of(data: &Dataset) -> Self {
        let count = |g| data.observations.iter().filter(|o| o.group == g).count();
        Self {
            rows: data.len(),
            initial_value: count(ObservationGroup::InitialValue),
            initial_velocity: count(ObservationGroup::InitialVelocity),
            boundary_collocation: count(ObservationGroup::BoundaryCollocation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub basis_count: usize,
    pub epochs: usize,
    /// Best loss seen; absent when no epochs ran.
    pub best_loss: Option<f64>,
    pub halvings: usize,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub median_abs: Option<f64>,
    pub rel: Option<f64>,
    /// Largest imaginary part discarded from the complex prediction.
    pub max_imag: f64,
    pub eval_points: usize,
    pub eval_spacing: f64,
    pub eval_time_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Boundary residual of the homogeneous part on the family's flat pieces.
    pub boundary_flat: Option<f64>,
    /// Boundary residual of the full prediction on the collocation arcs.
    pub boundary_arcs: Option<f64>,
    pub pde_fd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(flatten)]
    pub series: EnergySeries,
    pub max_relative_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHandle {
    pub time: Option<f64>,
    /// File name relative to the output directory.
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseError {
    pub phase: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub family: String,
    pub seed: u64,
    pub config_sha256: String,
    pub dataset: Option<DatasetSummary>,
    pub training: Option<TrainingSummary>,
    pub metrics: Option<Metrics>,
    pub energy: Option<EnergyReport>,
    pub residuals: Residuals,
    pub snapshots: Vec<SnapshotHandle>,
    pub reference: Option<ReferenceValues>,
    pub errors: Vec<PhaseError>,
    /// All phases succeeded and every number is finite.
    pub complete: bool,
    /// Wall time of each phase in seconds.
    pub timings: BTreeMap<String, f64>,
    /// SHA-256 of this report with timings and the hash itself blanked.
    pub determinism_hash: String,
}

impl RunReport {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let text = cfg.to_toml()?;
        Ok(Self {
            name: cfg.name.clone(),
            family: cfg.family.to_string(),
            seed: cfg.train.seed,
            config_sha256: hex::encode(Sha256::digest(text.as_bytes())),
            dataset: None,
            training: None,
            metrics: None,
            energy: None,
            residuals: Residuals::default(),
            snapshots: Vec::new(),
            reference: cfg.reference.clone(),
            errors: Vec::new(),
            complete: false,
            timings: BTreeMap::new(),
            determinism_hash: String::new(),
        })
    }

    fn numbers(&self) -> Vec<f64> {
        let mut v = Vec::new();
        if let Some(t) = &self.training {
            v.extend(t.best_loss);
            v.push(t.noise_variance);
        }
        if let Some(m) = &self.metrics {
            v.extend(m.median_abs);
            v.extend(m.rel);
            v.push(m.max_imag);
        }
        if let Some(e) = &self.energy {
            v.extend(&e.series.energy);
            v.push(e.max_relative_drift);
        }
        v.extend(self.residuals.boundary_flat);
        v.extend(self.residuals.boundary_arcs);
        v.extend(self.residuals.pde_fd);
        v
    }

    /// Hash of the report content that does not depend on wall time.
    pub fn content_hash(&self) -> String {
        let mut copy = self.clone();
        copy.timings.clear();
        copy.determinism_hash.clear();
        let json = serde_json::to_vec(&copy).expect("report serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    fn fail(&mut self, phase: &str, e: Error) {
        self.errors.push(PhaseError {
            phase: phase.into(),
            message: e.to_string(),
        });
    }

    fn finish(mut self) -> Self {
        if self.numbers().iter().any(|v| !v.is_finite()) {
            self.errors.push(PhaseError {
                phase: "report".into(),
                message: "non-finite value in report".into(),
            });
        }
        self.complete = self.errors.is_empty();
        self.determinism_hash = self.content_hash();
        self
    }
}

/// Sum of the configured reference fields.
struct Truth(Vec<SharedField>);

impl Truth {
    fn build(spec: &TruthSpec) -> Result<Self> {
        let mut parts = Vec::new();
        if let Some(f) = &spec.field {
            parts.push(f.build()?);
        }
        if let Some(r) = &spec.rectangle_series {
            let initial = r.initial.build()?;
            let velocity = r.velocity.as_ref().map(|v| v.build()).transpose()?;
            let series = RectangleSeries::new(initial.as_ref(), velocity.as_deref(), r.length, r.cutoff)?;
            parts.push(std::sync::Arc::new(series));
        }
        Ok(Self(parts))
    }

    fn evaluate(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let d = MultiIndex::zero(points.first().map_or(0, |p| p.len()));
        let mut total = vec![0.0; points.len()];
        for f in &self.0 {
            for (t, v) in total.iter_mut().zip(f.as_ref().evaluate(points, &d)?) {
                *t += v;
            }
        }
        Ok(total)
    }
}

fn eval_times(ev: &EvalSpec) -> Option<Vec<f64>> {
    let ([a, b], step) = (ev.time_range?, ev.time_step?);
    let n = ((b - a) / step + 1e-9).floor() as usize + 1;
    Some((0..n).map(|k| a + k as f64 * step).collect())
}

/// Spacetime points (time first) of the evaluation grid.
fn spacetime(lattice: &[Vec<f64>], times: Option<&[f64]>) -> Vec<Vec<f64>> {
    match times {
        None => lattice.to_vec(),
        Some(ts) => ts
            .iter()
            .flat_map(|t| lattice.iter().map(move |x| std::iter::once(*t).chain(x.iter().copied()).collect()))
            .collect(),
    }
}

fn random_interior(domain: &Domain, times: Option<[f64; 2]>, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = domain.bounds();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count.max(1) {
        tries += 1;
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..*b)).collect();
        if !domain.contains(&x) {
            continue;
        }
        out.push(match times {
            Some([a, b]) if b > a => std::iter::once(rng.random_range(a..b)).chain(x).collect(),
            Some([a, _]) => std::iter::once(a).chain(x).collect(),
            None => x,
        });
    }
    out
}

fn coordinate_names(dim: usize, has_time: bool) -> Vec<&'static str> {
    let names: &[&str] = if has_time { &["t", "x", "y", "z"] } else { &["x", "y", "z"] };
    names[..dim].to_vec()
}

fn snapshot_csv(names: &[&str], points: &[Vec<f64>], values: &[f64], truth: Option<&[f64]>) -> String {
    let mut out = names.join(",");
    out.push_str(",value");
    if truth.is_some() {
        out.push_str(",truth,abs_err");
    }
    out.push('\n');
    for (h, p) in points.iter().enumerate() {
        for c in p {
            let _ = write!(out, "{c},");
        }
        let _ = write!(out, "{}", values[h]);
        if let Some(t) = truth {
            let _ = write!(out, ",{},{}", t[h], (values[h] - t[h]).abs());
        }
        out.push('\n');
    }
    out
}

/// Build the dataset, fit, form the posterior mean and evaluate the
/// configured metrics, energy, residuals and snapshots. Snapshot CSVs and the
/// trained model are written under `out_dir` when given. Phase failures are
/// recorded in the report, which is then flagged incomplete.
pub fn run(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunReport> {
    cfg.validate()?;
    let family = cfg.basis()?;
    let size = cfg.basis_size()?;
    let has_time = family.operator.has_time();
    let mut report = RunReport::new(cfg)?;
    let mut clock = Instant::now();
    let mut lap = |report: &mut RunReport, phase: &str| {
        report.timings.insert(phase.into(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };
    if let Some(dir) = out_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            report.fail("output", Error::io(dir, e));
            return Ok(report.finish());
        }
    }

    let data = match build_dataset(cfg) {
        Ok(d) => d,
        Err(e) => {
            report.fail("dataset", e);
            return Ok(report.finish());
        }
    };
    report.dataset = Some(DatasetSummary::of(&data));
    lap(&mut report, "dataset");

    let (model, trace) = match fit_with_trace(&family, &data, size, &cfg.train) {
        Ok(r) => r,
        Err(e) => {
            report.fail("fit", e);
            return Ok(report.finish());
        }
    };
    report.training = Some(TrainingSummary {
        basis_count: model.basis_count(),
        epochs: trace.losses.len(),
        best_loss: trace.best_loss.is_finite().then_some(trace.best_loss),
        halvings: trace.halvings,
        noise_variance: model.log_noise.exp(),
    });
    lap(&mut report, "fit");

    let predictor = match posterior_coeffs(&model, &data, &cfg.train.likelihood())
        .and_then(|c| ModelPredictor::new(model.clone(), c))
    {
        Ok(p) => p,
        Err(e) => {
            report.fail("posterior", e);
            return Ok(report.finish());
        }
    };
    if let Some(dir) = out_dir {
        if let Err(e) = Checkpoint::new(&model, &cfg.train).save(&dir.join(CHECKPOINT_FILE)) {
            report.fail("checkpoint", e);
        }
    }
    lap(&mut report, "posterior");

    let particular = cfg
        .particular_solution
        .clone()
        .unwrap_or(FieldSpec::Zero { dim: family.dim })
        .build()
        .and_then(|p| compose_inhomogeneous(p, predictor));
    let u = match particular {
        Ok(u) => u,
        Err(e) => {
            report.fail("compose", e);
            return Ok(report.finish());
        }
    };
    let truth = match cfg.truth.as_ref().map(Truth::build).transpose() {
        Ok(t) => t,
        Err(e) => {
            report.fail("truth", e);
            None
        }
    };
    lap(&mut report, "truth");

    let ev = &cfg.evaluation;
    let times = eval_times(ev);
    let lattice = ev.domain.node_lattice(ev.spacing);
    let grid = spacetime(&lattice, times.as_deref());
    let evaluated = (|| -> Result<Metrics> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let zero = MultiIndex::zero(family.dim);
        let (v, max_imag) = u.homogeneous().evaluate_with_imag(&grid, &zero)?;
        let p = u.particular().as_ref().evaluate(&grid, &zero)?;
        let values: Vec<f64> = v.iter().zip(&p).map(|(a, b)| a + b).collect();
        let l1 = match &truth {
            Some(t) => Some(l1_metrics(&values, &t.evaluate(&grid)?)?),
            None => None,
        };
        Ok(Metrics {
            median_abs: l1.map(|m| m.median_abs),
            rel: l1.map(|m| m.rel),
            max_imag,
            eval_points: grid.len(),
            eval_spacing: ev.spacing,
            eval_time_step: ev.time_step,
        })
    })();
    match evaluated {
        Ok(m) => report.metrics = Some(m),
        Err(e) => report.fail("evaluate", e),
    }
    lap(&mut report, "evaluate");

    if let Some(spec) = &cfg.energy {
        let domain = spec.domain.as_ref().unwrap_or(&ev.domain);
        match energy_series(&u, domain, &spec.times, spec.spacing) {
            Ok(series) => {
                let max_relative_drift = series.max_relative_drift();
                report.energy = Some(EnergyReport {
                    series,
                    max_relative_drift,
                });
            }
            Err(e) => report.fail("energy", e),
        }
        lap(&mut report, "energy");
    }

    let res = &cfg.residuals;
    let seed = cfg.train.seed;
    let window = ev.time_range.map(|[a, b]| (a, b)).unwrap_or((0.0, 0.0));
    if has_time && !family.boundaries.is_empty() {
        let sampler = BoundarySampler::Planes {
            planes: family.boundaries.clone(),
            domain: ev.domain.clone(),
            times: window,
        };
        match boundary_residual(u.homogeneous(), &sampler, res.boundary_samples, seed) {
            Ok(r) => report.residuals.boundary_flat = Some(r),
            Err(e) => report.fail("boundary_flat", e),
        }
    }
    if !cfg.collocation.is_empty() {
        let mut worst: Option<f64> = Some(0.0);
        for c in &cfg.collocation {
            let sampler = BoundarySampler::Arc {
                radius: c.radius,
                angles: (c.angles[0], c.angles[1]),
                times: (c.time_range[0], c.time_range[1]),
                op: c.operator,
            };
            match boundary_residual(&u, &sampler, res.boundary_samples, seed) {
                Ok(r) => worst = worst.map(|w| w.max(r)),
                Err(e) => {
                    report.fail("boundary_arcs", e);
                    worst = None;
                }
            }
        }
        report.residuals.boundary_arcs = worst;
    }
    let interior = random_interior(&ev.domain, ev.time_range, res.pde_points, seed);
    match pde_residual_fd(&u, family.operator, &interior, res.fd_step) {
        Ok(r) => report.residuals.pde_fd = Some(r),
        Err(e) => report.fail("pde_fd", e),
    }
    lap(&mut report, "residuals");

    if let Some(dir) = out_dir {
        let names = coordinate_names(family.dim, has_time);
        let snaps: Vec<Option<f64>> = if has_time {
            ev.snapshot_times.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for (k, t) in snaps.into_iter().enumerate() {
            let pts = match t {
                Some(t) => spacetime(&lattice, Some(&[t])),
                None => lattice.clone(),
            };
            let written = (|| -> Result<usize> {
                let values = u.evaluate(&pts, &MultiIndex::zero(family.dim))?;
                let truth_values = truth.as_ref().map(|tr| tr.evaluate(&pts)).transpose()?;
                let file = dir.join(format!("snapshot_{k:03}.csv"));
                std::fs::write(&file, snapshot_csv(&names, &pts, &values, truth_values.as_deref()))
                    .map_err(|e| Error::io(&file, e))?;
                Ok(pts.len())
            })();
            match written {
                Ok(rows) => report.snapshots.push(SnapshotHandle {
                    time: t,
                    file: format!("snapshot_{k:03}.csv"),
                    rows,
                }),
                Err(e) => report.fail("snapshots", e),
            }
        }
        lap(&mut report, "snapshots");
    }

    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::tests::WAVE1D;

    fn tiny() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::from_toml(WAVE1D).unwrap();
        cfg.train.schedule[0].epochs = 3;
        cfg.train.schedule[1].epochs = 2;
        cfg.train.schedule[2].epochs = 0;
        cfg.evaluation.time_step = Some(1.0);
        cfg.evaluation.snapshot_times = vec![0.0, 2.0];
        cfg.truth = Some(TruthSpec {
            field: Some(FieldSpec::Exact {
                solution: crate::oracles::ExactSolution::Wave1dNeumannBenchmark,
            }),
            rectangle_series: None,
        });
        cfg
    }

    #[test]
    fn small_run_fills_every_section() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&tiny(), Some(dir.path())).unwrap();
        assert!(report.complete, "{:?}", report.errors);
        let m = report.metrics.as_ref().unwrap();
        assert!(m.median_abs.unwrap().is_finite());
        assert_eq!(m.eval_points, 41 * 9);
        assert!(report.residuals.boundary_flat.unwrap() <= 1e-10);
        assert!(report.residuals.pde_fd.is_some());
        assert_eq!(report.snapshots.len(), 2);
        let csv = std::fs::read_to_string(dir.path().join(&report.snapshots[1].file)).unwrap();
        assert!(csv.starts_with("t,x,value,truth,abs_err\n"));
        assert_eq!(csv.lines().count(), 42);
        assert!(dir.path().join(CHECKPOINT_FILE).exists());
    }

    #[test]
    fn reports_are_reproducible_apart_from_timings() {
        let a = run(&tiny(), None).unwrap();
        let b = run(&tiny(), None).unwrap();
        assert_eq!(a.determinism_hash, b.determinism_hash);
        assert_eq!(a.determinism_hash, a.content_hash());
        let mut other = tiny();
        other.train.seed = 1;
        assert_ne!(run(&other, None).unwrap().determinism_hash, a.determinism_hash);
    }

    #[test]
    fn dataset_failure_is_reported_not_raised() {
        let mut cfg = tiny();
        if let DataSpec::InitialSlice { spacing, .. } = &mut cfg.data {
            *spacing = 20.0;
        }
        let report = run(&cfg, None).unwrap();
        assert!(!report.complete);
        assert_eq!(report.errors[0].phase, "dataset");
        assert!(report.metrics.is_none());
    }
}
