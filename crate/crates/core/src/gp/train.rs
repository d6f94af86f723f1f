use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::likelihood::{nlml_grad, Gradient, LikelihoodOptions};
use super::optim::{Optimizer, OptimizerKind};
use super::{refresh_scales, Dataset, ModelState};
use crate::basis::{enumerate_discrete, BasisFamily, Branch, Params, DEFAULT_LOG_CAP};
use crate::error::{Error, Result};

/// Maximum number of learning-rate halvings after failed steps.
pub const MAX_HALVINGS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub epochs: usize,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub schedule: Vec<Stage>,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub jitter: f64,
    /// Keep the factor `N` in the prior precision of `A`.
    pub scale_by_basis_count: bool,
    pub init_log_noise: f64,
    /// Hold `σ₀²` at its initial value.
    pub fixed_noise: bool,
    /// Optimize the frequencies of continuous families.
    pub train_frequencies: bool,
    /// Length used to scale initial frequencies; defaults to the spatial
    /// diameter of the data.
    pub init_diameter: Option<f64>,
    /// Number of oscillations across the domain set by the initial
    /// imaginary-part spread.
    pub init_modes: f64,
    /// Initial real-part spread times the diameter.
    pub init_growth: f64,
    pub log_cap: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schedule: vec![
                Stage { epochs: 10000, lr: 0.1 },
                Stage { epochs: 10000, lr: 0.01 },
                Stage { epochs: 1000, lr: 0.001 },
            ],
            optimizer: OptimizerKind::Adam,
            seed: 0,
            jitter: 1e-10,
            scale_by_basis_count: true,
            init_log_noise: (1e-4f64).ln(),
            fixed_noise: false,
            train_frequencies: true,
            init_diameter: None,
            init_modes: 10.0,
            init_growth: 0.5,
            log_cap: DEFAULT_LOG_CAP,
        }
    }
}

impl TrainConfig {
    pub fn likelihood(&self) -> LikelihoodOptions {
        LikelihoodOptions {
            jitter: self.jitter,
            scale_by_basis_count: self.scale_by_basis_count,
            log_cap: self.log_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.schedule {
            if !(s.lr > 0.0 && s.lr.is_finite()) {
                return Err(Error::Config(format!("learning rate {} must be positive", s.lr)));
            }
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::Config("jitter must be non-negative".into()));
        }
        if let Some(d) = self.init_diameter {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Config("init_diameter must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn total_epochs(&self) -> usize {
        self.schedule.iter().map(|s| s.epochs).sum()
    }

    /// Multiply every stage's epoch count, rounding to the nearest integer.
    pub fn scale_epochs(&mut self, factor: f64) {
        for s in &mut self.schedule {
            s.epochs = (s.epochs as f64 * factor).round() as usize;
        }
    }
}

/// Number of basis elements: a count for continuous families, a lattice
/// cutoff for discrete ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSize {
    Count(usize),
    Cutoff(usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    /// Loss at the start of each completed epoch.
    pub losses: Vec<f64>,
    pub best_loss: f64,
    pub halvings: usize,
}

fn spatial_diameter(family: &BasisFamily, data: &Dataset) -> f64 {
    let first = usize::from(family.operator.has_time());
    let mut d2 = 0.0;
    for i in first..family.dim {
        let (lo, hi) = data
            .observations
            .iter()
            .map(|o| o.point[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi > lo {
            d2 += (hi - lo) * (hi - lo);
        }
    }
    if d2 > 0.0 {
        d2.sqrt()
    } else {
        1.0
    }
}

/// Initial state: random frequencies with alternating root signs, unit
/// prior variances and the configured noise level.
pub fn initial_state(
    family: &BasisFamily,
    data: &Dataset,
    size: BasisSize,
    cfg: &TrainConfig,
) -> Result<ModelState> {
    data.validate(family.dim)?;
    cfg.validate()?;
    let thetas = match (family.is_discrete(), size) {
        (true, BasisSize::Cutoff(j)) => enumerate_discrete(family, j)?,
        (false, BasisSize::Count(n)) => {
            if n == 0 {
                return Err(Error::Invalid("basis count must be at least 1".into()));
            }
            let diam = cfg.init_diameter.unwrap_or_else(|| spatial_diameter(family, data));
            let re = Normal::new(0.0, cfg.init_growth / diam).map_err(|e| Error::Config(e.to_string()))?;
            let im = Normal::new(0.0, std::f64::consts::PI * cfg.init_modes / diam)
                .map_err(|e| Error::Config(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..n)
                .map(|j| {
                    let values = (0..family.free_params)
                        .map(|_| Complex64::new(re.sample(&mut rng), im.sample(&mut rng)))
                        .collect();
                    let branch = if j % 2 == 0 { Branch::Plus } else { Branch::Minus };
                    Params { values, branch }
                })
                .collect()
        }
        (true, BasisSize::Count(_)) => {
            return Err(Error::Config(format!(
                "{} is discrete and needs a lattice cutoff",
                family.id
            )))
        }
        (false, BasisSize::Cutoff(_)) => {
            return Err(Error::Config(format!(
                "{} is continuous and needs a basis count",
                family.id
            )))
        }
    };
    let mut model = ModelState::new(family, thetas, cfg.init_log_noise.max(data.noise_floor.ln()));
    refresh_scales(family, &mut model, data)?;
    Ok(model)
}

struct Layout {
    thetas: bool,
    noise: bool,
    p: usize,
    n: usize,
}

impl Layout {
    fn len(&self) -> usize {
        let t = if self.thetas { 2 * self.n * self.p } else { 0 };
        t + self.n + usize::from(self.noise)
    }

    fn flatten(&self, m: &ModelState) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        if self.thetas {
            for th in &m.thetas {
                for v in &th.values {
                    x.push(v.re);
                    x.push(v.im);
                }
            }
        }
        x.extend_from_slice(&m.log_var);
        if self.noise {
            x.push(m.log_noise);
        }
        x
    }

    fn gradient(&self, g: &Gradient) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        if self.thetas {
            for th in &g.thetas {
                for pair in th {
                    x.extend_from_slice(pair);
                }
            }
        }
        x.extend_from_slice(&g.log_var);
        if self.noise {
            x.push(g.log_noise);
        }
        x
    }

    fn apply(&self, x: &[f64], m: &mut ModelState) {
        let mut i = 0;
        if self.thetas {
            for th in &mut m.thetas {
                for v in &mut th.values {
                    *v = Complex64::new(x[i], x[i + 1]);
                    i += 2;
                }
            }
        }
        m.log_var.copy_from_slice(&x[i..i + self.n]);
        i += self.n;
        if self.noise {
            m.log_noise = x[i];
        }
    }
}

fn finite(g: &Gradient) -> bool {
    g.value.is_finite()
        && g.log_noise.is_finite()
        && g.log_var.iter().all(|v| v.is_finite())
        && g.thetas.iter().flatten().all(|p| p[0].is_finite() && p[1].is_finite())
}

/// Train on the full-batch marginal likelihood and return the best state.
pub fn fit(
    family: &BasisFamily,
    data: &Dataset,
    size: BasisSize,
    cfg: &TrainConfig,
) -> Result<ModelState> {
    fit_with_trace(family, data, size, cfg).map(|(m, _)| m)
}

pub fn fit_with_trace(
    family: &BasisFamily,
    data: &Dataset,
    size: BasisSize,
    cfg: &TrainConfig,
) -> Result<(ModelState, TrainTrace)> {
    let init = initial_state(family, data, size, cfg)?;
    train_from(family, init, data, cfg)
}

/// Continue training from an explicit state.
pub fn train_from(
    family: &BasisFamily,
    init: ModelState,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<(ModelState, TrainTrace)> {
    cfg.validate()?;
    init.validate(family)?;
    let mut trace = TrainTrace {
        best_loss: f64::INFINITY,
        ..TrainTrace::default()
    };
    if cfg.total_epochs() == 0 {
        return Ok((init, trace));
    }
    let opts = cfg.likelihood();
    let layout = Layout {
        thetas: cfg.train_frequencies && !family.is_discrete(),
        noise: !cfg.fixed_noise,
        p: family.free_params,
        n: init.basis_count(),
    };
    let log_floor = data.noise_floor.max(f64::MIN_POSITIVE).ln();
    let mut opt = Optimizer::new(cfg.optimizer, layout.len());
    let mut state = init;
    let mut last_good: Option<ModelState> = None;
    let mut best = state.clone();
    let mut lr_factor = 1.0;
    let mut epoch = 0;

    for stage in &cfg.schedule {
        let mut done = 0;
        while done < stage.epochs {
            let eval = nlml_grad(&state, data, &opts).and_then(|g| {
                if finite(&g) {
                    Ok(g)
                } else {
                    Err(Error::Invalid("non-finite loss or gradient".into()))
                }
            });
            match eval {
                Ok(g) => {
                    trace.losses.push(g.value);
                    if g.value < trace.best_loss {
                        trace.best_loss = g.value;
                        best = state.clone();
                    }
                    let mut x = layout.flatten(&state);
                    opt.step(&mut x, &layout.gradient(&g), stage.lr * lr_factor);
                    last_good = Some(state.clone());
                    layout.apply(&x, &mut state);
                    state.log_noise = state.log_noise.max(log_floor);
                    done += 1;
                    epoch += 1;
                }
                Err(e) => {
                    let Some(prev) = last_good.take() else {
                        return Err(Error::Training {
                            epoch,
                            source: Box::new(e),
                        });
                    };
                    if trace.halvings >= MAX_HALVINGS {
                        return Err(Error::Training {
                            epoch,
                            source: Box::new(e),
                        });
                    }
                    trace.halvings += 1;
                    lr_factor *= 0.5;
                    state = prev;
                    opt = Optimizer::new(cfg.optimizer, layout.len());
                    // The reverted epoch is repeated at the smaller rate.
                    trace.losses.pop();
                    done = done.saturating_sub(1);
                    epoch = epoch.saturating_sub(1);
                }
            }
        }
    }
    if let Ok(v) = super::likelihood::nlml(&state, data, &opts) {
        if v < trace.best_loss {
            trace.best_loss = v;
            best = state;
        }
    }
    refresh_scales(family, &mut best, data)?;
    Ok((best, trace))
}
