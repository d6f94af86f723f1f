//! Regression engine: design matrices, the marginal likelihood and its
//! gradient, training, posterior inference and sampling.

pub mod checkpoint;
mod likelihood;
mod optim;
mod sample;
mod train;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{catalog_lookup, BasisFamily, FamilyId, Frequencies, MultiIndex, Params};
use crate::error::{Error, Result};

pub use likelihood::{
    nlml, nlml_from_design, nlml_grad, posterior_coeffs, Gradient, LikelihoodOptions,
};
pub use optim::OptimizerKind;
pub use sample::{sample, SampleMode};
pub use train::{
    fit, fit_with_trace, initial_state, train_from, BasisSize, Stage, TrainConfig, TrainTrace,
    MAX_HALVINGS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationGroup {
    InitialValue,
    InitialVelocity,
    BoundaryCollocation,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub point: Vec<f64>,
    pub deriv: MultiIndex,
    pub value: f64,
    pub group: ObservationGroup,
}

impl Observation {
    pub fn value_at(point: Vec<f64>, value: f64, group: ObservationGroup) -> Self {
        let dim = point.len();
        Self {
            point,
            deriv: MultiIndex::zero(dim),
            value,
            group,
        }
    }
}

/// Noise variance of each observation group relative to the global `σ₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupNoise {
    pub initial_value: f64,
    pub initial_velocity: f64,
    pub boundary_collocation: f64,
    pub interior: f64,
}

impl Default for GroupNoise {
    fn default() -> Self {
        Self {
            initial_value: 1.0,
            initial_velocity: 1.0,
            boundary_collocation: 1.0,
            interior: 1.0,
        }
    }
}

impl GroupNoise {
    pub fn factor(&self, g: ObservationGroup) -> f64 {
        match g {
            ObservationGroup::InitialValue => self.initial_value,
            ObservationGroup::InitialVelocity => self.initial_velocity,
            ObservationGroup::BoundaryCollocation => self.boundary_collocation,
            ObservationGroup::Interior => self.interior,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub observations: Vec<Observation>,
    /// Lower bound on `σ₀²` during training.
    pub noise_floor: f64,
    #[serde(default)]
    pub group_noise: GroupNoise,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>) -> Self {
        Self {
            observations,
            noise_floor: 1e-12,
            group_noise: GroupNoise::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.observations.is_empty() {
            return Err(Error::EmptyDataset("no observations".into()));
        }
        for (h, o) in self.observations.iter().enumerate() {
            if o.point.len() != dim || o.deriv.dim() != dim {
                return Err(Error::Invalid(format!(
                    "observation {h} has dimension {} but the family has {dim}",
                    o.point.len()
                )));
            }
            if !o.value.is_finite() || o.point.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!("observation {h} is not finite")));
            }
        }
        for g in [
            ObservationGroup::InitialValue,
            ObservationGroup::InitialVelocity,
            ObservationGroup::BoundaryCollocation,
            ObservationGroup::Interior,
        ] {
            let f = self.group_noise.factor(g);
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Invalid(format!("noise factor for {g:?} must be positive")));
            }
        }
        Ok(())
    }

    /// Square roots of the per-row relative noise variances.
    pub(crate) fn row_noise_std(&self) -> Vec<f64> {
        self.observations
            .iter()
            .map(|o| self.group_noise.factor(o.group).sqrt())
            .collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }
}

/// Trained (or initial) hyperparameters of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub family: FamilyId,
    /// Side length for discrete families.
    pub length: f64,
    pub thetas: Vec<Params>,
    /// `log σ_j²`
    pub log_var: Vec<f64>,
    /// `log σ₀²`
    pub log_noise: f64,
    /// Per-column log scale factors divided out of the design matrix.
    pub log_scales: Vec<f64>,
}

impl ModelState {
    pub fn new(family: &BasisFamily, thetas: Vec<Params>, log_noise: f64) -> Self {
        let n = thetas.len();
        Self {
            family: family.id,
            length: family.length,
            thetas,
            log_var: vec![0.0; n],
            log_noise,
            log_scales: vec![0.0; n],
        }
    }

    pub fn basis_count(&self) -> usize {
        self.thetas.len()
    }

    pub fn basis(&self) -> Result<BasisFamily> {
        catalog_lookup(self.family).with_length(self.length)
    }

    pub fn validate(&self, family: &BasisFamily) -> Result<()> {
        let n = self.thetas.len();
        if n == 0 {
            return Err(Error::Invalid("model has no basis elements".into()));
        }
        if self.log_var.len() != n || self.log_scales.len() != n {
            return Err(Error::Invalid(format!(
                "model has {n} elements but {} variances and {} scales",
                self.log_var.len(),
                self.log_scales.len()
            )));
        }
        if self.thetas.iter().any(|p| p.values.len() != family.free_params) {
            return Err(Error::Invalid(format!(
                "{} expects {} parameters per element",
                family.id, family.free_params
            )));
        }
        // A log-variance of −∞ switches an element off.
        let finite = self.log_var.iter().all(|v| !v.is_nan() && *v != f64::INFINITY)
            && self.log_scales.iter().all(|v| v.is_finite())
            && self.log_noise.is_finite();
        if !finite {
            return Err(Error::Invalid("model hyperparameters are not finite".into()));
        }
        Ok(())
    }
}

/// `B` with entries `∂^{d_h} b(x_h; θ_j) / scale_j`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub b: Array2<Complex64>,
    pub log_scales: Vec<f64>,
}

/// Log-mean-exp of the term log-magnitudes of one element over the data,
/// with the softmax weights used for its gradient.
pub(crate) fn column_log_scale(freqs: &Frequencies, points: &[&[f64]]) -> (f64, Vec<f64>) {
    let k = freqs.z.len();
    let mut r = Vec::with_capacity(points.len() * k);
    for x in points {
        for z in &freqs.z {
            r.push(crate::basis::dot(z, x).re);
        }
    }
    let m = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return (0.0, vec![0.0; r.len()]);
    }
    let mut w: Vec<f64> = r.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    (m + (s / r.len() as f64).ln(), w)
}

fn points(data: &Dataset) -> Vec<&[f64]> {
    data.observations.iter().map(|o| o.point.as_slice()).collect()
}

/// One design column at a fixed scale.
pub(crate) fn design_column(
    family: &BasisFamily,
    freqs: &Frequencies,
    data: &Dataset,
    log_scale: f64,
    log_cap: f64,
    col: usize,
) -> Result<Vec<Complex64>> {
    data.observations
        .iter()
        .enumerate()
        .map(|(h, o)| {
            family
                .eval_cached(freqs, &o.point, &o.deriv, log_scale, log_cap)
                .map_err(|e| e.at(h, col))
        })
        .collect()
}

/// Assemble `B`, recomputing column scales from the current frequencies.
pub fn assemble_design(
    family: &BasisFamily,
    model: &ModelState,
    data: &Dataset,
) -> Result<DesignMatrix> {
    assemble_design_capped(family, model, data, crate::basis::DEFAULT_LOG_CAP)
}

pub(crate) fn assemble_design_capped(
    family: &BasisFamily,
    model: &ModelState,
    data: &Dataset,
    log_cap: f64,
) -> Result<DesignMatrix> {
    data.validate(family.dim)?;
    model.validate(family)?;
    let pts = points(data);
    let cols: Vec<(Vec<Complex64>, f64)> = model
        .thetas
        .par_iter()
        .enumerate()
        .map(|(j, p)| {
            let f = family.frequencies(p).map_err(|e| e.at(0, j))?;
            let (ls, _) = column_log_scale(&f, &pts);
            Ok((design_column(family, &f, data, ls, log_cap, j)?, ls))
        })
        .collect::<Result<_>>()?;
    let (m, n) = (data.len(), cols.len());
    let mut b = Array2::<Complex64>::zeros((m, n));
    let mut log_scales = Vec::with_capacity(n);
    for (j, (col, ls)) in cols.into_iter().enumerate() {
        for (h, v) in col.into_iter().enumerate() {
            b[[h, j]] = v;
        }
        log_scales.push(ls);
    }
    Ok(DesignMatrix { b, log_scales })
}

/// Store the column scales implied by `data` in the model.
pub fn refresh_scales(family: &BasisFamily, model: &mut ModelState, data: &Dataset) -> Result<()> {
    let pts = points(data);
    for (j, p) in model.thetas.iter().enumerate() {
        let f = family.frequencies(p).map_err(|e| e.at(0, j))?;
        model.log_scales[j] = column_log_scale(&f, &pts).0;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    /// Largest `|Im|` of the complex prediction over the points.
    pub max_imag: f64,
}

/// `Re Σ c_j ∂^d b(x; θ_j) / scale_j` at each point, using the model's stored scales.
pub fn predict(
    model: &ModelState,
    coeffs: &[Complex64],
    points: &[Vec<f64>],
    d: &MultiIndex,
) -> Result<Prediction> {
    let family = model.basis()?;
    predict_with(&family, model, coeffs, points, d)
}

pub fn predict_with(
    family: &BasisFamily,
    model: &ModelState,
    coeffs: &[Complex64],
    points: &[Vec<f64>],
    d: &MultiIndex,
) -> Result<Prediction> {
    let raw = predict_complex(family, model, coeffs, points, d)?;
    let max_imag = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(Prediction {
        values: raw.iter().map(|z| z.re).collect(),
        max_imag,
    })
}

pub(crate) fn predict_complex(
    family: &BasisFamily,
    model: &ModelState,
    coeffs: &[Complex64],
    points: &[Vec<f64>],
    d: &MultiIndex,
) -> Result<Vec<Complex64>> {
    if coeffs.len() != model.basis_count() {
        return Err(Error::Invalid(format!(
            "{} coefficients for {} basis elements",
            coeffs.len(),
            model.basis_count()
        )));
    }
    if d.dim() != family.dim {
        return Err(Error::Invalid(format!(
            "multi-index of dimension {} for a {}-dimensional family",
            d.dim(),
            family.dim
        )));
    }
    let freqs: Vec<Frequencies> = model
        .thetas
        .iter()
        .enumerate()
        .map(|(j, p)| family.frequencies(p).map_err(|e| e.at(0, j)))
        .collect::<Result<_>>()?;
    points
        .par_iter()
        .enumerate()
        .map(|(h, x)| {
            if x.len() != family.dim {
                return Err(Error::Invalid(format!("point {h} has wrong dimension")));
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, (f, c)) in freqs.iter().zip(coeffs).enumerate() {
                if *c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let v = family
                    .eval_cached(f, x, d, model.log_scales[j], crate::basis::DEFAULT_LOG_CAP)
                    .map_err(|e| e.at(h, j))?;
                acc += c * v;
            }
            Ok(acc)
        })
        .collect()
}
