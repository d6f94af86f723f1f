use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::likelihood::{posterior_factor, LikelihoodOptions};
use super::{refresh_scales, Dataset, ModelState};
use crate::basis::{MultiIndex, DEFAULT_LOG_CAP};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum SampleMode<'a> {
    Prior,
    Posterior(&'a Dataset, LikelihoodOptions),
}

/// Draw `count` realizations at `points`, returned as a `count × points` matrix.
///
/// Prior draws give each weight independent real and imaginary parts of
/// variance `σ_j²`, so `Var Re(Σ w_j b_j) = Σ σ_j² |b_j|²`. Posterior draws
/// use the circular complex normal with mean `A⁻¹Bᴴy` and covariance
/// `σ₀² A⁻¹`.
pub fn sample(
    model: &ModelState,
    points: &[Vec<f64>],
    count: usize,
    seed: u64,
    mode: SampleMode<'_>,
) -> Result<Array2<f64>> {
    let family = model.basis()?;
    let mut model = model.clone();
    let posterior = match mode {
        SampleMode::Prior => None,
        SampleMode::Posterior(data, opts) => {
            refresh_scales(&family, &mut model, data)?;
            Some(posterior_factor(&model, data, &opts)?)
        }
    };
    let n = model.basis_count();
    let d = MultiIndex::zero(family.dim);
    let mut e = Array2::<Complex64>::zeros((points.len(), n));
    for (j, p) in model.thetas.iter().enumerate() {
        let f = family.frequencies(p).map_err(|err| err.at(0, j))?;
        for (h, x) in points.iter().enumerate() {
            if x.len() != family.dim {
                return Err(Error::Invalid(format!("point {h} has wrong dimension")));
            }
            e[[h, j]] = family
                .eval_cached(&f, x, &d, model.log_scales[j], DEFAULT_LOG_CAP)
                .map_err(|err| err.at(h, j))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let mut out = Array2::<f64>::zeros((count, points.len()));
    let sd: Vec<f64> = model.log_var.iter().map(|lv| (0.5 * lv).exp()).collect();
    let noise_sd = (0.5 * model.log_noise).exp();
    for s in 0..count {
        let w: Array1<Complex64> = match &posterior {
            None => (0..n)
                .map(|j| Complex64::new(normal(), normal()) * sd[j])
                .collect(),
            Some((mean, factor)) => {
                let xi: Array1<Complex64> = (0..n)
                    .map(|_| Complex64::new(normal(), normal()) * std::f64::consts::FRAC_1_SQRT_2)
                    .collect();
                let u = factor.backward(xi.view());
                mean.iter().zip(u.iter()).map(|(m, ui)| m + noise_sd * ui).collect()
            }
        };
        let v = e.dot(&w);
        for (o, z) in out.row_mut(s).iter_mut().zip(v.iter()) {
            *o = z.re;
        }
    }
    Ok(out)
}
