use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{column_log_scale, design_column, Dataset, ModelState};
use crate::basis::{BasisFamily, DEFAULT_LOG_CAP};
use crate::error::{Error, Result};
use crate::linalg::{conj_transpose, gram, HermitianFactor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LikelihoodOptions {
    /// Relative diagonal jitter added before factoring `A`.
    pub jitter: f64,
    /// Multiply the prior precision by the basis count `N` in `A`.
    pub scale_by_basis_count: bool,
    pub log_cap: f64,
}

impl Default for LikelihoodOptions {
    fn default() -> Self {
        Self {
            jitter: 1e-10,
            scale_by_basis_count: true,
            log_cap: DEFAULT_LOG_CAP,
        }
    }
}

/// Gradient of the negative log marginal likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub value: f64,
    /// `[∂/∂Re θ, ∂/∂Im θ]` per element and parameter; empty for discrete families.
    pub thetas: Vec<Vec<[f64; 2]>>,
    pub log_var: Vec<f64>,
    pub log_noise: f64,
}

/// Everything the likelihood needs from one factorization of `A`.
struct Solved {
    factor: HermitianFactor,
    /// `A⁻¹ Bᴴ y`
    c: Array1<Complex64>,
    value: f64,
}

fn kappa(n: usize, opts: &LikelihoodOptions) -> f64 {
    if opts.scale_by_basis_count {
        n as f64
    } else {
        1.0
    }
}

fn solve_core(
    b: &Array2<Complex64>,
    y: &[f64],
    log_var: &[f64],
    log_noise: f64,
    opts: &LikelihoodOptions,
) -> Result<Solved> {
    let (m, n) = b.dim();
    let v = log_noise.exp();
    let k = kappa(n, opts);
    let mut a = gram(b);
    for (j, lv) in log_var.iter().enumerate() {
        a[[j, j]] += k * v * (-lv).exp();
    }
    let factor = HermitianFactor::new(&a, opts.jitter)?;
    let g = crate::linalg::adjoint_apply_real(b, y);
    let c = factor.solve(g.view());
    let q: f64 = g.iter().zip(c.iter()).map(|(gi, ci)| (gi.conj() * ci).re).sum();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let value = (yy - q) / v
        + (m as f64 - n as f64) * log_noise
        + log_var.iter().sum::<f64>()
        + factor.log_det();
    if !value.is_finite() {
        return Err(Error::Invalid("marginal likelihood is not finite".into()));
    }
    Ok(Solved { factor, c, value })
}

/// `L` for an explicit design matrix and real targets, no row weighting.
pub fn nlml_from_design(
    b: &Array2<Complex64>,
    y: &[f64],
    log_var: &[f64],
    log_noise: f64,
    opts: &LikelihoodOptions,
) -> Result<f64> {
    check_shapes(b, y, log_var)?;
    Ok(solve_core(b, y, log_var, log_noise, opts)?.value)
}

fn check_shapes(b: &Array2<Complex64>, y: &[f64], log_var: &[f64]) -> Result<()> {
    if b.nrows() != y.len() || b.ncols() != log_var.len() {
        return Err(Error::Invalid(format!(
            "design {}x{} does not match {} targets and {} variances",
            b.nrows(),
            b.ncols(),
            y.len(),
            log_var.len()
        )));
    }
    Ok(())
}

/// Row-whitened design and targets, plus the constant `Σ log f_h`.
struct Whitened {
    family: BasisFamily,
    b: Array2<Complex64>,
    y: Vec<f64>,
    row_std: Vec<f64>,
    log_scales: Vec<f64>,
    constant: f64,
}

fn whiten(model: &ModelState, data: &Dataset, opts: &LikelihoodOptions) -> Result<Whitened> {
    let family = model.basis()?;
    let design = super::assemble_design_capped(&family, model, data, opts.log_cap)?;
    let row_std = data.row_noise_std();
    let mut b = design.b;
    let mut y = data.values();
    for (h, s) in row_std.iter().enumerate() {
        if *s != 1.0 {
            b.row_mut(h).mapv_inplace(|z| z / *s);
            y[h] /= s;
        }
    }
    let constant = row_std.iter().map(|s| 2.0 * s.ln()).sum();
    Ok(Whitened {
        family,
        b,
        y,
        row_std,
        log_scales: design.log_scales,
        constant,
    })
}

/// Negative log marginal likelihood
/// `(|Y|² − Yᴴ B A⁻¹ Bᴴ Y)/σ₀² + (M−N) log σ₀² + log det Σ + log det A`.
pub fn nlml(model: &ModelState, data: &Dataset, opts: &LikelihoodOptions) -> Result<f64> {
    let w = whiten(model, data, opts)?;
    Ok(solve_core(&w.b, &w.y, &model.log_var, model.log_noise, opts)?.value + w.constant)
}

/// Posterior mean of the coefficients, `C = A⁻¹ Bᴴ Y`.
pub fn posterior_coeffs(
    model: &ModelState,
    data: &Dataset,
    opts: &LikelihoodOptions,
) -> Result<Vec<Complex64>> {
    let w = whiten(model, data, opts)?;
    Ok(solve_core(&w.b, &w.y, &model.log_var, model.log_noise, opts)?
        .c
        .to_vec())
}

/// Posterior mean and the Cholesky factor of `A`, for sampling.
pub(crate) fn posterior_factor(
    model: &ModelState,
    data: &Dataset,
    opts: &LikelihoodOptions,
) -> Result<(Vec<Complex64>, HermitianFactor)> {
    let w = whiten(model, data, opts)?;
    let s = solve_core(&w.b, &w.y, &model.log_var, model.log_noise, opts)?;
    Ok((s.c.to_vec(), s.factor))
}

/// Value and exact gradient of [`nlml`].
pub fn nlml_grad(model: &ModelState, data: &Dataset, opts: &LikelihoodOptions) -> Result<Gradient> {
    let w = whiten(model, data, opts)?;
    let (m, n) = w.b.dim();
    let v = model.log_noise.exp();
    let k = kappa(n, opts);
    let s = solve_core(&w.b, &w.y, &model.log_var, model.log_noise, opts)?;
    let c = &s.c;

    let linv = s.factor.lower_inverse();
    let ainv_diag: Vec<f64> = (0..n)
        .map(|j| linv.column(j).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    // X = A⁻¹ Bᴴ = L⁻ᴴ (L⁻¹ Bᴴ)
    let t = linv.dot(&conj_transpose(&w.b));
    let x = conj_transpose(&linv).dot(&t);

    let bc = w.b.dot(c);
    let r: Vec<Complex64> = w.y.iter().zip(bc.iter()).map(|(y, z)| y - z).collect();
    let yy: f64 = w.y.iter().map(|v| v * v).sum();

    let mut log_var = Vec::with_capacity(n);
    let mut prior_quad = 0.0;
    let mut trace_term = 0.0;
    for j in 0..n {
        let e = (-model.log_var[j]).exp();
        let cj = c[j].norm_sqr();
        log_var.push(1.0 - k * e * cj - k * v * e * ainv_diag[j]);
        prior_quad += k * cj * e;
        trace_term += k * v * ainv_diag[j] * e;
    }
    let g = crate::linalg::adjoint_apply_real(&w.b, &w.y);
    let gc: f64 = g.iter().zip(c.iter()).map(|(gi, ci)| (gi.conj() * ci).re).sum();
    let log_noise = -(yy - gc) / v + prior_quad + (m as f64 - n as f64) + trace_term;

    let thetas = if w.family.is_discrete() {
        Vec::new()
    } else {
        theta_gradient(&w, model, data, opts, &x, c.view(), &r, v)?
    };

    Ok(Gradient {
        value: s.value + w.constant,
        thetas,
        log_var,
        log_noise,
    })
}

#[allow(clippy::too_many_arguments)]
fn theta_gradient(
    w: &Whitened,
    model: &ModelState,
    data: &Dataset,
    opts: &LikelihoodOptions,
    x: &Array2<Complex64>,
    c: ArrayView1<Complex64>,
    r: &[Complex64],
    v: f64,
) -> Result<Vec<Vec<[f64; 2]>>> {
    let family = &w.family;
    let p = family.free_params;
    let pts: Vec<&[f64]> = data.observations.iter().map(|o| o.point.as_slice()).collect();
    let rc: Vec<Complex64> = r.iter().map(|z| z.conj() / v).collect();
    model
        .thetas
        .par_iter()
        .enumerate()
        .map(|(j, theta)| {
            let freqs = family.frequencies(theta).map_err(|e| e.at(0, j))?;
            let jac = family.frequency_jacobian(theta);
            let (ls, weights) = column_log_scale(&freqs, &pts);
            debug_assert!((ls - w.log_scales[j]).abs() < 1e-9 * (1.0 + ls.abs()));
            // Holomorphic derivative of the log scale.
            let mut dscale = vec![Complex64::new(0.0, 0.0); p];
            let nterms = freqs.z.len();
            for (h, xh) in pts.iter().enumerate() {
                for (kt, jk) in jac.0.iter().enumerate() {
                    let wt = weights[h * nterms + kt];
                    if wt == 0.0 {
                        continue;
                    }
                    for (i, ji) in jk.iter().enumerate() {
                        for (ds, dz) in dscale.iter_mut().zip(ji) {
                            *ds += wt * xh[i] * dz;
                        }
                    }
                }
            }
            let col = design_column(family, &freqs, data, ls, opts.log_cap, j)?;
            let mut gsum = vec![Complex64::new(0.0, 0.0); p];
            let mut s = Complex64::new(0.0, 0.0);
            let mut dh = vec![Complex64::new(0.0, 0.0); p];
            for (h, o) in data.observations.iter().enumerate() {
                let wjh = x[[j, h]] - c[j] * rc[h];
                let std = w.row_std[h];
                s += wjh * col[h] / std;
                family.grad_cached(&freqs, &jac, &o.point, &o.deriv, ls, &mut dh);
                for (gm, dm) in gsum.iter_mut().zip(&dh) {
                    *gm += wjh * dm / std;
                }
            }
            Ok(gsum
                .iter()
                .zip(&dscale)
                .map(|(gm, e)| {
                    let (la, lb) = (e.re, -e.im);
                    [2.0 * gm.re - 2.0 * s.re * la, -2.0 * gm.im - 2.0 * s.re * lb]
                })
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{catalog_lookup, FamilyId, Params};
    use crate::gp::tests::random_instance;
    use crate::gp::{Observation, ObservationGroup};

    fn opts() -> LikelihoodOptions {
        LikelihoodOptions::default()
    }

    /// Exact formula checks run without the diagonal jitter.
    fn exact() -> LikelihoodOptions {
        LikelihoodOptions {
            jitter: 0.0,
            ..LikelihoodOptions::default()
        }
    }

    fn scalar(y: f64, log_var: f64, log_noise: f64) -> (ModelState, Dataset) {
        let family = catalog_lookup(FamilyId::Wave1dFree);
        let mut model = ModelState::new(&family, vec![Params::real(&[0.0])], log_noise);
        model.log_var = vec![log_var];
        let data = Dataset::new(vec![Observation::value_at(vec![0.4, 0.7], y, ObservationGroup::InitialValue)]);
        (model, data)
    }

    #[test]
    fn scalar_closed_form() {
        let (y, s1, s0) = (1.3f64, 0.7f64, 0.2f64);
        let (model, data) = scalar(y, s1.ln(), s0.ln());
        let a = s0 / s1 + 1.0;
        let expected = y * y / s0 * (1.0 - 1.0 / a) + s1.ln() + a.ln();
        let got = nlml(&model, &data, &exact()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        let c = posterior_coeffs(&model, &data, &exact()).unwrap();
        assert!((c[0].re - y / a).abs() < 1e-12 && c[0].im.abs() < 1e-15);
    }

    #[test]
    fn zero_targets_drop_data_term() {
        let (_, mut model, mut data) = random_instance(FamilyId::Wave2dFree, 9, 4, 2);
        for o in &mut data.observations {
            o.value = 0.0;
        }
        model.log_noise = -1.0;
        let l = nlml(&model, &data, &opts()).unwrap();
        let family = model.basis().unwrap();
        let b = crate::gp::assemble_design(&family, &model, &data).unwrap().b;
        let mut a = gram(&b);
        let v = model.log_noise.exp();
        for j in 0..4 {
            a[[j, j]] += 4.0 * v * (-model.log_var[j]).exp();
        }
        let ld = HermitianFactor::new(&a, 1e-10).unwrap().log_det();
        let expected = 5.0 * model.log_noise + model.log_var.iter().sum::<f64>() + ld;
        assert!((l - expected).abs() < 1e-10);
        assert!(posterior_coeffs(&model, &data, &opts()).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn scalar_variance_stationary_point() {
        // L(s) = y²/(v+s) + log(v+s) is stationary at s = y² − v.
        let (y, v) = (2.0f64, 0.25f64);
        let (model, data) = scalar(y, (y * y - v).ln(), v.ln());
        let g = nlml_grad(&model, &data, &opts()).unwrap();
        assert!(g.log_var[0].abs() < 1e-8, "{}", g.log_var[0]);
    }

    #[test]
    fn noise_gradient_matches_difference() {
        let (_, model, data) = random_instance(FamilyId::Heat2dWedge90Dirichlet, 20, 4, 8);
        let g = nlml_grad(&model, &data, &opts()).unwrap();
        let h = 1e-6;
        let mut up = model.clone();
        up.log_noise += h;
        let mut dn = model.clone();
        dn.log_noise -= h;
        let fd = (nlml(&up, &data, &opts()).unwrap() - nlml(&dn, &data, &opts()).unwrap()) / (2.0 * h);
        assert!((fd - g.log_noise).abs() <= 1e-5 * fd.abs().max(1.0), "{fd} vs {}", g.log_noise);
    }

    #[test]
    fn discrete_family_has_no_theta_gradient() {
        let family = catalog_lookup(FamilyId::Wave1dSlabDirichlet);
        let thetas = crate::basis::enumerate_discrete(&family, 3).unwrap();
        let model = ModelState::new(&family, thetas, -2.0);
        let obs = (1..10)
            .map(|h| Observation::value_at(vec![0.0, 0.3 * h as f64], (0.3 * h as f64).sin(), ObservationGroup::InitialValue))
            .collect();
        let g = nlml_grad(&model, &Dataset::new(obs), &opts()).unwrap();
        assert!(g.thetas.is_empty());
        assert_eq!(g.log_var.len(), 6);
    }

    #[test]
    fn column_rescaling_leaves_likelihood_unchanged() {
        let (_, model, data) = random_instance(FamilyId::Wave2dWedge45Neumann, 15, 5, 4);
        let family = model.basis().unwrap();
        let b = crate::gp::assemble_design(&family, &model, &data).unwrap().b;
        let y = data.values();
        let base = nlml_from_design(&b, &y, &model.log_var, model.log_noise, &exact()).unwrap();
        let scales = [3.0, 0.2, 1.0, 17.0, 0.05];
        let mut b2 = b.clone();
        let mut lv2 = model.log_var.clone();
        for (j, s) in scales.iter().enumerate() {
            b2.column_mut(j).mapv_inplace(|z| z * *s);
            lv2[j] -= 2.0 * s.ln();
        }
        let moved = nlml_from_design(&b2, &y, &lv2, model.log_noise, &exact()).unwrap();
        // log det Σ shifts by −2Σ log s and log det A by the same amount with
        // opposite sign; the sum is invariant.
        assert!((base - moved).abs() < 1e-8, "{base} vs {moved}");
    }

    #[test]
    fn normal_equations_hold() {
        let (_, model, data) = random_instance(FamilyId::Wave2dHalfplaneDirichlet, 30, 6, 12);
        let family = model.basis().unwrap();
        let b = crate::gp::assemble_design(&family, &model, &data).unwrap().b;
        let c = Array1::from(posterior_coeffs(&model, &data, &exact()).unwrap());
        let v = model.log_noise.exp();
        let mut a = gram(&b);
        for j in 0..6 {
            a[[j, j]] += 6.0 * v * (-model.log_var[j]).exp();
        }
        let g = crate::linalg::adjoint_apply_real(&b, &data.values());
        let res = a.dot(&c) - &g;
        let rn = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let gn = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(rn <= 1e-10 * gn, "{rn} vs {gn}");
    }

    #[test]
    fn group_noise_matches_row_scaling() {
        let (_, model, mut data) = random_instance(FamilyId::Wave1dFree, 6, 3, 21);
        data.observations[0].group = ObservationGroup::BoundaryCollocation;
        data.group_noise.boundary_collocation = 4.0;
        let l = nlml(&model, &data, &opts()).unwrap();
        // Equivalent: scale row 0 by 1/2 and add log 4.
        let family = model.basis().unwrap();
        let mut b = crate::gp::assemble_design(&family, &model, &data).unwrap().b;
        let mut y = data.values();
        b.row_mut(0).mapv_inplace(|z| z * 0.5);
        y[0] *= 0.5;
        let expected = nlml_from_design(&b, &y, &model.log_var, model.log_noise, &opts()).unwrap() + 4f64.ln();
        assert!((l - expected).abs() < 1e-10);
    }
}
