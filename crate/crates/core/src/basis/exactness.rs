//! Randomized verification that a family's elements solve the PDE and its
//! boundary conditions exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    eval_basis, grad_params, variety_residual, BasisFamily, BoundaryOp, Branch, MultiIndex, Params,
};
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub variety_draws: usize,
    pub boundary_draws: usize,
    pub interior_points: usize,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            variety_draws: 1000,
            boundary_draws: 100,
            interior_points: 100,
            fd_step: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, samples: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            samples,
            worst,
            tolerance,
            passed: worst.is_finite() && worst <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub family: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Largest discrete mode drawn by the suite.
const MAX_MODE: i64 = 4;

pub fn random_params(family: &BasisFamily, rng: &mut impl Rng) -> Params {
    let branch = if rng.random::<bool>() {
        Branch::Plus
    } else {
        Branch::Minus
    };
    if family.is_discrete() {
        loop {
            let v: Vec<i64> = (0..family.free_params)
                .map(|_| rng.random_range(1..=MAX_MODE))
                .collect();
            if family.id == super::FamilyId::Wave2dTriangleDirichlet && v[0] >= v[1] {
                continue;
            }
            let values = v.iter().map(|&j| Complex64::new(j as f64, 0.0)).collect();
            return Params { values, branch };
        }
    }
    loop {
        let values: Vec<Complex64> = (0..family.free_params)
            .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
            .collect();
        let p = Params { values, branch };
        // Redraw the measure-zero neighbourhood of a square-root branch point.
        if family.frequencies(&p).is_ok() {
            return p;
        }
    }
}

/// A point in a box covering the family's domain near the origin.
pub fn random_point(family: &BasisFamily, rng: &mut impl Rng) -> Vec<f64> {
    let span = if family.is_discrete() { family.length } else { 1.0 };
    (0..family.dim)
        .map(|i| {
            if i == 0 && family.operator.has_time() {
                rng.random_range(0.0..1.0)
            } else if family.is_discrete() {
                rng.random_range(0.0..span)
            } else {
                rng.random_range(-span..span)
            }
        })
        .collect()
}

/// Boundary operator applied to the element at `x`.
fn boundary_value(
    family: &BasisFamily,
    p: &Params,
    x: &[f64],
    op: BoundaryOp,
    normal: &[f64],
) -> Result<Complex64> {
    match op {
        BoundaryOp::Dirichlet => eval_basis(family, p, x, &MultiIndex::zero(family.dim)),
        BoundaryOp::Neumann => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &n) in normal.iter().enumerate() {
                if n != 0.0 {
                    acc += n * eval_basis(family, p, x, &MultiIndex::unit(family.dim, i))?;
                }
            }
            Ok(acc)
        }
    }
}

fn analytic_pde_residual(family: &BasisFamily, p: &Params, x: &[f64]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, d) in family.operator.monomials(family.dim) {
        acc += s * eval_basis(family, p, x, &d)?;
    }
    Ok(acc)
}

/// Fourth-order central difference of `f` along coordinate `i`.
pub fn fd_first<F: Fn(&[f64]) -> Result<Complex64>>(
    f: &F,
    x: &[f64],
    i: usize,
    h: f64,
) -> Result<Complex64> {
    let at = |k: f64| {
        let mut y = x.to_vec();
        y[i] += k * h;
        f(&y)
    };
    Ok((-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h))
}

pub fn fd_second<F: Fn(&[f64]) -> Result<Complex64>>(
    f: &F,
    x: &[f64],
    i: usize,
    h: f64,
) -> Result<Complex64> {
    let at = |k: f64| {
        let mut y = x.to_vec();
        y[i] += k * h;
        f(&y)
    };
    Ok(
        (-at(2.0)? + 16.0 * at(1.0)? - 30.0 * at(0.0)? + 16.0 * at(-1.0)? - at(-2.0)?)
            / (12.0 * h * h),
    )
}

fn fd_pde_residual(family: &BasisFamily, p: &Params, x: &[f64], h: f64) -> Result<Complex64> {
    let f = |y: &[f64]| eval_basis(family, p, y, &MultiIndex::zero(family.dim));
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, d) in family.operator.monomials(family.dim) {
        let i = d.orders().iter().position(|&o| o > 0).expect("nonzero monomial");
        let v = if d.orders()[i] == 1 {
            fd_first(&f, x, i, h)?
        } else {
            fd_second(&f, x, i, h)?
        };
        acc += s * v;
    }
    Ok(acc)
}

fn scale(family: &BasisFamily, p: &Params, x: &[f64]) -> Result<f64> {
    let f = family.frequencies(p)?;
    Ok(family.max_term_magnitude(&f, x).max(f64::MIN_POSITIVE))
}

/// Run every exactness check for one family.
pub fn verify_family(family: &BasisFamily, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ family.id as u64);
    let mut checks = Vec::new();
    let dim = family.dim;

    let mut worst = 0.0f64;
    for _ in 0..cfg.variety_draws {
        let p = random_params(family, &mut rng);
        worst = worst.max(variety_residual(family, &p)?);
    }
    checks.push(CheckResult::new("variety", cfg.variety_draws, worst, 1e-12));

    for plane in &family.boundaries {
        let normal = plane.unit_normal();
        let mut worst = 0.0f64;
        for _ in 0..cfg.boundary_draws {
            let p = random_params(family, &mut rng);
            let x = plane.project(&random_point(family, &mut rng));
            let v = boundary_value(family, &p, &x, plane.op, &normal)?;
            worst = worst.max(v.norm() / scale(family, &p, &x)?);
        }
        let op = match plane.op {
            BoundaryOp::Dirichlet => "dirichlet",
            BoundaryOp::Neumann => "neumann",
        };
        checks.push(CheckResult::new(
            format!("boundary {op} on {}", plane.label),
            cfg.boundary_draws,
            worst,
            1e-10,
        ));
    }

    let mut worst_analytic = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut worst_deriv = 0.0f64;
    for _ in 0..cfg.interior_points {
        let p = random_params(family, &mut rng);
        let x = random_point(family, &mut rng);
        let s = scale(family, &p, &x)?;
        worst_analytic = worst_analytic.max(analytic_pde_residual(family, &p, &x)?.norm() / s);
        worst_fd = worst_fd.max(fd_pde_residual(family, &p, &x, cfg.fd_step)?.norm() / s);
        // First derivatives against differences of values, and second
        // derivatives against differences of first derivatives.
        for i in 0..dim {
            let d0 = MultiIndex::zero(dim);
            let d1 = MultiIndex::unit(dim, i);
            let f0 = |y: &[f64]| eval_basis(family, &p, y, &d0);
            let f1 = |y: &[f64]| eval_basis(family, &p, y, &d1);
            let a1 = eval_basis(family, &p, &x, &d1)?;
            let a2 = eval_basis(family, &p, &x, &MultiIndex::second(dim, i))?;
            let e1 = (a1 - fd_first(&f0, &x, i, cfg.fd_step)?).norm();
            let e2 = (a2 - fd_first(&f1, &x, i, cfg.fd_step)?).norm();
            worst_deriv = worst_deriv.max(e1.max(e2) / s);
        }
    }
    checks.push(CheckResult::new(
        "pde analytic",
        cfg.interior_points,
        worst_analytic,
        1e-10,
    ));
    checks.push(CheckResult::new("pde finite-difference", cfg.interior_points, worst_fd, 1e-5));
    checks.push(CheckResult::new(
        "derivative consistency",
        cfg.interior_points,
        worst_deriv,
        1e-6,
    ));

    if family.is_discrete() {
        let mut worst = 0.0f64;
        for _ in 0..cfg.interior_points {
            let p = random_params(family, &mut rng);
            let x = random_point(family, &mut rng);
            let s = scale(family, &p, &x)?;
            let b = eval_basis(family, &p, &x, &MultiIndex::zero(dim))?;
            for i in 1..dim {
                let mut y = x.clone();
                y[i] += 2.0 * family.length;
                let bp = eval_basis(family, &p, &y, &MultiIndex::zero(dim))?;
                worst = worst.max((b - bp).norm() / s);
            }
        }
        checks.push(CheckResult::new("periodicity", cfg.interior_points, worst, 1e-12));
    } else {
        let mut worst = 0.0f64;
        let h = 1e-6;
        for _ in 0..cfg.interior_points {
            let p = random_params(family, &mut rng);
            let x = random_point(family, &mut rng);
            let d = MultiIndex::zero(dim);
            let g = grad_params(family, &p, &x, &d)?;
            for (m, gm) in g.iter().enumerate() {
                let shifted = |delta: f64| -> Result<Complex64> {
                    let mut q = p.clone();
                    q.values[m] += delta;
                    eval_basis(family, &q, &x, &d)
                };
                let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h);
                let denom = gm.norm().max(scale(family, &p, &x)?);
                worst = worst.max((gm - fd).norm() / denom);
            }
        }
        checks.push(CheckResult::new("parameter gradient", cfg.interior_points, worst, 1e-5));
    }

    Ok(SuiteReport {
        family: family.id.to_string(),
        checks,
    })
}

/// Suite over the whole catalog.
pub fn verify_catalog(cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    super::FamilyId::ALL
        .iter()
        .map(|&id| verify_family(&super::catalog_lookup(id), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{catalog_lookup, FamilyId, FreqExpr};

    fn small() -> SuiteConfig {
        SuiteConfig {
            variety_draws: 50,
            boundary_draws: 20,
            interior_points: 10,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn heat_dirichlet_passes() {
        let r = verify_family(&catalog_lookup(FamilyId::Heat1dHalflineDirichlet), &small()).unwrap();
        assert!(r.passed(), "{r:?}");
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"variety"));
        assert!(names.iter().any(|n| n.starts_with("boundary")));
        assert!(names.contains(&"pde analytic"));
    }

    #[test]
    fn flipped_sign_breaks_boundary_check() {
        let mut fam = catalog_lookup(FamilyId::Wave2dWedge90Mixed);
        fam.terms[1].coef = -fam.terms[1].coef;
        let r = verify_family(&fam, &small()).unwrap();
        assert!(!r.passed());
        let b = r.checks.iter().find(|c| c.name.contains("x = 0")).unwrap();
        assert!(!b.passed);
    }

    #[test]
    fn off_variety_frequency_fails() {
        let mut fam = catalog_lookup(FamilyId::Wave2dFree);
        fam.terms[0].freq[1] = FreqExpr::Linear {
            coef: Complex64::new(2.0, 0.0),
            param: 0,
            branched: false,
        };
        let r = verify_family(&fam, &small()).unwrap();
        let v = r.checks.iter().find(|c| c.name == "variety").unwrap();
        assert!(!v.passed);
        let pde = r.checks.iter().find(|c| c.name == "pde analytic").unwrap();
        assert!(!pde.passed);
    }
}
