//! Benchmark metrics, the energy functional and exactness residuals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::exactness::{fd_first, fd_second};
use crate::basis::{BasisFamily, BoundaryOp, BoundaryPlane, MultiIndex, Operator};
use crate::error::{Error, Result};
use crate::gp::{predict_with, ModelState};
use crate::oracles::Field;

/// Default lattice spacing of the energy sum.
pub const ENERGY_SPACING: f64 = 0.1;

/// Anything that can be evaluated with derivatives at batches of points.
pub trait Predictor: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, points: &[Vec<f64>], d: &MultiIndex) -> Result<Vec<f64>>;
}

impl<F: Field + ?Sized> Predictor for F {
    fn dim(&self) -> usize {
        Field::dim(self)
    }

    fn evaluate(&self, points: &[Vec<f64>], d: &MultiIndex) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.derivative(x, d)).collect()
    }
}

/// Posterior mean `Re Σ c_j b(x; θ_j) / scale_j` of a trained model.
#[derive(Debug, Clone)]
pub struct ModelPredictor {
    family: BasisFamily,
    pub model: ModelState,
    pub coeffs: Vec<Complex64>,
}

impl ModelPredictor {
    pub fn new(model: ModelState, coeffs: Vec<Complex64>) -> Result<Self> {
        let family = model.basis()?;
        model.validate(&family)?;
        if coeffs.len() != model.basis_count() {
            return Err(Error::Invalid("coefficient count differs from basis count".into()));
        }
        Ok(Self {
            family,
            model,
            coeffs,
        })
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    /// Values together with the largest discarded imaginary part.
    pub fn evaluate_with_imag(&self, points: &[Vec<f64>], d: &MultiIndex) -> Result<(Vec<f64>, f64)> {
        let p = predict_with(&self.family, &self.model, &self.coeffs, points, d)?;
        Ok((p.values, p.max_imag))
    }
}

impl Predictor for ModelPredictor {
    fn dim(&self) -> usize {
        self.family.dim
    }

    fn evaluate(&self, points: &[Vec<f64>], d: &MultiIndex) -> Result<Vec<f64>> {
        Ok(self.evaluate_with_imag(points, d)?.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Metrics {
    /// Median of `|pred − truth|`.
    pub median_abs: f64,
    /// Norm ratio `Σ|pred − truth| / Σ|truth|`.
    pub rel: f64,
}

pub fn l1_metrics(pred: &[f64], truth: &[f64]) -> Result<L1Metrics> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Invalid(format!(
            "metric inputs have lengths {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut diff: Vec<f64> = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).collect();
    let total: f64 = diff.iter().sum();
    let norm: f64 = truth.iter().map(|t| t.abs()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroTruth);
    }
    diff.sort_by(f64::total_cmp);
    let n = diff.len();
    let median_abs = if n % 2 == 1 {
        diff[n / 2]
    } else {
        0.5 * (diff[n / 2 - 1] + diff[n / 2])
    };
    Ok(L1Metrics {
        median_abs,
        rel: total / norm,
    })
}

/// Bounded spatial regions used for evaluation grids, energy sums and
/// boundary sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Axis-aligned box in any dimension.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `0 < y < x < length`.
    Triangle { length: f64 },
    /// Quarter disc `x, y > 0`, `x² + y² < radius²`.
    Sector { radius: f64 },
    /// Disc of the given radius about the origin.
    Disc { radius: f64 },
    /// Truncated 45° wedge `0 < x < extent`, `−extent < y < x`.
    Wedge45 { extent: f64 },
    /// Quarter plane `x, y > 0` truncated to `(0, extent)²`.
    Quadrant { extent: f64 },
}

const INSIDE_SLACK: f64 = 1e-12;

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Domain::Box { lo, hi } => !lo.is_empty() && lo.len() == hi.len() && lo.iter().zip(hi).all(|(a, b)| a < b),
            Domain::Triangle { length: r }
            | Domain::Sector { radius: r }
            | Domain::Disc { radius: r }
            | Domain::Wedge45 { extent: r }
            | Domain::Quadrant { extent: r } => *r > 0.0 && r.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("degenerate domain {self:?}")))
        }
    }

    /// Bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Triangle { length } => (vec![0.0, 0.0], vec![*length, *length]),
            Domain::Sector { radius } => (vec![0.0, 0.0], vec![*radius, *radius]),
            Domain::Disc { radius } => (vec![-radius, -radius], vec![*radius, *radius]),
            Domain::Wedge45 { extent } => (vec![0.0, -extent], vec![*extent, *extent]),
            Domain::Quadrant { extent } => (vec![0.0, 0.0], vec![*extent, *extent]),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let (lo, hi) = self.bounds();
        let in_box = x
            .iter()
            .zip(lo.iter().zip(&hi))
            .all(|(v, (a, b))| *v >= a - INSIDE_SLACK && *v <= b + INSIDE_SLACK);
        in_box
            && match self {
                Domain::Box { .. } | Domain::Quadrant { .. } => true,
                Domain::Triangle { .. } | Domain::Wedge45 { .. } => x[1] <= x[0] + INSIDE_SLACK,
                Domain::Sector { radius } | Domain::Disc { radius } => x[0].hypot(x[1]) <= radius + INSIDE_SLACK,
            }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Domain::Triangle { length } => 0.5 * length * length,
            Domain::Sector { radius } => 0.25 * PI * radius * radius,
            Domain::Disc { radius } => PI * radius * radius,
            Domain::Wedge45 { extent } => 1.5 * extent * extent,
            Domain::Quadrant { extent } => extent * extent,
        }
    }

    /// Cell centres of the bounding box split into cells of side at most `h`
    /// (each axis divided evenly), clipped to the domain.
    pub fn cell_lattice(&self, h: f64) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounds();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (((b - a) / h - 1e-9).ceil() as usize).max(1))
            .collect();
        let sides: Vec<f64> = (0..lo.len()).map(|i| (hi[i] - lo[i]) / counts[i] as f64).collect();
        self.lattice(&lo, &counts, |i, k| lo[i] + (k as f64 + 0.5) * sides[i])
    }

    /// Node lattice `lo + k h`, including the far edge when it falls on the
    /// lattice, clipped to the domain.
    pub fn node_lattice(&self, h: f64) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounds();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / h + 1e-9).floor() as usize + 1)
            .collect();
        self.lattice(&lo, &counts, |i, k| lo[i] + k as f64 * h)
    }

    fn lattice(&self, lo: &[f64], counts: &[usize], coord: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        let total: usize = counts.iter().product();
        let mut out = Vec::new();
        let mut idx = vec![0usize; lo.len()];
        for _ in 0..total {
            let x: Vec<f64> = idx.iter().enumerate().map(|(i, &k)| coord(i, k)).collect();
            if self.contains(&x) {
                out.push(x);
            }
            for i in (0..idx.len()).rev() {
                idx[i] += 1;
                if idx[i] < counts[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub h: f64,
    /// Lattice points inside the domain.
    pub points: usize,
}

impl EnergySeries {
    /// `max_t |Q(t) − Q(t₀)| / Q(t₀)`, zero when `Q(t₀) = 0`.
    pub fn max_relative_drift(&self) -> f64 {
        let Some(&q0) = self.energy.first() else {
            return 0.0;
        };
        if q0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().map(|q| (q - q0).abs() / q0).fold(0.0, f64::max)
    }
}

/// `Q(t) = |Ω|/|grid| Σ_grid (u_t² + Σᵢ u_{xᵢ}²)` on the cell-centred lattice.
pub fn energy_series<P: Predictor + ?Sized>(predictor: &P, domain: &Domain, times: &[f64], h: f64) -> Result<EnergySeries> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Invalid(format!("energy spacing {h} must be positive")));
    }
    domain.validate()?;
    let dim = predictor.dim();
    if dim != domain.dim() + 1 {
        return Err(Error::Invalid("energy needs a time-dependent predictor over the domain".into()));
    }
    energy_on_lattice(predictor, &domain.cell_lattice(h), domain.measure(), times, h)
}

/// Energy sum over an explicit spatial point set covering a region of the
/// given measure.
pub fn energy_on_lattice<P: Predictor + ?Sized>(
    predictor: &P,
    lattice: &[Vec<f64>],
    measure: f64,
    times: &[f64],
    h: f64,
) -> Result<EnergySeries> {
    if lattice.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let dim = predictor.dim();
    let weight = measure / lattice.len() as f64;
    let mut energy = Vec::with_capacity(times.len());
    for &t in times {
        let pts: Vec<Vec<f64>> = lattice
            .iter()
            .map(|x| std::iter::once(t).chain(x.iter().copied()).collect())
            .collect();
        let mut q = 0.0;
        for i in 0..dim {
            let d = predictor.evaluate(&pts, &MultiIndex::unit(dim, i))?;
            q += d.iter().map(|v| v * v).sum::<f64>();
        }
        energy.push(weight * q);
    }
    Ok(EnergySeries {
        times: times.to_vec(),
        energy,
        h,
        points: lattice.len(),
    })
}

/// A point on a boundary piece with the operator that must vanish there.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    /// Unit outward or inward normal in spacetime coordinates.
    pub normal: Vec<f64>,
    pub op: BoundaryOp,
}

/// Random points on boundary pieces over a time window.
#[derive(Debug, Clone)]
pub enum BoundarySampler {
    /// Flat pieces: the family's planes restricted to the domain.
    Planes {
        planes: Vec<BoundaryPlane>,
        domain: Domain,
        times: (f64, f64),
    },
    /// Circular arc `(r cos φ, r sin φ)` for `φ` in `angles`.
    Arc {
        radius: f64,
        angles: (f64, f64),
        times: (f64, f64),
        op: BoundaryOp,
    },
}

impl BoundarySampler {
    /// `count` samples for each boundary piece.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<BoundarySample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let time = |rng: &mut ChaCha8Rng, (a, b): (f64, f64)| if b > a { rng.random_range(a..=b) } else { a };
        match self {
            BoundarySampler::Planes { planes, domain, times } => {
                let (lo, hi) = domain.bounds();
                let mut out = Vec::new();
                for plane in planes {
                    let mut got = 0;
                    let mut tries = 0;
                    while got < count && tries < 1000 * count.max(1) {
                        tries += 1;
                        let mut x = vec![time(&mut rng, *times)];
                        x.extend(lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..=*b)));
                        let p = plane.project(&x);
                        if domain.contains(&p[1..]) {
                            out.push(BoundarySample {
                                point: p,
                                normal: plane.unit_normal(),
                                op: plane.op,
                            });
                            got += 1;
                        }
                    }
                }
                out
            }
            BoundarySampler::Arc {
                radius,
                angles,
                times,
                op,
            } => (0..count)
                .map(|_| {
                    let phi = rng.random_range(angles.0..=angles.1);
                    let t = time(&mut rng, *times);
                    BoundarySample {
                        point: vec![t, radius * phi.cos(), radius * phi.sin()],
                        normal: vec![0.0, phi.cos(), phi.sin()],
                        op: *op,
                    }
                })
                .collect(),
        }
    }
}

/// `max |B(∂)u| / max(|u|, |∇u|)` over boundary samples; `0/0` gives 0.
pub fn boundary_residual<P: Predictor + ?Sized>(predictor: &P, sampler: &BoundarySampler, count: usize, seed: u64) -> Result<f64> {
    let samples = sampler.sample(count, seed);
    if samples.is_empty() {
        return Ok(0.0);
    }
    let dim = predictor.dim();
    let pts: Vec<Vec<f64>> = samples.iter().map(|s| s.point.clone()).collect();
    let value = predictor.evaluate(&pts, &MultiIndex::zero(dim))?;
    let grads: Vec<Vec<f64>> = (0..dim)
        .map(|i| predictor.evaluate(&pts, &MultiIndex::unit(dim, i)))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (h, s) in samples.iter().enumerate() {
        let r = match s.op {
            BoundaryOp::Dirichlet => value[h],
            BoundaryOp::Neumann => (0..dim).map(|i| s.normal[i] * grads[i][h]).sum(),
        };
        worst = worst.max(r.abs());
        scale = scale.max(value[h].abs());
        for g in &grads {
            scale = scale.max(g[h].abs());
        }
    }
    Ok(if scale == 0.0 { 0.0 } else { worst / scale })
}

/// `max |A(∂)u| / max |u|` by 4th-order central differences of the values.
pub fn pde_residual_fd<P: Predictor + ?Sized>(predictor: &P, operator: Operator, points: &[Vec<f64>], step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::Invalid("finite-difference step must be positive".into()));
    }
    let dim = predictor.dim();
    let zero = MultiIndex::zero(dim);
    let residuals: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| {
            let f = |y: &[f64]| -> Result<Complex64> {
                Ok(Complex64::new(predictor.evaluate(&[y.to_vec()], &zero)?[0], 0.0))
            };
            let mut acc = 0.0;
            for (s, d) in operator.monomials(dim) {
                let i = d.orders().iter().position(|&o| o > 0).expect("nonzero monomial");
                let v = if d.orders()[i] == 1 {
                    fd_first(&f, x, i, step)?
                } else {
                    fd_second(&f, x, i, step)?
                };
                acc += s * v.re;
            }
            Ok((acc.abs(), f(x)?.re.abs()))
        })
        .collect::<Result<_>>()?;
    let worst = residuals.iter().map(|r| r.0).fold(0.0, f64::max);
    let scale = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{catalog_lookup, FamilyId, Params};
    use crate::oracles::{gaussian_bump, FieldSpec};
    use crate::Result;

    struct Func<F>(usize, F);

    impl<F: Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync> Field for Func<F> {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok((self.1)(x).0)
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok((self.1)(x).1)
        }
    }

    #[test]
    fn l1_examples() {
        let m = l1_metrics(&[1.0, 2.0, 4.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.median_abs, 1.0);
        assert!((m.rel - 4.0 / 3.0).abs() < 1e-15);
        let t = [0.5, -2.0, 3.0];
        assert_eq!(l1_metrics(&t, &t).unwrap(), L1Metrics { median_abs: 0.0, rel: 0.0 });
        let shifted: Vec<f64> = t.iter().map(|v| v + 1.0).collect();
        assert_eq!(l1_metrics(&shifted, &t).unwrap().median_abs, 1.0);
        assert!(matches!(l1_metrics(&[1.0], &[0.0]), Err(Error::ZeroTruth)));
        assert!(l1_metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn lattices_clip_to_the_domain() {
        let tri = Domain::Triangle { length: 4.0 };
        let cells = tri.cell_lattice(0.1);
        assert!(cells.iter().all(|p| p[1] <= p[0]));
        // Cells strictly below the diagonal plus the diagonal cells themselves.
        assert_eq!(cells.len(), 40 * 41 / 2);
        let sq = Domain::Box { lo: vec![0.0, 0.0], hi: vec![4.0, 4.0] };
        assert_eq!(sq.node_lattice(0.1).len(), 41 * 41);
        assert_eq!(sq.cell_lattice(0.1).len(), 1600);
        assert!(Domain::Sector { radius: 2.0 }.contains(&[2.0, 0.0]));
        assert!(!Domain::Sector { radius: 2.0 }.contains(&[1.5, 1.5]));
        assert!(Domain::Box { lo: vec![1.0], hi: vec![0.0] }.validate().is_err());
    }

    #[test]
    fn energy_of_zero_field_is_zero() {
        let zero = FieldSpec::Zero { dim: 3 }.build().unwrap();
        let e = energy_series(zero.as_ref(), &Domain::Disc { radius: 1.0 }, &[0.0, 1.0], 0.1).unwrap();
        assert_eq!(e.energy, vec![0.0, 0.0]);
        assert_eq!(e.max_relative_drift(), 0.0);
    }

    #[test]
    fn energy_of_standing_mode_is_constant() {
        let w = 2f64.sqrt();
        let mode = Func(3, move |x: &[f64]| {
            let (t, a, b) = (x[0], x[1], x[2]);
            let u = a.sin() * b.sin() * (w * t).cos();
            let grad = vec![
                -w * a.sin() * b.sin() * (w * t).sin(),
                a.cos() * b.sin() * (w * t).cos(),
                a.sin() * b.cos() * (w * t).cos(),
            ];
            (u, grad)
        });
        let dom = Domain::Box { lo: vec![0.0, 0.0], hi: vec![PI, PI] };
        let e = energy_series(&mode, &dom, &[0.0, 0.5, 1.0], 0.1).unwrap();
        let exact = PI * PI / 2.0;
        for q in &e.energy {
            assert!((q - exact).abs() / exact <= 0.01, "{q}");
        }
        assert!(e.max_relative_drift() <= 0.01);
    }

    #[test]
    fn energy_of_gaussian_bump_is_pi() {
        // A resting bump: energy is ∫|∇f|² = π for unit amplitude.
        let bump = gaussian_bump(vec![1.0, 1.0], 10.0, 1.0).unwrap();
        let lifted = Func(3, move |x: &[f64]| {
            let g = bump.gradient(&x[1..]).unwrap();
            (bump.value(&x[1..]).unwrap(), vec![0.0, g[0], g[1]])
        });
        let dom = Domain::Box { lo: vec![0.0, 0.0], hi: vec![4.0, 4.0] };
        let e = energy_series(&lifted, &dom, &[0.0], 0.1).unwrap();
        assert!((e.energy[0] - PI).abs() / PI <= 0.02);
    }

    #[test]
    fn empty_lattice_is_an_error() {
        let f = FieldSpec::Zero { dim: 3 }.build().unwrap();
        let r = energy_on_lattice(f.as_ref(), &[], 1.0, &[0.0], 0.1);
        assert!(matches!(r, Err(Error::EmptyGrid)));
    }

    #[test]
    fn boundary_residual_exact_family_and_witness() {
        let family = catalog_lookup(FamilyId::Wave2dWedge90Dirichlet);
        let thetas = vec![
            Params::new(vec![Complex64::new(0.1, 1.3), Complex64::new(-0.2, 0.7)]),
            Params::new(vec![Complex64::new(0.0, 2.1), Complex64::new(0.3, -1.1)]),
        ];
        let model = ModelState::new(&family, thetas, -4.0);
        let exact = ModelPredictor::new(model, vec![Complex64::new(0.7, -0.2), Complex64::new(-1.1, 0.4)]).unwrap();
        let sampler = BoundarySampler::Planes {
            planes: family.boundaries.clone(),
            domain: Domain::Quadrant { extent: 3.0 },
            times: (0.0, 2.0),
        };
        assert!(boundary_residual(&exact, &sampler, 100, 1).unwrap() <= 1e-10);

        let free = catalog_lookup(FamilyId::Wave2dFree);
        let model = ModelState::new(&free, vec![Params::new(vec![Complex64::new(0.2, 1.0), Complex64::new(0.1, 0.6)])], -4.0);
        let witness = ModelPredictor::new(model, vec![Complex64::new(1.0, 0.0)]).unwrap();
        assert!(boundary_residual(&witness, &sampler, 100, 1).unwrap() > 0.1);

        let zero = FieldSpec::Zero { dim: 3 }.build().unwrap();
        assert_eq!(boundary_residual(zero.as_ref(), &sampler, 20, 1).unwrap(), 0.0);
    }

    #[test]
    fn arc_samples_lie_on_the_circle() {
        let s = BoundarySampler::Arc {
            radius: 2.0,
            angles: (0.0, PI / 2.0),
            times: (0.0, 4.0),
            op: BoundaryOp::Dirichlet,
        };
        for b in s.sample(50, 3) {
            assert!((b.point[1].hypot(b.point[2]) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pde_residual_stubs() {
        let sq = Func(2, |x: &[f64]| (x[1] * x[1], vec![0.0, 2.0 * x[1]]));
        let pts = vec![vec![0.3, 0.5], vec![1.0, 2.0]];
        let r = pde_residual_fd(&sq, Operator::Wave, &pts, 1e-3).unwrap();
        assert!((r - 2.0 / 4.0).abs() < 1e-6, "{r}");
        let c = Func(2, |_: &[f64]| (3.0, vec![0.0, 0.0]));
        assert_eq!(pde_residual_fd(&c, Operator::Wave, &pts, 1e-3).unwrap(), 0.0);
        assert_eq!(pde_residual_fd(&c, Operator::Heat, &pts, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn trained_style_model_has_small_fd_residual() {
        let family = catalog_lookup(FamilyId::Wave2dHalfplaneNeumann);
        let thetas = vec![
            Params::new(vec![Complex64::new(0.05, 1.3), Complex64::new(-0.1, 0.7)]),
            Params::new(vec![Complex64::new(0.0, 2.1), Complex64::new(0.1, -1.1)]),
        ];
        let model = ModelState::new(&family, thetas, -4.0);
        let p = ModelPredictor::new(model, vec![Complex64::new(0.7, -0.2), Complex64::new(-1.1, 0.4)]).unwrap();
        let pts = vec![vec![0.5, 1.0, 0.3], vec![1.2, 0.4, -0.8], vec![2.0, 2.0, 1.0]];
        assert!(pde_residual_fd(&p, Operator::Wave, &pts, 1e-3).unwrap() <= 1e-5);
    }
}
