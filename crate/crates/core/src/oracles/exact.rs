use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j0, bessel_j1};
use super::{check_dim, Field};
use crate::basis::{BoundaryOp, Operator};
use crate::error::{Error, Result};

/// Points may sit this far outside the domain before being rejected.
const DOMAIN_SLACK: f64 = 1e-12;

/// Closed-form solutions of benchmark problems, in time-first coordinates
/// (Laplace solutions are purely spatial).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExactSolution {
    /// 1D wave on `x ≥ 0` with Neumann condition at 0:
    /// `f(x+t−3) + f(x−t+3) + ½(g(x+t−1) + g(x−t−1) + g(x+t+1) + g(x−t+1))`,
    /// `f = e^{−5s²}`, `g = e^{−10s²}`.
    Wave1dNeumannBenchmark,
    /// 2D wave on `x ≥ 0` with Neumann condition:
    /// `Σᵢ (J₀(cᵢρ(x−i, y−i)) + J₀(cᵢρ(x+i, y−i))) cos(cᵢt)`, `c = (5, 10, 5)`.
    Wave2dBesselBenchmark,
    /// 3D wave on `y, z ≥ 0` with Neumann conditions: free spherical waves
    /// from `e^{−5r²}` bumps at `(1, ±1, ±1)`, at rest initially.
    Wave3dImagesBenchmark,
    /// Free 2D wave `f(x+t−2) + f(y+t−2)`, `f = e^{−5s²}`.
    FreeWave2dTravelling,
    /// Heat flow of `A e^{−a‖x−c‖²}` reflected across the planes `xᵢ = 0`
    /// (odd for Dirichlet axes, even for Neumann axes). Axes count spatial
    /// coordinates from 0.
    HeatGaussianImages {
        center: Vec<f64>,
        sharpness: f64,
        amplitude: f64,
        #[serde(default)]
        dirichlet_axes: Vec<usize>,
        #[serde(default)]
        neumann_axes: Vec<usize>,
    },
    /// 1D wave on `[0, L]` from a resting bump, by d'Alembert's formula on
    /// the `2L`-periodic odd (Dirichlet) or even (Neumann) extension.
    SlabBump {
        length: f64,
        center: f64,
        sharpness: f64,
        amplitude: f64,
        boundary: BoundaryOp,
    },
    /// `log(x² + y²)`, harmonic away from the origin.
    LaplaceLog,
}

/// `(g, g')` for `g(s) = e^{−as²}`.
fn gauss(a: f64, s: f64) -> (f64, f64) {
    let g = (-a * s * s).exp();
    (g, -2.0 * a * s * g)
}

/// `F⁽ⁿ⁾(s)` for `F(s) = s e^{−as²}`, via `F = −φ'/(2a)` and
/// `φ⁽ᵏ⁾(s) = (−√a)ᵏ Hₖ(√a s) e^{−as²}`.
fn radial_profile_derivative(a: f64, n: usize, s: f64) -> f64 {
    let k = n + 1;
    let y = a.sqrt() * s;
    let (mut h0, mut h1) = (1.0, 2.0 * y);
    for m in 1..k {
        let h2 = 2.0 * y * h1 - 2.0 * m as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    let hk = if k == 0 { h0 } else { h1 };
    -(-a.sqrt()).powi(k as i32) * hk * (-a * s * s).exp() / (2.0 * a)
}

/// 3D spherical wave from `e^{−ar²}` at rest: `u = (F(t+r) − F(t−r))/(2r)`.
/// Returns `(u, u_t, u_r / r)`.
fn spherical_wave(a: f64, t: f64, r: f64) -> (f64, f64, f64) {
    if r < 1e-3 {
        spherical_wave_near_center(a, t, r)
    } else {
        spherical_wave_closed(a, t, r)
    }
}

/// Even Taylor expansion in `r`, free of the `1/r` cancellation.
fn spherical_wave_near_center(a: f64, t: f64, r: f64) -> (f64, f64, f64) {
    let d = |n: usize| radial_profile_derivative(a, n, t);
    let r2 = r * r;
    let u = d(1) + r2 * d(3) / 6.0 + r2 * r2 * d(5) / 120.0;
    let ut = d(2) + r2 * d(4) / 6.0 + r2 * r2 * d(6) / 120.0;
    let ur = d(3) / 3.0 + r2 * d(5) / 30.0;
    (u, ut, ur)
}

fn spherical_wave_closed(a: f64, t: f64, r: f64) -> (f64, f64, f64) {
    let d = |n: usize, s: f64| radial_profile_derivative(a, n, s);
    let f = |s: f64| s * (-a * s * s).exp();
    let u = (f(t + r) - f(t - r)) / (2.0 * r);
    let ut = (d(1, t + r) - d(1, t - r)) / (2.0 * r);
    let ur = ((d(1, t + r) + d(1, t - r)) / (2.0 * r) - u / r) / r;
    (u, ut, ur)
}

fn below(v: f64, bound: f64, what: &str) -> Result<()> {
    if v < bound - DOMAIN_SLACK || v.is_nan() {
        return Err(Error::Domain(format!("{what} = {v} is outside the domain")));
    }
    Ok(())
}

impl ExactSolution {
    pub fn has_time(&self) -> bool {
        !matches!(self, ExactSolution::LaplaceLog)
    }

    pub fn operator(&self) -> Operator {
        match self {
            ExactSolution::HeatGaussianImages { .. } => Operator::Heat,
            ExactSolution::LaplaceLog => Operator::Laplace,
            _ => Operator::Wave,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExactSolution::HeatGaussianImages {
                center,
                sharpness,
                dirichlet_axes,
                neumann_axes,
                ..
            } => {
                if !(*sharpness > 0.0) {
                    return Err(Error::Invalid("sharpness must be positive".into()));
                }
                for a in dirichlet_axes.iter().chain(neumann_axes) {
                    if *a >= center.len() {
                        return Err(Error::Invalid(format!("mirror axis {a} out of range")));
                    }
                }
                if dirichlet_axes.iter().any(|a| neumann_axes.contains(a)) {
                    return Err(Error::Invalid("an axis is both Dirichlet and Neumann".into()));
                }
                Ok(())
            }
            ExactSolution::SlabBump {
                length, sharpness, ..
            } => {
                if !(*length > 0.0 && *sharpness > 0.0) {
                    return Err(Error::Invalid("slab length and sharpness must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x)?;
        match self {
            ExactSolution::Wave1dNeumannBenchmark | ExactSolution::Wave2dBesselBenchmark => {
                below(x[1], 0.0, "x")
            }
            ExactSolution::Wave3dImagesBenchmark => {
                below(x[2], 0.0, "y")?;
                below(x[3], 0.0, "z")
            }
            ExactSolution::HeatGaussianImages {
                sharpness,
                dirichlet_axes,
                neumann_axes,
                ..
            } => {
                below(1.0 + 4.0 * sharpness * x[0], 0.0, "1 + 4at")?;
                for &a in dirichlet_axes.iter().chain(neumann_axes) {
                    below(x[a + 1], 0.0, "mirrored coordinate")?;
                }
                Ok(())
            }
            ExactSolution::SlabBump { length, .. } => {
                below(x[1], 0.0, "x")?;
                below(-x[1], -length, "x")
            }
            ExactSolution::LaplaceLog => {
                if x[0] == 0.0 && x[1] == 0.0 {
                    return Err(Error::Domain("log(x² + y²) is singular at the origin".into()));
                }
                Ok(())
            }
            ExactSolution::FreeWave2dTravelling => Ok(()),
        }
    }

    /// Value and full gradient.
    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.validate()?;
        self.check_domain(x)?;
        Ok(match self {
            ExactSolution::Wave1dNeumannBenchmark => {
                let (t, x) = (x[0], x[1]);
                let mut u = 0.0;
                let (mut ut, mut ux) = (0.0, 0.0);
                for (a, w, shift) in [(5.0, 1.0, -3.0), (10.0, 0.5, -1.0), (10.0, 0.5, 1.0)] {
                    let (gp, dp) = gauss(a, x + t + shift);
                    let (gm, dm) = gauss(a, x - t - shift);
                    u += w * (gp + gm);
                    ut += w * (dp - dm);
                    ux += w * (dp + dm);
                }
                (u, vec![ut, ux])
            }
            ExactSolution::Wave2dBesselBenchmark => {
                let (t, px, py) = (x[0], x[1], x[2]);
                let mut out = (0.0, vec![0.0; 3]);
                for (i, c) in [(1.0, 5.0), (2.0, 10.0), (3.0, 5.0)] {
                    let (cos, sin) = ((c * t).cos(), (c * t).sin());
                    for cx in [i, -i] {
                        let (dx, dy) = (px - cx, py - i);
                        let rho = dx.hypot(dy);
                        let j0 = bessel_j0(c * rho)?;
                        // ∂ J₀(cρ)/∂x = −c J₁(cρ) dx/ρ, with J₁(cρ)/ρ → c/2 at ρ = 0.
                        let j1_over_rho = if rho > 0.0 { bessel_j1(c * rho)? / rho } else { 0.5 * c };
                        out.0 += j0 * cos;
                        out.1[0] -= c * j0 * sin;
                        out.1[1] -= c * j1_over_rho * dx * cos;
                        out.1[2] -= c * j1_over_rho * dy * cos;
                    }
                }
                out
            }
            ExactSolution::Wave3dImagesBenchmark => {
                let t = x[0];
                let mut out = (0.0, vec![0.0; 4]);
                for (cy, cz) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                    let d = [x[1] - 1.0, x[2] - cy, x[3] - cz];
                    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    let (u, ut, ur) = spherical_wave(5.0, t, r);
                    out.0 += u;
                    out.1[0] += ut;
                    for k in 0..3 {
                        out.1[k + 1] += ur * d[k];
                    }
                }
                out
            }
            ExactSolution::FreeWave2dTravelling => {
                let (gx, dx) = gauss(5.0, x[1] + x[0] - 2.0);
                let (gy, dy) = gauss(5.0, x[2] + x[0] - 2.0);
                (gx + gy, vec![dx + dy, dx, dy])
            }
            ExactSolution::HeatGaussianImages {
                center,
                sharpness,
                amplitude,
                dirichlet_axes,
                neumann_axes,
            } => {
                let a = *sharpness;
                let k = center.len();
                let s = 1.0 + 4.0 * a * x[0];
                let norm = amplitude * s.powf(-0.5 * k as f64);
                let mirrors: Vec<(usize, f64)> = dirichlet_axes
                    .iter()
                    .map(|&i| (i, -1.0))
                    .chain(neumann_axes.iter().map(|&i| (i, 1.0)))
                    .collect();
                let mut out = (0.0, vec![0.0; k + 1]);
                for mask in 0..(1usize << mirrors.len()) {
                    let mut c = center.clone();
                    let mut sign = 1.0;
                    for (b, &(axis, parity)) in mirrors.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            c[axis] = -c[axis];
                            sign *= parity;
                        }
                    }
                    let r2: f64 = (0..k).map(|i| (x[i + 1] - c[i]).powi(2)).sum();
                    let u = sign * norm * (-a * r2 / s).exp();
                    out.0 += u;
                    out.1[0] += u * (-2.0 * a * k as f64 / s + 4.0 * a * a * r2 / (s * s));
                    for i in 0..k {
                        out.1[i + 1] += u * (-2.0 * a * (x[i + 1] - c[i]) / s);
                    }
                }
                out
            }
            ExactSolution::SlabBump {
                length,
                center,
                sharpness,
                amplitude,
                boundary,
            } => {
                let l = *length;
                let parity = match boundary {
                    BoundaryOp::Dirichlet => -1.0,
                    BoundaryOp::Neumann => 1.0,
                };
                // Extension to ℝ: reduce to [−L, L), reflect negatives.
                let ext = |s: f64| {
                    let r = (s + l).rem_euclid(2.0 * l) - l;
                    if r >= 0.0 {
                        let (g, d) = gauss(*sharpness, r - center);
                        (amplitude * g, amplitude * d)
                    } else {
                        let (g, d) = gauss(*sharpness, -r - center);
                        (parity * amplitude * g, -parity * amplitude * d)
                    }
                };
                let (fp, dp) = ext(x[1] + x[0]);
                let (fm, dm) = ext(x[1] - x[0]);
                (0.5 * (fp + fm), vec![0.5 * (dp - dm), 0.5 * (dp + dm)])
            }
            ExactSolution::LaplaceLog => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                (r2.ln(), vec![2.0 * x[0] / r2, 2.0 * x[1] / r2])
            }
        })
    }
}

impl Field for ExactSolution {
    fn dim(&self) -> usize {
        match self {
            ExactSolution::Wave1dNeumannBenchmark | ExactSolution::SlabBump { .. } => 2,
            ExactSolution::Wave2dBesselBenchmark | ExactSolution::FreeWave2dTravelling => 3,
            ExactSolution::Wave3dImagesBenchmark => 4,
            ExactSolution::HeatGaussianImages { center, .. } => center.len() + 1,
            ExactSolution::LaplaceLog => 2,
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(x)?.1)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::gradient_mismatch;
    use super::*;
    use crate::basis::exactness::{fd_first, fd_second};
    use crate::basis::MultiIndex;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A solution with its sampling box and the boundary planes `x_axis = offset`.
    struct Case {
        sol: ExactSolution,
        lo: Vec<f64>,
        hi: Vec<f64>,
        planes: Vec<(usize, f64, BoundaryOp)>,
    }

    fn cases() -> Vec<Case> {
        use BoundaryOp::*;
        let heat = |d: Vec<usize>, n: Vec<usize>| ExactSolution::HeatGaussianImages {
            center: vec![1.0, 1.0],
            sharpness: 10.0,
            amplitude: 5.0,
            dirichlet_axes: d,
            neumann_axes: n,
        };
        let slab = |b| ExactSolution::SlabBump {
            length: std::f64::consts::PI,
            center: std::f64::consts::FRAC_PI_2,
            sharpness: 10.0,
            amplitude: 1.0,
            boundary: b,
        };
        vec![
            Case { sol: ExactSolution::Wave1dNeumannBenchmark, lo: vec![0.0, 0.0], hi: vec![8.0, 4.0], planes: vec![(1, 0.0, Neumann)] },
            Case { sol: ExactSolution::Wave2dBesselBenchmark, lo: vec![0.0, 0.0, -2.0], hi: vec![2.0, 4.0, 5.0], planes: vec![(1, 0.0, Neumann)] },
            Case {
                sol: ExactSolution::Wave3dImagesBenchmark,
                lo: vec![0.0, -1.0, 0.0, 0.0],
                hi: vec![2.0, 3.0, 2.5, 2.5],
                planes: vec![(2, 0.0, Neumann), (3, 0.0, Neumann)],
            },
            Case { sol: ExactSolution::FreeWave2dTravelling, lo: vec![0.0, 0.0, 0.0], hi: vec![3.0, 4.0, 4.0], planes: vec![] },
            Case { sol: heat(vec![0, 1], vec![]), lo: vec![0.0, 0.0, 0.0], hi: vec![1.0, 3.0, 3.0], planes: vec![(1, 0.0, Dirichlet), (2, 0.0, Dirichlet)] },
            Case { sol: heat(vec![], vec![0, 1]), lo: vec![0.0, 0.0, 0.0], hi: vec![1.0, 3.0, 3.0], planes: vec![(1, 0.0, Neumann), (2, 0.0, Neumann)] },
            Case { sol: heat(vec![], vec![]), lo: vec![0.0, -1.0, -1.0], hi: vec![1.0, 3.0, 3.0], planes: vec![] },
            Case {
                sol: slab(Dirichlet),
                lo: vec![0.0, 0.0],
                hi: vec![6.0, std::f64::consts::PI],
                planes: vec![(1, 0.0, Dirichlet), (1, std::f64::consts::PI, Dirichlet)],
            },
            Case {
                sol: slab(Neumann),
                lo: vec![0.0, 0.0],
                hi: vec![6.0, std::f64::consts::PI],
                planes: vec![(1, 0.0, Neumann), (1, std::f64::consts::PI, Neumann)],
            },
            Case { sol: ExactSolution::LaplaceLog, lo: vec![1.0, 1.0], hi: vec![10.0, 10.0], planes: vec![] },
        ]
    }

    fn fd_residual(sol: &ExactSolution, x: &[f64], h: f64) -> f64 {
        let f = |y: &[f64]| sol.value(y).map(|v| Complex64::new(v, 0.0));
        let mut acc = 0.0;
        for (s, d) in sol.operator().monomials(sol.dim()) {
            let i = d.orders().iter().position(|&o| o > 0).unwrap();
            let v = if d.orders()[i] == 1 { fd_first(&f, x, i, h) } else { fd_second(&f, x, i, h) };
            acc += s * v.unwrap().re;
        }
        acc
    }

    #[test]
    fn pde_holds_under_finite_differences() {
        let h = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in cases() {
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let x: Vec<f64> = case
                    .lo
                    .iter()
                    .zip(&case.hi)
                    .enumerate()
                    .map(|(i, (lo, hi))| {
                        // Stay 2h inside every boundary plane and off t = 0 for heat.
                        let pad = if i == 0 || case.planes.iter().any(|p| p.0 == i) { 2.5 * h } else { 0.0 };
                        rng.random_range(lo + pad..hi - pad)
                    })
                    .collect();
                let scale = sol_scale(&case.sol, &x);
                worst = worst.max(fd_residual(&case.sol, &x, h).abs() / scale);
            }
            assert!(worst <= 1e-5, "{:?}: {worst:e}", case.sol);
        }
    }

    /// Magnitude of the largest second-derivative-sized quantity near `x`.
    fn sol_scale(sol: &ExactSolution, x: &[f64]) -> f64 {
        let g = sol.gradient(x).unwrap();
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        sol.value(x).unwrap().abs().max(gmax).max(1.0)
    }

    #[test]
    fn boundary_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for case in cases() {
            for &(axis, offset, op) in &case.planes {
                for _ in 0..200 {
                    let mut x: Vec<f64> =
                        case.lo.iter().zip(&case.hi).map(|(lo, hi)| rng.random_range(*lo..*hi)).collect();
                    x[axis] = offset;
                    let v = match op {
                        BoundaryOp::Dirichlet => case.sol.value(&x).unwrap(),
                        BoundaryOp::Neumann => case.sol.gradient(&x).unwrap()[axis],
                    };
                    assert!(v.abs() <= 1e-8, "{:?} at {x:?}: {v:e}", case.sol);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for case in cases() {
            for _ in 0..50 {
                let x: Vec<f64> = case
                    .lo
                    .iter()
                    .zip(&case.hi)
                    .map(|(lo, hi)| rng.random_range(lo + 0.01..hi - 0.01))
                    .collect();
                let e = gradient_mismatch(&case.sol, &x);
                assert!(e < 1e-6, "{:?} at {x:?}: {e:e}", case.sol);
            }
        }
    }

    #[test]
    fn spherical_wave_taylor_branch_matches_closed_form() {
        for t in [0.0, 0.3, 1.1] {
            for r in [1e-3, 1e-2] {
                let near = spherical_wave_near_center(5.0, t, r);
                let far = spherical_wave_closed(5.0, t, r);
                assert!((near.0 - far.0).abs() < 1e-10, "t {t} r {r}");
                assert!((near.1 - far.1).abs() < 1e-9, "t {t} r {r}");
                assert!((near.2 - far.2).abs() < 1e-6 * far.2.abs().max(1.0), "t {t} r {r}");
            }
        }
        // At r = 0 and t = 0 the wave equals the bump peak.
        assert!((spherical_wave(5.0, 0.0, 0.0).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_slices_match_printed_data() {
        let f = |s: f64| (-5.0 * s * s).exp();
        let g = |s: f64| (-10.0 * s * s).exp();
        for x in [0.0, 0.7, 2.9, 3.3, 8.0] {
            let h1 = f(x - 3.0) + f(x + 3.0) + g(x - 1.0) + g(x + 1.0);
            let v = ExactSolution::Wave1dNeumannBenchmark.value(&[0.0, x]).unwrap();
            assert!((v - h1).abs() < 1e-15);
            // h₂ = f'(x−3) − f'(x+3).
            let fp = |s: f64| -10.0 * s * f(s);
            let ut = ExactSolution::Wave1dNeumannBenchmark.gradient(&[0.0, x]).unwrap()[0];
            assert!((ut - (fp(x - 3.0) - fp(x + 3.0))).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (x, y) = (rng.random_range(0.0..4.0), rng.random_range(0.0..4.0));
            let mut sum = 0.0;
            for (i, c) in [(1.0f64, 5.0), (2.0, 10.0), (3.0, 5.0)] {
                sum += bessel_j0(c * (x - i).hypot(y - i)).unwrap()
                    + bessel_j0(c * (x + i).hypot(y - i)).unwrap();
            }
            let v = ExactSolution::Wave2dBesselBenchmark.value(&[0.0, x, y]).unwrap();
            assert!((v - sum).abs() < 1e-14);
        }
        let v = ExactSolution::Wave3dImagesBenchmark.value(&[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((v - (1.0 + 2.0 * (-20.0f64).exp() + (-40.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn wave1d_neumann_exact_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let t = rng.random_range(0.0..8.0);
            let d = ExactSolution::Wave1dNeumannBenchmark
                .derivative(&[t, 0.0], &MultiIndex::unit(2, 1))
                .unwrap();
            assert!(d.abs() <= 1e-10);
        }
    }

    #[test]
    fn off_domain_points_are_rejected() {
        assert!(matches!(ExactSolution::Wave1dNeumannBenchmark.value(&[0.0, -0.1]), Err(Error::Domain(_))));
        assert!(ExactSolution::Wave3dImagesBenchmark.value(&[0.0, 0.0, 1.0, -1.0]).is_err());
        assert!(ExactSolution::LaplaceLog.value(&[0.0, 0.0]).is_err());
        assert!(ExactSolution::Wave2dBesselBenchmark.value(&[0.0, 1.0]).is_err());
    }
}
