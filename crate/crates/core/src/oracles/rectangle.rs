use std::f64::consts::PI;

use ndarray::Array2;

use super::quadrature::gauss_legendre;
use super::{check_dim, Field};
use crate::error::{Error, Result};

const FIRST_NODES: usize = 64;
const MAX_NODES: usize = 2048;
const COEFF_TOLERANCE: f64 = 1e-10;

/// Truncated separation-of-variables solution of the 2D wave equation on
/// `(0, L)²` with Dirichlet walls:
/// `Σ_{j,k ≤ J} (a_jk cos ω_jk t + b_jk sin(ω_jk t)/ω_jk) sin(jπx/L) sin(kπy/L)`,
/// `ω_jk = π√(j²+k²)/L`.
#[derive(Debug, Clone)]
pub struct RectangleSeries {
    length: f64,
    cutoff: usize,
    /// Displacement coefficients, indexed `[j−1, k−1]`.
    pub displacement: Array2<f64>,
    /// Velocity coefficients, indexed `[j−1, k−1]`.
    pub velocity: Array2<f64>,
    /// Gauss–Legendre nodes per axis at which the coefficients settled.
    pub nodes: usize,
}

/// Sine coefficients `(4/L²) ∫∫ f sin(jπx/L) sin(kπy/L)` by an `n × n` rule.
fn sine_coefficients(f: &dyn Field, length: f64, cutoff: usize, n: usize) -> Result<Array2<f64>> {
    let (x, w) = gauss_legendre(n, 0.0, length);
    let mut values = Array2::<f64>::zeros((n, n));
    for (p, xp) in x.iter().enumerate() {
        for (q, yq) in x.iter().enumerate() {
            values[[p, q]] = f.value(&[*xp, *yq])?;
        }
    }
    let s = Array2::from_shape_fn((cutoff, n), |(j, p)| w[p] * ((j + 1) as f64 * PI * x[p] / length).sin());
    Ok(s.dot(&values).dot(&s.t()) * (4.0 / (length * length)))
}

/// Coefficients refined by doubling the rule until they change by at most
/// `COEFF_TOLERANCE`.
fn converged_coefficients(f: &dyn Field, length: f64, cutoff: usize) -> Result<(Array2<f64>, usize)> {
    let mut n = FIRST_NODES;
    let mut prev = sine_coefficients(f, length, cutoff, n)?;
    loop {
        n *= 2;
        let next = sine_coefficients(f, length, cutoff, n)?;
        let ((j, k), change) = next
            .indexed_iter()
            .map(|(ix, v)| (ix, (v - prev[ix]).abs()))
            .fold(((0, 0), 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if change <= COEFF_TOLERANCE {
            return Ok((next, n));
        }
        if n >= MAX_NODES {
            return Err(Error::Quadrature {
                j: j + 1,
                k: k + 1,
                change,
            });
        }
        prev = next;
    }
}

impl RectangleSeries {
    /// Expand the initial displacement (and optional velocity), both fields
    /// over `(x, y)`.
    pub fn new(initial: &dyn Field, velocity: Option<&dyn Field>, length: f64, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Invalid("series cutoff must be at least 1".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Invalid(format!("side length {length} must be positive")));
        }
        for f in std::iter::once(initial).chain(velocity) {
            if f.dim() != 2 {
                return Err(Error::Invalid("rectangle series needs planar initial data".into()));
            }
        }
        let (displacement, mut nodes) = converged_coefficients(initial, length, cutoff)?;
        let velocity = match velocity {
            Some(v) => {
                let (c, n) = converged_coefficients(v, length, cutoff)?;
                nodes = nodes.max(n);
                c
            }
            None => Array2::zeros((cutoff, cutoff)),
        };
        Ok(Self {
            length,
            cutoff,
            displacement,
            velocity,
            nodes,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn frequency(&self, j: usize, k: usize) -> f64 {
        PI * ((j * j + k * k) as f64).sqrt() / self.length
    }

    /// `(u, u_t, u_x, u_y)` at `(t, x, y)`.
    fn eval(&self, p: &[f64]) -> (f64, f64, f64, f64) {
        let (t, x, y) = (p[0], p[1], p[2]);
        let base = PI / self.length;
        let trig = |v: f64| -> Vec<(f64, f64)> {
            (1..=self.cutoff)
                .map(|j| {
                    let a = j as f64 * base * v;
                    (a.sin(), j as f64 * base * a.cos())
                })
                .collect()
        };
        let (sx, sy) = (trig(x), trig(y));
        let mut out = (0.0, 0.0, 0.0, 0.0);
        for j in 1..=self.cutoff {
            for k in 1..=self.cutoff {
                let w = self.frequency(j, k);
                let (a, b) = (self.displacement[[j - 1, k - 1]], self.velocity[[j - 1, k - 1]]);
                let (s, c) = (w * t).sin_cos();
                let time = a * c + b * s / w;
                let rate = -a * w * s + b * c;
                let (sxj, dxj) = sx[j - 1];
                let (syk, dyk) = sy[k - 1];
                out.0 += time * sxj * syk;
                out.1 += rate * sxj * syk;
                out.2 += time * dxj * syk;
                out.3 += time * sxj * dyk;
            }
        }
        out
    }
}

impl Field for RectangleSeries {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(3, x)?;
        Ok(self.eval(x).0)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(3, x)?;
        let (_, ut, ux, uy) = self.eval(x);
        Ok(vec![ut, ux, uy])
    }
}
