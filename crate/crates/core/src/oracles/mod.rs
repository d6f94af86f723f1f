//! Exact solutions, initial-data generators and independent references
//! used to score models.

mod bessel;
mod exact;
mod quadrature;
mod rectangle;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::MultiIndex;
use crate::error::{Error, Result};

pub use bessel::{bessel_j0, bessel_j1, BESSEL_MAX_ARG, BESSEL_SEAM};
pub use exact::ExactSolution;
pub use quadrature::gauss_legendre;
pub use rectangle::RectangleSeries;

/// A scalar field with analytic first derivatives.
pub trait Field: Send + Sync {
    /// Number of input coordinates.
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    /// Partial derivatives in every input coordinate.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Value for `d = 0`, a gradient entry for a unit multi-index.
    fn derivative(&self, x: &[f64], d: &MultiIndex) -> Result<f64> {
        match d.total() {
            0 => self.value(x),
            1 => {
                let i = d.orders().iter().position(|&o| o == 1).expect("unit index");
                Ok(self.gradient(x)?[i])
            }
            _ => Err(Error::Invalid("fields expose derivatives up to order 1".into())),
        }
    }
}

pub type SharedField = Arc<dyn Field>;

impl<F: Field + ?Sized> Field for Arc<F> {
    fn dim(&self) -> usize {
        self.as_ref().dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.as_ref().value(x)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.as_ref().gradient(x)
    }
    fn derivative(&self, x: &[f64], d: &MultiIndex) -> Result<f64> {
        self.as_ref().derivative(x, d)
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Invalid(format!(
            "field expects {expected} coordinates, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// `A·e^{−a‖x−c‖²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub sharpness: f64,
    pub amplitude: f64,
}

pub fn gaussian_bump(center: Vec<f64>, sharpness: f64, amplitude: f64) -> Result<GaussianBump> {
    if !(sharpness > 0.0 && sharpness.is_finite()) {
        return Err(Error::Invalid(format!("bump sharpness {sharpness} must be positive")));
    }
    Ok(GaussianBump {
        center,
        sharpness,
        amplitude,
    })
}

impl Field for GaussianBump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        Ok(self.amplitude * (-self.sharpness * r2).exp())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.value(x)?;
        Ok(x.iter()
            .zip(&self.center)
            .map(|(a, c)| -2.0 * self.sharpness * (a - c) * v)
            .collect())
    }
}

/// `A·g(x_axis − c)` or `A·g'(x_axis − c)` with `g(s) = e^{−as²}`, constant
/// in the other coordinates.
#[derive(Debug, Clone, PartialEq)]
struct Ridge {
    dim: usize,
    axis: usize,
    center: f64,
    sharpness: f64,
    amplitude: f64,
    derivative: bool,
}

impl Field for Ridge {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        let s = x[self.axis] - self.center;
        let g = self.amplitude * (-self.sharpness * s * s).exp();
        Ok(if self.derivative { -2.0 * self.sharpness * s * g } else { g })
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        let a = self.sharpness;
        let s = x[self.axis] - self.center;
        let g = self.amplitude * (-a * s * s).exp();
        let mut out = vec![0.0; self.dim];
        out[self.axis] = if self.derivative {
            (-2.0 * a + 4.0 * a * a * s * s) * g
        } else {
            -2.0 * a * s * g
        };
        Ok(out)
    }
}

/// `c + Σ l_i x_i + Σ q_i x_i²`.
#[derive(Debug, Clone, PartialEq)]
struct Quadratic {
    constant: f64,
    linear: Vec<f64>,
    square: Vec<f64>,
}

impl Field for Quadratic {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.constant
            + x.iter()
                .zip(self.linear.iter().zip(&self.square))
                .map(|(x, (l, q))| l * x + q * x * x)
                .sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        Ok(x.iter()
            .zip(self.linear.iter().zip(&self.square))
            .map(|(x, (l, q))| l + 2.0 * q * x)
            .collect())
    }
}

struct Zero(usize);

impl Field for Zero {
    fn dim(&self) -> usize {
        self.0
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.0, x)?;
        Ok(0.0)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.0, x)?;
        Ok(vec![0.0; self.0])
    }
}

struct Sum(Vec<SharedField>, usize);

impl Field for Sum {
    fn dim(&self) -> usize {
        self.1
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.1, x)?;
        self.0.iter().map(|f| f.value(x)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.1, x)?;
        let mut out = vec![0.0; self.1];
        for f in &self.0 {
            for (o, g) in out.iter_mut().zip(f.gradient(x)?) {
                *o += g;
            }
        }
        Ok(out)
    }
}

/// `f(x, y) − f(y, x)` on the plane.
struct DiagonalOdd(SharedField);

impl Field for DiagonalOdd {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(2, x)?;
        Ok(self.0.value(x)? - self.0.value(&[x[1], x[0]])?)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(2, x)?;
        let g = self.0.gradient(x)?;
        let h = self.0.gradient(&[x[1], x[0]])?;
        Ok(vec![g[0] - h[1], g[1] - h[0]])
    }
}

/// Spatial slice `x ↦ u(t₀, x)` or `x ↦ u_t(t₀, x)` of a time-dependent field.
struct TimeSlice {
    inner: SharedField,
    time: f64,
    time_derivative: bool,
}

impl TimeSlice {
    fn full(&self, x: &[f64]) -> Vec<f64> {
        let mut p = Vec::with_capacity(x.len() + 1);
        p.push(self.time);
        p.extend_from_slice(x);
        p
    }

    fn eval(&self, p: &[f64]) -> Result<f64> {
        if self.time_derivative {
            Ok(self.inner.gradient(p)?[0])
        } else {
            self.inner.value(p)
        }
    }
}

impl Field for TimeSlice {
    fn dim(&self) -> usize {
        self.inner.dim() - 1
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        self.eval(&self.full(x))
    }

    /// Spatial gradient; the velocity slice uses 4th-order central differences
    /// of the analytic time derivative.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        let p = self.full(x);
        if !self.time_derivative {
            return Ok(self.inner.gradient(&p)?[1..].to_vec());
        }
        let h = 1e-4;
        (1..p.len())
            .map(|i| {
                let at = |s: f64| {
                    let mut q = p.clone();
                    q[i] += s * h;
                    self.eval(&q)
                };
                Ok((-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h))
            })
            .collect()
    }
}

fn default_amplitude() -> f64 {
    1.0
}

/// Serializable field description used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero {
        dim: usize,
    },
    GaussianBump {
        center: Vec<f64>,
        sharpness: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Gaussian profile (or its derivative) along one coordinate.
    Ridge {
        dim: usize,
        axis: usize,
        center: f64,
        sharpness: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        derivative: bool,
    },
    /// `constant + Σ linear_i x_i + Σ square_i x_i²`.
    Quadratic {
        #[serde(default)]
        constant: f64,
        linear: Vec<f64>,
        square: Vec<f64>,
    },
    Sum {
        terms: Vec<FieldSpec>,
    },
    /// Odd reflection across the diagonal `x = y`.
    DiagonalOdd {
        inner: Box<FieldSpec>,
    },
    /// A closed-form solution evaluated on all of spacetime.
    Exact {
        solution: ExactSolution,
    },
    /// A closed-form solution restricted to a fixed time.
    ExactSlice {
        solution: ExactSolution,
        #[serde(default)]
        time: f64,
        #[serde(default)]
        time_derivative: bool,
    },
}

impl FieldSpec {
    pub fn build(&self) -> Result<SharedField> {
        Ok(match self {
            FieldSpec::Zero { dim } => Arc::new(Zero(*dim)),
            FieldSpec::GaussianBump {
                center,
                sharpness,
                amplitude,
            } => Arc::new(gaussian_bump(center.clone(), *sharpness, *amplitude)?),
            FieldSpec::Ridge {
                dim,
                axis,
                center,
                sharpness,
                amplitude,
                derivative,
            } => {
                if axis >= dim {
                    return Err(Error::Invalid(format!("ridge axis {axis} out of range for dimension {dim}")));
                }
                if !(*sharpness > 0.0) {
                    return Err(Error::Invalid("ridge sharpness must be positive".into()));
                }
                Arc::new(Ridge {
                    dim: *dim,
                    axis: *axis,
                    center: *center,
                    sharpness: *sharpness,
                    amplitude: *amplitude,
                    derivative: *derivative,
                })
            }
            FieldSpec::Quadratic {
                constant,
                linear,
                square,
            } => {
                if linear.len() != square.len() {
                    return Err(Error::Invalid("quadratic coefficient lengths differ".into()));
                }
                Arc::new(Quadratic {
                    constant: *constant,
                    linear: linear.clone(),
                    square: square.clone(),
                })
            }
            FieldSpec::Sum { terms } => {
                let fields: Vec<SharedField> = terms.iter().map(|t| t.build()).collect::<Result<_>>()?;
                let dim = fields
                    .first()
                    .map(|f| f.dim())
                    .ok_or_else(|| Error::Invalid("empty field sum".into()))?;
                if fields.iter().any(|f| f.dim() != dim) {
                    return Err(Error::Invalid("summed fields have different dimensions".into()));
                }
                Arc::new(Sum(fields, dim))
            }
            FieldSpec::DiagonalOdd { inner } => {
                let f = inner.build()?;
                if f.dim() != 2 {
                    return Err(Error::Invalid("diagonal reflection needs a planar field".into()));
                }
                Arc::new(DiagonalOdd(f))
            }
            FieldSpec::Exact { solution } => {
                solution.validate()?;
                Arc::new(solution.clone())
            }
            FieldSpec::ExactSlice {
                solution,
                time,
                time_derivative,
            } => {
                solution.validate()?;
                if !solution.has_time() {
                    return Err(Error::Invalid("time slice of a stationary solution".into()));
                }
                Arc::new(TimeSlice {
                    inner: Arc::new(solution.clone()),
                    time: *time,
                    time_derivative: *time_derivative,
                })
            }
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Max relative mismatch between analytic and 4th-order FD gradients.
    pub(crate) fn gradient_mismatch(f: &dyn Field, x: &[f64]) -> f64 {
        let g = f.gradient(x).unwrap();
        let h = 1e-4;
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            let at = |s: f64| {
                let mut q = x.to_vec();
                q[i] += s * h;
                f.value(&q).unwrap()
            };
            let fd = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        worst
    }

    #[test]
    fn bump_center_and_gradient() {
        let f = gaussian_bump(vec![1.0, 1.0], 10.0, 5.0).unwrap();
        assert_eq!(f.value(&[1.0, 1.0]).unwrap(), 5.0);
        assert!(gradient_mismatch(&f, &[1.1, 0.8]) < 1e-6);
        assert!(gaussian_bump(vec![0.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn bump_gradient_energy_is_pi() {
        // ∫|∇f|² over the plane by Gauss–Legendre on a box wide enough for the tails.
        for a in [1.0, 10.0] {
            let f = gaussian_bump(vec![0.0, 0.0], a, 1.0).unwrap();
            let r = 8.0 / a.sqrt();
            let (x, w) = gauss_legendre(200, -r, r);
            let mut q = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                for (yj, wj) in x.iter().zip(&w) {
                    let g = f.gradient(&[*xi, *yj]).unwrap();
                    q += wi * wj * (g[0] * g[0] + g[1] * g[1]);
                }
            }
            assert!((q - std::f64::consts::PI).abs() < 1e-10, "a {a}: {q}");
        }
    }

    #[test]
    fn specs_build_and_differentiate() {
        let specs: Vec<FieldSpec> = vec![
            FieldSpec::Ridge { dim: 2, axis: 1, center: 2.0, sharpness: 5.0, amplitude: 1.0, derivative: true },
            FieldSpec::Quadratic { constant: 0.0, linear: vec![0.0, 0.5, 0.5], square: vec![0.2, 0.1, 0.1] },
            FieldSpec::DiagonalOdd {
                inner: Box::new(FieldSpec::GaussianBump { center: vec![3.0, 1.0], sharpness: 10.0, amplitude: 1.0 }),
            },
            FieldSpec::ExactSlice {
                solution: ExactSolution::Wave1dNeumannBenchmark,
                time: 0.7,
                time_derivative: true,
            },
        ];
        let points: [&[f64]; 4] = [&[0.3, 2.2], &[0.5, 1.0, 2.0], &[2.9, 1.2], &[2.5]];
        for (s, p) in specs.iter().zip(points) {
            let f = s.build().unwrap();
            assert!(gradient_mismatch(f.as_ref(), p) < 1e-6, "{s:?}");
        }
    }

    #[test]
    fn diagonal_odd_vanishes_on_diagonal() {
        let f = FieldSpec::DiagonalOdd {
            inner: Box::new(FieldSpec::GaussianBump { center: vec![3.0, 1.0], sharpness: 10.0, amplitude: 1.0 }),
        }
        .build()
        .unwrap();
        assert_eq!(f.value(&[2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let s = FieldSpec::Sum {
            terms: vec![
                FieldSpec::GaussianBump { center: vec![1.0, 1.0], sharpness: 10.0, amplitude: 5.0 },
                FieldSpec::Zero { dim: 2 },
            ],
        };
        #[derive(Serialize, Deserialize)]
        struct W {
            f: FieldSpec,
        }
        let text = toml::to_string(&W { f: s.clone() }).unwrap();
        let back: W = toml::from_str(&text).unwrap();
        assert_eq!(back.f, s);
        assert!(toml::from_str::<W>("[f]\nkind = \"zero\"\ndim = 1\nextra = 2\n").is_err());
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let f = gaussian_bump(vec![0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(f.value(&[0.0]).is_err());
        let s = FieldSpec::Sum { terms: vec![FieldSpec::Zero { dim: 1 }, FieldSpec::Zero { dim: 2 }] };
        assert!(s.build().is_err());
    }
}
