//! Dense complex Hermitian positive-definite factorization.
//!
//! Only what the regression engine needs: a lower Cholesky factor with
//! escalating diagonal jitter, triangular solves, the log-determinant and
//! an explicit inverse.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of times the jitter is multiplied by ten before giving up.
pub const JITTER_ESCALATIONS: usize = 3;

/// Lower Cholesky factor `L` of `A + jitter·I = L Lᴴ`.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    lower: Array2<Complex64>,
    jitter: f64,
}

/// In-place attempt; returns `None` when a pivot is not strictly positive.
fn try_cholesky(a: &Array2<Complex64>, shift: f64) -> Option<Array2<Complex64>> {
    let n = a.nrows();
    let mut l = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            {
                let ri = l.row(i);
                let rj = l.row(j);
                let ri = ri.as_slice().unwrap();
                let rj = rj.as_slice().unwrap();
                for k in 0..j {
                    s += ri[k] * rj[k].conj();
                }
            }
            if i == j {
                let d = a[[i, i]].re + shift - s.re;
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                l[[i, i]] = Complex64::new(d.sqrt(), 0.0);
            } else {
                l[[i, j]] = (a[[i, j]] - s) / l[[j, j]].re;
            }
        }
    }
    Some(l)
}

impl HermitianFactor {
    /// Factor `a` with additive jitter `rel_jitter × mean(diag a)`, escalating
    /// ×10 up to [`JITTER_ESCALATIONS`] times.
    pub fn new(a: &Array2<Complex64>, rel_jitter: f64) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Invalid(format!(
                "factorization needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let mean_diag = if n == 0 {
            0.0
        } else {
            a.diag().iter().map(|z| z.re).sum::<f64>() / n as f64
        };
        let mut jitter = rel_jitter * mean_diag.abs();
        for _ in 0..=JITTER_ESCALATIONS {
            if let Some(lower) = try_cholesky(a, jitter) {
                return Ok(Self { lower, jitter });
            }
            jitter = if jitter > 0.0 {
                jitter * 10.0
            } else {
                f64::EPSILON * mean_diag.abs().max(1.0)
            };
        }
        Err(Error::NotPd {
            attempts: JITTER_ESCALATIONS,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// The diagonal shift actually applied.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &Array2<Complex64> {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diag().iter().map(|z| z.re.ln()).sum::<f64>()
    }

    /// Solve `L y = b`.
    pub fn forward(&self, b: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.dim();
        let mut y = b.to_owned();
        for i in 0..n {
            let row = self.lower.row(i);
            let mut s = y[i];
            for k in 0..i {
                s -= row[k] * y[k];
            }
            y[i] = s / row[i].re;
        }
        y
    }

    /// Solve `Lᴴ x = y`.
    pub fn backward(&self, y: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.dim();
        let mut x = y.to_owned();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lower[[k, i]].conj() * x[k];
            }
            x[i] = s / self.lower[[i, i]].re;
        }
        x
    }

    /// Solve `(A + jitter·I) x = b`.
    pub fn solve(&self, b: ArrayView1<Complex64>) -> Array1<Complex64> {
        let y = self.forward(b);
        self.backward(y.view())
    }

    /// `L⁻¹`, lower triangular.
    pub fn lower_inverse(&self) -> Array2<Complex64> {
        let n = self.dim();
        let l = &self.lower;
        let mut x = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            let inv = 1.0 / l[[i, i]].re;
            x[[i, i]] = Complex64::new(inv, 0.0);
            for j in 0..i {
                let mut s = Complex64::new(0.0, 0.0);
                for k in j..i {
                    s += l[[i, k]] * x[[k, j]];
                }
                x[[i, j]] = -s * inv;
            }
        }
        x
    }

    /// `(A + jitter·I)⁻¹ = L⁻ᴴ L⁻¹`.
    pub fn inverse(&self) -> Array2<Complex64> {
        let li = self.lower_inverse();
        conj_transpose(&li).dot(&li)
    }
}

pub fn conj_transpose(a: &Array2<Complex64>) -> Array2<Complex64> {
    let mut t = a.t().to_owned();
    t.mapv_inplace(|z| z.conj());
    t.as_standard_layout().into_owned()
}

/// `Bᴴ B` for a tall complex matrix.
pub fn gram(b: &Array2<Complex64>) -> Array2<Complex64> {
    let bh = conj_transpose(b);
    let mut g = bh.dot(b);
    // Force exact Hermitian symmetry; gemm rounding leaves tiny asymmetries.
    let n = g.nrows();
    for i in 0..n {
        g[[i, i]].im = 0.0;
        for j in 0..i {
            let v = 0.5 * (g[[i, j]] + g[[j, i]].conj());
            g[[i, j]] = v;
            g[[j, i]] = v.conj();
        }
    }
    g
}

/// `Bᴴ y` for real `y`.
pub fn adjoint_apply_real(b: &Array2<Complex64>, y: &[f64]) -> Array1<Complex64> {
    let mut out = Array1::<Complex64>::zeros(b.ncols());
    for (row, &yh) in b.axis_iter(Axis(0)).zip(y) {
        for (o, &v) in out.iter_mut().zip(row.iter()) {
            *o += v.conj() * yh;
        }
    }
    out
}
