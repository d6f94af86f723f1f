//! Closed-form basis families of exponential PDE solutions.
//!
//! Every family is a finite signed sum of complex exponentials `e^{z·x}`
//! whose frequencies `z` lie on the characteristic variety of the PDE and
//! whose weights cancel under the boundary operators of the family's
//! domain. Coordinates are time-first: `(t, x, y, z)`; the Laplace family
//! has no time coordinate and uses `(x, y)`.

mod catalog;
pub mod exactness;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use catalog::{catalog_lookup, reference_table, FamilyId};

/// Evaluation rejects square-root radicands closer to zero than this.
pub const BRANCH_TOLERANCE: f64 = 1e-10;

/// Below this radicand magnitude, gradients use a shifted square root.
pub const BRANCH_GRADIENT_ZONE: f64 = 1e-6;

/// Largest admissible log-magnitude of a scaled term.
pub const DEFAULT_LOG_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Continuous,
    Discrete,
}

/// Sign index selecting one of the two roots wherever a family uses `±√·`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A point in a family's parameter space: complex values (integers for
/// discrete families) plus the root-sign index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub values: Vec<Complex64>,
    pub branch: Branch,
}

impl Params {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self {
            values,
            branch: Branch::Plus,
        }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }
}

/// Derivative orders per coordinate, total order at most two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub const MAX_ORDER: u32 = 2;

    pub fn new(orders: Vec<u8>) -> Result<Self> {
        let total: u32 = orders.iter().map(|&o| o as u32).sum();
        if total > Self::MAX_ORDER {
            return Err(Error::Invalid(format!(
                "derivative order {total} exceeds {}",
                Self::MAX_ORDER
            )));
        }
        Ok(Self(orders))
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// First derivative along coordinate `i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut o = vec![0; dim];
        o[i] = 1;
        Self(o)
    }

    /// Second derivative along coordinate `i`.
    pub fn second(dim: usize, i: usize) -> Self {
        let mut o = vec![0; dim];
        o[i] = 2;
        Self(o)
    }

    pub fn orders(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&o| o as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&o| o == 0)
    }

    /// `Π z_i^{d_i}`.
    pub fn monomial(&self, z: &[Complex64]) -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        for (&o, &zi) in self.0.iter().zip(z) {
            match o {
                0 => {}
                1 => p *= zi,
                _ => p *= zi * zi,
            }
        }
        p
    }

    /// `∂/∂z_i Π z_l^{d_l}`.
    fn monomial_partial(&self, z: &[Complex64], i: usize) -> Complex64 {
        let oi = self.0[i];
        if oi == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut p = Complex64::new(oi as f64, 0.0);
        for (l, (&o, &zl)) in self.0.iter().zip(z).enumerate() {
            let e = if l == i { o - 1 } else { o };
            match e {
                0 => {}
                1 => p *= zl,
                _ => p *= zl * zl,
            }
        }
        p
    }
}

impl TryFrom<Vec<u8>> for MultiIndex {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MultiIndex> for Vec<u8> {
    fn from(m: MultiIndex) -> Self {
        m.0
    }
}

/// One coordinate of a frequency vector as a function of the parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FreqExpr {
    /// `coef · θ_param`, times the branch sign when `branched`.
    Linear {
        coef: Complex64,
        param: usize,
        branched: bool,
    },
    /// `coef · Σ θ_i²`.
    SumSquares { coef: Complex64, params: Vec<usize> },
    /// `coef · branch · √(Σ θ_i²)` on the principal branch.
    Root { coef: Complex64, params: Vec<usize> },
}

fn radicand(theta: &[Complex64], params: &[usize]) -> Complex64 {
    params.iter().map(|&i| theta[i] * theta[i]).sum()
}

impl FreqExpr {
    fn eval(&self, p: &Params) -> Result<Complex64> {
        let th = &p.values;
        Ok(match self {
            FreqExpr::Linear {
                coef,
                param,
                branched,
            } => {
                let s = if *branched { p.branch.sign() } else { 1.0 };
                coef * s * th[*param]
            }
            FreqExpr::SumSquares { coef, params } => coef * radicand(th, params),
            FreqExpr::Root { coef, params } => {
                let r = radicand(th, params);
                if r.norm() < BRANCH_TOLERANCE {
                    return Err(Error::BranchSingularity { radicand: r.norm() });
                }
                coef * p.branch.sign() * r.sqrt()
            }
        })
    }

    /// Holomorphic derivative with respect to `θ_m`.
    fn partial(&self, p: &Params, m: usize) -> Complex64 {
        let th = &p.values;
        match self {
            FreqExpr::Linear {
                coef,
                param,
                branched,
            } => {
                if *param != m {
                    return Complex64::new(0.0, 0.0);
                }
                let s = if *branched { p.branch.sign() } else { 1.0 };
                coef * s
            }
            FreqExpr::SumSquares { coef, params } => {
                let k = params.iter().filter(|&&i| i == m).count() as f64;
                coef * 2.0 * k * th[m]
            }
            FreqExpr::Root { coef, params } => {
                let k = params.iter().filter(|&&i| i == m).count() as f64;
                if k == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut r = radicand(th, params);
                if r.norm() < BRANCH_GRADIENT_ZONE {
                    r += Complex64::new(0.0, BRANCH_GRADIENT_ZONE);
                }
                coef * p.branch.sign() * k * th[m] / r.sqrt()
            }
        }
    }
}

/// A signed exponential `coef · e^{z(θ)·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: Complex64,
    pub freq: Vec<FreqExpr>,
}

/// Symbol of the PDE, `A(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    /// `z_t − Σ z_i²`
    Heat,
    /// `z_t² − Σ z_i²`
    Wave,
    /// `z_1² + z_2²`
    Laplace,
}

impl Operator {
    pub fn symbol(self, z: &[Complex64]) -> Complex64 {
        match self {
            Operator::Heat => z[0] - z[1..].iter().map(|v| v * v).sum::<Complex64>(),
            Operator::Wave => z[0] * z[0] - z[1..].iter().map(|v| v * v).sum::<Complex64>(),
            Operator::Laplace => z.iter().map(|v| v * v).sum(),
        }
    }

    pub fn degree(self) -> i32 {
        match self {
            Operator::Heat => 1,
            Operator::Wave | Operator::Laplace => 2,
        }
    }

    pub fn has_time(self) -> bool {
        !matches!(self, Operator::Laplace)
    }

    /// The operator as a signed sum of derivative monomials.
    pub fn monomials(self, dim: usize) -> Vec<(f64, MultiIndex)> {
        let mut out = Vec::new();
        match self {
            Operator::Heat => {
                out.push((1.0, MultiIndex::unit(dim, 0)));
                for i in 1..dim {
                    out.push((-1.0, MultiIndex::second(dim, i)));
                }
            }
            Operator::Wave => {
                out.push((1.0, MultiIndex::second(dim, 0)));
                for i in 1..dim {
                    out.push((-1.0, MultiIndex::second(dim, i)));
                }
            }
            Operator::Laplace => {
                for i in 0..dim {
                    out.push((1.0, MultiIndex::second(dim, i)));
                }
            }
        }
        out
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::Heat => "heat",
            Operator::Wave => "wave",
            Operator::Laplace => "laplace",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryOp {
    Dirichlet,
    Neumann,
}

impl FromStr for BoundaryOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryOp::Dirichlet),
            "neumann" => Ok(BoundaryOp::Neumann),
            other => Err(Error::Invalid(format!("unknown boundary operator `{other}`"))),
        }
    }
}

/// `{x : normal·x = offset}` in full spacetime coordinates; the normal
/// never has a time component.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPlane {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub op: BoundaryOp,
    pub label: &'static str,
}

impl BoundaryPlane {
    /// Orthogonal projection of `x` onto the plane.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let nn: f64 = self.normal.iter().map(|v| v * v).sum();
        let d = (self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.offset) / nn;
        x.iter().zip(&self.normal).map(|(xi, ni)| xi - d * ni).collect()
    }

    /// Unit normal.
    pub fn unit_normal(&self) -> Vec<f64> {
        let n = self.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.normal.iter().map(|v| v / n).collect()
    }
}

/// Per-term frequencies of one basis element, cached for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Frequencies {
    pub z: Vec<Vec<Complex64>>,
}

/// Holomorphic Jacobians `∂z_{k,i}/∂θ_m`, indexed `[term][coord][param]`.
#[derive(Debug, Clone)]
pub struct FrequencyJacobian(pub Vec<Vec<Vec<Complex64>>>);

#[derive(Debug, Clone)]
pub struct BasisFamily {
    pub id: FamilyId,
    pub dim: usize,
    pub free_params: usize,
    pub kind: FamilyKind,
    pub terms: Vec<Term>,
    pub operator: Operator,
    pub boundaries: Vec<BoundaryPlane>,
    /// Box side for discrete families (frequencies are `jπ/L`).
    pub length: f64,
    pub domain: &'static str,
    pub formula: &'static str,
}

impl BasisFamily {
    pub fn is_discrete(&self) -> bool {
        self.kind == FamilyKind::Discrete
    }

    /// Whether the branch index changes the element.
    pub fn uses_branch(&self) -> bool {
        self.terms.iter().any(|t| {
            t.freq.iter().any(|f| {
                matches!(
                    f,
                    FreqExpr::Root { .. } | FreqExpr::Linear { branched: true, .. }
                )
            })
        })
    }

    /// Rebuild a discrete family for a box of side `length`.
    pub fn with_length(self, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Invalid(format!("domain length {length} must be positive")));
        }
        if !self.is_discrete() {
            return Ok(self);
        }
        Ok(catalog::build(self.id, length))
    }

    fn check_params(&self, p: &Params) -> Result<()> {
        if p.values.len() != self.free_params {
            return Err(Error::Invalid(format!(
                "{} expects {} parameters, got {}",
                self.id,
                self.free_params,
                p.values.len()
            )));
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64], d: &MultiIndex) -> Result<()> {
        if x.len() != self.dim || d.dim() != self.dim {
            return Err(Error::Invalid(format!(
                "{} lives in {} coordinates, got point of {} and multi-index of {}",
                self.id,
                self.dim,
                x.len(),
                d.dim()
            )));
        }
        Ok(())
    }

    pub fn frequencies(&self, p: &Params) -> Result<Frequencies> {
        self.check_params(p)?;
        let z = self
            .terms
            .iter()
            .map(|t| t.freq.iter().map(|f| f.eval(p)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Frequencies { z })
    }

    pub fn frequency_jacobian(&self, p: &Params) -> FrequencyJacobian {
        FrequencyJacobian(
            self.terms
                .iter()
                .map(|t| {
                    t.freq
                        .iter()
                        .map(|f| (0..self.free_params).map(|m| f.partial(p, m)).collect())
                        .collect()
                })
                .collect(),
        )
    }

    /// `∂^d b(x) · e^{−log_scale}` from cached frequencies.
    pub fn eval_cached(
        &self,
        freqs: &Frequencies,
        x: &[f64],
        d: &MultiIndex,
        log_scale: f64,
        log_cap: f64,
    ) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (term, z) in self.terms.iter().zip(&freqs.z) {
            let e = dot(z, x) - log_scale;
            if e.re > log_cap {
                return Err(Error::Overflow {
                    log_magnitude: e.re,
                    cap: log_cap,
                });
            }
            acc += term.coef * d.monomial(z) * e.exp();
        }
        Ok(acc)
    }

    /// Holomorphic parameter gradient of the scaled element, cached inputs.
    pub fn grad_cached(
        &self,
        freqs: &Frequencies,
        jac: &FrequencyJacobian,
        x: &[f64],
        d: &MultiIndex,
        log_scale: f64,
        out: &mut [Complex64],
    ) {
        out.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        for ((term, z), jk) in self.terms.iter().zip(&freqs.z).zip(&jac.0) {
            let w = term.coef * (dot(z, x) - log_scale).exp();
            let p = d.monomial(z);
            for (i, ji) in jk.iter().enumerate() {
                let factor = w * (d.monomial_partial(z, i) + p * x[i]);
                for (o, &dzm) in out.iter_mut().zip(ji) {
                    *o += factor * dzm;
                }
            }
        }
    }

    /// Largest `|coef · e^{z·x}| · max(1, |z|^deg)` over the terms, the
    /// reference magnitude for cancellation checks.
    pub fn max_term_magnitude(&self, freqs: &Frequencies, x: &[f64]) -> f64 {
        let deg = self.operator.degree();
        self.terms
            .iter()
            .zip(&freqs.z)
            .map(|(t, z)| {
                let zn = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                t.coef.norm() * dot(z, x).re.exp() * zn.powi(deg).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dot(z: &[Complex64], x: &[f64]) -> Complex64 {
    z.iter().zip(x).map(|(zi, &xi)| zi * xi).sum()
}

/// `∂^d b(x; θ)` computed analytically term by term.
pub fn eval_basis(
    family: &BasisFamily,
    theta: &Params,
    x: &[f64],
    d: &MultiIndex,
) -> Result<Complex64> {
    family.check_point(x, d)?;
    let f = family.frequencies(theta)?;
    family.eval_cached(&f, x, d, 0.0, DEFAULT_LOG_CAP)
}

/// `∂/∂θ_k` of [`eval_basis`] for each complex parameter.
pub fn grad_params(
    family: &BasisFamily,
    theta: &Params,
    x: &[f64],
    d: &MultiIndex,
) -> Result<Vec<Complex64>> {
    if family.is_discrete() {
        return Err(Error::DiscreteFamily(family.id.to_string()));
    }
    family.check_point(x, d)?;
    let f = family.frequencies(theta)?;
    let jac = family.frequency_jacobian(theta);
    let mut out = vec![Complex64::new(0.0, 0.0); family.free_params];
    family.grad_cached(&f, &jac, x, d, 0.0, &mut out);
    Ok(out)
}

/// `max_k |A(z_k)| / (1 + |z_k|^deg)`.
pub fn variety_residual(family: &BasisFamily, theta: &Params) -> Result<f64> {
    let f = family.frequencies(theta)?;
    Ok(residual_of(family.operator, &f))
}

fn residual_of(op: Operator, f: &Frequencies) -> f64 {
    f.z.iter()
        .map(|z| {
            let zn = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            op.symbol(z).norm() / (1.0 + zn.powi(op.degree()))
        })
        .fold(0.0, f64::max)
}

/// All lattice parameters with every component at most `cutoff`, modulo the
/// family's symmetries, with both time signs where they differ.
pub fn enumerate_discrete(family: &BasisFamily, cutoff: usize) -> Result<Vec<Params>> {
    if !family.is_discrete() {
        return Err(Error::ContinuousFamily(family.id.to_string()));
    }
    if cutoff == 0 {
        return Err(Error::Invalid("discrete cutoff must be at least 1".into()));
    }
    let j_max = cutoff as i64;
    let mut lattice: Vec<Vec<i64>> = Vec::new();
    match family.id {
        FamilyId::Wave1dSlabDirichlet => lattice.extend((1..=j_max).map(|j| vec![j])),
        FamilyId::Wave1dSlabNeumann => lattice.extend((0..=j_max).map(|j| vec![j])),
        FamilyId::Wave2dRectangleDirichlet => {
            for j in 1..=j_max {
                for k in 1..=j_max {
                    lattice.push(vec![j, k]);
                }
            }
        }
        FamilyId::Wave2dTriangleDirichlet => {
            for j in 1..=j_max {
                for k in j + 1..=j_max {
                    lattice.push(vec![j, k]);
                }
            }
        }
        other => unreachable!("{other} is not discrete"),
    }
    let mut out = Vec::with_capacity(lattice.len() * 2);
    for l in lattice {
        let values: Vec<Complex64> = l.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        // The all-zero mode is time independent; one sign covers it.
        let stationary = l.iter().all(|&v| v == 0);
        out.push(Params {
            values: values.clone(),
            branch: Branch::Plus,
        });
        if !stationary {
            out.push(Params {
                values,
                branch: Branch::Minus,
            });
        }
    }
    Ok(out)
}
