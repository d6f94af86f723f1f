//! Gaussian process regression with priors whose samples solve linear
//! constant-coefficient PDEs and their boundary conditions exactly.

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod gp;
pub mod linalg;
pub mod oracles;

pub use basis::{
    catalog_lookup, enumerate_discrete, eval_basis, grad_params, variety_residual, BasisFamily,
    Branch, FamilyId, MultiIndex, Params,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use gp::{
    assemble_design, fit, nlml, nlml_grad, posterior_coeffs, predict, sample, BasisSize, Dataset,
    DesignMatrix, ModelState, Observation, ObservationGroup, SampleMode, TrainConfig,
};
