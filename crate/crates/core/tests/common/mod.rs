//! Shared oracles for integration and acceptance tests.
#![allow(dead_code)]

use bepgp::basis::{catalog_lookup, Branch, FamilyId, MultiIndex, Params};
use bepgp::gp::{
    nlml, nlml_grad, Dataset, LikelihoodOptions, ModelState, Observation, ObservationGroup,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random model and dataset with mixed value and time-derivative rows.
pub fn random_instance(id: FamilyId, m: usize, n: usize, seed: u64) -> (ModelState, Dataset) {
    let family = catalog_lookup(id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<Params> = if family.is_discrete() {
        bepgp::basis::enumerate_discrete(&family, 2).unwrap().into_iter().take(n).collect()
    } else {
        (0..n)
            .map(|j| Params {
                values: (0..family.free_params)
                    .map(|_| Complex64::new(rng.random_range(-0.8..0.8), rng.random_range(-3.0..3.0)))
                    .collect(),
                branch: if j % 2 == 0 { Branch::Plus } else { Branch::Minus },
            })
            .collect()
    };
    let n = thetas.len();
    let mut model = ModelState::new(&family, thetas, rng.random_range(-3.0..-1.0));
    model.log_var = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let obs = (0..m)
        .map(|h| {
            let point: Vec<f64> = (0..family.dim).map(|_| rng.random_range(0.0..1.5)).collect();
            let deriv = if h % 3 == 2 && family.operator.has_time() {
                MultiIndex::unit(family.dim, 0)
            } else if h % 5 == 4 {
                MultiIndex::unit(family.dim, family.dim - 1)
            } else {
                MultiIndex::zero(family.dim)
            };
            Observation {
                point,
                deriv,
                value: rng.random_range(-1.0..1.0),
                group: ObservationGroup::InitialValue,
            }
        })
        .collect();
    (model, Dataset::new(obs))
}

/// Largest relative deviation between the analytic gradient and central
/// differences of the likelihood, over every coordinate.
pub fn gradient_error(model: &ModelState, data: &Dataset, step: f64) -> f64 {
    let opts = LikelihoodOptions::default();
    let g = nlml_grad(model, data, &opts).unwrap();
    let f = |m: &ModelState| nlml(m, data, &opts).unwrap();
    let central = |edit: &dyn Fn(&mut ModelState, f64)| {
        let mut up = model.clone();
        edit(&mut up, step);
        let mut dn = model.clone();
        edit(&mut dn, -step);
        (f(&up) - f(&dn)) / (2.0 * step)
    };
    let rel = |a: f64, fd: f64| (a - fd).abs() / a.abs().max(fd.abs()).max(1e-3);
    let mut worst = 0.0f64;
    for (j, th) in g.thetas.iter().enumerate() {
        for (k, pair) in th.iter().enumerate() {
            let re = central(&|m, h| m.thetas[j].values[k].re += h);
            let im = central(&|m, h| m.thetas[j].values[k].im += h);
            worst = worst.max(rel(pair[0], re)).max(rel(pair[1], im));
        }
    }
    for j in 0..model.basis_count() {
        let fd = central(&|m, h| m.log_var[j] += h);
        worst = worst.max(rel(g.log_var[j], fd));
    }
    let fd = central(&|m, h| m.log_noise += h);
    worst.max(rel(g.log_noise, fd))
}
