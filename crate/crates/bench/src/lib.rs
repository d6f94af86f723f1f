//! Synthetic workloads shared by the criterion benches and `bepgp bench`.

use std::time::{Duration, Instant};

use bepgp::gp::{initial_state, LikelihoodOptions};
use bepgp::{
    assemble_design, catalog_lookup, Complex64, nlml, nlml_grad, predict, BasisFamily, BasisSize, Dataset, FamilyId, ModelState,
    MultiIndex, Observation, ObservationGroup, Result, TrainConfig,
};

/// Workload names accepted by [`run_workload`].
pub const WORKLOADS: [&str; 4] = ["assembly", "nlml", "nlml_grad", "predict"];

pub struct Fixture {
    pub family: BasisFamily,
    pub model: ModelState,
    pub data: Dataset,
    pub opts: LikelihoodOptions,
}

/// Half-line wave model with `basis` elements fitted to `rows` value and
/// velocity rows on `[0, 12]`.
pub fn fixture(rows: usize, basis: usize) -> Result<Fixture> {
    let family = catalog_lookup(FamilyId::Wave1dHalflineNeumann);
    let n = (rows / 2).max(1);
    let mut obs = Vec::with_capacity(2 * n);
    for k in 0..n {
        let x = 12.0 * k as f64 / n as f64;
        obs.push(Observation::value_at(vec![0.0, x], (-(x - 3.0).powi(2)).exp(), ObservationGroup::InitialValue));
        obs.push(Observation {
            point: vec![0.0, x],
            deriv: MultiIndex::unit(2, 0),
            value: 0.0,
            group: ObservationGroup::InitialVelocity,
        });
    }
    let data = Dataset::new(obs);
    let cfg = TrainConfig::default();
    let model = initial_state(&family, &data, BasisSize::Count(basis), &cfg)?;
    Ok(Fixture {
        family,
        model,
        data,
        opts: cfg.likelihood(),
    })
}

/// One execution of the named workload.
pub fn run_workload(name: &str, f: &Fixture) -> Result<()> {
    match name {
        "assembly" => assemble_design(&f.family, &f.model, &f.data).map(drop),
        "nlml" => nlml(&f.model, &f.data, &f.opts).map(drop),
        "nlml_grad" => nlml_grad(&f.model, &f.data, &f.opts).map(drop),
        "predict" => {
            let coeffs = vec![Complex64::new(1.0, 0.0); f.model.basis_count()];
            let pts: Vec<Vec<f64>> = f.data.observations.iter().map(|o| o.point.clone()).collect();
            predict(&f.model, &coeffs, &pts, &MultiIndex::zero(2)).map(drop)
        }
        other => Err(bepgp::Error::Invalid(format!(
            "unknown workload `{other}` (expected one of {})",
            WORKLOADS.join(", ")
        ))),
    }
}

/// Median wall time over `reps` executions.
pub fn time_workload(name: &str, f: &Fixture, reps: usize) -> Result<Duration> {
    let mut times = Vec::with_capacity(reps.max(1));
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        run_workload(name, f)?;
        times.push(t.elapsed());
    }
    times.sort();
    Ok(times[times.len() / 2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_workload_runs() {
        let f = fixture(40, 6).unwrap();
        for w in WORKLOADS {
            run_workload(w, &f).unwrap();
        }
        assert!(run_workload("nope", &f).is_err());
    }
}
