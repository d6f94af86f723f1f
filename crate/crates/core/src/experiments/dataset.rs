use crate::basis::MultiIndex;
use crate::error::{Error, Result};
use crate::gp::{Dataset, Observation, ObservationGroup};
use crate::oracles::{Field, SharedField};

use super::config::{CollocationSpec, DataSpec, ExperimentConfig};

/// `n` equispaced values from `a` to `b` inclusive; `a` alone when `n = 1`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Zero-valued Dirichlet rows at `(t, r cos φ, r sin φ)` on the tensor grid of
/// `n_space` equispaced angles and `n_time` equispaced times.
pub fn hybrid_collocation(spec: &CollocationSpec) -> Vec<Observation> {
    // Config validation admits only Dirichlet arcs.
    let deriv = MultiIndex::zero(3);
    let angles = linspace(spec.angles[0], spec.angles[1], spec.n_space);
    let times = linspace(spec.time_range[0], spec.time_range[1], spec.n_time);
    let mut out = Vec::with_capacity(angles.len() * times.len());
    for t in &times {
        for phi in &angles {
            out.push(Observation {
                point: vec![*t, spec.radius * phi.cos(), spec.radius * phi.sin()],
                deriv: deriv.clone(),
                value: 0.0,
                group: ObservationGroup::BoundaryCollocation,
            });
        }
    }
    out
}

/// `count` points equispaced along the perimeter of `[lo, hi]`, starting at
/// `lo` and running counter-clockwise.
pub fn box_perimeter(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let perimeter = 2.0 * (w + h);
    (0..count)
        .map(|k| {
            let s = perimeter * k as f64 / count as f64;
            if s < w {
                vec![lo[0] + s, lo[1]]
            } else if s < w + h {
                vec![hi[0], lo[1] + (s - w)]
            } else if s < 2.0 * w + h {
                vec![hi[0] - (s - w - h), hi[1]]
            } else {
                vec![lo[0], hi[1] - (s - 2.0 * w - h)]
            }
        })
        .collect()
}

/// Training data for `cfg`: the initial-slice lattice (values, then
/// velocities when configured) or the box perimeter, followed by collocation
/// rows. Targets have the particular solution subtracted.
pub fn build_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let particular: Option<SharedField> = cfg.particular_solution.as_ref().map(|p| p.build()).transpose()?;
    let mut obs = Vec::new();
    match &cfg.data {
        DataSpec::InitialSlice {
            domain,
            spacing,
            initial,
            velocity,
            time,
        } => {
            let (lo, hi) = domain.bounds();
            if lo.iter().zip(&hi).any(|(a, b)| spacing > &(b - a)) {
                return Err(Error::EmptyDataset(format!("spacing {spacing} exceeds the data domain")));
            }
            let lattice = domain.node_lattice(*spacing);
            if lattice.is_empty() {
                return Err(Error::EmptyDataset("data domain holds no lattice points".into()));
            }
            let initial = initial.build()?;
            let velocity = velocity.as_ref().map(|v| v.build()).transpose()?;
            let points: Vec<Vec<f64>> = lattice
                .iter()
                .map(|x| std::iter::once(*time).chain(x.iter().copied()).collect())
                .collect();
            for (x, p) in lattice.iter().zip(&points) {
                let shift = match &particular {
                    Some(f) => f.value(p)?,
                    None => 0.0,
                };
                obs.push(Observation::value_at(p.clone(), initial.value(x)? - shift, ObservationGroup::InitialValue));
            }
            if let Some(v) = &velocity {
                let dt = MultiIndex::unit(points[0].len(), 0);
                for (x, p) in lattice.iter().zip(&points) {
                    let shift = match &particular {
                        Some(f) => f.gradient(p)?[0],
                        None => 0.0,
                    };
                    obs.push(Observation {
                        point: p.clone(),
                        deriv: dt.clone(),
                        value: v.value(x)? - shift,
                        group: ObservationGroup::InitialVelocity,
                    });
                }
            }
        }
        DataSpec::BoxBoundary { domain, points, values } => {
            let (lo, hi) = domain.bounds();
            let values = values.build()?;
            for p in box_perimeter(&lo, &hi, *points) {
                let shift = match &particular {
                    Some(f) => f.value(&p)?,
                    None => 0.0,
                };
                let v = values.value(&p)? - shift;
                obs.push(Observation::value_at(p, v, ObservationGroup::BoundaryCollocation));
            }
        }
    }
    for c in &cfg.collocation {
        let mut rows = hybrid_collocation(c);
        if let Some(f) = &particular {
            for o in &mut rows {
                o.value -= f.value(&o.point)?;
            }
        }
        obs.extend(rows);
    }
    let mut data = Dataset::new(obs);
    if let Some(f) = cfg.noise_floor {
        data.noise_floor = f;
    }
    if let Some(g) = cfg.group_noise {
        data.group_noise = g;
    }
    data.validate(cfg.basis()?.dim)?;
    Ok(data)
}
