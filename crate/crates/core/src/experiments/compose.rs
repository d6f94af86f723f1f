use crate::basis::MultiIndex;
use crate::diagnostics::Predictor;
use crate::error::{Error, Result};
use crate::oracles::SharedField;

/// `u = u_p + v` for a particular solution `u_p` and a homogeneous predictor `v`.
pub struct Composed<P> {
    particular: SharedField,
    homogeneous: P,
}

/// Adds `particular` to the values and first derivatives of `homogeneous`.
pub fn compose_inhomogeneous<P: Predictor>(particular: SharedField, homogeneous: P) -> Result<Composed<P>> {
    if particular.dim() != homogeneous.dim() {
        return Err(Error::Invalid(format!(
            "particular solution has dimension {} but the predictor has {}",
            particular.dim(),
            homogeneous.dim()
        )));
    }
    Ok(Composed {
        particular,
        homogeneous,
    })
}

impl<P> Composed<P> {
    pub fn homogeneous(&self) -> &P {
        &self.homogeneous
    }

    pub fn particular(&self) -> &SharedField {
        &self.particular
    }
}

impl<P: Predictor> Predictor for Composed<P> {
    fn dim(&self) -> usize {
        self.homogeneous.dim()
    }

    fn evaluate(&self, points: &[Vec<f64>], d: &MultiIndex) -> Result<Vec<f64>> {
        let v = self.homogeneous.evaluate(points, d)?;
        let p = self.particular.as_ref().evaluate(points, d)?;
        Ok(v.iter().zip(&p).map(|(a, b)| a + b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{catalog_lookup, FamilyId, Operator};
    use crate::diagnostics::{boundary_residual, pde_residual_fd, BoundarySampler, Domain};
    use crate::oracles::FieldSpec;

    fn zero3() -> SharedField {
        FieldSpec::Zero { dim: 3 }.build().unwrap()
    }

    fn linear() -> SharedField {
        FieldSpec::Quadratic {
            constant: 0.0,
            linear: vec![0.0, 0.5, 0.5],
            square: vec![0.0; 3],
        }
        .build()
        .unwrap()
    }

    fn points() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0, 0.0], vec![1.3, 0.2, 3.9], vec![7.5, 4.0, 1.1]]
    }

    #[test]
    fn zero_homogeneous_part_gives_the_particular_solution() {
        let u = compose_inhomogeneous(linear(), zero3()).unwrap();
        for d in [MultiIndex::zero(3), MultiIndex::unit(3, 1)] {
            assert_eq!(u.evaluate(&points(), &d).unwrap(), linear().as_ref().evaluate(&points(), &d).unwrap());
        }
    }

    #[test]
    fn differencing_recovers_the_homogeneous_part() {
        let v = FieldSpec::GaussianBump {
            center: vec![1.0, 2.0, 2.0],
            sharpness: 3.0,
            amplitude: 1.0,
        }
        .build()
        .unwrap();
        let u = compose_inhomogeneous(linear(), v.clone()).unwrap();
        let d = MultiIndex::unit(3, 2);
        let got = u.evaluate(&points(), &d).unwrap();
        let p = linear().as_ref().evaluate(&points(), &d).unwrap();
        let want = v.as_ref().evaluate(&points(), &d).unwrap();
        for h in 0..3 {
            assert!((got[h] - p[h] - want[h]).abs() <= f64::EPSILON * (p[h].abs() + want[h].abs()));
        }
    }

    #[test]
    fn composed_boundary_values_follow_the_particular_solution() {
        let family = catalog_lookup(FamilyId::Wave2dRectangleDirichlet).with_length(4.0).unwrap();
        let sampler = BoundarySampler::Planes {
            planes: family.boundaries.clone(),
            domain: Domain::Box {
                lo: vec![0.0, 0.0],
                hi: vec![4.0, 4.0],
            },
            times: (0.0, 8.0),
        };
        let u = compose_inhomogeneous(linear(), zero3()).unwrap();
        let samples = sampler.sample(50, 3);
        let pts: Vec<Vec<f64>> = samples.iter().map(|s| s.point.clone()).collect();
        let got = u.evaluate(&pts, &MultiIndex::zero(3)).unwrap();
        for (p, g) in pts.iter().zip(got) {
            assert!((g - 0.5 * (p[1] + p[2])).abs() <= 1e-10);
        }
        // Minus u_p, the boundary residual is that of the homogeneous part.
        assert_eq!(boundary_residual(u.homogeneous().as_ref(), &sampler, 50, 3).unwrap(), 0.0);
    }

    #[test]
    fn composed_pde_residual_is_that_of_the_particular_solution() {
        let quad = FieldSpec::Quadratic {
            constant: 0.0,
            linear: vec![0.0; 3],
            square: vec![0.2, 0.1, 0.1],
        }
        .build()
        .unwrap();
        let u = compose_inhomogeneous(quad, zero3()).unwrap();
        let r = pde_residual_fd(&u, Operator::Wave, &points(), 1e-3).unwrap();
        assert!(r <= 1e-8, "{r:e}");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(compose_inhomogeneous(FieldSpec::Zero { dim: 2 }.build().unwrap(), zero3()).is_err());
    }
}
