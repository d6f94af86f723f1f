use bepgp::basis::{catalog_lookup, FamilyId, MultiIndex, Params};
use bepgp::diagnostics::l1_metrics;
use bepgp::experiments::{box_perimeter, linspace};
use bepgp::gp::{predict, ModelState};
use bepgp::Complex64;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn l1_metrics_ignore_joint_permutation(
        pairs in prop::collection::vec((-5.0f64..5.0, 0.1f64..5.0), 1..40),
        rotate in 0usize..40,
    ) {
        let (pred, truth): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let k = rotate % pairs.len();
        let mut p2 = pred.clone();
        let mut t2 = truth.clone();
        p2.rotate_left(k);
        t2.rotate_left(k);
        p2.reverse();
        t2.reverse();
        let a = l1_metrics(&pred, &truth).unwrap();
        let b = l1_metrics(&p2, &t2).unwrap();
        prop_assert!(close(a.median_abs, b.median_abs, 1e-12));
        prop_assert!(close(a.rel, b.rel, 1e-12));
    }

    #[test]
    fn l1_metrics_scale_with_the_data(
        pairs in prop::collection::vec((-5.0f64..5.0, 0.1f64..5.0), 1..40),
        c in 0.01f64..100.0,
    ) {
        let (pred, truth): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let scaled = |v: &[f64]| v.iter().map(|x| c * x).collect::<Vec<_>>();
        let a = l1_metrics(&pred, &truth).unwrap();
        let b = l1_metrics(&scaled(&pred), &scaled(&truth)).unwrap();
        prop_assert!(close(b.median_abs, c * a.median_abs, 1e-12));
        prop_assert!(close(a.rel, b.rel, 1e-12));
    }

    #[test]
    fn prediction_is_linear_in_the_coefficients(
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 4),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        x in 0.0f64..2.0,
        t in 0.0f64..2.0,
    ) {
        let family = catalog_lookup(FamilyId::Wave1dHalflineNeumann);
        let thetas: Vec<Params> = (0..4).map(|j| Params::new(vec![Complex64::new(0.1 * j as f64, 1.0 + j as f64)])).collect();
        let model = ModelState::new(&family, thetas, -4.0);
        let c1: Vec<Complex64> = raw.iter().map(|r| Complex64::new(r.0, r.1)).collect();
        let c2: Vec<Complex64> = raw.iter().map(|r| Complex64::new(r.2, r.3)).collect();
        let mix: Vec<Complex64> = c1.iter().zip(&c2).map(|(p, q)| a * p + b * q).collect();
        let pts = vec![vec![t, x]];
        for d in [MultiIndex::zero(2), MultiIndex::unit(2, 0), MultiIndex::unit(2, 1)] {
            let p1 = predict(&model, &c1, &pts, &d).unwrap().values[0];
            let p2 = predict(&model, &c2, &pts, &d).unwrap().values[0];
            let pm = predict(&model, &mix, &pts, &d).unwrap().values[0];
            prop_assert!(close(pm, a * p1 + b * p2, 1e-10));
        }
    }

    #[test]
    fn linspace_hits_both_ends(a in -10.0f64..10.0, w in 0.1f64..10.0, n in 2usize..200) {
        let v = linspace(a, a + w, n);
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], a);
        prop_assert!(close(v[n - 1], a + w, 1e-14));
        prop_assert!(v.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn perimeter_points_stay_on_the_box(lo in -5.0f64..5.0, w in 0.5f64..10.0, h in 0.5f64..10.0, n in 1usize..500) {
        let (lo, hi) = ([lo, lo], [lo + w, lo + h]);
        for p in box_perimeter(&lo, &hi, n) {
            let edge = [p[0] - lo[0], hi[0] - p[0], p[1] - lo[1], hi[1] - p[1]];
            prop_assert!(edge.iter().all(|d| *d >= -1e-9));
            prop_assert!(edge.iter().any(|d| d.abs() <= 1e-9));
        }
    }
}
