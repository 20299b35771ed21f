use bessel_multipliers::geometry::*;
use proptest::prelude::*;

fn params(a: &[f64]) -> BesselParams {
    BesselParams::new(a.to_vec()).unwrap()
}

fn gammas(max_pow: i32) -> Vec<f64> {
    (0..=max_pow).map(|k| 2f64.powi(k)).collect()
}

fn probe_sup(p: &BesselParams, reach: i32, d: Option<f64>) -> f64 {
    let probes = doubling_probe_grid(p.dim(), -reach..=reach, -reach..=reach, &gammas(reach));
    doubling_constant_probe(p, &probes, d).unwrap()
}

#[test]
fn doubling_bounded_with_homogeneous_dimension() {
    for a in [vec![2.0], vec![-0.5], vec![0.0], vec![0.5, -0.5], vec![2.0, 1.0]] {
        let p = params(&a);
        let sups: Vec<f64> = [4, 8, 12, 16].iter().map(|&r| probe_sup(&p, r, None)).collect();
        assert!(sups.iter().all(|s| s.is_finite() && *s <= 2.0), "{a:?}: {sups:?}");
        // increments shrink: the sup saturates instead of diverging
        assert!(sups[3] - sups[2] <= sups[2] - sups[1] + 1e-15, "{a:?}: {sups:?}");
        assert!(sups[3] / sups[1] < 1.05, "{a:?}: {sups:?}");
    }
}

#[test]
fn smaller_exponent_diverges() {
    // α = 2: balls at the origin dilated without bound see γ^{α+1}
    let p = params(&[2.0]);
    let s: Vec<f64> = [4, 8, 12, 16].iter().map(|&r| probe_sup(&p, r, Some(2.7))).collect();
    assert!(s.windows(2).all(|w| w[1] > 2.0 * w[0]), "{s:?}");

    // α = −0.5: far from the origin the measure is locally Lebesgue, so any d' < 1 fails
    let p = params(&[-0.5]);
    let s: Vec<f64> = [4, 8, 12, 16].iter().map(|&r| probe_sup(&p, r, Some(0.8))).collect();
    assert!(s.windows(2).all(|w| w[1] > 1.5 * w[0]), "{s:?}");
}

#[test]
fn inverse_ball_measure_comparable_to_asymptotic() {
    for a in [-0.5, 0.0, 0.5, 2.0, 5.0] {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in -8..=8 {
            for j in -8..=8 {
                let y = 2f64.powi(i);
                let r_big = 4f64.powi(j);
                let ball = Ball::new(vec![y], r_big.powf(-0.5)).unwrap();
                let inv = 1.0 / ball_measure(&params(&[a]), &ball).unwrap().value;
                let q = inv / one_dim_ball_asymptotic(a, y, r_big);
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        assert!(hi / lo < 64.0, "alpha={a}: [{lo}, {hi}]");
    }
}

#[test]
fn product_surrogate_is_marked() {
    let m = ball_measure(&params(&[0.0, 0.0]), &Ball::new(vec![5.0, 5.0], 1.0).unwrap()).unwrap();
    assert!(!m.exact);
    assert_eq!(m.value, 4.0);
    assert!(ball_measure(&params(&[0.0]), &Ball::new(vec![1.0, 1.0], 1.0).unwrap()).is_err());
}

#[test]
fn invalid_inputs() {
    assert!(BesselParams::new(vec![]).is_err());
    assert!(BesselParams::new(vec![0.0, f64::NAN]).is_err());
    assert!(Ball::new(vec![0.0], 1.0).is_err());
    assert!(Ball::new(vec![1.0], 0.0).is_err());
    assert!(doubling_constant_probe(&params(&[0.0]), &[], None).is_err());
}

proptest! {
    #[test]
    fn dimension_monotone_and_permutation_invariant(
        a in prop::collection::vec(-0.99f64..6.0, 1..6),
        k in 0usize..6,
        bump in 0.0f64..3.0,
        rot in 0usize..6,
    ) {
        let d = homogeneous_dimension(&params(&a));
        let mut b = a.clone();
        let k = k % b.len();
        b[k] += bump;
        prop_assert!(homogeneous_dimension(&params(&b)) >= d);
        let mut c = a.clone();
        c.rotate_left(rot % a.len());
        c.reverse();
        prop_assert!((homogeneous_dimension(&params(&c)) - d).abs() < 1e-12);
        prop_assert!(d >= a.len() as f64);
    }

    #[test]
    fn ball_measure_monotone_in_radius(a in -0.99f64..5.0, x in 1e-3f64..1e3, r in 1e-4f64..1e3, g in 1.0f64..10.0) {
        let p = params(&[a]);
        let small = ball_measure(&p, &Ball::new(vec![x], r).unwrap()).unwrap().value;
        let big = ball_measure(&p, &Ball::new(vec![x], g * r).unwrap()).unwrap().value;
        prop_assert!(small > 0.0 && big >= small * (1.0 - 1e-12));
    }
}
