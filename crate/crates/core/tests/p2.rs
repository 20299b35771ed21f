use bessel_multipliers::geometry::BesselParams;
use bessel_multipliers::hankel::{p2_check, p2_sup_chain, MultiplierSymbol, P2Resolution};
use bessel_multipliers::hormander::CutoffEta;
use bessel_multipliers::Error;
use num_complex::Complex64;

#[test]
fn sweep_sup_is_finite_and_settles() {
    for alpha in [vec![-0.5], vec![2.0], vec![-0.5, 2.0]] {
        let p = BesselParams::new(alpha.clone()).unwrap();
        let (sups, settled) =
            p2_sup_chain(&p, |r| CutoffEta.at_scale(r), (1e-2, 1e2), &[5, 9, 17, 33], 0.05, P2Resolution::default())
                .unwrap();
        assert!(settled, "{alpha:?}: {sups:?}");
        assert!(sups.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn one_dim_ratio_depends_on_sqrt_r_times_y() {
    let p = BesselParams::one(-0.5).unwrap();
    let res = P2Resolution::default();
    let a = p2_check(&p, &CutoffEta.at_scale(4.0).unwrap(), &[3.0], 4.0, res).unwrap().ratio;
    let b = p2_check(&p, &CutoffEta.at_scale(36.0).unwrap(), &[1.0], 36.0, res).unwrap().ratio;
    assert!((a - b).abs() < 1e-10 * a);
}

#[test]
fn quadrature_resolution_converged() {
    let p = BesselParams::one(2.0).unwrap();
    let m = CutoffEta.at_scale(50.0).unwrap();
    let base = p2_check(&p, &m, &[7.0], 50.0, P2Resolution::default()).unwrap();
    let fine = P2Resolution { order: 24, panels_per_period: 3.0, min_panels: 12 };
    let refined = p2_check(&p, &m, &[7.0], 50.0, fine).unwrap();
    assert!((base.ratio - refined.ratio).abs() < 1e-7 * refined.ratio);
}

#[test]
fn alpha_zero_closed_form() {
    // α = 0: φ(z) = cos z, so lhs = R^{1/2}∫|m(R u²)|² cos²(√R u y) du
    let p = BesselParams::one(0.0).unwrap();
    let r = 3.0;
    let y = 0.0;
    let m = MultiplierSymbol::banded(|_| Complex64::new(1.0, 0.0), 1.5, 6.0).unwrap();
    let out = p2_check(&p, &m, &[y + 1e-300], r, P2Resolution::default()).unwrap();
    // u ∈ [1/√2, √2]: lhs = √3·(√2 − 1/√2)
    let lhs = r.sqrt() * (2f64.sqrt() - 0.5f64.sqrt());
    assert!((out.lhs - lhs).abs() < 1e-12 * lhs, "{} vs {lhs}", out.lhs);
    // ‖m(3·)‖² = 1.5, ν(B(0⁺, 3^{−1/2})) = 3^{−1/2}
    assert!((out.rhs - 1.5 * r.sqrt()).abs() < 1e-12);
    assert!(out.exact_measure);
}

#[test]
fn band_outside_annulus_rejected() {
    let p = BesselParams::one(0.5).unwrap();
    let m = CutoffEta.at_scale(10.0).unwrap();
    assert!(matches!(
        p2_check(&p, &m, &[1.0], 3.0, P2Resolution::default()),
        Err(Error::SupportNotContained(_))
    ));
    assert!(matches!(
        p2_check(&p, &MultiplierSymbol::identity(), &[1.0], 3.0, P2Resolution::default()),
        Err(Error::SupportNotContained(_))
    ));
}

#[test]
fn two_dim_uses_surrogate_measure() {
    let p = BesselParams::new(vec![-0.5, 2.0]).unwrap();
    let out = p2_check(&p, &CutoffEta.at_scale(1.0).unwrap(), &[1.0, 1.0], 1.0, P2Resolution::default()).unwrap();
    assert!(!out.exact_measure);
    assert!(out.ratio > 0.0);
}
