use std::sync::Arc;

use approx::assert_relative_eq;
use bessel_multipliers::geometry::BesselParams;
use bessel_multipliers::grid::{Axis, GridFunction, QuadGrid};
use bessel_multipliers::heatkernel::*;
use proptest::prelude::*;

const ALPHAS: [f64; 4] = [-0.5, 0.0, 0.5, 2.0];
const TIMES: [f64; 3] = [0.1, 1.0, 10.0];
const POINTS: [f64; 3] = [0.1, 1.0, 10.0];

#[test]
fn conservation_sweep() {
    for a in ALPHAS {
        for t in TIMES {
            for x in POINTS {
                let v = conservation_integral(a, t, x).unwrap();
                assert!((v - 1.0).abs() <= 1e-6, "alpha={a} t={t} x={x}: {v}");
            }
        }
    }
}

#[test]
fn chapman_kolmogorov_sweep() {
    for a in ALPHAS {
        for (s, t) in [(0.1, 1.0), (1.0, 1.0), (10.0, 0.1)] {
            for x in POINTS {
                for y in [0.3, 2.0] {
                    let lhs = chapman_kolmogorov(a, s, t, x, y).unwrap();
                    let rhs = heat_kernel_1d(a, s + t, x, y).unwrap();
                    if rhs < 1e-250 {
                        continue;
                    }
                    assert!((lhs - rhs).abs() / rhs <= 1e-4, "alpha={a} s={s} t={t} x={x} y={y}");
                }
            }
        }
    }
}

#[test]
fn two_dim_kernel_is_product_of_neumann_kernels() {
    let p = BesselParams::new(vec![0.0, 0.0]).unwrap();
    let n = |t: f64, x: f64, y: f64| {
        (4.0 * std::f64::consts::PI * t).powf(-0.5)
            * ((-(x - y).powi(2) / (4.0 * t)).exp() + (-(x + y).powi(2) / (4.0 * t)).exp())
    };
    let v = heat_kernel(&p, 0.3, &[1.0, 2.0], &[0.5, 2.5]).unwrap();
    assert_relative_eq!(v, n(0.3, 1.0, 0.5) * n(0.3, 2.0, 2.5), max_relative = 1e-12);
}

#[test]
fn gaussian_bounds_are_finite_and_positive() {
    let ts = geometric_grid(1e-2, 1e2, 5);
    let xs = geometric_grid(1e-2, 1e2, 9);
    for a in [-0.5, 0.0, 2.0] {
        let p = BesselParams::one(a).unwrap();
        let b = gaussian_bounds_probe(&p, &gaussian_probe_grid(1, &ts, &xs, &xs), GAUSSIAN_LOW_RATE, GAUSSIAN_UP_RATE)
            .unwrap();
        assert!(b.low_const > 0.0 && b.up_const.is_finite(), "alpha={a}: {b:?}");
        assert!(b.low_const <= b.up_const);
    }
    // on the diagonal both bounds see the same quantity
    let p = BesselParams::one(0.0).unwrap();
    let diag = gaussian_probe_grid(1, &[1.0], &[1.0], &[1.0]);
    let b = gaussian_bounds_probe(&p, &diag, 4.0, 4.0).unwrap();
    assert_relative_eq!(b.low_const, b.up_const);
    assert_relative_eq!(b.up_const, 2.0 * (1.0 + (-1f64).exp()) / (4.0 * std::f64::consts::PI).sqrt());
}

fn wide_grid(alpha: f64) -> Arc<QuadGrid> {
    Arc::new(QuadGrid::new(vec![Axis::uniform(alpha, 30.0, 60, 16).unwrap()]).unwrap())
}

#[test]
fn constant_function_is_preserved_in_the_interior() {
    for a in ALPHAS {
        let p = BesselParams::one(a).unwrap();
        let g = wide_grid(a);
        let one = GridFunction::from_real_fn(g.clone(), |_| 1.0).unwrap();
        let out = heat_apply(&p, &one, 1.0).unwrap();
        for (x, v) in g.axes()[0].nodes().iter().zip(out.values()) {
            if *x < 15.0 {
                assert!((v.re - 1.0).abs() < 1e-8, "alpha={a} x={x}: {}", v.re);
            }
        }
    }
}

#[test]
fn semigroup_on_grid() {
    for a in ALPHAS {
        let p = BesselParams::one(a).unwrap();
        let g = wide_grid(a);
        let f = GridFunction::from_real_fn(g, |x| (-(x[0] - 3.0).powi(2)).exp()).unwrap();
        let two_steps = heat_apply(&p, &heat_apply(&p, &f, 0.3).unwrap(), 0.7).unwrap();
        let one_step = heat_apply(&p, &f, 1.0).unwrap();
        let rel = two_steps.l2_distance(&one_step).unwrap() / one_step.lp(2.0);
        assert!(rel < 1e-8, "alpha={a}: {rel}");
    }
}

#[test]
fn small_times_approach_identity() {
    let p = BesselParams::one(0.5).unwrap();
    let g = wide_grid(0.5);
    let f = GridFunction::from_real_fn(g, |x| (-(x[0] - 3.0).powi(2)).exp()).unwrap();
    let mut last = f64::INFINITY;
    for t in [1e-1, 1e-2, 1e-3] {
        let d = heat_apply(&p, &f, t).unwrap().l2_distance(&f).unwrap();
        assert!(d < last);
        last = d;
    }
    assert!(last < 1e-2 * f.lp(2.0));
}

#[test]
fn maximal_function_dominates_and_grows_with_t_grid() {
    let p = BesselParams::one(-0.5).unwrap();
    let g = wide_grid(-0.5);
    let f = GridFunction::from_real_fn(g, |x| if (1.0..2.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
    let coarse = geometric_grid(1e-2, 1e2, 5);
    let fine = geometric_grid(1e-2, 1e2, 9);
    let mc = maximal_function(&p, &f, &coarse).unwrap();
    let mf = maximal_function(&p, &f, &fine).unwrap();
    let single = maximal_function(&p, &f, &[1.0]).unwrap();
    let direct = heat_apply(&p, &f, 1.0).unwrap();
    for k in 0..mc.values().len() {
        assert!(mf.values()[k].re >= mc.values()[k].re);
        assert_eq!(single.values()[k].re, direct.values()[k].norm());
    }
    for &t in &coarse {
        let h = heat_apply(&p, &f, t).unwrap();
        for (m, v) in mc.values().iter().zip(h.values()) {
            assert!(m.re >= v.norm());
        }
    }
}

#[test]
fn heat_apply_is_deterministic() {
    let p = BesselParams::new(vec![0.5, -0.5]).unwrap();
    let g = Arc::new(
        QuadGrid::new(vec![Axis::uniform(0.5, 8.0, 8, 8).unwrap(), Axis::uniform(-0.5, 8.0, 8, 8).unwrap()]).unwrap(),
    );
    let f = GridFunction::from_real_fn(g, |x| (-(x[0] * x[0] + x[1])).exp()).unwrap();
    let a = heat_apply(&p, &f, 0.5).unwrap();
    let b = heat_apply(&p, &f, 0.5).unwrap();
    assert_eq!(a.values(), b.values());
}

proptest! {
    #[test]
    fn kernel_symmetric_and_positive(
        a in -0.95f64..4.0,
        lt in -3.0f64..3.0,
        x in 0.01f64..20.0,
        y in 0.01f64..20.0,
    ) {
        let t = 10f64.powf(lt);
        let k1 = heat_kernel_1d(a, t, x, y).unwrap();
        let k2 = heat_kernel_1d(a, t, y, x).unwrap();
        prop_assert!(k1 >= 0.0 && k1.is_finite());
        prop_assert!((k1 - k2).abs() <= 1e-14 * k1.abs().max(1e-300));
        if (x - y).powi(2) / (4.0 * t) < 100.0 {
            prop_assert!(k1 > 0.0);
        }
    }
}
