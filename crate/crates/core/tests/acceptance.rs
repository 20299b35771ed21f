//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use bessel_multipliers::experiments::{h1_norm_estimate, lower1_experiment, lower2_experiment, EpsRule, DEFAULT_B_SWEEP};
use bessel_multipliers::geometry::BesselParams;
use bessel_multipliers::grid::GridFunction;
use bessel_multipliers::hankel::{
    hankel_transform, inverse_hankel_transform, multiplier_apply, p2_sup_chain, HankelPlan, MultiplierSymbol, P2Resolution,
};
use bessel_multipliers::heatkernel::{chapman_kolmogorov, conservation_integral, geometric_grid, heat_apply, heat_kernel_1d};
use bessel_multipliers::hormander::{hormander_norm, CutoffEta, SobolevGrid};
use bessel_multipliers::impower::{kb_direct, kb_integralrep, kernel_lattice, remainder_ratio_sup, ImaginaryPowerParams, DIAGONAL_FLOOR};
use bessel_multipliers::specfun::{gamma_complex, gamma_modulus_ratio};
use num_complex::Complex64;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_gamma() -> Check {
    let mut worst = 0.0f64;
    for b in [0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let r1 = gamma_complex(Complex64::new(0.0, b)).unwrap().norm_sqr() * b * (PI * b).sinh() / PI - 1.0;
        let r2 = gamma_complex(Complex64::new(0.5, b)).unwrap().norm_sqr() * (PI * b).cosh() / PI - 1.0;
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    ensure(worst <= 1e-10, || format!("max relative residual {worst:.2e}"))?;
    Ok(format!("max relative residual {worst:.2e}"))
}

fn c2_stirling() -> Check {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for a in [0.0, 0.5, 1.0, 2.0] {
        for b in [10.0, -10.0, 12.0, 15.0, 20.0, 30.0, 50.0, -50.0, 100.0, 1e3, 1e5] {
            let r = gamma_modulus_ratio(a, b).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let dev: Vec<f64> = geometric_grid(10.0, 50.0, 41).iter().map(|&b| (gamma_modulus_ratio(a, b).unwrap() - 1.0).abs()).collect();
        ensure(dev.windows(2).all(|w| w[1] <= w[0] + 1e-13), || format!("approach to 1 not monotone for a = {a}"))?;
    }
    ensure(lo >= 0.95 && hi <= 1.05, || format!("ratios span [{lo}, {hi}]"))?;
    Ok(format!("ratios in [{lo:.5}, {hi:.5}], monotone on [10, 50]"))
}

const ALPHAS: [f64; 4] = [-0.5, 0.0, 0.5, 2.0];
const TXS: [f64; 3] = [0.1, 1.0, 10.0];

fn c3_heat() -> Check {
    let mut closed = 0.0f64;
    for t in TXS {
        for x in TXS {
            for y in [0.05, 0.3, 1.0, 2.5, 9.0] {
                let g = |d: f64| (-d * d / (4.0 * t)).exp();
                let exact = (g(x - y) + g(x + y)) / (4.0 * PI * t).sqrt();
                if exact > 1e-250 {
                    closed = closed.max((heat_kernel_1d(0.0, t, x, y).unwrap() - exact).abs() / exact);
                }
            }
        }
    }
    let (mut cons, mut ck) = (0.0f64, 0.0f64);
    for a in ALPHAS {
        for t in TXS {
            for x in TXS {
                cons = cons.max((conservation_integral(a, t, x).unwrap() - 1.0).abs());
                for y in [0.3, 2.0] {
                    for (s, u) in [(0.5 * t, 0.5 * t), (t, 0.1)] {
                        let want = heat_kernel_1d(a, s + u, x, y).unwrap();
                        if want > 1e-250 {
                            ck = ck.max((chapman_kolmogorov(a, s, u, x, y).unwrap() - want).abs() / want);
                        }
                    }
                }
            }
        }
    }
    let msg = format!("closed form {closed:.1e}, conservation {cons:.1e}, Chapman–Kolmogorov {ck:.1e}");
    ensure(closed <= 1e-10 && cons <= 1e-6 && ck <= 1e-4, || msg.clone())?;
    Ok(msg)
}

fn c4_hankel() -> Check {
    let (mut planch, mut inv, mut heat) = (0.0f64, 0.0f64, 0.0f64);
    for a in ALPHAS {
        let p = BesselParams::one(a).unwrap();
        let plan = HankelPlan::gaussian_default(p.clone(), 1.0).unwrap();
        let g = plan.input_grid().clone();
        let suite = [
            GridFunction::from_real_fn(g.clone(), |x| (-0.5 * x[0] * x[0]).exp()).unwrap(),
            GridFunction::from_real_fn(g.clone(), |x| x[0] * x[0] * (-x[0] * x[0]).exp()).unwrap(),
            GridFunction::from_fn(g, |x| Complex64::new(1.0, x[0].powi(4)) * (-2.0 * x[0] * x[0]).exp()).unwrap(),
        ];
        for f in suite {
            let n = f.lp(2.0);
            let hf = hankel_transform(&plan, &f).unwrap();
            planch = planch.max((hf.lp(2.0) / n - 1.0).abs());
            inv = inv.max(inverse_hankel_transform(&plan, &hf).unwrap().l2_distance(&f).unwrap() / n);
            let via_m = multiplier_apply(&plan, &MultiplierSymbol::heat(0.5), &f).unwrap();
            heat = heat.max(via_m.l2_distance(&heat_apply(&p, &f, 0.5).unwrap()).unwrap() / n);
        }
    }
    let plan = HankelPlan::gaussian_default(BesselParams::one(1.0).unwrap(), 1.0).unwrap();
    let f = GridFunction::from_real_fn(plan.input_grid().clone(), |x| (-0.5 * x[0] * x[0]).exp()).unwrap();
    let hf = hankel_transform(&plan, &f).unwrap();
    let fixed = plan.output_grid().axes()[0]
        .nodes()
        .iter()
        .zip(hf.values())
        .map(|(xi, v)| (v - (-0.5 * xi * xi).exp()).norm())
        .fold(0.0, f64::max);
    let msg = format!("Plancherel {planch:.1e}, inversion {inv:.1e}, fixed point {fixed:.1e}, heat multiplier {heat:.1e}");
    ensure(planch <= 1e-4 && inv <= 1e-4 && fixed <= 1e-8 && heat <= 1e-6, || msg.clone())?;
    Ok(msg)
}

fn c5_p2() -> Check {
    let mut parts = Vec::new();
    for alpha in [vec![-0.5], vec![2.0], vec![-0.5, 2.0]] {
        let p = BesselParams::new(alpha.clone()).unwrap();
        let (sups, settled) =
            p2_sup_chain(&p, |r| CutoffEta.at_scale(r), (1e-2, 1e2), &[5, 9, 17, 33], 0.05, P2Resolution::default()).unwrap();
        let s = format!("{alpha:?}: {}", sups.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" -> "));
        ensure(settled, || format!("sup did not settle, {s}"))?;
        parts.push(s);
    }
    Ok(format!("sups settle within 5%: {}", parts.join("; ")))
}

fn c6_hormander() -> Check {
    let bs = geometric_grid(2.0, 100.0, 9);
    let mut worst = 0.0f64;
    for beta in [0.6, 1.0, 2.0] {
        let r: Vec<f64> = bs
            .iter()
            .map(|&b| hormander_norm(&MultiplierSymbol::imaginary_power(b), beta, &[1.0, 3.7], SobolevGrid::default()).unwrap().value / b.powf(beta))
            .collect();
        let m = r.iter().cloned().fold(0.0, f64::max) / r[0];
        worst = worst.max(m);
    }
    ensure(worst <= 3.0, || format!("max ratio to the b = 2 value {worst:.3}"))?;
    Ok(format!("max ratio to the b = 2 value {worst:.3} (limit 3)"))
}

fn c7_kernel() -> Check {
    let mut worst_change = 0.0f64;
    let mut worst_sup = 0.0f64;
    for a in [-0.5, 0.5, 2.0] {
        for b in [0.5, 1.0, 2.0] {
            let p = ImaginaryPowerParams::new(a, b).unwrap();
            let coarse = remainder_ratio_sup(&p, 4, false).unwrap();
            let fine = remainder_ratio_sup(&p, 8, false).unwrap();
            ensure(fine.is_finite(), || format!("non-finite sup at alpha = {a}, b = {b}"))?;
            worst_sup = worst_sup.max(fine);
            worst_change = worst_change.max((fine - coarse).abs() / coarse);
        }
    }
    ensure(worst_change < 0.1, || format!("refinement change {worst_change:.3}"))?;
    let p = ImaginaryPowerParams::new(2.0, 1.0).unwrap();
    let corrected = remainder_ratio_sup(&p, 4, false).unwrap();
    let quarter = remainder_ratio_sup(&p, 4, true).unwrap();
    ensure(quarter > corrected, || format!("quarter-Gamma variant {quarter:.3} not above {corrected:.3}"))?;
    let mut rep = 0.0f64;
    for a in [0.5, 2.0] {
        for b in [0.5, 1.0, 2.0] {
            let p = ImaginaryPowerParams::new(a, b).unwrap();
            let pts = kernel_lattice(2);
            for &x in &pts {
                for &y in &pts {
                    if (x - y).abs() < DIAGONAL_FLOOR * (x + y) {
                        continue;
                    }
                    let d = kb_direct(&p, x, y).unwrap();
                    rep = rep.max((kb_integralrep(&p, x, y).unwrap() - d).norm() / d.norm());
                }
            }
        }
    }
    ensure(rep <= 1e-6, || format!("integral representation off by {rep:.1e}"))?;
    Ok(format!(
        "sup ratio <= {worst_sup:.3}, refinement change {:.2}%, quarter variant {quarter:.2} > {corrected:.2}, integral rep {rep:.1e}",
        100.0 * worst_change
    ))
}

fn c8_lower1() -> Check {
    let r2 = 2f64.sqrt();
    let sweep = [5.0, 5.0 * r2, 10.0, 10.0 * r2, 20.0, 20.0 * r2, 33.0, 40.0];
    let mut parts = Vec::new();
    for (alpha, want) in [(-0.5, 0.5), (1.0, 1.0)] {
        let rep = lower1_experiment(alpha, &sweep, EpsRule::default(), 1.0).map_err(|e| e.to_string())?;
        let main = rep.fit_over(5.0, 33.0).unwrap().slope;
        let wide = rep.fit_over(5.0, 40.0).unwrap().slope;
        let late = rep.fit_over(10.0, 40.0).unwrap().slope;
        let s = format!("alpha {alpha}: slope {main:.4} (expect {want}), [5,40] {wide:.4} vs [10,40] {late:.4}");
        ensure((main - want).abs() <= 0.1 && main >= want - 0.1, || s.clone())?;
        ensure((wide - late).abs() < 0.05, || s.clone())?;
        if alpha < 0.0 {
            let big = rep.points.iter().filter(|p| p.b >= 10.0);
            ensure(big.clone().all(|p| p.term2_contrib > p.term1_contrib), || format!("c2 term does not dominate: {s}"))?;
        }
        parts.push(s);
    }
    Ok(parts.join("; "))
}

fn c9_lower2() -> Check {
    let slope = |p: f64| lower2_experiment(1.0, p, &DEFAULT_B_SWEEP, 0.1, 1.0).map(|r| r.fit.slope).map_err(|e| e.to_string());
    let (s12, s15, s18) = (slope(1.2)?, slope(1.5)?, slope(1.8)?);
    let msg = format!("slopes {s12:.4} (p=1.2), {s15:.4} (p=1.5, expect 1/3), {s18:.4} (p=1.8)");
    ensure((s15 - 1.0 / 3.0).abs() <= 0.1 && s18 < s12, || msg.clone())?;
    Ok(msg)
}

fn c10_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_besselmult");
    let cases: [&[&str]; 10] = [
        &["gamma-check"],
        &["bessel-check"],
        &["heat-check"],
        &["hankel-check"],
        &["p2-check", "--alpha", "-0.5,2"],
        &["hormander-norm"],
        &["kernel-check", "--alpha", "-0.5,2", "--b", "0.5,1"],
        &["lower-bound", "--theorem", "1", "--alpha", "1", "--b", "2,3,4.5,7,10", "--grid-scale", "0.5"],
        &["lower-bound", "--theorem", "2", "--format", "json"],
        &["h1-estimate"],
    ];
    for args in cases {
        let go = || Command::new(bin).args(args).arg("--no-timestamp").output().unwrap();
        let (a, b) = (go(), go());
        ensure(a.status.success() && b.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)))?;
        ensure(a.stdout == b.stdout, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} invocations covering all 9 subcommands byte-identical", cases.len()))
}

fn h1_smoke() -> Check {
    let a = 0.5;
    let params = BesselParams::one(a).unwrap();
    let plan = HankelPlan::gaussian_default(params.clone(), 1.0).unwrap();
    let gamma = 0.5 * (a + 1.0);
    let f = GridFunction::from_real_fn(plan.input_grid().clone(), |x| (1.0 - x[0] * x[0] / gamma) * (-x[0] * x[0]).exp()).unwrap();
    let coarse = geometric_grid(1e-3, 1e2, 41);
    let fine = geometric_grid(1e-3, 1e2, 161);
    let mut parts = Vec::new();
    for b in [1.0, 5.0] {
        let g = multiplier_apply(&plan, &MultiplierSymbol::imaginary_power(b), &f).unwrap();
        let v1 = h1_norm_estimate(&params, &g, &coarse).unwrap().value;
        let v2 = h1_norm_estimate(&params, &g, &fine).unwrap().value;
        let change = (v2 - v1) / v2;
        ensure(v2.is_finite() && (0.0..0.01).contains(&change), || format!("b = {b}: {v1} -> {v2}"))?;
        parts.push(format!("b = {b}: {v2:.4} (t-grid refinement {:.2e})", change));
    }
    Ok(parts.join(", "))
}

fn main() {
    let criteria: [(&str, &str, u64, fn() -> Check); 11] = [
        ("1", "Gamma identities", 1, c1_gamma),
        ("2", "Stirling modulus", 1, c2_stirling),
        ("3", "heat kernel", 30, c3_heat),
        ("4", "Hankel Plancherel", 120, c4_hankel),
        ("5", "P2 ratio", 300, c5_p2),
        ("6", "Hormander scaling", 120, c6_hormander),
        ("7", "kernel decomposition", 600, c7_kernel),
        ("8", "lower1 rate", 1200, c8_lower1),
        ("9", "lower2 rate", 1200, c9_lower2),
        ("10", "determinism", 600, c10_determinism),
        ("h1", "H1 smoke run", 120, h1_smoke),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(limit) => Err(format!("{msg}; over the {limit} s limit")),
            other => other,
        };
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        println!("[{tag}] criterion {id} {name}: {msg} ({:.1} s)", elapsed.as_secs_f64());
        failed += outcome.is_err() as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
