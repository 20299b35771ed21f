//! The `besselmult` command line: one subcommand per module check or
//! experiment, each emitting a table with a fixed column schema.
//!
//! Exit status: 0 on success, 1 on rejected input, 2 on a numerical failure
//! (non-convergence, quadrature ceiling, or a check outside its tolerance).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::experiments::{h1_norm_estimate, lower1_experiment, lower2_experiment, EpsRule, ExperimentReport, DEFAULT_B_SWEEP};
use crate::geometry::BesselParams;
use crate::grid::GridFunction;
use crate::hankel::{hankel_transform, inverse_hankel_transform, multiplier_apply, p2_sweep, HankelPlan, MultiplierSymbol, P2Resolution};
use crate::heatkernel::{chapman_kolmogorov, conservation_integral, geometric_grid, heat_apply, heat_kernel_1d};
use crate::hormander::{hormander_norm, CutoffEta, SobolevGrid};
use crate::impower::{c_constants, kb_decomposed, kernel_lattice, ImaginaryPowerParams, DIAGONAL_FLOOR};
use crate::specfun::{bessel_i_scaled, bessel_j, gamma_complex, gamma_modulus_ratio, BesselOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Gamma identities on the imaginary axis and Stirling modulus ratios
    GammaCheck,
    /// Bessel I and J recurrences and half-integer closed forms
    BesselCheck,
    /// heat kernel conservation and Chapman–Kolmogorov
    HeatCheck,
    /// Hankel Plancherel, inversion and heat-multiplier agreement
    HankelCheck,
    /// Plancherel-type ratio for η(λ/R) over R and y
    P2Check,
    /// Hörmander functional of λ^{ib}
    HormanderNorm,
    /// kernel decomposition residuals on a lattice of (x, y)
    KernelCheck,
    /// growth sweep of the weak-L¹ norm (--theorem 1) or the L^p tail norm (--theorem 2)
    LowerBound,
    /// maximal-function H¹ estimate of λ^{ib} applied to a mean-zero bump
    H1Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything a run depends on. A JSON config file uses these field names;
/// command-line flags override it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub alpha: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub bmax: Option<f64>,
    pub theorem: Option<u8>,
    /// multiplies every default resolution
    pub grid_scale: f64,
    // not echoed: where a table goes does not change it
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub no_timestamp: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            alpha: None,
            b: None,
            p: None,
            beta: None,
            bmax: None,
            theorem: None,
            grid_scale: 1.0,
            out: None,
            format: Format::Csv,
            no_timestamp: false,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "besselmult", version, about = "Checks and growth experiments for Bessel spectral multipliers")]
struct Args {
    /// subcommand (may instead be given as "command" in --config)
    #[arg(value_enum)]
    command: Option<Command>,
    /// comma-separated exponents α_j > −1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    /// comma-separated values of b
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// exponent of the L^p tail sweep, in (1, 2)
    #[arg(long)]
    p: Option<f64>,
    /// comma-separated Sobolev exponents
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// largest b of gamma-check
    #[arg(long)]
    bmax: Option<f64>,
    /// 1 or 2, for lower-bound
    #[arg(long)]
    theorem: Option<u8>,
    /// multiplies every grid resolution (default 1)
    #[arg(long)]
    grid_scale: Option<f64>,
    /// output file; stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// omit the timestamp so that reruns are byte-identical
    #[arg(long)]
    no_timestamp: bool,
    /// JSON file with RunConfig fields
    #[arg(long)]
    config: Option<PathBuf>,
}

fn resolve(args: Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    macro_rules! take {
        ($($f:ident),*) => { $(if args.$f.is_some() { cfg.$f = args.$f; })* };
    }
    take!(command, alpha, b, p, beta, bmax, theorem, out);
    if let Some(s) = args.grid_scale {
        cfg.grid_scale = s;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    cfg.no_timestamp |= args.no_timestamp;
    Ok(cfg)
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    List(Vec<f64>),
}

/// A result table with the grids it was computed on and summary values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub grids: Vec<String>,
    pub summary: Map<String, Value>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new(), grids: Vec::new(), summary: Map::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

use Cell::{Int, List, Num, Text};

/// The column schema of each subcommand.
pub fn columns(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::GammaCheck => &["b", "reflection_residual", "half_shift_residual", "ratio_a0", "ratio_a0_5", "ratio_a1", "ratio_a2"],
        Command::BesselCheck => &["alpha", "tau", "x", "i_scaled", "i_recurrence_residual", "j", "j_recurrence_residual", "closed_form_residual"],
        Command::HeatCheck => &["alpha", "t", "x", "conservation", "chapman_kolmogorov_residual", "closed_form_residual"],
        Command::HankelCheck => &["alpha", "function", "plancherel_defect", "inversion_defect", "heat_multiplier_defect"],
        Command::P2Check => &["N", "alpha", "R", "y", "ratio"],
        Command::HormanderNorm => &["b", "beta", "norm", "norm_over_b_beta", "argmax_t", "refinement_change"],
        Command::KernelCheck => &[
            "alpha", "b", "x", "y", "direct_re", "direct_im", "term1_re", "term1_im", "term2_re", "term2_im",
            "remainder_abs", "remainder_bound", "ratio",
        ],
        Command::LowerBound => &["b", "norm", "term1_contrib", "term2_contrib", "remainder_contrib", "eps", "grid_pts", "refinement_delta"],
        Command::H1Estimate => &["b", "estimate", "refinement_delta", "input_l1", "output_l1"],
    }
}

fn scaled(n: f64, scale: f64) -> usize {
    (n * scale).ceil().max(2.0) as usize
}

fn fail(what: &str, bad: &[String]) -> Result<()> {
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::CheckFailed(format!("{what}: {}", bad.join("; "))))
    }
}

fn alphas(cfg: &RunConfig, default: &[f64]) -> Result<Vec<f64>> {
    let a = cfg.alpha.clone().unwrap_or_else(|| default.to_vec());
    if a.is_empty() {
        return Err(Error::Empty("alpha list"));
    }
    // validates every entry
    BesselParams::new(a.clone())?;
    Ok(a)
}

fn single_alpha(cfg: &RunConfig, default: f64) -> Result<f64> {
    let a = alphas(cfg, &[default])?;
    if a.len() != 1 {
        return Err(Error::InvalidParameter(format!("this command takes one alpha, got {}", a.len())));
    }
    Ok(a[0])
}

fn b_list(cfg: &RunConfig, default: &[f64]) -> Result<Vec<f64>> {
    let b = cfg.b.clone().unwrap_or_else(|| default.to_vec());
    if b.is_empty() {
        return Err(Error::Empty("b list"));
    }
    if let Some(bad) = b.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be finite, got {bad}")));
    }
    Ok(b)
}

fn gamma_check(cfg: &RunConfig) -> Result<Table> {
    let bmax = cfg.bmax.unwrap_or(50.0);
    if !(bmax.is_finite() && bmax > 0.0) {
        return Err(Error::InvalidParameter(format!("bmax must be positive, got {bmax}")));
    }
    let mut bs: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0].into_iter().filter(|&b| b <= bmax).collect();
    if bs.last() != Some(&bmax) && cfg.b.is_none() {
        bs.push(bmax);
    }
    let bs = b_list(cfg, &bs)?;
    let mut t = Table::new(columns(Command::GammaCheck));
    let mut bad = Vec::new();
    for b in bs {
        if b == 0.0 {
            return Err(Error::InvalidParameter("Gamma(ib) has a pole at b = 0".into()));
        }
        let pi = std::f64::consts::PI;
        let refl = gamma_complex(Complex64::new(0.0, b))?.norm_sqr() * b * (pi * b).sinh() / pi - 1.0;
        let half = gamma_complex(Complex64::new(0.5, b))?.norm_sqr() * (pi * b).cosh() / pi - 1.0;
        let mut row = vec![Num(b), Num(refl), Num(half)];
        for a in [0.0, 0.5, 1.0, 2.0] {
            // the ratio is defined from |b| = 1 on
            let r = if b.abs() >= 1.0 { gamma_modulus_ratio(a, b)? } else { f64::NAN };
            if b.abs() >= 10.0 && !(0.95..=1.05).contains(&r) {
                bad.push(format!("ratio {r} at b = {b}"));
            }
            row.push(Num(r));
        }
        if !(refl.abs() <= 1e-10 && half.abs() <= 1e-10) {
            bad.push(format!("identity residuals {refl:e}, {half:e} at b = {b}"));
        }
        t.push(row);
    }
    fail("gamma-check", &bad)?;
    Ok(t)
}

fn bessel_check(cfg: &RunConfig) -> Result<Table> {
    let alphas = alphas(cfg, &[-0.5, 0.0, 0.5, 2.0])?;
    let xs = geometric_grid(1e-3, 50.0, scaled(25.0, cfg.grid_scale));
    let mut t = Table::new(columns(Command::BesselCheck));
    t.grids.push(format!("x: {} geometric points on [1e-3, 50]", xs.len()));
    let mut bad = Vec::new();
    for a in alphas {
        let tau = 0.5 * (a - 1.0);
        let o = [BesselOrder::new(tau)?, BesselOrder::new(tau + 1.0)?, BesselOrder::new(tau + 2.0)?];
        for &x in &xs {
            let c = 2.0 * (tau + 1.0) / x;
            let i = [bessel_i_scaled(o[0], x)?, bessel_i_scaled(o[1], x)?, bessel_i_scaled(o[2], x)?];
            let j = [bessel_j(o[0], x)?, bessel_j(o[1], x)?, bessel_j(o[2], x)?];
            let i_res = (i[0] - i[2] - c * i[1]).abs() / i[0].abs().max(i[2].abs()).max((c * i[1]).abs());
            let j_res = (j[0] + j[2] - c * j[1]).abs() / j[0].abs().max(j[2].abs()).max((c * j[1]).abs());
            let k = (2.0 / (std::f64::consts::PI * x)).sqrt();
            let closed = if tau == 0.5 {
                ((i[0] - k * 0.5 * (1.0 - (-2.0 * x).exp())).abs() / i[0]).max((j[0] - k * x.sin()).abs() / k)
            } else if tau == -0.5 {
                ((i[0] - k * 0.5 * (1.0 + (-2.0 * x).exp())).abs() / i[0]).max((j[0] - k * x.cos()).abs() / k)
            } else {
                f64::NAN
            };
            if !(i_res <= 1e-10 && j_res <= 1e-10) || closed > 1e-10 {
                bad.push(format!("alpha = {a}, x = {x}"));
            }
            t.push(vec![Num(a), Num(tau), Num(x), Num(i[0]), Num(i_res), Num(j[0]), Num(j_res), Num(closed)]);
        }
    }
    fail("bessel-check", &bad)?;
    Ok(t)
}

fn heat_check(cfg: &RunConfig) -> Result<Table> {
    let alphas = alphas(cfg, &[-0.5, 0.0, 0.5, 2.0])?;
    let y = 1.0;
    let mut t = Table::new(columns(Command::HeatCheck));
    t.grids.push(format!("adaptive quadrature in y; Chapman–Kolmogorov at s = t/2, y = {y}"));
    let mut bad = Vec::new();
    for a in alphas {
        for time in [0.1, 1.0, 10.0] {
            for x in [0.1, 1.0, 10.0] {
                let cons = conservation_integral(a, time, x)?;
                let want = heat_kernel_1d(a, time, x, y)?;
                let ck = if want > 1e-250 {
                    (chapman_kolmogorov(a, 0.5 * time, 0.5 * time, x, y)? - want).abs() / want
                } else {
                    f64::NAN
                };
                let closed = if a == 0.0 {
                    let g = |d: f64| (-d * d / (4.0 * time)).exp();
                    let exact = (g(x - y) + g(x + y)) / (4.0 * std::f64::consts::PI * time).sqrt();
                    (want - exact).abs() / exact
                } else {
                    f64::NAN
                };
                if (cons - 1.0).abs() > 1e-6 || ck > 1e-4 || closed > 1e-10 {
                    bad.push(format!("alpha = {a}, t = {time}, x = {x}"));
                }
                t.push(vec![Num(a), Num(time), Num(x), Num(cons), Num(ck), Num(closed)]);
            }
        }
    }
    fail("heat-check", &bad)?;
    Ok(t)
}

fn hankel_check(cfg: &RunConfig) -> Result<Table> {
    let alphas = alphas(cfg, &[-0.5, 0.0, 0.5, 2.0])?;
    let mut t = Table::new(columns(Command::HankelCheck));
    let mut bad = Vec::new();
    for a in alphas {
        let params = BesselParams::one(a)?;
        let plan = HankelPlan::gaussian_default(params.clone(), cfg.grid_scale)?;
        t.grids.push(format!("alpha = {a}: {}", plan.input_grid().describe()));
        let g = plan.input_grid().clone();
        let suite: [(&str, GridFunction); 3] = [
            ("gauss", GridFunction::from_real_fn(g.clone(), |x| (-0.5 * x[0] * x[0]).exp())?),
            ("x2_gauss", GridFunction::from_real_fn(g.clone(), |x| x[0] * x[0] * (-x[0] * x[0]).exp())?),
            ("complex_gauss", GridFunction::from_fn(g, |x| Complex64::new(1.0, x[0].powi(4)) * (-2.0 * x[0] * x[0]).exp())?),
        ];
        for (name, f) in suite {
            let norm = f.lp(2.0);
            let hf = hankel_transform(&plan, &f)?;
            let planch = (hf.lp(2.0) / norm - 1.0).abs();
            let inv = inverse_hankel_transform(&plan, &hf)?.l2_distance(&f)? / norm;
            let heat = multiplier_apply(&plan, &MultiplierSymbol::heat(0.5), &f)?.l2_distance(&heat_apply(&params, &f, 0.5)?)? / norm;
            if !(planch <= 1e-4 && inv <= 1e-4 && heat <= 1e-6) {
                bad.push(format!("alpha = {a}, {name}"));
            }
            t.push(vec![Num(a), Text(name.into()), Num(planch), Num(inv), Num(heat)]);
        }
    }
    fail("hankel-check", &bad)?;
    Ok(t)
}

fn p2_check_cmd(cfg: &RunConfig) -> Result<Table> {
    let alpha = alphas(cfg, &[-0.5])?;
    let params = BesselParams::new(alpha.clone())?;
    let n = scaled(5.0, cfg.grid_scale);
    let grid = geometric_grid(1e-2, 1e2, n);
    let res = P2Resolution { panels_per_period: 1.5 * cfg.grid_scale, ..P2Resolution::default() };
    let rows = p2_sweep(&params, |r| CutoffEta.at_scale(r), &grid, &grid, res)?;
    let mut t = Table::new(columns(Command::P2Check));
    t.grids.push(format!("R and y: {n} geometric points on [1e-2, 1e2]"));
    let mut sup = 0.0f64;
    for r in rows {
        if !r.ratio.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite ratio at R = {}, y = {:?}", r.r_big, r.y)));
        }
        sup = sup.max(r.ratio);
        t.push(vec![Int(alpha.len() as i64), List(alpha.clone()), Num(r.r_big), List(r.y), Num(r.ratio)]);
    }
    t.summary.insert("sup_ratio".into(), json!(sup));
    Ok(t)
}

fn hormander_cmd(cfg: &RunConfig) -> Result<Table> {
    let bs = b_list(cfg, &geometric_grid(2.0, 100.0, 9))?;
    let betas = cfg.beta.clone().unwrap_or_else(|| vec![0.6, 1.0, 2.0]);
    if betas.is_empty() {
        return Err(Error::Empty("beta list"));
    }
    // λ^{ib} is dilation-invariant up to a phase, so a short t range suffices
    let ts = geometric_grid(1.0, 4.0, scaled(9.0, cfg.grid_scale));
    let sob = SobolevGrid { samples: ((16384.0 * cfg.grid_scale).round() as usize).max(256), ..SobolevGrid::default() };
    let mut t = Table::new(columns(Command::HormanderNorm));
    t.grids.push(format!("t: {} geometric points on [1, 4]; samples {} on [{}, {}], padding {}", ts.len(), sob.samples, sob.lo, sob.hi, sob.padding));
    for &beta in &betas {
        for &b in &bs {
            let est = hormander_norm(&MultiplierSymbol::imaginary_power(b), beta, &ts, sob)?;
            t.push(vec![
                Num(b),
                Num(beta),
                Num(est.value),
                Num(est.value / b.abs().powf(beta)),
                Num(est.argmax_t),
                Num(est.refinement_change()),
            ]);
        }
    }
    Ok(t)
}

fn kernel_cmd(cfg: &RunConfig) -> Result<Table> {
    let alphas = alphas(cfg, &[0.5])?;
    let bs = b_list(cfg, &[1.0, 2.0])?;
    let k = scaled(2.0, cfg.grid_scale);
    let pts = kernel_lattice(k);
    let mut t = Table::new(columns(Command::KernelCheck));
    t.grids.push(format!("x, y on {{2^(j/{k})}} in [0.1, 10] ({} points), |x - y| >= {DIAGONAL_FLOOR}(x + y)", pts.len()));
    let mut sup = Map::new();
    for &a in &alphas {
        for &b in &bs {
            let p = ImaginaryPowerParams::new(a, b)?;
            let c3 = c_constants(&p)?.c3.norm();
            let mut best = 0.0f64;
            for &x in &pts {
                for &y in &pts {
                    if (x - y).abs() < DIAGONAL_FLOOR * (x + y) {
                        continue;
                    }
                    let d = kb_decomposed(&p, x, y)?;
                    let direct = d.term1 + d.term2 + d.remainder_measured;
                    let rem = d.remainder_measured.norm();
                    let ratio = rem / (c3 * d.remainder_bound);
                    best = best.max(ratio);
                    t.push(vec![
                        Num(a),
                        Num(b),
                        Num(x),
                        Num(y),
                        Num(direct.re),
                        Num(direct.im),
                        Num(d.term1.re),
                        Num(d.term1.im),
                        Num(d.term2.re),
                        Num(d.term2.im),
                        Num(rem),
                        Num(d.remainder_bound),
                        Num(ratio),
                    ]);
                }
            }
            sup.insert(format!("alpha={a},b={b}"), json!(best));
        }
    }
    t.summary.insert("sup_ratio".into(), Value::Object(sup));
    Ok(t)
}

fn lower_cmd(cfg: &RunConfig) -> Result<Table> {
    let theorem = cfg.theorem.unwrap_or(1);
    let bs = b_list(cfg, &DEFAULT_B_SWEEP)?;
    let report: ExperimentReport = match theorem {
        1 => lower1_experiment(single_alpha(cfg, -0.5)?, &bs, EpsRule::default(), cfg.grid_scale)?,
        2 => lower2_experiment(single_alpha(cfg, 1.0)?, cfg.p.unwrap_or(1.5), &bs, 0.1, cfg.grid_scale)?,
        other => return Err(Error::InvalidParameter(format!("theorem must be 1 or 2, got {other}"))),
    };
    let mut t = Table::new(columns(Command::LowerBound));
    t.grids.push(match theorem {
        1 => "source 8-point Gauss panels; evaluation graded in the gap to the source; eps = 0.05/|b|".into(),
        _ => "source [eps/2, eps], eps = 0.1; evaluation [|b|, 1e4 |b|] with analytic tail".into(),
    });
    for pt in &report.points {
        t.push(vec![
            Num(pt.b),
            Num(pt.norm),
            Num(pt.term1_contrib),
            Num(pt.term2_contrib),
            Num(pt.remainder_contrib),
            Num(pt.eps),
            Int(pt.grid_pts as i64),
            Num(pt.refinement_delta),
        ]);
    }
    t.summary.insert("kind".into(), json!(report.kind));
    t.summary.insert("alpha".into(), json!(report.alpha));
    t.summary.insert("p".into(), json!(report.p));
    t.summary.insert("slope".into(), json!(report.fit.slope));
    t.summary.insert("slope_stderr".into(), json!(report.fit.stderr));
    t.summary.insert("expected_slope".into(), json!(report.expected_slope));
    Ok(t)
}

fn h1_cmd(cfg: &RunConfig) -> Result<Table> {
    let a = single_alpha(cfg, 0.5)?;
    let bs = b_list(cfg, &[1.0, 5.0])?;
    let params = BesselParams::one(a)?;
    let plan = HankelPlan::gaussian_default(params.clone(), cfg.grid_scale)?;
    // (1 − x²/γ)e^{−x²} has ν-mean zero, γ = (α+1)/2
    let gamma = 0.5 * (a + 1.0);
    let f = GridFunction::from_real_fn(plan.input_grid().clone(), |x| (1.0 - x[0] * x[0] / gamma) * (-x[0] * x[0]).exp())?;
    let ts = geometric_grid(1e-3, 1e2, scaled(41.0, cfg.grid_scale));
    let mut t = Table::new(columns(Command::H1Estimate));
    t.grids.push(format!("{}; t: {} geometric points on [1e-3, 1e2]", plan.input_grid().describe(), ts.len()));
    for b in bs {
        let g = multiplier_apply(&plan, &MultiplierSymbol::imaginary_power(b), &f)?;
        let est = h1_norm_estimate(&params, &g, &ts)?;
        if !est.value.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite H1 estimate at b = {b}")));
        }
        t.push(vec![Num(b), Num(est.value), Num(est.refinement_delta.unwrap_or(f64::NAN)), Num(f.lp(1.0)), Num(g.lp(1.0))]);
    }
    Ok(t)
}

/// Runs the configured subcommand.
pub fn run(cfg: &RunConfig) -> Result<Table> {
    if !(cfg.grid_scale.is_finite() && cfg.grid_scale > 0.0) {
        return Err(Error::InvalidParameter(format!("grid scale must be positive, got {}", cfg.grid_scale)));
    }
    let cmd = cfg.command.ok_or_else(|| Error::InvalidParameter("no command given".into()))?;
    match cmd {
        Command::GammaCheck => gamma_check(cfg),
        Command::BesselCheck => bessel_check(cfg),
        Command::HeatCheck => heat_check(cfg),
        Command::HankelCheck => hankel_check(cfg),
        Command::P2Check => p2_check_cmd(cfg),
        Command::HormanderNorm => hormander_cmd(cfg),
        Command::KernelCheck => kernel_cmd(cfg),
        Command::LowerBound => lower_cmd(cfg),
        Command::H1Estimate => h1_cmd(cfg),
    }
}

/// 17 significant digits.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Num(v) => num(*v),
        Int(v) => v.to_string(),
        Text(s) => s.clone(),
        List(v) => v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";"),
    }
}

fn json_num(v: f64) -> String {
    if v.is_finite() {
        num(v)
    } else {
        "null".into()
    }
}

fn json_cell(c: &Cell) -> String {
    match c {
        Num(v) => json_num(*v),
        Int(v) => v.to_string(),
        Text(s) => Value::String(s.clone()).to_string(),
        List(v) => format!("[{}]", v.iter().map(|x| json_num(*x)).collect::<Vec<_>>().join(", ")),
    }
}

/// The metadata block: tool version, config echo, grids, summary and,
/// unless suppressed, a timestamp.
pub fn metadata(cfg: &RunConfig, table: &Table, timestamp: Option<u64>) -> Value {
    let mut m = Map::new();
    m.insert("tool".into(), json!(format!("besselmult {}", env!("CARGO_PKG_VERSION"))));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serialises"));
    m.insert("grids".into(), json!(table.grids));
    m.insert("columns".into(), json!(table.columns));
    m.insert("summary".into(), Value::Object(table.summary.clone()));
    if let Some(ts) = timestamp {
        m.insert("timestamp".into(), json!(ts));
    }
    Value::Object(m)
}

/// CSV with a "# " metadata header.
pub fn render_csv(cfg: &RunConfig, table: &Table, timestamp: Option<u64>) -> Result<String> {
    let mut out = String::new();
    let meta = metadata(cfg, table, timestamp);
    for key in ["tool", "config", "grids", "summary", "timestamp"] {
        if let Some(v) = meta.get(key) {
            let _ = writeln!(out, "# {key}: {v}");
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_cell)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(out)
}

/// JSON array of objects, one per row.
pub fn render_json(table: &Table) -> String {
    let mut out = String::from("[");
    for (k, row) in table.rows.iter().enumerate() {
        out.push_str(if k == 0 { "\n  {" } else { ",\n  {" });
        let fields: Vec<String> = table
            .columns
            .iter()
            .zip(row)
            .map(|(c, v)| format!("{}: {}", Value::String(c.to_string()), json_cell(v)))
            .collect();
        out.push_str(&fields.join(", "));
        out.push('}');
    }
    out.push_str("\n]\n");
    out
}

/// `out` with its extension replaced by `meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn execute(cfg: &RunConfig) -> Result<()> {
    let table = run(cfg)?;
    let timestamp = if cfg.no_timestamp {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    };
    let io = |e: std::io::Error| Error::Io(e.to_string());
    match cfg.format {
        Format::Csv => {
            let text = render_csv(cfg, &table, timestamp)?;
            match &cfg.out {
                Some(path) => std::fs::write(path, text).map_err(io)?,
                None => print!("{text}"),
            }
        }
        Format::Json => {
            let text = render_json(&table);
            match &cfg.out {
                Some(path) => {
                    std::fs::write(path, text).map_err(io)?;
                    let meta = serde_json::to_string_pretty(&metadata(cfg, &table, timestamp)).expect("metadata serialises");
                    std::fs::write(sidecar_path(path), meta + "\n").map_err(io)?;
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = resolve(args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
