//! Norm estimators on grids and the growth experiments for ‖B^{ib}‖ as |b| → ∞.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::BesselParams;
use crate::grid::{Axis, GridFunction, QuadGrid};
use crate::heatkernel::maximal_function;
use crate::impower::{c_constants, kb_main_terms, kernel, ImaginaryPowerParams, POISSON_CEILING};

/// A norm value, the grid it was computed on, and, where a second resolution
/// was run, the relative change from halving it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub grid: String,
    pub refinement_delta: Option<f64>,
}

fn check_grid(params: &BesselParams, g: &GridFunction) -> Result<()> {
    let grid = g.grid();
    if grid.dim() != params.dim() || grid.axes().iter().zip(params.alpha()).any(|(a, &al)| a.alpha() != al) {
        return Err(Error::GridMismatch(format!("grid {} does not carry alpha = {:?}", grid.describe(), params.alpha())));
    }
    if g.values().is_empty() {
        return Err(Error::Empty("grid"));
    }
    Ok(())
}

/// sup_λ λ·ν{|g| > λ} on the discretisation: samples sorted by |g| in
/// decreasing order, the k-th candidate being |g_k| times the weight of the
/// first k samples.
pub fn weak_l1_norm(params: &BesselParams, g: &GridFunction) -> Result<NormEstimate> {
    check_grid(params, g)?;
    let value = weak_l1_from_samples(g.values(), &g.grid().weights());
    Ok(NormEstimate { value, grid: g.grid().describe(), refinement_delta: None })
}

fn weak_l1_from_samples(values: &[Complex64], weights: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values.iter().map(|v| v.norm()).zip(weights.iter().cloned()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut mass = 0.0;
    let mut best = 0.0f64;
    for (m, w) in pairs {
        mass += w;
        best = best.max(m * mass);
    }
    best
}

/// (Σ_k w_k |g_k|^p)^{1/p}
pub fn lp_norm(params: &BesselParams, g: &GridFunction, p: f64) -> Result<NormEstimate> {
    check_grid(params, g)?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in [1, inf), got {p}")));
    }
    Ok(NormEstimate { value: g.lp(p), grid: g.grid().describe(), refinement_delta: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least squares of ln v against ln b. Needs 5 or more points with positive
/// coordinates and at least two distinct b.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 5 {
        return Err(Error::DegenerateSweep(format!("{} points, need at least 5", points.len())));
    }
    if points.iter().any(|&(b, v)| !(b > 0.0 && v > 0.0 && b.is_finite() && v.is_finite())) {
        return Err(Error::DegenerateSweep("non-positive or non-finite entry".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-300 {
        return Err(Error::DegenerateSweep("all b values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, stderr, intercept, points: points.len() })
}

/// ε as a function of b: ε = scale/|b|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsRule {
    pub scale: f64,
}

impl Default for EpsRule {
    fn default() -> Self {
        Self { scale: 0.05 }
    }
}

impl EpsRule {
    pub fn eps(&self, b: f64) -> f64 {
        self.scale / b.abs()
    }
}

pub const DEFAULT_B_SWEEP: [f64; 8] = [2.0, 3.0, 4.5, 7.0, 10.0, 15.0, 22.0, 33.0];

/// One b of a sweep. The three contributions are the same norm applied to
/// the c₁ term, the c₂ term and the remainder of the kernel separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub b: f64,
    pub norm: f64,
    pub term1_contrib: f64,
    pub term2_contrib: f64,
    pub remainder_contrib: f64,
    pub eps: f64,
    pub grid_pts: usize,
    pub refinement_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// weak-L¹ norm of B^{ib}f_ε with ‖f_ε‖_{L¹} = 1
    WeakL1,
    /// ‖B^{ib}f‖_{L^p((|b|,∞))} / ‖f‖_{L^p}
    LpTail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub alpha: f64,
    pub p: Option<f64>,
    pub expected_slope: f64,
    pub points: Vec<SweepPoint>,
    pub fit: SlopeFit,
}

impl ExperimentReport {
    /// Refit using only lo ≤ |b| ≤ hi.
    pub fn fit_over(&self, lo: f64, hi: f64) -> Result<SlopeFit> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.b.abs() >= lo && p.b.abs() <= hi)
            .map(|p| (p.b.abs(), p.norm))
            .collect();
        slope_fit(&pts)
    }
}

fn check_sweep(b_sweep: &[f64], grid_scale: f64) -> Result<()> {
    if !(grid_scale.is_finite() && grid_scale > 0.0) {
        return Err(Error::InvalidParameter(format!("grid scale must be positive, got {grid_scale}")));
    }
    for &b in b_sweep {
        if !(b.is_finite() && b != 0.0) {
            return Err(Error::InvalidParameter(format!("sweep values must be nonzero, got {b}")));
        }
        if b.abs() > POISSON_CEILING {
            return Err(Error::QuadratureCeiling { b, ceiling: POISSON_CEILING });
        }
    }
    Ok(())
}

/// Nodes, weights (with x^α) and values of a source function.
struct Source {
    nodes: Vec<f64>,
    weighted: Vec<Complex64>,
}

impl Source {
    fn new<F: Fn(f64) -> f64>(alpha: f64, lo: f64, hi: f64, panels: usize, f: F) -> Result<Self> {
        let breaks: Vec<f64> = (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect();
        let axis = Axis::composite(alpha, &breaks, 8)?;
        let weighted = axis.nodes().iter().zip(axis.weights()).map(|(&y, &w)| Complex64::new(f(y) * w, 0.0)).collect();
        Ok(Self { nodes: axis.nodes().to_vec(), weighted })
    }

    fn mass(&self) -> Complex64 {
        self.weighted.iter().sum()
    }
}

/// B^{ib}f and its c₁ and c₂ parts at each point of `xs`.
fn apply_with_terms(p: &ImaginaryPowerParams, src: &Source, xs: &[f64]) -> Result<Vec<[Complex64; 3]>> {
    let c = c_constants(p)?;
    xs.par_iter()
        .map(|&x| {
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for (&y, &fw) in src.nodes.iter().zip(&src.weighted) {
                let (t1, t2) = kb_main_terms(p, &c, x, y)?;
                acc[0] += kernel(p, x, y)? * fw;
                acc[1] += t1 * fw;
                acc[2] += t2 * fw;
            }
            Ok(acc)
        })
        .collect()
}

/// Breakpoints x = base + g for g from g0 to g_end, stepping in ln g by
/// min(0.25, g/(2|b|w))/scale. The phase of the c₂ term spread over a source
/// of width w seen from distance g is about 2|b|w/g, so each panel sees a
/// bounded change of it.
fn gap_graded_breaks(base: f64, g0: f64, g_end: f64, b: f64, w: f64, scale: f64) -> Vec<f64> {
    let mut out = vec![base + g0];
    let mut g = g0;
    while g < g_end {
        let step = (0.25f64).min(g / (2.0 * b.abs() * w)) / scale;
        g = (g * step.exp()).min(g_end);
        if g_end - g < 1e-9 * g_end {
            g = g_end;
        }
        out.push(base + g);
    }
    out
}

struct WeakPoint {
    norm: f64,
    t1: f64,
    t2: f64,
    rem: f64,
    grid_pts: usize,
}

/// Upper end of the evaluation region for α > 0.
const LOWER1_X_MAX: f64 = 50.0;

fn lower1_point(alpha: f64, b: f64, eps: f64, scale: f64) -> Result<WeakPoint> {
    let p = ImaginaryPowerParams::new(alpha, b)?;
    // source [s_lo, s_lo + ε]; evaluation from s_lo + ε + g0
    let (s_lo, g0, x_end) = if alpha < 0.0 { (1.0, 2.0 * eps, 2.0) } else { (eps, eps, LOWER1_X_MAX) };
    let s_hi = s_lo + eps;
    let phase = 2.0 * b.abs() * ((g0 + eps) / g0).ln();
    let src_panels = ((phase / 1.5).max(2.0) * scale).ceil() as usize;
    let src = Source::new(alpha, s_lo, s_hi, src_panels, |y| y.powf(-alpha) / eps)?;
    let breaks = gap_graded_breaks(s_hi, g0, x_end - s_hi, b, eps, scale);
    let axis = Axis::composite(alpha, &breaks, 8)?;
    let grid = Arc::new(QuadGrid::new(vec![axis])?);
    let vals = apply_with_terms(&p, &src, grid.axes()[0].nodes())?;
    let w = grid.weights();
    let pick = |f: &dyn Fn(&[Complex64; 3]) -> Complex64| -> f64 {
        let v: Vec<Complex64> = vals.iter().map(f).collect();
        weak_l1_from_samples(&v, &w)
    };
    Ok(WeakPoint {
        norm: pick(&|v| v[0]),
        t1: pick(&|v| v[1]),
        t2: pick(&|v| v[2]),
        rem: pick(&|v| v[0] - v[1] - v[2]),
        grid_pts: grid.len() + src.nodes.len(),
    })
}

/// Weak-L¹ norm of B^{ib}f_ε against |b|, with ‖f_ε‖_{L¹(ν)} = 1.
///
/// α < 0: f_ε = ε^{−1}x^{−α} on [1, 1+ε], norm over [1+3ε, 2].
/// α > 0: f_ε = ε^{−1}x^{−α} on [ε, 2ε], norm over [3ε, 50].
/// Expected growth |b|^{d/2}, d = max(1, α+1). `grid_scale` multiplies every
/// resolution; each point is also run at half of it for the refinement delta.
pub fn lower1_experiment(alpha: f64, b_sweep: &[f64], eps_rule: EpsRule, grid_scale: f64) -> Result<ExperimentReport> {
    if alpha == 0.0 || !(alpha > -1.0) {
        return Err(Error::InvalidParameter(format!("need alpha in (-1, 0) or alpha > 0, got {alpha}")));
    }
    check_sweep(b_sweep, grid_scale)?;
    let mut points = Vec::with_capacity(b_sweep.len());
    for &b in b_sweep {
        let eps = eps_rule.eps(b);
        if !(eps > 0.0 && eps < 0.1) {
            return Err(Error::InvalidParameter(format!("eps = {eps} at b = {b} must lie in (0, 0.1)")));
        }
        let fine = lower1_point(alpha, b, eps, grid_scale)?;
        let coarse = lower1_point(alpha, b, eps, 0.5 * grid_scale)?;
        points.push(SweepPoint {
            b,
            norm: fine.norm,
            term1_contrib: fine.t1,
            term2_contrib: fine.t2,
            remainder_contrib: fine.rem,
            eps,
            grid_pts: fine.grid_pts,
            refinement_delta: (fine.norm - coarse.norm).abs() / fine.norm,
        });
    }
    let fit = slope_fit(&points.iter().map(|p| (p.b.abs(), p.norm)).collect::<Vec<_>>())?;
    Ok(ExperimentReport {
        kind: ExperimentKind::WeakL1,
        alpha,
        p: None,
        expected_slope: 0.5 * (alpha + 1.0).max(1.0),
        points,
        fit,
    })
}

/// The evaluation window [δ, δ·LOWER2_SPAN] of the L^p norm; beyond it the
/// far-field power law is integrated exactly.
const LOWER2_SPAN: f64 = 1e4;

struct LpPoint {
    norm: f64,
    t1: f64,
    rem: f64,
    grid_pts: usize,
}

fn lower2_point(alpha: f64, p_exp: f64, b: f64, eps: f64, scale: f64) -> Result<LpPoint> {
    let p = ImaginaryPowerParams::new(alpha, b)?;
    let delta = b.abs();
    let src = Source::new(alpha, 0.5 * eps, eps, 2, |_| 1.0)?;
    let f_norm = ((eps.powf(alpha + 1.0) - (0.5 * eps).powf(alpha + 1.0)) / (alpha + 1.0)).powf(1.0 / p_exp);
    let x_end = delta * LOWER2_SPAN;
    let panels = ((LOWER2_SPAN.ln() / 0.25) * scale).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|k| delta * (LOWER2_SPAN.ln() * k as f64 / panels as f64).exp()).collect();
    let axis = Axis::composite(alpha, &breaks, 8)?;
    let grid = Arc::new(QuadGrid::new(vec![axis])?);
    let vals = apply_with_terms(&p, &src, grid.axes()[0].nodes())?;
    let w = grid.weights();
    // |c₁ m₀|^p ∫_{x_end}^∞ x^{−p(α+1)+α} dx, m₀ = ∫ f dν
    let e = (alpha + 1.0) * (p_exp - 1.0);
    let tail = (c_constants(&p)?.c1 * src.mass()).norm().powf(p_exp) * x_end.powf(-e) / e;
    let lp = |f: &dyn Fn(&[Complex64; 3]) -> Complex64, with_tail: bool| -> f64 {
        let s: f64 = vals.iter().zip(&w).map(|(v, w)| w * f(v).norm().powf(p_exp)).sum();
        (s + if with_tail { tail } else { 0.0 }).powf(1.0 / p_exp) / f_norm
    };
    Ok(LpPoint {
        norm: lp(&|v| v[0], true),
        t1: lp(&|v| v[1], true),
        rem: lp(&|v| v[0] - v[1] - v[2], false),
        grid_pts: grid.len() + src.nodes.len(),
    })
}

/// ‖B^{ib}f‖_{L^p((δ,∞))}/‖f‖_{L^p} with δ = |b| and f = χ_{[ε/2, ε]}, against
/// |b|. Expected growth |b|^{(α+1)(2−p)/(2p)}.
pub fn lower2_experiment(alpha: f64, p: f64, b_sweep: &[f64], eps: f64, grid_scale: f64) -> Result<ExperimentReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("need alpha > 0, got {alpha}")));
    }
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("need p in (1, 2), got {p}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("need eps in (0, 1], got {eps}")));
    }
    check_sweep(b_sweep, grid_scale)?;
    let mut points = Vec::with_capacity(b_sweep.len());
    for &b in b_sweep {
        let fine = lower2_point(alpha, p, b, eps, grid_scale)?;
        let coarse = lower2_point(alpha, p, b, eps, 0.5 * grid_scale)?;
        points.push(SweepPoint {
            b,
            norm: fine.norm,
            term1_contrib: fine.t1,
            // the window starts at |b| ≥ 2 ≫ ε, outside y/2 < x < 2y
            term2_contrib: 0.0,
            remainder_contrib: fine.rem,
            eps,
            grid_pts: fine.grid_pts,
            refinement_delta: (fine.norm - coarse.norm).abs() / fine.norm,
        });
    }
    let fit = slope_fit(&points.iter().map(|p| (p.b.abs(), p.norm)).collect::<Vec<_>>())?;
    Ok(ExperimentReport {
        kind: ExperimentKind::LpTail,
        alpha,
        p: Some(p),
        expected_slope: 0.5 * (alpha + 1.0) * (2.0 - p) / p,
        points,
        fit,
    })
}

/// ∫ sup_{t ∈ t_grid} |T_t f| dν, a lower estimate of the H¹ norm. The
/// refinement delta compares against every other t of the grid.
pub fn h1_norm_estimate(params: &BesselParams, f: &GridFunction, t_grid: &[f64]) -> Result<NormEstimate> {
    check_grid(params, f)?;
    let total = |ts: &[f64]| -> Result<f64> {
        let m = maximal_function(params, f, ts)?;
        Ok(m.values().iter().zip(f.grid().weights()).map(|(v, w)| v.re * w).sum())
    };
    let value = total(t_grid)?;
    let coarse: Vec<f64> = t_grid.iter().step_by(2).cloned().collect();
    let refinement_delta = if value > 0.0 { Some((value - total(&coarse)?) / value) } else { None };
    Ok(NormEstimate { value, grid: f.grid().describe(), refinement_delta })
}
