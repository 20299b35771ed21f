//! Eigenfunctions, the Hankel transform and spectral multipliers.
//!
//! φ_j(z) = 2^{τ} Γ(τ+1) z^{−τ} J_τ(z) with τ = (α_j−1)/2 satisfies φ_j(0) = 1
//! and B_z φ_j(zξ) = ξ² φ_j(zξ). The transform
//!
//! H f(ξ) = ∫ f(x) φ_α(xξ) dν(x)
//!
//! is isometric and self-inverse once the frequency side carries the measure
//! ξ^α dξ / c_α², c_α = Π_j 2^{τ_j} Γ(τ_j+1). Frequency grids built by
//! [`HankelPlan`] bake that factor into their weights, so the same routine maps
//! in both directions and every norm on either grid is the L² norm.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ball_measure, Ball, BesselParams};
use crate::grid::{apply_along_axis, Axis, GridFunction, QuadGrid};
use crate::quad;
use crate::specfun::{bessel_j_reduced, BesselOrder};

/// φ for one coordinate with a fixed α.
#[derive(Debug, Clone, Copy)]
pub struct Phi {
    order: BesselOrder,
}

impl Phi {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self { order: BesselOrder::from_alpha(alpha)? })
    }

    pub fn eval(&self, z: f64) -> f64 {
        bessel_j_reduced(self.order, z)
    }

    /// c_α = 2^τ Γ(τ+1).
    pub fn normalisation(&self) -> f64 {
        2f64.powf(self.order.tau()) * self.order.gamma_tau_plus_one()
    }
}

/// φ_{α_j}(z), with φ(0) = 1.
pub fn phi(alpha: f64, z: f64) -> Result<f64> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidParameter(format!("phi needs z >= 0, got {z}")));
    }
    Ok(Phi::new(alpha)?.eval(z))
}

type SymbolFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A function m on (0,∞), optionally declared to vanish outside [lo, hi].
#[derive(Clone)]
pub struct MultiplierSymbol {
    eval: Arc<SymbolFn>,
    band: Option<(f64, f64)>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol").field("band", &self.band).finish_non_exhaustive()
    }
}

impl MultiplierSymbol {
    pub fn new<F: Fn(f64) -> Complex64 + Send + Sync + 'static>(f: F) -> Self {
        Self { eval: Arc::new(f), band: None }
    }

    /// `f` restricted to [lo, hi]; the symbol is 0 outside.
    pub fn banded<F: Fn(f64) -> Complex64 + Send + Sync + 'static>(f: F, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid band [{lo}, {hi}]")));
        }
        Ok(Self {
            eval: Arc::new(move |l| if l >= lo && l <= hi { f(l) } else { Complex64::new(0.0, 0.0) }),
            band: Some((lo, hi)),
        })
    }

    pub fn identity() -> Self {
        Self::new(|_| Complex64::new(1.0, 0.0))
    }

    /// λ ↦ e^{−tλ}.
    pub fn heat(t: f64) -> Self {
        Self::new(move |l| Complex64::new((-t * l).exp(), 0.0))
    }

    /// λ ↦ λ^{ib}.
    pub fn imaginary_power(b: f64) -> Self {
        Self::new(move |l| Complex64::from_polar(1.0, b * l.ln()))
    }

    pub fn band(&self) -> Option<(f64, f64)> {
        self.band
    }

    pub fn eval(&self, lambda: f64) -> Complex64 {
        if lambda > 0.0 {
            (self.eval)(lambda)
        } else {
            (self.eval)(f64::MIN_POSITIVE)
        }
    }

    /// Pointwise product; the band is the intersection of the bands.
    pub fn product(&self, other: &MultiplierSymbol) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let band = match (self.band, other.band) {
            (Some((l1, h1)), Some((l2, h2))) => Some((l1.max(l2), h1.min(h2))),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        };
        Self { eval: Arc::new(move |l| a(l) * b(l)), band }
    }

    /// λ ↦ m(tλ), with the band rescaled accordingly.
    pub fn dilate(&self, t: f64) -> Self {
        let f = self.eval.clone();
        Self { eval: Arc::new(move |l| f(t * l)), band: self.band.map(|(lo, hi)| (lo / t, hi / t)) }
    }
}

struct AxisTables {
    /// forward[i][k] = φ(ξ_i x_k) w_k
    forward: Vec<Vec<f64>>,
    /// backward[k][i] = φ(ξ_i x_k) ω_i
    backward: Vec<Vec<f64>>,
}

/// Input grid, frequency grid and the tabulated kernels between them.
pub struct HankelPlan {
    params: BesselParams,
    input: Arc<QuadGrid>,
    output: Arc<QuadGrid>,
    tables: Vec<AxisTables>,
}

impl fmt::Debug for HankelPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HankelPlan")
            .field("params", &self.params)
            .field("input", &self.input.describe())
            .field("output", &self.output.describe())
            .finish()
    }
}

impl HankelPlan {
    /// `freq_axes` are plain axes carrying ξ^α; the 1/c_α² factor is applied here.
    pub fn new(params: BesselParams, input: Arc<QuadGrid>, freq_axes: Vec<Axis>) -> Result<Self> {
        if input.dim() != params.dim() || freq_axes.len() != params.dim() {
            return Err(Error::GridMismatch("grid dimension differs from alpha".into()));
        }
        let mut out_axes = Vec::new();
        let mut tables = Vec::new();
        for ((x_axis, xi_axis), &alpha) in input.axes().iter().zip(&freq_axes).zip(params.alpha()) {
            if x_axis.alpha() != alpha || xi_axis.alpha() != alpha {
                return Err(Error::GridMismatch(format!("axis does not carry the measure x^{alpha}")));
            }
            let phi = Phi::new(alpha)?;
            let c = phi.normalisation();
            let xi_axis = xi_axis.scaled(1.0 / (c * c));
            let xs = x_axis.nodes();
            let table: Vec<Vec<f64>> = xi_axis
                .nodes()
                .par_iter()
                .map(|&xi| xs.iter().map(|&x| phi.eval(xi * x)).collect())
                .collect();
            let forward = table
                .iter()
                .map(|row| row.iter().zip(x_axis.weights()).map(|(p, w)| p * w).collect())
                .collect();
            let backward = (0..xs.len())
                .map(|k| table.iter().zip(xi_axis.weights()).map(|(row, w)| row[k] * w).collect())
                .collect();
            tables.push(AxisTables { forward, backward });
            out_axes.push(xi_axis);
        }
        Ok(Self { params, input, output: Arc::new(QuadGrid::new(out_axes)?), tables })
    }

    /// Same composite rule on [0, x_max] (space) and [0, xi_max] (frequency)
    /// in every coordinate: `panels` panels of `order` nodes each.
    pub fn uniform(params: BesselParams, x_max: f64, xi_max: f64, panels: usize, order: usize) -> Result<Self> {
        let x_axes = params
            .alpha()
            .iter()
            .map(|&a| Axis::uniform(a, x_max, panels, order))
            .collect::<Result<Vec<_>>>()?;
        let xi_axes = params
            .alpha()
            .iter()
            .map(|&a| Axis::uniform(a, xi_max, panels, order))
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, Arc::new(QuadGrid::new(x_axes)?), xi_axes)
    }

    /// The default grid for functions of Gaussian decay: [0, 12] on both
    /// sides, 24·`scale` panels of 16 nodes (over 15 nodes per period of the
    /// fastest φ(xξ)).
    pub fn gaussian_default(params: BesselParams, scale: f64) -> Result<Self> {
        let panels = ((24.0 * scale).ceil() as usize).max(1);
        Self::uniform(params, 12.0, 12.0, panels, 16)
    }

    pub fn params(&self) -> &BesselParams {
        &self.params
    }

    pub fn input_grid(&self) -> &Arc<QuadGrid> {
        &self.input
    }

    pub fn output_grid(&self) -> &Arc<QuadGrid> {
        &self.output
    }

    /// Largest frequency in each coordinate.
    pub fn max_frequency(&self) -> Vec<f64> {
        self.output.axes().iter().map(|a| *a.nodes().last().expect("nonempty")).collect()
    }

    fn check_on(&self, f: &GridFunction, grid: &Arc<QuadGrid>, side: &str) -> Result<()> {
        if Arc::ptr_eq(f.grid(), grid) || **f.grid() == **grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("function is not on the plan's {side} grid")))
        }
    }

    fn apply(&self, values: &[Complex64], shape_in: &[usize], forward: bool) -> Vec<Complex64> {
        let mut shape = shape_in.to_vec();
        let mut v = values.to_vec();
        for (j, t) in self.tables.iter().enumerate() {
            let rows = if forward { &t.forward } else { &t.backward };
            v = apply_along_axis(&shape, &v, j, rows);
            shape[j] = rows.len();
        }
        v
    }
}

/// H f on the plan's frequency grid.
pub fn hankel_transform(plan: &HankelPlan, f: &GridFunction) -> Result<GridFunction> {
    plan.check_on(f, &plan.input, "input")?;
    GridFunction::new(plan.output.clone(), plan.apply(f.values(), &plan.input.shape(), true))
}

/// H F from the frequency grid back to the input grid.
pub fn inverse_hankel_transform(plan: &HankelPlan, g: &GridFunction) -> Result<GridFunction> {
    plan.check_on(g, &plan.output, "frequency")?;
    GridFunction::new(plan.input.clone(), plan.apply(g.values(), &plan.output.shape(), false))
}

/// m(B) f = H(n · H f) with n(ξ) = m(|ξ|²).
pub fn multiplier_apply(plan: &HankelPlan, m: &MultiplierSymbol, f: &GridFunction) -> Result<GridFunction> {
    if let Some((lo, hi)) = m.band() {
        let covered = plan.max_frequency().iter().cloned().fold(f64::INFINITY, f64::min);
        if covered * covered < hi {
            return Err(Error::BandViolation { lo, hi, max_frequency: covered });
        }
    }
    let hf = hankel_transform(plan, f)?;
    let out = plan.output.clone();
    let values: Vec<Complex64> = hf
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let xi2: f64 = out.point(k).iter().map(|x| x * x).sum();
            v * m.eval(xi2)
        })
        .collect();
    inverse_hankel_transform(plan, &GridFunction::new(out, values)?)
}

/// Both sides of the Plancherel-type inequality for a multiplier supported in
/// [R/2, 2R] and a point y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P2Ratio {
    /// ∫_{R/2<|x|²<2R} |m(|x|²)|² |φ_α(xy)|² dν(x)
    pub lhs: f64,
    /// ν(B(y, R^{−1/2}))^{−1} ‖m(R·)‖²_{L²(0,∞)}
    pub rhs: f64,
    pub ratio: f64,
    /// whether ν(B) was exact (N = 1) or the product surrogate
    pub exact_measure: bool,
}

/// Resolution knobs for [`p2_check`]: nodes per panel and panels per period
/// of the fastest φ factor.
#[derive(Debug, Clone, Copy)]
pub struct P2Resolution {
    pub order: usize,
    pub panels_per_period: f64,
    pub min_panels: usize,
}

impl Default for P2Resolution {
    fn default() -> Self {
        Self { order: 16, panels_per_period: 1.5, min_panels: 6 }
    }
}

/// LHS/RHS of the Plancherel-type bound. The left side is computed in the
/// variable u = x/√R, over [1/√2, √2] when N = 1 and over the box [0, √2]^N
/// otherwise (the symbol vanishes off the annulus).
pub fn p2_check(
    params: &BesselParams,
    m: &MultiplierSymbol,
    y: &[f64],
    r_big: f64,
    res: P2Resolution,
) -> Result<P2Ratio> {
    if !(r_big.is_finite() && r_big > 0.0) {
        return Err(Error::InvalidParameter(format!("R must be positive, got {r_big}")));
    }
    if y.len() != params.dim() {
        return Err(Error::InvalidParameter("y has the wrong dimension".into()));
    }
    match m.band() {
        Some((lo, hi)) if lo >= 0.5 * r_big * (1.0 - 1e-12) && hi <= 2.0 * r_big * (1.0 + 1e-12) => {}
        Some((lo, hi)) => {
            return Err(Error::SupportNotContained(format!(
                "band [{lo}, {hi}] is not inside [R/2, 2R] = [{}, {}]",
                0.5 * r_big,
                2.0 * r_big
            )))
        }
        None => return Err(Error::SupportNotContained("symbol has no declared band".into())),
    }
    let sq = r_big.sqrt();
    let n = params.dim();
    let sqrt2 = std::f64::consts::SQRT_2;
    let axes = params
        .alpha()
        .iter()
        .zip(y)
        .map(|(&a, &yj)| {
            let lo = if n == 1 { 1.0 / sqrt2 } else { 0.0 };
            let periods = sq * yj * (sqrt2 - lo) / (2.0 * std::f64::consts::PI);
            let panels = ((periods * res.panels_per_period).ceil() as usize).max(res.min_panels);
            let breaks: Vec<f64> = (0..=panels).map(|k| lo + (sqrt2 - lo) * k as f64 / panels as f64).collect();
            let axis = Axis::composite(a, &breaks, res.order)?;
            let phi = Phi::new(a)?;
            let table: Vec<f64> = axis.nodes().iter().map(|&u| phi.eval(sq * u * yj).powi(2)).collect();
            Ok((axis, table))
        })
        .collect::<Result<Vec<_>>>()?;
    let shape: Vec<usize> = axes.iter().map(|(a, _)| a.len()).collect();
    let total: usize = shape.iter().product();
    let lhs_u: f64 = (0..total)
        .into_par_iter()
        .map(|mut k| {
            let mut w = 1.0;
            let mut u2 = 0.0;
            for j in (0..n).rev() {
                let i = k % shape[j];
                k /= shape[j];
                let u = axes[j].0.nodes()[i];
                w *= axes[j].0.weights()[i] * axes[j].1[i];
                u2 += u * u;
            }
            if w == 0.0 {
                return 0.0;
            }
            w * m.eval(r_big * u2).norm_sqr()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let d_gl: f64 = params.alpha().iter().map(|a| a + 1.0).sum();
    let lhs = r_big.powf(0.5 * d_gl) * lhs_u;
    let m_norm2 = quad::composite(&geometric_breaks(0.5, 2.0, 24), res.order, |l| {
        Complex64::new(m.eval(r_big * l).norm_sqr(), 0.0)
    })
    .re;
    let vol = ball_measure(params, &Ball::new(y.to_vec(), 1.0 / sq)?)?;
    let rhs = m_norm2 / vol.value;
    Ok(P2Ratio { lhs, rhs, ratio: lhs / rhs, exact_measure: vol.exact })
}

fn geometric_breaks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / n as f64;
    (0..=n).map(|k| lo * (r * k as f64).exp()).collect()
}

/// One row of a (P₂) sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct P2Row {
    pub r_big: f64,
    pub y: Vec<f64>,
    pub ratio: f64,
}

/// p2_check over every R in `rs` and every y whose coordinates all lie in
/// `ys` (the full tensor product when N ≥ 2), with the symbol `family(R)`.
pub fn p2_sweep<F>(
    params: &BesselParams,
    family: F,
    rs: &[f64],
    ys: &[f64],
    res: P2Resolution,
) -> Result<Vec<P2Row>>
where
    F: Fn(f64) -> Result<MultiplierSymbol>,
{
    let n = params.dim();
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..n {
        points = points
            .into_iter()
            .flat_map(|p| {
                ys.iter().map(move |&y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    let mut rows = Vec::new();
    for &r in rs {
        let m = family(r)?;
        for y in &points {
            let ratio = p2_check(params, &m, y, r, res)?.ratio;
            rows.push(P2Row { r_big: r, y: y.clone(), ratio });
        }
    }
    Ok(rows)
}

/// Sup of the (P₂) ratio over nested log grids of R and y on [lo, hi] with
/// `sizes` points each. Nested grids can only raise the sup, so refinement
/// stops at the first step whose relative increase is below `settle`.
/// Returns the sups computed so far and whether the chain settled.
pub fn p2_sup_chain<F>(
    params: &BesselParams,
    family: F,
    (lo, hi): (f64, f64),
    sizes: &[usize],
    settle: f64,
    res: P2Resolution,
) -> Result<(Vec<f64>, bool)>
where
    F: Fn(f64) -> Result<MultiplierSymbol>,
{
    let mut sups: Vec<f64> = Vec::new();
    for &n in sizes {
        let grid = crate::heatkernel::geometric_grid(lo, hi, n);
        let sup = p2_sweep(params, &family, &grid, &grid, res)?.iter().map(|r| r.ratio).fold(0.0, f64::max);
        if !sup.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite p2 ratio on the {n}-point sweep")));
        }
        let settled = sups.last().is_some_and(|&prev| sup <= prev * (1.0 + settle));
        sups.push(sup);
        if settled {
            return Ok((sups, true));
        }
    }
    Ok((sups, false))
}
