//! The Bessel heat semigroup e^{−tB}.
//!
//! In one dimension, with τ = (α−1)/2 and z = xy/2t,
//!
//! T_t(x,y) = (2t)^{−1} (xy)^{−τ} I_τ(z) e^{−(x²+y²)/4t}
//!          = (2t)^{−1} (4t)^{−τ} · [e^{−z} I_τ(z) (z/2)^{−τ}] · e^{−(x−y)²/4t},
//!
//! and the bracket is [`bessel_i_reduced_scaled`], so no intermediate
//! overflows. In N dimensions the kernel is the product of the coordinate
//! kernels.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ball_measure, Ball, BesselParams};
use crate::grid::{apply_along_axis, GridFunction, QuadGrid};
use crate::quad::{adaptive_real, Tolerance};
use crate::specfun::{bessel_i_reduced_scaled, BesselOrder};

/// The one-dimensional kernel for a fixed α.
#[derive(Debug, Clone, Copy)]
pub struct HeatKernel1d {
    order: BesselOrder,
}

impl HeatKernel1d {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self { order: BesselOrder::from_alpha(alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        2.0 * self.order.tau() + 1.0
    }

    fn log_prefactor(&self, t: f64, x: f64, y: f64) -> f64 {
        let gap = (x - y) * (x - y) / (4.0 * t);
        -(2.0 * t).ln() - self.order.tau() * (4.0 * t).ln() - gap
    }

    /// T_t(x, y) for t, x, y > 0. Underflows to 0 far from the diagonal.
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        let log_pref = self.log_prefactor(t, x, y);
        if log_pref < -745.0 {
            return 0.0;
        }
        log_pref.exp() * bessel_i_reduced_scaled(self.order, x * y / (2.0 * t))
    }

    /// ln T_t(x, y), finite where [`eval`](Self::eval) underflows.
    pub fn ln_eval(&self, t: f64, x: f64, y: f64) -> f64 {
        self.log_prefactor(t, x, y) + bessel_i_reduced_scaled(self.order, x * y / (2.0 * t)).ln()
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// T_t(x, y) in one dimension.
pub fn heat_kernel_1d(alpha: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("x", x)?;
    check_positive("y", y)?;
    Ok(HeatKernel1d::new(alpha)?.eval(t, x, y))
}

/// T_t(x, y) = Π_j T_t^{[j]}(x_j, y_j).
pub fn heat_kernel(params: &BesselParams, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != params.dim() || y.len() != params.dim() {
        return Err(Error::InvalidParameter("point dimension does not match alpha".into()));
    }
    let mut v = 1.0;
    for ((&a, &xj), &yj) in params.alpha().iter().zip(x).zip(y) {
        v *= heat_kernel_1d(a, t, xj, yj)?;
    }
    Ok(v)
}

/// Empirical constants in the two-sided Gaussian bound
/// C_low e^{−|x−y|²/(c_low t)} ≤ ν(B(x,√t)) T_t(x,y) ≤ C_up e^{−|x−y|²/(c_up t)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBounds {
    pub low_rate: f64,
    pub low_const: f64,
    pub up_rate: f64,
    pub up_const: f64,
}

/// Default trial rates for [`gaussian_bounds_probe`]. The lower bound needs a
/// rate below 4 when some α_j > 0 and the upper one a rate above 4 when some
/// α_j < 0, because of the factor (x/y)^{α/2} in the off-diagonal asymptotics.
pub const GAUSSIAN_LOW_RATE: f64 = 2.0;
pub const GAUSSIAN_UP_RATE: f64 = 8.0;

/// inf and sup of ν(B(x,√t)) T_t(x,y) e^{±|x−y|²/(c t)} over the probes.
pub fn gaussian_bounds_probe(
    params: &BesselParams,
    probes: &[(f64, Vec<f64>, Vec<f64>)],
    low_rate: f64,
    up_rate: f64,
) -> Result<GaussianBounds> {
    if probes.is_empty() {
        return Err(Error::Empty("Gaussian bound probe set"));
    }
    check_positive("lower decay rate", low_rate)?;
    check_positive("upper decay rate", up_rate)?;
    let mut low = f64::INFINITY;
    let mut up = 0.0f64;
    let kernels = params
        .alpha()
        .iter()
        .map(|&a| HeatKernel1d::new(a))
        .collect::<Result<Vec<_>>>()?;
    for (t, x, y) in probes {
        check_positive("t", *t)?;
        if x.len() != params.dim() || y.len() != params.dim() || y.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter("probe point has the wrong dimension or sign".into()));
        }
        let vol = ball_measure(params, &Ball::new(x.clone(), t.sqrt())?)?.value;
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        // log space: the kernel may underflow while the product stays finite
        let lk = kernels.iter().zip(x.iter().zip(y)).map(|(k, (&a, &b))| k.ln_eval(*t, a, b)).sum::<f64>()
            + vol.ln();
        low = low.min((lk + d2 / (low_rate * t)).exp());
        up = up.max((lk + d2 / (up_rate * t)).exp());
    }
    Ok(GaussianBounds { low_rate, low_const: low, up_rate, up_const: up })
}

/// Probe triples (t, x, y) on geometric lattices, same value in every
/// coordinate for x and y.
pub fn gaussian_probe_grid(dim: usize, ts: &[f64], xs: &[f64], ys: &[f64]) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for &t in ts {
        for &x in xs {
            for &y in ys {
                out.push((t, vec![x; dim], vec![y; dim]));
            }
        }
    }
    out
}

fn check_grid(params: &BesselParams, grid: &QuadGrid) -> Result<()> {
    if grid.dim() != params.dim()
        || grid.axes().iter().zip(params.alpha()).any(|(a, &al)| a.alpha() != al)
    {
        return Err(Error::GridMismatch(format!(
            "grid ({}) does not carry the measure of alpha = {:?}",
            grid.describe(),
            params.alpha()
        )));
    }
    Ok(())
}

/// Row i of the discretised operator along one axis. When the kernel width
/// √(2t) is below the local node spacing the Gaussian cannot be resolved and
/// the row is the identity, i.e. the t → 0 limit.
fn heat_rows(kernel: HeatKernel1d, nodes: &[f64], weights: &[f64], spacing: &[f64], t: f64) -> Vec<Vec<f64>> {
    let width = (2.0 * t).sqrt();
    (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            if width < spacing[i] {
                let mut row = vec![0.0; nodes.len()];
                row[i] = 1.0;
                return row;
            }
            nodes
                .iter()
                .zip(weights)
                .map(|(&y, &w)| kernel.eval(t, nodes[i], y) * w)
                .collect()
        })
        .collect()
}

/// 𝒯_t f on f's grid, by the grid quadrature applied one axis at a time.
pub fn heat_apply(params: &BesselParams, f: &GridFunction, t: f64) -> Result<GridFunction> {
    check_positive("t", t)?;
    let grid = f.grid();
    check_grid(params, grid)?;
    let shape = grid.shape();
    let mut values = f.values().to_vec();
    for (j, axis) in grid.axes().iter().enumerate() {
        let kernel = HeatKernel1d::new(axis.alpha())?;
        let rows = heat_rows(kernel, axis.nodes(), axis.weights(), &axis.local_spacing(), t);
        values = apply_along_axis(&shape, &values, j, &rows);
    }
    GridFunction::new(grid.clone(), values)
}

/// `n` times geometric on [lo, hi].
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (r * k as f64).exp()).collect()
}

/// 40 times geometric on [1e−3, 1e3].
pub fn default_t_grid() -> Vec<f64> {
    geometric_grid(1e-3, 1e3, 40)
}

/// sup_{t ∈ t_grid} |𝒯_t f|, pointwise.
pub fn maximal_function(params: &BesselParams, f: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    if t_grid.is_empty() {
        return Err(Error::Empty("t grid"));
    }
    let mut sup = vec![0.0f64; f.values().len()];
    for &t in t_grid {
        let g = heat_apply(params, f, t)?;
        for (s, v) in sup.iter_mut().zip(g.values()) {
            *s = s.max(v.norm());
        }
    }
    GridFunction::new(f.grid().clone(), sup.into_iter().map(|s| Complex64::new(s, 0.0)).collect())
}

/// Half-width, in units of √t, beyond which e^{−(x−y)²/4t} < 1e−17.
const GAUSS_TAIL: f64 = 12.6;

/// ∫_0^∞ g(y) y^α dy for a g concentrated near the points in `centers` with
/// Gaussian width √t. The piece [0, y₁] is mapped by y = u^{1/(α+1)}, which
/// removes the endpoint singularity of the density.
fn integrate_against_measure<G: Fn(f64) -> f64>(alpha: f64, centers: &[f64], t: f64, g: G) -> Result<f64> {
    let s = t.sqrt();
    let hi = centers.iter().cloned().fold(0.0, f64::max) + GAUSS_TAIL * s;
    let y1 = (0.5 * centers.iter().cloned().fold(f64::INFINITY, f64::min)).min(s);
    let e = alpha + 1.0;
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 20_000 };
    let head = adaptive_real(&[0.0, y1.powf(e)], tol, |u| {
        if u == 0.0 {
            return 0.0;
        }
        g(u.powf(1.0 / e)) / e
    })?;
    let mut breaks = vec![y1];
    for &c in centers {
        for k in [-GAUSS_TAIL, -4.0, -1.0, 0.0, 1.0, 4.0] {
            let p = c + k * s;
            if p > y1 && p < hi {
                breaks.push(p);
            }
        }
    }
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let body = adaptive_real(&breaks, tol, |y| g(y) * y.powf(alpha))?;
    Ok(head + body)
}

/// ∫_0^∞ T_t(x,y) y^α dy by adaptive quadrature; equals 1.
pub fn conservation_integral(alpha: f64, t: f64, x: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("x", x)?;
    let k = HeatKernel1d::new(alpha)?;
    integrate_against_measure(alpha, &[x], t, |y| k.eval(t, x, y))
}

/// ∫_0^∞ T_s(x,z) T_t(z,y) z^α dz by adaptive quadrature; equals T_{s+t}(x,y).
pub fn chapman_kolmogorov(alpha: f64, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_positive("s", s)?;
    check_positive("t", t)?;
    let k = HeatKernel1d::new(alpha)?;
    integrate_against_measure(alpha, &[x, y], s.max(t), |z| k.eval(s, x, z) * k.eval(t, z, y))
}

/// Wraps a grid for the common one-dimensional case.
pub fn one_dim_grid(axis: crate::grid::Axis) -> Result<Arc<QuadGrid>> {
    Ok(Arc::new(QuadGrid::new(vec![axis])?))
}
