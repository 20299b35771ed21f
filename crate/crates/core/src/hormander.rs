//! The Hörmander-type functional sup_t ‖η(·) m(t·)‖_{W^{2,β}(ℝ)}.
//!
//! Fourier convention: ĝ(ξ) = ∫ g(s) e^{−isξ} ds, so that
//! ‖g‖²_{W^{2,β}} = (2π)^{−1} ∫ (1+ξ²)^β |ĝ(ξ)|² dξ and β = 0 is Parseval.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::MultiplierSymbol;
use crate::heatkernel::geometric_grid;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// η(λ) = ψ(log₂λ) / Σ_j ψ(log₂λ − j) with ψ(u) = exp(−1/(1−u²)) on (−1, 1).
/// Smooth, supported in (1/2, 2), and Σ_j η(2^{−j}λ) = 1 for every λ > 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffEta;

impl CutoffEta {
    pub fn eval(&self, lambda: f64) -> f64 {
        if !(lambda > 0.5 && lambda < 2.0) {
            return 0.0;
        }
        let u = lambda.log2();
        // only j ∈ {−1, 0, 1} can meet (−1, 1) when |u| < 1
        let denom = bump(u + 1.0) + bump(u) + bump(u - 1.0);
        bump(u) / denom
    }

    /// The symbol λ ↦ η(λ/R), banded on [R/2, 2R].
    pub fn at_scale(&self, r_big: f64) -> Result<MultiplierSymbol> {
        let eta = *self;
        MultiplierSymbol::banded(move |l| Complex64::new(eta.eval(l / r_big), 0.0), 0.5 * r_big, 2.0 * r_big)
    }
}

pub fn make_eta() -> CutoffEta {
    CutoffEta
}

/// Sampling of a function compactly supported in [lo, hi] for [`sobolev_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevGrid {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub padding: usize,
}

impl Default for SobolevGrid {
    /// 2^14 samples on [1/4, 4], zero-padded 4×.
    fn default() -> Self {
        Self { lo: 0.25, hi: 4.0, samples: 1 << 14, padding: 4 }
    }
}

impl SobolevGrid {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.samples as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.samples).map(move |k| self.lo + (k as f64 + 0.5) * h)
    }
}

/// ‖g‖_{W^{2,β}} from samples at spacing `h`, computed with a zero-padded DFT.
/// The samples must cover the support of g: the first and last ones must be
/// negligible against the largest.
pub fn sobolev_norm(samples: &[Complex64], h: f64, beta: f64, padding: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("sample vector"));
    }
    if !(beta >= 0.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("need beta >= 0 and h > 0, got {beta}, {h}")));
    }
    let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = samples[0].norm().max(samples[samples.len() - 1].norm());
    if edge > 1e-12 * peak.max(f64::MIN_POSITIVE) && peak > 0.0 {
        return Err(Error::SupportNotContained(format!(
            "edge sample {edge:.3e} against peak {peak:.3e}"
        )));
    }
    let m = samples.len() * padding.max(1);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..samples.len()].copy_from_slice(samples);
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let dxi = 2.0 * std::f64::consts::PI / (m as f64 * h);
    let sum: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            let xi = kk * dxi;
            (1.0 + xi * xi).powf(beta) * g.norm_sqr()
        })
        .sum();
    Ok((h / m as f64 * sum).sqrt())
}

/// [`sobolev_norm`] of `g` sampled on `grid` (midpoints of its cells).
pub fn sobolev_norm_fn<G: Fn(f64) -> Complex64>(g: G, grid: SobolevGrid, beta: f64) -> Result<f64> {
    let samples: Vec<Complex64> = grid.nodes().map(g).collect();
    sobolev_norm(&samples, grid.step(), beta, grid.padding)
}

/// Result of [`hormander_norm`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HormanderEstimate {
    /// max over the t grid
    pub value: f64,
    pub argmax_t: f64,
    /// the same maximum over every other t
    pub coarse_value: f64,
    pub t_points: usize,
}

impl HormanderEstimate {
    pub fn refinement_change(&self) -> f64 {
        (self.value - self.coarse_value).abs() / self.value.max(f64::MIN_POSITIVE)
    }
}

/// Points per decade of the default t grids.
pub const T_POINTS_PER_DECADE: f64 = 30.0;

/// Default t range: (lo/2, 2·hi) for a symbol banded on [lo, hi] (outside it
/// η(·)m(t·) vanishes), [1e−6, 1e6] otherwise; 30 points per decade.
pub fn default_hormander_t_grid(m: &MultiplierSymbol) -> Vec<f64> {
    let (lo, hi) = match m.band() {
        Some((lo, hi)) => (0.5 * lo, 2.0 * hi),
        None => (1e-6, 1e6),
    };
    let n = ((hi / lo).log10() * T_POINTS_PER_DECADE).ceil() as usize + 1;
    geometric_grid(lo, hi, n.max(2))
}

/// max over t of ‖η(·) m(t·)‖_{W^{2,β}}: a lower estimate of the supremum.
pub fn hormander_norm(
    m: &MultiplierSymbol,
    beta: f64,
    t_grid: &[f64],
    grid: SobolevGrid,
) -> Result<HormanderEstimate> {
    if t_grid.is_empty() {
        return Err(Error::Empty("t grid"));
    }
    let eta = make_eta();
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| sobolev_norm_fn(|l| m.eval(t * l) * eta.eval(l), grid, beta))
        .collect::<Result<Vec<_>>>()?;
    let (k, value) = values
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let coarse_value = values.iter().step_by(2).cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(HormanderEstimate { value, argmax_t: t_grid[k], coarse_value, t_points: t_grid.len() })
}

/// m_j(λ) = η(2^{−j}λ) m(λ), banded on [2^{j−1}, 2^{j+1}].
pub fn dyadic_pieces(m: &MultiplierSymbol, j_range: std::ops::RangeInclusive<i32>) -> Result<Vec<MultiplierSymbol>> {
    let eta = make_eta();
    j_range
        .map(|j| {
            let s = 2f64.powi(j);
            let m = m.clone();
            MultiplierSymbol::banded(move |l| m.eval(l) * eta.eval(l / s), 0.5 * s, 2.0 * s)
        })
        .collect()
}
