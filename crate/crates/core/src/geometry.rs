//! The space (0,∞)^N with dν(x) = x₁^{α₁}⋯x_N^{α_N} dx and Euclidean balls.

use serde::Serialize;

use crate::error::{Error, Result};

/// Dimension N = `alpha.len()` and the exponents of the measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselParams {
    alpha: Vec<f64>,
}

impl BesselParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Empty("alpha vector"));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > -1.0)) {
            return Err(Error::InvalidParameter(format!("every alpha_j must exceed -1, got {a}")));
        }
        Ok(Self { alpha })
    }

    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(vec![alpha])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidParameter("ball center must be strictly positive".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// d = Σ_j max(1, α_j + 1).
pub fn homogeneous_dimension(params: &BesselParams) -> f64 {
    params.alpha.iter().map(|a| (a + 1.0).max(1.0)).sum()
}

/// ν_j of the interval (x−r, x+r) ∩ (0,∞).
pub fn interval_measure(alpha: f64, x: f64, r: f64) -> f64 {
    let e = alpha + 1.0;
    let lo = (x - r).max(0.0);
    if lo == 0.0 {
        return (x + r).powf(e) / e;
    }
    // (x+r)^e − (x−r)^e without cancellation for small r/x
    lo.powf(e) * (e * (2.0 * r / lo).ln_1p()).exp_m1() / e
}

/// ν(B) together with whether it is exact (N = 1) or the product of the
/// coordinate interval measures, which is comparable to ν(B) up to constants
/// depending on N only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallMeasure {
    pub value: f64,
    pub exact: bool,
}

pub fn ball_measure(params: &BesselParams, ball: &Ball) -> Result<BallMeasure> {
    if ball.center.len() != params.dim() {
        return Err(Error::InvalidParameter(format!(
            "ball in dimension {} for parameters in dimension {}",
            ball.center.len(),
            params.dim()
        )));
    }
    let value = params
        .alpha
        .iter()
        .zip(&ball.center)
        .map(|(&a, &x)| interval_measure(a, x, ball.radius))
        .product();
    Ok(BallMeasure { value, exact: params.dim() == 1 })
}

/// R^{(α+1)/2} (1 + √R·y)^{−α}, comparable to ν_j(B(y, R^{−1/2}))^{−1}.
pub fn one_dim_ball_asymptotic(alpha: f64, y: f64, r_big: f64) -> f64 {
    r_big.powf(0.5 * (alpha + 1.0)) * (1.0 + r_big.sqrt() * y).powf(-alpha)
}

/// A probe for the doubling inequality: the ball B(x, r) and a dilation γ.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublingProbe {
    pub ball: Ball,
    pub gamma: f64,
}

/// Probes with centers 2^k (k in `centers`, same value in every coordinate),
/// radii 2^m and the given dilations.
pub fn doubling_probe_grid(
    dim: usize,
    centers: std::ops::RangeInclusive<i32>,
    radii: std::ops::RangeInclusive<i32>,
    gammas: &[f64],
) -> Vec<DoublingProbe> {
    let mut out = Vec::new();
    for k in centers {
        for m in radii.clone() {
            for &gamma in gammas {
                let ball = Ball::new(vec![2f64.powi(k); dim], 2f64.powi(m)).expect("positive");
                out.push(DoublingProbe { ball, gamma });
            }
        }
    }
    out
}

/// sup over probes of ν(B(x,γr)) / ((1+γ)^d ν(B(x,r))), with d the
/// homogeneous dimension unless `dim_override` is given.
pub fn doubling_constant_probe(
    params: &BesselParams,
    probes: &[DoublingProbe],
    dim_override: Option<f64>,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Empty("doubling probe grid"));
    }
    let d = dim_override.unwrap_or_else(|| homogeneous_dimension(params));
    let mut sup = 0.0f64;
    for p in probes {
        if !(p.gamma.is_finite() && p.gamma >= 1.0) {
            return Err(Error::InvalidParameter(format!("dilation must be >= 1, got {}", p.gamma)));
        }
        let small = ball_measure(params, &p.ball)?.value;
        let big = ball_measure(params, &Ball::new(p.ball.center.clone(), p.gamma * p.ball.radius)?)?.value;
        sup = sup.max(big / ((1.0 + p.gamma).powf(d) * small));
    }
    Ok(sup)
}
