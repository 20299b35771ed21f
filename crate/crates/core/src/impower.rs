//! Imaginary powers B^{ib} of the one-dimensional Bessel operator.
//!
//! The kernel is K_b(x, y) = Γ(−ib)^{−1} ∫₀^∞ t^{−ib} T_t(x, y) dt/t for x ≠ y.
//! Three evaluations are provided: the direct t-integral ([`kb_direct`]), the
//! Poisson-type representation for α > 0 ([`kb_integralrep`]), and a shifted
//! version of it valid for every α > −1 ([`kb_shifted_rep`]).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, QuadGrid};
use crate::heatkernel::HeatKernel1d;
use crate::quad;
use crate::specfun::{gamma_real, ln_gamma_complex, ln_gamma_real, recip_gamma_complex};

/// Largest |b| accepted by [`kb_direct`]. The t-integral is of size
/// e^{−π|b|/2} relative to its integrand and is then multiplied by 1/Γ(−ib),
/// so about π|b|/(2 ln 10) digits cancel: 8 of them at |b| = 12.
pub const DIRECT_CEILING: f64 = 12.0;

/// Largest |b| accepted by the s-integral representations.
pub const POISSON_CEILING: f64 = 60.0;

/// Relative gap |x − y| / (x + y) below which [`kb_direct`] refuses to run.
pub const DIAGONAL_FLOOR: f64 = 1e-3;

const NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImaginaryPowerParams {
    alpha: f64,
    b: f64,
}

impl ImaginaryPowerParams {
    /// b = 0 is accepted and stands for the identity operator.
    pub fn new(alpha: f64, b: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(Error::InvalidParameter(format!("alpha must exceed -1, got {alpha}")));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter(format!("b must be finite, got {b}")));
        }
        Ok(Self { alpha, b })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// γ = (α+1)/2
    fn gamma(&self) -> f64 {
        0.5 * (self.alpha + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CConstants {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

/// 2^{2ib+1} Γ(ib+a) / Γ(−ib), in log form so large |b| does not overflow.
fn mellin_factor(a: f64, b: f64) -> Result<Complex64> {
    if b == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ln = Complex64::new(0.0, 2.0 * b) * 2f64.ln() + 2f64.ln() + ln_gamma_complex(Complex64::new(a, b))?
        - ln_gamma_complex(Complex64::new(0.0, -b))?;
    Ok(ln.exp())
}

/// c₁ = 2^{2ib+1}Γ(ib+(α+1)/2)/(Γ((α+1)/2)Γ(−ib)), c₂ = 2^{2ib}Γ(ib+1/2)/(√π Γ(−ib)),
/// c₃ = 1/Γ(−ib). All vanish at b = 0.
pub fn c_constants(p: &ImaginaryPowerParams) -> Result<CConstants> {
    let g = p.gamma();
    let c1 = mellin_factor(g, p.b)? / gamma_real(g)?;
    let c2 = mellin_factor(0.5, p.b)? / (2.0 * PI.sqrt());
    let c3 = recip_gamma_complex(Complex64::new(0.0, -p.b));
    Ok(CConstants { c1, c2, c3 })
}

/// c₁ with Γ((α+1)/4) in place of Γ((α+1)/2). Kept only to measure how much
/// worse the decomposition residual gets with it.
pub fn c1_quarter_gamma_variant(p: &ImaginaryPowerParams) -> Result<Complex64> {
    Ok(mellin_factor(p.gamma(), p.b)? / gamma_real(0.5 * p.gamma())?)
}

fn check_point(x: f64, y: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0 && y.is_finite() && y > 0.0) {
        return Err(Error::InvalidParameter(format!("x and y must be positive, got ({x}, {y})")));
    }
    if x == y {
        return Err(Error::DiagonalFloor { gap: 0.0, floor: DIAGONAL_FLOOR * (x + y) });
    }
    Ok(())
}

/// z^w for z > 0 and complex w.
fn cpow(z: f64, w: Complex64) -> Complex64 {
    (w * z.ln()).exp()
}

/// Γ(−ib)^{−1} ∫ e^{−ibu} T_{e^u}(x, y) du. The part t ≤ (x−y)²/200 is dropped
/// (T carries e^{−50} there), [(x−y)²/200, x²+y²] is integrated by composite
/// Gauss–Legendre in u = ln t, and t > x²+y² by the power series of T in 1/t.
pub fn kb_direct(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<Complex64> {
    check_point(x, y)?;
    let gap = (x - y).abs();
    let floor = DIAGONAL_FLOOR * (x + y);
    if gap < floor {
        return Err(Error::DiagonalFloor { gap, floor });
    }
    let b = p.b;
    if b == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if b.abs() > DIRECT_CEILING {
        return Err(Error::QuadratureCeiling { b, ceiling: DIRECT_CEILING });
    }
    let kernel = HeatKernel1d::new(p.alpha)?;
    let big_p = x * x + y * y;
    let u_lo = (gap * gap / 200.0).ln();
    let u_hi = big_p.ln();
    let width = 0.25f64.min(2.0 / b.abs());
    let panels = ((u_hi - u_lo) / width).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=panels).map(|k| u_lo + (u_hi - u_lo) * k as f64 / panels as f64).collect();
    let body = quad::composite(&breaks, NODES, |u| Complex64::new(0.0, -b * u).exp() * kernel.eval(u.exp(), x, y));
    let tail = direct_tail(p, x, y)?;
    Ok(recip_gamma_complex(Complex64::new(0.0, -b)) * (body + tail))
}

/// ∫_{t > P} t^{−ib} T_t dt/t with P = x²+y². In s = 1/(4t), T = 2 s^γ F(s)
/// with F(s) = e^{−Ps} Σ_m (xys)^{2m}/(m! Γ(m+τ+1)), so the integral is
/// 2·4^{ib} Σ_n a_n s₀^{n+γ+ib}/(n+γ+ib), s₀ = 1/(4P).
fn direct_tail(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<Complex64> {
    const TERMS: usize = 48;
    let g = p.gamma();
    let tau = g - 1.0;
    let big_p = x * x + y * y;
    let s0 = 0.25 / big_p;
    // coefficients already multiplied by s₀^n
    let mut even = vec![0.0; TERMS / 2 + 1];
    even[0] = 1.0 / gamma_real(tau + 1.0)?;
    let q = (x * y * s0).powi(2);
    for m in 1..even.len() {
        even[m] = even[m - 1] * q / (m as f64 * (m as f64 + tau));
    }
    let mut expo = vec![1.0; TERMS + 1];
    for k in 1..=TERMS {
        expo[k] = expo[k - 1] * (-0.25) / k as f64;
    }
    let w = Complex64::new(g, p.b);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for n in 0..=TERMS {
        let a: f64 = (0..=n / 2).map(|m| even[m] * expo[n - 2 * m]).sum();
        let term = a / (w + n as f64);
        sum += term;
        last = term.norm();
    }
    if last > 1e-17 * sum.norm() {
        return Err(Error::NonConvergence(format!("tail series at (x, y) = ({x}, {y})")));
    }
    Ok(2.0 * cpow(4.0, Complex64::new(0.0, p.b)) * cpow(s0, w) * sum)
}

/// The leading terms of K_b and what is left over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelDecomposition {
    /// c₁ (x²+y²)^{−ib−(α+1)/2}
    pub term1: Complex64,
    /// c₂ (xy)^{−α/2} |x−y|^{−2ib−1} on y/2 < x < 2y, zero elsewhere
    pub term2: Complex64,
    /// xy (x+y)^{−α−3}
    pub remainder_bound: f64,
    /// kb_direct − term1 − term2
    pub remainder_measured: Complex64,
}

pub fn local_region(x: f64, y: f64) -> bool {
    0.5 * y < x && x < 2.0 * y
}

fn main_terms(p: &ImaginaryPowerParams, c1: Complex64, c2: Complex64, x: f64, y: f64) -> (Complex64, Complex64) {
    let b = p.b;
    let term1 = c1 * cpow(x * x + y * y, Complex64::new(-p.gamma(), -b));
    let term2 = if local_region(x, y) {
        c2 * (x * y).powf(-0.5 * p.alpha) * cpow((x - y).abs(), Complex64::new(-1.0, -2.0 * b))
    } else {
        Complex64::new(0.0, 0.0)
    };
    (term1, term2)
}

/// (term1, term2) of [`KernelDecomposition`] without the direct evaluation,
/// for constants `c` from [`c_constants`].
pub fn kb_main_terms(p: &ImaginaryPowerParams, c: &CConstants, x: f64, y: f64) -> Result<(Complex64, Complex64)> {
    check_point(x, y)?;
    Ok(main_terms(p, c.c1, c.c2, x, y))
}

pub fn kb_decomposed(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<KernelDecomposition> {
    let c = c_constants(p)?;
    decompose_with(p, c.c1, c.c2, x, y)
}

/// [`kb_decomposed`] with [`c1_quarter_gamma_variant`] in term1.
pub fn kb_decomposed_quarter_gamma(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<KernelDecomposition> {
    let c = c_constants(p)?;
    decompose_with(p, c1_quarter_gamma_variant(p)?, c.c2, x, y)
}

fn decompose_with(p: &ImaginaryPowerParams, c1: Complex64, c2: Complex64, x: f64, y: f64) -> Result<KernelDecomposition> {
    let direct = kb_direct(p, x, y)?;
    let (term1, term2) = main_terms(p, c1, c2, x, y);
    Ok(KernelDecomposition {
        term1,
        term2,
        remainder_bound: x * y * (x + y).powf(-p.alpha - 3.0),
        remainder_measured: direct - term1 - term2,
    })
}

/// {2^{j/k}} ∩ (0.1, 10) together with 0.1 and 10. Doubling k keeps every
/// point.
pub fn kernel_lattice(k: usize) -> Vec<f64> {
    let k = k.max(1) as f64;
    let hi = (10f64.log2() * k).ceil() as i64;
    let mut pts = vec![0.1];
    pts.extend((-hi..=hi).map(|j| 2f64.powf(j as f64 / k)).filter(|&x| x > 0.1 && x < 10.0));
    pts.push(10.0);
    pts
}

/// sup of |K_b − term1 − term2| / (|c₃| xy(x+y)^{−α−3}) over pairs of
/// [`kernel_lattice`]`(k)` outside the diagonal floor; `quarter` swaps in
/// [`c1_quarter_gamma_variant`].
pub fn remainder_ratio_sup(p: &ImaginaryPowerParams, k: usize, quarter: bool) -> Result<f64> {
    let c3 = c_constants(p)?.c3.norm();
    let pts = kernel_lattice(k);
    let mut sup = 0.0f64;
    for &x in &pts {
        for &y in &pts {
            if (x - y).abs() < DIAGONAL_FLOOR * (x + y) {
                continue;
            }
            let d = if quarter { kb_decomposed_quarter_gamma(p, x, y)? } else { kb_decomposed(p, x, y)? };
            sup = sup.max(d.remainder_measured.norm() / (c3 * d.remainder_bound));
        }
    }
    Ok(sup)
}

/// ∫_{−1}^{1} Q^{−ib−γ} (1−s²)^a ds, Q = x²+y²+2xys, for each (γ, a).
///
/// In σ = 1+s, Q = (x−y)² + 2xyσ. Panels grow so that ln Q moves by at most
/// min(1, 1.5/|b|) across each, which grades them geometrically away from
/// σ = 0 when x ≈ y and bounds the phase of Q^{−ib} per panel. The end panels
/// carry σ^a and (2−σ)^a in Gauss–Jacobi weights.
fn poisson_integrals(x: f64, y: f64, b: f64, pairs: &[(f64, f64)]) -> Vec<Complex64> {
    let d2 = (x - y) * (x - y);
    let xy2 = 2.0 * x * y;
    let q = |sigma: f64| d2 + xy2 * sigma;
    let ratio = (1.5 / b.abs().max(1.5)).exp();
    let mut breaks = vec![0.0];
    let mut s = 0.0;
    while s < 2.0 {
        let grown = (q(s) * ratio - d2) / xy2;
        s = grown.min(s + 0.25).min(2.0);
        if 2.0 - s < 1e-3 {
            s = 2.0;
        }
        breaks.push(s);
    }
    // a short last panel would leave the (2−σ)^a singularity next to a wide
    // Legendre panel: share the last two panels evenly
    let n = breaks.len();
    if n >= 3 {
        breaks[n - 2] = 0.5 * (breaks[n - 3] + 2.0);
    }
    let integrand = |sigma: f64, g: f64| -> Complex64 { cpow(q(sigma), Complex64::new(-g, -b)) };
    let last = breaks.len() - 2;
    let mut sums = vec![Complex64::new(0.0, 0.0); pairs.len()];
    // interior panels: Q^{−ib} is shared by every pair
    let legendre = quad::legendre(NODES);
    for w in breaks[1..=last].windows(2) {
        for (sigma, wt) in legendre.mapped(w[0], w[1]) {
            let lq = q(sigma).ln();
            let osc = Complex64::from_polar(wt, -b * lq);
            let bulk = (sigma * (2.0 - sigma)).ln();
            for (sum, &(g, a)) in sums.iter_mut().zip(pairs) {
                *sum += osc * (a * bulk - g * lq).exp();
            }
        }
    }
    for (sum, &(g, a)) in sums.iter_mut().zip(pairs) {
        if last == 0 {
            // single panel: only happens for degenerate inputs
            let both = quad::jacobi(NODES, a, a);
            for (&t, &wt) in both.nodes.iter().zip(&both.weights) {
                *sum += integrand(1.0 + t, g) * wt;
            }
            continue;
        }
        let (lo, hi) = (breaks[0], breaks[1]);
        let half = 0.5 * (hi - lo);
        let scale = half.powf(a + 1.0);
        let left = quad::jacobi(NODES, 0.0, a);
        for (&t, &wt) in left.nodes.iter().zip(&left.weights) {
            let sigma = lo + half * (1.0 + t);
            *sum += integrand(sigma, g) * ((2.0 - sigma).powf(a) * wt * scale);
        }
        let (lo, hi) = (breaks[last], breaks[last + 1]);
        let half = 0.5 * (hi - lo);
        let scale = half.powf(a + 1.0);
        let right = quad::jacobi(NODES, a, 0.0);
        for (&t, &wt) in right.nodes.iter().zip(&right.weights) {
            let sigma = lo + half * (1.0 + t);
            *sum += integrand(sigma, g) * (sigma.powf(a) * wt * scale);
        }
    }
    sums
}


fn check_poisson(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<()> {
    check_point(x, y)?;
    if p.b.abs() > POISSON_CEILING {
        return Err(Error::QuadratureCeiling { b: p.b, ceiling: POISSON_CEILING });
    }
    Ok(())
}

/// C_α c₁ ∫_{−1}^{1} (x²+y²+2xys)^{−ib−(α+1)/2} (1−s²)^{α/2−1} ds with
/// C_α = Γ((α+1)/2)/(√π Γ(α/2)). Needs α > 0.
pub fn kb_integralrep(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<Complex64> {
    if p.alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!("the integral representation needs alpha > 0, got {}", p.alpha)));
    }
    check_poisson(p, x, y)?;
    if p.b == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = p.gamma();
    let c_alpha = (ln_gamma_real(g)? - ln_gamma_real(0.5 * p.alpha)?).exp() / PI.sqrt();
    let s = poisson_integrals(x, y, p.b, &[(g, 0.5 * p.alpha - 1.0)])[0];
    Ok(c_constants(p)?.c1 * c_alpha * s)
}

/// The same kernel for any α > −1, from I_τ = 2(τ+1)z^{−1} I_{τ+1} + I_{τ+2}:
/// K_b = 2^{2ib+1}/Γ(−ib) [Γ(ib+γ) γ/(√π Γ(α/2+1)) P(γ, α/2)
///       + (xy)² Γ(ib+γ+2)/(√π Γ(α/2+2)) P(γ+2, α/2+1)],
/// P(g, a) = ∫_{−1}^{1} Q^{−ib−g} (1−s²)^a ds, γ = (α+1)/2.
pub fn kb_shifted_rep(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<Complex64> {
    check_poisson(p, x, y)?;
    if p.b == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = p.gamma();
    let a = 0.5 * p.alpha;
    let s = poisson_integrals(x, y, p.b, &[(g, a), (g + 2.0, a + 1.0)]);
    let k1 = mellin_factor(g, p.b)? * (g / (PI.sqrt() * gamma_real(a + 1.0)?)) * s[0];
    let k2 = mellin_factor(g + 2.0, p.b)? * ((x * y).powi(2) / (PI.sqrt() * gamma_real(a + 2.0)?)) * s[1];
    Ok(k1 + k2)
}

/// Which evaluation [`kernel`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelRoute {
    IntegralRep,
    Direct,
    ShiftedRep,
}

/// [`kb_integralrep`] for α > 0, [`kb_direct`] for α ≤ 0 up to its ceiling,
/// [`kb_shifted_rep`] beyond it.
pub fn kernel_route(p: &ImaginaryPowerParams) -> KernelRoute {
    if p.alpha > 0.0 {
        KernelRoute::IntegralRep
    } else if p.b.abs() <= DIRECT_CEILING {
        KernelRoute::Direct
    } else {
        KernelRoute::ShiftedRep
    }
}

/// K_b(x, y) along [`kernel_route`].
pub fn kernel(p: &ImaginaryPowerParams, x: f64, y: f64) -> Result<Complex64> {
    match kernel_route(p) {
        KernelRoute::IntegralRep => kb_integralrep(p, x, y),
        KernelRoute::Direct => kb_direct(p, x, y),
        KernelRoute::ShiftedRep => kb_shifted_rep(p, x, y),
    }
}

/// x ↦ ∫ K_b(x, y) f(y) dν(y) on the nodes of `eval`, which must avoid the
/// closed hull of the nodes where f is nonzero.
pub fn impower_apply(p: &ImaginaryPowerParams, f: &GridFunction, eval: &Arc<QuadGrid>) -> Result<GridFunction> {
    let src = f.grid();
    if src.dim() != 1 || eval.dim() != 1 {
        return Err(Error::GridMismatch("imaginary powers are one-dimensional".into()));
    }
    if src.axes()[0].alpha() != p.alpha || eval.axes()[0].alpha() != p.alpha {
        return Err(Error::GridMismatch(format!("grids must carry alpha = {}", p.alpha)));
    }
    let axis = &src.axes()[0];
    let support: Vec<(f64, Complex64)> = axis
        .nodes()
        .iter()
        .zip(axis.weights())
        .zip(f.values())
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|((&y, &w), &v)| (y, v * w))
        .collect();
    let xs = eval.axes()[0].nodes();
    if let (Some(first), Some(last)) = (support.first(), support.last()) {
        if let Some(&x) = xs.iter().find(|&&x| x >= first.0 && x <= last.0) {
            return Err(Error::SupportOverlap(x));
        }
    }
    let values = xs
        .par_iter()
        .map(|&x| {
            if p.b == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            support.iter().try_fold(Complex64::new(0.0, 0.0), |acc, &(y, wv)| Ok(acc + kernel(p, x, y)? * wv))
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(eval.clone(), values)
}
