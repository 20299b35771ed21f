//! Bessel functions of real order τ > −1 and real argument.
//!
//! `I_τ` uses the power series up to `x = max(15, τ²)` and the Hankel-type
//! asymptotic expansion of `e^{−x} I_τ(x)` beyond. `J_τ` uses the power series
//! for `x ≤ 2`, Miller's backward recurrence with the Neumann-sum
//! normalisation for moderate `x`, and the Hankel expansion once
//! `x ≥ max(25, 2τ²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::gamma::gamma_real;

/// Order of a Bessel function, with the Gamma values every evaluation needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder {
    tau: f64,
    gamma_tau_plus_one: f64,
    gamma_frac_plus_one: f64,
}

impl BesselOrder {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Bessel order must satisfy tau > -1, got {tau}"
            )));
        }
        let frac = tau - tau.floor();
        Ok(Self {
            tau,
            gamma_tau_plus_one: gamma_real(tau + 1.0)?,
            gamma_frac_plus_one: gamma_real(frac + 1.0)?,
        })
    }

    /// The order (α−1)/2 attached to the exponent α of the measure x^α dx.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must satisfy alpha > -1, got {alpha}"
            )));
        }
        Self::new((alpha - 1.0) / 2.0)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma_tau_plus_one(&self) -> f64 {
        self.gamma_tau_plus_one
    }

    /// Argument at which `bessel_i` leaves the power series.
    pub fn i_switch_point(&self) -> f64 {
        15f64.max(self.tau * self.tau)
    }

    fn j_asymptotic_threshold(&self) -> f64 {
        25f64.max(2.0 * self.tau * self.tau)
    }
}

/// Σ_m (z/2)^{2m} / (m! Γ(m+τ+1)), i.e. I_τ(z)(z/2)^{−τ}; `sign = −1` gives
/// the J counterpart.
fn reduced_series(order: &BesselOrder, z: f64, sign: f64) -> f64 {
    let q = sign * 0.25 * z * z;
    let mut term = 1.0 / order.gamma_tau_plus_one;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + order.tau));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && m * m > q.abs() {
            break;
        }
        if m > 500.0 {
            break;
        }
    }
    sum
}

/// e^{−x} I_τ(x) √(2πx) from the large-argument expansion.
fn i_asymptotic_core(tau: f64, x: f64) -> f64 {
    let mu = 4.0 * tau * tau;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let next = -term * (mu - (2.0 * k - 1.0f64).powi(2)) / (8.0 * k * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
    }
    sum
}

/// e^{−x} I_τ(x).
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    let tau = order.tau;
    if x == 0.0 {
        return zero_argument(tau, "I");
    }
    if x <= order.i_switch_point() {
        let s = reduced_series(&order, x, 1.0);
        Ok((tau * (0.5 * x).ln() - x).exp() * s)
    } else {
        Ok(i_asymptotic_core(tau, x) / (2.0 * PI * x).sqrt())
    }
}

/// I_τ(x). Overflows to an error for x ≳ 700; use [`bessel_i_scaled`] there.
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(order, x)?;
    let v = scaled * x.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "I_{}({x}) overflows; use bessel_i_scaled",
            order.tau
        )))
    }
}

/// e^{−z} I_τ(z) (z/2)^{−τ}. Finite and positive for every z ≥ 0, including
/// z → 0 with τ < 0; this is the factor the heat kernel needs.
pub fn bessel_i_reduced_scaled(order: BesselOrder, z: f64) -> f64 {
    if z <= order.i_switch_point() {
        (-z).exp() * reduced_series(&order, z, 1.0)
    } else {
        i_asymptotic_core(order.tau, z) / (2.0 * PI * z).sqrt() * (-order.tau * (0.5 * z).ln()).exp()
    }
}

/// J_τ(x).
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    let tau = order.tau;
    if x == 0.0 {
        return zero_argument(tau, "J");
    }
    if x <= 2.0 {
        return Ok(reduced_series(&order, x, -1.0) * (tau * (0.5 * x).ln()).exp());
    }
    if x >= order.j_asymptotic_threshold() {
        return Ok(j_asymptotic(tau, x));
    }
    Ok(j_miller(&order, x))
}

/// Γ(τ+1) (z/2)^{−τ} J_τ(z): an even entire function of z equal to 1 at 0.
pub fn bessel_j_reduced(order: BesselOrder, z: f64) -> f64 {
    let z = z.abs();
    if z <= 2.0 {
        return order.gamma_tau_plus_one * reduced_series(&order, z, -1.0);
    }
    let j = if z >= order.j_asymptotic_threshold() {
        j_asymptotic(order.tau, z)
    } else {
        j_miller(&order, z)
    };
    order.gamma_tau_plus_one * (-order.tau * (0.5 * z).ln()).exp() * j
}

fn check_argument(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    Ok(())
}

fn zero_argument(tau: f64, name: &str) -> Result<f64> {
    if tau == 0.0 {
        Ok(1.0)
    } else if tau > 0.0 {
        Ok(0.0)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name}_{tau}(0) is infinite for negative order"
        )))
    }
}

fn j_asymptotic(tau: f64, x: f64) -> f64 {
    let mu = 4.0 * tau * tau;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        // a_k / x^k enters P for even k and Q for odd k, with alternating signs
        match k % 4 {
            0 => p += next,
            1 => q += next,
            2 => p -= next,
            _ => q -= next,
        }
        term = next;
        if term.abs() < 1e-17 || k > 200 {
            break;
        }
    }
    let omega = x - (0.5 * tau + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

fn j_miller(order: &BesselOrder, x: f64) -> f64 {
    let tau = order.tau;
    let n_floor = tau.floor();
    let nu0 = tau - n_floor;
    let top = n_floor.max(0.0) as usize;
    let mut m_start = (x.ceil() as usize) + 40 + top;
    if m_start % 2 == 1 {
        m_start += 1;
    }
    // vals[k] ∝ J_{nu0+k}(x)
    let mut vals = vec![0.0f64; m_start + 2];
    vals[m_start] = 1e-30;
    for k in (1..=m_start).rev() {
        let next = 2.0 * (nu0 + k as f64) / x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // (x/2)^{nu0} = Γ(nu0+1) J_{nu0} + Σ_{k≥1} (nu0+2k) Γ(nu0+k)/k! J_{nu0+2k}
    let mut norm = order.gamma_frac_plus_one * vals[0];
    let mut r = order.gamma_frac_plus_one;
    let mut k = 1usize;
    while 2 * k <= m_start {
        if k > 1 {
            r *= (nu0 + k as f64 - 1.0) / k as f64;
        }
        norm += (nu0 + 2.0 * k as f64) * r * vals[2 * k];
        k += 1;
    }
    let scale = (nu0 * (0.5 * x).ln()).exp() / norm;
    if n_floor >= 0.0 {
        vals[top] * scale
    } else {
        (2.0 * nu0 / x * vals[0] - vals[1]) * scale
    }
}
