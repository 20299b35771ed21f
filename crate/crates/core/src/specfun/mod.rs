//! Special functions: complex Gamma, and Bessel I and J of real order.

mod bessel;
mod gamma;

pub use bessel::{
    bessel_i, bessel_i_reduced_scaled, bessel_i_scaled, bessel_j, bessel_j_reduced, BesselOrder,
};
pub use gamma::{
    gamma_complex, gamma_modulus_ratio, gamma_quotient_modulus, gamma_real, ln_gamma_complex,
    ln_gamma_real, recip_gamma_complex,
};

/// Complex numbers used throughout the crate.
pub type ComplexValue = num_complex::Complex64;
