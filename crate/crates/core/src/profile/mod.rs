//! Semi-analytical normalized power profile and its least-squares fit.
//!
//! ```text
//! rho(z, f) = exp(-a z) [1 - (C_f P_f Leff(z) + C_b P_b Lbw(z)) (f - f_hat)]
//! Leff(z)   = (1 - exp(-a_f z)) / a_f
//! Lbw(z)    = (exp(-a_b (L - z)) - exp(-a_b L)) / a_b
//! ```

mod fit;

pub use fit::{fit_profile, fit_profile_with, FitOptions, FitReport};

use serde::{Deserialize, Serialize};

/// Fitted profile of one channel plus the shared pump context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    /// Signal attenuation (1/m).
    pub alpha: f64,
    /// Forward tilt slope (1/(W·m·Hz)).
    pub c_f: f64,
    /// Backward tilt slope (1/(W·m·Hz)).
    pub c_b: f64,
    /// Forward extinction rate (1/m).
    pub alpha_f: f64,
    /// Backward extinction rate (1/m).
    pub alpha_b: f64,
    /// Total forward launch power, channels plus forward pumps (W).
    pub p_f: f64,
    /// Total backward pump power (W).
    pub p_b: f64,
    /// Mean pump frequency, or the band centre without pumps (Hz).
    pub f_hat: f64,
}

impl ProfileParams {
    /// Pure loss at rate `alpha`.
    pub fn lossy(alpha: f64, f_hat: f64) -> Self {
        ProfileParams {
            alpha,
            c_f: 0.0,
            c_b: 0.0,
            alpha_f: alpha,
            alpha_b: alpha,
            p_f: 0.0,
            p_b: 0.0,
            f_hat,
        }
    }

    /// Forward effective length `(1 - exp(-a_f z)) / a_f`.
    pub fn l_eff(&self, z: f64) -> f64 {
        -(-self.alpha_f * z).exp_m1() / self.alpha_f
    }

    /// Backward effective length `(exp(-a_b (L - z)) - exp(-a_b L)) / a_b`.
    pub fn l_eff_backward(&self, z: f64, length: f64) -> f64 {
        (-self.alpha_b * length).exp() * (self.alpha_b * z).exp_m1() / self.alpha_b
    }

    /// Tilt exponent `x(z) = C_f P_f Leff + C_b P_b Lbw`.
    pub fn tilt(&self, z: f64, length: f64) -> f64 {
        self.c_f * self.p_f * self.l_eff(z) + self.c_b * self.p_b * self.l_eff_backward(z, length)
    }
}

/// First-order (linear tilt) profile.
pub fn eval_profile_taylor(params: &ProfileParams, z: f64, f_i: f64, length: f64) -> f64 {
    let x = params.tilt(z, length);
    (-params.alpha * z).exp() * (1.0 - x * (f_i - params.f_hat))
}

/// Exponential-tilt profile for a flat spectrum of total width `bandwidth`.
pub fn eval_profile_exact(params: &ProfileParams, z: f64, f_i: f64, length: f64, bandwidth: f64) -> f64 {
    let x = params.tilt(z, length);
    let xb = x * bandwidth;
    let norm = if xb.abs() < 1e-6 {
        1.0 - xb * xb / 24.0
    } else {
        xb / (2.0 * (xb / 2.0).sinh())
    };
    (-params.alpha * z).exp() * norm * (-x * (f_i - params.f_hat)).exp()
}
