//! Brute-force numerical evaluation of the GN integrals.
//!
//! Nothing here reuses the closed-form algebra: the link function is
//! integrated directly from a profile evaluator, and the NLI efficiencies are
//! double integrals of that link function over the channel bandwidths.

mod eta;
mod filon;
mod identities;
mod table;

pub use eta::{
    eta_spm_direct, eta_spm_numeric, eta_total_numeric, eta_xpm_direct, eta_xpm_numeric, CutOracle, EtaEstimate,
    OracleOptions, OracleReport,
};
pub use filon::FilonTransform;
pub use identities::{verify_identities, IdentityCheck, IdentityReport};
pub use table::LinkTable;

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::profile::{eval_profile_taylor, ProfileParams};
use crate::quadrature::{integrate_vec, QuadratureSpec};

/// Normalized power `rho(z, f)` along a span.
pub trait ProfileEvaluator: Sync {
    fn rho(&self, z: f64, f: f64) -> f64;
}

/// `exp(-alpha z)` at every frequency.
#[derive(Debug, Clone, Copy)]
pub struct LossOnly {
    pub alpha: f64,
}

impl ProfileEvaluator for LossOnly {
    fn rho(&self, z: f64, _f: f64) -> f64 {
        (-self.alpha * z).exp()
    }
}

/// One channel's fitted profile, used for every frequency argument.
#[derive(Debug, Clone, Copy)]
pub struct FrozenProfile {
    pub params: ProfileParams,
    pub f_i: f64,
    pub length: f64,
}

impl ProfileEvaluator for FrozenProfile {
    fn rho(&self, z: f64, _f: f64) -> f64 {
        eval_profile_taylor(&self.params, z, self.f_i, self.length)
    }
}

/// One parameter set with its linear tilt evaluated at each frequency.
#[derive(Debug, Clone, Copy)]
pub struct TaylorProfile {
    pub params: ProfileParams,
    pub length: f64,
}

impl ProfileEvaluator for TaylorProfile {
    fn rho(&self, z: f64, f: f64) -> f64 {
        eval_profile_taylor(&self.params, z, f, self.length)
    }
}

/// Per-channel fits; a frequency uses the parameters of the nearest channel.
#[derive(Debug, Clone)]
pub struct GridProfile {
    pub frequencies: Vec<f64>,
    pub params: Vec<ProfileParams>,
    pub length: f64,
}

impl ProfileEvaluator for GridProfile {
    fn rho(&self, z: f64, f: f64) -> f64 {
        let idx = self.frequencies.partition_point(|c| *c < f);
        let nearest = match (idx.checked_sub(1), self.frequencies.get(idx)) {
            (Some(lo), Some(hi)) if (f - self.frequencies[lo]) <= (hi - f) => lo,
            (Some(lo), None) => lo,
            _ => idx.min(self.frequencies.len() - 1),
        };
        eval_profile_taylor(&self.params[nearest], z, f, self.length)
    }
}

/// Wraps a closure as an evaluator.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> ProfileEvaluator for FnProfile<F> {
    fn rho(&self, z: f64, f: f64) -> f64 {
        (self.0)(z, f)
    }
}

/// Remembers the first non-positive profile sample seen inside a quadrature.
#[derive(Default)]
pub(crate) struct NegativeGuard(Cell<Option<(f64, f64)>>);

impl NegativeGuard {
    pub(crate) fn check(&self, z: f64, value: f64) -> bool {
        if value > 0.0 {
            return true;
        }
        if self.0.get().is_none() {
            self.0.set(Some((z, value)));
        }
        false
    }

    pub(crate) fn result(&self) -> Result<()> {
        match self.0.get() {
            None => Ok(()),
            Some((zeta, value)) => Err(Error::NegativeProfile { zeta, value }),
        }
    }
}

/// Integrand `sqrt(rho(f1) rho(f2) rho(f1 + f2 - f_i) / rho(f_i))` at `z`.
pub(crate) fn fwm_amplitude(rho: &dyn ProfileEvaluator, guard: &NegativeGuard, z: f64, f1: f64, f2: f64, f_i: f64) -> f64 {
    let r1 = rho.rho(z, f1);
    let r2 = rho.rho(z, f2);
    let r3 = rho.rho(z, f1 + f2 - f_i);
    let ri = rho.rho(z, f_i);
    if guard.check(z, r1) && guard.check(z, r2) && guard.check(z, r3) && guard.check(z, ri) {
        (r1 * r2 * r3 / ri).sqrt()
    } else {
        0.0
    }
}

/// Link function by adaptive quadrature of the real and imaginary parts.
pub fn mu_numeric(
    f1: f64,
    f2: f64,
    f_i: f64,
    rho: &dyn ProfileEvaluator,
    phi: f64,
    length: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let guard = NegativeGuard::default();
    let pieces = ((phi.abs() * length / std::f64::consts::PI).ceil() as usize).clamp(1, spec.max_intervals / 2);
    let r = integrate_vec(
        |z| {
            let g = fwm_amplitude(rho, &guard, z, f1, f2, f_i);
            let (s, c) = (phi * z).sin_cos();
            [g * c, g * s]
        },
        0.0,
        length,
        pieces,
        spec,
    );
    guard.result()?;
    Ok(r.value[0] * r.value[0] + r.value[1] * r.value[1])
}
