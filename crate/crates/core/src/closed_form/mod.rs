//! Closed-form ISRS GN model with a fitted Raman profile.
//!
//! Substituting the fitted profile of the channel under test expands it into
//! three exponentials, indexed by `(l1, l2)`:
//!
//! ```text
//! rho(z) = sum_l Y_l k_b,l exp(-a_l z)
//! ```
//!
//! and every quantity below is a double sum over pairs of those branches.

mod nli;

pub use nli::{assemble_snr, eta_spm, eta_total, eta_xpm_pair, eta_xpm_pairs, NliReport};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProfileParams;
use crate::spectral::FiberSpan;

const MIN_TILT: f64 = 1e-12;
pub(crate) const MIN_PHI_IK: f64 = 1e-30;

/// One exponential branch of the profile expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub l1: u8,
    pub l2: u8,
    pub upsilon: f64,
    pub alpha_l: f64,
    pub kappa_f: f64,
    pub kappa_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTerms {
    pub t_f: f64,
    pub t_b: f64,
    pub t_total: f64,
    /// Branches `(0,0)`, `(1,0)` and `(0,1)`, in that order.
    pub branches: [Branch; 3],
}

impl ClosedFormTerms {
    /// Branches with a non-zero weight; the others drop out of every sum.
    pub fn active(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|b| b.upsilon != 0.0)
    }

    /// Profile rebuilt from the branches: `sum Y k_b exp(-a_l z)`.
    pub fn profile(&self, z: f64) -> f64 {
        self.branches
            .iter()
            .map(|b| b.upsilon * b.kappa_b * (-b.alpha_l * z).exp())
            .sum()
    }
}

pub fn closed_form_terms(params: &ProfileParams, f_i: f64, length: f64) -> Result<ClosedFormTerms> {
    let df = f_i - params.f_hat;
    let t_f = -params.p_f * params.c_f * df / params.alpha_f;
    let t_b = -params.p_b * params.c_b * df / params.alpha_b;
    let e_b = (-params.alpha_b * length).exp();
    let t = 1.0 + t_f - t_b * e_b;
    if !(t.abs() >= MIN_TILT) {
        return Err(Error::DegenerateTilt { t, frequency: f_i });
    }
    let branch = |l1: u8, l2: u8, upsilon: f64| {
        let (l1f, l2f) = (f64::from(l1), f64::from(l2));
        Branch {
            l1,
            l2,
            upsilon,
            alpha_l: params.alpha + l1f * params.alpha_f - l2f * params.alpha_b,
            kappa_f: (-(params.alpha + l1f * params.alpha_f) * length).exp(),
            kappa_b: (-l2f * params.alpha_b * length).exp(),
        }
    };
    Ok(ClosedFormTerms {
        t_f,
        t_b,
        t_total: t,
        branches: [branch(0, 0, t), branch(1, 0, -t_f), branch(0, 1, t_b)],
    })
}

/// Dispersion phase factors; frequencies are taken relative to the span's
/// dispersion reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMismatch {
    /// `-4 pi^2 (b2 + 2 pi b3 f_i)` (s²/m).
    pub phi_i: f64,
    /// `-4 pi^2 (f_k - f_i) (b2 + pi b3 (f_i + f_k))` (s/m).
    pub phi_ik: Option<f64>,
}

pub fn phi_i(span: &FiberSpan, f_i: f64) -> f64 {
    let fi = f_i - span.dispersion_reference;
    -4.0 * PI2 * (span.beta2 + 2.0 * std::f64::consts::PI * span.beta3 * fi)
}

pub fn phi_ik(span: &FiberSpan, f_i: f64, f_k: f64) -> f64 {
    let fi = f_i - span.dispersion_reference;
    let fk = f_k - span.dispersion_reference;
    -4.0 * PI2 * (fk - fi) * (span.beta2 + std::f64::consts::PI * span.beta3 * (fi + fk))
}

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

pub fn phase_mismatch(span: &FiberSpan, f_i: f64, f_k: Option<f64>) -> Result<PhaseMismatch> {
    let phi_ik = match f_k {
        Some(f_k) => {
            let p = phi_ik(span, f_i, f_k);
            if !(p.abs() >= MIN_PHI_IK) {
                return Err(Error::DegenerateDispersion { phi: p, f_i, f_k });
            }
            Some(p)
        }
        None => None,
    };
    Ok(PhaseMismatch {
        phi_i: phi_i(span, f_i),
        phi_ik,
    })
}

fn check_denominator(d: f64, what: &str) -> Result<f64> {
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::DegenerateDenominator(format!("{what} = {d:e}")))
    }
}

/// Closed-form link function `|int_0^L rho e^{j phi z} dz|^2` (m²).
pub fn mu_closed(terms: &ClosedFormTerms, phi: f64, length: f64) -> Result<f64> {
    let (c, s) = ((phi * length).cos(), (phi * length).sin());
    let phi2 = phi * phi;
    let mut mu = 0.0;
    for a in terms.active() {
        let da = denominator(a, phi2)?;
        for b in terms.active() {
            let db = denominator(b, phi2)?;
            let p = a.alpha_l * b.alpha_l + phi2;
            let q = (a.alpha_l - b.alpha_l) * phi;
            let same = a.kappa_f * b.kappa_f + a.kappa_b * b.kappa_b;
            let cross = a.kappa_f * b.kappa_b + a.kappa_b * b.kappa_f;
            let skew = a.kappa_f * b.kappa_b - a.kappa_b * b.kappa_f;
            mu += a.upsilon * b.upsilon * (same * p - cross * p * c - skew * q * s) / (da * db);
        }
    }
    Ok(mu)
}

fn denominator(b: &Branch, phi2: f64) -> Result<f64> {
    check_denominator(b.alpha_l * b.alpha_l + phi2, "alpha_l^2 + phi^2")
}

/// Link function as the squared modulus of a sum of complex branch integrals.
pub fn mu_closed_complex(terms: &ClosedFormTerms, phi: f64, length: f64) -> Result<f64> {
    let e = Complex64::from_polar(1.0, phi * length);
    let mut sum = Complex64::new(0.0, 0.0);
    for b in terms.active() {
        let d = Complex64::new(-b.alpha_l, phi);
        check_denominator(d.norm_sqr(), "alpha_l^2 + phi^2")?;
        sum += b.upsilon * (b.kappa_f * e - b.kappa_b) / d;
    }
    Ok(sum.norm_sqr())
}

/// Link function with `T^2` factored out of the branch weights.
pub fn mu_closed_factored(terms: &ClosedFormTerms, phi: f64, length: f64) -> Result<f64> {
    let t = terms.t_total;
    let ratio = |b: &Branch| (-terms.t_f / t).powi(b.l1 as i32) * (terms.t_b / t).powi(b.l2 as i32);
    let (c, s) = ((phi * length).cos(), (phi * length).sin());
    let phi2 = phi * phi;
    let mut sum = 0.0;
    for a in &terms.branches {
        for b in &terms.branches {
            let w = ratio(a) * ratio(b);
            if w == 0.0 {
                continue;
            }
            let da = denominator(a, phi2)?;
            let db = denominator(b, phi2)?;
            let p = a.alpha_l * b.alpha_l + phi2;
            let q = (a.alpha_l - b.alpha_l) * phi;
            let same = a.kappa_f * b.kappa_f + a.kappa_b * b.kappa_b;
            let cross = a.kappa_f * b.kappa_b + a.kappa_b * b.kappa_f;
            let skew = a.kappa_f * b.kappa_b - a.kappa_b * b.kappa_f;
            sum += w * (same * p - cross * p * c - skew * q * s) / (da * db);
        }
    }
    Ok(t * t * sum)
}

/// `sign(x)` with `sign(0) = 0`.
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
