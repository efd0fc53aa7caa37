//! Nonlinear-interference SNR of wideband WDM links with distributed Raman
//! amplification.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: channels, pumps, fibre, units and validation.
//! * [`raman`]: RK4 solution of the coupled Raman power equations.
//! * [`profile`]: the semi-analytical power profile and its per-channel fit.
//! * [`closed_form`]: closed-form link function, XPM/SPM efficiencies and the
//!   SNR budget.
//! * [`oracle`] and [`quadrature`]: brute-force numerical integration used to
//!   check the closed form, plus the integral identity suite.
//! * [`scenario`], [`pipeline`], [`report`]: scenario files and the end-to-end
//!   workflows behind the `drnli` command.

// Tabulated quadrature nodes carry full published precision, and `!(x > 0.0)`
// is used on purpose so that NaN is rejected.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod presets;
pub mod profile;
pub mod quadrature;
pub mod raman;
pub mod report;
pub mod scenario;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
pub use closed_form::{
    assemble_snr, closed_form_terms, eta_spm, eta_total, eta_xpm_pair, mu_closed, phase_mismatch, ClosedFormTerms,
    NliReport, PhaseMismatch,
};
pub use profile::{eval_profile_exact, eval_profile_taylor, fit_profile, FitOptions, FitReport, ProfileParams};
pub use oracle::{eta_total_numeric, mu_numeric, verify_identities, OracleOptions, OracleReport};
pub use raman::{normalized_profile, solve_power_evolution, PowerEvolution, SolverOptions};
pub use scenario::{parse_scenario, parse_scenario_str, Scenario};
pub use spectral::{
    convert_units, validate_link, Attenuation, BudgetValues, Channel, Diagnostics, FiberSpan, LinkConfig, Pump,
    PumpDirection, RamanGain, SnrBudget, Unit, WdmGrid,
};
