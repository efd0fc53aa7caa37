//! Shared scenario builders for the benchmarks.

use drnli_core::{presets, FitReport, LinkConfig, ProfileParams, WdmGrid};

/// Reference fibre and pump carrying `count` 50 GHz channels.
pub fn dense_link(count: usize) -> LinkConfig {
    let mut link = presets::reference_link();
    link.grid = WdmGrid::uniform(count, presets::CENTER_FREQUENCY, 50e9, 50e9, 1e-3, 1);
    link
}

/// A fit that gives every channel the same pumped profile, so the closed
/// form can be timed without running the solver.
pub fn synthetic_fit(link: &LinkConfig) -> FitReport {
    let a = link.span.attenuation.at(presets::CENTER_FREQUENCY);
    let params = ProfileParams {
        alpha: a,
        c_f: link.span.raman_slope,
        c_b: link.span.raman_slope,
        alpha_f: a,
        alpha_b: link.pumps.first().map_or(a, |p| p.attenuation),
        p_f: link.forward_power(0),
        p_b: link.backward_power(),
        f_hat: link.mean_pump_frequency(),
    };
    let n = link.grid.len();
    FitReport {
        frequencies: link.grid.frequencies(),
        params: vec![params; n],
        rms_db: vec![0.0; n],
        iterations: vec![0; n],
        converged: vec![true; n],
    }
}
