//! Per-channel Levenberg–Marquardt fit of the profile in the dB domain.

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ProfileParams;
use crate::error::{Error, Result};
use crate::raman::{normalized_profile, PowerEvolution};
use crate::spectral::LinkConfig;

const DB: f64 = 10.0 / std::f64::consts::LN_10;
const MIN_SAMPLES: usize = 50;

type Vec5 = SVector<f64, 5>;
type Mat5 = SMatrix<f64, 5, 5>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Initial guess in units of the physical values
    /// `[alpha, C_f, C_b, alpha_f, alpha_b]`.
    pub initial: [f64; 5],
    pub rate_bounds: (f64, f64),
    pub slope_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            initial: [1.0; 5],
            rate_bounds: (0.2, 5.0),
            slope_bounds: (-10.0, 10.0),
        }
    }
}

/// Fitted parameters and residuals of every channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub frequencies: Vec<f64>,
    pub params: Vec<ProfileParams>,
    /// RMS residual over the z samples (dB).
    pub rms_db: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

impl FitReport {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn max_rms_db(&self) -> f64 {
        self.rms_db.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit report serializes")
    }
}

pub fn fit_profile(evolution: &PowerEvolution, config: &LinkConfig) -> Result<FitReport> {
    fit_profile_with(evolution, config, &FitOptions::default())
}

pub fn fit_profile_with(evolution: &PowerEvolution, config: &LinkConfig, options: &FitOptions) -> Result<FitReport> {
    if evolution.channel_count != config.grid.len() {
        return Err(Error::InvalidInput(format!(
            "evolution has {} channels, configuration has {}",
            evolution.channel_count,
            config.grid.len()
        )));
    }
    if evolution.z_grid.len() < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "profile fit needs at least {MIN_SAMPLES} z samples, got {}",
            evolution.z_grid.len()
        )));
    }
    let context = Context {
        p_f: config.forward_power(0),
        p_b: config.backward_power(),
        f_hat: config.mean_pump_frequency(),
        c_r: config.span.raman_slope,
        length: config.span.length,
    };

    let mut targets = Vec::with_capacity(config.grid.len());
    for (i, ch) in config.grid.channels.iter().enumerate() {
        let rho = normalized_profile(evolution, i)?;
        if let Some(m) = rho.iter().position(|r| !(*r > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "normalized power of channel {i} is not positive at z = {:.6e} m",
                evolution.z_grid[m]
            )));
        }
        let db: Vec<f64> = rho.iter().map(|r| DB * r.ln()).collect();
        targets.push((ch.center_frequency, config.span.attenuation.at(ch.center_frequency), db));
    }

    let fits: Vec<ChannelFit> = targets
        .par_iter()
        .map(|(f_i, alpha0, db)| fit_channel(&evolution.z_grid, db, *f_i, *alpha0, &context, options))
        .collect();

    Ok(FitReport {
        frequencies: targets.iter().map(|t| t.0).collect(),
        params: fits.iter().map(|f| f.params).collect(),
        rms_db: fits.iter().map(|f| f.rms_db).collect(),
        iterations: fits.iter().map(|f| f.iterations).collect(),
        converged: fits.iter().map(|f| f.converged).collect(),
    })
}

struct Context {
    p_f: f64,
    p_b: f64,
    f_hat: f64,
    c_r: f64,
    length: f64,
}

struct ChannelFit {
    params: ProfileParams,
    rms_db: f64,
    iterations: usize,
    converged: bool,
}

/// Model in scaled coordinates `x = [a/a0, C_f/C_r, C_b/C_r, a_f/a0, a_b/a0]`.
struct Model<'a> {
    z: &'a [f64],
    target: &'a [f64],
    df: f64,
    alpha0: f64,
    ctx: &'a Context,
    active: [bool; 5],
}

impl Model<'_> {
    fn params(&self, x: &Vec5) -> ProfileParams {
        ProfileParams {
            alpha: x[0] * self.alpha0,
            c_f: x[1] * self.ctx.c_r,
            c_b: x[2] * self.ctx.c_r,
            alpha_f: x[3] * self.alpha0,
            alpha_b: x[4] * self.alpha0,
            p_f: self.ctx.p_f,
            p_b: self.ctx.p_b,
            f_hat: self.ctx.f_hat,
        }
    }

    /// Sum of squared dB residuals, or infinity where the model is not positive.
    fn cost(&self, x: &Vec5) -> f64 {
        let p = self.params(x);
        let mut sum = 0.0;
        for (z, t) in self.z.iter().zip(self.target) {
            let u = 1.0 - p.tilt(*z, self.ctx.length) * self.df;
            if !(u > 0.0) {
                return f64::INFINITY;
            }
            let r = DB * (-p.alpha * z + u.ln()) - t;
            sum += r * r;
        }
        sum
    }

    /// Normal equations `J^T J` and `J^T r` over the active parameters.
    fn normal_equations(&self, x: &Vec5) -> (Mat5, Vec5) {
        let p = self.params(x);
        let len = self.ctx.length;
        let scale = [self.alpha0, self.ctx.c_r, self.ctx.c_r, self.alpha0, self.alpha0];
        let mut jtj = Mat5::zeros();
        let mut jtr = Vec5::zeros();
        let e_bl = (-p.alpha_b * len).exp();
        for (z, t) in self.z.iter().zip(self.target) {
            let z = *z;
            let l_f = p.l_eff(z);
            let l_b = p.l_eff_backward(z, len);
            let u = 1.0 - (p.c_f * p.p_f * l_f + p.c_b * p.p_b * l_b) * self.df;
            let r = DB * (-p.alpha * z + u.ln()) - t;

            let dl_f = (z * (-p.alpha_f * z).exp() - l_f) / p.alpha_f;
            let dl_b = (-(len - z) * (-p.alpha_b * (len - z)).exp() + len * e_bl) / p.alpha_b - l_b / p.alpha_b;
            let k = -DB * self.df / u;
            let mut row = Vec5::new(
                -DB * z,
                k * p.p_f * l_f,
                k * p.p_b * l_b,
                k * p.c_f * p.p_f * dl_f,
                k * p.c_b * p.p_b * dl_b,
            );
            for j in 0..5 {
                row[j] = if self.active[j] { row[j] * scale[j] } else { 0.0 };
            }
            jtj += row * row.transpose();
            jtr += row * r;
        }
        (jtj, jtr)
    }
}

fn fit_channel(z: &[f64], target: &[f64], f_i: f64, alpha0: f64, ctx: &Context, options: &FitOptions) -> ChannelFit {
    let raman = ctx.c_r > 0.0;
    let backward = raman && ctx.p_b > 0.0;
    let active = [true, raman, backward, raman, backward];
    let model = Model {
        z,
        target,
        df: f_i - ctx.f_hat,
        alpha0,
        ctx,
        active,
    };

    let (rlo, rhi) = options.rate_bounds;
    let (slo, shi) = options.slope_bounds;
    let lower = Vec5::new(rlo, slo, slo, rlo, rlo);
    let upper = Vec5::new(rhi, shi, shi, rhi, rhi);
    let project = |x: Vec5| -> Vec5 {
        let mut y = x.zip_zip_map(&lower, &upper, |v, lo, hi| v.clamp(lo, hi));
        for j in 0..5 {
            if !active[j] {
                y[j] = if j == 1 || j == 2 { 0.0 } else { 1.0 };
            }
        }
        y
    };

    let mut x = project(Vec5::from_column_slice(&options.initial));
    let mut cost = model.cost(&x);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        let (jtj, jtr) = model.normal_equations(&x);
        let floor = jtj.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj;
            for j in 0..5 {
                if active[j] {
                    a[(j, j)] += lambda * jtj[(j, j)].max(floor);
                } else {
                    a[(j, j)] = 1.0;
                }
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-jtr)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let candidate = project(x + step);
            let taken = candidate - x;
            let rel_step = taken.norm() / x.norm().max(1e-30);
            let new_cost = model.cost(&candidate);
            if new_cost < cost {
                let drop = cost - new_cost;
                x = candidate;
                cost = new_cost;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if rel_step < 1e-10 || drop < 1e-12 {
                    converged = true;
                }
                break;
            }
            if rel_step < 1e-10 {
                // No downhill move left at this resolution.
                converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if converged {
            break;
        }
        if !accepted {
            converged = true;
            break;
        }
    }

    ChannelFit {
        params: model.params(&x),
        rms_db: (cost / z.len() as f64).sqrt(),
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::profile::eval_profile_taylor;
    use crate::raman::solve_power_evolution;

    fn synthetic(config: &LinkConfig, truth: &[ProfileParams]) -> PowerEvolution {
        let n = 400;
        let len = config.span.length;
        let z_grid: Vec<f64> = (0..=n).map(|m| len * m as f64 / n as f64).collect();
        let powers = config
            .grid
            .channels
            .iter()
            .zip(truth)
            .map(|(ch, p)| {
                z_grid
                    .iter()
                    .map(|z| ch.launch_power() * eval_profile_taylor(p, *z, ch.center_frequency, len))
                    .collect()
            })
            .collect();
        PowerEvolution {
            z_grid,
            powers,
            frequencies: config.grid.frequencies(),
            channel_count: config.grid.len(),
        }
    }

    #[test]
    fn lossy_fit_recovers_attenuation() {
        let link = presets::lumped_link(3, 1);
        let ev = solve_power_evolution(&link, 0, 1000).unwrap();
        let fit = fit_profile(&ev, &link).unwrap();
        let a = link.span.attenuation.at(193.4e12);
        for p in &fit.params {
            assert!((p.alpha / a - 1.0).abs() < 1e-6);
            assert_eq!(p.c_f, 0.0);
            assert_eq!(p.c_b, 0.0);
        }
        assert!(fit.converged.iter().all(|c| *c));
        assert!(fit.max_rms_db() < 1e-6);
    }

    #[test]
    fn round_trip_recovers_known_parameters() {
        let link = presets::reference_link();
        let a0 = link.span.attenuation.at(193.4e12);
        let c_r = link.span.raman_slope;
        let truth: Vec<ProfileParams> = (0..link.grid.len())
            .map(|i| {
                let s = i as f64 / 40.0;
                ProfileParams {
                    alpha: a0 * (1.05 + 0.1 * s),
                    c_f: c_r * (0.8 + 0.4 * s),
                    c_b: c_r * (1.3 - 0.5 * s),
                    alpha_f: a0 * (1.6 - 0.3 * s),
                    alpha_b: a0 * (1.2 + 0.2 * s),
                    p_f: link.forward_power(0),
                    p_b: link.backward_power(),
                    f_hat: link.mean_pump_frequency(),
                }
            })
            .collect();
        let ev = synthetic(&link, &truth);
        let fit = fit_profile(&ev, &link).unwrap();
        for (got, want) in fit.params.iter().zip(&truth) {
            for (g, w) in [
                (got.alpha, want.alpha),
                (got.c_f, want.c_f),
                (got.c_b, want.c_b),
                (got.alpha_f, want.alpha_f),
                (got.alpha_b, want.alpha_b),
            ] {
                assert!((g / w - 1.0).abs() < 1e-6, "got {g:e}, want {w:e}");
            }
        }
    }

    #[test]
    fn rejects_short_evolutions() {
        let link = presets::lumped_link(1, 1);
        let mut ev = solve_power_evolution(&link, 0, 100).unwrap();
        ev.z_grid.truncate(40);
        ev.powers[0].truncate(40);
        assert!(matches!(fit_profile(&ev, &link), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_non_positive_targets() {
        let link = presets::lumped_link(1, 1);
        let mut ev = solve_power_evolution(&link, 0, 100).unwrap();
        ev.powers[0][10] = 0.0;
        assert!(matches!(fit_profile(&ev, &link), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn report_serializes() {
        let link = presets::lumped_link(2, 1);
        let ev = solve_power_evolution(&link, 0, 100).unwrap();
        let fit = fit_profile(&ev, &link).unwrap();
        let back: FitReport = serde_json::from_str(&fit.to_json()).unwrap();
        assert_eq!(back, fit);
    }
}
