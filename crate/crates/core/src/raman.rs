//! Coupled Raman power equations, integrated with fixed-step RK4.
//!
//! Channels and forward pumps are integrated together. Backward pumps are
//! undepleted and follow `P(z) = P(L) exp(-a_p (L - z))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{fmt_f64, Csv};
use crate::spectral::{LinkConfig, PumpDirection};

pub const MIN_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub steps: usize,
    /// Weight the loss of the higher-frequency line by `f_i / f_k`. Turning
    /// this off makes Raman exchange exactly power conserving.
    pub photon_factors: bool,
    /// How many times the step count may be doubled after a non-finite state.
    pub max_refinements: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            steps: 1000,
            photon_factors: true,
            max_refinements: 4,
        }
    }
}

/// Sampled power of every line along one span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEvolution {
    pub z_grid: Vec<f64>,
    /// One row per line: channels first, then pumps in configuration order.
    pub powers: Vec<Vec<f64>>,
    pub frequencies: Vec<f64>,
    pub channel_count: usize,
}

impl PowerEvolution {
    pub fn channel(&self, index: usize) -> &[f64] {
        &self.powers[index]
    }

    pub fn length(&self) -> f64 {
        *self.z_grid.last().unwrap_or(&0.0)
    }

    /// CSV with a `z_m` column and one power column (W) per line, labelled by
    /// its frequency in Hz.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["z_m".to_string()];
        header.extend(self.frequencies.iter().map(|f| fmt_f64(*f)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut csv = Csv::with_header(&header);
        let mut row = Vec::with_capacity(self.powers.len() + 1);
        for (m, z) in self.z_grid.iter().enumerate() {
            row.clear();
            row.push(*z);
            row.extend(self.powers.iter().map(|p| p[m]));
            csv.row(&[], &row);
        }
        csv.finish()
    }
}

/// Solves span `span_index` with default options and `steps` RK4 steps.
pub fn solve_power_evolution(config: &LinkConfig, span_index: usize, steps: usize) -> Result<PowerEvolution> {
    let options = SolverOptions {
        steps,
        ..SolverOptions::default()
    };
    solve_power_evolution_with(config, span_index, &options)
}

pub fn solve_power_evolution_with(config: &LinkConfig, span_index: usize, options: &SolverOptions) -> Result<PowerEvolution> {
    if options.steps < MIN_STEPS {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_STEPS} integration steps are required, got {}",
            options.steps
        )));
    }
    if span_index >= config.span_count {
        return Err(Error::InvalidInput(format!(
            "span {span_index} out of range for {} spans",
            config.span_count
        )));
    }
    let system = System::new(config, span_index, options.photon_factors);

    let mut last_z = 0.0;
    for r in 0..=options.max_refinements {
        let factor = 1usize << r;
        match system.integrate(options.steps * factor) {
            Ok(states) => return Ok(system.assemble(states, options.steps, factor)),
            Err(z) => last_z = z,
        }
    }
    Err(Error::Divergence { z: last_z })
}

/// Power of channel `channel_index` divided by its launch power.
pub fn normalized_profile(evolution: &PowerEvolution, channel_index: usize) -> Result<Vec<f64>> {
    if channel_index >= evolution.channel_count {
        return Err(Error::InvalidInput(format!(
            "channel {channel_index} out of range for {} channels",
            evolution.channel_count
        )));
    }
    let row = &evolution.powers[channel_index];
    let p0 = row[0];
    Ok(row.iter().map(|p| p / p0).collect())
}

struct Backward {
    power: f64,
    attenuation: f64,
    /// Column into the gain matrix.
    column: usize,
}

struct System {
    length: f64,
    /// Launch powers of the integrated lines (channels, then forward pumps).
    initial: Vec<f64>,
    loss: Vec<f64>,
    /// `gain[i][k]`: coefficient of `P_k` in `dP_i/dz / P_i`; columns cover the
    /// integrated lines followed by the backward pumps.
    gain: Vec<Vec<f64>>,
    backward: Vec<Backward>,
    /// Output row of each integrated line and each backward pump.
    integrated_rows: Vec<usize>,
    frequencies: Vec<f64>,
    channel_count: usize,
}

impl System {
    fn new(config: &LinkConfig, span_index: usize, photon_factors: bool) -> Self {
        let span = &config.span;
        let nch = config.grid.len();

        let mut freq = Vec::new();
        let mut initial = Vec::new();
        let mut loss = Vec::new();
        let mut integrated_rows = Vec::new();
        for (i, ch) in config.grid.channels.iter().enumerate() {
            freq.push(ch.center_frequency);
            initial.push(ch.launch_power_per_span[span_index]);
            loss.push(span.attenuation.at(ch.center_frequency));
            integrated_rows.push(i);
        }
        for (p, pump) in config.pumps.iter().enumerate() {
            if pump.direction == PumpDirection::Forward {
                freq.push(pump.frequency);
                initial.push(pump.input_power);
                loss.push(pump.attenuation);
                integrated_rows.push(nch + p);
            }
        }
        let n_int = initial.len();
        let mut backward = Vec::new();
        for (p, pump) in config.pumps.iter().enumerate() {
            if pump.direction == PumpDirection::Backward {
                freq.push(pump.frequency);
                backward.push(Backward {
                    power: pump.input_power,
                    attenuation: pump.attenuation,
                    column: n_int + backward.len(),
                });
                integrated_rows.push(nch + p);
            }
        }

        let gain = (0..n_int)
            .map(|i| {
                freq.iter()
                    .map(|&fk| {
                        let fi = freq[i];
                        if fk > fi {
                            span.gain(fk - fi)
                        } else if fk < fi {
                            let ratio = if photon_factors { fi / fk } else { 1.0 };
                            -ratio * span.gain(fi - fk)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();

        let frequencies = config
            .grid
            .channels
            .iter()
            .map(|c| c.center_frequency)
            .chain(config.pumps.iter().map(|p| p.frequency))
            .collect();

        System {
            length: span.length,
            initial,
            loss,
            gain,
            backward,
            integrated_rows,
            frequencies,
            channel_count: nch,
        }
    }

    fn backward_power(&self, b: &Backward, z: f64) -> f64 {
        b.power * (-b.attenuation * (self.length - z)).exp()
    }

    fn rhs(&self, z: f64, state: &[f64], all: &mut [f64], out: &mut [f64]) {
        let n = state.len();
        all[..n].copy_from_slice(state);
        for b in &self.backward {
            all[b.column] = self.backward_power(b, z);
        }
        for i in 0..n {
            let g: f64 = self.gain[i].iter().zip(all.iter()).map(|(g, p)| g * p).sum();
            out[i] = state[i] * (g - self.loss[i]);
        }
    }

    /// Returns every RK4 state, or the position of the first non-finite one.
    fn integrate(&self, steps: usize) -> std::result::Result<Vec<Vec<f64>>, f64> {
        let n = self.initial.len();
        let h = self.length / steps as f64;
        let mut all = vec![0.0; n + self.backward.len()];
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        let mut states = Vec::with_capacity(steps + 1);
        let mut y = self.initial.clone();
        states.push(y.clone());
        for m in 0..steps {
            let z = m as f64 * h;
            self.rhs(z, &y, &mut all, &mut k1);
            for j in 0..n {
                tmp[j] = y[j] + 0.5 * h * k1[j];
            }
            self.rhs(z + 0.5 * h, &tmp, &mut all, &mut k2);
            for j in 0..n {
                tmp[j] = y[j] + 0.5 * h * k2[j];
            }
            self.rhs(z + 0.5 * h, &tmp, &mut all, &mut k3);
            for j in 0..n {
                tmp[j] = y[j] + h * k3[j];
            }
            self.rhs(z + h, &tmp, &mut all, &mut k4);
            for j in 0..n {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            if y.iter().any(|p| !p.is_finite()) {
                return Err(z + h);
            }
            states.push(y.clone());
        }
        Ok(states)
    }

    fn assemble(&self, states: Vec<Vec<f64>>, steps: usize, stride: usize) -> PowerEvolution {
        let h = self.length / steps as f64;
        let mut z_grid: Vec<f64> = (0..=steps).map(|m| m as f64 * h).collect();
        z_grid[steps] = self.length;

        let rows = self.integrated_rows.len();
        let mut powers = vec![Vec::with_capacity(steps + 1); rows];
        let n_int = self.initial.len();
        for m in 0..=steps {
            let state = &states[m * stride];
            for (j, p) in state.iter().enumerate() {
                powers[self.integrated_rows[j]].push(*p);
            }
        }
        for (b_idx, b) in self.backward.iter().enumerate() {
            let row = self.integrated_rows[n_int + b_idx];
            powers[row] = z_grid.iter().map(|&z| self.backward_power(b, z)).collect();
        }
        PowerEvolution {
            z_grid,
            powers,
            frequencies: self.frequencies.clone(),
            channel_count: self.channel_count,
        }
    }
}
