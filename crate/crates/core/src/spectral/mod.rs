//! Link description: channels, pumps, fibre and the SNR budget.
//!
//! All fields are SI. Frequencies are absolute optical frequencies in Hz.

mod units;
mod validate;

pub use units::{convert_units, parse_quantity, Unit};
pub use validate::{validate_link, Diagnostics, Violation};

use serde::{Deserialize, Serialize};

/// One WDM channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Absolute centre frequency (Hz).
    pub center_frequency: f64,
    /// Symbol-rate bandwidth (Hz).
    pub bandwidth: f64,
    /// Launch power into each span (W), one entry per span.
    pub launch_power_per_span: Vec<f64>,
}

impl Channel {
    pub fn new(center_frequency: f64, bandwidth: f64, launch_power: f64, spans: usize) -> Self {
        Channel {
            center_frequency,
            bandwidth,
            launch_power_per_span: vec![launch_power; spans],
        }
    }

    /// Launch power into the first span; the reference power of the channel.
    pub fn launch_power(&self) -> f64 {
        self.launch_power_per_span[0]
    }
}

/// Channels in ascending frequency order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdmGrid {
    pub channels: Vec<Channel>,
}

impl WdmGrid {
    pub fn new(channels: Vec<Channel>) -> Self {
        WdmGrid { channels }
    }

    /// Uniform grid of `count` channels centred on `center`.
    pub fn uniform(count: usize, center: f64, spacing: f64, bandwidth: f64, power: f64, spans: usize) -> Self {
        let offset = (count as f64 - 1.0) / 2.0;
        let channels = (0..count)
            .map(|k| Channel::new(center + (k as f64 - offset) * spacing, bandwidth, power, spans))
            .collect();
        WdmGrid { channels }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.center_frequency).collect()
    }

    /// Lower and upper edges of the occupied band (Hz).
    pub fn band_edges(&self) -> (f64, f64) {
        let lo = self
            .channels
            .iter()
            .map(|c| c.center_frequency - c.bandwidth / 2.0)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .channels
            .iter()
            .map(|c| c.center_frequency + c.bandwidth / 2.0)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn band_center(&self) -> f64 {
        let (lo, hi) = self.band_edges();
        0.5 * (lo + hi)
    }

    /// Total occupied optical bandwidth (Hz).
    pub fn total_bandwidth(&self) -> f64 {
        let (lo, hi) = self.band_edges();
        hi - lo
    }

    /// Sum of the launch powers into `span` (W).
    pub fn total_power(&self, span: usize) -> f64 {
        self.channels.iter().map(|c| c.launch_power_per_span[span]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpDirection {
    Forward,
    Backward,
}

/// A Raman pump line. Backward pumps are launched at `z = L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pump {
    pub frequency: f64,
    pub input_power: f64,
    pub direction: PumpDirection,
    /// Power attenuation at the pump wavelength (1/m).
    pub attenuation: f64,
}

/// Intrinsic power attenuation versus frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Attenuation {
    Flat(f64),
    /// `(frequency Hz, attenuation 1/m)` pairs, ascending in frequency;
    /// linearly interpolated and clamped at the ends.
    Tabulated(Vec<(f64, f64)>),
}

impl Attenuation {
    pub fn at(&self, frequency: f64) -> f64 {
        match self {
            Attenuation::Flat(a) => *a,
            Attenuation::Tabulated(table) => interpolate_clamped(table, frequency),
        }
    }
}

/// Raman gain g_r(Δf)/A_eff for a positive frequency separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RamanGain {
    /// `g(Δf) = slope · Δf`.
    Triangular,
    /// `(Δf Hz, gain 1/(W·m))` samples on `[0, Δf_max]`; linear
    /// interpolation, zero outside the table.
    Tabulated(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpan {
    /// Span length (m).
    pub length: f64,
    /// Group-velocity dispersion (s²/m).
    pub beta2: f64,
    /// Dispersion slope (s³/m).
    pub beta3: f64,
    /// Nonlinear coefficient (1/(W·m)).
    pub gamma: f64,
    pub attenuation: Attenuation,
    /// Slope of the triangular Raman gain approximation (1/(W·m·Hz)).
    pub raman_slope: f64,
    pub raman_gain: RamanGain,
    /// Absolute frequency at which `beta2` and `beta3` are quoted (Hz).
    pub dispersion_reference: f64,
}

impl FiberSpan {
    /// Raman gain coefficient for a positive separation `df` (1/(W·m)).
    pub fn gain(&self, df: f64) -> f64 {
        match &self.raman_gain {
            RamanGain::Triangular => self.raman_slope * df,
            RamanGain::Tabulated(table) => {
                let (first, last) = match (table.first(), table.last()) {
                    (Some(f), Some(l)) => (f.0, l.0),
                    _ => return 0.0,
                };
                if df < first || df > last {
                    0.0
                } else {
                    interpolate_clamped(table, df)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub span: FiberSpan,
    pub span_count: usize,
    pub coherence_epsilon: f64,
    pub grid: WdmGrid,
    pub pumps: Vec<Pump>,
}

impl LinkConfig {
    /// Total launch power of the channels and forward pumps (W).
    pub fn forward_power(&self, span: usize) -> f64 {
        self.grid.total_power(span)
            + self
                .pumps
                .iter()
                .filter(|p| p.direction == PumpDirection::Forward)
                .map(|p| p.input_power)
                .sum::<f64>()
    }

    /// Total launch power of the backward pumps (W).
    pub fn backward_power(&self) -> f64 {
        self.pumps
            .iter()
            .filter(|p| p.direction == PumpDirection::Backward)
            .map(|p| p.input_power)
            .sum()
    }

    /// Unweighted mean pump frequency, or the band centre without pumps.
    pub fn mean_pump_frequency(&self) -> f64 {
        if self.pumps.is_empty() {
            self.grid.band_center()
        } else {
            self.pumps.iter().map(|p| p.frequency).sum::<f64>() / self.pumps.len() as f64
        }
    }

    /// True when every channel has the same launch power in every span.
    pub fn spans_identical(&self) -> bool {
        self.grid.channels.iter().all(|c| {
            let p0 = c.launch_power_per_span[0];
            c.launch_power_per_span.iter().all(|&p| p == p0)
        })
    }
}

/// Per-channel or broadcast linear SNR values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetValues {
    Broadcast(f64),
    PerChannel(Vec<f64>),
}

impl BudgetValues {
    pub fn get(&self, channel: usize) -> f64 {
        match self {
            BudgetValues::Broadcast(v) => *v,
            BudgetValues::PerChannel(v) => v[channel],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            BudgetValues::Broadcast(v) => std::slice::from_ref(v),
            BudgetValues::PerChannel(v) => v,
        }
    }
}

/// Linear SNR contributions other than NLI. Infinite entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrBudget {
    pub snr_ase: BudgetValues,
    pub snr_trx: BudgetValues,
}

impl SnrBudget {
    pub fn infinite() -> Self {
        SnrBudget {
            snr_ase: BudgetValues::Broadcast(f64::INFINITY),
            snr_trx: BudgetValues::Broadcast(f64::INFINITY),
        }
    }

    pub fn broadcast(snr_ase: f64, snr_trx: f64) -> Self {
        SnrBudget {
            snr_ase: BudgetValues::Broadcast(snr_ase),
            snr_trx: BudgetValues::Broadcast(snr_trx),
        }
    }

    /// Checks positivity and, for per-channel entries, the channel count.
    pub fn check(&self, channels: usize) -> crate::Result<()> {
        for (name, values) in [("snr_ase", &self.snr_ase), ("snr_trx", &self.snr_trx)] {
            if let BudgetValues::PerChannel(v) = values {
                if v.len() != channels {
                    return Err(crate::Error::InvalidInput(format!(
                        "{name} has {} entries for {channels} channels",
                        v.len()
                    )));
                }
            }
            if let Some(bad) = values.values().iter().find(|v| !(**v > 0.0)) {
                return Err(crate::Error::InvalidInput(format!("{name} entry {bad} is not positive")));
            }
        }
        Ok(())
    }
}

pub(crate) fn interpolate_clamped(table: &[(f64, f64)], x: f64) -> f64 {
    match table {
        [] => 0.0,
        [(_, y)] => *y,
        _ => {
            if x <= table[0].0 {
                return table[0].1;
            }
            let last = table[table.len() - 1];
            if x >= last.0 {
                return last.1;
            }
            let hi = table.partition_point(|p| p.0 <= x);
            let (x0, y0) = table[hi - 1];
            let (x1, y1) = table[hi];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}
