//! Reference links used by the examples, tests and benchmarks.

use crate::spectral::{Attenuation, Channel, FiberSpan, LinkConfig, Pump, PumpDirection, RamanGain, Unit, WdmGrid};

/// Grid centre of every preset (Hz).
pub const CENTER_FREQUENCY: f64 = 193.4e12;
/// Channel spacing and bandwidth of the presets (Hz).
pub const SPACING: f64 = 100e9;
/// Offset of the reference backward pump above the grid centre (Hz).
pub const PUMP_OFFSET: f64 = 13.2e12;

/// 80 km of standard single-mode fibre with a triangular Raman gain.
pub fn reference_span() -> FiberSpan {
    FiberSpan {
        length: Unit::Km.to_si(80.0),
        beta2: Unit::Ps2PerKm.to_si(-21.7),
        beta3: Unit::Ps3PerKm.to_si(0.14),
        gamma: Unit::PerWattKm.to_si(1.3),
        attenuation: Attenuation::Flat(Unit::DbPerKm.to_si(0.2)),
        raman_slope: Unit::PerWattKmTHz.to_si(0.028),
        raman_gain: RamanGain::Triangular,
        dispersion_reference: CENTER_FREQUENCY,
    }
}

/// 40 × 100 GHz channels at 0 dBm with one 600 mW backward pump.
pub fn reference_link() -> LinkConfig {
    LinkConfig {
        span: reference_span(),
        span_count: 1,
        coherence_epsilon: 0.0,
        grid: WdmGrid::uniform(40, CENTER_FREQUENCY, SPACING, SPACING, 1e-3, 1),
        pumps: vec![reference_pump()],
    }
}

pub fn reference_pump() -> Pump {
    Pump {
        frequency: CENTER_FREQUENCY + PUMP_OFFSET,
        input_power: 0.6,
        direction: PumpDirection::Backward,
        attenuation: Unit::DbPerKm.to_si(0.25),
    }
}

/// Reference fibre without Raman interaction or pumps.
pub fn lumped_link(channels: usize, spans: usize) -> LinkConfig {
    let mut span = reference_span();
    span.raman_slope = 0.0;
    LinkConfig {
        span,
        span_count: spans,
        coherence_epsilon: 0.0,
        grid: WdmGrid::uniform(channels, CENTER_FREQUENCY, SPACING, SPACING, 1e-3, spans),
        pumps: Vec::new(),
    }
}

/// Reference fibre with inter-channel Raman scattering but no pumps.
pub fn unpumped_link(channels: usize) -> LinkConfig {
    LinkConfig {
        pumps: Vec::new(),
        grid: WdmGrid::uniform(channels, CENTER_FREQUENCY, SPACING, SPACING, 1e-3, 1),
        ..reference_link()
    }
}

/// Three 1 W lines 5 THz apart; strong enough that Raman coupling dominates.
pub fn strong_three_channel() -> LinkConfig {
    let channels = [190e12, 195e12, 200e12]
        .iter()
        .map(|&f| Channel::new(f, SPACING, 1.0, 1))
        .collect();
    LinkConfig {
        span: reference_span(),
        span_count: 1,
        coherence_epsilon: 0.0,
        grid: WdmGrid::new(channels),
        pumps: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::validate_link;

    #[test]
    fn presets_validate() {
        for link in [
            reference_link(),
            lumped_link(9, 3),
            unpumped_link(40),
            strong_three_channel(),
        ] {
            validate_link(link).unwrap();
        }
    }

    #[test]
    fn reference_grid_spans_four_terahertz() {
        let link = reference_link();
        assert!((link.grid.total_bandwidth() - 4e12).abs() < 1.0);
        assert!((link.grid.band_center() - CENTER_FREQUENCY).abs() < 1.0);
    }
}
