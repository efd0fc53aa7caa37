use std::fmt;

use super::{Attenuation, LinkConfig, RamanGain};

/// One violated invariant, with the offending channel/pump indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyGrid,
    OverlappingChannels(usize, usize),
    UnorderedChannels(usize, usize),
    NonPositiveBandwidth(usize),
    NonPositiveLaunchPower { channel: usize, span: usize },
    LaunchPowerCount { channel: usize, found: usize, expected: usize },
    NegativePumpPower(usize),
    PumpInsideSignalBand(usize),
    NonPositivePumpAttenuation(usize),
    SpanCount,
    CoherenceFactor(f64),
    Fiber(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGrid => write!(f, "grid has no channels"),
            Violation::OverlappingChannels(a, b) => write!(f, "overlapping channels at index {a},{b}"),
            Violation::UnorderedChannels(a, b) => {
                write!(f, "channel frequencies not strictly increasing at index {a},{b}")
            }
            Violation::NonPositiveBandwidth(i) => write!(f, "non-positive bandwidth for channel {i}"),
            Violation::NonPositiveLaunchPower { channel, span } => {
                write!(f, "non-positive launch power for channel {channel} in span {span}")
            }
            Violation::LaunchPowerCount { channel, found, expected } => write!(
                f,
                "channel {channel} lists {found} launch powers but the link has {expected} spans"
            ),
            Violation::NegativePumpPower(p) => write!(f, "negative pump power for pump {p}"),
            Violation::PumpInsideSignalBand(p) => write!(f, "pump {p} lies inside or below the signal band"),
            Violation::NonPositivePumpAttenuation(p) => write!(f, "non-positive attenuation for pump {p}"),
            Violation::SpanCount => write!(f, "span count must be at least 1"),
            Violation::CoherenceFactor(e) => write!(f, "coherence factor {e} outside [0, 1]"),
            Violation::Fiber(msg) => write!(f, "fiber: {msg}"),
        }
    }
}

/// Every invariant violated by a link configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics(pub Vec<Violation>);

impl Diagnostics {
    pub fn violations(&self) -> &[Violation] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Returns the configuration unchanged when every invariant holds.
pub fn validate_link(config: LinkConfig) -> Result<LinkConfig, Diagnostics> {
    let mut out = Vec::new();
    check_fiber(&config, &mut out);

    if config.span_count < 1 {
        out.push(Violation::SpanCount);
    }
    let eps = config.coherence_epsilon;
    if !(0.0..=1.0).contains(&eps) {
        out.push(Violation::CoherenceFactor(eps));
    }

    let channels = &config.grid.channels;
    if channels.is_empty() {
        out.push(Violation::EmptyGrid);
    }
    for (i, ch) in channels.iter().enumerate() {
        if !(ch.bandwidth > 0.0) {
            out.push(Violation::NonPositiveBandwidth(i));
        }
        if ch.launch_power_per_span.len() != config.span_count {
            out.push(Violation::LaunchPowerCount {
                channel: i,
                found: ch.launch_power_per_span.len(),
                expected: config.span_count,
            });
        }
        for (span, &p) in ch.launch_power_per_span.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                out.push(Violation::NonPositiveLaunchPower { channel: i, span });
            }
        }
    }
    for (i, pair) in channels.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if !(b.center_frequency > a.center_frequency) {
            out.push(Violation::UnorderedChannels(i, i + 1));
        }
        // Tolerate rounding in grids built from decimal spacings.
        let needed = 0.5 * (a.bandwidth + b.bandwidth);
        let gap = b.center_frequency - a.center_frequency;
        if gap < needed * (1.0 - 1e-9) {
            out.push(Violation::OverlappingChannels(i, i + 1));
        }
    }

    let top = channels
        .iter()
        .map(|c| c.center_frequency + 0.5 * c.bandwidth)
        .fold(f64::NEG_INFINITY, f64::max);
    for (p, pump) in config.pumps.iter().enumerate() {
        if pump.input_power < 0.0 || !pump.input_power.is_finite() {
            out.push(Violation::NegativePumpPower(p));
        }
        if !(pump.frequency > top) {
            out.push(Violation::PumpInsideSignalBand(p));
        }
        if !(pump.attenuation > 0.0) {
            out.push(Violation::NonPositivePumpAttenuation(p));
        }
    }

    if out.is_empty() {
        Ok(config)
    } else {
        Err(Diagnostics(out))
    }
}

fn check_fiber(config: &LinkConfig, out: &mut Vec<Violation>) {
    let span = &config.span;
    let mut bad = |msg: String| out.push(Violation::Fiber(msg));
    if !(span.length > 0.0) {
        bad(format!("length {} must be positive", span.length));
    }
    if !(span.gamma >= 0.0) {
        bad(format!("gamma {} must be non-negative", span.gamma));
    }
    if !span.beta2.is_finite() || !span.beta3.is_finite() {
        bad("dispersion coefficients must be finite".into());
    }
    if !(span.raman_slope >= 0.0) {
        bad(format!("raman slope {} must be non-negative", span.raman_slope));
    }
    if !span.dispersion_reference.is_finite() {
        bad("dispersion reference frequency must be finite".into());
    }
    match &span.attenuation {
        Attenuation::Flat(a) => {
            if !(*a > 0.0) {
                bad(format!("attenuation {a} must be positive"));
            }
        }
        Attenuation::Tabulated(t) => {
            if t.is_empty() {
                bad("attenuation table is empty".into());
            }
            if t.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                bad("attenuation table frequencies must be strictly increasing".into());
            }
            if t.iter().any(|p| !(p.1 > 0.0)) {
                bad("attenuation table values must be positive".into());
            }
        }
    }
    for ch in &config.grid.channels {
        if !(span.attenuation.at(ch.center_frequency) > 0.0) {
            bad(format!("attenuation not positive at {:.6e} Hz", ch.center_frequency));
            break;
        }
    }
    if let RamanGain::Tabulated(t) = &span.raman_gain {
        if t.is_empty() || t[0].0 != 0.0 {
            bad("tabulated Raman gain must start at a separation of 0 Hz".into());
        }
        if t.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            bad("tabulated Raman gain separations must be strictly increasing".into());
        }
        if t.iter().any(|p| !(p.1 >= 0.0)) {
            bad("tabulated Raman gain must be non-negative".into());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::spectral::{Channel, Pump, PumpDirection, WdmGrid};

    fn single_channel_with_pump() -> LinkConfig {
        let mut link = presets::lumped_link(1, 1);
        link.grid = WdmGrid::new(vec![Channel::new(193.4e12, 100e9, 1e-3, 1)]);
        link.pumps = vec![Pump {
            frequency: 193.4e12 + 13e12,
            input_power: 0.5,
            direction: PumpDirection::Backward,
            attenuation: 5.76e-5,
        }];
        link
    }

    #[test]
    fn single_channel_backward_pump_is_valid() {
        let link = single_channel_with_pump();
        assert_eq!(validate_link(link.clone()), Ok(link));
    }

    #[test]
    fn identical_frequencies_overlap() {
        let mut link = single_channel_with_pump();
        link.grid.channels.push(link.grid.channels[0].clone());
        let diag = validate_link(link).unwrap_err();
        assert!(diag.violations().contains(&Violation::OverlappingChannels(0, 1)));
        assert!(diag.to_string().contains("overlapping channels at index 0,1"));
    }

    #[test]
    fn negative_pump_power() {
        let mut link = single_channel_with_pump();
        link.pumps[0].input_power = -1.0;
        let diag = validate_link(link).unwrap_err();
        assert_eq!(diag.violations(), &[Violation::NegativePumpPower(0)]);
        assert!(diag.to_string().contains("negative pump power"));
    }

    #[test]
    fn pump_inside_band_is_reported_with_index() {
        let mut link = presets::lumped_link(5, 1);
        link.pumps.push(Pump {
            frequency: link.grid.band_center(),
            input_power: 0.1,
            direction: PumpDirection::Forward,
            attenuation: 5e-5,
        });
        let diag = validate_link(link).unwrap_err();
        assert_eq!(diag.violations(), &[Violation::PumpInsideSignalBand(0)]);
    }

    #[test]
    fn collects_every_violation() {
        let mut link = presets::lumped_link(3, 2);
        link.span_count = 0;
        link.coherence_epsilon = 2.0;
        link.grid.channels[1].bandwidth = 0.0;
        link.grid.channels[2].launch_power_per_span[1] = 0.0;
        let diag = validate_link(link).unwrap_err();
        let v = diag.violations();
        assert!(v.contains(&Violation::SpanCount));
        assert!(v.contains(&Violation::CoherenceFactor(2.0)));
        assert!(v.contains(&Violation::NonPositiveBandwidth(1)));
        assert!(v.contains(&Violation::NonPositiveLaunchPower { channel: 2, span: 1 }));
    }

    #[test]
    fn idempotent() {
        let link = presets::reference_link();
        let once = validate_link(link).unwrap();
        let twice = validate_link(once.clone()).unwrap();
        assert_eq!(once, twice);
    }
}
