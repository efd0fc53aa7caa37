//! Scenario files: one link per JSON document, in engineering units.
//!
//! Every physical quantity is either a bare number in the field's default
//! unit or a `"<value> <unit>"` string, e.g. `"0.2 dB/km"` or `"600 mW"`.
//! Unknown keys are rejected.
//!
//! ```json
//! {
//!   "fiber": { "length": 80, "attenuation": 0.2, "beta2": -21.7, "beta3": 0.14,
//!              "gamma": 1.3, "raman_slope": 0.028 },
//!   "spans": 1,
//!   "channels": { "count": 40, "center": "193.4 THz", "spacing": "100 GHz",
//!                 "bandwidth": "100 GHz", "power": "0 dBm" },
//!   "pumps": [ { "frequency": "206.6 THz", "power": "600 mW",
//!                "direction": "backward", "attenuation": "0.25 dB/km" } ]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::oracle::OracleOptions;
use crate::profile::FitOptions;
use crate::raman::SolverOptions;
use crate::spectral::{
    parse_quantity, validate_link, Attenuation, BudgetValues, Channel, FiberSpan, LinkConfig, Pump, PumpDirection,
    RamanGain, SnrBudget, Unit, WdmGrid,
};

/// A parsed and validated scenario, all SI.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub link: LinkConfig,
    pub budget: SnrBudget,
    pub solver: SolverOptions,
    pub fit: FitOptions,
    pub oracle: OracleOptions,
    /// Output directory named in the file, if any.
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    fn si(&self, key: &str, default: Unit, allowed: &[Unit]) -> Result<f64> {
        let (value, unit) = match self {
            Quantity::Number(v) => (*v, default),
            Quantity::Text(t) => parse_quantity(t).map_err(|e| Error::Parse(format!("{key}: {e}")))?,
        };
        if unit != default && !allowed.contains(&unit) {
            let expected: Vec<&str> = std::iter::once(default).chain(allowed.iter().copied()).map(Unit::tag).collect();
            return Err(Error::Parse(format!(
                "{key}: unit `{unit}` not allowed here (expected {})",
                expected.join(", ")
            )));
        }
        Ok(unit.to_si(value))
    }
}

const FREQUENCY: (Unit, &[Unit]) = (Unit::THz, &[Unit::GHz]);
const WIDTH: (Unit, &[Unit]) = (Unit::GHz, &[Unit::THz]);
const LOSS: (Unit, &[Unit]) = (Unit::DbPerKm, &[]);
const CHANNEL_POWER: (Unit, &[Unit]) = (Unit::Dbm, &[Unit::MilliWatt, Unit::Watt]);
const PUMP_POWER: (Unit, &[Unit]) = (Unit::MilliWatt, &[Unit::Dbm, Unit::Watt]);

fn get(q: &Quantity, key: &str, (default, allowed): (Unit, &[Unit])) -> Result<f64> {
    q.si(key, default, allowed)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    fiber: RawFiber,
    #[serde(default = "one")]
    spans: usize,
    #[serde(default)]
    coherence_epsilon: f64,
    channels: RawChannels,
    #[serde(default)]
    pumps: Vec<RawPump>,
    #[serde(default)]
    budget: Option<RawBudget>,
    #[serde(default)]
    solver: SolverOptions,
    #[serde(default)]
    fit: FitOptions,
    #[serde(default)]
    quadrature: OracleOptions,
    #[serde(default)]
    output: RawOutput,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiber {
    length: Quantity,
    attenuation: RawAttenuation,
    beta2: Quantity,
    #[serde(default)]
    beta3: Option<Quantity>,
    gamma: Quantity,
    #[serde(default)]
    raman_slope: Option<Quantity>,
    #[serde(default)]
    raman_gain_table: Option<Vec<RawGainPoint>>,
    #[serde(default)]
    dispersion_reference: Option<Quantity>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAttenuation {
    Flat(Quantity),
    Table(Vec<RawLossPoint>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLossPoint {
    frequency: Quantity,
    attenuation: Quantity,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGainPoint {
    offset: Quantity,
    gain: Quantity,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawChannels {
    Uniform(RawUniform),
    List(Vec<RawChannel>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUniform {
    count: usize,
    center: Quantity,
    spacing: Quantity,
    bandwidth: Quantity,
    power: RawPower,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    frequency: Quantity,
    bandwidth: Quantity,
    power: RawPower,
}

/// One power for every span, or one per span.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPower {
    Single(Quantity),
    PerSpan(Vec<Quantity>),
}

impl RawPower {
    fn resolve(&self, key: &str, spans: usize) -> Result<Vec<f64>> {
        match self {
            RawPower::Single(q) => Ok(vec![get(q, key, CHANNEL_POWER)?; spans]),
            RawPower::PerSpan(list) => list
                .iter()
                .enumerate()
                .map(|(j, q)| get(q, &format!("{key}[{j}]"), CHANNEL_POWER))
                .collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPump {
    frequency: Quantity,
    power: Quantity,
    direction: PumpDirection,
    #[serde(default)]
    attenuation: Option<Quantity>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBudget {
    Keyword(String),
    Values(RawBudgetValues),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudgetValues {
    #[serde(default)]
    snr_ase: Option<RawSnr>,
    #[serde(default)]
    snr_trx: Option<RawSnr>,
}

/// SNR in dB as a bare number, `"<x> dB"`, `"inf"`, or a per-channel list.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSnr {
    One(Quantity),
    Many(Vec<Quantity>),
}

fn snr(q: &Quantity, key: &str) -> Result<f64> {
    if let Quantity::Text(t) = q {
        if matches!(t.trim(), "inf" | "infinite") {
            return Ok(f64::INFINITY);
        }
    }
    get(q, key, (Unit::Db, &[]))
}

impl RawSnr {
    fn resolve(&self, key: &str) -> Result<BudgetValues> {
        match self {
            RawSnr::One(q) => Ok(BudgetValues::Broadcast(snr(q, key)?)),
            RawSnr::Many(list) => Ok(BudgetValues::PerChannel(
                list.iter()
                    .enumerate()
                    .map(|(j, q)| snr(q, &format!("{key}[{j}]")))
                    .collect::<Result<_>>()?,
            )),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    dir: Option<PathBuf>,
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read scenario {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.resolve()
}

impl RawScenario {
    fn resolve(self) -> Result<Scenario> {
        let spans = self.spans;
        let channels = match &self.channels {
            RawChannels::Uniform(u) => {
                let center = get(&u.center, "channels.center", FREQUENCY)?;
                let spacing = get(&u.spacing, "channels.spacing", WIDTH)?;
                let bandwidth = get(&u.bandwidth, "channels.bandwidth", WIDTH)?;
                let power = u.power.resolve("channels.power", spans)?;
                let grid = WdmGrid::uniform(u.count, center, spacing, bandwidth, 0.0, spans);
                grid.channels
                    .into_iter()
                    .map(|c| Channel {
                        launch_power_per_span: power.clone(),
                        ..c
                    })
                    .collect()
            }
            RawChannels::List(list) => list
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    Ok(Channel {
                        center_frequency: get(&c.frequency, &format!("channels[{j}].frequency"), FREQUENCY)?,
                        bandwidth: get(&c.bandwidth, &format!("channels[{j}].bandwidth"), WIDTH)?,
                        launch_power_per_span: c.power.resolve(&format!("channels[{j}].power"), spans)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let grid = WdmGrid::new(channels);

        let span = self.fiber.resolve(&grid)?;
        let pumps = self
            .pumps
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let key = |f: &str| format!("pumps[{j}].{f}");
                Ok(Pump {
                    frequency: get(&p.frequency, &key("frequency"), FREQUENCY)?,
                    input_power: get(&p.power, &key("power"), PUMP_POWER)?,
                    direction: p.direction,
                    attenuation: match &p.attenuation {
                        Some(q) => get(q, &key("attenuation"), LOSS)?,
                        None => span.attenuation.at(get(&p.frequency, &key("frequency"), FREQUENCY)?),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let link = validate_link(LinkConfig {
            span,
            span_count: spans,
            coherence_epsilon: self.coherence_epsilon,
            grid,
            pumps,
        })
        .map_err(Error::Validation)?;

        let budget = match &self.budget {
            None => SnrBudget::infinite(),
            Some(RawBudget::Keyword(k)) if matches!(k.as_str(), "infinite" | "inf") => SnrBudget::infinite(),
            Some(RawBudget::Keyword(k)) => {
                return Err(Error::Parse(format!("budget: expected \"infinite\" or an object, got `{k}`")))
            }
            Some(RawBudget::Values(v)) => {
                let inf = BudgetValues::Broadcast(f64::INFINITY);
                SnrBudget {
                    snr_ase: v.snr_ase.as_ref().map_or(Ok(inf.clone()), |s| s.resolve("budget.snr_ase"))?,
                    snr_trx: v.snr_trx.as_ref().map_or(Ok(inf), |s| s.resolve("budget.snr_trx"))?,
                }
            }
        };
        budget.check(link.grid.len())?;

        if self.solver.steps < crate::raman::MIN_STEPS {
            return Err(Error::InvalidInput(format!(
                "solver.steps = {} is below the minimum of {}",
                self.solver.steps,
                crate::raman::MIN_STEPS
            )));
        }
        if !self.quadrature.quadrature.is_valid() {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }

        Ok(Scenario {
            link,
            budget,
            solver: self.solver,
            fit: self.fit,
            oracle: self.quadrature,
            output_dir: self.output.dir,
        })
    }
}

impl RawFiber {
    fn resolve(&self, grid: &WdmGrid) -> Result<FiberSpan> {
        let attenuation = match &self.attenuation {
            RawAttenuation::Flat(q) => Attenuation::Flat(get(q, "fiber.attenuation", LOSS)?),
            RawAttenuation::Table(points) => Attenuation::Tabulated(
                points
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        Ok((
                            get(&p.frequency, &format!("fiber.attenuation[{j}].frequency"), FREQUENCY)?,
                            get(&p.attenuation, &format!("fiber.attenuation[{j}].attenuation"), LOSS)?,
                        ))
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let raman_gain = match &self.raman_gain_table {
            None => RamanGain::Triangular,
            Some(points) => RamanGain::Tabulated(
                points
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        Ok((
                            get(&p.offset, &format!("fiber.raman_gain_table[{j}].offset"), FREQUENCY)?,
                            get(&p.gain, &format!("fiber.raman_gain_table[{j}].gain"), (Unit::PerWattKm, &[]))?,
                        ))
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let zero = Quantity::Number(0.0);
        Ok(FiberSpan {
            length: get(&self.length, "fiber.length", (Unit::Km, &[Unit::Metre]))?,
            beta2: get(&self.beta2, "fiber.beta2", (Unit::Ps2PerKm, &[]))?,
            beta3: get(self.beta3.as_ref().unwrap_or(&zero), "fiber.beta3", (Unit::Ps3PerKm, &[]))?,
            gamma: get(&self.gamma, "fiber.gamma", (Unit::PerWattKm, &[]))?,
            attenuation,
            raman_slope: get(
                self.raman_slope.as_ref().unwrap_or(&zero),
                "fiber.raman_slope",
                (Unit::PerWattKmTHz, &[]),
            )?,
            raman_gain,
            dispersion_reference: match &self.dispersion_reference {
                Some(q) => get(q, "fiber.dispersion_reference", FREQUENCY)?,
                None => grid.band_center(),
            },
        })
    }
}
