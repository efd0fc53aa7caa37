//! Engineering-unit conversions at the I/O boundary.
//!
//! Everything inside the crate is strict SI: Hz, W, m, 1/m for power
//! attenuation. Decibel quantities convert with the `ln(10)/10` factor, so an
//! attenuation of `x` dB/km becomes a power attenuation of
//! `x * ln(10) / 10 / 1000` per metre.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const DB_TO_NEPER: f64 = std::f64::consts::LN_10 / 10.0;

/// Supported engineering unit tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    /// dB/km, converts to a power attenuation in 1/m.
    DbPerKm,
    /// ps²/km, converts to s²/m.
    Ps2PerKm,
    /// ps³/km, converts to s³/m.
    Ps3PerKm,
    /// dBm, converts to W.
    Dbm,
    /// mW, converts to W.
    MilliWatt,
    /// W (identity).
    Watt,
    /// THz, converts to Hz.
    THz,
    /// GHz, converts to Hz.
    GHz,
    /// km, converts to m.
    Km,
    /// m (identity).
    Metre,
    /// 1/(W·km), converts to 1/(W·m).
    PerWattKm,
    /// 1/(W·km·THz), converts to 1/(W·m·Hz).
    PerWattKmTHz,
    /// dB, converts to a linear ratio.
    Db,
}

impl Unit {
    pub const ALL: [Unit; 13] = [
        Unit::DbPerKm,
        Unit::Ps2PerKm,
        Unit::Ps3PerKm,
        Unit::Dbm,
        Unit::MilliWatt,
        Unit::Watt,
        Unit::THz,
        Unit::GHz,
        Unit::Km,
        Unit::Metre,
        Unit::PerWattKm,
        Unit::PerWattKmTHz,
        Unit::Db,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Unit::DbPerKm => "dB/km",
            Unit::Ps2PerKm => "ps^2/km",
            Unit::Ps3PerKm => "ps^3/km",
            Unit::Dbm => "dBm",
            Unit::MilliWatt => "mW",
            Unit::Watt => "W",
            Unit::THz => "THz",
            Unit::GHz => "GHz",
            Unit::Km => "km",
            Unit::Metre => "m",
            Unit::PerWattKm => "1/(W*km)",
            Unit::PerWattKmTHz => "1/(W*km*THz)",
            Unit::Db => "dB",
        }
    }

    /// Engineering value to SI.
    pub fn to_si(self, value: f64) -> f64 {
        match self {
            Unit::DbPerKm => value * DB_TO_NEPER / 1e3,
            Unit::Ps2PerKm => value * 1e-27,
            Unit::Ps3PerKm => value * 1e-39,
            Unit::Dbm => 1e-3 * 10f64.powf(value / 10.0),
            Unit::MilliWatt => value * 1e-3,
            Unit::Watt | Unit::Metre => value,
            Unit::THz => value * 1e12,
            Unit::GHz => value * 1e9,
            Unit::Km => value * 1e3,
            Unit::PerWattKm => value * 1e-3,
            Unit::PerWattKmTHz => value * 1e-15,
            Unit::Db => 10f64.powf(value / 10.0),
        }
    }

    /// SI value back to engineering units.
    pub fn from_si(self, value: f64) -> f64 {
        match self {
            Unit::DbPerKm => value * 1e3 / DB_TO_NEPER,
            Unit::Ps2PerKm => value * 1e27,
            Unit::Ps3PerKm => value * 1e39,
            Unit::Dbm => 10.0 * (value / 1e-3).log10(),
            Unit::MilliWatt => value * 1e3,
            Unit::Watt | Unit::Metre => value,
            Unit::THz => value * 1e-12,
            Unit::GHz => value * 1e-9,
            Unit::Km => value * 1e-3,
            Unit::PerWattKm => value * 1e3,
            Unit::PerWattKmTHz => value * 1e15,
            Unit::Db => 10.0 * value.log10(),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '²' => '2',
                '³' => '3',
                '·' | '⋅' => '*',
                other => other,
            })
            .collect();
        let unit = match norm.as_str() {
            "dB/km" => Unit::DbPerKm,
            "ps2/km" | "ps^2/km" => Unit::Ps2PerKm,
            "ps3/km" | "ps^3/km" => Unit::Ps3PerKm,
            "dBm" => Unit::Dbm,
            "mW" => Unit::MilliWatt,
            "W" => Unit::Watt,
            "THz" => Unit::THz,
            "GHz" => Unit::GHz,
            "km" => Unit::Km,
            "m" => Unit::Metre,
            "1/(W*km)" | "1/W/km" => Unit::PerWattKm,
            "1/(W*km*THz)" | "1/W/km/THz" => Unit::PerWattKmTHz,
            "dB" => Unit::Db,
            _ => return Err(Error::UnknownUnit(s.to_string())),
        };
        Ok(unit)
    }
}

/// Converts an engineering value tagged with a unit string to SI.
pub fn convert_units(value: f64, tag: &str) -> Result<f64> {
    Ok(tag.parse::<Unit>()?.to_si(value))
}

/// Parses a `"<value> <unit>"` string, e.g. `"0.2 dB/km"`.
pub fn parse_quantity(text: &str) -> Result<(f64, Unit)> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| Error::Parse(format!("quantity `{text}` has no unit")))?;
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| Error::Parse(format!("quantity `{text}` has a malformed number")))?;
    Ok((value, unit.trim().parse()?))
}
