//! End-to-end workflows behind the command-line tool.

use serde::Serialize;

use crate::closed_form::{assemble_snr, eta_total, NliReport};
use crate::error::{Error, Result};
use crate::oracle::{eta_total_numeric, OracleReport};
use crate::profile::{fit_profile_with, FitReport};
use crate::raman::{solve_power_evolution_with, PowerEvolution};
use crate::report::{to_db, Csv};
use crate::scenario::Scenario;
use crate::spectral::Unit;

/// Power evolution of the first span.
pub fn run_solve(scenario: &Scenario) -> Result<PowerEvolution> {
    solve_power_evolution_with(&scenario.link, 0, &scenario.solver)
}

/// Solves the first span and fits every channel's profile. The fit is reused
/// for all spans.
pub fn run_fit(scenario: &Scenario) -> Result<FitReport> {
    let evolution = run_solve(scenario)?;
    fit_profile_with(&evolution, &scenario.link, &scenario.fit)
}

/// Closed-form NLI and SNR of every channel.
pub fn run_nli(scenario: &Scenario) -> Result<NliReport> {
    let fit = run_fit(scenario)?;
    nli_with_fit(scenario, &fit)
}

fn nli_with_fit(scenario: &Scenario, fit: &FitReport) -> Result<NliReport> {
    let report = eta_total(&scenario.link, fit)?;
    assemble_snr(report, &scenario.budget, &scenario.link.grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub channel: usize,
    pub frequency: f64,
    pub eta_closed: f64,
    pub eta_numeric: f64,
    /// `10 log10(eta_closed / eta_numeric)`.
    pub delta_db: f64,
    /// Absolute quadrature error estimate of `eta_numeric`.
    pub quad_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub max_abs_delta_db: f64,
    pub gate_db: f64,
    pub passed: bool,
    pub oracle_converged: bool,
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::with_header(&["channel", "eta_closed", "eta_numeric", "delta_db", "quad_error"]);
        for r in &self.rows {
            csv.row(&[r.channel.to_string()], &[r.eta_closed, r.eta_numeric, r.delta_db, r.quad_error]);
        }
        csv.finish()
    }
}

/// Closed form against the numerical oracle, both on the same fitted profile.
pub fn run_compare(scenario: &Scenario, gate_db: f64) -> Result<(CompareReport, NliReport, OracleReport)> {
    if !(gate_db >= 0.0) {
        return Err(Error::InvalidInput(format!("gate {gate_db} dB must be non-negative")));
    }
    let fit = run_fit(scenario)?;
    let closed = nli_with_fit(scenario, &fit)?;
    let numeric = eta_total_numeric(&scenario.link, &fit, &scenario.oracle)?;
    let rows: Vec<CompareRow> = (0..closed.len())
        .map(|i| CompareRow {
            channel: i,
            frequency: closed.frequencies[i],
            eta_closed: closed.eta_total[i],
            eta_numeric: numeric.eta_total[i],
            delta_db: to_db(closed.eta_total[i] / numeric.eta_total[i]),
            quad_error: numeric.error[i],
        })
        .collect();
    // NaN propagates into the maximum and fails the gate.
    let max_abs_delta_db = rows
        .iter()
        .map(|r| r.delta_db.abs())
        .fold(0.0, |m: f64, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) });
    let report = CompareReport {
        rows,
        max_abs_delta_db,
        gate_db,
        passed: max_abs_delta_db <= gate_db,
        oracle_converged: numeric.converged,
    };
    Ok((report, closed, numeric))
}

/// Offsets `lo, lo + step, ..., hi` in dB.
pub fn sweep_offsets(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad sweep range {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > 10_000 {
        return Err(Error::InvalidInput(format!("sweep of {n} points is too long")));
    }
    Ok((0..n).map(|j| lo + j as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub offset_db: f64,
    pub channel: usize,
    pub frequency: f64,
    pub launch_power_dbm: f64,
    pub snr_nli_db: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::with_header(&["channel", "offset_db", "f_i_hz", "launch_power_dbm", "snr_nli_db", "snr_db"]);
        for r in &self.rows {
            csv.row(
                &[r.channel.to_string()],
                &[r.offset_db, r.frequency, r.launch_power_dbm, r.snr_nli_db, r.snr_db],
            );
        }
        csv.finish()
    }
}

/// SNR of every channel with all launch powers shifted by each offset. The
/// power profile is fitted once at the nominal powers and held fixed.
pub fn run_sweep(scenario: &Scenario, offsets_db: &[f64]) -> Result<SweepReport> {
    let fit = run_fit(scenario)?;
    let mut rows = Vec::with_capacity(offsets_db.len() * scenario.link.grid.len());
    for &offset in offsets_db {
        let scale = Unit::Db.to_si(offset);
        let mut shifted = scenario.clone();
        for ch in &mut shifted.link.grid.channels {
            for p in &mut ch.launch_power_per_span {
                *p *= scale;
            }
        }
        let report = nli_with_fit(&shifted, &fit)?;
        for i in 0..report.len() {
            rows.push(SweepRow {
                offset_db: offset,
                channel: i,
                frequency: report.frequencies[i],
                launch_power_dbm: Unit::Dbm.from_si(report.launch_power[i]),
                snr_nli_db: report.snr_nli_db[i],
                snr_db: report.snr_total_db[i],
            });
        }
    }
    Ok(SweepReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario_str;
    use approx::assert_relative_eq;

    fn lumped(count: usize) -> Scenario {
        parse_scenario_str(&format!(
            r#"{{
                "fiber": {{ "length": 80, "attenuation": 0.2, "beta2": -21.7, "beta3": 0.14, "gamma": 1.3 }},
                "channels": {{ "count": {count}, "center": 193.4, "spacing": 100, "bandwidth": 100, "power": 0 }}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn offsets_include_both_ends() {
        assert_eq!(sweep_offsets(-4.0, 4.0, 1.0).unwrap().len(), 9);
        assert_eq!(sweep_offsets(0.0, 0.0, 0.5).unwrap(), vec![0.0]);
        assert!(sweep_offsets(1.0, 0.0, 1.0).is_err());
        assert!(sweep_offsets(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sweep_slope_is_minus_two() {
        let s = lumped(3);
        let offsets = sweep_offsets(-2.0, 2.0, 1.0).unwrap();
        let r = run_sweep(&s, &offsets).unwrap();
        assert_eq!(r.rows.len(), 15);
        let snr = |o: usize, ch: usize| r.rows[o * 3 + ch].snr_nli_db;
        for ch in 0..3 {
            assert_relative_eq!(snr(4, ch) - snr(0, ch), -8.0, epsilon = 1e-9);
        }
        assert_eq!(r.to_csv().lines().count(), 16);
    }

    #[test]
    fn nli_fills_snr() {
        let r = run_nli(&lumped(3)).unwrap();
        assert_eq!(r.len(), 3);
        for i in 0..3 {
            assert_relative_eq!(r.snr_total[i], r.snr_nli[i], max_relative = 1e-12);
        }
    }
}
