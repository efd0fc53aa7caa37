//! XPM and SPM efficiencies, span accumulation and the SNR budget.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{closed_form_terms, phase_mismatch, sign, ClosedFormTerms, PhaseMismatch};
use crate::error::{Error, Result};
use crate::profile::FitReport;
use crate::report::{to_db, Csv};
use crate::spectral::{Channel, FiberSpan, LinkConfig, SnrBudget, WdmGrid};

/// Per-channel NLI efficiencies and SNRs. Every `eta` has the channel's own
/// launch power squared divided out, so the NLI power is `eta * P_i^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliReport {
    pub frequencies: Vec<f64>,
    /// Launch power into the first span (W).
    pub launch_power: Vec<f64>,
    pub eta_spm: Vec<f64>,
    pub eta_xpm: Vec<f64>,
    pub eta_total: Vec<f64>,
    pub snr_nli: Vec<f64>,
    pub snr_total: Vec<f64>,
    pub snr_nli_db: Vec<f64>,
    pub snr_total_db: Vec<f64>,
    /// `(i, k)` pairs skipped because their phase factor vanishes.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl NliReport {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::with_header(&["f_i_hz", "eta_spm", "eta_xpm", "eta_total", "snr_nli_db", "snr_db"]);
        for i in 0..self.len() {
            csv.row(
                &[],
                &[
                    self.frequencies[i],
                    self.eta_spm[i],
                    self.eta_xpm[i],
                    self.eta_total[i],
                    self.snr_nli_db[i],
                    self.snr_total_db[i],
                ],
            );
        }
        csv.finish()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("nli report serializes")
    }
}

/// Branch quantities shared by every pair sum of one channel.
struct Prepared {
    upsilon: f64,
    alpha_l: f64,
    kappa_f: f64,
    kappa_b: f64,
    decay: f64,
}

fn prepare(terms: &ClosedFormTerms, length: f64) -> Result<Vec<Prepared>> {
    terms
        .active()
        .map(|b| {
            if b.alpha_l == 0.0 {
                return Err(Error::DegenerateDenominator(format!(
                    "alpha_l = 0 for branch ({}, {})",
                    b.l1, b.l2
                )));
            }
            Ok(Prepared {
                upsilon: b.upsilon,
                alpha_l: b.alpha_l,
                kappa_f: b.kappa_f,
                kappa_b: b.kappa_b,
                decay: (-(b.alpha_l * length).abs()).exp(),
            })
        })
        .collect()
}

/// `sum Y Y' / (a_l + a_l') { 2 K [m + m'] + w [tail] }` for main terms `main`.
fn branch_sum(branches: &[Prepared], main: &[f64], phi: f64, tail_weight: f64) -> Result<f64> {
    let s_phi = sign(phi);
    let mut total = 0.0;
    for (a, ma) in branches.iter().zip(main) {
        for (b, mb) in branches.iter().zip(main) {
            let denom = a.alpha_l + b.alpha_l;
            if !(denom.abs() > 1e-9 * a.alpha_l.abs().max(b.alpha_l.abs())) {
                return Err(Error::DegenerateDenominator(format!("alpha_l + alpha_l' = {denom:e}")));
            }
            let same = a.kappa_f * b.kappa_f + a.kappa_b * b.kappa_b;
            let cross = a.kappa_f * b.kappa_b + a.kappa_b * b.kappa_f;
            let skew = a.kappa_f * b.kappa_b - a.kappa_b * b.kappa_f;
            let even = sign(a.alpha_l) * s_phi * a.decay + sign(b.alpha_l) * s_phi * b.decay;
            let odd = -s_phi * a.decay + s_phi * b.decay;
            let tail = -cross * even - skew * odd;
            total += a.upsilon * b.upsilon / denom * (2.0 * same * (ma + mb) + tail_weight * tail);
        }
    }
    Ok(total)
}

/// XPM efficiency for unit power ratio and a single span.
fn xpm_kernel(branches: &[Prepared], phi_ik: f64, b_i: f64, b_k: f64, gamma: f64) -> Result<f64> {
    let main: Vec<f64> = branches
        .iter()
        .map(|b| (phi_ik * b_i / (2.0 * b.alpha_l)).atan())
        .collect();
    let sum = branch_sum(branches, &main, phi_ik, PI)?;
    Ok(32.0 / 27.0 * gamma * gamma / (phi_ik * b_k) * sum)
}

/// SPM efficiency for a single span.
fn spm_kernel(branches: &[Prepared], phi_i: f64, b_i: f64, gamma: f64, length: f64) -> Result<f64> {
    let main: Vec<f64> = branches
        .iter()
        .map(|b| (3.0 * phi_i * b_i * b_i / (8.0 * PI * b.alpha_l)).asinh())
        .collect();
    let log_weight = 4.0 * ((phi_i.abs() * length / (2.0 * PI)).sqrt() * b_i).ln();
    let sum = branch_sum(branches, &main, phi_i, log_weight)?;
    Ok(16.0 / 27.0 * PI * gamma * gamma / (b_i * b_i * phi_i) * sum)
}

/// XPM efficiency of interferer `k` on channel `i` over `n` identical spans,
/// with `(P_k / P_i)^2` applied.
pub fn eta_xpm_pair(
    i: &Channel,
    k: &Channel,
    terms: &ClosedFormTerms,
    phase: &PhaseMismatch,
    span: &FiberSpan,
    n: usize,
) -> Result<f64> {
    let phi_ik = phase.phi_ik.ok_or_else(|| {
        Error::InvalidInput("XPM needs the pair phase factor; pass the interferer frequency".into())
    })?;
    let branches = prepare(terms, span.length)?;
    let ratio = k.launch_power() / i.launch_power();
    Ok(n as f64 * ratio * ratio * xpm_kernel(&branches, phi_ik, i.bandwidth, k.bandwidth, span.gamma)?)
}

/// SPM efficiency of channel `i` over `n` spans with coherence exponent `epsilon`.
pub fn eta_spm(
    i: &Channel,
    terms: &ClosedFormTerms,
    phase: &PhaseMismatch,
    span: &FiberSpan,
    n: usize,
    epsilon: f64,
) -> Result<f64> {
    if phase.phi_i == 0.0 {
        return Err(Error::DispersionFree {
            frequency: i.center_frequency,
        });
    }
    let branches = prepare(terms, span.length)?;
    let n = n as f64;
    Ok(n.powf(1.0 + epsilon) * spm_kernel(&branches, phase.phi_i, i.bandwidth, span.gamma, span.length)?)
}

struct ChannelEta {
    spm: f64,
    pairs: Vec<(usize, f64)>,
    degenerate: Vec<usize>,
}

fn channel_eta(config: &LinkConfig, fit: &FitReport, i: usize) -> Result<ChannelEta> {
    let span = &config.span;
    let channels = &config.grid.channels;
    let ci = &channels[i];
    let p_ref = ci.launch_power();

    let terms = closed_form_terms(&fit.params[i], ci.center_frequency, span.length)?;
    let branches = prepare(&terms, span.length)?;
    let phase = phase_mismatch(span, ci.center_frequency, None)?;
    if phase.phi_i == 0.0 {
        return Err(Error::DispersionFree {
            frequency: ci.center_frequency,
        });
    }

    // Sum over spans of (P_kj / P_i)^2; the per-span kernels are identical.
    let weight = |ch: &Channel| -> f64 {
        ch.launch_power_per_span
            .iter()
            .map(|p| (p / p_ref) * (p / p_ref))
            .sum()
    };
    let coherence = (config.span_count as f64).powf(config.coherence_epsilon);
    let spm = coherence * weight(ci) * spm_kernel(&branches, phase.phi_i, ci.bandwidth, span.gamma, span.length)?;

    let mut pairs = Vec::with_capacity(channels.len().saturating_sub(1));
    let mut degenerate = Vec::new();
    for (k, ck) in channels.iter().enumerate() {
        if k == i {
            continue;
        }
        let phi = super::phi_ik(span, ci.center_frequency, ck.center_frequency);
        if !(phi.abs() >= super::MIN_PHI_IK) {
            degenerate.push(k);
            continue;
        }
        let eta = weight(ck) * xpm_kernel(&branches, phi, ci.bandwidth, ck.bandwidth, span.gamma)?;
        pairs.push((k, eta));
    }
    Ok(ChannelEta { spm, pairs, degenerate })
}

fn check_fit(config: &LinkConfig, fit: &FitReport) -> Result<()> {
    if fit.len() != config.grid.len() {
        return Err(Error::InvalidInput(format!(
            "fit covers {} channels, link has {}",
            fit.len(),
            config.grid.len()
        )));
    }
    Ok(())
}

/// Per-interferer XPM efficiencies of channel `i`, accumulated over spans.
pub fn eta_xpm_pairs(config: &LinkConfig, fit: &FitReport, i: usize) -> Result<Vec<(usize, f64)>> {
    check_fit(config, fit)?;
    Ok(channel_eta(config, fit, i)?.pairs)
}

/// Closed-form NLI efficiency of every channel after all spans.
///
/// The SNR fields assume an infinite ASE/transceiver budget until
/// [`assemble_snr`] fills them in.
pub fn eta_total(config: &LinkConfig, fit: &FitReport) -> Result<NliReport> {
    check_fit(config, fit)?;
    let per_channel: Vec<ChannelEta> = (0..config.grid.len())
        .into_par_iter()
        .map(|i| channel_eta(config, fit, i))
        .collect::<Result<_>>()?;

    let mut report = NliReport {
        frequencies: config.grid.frequencies(),
        launch_power: config.grid.channels.iter().map(Channel::launch_power).collect(),
        eta_spm: Vec::new(),
        eta_xpm: Vec::new(),
        eta_total: Vec::new(),
        snr_nli: Vec::new(),
        snr_total: Vec::new(),
        snr_nli_db: Vec::new(),
        snr_total_db: Vec::new(),
        degenerate_pairs: Vec::new(),
    };
    for (i, ch) in per_channel.iter().enumerate() {
        let xpm = ch.pairs.iter().fold(0.0, |acc, p| acc + p.1);
        report.eta_spm.push(ch.spm);
        report.eta_xpm.push(xpm);
        report.eta_total.push(ch.spm + xpm);
        report.degenerate_pairs.extend(ch.degenerate.iter().map(|k| (i, *k)));
    }
    assemble_snr(report, &SnrBudget::infinite(), &config.grid)
}

/// Fills the SNR fields: `1/SNR = 1/SNR_NLI + 1/SNR_ASE + 1/SNR_TRX` with
/// `SNR_NLI = 1 / (eta P_i^2)`.
pub fn assemble_snr(mut report: NliReport, budget: &SnrBudget, grid: &WdmGrid) -> Result<NliReport> {
    if grid.len() != report.len() {
        return Err(Error::InvalidInput(format!(
            "report has {} channels, grid has {}",
            report.len(),
            grid.len()
        )));
    }
    budget.check(grid.len())?;
    report.launch_power = grid.channels.iter().map(Channel::launch_power).collect();
    report.snr_nli.clear();
    report.snr_total.clear();
    for (i, p) in report.launch_power.iter().enumerate() {
        let snr_nli = 1.0 / (report.eta_total[i] * p * p);
        let inv = 1.0 / snr_nli + 1.0 / budget.snr_ase.get(i) + 1.0 / budget.snr_trx.get(i);
        report.snr_nli.push(snr_nli);
        report.snr_total.push(1.0 / inv);
    }
    report.snr_nli_db = report.snr_nli.iter().map(|s| to_db(*s)).collect();
    report.snr_total_db = report.snr_total.iter().map(|s| to_db(*s)).collect();
    Ok(report)
}
