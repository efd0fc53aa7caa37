//! XPM and SPM efficiencies as double integrals of the link function.
//!
//! `f1` runs over the channel under test and `f2` over the interferer, both
//! as offsets from the channel centres. The phase is
//! `phi = u f1 (p + q f1)` with `u`, `p` and `q` depending on `f2` only.
//!
//! Fast path: with the profile frozen at the CUT frequency, `mu` depends on
//! `phi` alone. Writing `mu = dM/dphi` and integrating by parts turns the
//! inner integral into boundary lookups of `M` plus a small smooth remainder.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fwm_amplitude, FilonTransform, FrozenProfile, LinkTable, NegativeGuard, ProfileEvaluator};
use crate::closed_form::{phi_ik, MIN_PHI_IK};
use crate::error::{Error, Result};
use crate::profile::FitReport;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::spectral::{Channel, FiberSpan, LinkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleOptions {
    pub quadrature: QuadratureSpec,
    /// Keep the third frequency `f1 + f2 - f_i` inside the interferer band.
    pub window: bool,
    /// Full phase; otherwise the first-order form `phi_ik f1` (`phi_i f1 f2`
    /// for SPM).
    pub exact_phase: bool,
    /// Filon panels along the span.
    pub panels: usize,
    /// Link-table node spacing in units of `1/L`.
    pub table_resolution: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            quadrature: QuadratureSpec::eta(),
            window: true,
            exact_phase: true,
            panels: 64,
            table_resolution: 0.125,
        }
    }
}

impl OracleOptions {
    fn check(&self) -> Result<()> {
        if !self.quadrature.is_valid() || self.panels == 0 || !(self.table_resolution > 0.0) {
            return Err(Error::InvalidInput(format!("invalid oracle options {self:?}")));
        }
        Ok(())
    }
}

/// A quadrature value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl EtaEstimate {
    const ZERO: EtaEstimate = EtaEstimate {
        value: 0.0,
        error: 0.0,
        converged: true,
    };

    fn scaled(self, s: f64) -> Self {
        EtaEstimate {
            value: self.value * s,
            error: self.error * s.abs(),
            converged: self.converged,
        }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

/// Phase and integration domain of one channel pair.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    /// `f_k - f_i`.
    d: f64,
    /// `f_i + f_k` measured from the dispersion reference.
    s: f64,
    b_i: f64,
    b_k: f64,
    beta2: f64,
    beta3: f64,
    spm: bool,
    exact: bool,
    window: bool,
}

impl Geometry {
    fn new(span: &FiberSpan, ci: &Channel, ck: &Channel, spm: bool, options: &OracleOptions) -> Self {
        let fi = ci.center_frequency - span.dispersion_reference;
        let fk = ck.center_frequency - span.dispersion_reference;
        Geometry {
            d: fk - fi,
            s: fi + fk,
            b_i: ci.bandwidth,
            b_k: ck.bandwidth,
            beta2: span.beta2,
            beta3: span.beta3,
            spm,
            exact: options.exact_phase,
            window: options.window,
        }
    }

    /// `(u, p, q)` at interferer offset `f2`.
    fn phase(&self, f2: f64) -> (f64, f64, f64) {
        let c = -4.0 * PI * PI;
        if self.exact {
            (f2 + self.d, c * (self.beta2 + PI * self.beta3 * (f2 + self.s)), c * PI * self.beta3)
        } else {
            let u = if self.spm { f2 } else { self.d };
            (u, c * (self.beta2 + PI * self.beta3 * self.s), 0.0)
        }
    }

    fn phi(&self, f1: f64, f2: f64) -> f64 {
        let (u, p, q) = self.phase(f2);
        u * f1 * (p + q * f1)
    }

    fn f1_range(&self, f2: f64) -> (f64, f64) {
        let (mut a, mut b) = (-0.5 * self.b_i, 0.5 * self.b_i);
        if self.window {
            a = a.max(-0.5 * self.b_k - f2);
            b = b.min(0.5 * self.b_k - f2);
        }
        (a, b)
    }

    /// Interior points of the `f2` range where the inner integral has a kink
    /// or a sharp peak.
    fn segments(&self) -> Vec<f64> {
        let h = 0.5 * self.b_k;
        let mut points = vec![-h, h];
        if self.window {
            points.push(0.5 * (self.b_i - self.b_k));
            points.push(0.5 * (self.b_k - self.b_i));
        }
        if self.exact || self.spm {
            points.push(-self.d);
        }
        points.retain(|x| (-h..=h).contains(x));
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * h);
        points
    }

    /// Largest `|phi|` over the integration rectangle.
    fn phi_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for f1 in [-0.5 * self.b_i, 0.5 * self.b_i] {
            for f2 in [-0.5 * self.b_k, 0.0, 0.5 * self.b_k] {
                m = m.max(self.phi(f1, f2).abs());
            }
        }
        m
    }

    fn prefactor(&self, gamma: f64) -> f64 {
        if self.spm {
            16.0 / 27.0 * gamma * gamma / (self.b_i * self.b_i)
        } else {
            32.0 / 27.0 * gamma * gamma / (self.b_k * self.b_k)
        }
    }
}

/// `int mu(phi(f1, f2)) df1` over the CUT band for fixed `f2`.
fn inner_fast(table: &LinkTable, g: &Geometry, f2: f64, spec: &QuadratureSpec) -> f64 {
    let (a, b) = g.f1_range(f2);
    if b <= a {
        return 0.0;
    }
    let (u, p, q) = g.phase(f2);
    if u == 0.0 || (p == 0.0 && q == 0.0) {
        return table.average(0.0) * (b - a);
    }
    let (da, db) = (p + 2.0 * q * a, p + 2.0 * q * b);
    if !(da * db > 0.0) {
        // The phase turns inside the band; integrate mu directly.
        return integrate(|f1| table.mu(u * f1 * (p + q * f1)), a, b, 8, spec).value[0];
    }
    let h = |f1: f64| f1 * (p + q * f1) / (p + 2.0 * q * f1);
    let s = |f1: f64| table.average(u * f1 * (p + q * f1));
    let boundary = s(b) * h(b) - s(a) * h(a);
    if q == 0.0 {
        return boundary;
    }
    let rem_spec = QuadratureSpec {
        abs_tol: 1e-2 * spec.rel_tol * boundary.abs(),
        ..*spec
    };
    let remainder = integrate(
        |f1| {
            let w = p + 2.0 * q * f1;
            2.0 * q * s(f1) * f1 * (p + q * f1) / (w * w)
        },
        a,
        b,
        1,
        &rem_spec,
    );
    boundary + remainder.value[0]
}

fn outer<F: FnMut(f64) -> f64>(g: &Geometry, mut inner: F, spec: &QuadratureSpec) -> EtaEstimate {
    let points = g.segments();
    let mut est = EtaEstimate::ZERO;
    for w in points.windows(2) {
        let r = integrate(&mut inner, w[0], w[1], 1, spec);
        est.value += r.value[0];
        est.error += r.error;
        est.converged &= r.converged;
    }
    est
}

/// Link-function table of one channel under test.
#[derive(Debug, Clone)]
pub struct CutOracle {
    index: usize,
    table: LinkTable,
    options: OracleOptions,
}

impl CutOracle {
    /// Tabulates the link function of channel `i` with the profile frozen at
    /// the channel frequency, up to the largest phase of any pair.
    pub fn new(link: &LinkConfig, i: usize, profile: &dyn ProfileEvaluator, options: &OracleOptions) -> Result<Self> {
        check_index(link, i)?;
        let ci = &link.grid.channels[i];
        let phi_max = link
            .grid
            .channels
            .iter()
            .enumerate()
            .map(|(k, ck)| Geometry::new(&link.span, ci, ck, k == i, options).phi_max())
            .fold(0.0, f64::max);
        Self::with_phi_max(link, i, profile, options, phi_max)
    }

    fn with_phi_max(
        link: &LinkConfig,
        i: usize,
        profile: &dyn ProfileEvaluator,
        options: &OracleOptions,
        phi_max: f64,
    ) -> Result<Self> {
        options.check()?;
        let f_i = link.grid.channels[i].center_frequency;
        let guard = NegativeGuard::default();
        let transform = FilonTransform::new(
            |z| {
                let r = profile.rho(z, f_i);
                guard.check(z, r);
                r
            },
            link.span.length,
            options.panels,
        );
        guard.result()?;
        let table = LinkTable::build(transform, 1.01 * phi_max, options.table_resolution);
        Ok(CutOracle {
            index: i,
            table,
            options: *options,
        })
    }

    pub fn table(&self) -> &LinkTable {
        &self.table
    }

    fn kernel(&self, link: &LinkConfig, k: usize) -> EtaEstimate {
        let ci = &link.grid.channels[self.index];
        let g = Geometry::new(&link.span, ci, &link.grid.channels[k], k == self.index, &self.options);
        let spec = &self.options.quadrature;
        outer(&g, |f2| inner_fast(&self.table, &g, f2, spec), spec).scaled(g.prefactor(link.span.gamma))
    }

    /// Single-span XPM of interferer `k` with `(P_k / P_i)^2` applied.
    pub fn xpm(&self, link: &LinkConfig, k: usize) -> Result<EtaEstimate> {
        check_index(link, k)?;
        if k == self.index {
            return Err(Error::InvalidInput("XPM interferer equals the channel under test".into()));
        }
        let ch = &link.grid.channels;
        let ratio = ch[k].launch_power() / ch[self.index].launch_power();
        Ok(self.kernel(link, k).scaled(ratio * ratio))
    }

    /// Single-span SPM.
    pub fn spm(&self, link: &LinkConfig) -> EtaEstimate {
        self.kernel(link, self.index)
    }
}

fn check_index(link: &LinkConfig, i: usize) -> Result<()> {
    if i >= link.grid.len() {
        return Err(Error::InvalidInput(format!(
            "channel index {i} out of range for {} channels",
            link.grid.len()
        )));
    }
    Ok(())
}

fn pair_oracle(
    link: &LinkConfig,
    i: usize,
    k: usize,
    profile: &dyn ProfileEvaluator,
    options: &OracleOptions,
) -> Result<CutOracle> {
    check_index(link, i)?;
    check_index(link, k)?;
    let ch = &link.grid.channels;
    let g = Geometry::new(&link.span, &ch[i], &ch[k], i == k, options);
    CutOracle::with_phi_max(link, i, profile, options, g.phi_max())
}

/// Single-span XPM efficiency of `k` on `i` by the tabulated fast path. The
/// profile is sampled at the CUT frequency only.
pub fn eta_xpm_numeric(
    link: &LinkConfig,
    i: usize,
    k: usize,
    profile: &dyn ProfileEvaluator,
    options: &OracleOptions,
) -> Result<EtaEstimate> {
    pair_oracle(link, i, k, profile, options)?.xpm(link, k)
}

/// Single-span SPM efficiency by the tabulated fast path.
pub fn eta_spm_numeric(
    link: &LinkConfig,
    i: usize,
    profile: &dyn ProfileEvaluator,
    options: &OracleOptions,
) -> Result<EtaEstimate> {
    Ok(pair_oracle(link, i, i, profile, options)?.spm(link))
}

fn direct(
    link: &LinkConfig,
    i: usize,
    k: usize,
    profile: &dyn ProfileEvaluator,
    options: &OracleOptions,
) -> Result<EtaEstimate> {
    options.check()?;
    check_index(link, i)?;
    check_index(link, k)?;
    let ch = &link.grid.channels;
    let (ci, ck) = (&ch[i], &ch[k]);
    let g = Geometry::new(&link.span, ci, ck, i == k, options);
    let spec = &options.quadrature;
    let guard = NegativeGuard::default();
    let mu = |f1: f64, f2: f64| {
        let t = FilonTransform::new(
            |z| fwm_amplitude(profile, &guard, z, ci.center_frequency + f1, ck.center_frequency + f2, ci.center_frequency),
            link.span.length,
            options.panels,
        );
        t.mu(g.phi(f1, f2))
    };
    let est = outer(
        &g,
        |f2| {
            let (a, b) = g.f1_range(f2);
            if b <= a {
                0.0
            } else {
                integrate(|f1| mu(f1, f2), a, b, 1, spec).value[0]
            }
        },
        spec,
    );
    guard.result()?;
    let ratio = ck.launch_power() / ci.launch_power();
    Ok(est.scaled(g.prefactor(link.span.gamma) * ratio * ratio))
}

/// Single-span XPM by nested adaptive quadrature with the link function
/// recomputed at every `(f1, f2)` from the full four-frequency profile. Slow.
pub fn eta_xpm_direct(
    link: &LinkConfig,
    i: usize,
    k: usize,
    profile: &dyn ProfileEvaluator,
    options: &OracleOptions,
) -> Result<EtaEstimate> {
    if i == k {
        return Err(Error::InvalidInput("XPM interferer equals the channel under test".into()));
    }
    direct(link, i, k, profile, options)
}

/// Single-span SPM by nested adaptive quadrature. Slow.
pub fn eta_spm_direct(
    link: &LinkConfig,
    i: usize,
    profile: &dyn ProfileEvaluator,
    options: &OracleOptions,
) -> Result<EtaEstimate> {
    direct(link, i, i, profile, options)
}

/// Numerical NLI efficiencies of every channel after all spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub frequencies: Vec<f64>,
    pub eta_spm: Vec<f64>,
    pub eta_xpm: Vec<f64>,
    pub eta_total: Vec<f64>,
    /// Estimated absolute quadrature error of each `eta_total`.
    pub error: Vec<f64>,
    /// Per channel, `(k, eta)` of every non-degenerate interferer.
    pub pairs: Vec<Vec<(usize, f64)>>,
    pub degenerate_pairs: Vec<(usize, usize)>,
    /// Largest relative error estimate of any single integral.
    pub max_rel_error: f64,
    pub converged: bool,
}

impl OracleReport {
    pub fn pair(&self, i: usize, k: usize) -> Option<f64> {
        self.pairs.get(i)?.iter().find(|p| p.0 == k).map(|p| p.1)
    }
}

struct ChannelResult {
    spm: EtaEstimate,
    pairs: Vec<(usize, EtaEstimate)>,
    degenerate: Vec<usize>,
}

/// Oracle counterpart of the closed-form total: each channel uses its own
/// fitted profile, and the span accumulation matches the closed form.
pub fn eta_total_numeric(link: &LinkConfig, fit: &FitReport, options: &OracleOptions) -> Result<OracleReport> {
    options.check()?;
    if fit.len() != link.grid.len() {
        return Err(Error::InvalidInput(format!(
            "fit covers {} channels, link has {}",
            fit.len(),
            link.grid.len()
        )));
    }
    let channels = &link.grid.channels;
    let per_channel: Vec<ChannelResult> = (0..channels.len())
        .into_par_iter()
        .map(|i| -> Result<ChannelResult> {
            let ci = &channels[i];
            let p_ref = ci.launch_power();
            let weight = |ch: &Channel| -> f64 { ch.launch_power_per_span.iter().map(|p| (p / p_ref).powi(2)).sum() };
            let profile = FrozenProfile {
                params: fit.params[i],
                f_i: ci.center_frequency,
                length: link.span.length,
            };
            let oracle = CutOracle::new(link, i, &profile, options)?;
            let coherence = (link.span_count as f64).powf(link.coherence_epsilon);
            let spm = oracle.kernel(link, i).scaled(coherence * weight(ci));
            let mut pairs = Vec::new();
            let mut degenerate = Vec::new();
            for (k, ck) in channels.iter().enumerate() {
                if k == i {
                    continue;
                }
                if !(phi_ik(&link.span, ci.center_frequency, ck.center_frequency).abs() >= MIN_PHI_IK) {
                    degenerate.push(k);
                    continue;
                }
                pairs.push((k, oracle.kernel(link, k).scaled(weight(ck))));
            }
            Ok(ChannelResult { spm, pairs, degenerate })
        })
        .collect::<Result<_>>()?;

    let mut report = OracleReport {
        frequencies: link.grid.frequencies(),
        eta_spm: Vec::new(),
        eta_xpm: Vec::new(),
        eta_total: Vec::new(),
        error: Vec::new(),
        pairs: Vec::new(),
        degenerate_pairs: Vec::new(),
        max_rel_error: 0.0,
        converged: true,
    };
    for (i, r) in per_channel.into_iter().enumerate() {
        let xpm = r.pairs.iter().fold(0.0, |acc, p| acc + p.1.value);
        let error: f64 = r.spm.error + r.pairs.iter().map(|p| p.1.error).sum::<f64>();
        for e in std::iter::once(&r.spm).chain(r.pairs.iter().map(|p| &p.1)) {
            report.max_rel_error = report.max_rel_error.max(e.rel_error());
            report.converged &= e.converged;
        }
        report.eta_spm.push(r.spm.value);
        report.eta_xpm.push(xpm);
        report.eta_total.push(r.spm.value + xpm);
        report.error.push(error);
        report.pairs.push(r.pairs.iter().map(|(k, e)| (*k, e.value)).collect());
        report.degenerate_pairs.extend(r.degenerate.iter().map(|k| (i, *k)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::LossOnly;
    use crate::presets;
    use crate::spectral::WdmGrid;
    use approx::assert_relative_eq;

    /// Short span, narrow channels: small enough for the direct path.
    fn small_link(count: usize) -> LinkConfig {
        let mut link = presets::lumped_link(count, 1);
        link.span.length = 20e3;
        link.grid = WdmGrid::uniform(count, presets::CENTER_FREQUENCY, 30e9, 10e9, 1e-3, 1);
        link
    }

    fn loss(link: &LinkConfig) -> LossOnly {
        LossOnly {
            alpha: link.span.attenuation.at(presets::CENTER_FREQUENCY),
        }
    }

    #[test]
    fn zero_gamma_gives_zero() {
        let mut link = small_link(3);
        link.span.gamma = 0.0;
        let opts = OracleOptions::default();
        assert_eq!(eta_xpm_numeric(&link, 1, 0, &loss(&link), &opts).unwrap().value, 0.0);
        assert_eq!(eta_spm_numeric(&link, 1, &loss(&link), &opts).unwrap().value, 0.0);
    }

    #[test]
    fn fast_path_matches_direct_quadrature() {
        let link = small_link(3);
        let rho = loss(&link);
        let opts = OracleOptions {
            quadrature: QuadratureSpec::default().with_rel_tol(1e-7),
            ..OracleOptions::default()
        };
        let direct_opts = OracleOptions {
            quadrature: QuadratureSpec::default().with_rel_tol(1e-6),
            panels: 16,
            ..opts
        };
        let fast = eta_xpm_numeric(&link, 1, 2, &rho, &opts).unwrap();
        let slow = eta_xpm_direct(&link, 1, 2, &rho, &direct_opts).unwrap();
        assert!(fast.converged && slow.converged);
        assert_relative_eq!(fast.value, slow.value, max_relative = 1e-5);

        let fast = eta_spm_numeric(&link, 1, &rho, &opts).unwrap();
        let slow = eta_spm_direct(&link, 1, &rho, &direct_opts).unwrap();
        assert_relative_eq!(fast.value, slow.value, max_relative = 1e-5);
    }

    #[test]
    fn mirror_neighbours_are_equal_without_slope() {
        let mut link = small_link(3);
        link.span.beta3 = 0.0;
        let rho = loss(&link);
        let opts = OracleOptions::default();
        let lo = eta_xpm_numeric(&link, 1, 0, &rho, &opts).unwrap();
        let hi = eta_xpm_numeric(&link, 1, 2, &rho, &opts).unwrap();
        assert_relative_eq!(lo.value, hi.value, max_relative = 1e-6);
    }

    #[test]
    fn window_and_phase_options_change_little_far_from_the_cut() {
        let link = presets::lumped_link(5, 1);
        let rho = loss(&link);
        let base = OracleOptions::default();
        let full = eta_xpm_numeric(&link, 0, 4, &rho, &base).unwrap().value;
        let no_window = eta_xpm_numeric(&link, 0, 4, &rho, &OracleOptions { window: false, ..base })
            .unwrap()
            .value;
        let approx_phase = eta_xpm_numeric(&link, 0, 4, &rho, &OracleOptions { exact_phase: false, ..base })
            .unwrap()
            .value;
        assert!(no_window >= full);
        assert_relative_eq!(no_window, full, max_relative = 0.05);
        assert_relative_eq!(approx_phase, full, max_relative = 0.05);
    }

    #[test]
    fn wider_channels_average_more_dispersion() {
        let mut link = presets::lumped_link(1, 1);
        let rho = loss(&link);
        let opts = OracleOptions::default();
        let narrow = eta_spm_numeric(&link, 0, &rho, &opts).unwrap().value;
        link.grid.channels[0].bandwidth *= 2.0;
        let wide = eta_spm_numeric(&link, 0, &rho, &opts).unwrap().value;
        assert!(wide < narrow);
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        let link = presets::lumped_link(3, 1);
        let rho = loss(&link);
        let coarse = OracleOptions::default();
        let fine = OracleOptions {
            quadrature: coarse.quadrature.with_rel_tol(0.5 * coarse.quadrature.rel_tol),
            ..coarse
        };
        for k in [0, 2] {
            let a = eta_xpm_numeric(&link, 1, k, &rho, &coarse).unwrap().value;
            let b = eta_xpm_numeric(&link, 1, k, &rho, &fine).unwrap().value;
            assert_relative_eq!(a, b, max_relative = coarse.quadrature.rel_tol);
        }
        let a = eta_spm_numeric(&link, 1, &rho, &coarse).unwrap().value;
        let b = eta_spm_numeric(&link, 1, &rho, &fine).unwrap().value;
        assert_relative_eq!(a, b, max_relative = coarse.quadrature.rel_tol);
    }
}
