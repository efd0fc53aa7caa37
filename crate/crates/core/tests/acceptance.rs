//! Acceptance suite. Every check prints one PASS/FAIL line; the run fails if any check does.
//!
//! Run alone with `cargo test -p drnli-core --test acceptance`.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use drnli_core::closed_form::{closed_form_terms, eta_xpm_pairs, mu_closed};
use drnli_core::oracle::{mu_numeric, FrozenProfile};
use drnli_core::pipeline::{run_fit, run_sweep, sweep_offsets};
use drnli_core::presets;
use drnli_core::quadrature::QuadratureSpec;
use drnli_core::spectral::BudgetValues;
use drnli_core::{
    assemble_snr, eta_total, eta_total_numeric, parse_scenario, solve_power_evolution, verify_identities, FitReport,
    LinkConfig, NliReport, OracleOptions, ProfileParams, Scenario, SnrBudget,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn scenario(name: &str) -> Scenario {
    let path = format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_scenario(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Reference scenario and its fit, shared by the tests that need them.
fn reference() -> &'static (Scenario, FitReport) {
    static CELL: OnceLock<(Scenario, FitReport)> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = scenario("reference.json");
        let fit = run_fit(&s).expect("reference fit");
        (s, fit)
    })
}

fn random_params(rng: &mut ChaCha8Rng, pumped: bool, f_i: f64) -> ProfileParams {
    let alpha = rng.random_range(3.0e-5..6.0e-5);
    let slope = rng.random_range(0.5..2.0) * 0.028e-15;
    ProfileParams {
        alpha,
        c_f: slope * rng.random_range(0.5..1.5),
        c_b: if pumped { slope * rng.random_range(0.5..1.5) } else { 0.0 },
        alpha_f: alpha * rng.random_range(0.5..2.0),
        alpha_b: if pumped { rng.random_range(4.0e-5..8.0e-5) } else { alpha },
        p_f: rng.random_range(0.01..0.3),
        p_b: if pumped { rng.random_range(0.1..1.0) } else { 0.0 },
        f_hat: if pumped {
            f_i + rng.random_range(5.0e12..15.0e12)
        } else {
            f_i + rng.random_range(-2.0e12..2.0e12)
        },
    }
}

fn link_function_exactness() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = QuadratureSpec::default().with_rel_tol(1e-12);
    let length = 80e3;
    let f_i = 193.4e12;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while draws < 120 {
        let pumped = draws % 2 == 0;
        let params = random_params(&mut rng, pumped, f_i);
        let Ok(terms) = closed_form_terms(&params, f_i, length) else {
            continue;
        };
        let phi = if draws % 10 == 0 {
            0.0
        } else {
            let mag = 10f64.powf(rng.random_range(-6.0..-1.5));
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        };
        let closed = mu_closed(&terms, phi, length).unwrap();
        let rho = FrozenProfile { params, f_i, length };
        let numeric = mu_numeric(f_i + 1e9, f_i - 2e9, f_i, &rho, phi, length, &spec).unwrap();
        worst = worst.max((closed - numeric).abs() / numeric);
        draws += 1;
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9 && elapsed <= Duration::from_secs(30);
    verdict(
        "link-function exactness",
        ok,
        format!("{draws} draws, max rel err {worst:.2e} (gate 1e-9), {elapsed:.2?} (gate 30 s)"),
    );
    ok
}

fn integral_identities() -> bool {
    let start = Instant::now();
    let report = verify_identities(&QuadratureSpec::default(), 120, 2024);
    let elapsed = start.elapsed();
    for c in &report.checks {
        println!(
            "     {:<17} draws {} max rel err {:.2e} tail {:.1e}",
            c.name, c.draws, c.max_rel_err, c.tail_bound
        );
    }
    let ok = report.all_passed() && elapsed <= Duration::from_secs(60);
    let worst = report.checks.iter().map(|c| c.max_rel_err).fold(0.0, f64::max);
    verdict(
        "identity suite",
        ok,
        format!("{} identities, max rel err {worst:.2e}, {elapsed:.2?} (gate 60 s)", report.checks.len()),
    );
    ok && report.require().is_ok()
}

/// Single-exponential GN closed forms written out directly.
fn lumped_by_hand(link: &LinkConfig) -> (Vec<f64>, Vec<f64>) {
    let span = &link.span;
    let a = span.attenuation.at(link.grid.band_center());
    let l = span.length;
    let e2 = (-2.0 * a * l).exp();
    let g2 = span.gamma * span.gamma;
    let n = link.span_count as f64;
    let f0 = span.dispersion_reference;
    let ch = &link.grid.channels;
    let mut spm = Vec::new();
    let mut xpm = Vec::new();
    for (i, ci) in ch.iter().enumerate() {
        let (fi, b) = (ci.center_frequency - f0, ci.bandwidth);
        let phi = (-4.0 * PI * PI * (span.beta2 + 2.0 * PI * span.beta3 * fi)).abs();
        let main = 4.0 * (1.0 + e2) * (3.0 * phi * b * b / (8.0 * PI * a)).asinh();
        let tail = 16.0 * e2 * ((phi * l / (2.0 * PI)).sqrt() * b).ln();
        spm.push(n.powf(1.0 + link.coherence_epsilon) * 16.0 / 27.0 * PI * g2 / (b * b * phi * 2.0 * a) * (main - tail));

        let mut sum = 0.0;
        for (k, ck) in ch.iter().enumerate() {
            if k == i {
                continue;
            }
            let fk = ck.center_frequency - f0;
            let phi_ik = (-4.0 * PI * PI * (fk - fi) * (span.beta2 + PI * span.beta3 * (fi + fk))).abs();
            let ratio = ck.launch_power() / ci.launch_power();
            let body = 2.0 * (1.0 + e2) * (phi_ik * b / (2.0 * a)).atan() - 2.0 * PI * e2;
            sum += n * ratio * ratio * 32.0 / 27.0 * g2 / (phi_ik * ck.bandwidth * a) * body;
        }
        xpm.push(sum);
    }
    (spm, xpm)
}

fn lumped_reduction() -> bool {
    let s = scenario("no_pump.json");
    assert_eq!(s.link.grid.len(), 9);
    let fit = run_fit(&s).unwrap();
    let report = eta_total(&s.link, &fit).unwrap();
    let (spm, xpm) = lumped_by_hand(&s.link);
    let mut worst: f64 = 0.0;
    for i in 0..9 {
        worst = worst.max((report.eta_spm[i] - spm[i]).abs() / spm[i]);
        worst = worst.max((report.eta_xpm[i] - xpm[i]).abs() / xpm[i]);
    }
    let ok = worst <= 1e-9;
    verdict(
        "lumped reduction",
        ok,
        format!("9 channels, max rel err of SPM and XPM {worst:.2e} (gate 1e-9)"),
    );
    ok
}

fn profile_fit_gate() -> bool {
    let (_, fit) = reference();
    let worst = fit.max_rms_db();
    let over = fit.rms_db.iter().filter(|r| **r > 0.1).count();
    let ok = worst <= 0.1;
    verdict(
        "profile fit",
        ok,
        format!(
            "{} channels, max RMS residual {worst:.4} dB (gate 0.1 dB), {over} channels above the gate",
            fit.len()
        ),
    );
    ok
}

fn closed_form_against_oracle() -> bool {
    let (s, fit) = reference();
    let start = Instant::now();
    let closed = eta_total(&s.link, fit).unwrap();
    let numeric = eta_total_numeric(&s.link, fit, &OracleOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let db = |x: f64, y: f64| 10.0 * (x / y).log10();

    let mut worst_total: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    let channels = &s.link.grid.channels;
    for i in 0..closed.len() {
        worst_total = worst_total.max(db(closed.eta_total[i], numeric.eta_total[i]).abs());
        for (k, eta) in eta_xpm_pairs(&s.link, fit, i).unwrap() {
            let df = (channels[k].center_frequency - channels[i].center_frequency).abs();
            if df >= 3.0 * channels[k].bandwidth {
                worst_pair = worst_pair.max(db(eta, numeric.pair(i, k).unwrap()).abs());
            }
        }
    }
    let ok = worst_total <= 0.5 && worst_pair <= 0.2 && numeric.converged && elapsed <= Duration::from_secs(600);
    verdict(
        "closed form vs oracle",
        ok,
        format!(
            "max |total delta| {worst_total:.4} dB (gate 0.5), max |far-pair delta| {worst_pair:.4} dB (gate 0.2), \
             oracle rel err {:.1e}, {elapsed:.1?} (gate 600 s)",
            numeric.max_rel_error
        ),
    );
    ok
}

fn closed_form_speed() -> bool {
    let mut link = presets::reference_link();
    link.grid = drnli_core::WdmGrid::uniform(100, presets::CENTER_FREQUENCY, 50e9, 50e9, 1e-3, 1);
    let a = link.span.attenuation.at(presets::CENTER_FREQUENCY);
    let params = ProfileParams {
        alpha: a,
        c_f: link.span.raman_slope,
        c_b: link.span.raman_slope,
        alpha_f: a,
        alpha_b: link.pumps[0].attenuation,
        p_f: link.forward_power(0),
        p_b: link.backward_power(),
        f_hat: link.mean_pump_frequency(),
    };
    let fit = FitReport {
        frequencies: link.grid.frequencies(),
        params: vec![params; 100],
        rms_db: vec![0.0; 100],
        iterations: vec![0; 100],
        converged: vec![true; 100],
    };
    for _ in 0..3 {
        eta_total(&link, &fit).unwrap();
    }
    let mut times: Vec<Duration> = (0..21)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(eta_total(&link, &fit).unwrap());
            t.elapsed()
        })
        .collect();
    times.sort();
    let median = times[times.len() / 2];
    let ok = median <= Duration::from_millis(10);
    verdict(
        "closed-form speed",
        ok,
        format!("100 channels in {median:.2?} median (gate 10 ms)"),
    );
    ok
}

fn snr_budget_arithmetic() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let link = presets::lumped_link(8, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mut grid = link.grid.clone();
        let eta: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.random_range(0.0..4.0))).collect();
        let ase: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.random_range(1.0..4.0))).collect();
        let trx = if rng.random_bool(0.3) { f64::INFINITY } else { 10f64.powf(rng.random_range(1.0..4.0)) };
        for ch in &mut grid.channels {
            ch.launch_power_per_span[0] = 10f64.powf(rng.random_range(-4.5..-1.5));
        }
        let report = NliReport {
            frequencies: grid.frequencies(),
            launch_power: vec![0.0; 8],
            eta_spm: vec![0.0; 8],
            eta_xpm: eta.clone(),
            eta_total: eta.clone(),
            snr_nli: Vec::new(),
            snr_total: Vec::new(),
            snr_nli_db: Vec::new(),
            snr_total_db: Vec::new(),
            degenerate_pairs: Vec::new(),
        };
        let budget = SnrBudget {
            snr_ase: BudgetValues::PerChannel(ase.clone()),
            snr_trx: BudgetValues::Broadcast(trx),
        };
        let r = assemble_snr(report, &budget, &grid).unwrap();
        for i in 0..8 {
            let p = grid.channels[i].launch_power();
            let nli = eta[i] * p * p;
            let expected = 1.0 / (nli + 1.0 / ase[i] + 1.0 / trx);
            worst = worst.max((r.snr_total[i] - expected).abs() / expected);
            worst = worst.max((r.snr_nli[i] * nli - 1.0).abs());
        }
    }

    let s = scenario("reference.json");
    let offsets = sweep_offsets(-4.0, 4.0, 1.0).unwrap();
    let sweep = run_sweep(&s, &offsets).unwrap();
    let n = s.link.grid.len();
    let mut worst_slope: f64 = 0.0;
    for ch in 0..n {
        let pts: Vec<(f64, f64)> = sweep
            .rows
            .iter()
            .filter(|r| r.channel == ch)
            .map(|r| (r.offset_db, r.snr_nli_db))
            .collect();
        assert_eq!(pts.len(), 9);
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / 9.0;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / 9.0;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        worst_slope = worst_slope.max((sxy / sxx + 2.0).abs());
    }
    let ok = worst <= 1e-12 && worst_slope <= 0.01;
    verdict(
        "SNR budget",
        ok,
        format!(
            "reciprocal sum max rel err {worst:.2e} (gate 1e-12), sweep slope max |s + 2| {worst_slope:.2e} dB/dB (gate 0.01)"
        ),
    );
    ok
}

fn rk4_convergence_order() -> bool {
    let link = presets::strong_three_channel();
    let end = |steps: usize| -> Vec<f64> {
        let ev = solve_power_evolution(&link, 0, steps).unwrap();
        ev.powers.iter().map(|row| *row.last().unwrap()).collect()
    };
    let exact = end(25_600);
    let steps = [100usize, 200, 400, 800];
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .map(|&n| {
            let e = end(n)
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ((link.span.length / n as f64).ln(), e.ln())
        })
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let order = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let ok = (order - 4.0).abs() <= 0.3;
    verdict(
        "RK4 order",
        ok,
        format!("empirical order {order:.3} from steps {steps:?} (gate 4.0 +- 0.3)"),
    );
    ok
}

fn main() {
    let checks: [(&str, fn() -> bool); 8] = [
        ("link_function_exactness", link_function_exactness),
        ("integral_identities", integral_identities),
        ("lumped_reduction", lumped_reduction),
        ("profile_fit_gate", profile_fit_gate),
        ("closed_form_against_oracle", closed_form_against_oracle),
        ("closed_form_speed", closed_form_speed),
        ("snr_budget_arithmetic", snr_budget_arithmetic),
        ("rk4_convergence_order", rk4_convergence_order),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        let ok = std::panic::catch_unwind(check).unwrap_or_else(|_| {
            println!("FAIL {name}: panicked");
            false
        });
        if !ok {
            failed.push(name);
        }
    }
    println!("acceptance: {} of {} passed", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
