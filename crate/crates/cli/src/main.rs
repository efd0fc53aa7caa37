//! `drnli`: closed-form NLI and SNR of Raman-amplified WDM links.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drnli_core::pipeline::{run_compare, run_fit, run_nli, run_solve, run_sweep, sweep_offsets};
use drnli_core::raman::MIN_STEPS;
use drnli_core::{parse_scenario, Error, ErrorClass, Scenario};

#[derive(Parser, Debug)]
#[command(name = "drnli", version, about = "Nonlinear-interference SNR of Raman-amplified WDM links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the Raman power equations of the first span.
    Solve(Common),
    /// Fit the semi-analytical profile of every channel.
    Fit(Common),
    /// Closed-form NLI efficiencies and SNR.
    Nli(Common),
    /// Closed form against the numerical oracle.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Largest accepted |closed - oracle| per channel (dB).
        #[arg(long, default_value_t = 0.5)]
        gate_db: f64,
    },
    /// SNR versus a uniform launch-power offset.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Offsets in dB as `lo:hi:step`.
        #[arg(long, default_value = "-4:4:1", allow_hyphen_values = true)]
        sweep: String,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; defaults to the scenario's `output.dir` or `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RK4 steps per span, overriding the scenario.
    #[arg(long)]
    steps: Option<usize>,
}

const EXIT_GATE: u8 = 5;

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Parse => 2,
        ErrorClass::Validation => 3,
        ErrorClass::Numerical => 4,
    }
}

fn load(common: &Common) -> Result<(Scenario, PathBuf), Error> {
    let mut scenario = parse_scenario(&common.scenario)?;
    if let Some(steps) = common.steps {
        if steps < MIN_STEPS {
            return Err(Error::InvalidInput(format!("--steps {steps} is below the minimum of {MIN_STEPS}")));
        }
        scenario.solver.steps = steps;
    }
    let out = common
        .out
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((scenario, out))
}

/// Writes every artifact once the command has finished.
fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_sweep(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Parse(format!("--sweep `{text}` is not lo:hi:step")))?;
    match nums.as_slice() {
        [lo, hi, step] => sweep_offsets(*lo, *hi, *step),
        _ => Err(Error::Parse(format!("--sweep `{text}` is not lo:hi:step"))),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve(common) => {
            let (scenario, out) = load(&common)?;
            let evolution = run_solve(&scenario)?;
            write_all(&out, &[("power_evolution.csv", evolution.to_csv())])?;
        }
        Command::Fit(common) => {
            let (scenario, out) = load(&common)?;
            let fit = run_fit(&scenario)?;
            println!("max RMS residual {:.4} dB", fit.max_rms_db());
            write_all(&out, &[("fit_report.json", fit.to_json())])?;
        }
        Command::Nli(common) => {
            let (scenario, out) = load(&common)?;
            let report = run_nli(&scenario)?;
            write_all(
                &out,
                &[("nli_report.csv", report.to_csv()), ("nli_report.json", report.to_json())],
            )?;
        }
        Command::Compare { common, gate_db } => {
            let (scenario, out) = load(&common)?;
            let (report, _, _) = run_compare(&scenario, gate_db)?;
            write_all(&out, &[("compare_report.csv", report.to_csv())])?;
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            println!(
                "max |delta| {:.4} dB against gate {gate_db} dB: {verdict}",
                report.max_abs_delta_db
            );
            if !report.oracle_converged {
                eprintln!("warning: oracle quadrature did not reach its tolerance everywhere");
            }
            if !report.passed {
                return Ok(EXIT_GATE);
            }
        }
        Command::Sweep { common, sweep } => {
            let offsets = parse_sweep(&sweep)?;
            let (scenario, out) = load(&common)?;
            let report = run_sweep(&scenario, &offsets)?;
            write_all(&out, &[("sweep.csv", report.to_csv())])?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let class = e.class();
            eprintln!("error ({class}): {e}");
            ExitCode::from(exit_code(class))
        }
    }
}
