//! Command-line driver for dissociation scans, schedule sweeps and
//! robustness studies.

mod config;
mod output;
mod problem;
mod run;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{MethodChoice, ScanConfig};
use run::{mean_errors_by, ScanReport};

#[derive(Parser)]
#[command(name = "spvqe", about = "Penalty-sequence VQE scans over FCIDUMP geometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override the configured method (vqe, cvqe, spvqe).
    #[arg(long)]
    method: Option<String>,

    /// Override schedule.mu_max.
    #[arg(long)]
    mu_max: Option<f64>,

    /// Override schedule.n_steps.
    #[arg(long)]
    n_steps: Option<usize>,

    /// Override shot count (0 = exact expectation values).
    #[arg(long)]
    shots: Option<u64>,

    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the repeat count per point.
    #[arg(long)]
    repeats: Option<usize>,

    /// Output directory for records.csv and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured method over every geometry point.
    Scan(CommonArgs),
    /// Run one full scan per schedule length.
    StepsSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Schedule lengths to sweep, e.g. --ns 1,2,5,10
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
    },
    /// Paired CVQE/SPVQE runs over random starts with matched budgets.
    Robustness {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of random starts per point and method.
        #[arg(long, default_value_t = 100)]
        n_starts: usize,
    },
    /// Print constrained spectra for every geometry point.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// States to print per point.
        #[arg(long, default_value_t = 16)]
        levels: usize,
    },
    /// Lint the configuration and its FCIDUMP files.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn apply_overrides(config: &mut ScanConfig, args: &CommonArgs) -> Result<()> {
    if let Some(method) = &args.method {
        config.method = match method.as_str() {
            "vqe" => MethodChoice::Vqe,
            "cvqe" => MethodChoice::Cvqe,
            "spvqe" => MethodChoice::Spvqe,
            other => anyhow::bail!("unknown method '{other}'"),
        };
    }
    if let Some(mu) = args.mu_max {
        config.schedule.mu_max = mu;
    }
    if let Some(ns) = args.n_steps {
        config.schedule.n_steps = ns;
    }
    if let Some(shots) = args.shots {
        config.shots = shots;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(repeats) = args.repeats {
        config.repeats = repeats;
    }
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().ok();
    }
    Ok(())
}

fn emit(common: &CommonArgs, command: &str, config: &ScanConfig, report: &ScanReport) -> Result<()> {
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    output::write_csv(&common.out.join("records.csv"), &report.records)?;
    if !report.step_records.is_empty() {
        output::write_steps_csv(&common.out.join("steps.csv"), &report.step_records)?;
    }
    output::write_manifest(&common.out.join("manifest.json"), command, config, report)?;

    let wall: f64 = report.records.iter().map(|r| r.wall_seconds).sum();
    println!(
        "{command}: {} records, {} failures, {wall:.2} s of solver time -> {}",
        report.records.len(),
        report.failures.len(),
        common.out.display()
    );
    for (group, energy, spin, number) in mean_errors_by(&report.records, |r| {
        format!("{} {} ns={}", r.label, r.method, r.ns)
    }) {
        println!(
            "  {group}: mean |dE|={energy:.3e} |dS2|={spin:.3e} |dN|={number:.3e}"
        );
    }
    for failure in &report.failures {
        eprintln!(
            "failed: {} {} repeat {}: {}",
            failure.label, failure.method, failure.repeat, failure.message
        );
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        anyhow::bail!("{} record(s) failed", report.failures.len())
    }
}

fn cmd_oracle(config_path: &PathBuf, levels: usize) -> Result<()> {
    let config = ScanConfig::load(config_path)?;
    config.validate()?;
    for point in &config.points {
        let text = std::fs::read_to_string(&point.fcidump)?;
        let problem =
            problem::build_problem(&text, config.mapping, &config.constraints, run::ORACLE_TOL)?;
        let spectrum = spvqe_core::exact_spectrum_with_observables(
            &problem.hamiltonian,
            &[&problem.number, &problem.spin],
        )
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;

        println!(
            "{} (r = {} A, {} qubits):",
            point.label, point.bond_length_angstrom, problem.n_qubits
        );
        println!("  {:>4} {:>18} {:>10} {:>10}", "k", "energy_hartree", "<N>", "<S^2>");
        for (k, &e) in spectrum.eigenvalues.iter().take(levels).enumerate() {
            let n = spectrum.constraint_expectations[k][0];
            let s = spectrum.constraint_expectations[k][1];
            println!("  {k:>4} {e:>18.12} {n:>10.6} {s:>10.6}");
        }
        println!(
            "  constrained reference: {:.12} Ha (tol {:.0e})",
            problem.reference.energy,
            run::ORACLE_TOL
        );
    }
    Ok(())
}

fn cmd_validate(config_path: &PathBuf) -> Result<()> {
    let config = ScanConfig::load(config_path)?;
    config.validate()?;
    let mut problems = 0usize;
    for point in &config.points {
        match std::fs::read_to_string(&point.fcidump)
            .map_err(anyhow::Error::from)
            .and_then(|text| {
                let ints = spvqe_core::parse_fcidump(&text)
                    .map_err(|e| anyhow::anyhow!(e.to_string()))?;
                ints.validate(1e-10).map_err(|e| anyhow::anyhow!(e.to_string()))?;
                Ok(ints)
            }) {
            Ok(ints) => println!(
                "ok: {} ({} orbitals, {} electrons, MS2={})",
                point.fcidump.display(),
                ints.n_spatial(),
                ints.n_electrons,
                ints.ms2
            ),
            Err(e) => {
                problems += 1;
                eprintln!("bad: {}: {e:#}", point.fcidump.display());
            }
        }
    }
    if problems == 0 {
        println!("configuration is valid");
        Ok(())
    } else {
        anyhow::bail!("{problems} file(s) failed validation")
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Scan(common) => {
            let mut config = ScanConfig::load(&common.config)?;
            apply_overrides(&mut config, &common)?;
            let report = run::run_scan(&config)?;
            emit(&common, "scan", &config, &report)
        }
        Command::StepsSweep { common, ns } => {
            let mut config = ScanConfig::load(&common.config)?;
            apply_overrides(&mut config, &common)?;
            let report = run::steps_sweep(&config, &ns)?;
            emit(&common, "steps-sweep", &config, &report)
        }
        Command::Robustness { common, n_starts } => {
            let mut config = ScanConfig::load(&common.config)?;
            apply_overrides(&mut config, &common)?;
            let report = run::robustness_study(&config, n_starts)?;
            emit(&common, "robustness", &config, &report)
        }
        Command::Oracle { config, levels } => cmd_oracle(&config, levels),
        Command::Validate { config } => cmd_validate(&config),
    }
}
