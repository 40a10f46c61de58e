//! CSV and manifest writers. Both outputs land atomically: content goes to
//! a sibling temp file first, then a rename.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ScanConfig;
use crate::run::{Record, ScanReport};

pub const CSV_HEADER: [&str; 17] = [
    "label",
    "bond_length_angstrom",
    "method",
    "repeat",
    "seed",
    "energy_hartree",
    "cost",
    "penalty",
    "spin_expval",
    "number_expval",
    "energy_error",
    "spin_error",
    "number_error",
    "evaluations",
    "ns",
    "mu_max",
    "shots",
];

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Per-step stream of a penalty sequence: one row per (record, step k).
pub fn write_steps_csv(path: &Path, steps: &[crate::run::StepRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "label",
        "repeat",
        "seed",
        "step",
        "multiplier",
        "cost",
        "energy",
        "penalty",
        "constraint_values",
        "evaluations",
    ])?;
    for s in steps {
        writer.write_record([
            s.label.as_str(),
            &format!("{}", s.repeat),
            &format!("{}", s.seed),
            &format!("{}", s.step),
            &format!("{}", s.multiplier),
            &format!("{:.12e}", s.cost),
            &format!("{:.12e}", s.energy),
            &format!("{:.12e}", s.penalty),
            &s.constraint_values,
            &format!("{}", s.evaluations),
        ])?;
    }
    let bytes = writer.into_inner().context("flushing steps csv")?;
    write_atomic(path, &bytes)
}

pub fn write_csv(path: &Path, records: &[Record]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for r in records {
        writer.write_record([
            r.label.as_str(),
            &format!("{}", r.bond_length_angstrom),
            r.method,
            &format!("{}", r.repeat),
            &format!("{}", r.seed),
            &format!("{:.12e}", r.energy_hartree),
            &format!("{:.12e}", r.cost),
            &format!("{:.12e}", r.penalty),
            &format!("{:.12e}", r.spin_expval),
            &format!("{:.12e}", r.number_expval),
            &format!("{:.12e}", r.energy_error),
            &format!("{:.12e}", r.spin_error),
            &format!("{:.12e}", r.number_error),
            &format!("{}", r.evaluations),
            &format!("{}", r.ns),
            &format!("{}", r.mu_max),
            &format!("{}", r.shots),
        ])?;
    }
    let bytes = writer.into_inner().context("flushing csv")?;
    write_atomic(path, &bytes)
}

#[derive(Serialize)]
struct SummaryRow {
    group: String,
    records: usize,
    mean_energy_error: f64,
    mean_spin_error: f64,
    mean_number_error: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a ScanConfig,
    references: &'a [crate::run::PointReference],
    record_count: usize,
    failure_count: usize,
    failures: &'a [crate::run::Failure],
    summaries: Vec<SummaryRow>,
}

/// Group means for the manifest: by method for robustness runs, by ns for
/// sweeps, by label otherwise. All three groupings are cheap; emit them all.
fn summaries(report: &ScanReport) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (prefix, key) in [
        ("method", Box::new(|r: &Record| r.method.to_string()) as Box<dyn Fn(&Record) -> String>),
        ("ns", Box::new(|r: &Record| r.ns.to_string())),
        ("label", Box::new(|r: &Record| r.label.clone())),
    ] {
        for (group, energy, spin, number) in crate::run::mean_errors_by(&report.records, &key) {
            let count =
                report.records.iter().filter(|r| key(r) == group).count();
            rows.push(SummaryRow {
                group: format!("{prefix}={group}"),
                records: count,
                mean_energy_error: energy,
                mean_spin_error: spin,
                mean_number_error: number,
            });
        }
    }
    rows
}

pub fn write_manifest(
    path: &Path,
    command: &str,
    config: &ScanConfig,
    report: &ScanReport,
) -> Result<()> {
    let manifest = Manifest {
        command,
        config,
        references: &report.references,
        record_count: report.records.len(),
        failure_count: report.failures.len(),
        failures: &report.failures,
        summaries: summaries(report),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
