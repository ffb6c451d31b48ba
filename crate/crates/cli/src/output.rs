//! Result files and run manifests.
//!
//! Files are written into a staging directory inside `out_dir` and moved
//! into place only after every payload has been written; `manifest.json` is
//! moved last. On failure the staging directory is removed.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qkr_core::scenarios::detected_spectrum;
use qkr_core::{
    EnergyTrace, ExperimentResult, MoleculeSpec, PopulationDistribution, Series, Table,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::to_toml;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_ECHO_FILE: &str = "config.toml";

pub const TRACE_COLUMNS: [&str; 4] = ["pulse_index", "t_over_trev", "energy_B", "absorbed_B"];
pub const POPULATION_COLUMNS: [&str; 3] = ["J", "P_J", "I_J_normalized"];

/// Twelve significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub molecule: MoleculeSpec,
    pub revival_period_s: f64,
    pub ensemble_members: usize,
    pub metrics: BTreeMap<String, f64>,
    pub outputs: Vec<OutputFile>,
    pub config: serde_json::Value,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        source: e.into(),
    }
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_trace(path: &Path, trace: &EnergyTrace) -> Result<(), CliError> {
    write_csv(
        path,
        &TRACE_COLUMNS,
        trace.points().iter().map(|p| {
            vec![
                p.pulse_index.to_string(),
                format_number(p.time),
                format_number(p.energy),
                format_number(p.absorbed),
            ]
        }),
    )
}

pub fn write_populations(
    path: &Path,
    pop: &PopulationDistribution,
    noise_floor: f64,
) -> Result<(), CliError> {
    let spectrum = detected_spectrum(pop, noise_floor)?;
    write_csv(
        path,
        &POPULATION_COLUMNS,
        pop.iter().map(|(j, p)| {
            vec![
                j.to_string(),
                format_number(p),
                format_number(spectrum.get(j)),
            ]
        }),
    )
}

fn write_m_resolved(path: &Path, series: &Series) -> Result<(), CliError> {
    write_csv(
        path,
        &["J", "m", "P_Jm"],
        series.m_resolved.iter().map(|l| {
            vec![
                l.j.to_string(),
                l.m.to_string(),
                format_number(l.population),
            ]
        }),
    )
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let header: Vec<&str> = table.columns.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        table
            .rows
            .iter()
            .map(|r| r.iter().map(|x| format_number(*x)).collect()),
    )
}

/// `(J, P_J, I_J)` rows of a populations file.
pub fn read_populations(path: &Path) -> Result<Vec<(u32, f64, f64)>, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect()
}

/// `(pulse_index, t, E, E_abs)` rows of a trace file.
pub fn read_trace(path: &Path) -> Result<Vec<(usize, f64, f64, f64)>, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect()
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn safe_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_payloads(result: &ExperimentResult, dir: &Path) -> Result<Vec<String>, CliError> {
    let noise_floor = result.provenance.config.output.noise_floor;
    let mut files = Vec::new();
    let mut emit = |name: String, f: &dyn Fn(&Path) -> Result<(), CliError>| {
        f(&dir.join(&name))?;
        files.push(name);
        Ok::<_, CliError>(())
    };
    for s in &result.series {
        let label = safe_label(&s.label);
        emit(format!("trace_{label}.csv"), &|p| write_trace(p, &s.trace))?;
        if let Some(pop) = &s.populations {
            emit(format!("populations_{label}.csv"), &|p| {
                write_populations(p, pop, noise_floor)
            })?;
        }
        if !s.m_resolved.is_empty() {
            emit(format!("populations_m_{label}.csv"), &|p| {
                write_m_resolved(p, s)
            })?;
        }
    }
    for t in &result.tables {
        emit(format!("{}.csv", safe_label(&t.label)), &|p| {
            write_table(p, t)
        })?;
    }
    let echo = to_toml(&result.provenance.config)?;
    emit(CONFIG_ECHO_FILE.to_string(), &|p| {
        fs::write(p, &echo).map_err(io_err(p))
    })?;
    Ok(files)
}

/// Writes all payloads and the manifest into `out_dir`, creating it if
/// needed.
pub fn write_results(
    result: &ExperimentResult,
    out_dir: &Path,
    wall_time_s: f64,
    threads: usize,
) -> Result<RunManifest, CliError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let staging = out_dir.join(format!(".staging-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
    }
    fs::create_dir(&staging).map_err(io_err(&staging))?;

    let outcome = stage(result, &staging, wall_time_s, threads).and_then(|(manifest, files)| {
        for name in files
            .iter()
            .chain(std::iter::once(&MANIFEST_FILE.to_string()))
        {
            let from = staging.join(name);
            fs::rename(&from, out_dir.join(name)).map_err(io_err(&from))?;
        }
        Ok(manifest)
    });
    let _ = fs::remove_dir_all(&staging);
    outcome
}

fn stage(
    result: &ExperimentResult,
    staging: &Path,
    wall_time_s: f64,
    threads: usize,
) -> Result<(RunManifest, Vec<String>), CliError> {
    let files = write_payloads(result, staging)?;
    let outputs = files
        .iter()
        .map(|name| {
            let path = staging.join(name);
            let bytes = fs::metadata(&path).map_err(io_err(&path))?.len();
            Ok(OutputFile {
                file: name.clone(),
                bytes,
                sha256: sha256_file(&path)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let p = &result.provenance;
    let manifest = RunManifest {
        tool: "qkr".into(),
        version: p.code_version.clone(),
        scenario: result.scenario.name().into(),
        seed: p.seed,
        threads,
        wall_time_s,
        molecule: p.molecule.clone(),
        revival_period_s: p.revival_period_s,
        ensemble_members: p.ensemble_members,
        metrics: result.metrics.clone(),
        outputs,
        config: serde_json::to_value(&p.config).map_err(|e| CliError::Io {
            path: MANIFEST_FILE.into(),
            source: e.into(),
        })?,
    };
    let path: PathBuf = staging.join(MANIFEST_FILE);
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e.into(),
    })?;
    f.write_all(b"\n").map_err(io_err(&path))?;
    Ok((manifest, files))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(100.32120595207536), "1.00321205952e2");
        assert_eq!(format_number(0.0), "0.00000000000e0");
        let x = -1.234567890123456e-7;
        let back: f64 = format_number(x).parse().unwrap();
        assert!((back - x).abs() <= 5e-12 * x.abs());
    }

    #[test]
    fn labels_are_file_safe() {
        assert_eq!(safe_label("tau0.6_delay_1"), "tau0.6_delay_1");
        assert_eq!(safe_label("a/b c"), "a_b_c");
    }
}
