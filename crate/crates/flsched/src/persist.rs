//! Run persistence: a JSON manifest (everything needed to replay a run) plus
//! an append-only tab-delimited trace. `load_run(persist_run(x)) == x`.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::opt::train::RoundRecord;

pub const MANIFEST_VERSION: u32 = 1;

/// Trace column order (documented contract for the delimited file).
pub const TRACE_COLUMNS: &str = "round\tdual\tprimal\tgap\teta\tdecodes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config_hash: String,
    pub master_seed: u64,
    /// Whether loaded features were standardized (always true for the file
    /// loader; synthetic data is generated in standardized coordinates).
    pub standardized: bool,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, master_seed: u64) -> Self {
        RunManifest {
            version: MANIFEST_VERSION,
            config_hash: config.hash(),
            master_seed,
            standardized: true,
            config: config.clone(),
        }
    }
}

/// One line of the trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub round: u64,
    pub dual: f64,
    pub primal: f64,
    pub gap: f64,
    pub eta: f64,
    pub decodes: u64,
}

impl From<&RoundRecord> for TraceRow {
    fn from(r: &RoundRecord) -> Self {
        TraceRow {
            round: r.round as u64,
            dual: r.dual,
            primal: r.primal,
            gap: r.gap,
            eta: r.eta,
            decodes: r.decodes as u64,
        }
    }
}

fn manifest_path(stem: &Path) -> std::path::PathBuf {
    stem.with_extension("manifest.json")
}

fn trace_path(stem: &Path) -> std::path::PathBuf {
    stem.with_extension("trace.tsv")
}

/// Write `<stem>.manifest.json` and `<stem>.trace.tsv`. Float fields use the
/// shortest round-trip decimal form, so reading the files back reproduces the
/// rows bit-for-bit.
pub fn persist_run(records: &[TraceRow], manifest: &RunManifest, stem: &Path) -> Result<()> {
    if let Some(dir) = stem.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(manifest_path(stem), json)?;
    let mut w = BufWriter::new(std::fs::File::create(trace_path(stem))?);
    writeln!(w, "{TRACE_COLUMNS}")?;
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.round, r.dual, r.primal, r.gap, r.eta, r.decodes
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_run(stem: &Path) -> Result<(Vec<TraceRow>, RunManifest)> {
    let text = std::fs::read_to_string(manifest_path(stem))?;
    // Check the version before strict field decoding so older files fail
    // with a version message rather than a field error.
    let value: serde_json::Value = serde_json::from_str(&text)?;
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(MANIFEST_VERSION) => {}
        Some(v) => {
            return Err(Error::Config(format!(
                "manifest version {v} unsupported (expected {MANIFEST_VERSION})"
            )))
        }
        None => return Err(Error::Config("manifest missing version field".into())),
    }
    let manifest: RunManifest = serde_json::from_value(value)
        .map_err(|e| Error::Config(format!("manifest (version {MANIFEST_VERSION}): {e}")))?;

    let file = std::fs::File::open(trace_path(stem))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line != TRACE_COLUMNS {
                return Err(Error::Config(format!("unexpected trace header {line:?}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::Config(format!(
                "trace line {}: {} fields, expected 6",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_err =
            |what: &str| Error::Config(format!("trace line {}: bad {what}", lineno + 1));
        rows.push(TraceRow {
            round: fields[0].parse().map_err(|_| parse_err("round"))?,
            dual: fields[1].parse().map_err(|_| parse_err("dual"))?,
            primal: fields[2].parse().map_err(|_| parse_err("primal"))?,
            gap: fields[3].parse().map_err(|_| parse_err("gap"))?,
            eta: fields[4].parse().map_err(|_| parse_err("eta"))?,
            decodes: fields[5].parse().map_err(|_| parse_err("decodes"))?,
        });
    }
    Ok((rows, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn manifest() -> RunManifest {
        RunManifest::new(&ExperimentConfig::default(), 42)
    }

    #[test]
    fn empty_trace_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("run");
        let m = manifest();
        persist_run(&[], &m, &stem).unwrap();
        let (rows, back) = load_run(&stem).unwrap();
        assert!(rows.is_empty());
        assert_eq!(back, m);
    }

    #[test]
    fn large_trace_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("run");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<TraceRow> = (0..10_000)
            .map(|i| TraceRow {
                round: i,
                dual: rng.gen::<f64>() * 1e3 - 500.0,
                primal: rng.gen::<f64>() / 3.0,
                gap: rng.gen::<f64>() * 1e-9,
                eta: rng.gen(),
                decodes: rng.gen_range(0..100),
            })
            .collect();
        persist_run(&rows, &manifest(), &stem).unwrap();
        let (back, _) = load_run(&stem).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a, b); // bit-exact, including float payloads
            assert_eq!(a.dual.to_bits(), b.dual.to_bits());
        }
    }

    #[test]
    fn version_mismatch_and_missing_field() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("run");
        persist_run(&[], &manifest(), &stem).unwrap();

        let mpath = stem.with_extension("manifest.json");
        let text = std::fs::read_to_string(&mpath).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["version"] = serde_json::json!(99);
        std::fs::write(&mpath, serde_json::to_string(&v).unwrap()).unwrap();
        let err = load_run(&stem).unwrap_err().to_string();
        assert!(err.contains("version 99"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("master_seed");
        std::fs::write(&mpath, serde_json::to_string(&v).unwrap()).unwrap();
        let err = load_run(&stem).unwrap_err().to_string();
        assert!(err.contains("version 1"), "{err}");
    }

    #[test]
    fn corrupt_trace_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("run");
        persist_run(
            &[TraceRow {
                round: 0,
                dual: 0.0,
                primal: 0.7,
                gap: 0.7,
                eta: 0.5,
                decodes: 3,
            }],
            &manifest(),
            &stem,
        )
        .unwrap();
        let tpath = stem.with_extension("trace.tsv");
        let mut text = std::fs::read_to_string(&tpath).unwrap();
        text.push_str("1\toops\t0\t0\t0\t0\n");
        std::fs::write(&tpath, text).unwrap();
        let err = load_run(&stem).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
