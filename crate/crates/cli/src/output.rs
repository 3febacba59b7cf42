//! CSV emission and dataset input.
//!
//! Every file starts with a `# config_sha256=` comment identifying the fully
//! resolved configuration. Files are staged under temporary names and only
//! renamed into place once all of them have been written.

use crate::config::Config;
use crate::Failure;
use discern_lab::game::Outcome;
use discern_lab::identify::Observation;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub enum OutputFile {
    Csv { name: &'static str, header: Vec<&'static str>, rows: Vec<Vec<String>> },
    Text { name: &'static str, body: String },
}

impl OutputFile {
    pub fn csv(name: &'static str, header: &[&'static str], rows: Vec<Vec<String>>) -> Self {
        OutputFile::Csv { name, header: header.to_vec(), rows }
    }

    fn name(&self) -> &'static str {
        match self {
            OutputFile::Csv { name, .. } | OutputFile::Text { name, .. } => name,
        }
    }

    fn render(&self, hash: &str) -> Result<Vec<u8>, Failure> {
        let mut out = format!("# config_sha256={hash}\n").into_bytes();
        match self {
            OutputFile::Csv { header, rows, .. } => {
                let mut w = csv::Writer::from_writer(&mut out);
                let failed = |e: csv::Error| Failure::config(format!("invalid `io.output_dir`: {e}"));
                w.write_record(header).map_err(failed)?;
                for r in rows {
                    w.write_record(r).map_err(failed)?;
                }
                w.flush().map_err(|e| Failure::config(format!("invalid `io.output_dir`: {e}")))?;
            }
            OutputFile::Text { body, .. } => out.extend_from_slice(body.as_bytes()),
        }
        Ok(out)
    }
}

/// Formats a float so that it reads back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Hash of everything that affects results; the output directory does not.
pub fn config_hash(cfg: &Config) -> String {
    let mut cfg = cfg.clone();
    cfg.io.output_dir = Default::default();
    let canonical = serde_json::to_vec(&cfg).expect("config serializes");
    let digest = Sha256::digest(&canonical);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_all(cfg: &Config, files: Vec<OutputFile>) -> Result<Vec<PathBuf>, Failure> {
    let dir = &cfg.io.output_dir;
    let io_err = |e: std::io::Error| Failure::config(format!("invalid `io.output_dir`: {}: {e}", dir.display()));
    let hash = config_hash(cfg);
    let rendered = files.iter().map(|f| f.render(&hash).map(|b| (f.name(), b))).collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, bytes) in rendered {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = fs::write(&tmp, bytes) {
            cleanup(&staged);
            let _ = fs::remove_file(&tmp);
            return Err(io_err(e));
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dst) in &staged {
        if let Err(e) = fs::rename(tmp, dst) {
            cleanup(&staged);
            return Err(io_err(e));
        }
    }
    Ok(staged.into_iter().map(|(_, dst)| dst).collect())
}

pub fn read_dataset(path: &Path) -> Result<Vec<Observation>, Failure> {
    let bad = |reason: String| Failure::config(format!("invalid `io.input`: {}: {reason}", path.display()));
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["z1", "z2", "y1", "y2"] {
        return Err(bad(format!("expected header z1,z2,y1,y2, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = k + 1;
        let z = |j: usize| -> Result<f64, Failure> {
            rec[j]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("row {line}: `{}` is not a finite number", &rec[j])))
        };
        let y = |j: usize| -> Result<u8, Failure> {
            match &rec[j] {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(bad(format!("row {line}: outcome `{other}` is not 0 or 1"))),
            }
        };
        rows.push(Observation { z: [z(0)?, z(1)?], y: Outcome::new(y(2)?, y(3)?) });
    }
    if rows.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(rows)
}
