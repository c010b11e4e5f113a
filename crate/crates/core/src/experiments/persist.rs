//! Record files and the batch summary document.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a record
//! file back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::runner::RecordSink;
use crate::diagnostics::{OptimizerKind, RmsRowStats, TrajectoryRecord};
use crate::error::{Error, Result};

pub const RECORD_COLUMNS: [&str; 12] = [
    "n",
    "g",
    "grad_norm",
    "sgrad_norm",
    "S_prev",
    "S",
    "zeta",
    "gamma",
    "lambda",
    "ghat",
    "step_norm",
    "sigma_gamma",
];

pub const RMS_COLUMNS: [&str; 5] = ["v_min", "v_max", "alpha_min", "alpha_max", "nv_over_S_min"];

pub const SUMMARY_FILE: &str = "summary.json";

pub fn record_path(out: &Path, run_id: u64) -> PathBuf {
    out.join("records").join(format!("run_{run_id:05}.csv"))
}

pub struct CsvRecordWriter {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    rms: bool,
}

impl CsvRecordWriter {
    pub fn create(path: &Path, optimizer: OptimizerKind) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        let rms = optimizer == OptimizerKind::Rmsprop;
        let mut header: Vec<&str> = RECORD_COLUMNS.to_vec();
        if rms {
            header.extend(RMS_COLUMNS);
        }
        writer.write_record(&header).map_err(|e| csv_err(path, e))?;
        Ok(CsvRecordWriter {
            path: path.to_path_buf(),
            writer,
            rms,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

impl RecordSink for CsvRecordWriter {
    fn write(&mut self, r: &TrajectoryRecord) -> Result<()> {
        let mut fields = vec![
            r.n.to_string(),
            f(r.g),
            f(r.grad_norm),
            f(r.sgrad_norm),
            f(r.s_prev),
            f(r.s),
            f(r.zeta),
            f(r.gamma),
            f(r.lambda),
            f(r.ghat),
            f(r.step_norm),
            f(r.sigma_gamma),
        ];
        if self.rms {
            let s = r.rms.ok_or_else(|| Error::Record {
                path: self.path.clone(),
                reason: format!("row {} lacks RMSProp statistics", r.n),
            })?;
            fields.extend([
                f(s.v_min),
                f(s.v_max),
                f(s.alpha_min),
                f(s.alpha_max),
                f(s.nv_over_s_min),
            ]);
        }
        self.writer
            .write_record(&fields)
            .map_err(|e| csv_err(&self.path, e))
    }
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        context: path.to_path_buf(),
        source,
    }
}

/// Reads a record file written by [`CsvRecordWriter`].
pub fn read_records(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let bad = |reason: String| Error::Record {
        path: path.to_path_buf(),
        reason,
    };
    let cols: Vec<&str> = header.iter().collect();
    let rms = if cols == RECORD_COLUMNS {
        false
    } else if cols.len() == RECORD_COLUMNS.len() + RMS_COLUMNS.len()
        && cols[..12] == RECORD_COLUMNS
        && cols[12..] == RMS_COLUMNS
    {
        true
    } else {
        return Err(bad(format!("unexpected header {cols:?}")));
    };
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| {
                bad(format!(
                    "line {}: column {} is not a number: `{}`",
                    line + 2,
                    cols[i],
                    &rec[i]
                ))
            })
        };
        let n = rec[0]
            .parse::<u64>()
            .map_err(|_| bad(format!("line {}: bad step index `{}`", line + 2, &rec[0])))?;
        rows.push(TrajectoryRecord {
            n,
            g: num(1)?,
            grad_norm: num(2)?,
            sgrad_norm: num(3)?,
            s_prev: num(4)?,
            s: num(5)?,
            zeta: num(6)?,
            gamma: num(7)?,
            lambda: num(8)?,
            ghat: num(9)?,
            step_norm: num(10)?,
            sigma_gamma: num(11)?,
            rms: if rms {
                Some(RmsRowStats {
                    v_min: num(12)?,
                    v_max: num(13)?,
                    alpha_min: num(14)?,
                    alpha_max: num(15)?,
                    nv_over_s_min: num(16)?,
                })
            } else {
                None
            },
        });
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        context: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        context: path.to_path_buf(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: u64, x: f64, rms: bool) -> TrajectoryRecord {
        TrajectoryRecord {
            n,
            g: x,
            grad_norm: 1e-300,
            sgrad_norm: 0.1 + 0.2,
            s_prev: 1.0,
            s: 1e20 / 3.0,
            zeta: 0.0,
            gamma: 1.0 / 3.0,
            lambda: f64::MIN_POSITIVE,
            ghat: -0.0,
            step_norm: 2.5e-7,
            sigma_gamma: 123456.789,
            rms: rms.then_some(RmsRowStats {
                v_min: 1e-9,
                v_max: 2.0,
                alpha_min: 0.3,
                alpha_max: 7.0,
                nv_over_s_min: 0.1,
            }),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for (kind, rms) in [(OptimizerKind::AdagradNorm, false), (OptimizerKind::Rmsprop, true)] {
            let path = dir.path().join(format!("{rms}.csv"));
            let rows = vec![row(1, std::f64::consts::PI, rms), row(2, 1e-310, rms)];
            let mut w = CsvRecordWriter::create(&path, kind).unwrap();
            for r in &rows {
                w.write(r).unwrap();
            }
            w.finish().unwrap();
            let back = read_records(&path).unwrap();
            assert_eq!(back, rows);
            assert_eq!(back[0].ghat.to_bits(), (-0.0f64).to_bits());
            let text = std::fs::read_to_string(&path).unwrap();
            assert_eq!(text.lines().count(), 3);
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "n,g\n1,2\n").unwrap();
        assert!(matches!(read_records(&path), Err(Error::Record { .. })));
        let path = dir.path().join("bad2.csv");
        let header = RECORD_COLUMNS.join(",");
        std::fs::write(&path, format!("{header}\n1,x,0,0,0,0,0,0,0,0,0,0\n")).unwrap();
        let e = read_records(&path).unwrap_err();
        assert!(e.to_string().contains("column g"), "{e}");
        assert!(read_records(&dir.path().join("missing.csv")).is_err());
    }
}
