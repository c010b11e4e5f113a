use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adastab::diagnostics::{CheckName, Verdict};
use adastab::experiments::{
    read_records, run_assumption_probes, run_experiment, verify_records as check_rows,
    write_json, BatchSummary, ChecksSpec, Experiment, ExperimentConfig, SUMMARY_FILE,
};
use adastab::{Error, Result};
use serde::Serialize;

use crate::report;
use crate::Overrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    Violations,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Clean => 0,
            Status::Violations => 2,
        }
    }

    fn from_fail(fail: bool) -> Self {
        if fail {
            Status::Violations
        } else {
            Status::Clean
        }
    }
}

struct Loaded {
    config: ExperimentConfig,
    echo: BTreeMap<String, String>,
    threads: Option<usize>,
}

fn load(path: &Path, ov: &Overrides) -> Result<Loaded> {
    let mut config = ExperimentConfig::from_path(path)?;
    let mut echo = BTreeMap::new();
    if let Some(out) = &ov.out {
        config.output = out.clone();
        echo.insert("out".into(), out.display().to_string());
    }
    if let Some(r) = ov.runs {
        config.runs = r;
        echo.insert("runs".into(), r.to_string());
    }
    if let Some(t) = ov.horizon {
        config.horizon = t;
        echo.insert("horizon".into(), t.to_string());
        // checkpoints past a shortened horizon would make the config invalid
        config.checkpoints.retain(|&c| c <= t);
    }
    if let Some(s) = ov.seed {
        config.seed = s;
        echo.insert("seed".into(), s.to_string());
    }
    if let Some(c) = &ov.checks {
        config.checks = ChecksSpec::parse_list(c)?;
        echo.insert("checks".into(), c.clone());
    }
    config.validate()?;
    Ok(Loaded {
        config,
        echo,
        threads: threads(ov)?,
    })
}

/// Worker count is deliberately not echoed: outputs must not depend on it.
fn threads(ov: &Overrides) -> Result<Option<usize>> {
    if ov.threads.is_some() {
        return Ok(ov.threads);
    }
    match std::env::var("ADASTAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config {
                field: "ADASTAB_THREADS".into(),
                reason: format!("`{v}` is not a thread count"),
            }),
        Err(_) => Ok(None),
    }
}

pub fn run(path: &Path, ov: &Overrides) -> Result<Status> {
    let l = load(path, ov)?;
    let out = l.config.output.clone();
    let exp = Experiment::prepare(l.config)?;
    let summary = run_experiment(&exp, l.threads, Some(&out), l.echo)?;
    print!("{}", report::digest(&summary));
    println!("output: {}", out.display());
    Ok(Status::from_fail(summary.has_violations()))
}

pub fn verify_config(path: &Path, ov: &Overrides) -> Result<Status> {
    let l = load(path, ov)?;
    let exp = Experiment::prepare(l.config)?;
    let summary = run_experiment(&exp, l.threads, ov.out.as_deref(), l.echo)?;
    let probes = run_assumption_probes(&exp)?;
    let mut rows: Vec<report::Row> = summary
        .verdicts
        .iter()
        .map(|(name, v)| report::Row {
            name: name.clone(),
            description: describe(name),
            verdict: v.verdict,
            detail: format!(
                "{} violations / {} evaluated ({} runs affected)",
                v.violations, v.evaluated, v.runs_with_violations
            ),
        })
        .collect();
    rows.extend(probes.iter().map(|p| report::Row {
        name: format!("probe:{}", p.name),
        description: "assumption probe".into(),
        verdict: p.verdict,
        detail: p.detail.clone(),
    }));
    println!(
        "verify {} ({} runs x {} steps, {} diverged)",
        path.display(),
        summary.config.runs,
        summary.config.horizon,
        summary.diverged_count
    );
    print!("{}", report::table(&rows));
    let fail = rows.iter().any(|r| r.verdict == Verdict::Fail);
    Ok(Status::from_fail(fail))
}

pub fn verify_records(path: &Path) -> Result<Status> {
    let rows = read_records(path)?;
    let summary_dir = batch_dir_of(path).ok_or_else(|| Error::Record {
        path: path.to_path_buf(),
        reason: format!("no {SUMMARY_FILE} found next to the record file or one level up"),
    })?;
    let summary = BatchSummary::read(&summary_dir)?;
    let report = check_rows(&rows, &summary.settings)?;
    let table: Vec<report::Row> = report
        .tallies
        .iter()
        .map(|(name, t)| report::Row {
            name: name.as_str().into(),
            description: name.description().into(),
            verdict: t.verdict(),
            detail: match (t.verdict(), t.first_violation) {
                (Verdict::NotEvaluated, _) => "needs values not stored in record files".into(),
                (_, Some(n)) => format!("{} violations, first at step {n}", t.violations),
                _ => format!("{} rows", t.evaluated),
            },
        })
        .collect();
    println!("verify {} ({} rows)", path.display(), rows.len());
    print!("{}", report::table(&table));
    Ok(Status::from_fail(report.total_violations() > 0))
}

fn batch_dir_of(record: &Path) -> Option<PathBuf> {
    let parent = record.parent()?;
    [Some(parent), parent.parent()]
        .into_iter()
        .flatten()
        .find(|d| d.join(SUMMARY_FILE).is_file())
        .map(Path::to_path_buf)
}

fn describe(name: &str) -> String {
    match name.parse::<CheckName>() {
        Ok(c) => c.description().into(),
        Err(_) if name == "lem_su" => "across-run sum bound on Γ_n away from critical points".into(),
        Err(_) => String::new(),
    }
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    dir: String,
    params: BTreeMap<String, String>,
    completed_runs: usize,
    diverged: usize,
    violations: bool,
}

pub fn sweep(path: &Path, grid: &[String], ov: &Overrides) -> Result<Status> {
    let axes = parse_grid(grid)?;
    if axes.is_empty() {
        return run(path, ov);
    }
    let base = load(path, ov)?;
    // reject bad names and values before anything runs
    for (name, values) in &axes {
        for v in values {
            base.config.clone().set_param(name, v)?;
        }
    }
    let out = base.config.output.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::Io {
        context: out.clone(),
        source: e,
    })?;
    let mut index = Vec::new();
    let mut any_fail = false;
    for point in product(&axes) {
        let mut cfg = base.config.clone();
        let mut echo = base.echo.clone();
        for (name, value) in &point {
            cfg.set_param(name, value)?;
            echo.insert(name.clone(), value.clone());
        }
        let dir_name = point
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join("_");
        let dir = out.join(&dir_name);
        cfg.output = dir.clone();
        let exp = Experiment::prepare(cfg)?;
        let summary = run_experiment(&exp, base.threads, Some(&dir), echo)?;
        let fail = summary.has_violations();
        any_fail |= fail;
        println!(
            "{dir_name}: {} runs, {} diverged, {}",
            summary.completed_runs,
            summary.diverged_count,
            if fail { "FAIL" } else { "PASS" }
        );
        index.push(SweepEntry {
            dir: dir_name,
            params: point.into_iter().collect(),
            completed_runs: summary.completed_runs,
            diverged: summary.diverged_count,
            violations: fail,
        });
    }
    write_json(&out.join("index.json"), &index)?;
    Ok(Status::from_fail(any_fail))
}

fn parse_grid(grid: &[String]) -> Result<Vec<(String, Vec<String>)>> {
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for g in grid {
        let (name, values) = g.split_once('=').ok_or_else(|| Error::Config {
            field: "grid".into(),
            reason: format!("`{g}` is not NAME=V1,V2,..."),
        })?;
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::Config {
                field: name.into(),
                reason: "grid axis has no values".into(),
            });
        }
        if axes.iter().any(|(n, _)| n == name) {
            return Err(Error::Config {
                field: name.into(),
                reason: "grid axis given twice".into(),
            });
        }
        axes.push((name.trim().to_string(), values));
    }
    Ok(axes)
}

fn product(axes: &[(String, Vec<String>)]) -> Vec<Vec<(String, String)>> {
    axes.iter().fold(vec![Vec::new()], |acc, (name, values)| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((name.clone(), v.clone()));
                    p
                })
            })
            .collect()
    })
}

pub fn report(dir: &Path) -> Result<Status> {
    let summary = BatchSummary::read(dir)?;
    print!("{}", report::digest(&summary));
    Ok(Status::Clean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_product() {
        let axes = parse_grid(&["alpha0=0.1,1".into(), "s0=1,2".into()]).unwrap();
        let p = product(&axes);
        assert_eq!(p.len(), 4);
        assert_eq!(p[1], vec![("alpha0".into(), "0.1".into()), ("s0".into(), "2".into())]);
        assert_eq!(product(&[]).len(), 1);
        assert!(parse_grid(&["alpha0".into()]).is_err());
        assert!(parse_grid(&["alpha0=".into()]).is_err());
    }
}
