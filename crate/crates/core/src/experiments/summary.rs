use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::estimators::{
    as_convergence_probe, estimate_mse_curve, estimate_stability, CurvePoint, StabilityEstimate,
};
use super::persist::{read_json, write_json, SUMMARY_FILE};
use super::runner::{run_batch, BatchOutcome, CHatG, DivergedRun, Experiment, RunSummary};
use crate::diagnostics::{
    check_lem_su, CheckSuite, LemSuReport, SuiteReport, SuiteSettings, TrajectoryRecord, Verdict,
};
use crate::error::{Error, Result};
use crate::problems::{NoiseModel, Objective};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveInfo {
    pub id: String,
    pub dim: usize,
    pub lipschitz: f64,
    pub g_inf: f64,
    pub delta_tilde: f64,
    pub coercive: bool,
    pub critical_radius: f64,
}

impl From<&Objective> for ObjectiveInfo {
    fn from(o: &Objective) -> Self {
        ObjectiveInfo {
            id: o.id.clone(),
            dim: o.dim,
            lipschitz: o.lipschitz,
            g_inf: o.g_inf,
            delta_tilde: o.delta_tilde,
            coercive: o.coercive,
            critical_radius: o.critical_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub verdict: Verdict,
    pub evaluated: u64,
    pub violations: u64,
    pub runs_with_violations: u64,
    pub first_failing_run: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsProbe {
    pub threshold: f64,
    pub fraction: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExcursionStats {
    pub total: u64,
    pub reached_2delta: u64,
    pub runs_with_excursions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub stability: Option<StabilityEstimate>,
    pub mse_curve: Vec<CurvePoint>,
    pub as_probe: Option<AsProbe>,
    pub lem_su: Option<LemSuReport>,
}

/// Everything a batch produced apart from the record files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub config: ExperimentConfig,
    /// Command-line overrides applied on top of the config file.
    pub overrides: BTreeMap<String, String>,
    pub objective: ObjectiveInfo,
    pub noise: NoiseModel,
    pub settings: SuiteSettings,
    pub ghat1: Option<f64>,
    pub c_hat_g: Option<CHatG>,
    pub completed_runs: usize,
    pub diverged_count: usize,
    pub diverged: Vec<DivergedRun>,
    pub verdicts: BTreeMap<String, CheckVerdict>,
    pub estimates: Estimates,
    pub excursions: ExcursionStats,
    pub runs: Vec<RunSummary>,
}

/// Runs needed before the across-run sum bound is assessed.
pub const LEM_SU_MIN_RUNS: usize = 30;

impl BatchSummary {
    pub fn build(
        exp: &Experiment,
        outcome: BatchOutcome,
        overrides: BTreeMap<String, String>,
    ) -> Result<Self> {
        let runs = outcome.runs;
        let mut verdicts: BTreeMap<String, CheckVerdict> = BTreeMap::new();
        for r in &runs {
            for (name, t) in &r.checks {
                let v = verdicts.entry(name.as_str().to_string()).or_insert(CheckVerdict {
                    verdict: Verdict::NotEvaluated,
                    evaluated: 0,
                    violations: 0,
                    runs_with_violations: 0,
                    first_failing_run: None,
                });
                v.evaluated += t.evaluated;
                v.violations += t.violations;
                if t.violations > 0 {
                    v.runs_with_violations += 1;
                    v.first_failing_run.get_or_insert(r.run_id);
                }
            }
        }
        for v in verdicts.values_mut() {
            v.verdict = verdict(v.evaluated, v.violations);
        }

        let lem_su = match (exp.settings.constants.m_const, runs.len() >= LEM_SU_MIN_RUNS) {
            (Some(m), true) => {
                let sums: Vec<f64> = runs.iter().filter_map(|r| r.lem_su_sum).collect();
                Some(check_lem_su(
                    &sums,
                    exp.settings.lem_su_delta,
                    exp.noise.sigma0,
                    exp.noise.sigma1,
                    m,
                )?)
            }
            _ => None,
        };
        if let Some(l) = &lem_su {
            verdicts.insert(
                "lem_su".into(),
                CheckVerdict {
                    verdict: if l.pass { Verdict::Pass } else { Verdict::Fail },
                    evaluated: l.runs as u64,
                    violations: u64::from(!l.pass),
                    runs_with_violations: 0,
                    first_failing_run: None,
                },
            );
        }

        let estimates = Estimates {
            stability: estimate_stability(&runs).ok(),
            mse_curve: estimate_mse_curve(&runs),
            as_probe: as_convergence_probe(&runs, exp.config.estimators.as_threshold)
                .ok()
                .map(|fraction| AsProbe {
                    threshold: exp.config.estimators.as_threshold,
                    fraction,
                    runs: runs.len(),
                }),
            lem_su,
        };
        let excursions = ExcursionStats {
            total: runs.iter().map(|r| r.excursion_count).sum(),
            reached_2delta: runs.iter().map(|r| r.reached_2delta_count).sum(),
            runs_with_excursions: runs.iter().filter(|r| r.excursion_count > 0).count() as u64,
        };
        Ok(BatchSummary {
            config: exp.config.clone(),
            overrides,
            objective: (&exp.objective).into(),
            noise: exp.noise.clone(),
            settings: exp.settings.clone(),
            ghat1: exp.ghat1,
            c_hat_g: exp.c_hat_g,
            completed_runs: runs.len(),
            diverged_count: outcome.diverged.len(),
            diverged: outcome.diverged,
            verdicts,
            estimates,
            excursions,
            runs,
        })
    }

    pub fn has_violations(&self) -> bool {
        self.verdicts.values().any(|v| v.verdict == Verdict::Fail)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join(SUMMARY_FILE), self)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        read_json(&dir.join(SUMMARY_FILE))
    }
}

fn verdict(evaluated: u64, violations: u64) -> Verdict {
    if evaluated == 0 {
        Verdict::NotEvaluated
    } else if violations == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Runs the batch, writing record files and `summary.json` under `out` when given.
pub fn run_experiment(
    exp: &Experiment,
    threads: Option<usize>,
    out: Option<&Path>,
    overrides: BTreeMap<String, String>,
) -> Result<BatchSummary> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let outcome = run_batch(exp, threads, out)?;
    let summary = BatchSummary::build(exp, outcome, overrides)?;
    if let Some(dir) = out {
        summary.write(dir)?;
    }
    Ok(summary)
}

/// Re-runs the row checks over persisted records. Checks that need values a
/// record file does not hold come back unevaluated.
pub fn verify_records(rows: &[TrajectoryRecord], settings: &SuiteSettings) -> Result<SuiteReport> {
    let mut suite = CheckSuite::new(settings.clone());
    for r in rows {
        suite.observe(r, None);
    }
    suite.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::CheckName;
    use crate::experiments::persist::{read_records, record_path};

    const CFG: &str = r#"
horizon = 3
runs = 2
seed = 11
checkpoints = [1, 3]
[problem]
id = "double_well"
dim = 2
[noise]
id = "affine_gaussian"
a = 0.5
b = 0.1
[optimizer]
id = "adagrad_norm"
"#;

    #[test]
    fn persisted_batch_shape_and_replay() {
        let dir = tempfile::tempdir().unwrap();
        let exp = Experiment::prepare(ExperimentConfig::from_toml_str(CFG).unwrap()).unwrap();
        let s = run_experiment(&exp, Some(2), Some(dir.path()), BTreeMap::new()).unwrap();
        assert_eq!(s.completed_runs, 2);
        for id in 0..2 {
            let text = std::fs::read_to_string(record_path(dir.path(), id)).unwrap();
            assert_eq!(text.lines().count(), 4);
        }
        let back = BatchSummary::read(dir.path()).unwrap();
        assert_eq!(back, s);
        let rows = read_records(&record_path(dir.path(), 1)).unwrap();
        let report = verify_records(&rows, &back.settings).unwrap();
        assert_eq!(report.total_violations(), 0);
        assert_eq!(report.tallies[&CheckName::StepIdentity].evaluated, 3);
        assert_eq!(report.tallies[&CheckName::SmoothDescent].evaluated, 0);
        assert!(!s.has_violations());
    }

    #[test]
    fn summary_without_checkpoints() {
        let exp = Experiment::prepare(
            ExperimentConfig::from_toml_str(&CFG.replace("checkpoints = [1, 3]", "")).unwrap(),
        )
        .unwrap();
        let s = run_experiment(&exp, Some(1), None, BTreeMap::new()).unwrap();
        assert!(s.estimates.mse_curve.is_empty());
        assert!(s.estimates.stability.is_some());
        assert!(s.runs.iter().all(|r| r.sup_g >= r.final_g && r.final_g >= 0.0));
    }
}
