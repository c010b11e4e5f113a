use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Fault, OptimizerParams};
use super::persist::{record_path, CsvRecordWriter};
use crate::diagnostics::{
    adagrad_lyapunov, compute_constants, estimate_c_hat_g, with_initial_point, CheckName,
    CheckSuite, ConstantInputs, GammaSeries, Instrumenter, OnlineStep, OptimizerKind,
    RmsStatistics, RmsStep, SuiteSettings, Tally, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::optimizers::{adagrad_step, rmsprop_step, sgd_step, AdaGradNormState, RmsPropState};
use crate::problems::{NoiseModel, Objective};
use crate::stream::{split_stream, SeedSpec, SUBSTREAM_ORACLE, SUBSTREAM_PROBE};
use crate::vector::Vector;

/// A validated configuration with its objective, oracle and checker settings built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub objective: Objective,
    pub noise: NoiseModel,
    pub params: OptimizerParams,
    pub init: Vector,
    pub settings: SuiteSettings,
    /// `ĝ(θ₁)` for AdaGrad-Norm.
    pub ghat1: Option<f64>,
    pub c_hat_g: Option<CHatG>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CHatG {
    pub value: f64,
    /// Sampled rather than derived from the objective's metadata.
    pub estimated: bool,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let objective = config.objective()?;
        let noise = config.noise_model(&objective)?;
        let params = config.optimizer_params()?;
        let init = config.initial_point()?;
        let d = objective.dim as f64;
        let (optimizer, alpha0, s0, beta1) = match params {
            OptimizerParams::AdagradNorm { alpha0, s0 } => {
                (OptimizerKind::AdagradNorm, alpha0, s0, None)
            }
            // Only r₁ is used for RMSProp; S₀ is the initial auxiliary sum v₀·d.
            OptimizerParams::Rmsprop { beta1, v0, .. } => {
                (OptimizerKind::Rmsprop, 1.0, v0 * d, Some(beta1))
            }
            OptimizerParams::Sgd { lr } => (OptimizerKind::Sgd, lr, 1.0, None),
        };
        let inputs = ConstantInputs {
            lipschitz: objective.lipschitz,
            sigma0: noise.sigma0,
            sigma1: noise.sigma1,
            alpha0,
            s0,
            beta1,
        };
        let mut constants = compute_constants(&inputs)?;
        let mut ghat1 = None;
        let mut c_hat_g = None;
        if optimizer == OptimizerKind::AdagradNorm {
            let g1 = objective.value(&init)?;
            let grad1 = objective.grad(&init)?;
            let gh = adagrad_lyapunov(g1, grad1.norm_sq(), s0, noise.sigma0, alpha0);
            c_hat_g = match objective.c_hat_g(noise.sigma0, alpha0, s0) {
                Some(value) => Some(CHatG {
                    value,
                    estimated: false,
                }),
                None => {
                    let mut stream =
                        split_stream(SeedSpec::new(config.seed, u64::MAX, SUBSTREAM_PROBE));
                    let radius = 10.0 * (objective.critical_radius + init.norm()).max(1.0);
                    estimate_c_hat_g(&objective, noise.sigma0, alpha0, s0, radius, 20_000, &mut stream)?
                        .map(|value| CHatG {
                            value,
                            estimated: true,
                        })
                }
            };
            constants = with_initial_point(
                constants,
                &inputs,
                gh,
                c_hat_g.map(|c| c.value),
                config.diagnostics.delta_tau_override,
            )?;
            ghat1 = Some(gh);
        }
        let settings = SuiteSettings {
            optimizer,
            enabled: config.checks.resolve()?,
            alpha0,
            s0,
            lipschitz: objective.lipschitz,
            g_inf: objective.g_inf,
            constants,
            lem_su_delta: config.diagnostics.lem_su_delta,
        };
        Ok(Experiment {
            config,
            objective,
            noise,
            params,
            init,
            settings,
            ghat1,
            c_hat_g,
        })
    }
}

/// Destination of instrumented rows.
pub trait RecordSink {
    fn write(&mut self, row: &TrajectoryRecord) -> Result<()>;
}

impl RecordSink for Vec<TrajectoryRecord> {
    fn write(&mut self, row: &TrajectoryRecord) -> Result<()> {
        self.push(row.clone());
        Ok(())
    }
}

/// Discards rows.
pub struct NullSink;

impl RecordSink for NullSink {
    fn write(&mut self, _row: &TrajectoryRecord) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    /// `‖∇g(θ_n)‖²` at the pre-step iterate.
    pub grad_sq: f64,
    pub sigma_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: u64,
    pub steps: u64,
    /// `max_{n ≤ T} g(θ_n)`
    pub sup_g: f64,
    pub final_g: f64,
    pub final_grad_norm: f64,
    /// Mean of `‖∇g(θ_n)‖²` over the last `max(1, T/10)` steps.
    pub tail_mean_grad_sq: f64,
    /// Largest `‖∇g(θ_n)‖` over the same window.
    pub tail_sup_grad_norm: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub checker_violations: BTreeMap<String, u64>,
    pub checks: BTreeMap<CheckName, Tally>,
    pub excursion_count: u64,
    pub reached_2delta_count: u64,
    pub sigma_gamma_final: f64,
    pub lem_su_sum: Option<f64>,
    pub gamma_series: Option<GammaSeries>,
    pub rms: Option<RmsStatistics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergedRun {
    pub run_id: u64,
    pub step: u64,
    pub reason: String,
}

enum OptState {
    Ada(AdaGradNormState),
    Rms(RmsPropState),
    Sgd { theta: Vector, n: u64, lr: f64 },
}

impl OptState {
    fn theta(&self) -> &Vector {
        match self {
            OptState::Ada(s) => &s.theta,
            OptState::Rms(s) => &s.theta,
            OptState::Sgd { theta, .. } => theta,
        }
    }
}

/// Simulates run `run_id` of the batch, feeding rows to `sink` and the enabled checkers.
///
/// A non-finite value anywhere in the step aborts the run with [`Error::Diverged`].
pub fn run_trajectory(
    exp: &Experiment,
    run_id: u64,
    sink: &mut dyn RecordSink,
) -> Result<RunSummary> {
    let cfg = &exp.config;
    let obj = &exp.objective;
    let noise = &exp.noise;
    let horizon = cfg.horizon;
    let mut stream = split_stream(SeedSpec::new(cfg.seed, run_id, SUBSTREAM_ORACLE));
    let mut suite = CheckSuite::new(exp.settings.clone());
    let mut ins = Instrumenter::new(noise.sigma0, noise.sigma1_coord);
    let mut state = match exp.params {
        OptimizerParams::AdagradNorm { alpha0, s0 } => {
            OptState::Ada(AdaGradNormState::new(exp.init.clone(), alpha0, s0)?)
        }
        OptimizerParams::Rmsprop { beta1, eps, v0 } => {
            OptState::Rms(RmsPropState::new(exp.init.clone(), beta1, eps, v0)?)
        }
        OptimizerParams::Sgd { lr } => OptState::Sgd {
            theta: exp.init.clone(),
            n: 0,
            lr,
        },
    };
    let tail_len = (horizon / 10).max(1);
    let tail_from = horizon - tail_len + 1;
    let fault_step = cfg.diagnostics.inject_fault.map(|Fault::CorruptS| horizon.div_ceil(2));

    let mut sup_g = f64::NEG_INFINITY;
    let mut tail_sum = 0.0;
    let mut tail_sup: f64 = 0.0;
    let mut checkpoints = Vec::with_capacity(cfg.checkpoints.len());
    let mut last: Option<TrajectoryRecord> = None;

    for n in 1..=horizon {
        let diverged = |e: Error| match e {
            Error::NonFinite { what } => Error::Diverged {
                run_id,
                step: n,
                reason: format!("non-finite {what}"),
            },
            other => other,
        };
        let theta = state.theta();
        let g = obj.value(theta).map_err(diverged)?;
        let grad = obj.grad(theta).map_err(diverged)?;
        let draw = noise
            .sample(obj, theta, &grad, &mut stream)
            .map_err(diverged)?;
        let inner = grad.dot(&draw)?;

        let mut row;
        match &mut state {
            OptState::Ada(prev) => {
                let next = adagrad_step(prev, &draw).map_err(diverged)?;
                row = ins.adagrad(prev, &next, g, &grad, &draw).map_err(diverged)?;
                inject(&mut row, fault_step);
                suite.observe(&row, Some(OnlineStep { inner, rms: None }));
                *prev = next;
            }
            OptState::Rms(prev) => {
                let next = rmsprop_step(prev, &draw).map_err(diverged)?;
                row = ins.rmsprop(prev, &next, g, &grad, &draw).map_err(diverged)?;
                inject(&mut row, fault_step);
                let (alpha_prev, alpha_next) = (prev.alpha(), next.alpha());
                let rms = RmsStep {
                    n_prev: prev.n,
                    v_prev: prev.v.as_slice(),
                    v_next: next.v.as_slice(),
                    alpha_prev: alpha_prev.as_slice(),
                    alpha_next: alpha_next.as_slice(),
                    draw: draw.as_slice(),
                    s_coord: ins.rms_accumulators(),
                };
                suite.observe(&row, Some(OnlineStep { inner, rms: Some(rms) }));
                *prev = next;
            }
            OptState::Sgd { theta, n: k, lr } => {
                let next = sgd_step(theta, &draw, *lr).map_err(diverged)?;
                *k += 1;
                row = ins
                    .sgd(*k, theta, &next, *lr, g, &grad, &draw)
                    .map_err(diverged)?;
                inject(&mut row, fault_step);
                suite.observe(&row, Some(OnlineStep { inner, rms: None }));
                *theta = next;
            }
        }
        sink.write(&row)?;

        sup_g = sup_g.max(g);
        let grad_sq = row.grad_norm * row.grad_norm;
        if n >= tail_from {
            tail_sum += grad_sq;
            tail_sup = tail_sup.max(row.grad_norm);
        }
        if cfg.checkpoints.contains(&n) {
            checkpoints.push(Checkpoint {
                n,
                grad_sq,
                sigma_gamma: row.sigma_gamma,
            });
        }
        last = Some(row);
    }
    checkpoints.sort_by_key(|c| c.n);
    checkpoints.dedup_by_key(|c| c.n);

    let report = suite.finish()?;
    let last = last.expect("horizon is at least 1");
    Ok(RunSummary {
        run_id,
        steps: horizon,
        sup_g,
        final_g: last.g,
        final_grad_norm: last.grad_norm,
        tail_mean_grad_sq: tail_sum / tail_len as f64,
        tail_sup_grad_norm: tail_sup,
        checkpoints,
        checker_violations: report.violations(),
        excursion_count: report.excursions.len() as u64,
        reached_2delta_count: report.reached_2delta_count(),
        checks: report.tallies,
        sigma_gamma_final: last.sigma_gamma,
        lem_su_sum: report.lem_su_sum,
        gamma_series: report.gamma_series,
        rms: report.rms,
    })
}

fn inject(row: &mut TrajectoryRecord, fault_step: Option<u64>) {
    if fault_step == Some(row.n) {
        row.s *= 1.0 + 1e-6;
    }
}

/// Runs and the list of runs aborted by divergence, both in ascending `run_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub runs: Vec<RunSummary>,
    pub diverged: Vec<DivergedRun>,
}

/// Runs every trajectory of the batch on a pool of `threads` workers (all cores
/// when `None`). Record files go to `out/records` when `out` is given and the
/// config asks for them.
pub fn run_batch(exp: &Experiment, threads: Option<usize>, out: Option<&Path>) -> Result<BatchOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    if let Some(dir) = out {
        if exp.config.persist_records {
            let records = dir.join("records");
            std::fs::create_dir_all(&records).map_err(|e| Error::io(&records, e))?;
        }
    }
    let results: Vec<Result<RunSummary>> = pool.install(|| {
        (0..exp.config.runs)
            .into_par_iter()
            .map(|run_id| match out.filter(|_| exp.config.persist_records) {
                Some(dir) => {
                    let path = record_path(dir, run_id);
                    let mut writer = CsvRecordWriter::create(&path, exp.settings.optimizer)?;
                    let summary = run_trajectory(exp, run_id, &mut writer);
                    writer.finish()?;
                    summary
                }
                None => run_trajectory(exp, run_id, &mut NullSink),
            })
            .collect()
    });
    let mut runs = Vec::new();
    let mut diverged = Vec::new();
    for r in results {
        match r {
            Ok(s) => runs.push(s),
            Err(Error::Diverged {
                run_id,
                step,
                reason,
            }) => diverged.push(DivergedRun {
                run_id,
                step,
                reason,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(BatchOutcome { runs, diverged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> Experiment {
        Experiment::prepare(ExperimentConfig::from_toml_str(text).unwrap()).unwrap()
    }

    const DET_QUAD: &str = r#"
horizon = 100
runs = 2
seed = 1
checkpoints = [1, 50, 100]
[problem]
id = "quadratic"
dim = 1
[optimizer]
id = "adagrad_norm"
"#;

    #[test]
    fn deterministic_quadratic_decreases() {
        let exp = config(DET_QUAD);
        let mut rows = Vec::new();
        let s = run_trajectory(&exp, 0, &mut rows).unwrap();
        assert_eq!(rows.len(), 100);
        assert!(rows.windows(2).all(|w| w[1].g < w[0].g));
        assert_eq!(s.sup_g, 0.5);
        assert_eq!(s.checkpoints[0].grad_sq, 1.0);
        assert!(s.checker_violations.values().all(|v| *v == 0), "{s:?}");
        assert!(s.checks[&CheckName::SmoothDescent].evaluated == 99);
    }

    #[test]
    fn single_step_horizon() {
        let exp = config(&DET_QUAD.replace("horizon = 100", "horizon = 1").replace("[1, 50, 100]", "[1]"));
        let mut rows = Vec::new();
        let s = run_trajectory(&exp, 0, &mut rows).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(s.final_g, rows[0].g);
        assert_eq!(s.final_grad_norm, rows[0].grad_norm);
        assert_eq!(s.tail_mean_grad_sq, rows[0].grad_norm.powi(2));
        assert_eq!(s.sigma_gamma_final, rows[0].sigma_gamma);
    }

    #[test]
    fn same_run_id_is_reproducible() {
        let exp = config(&DET_QUAD.replace(
            "[optimizer]",
            "[noise]\nid = \"affine_gaussian\"\na = 1.0\nb = 1.0\n[optimizer]",
        ));
        let a = run_trajectory(&exp, 3, &mut NullSink).unwrap();
        let b = run_trajectory(&exp, 3, &mut NullSink).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_trajectory(&exp, 4, &mut NullSink).unwrap();
        assert_ne!(a.sup_g.to_bits() ^ a.final_g.to_bits(), c.sup_g.to_bits() ^ c.final_g.to_bits());
    }

    #[test]
    fn large_sgd_step_diverges() {
        let text = DET_QUAD
            .replace("horizon = 100", "horizon = 5000")
            .replace("[1, 50, 100]", "[]")
            .replace("id = \"adagrad_norm\"", "id = \"sgd\"\nlr = 2.5");
        let exp = config(&text);
        let out = run_batch(&exp, Some(2), None).unwrap();
        assert!(out.runs.is_empty());
        assert_eq!(out.diverged.len(), 2);
        assert_eq!(out.diverged[0].run_id, 0);
    }

    #[test]
    fn corrupted_s_is_caught() {
        let text = format!("{DET_QUAD}\n[diagnostics]\ninject_fault = \"corrupt_s\"\n");
        let exp = config(&text);
        let s = run_trajectory(&exp, 0, &mut NullSink).unwrap();
        assert_eq!(s.checker_violations["step_identity"], 1);
    }
}
