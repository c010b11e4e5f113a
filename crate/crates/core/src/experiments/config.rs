use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::CheckName;
use crate::error::{Error, Result};
use crate::problems::{NoiseModel, Objective};
use crate::vector::Vector;

/// A batch of seeded trajectories, as read from a TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
    /// Steps at which `‖∇g(θ_n)‖²` is recorded, taken before the step.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_true")]
    pub persist_records: bool,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub estimators: EstimatorConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("adastab-out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChecksSpec {
    /// Only `"all"` is accepted.
    Keyword(String),
    List(Vec<CheckName>),
}

impl Default for ChecksSpec {
    fn default() -> Self {
        ChecksSpec::Keyword("all".into())
    }
}

impl ChecksSpec {
    pub fn resolve(&self) -> Result<BTreeSet<CheckName>> {
        match self {
            ChecksSpec::Keyword(k) if k == "all" => Ok(CheckName::ALL.into_iter().collect()),
            ChecksSpec::Keyword(k) => Err(Error::config(
                "checks",
                format!("expected \"all\" or a list of check names, found \"{k}\""),
            )),
            ChecksSpec::List(l) => Ok(l.iter().copied().collect()),
        }
    }

    /// Parses `all` or a comma-separated list of check names.
    pub fn parse_list(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(ChecksSpec::default());
        }
        s.split(',')
            .map(|p| p.trim().parse::<CheckName>())
            .collect::<Result<Vec<_>>>()
            .map(ChecksSpec::List)
            .map_err(|e| Error::config("checks", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub id: String,
    pub dim: usize,
    /// Initial iterate; all ones when absent.
    #[serde(default)]
    pub init: Option<Vec<f64>>,
    #[serde(default)]
    pub components: Option<usize>,
    #[serde(default)]
    pub ridge: Option<f64>,
    #[serde(default)]
    pub data_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub id: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub batch: Option<usize>,
    /// Looser declared constants; they may not undercut the model's own values.
    #[serde(default)]
    pub sigma0: Option<f64>,
    #[serde(default)]
    pub sigma1: Option<f64>,
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub delta1: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            id: "deterministic".into(),
            a: None,
            b: None,
            batch: None,
            sigma0: None,
            sigma1: None,
            delta0: None,
            delta1: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerId {
    AdagradNorm,
    Rmsprop,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub id: OptimizerId,
    #[serde(default)]
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub s0: Option<f64>,
    #[serde(default)]
    pub beta1: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub v0: Option<f64>,
    #[serde(default)]
    pub lr: Option<f64>,
}

/// Hyperparameters with defaults filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum OptimizerParams {
    AdagradNorm { alpha0: f64, s0: f64 },
    Rmsprop { beta1: f64, eps: f64, v0: f64 },
    Sgd { lr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Scales the recorded `S` of one row per run by `1 + 1e-6`.
    CorruptS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default)]
    pub delta_tau_override: Option<f64>,
    #[serde(default = "default_lem_su_delta")]
    pub lem_su_delta: f64,
    #[serde(default)]
    pub inject_fault: Option<Fault>,
}

fn default_lem_su_delta() -> f64 {
    0.5
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            delta_tau_override: None,
            lem_su_delta: default_lem_su_delta(),
            inject_fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Threshold of the tail-supremum convergence probe.
    #[serde(default = "default_as_threshold")]
    pub as_threshold: f64,
}

fn default_as_threshold() -> f64 {
    0.3
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            as_threshold: default_as_threshold(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("document").to_string();
            Error::config(field, e.to_string().trim_end().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if let Some(&c) = self
            .checkpoints
            .iter()
            .find(|&&c| c == 0 || c > self.horizon)
        {
            return Err(Error::config(
                "checkpoints",
                format!("{c} lies outside [1, {}]", self.horizon),
            ));
        }
        self.checks.resolve()?;
        if !(self.diagnostics.lem_su_delta > 0.0) {
            return Err(Error::config("diagnostics.lem_su_delta", "must be positive"));
        }
        if !(self.estimators.as_threshold > 0.0) {
            return Err(Error::config("estimators.as_threshold", "must be positive"));
        }
        self.optimizer_params()?;
        let obj = self.objective()?;
        self.noise_model(&obj)?;
        self.initial_point()?;
        Ok(())
    }

    pub fn objective(&self) -> Result<Objective> {
        let p = &self.problem;
        if p.id != "logistic" {
            for (name, set) in [
                ("components", p.components.is_some()),
                ("ridge", p.ridge.is_some()),
                ("data_seed", p.data_seed.is_some()),
            ] {
                if set {
                    return Err(Error::config(
                        format!("problem.{name}"),
                        format!("not a parameter of `{}`", p.id),
                    ));
                }
            }
        }
        let logistic = Some((
            p.components.unwrap_or(8),
            p.ridge.unwrap_or(0.1),
            p.data_seed.unwrap_or(0),
        ));
        Objective::by_id(&p.id, p.dim, logistic).map_err(|e| retag("problem", e))
    }

    pub fn noise_model(&self, obj: &Objective) -> Result<NoiseModel> {
        let n = &self.noise;
        let allowed: &[&str] = match n.id.as_str() {
            "deterministic" => &[],
            "additive_bounded" => &["b"],
            "affine_gaussian" => &["a", "b"],
            "minibatch" => &["batch"],
            other => {
                return Err(Error::config(
                    "noise.id",
                    format!("unknown noise model `{other}`"),
                ))
            }
        };
        for (name, set) in [
            ("a", n.a.is_some()),
            ("b", n.b.is_some()),
            ("batch", n.batch.is_some()),
        ] {
            if set && !allowed.contains(&name) {
                return Err(Error::config(
                    format!("noise.{name}"),
                    format!("not a parameter of `{}`", n.id),
                ));
            }
        }
        let model = match n.id.as_str() {
            "deterministic" => Ok(NoiseModel::deterministic()),
            "additive_bounded" => NoiseModel::additive_bounded(n.b.unwrap_or(0.5), obj.dim),
            "affine_gaussian" => {
                NoiseModel::affine_gaussian(n.a.unwrap_or(0.5), n.b.unwrap_or(0.5), obj.dim)
            }
            _ => NoiseModel::minibatch(obj, n.batch.unwrap_or(1)),
        }
        .and_then(|m| m.with_declared(n.sigma0, n.sigma1))
        .map_err(|e| retag("noise", e))?;
        match (n.delta0, n.delta1) {
            (Some(d0), Some(d1)) => model.with_sharpness(d0, d1).map_err(|e| retag("noise", e)),
            (None, None) => Ok(model),
            _ => Err(Error::config("noise.delta0", "delta0 and delta1 go together")),
        }
    }

    pub fn optimizer_params(&self) -> Result<OptimizerParams> {
        let o = &self.optimizer;
        let unused = |names: &[(&str, bool)]| -> Result<()> {
            match names.iter().find(|(_, set)| *set) {
                Some((name, _)) => Err(Error::config(
                    format!("optimizer.{name}"),
                    "not a parameter of this optimizer",
                )),
                None => Ok(()),
            }
        };
        let params = match o.id {
            OptimizerId::AdagradNorm => {
                unused(&[
                    ("beta1", o.beta1.is_some()),
                    ("eps", o.eps.is_some()),
                    ("v0", o.v0.is_some()),
                    ("lr", o.lr.is_some()),
                ])?;
                OptimizerParams::AdagradNorm {
                    alpha0: o.alpha0.unwrap_or(1.0),
                    s0: o.s0.unwrap_or(1.0),
                }
            }
            OptimizerId::Rmsprop => {
                unused(&[
                    ("alpha0", o.alpha0.is_some()),
                    ("s0", o.s0.is_some()),
                    ("lr", o.lr.is_some()),
                ])?;
                OptimizerParams::Rmsprop {
                    beta1: o.beta1.unwrap_or(0.9),
                    eps: o.eps.unwrap_or(1e-8),
                    v0: o.v0.unwrap_or(1.0),
                }
            }
            OptimizerId::Sgd => {
                unused(&[
                    ("alpha0", o.alpha0.is_some()),
                    ("s0", o.s0.is_some()),
                    ("beta1", o.beta1.is_some()),
                    ("eps", o.eps.is_some()),
                    ("v0", o.v0.is_some()),
                ])?;
                OptimizerParams::Sgd {
                    lr: o.lr.unwrap_or(0.1),
                }
            }
        };
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("optimizer.{name}"), "must be finite and positive"))
            }
        };
        match params {
            OptimizerParams::AdagradNorm { alpha0, s0 } => {
                positive("alpha0", alpha0)?;
                positive("s0", s0)?;
            }
            OptimizerParams::Rmsprop { beta1, eps, v0 } => {
                if !(beta1 > 0.0 && beta1 < 1.0) {
                    return Err(Error::config("optimizer.beta1", "must lie in (0, 1)"));
                }
                if !(eps >= 0.0 && eps.is_finite()) {
                    return Err(Error::config("optimizer.eps", "must be finite and non-negative"));
                }
                positive("v0", v0)?;
            }
            OptimizerParams::Sgd { lr } => positive("lr", lr)?,
        }
        Ok(params)
    }

    pub fn initial_point(&self) -> Result<Vector> {
        let d = self.problem.dim;
        match &self.problem.init {
            None => Vector::filled(d, 1.0).map_err(|e| retag("problem.init", e)),
            Some(v) if v.len() != d => Err(Error::config(
                "problem.init",
                format!("has {} entries for dimension {d}", v.len()),
            )),
            Some(v) => Vector::from_slice(v).map_err(|e| retag("problem.init", e)),
        }
    }

    /// Applies a `name = value` override as used by parameter sweeps.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<()> {
        let f = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::config(name, format!("`{value}` is not a number")))
        };
        let u = || {
            value
                .parse::<u64>()
                .map_err(|_| Error::config(name, format!("`{value}` is not an integer")))
        };
        match name {
            "horizon" => self.horizon = u()?,
            "runs" => self.runs = u()?,
            "seed" => self.seed = u()?,
            "dim" => self.problem.dim = u()? as usize,
            "alpha0" => self.optimizer.alpha0 = Some(f()?),
            "s0" => self.optimizer.s0 = Some(f()?),
            "beta1" => self.optimizer.beta1 = Some(f()?),
            "eps" => self.optimizer.eps = Some(f()?),
            "v0" => self.optimizer.v0 = Some(f()?),
            "lr" => self.optimizer.lr = Some(f()?),
            "a" => self.noise.a = Some(f()?),
            "b" => self.noise.b = Some(f()?),
            "batch" => self.noise.batch = Some(u()? as usize),
            "sigma0" => self.noise.sigma0 = Some(f()?),
            "sigma1" => self.noise.sigma1 = Some(f()?),
            "delta_tau_override" => self.diagnostics.delta_tau_override = Some(f()?),
            _ => return Err(Error::config(name, "unknown sweep parameter")),
        }
        Ok(())
    }
}

fn retag(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let field = if name.contains('.') {
                name
            } else {
                format!("{section}.{name}")
            };
            Error::Config { field, reason }
        }
        other => Error::config(section, other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
horizon = 100
runs = 4
seed = 7
checkpoints = [1, 10, 100]

[problem]
id = "quadratic"
dim = 2

[noise]
id = "affine_gaussian"
a = 0.5
b = 0.1

[optimizer]
id = "adagrad_norm"
alpha0 = 1.0
s0 = 1.0
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.horizon, 100);
        assert_eq!(c.checks.resolve().unwrap().len(), CheckName::ALL.len());
        assert_eq!(c.initial_point().unwrap().as_slice(), &[1.0, 1.0]);
        assert_eq!(c.diagnostics.lem_su_delta, 0.5);
        assert!(c.persist_records);
        let round = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(round, c);
    }

    #[test]
    fn zero_horizon_names_the_field() {
        let text = BASE.replace("horizon = 100", "horizon = 0");
        match ExperimentConfig::from_toml_str(&text).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "horizon"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("alpha0 = 1.0", "alpha_0 = 1.0");
        let e = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(e.to_string().contains("alpha_0"), "{e}");
        assert!(e.to_string().contains("line"), "{e}");
    }

    #[test]
    fn parameters_must_belong_to_the_model() {
        let text = BASE.replace("b = 0.1", "b = 0.1\nbatch = 2");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = BASE.replace("s0 = 1.0", "s0 = 1.0\nbeta1 = 0.5");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = BASE.replace("checkpoints = [1, 10, 100]", "checkpoints = [101]");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn declared_constants_only_loosen() {
        let text = BASE.replace("b = 0.1", "b = 0.1\nsigma0 = 1.0");
        match ExperimentConfig::from_toml_str(&text).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "noise.sigma0"),
            e => panic!("{e}"),
        }
        let text = BASE.replace("b = 0.1", "b = 0.1\nsigma0 = 3.0");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.noise_model(&c.objective().unwrap()).unwrap().sigma0, 3.0);
    }

    #[test]
    fn check_lists() {
        let text = BASE.replace("seed = 7", "seed = 7\nchecks = [\"step_identity\", \"gamma_series\"]");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.checks.resolve().unwrap().len(), 2);
        let text = BASE.replace("seed = 7", "seed = 7\nchecks = \"some\"");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = BASE.replace("seed = 7", "seed = 7\nchecks = [\"nope\"]");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        assert_eq!(
            ChecksSpec::parse_list("step_bound, gamma_series").unwrap(),
            ChecksSpec::List(vec![CheckName::StepBound, CheckName::GammaSeries])
        );
    }

    #[test]
    fn sweep_parameters() {
        let mut c = ExperimentConfig::from_toml_str(BASE).unwrap();
        c.set_param("alpha0", "10").unwrap();
        assert_eq!(c.optimizer.alpha0, Some(10.0));
        assert!(c.set_param("gamma", "1").is_err());
        assert!(c.set_param("runs", "x").is_err());
    }
}
