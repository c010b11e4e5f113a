use serde::{Deserialize, Serialize};

use super::objective::Objective;
use crate::error::{Error, Result};
use crate::stream::RandomStream;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum NoiseKind {
    Deterministic,
    /// `∇g + b·u`, `u` uniform on `[−1, 1]^d`.
    AdditiveBounded { b: f64 },
    /// `∇g ∘ (1 + a·η) + b·η′` with independent standard normals.
    AffineGaussian { a: f64, b: f64 },
    /// Mean of a uniformly drawn batch of components, without replacement.
    Minibatch { components: usize, batch: usize },
}

/// A stochastic gradient oracle and its declared constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Declared multiplicative variance constant; the Lyapunov function divides by it,
    /// so it must be positive.
    pub sigma0: f64,
    /// Declared additive variance constant for the full gradient norm.
    pub sigma1: f64,
    /// Per-coordinate additive constant, used by the RMSProp Lyapunov function.
    pub sigma1_coord: f64,
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
}

impl NoiseModel {
    pub fn deterministic() -> Self {
        NoiseModel {
            kind: NoiseKind::Deterministic,
            sigma0: 1.0,
            sigma1: 0.0,
            sigma1_coord: 0.0,
            delta0: Some(1.0),
            delta1: Some(1.0),
        }
    }

    pub fn additive_bounded(b: f64, dim: usize) -> Result<Self> {
        non_negative("noise.b", b)?;
        let d = dim as f64;
        Ok(NoiseModel {
            kind: NoiseKind::AdditiveBounded { b },
            sigma0: 1.0,
            sigma1: b * b * d / 3.0,
            sigma1_coord: b * b / 3.0,
            delta0: Some(1.0),
            delta1: Some(1.0 + b * d.sqrt()),
        })
    }

    /// Unbounded Gaussian perturbation; it carries no sharpness constants.
    pub fn affine_gaussian(a: f64, b: f64, dim: usize) -> Result<Self> {
        non_negative("noise.a", a)?;
        non_negative("noise.b", b)?;
        Ok(NoiseModel {
            kind: NoiseKind::AffineGaussian { a, b },
            sigma0: 1.0 + a * a,
            sigma1: b * b * dim as f64,
            sigma1_coord: b * b,
            delta0: None,
            delta1: None,
        })
    }

    pub fn minibatch(obj: &Objective, batch: usize) -> Result<Self> {
        let Some(n) = obj.component_count() else {
            return Err(Error::invalid("noise", "minibatch requires a finite-sum objective"));
        };
        if batch == 0 || batch > n {
            return Err(Error::invalid(
                "noise.batch",
                format!("must lie in 1..={n}"),
            ));
        }
        let spread = obj.component_spread().unwrap_or(0.0);
        // Sampling without replacement shrinks the single-draw variance by (N−B)/(B(N−1)).
        let fpc = if n > 1 {
            (n - batch) as f64 / (batch as f64 * (n - 1) as f64)
        } else {
            0.0
        };
        let sigma1 = fpc * spread * spread;
        Ok(NoiseModel {
            kind: NoiseKind::Minibatch {
                components: n,
                batch,
            },
            sigma0: 1.0,
            sigma1,
            sigma1_coord: sigma1,
            delta0: Some(1.0),
            delta1: Some(1.0 + spread),
        })
    }

    /// Replaces the declared constants; they may only be loosened.
    pub fn with_declared(mut self, sigma0: Option<f64>, sigma1: Option<f64>) -> Result<Self> {
        if let Some(s0) = sigma0 {
            if !(s0 >= self.sigma0 && s0.is_finite()) {
                return Err(Error::invalid(
                    "noise.sigma0",
                    format!("must be at least the model's exact value {}", self.sigma0),
                ));
            }
            self.sigma0 = s0;
        }
        if let Some(s1) = sigma1 {
            if !(s1 >= self.sigma1 && s1.is_finite()) {
                return Err(Error::invalid(
                    "noise.sigma1",
                    format!("must be at least the model's exact value {}", self.sigma1),
                ));
            }
            self.sigma1_coord = self.sigma1_coord.max(s1);
            self.sigma1 = s1;
        }
        Ok(self)
    }

    pub fn with_sharpness(mut self, delta0: f64, delta1: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta1 > 0.0 && delta0.is_finite() && delta1.is_finite()) {
            return Err(Error::invalid("noise.delta", "δ₀ and δ₁ must be positive"));
        }
        self.delta0 = Some(delta0);
        self.delta1 = Some(delta1);
        Ok(self)
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            NoiseKind::Deterministic => "deterministic",
            NoiseKind::AdditiveBounded { .. } => "additive_bounded",
            NoiseKind::AffineGaussian { .. } => "affine_gaussian",
            NoiseKind::Minibatch { .. } => "minibatch",
        }
    }

    /// True when every draw stays within a bounded distance of the true gradient.
    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, NoiseKind::AffineGaussian { .. })
    }

    /// One oracle draw at `theta`, given the already computed true gradient.
    pub fn sample(
        &self,
        obj: &Objective,
        theta: &Vector,
        grad: &Vector,
        stream: &mut RandomStream,
    ) -> Result<Vector> {
        grad.ensure_dim(theta.dim())?;
        match self.kind {
            NoiseKind::Deterministic => Ok(grad.clone()),
            NoiseKind::AdditiveBounded { b } => {
                grad.map(|g| g + b * stream.uniform_in(-1.0, 1.0))
            }
            NoiseKind::AffineGaussian { a, b } => grad.map(|g| {
                let eta = stream.standard_normal();
                let eta2 = stream.standard_normal();
                g * (1.0 + a * eta) + b * eta2
            }),
            NoiseKind::Minibatch { components, batch } => {
                if obj.component_count() != Some(components) {
                    return Err(Error::invalid("noise", "objective component count changed"));
                }
                if batch == components {
                    return Ok(grad.clone());
                }
                let idx = stream.subset(components, batch);
                obj.batch_grad(theta, &idx)
            }
        }
    }
}

/// Draws a stochastic gradient at `theta`.
pub fn stoch_grad(
    obj: &Objective,
    noise: &NoiseModel,
    theta: &Vector,
    stream: &mut RandomStream,
) -> Result<Vector> {
    let grad = obj.grad(theta)?;
    noise.sample(obj, theta, &grad, stream)
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be finite and non-negative"))
    }
}
