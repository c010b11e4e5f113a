//! Monte Carlo estimates of the conditional-expectation terms, which are not
//! functions of a single draw and are therefore never logged per row.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::record::gamma_lambda;
use crate::error::{Error, Result};
use crate::optimizers::AdaGradNormState;
use crate::problems::{NoiseKind, NoiseModel, Objective};
use crate::stream::RandomStream;
use crate::vector::Vector;

/// The random part of the sufficient-descent bound at a frozen state:
/// `∇gᵀĝ/√S_n + σ₁/(2√S₀)·Γ_n² + (σ₀/2)·ζ·Λ_n²`.
/// `X̂_n` is its conditional mean minus its realisation.
pub fn mds_integrand(
    grad: &Vector,
    zeta: f64,
    draw: &Vector,
    state: &AdaGradNormState,
    noise: &NoiseModel,
) -> Result<f64> {
    let s_prev = state.s;
    let s = s_prev + draw.norm_sq();
    let (gamma, lambda) = gamma_lambda(draw.norm_sq(), s_prev, s);
    let inner = grad.dot(draw)?;
    Ok(inner / s.sqrt()
        + noise.sigma1 / (2.0 * state.s0.sqrt()) * gamma * gamma
        + 0.5 * noise.sigma0 * zeta * lambda * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdsEstimate {
    pub mean: f64,
    pub std_err: f64,
    /// Resamples per half.
    pub resamples: usize,
}

impl MdsEstimate {
    pub fn within(&self, k_se: f64) -> bool {
        self.mean.abs() <= k_se * self.std_err
    }
}

/// Estimates `E[X̂_n | F_{n−1}]` at the frozen state `(θ_n, S_{n−1})`.
///
/// One half of the draws estimates the conditional mean of the integrand and
/// the other half supplies the realisations, so the estimate is the difference
/// of two independent sample means.
pub fn estimate_mds_terms(
    obj: &Objective,
    noise: &NoiseModel,
    state: &AdaGradNormState,
    resamples: usize,
    stream: &mut RandomStream,
) -> Result<MdsEstimate> {
    if resamples < 1000 {
        return Err(Error::invalid("resamples", "need at least 1000"));
    }
    let grad = obj.grad(&state.theta)?;
    let zeta = grad.norm_sq() / state.s.sqrt();
    let half = |stream: &mut RandomStream| -> Result<(f64, f64)> {
        let mut ys = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let draw = noise.sample(obj, &state.theta, &grad, stream)?;
            ys.push(mds_integrand(&grad, zeta, &draw, state, noise)?);
        }
        Ok(mean_var(&ys))
    };
    let (mean_a, var_a) = half(stream)?;
    let (mean_b, var_b) = half(stream)?;
    let k = resamples as f64;
    Ok(MdsEstimate {
        mean: mean_a - mean_b,
        std_err: (var_a / k + var_b / k).sqrt(),
        resamples,
    })
}

/// Exact `E[integrand | F_{n−1}]` for a finite-sum oracle, by enumerating
/// every batch; `None` for other oracles.
pub fn exact_conditional_integrand(
    obj: &Objective,
    noise: &NoiseModel,
    state: &AdaGradNormState,
) -> Result<Option<f64>> {
    let (n, b) = match noise.kind {
        NoiseKind::Minibatch { components, batch } => (components, batch),
        NoiseKind::Deterministic => {
            let grad = obj.grad(&state.theta)?;
            let zeta = grad.norm_sq() / state.s.sqrt();
            return mds_integrand(&grad, zeta, &grad, state, noise).map(Some);
        }
        _ => return Ok(None),
    };
    if n > 24 {
        return Err(Error::invalid("components", "enumeration limited to 24 components"));
    }
    let grad = obj.grad(&state.theta)?;
    let zeta = grad.norm_sq() / state.s.sqrt();
    let mut sum = 0.0;
    let mut count = 0usize;
    for batch in (0..n).combinations(b) {
        let draw = obj.batch_grad(&state.theta, &batch)?;
        sum += mds_integrand(&grad, zeta, &draw, state, noise)?;
        count += 1;
    }
    Ok(Some(sum / count as f64))
}

/// Sample mean of the integrand alone, with its standard error; compared with
/// [`exact_conditional_integrand`] by the enumeration oracle.
pub fn sample_conditional_integrand(
    obj: &Objective,
    noise: &NoiseModel,
    state: &AdaGradNormState,
    resamples: usize,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    let grad = obj.grad(&state.theta)?;
    let zeta = grad.norm_sq() / state.s.sqrt();
    let mut ys = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let draw = noise.sample(obj, &state.theta, &grad, stream)?;
        ys.push(mds_integrand(&grad, zeta, &draw, state, noise)?);
    }
    let (m, v) = mean_var(&ys);
    Ok((m, (v / resamples as f64).sqrt()))
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    // shifted by the first sample so that constant data gives exact zeros
    let n = xs.len() as f64;
    let x0 = xs[0];
    let shift = xs.iter().map(|x| x - x0).sum::<f64>() / n;
    if xs.len() < 2 {
        return (x0, 0.0);
    }
    let var = xs
        .iter()
        .map(|x| (x - x0 - shift) * (x - x0 - shift))
        .sum::<f64>()
        / (n - 1.0);
    (x0 + shift, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemSuReport {
    pub mean: f64,
    pub std_err: f64,
    pub bound: f64,
    pub runs: usize,
    pub pass: bool,
}

/// Compares the across-run mean of `Σ 1{‖∇g‖>δ}·‖ĝ‖²/S_{n−1}` (one sum per run)
/// with `(σ₀ + σ₁/δ²)·M`; passes when mean + 3 SE stays below the bound.
pub fn check_lem_su(
    per_run_sums: &[f64],
    delta: f64,
    sigma0: f64,
    sigma1: f64,
    m_const: f64,
) -> Result<LemSuReport> {
    if per_run_sums.is_empty() {
        return Err(Error::invalid("runs", "no trajectories"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    let (mean, var) = mean_var(per_run_sums);
    let std_err = (var / per_run_sums.len() as f64).sqrt();
    let bound = (sigma0 + sigma1 / (delta * delta)) * m_const;
    Ok(LemSuReport {
        mean,
        std_err,
        bound,
        runs: per_run_sums.len(),
        pass: mean + 3.0 * std_err <= bound,
    })
}

/// Sampled estimate of `Ĉ_g = sup{ĝ : ‖∇g‖ ≤ δ̃}` using the ball of `radius`,
/// with `ĝ` evaluated at `S = s0`. Only a lower estimate of the true supremum.
pub fn estimate_c_hat_g(
    obj: &Objective,
    sigma0: f64,
    alpha0: f64,
    s0: f64,
    radius: f64,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<Option<f64>> {
    if obj.delta_tilde <= 0.0 {
        return Ok(None);
    }
    let mut best: Option<f64> = None;
    for _ in 0..samples {
        let theta = stream.in_ball(obj.dim, radius);
        let grad = obj.grad(&theta)?;
        let gsq = grad.norm_sq();
        if gsq.sqrt() <= obj.delta_tilde {
            let ghat = obj.value(&theta)? + 0.5 * sigma0 * alpha0 * gsq / s0.sqrt();
            best = Some(best.map_or(ghat, |b| b.max(ghat)));
        }
    }
    Ok(best)
}
