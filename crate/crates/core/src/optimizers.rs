//! AdaGrad-Norm, RMSProp and plain SGD as pure step functions.
//!
//! AdaGrad-Norm accumulates before it steps:
//! `S_n = S_{n−1} + ‖ĝ‖²`, then `θ_{n+1} = θ_n − α₀/√S_n · ĝ`.
//!
//! RMSProp uses the schedule `β_n = 1 − 1/n` (with `β₁` given) and
//! `α_n⁽⁰⁾ = 1/√n`, so that `n·v_n = (n−1)·v_{n−1} + ĝ²` for `n ≥ 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaGradNormState {
    pub theta: Vector,
    /// Accumulator after the last step (`S_n`); equals `s0` before any step.
    pub s: f64,
    /// Steps taken so far.
    pub n: u64,
    pub alpha0: f64,
    pub s0: f64,
}

impl AdaGradNormState {
    pub fn new(theta: Vector, alpha0: f64, s0: f64) -> Result<Self> {
        positive("alpha0", alpha0)?;
        positive("s0", s0)?;
        Ok(AdaGradNormState {
            theta,
            s: s0,
            n: 0,
            alpha0,
            s0,
        })
    }

    /// Effective step size `α₀/√S` for the current accumulator.
    pub fn step_size(&self) -> f64 {
        self.alpha0 / self.s.sqrt()
    }
}

pub fn adagrad_step(state: &AdaGradNormState, g_hat: &Vector) -> Result<AdaGradNormState> {
    g_hat.ensure_dim(state.theta.dim())?;
    let s = state.s + g_hat.norm_sq();
    if !s.is_finite() {
        return Err(Error::NonFinite {
            what: "AdaGrad accumulator",
        });
    }
    let theta = state.theta.axpy(-state.alpha0 / s.sqrt(), g_hat)?;
    Ok(AdaGradNormState {
        theta,
        s,
        n: state.n + 1,
        alpha0: state.alpha0,
        s0: state.s0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsPropState {
    pub theta: Vector,
    /// Second-moment estimate `v_n`; equals `v0` in every coordinate before any step.
    pub v: Vector,
    pub n: u64,
    pub beta1: f64,
    pub eps: f64,
    pub v0: f64,
}

impl RmsPropState {
    pub fn new(theta: Vector, beta1: f64, eps: f64, v0: f64) -> Result<Self> {
        if !(beta1 > 0.0 && beta1 < 1.0) {
            return Err(Error::invalid("beta1", "must lie in (0, 1)"));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", "must be finite and non-negative"));
        }
        positive("v0", v0)?;
        let v = Vector::filled(theta.dim(), v0)?;
        Ok(RmsPropState {
            theta,
            v,
            n: 0,
            beta1,
            eps,
            v0,
        })
    }

    /// Per-coordinate effective step `α_n⁽ⁱ⁾ = α_n⁽⁰⁾/(√v_n⁽ⁱ⁾ + ε)` for the current `n`.
    /// Before the first step `α⁽⁰⁾` is taken as 1.
    pub fn alpha(&self) -> Vector {
        let a0 = schedule_alpha0(self.n.max(1)).expect("n >= 1");
        self.v
            .map(|v| a0 / (v.sqrt() + self.eps))
            .expect("positive v gives finite steps")
    }
}

pub fn rmsprop_step(state: &RmsPropState, g_hat: &Vector) -> Result<RmsPropState> {
    g_hat.ensure_dim(state.theta.dim())?;
    let n = state.n + 1;
    // w = 1 − β_n, taken as exactly 1/n past the first step
    let (beta, w) = if n == 1 {
        (state.beta1, 1.0 - state.beta1)
    } else {
        let w = 1.0 / n as f64;
        (1.0 - w, w)
    };
    let v = state.v.zip_map(g_hat, |v, g| beta * v + w * g * g)?;
    let a0 = schedule_alpha0(n)?;
    let eps = state.eps;
    let step = v.zip_map(g_hat, |v, g| a0 / (v.sqrt() + eps) * g)?;
    Ok(RmsPropState {
        theta: state.theta.sub(&step)?,
        v,
        n,
        beta1: state.beta1,
        eps: state.eps,
        v0: state.v0,
    })
}

pub fn sgd_step(theta: &Vector, g_hat: &Vector, lr: f64) -> Result<Vector> {
    positive("lr", lr)?;
    theta.axpy(-lr, g_hat)
}

/// `β_n = 1 − 1/n` for `n ≥ 2`; `β₁` is the caller's choice.
pub fn schedule_beta(n: u64, beta1: f64) -> Result<f64> {
    match n {
        0 => Err(Error::invalid("n", "schedules start at n = 1")),
        1 => Ok(beta1),
        _ => Ok(1.0 - 1.0 / n as f64),
    }
}

/// `α_n⁽⁰⁾ = 1/√n`.
pub fn schedule_alpha0(n: u64) -> Result<f64> {
    if n == 0 {
        Err(Error::invalid("n", "schedules start at n = 1"))
    } else {
        Ok(1.0 / (n as f64).sqrt())
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be finite and positive"))
    }
}
