use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of the descent-lemma constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub lipschitz: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub alpha0: f64,
    pub s0: f64,
    pub beta1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    /// `α₀σ₁/(2√S₀) + Lα₀²/2`
    pub c_gamma1: f64,
    /// `σ₀(2σ₀ + 1)α₀³L²/2`
    pub c_gamma2: f64,
    pub h_a: f64,
    pub h_b: f64,
    /// Positive root of `x/2 = h(x)`.
    pub c0: f64,
    /// Threshold of the stopping-time segmentation; needs `ĝ(θ₁)`.
    pub delta_tau: Option<f64>,
    /// Constant of the sum bound on `Γ_n` away from critical points; needs `ĝ(θ₁)`.
    pub m_const: Option<f64>,
    /// `min{β₁, 1 − β₁}` for RMSProp.
    pub r1: Option<f64>,
}

impl TheoryConstants {
    /// `h(x) = h_a·√x + h_b`, the one-step growth bound of the Lyapunov function.
    pub fn h(&self, x: f64) -> f64 {
        self.h_a * x.max(0.0).sqrt() + self.h_b
    }
}

pub fn compute_constants(inputs: &ConstantInputs) -> Result<TheoryConstants> {
    let ConstantInputs {
        lipschitz: l,
        sigma0,
        sigma1,
        alpha0,
        s0,
        beta1,
    } = *inputs;
    for (name, x) in [("L", l), ("alpha0", alpha0), ("s0", s0)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(name, "must be finite and positive"));
        }
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::invalid(
            "sigma0",
            "must be positive; declare an explicit floor such as 1 for additive-only noise",
        ));
    }
    if !(sigma1 >= 0.0 && sigma1.is_finite()) {
        return Err(Error::invalid("sigma1", "must be finite and non-negative"));
    }
    let r1 = match beta1 {
        Some(b) if b > 0.0 && b < 1.0 => Some(b.min(1.0 - b)),
        Some(_) => return Err(Error::invalid("beta1", "must lie in (0, 1)")),
        None => None,
    };
    let sqrt_s0 = s0.sqrt();
    let c_gamma1 = alpha0 * sigma1 / (2.0 * sqrt_s0) + l * alpha0 * alpha0 / 2.0;
    let c_gamma2 = sigma0 * (2.0 * sigma0 + 1.0) * alpha0.powi(3) * l * l / 2.0;
    let k = 1.0 + sigma0 * alpha0 * l / sqrt_s0;
    let h_a = (2.0 * l).sqrt() * k * alpha0;
    let h_b = k * l * alpha0 * alpha0 / 2.0;
    let root = h_a + (h_a * h_a + 2.0 * h_b).sqrt();
    Ok(TheoryConstants {
        c_gamma1,
        c_gamma2,
        h_a,
        h_b,
        c0: root * root,
        delta_tau: None,
        m_const: None,
        r1,
    })
}

/// `M = 4y₁ĝ(θ₁)/α₀ + 12C_{Γ,1}/(α₀√S₀) + 8C_{Γ,2}/(α₀S₀)` with `y₁ = 1/√S₀`.
pub fn compute_m(ghat1: f64, alpha0: f64, s0: f64, constants: &TheoryConstants) -> f64 {
    let y1 = 1.0 / s0.sqrt();
    4.0 * y1 * ghat1 / alpha0
        + 12.0 * constants.c_gamma1 / (alpha0 * s0.sqrt())
        + 8.0 * constants.c_gamma2 / (alpha0 * s0)
}

/// `Δ_τ = max{2ĝ(θ₁), C₀, Ĉ_g}`; a user override takes the place of an unknown `Ĉ_g`.
pub fn compute_delta_tau(
    ghat1: f64,
    constants: &TheoryConstants,
    c_hat_g: Option<f64>,
    override_value: Option<f64>,
) -> Result<f64> {
    let mut delta = (2.0 * ghat1).max(constants.c0);
    if let Some(c) = c_hat_g {
        delta = delta.max(c);
    }
    if let Some(o) = override_value {
        if !(o > 0.0 && o.is_finite()) {
            return Err(Error::invalid("delta_tau_override", "must be positive"));
        }
        delta = delta.max(o);
    }
    if delta <= ghat1 {
        return Err(Error::invalid(
            "delta_tau",
            format!("{delta} does not exceed ĝ(θ₁) = {ghat1}"),
        ));
    }
    Ok(delta)
}

/// Fills in the initial-point dependent constants.
pub fn with_initial_point(
    mut constants: TheoryConstants,
    inputs: &ConstantInputs,
    ghat1: f64,
    c_hat_g: Option<f64>,
    delta_tau_override: Option<f64>,
) -> Result<TheoryConstants> {
    constants.delta_tau = Some(compute_delta_tau(
        ghat1,
        &constants,
        c_hat_g,
        delta_tau_override,
    )?);
    constants.m_const = Some(compute_m(ghat1, inputs.alpha0, inputs.s0, &constants));
    Ok(constants)
}
