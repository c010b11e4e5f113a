use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{AdaGradNormState, RmsPropState};
use crate::vector::Vector;

/// Coordinate statistics attached to RMSProp rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsRowStats {
    pub v_min: f64,
    pub v_max: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// `min_i n·v_n⁽ⁱ⁾ / S_n⁽ⁱ⁾`
    pub nv_over_s_min: f64,
}

/// One instrumented step `n`, evaluated at the pre-step iterate `θ_n`.
///
/// For RMSProp rows `s_prev`/`s` hold the summed auxiliary accumulators
/// `S_n = Σ_i S_n⁽ⁱ⁾`; for SGD rows they are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub n: u64,
    pub g: f64,
    pub grad_norm: f64,
    pub sgrad_norm: f64,
    pub s_prev: f64,
    pub s: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub ghat: f64,
    pub step_norm: f64,
    pub sigma_gamma: f64,
    pub rms: Option<RmsRowStats>,
}

/// `‖ĝ‖²/S_n` and `‖ĝ‖²/(√S_n(√S_{n−1} + √S_n))`.
pub fn gamma_lambda(sgrad_sq: f64, s_prev: f64, s: f64) -> (f64, f64) {
    let rs = s.sqrt();
    (sgrad_sq / s, sgrad_sq / (rs * (s_prev.sqrt() + rs)))
}

/// `ĝ(θ) = g(θ) + (σ₀α₀/2)·‖∇g(θ)‖²/√S` for AdaGrad-Norm.
pub fn adagrad_lyapunov(g: f64, grad_sq: f64, s_prev: f64, sigma0: f64, alpha0: f64) -> f64 {
    g + 0.5 * sigma0 * alpha0 * grad_sq / s_prev.sqrt()
}

/// `ĝ(θ) = g + Σ_i (∇_i g)²α⁽ⁱ⁾ + (σ₁/2)Σ_i α⁽ⁱ⁾` for RMSProp, with the step sizes of
/// the previous iteration. Returns `(ζ, ĝ)`.
pub fn rmsprop_lyapunov(g: f64, grad: &Vector, alpha_prev: &Vector, sigma1_coord: f64) -> (f64, f64) {
    let zeta: f64 = grad
        .iter()
        .zip(alpha_prev.iter())
        .map(|(d, a)| d * d * a)
        .sum();
    let alpha_sum: f64 = alpha_prev.iter().sum();
    (zeta, g + zeta + 0.5 * sigma1_coord * alpha_sum)
}

/// Builds records from consecutive optimizer states; keeps the running sums
/// (`Σγ`, RMSProp auxiliary accumulators) that the rows need.
#[derive(Debug, Clone)]
pub struct Instrumenter {
    sigma0: f64,
    sigma1_coord: f64,
    sigma_gamma: f64,
    s_coord: Vec<f64>,
}

impl Instrumenter {
    pub fn new(sigma0: f64, sigma1_coord: f64) -> Self {
        Instrumenter {
            sigma0,
            sigma1_coord,
            sigma_gamma: 0.0,
            s_coord: Vec::new(),
        }
    }

    pub fn sigma_gamma(&self) -> f64 {
        self.sigma_gamma
    }

    /// Auxiliary accumulators `S_n⁽ⁱ⁾` after the latest RMSProp row.
    pub fn rms_accumulators(&self) -> &[f64] {
        &self.s_coord
    }

    pub fn adagrad(
        &mut self,
        prev: &AdaGradNormState,
        next: &AdaGradNormState,
        g: f64,
        grad: &Vector,
        draw: &Vector,
    ) -> Result<TrajectoryRecord> {
        let row = instrument_adagrad(prev, next, g, grad, draw, self.sigma0, self.sigma_gamma)?;
        self.sigma_gamma = row.sigma_gamma;
        Ok(row)
    }

    pub fn rmsprop(
        &mut self,
        prev: &RmsPropState,
        next: &RmsPropState,
        g: f64,
        grad: &Vector,
        draw: &Vector,
    ) -> Result<TrajectoryRecord> {
        let d = prev.theta.dim();
        if self.s_coord.is_empty() {
            self.s_coord = vec![prev.v0; d];
        }
        let s_prev: f64 = self.s_coord.iter().sum();
        for (s, x) in self.s_coord.iter_mut().zip(draw.iter()) {
            *s += x * x;
        }
        let s: f64 = self.s_coord.iter().sum();
        let sgrad_sq = draw.norm_sq();
        let (gamma, lambda) = gamma_lambda(sgrad_sq, s_prev, s);
        let (zeta, ghat) = rmsprop_lyapunov(g, grad, &prev.alpha(), self.sigma1_coord);
        let alpha = next.alpha();
        let n = next.n as f64;
        let nv_over_s_min = next
            .v
            .iter()
            .zip(&self.s_coord)
            .map(|(v, s)| n * v / s)
            .fold(f64::INFINITY, f64::min);
        self.sigma_gamma += alpha.iter().sum::<f64>() / d as f64;
        finite(TrajectoryRecord {
            n: next.n,
            g,
            grad_norm: grad.norm(),
            sgrad_norm: sgrad_sq.sqrt(),
            s_prev,
            s,
            zeta,
            gamma,
            lambda,
            ghat,
            step_norm: next.theta.distance(&prev.theta)?,
            sigma_gamma: self.sigma_gamma,
            rms: Some(RmsRowStats {
                v_min: next.v.min(),
                v_max: next.v.max(),
                alpha_min: alpha.min(),
                alpha_max: alpha.max(),
                nv_over_s_min,
            }),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn sgd(
        &mut self,
        n: u64,
        prev_theta: &Vector,
        next_theta: &Vector,
        lr: f64,
        g: f64,
        grad: &Vector,
        draw: &Vector,
    ) -> Result<TrajectoryRecord> {
        self.sigma_gamma += lr;
        let grad_sq = grad.norm_sq();
        finite(TrajectoryRecord {
            n,
            g,
            grad_norm: grad_sq.sqrt(),
            sgrad_norm: draw.norm(),
            s_prev: 0.0,
            s: 0.0,
            zeta: grad_sq,
            gamma: 0.0,
            lambda: 0.0,
            ghat: g,
            step_norm: next_theta.distance(prev_theta)?,
            sigma_gamma: self.sigma_gamma,
            rms: None,
        })
    }
}

/// Populates an AdaGrad-Norm row for the step `prev → next` taken with `draw`.
pub fn instrument_adagrad(
    prev: &AdaGradNormState,
    next: &AdaGradNormState,
    g: f64,
    grad: &Vector,
    draw: &Vector,
    sigma0: f64,
    sigma_gamma_prev: f64,
) -> Result<TrajectoryRecord> {
    let grad_sq = grad.norm_sq();
    let sgrad_sq = draw.norm_sq();
    let (gamma, lambda) = gamma_lambda(sgrad_sq, prev.s, next.s);
    finite(TrajectoryRecord {
        n: next.n,
        g,
        grad_norm: grad_sq.sqrt(),
        sgrad_norm: sgrad_sq.sqrt(),
        s_prev: prev.s,
        s: next.s,
        zeta: grad_sq / prev.s.sqrt(),
        gamma,
        lambda,
        ghat: adagrad_lyapunov(g, grad_sq, prev.s, sigma0, prev.alpha0),
        step_norm: next.theta.distance(&prev.theta)?,
        sigma_gamma: sigma_gamma_prev + next.alpha0 / next.s.sqrt(),
        rms: None,
    })
}

fn finite(row: TrajectoryRecord) -> Result<TrajectoryRecord> {
    let core = [
        row.g,
        row.grad_norm,
        row.sgrad_norm,
        row.s_prev,
        row.s,
        row.zeta,
        row.gamma,
        row.lambda,
        row.ghat,
        row.step_norm,
        row.sigma_gamma,
    ];
    if core.iter().all(|x| x.is_finite()) {
        Ok(row)
    } else {
        Err(Error::NonFinite {
            what: "trajectory record",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{adagrad_step, rmsprop_step};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    #[test]
    fn scalar_adagrad_row() {
        let prev = AdaGradNormState::new(v(&[1.0]), 1.0, 1.0).unwrap();
        let draw = v(&[1.0]);
        let next = adagrad_step(&prev, &draw).unwrap();
        let mut ins = Instrumenter::new(1.0, 0.0);
        let r = ins.adagrad(&prev, &next, 0.5, &v(&[1.0]), &draw).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.zeta, 1.0);
        assert_eq!(r.s, 2.0);
        assert_eq!(r.gamma, 0.5);
        let expect = 1.0 / (2f64.sqrt() * (1.0 + 2f64.sqrt()));
        assert!((r.lambda - expect).abs() < 1e-16);
        assert!((r.lambda - 0.2928932).abs() < 1e-7);
        assert_eq!(r.ghat, 0.5 + 0.5);
        assert!((r.sigma_gamma - 1.0 / 2f64.sqrt()).abs() < 1e-16);
        assert!(r.lambda <= r.gamma && r.gamma / 2.0 <= r.lambda);
    }

    #[test]
    fn zero_draw_row() {
        let prev = AdaGradNormState::new(v(&[0.3, 0.1]), 1.0, 2.0).unwrap();
        let draw = Vector::zeros(2);
        let next = adagrad_step(&prev, &draw).unwrap();
        let r = instrument_adagrad(&prev, &next, 0.05, &v(&[0.3, 0.1]), &draw, 1.0, 0.0).unwrap();
        assert_eq!((r.gamma, r.lambda), (0.0, 0.0));
        assert_eq!(r.s, r.s_prev);
        assert_eq!(r.step_norm, 0.0);
    }

    #[test]
    fn rmsprop_rows_track_accumulators() {
        let s0 = RmsPropState::new(v(&[1.0, -1.0]), 0.9, 1e-8, 1e-3).unwrap();
        let d1 = v(&[0.5, 2.0]);
        let s1 = rmsprop_step(&s0, &d1).unwrap();
        let mut ins = Instrumenter::new(1.0, 0.25);
        let r1 = ins.rmsprop(&s0, &s1, 1.0, &v(&[0.5, 2.0]), &d1).unwrap();
        assert!((r1.s_prev - 2e-3).abs() < 1e-18);
        assert!((r1.s - (2e-3 + 4.25)).abs() < 1e-14);
        let alpha0 = 1.0 / (1e-3f64.sqrt() + 1e-8);
        assert!((r1.zeta - 4.25 * alpha0).abs() < 1e-9 * r1.zeta);
        assert!((r1.ghat - (1.0 + r1.zeta + 0.125 * 2.0 * alpha0)).abs() < 1e-9 * r1.ghat);
        let stats = r1.rms.unwrap();
        // r1 = min(β₁, 1 − β₁) bounds n·v/S from below
        assert!(stats.nv_over_s_min >= 0.1);
        let d2 = v(&[-1.0, 0.0]);
        let s2 = rmsprop_step(&s1, &d2).unwrap();
        let r2 = ins.rmsprop(&s1, &s2, 0.5, &v(&[-1.0, 0.0]), &d2).unwrap();
        assert_eq!(r2.n, 2);
        assert_eq!(r2.s_prev, r1.s);
        assert_eq!(ins.rms_accumulators().len(), 2);
    }
}
