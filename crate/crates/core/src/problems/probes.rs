//! Statistical probes for the standing assumptions.
//!
//! Every probe samples a bounded region and reports what it saw there. None of
//! them can establish a limit property such as coercivity; the reports say which
//! region was covered.

use serde::Serialize;

use super::noise::NoiseModel;
use super::objective::Objective;
use crate::error::{Error, Result};
use crate::stream::RandomStream;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub estimate: f64,
    pub declared: f64,
    pub pairs_used: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("smoothness ratio {ratio} exceeds declared L = {declared} at x = {x:?}, y = {y:?}")]
pub struct SmoothnessViolation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ratio: f64,
    pub declared: f64,
}

/// Largest sampled `‖∇g(x) − ∇g(y)‖ / ‖x − y‖` over the ball of the given radius.
///
/// Half of the pairs are independent points, half are close neighbours, which
/// catches sharp local curvature that far-apart pairs average away.
pub fn probe_smoothness(
    obj: &Objective,
    stream: &mut RandomStream,
    pairs: usize,
    radius: f64,
) -> Result<std::result::Result<SmoothnessReport, SmoothnessViolation>> {
    if pairs == 0 {
        return Err(Error::invalid("pairs", "must be at least 1"));
    }
    let limit = obj.lipschitz * (1.0 + 1e-9);
    let mut estimate: f64 = 0.0;
    let mut used = 0;
    for k in 0..pairs {
        let x = stream.in_ball(obj.dim, radius);
        let y = if k % 2 == 0 {
            stream.in_ball(obj.dim, radius)
        } else {
            let scale = 10f64.powf(stream.uniform_in(-4.0, 0.0));
            let y = x.add(&stream.in_ball(obj.dim, scale))?;
            // keep the neighbour inside the probed ball
            let n = y.norm();
            if n > radius {
                y.scaled(radius / n)?
            } else {
                y
            }
        };
        let dist = x.distance(&y)?;
        if dist == 0.0 {
            continue;
        }
        used += 1;
        let ratio = obj.grad(&x)?.distance(&obj.grad(&y)?)? / dist;
        if ratio > limit {
            return Ok(Err(SmoothnessViolation {
                x: x.into_inner(),
                y: y.into_inner(),
                ratio,
                declared: obj.lipschitz,
            }));
        }
        estimate = estimate.max(ratio);
    }
    Ok(Ok(SmoothnessReport {
        estimate,
        declared: obj.lipschitz,
        pairs_used: used,
        radius,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineVarianceReport {
    pub empirical: f64,
    pub bound: f64,
    pub std_err: f64,
    pub pass: bool,
}

/// Compares the empirical `E‖∇g(θ, ξ)‖²` at `theta` with `σ₀‖∇g(θ)‖² + σ₁`.
pub fn probe_affine_variance(
    obj: &Objective,
    noise: &NoiseModel,
    theta: &Vector,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<AffineVarianceReport> {
    if samples < 100 {
        return Err(Error::invalid("samples", "need at least 100"));
    }
    let grad = obj.grad(theta)?;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..samples {
        let x = noise.sample(obj, theta, &grad, stream)?.norm_sq();
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (samples - 1) as f64;
    let std_err = (var / samples as f64).sqrt();
    let bound = noise.sigma0 * grad.norm_sq() + noise.sigma1;
    Ok(AffineVarianceReport {
        empirical: mean,
        bound,
        std_err,
        pass: mean <= bound + 3.0 * std_err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusMinimum {
    pub radius: f64,
    pub min_grad_norm: f64,
    /// False for radii inside the ball holding the declared critical points.
    pub assessed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonflatnessReport {
    pub per_radius: Vec<RadiusMinimum>,
    pub delta_tilde: f64,
    pub pass: bool,
    /// Largest radius sampled; nothing is claimed beyond it.
    pub certified_up_to: f64,
}

/// Minimum sampled gradient norm on each sphere `‖θ‖ = R`.
pub fn probe_nonflatness(
    obj: &Objective,
    stream: &mut RandomStream,
    radii: &[f64],
    points_per_radius: usize,
) -> Result<NonflatnessReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("radii", "must be non-empty and increasing"));
    }
    if points_per_radius == 0 {
        return Err(Error::invalid("points_per_radius", "must be at least 1"));
    }
    let mut per_radius = Vec::with_capacity(radii.len());
    for &radius in radii {
        let mut min = f64::INFINITY;
        for _ in 0..points_per_radius {
            let theta = stream.on_sphere(obj.dim, radius);
            min = min.min(obj.grad(&theta)?.norm());
        }
        per_radius.push(RadiusMinimum {
            radius,
            min_grad_norm: min,
            assessed: radius > obj.critical_radius,
        });
    }
    let assessed: Vec<_> = per_radius.iter().filter(|r| r.assessed).collect();
    let pass = obj.delta_tilde > 0.0
        && !assessed.is_empty()
        && assessed.iter().all(|r| r.min_grad_norm > obj.delta_tilde);
    Ok(NonflatnessReport {
        certified_up_to: *radii.last().unwrap_or(&0.0),
        per_radius,
        delta_tilde: obj.delta_tilde,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub points_checked: usize,
    pub draws_checked: usize,
    pub region_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("draw norm {draw_norm} exceeds δ₁ = {delta1} at θ = {theta:?}")]
pub struct SharpnessViolation {
    pub theta: Vec<f64>,
    pub draw: Vec<f64>,
    pub draw_norm: f64,
    pub delta1: f64,
}

/// Checks `‖∇g(θ, ξ)‖ ≤ δ₁` on sampled points with `‖∇g(θ)‖ ≤ δ₀`.
///
/// Points are drawn from the ball of radius `critical_radius + 1`, which holds the
/// near-critical region of every built-in objective.
pub fn probe_sharpness(
    obj: &Objective,
    noise: &NoiseModel,
    stream: &mut RandomStream,
    trial_points: usize,
    draws_per_point: usize,
) -> Result<std::result::Result<SharpnessReport, SharpnessViolation>> {
    let (Some(delta0), Some(delta1)) = (noise.delta0, noise.delta1) else {
        return Err(Error::invalid(
            "noise.delta",
            "sharpness probe needs δ₀ and δ₁",
        ));
    };
    let region_radius = obj.critical_radius + 1.0;
    let mut points = 0;
    let mut draws = 0;
    for _ in 0..trial_points {
        let theta = stream.in_ball(obj.dim, region_radius);
        let grad = obj.grad(&theta)?;
        if grad.norm() > delta0 {
            continue;
        }
        points += 1;
        for _ in 0..draws_per_point {
            let draw = noise.sample(obj, &theta, &grad, stream)?;
            draws += 1;
            let draw_norm = draw.norm();
            if draw_norm > delta1 {
                return Ok(Err(SharpnessViolation {
                    theta: theta.into_inner(),
                    draw: draw.into_inner(),
                    draw_norm,
                    delta1,
                }));
            }
        }
    }
    Ok(Ok(SharpnessReport {
        points_checked: points,
        draws_checked: draws,
        region_radius,
    }))
}

/// `‖∇g(θ)‖² ≤ 2L(g(θ) − g_inf)`, returning both sides.
pub fn gradient_domination(obj: &Objective, theta: &Vector) -> Result<(f64, f64, bool)> {
    let lhs = obj.grad(theta)?.norm_sq();
    let g = obj.value(theta)?;
    let rhs = 2.0 * obj.lipschitz * (g - obj.g_inf);
    Ok((lhs, rhs, lhs <= rhs + 1e-12 * (1.0 + g.abs())))
}
