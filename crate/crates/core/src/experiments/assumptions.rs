//! Runs the assumption probes against an experiment's objective and oracle.

use serde::{Deserialize, Serialize};

use super::runner::Experiment;
use crate::diagnostics::Verdict;
use crate::error::Result;
use crate::problems::{
    probe_affine_variance, probe_nonflatness, probe_sharpness, probe_smoothness, DOUBLE_WELL_BOX,
};
use crate::stream::{split_stream, SeedSpec, SUBSTREAM_PROBE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// Smoothness, affine variance, non-flatness and (for bounded oracles) sharpness.
pub fn run_assumption_probes(exp: &Experiment) -> Result<Vec<ProbeOutcome>> {
    let obj = &exp.objective;
    let noise = &exp.noise;
    let mut stream = split_stream(SeedSpec::new(exp.config.seed, u64::MAX - 1, SUBSTREAM_PROBE));
    let mut out = Vec::new();

    let radius = if obj.id == "double_well" {
        DOUBLE_WELL_BOX
    } else {
        (exp.init.norm() + 1.0).max(obj.critical_radius + 1.0)
    };
    let (verdict, detail) = match probe_smoothness(obj, &mut stream, 4000, radius)? {
        Ok(r) => (
            Verdict::Pass,
            format!("max ratio {:.6} ≤ L = {} on radius {radius}", r.estimate, r.declared),
        ),
        Err(v) => (Verdict::Fail, v.to_string()),
    };
    out.push(ProbeOutcome {
        name: "smoothness".into(),
        verdict,
        detail,
    });

    let mut worst: Option<(f64, f64)> = None;
    let mut pass = true;
    for k in 0..5 {
        let theta = if k == 0 {
            exp.init.clone()
        } else {
            stream.in_ball(obj.dim, radius)
        };
        let r = probe_affine_variance(obj, noise, &theta, 10_000, &mut stream)?;
        pass &= r.pass;
        let ratio = r.empirical / r.bound.max(f64::MIN_POSITIVE);
        if worst.is_none_or(|(w, _)| ratio > w) {
            worst = Some((ratio, r.bound));
        }
    }
    let (ratio, _) = worst.unwrap_or((0.0, 0.0));
    out.push(ProbeOutcome {
        name: "affine_variance".into(),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        detail: format!("largest E‖ĝ‖²/(σ₀‖∇g‖² + σ₁) = {ratio:.4} over 5 points"),
    });

    let base = obj.critical_radius.max(1.0);
    let radii = [10.0 * base, 20.0 * base, 40.0 * base, 80.0 * base];
    let r = probe_nonflatness(obj, &mut stream, &radii, 500)?;
    let min = r
        .per_radius
        .iter()
        .filter(|x| x.assessed)
        .map(|x| x.min_grad_norm)
        .fold(f64::INFINITY, f64::min);
    out.push(ProbeOutcome {
        name: "nonflatness".into(),
        verdict: if r.pass { Verdict::Pass } else { Verdict::Fail },
        detail: format!(
            "min ‖∇g‖ = {min:.3e} vs δ̃ = {} on radii up to {}",
            r.delta_tilde, r.certified_up_to
        ),
    });

    let (verdict, detail) = if noise.delta0.is_some() && noise.delta1.is_some() {
        match probe_sharpness(obj, noise, &mut stream, 2000, 20)? {
            Ok(r) => (
                Verdict::Pass,
                format!("{} draws at {} near-critical points", r.draws_checked, r.points_checked),
            ),
            Err(v) => (Verdict::Fail, v.to_string()),
        }
    } else {
        (Verdict::NotEvaluated, format!("`{}` oracle declares no δ₀, δ₁", noise.id()))
    };
    out.push(ProbeOutcome {
        name: "sharpness".into(),
        verdict,
        detail,
    });
    Ok(out)
}
