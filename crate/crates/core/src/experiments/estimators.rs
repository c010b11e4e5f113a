//! Across-run estimators. Confidence intervals use the normal approximation,
//! which is rough for the right-skewed `sup g`; R ≥ 30 is the working minimum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::runner::RunSummary;
use crate::error::{Error, Result};

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub runs: usize,
    pub mean_sup_g: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub max_sup_g: f64,
}

/// Mean of `sup_n g(θ_n)` over runs with a 95% interval.
pub fn estimate_stability(summaries: &[RunSummary]) -> Result<StabilityEstimate> {
    if summaries.len() < 2 {
        return Err(Error::invalid("runs", "stability estimate needs at least 2 runs"));
    }
    let xs: Vec<f64> = summaries.iter().map(|s| s.sup_g).collect();
    let (mean, half) = mean_ci(&xs);
    Ok(StabilityEstimate {
        runs: xs.len(),
        mean_sup_g: mean,
        ci_low: mean - half,
        ci_high: mean + half,
        max_sup_g: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u64,
    pub runs: usize,
    pub mean_grad_sq: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean `‖∇g(θ_n)‖²` at every checkpoint, in increasing `n`.
pub fn estimate_mse_curve(summaries: &[RunSummary]) -> Vec<CurvePoint> {
    let mut by_n: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for s in summaries {
        for c in &s.checkpoints {
            by_n.entry(c.n).or_default().push(c.grad_sq);
        }
    }
    by_n.into_iter()
        .map(|(n, xs)| {
            let (mean, half) = mean_ci(&xs);
            CurvePoint {
                n,
                runs: xs.len(),
                mean_grad_sq: mean,
                ci_low: mean - half,
                ci_high: mean + half,
            }
        })
        .collect()
}

/// Fraction of runs whose tail supremum of `‖∇g(θ_n)‖` lies strictly below `threshold`.
pub fn as_convergence_probe(summaries: &[RunSummary], threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("threshold", "must be non-negative"));
    }
    if summaries.is_empty() {
        return Err(Error::invalid("runs", "no completed runs"));
    }
    let hits = summaries
        .iter()
        .filter(|s| s.tail_sup_grad_norm < threshold)
        .count();
    Ok(hits as f64 / summaries.len() as f64)
}

/// Sample mean and the 95% half-width; the half-width is 0 for a single value.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::runner::Checkpoint;

    fn summary(run_id: u64, sup_g: f64, tail_sup: f64, cps: &[(u64, f64)]) -> RunSummary {
        RunSummary {
            run_id,
            steps: 10,
            sup_g,
            final_g: 0.0,
            final_grad_norm: 0.0,
            tail_mean_grad_sq: 0.0,
            tail_sup_grad_norm: tail_sup,
            checkpoints: cps
                .iter()
                .map(|&(n, grad_sq)| Checkpoint {
                    n,
                    grad_sq,
                    sigma_gamma: 1.0,
                })
                .collect(),
            checker_violations: BTreeMap::new(),
            checks: BTreeMap::new(),
            excursion_count: 0,
            reached_2delta_count: 0,
            sigma_gamma_final: 1.0,
            lem_su_sum: None,
            gamma_series: None,
            rms: None,
        }
    }

    #[test]
    fn identical_runs_have_zero_width() {
        let s: Vec<_> = (0..5).map(|i| summary(i, 2.0, 0.1, &[])).collect();
        let e = estimate_stability(&s).unwrap();
        assert_eq!((e.mean_sup_g, e.ci_low, e.ci_high, e.max_sup_g), (2.0, 2.0, 2.0, 2.0));
        assert!(estimate_stability(&s[..1]).is_err());
    }

    #[test]
    fn stability_hand_values() {
        let s = vec![summary(0, 1.0, 0.0, &[]), summary(1, 3.0, 0.0, &[])];
        let e = estimate_stability(&s).unwrap();
        assert_eq!(e.mean_sup_g, 2.0);
        // s = √2, half-width 1.96·√2/√2
        assert!((e.ci_high - 3.96).abs() < 1e-12);
        assert_eq!(e.max_sup_g, 3.0);
    }

    #[test]
    fn curve_and_probe() {
        let s = vec![
            summary(0, 1.0, 0.1, &[(1, 4.0), (10, 1.0)]),
            summary(1, 1.0, 0.5, &[(1, 4.0), (10, 3.0)]),
        ];
        let c = estimate_mse_curve(&s);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].n, c[0].mean_grad_sq, c[0].ci_high), (1, 4.0, 4.0));
        assert_eq!(c[1].mean_grad_sq, 2.0);
        assert_eq!(as_convergence_probe(&s, 0.3).unwrap(), 0.5);
        assert_eq!(as_convergence_probe(&s, 0.0).unwrap(), 0.0);
        assert_eq!(as_convergence_probe(&s, 0.5).unwrap(), 0.5);
        assert!(estimate_mse_curve(&[]).is_empty());
    }
}
