use std::fmt::Write;

use adastab::diagnostics::Verdict;
use adastab::experiments::BatchSummary;

pub struct Row {
    pub name: String,
    pub description: String,
    pub verdict: Verdict,
    pub detail: String,
}

pub fn table(rows: &[Row]) -> String {
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(s, "  {:<4} {:<w$}  {}", r.verdict.to_string(), r.name, r.detail);
        if !r.description.is_empty() {
            let _ = writeln!(s, "       {:<w$}  ({})", "", r.description);
        }
    }
    s
}

pub fn digest(b: &BatchSummary) -> String {
    let mut s = String::new();
    let c = &b.config;
    let _ = writeln!(
        s,
        "batch: {} / {} / {:?}, d = {}, T = {}, R = {}, seed = {}",
        b.objective.id,
        b.noise.id(),
        b.settings.optimizer,
        b.objective.dim,
        c.horizon,
        c.runs,
        c.seed
    );
    for (k, v) in &b.overrides {
        let _ = writeln!(s, "override: {k} = {v}");
    }
    let _ = writeln!(s, "completed runs: {}", b.completed_runs);
    if b.diverged_count > 0 {
        let _ = writeln!(
            s,
            "DIVERGED runs: {} (excluded from estimates)",
            b.diverged_count
        );
        for d in b.diverged.iter().take(5) {
            let _ = writeln!(s, "  run {} at step {}: {}", d.run_id, d.step, d.reason);
        }
    }
    if let Some(d) = b.settings.constants.delta_tau {
        let _ = writeln!(s, "delta_tau: {d:.6e}");
    }

    let _ = writeln!(s, "\nstability (sup g):");
    match &b.estimates.stability {
        Some(e) => {
            let _ = writeln!(
                s,
                "  mean {:.6e}  95% CI [{:.6e}, {:.6e}]  max {:.6e}",
                e.mean_sup_g, e.ci_low, e.ci_high, e.max_sup_g
            );
        }
        None => {
            let _ = writeln!(s, "  n/a (fewer than 2 completed runs)");
        }
    }

    let _ = writeln!(s, "\nmean ‖∇g(θ_n)‖² at checkpoints:");
    if b.estimates.mse_curve.is_empty() {
        let _ = writeln!(s, "  (no checkpoints)");
    }
    for p in &b.estimates.mse_curve {
        let _ = writeln!(
            s,
            "  n = {:>10}  {:.6e}  [{:.6e}, {:.6e}]",
            p.n, p.mean_grad_sq, p.ci_low, p.ci_high
        );
    }

    if let Some(p) = &b.estimates.as_probe {
        let _ = writeln!(
            s,
            "\ntail sup ‖∇g‖ < {}: {:.4} of {} runs",
            p.threshold, p.fraction, p.runs
        );
    }
    if let Some(l) = &b.estimates.lem_su {
        let _ = writeln!(
            s,
            "sum bound away from critical points: mean {:.4e} ± {:.2e} vs bound {:.4e}",
            l.mean, l.std_err, l.bound
        );
    }
    let e = &b.excursions;
    let _ = writeln!(
        s,
        "excursions: {} total, {} reached 2Δ, {} runs with any",
        e.total, e.reached_2delta, e.runs_with_excursions
    );

    let _ = writeln!(s, "\nchecks:");
    for (name, v) in &b.verdicts {
        let _ = writeln!(
            s,
            "  {:<4} {:<22} {} violations / {} evaluated",
            v.verdict.to_string(),
            name,
            v.violations,
            v.evaluated
        );
    }
    s
}
