use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::constants::TheoryConstants;
use super::ddouble::inv_sqrt_diff;
use super::record::TrajectoryRecord;
use super::stopping::{check_excursion_bands, partition_stopping_times, BandReport, Excursion};
use crate::error::{Error, Result};

/// Relative tolerance of algebraic identities.
pub const IDENTITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    StepIdentity,
    RecordInvariants,
    StepBound,
    SmoothDescent,
    GammaSeries,
    AdjacentLyapunov,
    ExcursionBands,
    GradientDomination,
    SigmaGammaMonotone,
    RmspropAlphaMonotone,
    RmspropNvBound,
    RmspropRecursion,
    RmspropOmegaBound,
}

impl CheckName {
    pub const ALL: [CheckName; 13] = [
        CheckName::StepIdentity,
        CheckName::RecordInvariants,
        CheckName::StepBound,
        CheckName::SmoothDescent,
        CheckName::GammaSeries,
        CheckName::AdjacentLyapunov,
        CheckName::ExcursionBands,
        CheckName::GradientDomination,
        CheckName::SigmaGammaMonotone,
        CheckName::RmspropAlphaMonotone,
        CheckName::RmspropNvBound,
        CheckName::RmspropRecursion,
        CheckName::RmspropOmegaBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::StepIdentity => "step_identity",
            CheckName::RecordInvariants => "record_invariants",
            CheckName::StepBound => "step_bound",
            CheckName::SmoothDescent => "smooth_descent",
            CheckName::GammaSeries => "gamma_series",
            CheckName::AdjacentLyapunov => "adjacent_lyapunov",
            CheckName::ExcursionBands => "excursion_bands",
            CheckName::GradientDomination => "gradient_domination",
            CheckName::SigmaGammaMonotone => "sigma_gamma_monotone",
            CheckName::RmspropAlphaMonotone => "rmsprop_alpha_monotone",
            CheckName::RmspropNvBound => "rmsprop_nv_bound",
            CheckName::RmspropRecursion => "rmsprop_recursion",
            CheckName::RmspropOmegaBound => "rmsprop_omega_bound",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CheckName::StepIdentity => "1/√S_{n−1} − 1/√S_n identity",
            CheckName::RecordInvariants => "Γ ≤ 1, Γ/2 ≤ Λ ≤ Γ",
            CheckName::StepBound => "‖θ_{n+1} − θ_n‖ ≤ α₀",
            CheckName::SmoothDescent => "smoothness descent inequality",
            CheckName::GammaSeries => "ΣΓ/√S_n < 2/√S₀, ΣΓ/√S_{n−1} ≤ 3/√S₀",
            CheckName::AdjacentLyapunov => "ĝ_{n+1} − ĝ_n ≤ h(ĝ_n)",
            CheckName::ExcursionBands => "stopping-time excursion bands",
            CheckName::GradientDomination => "‖∇g‖² ≤ 2L(g − inf g)",
            CheckName::SigmaGammaMonotone => "Σγ strictly increasing",
            CheckName::RmspropAlphaMonotone => "RMSProp α non-increasing",
            CheckName::RmspropNvBound => "RMSProp n·v ≥ r₁·S",
            CheckName::RmspropRecursion => "RMSProp (n+1)v_{n+1} = n·v_n + g²",
            CheckName::RmspropOmegaBound => "RMSProp √S_T/(T+1)⁴ partial-sum bound",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid("checks", format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Compares `1/√S_{n−1} − 1/√S_n` with `‖ĝ‖²/(√S_{n−1}√S_n(√S_{n−1} + √S_n))`.
///
/// The left side is evaluated in double-double from the stored accumulators;
/// the right side uses the realised increment `S_n − S_{n−1}`, which must in
/// turn agree with the recorded draw norm to rounding.
pub fn check_step_identity(row: &TrajectoryRecord) -> IdentityCheck {
    let (a, b) = (row.s_prev, row.s);
    if !(a > 0.0 && b >= a) {
        return IdentityCheck {
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::INFINITY,
            pass: false,
        };
    }
    let lhs = inv_sqrt_diff(a, b);
    let q = b - a;
    let (ra, rb) = (a.sqrt(), b.sqrt());
    let rhs = q / (ra * rb) / (ra + rb);
    let residual = (lhs - rhs).abs();
    let q_rec = row.sgrad_norm * row.sgrad_norm;
    let consistent = (q - q_rec).abs() <= 8.0 * f64::EPSILON * (b + q_rec);
    IdentityCheck {
        lhs,
        rhs,
        residual,
        pass: consistent && residual <= IDENTITY_RTOL * lhs.abs().max(1e-300),
    }
}

/// `Γ ≤ 1`, `Λ ≤ Γ` and `Γ/2 ≤ Λ`.
pub fn check_record_invariants(row: &TrajectoryRecord) -> bool {
    let slack = 1.0 + IDENTITY_RTOL;
    row.gamma <= slack && row.lambda <= row.gamma * slack && row.gamma / 2.0 <= row.lambda * slack
}

/// `g(θ_{n+1}) − g(θ_n) ≤ −α₀·∇gᵀĝ/√S_n + (Lα₀²/2)·Γ_n`; returns `(pass, slack)`.
pub fn check_smooth_descent(
    g_now: f64,
    g_next: f64,
    inner: f64,
    s: f64,
    gamma: f64,
    alpha0: f64,
    lipschitz: f64,
) -> (bool, f64) {
    let bound = -alpha0 * inner / s.sqrt() + 0.5 * lipschitz * alpha0 * alpha0 * gamma;
    let slack = bound - (g_next - g_now);
    (slack >= -1e-10 * (1.0 + g_now.abs()), slack)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GammaSeries {
    pub sum1: f64,
    pub bound1: f64,
    pub sum2: f64,
    pub bound2: f64,
    pub pass: bool,
}

/// `Σ Γ_n/√S_n < 2/√S₀` and `Σ Γ_n/√S_{n−1} ≤ 3/√S₀` over the given rows.
pub fn check_gamma_series<'a>(
    rows: impl IntoIterator<Item = &'a TrajectoryRecord>,
    s0: f64,
) -> GammaSeries {
    let mut acc = GammaAccumulator::default();
    for r in rows {
        acc.push(r);
    }
    acc.finish(s0)
}

#[derive(Debug, Clone, Copy, Default)]
struct GammaAccumulator {
    sum1: f64,
    sum2: f64,
}

impl GammaAccumulator {
    fn push(&mut self, r: &TrajectoryRecord) {
        self.sum1 += r.gamma / r.s.sqrt();
        self.sum2 += r.gamma / r.s_prev.sqrt();
    }

    fn finish(self, s0: f64) -> GammaSeries {
        let bound1 = 2.0 / s0.sqrt();
        let bound2 = 3.0 / s0.sqrt();
        GammaSeries {
            sum1: self.sum1,
            bound1,
            sum2: self.sum2,
            bound2,
            pass: self.sum1 < bound1 && self.sum2 <= bound2,
        }
    }
}

/// `ĝ_{n+1} − ĝ_n ≤ h(ĝ_n)` with a `1e-9·(1 + ĝ_n)` allowance.
pub fn adjacent_lyapunov_ok(ghat_now: f64, ghat_next: f64, constants: &TheoryConstants) -> bool {
    ghat_next - ghat_now <= constants.h(ghat_now) + 1e-9 * (1.0 + ghat_now.abs())
}

pub fn check_adjacent_lyapunov(ghat: &[f64], constants: &TheoryConstants) -> u64 {
    ghat.windows(2)
        .filter(|w| !adjacent_lyapunov_ok(w[0], w[1], constants))
        .count() as u64
}

/// `‖∇g‖² ≤ 2L(g − g_inf)` for one row.
pub fn gradient_domination_ok(row: &TrajectoryRecord, lipschitz: f64, g_inf: f64) -> bool {
    row.grad_norm * row.grad_norm <= 2.0 * lipschitz * (row.g - g_inf) + 1e-12 * (1.0 + row.g.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    AdagradNorm,
    Rmsprop,
    Sgd,
}

impl OptimizerKind {
    pub fn applies(self, check: CheckName) -> bool {
        use CheckName::*;
        match self {
            OptimizerKind::AdagradNorm => !matches!(
                check,
                RmspropAlphaMonotone | RmspropNvBound | RmspropRecursion | RmspropOmegaBound
            ),
            OptimizerKind::Rmsprop => matches!(
                check,
                GradientDomination
                    | SigmaGammaMonotone
                    | RmspropAlphaMonotone
                    | RmspropNvBound
                    | RmspropRecursion
                    | RmspropOmegaBound
            ),
            OptimizerKind::Sgd => matches!(check, GradientDomination | SigmaGammaMonotone),
        }
    }
}

/// Everything the checkers need besides the rows themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    pub optimizer: OptimizerKind,
    pub enabled: BTreeSet<CheckName>,
    pub alpha0: f64,
    pub s0: f64,
    pub lipschitz: f64,
    pub g_inf: f64,
    pub constants: TheoryConstants,
    /// Threshold `δ` of the sum bound on `Γ_n` away from critical points.
    pub lem_su_delta: f64,
}

/// Data only available while the trajectory is being simulated.
#[derive(Debug, Clone, Copy)]
pub struct OnlineStep<'a> {
    /// `∇g(θ_n)ᵀĝ_n`
    pub inner: f64,
    pub rms: Option<RmsStep<'a>>,
}

#[derive(Debug, Clone, Copy)]
pub struct RmsStep<'a> {
    /// Steps taken before this one.
    pub n_prev: u64,
    pub v_prev: &'a [f64],
    pub v_next: &'a [f64],
    pub alpha_prev: &'a [f64],
    pub alpha_next: &'a [f64],
    pub draw: &'a [f64],
    pub s_coord: &'a [f64],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub evaluated: u64,
    pub violations: u64,
    pub first_violation: Option<u64>,
}

impl Tally {
    fn record(&mut self, step: u64, ok: bool) {
        self.evaluated += 1;
        if !ok {
            self.violations += 1;
            self.first_violation.get_or_insert(step);
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.evaluated == 0 {
            Verdict::NotEvaluated
        } else if self.violations == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotEvaluated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotEvaluated => "n/a",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RmsStatistics {
    /// `sup_n Σ_i v_n⁽ⁱ⁾ / ln²(n+1)` over `n ≥ 2`.
    pub bounded_v_sup: Option<f64>,
    /// `Σ_n ‖θ_{n+1} − θ_n‖²/√n`
    pub step_energy_sum: f64,
    /// `√S_T/(T+1)⁴` and the partial-sum bound it is compared with, at the horizon.
    pub omega_lhs: f64,
    pub omega_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tallies: BTreeMap<CheckName, Tally>,
    pub gamma_series: Option<GammaSeries>,
    pub excursions: Vec<Excursion>,
    pub bands: Option<BandReport>,
    pub lem_su_sum: Option<f64>,
    pub rms: Option<RmsStatistics>,
}

impl SuiteReport {
    pub fn violations(&self) -> BTreeMap<String, u64> {
        self.tallies
            .iter()
            .map(|(k, t)| (k.as_str().to_string(), t.violations))
            .collect()
    }

    pub fn total_violations(&self) -> u64 {
        self.tallies.values().map(|t| t.violations).sum()
    }

    pub fn reached_2delta_count(&self) -> u64 {
        self.excursions.iter().filter(|e| e.reached_2delta).count() as u64
    }
}

/// Streams rows through every enabled checker.
#[derive(Debug, Clone)]
pub struct CheckSuite {
    settings: SuiteSettings,
    tallies: BTreeMap<CheckName, Tally>,
    prev: Option<(TrajectoryRecord, Option<f64>)>,
    gamma: GammaAccumulator,
    ghat_series: Vec<f64>,
    lem_su: f64,
    omega_sum: f64,
    omega_s0: Option<f64>,
    omega_last: (f64, f64),
    bounded_v: Option<f64>,
    step_energy: f64,
}

impl CheckSuite {
    pub fn new(settings: SuiteSettings) -> Self {
        let tallies = settings
            .enabled
            .iter()
            .filter(|c| settings.optimizer.applies(**c))
            .map(|c| (*c, Tally::default()))
            .collect();
        CheckSuite {
            settings,
            tallies,
            prev: None,
            gamma: GammaAccumulator::default(),
            ghat_series: Vec::new(),
            lem_su: 0.0,
            omega_sum: 0.0,
            omega_s0: None,
            omega_last: (0.0, 0.0),
            bounded_v: None,
            step_energy: 0.0,
        }
    }

    pub fn settings(&self) -> &SuiteSettings {
        &self.settings
    }

    fn tally(&mut self, check: CheckName, step: u64, ok: bool) {
        if let Some(t) = self.tallies.get_mut(&check) {
            t.record(step, ok);
        }
    }

    fn on(&self, check: CheckName) -> bool {
        self.tallies.contains_key(&check)
    }

    /// Consumes the next row; `online` carries what a record file cannot.
    pub fn observe(&mut self, row: &TrajectoryRecord, online: Option<OnlineStep<'_>>) {
        use CheckName::*;
        let n = row.n;
        let st = &self.settings;
        let (alpha0, lipschitz, g_inf) = (st.alpha0, st.lipschitz, st.g_inf);
        let kind = st.optimizer;

        if self.on(GradientDomination) {
            self.tally(GradientDomination, n, gradient_domination_ok(row, lipschitz, g_inf));
        }
        let prev_sg = self.prev.as_ref().map_or(0.0, |(p, _)| p.sigma_gamma);
        self.tally(SigmaGammaMonotone, n, row.sigma_gamma > prev_sg);

        match kind {
            OptimizerKind::AdagradNorm => {
                if self.on(StepIdentity) {
                    self.tally(StepIdentity, n, check_step_identity(row).pass);
                }
                self.tally(RecordInvariants, n, check_record_invariants(row));
                self.tally(StepBound, n, row.step_norm <= alpha0 * (1.0 + IDENTITY_RTOL));
                self.gamma.push(row);
                self.ghat_series.push(row.ghat);
                if row.grad_norm > self.settings.lem_su_delta {
                    self.lem_su += row.sgrad_norm * row.sgrad_norm / row.s_prev;
                }
                if let Some((p, inner)) = self.prev.clone() {
                    if let Some(inner) = inner {
                        let (ok, _) =
                            check_smooth_descent(p.g, row.g, inner, p.s, p.gamma, alpha0, lipschitz);
                        self.tally(SmoothDescent, p.n, ok);
                    }
                    let ok = adjacent_lyapunov_ok(p.ghat, row.ghat, &self.settings.constants);
                    self.tally(AdjacentLyapunov, p.n, ok);
                }
            }
            OptimizerKind::Rmsprop => self.observe_rmsprop(row, online.and_then(|o| o.rms)),
            OptimizerKind::Sgd => {}
        }
        self.prev = Some((row.clone(), online.map(|o| o.inner)));
    }

    fn observe_rmsprop(&mut self, row: &TrajectoryRecord, rms: Option<RmsStep<'_>>) {
        use CheckName::*;
        let n = row.n;
        let slack = 1.0 + IDENTITY_RTOL;
        if let Some(stats) = row.rms {
            if let Some(r1) = self.settings.constants.r1 {
                self.tally(RmspropNvBound, n, stats.nv_over_s_min >= r1 * (1.0 - IDENTITY_RTOL));
            }
            // Offline, only the extreme coordinates are available; they inherit monotonicity.
            if rms.is_none() {
                if let Some((p, _)) = &self.prev {
                    if let Some(ps) = p.rms {
                        let ok = stats.alpha_max <= ps.alpha_max * slack
                            && stats.alpha_min <= ps.alpha_min * slack;
                        self.tally(RmspropAlphaMonotone, n, ok);
                    }
                }
            }
        }
        let s0 = *self.omega_s0.get_or_insert(row.s_prev);
        let np1 = (n + 1) as f64;
        let np1_4 = np1 * np1 * np1 * np1;
        self.omega_sum += row.sgrad_norm * row.sgrad_norm / (np1_4 * row.s_prev.sqrt());
        let lhs = row.s.sqrt() / np1_4;
        let rhs = s0.sqrt() + self.omega_sum;
        self.omega_last = (lhs, rhs);
        self.tally(RmspropOmegaBound, n, lhs <= rhs * slack);
        self.step_energy += row.step_norm * row.step_norm / (n as f64).sqrt();

        if let Some(r) = rms {
            if r.n_prev >= 1 {
                let ok = r
                    .alpha_next
                    .iter()
                    .zip(r.alpha_prev)
                    .all(|(a, b)| *a <= b * slack);
                self.tally(RmspropAlphaMonotone, n, ok);
                let m = r.n_prev as f64;
                let ok = r
                    .v_next
                    .iter()
                    .zip(r.v_prev)
                    .zip(r.draw)
                    .all(|((vn, vp), g)| {
                        let lhs = (m + 1.0) * vn;
                        (lhs - (m * vp + g * g)).abs() <= IDENTITY_RTOL * lhs.abs().max(1e-300)
                    });
                self.tally(RmspropRecursion, n, ok);
            }
            if n >= 2 {
                let ln = ((n + 1) as f64).ln();
                let stat = r.v_next.iter().sum::<f64>() / (ln * ln);
                self.bounded_v = Some(self.bounded_v.map_or(stat, |b: f64| b.max(stat)));
            }
        }
    }

    pub fn finish(mut self) -> Result<SuiteReport> {
        use CheckName::*;
        let kind = self.settings.optimizer;
        let mut gamma_series = None;
        let mut excursions = Vec::new();
        let mut bands = None;
        let mut lem_su_sum = None;
        if kind == OptimizerKind::AdagradNorm && !self.ghat_series.is_empty() {
            let gs = self.gamma.finish(self.settings.s0);
            let last = self.prev.as_ref().map_or(0, |(p, _)| p.n);
            self.tally(GammaSeries, last, gs.pass);
            gamma_series = Some(gs);
            lem_su_sum = Some(self.lem_su);
            if let Some(delta) = self.settings.constants.delta_tau {
                excursions = partition_stopping_times(&self.ghat_series, delta)?;
                let report = check_excursion_bands(&excursions, &self.ghat_series, delta);
                if let Some(t) = self.tallies.get_mut(&ExcursionBands) {
                    t.evaluated += report.checked_steps;
                    t.violations += report.violations;
                    if t.first_violation.is_none() {
                        t.first_violation = report.first_violation;
                    }
                }
                bands = Some(report);
            }
        }
        let rms = (kind == OptimizerKind::Rmsprop).then_some(RmsStatistics {
            bounded_v_sup: self.bounded_v,
            step_energy_sum: self.step_energy,
            omega_lhs: self.omega_last.0,
            omega_rhs: self.omega_last.1,
        });
        Ok(SuiteReport {
            tallies: self.tallies,
            gamma_series,
            excursions,
            bands,
            lem_su_sum,
            rms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s_prev: f64, q: f64) -> TrajectoryRecord {
        let s = s_prev + q;
        TrajectoryRecord {
            n: 1,
            g: 0.5,
            grad_norm: 1.0,
            sgrad_norm: q.sqrt(),
            s_prev,
            s,
            zeta: 1.0 / s_prev.sqrt(),
            gamma: q / s,
            lambda: q / (s.sqrt() * (s_prev.sqrt() + s.sqrt())),
            ghat: 1.0,
            step_norm: q.sqrt() / s.sqrt(),
            sigma_gamma: 1.0 / s.sqrt(),
            rms: None,
        }
    }

    #[test]
    fn identity_hand_values() {
        let c = check_step_identity(&row(1.0, 1.0));
        assert!(c.pass);
        assert!((c.lhs - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-16);
        assert!((c.lhs - 0.2928932).abs() < 1e-7);
        let c = check_step_identity(&row(4.0, 5.0));
        assert!(c.pass);
        assert!((c.lhs - 1.0 / 6.0).abs() < 1e-16 && (c.rhs - 1.0 / 6.0).abs() < 1e-16);
        let c = check_step_identity(&row(3.0, 0.0));
        assert!(c.pass);
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn identity_survives_cancellation() {
        for (s, q) in [(1e12, 1e-3), (7.3e6, 2.1e-9), (1e300, 1e290), (1.0, 1e-15)] {
            let c = check_step_identity(&row(s, q));
            assert!(c.pass, "{s} {q}: {c:?}");
        }
    }

    #[test]
    fn corrupted_accumulator_fails_identity() {
        let mut r = row(10.0, 2.0);
        r.s *= 1.0 + 1e-6;
        assert!(!check_step_identity(&r).pass);
        let mut r = row(10.0, 2.0);
        r.s = r.s_prev / 2.0;
        assert!(!check_step_identity(&r).pass);
    }

    #[test]
    fn gamma_series_single_step() {
        let r = row(1.0, 1.0);
        let gs = check_gamma_series([&r], 1.0);
        assert!((gs.sum1 - 0.5 / 2f64.sqrt()).abs() < 1e-16);
        assert!((gs.sum1 - 0.35355339).abs() < 1e-8);
        assert_eq!((gs.bound1, gs.bound2), (2.0, 3.0));
        assert!(gs.pass);
        let zero = row(1.0, 0.0);
        let gs = check_gamma_series([&zero, &zero], 1.0);
        assert_eq!((gs.sum1, gs.sum2), (0.0, 0.0));
    }

    #[test]
    fn smooth_descent_on_exact_quadratic() {
        // g = ½θ², θ = 2, draw = 2, S0 = 1
        let (theta, draw, s) = (2.0f64, 2.0f64, 5.0f64);
        let next = theta - draw / s.sqrt();
        let (ok, slack) = check_smooth_descent(
            0.5 * theta * theta,
            0.5 * next * next,
            theta * draw,
            s,
            draw * draw / s,
            1.0,
            1.0,
        );
        assert!(ok);
        // the quadratic is its own second-order expansion
        assert!(slack.abs() < 1e-14);
        assert!(check_smooth_descent(0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0).0);
    }

    #[test]
    fn check_names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
        assert!("no_such_check".parse::<CheckName>().is_err());
    }
}
