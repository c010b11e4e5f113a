//! Segmentation of a Lyapunov series into excursions above a threshold `Δ`.
//!
//! With 1-based step indices:
//! - an excursion starts at the first `k` with `ĝ_k > Δ`,
//! - its middle is the first `k ≥ start` with `ĝ_k ≤ Δ` or `ĝ_k > 2Δ`,
//! - it ends at the first `k ≥ middle` with `ĝ_k ≤ Δ`,
//!
//! and the next excursion is searched for after the end. Times that do not
//! occur within the horizon `T` are replaced by `T` and the excursion is
//! flagged as truncated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub tau_start: u64,
    pub tau_mid: u64,
    pub tau_end: u64,
    /// Largest `ĝ` on `[tau_start, tau_end)`, or up to the horizon when truncated.
    pub peak_ghat: f64,
    /// The middle time was reached by crossing `2Δ`.
    pub reached_2delta: bool,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Below,
    Upper { start: u64, peak: f64 },
    Returning { start: u64, mid: u64, peak: f64 },
}

/// Online version of [`partition_stopping_times`]; feed `ĝ_1, ĝ_2, …` in order.
#[derive(Debug, Clone)]
pub struct ExcursionTracker {
    delta: f64,
    k: u64,
    phase: Phase,
    done: Vec<Excursion>,
}

impl ExcursionTracker {
    /// Starts the tracker with `ĝ(θ₁)`, which must lie below `delta`.
    pub fn new(delta: f64, ghat1: f64) -> Result<Self> {
        if !(delta > ghat1) {
            return Err(Error::invalid(
                "delta_tau",
                format!("{delta} must exceed ĝ(θ₁) = {ghat1}"),
            ));
        }
        Ok(ExcursionTracker {
            delta,
            k: 1,
            phase: Phase::Below,
            done: Vec::new(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Observes `ĝ` at the next step index; returns an excursion if one just closed.
    pub fn push(&mut self, ghat: f64) -> Option<Excursion> {
        self.k += 1;
        let k = self.k;
        let d = self.delta;
        if let Phase::Below = self.phase {
            if ghat > d {
                self.phase = Phase::Upper {
                    start: k,
                    peak: ghat,
                };
            } else {
                return None;
            }
        }
        match self.phase {
            Phase::Upper { start, peak } => {
                let peak = peak.max(ghat);
                if ghat <= d {
                    self.phase = Phase::Below;
                    let e = Excursion {
                        tau_start: start,
                        tau_mid: k,
                        tau_end: k,
                        peak_ghat: peak,
                        reached_2delta: false,
                        truncated: false,
                    };
                    self.done.push(e);
                    return Some(e);
                }
                self.phase = if ghat > 2.0 * d {
                    Phase::Returning {
                        start,
                        mid: k,
                        peak,
                    }
                } else {
                    Phase::Upper { start, peak }
                };
                None
            }
            Phase::Returning { start, mid, peak } => {
                if ghat <= d {
                    self.phase = Phase::Below;
                    let e = Excursion {
                        tau_start: start,
                        tau_mid: mid,
                        tau_end: k,
                        peak_ghat: peak,
                        reached_2delta: true,
                        truncated: false,
                    };
                    self.done.push(e);
                    Some(e)
                } else {
                    self.phase = Phase::Returning {
                        start,
                        mid,
                        peak: peak.max(ghat),
                    };
                    None
                }
            }
            Phase::Below => unreachable!(),
        }
    }

    /// Number of values observed, including `ĝ(θ₁)`.
    pub fn horizon(&self) -> u64 {
        self.k
    }

    pub fn completed(&self) -> &[Excursion] {
        &self.done
    }

    /// Closes the horizon, emitting an open excursion as truncated.
    pub fn finish(mut self) -> Vec<Excursion> {
        let t = self.k;
        match self.phase {
            Phase::Below => {}
            Phase::Upper { start, peak } => self.done.push(Excursion {
                tau_start: start,
                tau_mid: t,
                tau_end: t,
                peak_ghat: peak,
                reached_2delta: false,
                truncated: true,
            }),
            Phase::Returning { start, mid, peak } => self.done.push(Excursion {
                tau_start: start,
                tau_mid: mid,
                tau_end: t,
                peak_ghat: peak,
                reached_2delta: true,
                truncated: true,
            }),
        }
        self.done
    }
}

/// Excursions of `ghat` (index 0 holds `ĝ(θ₁)`) above `delta_tau`.
pub fn partition_stopping_times(ghat: &[f64], delta_tau: f64) -> Result<Vec<Excursion>> {
    let Some((&first, rest)) = ghat.split_first() else {
        return Ok(Vec::new());
    };
    let mut tracker = ExcursionTracker::new(delta_tau, first)?;
    for &x in rest {
        tracker.push(x);
    }
    Ok(tracker.finish())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub checked_steps: u64,
    pub violations: u64,
    /// First offending step index.
    pub first_violation: Option<u64>,
}

/// Re-checks the band structure of `excursions` directly against the series:
/// `Δ < ĝ ≤ 2Δ` from each start up to (excluding) its middle, `ĝ_start ≤ 2Δ`,
/// and `ĝ ≤ Δ` everywhere outside excursions.
pub fn check_excursion_bands(excursions: &[Excursion], ghat: &[f64], delta_tau: f64) -> BandReport {
    let t = ghat.len() as u64;
    let at = |k: u64| ghat[(k - 1) as usize];
    let mut report = BandReport::default();
    let flag = |report: &mut BandReport, k: u64, ok: bool| {
        report.checked_steps += 1;
        if !ok {
            report.violations += 1;
            report.first_violation.get_or_insert(k);
        }
    };
    let mut below_from = 1u64;
    for e in excursions {
        let ordered = below_from <= e.tau_start
            && e.tau_start <= e.tau_mid
            && e.tau_mid <= e.tau_end
            && e.tau_end <= t;
        if !ordered {
            flag(&mut report, e.tau_start.min(t).max(1), false);
            continue;
        }
        for k in below_from..e.tau_start {
            flag(&mut report, k, at(k) <= delta_tau);
        }
        let s = at(e.tau_start);
        flag(&mut report, e.tau_start, s > delta_tau && s <= 2.0 * delta_tau);
        for k in (e.tau_start + 1)..e.tau_mid {
            let x = at(k);
            flag(&mut report, k, x > delta_tau && x <= 2.0 * delta_tau);
        }
        if e.truncated {
            below_from = t + 1;
            break;
        }
        below_from = e.tau_end;
    }
    for k in below_from..=t {
        flag(&mut report, k, at(k) <= delta_tau);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_excursion_below_threshold() {
        assert!(partition_stopping_times(&[1.0; 10], 2.0).unwrap().is_empty());
        assert!(partition_stopping_times(&[], 2.0).unwrap().is_empty());
    }

    #[test]
    fn hand_trace_reaching_two_delta() {
        let g = [1.0, 3.0, 5.0, 1.0];
        let ex = partition_stopping_times(&g, 2.0).unwrap();
        assert_eq!(ex.len(), 1);
        let e = ex[0];
        assert_eq!((e.tau_start, e.tau_mid, e.tau_end), (2, 3, 4));
        assert!(e.reached_2delta);
        assert!(!e.truncated);
        assert_eq!(e.peak_ghat, 5.0);
        let bands = check_excursion_bands(&ex, &g, 2.0);
        assert_eq!(bands.violations, 0);
    }

    #[test]
    fn hand_trace_falling_back() {
        let g = [1.0, 3.0, 1.5, 1.0];
        let ex = partition_stopping_times(&g, 2.0).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!((ex[0].tau_start, ex[0].tau_mid, ex[0].tau_end), (2, 3, 3));
        assert!(!ex[0].reached_2delta);
        assert_eq!(check_excursion_bands(&ex, &g, 2.0).violations, 0);
    }

    #[test]
    fn truncated_excursions() {
        let ex = partition_stopping_times(&[1.0, 3.0, 3.5], 2.0).unwrap();
        assert_eq!(ex.len(), 1);
        assert!(ex[0].truncated && !ex[0].reached_2delta);
        assert_eq!((ex[0].tau_mid, ex[0].tau_end), (3, 3));
        let ex = partition_stopping_times(&[1.0, 3.0, 5.0, 6.0], 2.0).unwrap();
        assert!(ex[0].truncated && ex[0].reached_2delta);
        assert_eq!((ex[0].tau_mid, ex[0].tau_end), (3, 4));
    }

    #[test]
    fn ties_follow_the_time_definitions() {
        // ĝ = Δ closes, ĝ = 2Δ stays in the upper band
        let g = [1.0, 4.0, 2.0];
        let ex = partition_stopping_times(&g, 2.0).unwrap();
        assert_eq!((ex[0].tau_mid, ex[0].tau_end), (3, 3));
        assert!(!ex[0].reached_2delta);
        assert_eq!(check_excursion_bands(&ex, &g, 2.0).violations, 0);
    }

    #[test]
    fn jump_over_two_delta_is_a_band_violation() {
        let g = [1.0, 5.0, 1.0];
        let ex = partition_stopping_times(&g, 2.0).unwrap();
        assert_eq!((ex[0].tau_start, ex[0].tau_mid), (2, 2));
        let bands = check_excursion_bands(&ex, &g, 2.0);
        assert_eq!(bands.violations, 1);
        assert_eq!(bands.first_violation, Some(2));
    }

    #[test]
    fn initial_value_must_be_below_threshold() {
        assert!(partition_stopping_times(&[2.0, 1.0], 2.0).is_err());
        assert!(partition_stopping_times(&[3.0], 2.0).is_err());
    }

    #[test]
    fn tampered_partition_is_detected() {
        let g = [1.0, 3.0, 1.0, 3.0, 1.0];
        let mut ex = partition_stopping_times(&g, 2.0).unwrap();
        assert_eq!(ex.len(), 2);
        ex.remove(1);
        assert!(check_excursion_bands(&ex, &g, 2.0).violations > 0);
    }
}
