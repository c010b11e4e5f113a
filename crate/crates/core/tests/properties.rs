use adastab::diagnostics::{
    check_excursion_bands, check_record_invariants, check_step_identity, compute_constants,
    gamma_lambda, partition_stopping_times, ConstantInputs, Instrumenter, OptimizerKind,
    RmsRowStats, TrajectoryRecord,
};
use adastab::experiments::{read_records, CsvRecordWriter, RecordSink};
use adastab::optimizers::{adagrad_step, rmsprop_step, AdaGradNormState, RmsPropState};
use adastab::{split_stream, SeedSpec, Vector};
use proptest::prelude::*;

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, dim)
}

/// Plain re-implementation of the segmentation, written from the definitions.
fn naive_partition(ghat: &[f64], d: f64) -> Vec<(u64, u64, u64, bool)> {
    let t = ghat.len();
    let at = |k: usize| ghat[k - 1];
    let mut out = Vec::new();
    let mut k = 2;
    while k <= t {
        if at(k) <= d {
            k += 1;
            continue;
        }
        let start = k;
        let mid = (start..=t).find(|&j| at(j) <= d || at(j) > 2.0 * d);
        let Some(mid) = mid else {
            out.push((start as u64, t as u64, t as u64, true));
            break;
        };
        let end = (mid..=t).find(|&j| at(j) <= d);
        match end {
            Some(end) => {
                out.push((start as u64, mid as u64, end as u64, false));
                k = end + 1;
            }
            None => {
                out.push((start as u64, mid as u64, t as u64, true));
                break;
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn adagrad_accumulates_and_bounds_steps(
        theta in vec_strategy(4),
        draws in prop::collection::vec(vec_strategy(4), 1..40),
        alpha0 in 1e-3..10.0f64,
        s0 in 1e-3..1e3f64,
    ) {
        let mut st = AdaGradNormState::new(Vector::new(theta).unwrap(), alpha0, s0).unwrap();
        let mut inst = Instrumenter::new(1.0, 0.0);
        let mut prev_sg = 0.0;
        for d in draws {
            let draw = Vector::new(d).unwrap();
            let next = adagrad_step(&st, &draw).unwrap();
            prop_assert!(next.s >= st.s);
            let grad = Vector::zeros(4);
            let row = inst.adagrad(&st, &next, 0.0, &grad, &draw).unwrap();
            prop_assert!(row.step_norm <= alpha0 * (1.0 + 1e-12));
            prop_assert!(check_step_identity(&row).pass);
            prop_assert!(check_record_invariants(&row));
            prop_assert!(row.sigma_gamma > prev_sg);
            prev_sg = row.sigma_gamma;
            st = next;
        }
    }

    #[test]
    fn identity_holds_over_wide_magnitudes(
        log_s in -200.0..250.0f64,
        log_q in -300.0..300.0f64,
    ) {
        let s_prev = 10f64.powf(log_s);
        let q = 10f64.powf(log_q).min(1e300);
        let s = s_prev + q;
        prop_assume!(s.is_finite() && s > s_prev);
        let sg = (s - s_prev).sqrt();
        let (gamma, lambda) = gamma_lambda(sg * sg, s_prev, s);
        let row = TrajectoryRecord {
            n: 1, g: 0.0, grad_norm: 0.0, sgrad_norm: sg, s_prev, s, zeta: 0.0,
            gamma, lambda, ghat: 0.0, step_norm: 0.0, sigma_gamma: 1.0, rms: None,
        };
        let c = check_step_identity(&row);
        prop_assert!(c.pass, "{:?}", c);
    }

    #[test]
    fn lambda_between_half_gamma_and_gamma(s_prev in 1e-6..1e6f64, q in 0.0..1e6f64) {
        let (g, l) = gamma_lambda(q, s_prev, s_prev + q);
        prop_assert!(g <= 1.0);
        prop_assert!(l <= g * (1.0 + 1e-12));
        prop_assert!(l >= 0.5 * g * (1.0 - 1e-12));
    }

    #[test]
    fn rmsprop_averaging_recursion(
        theta in vec_strategy(3),
        draws in prop::collection::vec(vec_strategy(3), 2..40),
        beta1 in 0.05..0.95f64,
    ) {
        let mut st = RmsPropState::new(Vector::new(theta).unwrap(), beta1, 1e-8, 1.0).unwrap();
        for d in draws {
            let draw = Vector::new(d).unwrap();
            let next = rmsprop_step(&st, &draw).unwrap();
            if st.n >= 1 {
                let n = st.n as f64;
                for i in 0..3 {
                    let lhs = (n + 1.0) * next.v.as_slice()[i];
                    let rhs = n * st.v.as_slice()[i] + draw.as_slice()[i].powi(2);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300), "{lhs} {rhs}");
                }
                let (a, b) = (st.alpha(), next.alpha());
                for i in 0..3 {
                    prop_assert!(b.as_slice()[i] <= a.as_slice()[i] * (1.0 + 1e-12));
                }
            }
            st = next;
        }
    }

    #[test]
    fn h_fixed_point(
        l in 0.01..100.0f64, s0v in 0.01..10.0f64, s1v in 0.0..10.0f64,
        a0 in 0.01..10.0f64, ss0 in 0.01..100.0f64,
    ) {
        let c = compute_constants(&ConstantInputs {
            lipschitz: l, sigma0: s0v, sigma1: s1v, alpha0: a0, s0: ss0, beta1: None,
        }).unwrap();
        prop_assert!((c.h(c.c0) - c.c0 / 2.0).abs() <= 1e-9 * c.c0);
        // h(x) ≤ x/2 beyond the root
        prop_assert!(c.h(2.0 * c.c0) <= c.c0);
    }

    #[test]
    fn partition_matches_naive_and_bands_hold(
        tail in prop::collection::vec(0.0..5.0f64, 0..200),
        d in 0.5..2.0f64,
    ) {
        let mut ghat = vec![d * 0.25];
        ghat.extend(tail);
        let got = partition_stopping_times(&ghat, d).unwrap();
        let want = naive_partition(&ghat, d);
        let got_t: Vec<_> = got.iter().map(|e| (e.tau_start, e.tau_mid, e.tau_end, e.truncated)).collect();
        prop_assert_eq!(&got_t, &want);
        for e in &got {
            let hi = if e.truncated { ghat.len() } else { e.tau_end as usize - 1 };
            let peak = ghat[e.tau_start as usize - 1..hi].iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(peak, e.peak_ghat);
        }
        // bands fail exactly when an excursion starts above 2Δ
        let report = check_excursion_bands(&got, &ghat, d);
        let jumps = got.iter().filter(|e| ghat[e.tau_start as usize - 1] > 2.0 * d).count() as u64;
        prop_assert_eq!(report.violations, jumps);
    }

    #[test]
    fn records_round_trip_bit_exactly(
        raw in prop::collection::vec(prop::array::uniform12(-1e300..1e300f64), 1..20),
        with_rms in any::<bool>(),
    ) {
        let rows: Vec<TrajectoryRecord> = raw.iter().enumerate().map(|(i, x)| TrajectoryRecord {
            n: i as u64 + 1, g: x[0], grad_norm: x[1].abs(), sgrad_norm: x[2].abs(),
            s_prev: x[3].abs(), s: x[4].abs(), zeta: x[5], gamma: x[6], lambda: x[7],
            ghat: x[8], step_norm: x[9].abs(), sigma_gamma: x[10],
            rms: with_rms.then_some(RmsRowStats {
                v_min: x[11], v_max: x[11] * 0.5, alpha_min: x[1], alpha_max: x[2],
                nv_over_s_min: x[3] * 1e-7,
            }),
        }).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let kind = if with_rms { OptimizerKind::Rmsprop } else { OptimizerKind::AdagradNorm };
        let mut w = CsvRecordWriter::create(&path, kind).unwrap();
        for r in &rows {
            w.write(r).unwrap();
        }
        w.finish().unwrap();
        prop_assert_eq!(read_records(&path).unwrap(), rows);
    }

    #[test]
    fn streams_replay(seed in any::<u64>(), id in any::<u64>(), sub in 0..4u64) {
        let mut a = split_stream(SeedSpec::new(seed, id, sub));
        let mut b = split_stream(SeedSpec::new(seed, id, sub));
        for _ in 0..16 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = split_stream(SeedSpec::new(seed, id.wrapping_add(1), sub));
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        prop_assert_ne!(xs, ys);
    }
}
