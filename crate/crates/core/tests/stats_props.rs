use std::collections::HashSet;

use esprofile_core::stats::{
    benjamini_yekutieli, harmonic, midranks, signed_rank, two_stage_filter, WilcoxonMethod,
};
use esprofile_core::ScenarioOutcome;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two-sided p from all 2^n sign assignments of the ranked |d|.
fn enumerated_p(d: &[f64]) -> f64 {
    let nz: Vec<f64> = d.iter().copied().filter(|x| *x != 0.0).collect();
    let abs: Vec<f64> = nz.iter().map(|x| x.abs()).collect();
    let (ranks, _) = midranks(&abs);
    let w_plus: f64 = nz.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let total: f64 = ranks.iter().sum();
    let stat = w_plus.min(total - w_plus);
    let n = ranks.len();
    let mut at_most = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= stat + 1e-9 {
            at_most += 1;
        }
    }
    (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0)
}

fn bh(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adj = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        running = running.min(p[i] * m as f64 / (rank + 1) as f64);
        adj[i] = running.min(1.0);
    }
    adj
}

#[test]
fn exact_p_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let n = 1 + case % 12;
        // every other case rounds to force ties and zeros
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let v: f64 = rng.random_range(-3.0..3.0);
                if case % 2 == 0 { v } else { v.round() }
            })
            .collect();
        if d.iter().all(|x| *x == 0.0) {
            continue;
        }
        let r = signed_rank(&d, WilcoxonMethod::Exact);
        let want = enumerated_p(&d);
        assert!((r.p_value - want).abs() < 1e-12, "case {case}: {d:?} {} vs {want}", r.p_value);
    }
}

/// Differences 1..=20, tie-free, with the listed ranks negated: W- is their sum.
fn sample_with_statistic(neg: &[usize]) -> Vec<f64> {
    (1..=20).map(|r| if neg.contains(&r) { -(r as f64) } else { r as f64 }).collect()
}

#[test]
fn normal_approximation_error_at_twenty() {
    // Oracle: exact two-sided p from the full 2^20 distribution against the
    // continuity-corrected normal, computed independently for every W.
    // The largest gap is 0.008294 at W = 84 (exact p = 0.4524).
    let mut worst = 0.0f64;
    let mut worst_tail = 0.0f64;
    for mask in 0u32..(1 << 20) {
        if mask.count_ones() > 10 || mask % 97 != 0 {
            continue;
        }
        let neg: Vec<usize> = (0..20).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        let d = sample_with_statistic(&neg);
        let e = signed_rank(&d, WilcoxonMethod::Exact);
        let a = signed_rank(&d, WilcoxonMethod::Normal);
        let gap = (e.p_value - a.p_value).abs();
        worst = worst.max(gap);
        if e.p_value <= 0.2 {
            worst_tail = worst_tail.max(gap);
        }
    }
    assert!(worst <= 0.0083 && worst > 0.008, "max gap {worst}");
    assert!(worst_tail < 0.005, "tail gap {worst_tail}");

    let d = sample_with_statistic(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
    let (e, a) = (signed_rank(&d, WilcoxonMethod::Exact), signed_rank(&d, WilcoxonMethod::Normal));
    assert_eq!(e.statistic, 78.0);
    assert!((e.p_value - 0.3299827575683594).abs() < 1e-12, "{}", e.p_value);
    assert!((a.p_value - 0.3225086826207954).abs() < 1e-9, "{}", a.p_value);
}

proptest! {
    #[test]
    fn by_preserves_order_and_dominates_bh(p in prop::collection::vec(0.0f64..=1.0, 1..40), alpha in 0.001f64..0.5) {
        let by = benjamini_yekutieli(&p, alpha).unwrap();
        prop_assert!((by.c_m - harmonic(p.len())).abs() < 1e-15);
        let bh = bh(&p);
        for i in 0..p.len() {
            prop_assert!(by.adjusted[i] >= p[i] - 1e-15);
            prop_assert!(by.adjusted[i] <= 1.0);
            prop_assert!(bh[i] <= by.adjusted[i] + 1e-12);
            prop_assert_eq!(by.rejected[i], by.adjusted[i] <= alpha);
            for j in 0..p.len() {
                if p[i] <= p[j] {
                    prop_assert!(by.adjusted[i] <= by.adjusted[j] + 1e-15);
                }
            }
        }
    }

    #[test]
    fn by_matches_classical_step_up(p in prop::collection::vec(0.0f64..=0.2, 1..30), alpha in 0.01f64..0.3) {
        let m = p.len();
        let c = harmonic(m);
        let mut sorted = p.clone();
        sorted.sort_by(f64::total_cmp);
        let k = (1..=m).rev().find(|&k| sorted[k - 1] <= k as f64 * alpha / (m as f64 * c));
        let threshold = k.map(|k| sorted[k - 1]);
        let by = benjamini_yekutieli(&p, alpha).unwrap();
        for i in 0..m {
            let classical = threshold.is_some_and(|t| p[i] <= t);
            prop_assert_eq!(by.rejected[i], classical, "p={:?}", p);
        }
    }

    #[test]
    fn exact_p_is_a_probability(d in prop::collection::vec(-5i32..=5, 1..25)) {
        let d: Vec<f64> = d.into_iter().map(f64::from).collect();
        let r = signed_rank(&d, WilcoxonMethod::Auto);
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        prop_assert!((r.w_plus + r.w_minus - (r.n_effective * (r.n_effective + 1)) as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn retained_set_is_anti_monotone(seed in any::<u64>(), a1 in 0.01f64..0.2, a2 in 0.01f64..0.2, d1 in 0.01f64..0.3, d2 in 0.01f64..0.3) {
        let outcomes = synthetic_outcomes(seed, 12, 4, 10);
        let ids = |alpha, delta| -> HashSet<String> {
            two_stage_filter(&outcomes, alpha, delta).unwrap().retained_ids().into_iter().map(String::from).collect()
        };
        let (lo_a, hi_a) = (a1.min(a2), a1.max(a2));
        let (lo_d, hi_d) = (d1.min(d2), d1.max(d2));
        prop_assert!(ids(lo_a, lo_d).is_subset(&ids(hi_a, lo_d)));
        prop_assert!(ids(lo_a, hi_d).is_subset(&ids(lo_a, lo_d)));
    }
}

/// `nulls` scenarios with symmetric noise, then `effects` with a clear drop.
fn synthetic_outcomes(seed: u64, nulls: usize, effects: usize, n: usize) -> Vec<ScenarioOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.02).unwrap();
    (0..nulls + effects)
        .map(|s| {
            let drop = if s < nulls { 0.0 } else { 0.05 };
            let base: Vec<f64> = (0..n).map(|_| 0.8 + noise.sample(&mut rng)).collect();
            let worst: Vec<f64> = base.iter().map(|b| b - drop + noise.sample(&mut rng)).collect();
            ScenarioOutcome {
                scenario_id: format!("s{s:02}"),
                baseline_perf: base,
                max_corruption_perf: worst,
                mean_aepc: rng.random_range(-0.3..0.3),
            }
        })
        .collect()
}

#[test]
fn empirical_fdr_stays_below_alpha() {
    let alpha = 0.05;
    let (nulls, effects) = (15, 5);
    let mut fdp_sum = 0.0;
    let reps = 500;
    for rep in 0..reps {
        let mut outcomes = synthetic_outcomes(rep, nulls, effects, 30);
        for o in &mut outcomes {
            o.mean_aepc = 0.5;
        }
        let report = two_stage_filter(&outcomes, alpha, 0.05).unwrap();
        let rejected: Vec<&str> = report.retained_ids();
        let false_hits = rejected.iter().filter(|id| id[1..].parse::<usize>().unwrap() < nulls).count();
        fdp_sum += false_hits as f64 / rejected.len().max(1) as f64;
    }
    let fdr = fdp_sum / reps as f64;
    assert!(fdr <= alpha + 0.02, "empirical FDR {fdr}");
}

#[test]
fn all_null_outcomes_rarely_retain_anything() {
    let mut any = 0;
    for rep in 0..500 {
        let outcomes = synthetic_outcomes(10_000 + rep, 20, 0, 30);
        if two_stage_filter(&outcomes, 0.05, 0.01).unwrap().significant_count() > 0 {
            any += 1;
        }
    }
    assert!((any as f64) / 500.0 <= 0.07, "{any} of 500 null studies had a discovery");
}
