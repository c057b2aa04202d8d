mod common;

use lyapmax::montecarlo::{furstenberg_estimate, BernoulliSpec};
use lyapmax::periodic::beta_upper;
use lyapmax::{Matrix64, MatrixSet64, Potential64, SftSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn probability_vector(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, k).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let rest: f64 = p[1..].iter().sum();
        p[0] = 1.0 - rest;
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn same_seed_same_estimate((sft, ms) in common::full_and_matrices(), seed in any::<u64>()) {
        let pot = common::matrix_potential(&ms);
        let bp = BernoulliSpec::uniform(sft.k()).unwrap();
        let a = furstenberg_estimate(&pot, &sft, &bp, 120, 100, seed).unwrap();
        let b = furstenberg_estimate(&pot, &sft, &bp, 120, 100, seed).unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.half_width.to_bits(), b.half_width.to_bits());
    }

    #[test]
    fn estimate_respects_norm_bound(
        (sft, ms, p) in common::full_and_matrices().prop_flat_map(|(s, m)| {
            let k = s.k();
            (Just(s), Just(m), probability_vector(k))
        }),
        seed in any::<u64>(),
    ) {
        let pot = common::matrix_potential(&ms);
        let bp = BernoulliSpec::new(p).unwrap();
        let est = furstenberg_estimate(&pot, &sft, &bp, 200, 100, seed).unwrap();
        let (upper, _) = beta_upper(8, &sft, &pot).unwrap();
        prop_assert!(est.mean <= upper + 3.0 * est.half_width);
    }
}

/// `E[max(S_a, S_b)]/n` for `S_a − S_b` a two-valued random walk: the
/// exact finite-`n` mean the estimator targets.
fn diagonal_expectation(log_a: [f64; 2], log_b: [f64; 2], p0: f64, n: usize) -> f64 {
    let d = [log_a[0] - log_b[0], log_a[1] - log_b[1]];
    let mean_b = p0 * log_b[0] + (1.0 - p0) * log_b[1];
    let mut log_choose = 0.0;
    let mut positive_part = 0.0;
    for j in 0..=n {
        if j > 0 {
            log_choose += ((n - j + 1) as f64 / j as f64).ln();
        }
        let diff = j as f64 * d[0] + (n - j) as f64 * d[1];
        if diff > 0.0 {
            let log_pmf = log_choose + j as f64 * p0.ln() + (n - j) as f64 * (1.0 - p0).ln();
            positive_part += log_pmf.exp() * diff;
        }
    }
    mean_b + positive_part / n as f64
}

#[test]
fn diagonal_pairs_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sft = SftSpec::full(2).unwrap();
    let n = 1000;
    for case in 0..20 {
        let mut entry = || {
            let magnitude = (rng.gen_range(-1.5f64..1.5)).exp();
            if rng.gen_bool(0.5) { magnitude } else { -magnitude }
        };
        let (a0, b0, a1, b1) = (entry(), entry(), entry(), entry());
        let p0 = rng.gen_range(0.2..0.8);
        let ms = MatrixSet64::new(vec![Matrix64::diagonal(&[a0, b0]), Matrix64::diagonal(&[a1, b1])]).unwrap();
        let log_a = [a0.abs().ln(), a1.abs().ln()];
        let log_b = [b0.abs().ln(), b1.abs().ln()];
        let limit = (p0 * log_a[0] + (1.0 - p0) * log_a[1]).max(p0 * log_b[0] + (1.0 - p0) * log_b[1]);
        let finite = diagonal_expectation(log_a, log_b, p0, n);
        assert!(finite >= limit - 1e-12);

        let bp = BernoulliSpec::new(vec![p0, 1.0 - p0]).unwrap();
        let est = furstenberg_estimate(&Potential64::MatrixNorm(ms), &sft, &bp, n, 1000, case).unwrap();
        assert!(
            (est.mean - finite).abs() <= 3.0 * est.half_width,
            "case {case}: {} vs {finite} ± {}",
            est.mean,
            est.half_width
        );
        // the limit is reached once the two diagonal rates separate
        if finite - limit < 0.1 * est.half_width {
            assert!((est.mean - limit).abs() <= 3.0 * est.half_width, "case {case}");
        }
    }
}

#[test]
fn separated_diagonal_pair_hits_the_limit() {
    let ms = MatrixSet64::new(vec![Matrix64::diagonal(&[2.0, 1.0]), Matrix64::diagonal(&[1.0, 3.0])]).unwrap();
    let finite = diagonal_expectation([2f64.ln(), 0.0], [0.0, 3f64.ln()], 0.5, 1000);
    assert!((finite - 0.5 * 3f64.ln()).abs() < 1e-12);
    let est = furstenberg_estimate(&Potential64::MatrixNorm(ms), &SftSpec::full(2).unwrap(), &BernoulliSpec::uniform(2).unwrap(), 1000, 1000, 7)
        .unwrap();
    assert!((est.mean - 0.5 * 3f64.ln()).abs() <= 3.0 * est.half_width);
}
