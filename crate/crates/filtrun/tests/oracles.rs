//! Cross-checks that pit fast implementations against independent
//! brute-force oracles at small dimension.

use filtrun::adversary::worst_case_misclassified;
use filtrun::asymptotics::family_log_block;
use filtrun::filtrun::{build_classifier, select_f_min_bound, upper_bound_diagonal};
use filtrun::gmm::{CoordSet, Covariance, GmmProblem};
use filtrun::harness::mc_robust_error;
use filtrun::harness::validate::{brute_force_misclassified, ATTACK_GRID};
use filtrun::rng::{Stream, PURPOSE_AUX};

/// The worst-case estimate on the d = 7 log-block problem agrees with a
/// brute-force re-estimate sample for sample, so the two error counts are
/// identical, not merely close.
#[test]
fn log_block_d7_mc_matches_brute_force_exactly() {
    let problem = family_log_block(3).unwrap(); // d = 7
    let d = problem.dim();
    let k = 1;
    let clf = build_classifier(&problem, &CoordSet::full(d), k).unwrap();
    let n = 10_000u64;
    let seed = 404;
    let mut fast_count = 0usize;
    let mut brute_count = 0usize;
    for i in 0..n {
        let s = problem.sample_at(seed, i);
        let fast = worst_case_misclassified(&clf, &s.x, s.y).unwrap();
        let brute = brute_force_misclassified(&clf, &s.x, s.y, k, &ATTACK_GRID);
        assert_eq!(fast, brute, "sample {i}");
        fast_count += fast as usize;
        brute_count += brute as usize;
    }
    assert_eq!(fast_count, brute_count);
    let est = mc_robust_error(&problem, &clf, n as usize, seed).unwrap();
    assert_eq!(est.misclassified_count, fast_count);
}

/// The suffix-restricted filtration search matches exhaustive minimization
/// over all 2^d - 1 nonempty subsets on diagonal problems: once the largest
/// surviving magnitude is fixed, including everything smaller can only help
/// the bound, so some suffix always attains the subset minimum.
#[test]
fn suffix_search_matches_exhaustive_subsets() {
    let mut stream = Stream::substream(71, PURPOSE_AUX, 0);
    for trial in 0..30 {
        let d = 5 + (trial % 8); // up to 12
        let mu: Vec<f64> = (0..d).map(|_| stream.uniform_in(0.05, 1.0)).collect();
        let var: Vec<f64> = (0..d).map(|_| stream.uniform_in(0.5, 2.0)).collect();
        let problem = GmmProblem::new(mu, Covariance::Diagonal(var), true).unwrap();
        for k in [0usize, 1] {
            if 2 * k >= d {
                continue;
            }
            let selected = select_f_min_bound(&problem, k).unwrap();
            let suffix_value = upper_bound_diagonal(&problem, &selected.f, k).unwrap().value;

            let mut exhaustive = f64::INFINITY;
            for mask in 1u32..(1 << d) {
                let idx: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
                if 2 * k >= idx.len() {
                    continue;
                }
                let f = CoordSet::new(idx, d).unwrap();
                let value = upper_bound_diagonal(&problem, &f, k).unwrap().value;
                exhaustive = exhaustive.min(value);
            }
            assert!(
                suffix_value <= exhaustive + 1e-12,
                "trial {trial} d={d} k={k}: suffix {suffix_value} vs exhaustive {exhaustive}"
            );
        }
    }
}
