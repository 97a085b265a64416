//! Monte Carlo error estimation with deterministic parallelism.
//!
//! Sample `i` of a run is a pure function of `(seed, i)`, and the adversary's
//! coin flips for sample `i` live in a separate substream keyed by the same
//! pair, so estimates are bit-identical across thread counts and an attack
//! can be replayed against a different classifier on the same data.

use crate::adversary::{adv_a_attack, worst_case_misclassified_with_budget, AdvAStrategy};
use crate::error::{Error, Result};
use crate::filtrun::{Classifier, FiltrunClassifier};
use crate::gmm::GmmProblem;
use crate::rng::{Stream, PURPOSE_ADVERSARY};
use rayon::prelude::*;
use serde::Serialize;

/// 97.5% standard normal quantile, for 95% Wilson intervals.
const Z95: f64 = 1.959963984540054;

/// A Monte Carlo error rate with its Wilson 95% confidence interval.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub seed: u64,
    pub misclassified_count: usize,
}

impl ErrorEstimate {
    /// Wilson score interval: honest coverage both near 0.5 and in the
    /// 0.1-0.2 range where most of these error rates live.
    pub fn from_counts(misclassified_count: usize, n: usize, seed: u64) -> Self {
        let nf = n as f64;
        let p = misclassified_count as f64 / nf;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        ErrorEstimate {
            p_hat: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
            n,
            seed,
            misclassified_count,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn covers(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

fn check_mc_args(problem: &GmmProblem, dim: usize, n: usize) -> Result<()> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 Monte Carlo samples, got {n}"
        )));
    }
    if dim != problem.dim() {
        return Err(Error::LengthMismatch {
            left: dim,
            right: problem.dim(),
        });
    }
    Ok(())
}

/// Robust error of the classifier at its own truncation budget: the fraction
/// of samples for which some perturbation within the budget flips the label.
pub fn mc_robust_error(
    problem: &GmmProblem,
    clf: &FiltrunClassifier,
    n: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    mc_robust_error_with_budget(problem, clf, clf.truncation(), n, seed)
}

/// Robust error with the adversary budget decoupled from the classifier's
/// truncation level.
pub fn mc_robust_error_with_budget(
    problem: &GmmProblem,
    clf: &FiltrunClassifier,
    budget: usize,
    n: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    check_mc_args(problem, clf.dim(), n)?;
    let misclassified = (0..n as u64)
        .into_par_iter()
        .filter(|&i| {
            let s = problem.sample_at(seed, i);
            worst_case_misclassified_with_budget(clf, &s.x, s.y, budget)
                .expect("dimensions validated")
        })
        .count();
    Ok(ErrorEstimate::from_counts(misclassified, n, seed))
}

/// Error of an arbitrary classifier when every input first passes through
/// the erasure attack.
pub fn mc_error_under_adv<C: Classifier + Sync>(
    problem: &GmmProblem,
    classifier: &C,
    strat: &AdvAStrategy,
    n: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    check_mc_args(problem, problem.dim(), n)?;
    problem.diagonal_variances()?;
    let misclassified = (0..n as u64)
        .into_par_iter()
        .filter(|&i| {
            let s = problem.sample_at(seed, i);
            let mut stream = Stream::substream(seed, PURPOSE_ADVERSARY, i);
            let out = adv_a_attack(problem, strat, &s, &mut stream).expect("dimensions validated");
            classifier.classify(&out.x_prime) != s.y
        })
        .count();
    Ok(ErrorEstimate::from_counts(misclassified, n, seed))
}
