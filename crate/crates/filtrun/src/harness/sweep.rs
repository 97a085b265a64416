//! Budget sweeps: one row per adversary budget, carrying the Monte Carlo
//! estimate and the closed-form bounds that bracket it.

use crate::adversary::lower_bound_diagonal;
use crate::error::{Error, Result};
use crate::filtrun::{
    build_classifier, select_f_diagonal, select_f_min_bound, upper_bound_general, BoundKind,
    BoundReport, FSelection,
};
use crate::gmm::{CoordSet, GmmProblem};
use crate::harness::mc::{mc_robust_error_with_budget, ErrorEstimate};
use serde::Serialize;

/// Filtration-set policy for sweeps and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FSelector {
    /// Prefix-mass rule for diagonal problems.
    AutoDiag,
    /// Minimize the general upper bound over magnitude-sorted suffixes.
    AutoMin,
    /// Fixed suffix of the coordinate order, 1-based start index.
    Suffix(usize),
    /// Keep every coordinate.
    Full,
}

impl FSelector {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "auto-diag" => Ok(FSelector::AutoDiag),
            "auto-min" => Ok(FSelector::AutoMin),
            "full" => Ok(FSelector::Full),
            other => {
                if let Some(rest) = other.strip_prefix("suffix:") {
                    let start: usize = rest.parse().map_err(|_| {
                        Error::InvalidArgument(format!("bad suffix start '{rest}'"))
                    })?;
                    if start == 0 {
                        return Err(Error::InvalidArgument(
                            "suffix start is 1-based; use suffix:1 for the full set".into(),
                        ));
                    }
                    Ok(FSelector::Suffix(start))
                } else {
                    Err(Error::InvalidArgument(format!(
                        "unknown selector '{other}' (expected suffix:R | auto-diag | auto-min | full)"
                    )))
                }
            }
        }
    }

    /// Resolve to a concrete surviving set for budget `k`.
    pub fn select(&self, problem: &GmmProblem, k: usize) -> Result<FSelection> {
        match self {
            FSelector::AutoDiag => select_f_diagonal(problem, k),
            FSelector::AutoMin => select_f_min_bound(problem, k),
            FSelector::Suffix(start) => Ok(FSelection {
                f: CoordSet::suffix(start - 1, problem.dim())?,
                saturated: false,
            }),
            FSelector::Full => Ok(FSelection {
                f: CoordSet::full(problem.dim()),
                saturated: false,
            }),
        }
    }
}

/// One sweep row: budget, selected set size, estimate, and bracketing bounds.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub k: usize,
    pub f_size: usize,
    pub estimate: ErrorEstimate,
    pub upper: BoundReport,
    pub lower: BoundReport,
}

/// Sweep the adversary budget over `k_grid`. Each row rebuilds the
/// classifier under the selection policy, truncating at the budget when the
/// surviving set allows it (and at the largest feasible level otherwise, in
/// which case the upper bound is reported as vacuous).
///
/// The lower bound on each row is the strongest erasure-strategy bound whose
/// own budget fits under the row's: attacking the longest whitened-mean
/// prefix with `l1 mass * ln d <= k`. Optimal robust error is nondecreasing
/// in the budget, so the sub-budget bound applies.
pub fn sweep(
    problem: &GmmProblem,
    k_grid: &[usize],
    n: usize,
    seed: u64,
    selector: FSelector,
) -> Result<Vec<SweepRow>> {
    if k_grid.is_empty() {
        return Err(Error::InvalidArgument("empty k grid".into()));
    }
    problem.diagonal_variances()?;
    problem.require_nu_sorted()?;
    let d = problem.dim();
    let ln_d = (d as f64).ln();
    let mut rows = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let selection = selector.select(problem, k)?;
        let f = selection.f;
        let k_trunc = k.min((f.len() - 1) / 2);
        let clf = build_classifier(problem, &f, k_trunc)?;
        let estimate = mc_robust_error_with_budget(problem, &clf, k, n, seed)?;
        let upper = if k_trunc == k {
            upper_bound_general(problem, &f, k)?
        } else {
            BoundReport::vacuous_upper(BoundKind::UpperGeneral, k as f64)
        };
        let lower = lower_bound_diagonal(problem, &longest_affordable_prefix(problem, k, ln_d))?;
        rows.push(SweepRow {
            d,
            k,
            f_size: f.len(),
            estimate,
            upper,
            lower,
        });
    }
    Ok(rows)
}

/// The longest prefix `A = {0..m}` of the magnitude-sorted whitened mean
/// whose erasure budget `|nu_A|_1 ln d` stays within `k`.
fn longest_affordable_prefix(problem: &GmmProblem, k: usize, ln_d: f64) -> CoordSet {
    let nu = problem.nu();
    let mut acc = 0.0;
    let mut m = 0;
    while m < problem.dim() {
        let next = acc + nu[m].abs();
        if next * ln_d > k as f64 + 1e-12 {
            break;
        }
        acc = next;
        m += 1;
    }
    CoordSet::new((0..m).collect(), problem.dim()).expect("prefix is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::family_uniform;
    use crate::special::phi_bar;

    #[test]
    fn selector_parsing() {
        assert_eq!(FSelector::parse("auto-diag").unwrap(), FSelector::AutoDiag);
        assert_eq!(FSelector::parse("auto-min").unwrap(), FSelector::AutoMin);
        assert_eq!(FSelector::parse("suffix:3").unwrap(), FSelector::Suffix(3));
        assert_eq!(FSelector::parse("full").unwrap(), FSelector::Full);
        assert!(FSelector::parse("suffix:0").is_err());
        assert!(FSelector::parse("wat").is_err());
    }

    #[test]
    fn sweep_rows_are_ordered_and_consistent() {
        let p = family_uniform(256).unwrap();
        let rows = sweep(&p, &[0, 1, 2], 2_000, 17, FSelector::AutoDiag).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].k, 0);
        assert!(rows[0].f_size == 256);
        // k = 0 anchor
        assert!((rows[0].estimate.p_hat - phi_bar(1.0)).abs() < 0.03);
        // bounds are probabilities
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.upper.value));
            assert!((0.0..=1.0).contains(&r.lower.value));
        }
    }

    #[test]
    fn sweep_sandwich_on_nonvacuous_rows() {
        let p = family_uniform(512).unwrap();
        let rows = sweep(&p, &[0, 1, 4], 4_000, 23, FSelector::AutoDiag).unwrap();
        for r in &rows {
            if r.upper.value < 1.0 && r.lower.value > 0.0 {
                let slack = 3.0 * r.estimate.ci_width();
                assert!(
                    r.estimate.p_hat >= r.lower.value - slack
                        && r.estimate.p_hat <= r.upper.value + slack,
                    "row k={}: {} not in [{}, {}]",
                    r.k,
                    r.estimate.p_hat,
                    r.lower.value,
                    r.upper.value
                );
            }
        }
    }

    #[test]
    fn sweep_deterministic_across_repeats() {
        let p = family_uniform(64).unwrap();
        let a = sweep(&p, &[0, 2], 1_000, 5, FSelector::AutoDiag).unwrap();
        let b = sweep(&p, &[0, 2], 1_000, 5, FSelector::AutoDiag).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(
                x.estimate.misclassified_count,
                y.estimate.misclassified_count
            );
            assert_eq!(x.f_size, y.f_size);
        }
    }
}
