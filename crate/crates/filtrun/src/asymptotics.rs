//! Budget exponents and the Psi machinery.
//!
//! For a diagonal problem with whitened mean sorted by decreasing magnitude,
//! `lambda_c` is the shortest prefix whose l2 norm reaches `c`, and
//! `Psi_d(c) = log_d |nu_{1..lambda_c}|_1` is the exponent (base `d`) of the
//! adversary budget at which error level `phi_bar(sqrt(1 - c^2))` becomes
//! operative. Plotted against `c`, the curve decides whether a problem family
//! has a sharp phase transition (flat `Psi`) or a genuine
//! robustness/accuracy trade-off (strictly increasing `Psi`).
//!
//! Nothing here computes a true `d -> infinity` limit: the library evaluates
//! `Psi_d` at finite `d` and offers convergence diagnostics against a
//! caller-supplied limit curve.

use crate::error::{Error, Result};
use crate::filtrun::{BoundKind, BoundReport};
use crate::gmm::{Covariance, GmmProblem};
use crate::special::phi_bar;
use crate::trunc_stats::RealVec;
use serde::Serialize;

const LAMBDA_TOL: f64 = 1e-12;

/// Smallest prefix length of the magnitude-sorted `nu` whose l2 norm reaches
/// `c` (with an absolute comparison tolerance of `1e-12`); `c = 0` gives 0.
pub fn lambda_c(nu: &RealVec, c: f64) -> Result<usize> {
    if !(0.0..=1.0 + LAMBDA_TOL).contains(&c) {
        return Err(Error::OutOfRange {
            what: "c",
            value: c,
            range: "[0, 1]",
        });
    }
    for i in 1..nu.len() {
        if nu[i - 1].abs() < nu[i].abs() - LAMBDA_TOL {
            return Err(Error::NotSortedByMagnitude { index: i });
        }
    }
    let total = nu.l2_norm();
    if c > total + 1e-9 {
        return Err(Error::OutOfRange {
            what: "c",
            value: c,
            range: "[0, |nu|_2]",
        });
    }
    if c == 0.0 {
        return Ok(0);
    }
    let mut acc = 0.0;
    for (i, v) in nu.as_slice().iter().enumerate() {
        acc += v * v;
        if acc.sqrt() + LAMBDA_TOL >= c {
            return Ok(i + 1);
        }
    }
    Ok(nu.len())
}

/// `Psi_d(c) = ln(|nu_{1..lambda_c}|_1) / ln(d)` for `c` in `(0, 1]`.
pub fn psi_d(nu: &RealVec, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::OutOfRange {
            what: "c",
            value: c,
            range: "(0, 1]",
        });
    }
    let lambda = lambda_c(nu, c)?;
    let prefix_l1: f64 = nu.as_slice()[..lambda].iter().map(|v| v.abs()).sum();
    Ok(prefix_l1.ln() / (nu.len() as f64).ln())
}

/// One sampled point of a Psi curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PsiPoint {
    pub c: f64,
    pub lambda: usize,
    pub psi: f64,
}

/// A sampled `(c, Psi_d(c))` curve for one problem family at dimension `d`.
#[derive(Clone, Debug, Serialize)]
pub struct PsiCurve {
    pub family: String,
    pub d: usize,
    pub points: Vec<PsiPoint>,
}

impl PsiCurve {
    /// Sample `Psi_d` on a grid of `c` values.
    pub fn sample(family: &str, problem: &GmmProblem, grid: &[f64]) -> Result<PsiCurve> {
        problem.require_nu_sorted()?;
        let mut points = Vec::with_capacity(grid.len());
        for &c in grid {
            let lambda = lambda_c(problem.nu(), c)?;
            let psi = psi_d(problem.nu(), c)?;
            points.push(PsiPoint { c, lambda, psi });
        }
        Ok(PsiCurve {
            family: family.to_string(),
            d: problem.dim(),
            points,
        })
    }

    /// Check the structural facts every Psi curve must satisfy: values in
    /// `[-1/2, 1/2]` and nondecreasing in `c`.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if p.psi < -0.5 - 1e-12 || p.psi > 0.5 + 1e-12 {
                return Err(Error::OutOfRange {
                    what: "psi",
                    value: p.psi,
                    range: "[-1/2, 1/2]",
                });
            }
            if i > 0 && self.points[i - 1].psi > p.psi + 1e-12 {
                return Err(Error::NonMonotonePsi { index: i });
            }
        }
        Ok(())
    }
}

/// Numeric pseudo-inverse of a limit curve: the infimum of
/// `phi_bar(sqrt(1 - c^2))` over grid points with `psi(c) >= alpha`, capped
/// at `1/2`; `1/2` when no point qualifies (in particular for `alpha > 1/2`).
/// Crossings between samples are resolved by linear interpolation.
pub fn psi_inf_inverse(samples: &[(f64, f64)], alpha: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyVector);
    }
    for (i, w) in samples.windows(2).enumerate() {
        if w[0].1 > w[1].1 + 1e-12 {
            return Err(Error::NonMonotonePsi { index: i + 1 });
        }
    }
    let hit = samples.iter().position(|&(_, psi)| psi >= alpha);
    let c_star = match hit {
        None => return Ok(0.5),
        Some(0) => samples[0].0,
        Some(j) => {
            let (c0, p0) = samples[j - 1];
            let (c1, p1) = samples[j];
            if p1 > p0 {
                c0 + (c1 - c0) * (alpha - p0) / (p1 - p0)
            } else {
                c1
            }
        }
    };
    let c_star = c_star.clamp(0.0, 1.0);
    Ok(phi_bar((1.0 - c_star * c_star).sqrt()).min(0.5))
}

/// The matched pair of bounds at level `c`: an upper bound at the small
/// budget `|nu_{1..lambda_c}|_1 / ln d` and a lower bound at the large budget
/// `|nu_{1..lambda_c}|_1 * ln d`. The first applies for `c` in `[0, 1)`, the
/// second for `c` in `(0, 1]`; an out-of-range part is `None`.
#[derive(Clone, Debug, Serialize)]
pub struct MatchedBounds {
    pub upper: Option<BoundReport>,
    pub lower: Option<BoundReport>,
}

pub fn matched_bounds(problem: &GmmProblem, c: f64) -> Result<MatchedBounds> {
    problem.diagonal_variances()?;
    problem.require_nu_sorted()?;
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange {
            what: "c",
            value: c,
            range: "[0, 1]",
        });
    }
    let d = problem.dim() as f64;
    let ln_d = d.ln();
    let lambda = lambda_c(problem.nu(), c)?;
    let prefix_l1: f64 = problem.nu().as_slice()[..lambda]
        .iter()
        .map(|v| v.abs())
        .sum();
    let upper = if c < 1.0 {
        let root = (1.0 - c * c).sqrt();
        let arg = root - 16.0 * std::f64::consts::SQRT_2 / (root * ln_d.sqrt());
        Some(BoundReport::from_formula(
            BoundKind::UpperDiagonal,
            prefix_l1 / ln_d,
            arg,
            1.0 / (2.0 * ln_d).sqrt(),
        ))
    } else {
        None
    };
    let lower = if c > 0.0 {
        Some(BoundReport::from_formula(
            BoundKind::LowerDiagonal,
            prefix_l1 * ln_d,
            (1.0 - c * c).sqrt(),
            -1.0 / ln_d,
        ))
    } else {
        None
    };
    Ok(MatchedBounds { upper, lower })
}

// ---- problem families --------------------------------------------------------

/// Flat profile: `Sigma = I_d`, `mu = 1/sqrt(d) * ones`. Every coordinate is
/// equally informative; the budget exponent curve is flat at `1/2` and the
/// family shows a sharp phase transition at budget `sqrt(d)`.
pub fn family_uniform(d: usize) -> Result<GmmProblem> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "uniform family needs d >= 2, got {d}"
        )));
    }
    let v = 1.0 / (d as f64).sqrt();
    GmmProblem::new(vec![v; d], Covariance::Diagonal(vec![1.0; d]), true)
}

/// One strong coordinate over a flat floor: `mu_1 = d^{-1/3}`, remaining
/// coordinates equal and chosen for exact unit norm. The spike is the most
/// informative coordinate and also the most attackable one.
pub fn family_spiked(d: usize) -> Result<GmmProblem> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "spiked family needs d >= 2, got {d}"
        )));
    }
    let spike = (d as f64).powf(-1.0 / 3.0);
    let rest = ((1.0 - spike * spike) / (d as f64 - 1.0)).sqrt();
    let mut mu = vec![rest; d];
    mu[0] = spike;
    GmmProblem::new(mu, Covariance::Diagonal(vec![1.0; d]), true)
}

/// Exponentially growing blocks: `d = 2^n - 1`, block `i` of `n` holds
/// `2^{i-1}` coordinates carrying an equal `1/n` share of the squared norm.
/// The budget exponent curve increases strictly, so robustness trades off
/// against accuracy with no sharp transition.
pub fn family_log_block(n: usize) -> Result<GmmProblem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "log-block family needs n >= 2 blocks, got {n}"
        )));
    }
    if n > 24 {
        return Err(Error::InvalidArgument(format!(
            "log-block family with n = {n} blocks would need d = 2^{n} - 1 coordinates"
        )));
    }
    let d = (1usize << n) - 1;
    let mut mu = Vec::with_capacity(d);
    for block in 0..n {
        let width = 1usize << block;
        let value = (1.0 / (n as f64 * width as f64)).sqrt();
        mu.extend(std::iter::repeat_n(value, width));
    }
    GmmProblem::new(mu, Covariance::Diagonal(vec![1.0; d]), true)
}

/// Named family selector used by the harness and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemFamily {
    Uniform,
    Spiked,
    LogBlock,
}

impl ProblemFamily {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "uniform" => Ok(ProblemFamily::Uniform),
            "spiked" => Ok(ProblemFamily::Spiked),
            "log-block" => Ok(ProblemFamily::LogBlock),
            other => Err(Error::InvalidArgument(format!(
                "unknown family '{other}' (expected uniform | spiked | log-block)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemFamily::Uniform => "uniform",
            ProblemFamily::Spiked => "spiked",
            ProblemFamily::LogBlock => "log-block",
        }
    }

    /// Instantiate at a size parameter: the dimension for `uniform` and
    /// `spiked`, the block count for `log-block`.
    pub fn problem(&self, param: usize) -> Result<GmmProblem> {
        match self {
            ProblemFamily::Uniform => family_uniform(param),
            ProblemFamily::Spiked => family_spiked(param),
            ProblemFamily::LogBlock => family_log_block(param),
        }
    }

    /// The limit curve `Psi_infinity` where the family has a known one,
    /// sampled on the given grid.
    pub fn limit_curve(&self, grid: &[f64]) -> Option<Vec<(f64, f64)>> {
        match self {
            ProblemFamily::Uniform => Some(grid.iter().map(|&c| (c, 0.5)).collect()),
            ProblemFamily::LogBlock => Some(grid.iter().map(|&c| (c, c * c / 2.0)).collect()),
            ProblemFamily::Spiked => None,
        }
    }
}
