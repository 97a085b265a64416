//! The binary Gaussian mixture problem: a label `y` drawn uniformly from
//! `{-1, +1}` and an input `x ~ N(y * mu, Sigma)`.
//!
//! The derived quantity that controls everything downstream is the whitened
//! mean `nu = Sigma^{-1/2} mu`: its Euclidean norm fixes the no-adversary
//! Bayes error `phi_bar(|nu|_2)`, so problems are conventionally normalized
//! to `|nu|_2 = 1`.
//!
//! Diagonal covariances get O(d) fast paths throughout; the dense
//! representation exists for the general bounds and only ever runs at small
//! dimension.

use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, op_norm_inf, sym_eigen, Mat, SymEigen, EIGENVALUE_FLOOR};
use crate::rng::{Stream, PURPOSE_DATA};
use crate::trunc_stats::RealVec;
use serde::{Deserialize, Serialize};

/// A strictly increasing set of coordinate indices in `[0, d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordSet {
    indices: Vec<usize>,
    dim: usize,
}

impl CoordSet {
    /// A possibly-empty strictly increasing index set. Operations that need a
    /// nonempty set (restriction, classifier construction) reject empty sets
    /// themselves.
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        for (pos, &i) in indices.iter().enumerate() {
            if i >= dim {
                return Err(Error::CoordOutOfRange { index: i, dim });
            }
            if pos > 0 && indices[pos - 1] >= i {
                return Err(Error::CoordsNotIncreasing { position: pos });
            }
        }
        Ok(CoordSet { indices, dim })
    }

    /// The full set `{0, ..., d-1}`.
    pub fn full(dim: usize) -> Self {
        CoordSet {
            indices: (0..dim).collect(),
            dim,
        }
    }

    /// The empty set over dimension `dim`.
    pub fn empty(dim: usize) -> Self {
        CoordSet {
            indices: Vec::new(),
            dim,
        }
    }

    /// The contiguous suffix `{start, ..., d-1}`.
    pub fn suffix(start: usize, dim: usize) -> Result<Self> {
        if start >= dim {
            return Err(Error::CoordOutOfRange { index: start, dim });
        }
        Ok(CoordSet {
            indices: (start..dim).collect(),
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.dim
    }

    /// Indices not in the set, in increasing order. May be empty.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim - self.len());
        let mut it = self.indices.iter().peekable();
        for i in 0..self.dim {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    /// Subvector of `v` on this set.
    pub fn gather(&self, v: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| v[i]).collect()
    }
}

/// One labeled draw from the mixture.
#[derive(Clone, Debug)]
pub struct LabeledSample {
    pub x: RealVec,
    pub y: i8,
}

/// Covariance in either diagonal (variances only) or dense symmetric form.
#[derive(Clone, Debug)]
pub enum Covariance {
    Diagonal(Vec<f64>),
    Dense(Mat),
}

#[derive(Clone, Debug)]
enum CovCache {
    Diagonal {
        /// per-coordinate variances
        variances: Vec<f64>,
        /// per-coordinate standard deviations
        sds: Vec<f64>,
    },
    Dense {
        matrix: Mat,
        eigen: SymEigen,
        /// cached `Sigma^{1/2}` for sampling
        sqrt: Mat,
    },
}

/// An immutable Gaussian mixture problem `(mu, Sigma)` with its whitened
/// mean cached.
#[derive(Clone, Debug)]
pub struct GmmProblem {
    mu: RealVec,
    cov: CovCache,
    nu: RealVec,
    normalized: bool,
}

impl GmmProblem {
    /// Validate `(mu, sigma)` and build the problem. With `normalize`, `mu`
    /// is rescaled by `1 / |Sigma^{-1/2} mu|_2` so the whitened mean has
    /// unit norm.
    pub fn new(mu: Vec<f64>, sigma: Covariance, normalize: bool) -> Result<Self> {
        let mu = RealVec::new(mu)?;
        let d = mu.len();
        let cov = match sigma {
            Covariance::Diagonal(variances) => {
                if variances.len() != d {
                    return Err(Error::CovarianceDimension {
                        dim: variances.len(),
                        mean_dim: d,
                    });
                }
                for (i, &v) in variances.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::NonFinite { index: i, value: v });
                    }
                    if v <= EIGENVALUE_FLOOR {
                        return Err(Error::NotPositiveDefinite {
                            value: v,
                            floor: EIGENVALUE_FLOOR,
                        });
                    }
                }
                let sds = variances.iter().map(|v| v.sqrt()).collect();
                CovCache::Diagonal { variances, sds }
            }
            Covariance::Dense(matrix) => {
                if matrix.rows() != d || matrix.cols() != d {
                    return Err(Error::CovarianceDimension {
                        dim: matrix.rows(),
                        mean_dim: d,
                    });
                }
                check_symmetric(&matrix, 1e-10)?;
                let eigen = sym_eigen(&matrix);
                eigen.require_positive_definite()?;
                let sqrt = eigen.apply_fn(f64::sqrt);
                CovCache::Dense {
                    matrix,
                    eigen,
                    sqrt,
                }
            }
        };

        let nu_raw = whiten(&cov, mu.as_slice());
        let nu_norm = nu_raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (mu, nu) = if normalize {
            if nu_norm == 0.0 {
                return Err(Error::ZeroMean);
            }
            let mu_scaled: Vec<f64> = mu.as_slice().iter().map(|v| v / nu_norm).collect();
            let nu_scaled: Vec<f64> = nu_raw.iter().map(|v| v / nu_norm).collect();
            (RealVec::new(mu_scaled)?, RealVec::new(nu_scaled)?)
        } else {
            (mu, RealVec::new(nu_raw)?)
        };

        Ok(GmmProblem {
            mu,
            cov,
            nu,
            normalized: normalize,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &RealVec {
        &self.mu
    }

    /// The whitened mean `nu = Sigma^{-1/2} mu`.
    pub fn nu(&self) -> &RealVec {
        &self.nu
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.cov, CovCache::Diagonal { .. })
    }

    /// Variance of coordinate `i` (the diagonal entry of `Sigma`).
    pub fn variance(&self, i: usize) -> f64 {
        match &self.cov {
            CovCache::Diagonal { variances, .. } => variances[i],
            CovCache::Dense { matrix, .. } => matrix[(i, i)],
        }
    }

    /// Cached eigendecomposition of a dense covariance.
    pub(crate) fn dense_eigen(&self) -> Option<&SymEigen> {
        match &self.cov {
            CovCache::Dense { eigen, .. } => Some(eigen),
            CovCache::Diagonal { .. } => None,
        }
    }

    /// Diagonal variances, if this problem is diagonal.
    pub fn diagonal_variances(&self) -> Result<&[f64]> {
        match &self.cov {
            CovCache::Diagonal { variances, .. } => Ok(variances),
            CovCache::Dense { .. } => Err(Error::DiagonalRequired),
        }
    }

    /// The dense covariance matrix. Materializes the identity-scaled matrix
    /// for diagonal problems; intended for small dimensions.
    pub fn covariance_matrix(&self) -> Mat {
        match &self.cov {
            CovCache::Diagonal { variances, .. } => {
                let mut m = Mat::zeros(variances.len(), variances.len());
                for (i, &v) in variances.iter().enumerate() {
                    m[(i, i)] = v;
                }
                m
            }
            CovCache::Dense { matrix, .. } => matrix.clone(),
        }
    }

    /// Draw sample `index` of the stream identified by `seed`. The draw is a
    /// pure function of `(seed, index)`, independent of any other sample.
    pub fn sample_at(&self, seed: u64, index: u64) -> LabeledSample {
        let mut stream = Stream::substream(seed, PURPOSE_DATA, index);
        let y = stream.sign();
        let d = self.dim();
        let x = match &self.cov {
            CovCache::Diagonal { sds, .. } => self
                .mu
                .as_slice()
                .iter()
                .zip(sds)
                .map(|(m, sd)| y as f64 * m + sd * stream.standard_normal())
                .collect(),
            CovCache::Dense { sqrt, .. } => {
                let g: Vec<f64> = (0..d).map(|_| stream.standard_normal()).collect();
                let noise = sqrt.mul_vec(&g);
                (0..d).map(|i| y as f64 * self.mu[i] + noise[i]).collect()
            }
        };
        LabeledSample {
            x: RealVec::new(x).expect("gaussian draws are finite"),
            y,
        }
    }

    /// Draw `n` i.i.d. samples; sample `i` depends only on `(seed, i)`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<LabeledSample> {
        (0..n as u64).map(|i| self.sample_at(seed, i)).collect()
    }

    /// The subproblem `(mu_F, Sigma_F)` on a nonempty coordinate set. The
    /// result is never marked normalized: `|nu(F)|_2 <= |nu|_2` in general.
    pub fn restrict(&self, f: &CoordSet) -> Result<GmmProblem> {
        if f.is_empty() {
            return Err(Error::EmptyCoordSet);
        }
        if f.dim() != self.dim() {
            return Err(Error::CoordOutOfRange {
                index: f.dim(),
                dim: self.dim(),
            });
        }
        if f.is_full() {
            let mut p = self.clone();
            p.normalized = false;
            return Ok(p);
        }
        let mu_f = f.gather(self.mu.as_slice());
        match &self.cov {
            CovCache::Diagonal { variances, .. } => {
                GmmProblem::new(mu_f, Covariance::Diagonal(f.gather(variances)), false)
            }
            CovCache::Dense { matrix, .. } => {
                let idx = f.indices();
                let m = idx.len();
                let mut sub = Mat::zeros(m, m);
                for (a, &i) in idx.iter().enumerate() {
                    for (b, &j) in idx.iter().enumerate() {
                        sub[(a, b)] = matrix[(i, j)];
                    }
                }
                GmmProblem::new(mu_f, Covariance::Dense(sub), false)
            }
        }
    }

    /// Correlation matrix `R = D^{-1/2} Sigma D^{-1/2}` where `D` is the
    /// diagonal part of `Sigma`. Exactly the identity for diagonal problems.
    pub fn correlation_matrix(&self) -> Mat {
        match &self.cov {
            CovCache::Diagonal { variances, .. } => Mat::identity(variances.len()),
            CovCache::Dense { matrix, .. } => {
                let d = self.dim();
                let inv_sd: Vec<f64> = (0..d).map(|i| 1.0 / matrix[(i, i)].sqrt()).collect();
                let mut r = Mat::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        r[(i, j)] = matrix[(i, j)] * inv_sd[i] * inv_sd[j];
                    }
                }
                // pin the diagonal to exactly one
                for i in 0..d {
                    r[(i, i)] = 1.0;
                }
                r
            }
        }
    }

    /// Per-coordinate signal-to-noise `u_i = mu_i / sqrt(Sigma_ii)`. Equals
    /// `nu` when `Sigma` is diagonal.
    pub fn u_vector(&self) -> RealVec {
        let d = self.dim();
        let u: Vec<f64> = (0..d)
            .map(|i| self.mu[i] / self.variance(i).sqrt())
            .collect();
        RealVec::new(u).expect("finite by construction")
    }

    /// Minimum eigenvalue of the correlation matrix; exactly 1 for diagonal
    /// problems.
    pub fn zeta_min(&self) -> f64 {
        match &self.cov {
            CovCache::Diagonal { .. } => 1.0,
            CovCache::Dense { .. } => sym_eigen(&self.correlation_matrix()).min_eigenvalue(),
        }
    }

    /// `|nu restricted to indices|_2`, with the empty set giving 0.
    pub fn nu_norm_on(&self, indices: &[usize]) -> f64 {
        // the empty sum is IEEE -0.0; normalize before the square root
        (indices
            .iter()
            .map(|&i| self.nu[i] * self.nu[i])
            .sum::<f64>()
            + 0.0)
            .sqrt()
    }

    /// Operator sup-norm of `D_F^{1/2} Sigma_F^{-1/2}` where `D_F` is the
    /// diagonal part of `Sigma_F`. Exactly 1 for diagonal problems.
    pub fn whitening_distortion(&self, f: &CoordSet) -> Result<f64> {
        match &self.cov {
            CovCache::Diagonal { .. } => Ok(1.0),
            CovCache::Dense { .. } => {
                let sub = self.restrict(f)?;
                match &sub.cov {
                    CovCache::Dense { matrix, eigen, .. } => {
                        let mut m = eigen.inv_sqrt_mat();
                        let scale: Vec<f64> =
                            (0..sub.dim()).map(|i| matrix[(i, i)].sqrt()).collect();
                        m.scale_rows(&scale);
                        Ok(op_norm_inf(&m))
                    }
                    CovCache::Diagonal { .. } => Ok(1.0),
                }
            }
        }
    }

    /// Check that `nu` is sorted by decreasing magnitude, as the filtration
    /// heuristics and the asymptotic machinery require.
    pub fn require_nu_sorted(&self) -> Result<()> {
        let nu = self.nu.as_slice();
        for i in 1..nu.len() {
            if nu[i - 1].abs() < nu[i].abs() - 1e-12 {
                return Err(Error::NotSortedByMagnitude { index: i });
            }
        }
        Ok(())
    }
}

fn whiten(cov: &CovCache, mu: &[f64]) -> Vec<f64> {
    match cov {
        CovCache::Diagonal { sds, .. } => mu.iter().zip(sds).map(|(m, s)| m / s).collect(),
        CovCache::Dense { eigen, .. } => eigen.inv_sqrt_vec(mu),
    }
}

// ---- problem file format ---------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum SigmaFile {
    Diag(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

/// On-disk problem description:
/// `{"mu": [..], "sigma": {"diag": [..]} | {"dense": [[..], ..]}, "normalize": bool}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    mu: Vec<f64>,
    sigma: SigmaFile,
    normalize: bool,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ProblemFile {
            context: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn into_problem(self) -> Result<GmmProblem> {
        let sigma = match self.sigma {
            SigmaFile::Diag(v) => Covariance::Diagonal(v),
            SigmaFile::Dense(rows) => Covariance::Dense(Mat::from_rows(&rows)?),
        };
        GmmProblem::new(self.mu, sigma, self.normalize)
    }

    pub fn from_problem(p: &GmmProblem) -> Self {
        let sigma = match &p.cov {
            CovCache::Diagonal { variances, .. } => SigmaFile::Diag(variances.clone()),
            CovCache::Dense { matrix, .. } => {
                SigmaFile::Dense((0..matrix.rows()).map(|i| matrix.row(i).to_vec()).collect())
            }
        };
        ProblemFile {
            mu: p.mu.as_slice().to_vec(),
            sigma,
            normalize: p.normalized,
        }
    }
}

/// Load a problem from a JSON file.
pub fn load_problem(path: &std::path::Path) -> Result<GmmProblem> {
    let text = std::fs::read_to_string(path)?;
    ProblemFile::from_json(&text)?.into_problem()
}
