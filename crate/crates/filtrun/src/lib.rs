//! Robust binary classification of Gaussian mixtures under sparse attacks.
//!
//! An adversary with an l0 budget of `k` may arbitrarily rewrite up to `k`
//! coordinates of an input drawn from the two-class Gaussian mixture
//! `x ~ N(y*mu, Sigma)`, `y ~ Unif{-1,+1}`. Any linear rule is destroyed by a
//! single rewritten coordinate; this crate implements the two nonlinear
//! ingredients that restore robustness, the closed-form error bounds that
//! come with them, and a deterministic Monte Carlo laboratory for exploring
//! the resulting phase transitions at desk scale:
//!
//! * [`trunc_stats`] — trimmed sums and the truncated inner product, with
//!   their perturbation-stability guarantees;
//! * [`gmm`] — problems `(mu, Sigma)`, whitened means, restriction to
//!   coordinate subsets, and reproducible counter-based sampling;
//! * [`filtrun`] — the filtration + truncation classifier, upper bounds on
//!   its robust error, and filtration-set selection rules;
//! * [`adversary`] — the exact worst-case attack predicate, the randomized
//!   erasure strategy, the genie baseline, and the matching lower bounds;
//! * [`asymptotics`] — budget exponents `lambda_c`, the `Psi_d` curve, its
//!   numeric pseudo-inverse, and the example problem families;
//! * [`harness`] — Monte Carlo estimators, budget sweeps, and the
//!   brute-force validation suites behind the `filtrun` CLI.
//!
//! ```
//! use filtrun::asymptotics::family_uniform;
//! use filtrun::filtrun::build_classifier;
//! use filtrun::gmm::CoordSet;
//! use filtrun::harness::mc_robust_error;
//!
//! let problem = family_uniform(64)?;
//! let clf = build_classifier(&problem, &CoordSet::full(64), 1)?;
//! let estimate = mc_robust_error(&problem, &clf, 2_000, 7)?;
//! assert!(estimate.p_hat > 0.1 && estimate.p_hat < 0.35);
//! # Ok::<(), filtrun::Error>(())
//! ```

pub mod adversary;
pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod filtrun;
pub mod gmm;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod special;
pub mod trunc_stats;

pub use error::{Error, Result};

// Book chapters double as doctests so the guide can never drift from the
// API. The include paths are relative to this file.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(truncation, "../../../book/src/truncation.md");
    chapter!(model, "../../../book/src/model.md");
    chapter!(classifier, "../../../book/src/classifier.md");
    chapter!(attacks, "../../../book/src/attacks.md");
    chapter!(asymptotics, "../../../book/src/asymptotics.md");
    chapter!(experiments, "../../../book/src/experiments.md");
}
