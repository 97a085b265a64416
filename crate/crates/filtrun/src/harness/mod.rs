//! Monte Carlo estimation, budget sweeps, and brute-force validation.

pub mod mc;
pub mod sweep;
pub mod validate;

pub use mc::{mc_error_under_adv, mc_robust_error, mc_robust_error_with_budget, ErrorEstimate};
pub use sweep::{sweep, FSelector, SweepRow};
pub use validate::{validate_oracles, Suite, ValidationReport};
