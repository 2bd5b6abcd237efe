//! Global numerical tolerances.
//!
//! Every fixed threshold used by the library lives here. All values assume
//! IEEE-754 f64 arithmetic and problem sizes up to a few hundred rows.

/// Relative accuracy target for operator norms (largest singular value).
pub const OPNORM_REL: f64 = 1e-12;

/// Matrix size above which the operator norm switches from full SVD to
/// power iteration on `A^H A`.
pub const OPNORM_SVD_LIMIT: usize = 256;

/// Reciprocal-condition floor: solves with `rcond` below this are rejected
/// as singular. Downstream positivity checks are meaningless past this point.
pub const RCOND_FLOOR: f64 = 1e-14;

/// Relative asymmetry allowed before a matrix is rejected as non-hermitian.
pub const HERM_TOL: f64 = 1e-10;

/// Isometry defect `||V^H V - I||` accepted for colligations.
pub const ISO_TOL: f64 = 1e-10;

/// Slack over 1 allowed on `||F(x)||` for isometric colligations.
pub const PSD_SLACK: f64 = 1e-9;

/// Default strictness margin for domain membership used by evaluation paths;
/// Neumann-style bounds blow up as `||delta(x)||` approaches 1.
pub const MEMBERSHIP_MARGIN: f64 = 1e-3;

/// Bisection accuracy for the point sampler's target norm.
pub const SAMPLE_NORM_TOL: f64 = 1e-6;

/// Attempt cap for rejection sampling.
pub const MAX_REJECTS: usize = 10_000;

/// Relative singular-value cutoff for intertwiner nullspace rank decisions.
pub const NULLSPACE_CUTOFF: f64 = 1e-10;

/// Stop the automatic Neumann truncation once the certified tail drops
/// below `NEUMANN_TAIL_TARGET * (1 + ||value||)`.
pub const NEUMANN_TAIL_TARGET: f64 = 1e-12;

/// Hard cap on automatic Neumann terms.
pub const NEUMANN_MAX_TERMS: usize = 10_000;

/// Total stored words allowed during symbolic expansion and parsing.
pub const TERM_BUDGET: usize = 1_000_000;

/// Largest exponent accepted by the polynomial parser.
pub const MAX_EXPONENT: usize = 10_000;

/// Default tolerance for property-suite verdicts.
pub const SUITE_TOL: f64 = 1e-8;

/// Default trial count per property suite.
pub const SUITE_TRIALS: usize = 200;

/// Default condition-number cap for sampled similarities.
pub const COND_CAP: f64 = 50.0;

/// Additive floating-point floor used when certified analytic bounds are
/// compared against measured residuals: below roughly
/// `FP_FLOOR * n * (1 + scale)` the measurement is rounding noise, not
/// truncation error.
pub const FP_FLOOR: f64 = 1e-12;
