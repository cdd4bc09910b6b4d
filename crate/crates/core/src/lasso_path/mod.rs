//! Solution paths: LAR knots and segments, the fixed-λ lasso used as its
//! oracle, the lasso restricted to an active set, and forward stepwise.

pub mod cd;
pub mod lar;
pub mod stepwise;

pub use cd::{kkt_gap, lasso_at, restricted_lasso, soft_threshold, LassoFit, LassoOptions, LassoProblem};
pub use lar::{lar_path, PathDiagnostics, PathSegment, PathTrace};
pub use stepwise::{forward_stepwise, CandidateBasis, StepwiseTrace};
