//! Reachability correlations in randomly oriented complete bipartite graphs.
//!
//! Every edge of K_{m,n} is directed independently (X_i -> Y_j with probability
//! p, default 1/2). For a vertex triple (x, y, z) drawn from one of three
//! placements, the crate computes the relative covariance of the avoidance
//! events {x does not reach y} and {y does not reach z}:
//!
//! ```text
//! rc = (P(Ac and Bc) - P(Ac) P(Bc)) / P(Ac and Bc)
//! ```
//!
//! Four independent routes are implemented and cross-checked:
//!
//! * [`oracle`]: exhaustive enumeration over all 2^(m*n) orientations (exact,
//!   capped).
//! * [`recur`]: a peeling recursion over one-step out-neighbourhoods (exact
//!   dyadic or interval big-float arithmetic, scales far past the cap).
//! * [`asymptotic`]: closed-form two-term estimates and the limiting rc table.
//! * [`mc`]: seeded Monte Carlo with confidence intervals.

pub mod asymptotic;
pub mod bigfloat;
pub mod dyadic;
pub mod erratum;
pub mod mc;
pub mod model;
pub mod oracle;
pub mod recur;
pub mod relcov;

pub use dyadic::{DyadicProb, ExactProb, Sign};
pub use model::{AvoidanceEvent, BetaClass, GraphShape, Orientation, Placement, PlacementKind, Side, Vertex};
pub use relcov::{ExactRcResult, SignVerdict};
