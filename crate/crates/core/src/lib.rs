//! Numerics for Rosenthal's weighted sequence spaces `X_{p,w}` on finite
//! truncations: norms and ratios, extremal blocks and block projections,
//! weighted-orthogonal projections, operator-norm estimation, the criterion
//! checkers and witness generators, and the ratio splitter.

// `!(x > 0.0)` is how NaN gets rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod criteria;
pub mod doc;
pub mod error;
pub mod experiments;
pub mod operators;
pub mod report;
pub mod sampling;
pub mod space;
pub mod splitter;
pub mod weights;

pub use error::{Result, XpError};
pub use space::{SpVector, SupportSet, WeightedSpace};
