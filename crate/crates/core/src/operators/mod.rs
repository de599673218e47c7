//! Operators on the truncated space: the block projection, weighted
//! orthogonal projections, dense matrices, and operator-norm estimation.

mod gram;
pub mod oracle;
mod projection;
pub mod search;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, XpError};
use crate::space::{SpVector, WeightedSpace};

pub use gram::{
    certified_h_lower, estimate_h_inf, estimate_r_sup, grid_span_ratio, prop26_chain,
    GramProjector, Prop26Chain, SpanRatioEstimate, GRAM_CONDITION_CAP, QNORM_SAFETY,
};
pub use projection::{
    component_bounds, prop12_bound, ratio_bounds_check, BlockProjection, BlockSystem,
    ComponentBound, RatioWindow, NORMALIZATION_TOL,
};
pub use search::SearchConfig;

/// Which norm the operator norm is taken in (same norm on both sides).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormMode {
    /// `max{|x|_p, |x|_2}` on both sides.
    #[serde(rename = "xp")]
    Xp,
    /// The weighted 2-norm on both sides.
    #[serde(rename = "2w")]
    TwoW,
}

impl NormMode {
    pub fn norm(self, x: &SpVector) -> f64 {
        match self {
            NormMode::Xp => x.xp_norm(),
            NormMode::TwoW => x.norm_2w(),
        }
    }
}

impl std::str::FromStr for NormMode {
    type Err = XpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xp" | "xp->xp" => Ok(NormMode::Xp),
            "2w" | "2w->2w" => Ok(NormMode::TwoW),
            other => Err(XpError::InvalidParameter(format!(
                "unknown norm mode {other:?}"
            ))),
        }
    }
}

/// A linear map of the truncation into itself.
pub trait LinearOperator: Sync {
    fn space(&self) -> &Arc<WeightedSpace>;

    fn apply(&self, x: &SpVector) -> Result<SpVector>;

    /// A proven upper bound on the operator norm, when one is known.
    fn analytic_upper(&self, _mode: NormMode) -> Option<f64> {
        None
    }
}

/// `t * I`.
#[derive(Debug, Clone)]
pub struct ScaledIdentity {
    space: Arc<WeightedSpace>,
    t: f64,
}

impl ScaledIdentity {
    pub fn new(space: &Arc<WeightedSpace>, t: f64) -> Self {
        Self {
            space: Arc::clone(space),
            t,
        }
    }
}

impl LinearOperator for ScaledIdentity {
    fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    fn apply(&self, x: &SpVector) -> Result<SpVector> {
        if !self.space.same_as(x.space()) {
            return Err(XpError::SpaceMismatch);
        }
        Ok(x.scale(self.t))
    }

    fn analytic_upper(&self, _mode: NormMode) -> Option<f64> {
        Some(self.t.abs())
    }
}

/// A dense `D x D` matrix acting on coefficient vectors.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    space: Arc<WeightedSpace>,
    matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(space: &Arc<WeightedSpace>, matrix: DMatrix<f64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(XpError::InvalidParameter(format!(
                "matrix is {}x{}, space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(XpError::InvalidParameter(
                "matrix has non-finite entries".into(),
            ));
        }
        Ok(Self {
            space: Arc::clone(space),
            matrix,
        })
    }

    pub fn from_rows(space: &Arc<WeightedSpace>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = space.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(XpError::InvalidParameter(format!(
                "matrix rows must form a {d}x{d} array"
            )));
        }
        Self::new(space, DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest singular value of `W A W^{-1}`, which is the exact
    /// operator norm in the weighted 2-norm.
    pub fn weighted_spectral_norm(&self) -> f64 {
        let w = self.space.weights();
        let scaled = DMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
            w[i] * self.matrix[(i, j)] / w[j]
        });
        scaled.singular_values().max()
    }
}

impl LinearOperator for DenseOperator {
    fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    fn apply(&self, x: &SpVector) -> Result<SpVector> {
        if !self.space.same_as(x.space()) {
            return Err(XpError::SpaceMismatch);
        }
        let mut out = DVector::zeros(self.space.dim());
        for &(n, v) in x.entries() {
            out.axpy(v, &self.matrix.column(n - 1), 1.0);
        }
        SpVector::from_dense(&self.space, out.as_slice())
    }

    fn analytic_upper(&self, mode: NormMode) -> Option<f64> {
        match mode {
            NormMode::TwoW => Some(self.weighted_spectral_norm()),
            NormMode::Xp => None,
        }
    }
}

/// A sampled lower bound on an operator norm, with its witness.
#[derive(Debug, Clone, PartialEq)]
pub struct OpNormEstimate {
    pub lower: f64,
    pub upper: Option<f64>,
    pub witness: SpVector,
    pub samples: usize,
    pub seed: u64,
    pub mode: NormMode,
    /// Set when no sampled point had a nonzero image.
    pub zero_operator: bool,
}

fn operator_ratio<A: LinearOperator + ?Sized>(op: &A, mode: NormMode, coeffs: &[f64]) -> f64 {
    let space = op.space();
    let Ok(x) = SpVector::from_dense(space, coeffs) else {
        return f64::NAN;
    };
    let nx = mode.norm(&x);
    if nx == 0.0 {
        return f64::NAN;
    }
    match op.apply(&x) {
        Ok(y) => mode.norm(&y) / nx,
        Err(_) => f64::NAN,
    }
}

/// Lower-bounds `sup ||Ax|| / ||x||` by seeded sampling plus pattern-search
/// polishing. Deterministic for fixed `(budget, seed)` and monotone in
/// `budget`.
pub fn estimate_opnorm<A: LinearOperator + ?Sized>(
    op: &A,
    mode: NormMode,
    cfg: SearchConfig,
) -> OpNormEstimate {
    let space = op.space();
    let dim = space.dim();
    let f = |a: &[f64]| operator_ratio(op, mode, a);
    let out = search::maximize_homogeneous(dim, f, &search::coordinate_starts(dim), cfg);
    let upper = op.analytic_upper(mode);
    if !(out.value > 0.0) {
        return OpNormEstimate {
            lower: 0.0,
            upper,
            witness: SpVector::zero(space),
            samples: cfg.budget,
            seed: cfg.seed,
            mode,
            zero_operator: true,
        };
    }
    let witness = SpVector::from_dense(space, &out.point)
        .and_then(|w| w.normalized())
        .expect("search winner is a finite nonzero point");
    // report the value the witness actually attains
    let lower = operator_ratio(op, mode, &witness.to_dense());
    OpNormEstimate {
        lower,
        upper,
        witness,
        samples: cfg.budget,
        seed: cfg.seed,
        mode,
        zero_operator: false,
    }
}

/// Dense-grid brute force for the same quantity, for `D <= 6`.
pub fn grid_opnorm<A: LinearOperator + ?Sized>(
    op: &A,
    mode: NormMode,
    target: usize,
) -> Result<f64> {
    let dim = op.space().dim();
    if dim > oracle::ORACLE_MAX_DIM {
        return Err(XpError::InvalidParameter(format!(
            "grid oracle supports dimension <= {}, got {dim}",
            oracle::ORACLE_MAX_DIM
        )));
    }
    let out = oracle::grid_maximize(dim, |a| operator_ratio(op, mode, a), target);
    Ok(out.value.max(0.0))
}
