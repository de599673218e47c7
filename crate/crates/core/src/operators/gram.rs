use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Result, XpError};
use crate::space::{SpVector, SupportSet, WeightedSpace};

use super::search::{self, SearchConfig};
use super::{estimate_opnorm, oracle, LinearOperator, NormMode};

/// Gram matrices with a larger spectral condition number are rejected.
pub const GRAM_CONDITION_CAP: f64 = 1e12;

/// Safety factor on a sampled `||Q||` when it stands in for an upper bound.
pub const QNORM_SAFETY: f64 = 1.05;

/// Orthogonal projection onto `span(basis)` in the weighted inner product.
#[derive(Debug, Clone)]
pub struct GramProjector {
    space: Arc<WeightedSpace>,
    basis: Vec<SpVector>,
    chol: Cholesky<f64, Dyn>,
    condition: f64,
}

impl GramProjector {
    pub fn new(basis: Vec<SpVector>) -> Result<Self> {
        let Some(first) = basis.first() else {
            return Err(XpError::InvalidParameter("empty basis".into()));
        };
        let space = Arc::clone(first.space());
        if basis.iter().any(|b| !space.same_as(b.space())) {
            return Err(XpError::SpaceMismatch);
        }
        let k = basis.len();
        let g = DMatrix::from_fn(k, k, |i, j| basis[i].inner_unchecked(&basis[j]));
        let eig = g.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if !(hi > 0.0) || !(lo > 0.0) {
            return Err(XpError::SingularGram);
        }
        let condition = hi / lo;
        if condition > GRAM_CONDITION_CAP {
            return Err(XpError::IllConditioned(condition));
        }
        let chol = Cholesky::new(g).ok_or(XpError::SingularGram)?;
        Ok(Self {
            space,
            basis,
            chol,
            condition,
        })
    }

    pub fn basis(&self) -> &[SpVector] {
        &self.basis
    }

    /// Spectral condition number of the Gram matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Coefficients of `Qx` in the basis.
    pub fn coefficients(&self, x: &SpVector) -> Result<Vec<f64>> {
        if !self.space.same_as(x.space()) {
            return Err(XpError::SpaceMismatch);
        }
        let rhs = DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|b| b.inner_unchecked(x)),
        );
        Ok(self.chol.solve(&rhs).iter().copied().collect())
    }

    pub fn project(&self, x: &SpVector) -> Result<SpVector> {
        let a = self.coefficients(x)?;
        SpVector::combination(&self.space, &a, &self.basis)
    }

    /// `|x - Qx|_2`, the weighted distance from `x` to the span.
    pub fn distance(&self, x: &SpVector) -> Result<f64> {
        Ok(x.sub(&self.project(x)?)?.norm_2w())
    }

    /// Sampled `||Q||` on `X_p`, inflated by [`QNORM_SAFETY`].
    pub fn xp_norm_bound(&self, cfg: SearchConfig) -> f64 {
        estimate_opnorm(self, NormMode::Xp, cfg).lower * QNORM_SAFETY
    }
}

impl LinearOperator for GramProjector {
    fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    fn apply(&self, x: &SpVector) -> Result<SpVector> {
        self.project(x)
    }

    fn analytic_upper(&self, mode: NormMode) -> Option<f64> {
        match mode {
            NormMode::TwoW => Some(1.0),
            NormMode::Xp => None,
        }
    }
}

/// `||Qx|| <= ||Q||^{1/2} r(x)^{1/2} ||x|| / beta'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop26Chain {
    pub lhs: f64,
    pub rhs: f64,
    pub norm_q: f64,
    pub ok: bool,
}

/// Evaluates the chain at `x` given an upper bound `norm_q` on `||Q||`.
/// The caller certifies that every unit vector of the span has ratio at
/// least `beta_prime`.
pub fn prop26_chain(
    q: &GramProjector,
    beta_prime: f64,
    x: &SpVector,
    norm_q: f64,
) -> Result<Prop26Chain> {
    if !(beta_prime > 0.0 && beta_prime <= 1.0) {
        return Err(XpError::InvalidParameter(format!(
            "beta' must lie in (0, 1], got {beta_prime}"
        )));
    }
    if !(norm_q.is_finite() && norm_q >= 0.0) {
        return Err(XpError::InvalidParameter(format!(
            "invalid bound on ||Q||: {norm_q}"
        )));
    }
    let r = x.ratio()?;
    let lhs = q.project(x)?.xp_norm();
    let rhs = norm_q.sqrt() * r.sqrt() * x.xp_norm() / beta_prime;
    Ok(Prop26Chain {
        lhs,
        rhs,
        norm_q,
        ok: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// A certified lower bound on `h(span V)` for pairwise disjoint `V`:
/// `min{1, min_j r(v_j)}`.
///
/// For `x = sum a_j v_j` with unit `v_j`, `|x|_2^2 = sum a_j^2 |v_j|_2^2`
/// and `|x|_p <= (sum a_j^2 |v_j|_p^2)^{1/2}` since `p > 2`, so the ratio is
/// at least the smallest `r(v_j)`; the cap at 1 keeps the value usable as a
/// chain constant.
pub fn certified_h_lower(v: &[SpVector]) -> Result<f64> {
    let mut seen = SupportSet::empty();
    let mut m = 1.0f64;
    for x in v {
        let s = x.support();
        if !s.is_disjoint(&seen) {
            return Err(XpError::Precondition(
                "vectors are not pairwise disjoint".into(),
            ));
        }
        seen = seen.union(&s);
        m = m.min(x.ratio()?);
    }
    Ok(m)
}

/// A sup or inf of the ratio over the unit sphere of a span.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanRatioEstimate {
    pub value: f64,
    pub witness: SpVector,
    pub coefficients: Vec<f64>,
}

/// Evaluates the ratio of `sum a_j v_j` on the union support only.
struct SpanRatio {
    p: f64,
    weights_sq: Vec<f64>,
    /// `rows[j][i]`: coordinate `i` of the union support in `v_j`.
    rows: Vec<Vec<f64>>,
}

impl SpanRatio {
    fn new(v: &[SpVector]) -> Self {
        let space = v[0].space();
        let support: SupportSet = v
            .iter()
            .flat_map(|x| x.support().iter().collect::<Vec<_>>())
            .collect();
        let pos = |n: usize| support.as_slice().binary_search(&n).expect("in union");
        let rows = v
            .iter()
            .map(|x| {
                let mut row = vec![0.0; support.len()];
                for &(n, c) in x.entries() {
                    row[pos(n)] = c;
                }
                row
            })
            .collect();
        Self {
            p: space.p(),
            weights_sq: support.iter().map(|n| space.weight(n).powi(2)).collect(),
            rows,
        }
    }

    fn eval(&self, a: &[f64]) -> f64 {
        let m = self.weights_sq.len();
        let mut x = vec![0.0; m];
        for (aj, row) in a.iter().zip(&self.rows) {
            if *aj != 0.0 {
                x.iter_mut().zip(row).for_each(|(xi, r)| *xi += aj * r);
            }
        }
        let top = x.iter().fold(0.0f64, |t, v| t.max(v.abs()));
        if top == 0.0 {
            return f64::NAN;
        }
        let two: f64 = x
            .iter()
            .zip(&self.weights_sq)
            .map(|(v, w)| (v / top).powi(2) * w)
            .sum();
        let pp: f64 = x.iter().map(|v| (v.abs() / top).powf(self.p)).sum();
        two.sqrt() / pp.powf(1.0 / self.p)
    }
}

fn span_extremum(v: &[SpVector], cfg: SearchConfig, sup: bool) -> Result<SpanRatioEstimate> {
    // validates independence and the shared space
    GramProjector::new(v.to_vec())?;
    let sr = SpanRatio::new(v);
    let sign = if sup { 1.0 } else { -1.0 };
    let k = v.len();
    let out =
        search::maximize_homogeneous(k, |a| sign * sr.eval(a), &search::coordinate_starts(k), cfg);
    finish(v, out.point)
}

fn finish(v: &[SpVector], coefficients: Vec<f64>) -> Result<SpanRatioEstimate> {
    let witness = SpVector::combination(v[0].space(), &coefficients, v)?.normalized()?;
    Ok(SpanRatioEstimate {
        value: witness.ratio()?,
        witness,
        coefficients,
    })
}

/// Sampled `sup r(x)` over nonzero `x` in `span(V)`.
pub fn estimate_r_sup(v: &[SpVector], cfg: SearchConfig) -> Result<SpanRatioEstimate> {
    span_extremum(v, cfg, true)
}

/// Sampled `inf r(x)` over nonzero `x` in `span(V)`.
pub fn estimate_h_inf(v: &[SpVector], cfg: SearchConfig) -> Result<SpanRatioEstimate> {
    span_extremum(v, cfg, false)
}

/// Grid-oracle counterpart of [`estimate_r_sup`] and [`estimate_h_inf`]
/// for spans of dimension at most 6.
pub fn grid_span_ratio(v: &[SpVector], sup: bool, target: usize) -> Result<f64> {
    if v.is_empty() || v.len() > oracle::ORACLE_MAX_DIM {
        return Err(XpError::InvalidParameter(format!(
            "grid oracle needs 1..={} vectors, got {}",
            oracle::ORACLE_MAX_DIM,
            v.len()
        )));
    }
    GramProjector::new(v.to_vec())?;
    let sr = SpanRatio::new(v);
    let sign = if sup { 1.0 } else { -1.0 };
    let out = oracle::grid_maximize(v.len(), |a| sign * sr.eval(a), target);
    Ok(sign * out.value)
}
