//! The ambient space `X_{p,w}` on a finite section `1..=D`.
//!
//! Vectors are sparse, 1-based and canonical (no stored zeros). The norm is
//! `max{|x|_p, |x|_{2,w}}` where `|x|_{2,w}` carries the weight on every
//! coordinate; `|x|_2` everywhere in this crate means that weighted norm.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XpError};

/// Largest truncation accepted by [`WeightedSpace::new`].
pub const DEFAULT_DIM_CAP: usize = 65_536;

/// Weights below this are raised to powers in the log domain.
const LOG_DOMAIN_CUTOFF: f64 = 1e-100;

/// `w^e` for a positive weight, evaluated as `exp(e ln w)` for tiny `w`.
pub fn weight_pow(w: f64, e: f64) -> f64 {
    if w < LOG_DOMAIN_CUTOFF {
        (e * w.ln()).exp()
    } else {
        w.powf(e)
    }
}

/// `X_{p,w}` truncated to its first `D` coordinates.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    p: f64,
    weights: Vec<f64>,
    /// `2p/(p-2)`, the exponent inside `omega`.
    omega_exp: f64,
    /// `2/(p-2)`, the exponent of the extremal block coefficients.
    block_exp: f64,
    /// `(p-2)/(2p)`, the exponent turning an omega mass into a ratio.
    ratio_exp: f64,
    omega_weights: Vec<f64>,
    block_coeffs: Vec<f64>,
    weights_sq: Vec<f64>,
}

impl PartialEq for WeightedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.weights == other.weights
    }
}

impl WeightedSpace {
    pub fn new(p: f64, weights: Vec<f64>) -> Result<Arc<Self>> {
        Self::with_cap(p, weights, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(p: f64, weights: Vec<f64>, cap: usize) -> Result<Arc<Self>> {
        if !(p.is_finite() && p > 2.0) {
            return Err(XpError::InvalidExponent(p));
        }
        if weights.is_empty() || weights.len() > cap {
            return Err(XpError::DimensionOutOfRange {
                dim: weights.len(),
                cap,
            });
        }
        if let Some((i, &w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(XpError::NonPositiveWeight {
                index: i + 1,
                value: w,
            });
        }
        let omega_exp = 2.0 * p / (p - 2.0);
        let block_exp = 2.0 / (p - 2.0);
        let ratio_exp = (p - 2.0) / (2.0 * p);
        if ((omega_exp * ratio_exp) - 1.0).abs() > 4.0 * f64::EPSILON {
            return Err(XpError::Invariant(format!(
                "exponent cache inconsistent for p = {p}"
            )));
        }
        let omega_weights = weights.iter().map(|&w| weight_pow(w, omega_exp)).collect();
        let block_coeffs = weights.iter().map(|&w| weight_pow(w, block_exp)).collect();
        let weights_sq = weights.iter().map(|&w| w * w).collect();
        Ok(Arc::new(Self {
            p,
            weights,
            omega_exp,
            block_exp,
            ratio_exp,
            omega_weights,
            block_coeffs,
            weights_sq,
        }))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `w_n`, 1-based.
    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n - 1]
    }

    pub fn omega_exp(&self) -> f64 {
        self.omega_exp
    }

    pub fn block_exp(&self) -> f64 {
        self.block_exp
    }

    pub fn ratio_exp(&self) -> f64 {
        self.ratio_exp
    }

    /// `w_n^{2p/(p-2)}`.
    pub fn omega_weight(&self, n: usize) -> f64 {
        self.omega_weights[n - 1]
    }

    /// `w_n^{2/(p-2)}`, the extremal block coefficient at `n`.
    pub fn block_coeff(&self, n: usize) -> f64 {
        self.block_coeffs[n - 1]
    }

    pub(crate) fn weight_sq(&self, n: usize) -> f64 {
        self.weights_sq[n - 1]
    }

    pub fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.dim() {
            Err(XpError::IndexOutOfRange {
                index: n,
                dim: self.dim(),
            })
        } else {
            Ok(())
        }
    }

    pub fn check_set(&self, set: &SupportSet) -> Result<()> {
        match (set.first(), set.last()) {
            (Some(lo), Some(hi)) => self.check_index(lo).and(self.check_index(hi)),
            _ => Ok(()),
        }
    }

    /// The weight mass `omega(E) = sum_{n in E} w_n^{2p/(p-2)}`.
    pub fn omega(&self, set: &SupportSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(set.iter().map(|n| self.omega_weight(n)).sum())
    }

    /// `omega(E)^{(p-2)/(2p)}`, the largest ratio attainable on `E`.
    pub fn omega_ratio(&self, set: &SupportSet) -> Result<f64> {
        Ok(self.omega(set)?.powf(self.ratio_exp))
    }

    pub fn full_set(&self) -> SupportSet {
        SupportSet::range(1, self.dim())
    }

    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// A finite sorted set of 1-based indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct SupportSet(Vec<usize>);

impl From<Vec<usize>> for SupportSet {
    fn from(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }
}

impl From<SupportSet> for Vec<usize> {
    fn from(s: SupportSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SupportSet::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// The interval `lo..=hi` (empty when `lo > hi`).
    pub fn range(lo: usize, hi: usize) -> Self {
        SupportSet((lo.max(1)..=hi).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&n| !other.contains(n)).collect())
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "}}")
    }
}

/// A finitely supported coefficient vector in a [`WeightedSpace`].
#[derive(Debug, Clone)]
pub struct SpVector {
    space: Arc<WeightedSpace>,
    entries: Vec<(usize, f64)>,
}

impl PartialEq for SpVector {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_as(&other.space) && self.entries == other.entries
    }
}

impl SpVector {
    /// Builds a canonical vector; zeros are dropped, duplicates rejected.
    pub fn new<I>(space: &Arc<WeightedSpace>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut e: Vec<(usize, f64)> = entries.into_iter().collect();
        e.sort_by_key(|&(n, _)| n);
        for w in e.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(XpError::DuplicateIndex(w[0].0));
            }
        }
        for &(n, v) in &e {
            space.check_index(n)?;
            if !v.is_finite() {
                return Err(XpError::NonFiniteCoefficient(n));
            }
        }
        e.retain(|&(_, v)| v != 0.0);
        Ok(Self {
            space: Arc::clone(space),
            entries: e,
        })
    }

    /// Entries must already be sorted, in range, finite and nonzero.
    pub(crate) fn from_sorted(space: &Arc<WeightedSpace>, entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v != 0.0));
        Self {
            space: Arc::clone(space),
            entries,
        }
    }

    pub fn zero(space: &Arc<WeightedSpace>) -> Self {
        Self::from_sorted(space, Vec::new())
    }

    /// The unit vector `e_n`.
    pub fn basis(space: &Arc<WeightedSpace>, n: usize) -> Result<Self> {
        space.check_index(n)?;
        Ok(Self::from_sorted(space, vec![(n, 1.0)]))
    }

    /// Coefficient `k` of the slice goes to index `k + 1`.
    pub fn from_dense(space: &Arc<WeightedSpace>, coeffs: &[f64]) -> Result<Self> {
        Self::new(space, coeffs.iter().enumerate().map(|(k, &v)| (k + 1, v)))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space.dim()];
        for &(n, v) in &self.entries {
            out[n - 1] = v;
        }
        out
    }

    pub fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        match self.entries.binary_search_by_key(&n, |&(k, _)| k) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn support(&self) -> SupportSet {
        SupportSet(self.entries.iter().map(|&(n, _)| n).collect())
    }

    pub fn is_supported_on(&self, set: &SupportSet) -> bool {
        self.entries.iter().all(|&(n, _)| set.contains(n))
    }

    fn check_same(&self, other: &SpVector) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(XpError::SpaceMismatch)
        }
    }

    /// `(sum |x_n|^p)^{1/p}`, scaled by the largest entry against overflow.
    pub fn norm_p(&self) -> f64 {
        let m = self
            .entries
            .iter()
            .fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let p = self.space.p;
        let s: f64 = self
            .entries
            .iter()
            .map(|&(_, v)| (v.abs() / m).powf(p))
            .sum();
        m * s.powf(1.0 / p)
    }

    /// `(sum x_n^2 w_n^2)^{1/2}`.
    pub fn norm_2w(&self) -> f64 {
        self.norm_2w_sq().sqrt()
    }

    pub fn norm_2w_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(n, v)| v * v * self.space.weight_sq(n))
            .sum()
    }

    /// The norm of `X_{p,w}`: `max{|x|_p, |x|_2}`.
    pub fn xp_norm(&self) -> f64 {
        self.norm_p().max(self.norm_2w())
    }

    /// `r(x) = |x|_2 / |x|_p`.
    pub fn ratio(&self) -> Result<f64> {
        if self.is_zero() {
            return Err(XpError::ZeroVector("ratio"));
        }
        Ok(self.norm_2w() / self.norm_p())
    }

    /// `<x, y> = sum x_n y_n w_n^2`.
    pub fn inner(&self, other: &SpVector) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &SpVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut s = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += a[i].1 * b[j].1 * self.space.weight_sq(a[i].0);
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }

    pub fn scale(&self, t: f64) -> SpVector {
        if t == 0.0 {
            return SpVector::zero(&self.space);
        }
        let e = self
            .entries
            .iter()
            .map(|&(n, v)| (n, v * t))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        SpVector::from_sorted(&self.space, e)
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &SpVector) -> Result<SpVector> {
        self.check_same(other)?;
        Ok(self.axpy_unchecked(t, other))
    }

    pub(crate) fn axpy_unchecked(&self, t: f64, other: &SpVector) -> SpVector {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (n, v) = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                a[i - 1]
            } else if i == a.len() || b[j].0 < a[i].0 {
                j += 1;
                (b[j - 1].0, t * b[j - 1].1)
            } else {
                i += 1;
                j += 1;
                (a[i - 1].0, a[i - 1].1 + t * b[j - 1].1)
            };
            if v != 0.0 {
                out.push((n, v));
            }
        }
        SpVector::from_sorted(&self.space, out)
    }

    pub fn add(&self, other: &SpVector) -> Result<SpVector> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpVector) -> Result<SpVector> {
        self.axpy(-1.0, other)
    }

    /// `sum_k coeffs[k] * vectors[k]`.
    pub fn combination(
        space: &Arc<WeightedSpace>,
        coeffs: &[f64],
        vectors: &[SpVector],
    ) -> Result<SpVector> {
        if coeffs.len() != vectors.len() {
            return Err(XpError::InvalidParameter(format!(
                "{} coefficients for {} vectors",
                coeffs.len(),
                vectors.len()
            )));
        }
        let mut dense = vec![0.0; space.dim()];
        for (&a, v) in coeffs.iter().zip(vectors) {
            if !space.same_as(&v.space) {
                return Err(XpError::SpaceMismatch);
            }
            for &(n, x) in &v.entries {
                dense[n - 1] += a * x;
            }
        }
        SpVector::from_dense(space, &dense)
    }

    /// Keeps the coordinates in `set`.
    pub fn restrict(&self, set: &SupportSet) -> SpVector {
        let e = self
            .entries
            .iter()
            .copied()
            .filter(|&(n, _)| set.contains(n))
            .collect();
        SpVector::from_sorted(&self.space, e)
    }

    /// Keeps the coordinates outside `set`.
    pub fn restrict_complement(&self, set: &SupportSet) -> SpVector {
        let e = self
            .entries
            .iter()
            .copied()
            .filter(|&(n, _)| !set.contains(n))
            .collect();
        SpVector::from_sorted(&self.space, e)
    }

    /// Basis projection onto the first `n` coordinates.
    pub fn head_proj(&self, n: usize) -> SpVector {
        let e = self
            .entries
            .iter()
            .copied()
            .filter(|&(k, _)| k <= n)
            .collect();
        SpVector::from_sorted(&self.space, e)
    }

    /// Basis projection onto the coordinates past `n`.
    pub fn tail_proj(&self, n: usize) -> SpVector {
        let e = self
            .entries
            .iter()
            .copied()
            .filter(|&(k, _)| k > n)
            .collect();
        SpVector::from_sorted(&self.space, e)
    }

    /// `x / ||x||`.
    pub fn normalized(&self) -> Result<SpVector> {
        let n = self.xp_norm();
        if n == 0.0 {
            return Err(XpError::ZeroVector("normalization"));
        }
        Ok(self.scale(1.0 / n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp() -> Arc<WeightedSpace> {
        WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap()
    }

    fn sp3() -> Arc<WeightedSpace> {
        WeightedSpace::new(4.0, vec![1.0, 0.5, 0.25]).unwrap()
    }

    #[test]
    fn rejects_bad_spaces() {
        assert_eq!(
            WeightedSpace::new(2.0, vec![1.0]).unwrap_err(),
            XpError::InvalidExponent(2.0)
        );
        assert!(WeightedSpace::new(1.5, vec![1.0]).is_err());
        assert!(matches!(
            WeightedSpace::new(3.0, vec![1.0, 0.0]),
            Err(XpError::NonPositiveWeight { index: 2, .. })
        ));
        assert!(WeightedSpace::new(3.0, vec![-1.0]).is_err());
        assert!(WeightedSpace::new(3.0, vec![]).is_err());
        assert!(WeightedSpace::with_cap(3.0, vec![1.0; 5], 4).is_err());
    }

    #[test]
    fn exponent_cache() {
        let s = WeightedSpace::new(3.0, vec![1.0]).unwrap();
        assert_relative_eq!(s.omega_exp(), 6.0);
        assert_relative_eq!(s.block_exp(), 2.0);
        assert_relative_eq!(s.ratio_exp(), 1.0 / 6.0);
        assert!((s.omega_exp() * s.ratio_exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tiny_weights_use_log_domain() {
        let s = WeightedSpace::new(4.0, vec![1e-120]).unwrap();
        // 1e-480 underflows to zero, but the mass is still computed without NaN
        assert!(s.omega_weight(1).is_finite());
        let s = WeightedSpace::new(40.0, vec![1e-120]).unwrap();
        let expected = (2.0 * 40.0 / 38.0 * (1e-120f64).ln()).exp();
        assert_relative_eq!(s.omega_weight(1), expected, max_relative = 1e-12);
        assert!(s.omega_weight(1) > 0.0);
    }

    #[test]
    fn norms_on_worked_example() {
        let s = sp();
        let x = SpVector::from_dense(&s, &[1.0, 2.0]).unwrap();
        let p17 = 17f64.powf(0.25);
        assert_relative_eq!(p17, 2.030543, max_relative = 1e-6);
        assert_relative_eq!(x.norm_p(), p17, max_relative = 1e-12);
        assert_relative_eq!(x.norm_2w(), 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(x.xp_norm(), p17, max_relative = 1e-12);
        assert_relative_eq!(x.ratio().unwrap(), 2f64.sqrt() / p17, max_relative = 1e-12);
        assert_relative_eq!(x.ratio().unwrap(), 0.696471, max_relative = 1e-6);
    }

    #[test]
    fn zero_vector() {
        let z = SpVector::zero(&sp());
        assert_eq!(z.norm_p(), 0.0);
        assert_eq!(z.norm_2w(), 0.0);
        assert_eq!(z.xp_norm(), 0.0);
        assert_eq!(z.ratio().unwrap_err(), XpError::ZeroVector("ratio"));
    }

    #[test]
    fn basis_vectors() {
        let s = sp();
        let e2 = SpVector::basis(&s, 2).unwrap();
        assert_eq!(e2.norm_p(), 1.0);
        assert_eq!(e2.norm_2w(), 0.5);
        assert_eq!(e2.xp_norm(), 1.0);
        assert_eq!(e2.ratio().unwrap(), 0.5);
        let single = SpVector::new(&s, [(1, -3.5)]).unwrap();
        assert_eq!(single.norm_p(), 3.5);
        assert!(SpVector::basis(&s, 3).is_err());
        assert!(SpVector::basis(&s, 0).is_err());
    }

    #[test]
    fn canonical_form() {
        let s = sp3();
        let x = SpVector::new(&s, [(3, 1.0), (1, 0.0), (2, -2.0)]).unwrap();
        assert_eq!(x.entries(), &[(2, -2.0), (3, 1.0)]);
        assert_eq!(
            SpVector::new(&s, [(1, 1.0), (1, 2.0)]).unwrap_err(),
            XpError::DuplicateIndex(1)
        );
        assert!(SpVector::new(&s, [(4, 1.0)]).is_err());
        assert!(SpVector::new(&s, [(1, f64::NAN)]).is_err());
        let y = x.axpy(1.0, &x.scale(-1.0)).unwrap();
        assert!(y.is_zero());
    }

    #[test]
    fn omega_mass() {
        let s = sp();
        assert_eq!(s.omega(&SupportSet::empty()).unwrap(), 0.0);
        assert_relative_eq!(s.omega(&SupportSet::range(1, 2)).unwrap(), 1.0625);
        assert_relative_eq!(s.omega(&SupportSet::from(vec![2])).unwrap(), 0.0625);
        assert!(matches!(
            s.omega(&SupportSet::from(vec![1, 3])),
            Err(XpError::IndexOutOfRange { index: 3, dim: 2 })
        ));
    }

    #[test]
    fn inner_product() {
        let s = sp();
        let e1 = SpVector::basis(&s, 1).unwrap();
        let e2 = SpVector::basis(&s, 2).unwrap();
        assert_eq!(e1.inner(&e2).unwrap(), 0.0);
        assert_eq!(e2.inner(&e2).unwrap(), 0.25);
        let x = SpVector::from_dense(&s, &[1.0, 2.0]).unwrap();
        let y = SpVector::from_dense(&s, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(x.inner(&y).unwrap(), 1.5);
        let other = WeightedSpace::new(4.0, vec![1.0, 0.25]).unwrap();
        let z = SpVector::basis(&other, 1).unwrap();
        assert_eq!(x.inner(&z).unwrap_err(), XpError::SpaceMismatch);
        // equal contents count as the same space
        let twin = WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap();
        assert!(x.inner(&SpVector::basis(&twin, 1).unwrap()).is_ok());
    }

    #[test]
    fn restrictions_and_basis_projections() {
        let s = sp3();
        let x = SpVector::from_dense(&s, &[1.0, 2.0, 3.0]).unwrap();
        assert!(x.restrict(&SupportSet::empty()).is_zero());
        assert_eq!(x.restrict(&s.full_set()), x);
        assert_eq!(
            x.restrict(&SupportSet::from(vec![2])).to_dense(),
            vec![0.0, 2.0, 0.0]
        );
        let e2 = SpVector::basis(&s, 2).unwrap();
        assert_eq!(e2.restrict(&SupportSet::from(vec![2])), e2);
        assert_eq!(x.tail_proj(0), x);
        assert!(x.head_proj(0).is_zero());
        assert_eq!(x.tail_proj(1).to_dense(), vec![0.0, 2.0, 3.0]);
        assert_eq!(x.head_proj(1).add(&x.tail_proj(1)).unwrap(), x);
        assert_eq!(
            x.restrict_complement(&SupportSet::from(vec![2])).to_dense(),
            vec![1.0, 0.0, 3.0]
        );
    }

    #[test]
    fn support_set_ops() {
        let a = SupportSet::from(vec![3, 1, 2, 2]);
        assert_eq!(a.as_slice(), &[1, 2, 3]);
        let b = SupportSet::from(vec![4, 5]);
        assert!(a.is_disjoint(&b));
        assert!(!a.is_disjoint(&SupportSet::from(vec![3, 9])));
        assert_eq!(a.union(&b), SupportSet::range(1, 5));
        assert_eq!(a.difference(&SupportSet::from(vec![2])).as_slice(), &[1, 3]);
        assert!(SupportSet::from(vec![1, 3]).is_subset(&a));
        assert_eq!(a.to_string(), "{1,2,3}");
        assert!(SupportSet::range(3, 2).is_empty());
    }

    #[test]
    fn combination_matches_axpy() {
        let s = sp3();
        let u = SpVector::from_dense(&s, &[1.0, 0.0, 2.0]).unwrap();
        let v = SpVector::from_dense(&s, &[0.0, 1.0, -1.0]).unwrap();
        let c = SpVector::combination(&s, &[2.0, 3.0], &[u.clone(), v.clone()]).unwrap();
        assert_eq!(c, u.scale(2.0).axpy(3.0, &v).unwrap());
    }
}
