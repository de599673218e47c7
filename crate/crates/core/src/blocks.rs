//! Extremal (Rosenthal) blocks, general admissible blocks and their
//! biorthogonal functionals.
//!
//! The extremal block on a set `I` has coefficients `w_n^{2/(p-2)}`; it
//! maximizes `|x|_2 / |x|_p` among vectors supported on `I` and satisfies
//! `|y|_2 = omega(I)^{1/2}`, `|y|_p = omega(I)^{1/p}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XpError};
use crate::space::{SpVector, SupportSet, WeightedSpace};

/// Relative slack on the non-strict block conditions, so that exact
/// equalities survive rounding.
pub const CONDITION_RTOL: f64 = 1e-12;

/// Relative tolerance used when asserting the extremal identities.
const IDENTITY_RTOL: f64 = 1e-10;

fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Both sides of one inequality `lhs >= rhs` (or `lhs <= rhs`, per context).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl ConditionCheck {
    /// `lhs >= rhs` up to [`CONDITION_RTOL`].
    pub fn at_least(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            pass: lhs >= rhs * (1.0 - CONDITION_RTOL),
        }
    }
}

/// The four quantities of the Hölder chain for one functional applied to `x`.
///
/// Contract: `lhs2 <= factor2 * rhs2` and `lhsp <= factorp * rhsp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderBounds {
    pub functional: f64,
    pub lhs2: f64,
    pub rhs2: f64,
    pub factor2: f64,
    pub lhsp: f64,
    pub rhsp: f64,
    pub factorp: f64,
}

impl HolderBounds {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs2 <= self.factor2 * self.rhs2 * (1.0 + rel_slack)
            && self.lhsp <= self.factorp * self.rhsp * (1.0 + rel_slack)
    }
}

/// Common surface of the two block kinds.
pub trait BlockFunctional {
    fn vector(&self) -> &SpVector;

    fn support(&self) -> &SupportSet;

    /// The biorthogonal functional evaluated at `x`.
    fn apply(&self, x: &SpVector) -> Result<f64>;

    fn holder_bounds(&self, x: &SpVector) -> Result<HolderBounds>;
}

/// `functional_apply`: evaluates the block's functional at `x`.
pub fn functional_apply<B: BlockFunctional + ?Sized>(b: &B, x: &SpVector) -> Result<f64> {
    b.apply(x)
}

/// The extremal block on a support set.
#[derive(Debug, Clone, PartialEq)]
pub struct RosenthalBlock {
    support: SupportSet,
    vector: SpVector,
    omega: f64,
    norm2_sq: f64,
}

impl RosenthalBlock {
    pub fn new(space: &Arc<WeightedSpace>, support: SupportSet) -> Result<Self> {
        if support.is_empty() {
            return Err(XpError::EmptySupport);
        }
        let omega = space.omega(&support)?;
        // coefficients may underflow for tiny weights; those drop out
        let vector = SpVector::new(space, support.iter().map(|n| (n, space.block_coeff(n))))?;
        let block = Self {
            norm2_sq: vector.norm_2w_sq(),
            support,
            vector,
            omega,
        };
        block.assert_identities()?;
        Ok(block)
    }

    fn assert_identities(&self) -> Result<()> {
        if self.omega == 0.0 || !self.omega.is_normal() {
            // nothing representable to compare against
            return Ok(());
        }
        let p = self.vector.space().p();
        let n2 = self.vector.norm_2w();
        let np = self.vector.norm_p();
        if !rel_close(n2, self.omega.sqrt(), IDENTITY_RTOL)
            || !rel_close(np, self.omega.powf(1.0 / p), IDENTITY_RTOL)
        {
            return Err(XpError::Invariant(format!(
                "extremal identities fail on {}: |y|_2 = {n2}, |y|_p = {np}, omega = {}",
                self.support, self.omega
            )));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `omega(I)^{(p-2)/(2p)}`, which equals `r(y)`.
    pub fn omega_ratio(&self) -> f64 {
        self.omega.powf(self.vector.space().ratio_exp())
    }

    pub fn space(&self) -> &Arc<WeightedSpace> {
        self.vector.space()
    }
}

impl BlockFunctional for RosenthalBlock {
    fn vector(&self) -> &SpVector {
        &self.vector
    }

    fn support(&self) -> &SupportSet {
        &self.support
    }

    fn apply(&self, x: &SpVector) -> Result<f64> {
        if self.norm2_sq == 0.0 {
            return Err(XpError::FunctionalUndefined);
        }
        Ok(self.vector.inner(x)? / self.norm2_sq)
    }

    fn holder_bounds(&self, x: &SpVector) -> Result<HolderBounds> {
        let f = self.apply(x)?;
        let local = x.restrict(&self.support);
        Ok(HolderBounds {
            functional: f,
            lhs2: f.abs() * self.vector.norm_2w(),
            rhs2: local.norm_2w(),
            factor2: 1.0,
            lhsp: f.abs() * self.vector.norm_p(),
            rhsp: local.norm_p(),
            factorp: 1.0,
        })
    }
}

/// `make_rosenthal`.
pub fn make_rosenthal(space: &Arc<WeightedSpace>, support: SupportSet) -> Result<RosenthalBlock> {
    RosenthalBlock::new(space, support)
}

/// Which dual functional a [`Block`] exposes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalForm {
    /// `|z_E|_2^{-2} <z_E, x>`; reads only the coordinates in `E`.
    #[default]
    Restricted,
    /// `|z|_2^{-2} <z, x>` over the whole support.
    FullSupport,
}

/// A block vector `z` on a support `F` with a designated set `E ⊆ F` and
/// constants `(delta, c)`. Conditions:
///
/// * (a) `|z_E|_2 >= delta |z|_2`
/// * (b) `c |z_E|_2 >= omega(E)^{(p-2)/(2p)}`
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    support: SupportSet,
    vector: SpVector,
    eset: SupportSet,
    delta: f64,
    c: f64,
    cond_a: ConditionCheck,
    cond_b: ConditionCheck,
    form: FunctionalForm,
    restricted: SpVector,
    restricted_sq: f64,
    omega_e: f64,
}

impl Block {
    /// Builds a block and rejects it unless both conditions hold.
    pub fn new(
        support: SupportSet,
        vector: SpVector,
        eset: SupportSet,
        delta: f64,
        c: f64,
    ) -> Result<Self> {
        let b = Self::new_unchecked(support, vector, eset, delta, c)?;
        if !b.cond_a.pass {
            return Err(XpError::BlockCondition {
                condition: "a",
                lhs: b.cond_a.lhs,
                rhs: b.cond_a.rhs,
            });
        }
        if !b.cond_b.pass {
            return Err(XpError::BlockCondition {
                condition: "b",
                lhs: b.cond_b.lhs,
                rhs: b.cond_b.rhs,
            });
        }
        Ok(b)
    }

    /// Structural checks only; conditions (a), (b) are recorded, not enforced.
    pub fn new_unchecked(
        support: SupportSet,
        vector: SpVector,
        eset: SupportSet,
        delta: f64,
        c: f64,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(XpError::EmptySupport);
        }
        let space = vector.space().clone();
        space.check_set(&support)?;
        if let Some(&(n, _)) = vector.entries().iter().find(|(n, _)| !support.contains(*n)) {
            return Err(XpError::NotSupported(n));
        }
        if let Some(n) = eset.iter().find(|&n| !support.contains(n)) {
            return Err(XpError::NotSupported(n));
        }
        for (name, v) in [("delta", delta), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(XpError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let restricted = vector.restrict(&eset);
        let restricted_sq = restricted.norm_2w_sq();
        let omega_e = space.omega_ratio(&eset)?;
        let mut b = Self {
            support,
            vector,
            eset,
            delta,
            c,
            cond_a: ConditionCheck::at_least(0.0, 0.0),
            cond_b: ConditionCheck::at_least(0.0, 0.0),
            form: FunctionalForm::Restricted,
            restricted,
            restricted_sq,
            omega_e,
        };
        let (a, bb) = b.conditions(delta, c);
        b.cond_a = a;
        b.cond_b = bb;
        Ok(b)
    }

    /// The block built from an extremal block, with `E = I`, scaled to norm one.
    pub fn from_rosenthal(r: &RosenthalBlock, delta: f64, c: f64) -> Result<Self> {
        let z = r.vector().normalized()?;
        Self::new(r.support().clone(), z, r.support().clone(), delta, c)
    }

    /// Evaluates (a) and (b) for arbitrary constants.
    pub fn conditions(&self, delta: f64, c: f64) -> (ConditionCheck, ConditionCheck) {
        let zr = self.restricted_sq.sqrt();
        (
            ConditionCheck::at_least(zr, delta * self.vector.norm_2w()),
            ConditionCheck::at_least(c * zr, self.omega_e),
        )
    }

    /// Switches the functional to the given form.
    pub fn with_form(mut self, form: FunctionalForm) -> Self {
        self.form = form;
        self
    }

    pub fn form(&self) -> FunctionalForm {
        self.form
    }

    pub fn eset(&self) -> &SupportSet {
        &self.eset
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn condition_a(&self) -> ConditionCheck {
        self.cond_a
    }

    pub fn condition_b(&self) -> ConditionCheck {
        self.cond_b
    }

    pub fn is_admissible(&self) -> bool {
        self.cond_a.pass && self.cond_b.pass
    }

    pub fn space(&self) -> &Arc<WeightedSpace> {
        self.vector.space()
    }

    /// `z_{|E}`.
    pub fn restricted_vector(&self) -> &SpVector {
        &self.restricted
    }

    /// `omega(E)^{(p-2)/(2p)}`, the induced weight of this block.
    pub fn induced_weight(&self) -> f64 {
        self.omega_e
    }

    /// The least `delta` for which (a) holds: `|z_E|_2 / |z|_2`.
    pub fn tight_delta(&self) -> f64 {
        self.restricted_sq.sqrt() / self.vector.norm_2w()
    }

    /// The least `c` for which (b) holds: `omega(E)^{(p-2)/(2p)} / |z_E|_2`.
    pub fn tight_c(&self) -> f64 {
        self.omega_e / self.restricted_sq.sqrt()
    }
}

impl BlockFunctional for Block {
    fn vector(&self) -> &SpVector {
        &self.vector
    }

    fn support(&self) -> &SupportSet {
        &self.support
    }

    fn apply(&self, x: &SpVector) -> Result<f64> {
        match self.form {
            FunctionalForm::Restricted => {
                if self.restricted_sq == 0.0 {
                    return Err(XpError::FunctionalUndefined);
                }
                Ok(self.restricted.inner(x)? / self.restricted_sq)
            }
            FunctionalForm::FullSupport => {
                let n2 = self.vector.norm_2w_sq();
                if n2 == 0.0 {
                    return Err(XpError::FunctionalUndefined);
                }
                Ok(self.vector.inner(x)? / n2)
            }
        }
    }

    /// For the restricted form the right-hand sides live on `E` and the
    /// factors are `|z|_2/|z_E|_2 (<= 1/delta)` and
    /// `omega(E)^{(p-2)/2p} |z|_p / |z_E|_2 (<= c for normalized z)`.
    /// For the full-support form they live on `F` with factors `1` and
    /// `omega(F)^{(p-2)/2p} |z|_p / |z|_2`.
    fn holder_bounds(&self, x: &SpVector) -> Result<HolderBounds> {
        let f = self.apply(x)?;
        let (z2, zp) = (self.vector.norm_2w(), self.vector.norm_p());
        let (local, factor2, factorp) = match self.form {
            FunctionalForm::Restricted => {
                let zr = self.restricted_sq.sqrt();
                (x.restrict(&self.eset), z2 / zr, self.omega_e * zp / zr)
            }
            FunctionalForm::FullSupport => {
                let of = self.space().omega_ratio(&self.support)?;
                (x.restrict(&self.support), 1.0, of * zp / z2)
            }
        };
        Ok(HolderBounds {
            functional: f,
            lhs2: f.abs() * z2,
            rhs2: local.norm_2w(),
            factor2,
            lhsp: f.abs() * zp,
            rhsp: local.norm_p(),
            factorp,
        })
    }
}

/// `holder_bounds` for either block kind.
pub fn holder_bounds<B: BlockFunctional + ?Sized>(b: &B, x: &SpVector) -> Result<HolderBounds> {
    b.holder_bounds(x)
}

/// True iff `r(x) <= r(extremal block on I) + tol`; `x` must be a nonzero
/// vector supported on `I`.
pub fn extremality_check(
    space: &Arc<WeightedSpace>,
    support: &SupportSet,
    x: &SpVector,
    tol: f64,
) -> Result<bool> {
    if !space.same_as(x.space()) {
        return Err(XpError::SpaceMismatch);
    }
    if let Some(&(n, _)) = x.entries().iter().find(|(n, _)| !support.contains(*n)) {
        return Err(XpError::NotSupported(n));
    }
    let r = x.ratio()?;
    let best = RosenthalBlock::new(space, support.clone())?.omega_ratio();
    Ok(r <= best + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp() -> Arc<WeightedSpace> {
        WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap()
    }

    #[test]
    fn rosenthal_worked_example() {
        let s = sp();
        let y = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        assert_eq!(y.vector().to_dense(), vec![1.0, 0.5]);
        assert_relative_eq!(y.vector().norm_2w(), 1.0625f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            y.vector().norm_p(),
            1.0625f64.powf(0.25),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            y.vector().ratio().unwrap(),
            y.omega_ratio(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rosenthal_singleton_ratio_is_weight() {
        let s = WeightedSpace::new(3.0, vec![0.7, 0.2, 0.9]).unwrap();
        let y = make_rosenthal(&s, SupportSet::from(vec![2])).unwrap();
        assert_relative_eq!(y.vector().ratio().unwrap(), 0.2, max_relative = 1e-14);
        assert_relative_eq!(y.omega_ratio(), 0.2, max_relative = 1e-14);
        assert_relative_eq!(y.vector().get(2), 0.2f64.powi(2), max_relative = 1e-14);
    }

    #[test]
    fn rosenthal_rejects_empty() {
        assert_eq!(
            make_rosenthal(&sp(), SupportSet::empty()).unwrap_err(),
            XpError::EmptySupport
        );
    }

    #[test]
    fn functional_examples() {
        let s = sp();
        let y = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        assert_relative_eq!(
            functional_apply(&y, y.vector()).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        let e1 = SpVector::basis(&s, 1).unwrap();
        assert_relative_eq!(y.apply(&e1).unwrap(), 1.0 / 1.0625, max_relative = 1e-15);
        assert_relative_eq!(y.apply(&e1).unwrap(), 0.941176, max_relative = 1e-6);

        let s3 = WeightedSpace::new(4.0, vec![1.0, 0.5, 0.3]).unwrap();
        let y = make_rosenthal(&s3, SupportSet::range(1, 2)).unwrap();
        assert_eq!(y.apply(&SpVector::basis(&s3, 3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn holder_equality_at_extremal_vector() {
        let s = sp();
        let y = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        let h = y.holder_bounds(y.vector()).unwrap();
        assert_relative_eq!(h.lhs2, h.rhs2, max_relative = 1e-14);
        assert_relative_eq!(h.lhsp, h.rhsp, max_relative = 1e-14);
        assert!(h.holds(1e-12));
    }

    #[test]
    fn holder_disjoint_x() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5, 0.3]).unwrap();
        let y = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        let x = SpVector::basis(&s, 3).unwrap();
        let h = y.holder_bounds(&x).unwrap();
        assert_eq!((h.lhs2, h.lhsp, h.rhs2, h.rhsp), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn block_conditions_recorded() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5, 0.5, 0.5]).unwrap();
        let z = SpVector::from_dense(&s, &[0.0, 0.1, 1.0, 0.0]).unwrap();
        let f = SupportSet::range(2, 3);
        let e = SupportSet::from(vec![2]);
        // z_E carries almost none of the 2-mass
        let err = Block::new(f.clone(), z.clone(), e.clone(), 0.5, 1.0).unwrap_err();
        assert!(matches!(
            err,
            XpError::BlockCondition { condition: "a", .. }
        ));
        let b = Block::new_unchecked(f.clone(), z.clone(), e.clone(), 0.5, 1.0).unwrap();
        assert!(!b.condition_a().pass);
        assert!(!b.condition_b().pass);
        assert!(!b.is_admissible());
        // tight constants make it admissible
        let ok = Block::new(f, z, e, b.tight_delta(), b.tight_c()).unwrap();
        assert!(ok.is_admissible());
    }

    #[test]
    fn block_structural_errors() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5, 0.5]).unwrap();
        let z = SpVector::from_dense(&s, &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            Block::new_unchecked(
                SupportSet::from(vec![1]),
                z.clone(),
                SupportSet::from(vec![1]),
                1.0,
                1.0
            )
            .unwrap_err(),
            XpError::NotSupported(2)
        );
        assert_eq!(
            Block::new_unchecked(
                SupportSet::range(1, 2),
                z.clone(),
                SupportSet::from(vec![3]),
                1.0,
                1.0
            )
            .unwrap_err(),
            XpError::NotSupported(3)
        );
        assert!(Block::new_unchecked(
            SupportSet::range(1, 2),
            z.clone(),
            SupportSet::from(vec![1]),
            0.0,
            1.0
        )
        .is_err());
        // E chosen where z vanishes: functional undefined
        let z1 = SpVector::from_dense(&s, &[1.0, 0.0, 0.0]).unwrap();
        let b = Block::new_unchecked(
            SupportSet::range(1, 2),
            z1.clone(),
            SupportSet::from(vec![2]),
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(b.apply(&z1).unwrap_err(), XpError::FunctionalUndefined);
    }

    #[test]
    fn block_biorthogonal_both_forms() {
        let s = WeightedSpace::new(5.0, vec![0.9, 0.4, 0.6, 0.3]).unwrap();
        let z = SpVector::from_dense(&s, &[0.5, -1.0, 0.25, 0.0])
            .unwrap()
            .normalized()
            .unwrap();
        let b = Block::new_unchecked(
            SupportSet::range(1, 3),
            z.clone(),
            SupportSet::range(1, 2),
            1.0,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(b.apply(&z).unwrap(), 1.0, max_relative = 1e-14);
        let full = b.clone().with_form(FunctionalForm::FullSupport);
        assert_relative_eq!(full.apply(&z).unwrap(), 1.0, max_relative = 1e-14);
        // the restricted form ignores coordinates outside E
        let e3 = SpVector::basis(&s, 3).unwrap();
        assert_eq!(b.apply(&e3).unwrap(), 0.0);
        assert!(full.apply(&e3).unwrap() != 0.0);
    }

    #[test]
    fn normalized_rosenthal_block_is_admissible_with_unit_constants() {
        let s = WeightedSpace::new(4.0, vec![0.5, 0.5, 0.4]).unwrap();
        let r = make_rosenthal(&s, SupportSet::range(1, 3)).unwrap();
        assert!(r.omega() <= 1.0);
        let b = Block::from_rosenthal(&r, 1.0, 1.0).unwrap();
        assert!(b.is_admissible());
        assert_relative_eq!(b.tight_delta(), 1.0);
        assert_relative_eq!(b.tight_c(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn extremality_examples() {
        let s = WeightedSpace::new(4.0, vec![0.5; 4]).unwrap();
        let i = SupportSet::range(1, 3);
        let r = make_rosenthal(&s, i.clone()).unwrap();
        assert!(extremality_check(&s, &i, r.vector(), 1e-12).unwrap());
        let e1 = SpVector::basis(&s, 1).unwrap();
        assert!(e1.ratio().unwrap() < r.omega_ratio() - 1e-3);
        assert!(extremality_check(&s, &i, &e1, 0.0).unwrap());
        let outside = SpVector::basis(&s, 4).unwrap();
        assert_eq!(
            extremality_check(&s, &i, &outside, 1e-12).unwrap_err(),
            XpError::NotSupported(4)
        );
        assert!(extremality_check(&s, &i, &SpVector::zero(&s), 1e-12).is_err());
    }
}
