use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blocks::{Block, BlockFunctional, ConditionCheck};
use crate::error::{Result, XpError};
use crate::space::{SpVector, WeightedSpace};

use super::{LinearOperator, NormMode};

/// Blocks of a system must have `||z_j|| = 1` to this absolute tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Disjointly supported normalized blocks with global constants `(delta, c)`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    space: Arc<WeightedSpace>,
    blocks: Vec<Block>,
    delta: f64,
    c: f64,
    conditions: Vec<(ConditionCheck, ConditionCheck)>,
    induced: Vec<f64>,
}

impl BlockSystem {
    /// Validates disjointness, normalization and both conditions under the
    /// global constants.
    pub fn new(blocks: Vec<Block>, delta: f64, c: f64) -> Result<Self> {
        let sys = Self::new_unchecked(blocks, delta, c)?;
        for (j, b) in sys.blocks.iter().enumerate() {
            let norm = b.vector().xp_norm();
            if (norm - 1.0).abs() > NORMALIZATION_TOL {
                return Err(XpError::NotNormalized { index: j + 1, norm });
            }
        }
        for (a, b) in &sys.conditions {
            if !a.pass {
                return Err(XpError::BlockCondition {
                    condition: "a",
                    lhs: a.lhs,
                    rhs: a.rhs,
                });
            }
            if !b.pass {
                return Err(XpError::BlockCondition {
                    condition: "b",
                    lhs: b.lhs,
                    rhs: b.rhs,
                });
            }
        }
        Ok(sys)
    }

    /// Checks the structure (one space, disjoint supports, disjoint `E_j`)
    /// but only records the conditions.
    pub fn new_unchecked(blocks: Vec<Block>, delta: f64, c: f64) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(XpError::InvalidParameter(
                "a block system needs at least one block".into(),
            ));
        };
        for (name, v) in [("delta", delta), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(XpError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let space = Arc::clone(first.space());
        let mut support_owner = vec![0usize; space.dim() + 1];
        let mut e_owner = vec![0usize; space.dim() + 1];
        for (j, b) in blocks.iter().enumerate() {
            if !space.same_as(b.space()) {
                return Err(XpError::SpaceMismatch);
            }
            for n in b.support().iter() {
                if support_owner[n] != 0 {
                    return Err(XpError::Overlap(support_owner[n], j + 1, "support"));
                }
                support_owner[n] = j + 1;
            }
            for n in b.eset().iter() {
                if e_owner[n] != 0 {
                    return Err(XpError::Overlap(e_owner[n], j + 1, "E"));
                }
                e_owner[n] = j + 1;
            }
        }
        let conditions = blocks.iter().map(|b| b.conditions(delta, c)).collect();
        let induced = blocks.iter().map(Block::induced_weight).collect();
        Ok(Self {
            space,
            blocks,
            delta,
            c,
            conditions,
            induced,
        })
    }

    pub fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Conditions (a), (b) of each block under the global constants.
    pub fn conditions(&self) -> &[(ConditionCheck, ConditionCheck)] {
        &self.conditions
    }

    /// `w'_j = omega(E_j)^{(p-2)/(2p)}`.
    pub fn induced_weights(&self) -> &[f64] {
        &self.induced
    }
}

/// `Px = sum_j z_j^*(x) z_j`.
#[derive(Debug, Clone)]
pub struct BlockProjection {
    system: BlockSystem,
}

impl BlockProjection {
    pub fn new(system: BlockSystem) -> Self {
        Self { system }
    }

    pub fn system(&self) -> &BlockSystem {
        &self.system
    }

    /// The coefficients `z_j^*(x)`.
    pub fn coefficients(&self, x: &SpVector) -> Result<Vec<f64>> {
        self.system.blocks.iter().map(|b| b.apply(x)).collect()
    }

    pub fn project(&self, x: &SpVector) -> Result<SpVector> {
        let coeffs = self.coefficients(x)?;
        let mut entries = Vec::new();
        for (b, &f) in self.system.blocks.iter().zip(&coeffs) {
            if f != 0.0 {
                entries.extend(
                    b.vector()
                        .entries()
                        .iter()
                        .map(|&(n, v)| (n, f * v))
                        .filter(|&(_, v)| v != 0.0),
                );
            }
        }
        // supports are disjoint, so a sort restores canonical order
        entries.sort_unstable_by_key(|&(n, _)| n);
        Ok(SpVector::from_sorted(&self.system.space, entries))
    }
}

impl LinearOperator for BlockProjection {
    fn space(&self) -> &Arc<WeightedSpace> {
        &self.system.space
    }

    fn apply(&self, x: &SpVector) -> Result<SpVector> {
        self.project(x)
    }

    /// `max{1/delta, c}` in the norm of `X_p` and `1/delta` in the weighted
    /// 2-norm, valid for systems whose blocks pass both conditions.
    fn analytic_upper(&self, mode: NormMode) -> Option<f64> {
        let admissible = self.system.conditions.iter().all(|(a, b)| a.pass && b.pass);
        if !admissible {
            return None;
        }
        match mode {
            NormMode::Xp => Some(prop12_bound(&self.system)),
            NormMode::TwoW => Some(1.0 / self.system.delta),
        }
    }
}

/// `max{1/delta, c}`.
pub fn prop12_bound(sys: &BlockSystem) -> f64 {
    (1.0 / sys.delta).max(sys.c)
}

/// `c^{-1} w'_j <= r(z_j) <= delta^{-1} w'_j` for one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioWindow {
    pub j: usize,
    pub lo: f64,
    pub r: f64,
    pub hi: f64,
    pub ok: bool,
}

pub fn ratio_bounds_check(sys: &BlockSystem) -> Vec<RatioWindow> {
    const SLACK: f64 = 1e-12;
    sys.blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let w = sys.induced[j];
            let lo = w / sys.c;
            let hi = w / sys.delta;
            let r = b.vector().ratio().unwrap_or(f64::NAN);
            RatioWindow {
                j: j + 1,
                lo,
                r,
                hi,
                ok: lo <= r * (1.0 + SLACK) && r <= hi * (1.0 + SLACK),
            }
        })
        .collect()
}

/// Per-block pieces of the norm estimate for `Px`:
/// `|z_j^*(x) z_j|_2 <= delta^{-1} |x_{E_j}|_2` and
/// `|z_j^*(x) z_j|_p <= c |x_{E_j}|_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub j: usize,
    pub lhs2: f64,
    pub rhs2: f64,
    pub lhsp: f64,
    pub rhsp: f64,
}

impl ComponentBound {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs2 <= self.rhs2 * (1.0 + rel_slack) && self.lhsp <= self.rhsp * (1.0 + rel_slack)
    }
}

pub fn component_bounds(proj: &BlockProjection, x: &SpVector) -> Result<Vec<ComponentBound>> {
    let sys = &proj.system;
    sys.blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let f = b.apply(x)?.abs();
            let local = x.restrict(b.eset());
            Ok(ComponentBound {
                j: j + 1,
                lhs2: f * b.vector().norm_2w(),
                rhs2: local.norm_2w() / sys.delta,
                lhsp: f * b.vector().norm_p(),
                rhsp: sys.c * local.norm_p(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::make_rosenthal;
    use crate::operators::{estimate_opnorm, SearchConfig};
    use crate::space::SupportSet;
    use approx::assert_relative_eq;

    fn single_rosenthal_projection() -> (Arc<WeightedSpace>, BlockProjection) {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap();
        let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        // omega = 1.0625 > 1, so the normalized block needs c = omega^{1/4}
        let c = r.omega_ratio();
        let b = Block::from_rosenthal(&r, 1.0, c).unwrap();
        let sys = BlockSystem::new(vec![b], 1.0, c).unwrap();
        (s, BlockProjection::new(sys))
    }

    #[test]
    fn worked_projection_example() {
        let (s, p) = single_rosenthal_projection();
        let x = SpVector::from_dense(&s, &[1.0, 1.0]).unwrap();
        let px = p.project(&x).unwrap();
        let expected = [18.0 / 17.0, 9.0 / 17.0];
        for (got, want) in px.to_dense().iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn fixes_blocks_and_kills_disjoint_vectors() {
        let s = WeightedSpace::new(3.0, vec![0.9, 0.4, 0.6, 0.3, 0.2]).unwrap();
        let b1 = Block::from_rosenthal(
            &make_rosenthal(&s, SupportSet::range(1, 2)).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let b2 = Block::from_rosenthal(
            &make_rosenthal(&s, SupportSet::range(3, 4)).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let z1 = b1.vector().clone();
        let sys = BlockSystem::new(vec![b1, b2], 1.0, 1.0).unwrap();
        let p = BlockProjection::new(sys);
        let pz = p.project(&z1).unwrap();
        for (a, b) in pz.to_dense().iter().zip(z1.to_dense()) {
            assert_relative_eq!(*a, b, max_relative = 1e-14);
        }
        assert!(p
            .project(&SpVector::basis(&s, 5).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn opnorm_of_unit_projection_is_one() {
        let s = WeightedSpace::new(4.0, vec![0.5, 0.5, 0.7, 0.2]).unwrap();
        let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        assert!(r.omega() <= 1.0);
        let b = Block::from_rosenthal(&r, 1.0, 1.0).unwrap();
        let p = BlockProjection::new(BlockSystem::new(vec![b], 1.0, 1.0).unwrap());
        let e = estimate_opnorm(
            &p,
            NormMode::Xp,
            SearchConfig {
                budget: 128,
                seed: 4,
            },
        );
        assert!(e.lower <= 1.0 + 1e-9, "{}", e.lower);
        assert!(e.lower >= 1.0 - 1e-9, "{}", e.lower);
        assert_eq!(e.upper, Some(1.0));
    }

    #[test]
    fn prop12_bound_formula() {
        let s = WeightedSpace::new(4.0, vec![0.5, 0.5]).unwrap();
        let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        let b = Block::from_rosenthal(&r, 1.0, 1.0).unwrap();
        for (delta, c, want) in [(1.0, 1.0, 1.0), (0.5, 3.0, 3.0), (0.25, 2.0, 4.0)] {
            let sys = BlockSystem::new(vec![b.clone()], delta, c).unwrap();
            assert_eq!(prop12_bound(&sys), want);
        }
    }

    #[test]
    fn ratio_window_extremal_and_violation() {
        let s = WeightedSpace::new(4.0, vec![0.5, 0.5, 0.9, 0.1]).unwrap();
        let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        let b = Block::from_rosenthal(&r, 1.0, 1.0).unwrap();
        let sys = BlockSystem::new(vec![b], 1.0, 1.0).unwrap();
        let w = ratio_bounds_check(&sys)[0];
        assert!(w.ok);
        assert_relative_eq!(w.lo, w.r, max_relative = 1e-12);
        assert_relative_eq!(w.hi, w.r, max_relative = 1e-12);

        // tiny mass on E fails (b), and the lower end of the window with it
        let z = SpVector::from_dense(&s, &[0.0, 0.0, 1e-3, 1.0])
            .unwrap()
            .normalized()
            .unwrap();
        let bad = Block::new_unchecked(
            SupportSet::range(3, 4),
            z,
            SupportSet::from(vec![3]),
            1e-3,
            1.0,
        )
        .unwrap();
        assert!(!bad.condition_b().pass);
        assert!(BlockSystem::new(vec![bad.clone()], 1e-3, 1.0).is_err());
        let sys = BlockSystem::new_unchecked(vec![bad], 1e-3, 1.0).unwrap();
        let w = ratio_bounds_check(&sys)[0];
        assert!(!w.ok);
        assert!(w.r < w.lo);
    }

    #[test]
    fn system_structure_errors() {
        let s = WeightedSpace::new(4.0, vec![0.5, 0.5, 0.5]).unwrap();
        let r = make_rosenthal(&s, SupportSet::range(1, 2)).unwrap();
        let b = Block::from_rosenthal(&r, 1.0, 1.0).unwrap();
        assert!(matches!(
            BlockSystem::new(vec![b.clone(), b.clone()], 1.0, 1.0),
            Err(XpError::Overlap(1, 2, "support"))
        ));
        let unnormalized = Block::new(
            SupportSet::range(1, 2),
            r.vector().scale(3.0),
            SupportSet::range(1, 2),
            1.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            BlockSystem::new(vec![unnormalized], 1.0, 1.0),
            Err(XpError::NotNormalized { index: 1, .. })
        ));
        assert!(BlockSystem::new(vec![], 1.0, 1.0).is_err());
    }

    #[test]
    fn component_bounds_hold_on_examples() {
        let s = WeightedSpace::new(3.0, vec![0.9, 0.4, 0.6, 0.3, 0.2, 0.8]).unwrap();
        let z = SpVector::from_dense(&s, &[0.3, -1.0, 0.5, 0.0, 0.0, 0.0])
            .unwrap()
            .normalized()
            .unwrap();
        let b = Block::new_unchecked(
            SupportSet::range(1, 3),
            z,
            SupportSet::range(1, 2),
            1.0,
            1.0,
        )
        .unwrap();
        let (delta, c) = (b.tight_delta(), b.tight_c());
        let sys = BlockSystem::new(vec![b], delta, c).unwrap();
        let p = BlockProjection::new(sys);
        let x = SpVector::from_dense(&s, &[1.0, 2.0, -3.0, 0.5, 0.1, 1.0]).unwrap();
        for cb in component_bounds(&p, &x).unwrap() {
            assert!(cb.holds(1e-12), "{cb:?}");
        }
    }
}
