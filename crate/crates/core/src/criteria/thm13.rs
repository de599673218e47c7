//! The quantitative witness criterion for containing a complemented copy of
//! `X_p`, its generator, and the internals of its proof.

use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::blocks::{make_rosenthal, BlockFunctional};
use crate::error::{Result, XpError};
use crate::operators::search::sample_rng;
use crate::operators::BlockProjection;
use crate::report::{Check, CriterionReport, Relation};
use crate::space::{SpVector, SupportSet, WeightedSpace};

/// Witnesses must have `||x|| = 1` to this absolute tolerance.
pub const WITNESS_NORM_TOL: f64 = 1e-9;

/// A candidate `x` with its set `E`, cutoff `N` and constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Thm13Witness {
    pub x: SpVector,
    pub e: SupportSet,
    pub n: usize,
    pub c: f64,
    pub delta: f64,
    pub eps: f64,
    pub eps_prime: f64,
}

impl Thm13Witness {
    fn validate(&self) -> Result<()> {
        let norm = self.x.xp_norm();
        if (norm - 1.0).abs() > WITNESS_NORM_TOL {
            return Err(XpError::NotNormalized { index: 0, norm });
        }
        for (name, v) in [
            ("c", self.c),
            ("delta", self.delta),
            ("eps", self.eps),
            ("eps_prime", self.eps_prime),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(XpError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.eps_prime >= self.eps {
            return Err(XpError::InvalidParameter(format!(
                "need eps' < eps, got eps' = {} and eps = {}",
                self.eps_prime, self.eps
            )));
        }
        if self.n == 0 {
            return Err(XpError::InvalidParameter("N must be at least 1".into()));
        }
        self.x.space().check_set(&self.e)?;
        if let Some(m) = self.e.first().filter(|&m| m <= self.n) {
            return Err(XpError::InvalidParameter(format!(
                "E contains {m} <= N = {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Evaluates a), b) and the three inequalities of c).
///
/// a) is strict and evaluated exactly; the others allow relative slack `tol`.
pub fn check_thm13(w: &Thm13Witness, tol: f64) -> Result<CriterionReport> {
    w.validate()?;
    let space = w.x.space();
    let head = w.x.head_proj(w.n).xp_norm();
    let xe2 = w.x.restrict(&w.e).norm_2w();
    let x2 = w.x.norm_2w();
    let om = space.omega_ratio(&w.e)?;
    Ok(CriterionReport::new(vec![
        Check::new(
            "a: ||x_[1,N]|| < 1/N",
            head,
            Relation::Lt,
            1.0 / w.n as f64,
            tol,
        ),
        Check::new(
            "b: |x_E|_2 >= delta |x|_2",
            xe2,
            Relation::Ge,
            w.delta * x2,
            tol,
        ),
        Check::new("c1: eps >= c |x_E|_2", w.eps, Relation::Ge, w.c * xe2, tol),
        Check::new(
            "c2: c |x_E|_2 >= omega(E)^e",
            w.c * xe2,
            Relation::Ge,
            om,
            tol,
        ),
        Check::new("c3: omega(E)^e >= eps'", om, Relation::Ge, w.eps_prime, tol),
    ]))
}

/// Builds `count` witnesses as normalized extremal blocks on disjoint sets
/// past `n`, with `eps' = eps / 2`.
///
/// A normalized extremal block on `E` with `omega(E) <= 1` has `|x|_p = 1`
/// and `|x|_2 = omega(E)^{(p-2)/2p}`, so with `E` the support the checks
/// reduce to `delta <= 1`, `c >= 1` and `omega(E)^{(p-2)/2p}` in
/// `[eps/2, min{eps/c, 1}]`. Sets are grown greedily over the tail indices
/// in a seeded random order.
pub fn gen_thm13_witnesses(
    space: &Arc<WeightedSpace>,
    c: f64,
    delta: f64,
    eps: f64,
    count: usize,
    seed: u64,
    n: usize,
) -> Result<Vec<Thm13Witness>> {
    for (name, v) in [("c", c), ("delta", delta), ("eps", eps)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(XpError::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if delta > 1.0 {
        return Err(XpError::Infeasible(format!(
            "delta = {delta} > 1 cannot hold with E = supp x"
        )));
    }
    let lo = eps / 2.0;
    let hi = (eps / c).min(1.0);
    if c < 1.0 || lo > hi {
        return Err(XpError::Infeasible(format!(
            "window [eps/2, min(eps/c, 1)] = [{lo}, {hi}] needs 1 <= c <= 2 and eps/2 <= 1, got c = {c}"
        )));
    }
    if n == 0 || n >= space.dim() {
        return Err(XpError::InvalidParameter(format!(
            "N = {n} leaves no tail in 1..={}",
            space.dim()
        )));
    }

    let inv = 1.0 / space.ratio_exp();
    let (omega_lo, omega_hi) = (lo.powf(inv), hi.powf(inv));
    let mut tail: Vec<usize> = (n + 1..=space.dim()).collect();
    tail.shuffle(&mut sample_rng(seed, 0));
    let usable: Vec<usize> = tail
        .into_iter()
        .filter(|&m| space.omega_weight(m) <= omega_hi)
        .collect();

    let mut sets = Vec::new();
    let mut cur = Vec::new();
    let mut mass = 0.0;
    for &m in &usable {
        if sets.len() == count {
            break;
        }
        let om = space.omega_weight(m);
        if mass + om > omega_hi {
            continue;
        }
        cur.push(m);
        mass += om;
        if mass >= omega_lo {
            sets.push(SupportSet::from(std::mem::take(&mut cur)));
            mass = 0.0;
        }
    }
    if sets.len() < count {
        let total: f64 = usable.iter().map(|&m| space.omega_weight(m)).sum();
        let single = usable
            .iter()
            .map(|&m| space.omega_weight(m))
            .fold(f64::INFINITY, f64::min);
        let e = space.ratio_exp();
        return Err(XpError::Infeasible(format!(
            "built {} of {count} sets; tail past N = {n} reaches omega^e in [{}, {}] \
             (single index to whole usable tail), window is [{lo}, {hi}]",
            sets.len(),
            if single.is_finite() {
                single.powf(e)
            } else {
                0.0
            },
            total.powf(e),
        )));
    }

    sets.into_iter()
        .map(|e| {
            let x = make_rosenthal(space, e.clone())?.vector().normalized()?;
            Ok(Thm13Witness {
                x,
                e,
                n,
                c,
                delta,
                eps,
                eps_prime: lo,
            })
        })
        .collect()
}

/// `E = {j in F : |y(j)| >= rho w_j^{2/(p-2)} |y|_2^{-2/(p-2)}}`, with
/// exact comparisons (ties included).
#[allow(non_snake_case)]
pub fn extract_Ei(y: &SpVector, f: &SupportSet, rho: f64) -> Result<SupportSet> {
    if y.is_zero() {
        return Err(XpError::ZeroVector("extract_Ei"));
    }
    if !(rho > 0.0) {
        return Err(XpError::InvalidParameter(format!(
            "rho must be positive, got {rho}"
        )));
    }
    let space = y.space();
    let scale = rho * y.norm_2w().powf(-space.block_exp());
    Ok(y.entries()
        .iter()
        .filter(|&&(n, v)| f.contains(n) && v.abs() >= scale * space.block_coeff(n))
        .map(|&(n, _)| n)
        .collect())
}

/// The bounds established for a normalized `y` and its set `E`:
///
/// * (i) `omega(E) <= rho^{-2} delta^{-4/(p-2)} |y_E|_2^{2p/(p-2)}`,
///   applicable when `|y_E|_2 >= delta |y|_2`;
/// * (ii) `sum_{j not in E} |y(j)|^p <= rho^{p-2}`;
/// * (iii-a) `||y_E|| >= (1 - rho^{p-2})^{1/p}`, applicable when `|y|_p = 1`
///   and `rho < 1`;
/// * (iii-b) `|y_{F \ E}|_p <= rho^{1-2/p}`.
pub fn check_proof_bounds(
    y: &SpVector,
    f: &SupportSet,
    rho: f64,
    delta: f64,
    tol: f64,
) -> Result<CriterionReport> {
    let norm = y.xp_norm();
    if (norm - 1.0).abs() > WITNESS_NORM_TOL {
        return Err(XpError::NotNormalized { index: 0, norm });
    }
    if !y.is_supported_on(f) {
        return Err(XpError::Precondition("y is not supported in F".into()));
    }
    let space = y.space();
    let p = space.p();
    let e = extract_Ei(y, f, rho)?;
    let ye = y.restrict(&e);
    let rest = y.restrict_complement(&e);
    let ye2 = ye.norm_2w();

    let omega = space.omega(&e)?;
    let bound_i = rho.powi(-2) * delta.powf(-4.0 / (p - 2.0)) * ye2.powf(space.omega_exp());
    let mut i = Check::new("i: omega(E) <= bound", omega, Relation::Le, bound_i, tol);
    if ye2 < delta * y.norm_2w() {
        i = i.not_applicable();
    }
    let tail: f64 = rest.entries().iter().map(|&(_, v)| v.abs().powf(p)).sum();
    let ii = Check::new(
        "ii: tail p-mass <= rho^(p-2)",
        tail,
        Relation::Le,
        rho.powf(p - 2.0),
        tol,
    );
    let mut iii_a = Check::new(
        "iii-a: ||y_E|| >= (1 - rho^(p-2))^(1/p)",
        ye.xp_norm(),
        Relation::Ge,
        (1.0 - rho.powf(p - 2.0)).max(0.0).powf(1.0 / p),
        tol,
    );
    if (y.norm_p() - 1.0).abs() > WITNESS_NORM_TOL || rho >= 1.0 {
        iii_a = iii_a.not_applicable();
    }
    let iii_b = Check::new(
        "iii-b: |y_(F\\E)|_p <= rho^(1-2/p)",
        y.restrict(&f.difference(&e)).norm_p(),
        Relation::Le,
        rho.powf(1.0 - 2.0 / p),
        tol,
    );
    Ok(CriterionReport::new(vec![i, ii, iii_a, iii_b]))
}

/// One index of the `M_K` partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MkRow {
    pub i: usize,
    /// `|y_i^*(y_{i|E_i})|`.
    pub functional: f64,
    /// `K |y_{i|E_i}|_2 / |y_i|_2`.
    pub rhs: f64,
    pub in_mk: bool,
    /// `|y_{i|E_i}|_2 / |y_i|_2`.
    pub mass_ratio: f64,
    /// `mass_ratio >= 1/2K`.
    pub in_e_half_k: bool,
    /// `functional >= 1/2`.
    pub guard: bool,
    /// `in_mk && guard` implies `in_e_half_k`.
    pub implication: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MkFamily {
    pub k: f64,
    pub rows: Vec<MkRow>,
    pub in_mk: Vec<usize>,
    pub out_mk: Vec<usize>,
}

impl MkFamily {
    pub fn implication_holds(&self) -> bool {
        self.rows.iter().all(|r| r.implication)
    }
}

/// Partitions the blocks of `proj` by
/// `|y_i^*(y_{i|E_i})| <= K |y_{i|E_i}|_2 / |y_i|_2`, with `y_i^*` the
/// projection's functionals and `E_i` supplied per block.
pub fn mk_family(k: f64, e_sets: &[SupportSet], proj: &BlockProjection) -> Result<MkFamily> {
    let blocks = proj.system().blocks();
    if e_sets.len() != blocks.len() {
        return Err(XpError::InvalidParameter(format!(
            "{} sets for {} blocks",
            e_sets.len(),
            blocks.len()
        )));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(XpError::InvalidParameter(format!(
            "K must be nonnegative, got {k}"
        )));
    }
    let mut rows = Vec::with_capacity(blocks.len());
    for (j, (b, e)) in blocks.iter().zip(e_sets).enumerate() {
        let y = b.vector();
        let ye = y.restrict(e);
        let functional = b.apply(&ye)?.abs();
        let mass_ratio = ye.norm_2w() / y.norm_2w();
        let rhs = k * mass_ratio;
        let in_mk = functional <= rhs;
        let in_e_half_k = k > 0.0 && mass_ratio >= (1.0 - 1e-12) / (2.0 * k);
        let guard = functional >= 0.5;
        rows.push(MkRow {
            i: j + 1,
            functional,
            rhs,
            in_mk,
            mass_ratio,
            in_e_half_k,
            guard,
            implication: !(in_mk && guard) || in_e_half_k,
        });
    }
    let in_mk = rows.iter().filter(|r| r.in_mk).map(|r| r.i).collect();
    let out_mk = rows.iter().filter(|r| !r.in_mk).map(|r| r.i).collect();
    Ok(MkFamily {
        k,
        rows,
        in_mk,
        out_mk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::Block;
    use crate::operators::BlockSystem;

    #[test]
    fn rosenthal_witness_example() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.9, 0.2, 0.3, 0.25]).unwrap();
        let e = SupportSet::range(3, 5);
        let om = s.omega_ratio(&e).unwrap();
        assert!(s.omega(&e).unwrap() <= 1.0);
        let x = make_rosenthal(&s, e.clone())
            .unwrap()
            .vector()
            .normalized()
            .unwrap();
        let w = Thm13Witness {
            x,
            e,
            n: 2,
            c: 1.0,
            delta: 1.0,
            eps: om * 1.5,
            eps_prime: om * 0.5,
        };
        let r = check_thm13(&w, 1e-9).unwrap();
        assert!(r.verdict, "{r:?}");
        assert_eq!(r.checks[0].lhs, 0.0);
        let b = &r.checks[1];
        assert!((b.lhs - b.rhs).abs() < 1e-15);
        let c2 = &r.checks[3];
        assert!((c2.lhs - c2.rhs).abs() < 1e-12 * c2.rhs);

        let narrow = Thm13Witness {
            eps: om * 0.9,
            eps_prime: om * 0.5,
            ..w
        };
        assert!(!check_thm13(&narrow, 1e-9).unwrap().verdict);
    }

    #[test]
    fn head_too_large() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap();
        let w = Thm13Witness {
            x: SpVector::basis(&s, 1).unwrap(),
            e: SupportSet::from(vec![2]),
            n: 1,
            c: 1.0,
            delta: 0.5,
            eps: 1.0,
            eps_prime: 0.5,
        };
        let r = check_thm13(&w, 1e-9).unwrap();
        assert!(!r.checks[0].pass);
        assert_eq!(r.checks[0].lhs, 1.0);
    }

    #[test]
    fn concentration_fails_for_spread_x() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5, 0.5]).unwrap();
        let x = SpVector::from_dense(&s, &[0.0, 1.0, 1.0])
            .unwrap()
            .normalized()
            .unwrap();
        let w = Thm13Witness {
            x,
            e: SupportSet::from(vec![2]),
            n: 1,
            c: 1.0,
            delta: 1.2,
            eps: 1.0,
            eps_prime: 0.1,
        };
        assert!(!check_thm13(&w, 1e-9).unwrap().checks[1].pass);
    }

    #[test]
    fn unnormalized_witness_rejected() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap();
        let w = Thm13Witness {
            x: SpVector::basis(&s, 2).unwrap().scale(3.0),
            e: SupportSet::from(vec![2]),
            n: 1,
            c: 1.0,
            delta: 1.0,
            eps: 1.0,
            eps_prime: 0.5,
        };
        assert!(matches!(
            check_thm13(&w, 1e-9),
            Err(XpError::NotNormalized { .. })
        ));
    }

    #[test]
    fn generator_constant_weights() {
        let s = WeightedSpace::new(4.0, vec![0.5; 12]).unwrap();
        let ws = gen_thm13_witnesses(&s, 1.0, 1.0, 0.6, 3, 7, 2).unwrap();
        assert_eq!(ws.len(), 3);
        for w in &ws {
            assert_eq!(w.e.len(), 1);
            assert_eq!(w.eps_prime, 0.3);
            assert!(check_thm13(w, 1e-9).unwrap().verdict);
        }
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(ws[i].e.is_disjoint(&ws[j].e));
            }
        }
    }

    #[test]
    fn generator_infeasible() {
        let s = WeightedSpace::new(4.0, vec![0.01; 8]).unwrap();
        let err = gen_thm13_witnesses(&s, 1.0, 1.0, 0.9, 1, 0, 1).unwrap_err();
        assert!(matches!(err, XpError::Infeasible(_)), "{err}");
        assert!(gen_thm13_witnesses(&s, 3.0, 1.0, 0.1, 1, 0, 1).is_err());
        assert!(gen_thm13_witnesses(&s, 1.0, 1.5, 0.1, 1, 0, 1).is_err());
    }

    #[test]
    fn extract_examples() {
        let s = WeightedSpace::new(4.0, vec![1.0, 0.5]).unwrap();
        let y = SpVector::from_dense(&s, &[1.0, 2.0]).unwrap();
        let f = s.full_set();
        assert_eq!(extract_Ei(&y, &f, 0.1).unwrap(), f);
        assert_eq!(extract_Ei(&y, &f, 1e-12).unwrap(), f);
        assert!(extract_Ei(&y, &f, 1e12).unwrap().is_empty());
        // |t|_2 = 1, so t(2) = 2 sits exactly at the threshold rho w_2 when rho = 4
        let t = SpVector::from_dense(&s, &[0.0, 2.0]).unwrap();
        assert_eq!(t.norm_2w(), 1.0);
        assert_eq!(extract_Ei(&t, &f, 4.0).unwrap().as_slice(), &[2]);
        assert!(extract_Ei(&t, &f, 4.0 + 1e-12).unwrap().is_empty());
        assert!(extract_Ei(&SpVector::zero(&s), &f, 0.1).is_err());
    }

    #[test]
    fn proof_bounds_on_rosenthal_block() {
        let s = WeightedSpace::new(3.0, vec![0.4, 0.3, 0.2, 0.5]).unwrap();
        let y = make_rosenthal(&s, s.full_set())
            .unwrap()
            .vector()
            .normalized()
            .unwrap();
        let r = check_proof_bounds(&y, &s.full_set(), 0.01, 0.9, 1e-12).unwrap();
        assert!(r.verdict, "{r:?}");
        assert_eq!(r.get("ii: tail p-mass <= rho^(p-2)").unwrap().lhs, 0.0);
    }

    #[test]
    fn proof_bounds_rho_one_boundary() {
        let s = WeightedSpace::new(4.0, vec![0.1, 0.1, 0.1]).unwrap();
        let y = SpVector::from_dense(&s, &[1.0, 0.5, 0.2])
            .unwrap()
            .normalized()
            .unwrap();
        let r = check_proof_bounds(&y, &s.full_set(), 1.0, 0.5, 1e-12).unwrap();
        let ii = r.get("ii: tail p-mass <= rho^(p-2)").unwrap();
        assert!(ii.pass);
        assert!(r.verdict, "{r:?}");
    }

    #[test]
    fn mk_membership() {
        let s = WeightedSpace::new(4.0, vec![0.5, 0.4, 0.3, 0.6]).unwrap();
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
        let sets = vec![b1.support().clone(), b2.support().clone()];
        let p = BlockProjection::new(BlockSystem::new(vec![b1, b2], 1.0, 1.0).unwrap());
        let fam = mk_family(1.0, &sets, &p).unwrap();
        assert_eq!(fam.in_mk, vec![1, 2]);
        assert!(fam.implication_holds());
        let fam = mk_family(0.5, &sets, &p).unwrap();
        assert!(fam.in_mk.is_empty());
        let fam = mk_family(0.0, &sets, &p).unwrap();
        assert!(fam.in_mk.is_empty());
        assert!(fam.implication_holds());
    }
}
