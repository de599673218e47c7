//! Splitting a vector of a complemented subspace into a piece of small ratio
//! and a piece of large ratio.
//!
//! Given the projection `P` onto the subspace with `||P|| <= norm_p` and
//! `|P|_2 <= norm_p2`, constants are chosen so that
//!
//! * `eps' < min{eps, delta alpha}`
//! * `beta < min{(1 - delta norm_p2)/norm_p, eps/c}`
//! * `rho <= min{c^{-p/(p-2)} delta^{2/(p-2)}, beta^{p/(p-2)}}`
//! * `beta > alpha >= max{beta delta norm_p2/(1 - beta norm_p), beta^2 norm_p/(1 - delta norm_p2)}`
//!
//! and a normalized `x = Px` vanishing on `[1, N]` with `alpha < r(x) < beta`
//! splits as `y = P(x_E)`, `z = x - y` over the set `E` of large
//! coordinates. When `|x_E|_2 < delta |x|_2` one has `r(y) <= alpha` and
//! `r(z) >= beta`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{make_rosenthal, Block};
use crate::criteria::extract_Ei;
use crate::doc::{SystemDoc, VectorDoc};
use crate::error::{Result, XpError};
use crate::operators::search::sample_rng;
use crate::operators::{BlockProjection, BlockSystem, LinearOperator};
use crate::report::{Check, CriterionReport, Relation};
use crate::space::{SpVector, SupportSet, WeightedSpace};

/// Maximum number of halvings of `beta` while searching for a nonempty
/// `alpha` interval.
pub const MAX_HALVINGS: usize = 60;

/// Inflation applied to sampled norm estimates before they enter the
/// constant system (larger norms make it more conservative).
pub const DEFAULT_NORM_SAFETY: f64 = 1.05;

/// Tolerance on the preconditions `||x|| = 1` and `Px = x`.
pub const SPLIT_PRECONDITION_TOL: f64 = 1e-9;

/// A piece of norm at most this is treated as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Recorded, never checked: a finite truncation cannot test it.
pub const UNVERIFIED_ASSUMPTION: &str =
    "the witness criterion fails for (delta, c, eps) and eps', N as chosen; supplied by the caller";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConstants {
    pub delta: f64,
    pub c: f64,
    pub eps: f64,
    pub norm_p: f64,
    pub norm_p2: f64,
    pub p: f64,
    pub eps_prime: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    /// How often `beta` was halved before the `alpha` interval opened up.
    pub halvings: usize,
}

impl SplitConstants {
    /// `max{beta delta n2/(1 - beta n), beta^2 n/(1 - delta n2)}`.
    pub fn alpha_lower(&self) -> f64 {
        alpha_lower(self.beta, self.delta, self.norm_p, self.norm_p2)
    }

    /// The constant system, every inequality by direct substitution.
    pub fn check(&self) -> CriterionReport {
        let (d, c, e, n, n2, p) = (
            self.delta,
            self.c,
            self.eps,
            self.norm_p,
            self.norm_p2,
            self.p,
        );
        CriterionReport::new(vec![
            Check::new("premise: delta < 1/|P|_2", d, Relation::Lt, 1.0 / n2, 0.0),
            Check::new(
                "eps' < min{eps, delta alpha}",
                self.eps_prime,
                Relation::Lt,
                e.min(d * self.alpha),
                0.0,
            ),
            Check::new(
                "beta < min{(1 - delta |P|_2)/||P||, eps/c}",
                self.beta,
                Relation::Lt,
                ((1.0 - d * n2) / n).min(e / c),
                0.0,
            ),
            Check::new(
                "rho <= min{c^(-p/(p-2)) delta^(2/(p-2)), beta^(p/(p-2))}",
                self.rho,
                Relation::Le,
                rho_upper(c, d, self.beta, p),
                0.0,
            ),
            Check::new("beta > alpha", self.beta, Relation::Gt, self.alpha, 0.0),
            Check::new(
                "alpha >= lower bound",
                self.alpha,
                Relation::Ge,
                self.alpha_lower(),
                0.0,
            ),
        ])
    }
}

fn alpha_lower(beta: f64, delta: f64, n: f64, n2: f64) -> f64 {
    (beta * delta * n2 / (1.0 - beta * n)).max(beta * beta * n / (1.0 - delta * n2))
}

fn rho_upper(c: f64, delta: f64, beta: f64, p: f64) -> f64 {
    (c.powf(-p / (p - 2.0)) * delta.powf(2.0 / (p - 2.0))).min(beta.powf(p / (p - 2.0)))
}

/// Deterministic schedule: `beta` is half its bound, `alpha` the midpoint
/// of its interval (halving `beta` while that interval is empty), `rho` its
/// upper bound and `eps' = min{eps, delta alpha}/2`.
pub fn solve_constants(
    delta: f64,
    c: f64,
    eps: f64,
    norm_p: f64,
    norm_p2: f64,
    p: f64,
) -> Result<SplitConstants> {
    for (name, v) in [
        ("delta", delta),
        ("c", c),
        ("eps", eps),
        ("norm_p", norm_p),
        ("norm_p2", norm_p2),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(XpError::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if !(p > 2.0 && p.is_finite()) {
        return Err(XpError::InvalidExponent(p));
    }
    if delta * norm_p2 >= 1.0 {
        return Err(XpError::Infeasible(format!(
            "premise delta < 1/|P|_2 violated: delta = {delta}, 1/|P|_2 = {}",
            1.0 / norm_p2
        )));
    }
    let mut beta = 0.5 * ((1.0 - delta * norm_p2) / norm_p).min(eps / c);
    let mut halvings = 0;
    let alpha = loop {
        let lo = alpha_lower(beta, delta, norm_p, norm_p2);
        let mid = 0.5 * (lo + beta);
        if lo.is_finite() && lo >= 0.0 && mid < beta && mid >= lo {
            break mid;
        }
        if halvings == MAX_HALVINGS {
            return Err(XpError::Infeasible(format!(
                "alpha interval [max lower bound, beta) stayed empty after {MAX_HALVINGS} halvings of beta"
            )));
        }
        beta *= 0.5;
        halvings += 1;
    };
    let rho = rho_upper(c, delta, beta, p);
    let eps_prime = 0.5 * eps.min(delta * alpha);
    let k = SplitConstants {
        delta,
        c,
        eps,
        norm_p,
        norm_p2,
        p,
        eps_prime,
        rho,
        alpha,
        beta,
        halvings,
    };
    if let Some(f) = k.check().failures().next() {
        return Err(XpError::Invariant(format!(
            "constant system violated: {}",
            f.name
        )));
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub e_x: SupportSet,
    pub y: SpVector,
    pub z: SpVector,
    pub ratio_x: f64,
    pub ratio_y: Option<f64>,
    pub ratio_z: Option<f64>,
    /// `|x_E|_2 < delta |x|_2`.
    pub premise_met: bool,
    pub degenerate_y: bool,
    pub degenerate_z: bool,
    /// `max_n |(y + z - x)(n)|`, a rounding-level quantity.
    pub sum_residual: f64,
    /// Claims and intermediate bounds; the claims apply only under the premise.
    pub checks: CriterionReport,
    pub unverified_assumption: &'static str,
}

impl SplitResult {
    /// Premise met and a claim failed.
    pub fn is_counterexample(&self) -> bool {
        self.premise_met && !self.checks.verdict
    }
}

/// Splits `x` over `E_x`, after checking the preconditions.
pub fn split<P: LinearOperator + ?Sized>(
    x: &SpVector,
    n: usize,
    k: &SplitConstants,
    proj: &P,
    tol: f64,
) -> Result<SplitResult> {
    if !proj.space().same_as(x.space()) {
        return Err(XpError::SpaceMismatch);
    }
    let norm = x.xp_norm();
    if (norm - 1.0).abs() > SPLIT_PRECONDITION_TOL {
        return Err(XpError::Precondition(format!(
            "norm: ||x|| = {norm}, expected 1"
        )));
    }
    if let Some(&(m, _)) = x.entries().first().filter(|&&(m, _)| m <= n) {
        return Err(XpError::Precondition(format!(
            "support: x({m}) != 0 with N = {n}"
        )));
    }
    let ratio_x = x.ratio()?;
    if !(k.alpha < ratio_x && ratio_x < k.beta) {
        return Err(XpError::Precondition(format!(
            "ratio window: r(x) = {ratio_x} outside ({}, {})",
            k.alpha, k.beta
        )));
    }
    let px = proj.apply(x)?;
    let miss = px.sub(x)?.xp_norm();
    if miss > SPLIT_PRECONDITION_TOL {
        return Err(XpError::Precondition(format!(
            "range membership: ||Px - x|| = {miss}"
        )));
    }

    let space = x.space();
    let p = space.p();
    let e_x = extract_Ei(x, &x.support(), k.rho)?;
    let xe = x.restrict(&e_x);
    let xc = x.restrict_complement(&e_x);
    let y = proj.apply(&xe)?;
    let z = x.sub(&y)?;
    let sum_residual = y
        .add(&z)?
        .sub(x)?
        .entries()
        .iter()
        .fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
    let premise_met = xe.norm_2w() < k.delta * x.norm_2w();
    // pieces at rounding level carry no meaningful ratio
    let negligible = |v: &SpVector| v.xp_norm() <= DEGENERATE_TOL;
    let ratio_y = if negligible(&y) { None } else { y.ratio().ok() };
    let ratio_z = if negligible(&z) { None } else { z.ratio().ok() };

    let mut claim_y = Check::new(
        "r(y) <= alpha",
        ratio_y.unwrap_or(f64::NAN),
        Relation::Le,
        k.alpha,
        tol,
    );
    let mut claim_z = Check::new(
        "r(z) >= beta",
        ratio_z.unwrap_or(f64::NAN),
        Relation::Ge,
        k.beta,
        tol,
    );
    if !premise_met || ratio_y.is_none() {
        claim_y = claim_y.not_applicable();
    }
    if !premise_met || ratio_z.is_none() {
        claim_z = claim_z.not_applicable();
    }
    let checks = CriterionReport::new(vec![
        claim_y,
        claim_z,
        Check::new(
            "|x_(E^c)|_p <= rho^((p-2)/p)",
            xc.norm_p(),
            Relation::Le,
            k.rho.powf((p - 2.0) / p),
            tol,
        ),
        Check::new("|x|_2 <= beta", x.norm_2w(), Relation::Le, k.beta, tol),
        Check::new("y + z = x", sum_residual, Relation::Le, 1e-12, 0.0),
    ]);
    Ok(SplitResult {
        e_x,
        degenerate_y: ratio_y.is_none(),
        degenerate_z: ratio_z.is_none(),
        y,
        z,
        ratio_x,
        ratio_y,
        ratio_z,
        premise_met,
        sum_residual,
        checks,
        unverified_assumption: UNVERIFIED_ASSUMPTION,
    })
}

/// A generated instance: a projection, its certified norms and a vector.
#[derive(Debug, Clone)]
pub struct SplitInstance {
    pub projection: BlockProjection,
    pub n: usize,
    pub constants: SplitConstants,
    pub x: SpVector,
}

/// Everything needed to replay a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRepro {
    pub system: SystemDoc,
    pub x: VectorDoc,
    #[serde(rename = "N")]
    pub n: usize,
    pub constants: SplitConstants,
    pub seed: u64,
    pub index: usize,
}

impl SplitRepro {
    pub fn new(inst: &SplitInstance, seed: u64, index: usize) -> Self {
        Self {
            system: SystemDoc::from_system(inst.projection.system()),
            x: VectorDoc::from_vector(&inst.x),
            n: inst.n,
            constants: inst.constants,
            seed,
            index,
        }
    }

    /// Writes `split-repro-<seed>-<index>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("split-repro-{}-{}.json", self.seed, self.index));
        let body = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(&path, body)?;
        Ok(path)
    }
}

/// Builds instance `index` of stream `seed`.
///
/// The projection is onto normalized extremal blocks with `E_j = I_j` and
/// `omega(I_j) <= 1`, so `||P|| <= 1` and `|P|_2 <= 1` are certified and the
/// norms are taken as 1. The vector is a spike on tiny weights (inside
/// `E_x`, carrying the p-mass) plus many low-amplitude blocks (outside
/// `E_x`, carrying the 2-mass), scaled so that `r(x)` hits a target inside
/// `(alpha, beta)`. Some
/// instances add a medium block that may land in `E_x` and break the premise.
pub fn gen_split_instance(seed: u64, index: usize) -> Result<SplitInstance> {
    let mut rng = sample_rng(seed, index as u64);
    let p = rng.random_range(2.5..6.0);
    let delta = rng.random_range(0.15..0.9);
    let c = rng.random_range(0.5..2.0);
    let eps = rng.random_range(0.05..1.0);
    let k = solve_constants(delta, c, eps, 1.0, 1.0, p)?;

    // target ratio
    let t = k.alpha + (k.beta - k.alpha) * rng.random_range(0.2..0.8);
    let e_exp = (p - 2.0) / (2.0 * p);

    // spread blocks: `b k_j = t / sqrt(Omega)` must sit below the threshold
    // rho t^{-2/(p-2)}, i.e. Omega > (t^{p/(p-2)} / rho)^2
    let need = (t.powf(p / (p - 2.0)) / k.rho).powi(2) * rng.random_range(2.0..6.0);
    let per_block = rng.random_range(0.4..1.0);
    let blocks_wanted = ((need / per_block).ceil() as usize).clamp(3, 3000);
    let block_len = rng.random_range(2..=4usize);

    let head = rng.random_range(1..=4usize);
    let spikes = rng.random_range(1..=3usize);
    let medium = rng.random_bool(0.3);

    let mut weights = vec![1.0; head];
    let spike_w: Vec<f64> = (0..spikes)
        .map(|_| k.delta * k.alpha * 10f64.powf(-rng.random_range(2.0..4.0)))
        .collect();
    weights.extend(&spike_w);
    let mut spread_sets = Vec::with_capacity(blocks_wanted);
    for _ in 0..blocks_wanted {
        let theta = per_block * rng.random_range(0.8..1.0);
        let w = (theta / block_len as f64).powf(e_exp);
        let lo = weights.len() + 1;
        weights.extend(std::iter::repeat_n(w, block_len));
        spread_sets.push(SupportSet::range(lo, weights.len()));
    }
    let medium_set = medium.then(|| {
        let lo = weights.len() + 1;
        weights.extend([0.3, 0.2]);
        SupportSet::range(lo, weights.len())
    });
    let space = WeightedSpace::new(p, weights)?;

    let mut blocks = Vec::new();
    let mut coeffs = Vec::new();
    for j in 0..spikes {
        let b = Block::from_rosenthal(
            &make_rosenthal(&space, SupportSet::from(vec![head + 1 + j]))?,
            1.0,
            1.0,
        )?;
        blocks.push(b);
        coeffs.push(rng.random_range(0.3..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 });
    }
    let raw: Vec<f64> = (0..spread_sets.len())
        .map(|_| rng.random_range(0.5..1.5))
        .collect();
    let raw_norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    for (set, r) in spread_sets.iter().zip(&raw) {
        let rb = make_rosenthal(&space, set.clone())?;
        let b = Block::from_rosenthal(&rb, 1.0, 1.0)?;
        // 2-mass t_j = t r_j/|r|; coefficient t_j / omega^{e}
        let tj = t * r / raw_norm;
        coeffs.push(tj / rb.omega_ratio() * if rng.random_bool(0.5) { 1.0 } else { -1.0 });
        blocks.push(b);
    }
    if let Some(set) = medium_set {
        let rb = make_rosenthal(&space, set)?;
        blocks.push(Block::from_rosenthal(&rb, 1.0, 1.0)?);
        coeffs.push(rng.random_range(0.0..0.5) * t);
    }
    let vectors: Vec<SpVector> = blocks
        .iter()
        .map(|b| crate::blocks::BlockFunctional::vector(b).clone())
        .collect();
    // spike part S and the rest V; r(S + lambda V) rises from r(S) ~ 0, so
    // bisect lambda onto the target ratio t
    let mut spike_c = coeffs.clone();
    spike_c[spikes..].iter_mut().for_each(|a| *a = 0.0);
    let mut rest_c = coeffs;
    rest_c[..spikes].iter_mut().for_each(|a| *a = 0.0);
    let s_part = SpVector::combination(&space, &spike_c, &vectors)?;
    let v_part = SpVector::combination(&space, &rest_c, &vectors)?;
    let at = |lambda: f64| s_part.axpy(lambda, &v_part);
    let (mut lo, mut hi) = (0.0, 1.0);
    while at(hi)?.ratio()? < t && hi < 1e12 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if at(mid)?.ratio()? < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = at(0.5 * (lo + hi))?.normalized()?;
    let projection = BlockProjection::new(BlockSystem::new(blocks, 1.0, 1.0)?);
    Ok(SplitInstance {
        projection,
        n: head,
        constants: k,
        x,
    })
}

/// Tally over generated instances.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitSweep {
    pub generated: usize,
    pub preconditions_met: usize,
    pub premise_met: usize,
    pub claims_held: usize,
    pub counterexamples: usize,
    pub repro_files: Vec<String>,
}

/// Generates `count` instances, splits those meeting the preconditions and
/// writes a repro file into `repro_dir` for every counterexample.
pub fn split_sweep(seed: u64, count: usize, tol: f64, repro_dir: &Path) -> Result<SplitSweep> {
    let mut s = SplitSweep::default();
    for index in 0..count {
        let inst = gen_split_instance(seed, index)?;
        s.generated += 1;
        let Ok(res) = split(&inst.x, inst.n, &inst.constants, &inst.projection, tol) else {
            continue;
        };
        s.preconditions_met += 1;
        if res.premise_met {
            s.premise_met += 1;
            if res.is_counterexample() {
                s.counterexamples += 1;
                let path = SplitRepro::new(&inst, seed, index)
                    .write(repro_dir)
                    .map_err(|e| XpError::InvalidParameter(format!("cannot write repro: {e}")))?;
                s.repro_files.push(path.display().to_string());
            } else {
                s.claims_held += 1;
            }
        }
    }
    Ok(s)
}

/// Directory for repro files: `XPLAB_REPRO_DIR` or a temp subdirectory.
pub fn default_repro_dir() -> PathBuf {
    std::env::var_os("XPLAB_REPRO_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("xplab-repro"))
}

/// Shared space of an instance, for callers building their own vectors.
pub fn instance_space(inst: &SplitInstance) -> &Arc<WeightedSpace> {
    inst.projection.system().space()
}
