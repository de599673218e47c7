//! Ratio-based criteria: the ℓ2/ℓp dichotomy, the orthogonal-projection
//! condition, finite-window surrogates of the asymptotic lower bound on
//! projections, and the approximation-defect experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Result, XpError};
use crate::operators::search::{gaussian_point, sample_rng};
use crate::operators::{
    certified_h_lower, estimate_h_inf, estimate_opnorm, estimate_r_sup, BlockProjection,
    GramProjector, NormMode, SearchConfig,
};
use crate::report::{Check, CriterionReport, Relation};
use crate::space::SpVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KpClass {
    Ell2Like,
    EllpLike,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpReport {
    pub class: KpClass,
    pub c: f64,
    pub n: usize,
    /// Sampled `h(span V)`.
    pub h_inf: f64,
    /// Sampled `r(span Q_N V)`; zero when every tail is zero.
    pub r_sup_tail: f64,
    /// How many tail vectors entered the span (a maximal independent subset).
    pub tail_vectors: usize,
}

/// Classifies `span V` by the ratio: ℓ2-like when `h >= C`, ℓp-like when the
/// span of the tails past `N` has `r < C`, mixed otherwise.
pub fn kp_classify(v: &[SpVector], n: usize, c: f64, cfg: SearchConfig) -> Result<KpReport> {
    if !(c > 0.0) {
        return Err(XpError::InvalidParameter(format!(
            "C must be positive, got {c}"
        )));
    }
    let h_inf = estimate_h_inf(v, cfg)?.value;
    let mut tails: Vec<SpVector> = Vec::new();
    for x in v {
        let t = x.tail_proj(n);
        if t.is_zero() {
            continue;
        }
        tails.push(t);
        if GramProjector::new(tails.clone()).is_err() {
            tails.pop();
        }
    }
    let r_sup_tail = if tails.is_empty() {
        0.0
    } else {
        estimate_r_sup(&tails, cfg)?.value
    };
    let class = if h_inf >= c {
        KpClass::Ell2Like
    } else if r_sup_tail < c {
        KpClass::EllpLike
    } else {
        KpClass::Mixed
    };
    Ok(KpReport {
        class,
        c,
        n,
        h_inf,
        r_sup_tail,
        tail_vectors: tails.len(),
    })
}

/// One sample of the orthogonal-projection condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop24Row {
    pub index: usize,
    pub ratio: f64,
    /// `ratio > beta`; rows below the threshold are not tested.
    pub considered: bool,
    /// `min_{z in span Z} |x - z|_2 = |x - Qx|_2`.
    pub distance: f64,
    /// `eps |x|_2`.
    pub rhs_b: f64,
    pub pass_b: bool,
    /// `eps ||x||`.
    pub rhs_b_prime: f64,
    pub pass_b_prime: bool,
    /// For `y = x - Qx` (in the kernel): `r(y)`, `|y|_2` and its distance to
    /// the span, which equals `|y|_2` by orthogonality.
    pub kernel_ratio: Option<f64>,
    pub kernel_norm2: f64,
    pub kernel_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop24Report {
    pub h_inf: f64,
    /// `min{1, min_j r(z_j)}` when `Z` is pairwise disjoint.
    pub certified_h: Option<f64>,
    pub condition_a: Check,
    pub rows: Vec<Prop24Row>,
    pub condition_b: bool,
    pub condition_b_prime: bool,
}

impl Prop24Report {
    pub fn as_criterion(&self, tol: f64) -> CriterionReport {
        let considered = self.rows.iter().filter(|r| r.considered).count() as f64;
        let passed_b = self
            .rows
            .iter()
            .filter(|r| r.considered && r.pass_b)
            .count() as f64;
        let passed_bp = self
            .rows
            .iter()
            .filter(|r| r.considered && r.pass_b_prime)
            .count() as f64;
        CriterionReport::new(vec![
            self.condition_a.clone(),
            Check::new(
                "b: samples passing",
                passed_b,
                Relation::Ge,
                considered,
                tol,
            ),
            Check::new(
                "b': samples passing",
                passed_bp,
                Relation::Ge,
                considered,
                tol,
            ),
        ])
    }
}

/// Tests a) `h(span Z) >= beta'` and, on each sample with `r(x) > beta`,
/// b) `|x - Qx|_2 < eps |x|_2` and b') `|x - Qx|_2 < eps ||x||`.
pub fn check_prop24(
    z: &[SpVector],
    samples: &[SpVector],
    eps: f64,
    beta: f64,
    beta_prime: f64,
    cfg: SearchConfig,
    tol: f64,
) -> Result<Prop24Report> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(XpError::InvalidParameter(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    let q = GramProjector::new(z.to_vec())?;
    let h_inf = estimate_h_inf(z, cfg)?.value;
    let certified_h = certified_h_lower(z).ok();
    let condition_a = Check::new("a: h(Z) >= beta'", h_inf, Relation::Ge, beta_prime, tol);
    let mut rows = Vec::with_capacity(samples.len());
    for (index, x) in samples.iter().enumerate() {
        let ratio = x.ratio()?;
        let qx = q.project(x)?;
        let y = x.sub(&qx)?;
        let distance = y.norm_2w();
        let rhs_b = eps * x.norm_2w();
        let rhs_b_prime = eps * x.xp_norm();
        let kernel_ratio = y.ratio().ok();
        rows.push(Prop24Row {
            index,
            ratio,
            considered: ratio > beta,
            distance,
            rhs_b,
            pass_b: distance < rhs_b,
            rhs_b_prime,
            pass_b_prime: distance < rhs_b_prime,
            kernel_ratio,
            kernel_norm2: distance,
            kernel_distance: q.distance(&y)?,
        });
    }
    let condition_b = rows.iter().all(|r| !r.considered || r.pass_b);
    let condition_b_prime = rows.iter().all(|r| !r.considered || r.pass_b_prime);
    Ok(Prop24Report {
        h_inf,
        certified_h,
        condition_a,
        rows,
        condition_b,
        condition_b_prime,
    })
}

/// Finite-window surrogates for the lower bound `||P|| >= beta'/(K beta)`.
/// Report only: the statement it mirrors is asymptotic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop21Report {
    pub window: usize,
    /// `max r(z_n)` over the window, `z_n = (u_n + w_n)/||u_n + w_n||`.
    pub beta_hat: f64,
    /// Sampled `h` of the span of the window's `u_n`.
    pub beta_prime_hat: f64,
    pub k: f64,
    /// `beta'/(K beta)`.
    pub bound: f64,
    /// Sampled lower bound on `||P||`.
    pub opnorm_lower: f64,
    /// `beta' c delta / max{c, 1/delta}` with the projection's constants.
    pub threshold_eps: f64,
}

pub fn prop21_diagnostic(
    u: &[SpVector],
    w: &[SpVector],
    proj: &BlockProjection,
    k: f64,
    window: usize,
    cfg: SearchConfig,
) -> Result<Prop21Report> {
    if u.len() != w.len() {
        return Err(XpError::InvalidParameter(format!(
            "{} u-vectors but {} w-vectors",
            u.len(),
            w.len()
        )));
    }
    if window == 0 || window > u.len() {
        return Err(XpError::InvalidParameter(format!(
            "window must lie in 1..={}, got {window}",
            u.len()
        )));
    }
    if !(k > 0.0) {
        return Err(XpError::InvalidParameter(format!(
            "K must be positive, got {k}"
        )));
    }
    let start = u.len() - window;
    let mut beta_hat = 0.0f64;
    for (a, b) in u[start..].iter().zip(&w[start..]) {
        beta_hat = beta_hat.max(a.add(b)?.ratio()?);
    }
    let beta_prime_hat = estimate_h_inf(&u[start..], cfg)?.value;
    let opnorm_lower = estimate_opnorm(proj, NormMode::Xp, cfg).lower;
    let sys = proj.system();
    let (c, delta) = (sys.c(), sys.delta());
    Ok(Prop21Report {
        window,
        beta_hat,
        beta_prime_hat,
        k,
        bound: beta_prime_hat / (k * beta_hat),
        opnorm_lower,
        threshold_eps: beta_prime_hat * c * delta / c.max(1.0 / delta),
    })
}

/// `dist(x, span Y) / ||x||` with the minimizing coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    pub defect: f64,
    pub coefficients: Vec<f64>,
}

/// Minimizes the convex `a -> ||x - sum a_i y_i||` by pattern search from
/// `a = 0`, the weighted least-squares coefficients and seeded random
/// starts. Only strict improvements are taken, so a best approximant of
/// zero is reported exactly.
pub fn defect_of(y: &[SpVector], x: &SpVector, cfg: SearchConfig) -> Result<Defect> {
    let nx = x.xp_norm();
    if nx == 0.0 {
        return Err(XpError::ZeroVector("defect"));
    }
    let space = x.space();
    let k = y.len();
    if k == 0 {
        return Ok(Defect {
            defect: 1.0,
            coefficients: Vec::new(),
        });
    }
    let q = GramProjector::new(y.to_vec())?;
    let f = |a: &[f64]| -> f64 {
        SpVector::combination(space, a, y)
            .and_then(|s| x.sub(&s))
            .map(|r| r.xp_norm())
            .unwrap_or(f64::INFINITY)
    };
    let mut starts = vec![vec![0.0; k], q.coefficients(x)?];
    let mut rng = sample_rng(cfg.seed, 0);
    let scale = starts[1]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for _ in 0..cfg.budget.min(8) {
        starts.push(
            gaussian_point(&mut rng, k)
                .into_iter()
                .map(|v| v * scale)
                .collect(),
        );
    }
    let mut best = (f(&starts[0]), starts[0].clone());
    for s in starts {
        let (v, a) = descend(&f, s, scale);
        if v < best.0 {
            best = (v, a);
        }
    }
    Ok(Defect {
        defect: best.0 / nx,
        coefficients: best.1,
    })
}

fn descend(f: &impl Fn(&[f64]) -> f64, mut a: Vec<f64>, scale: f64) -> (f64, Vec<f64>) {
    let mut v = f(&a);
    let mut step = 0.5 * scale;
    let mut trial = a.clone();
    while step > 1e-12 * scale {
        let mut improved = false;
        for i in 0..a.len() {
            for s in [step, -step] {
                trial.copy_from_slice(&a);
                trial[i] += s;
                let t = f(&trial);
                if t < v {
                    v = t;
                    a.copy_from_slice(&trial);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectOutcome {
    pub worst_defect: f64,
    pub witness: Option<SpVector>,
    /// Candidates with `r(x) < alpha` that were evaluated.
    pub accepted: usize,
    pub rejected: usize,
}

/// Searches candidates with `r(x) < alpha` for the largest relative
/// distance to `span Y`. `candidates` are evaluated first, followed by
/// `samples` seeded random vectors on random index subsets.
pub fn defect_experiment(
    y: &[SpVector],
    alpha: f64,
    candidates: &[SpVector],
    samples: usize,
    cfg: SearchConfig,
) -> Result<DefectOutcome> {
    if !(alpha > 0.0) {
        return Err(XpError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let Some(space) = y
        .first()
        .map(|v| v.space().clone())
        .or_else(|| candidates.first().map(|v| v.space().clone()))
    else {
        return Err(XpError::InvalidParameter("no vectors to work with".into()));
    };
    let mut pool: Vec<SpVector> = candidates.to_vec();
    let d = space.dim();
    for k in 0..samples {
        let mut rng = sample_rng(cfg.seed, (1 << 40) + k as u64);
        let g = gaussian_point(&mut rng, d);
        let u = gaussian_point(&mut rng, d);
        // keep each coordinate with a random probability so sparse and dense
        // candidates both occur
        let keep = 0.05 + 0.9 * (u[0].abs() / (1.0 + u[0].abs()));
        let coeffs: Vec<f64> = g
            .iter()
            .zip(&u)
            .map(|(gi, ui)| {
                if (ui.abs() / (1.0 + ui.abs())) < keep {
                    *gi
                } else {
                    0.0
                }
            })
            .collect();
        let x = SpVector::from_dense(&space, &coeffs)?;
        if !x.is_zero() {
            pool.push(x);
        }
    }
    let mut out = DefectOutcome {
        worst_defect: 0.0,
        witness: None,
        accepted: 0,
        rejected: 0,
    };
    for x in &pool {
        if x.ratio()? >= alpha {
            out.rejected += 1;
            continue;
        }
        out.accepted += 1;
        let dv = defect_of(y, x, cfg)?;
        if out.witness.is_none() || dv.defect > out.worst_defect {
            out.worst_defect = dv.defect;
            out.witness = Some(x.clone());
        }
    }
    Ok(out)
}
