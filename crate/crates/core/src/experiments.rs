//! Seeded runners for the acceptance criteria, shared by the test suite and
//! the command line.
//!
//! Each runner draws its cases from independent streams `(seed, case)`,
//! evaluates them in parallel, and reduces in case order, so reports are
//! identical for identical `(config, seed)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{make_rosenthal, BlockFunctional};
use crate::criteria::{
    check_proof_bounds, check_prop24, check_thm13, defect_experiment, defect_of, extract_Ei,
    gen_thm13_witnesses, mk_family,
};
use crate::error::{Result, XpError};
use crate::operators::{
    certified_h_lower, component_bounds, estimate_opnorm, grid_opnorm, prop12_bound, prop26_chain,
    ratio_bounds_check, BlockProjection, DenseOperator, GramProjector, LinearOperator, NormMode,
    SearchConfig,
};
use crate::report::{Check, CriterionReport, Relation};
use crate::sampling::{
    log_uniform, random_block_system, random_disjoint_family, random_space, random_subset,
    random_vector, random_vector_on, stream, SpaceRanges,
};
use crate::space::{SpVector, SupportSet, WeightedSpace};
use crate::splitter::{solve_constants, split_sweep};

/// One acceptance criterion with its sample sizes. Defaults are the sizes
/// the acceptance suite runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    RosenthalIdentities {
        cases: usize,
    },
    HolderChain {
        pairs: usize,
    },
    BlockProjection {
        systems: usize,
        samples: usize,
    },
    OracleAgreement {
        operators: usize,
        budget: usize,
        grid: usize,
    },
    WitnessMachinery {
        generator_runs: usize,
        cases: usize,
    },
    Splitter {
        fuzz: usize,
        instances: usize,
    },
    ProjectionChains {
        pythagoras: usize,
        chain_operators: usize,
        chain_samples: usize,
    },
    DefectForced {
        cases: usize,
        samples: usize,
    },
}

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

impl Experiment {
    /// The acceptance configuration of criterion `id`.
    pub fn criterion(id: u8) -> Result<Self> {
        Ok(match id {
            1 => Self::RosenthalIdentities { cases: 1000 },
            2 => Self::HolderChain { pairs: 100_000 },
            3 => Self::BlockProjection {
                systems: 200,
                samples: 10_000,
            },
            4 => Self::OracleAgreement {
                operators: 50,
                budget: 512,
                grid: 20_000,
            },
            5 => Self::WitnessMachinery {
                generator_runs: 100,
                cases: 10_000,
            },
            6 => Self::Splitter {
                fuzz: 10_000,
                instances: 500,
            },
            7 => Self::ProjectionChains {
                pythagoras: 10_000,
                chain_operators: 100,
                chain_samples: 100,
            },
            8 => Self::DefectForced {
                cases: 50,
                samples: 64,
            },
            _ => {
                return Err(XpError::InvalidParameter(format!(
                    "criterion must lie in 1..=8, got {id}"
                )))
            }
        })
    }

    pub fn id(&self) -> u8 {
        match self {
            Self::RosenthalIdentities { .. } => 1,
            Self::HolderChain { .. } => 2,
            Self::BlockProjection { .. } => 3,
            Self::OracleAgreement { .. } => 4,
            Self::WitnessMachinery { .. } => 5,
            Self::Splitter { .. } => 6,
            Self::ProjectionChains { .. } => 7,
            Self::DefectForced { .. } => 8,
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Self::RosenthalIdentities { .. } => "extremal block identities",
            Self::HolderChain { .. } => "Hölder chain for block functionals",
            Self::BlockProjection { .. } => {
                "block projection norm bound, idempotence, ratio window"
            }
            Self::OracleAgreement { .. } => "operator-norm estimate against grid oracle",
            Self::WitnessMachinery { .. } => {
                "witness generator, extraction, proof bounds, M_K implication"
            }
            Self::Splitter { .. } => "splitting constants and ratio claims",
            Self::ProjectionChains { .. } => "orthogonal projection chains",
            Self::DefectForced { .. } => "approximation defect, disjoint case",
        }
    }

    /// Runs the criterion. Split counterexamples are written to `repro_dir`.
    pub fn run(&self, seed: u64, repro_dir: &Path) -> Result<ExperimentReport> {
        let mut metrics = BTreeMap::new();
        let mut repro_files = Vec::new();
        let checks = match *self {
            Self::RosenthalIdentities { cases } => rosenthal_identities(seed, cases, &mut metrics)?,
            Self::HolderChain { pairs } => holder_chain(seed, pairs, &mut metrics)?,
            Self::BlockProjection { systems, samples } => {
                block_projection(seed, systems, samples, &mut metrics)?
            }
            Self::OracleAgreement {
                operators,
                budget,
                grid,
            } => oracle_agreement(seed, operators, budget, grid, &mut metrics)?,
            Self::WitnessMachinery {
                generator_runs,
                cases,
            } => witness_machinery(seed, generator_runs, cases, &mut metrics)?,
            Self::Splitter { fuzz, instances } => splitter(
                seed,
                fuzz,
                instances,
                repro_dir,
                &mut metrics,
                &mut repro_files,
            )?,
            Self::ProjectionChains {
                pythagoras,
                chain_operators,
                chain_samples,
            } => projection_chains(
                seed,
                pythagoras,
                chain_operators,
                chain_samples,
                &mut metrics,
            )?,
            Self::DefectForced { cases, samples } => {
                defect_forced(seed, cases, samples, &mut metrics)?
            }
        };
        let report = CriterionReport::new(checks);
        Ok(ExperimentReport {
            criterion: self.id(),
            title: self.title().to_string(),
            seed,
            config: self.clone(),
            verdict: report.verdict,
            checks: report.checks,
            metrics,
            repro_files,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub criterion: u8,
    pub title: String,
    pub seed: u64,
    pub config: Experiment,
    pub verdict: bool,
    pub checks: Vec<Check>,
    /// Descriptive numbers that are reported but not asserted.
    pub metrics: BTreeMap<String, f64>,
    pub repro_files: Vec<String>,
}

fn violations(name: &str, count: usize) -> Check {
    Check::new(name, count as f64, Relation::Le, 0.0, 0.0)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_of(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0f64, f64::max)
}

/// Runs `f` on each case index in parallel and returns the results in order.
fn cases<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

pub const IDENTITY_RTOL: f64 = 1e-10;

/// Extremal block norms against `omega` summed directly from the weights.
fn rosenthal_identities(seed: u64, n: usize, m: &mut BTreeMap<String, f64>) -> Result<Vec<Check>> {
    let errs = cases(n, |i| {
        let mut rng = stream(seed, i as u64);
        let space = random_space(
            &mut rng,
            SpaceRanges {
                dim: (1, 48),
                ..SpaceRanges::default()
            },
        )?;
        let set = random_subset(&mut rng, space.dim(), 32);
        let p = space.p();
        let omega: f64 = set
            .iter()
            .map(|k| space.weight(k).powf(2.0 * p / (p - 2.0)))
            .sum();
        let y = make_rosenthal(&space, set)?;
        let v = y.vector();
        Ok([
            rel_err(v.norm_2w(), omega.sqrt()),
            rel_err(v.norm_p(), omega.powf(1.0 / p)),
            rel_err(v.ratio()?, omega.powf((p - 2.0) / (2.0 * p))),
        ])
    })?;
    let worst = |k: usize| max_of(errs.iter().map(|e| e[k]));
    m.insert("cases".into(), n as f64);
    Ok(vec![
        Check::new(
            "max rel error |y|_2 vs omega^(1/2)",
            worst(0),
            Relation::Le,
            IDENTITY_RTOL,
            0.0,
        ),
        Check::new(
            "max rel error |y|_p vs omega^(1/p)",
            worst(1),
            Relation::Le,
            IDENTITY_RTOL,
            0.0,
        ),
        Check::new(
            "max rel error r(y) vs omega^((p-2)/2p)",
            worst(2),
            Relation::Le,
            IDENTITY_RTOL,
            0.0,
        ),
    ])
}

pub const HOLDER_SLACK: f64 = 1e-12;

/// Half the pairs use extremal blocks (factor 1), half use general blocks
/// of a random valid system with the global constants.
fn holder_chain(seed: u64, pairs: usize, m: &mut BTreeMap<String, f64>) -> Result<Vec<Check>> {
    let half = pairs / 2;
    let out = cases(pairs, |i| {
        let mut rng = stream(seed, i as u64);
        let space = random_space(&mut rng, SpaceRanges::default())?;
        let x = random_vector(&mut rng, &space)?;
        if i < half {
            let set = random_subset(&mut rng, space.dim(), 16);
            // overlap x with the block most of the time
            let x = if rng.random_bool(0.8) {
                x.add(&random_vector_on(&mut rng, &space, &set)?)?
            } else {
                x
            };
            let hb = make_rosenthal(&space, set)?.holder_bounds(&x)?;
            let worst = (hb.lhs2 / hb.rhs2.max(f64::MIN_POSITIVE))
                .max(hb.lhsp / hb.rhsp.max(f64::MIN_POSITIVE));
            Ok((
                0,
                !hb.holds(HOLDER_SLACK) as usize,
                if hb.functional == 0.0 { 0.0 } else { worst },
            ))
        } else {
            let sys = random_block_system(&mut rng, &space)?;
            let j = rng.random_range(0..sys.len());
            let e = sys.blocks()[j].eset().clone();
            let x = x.add(&random_vector_on(&mut rng, &space, &e)?)?;
            let proj = BlockProjection::new(sys);
            let cb = component_bounds(&proj, &x)?[j];
            let hb = proj.system().blocks()[j].holder_bounds(&x)?;
            let bad = !cb.holds(HOLDER_SLACK) || !hb.holds(HOLDER_SLACK);
            Ok((1, bad as usize, 0.0))
        }
    })?;
    let bad = |kind: usize| {
        out.iter()
            .filter(|o| o.0 == kind)
            .map(|o| o.1)
            .sum::<usize>()
    };
    m.insert("extremal pairs".into(), half as f64);
    m.insert("general pairs".into(), (pairs - half) as f64);
    m.insert(
        "max extremal lhs/rhs".into(),
        max_of(out.iter().map(|o| o.2)),
    );
    Ok(vec![
        violations(
            "extremal: |y*(x) y|_2 <= |x_I|_2, |y*(x) y|_p <= |x_I|_p",
            bad(0),
        ),
        violations(
            "general: |z*(x) z|_2 <= |x_E|_2/delta, |z*(x) z|_p <= c |x_E|_p",
            bad(1),
        ),
    ])
}

pub const NORM_BOUND_RTOL: f64 = 1e-9;
pub const IDEMPOTENCE_RTOL: f64 = 1e-9;

/// Samples mix random vectors with combinations of the restricted block
/// vectors, which push `||Px||/||x||` towards its bound.
fn block_projection(
    seed: u64,
    systems: usize,
    samples: usize,
    m: &mut BTreeMap<String, f64>,
) -> Result<Vec<Check>> {
    let out = cases(systems, |i| {
        let mut rng = stream(seed, i as u64);
        let space = random_space(&mut rng, SpaceRanges::default())?;
        let proj = BlockProjection::new(random_block_system(&mut rng, &space)?);
        let sys = proj.system();
        let bound = prop12_bound(sys);
        let restricted: Vec<SpVector> = sys
            .blocks()
            .iter()
            .map(|b| b.restricted_vector().clone())
            .collect();
        let (mut worst, mut norm_bad, mut idem_bad, mut idem_err) =
            (0.0f64, 0usize, 0usize, 0.0f64);
        for k in 0..samples {
            let x = match k % 3 {
                0 => random_vector(&mut rng, &space)?,
                kind => {
                    let coeffs: Vec<f64> = (0..restricted.len())
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect();
                    let s = SpVector::combination(&space, &coeffs, &restricted)?;
                    if kind == 2 {
                        s.axpy(0.05, &random_vector(&mut rng, &space)?)?
                    } else {
                        s
                    }
                }
            };
            let nx = x.xp_norm();
            if nx == 0.0 {
                continue;
            }
            let px = proj.project(&x)?;
            let q = px.xp_norm() / nx;
            worst = worst.max(q / bound);
            if q > bound * (1.0 + NORM_BOUND_RTOL) {
                norm_bad += 1;
            }
            if k % 10 == 0 {
                let ppx = proj.project(&px)?;
                let err = ppx.sub(&px)?.xp_norm() / px.xp_norm().max(f64::MIN_POSITIVE);
                idem_err = idem_err.max(err);
                if err > IDEMPOTENCE_RTOL {
                    idem_bad += 1;
                }
            }
        }
        let mut fix_bad = 0;
        for b in sys.blocks() {
            let z = b.vector();
            if proj.project(z)?.sub(z)?.xp_norm() > IDEMPOTENCE_RTOL * z.xp_norm() {
                fix_bad += 1;
            }
        }
        let window_bad = ratio_bounds_check(sys).iter().filter(|w| !w.ok).count();
        Ok((
            worst,
            norm_bad,
            idem_bad + fix_bad,
            idem_err,
            window_bad,
            sys.len(),
        ))
    })?;
    m.insert(
        "max ||Px||/(bound ||x||)".into(),
        max_of(out.iter().map(|o| o.0)),
    );
    m.insert(
        "max idempotence rel error".into(),
        max_of(out.iter().map(|o| o.3)),
    );
    m.insert(
        "blocks".into(),
        out.iter().map(|o| o.5).sum::<usize>() as f64,
    );
    Ok(vec![
        violations(
            "||Px|| <= max{1/delta, c} ||x|| (1 + 1e-9)",
            out.iter().map(|o| o.1).sum(),
        ),
        violations(
            "P(Px) = Px and P z_j = z_j to 1e-9",
            out.iter().map(|o| o.2).sum(),
        ),
        violations(
            "w'_j/c <= r(z_j) <= w'_j/delta",
            out.iter().map(|o| o.4).sum(),
        ),
    ])
}

pub const ORACLE_RTOL: f64 = 0.02;

fn small_operator(rng: &mut rand_chacha::ChaCha8Rng, i: usize) -> Result<Box<dyn LinearOperator>> {
    let space = random_space(
        rng,
        SpaceRanges {
            dim: (2, 6),
            weight: (0.05, 2.0),
            ..SpaceRanges::default()
        },
    )?;
    let d = space.dim();
    Ok(match i % 3 {
        0 => {
            let rows: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            Box::new(DenseOperator::from_rows(&space, &rows)?)
        }
        1 => Box::new(BlockProjection::new(random_block_system(rng, &space)?)),
        _ => {
            let k = rng.random_range(1..d);
            loop {
                let basis = (0..k)
                    .map(|_| random_vector_on(rng, &space, &space.full_set()))
                    .collect::<Result<Vec<_>>>()?;
                if let Ok(q) = GramProjector::new(basis) {
                    break Box::new(q);
                }
            }
        }
    })
}

fn oracle_agreement(
    seed: u64,
    operators: usize,
    budget: usize,
    grid: usize,
    m: &mut BTreeMap<String, f64>,
) -> Result<Vec<Check>> {
    let out = cases(operators, |i| {
        let mut rng = stream(seed, i as u64);
        let op = small_operator(&mut rng, i)?;
        let mut errs = [0.0; 2];
        for (slot, mode) in [NormMode::Xp, NormMode::TwoW].into_iter().enumerate() {
            let est = estimate_opnorm(
                op.as_ref(),
                mode,
                SearchConfig {
                    budget,
                    seed: seed.wrapping_add(i as u64),
                },
            );
            let g = grid_opnorm(op.as_ref(), mode, grid)?;
            errs[slot] = rel_err(est.lower, g);
        }
        Ok(errs)
    })?;
    let xp = max_of(out.iter().map(|e| e[0]));
    let tw = max_of(out.iter().map(|e| e[1]));
    m.insert("operators".into(), operators as f64);
    Ok(vec![
        Check::new(
            "xp: max |estimate - grid|/grid",
            xp,
            Relation::Le,
            ORACLE_RTOL,
            0.0,
        ),
        Check::new(
            "2w: max |estimate - grid|/grid",
            tw,
            Relation::Le,
            ORACLE_RTOL,
            0.0,
        ),
    ])
}

pub const PROOF_TOL: f64 = 1e-9;

fn witness_machinery(
    seed: u64,
    runs: usize,
    n: usize,
    m: &mut BTreeMap<String, f64>,
) -> Result<Vec<Check>> {
    // generator: spaces with a long tail of small weights
    let gen = cases(runs, |i| {
        let mut rng = stream(seed, i as u64);
        let p = rng.random_range(2.5..8.0);
        let d = rng.random_range(60..200usize);
        let w: Vec<f64> = (0..d).map(|_| log_uniform(&mut rng, 1e-3, 0.6)).collect();
        let space = WeightedSpace::new(p, w)?;
        let c = rng.random_range(1.0..1.6);
        let delta = rng.random_range(0.1..1.0);
        let eps = rng.random_range(0.3..0.9);
        let count = rng.random_range(1..=4usize);
        let head = rng.random_range(1..=5usize);
        match gen_thm13_witnesses(&space, c, delta, eps, count, seed ^ i as u64, head) {
            Ok(ws) => {
                let mut passed = 0;
                for w in &ws {
                    passed += check_thm13(w, PROOF_TOL)?.verdict as usize;
                }
                Ok((ws.len(), passed, 0usize))
            }
            Err(XpError::Infeasible(_)) => Ok((0, 0, 1)),
            Err(e) => Err(e),
        }
    })?;
    let generated: usize = gen.iter().map(|g| g.0).sum();
    let passed: usize = gen.iter().map(|g| g.1).sum();
    m.insert(
        "generator runs infeasible".into(),
        gen.iter().map(|g| g.2).sum::<usize>() as f64,
    );
    m.insert("witnesses generated".into(), generated as f64);

    let out = cases(n, |i| {
        let mut rng = stream(seed, (1 << 32) + i as u64);
        let space = random_space(&mut rng, SpaceRanges::default())?;
        let y = random_vector(&mut rng, &space)?.normalized()?;
        let f = y.support();
        // extraction is monotone in rho
        let r1 = log_uniform(&mut rng, 1e-4, 10.0);
        let r2 = log_uniform(&mut rng, 1e-4, 10.0);
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let mono_bad = !extract_Ei(&y, &f, hi)?.is_subset(&extract_Ei(&y, &f, lo)?);
        let rho = rng.random_range(1e-3..1.0);
        let delta = rng.random_range(1e-2..1.0);
        let bounds = check_proof_bounds(&y, &f, rho, delta, PROOF_TOL)?;
        Ok((mono_bad as usize, !bounds.verdict as usize))
    })?;

    let mk = cases(n / 10, |i| {
        let mut rng = stream(seed, (2 << 32) + i as u64);
        let space = random_space(&mut rng, SpaceRanges::default())?;
        let proj = BlockProjection::new(random_block_system(&mut rng, &space)?);
        let rho = log_uniform(&mut rng, 1e-3, 2.0);
        let sets = proj
            .system()
            .blocks()
            .iter()
            .map(|b| extract_Ei(b.vector(), b.support(), rho))
            .collect::<Result<Vec<_>>>()?;
        let k = log_uniform(&mut rng, 0.25, 20.0);
        let fam = mk_family(k, &sets, &proj)?;
        let guarded = fam.rows.iter().filter(|r| r.in_mk && r.guard).count();
        Ok((!fam.implication_holds() as usize, guarded))
    })?;
    m.insert(
        "M_K rows with guard met".into(),
        mk.iter().map(|o| o.1).sum::<usize>() as f64,
    );
    Ok(vec![
        Check::new(
            "generator: witnesses passing",
            passed as f64,
            Relation::Ge,
            generated as f64,
            0.0,
        ),
        Check::new(
            "generator: witnesses produced",
            generated as f64,
            Relation::Gt,
            0.0,
            0.0,
        ),
        violations("extract_Ei monotone in rho", out.iter().map(|o| o.0).sum()),
        violations(
            "proof bounds (i), (ii), (iii)",
            out.iter().map(|o| o.1).sum(),
        ),
        violations("M_K and guard imply E_(1/2K)", mk.iter().map(|o| o.0).sum()),
    ])
}

fn splitter(
    seed: u64,
    fuzz: usize,
    instances: usize,
    repro_dir: &Path,
    m: &mut BTreeMap<String, f64>,
    files: &mut Vec<String>,
) -> Result<Vec<Check>> {
    let out = cases(fuzz, |i| {
        let mut rng = stream(seed, i as u64);
        let n = log_uniform(&mut rng, 1.0, 20.0);
        let n2 = log_uniform(&mut rng, 1.0, n.max(1.0 + 1e-9));
        let delta = rng.random_range(1e-3..1.0) / n2;
        let c = log_uniform(&mut rng, 0.1, 20.0);
        let eps = log_uniform(&mut rng, 1e-3, 5.0);
        let p = rng.random_range(2.05..10.0);
        let k = solve_constants(delta, c, eps, n, n2, p)?;
        Ok((!k.check().verdict as usize, k.halvings))
    })?;
    m.insert(
        "max halvings".into(),
        out.iter().map(|o| o.1).max().unwrap_or(0) as f64,
    );
    let sweep = split_sweep(seed, instances, PROOF_TOL, repro_dir)?;
    m.insert(
        "instances meeting preconditions".into(),
        sweep.preconditions_met as f64,
    );
    m.insert("instances meeting premise".into(), sweep.premise_met as f64);
    files.extend(sweep.repro_files.iter().cloned());
    Ok(vec![
        violations(
            "constant system on fuzzed inputs",
            out.iter().map(|o| o.0).sum(),
        ),
        Check::new(
            "split instances under premise",
            sweep.premise_met as f64,
            Relation::Gt,
            0.0,
            0.0,
        ),
        violations(
            "r(y) <= alpha and r(z) >= beta under premise",
            sweep.counterexamples,
        ),
    ])
}

pub const PYTHAGORAS_RTOL: f64 = 1e-9;

fn projection_chains(
    seed: u64,
    pythagoras: usize,
    operators: usize,
    samples: usize,
    m: &mut BTreeMap<String, f64>,
) -> Result<Vec<Check>> {
    let py = cases(pythagoras, |i| {
        let mut rng = stream(seed, i as u64);
        let space = random_space(&mut rng, SpaceRanges::default())?;
        let k = rng.random_range(1..=4usize.min(space.dim()));
        let q = loop {
            let basis = (0..k)
                .map(|_| random_vector(&mut rng, &space))
                .collect::<Result<Vec<_>>>()?;
            if let Ok(q) = GramProjector::new(basis) {
                break q;
            }
        };
        let x = random_vector(&mut rng, &space)?;
        let qx = q.project(&x)?;
        let lhs = x.norm_2w_sq();
        let rhs = qx.norm_2w_sq() + x.sub(&qx)?.norm_2w_sq();
        Ok(rel_err(rhs, lhs))
    })?;

    let chain = cases(operators, |i| {
        let mut rng = stream(seed, (1 << 32) + i as u64);
        let space = random_space(&mut rng, SpaceRanges::default())?;
        let k = rng.random_range(1..=5usize);
        let (fam, q) = loop {
            let fam = random_disjoint_family(&mut rng, &space, k, 4)?;
            if let Ok(q) = GramProjector::new(fam.clone()) {
                break (fam, q);
            }
        };
        let beta_prime = certified_h_lower(&fam)?;
        let norm_q = q.xp_norm_bound(SearchConfig {
            budget: 128,
            seed: seed.wrapping_add(i as u64),
        });
        let mut bad = 0;
        for _ in 0..samples {
            let x = random_vector(&mut rng, &space)?;
            bad += !prop26_chain(&q, beta_prime, &x, norm_q)?.ok as usize;
        }
        Ok(bad)
    })?;

    // the orthogonal configuration: Z = {e_1}, x = e_2
    let mut rng = stream(seed, 2 << 32);
    let space = WeightedSpace::new(
        rng.random_range(2.5..6.0),
        vec![rng.random_range(0.2..1.0), rng.random_range(0.2..1.0)],
    )?;
    let (z, x) = (SpVector::basis(&space, 1)?, SpVector::basis(&space, 2)?);
    let eps = rng.random_range(0.1..0.99);
    let beta = 0.5 * x.ratio()?;
    let rep = check_prop24(
        &[z],
        std::slice::from_ref(&x),
        eps,
        beta,
        0.5 * space.weight(1),
        SearchConfig::default(),
        0.0,
    )?;
    let row = rep.rows[0];
    m.insert("orthogonal case eps".into(), eps);
    m.insert(
        "max Pythagoras rel error".into(),
        max_of(py.iter().copied()),
    );
    Ok(vec![
        Check::new(
            "max Pythagoras rel error",
            max_of(py.iter().copied()),
            Relation::Le,
            PYTHAGORAS_RTOL,
            0.0,
        ),
        violations(
            "|Qx|_2 <= ||Q||^(1/2) r(x)^(1/2) ||x||/beta'",
            chain.iter().sum(),
        ),
        Check::new(
            "orthogonal case: distance = |x|_2",
            row.distance,
            Relation::Ge,
            x.norm_2w(),
            0.0,
        ),
        Check::new(
            "orthogonal case: distance <= |x|_2",
            row.distance,
            Relation::Le,
            x.norm_2w(),
            0.0,
        ),
        Check::new(
            "orthogonal case: b) fails",
            rep.condition_b as u8 as f64,
            Relation::Le,
            0.0,
            0.0,
        ),
    ])
}

pub const DEFECT_TOL: f64 = 1e-9;

/// `Y = {e_1, .., e_m}` and `x` an extremal block past `m`, checked against
/// a coefficient grid when `m <= 2`; then a perturbed basis sampled for the
/// report.
fn defect_forced(
    seed: u64,
    n: usize,
    samples: usize,
    m: &mut BTreeMap<String, f64>,
) -> Result<Vec<Check>> {
    let out = cases(n, |i| {
        let mut rng = stream(seed, i as u64);
        let space = random_space(
            &mut rng,
            SpaceRanges {
                dim: (3, 12),
                ..SpaceRanges::default()
            },
        )?;
        let mm = rng.random_range(1..space.dim());
        let y = (1..=mm)
            .map(|k| SpVector::basis(&space, k))
            .collect::<Result<Vec<_>>>()?;
        let x = make_rosenthal(&space, SupportSet::range(mm + 1, space.dim()))?
            .vector()
            .clone();
        let d = defect_of(&y, &x, SearchConfig { budget: 8, seed })?.defect;
        let grid_ok = if mm <= 2 {
            grid_defect_at_least_one(&y, &x)
        } else {
            true
        };
        Ok((d, grid_ok))
    })?;
    let worst = max_of(out.iter().map(|o| (o.0 - 1.0).abs()));
    let grid_bad = out.iter().filter(|o| !o.1).count();

    // perturbed natural basis on small weights; report only
    let mut rng = stream(seed, 1 << 32);
    let d = 10;
    let w: Vec<f64> = (0..d).map(|_| log_uniform(&mut rng, 1e-3, 1e-2)).collect();
    let space = WeightedSpace::new(4.0, w)?;
    let y = (0..d / 2)
        .map(|k| SpVector::new(&space, [(2 * k + 1, 1.0), (2 * k + 2, 0.05)]))
        .collect::<Result<Vec<_>>>()?;
    let alpha = 0.05;
    let outcome = defect_experiment(&y, alpha, &[], samples, SearchConfig { budget: 8, seed })?;
    m.insert("perturbed basis: worst defect".into(), outcome.worst_defect);
    m.insert(
        "perturbed basis: candidates with r < alpha".into(),
        outcome.accepted as f64,
    );
    Ok(vec![
        Check::new(
            "disjoint case: max |defect - 1|",
            worst,
            Relation::Le,
            DEFECT_TOL,
            0.0,
        ),
        violations("disjoint case: grid minimum below ||x||", grid_bad),
    ])
}

/// `min_a ||x - sum a_k y_k||` over `[-2, 2]^m` on a 41-point grid per axis.
fn grid_defect_at_least_one(y: &[SpVector], x: &SpVector) -> bool {
    let nx = x.xp_norm();
    let pts: Vec<f64> = (0..=40).map(|k| -2.0 + 0.1 * k as f64).collect();
    let space = x.space();
    let eval = |a: &[f64]| {
        SpVector::combination(space, a, y)
            .and_then(|s| x.sub(&s))
            .map(|r| r.xp_norm())
            .unwrap_or(f64::INFINITY)
    };
    match y.len() {
        1 => pts.iter().all(|&a| eval(&[a]) >= nx * (1.0 - 1e-12)),
        _ => pts
            .iter()
            .all(|&a| pts.iter().all(|&b| eval(&[a, b]) >= nx * (1.0 - 1e-12))),
    }
}

/// Location for split repro files when none is given.
pub fn repro_dir_or_default(dir: Option<PathBuf>) -> PathBuf {
    dir.unwrap_or_else(crate::splitter::default_repro_dir)
}
