use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use xplab::blocks::{make_rosenthal, Block, BlockFunctional};
use xplab::criteria::{
    check_prop24, check_thm13, defect_experiment, gen_thm13_witnesses, kp_classify,
    prop21_diagnostic,
};
use xplab::doc::{
    build_list, support_from, AnyOperator, BlockDoc, OperatorDoc, SpaceDoc, SystemDoc,
    Thm13Constants, VectorDoc, VectorsDoc, WeightsSpec, WitnessDoc, WitnessSetDoc,
};
use xplab::experiments::Experiment;
use xplab::operators::{
    component_bounds, estimate_opnorm, prop12_bound, ratio_bounds_check, BlockProjection,
    LinearOperator, NormMode, SearchConfig,
};
use xplab::report::{Check, Relation};
use xplab::splitter::{solve_constants, split, DEFAULT_NORM_SAFETY};
use xplab::weights::{rosenthal_diagnostic, WeightFamily};
use xplab::{SpVector, WeightedSpace, XpError};

use crate::args::*;
use crate::io::{parse_json, to_value, CliError, Context, Inputs, Table};

/// What a command produces before it is wrapped into a report.
pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn new(result: Value, checks: Vec<Check>) -> Self {
        Self {
            result,
            checks,
            table: None,
        }
    }
}

type Res<T> = Result<T, CliError>;

fn cfg(s: SearchArgs) -> SearchConfig {
    SearchConfig {
        budget: s.budget,
        seed: s.seed,
    }
}

fn entries(x: &SpVector) -> Value {
    to_value(&x.entries())
}

fn load_vector(io: &Inputs, p: &Path) -> Res<SpVector> {
    io.load::<VectorDoc>(p)?.build().context(p.display())
}

fn load_vectors(io: &Inputs, p: &Path) -> Res<Vec<SpVector>> {
    io.load::<VectorsDoc>(p)?.build().context(p.display())
}

fn same_space(a: &Arc<WeightedSpace>, b: &Arc<WeightedSpace>, what: &str) -> Res<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(XpError::SpaceMismatch)
            .context(format!("{what}: p and weights must match the operator's"))
    }
}

/// An operator document, or a bare block system treated as its projection.
fn load_operator(io: &Inputs, p: &Path) -> Res<AnyOperator> {
    let v: Value = io.load(p)?;
    let origin = p.display().to_string();
    let doc: OperatorDoc = if v.get("kind").is_some() {
        parse_json(&v.to_string(), &origin)?
    } else {
        OperatorDoc::BlockProjection {
            system: parse_json(&v.to_string(), &origin)?,
        }
    };
    doc.build().context(p.display())
}

fn load_block_projection(io: &Inputs, p: &Path) -> Res<BlockProjection> {
    match load_operator(io, p)? {
        AnyOperator::Block(b) => Ok(b),
        _ => Err(CliError::Usage(format!(
            "{}: expected a block projection",
            p.display()
        ))),
    }
}

pub fn norm(a: &NormArgs, io: &Inputs) -> Res<Outcome> {
    let x = load_vector(io, &a.x)?;
    Ok(Outcome::new(
        json!({
            "norm_p": x.norm_p(),
            "norm_2w": x.norm_2w(),
            "xp_norm": x.xp_norm(),
            "ratio": x.ratio().ok(),
        }),
        vec![],
    ))
}

fn condition_checks(j: usize, b: &Block, delta: f64, c: f64, tol: f64) -> [Check; 2] {
    let (ca, cb) = b.conditions(delta, c);
    [
        Check::new(
            format!("block {j}: a) |z_E|_2 >= delta |z|_2"),
            ca.lhs,
            Relation::Ge,
            ca.rhs,
            tol,
        ),
        Check::new(
            format!("block {j}: b) c |z_E|_2 >= omega(E)^((p-2)/2p)"),
            cb.lhs,
            Relation::Ge,
            cb.rhs,
            tol,
        ),
    ]
}

pub fn blocks_make(a: &BlocksMakeArgs, tol: f64, io: &Inputs) -> Res<Outcome> {
    let space = io
        .load::<SpaceDoc>(&a.space)?
        .build()
        .context(a.space.display())?;
    let support = support_from(&a.support, &space).context("--support")?;
    let e = if a.e.is_empty() {
        support.clone()
    } else {
        support_from(&a.e, &space).context("--E")?
    };
    let z = make_rosenthal(&space, support.clone())
        .and_then(|r| r.vector().normalized())
        .context("--support")?;
    let probe =
        Block::new_unchecked(support.clone(), z.clone(), e.clone(), 1.0, 1.0).context("--E")?;
    let delta = a.delta.unwrap_or(probe.tight_delta());
    let c = a.c.unwrap_or(probe.tight_c());
    let b = Block::new_unchecked(support, z, e, delta, c).context("block")?;
    let checks = condition_checks(1, &b, delta, c, tol).to_vec();
    Ok(Outcome::new(to_value(&BlockDoc::from_block(&b)), checks))
}

pub fn blocks_check(a: &SystemArgs, tol: f64, io: &Inputs) -> Res<Outcome> {
    let doc: SystemDoc = io.load(&a.system)?;
    let sys = doc.build(false).context(a.system.display())?;
    let mut checks = Vec::new();
    for (j, b) in sys.blocks().iter().enumerate() {
        let n = b.vector().xp_norm();
        checks.push(Check::new(
            format!("block {}: | ||z|| - 1 | <= 1e-9", j + 1),
            (n - 1.0).abs(),
            Relation::Le,
            1e-9,
            0.0,
        ));
        checks.extend(condition_checks(j + 1, b, sys.delta(), sys.c(), tol));
    }
    let windows = ratio_bounds_check(&sys);
    for w in &windows {
        checks.push(Check::new(
            format!("block {}: w'/c <= r(z)", w.j),
            w.r,
            Relation::Ge,
            w.lo,
            tol,
        ));
        checks.push(Check::new(
            format!("block {}: r(z) <= w'/delta", w.j),
            w.r,
            Relation::Le,
            w.hi,
            tol,
        ));
    }
    Ok(Outcome::new(
        json!({
            "blocks": sys.len(),
            "prop12_bound": prop12_bound(&sys),
            "induced_weights": sys.induced_weights(),
            "windows": windows,
        }),
        checks,
    ))
}

pub fn project(a: &ProjectArgs, tol: f64, io: &Inputs) -> Res<Outcome> {
    let op = load_operator(io, &a.op)?;
    let x = load_vector(io, &a.x)?;
    same_space(op.as_dyn().space(), x.space(), "x")?;
    let px = op.as_dyn().apply(&x)?;
    let mut checks = Vec::new();
    let mut result =
        json!({ "px": entries(&px), "xp_norm_x": x.xp_norm(), "xp_norm_px": px.xp_norm() });
    match &op {
        AnyOperator::Block(p) => {
            let bound = prop12_bound(p.system());
            checks.push(Check::new(
                "||Px|| <= max{1/delta, c} ||x||",
                px.xp_norm(),
                Relation::Le,
                bound * x.xp_norm(),
                tol,
            ));
            for cb in component_bounds(p, &x)? {
                checks.push(Check::new(
                    format!("block {}: |z*(x) z|_2 <= |x_E|_2/delta", cb.j),
                    cb.lhs2,
                    Relation::Le,
                    cb.rhs2,
                    tol,
                ));
                checks.push(Check::new(
                    format!("block {}: |z*(x) z|_p <= c |x_E|_p", cb.j),
                    cb.lhsp,
                    Relation::Le,
                    cb.rhsp,
                    tol,
                ));
            }
            result["coefficients"] = to_value(&p.coefficients(&x)?);
        }
        AnyOperator::Gram(q) => {
            let total = px.norm_2w_sq() + x.sub(&px)?.norm_2w_sq();
            checks.push(Check::new(
                "|Qx|_2^2 + |x - Qx|_2^2 <= |x|_2^2",
                total,
                Relation::Le,
                x.norm_2w_sq(),
                tol,
            ));
            checks.push(Check::new(
                "|Qx|_2^2 + |x - Qx|_2^2 >= |x|_2^2",
                total,
                Relation::Ge,
                x.norm_2w_sq(),
                tol,
            ));
            result["coefficients"] = to_value(&q.coefficients(&x)?);
        }
        AnyOperator::Matrix(_) => {}
    }
    Ok(Outcome::new(result, checks))
}

pub fn opnorm(a: &OpnormArgs, tol: f64, io: &Inputs) -> Res<Outcome> {
    let op = load_operator(io, &a.op)?;
    let est = estimate_opnorm(op.as_dyn(), a.mode, cfg(a.search));
    let mut checks = Vec::new();
    if let Some(u) = est.upper {
        checks.push(Check::new(
            "lower <= analytic upper",
            est.lower,
            Relation::Le,
            u,
            tol,
        ));
    }
    Ok(Outcome::new(
        json!({
            "lower": est.lower,
            "witness": entries(&est.witness),
            "analytic_upper": est.upper,
            "samples": est.samples,
            "seed": est.seed,
            "mode": est.mode,
            "zero_operator": est.zero_operator,
        }),
        checks,
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitConstantsInput {
    delta: f64,
    c: f64,
    eps: f64,
    #[serde(default)]
    norm_p: Option<f64>,
    #[serde(default)]
    norm_p2: Option<f64>,
    /// Inflation applied to measured norms.
    #[serde(default)]
    safety: Option<f64>,
}

#[derive(Debug, Serialize)]
struct NormSource {
    value: f64,
    source: &'static str,
}

/// Given value, else a certified bound, else the sampled estimate inflated
/// by the safety factor.
fn norm_for(
    given: Option<f64>,
    op: &dyn LinearOperator,
    mode: NormMode,
    safety: f64,
    search: Option<SearchConfig>,
) -> Res<NormSource> {
    if let Some(value) = given {
        return Ok(NormSource {
            value,
            source: "given",
        });
    }
    if let Some(value) = op.analytic_upper(mode) {
        return Ok(NormSource {
            value,
            source: "certified",
        });
    }
    let Some(cfg) = search else {
        return Err(CliError::Usage(
            "the projection has no certified norm bound; pass --seed (or set XPLAB_SEED) to measure it".into(),
        ));
    };
    Ok(NormSource {
        value: estimate_opnorm(op, mode, cfg).lower * safety,
        source: "measured",
    })
}

pub fn split_cmd(a: &SplitArgs, tol: f64, io: &Inputs) -> Res<Outcome> {
    let op = load_operator(io, &a.projection)?;
    let x = load_vector(io, &a.x)?;
    same_space(op.as_dyn().space(), x.space(), "x")?;
    let k: SplitConstantsInput = io.inline_or_file(&a.constants)?;
    let safety = k.safety.unwrap_or(DEFAULT_NORM_SAFETY);
    let search = a.seed.map(|seed| SearchConfig {
        budget: a.budget,
        seed,
    });
    let np = norm_for(k.norm_p, op.as_dyn(), NormMode::Xp, safety, search)?;
    let np2 = norm_for(k.norm_p2, op.as_dyn(), NormMode::TwoW, safety, search)?;
    let consts = solve_constants(k.delta, k.c, k.eps, np.value, np2.value, x.space().p())
        .context("constants")?;
    let r = split(&x, a.n, &consts, op.as_dyn(), tol)?;
    Ok(Outcome::new(
        json!({
            "constants": consts,
            "norm_p": np,
            "norm_p2": np2,
            "E_x": r.e_x,
            "y": entries(&r.y),
            "z": entries(&r.z),
            "ratios": {"x": r.ratio_x, "y": r.ratio_y, "z": r.ratio_z},
            "premise_met": r.premise_met,
            "degenerate_y": r.degenerate_y,
            "degenerate_z": r.degenerate_z,
            "sum_residual": r.sum_residual,
            "unverified_assumption": r.unverified_assumption,
        }),
        r.checks.checks,
    ))
}

pub fn check_thm13_cmd(a: &CheckThm13Args, tol: f64, io: &Inputs) -> Res<Outcome> {
    let mut v: Value = io.load(&a.witness)?;
    // Accept a whole `gen thm13` report as well as its result.
    if v.get("command").is_some() {
        v = v["result"].take();
    }
    let origin = a.witness.display().to_string();
    let (embedded, witnesses): (Option<Thm13Constants>, Vec<WitnessDoc>) =
        if v.get("witnesses").is_some() {
            let s: WitnessSetDoc = parse_json(&v.to_string(), &origin)?;
            (Some(s.constants), s.witnesses)
        } else {
            (None, vec![parse_json(&v.to_string(), &origin)?])
        };
    let k = match &a.constants {
        Some(p) => io.load::<Thm13Constants>(p)?,
        None => embedded.ok_or_else(|| {
            CliError::Usage("--constants is required for a single witness".into())
        })?,
    };
    let mut checks = Vec::new();
    let mut verdicts = Vec::new();
    for (i, w) in witnesses.iter().enumerate() {
        let rep = check_thm13(&w.build(&k).context(format!("witness {}", i + 1))?, tol)?;
        verdicts.push(rep.verdict);
        checks.extend(rep.checks.into_iter().map(|mut c| {
            c.name = format!("witness {}: {}", i + 1, c.name);
            c
        }));
    }
    Ok(Outcome::new(
        json!({ "constants": k, "verdicts": verdicts }),
        checks,
    ))
}

pub fn check_prop24_cmd(a: &CheckProp24Args, tol: f64, io: &Inputs) -> Res<Outcome> {
    let z = load_vectors(io, &a.z)?;
    let s = load_vectors(io, &a.samples)?;
    if let (Some(z0), Some(s0)) = (z.first(), s.first()) {
        same_space(z0.space(), s0.space(), "samples")?;
    }
    let rep = check_prop24(&z, &s, a.eps, a.beta, a.beta_prime, cfg(a.search), tol)?;
    let checks = rep.as_criterion(tol).checks;
    Ok(Outcome::new(to_value(&rep), checks))
}

pub fn gen_thm13(a: &GenThm13Args, tol: f64, io: &Inputs) -> Res<Outcome> {
    let space = io
        .load::<SpaceDoc>(&a.space)?
        .build()
        .context(a.space.display())?;
    let ws = gen_thm13_witnesses(&space, a.c, a.delta, a.eps, a.count, a.seed, a.n)?;
    let constants = Thm13Constants {
        c: a.c,
        delta: a.delta,
        eps: a.eps,
        eps_prime: ws.first().map_or(a.eps / 2.0, |w| w.eps_prime),
    };
    let mut checks = Vec::new();
    for (i, w) in ws.iter().enumerate() {
        checks.extend(check_thm13(w, tol)?.checks.into_iter().map(|mut c| {
            c.name = format!("witness {}: {}", i + 1, c.name);
            c
        }));
    }
    let doc = WitnessSetDoc {
        constants,
        witnesses: ws.iter().map(WitnessDoc::from_witness).collect(),
    };
    Ok(Outcome::new(to_value(&doc), checks))
}

pub fn classify_kp(a: &ClassifyKpArgs, io: &Inputs) -> Res<Outcome> {
    let v = load_vectors(io, &a.vectors)?;
    let rep = kp_classify(&v, a.n, a.c, cfg(a.search))?;
    Ok(Outcome::new(to_value(&rep), vec![]))
}

#[derive(Debug, Deserialize)]
struct Prop21Doc {
    #[serde(flatten)]
    space: SpaceDoc,
    u: Vec<Vec<(usize, f64)>>,
    w: Vec<Vec<(usize, f64)>>,
}

pub fn diag_prop21(a: &DiagProp21Args, io: &Inputs) -> Res<Outcome> {
    let doc: Prop21Doc = io.load(&a.vectors)?;
    let proj = load_block_projection(io, &a.projection)?;
    let space = doc.space.build().context(a.vectors.display())?;
    same_space(proj.system().space(), &space, "vectors")?;
    let u = build_list(&space, &doc.u).context("u")?;
    let w = build_list(&space, &doc.w).context("w")?;
    let rep = prop21_diagnostic(&u, &w, &proj, a.k, a.window, cfg(a.search))?;
    Ok(Outcome::new(to_value(&rep), vec![]))
}

pub fn experiment_defect(a: &DefectArgs, io: &Inputs) -> Res<Outcome> {
    let y = load_vectors(io, &a.vectors)?;
    let cand = match &a.candidates {
        Some(p) => load_vectors(io, p)?,
        None => Vec::new(),
    };
    if let (Some(y0), Some(c0)) = (y.first(), cand.first()) {
        same_space(y0.space(), c0.space(), "candidates")?;
    }
    let out = defect_experiment(&y, a.alpha, &cand, a.samples, cfg(a.search))?;
    Ok(Outcome::new(
        json!({
            "worst_defect": out.worst_defect,
            "witness": out.witness.as_ref().map(entries),
            "accepted": out.accepted,
            "rejected": out.rejected,
        }),
        vec![],
    ))
}

pub fn experiment_criterion(a: &CriterionArgs, io: &Inputs) -> Res<Outcome> {
    let exp = match &a.config {
        Some(p) => {
            let e: Experiment = io.load(p)?;
            if e.id() != a.id {
                return Err(CliError::Usage(format!(
                    "{}: describes criterion {}, but --id is {}",
                    p.display(),
                    e.id(),
                    a.id
                )));
            }
            e
        }
        None => Experiment::criterion(a.id)?,
    };
    let dir = xplab::experiments::repro_dir_or_default(a.repro_dir.as_ref().map(|d| io.resolve(d)));
    let rep = exp.run(a.seed, &dir)?;
    Ok(Outcome::new(
        json!({
            "criterion": rep.criterion,
            "title": rep.title,
            "experiment": rep.config,
            "metrics": rep.metrics,
            "repro_files": rep.repro_files,
        }),
        rep.checks,
    ))
}

fn family_of(io: &Inputs, arg: &str) -> Res<WeightFamily> {
    Ok(match io.inline_or_file::<WeightsSpec>(arg)? {
        WeightsSpec::List(values) => WeightFamily::Explicit { values },
        WeightsSpec::Family(f) => f,
    })
}

pub fn weights_gen(a: &FamilyArgs, io: &Inputs) -> Res<Outcome> {
    let w = family_of(io, &a.family)?.generate().context("--family")?;
    Ok(Outcome::new(json!({ "D": w.len(), "weights": w }), vec![]))
}

pub fn weights_diag(a: &WeightsDiagArgs, io: &Inputs) -> Res<Outcome> {
    let f = family_of(io, &a.family)?;
    let mut rows = Vec::new();
    let mut table = Table {
        headers: ["eps", "D", "s", "s_double", "growth", "diverging"]
            .map(String::from)
            .to_vec(),
        rows: vec![],
    };
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for &eps in &a.eps {
        for r in rosenthal_diagnostic(&f, a.p, eps, &a.d)? {
            table.rows.push(vec![
                eps.to_string(),
                r.d.to_string(),
                r.s.to_string(),
                opt(r.s_double),
                opt(r.growth),
                r.diverging.to_string(),
            ]);
            let mut v = to_value(&r);
            v["eps"] = json!(eps);
            rows.push(v);
        }
    }
    Ok(Outcome {
        result: json!({
            "rows": rows,
            "note": "finite truncations cannot certify divergence; `diverging` flags growth >= 1.5 across a doubling",
        }),
        checks: vec![],
        table: Some(table),
    })
}

pub fn weights_induced(a: &SystemArgs, io: &Inputs) -> Res<Outcome> {
    let doc: SystemDoc = io.load(&a.system)?;
    let sys = doc.build(true).context(a.system.display())?;
    let ratios = sys
        .blocks()
        .iter()
        .map(|b| b.vector().ratio())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome::new(
        json!({ "induced_weights": sys.induced_weights(), "block_ratios": ratios }),
        vec![],
    ))
}
