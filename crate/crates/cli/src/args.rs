use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use xplab::operators::NormMode;

/// Numerics for weighted sequence spaces X_{p,w} on finite truncations.
#[derive(Debug, Parser, Serialize)]
#[command(name = "xplab", version)]
pub struct Cli {
    /// Relative slack for non-strict inequality checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Also write the report rows as CSV.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,

    /// Include wall time in the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// The two norms, the X-norm and the ratio of a vector.
    Norm(NormArgs),
    /// Build or check blocks.
    #[command(subcommand)]
    Blocks(BlocksCmd),
    /// Apply a projection to a vector.
    Project(ProjectArgs),
    /// Sampled lower bound on an operator norm.
    Opnorm(OpnormArgs),
    /// Split a vector into small-ratio and large-ratio pieces.
    Split(SplitArgs),
    /// Evaluate a criterion on given data.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Generate witnesses.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Classify a span by its ratio.
    #[command(subcommand)]
    Classify(ClassifyCmd),
    /// Report-only diagnostics.
    #[command(subcommand)]
    Diag(DiagCmd),
    /// Seeded experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Weight families.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Run a list of invocations from a JSON file.
    Batch(BatchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm(_) => "norm",
            Command::Blocks(BlocksCmd::Make(_)) => "blocks make",
            Command::Blocks(BlocksCmd::Check(_)) => "blocks check",
            Command::Project(_) => "project",
            Command::Opnorm(_) => "opnorm",
            Command::Split(_) => "split",
            Command::Check(CheckCmd::Thm13(_)) => "check thm13",
            Command::Check(CheckCmd::Prop24(_)) => "check prop24",
            Command::Gen(GenCmd::Thm13(_)) => "gen thm13",
            Command::Classify(ClassifyCmd::Kp(_)) => "classify kp",
            Command::Diag(DiagCmd::Prop21(_)) => "diag prop21",
            Command::Experiment(ExperimentCmd::Defect(_)) => "experiment defect",
            Command::Experiment(ExperimentCmd::Criterion(_)) => "experiment criterion",
            Command::Weights(WeightsCmd::Gen(_)) => "weights gen",
            Command::Weights(WeightsCmd::Diag(_)) => "weights diag",
            Command::Weights(WeightsCmd::Induced(_)) => "weights induced",
            Command::Batch(_) => "batch",
        }
    }
}

/// Search budget and seed for stochastic commands.
#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 512)]
    pub budget: usize,
    /// Defaults to $XPLAB_SEED.
    #[arg(long, env = "XPLAB_SEED")]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct NormArgs {
    /// Vector document.
    #[arg(long)]
    pub x: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlocksCmd {
    /// Normalized extremal block on a support, emitted as a block document.
    Make(BlocksMakeArgs),
    /// Conditions, induced weights and ratio windows of a block system.
    Check(SystemArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BlocksMakeArgs {
    /// Space document `{"p", "weights"}`.
    #[arg(long)]
    pub space: PathBuf,
    /// Comma-separated 1-based indices.
    #[arg(long, value_delimiter = ',', required = true)]
    pub support: Vec<usize>,
    /// Designated set; defaults to the support.
    #[arg(long = "E", value_delimiter = ',')]
    pub e: Vec<usize>,
    /// Defaults to the tightest admissible value.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Defaults to the tightest admissible value.
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SystemArgs {
    /// Block system document.
    #[arg(long)]
    pub system: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    /// Operator document (block-projection or gram).
    #[arg(long)]
    pub op: PathBuf,
    #[arg(long)]
    pub x: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OpnormArgs {
    /// Operator document.
    #[arg(long)]
    pub op: PathBuf,
    #[arg(long, default_value = "xp")]
    pub mode: NormMode,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub x: PathBuf,
    /// Block projection or operator document.
    #[arg(long)]
    pub projection: PathBuf,
    /// Inline JSON or a path: `{"delta", "c", "eps"}` with optional
    /// `norm_p`, `norm_p2`, `safety`.
    #[arg(long)]
    pub constants: String,
    #[arg(long = "N")]
    pub n: usize,
    /// Budget for measuring norms that have no certified bound.
    #[arg(long, default_value_t = 512)]
    pub budget: usize,
    /// Needed only when a norm must be measured; defaults to $XPLAB_SEED.
    #[arg(long, env = "XPLAB_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckCmd {
    /// The witness criterion a), b), c).
    Thm13(CheckThm13Args),
    /// Conditions a), b), b') of the orthogonal-projection criterion.
    Prop24(CheckProp24Args),
}

#[derive(Debug, Args, Serialize)]
pub struct CheckThm13Args {
    /// A witness `{"x", "E", "N"}` or generator output.
    #[arg(long)]
    pub witness: PathBuf,
    /// `{"c", "delta", "eps", "eps_prime"}`; required unless the witness file
    /// carries them.
    #[arg(long)]
    pub constants: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckProp24Args {
    /// Vectors spanning Z.
    #[arg(long)]
    pub z: PathBuf,
    /// Sample vectors.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long = "beta-prime")]
    pub beta_prime: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenCmd {
    /// Extremal-block witnesses on disjoint tail sets.
    Thm13(GenThm13Args),
}

#[derive(Debug, Args, Serialize)]
pub struct GenThm13Args {
    /// Space document.
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long = "N", default_value_t = 1)]
    pub n: usize,
    #[arg(long, env = "XPLAB_SEED")]
    pub seed: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifyCmd {
    /// ℓ2-like, ℓp-like or mixed.
    Kp(ClassifyKpArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyKpArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long = "C")]
    pub c: f64,
    /// Tail cutoff.
    #[arg(long = "N", default_value_t = 0)]
    pub n: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagCmd {
    /// Finite-window surrogates for the projection lower bound.
    Prop21(DiagProp21Args),
}

#[derive(Debug, Args, Serialize)]
pub struct DiagProp21Args {
    /// `{"p", "weights", "u": [...], "w": [...]}`.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Block system document.
    #[arg(long)]
    pub projection: PathBuf,
    #[arg(long = "K")]
    pub k: f64,
    #[arg(long)]
    pub window: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentCmd {
    /// Largest relative distance to a span among small-ratio vectors.
    Defect(DefectArgs),
    /// One acceptance criterion.
    Criterion(CriterionArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DefectArgs {
    /// Vectors spanning Y.
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    /// Extra candidates evaluated before the random ones.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CriterionArgs {
    /// Criterion number, 1 to 8.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub id: u8,
    /// Experiment document overriding the default sample sizes.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where split counterexamples go; defaults to $XPLAB_REPRO_DIR or a
    /// temp directory.
    #[arg(long)]
    #[serde(skip)]
    pub repro_dir: Option<PathBuf>,
    #[arg(long, env = "XPLAB_SEED")]
    pub seed: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsCmd {
    /// Expand a family into explicit weights.
    Gen(FamilyArgs),
    /// Partial sums of small-weight mass across doublings.
    Diag(WeightsDiagArgs),
    /// Induced weights of a block system.
    Induced(SystemArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    /// Inline JSON or a path to a weight family.
    #[arg(long)]
    pub family: String,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightsDiagArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub p: f64,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Comma-separated truncation lengths.
    #[arg(long = "D", value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BatchArgs {
    /// `{"runs": [{"name", "args": [...]}]}`; relative paths inside runs
    /// resolve against the file's directory.
    #[arg(long)]
    pub config: PathBuf,
}
