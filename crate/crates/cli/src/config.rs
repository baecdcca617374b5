use std::path::PathBuf;

use clap::{Args, ValueEnum};
use iomarkov_core::perturb::{
    DEFAULT_ALPHA, DEFAULT_DISPLAY_THRESHOLD, DEFAULT_INFLUENCE_THRESHOLD,
};
use iomarkov_core::spectral::{DEFAULT_MIXING_RUNS, DEFAULT_MIXING_TOLERANCE, DEFAULT_STEADY_TOLERANCE};
use iomarkov_core::{DanglingPolicy, NodeRef, SelfLoopScaling};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclude {
    /// Rest-of-the-world economy (code RoW, any case).
    Row,
    /// Government/household nodes.
    Gov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    Once,
    Twice,
}

impl From<ScalingArg> for SelfLoopScaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Once => SelfLoopScaling::Once,
            ScalingArg::Twice => SelfLoopScaling::Twice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Error,
    Uniform,
    SelfLoop,
}

impl From<PolicyArg> for DanglingPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Error => DanglingPolicy::Error,
            PolicyArg::Uniform => DanglingPolicy::Uniform,
            PolicyArg::SelfLoop => DanglingPolicy::SelfLoop,
        }
    }
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Panel manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// L1 tolerance for steady states.
    #[arg(long, default_value_t = DEFAULT_STEADY_TOLERANCE)]
    pub tolerance: f64,
    /// L1 tolerance for mixing-time runs.
    #[arg(long, default_value_t = DEFAULT_MIXING_TOLERANCE)]
    pub mixing_tolerance: f64,
    /// Number of random starts per mixing-time estimate.
    #[arg(long, default_value_t = DEFAULT_MIXING_RUNS)]
    pub runs: usize,
    /// Activity change in percent for perturbations.
    #[arg(long, default_value_t = DEFAULT_ALPHA, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_INFLUENCE_THRESHOLD)]
    pub influence_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_DISPLAY_THRESHOLD)]
    pub display_threshold: f64,
    #[arg(long, value_enum, default_value_t = ScalingArg::Once)]
    pub self_loop_scaling: ScalingArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Error)]
    pub dangling_policy: PolicyArg,
    /// Drop rows from reports (computations always use every node).
    #[arg(long, value_enum)]
    pub exclude: Vec<Exclude>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// Everything that determines a command's outputs; written into each file's header.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub tolerance: f64,
    pub mixing_tolerance: f64,
    pub runs: usize,
    pub alpha: f64,
    pub influence_threshold: f64,
    pub display_threshold: f64,
    pub self_loop_scaling: SelfLoopScaling,
    pub dangling_policy: DanglingPolicy,
    pub exclude: Vec<Exclude>,
    pub threads: usize,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl RunConfig {
    pub fn new(command: &str, args: &CommonArgs) -> Self {
        let mut exclude = args.exclude.clone();
        exclude.sort_by_key(|e| *e as u8);
        exclude.dedup();
        RunConfig {
            command: command.to_owned(),
            manifest: args.manifest.clone(),
            out: args.out.clone(),
            seed: args.seed,
            tolerance: args.tolerance,
            mixing_tolerance: args.mixing_tolerance,
            runs: args.runs,
            alpha: args.alpha,
            influence_threshold: args.influence_threshold,
            display_threshold: args.display_threshold,
            self_loop_scaling: args.self_loop_scaling.into(),
            dangling_policy: args.dangling_policy.into(),
            exclude,
            threads: args.threads,
            extra: serde_json::Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra
            .insert(key.to_owned(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn keeps(&self, node: &NodeRef) -> bool {
        self.exclude.iter().all(|e| match e {
            Exclude::Row => !node.economy().eq_ignore_ascii_case("row"),
            Exclude::Gov => !node.is_government(),
        })
    }

    pub fn keeps_economy(&self, economy: &str) -> bool {
        !(self.exclude.contains(&Exclude::Row) && economy.eq_ignore_ascii_case("row"))
    }
}

