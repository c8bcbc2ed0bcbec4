//! Command-line arguments and the validated run configuration.

use std::fmt;
use std::path::PathBuf;

use bmatch_core::capacity::CapacityModel;
use clap::{Parser, ValueEnum};

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    #[value(name = "greedymr")]
    GreedyMr,
    #[value(name = "greedy-centralized")]
    GreedyCentralized,
    #[value(name = "stackmr")]
    StackMr,
    #[value(name = "stackgreedymr")]
    StackGreedyMr,
    #[value(name = "stackmr-feasible")]
    StackMrFeasible,
    #[value(name = "maximal")]
    Maximal,
    #[value(name = "exact")]
    Exact,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::GreedyMr => "greedymr",
            Algorithm::GreedyCentralized => "greedy-centralized",
            Algorithm::StackMr => "stackmr",
            Algorithm::StackGreedyMr => "stackgreedymr",
            Algorithm::StackMrFeasible => "stackmr-feasible",
            Algorithm::Maximal => "maximal",
            Algorithm::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Weighted b-matching of items to consumers.
#[derive(Clone, Debug, Parser)]
#[command(name = "bmatch", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,

    /// Edge list: item<TAB>consumer<TAB>weight.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Capacity file for --edges: node<TAB>side<TAB>capacity.
    #[arg(long)]
    pub capacities: Option<PathBuf>,
    /// Raw-text items: doc_id<TAB>text.
    #[arg(long)]
    pub items: Option<PathBuf>,
    /// Raw-text consumers: doc_id<TAB>text.
    #[arg(long)]
    pub consumers: Option<PathBuf>,
    /// Tokenized corpus: doc_id<TAB>side<TAB>term:count ...
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Synthetic generator spec (key=value lines).
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// Activity proxies: node<TAB>side<TAB>value (consumer activity or
    /// item favorites).
    #[arg(long)]
    pub activity: Option<PathBuf>,

    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_model)]
    pub capacity_model: Option<CapacityModel>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub partitions: usize,
    /// Cap on rounds of any iterative phase.
    #[arg(long, default_value_t = 100_000)]
    pub max_rounds: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_model(s: &str) -> Result<CapacityModel, String> {
    s.parse().map_err(|e: bmatch_core::Error| e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Edges {
        edges: PathBuf,
        capacities: Option<PathBuf>,
    },
    Text {
        items: PathBuf,
        consumers: PathBuf,
    },
    Tokenized {
        corpus: PathBuf,
    },
    Synth {
        spec: PathBuf,
    },
}

impl Input {
    fn describe(&self) -> String {
        match self {
            Input::Edges { edges, capacities } => match capacities {
                Some(c) => format!("edges:{} capacities:{}", edges.display(), c.display()),
                None => format!("edges:{}", edges.display()),
            },
            Input::Text { items, consumers } => {
                format!(
                    "items:{} consumers:{}",
                    items.display(),
                    consumers.display()
                )
            }
            Input::Tokenized { corpus } => format!("corpus:{}", corpus.display()),
            Input::Synth { spec } => format!("synth:{}", spec.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub input: Input,
    pub activity: Option<PathBuf>,
    pub sigma: Option<f64>,
    pub epsilon: f64,
    pub alpha: Option<f64>,
    pub capacity_model: Option<CapacityModel>,
    pub seed: u64,
    pub partitions: usize,
    pub max_rounds: usize,
    pub out: PathBuf,
}

fn positive(name: &str, v: Option<f64>) -> Result<(), RunError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(RunError::Config(format!(
            "--{name} must be positive, got {x}"
        ))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn from_args(a: Args) -> Result<Self, RunError> {
        let input = match (&a.edges, &a.items, &a.consumers, &a.corpus, &a.synth) {
            (Some(e), None, None, None, None) => Input::Edges {
                edges: e.clone(),
                capacities: a.capacities.clone(),
            },
            (None, Some(i), Some(c), None, None) => Input::Text {
                items: i.clone(),
                consumers: c.clone(),
            },
            (None, None, None, Some(c), None) => Input::Tokenized { corpus: c.clone() },
            (None, None, None, None, Some(s)) => Input::Synth { spec: s.clone() },
            _ => return Err(RunError::Config(
                "give exactly one input: --edges, --items with --consumers, --corpus, or --synth"
                    .into(),
            )),
        };
        if a.capacities.is_some() && !matches!(input, Input::Edges { .. }) {
            return Err(RunError::Config(
                "--capacities only applies to --edges".into(),
            ));
        }
        if a.activity.is_some() && (a.capacities.is_some() || matches!(input, Input::Synth { .. }))
        {
            return Err(RunError::Config(
                "--activity cannot be combined with --capacities or --synth".into(),
            ));
        }
        if matches!(input, Input::Text { .. } | Input::Tokenized { .. }) && a.sigma.is_none() {
            return Err(RunError::Config("corpus input needs --sigma".into()));
        }
        positive("sigma", a.sigma)?;
        positive("epsilon", Some(a.epsilon))?;
        positive("alpha", a.alpha)?;
        if a.partitions == 0 {
            return Err(RunError::Config("--partitions must be at least 1".into()));
        }
        Ok(RunConfig {
            algorithm: a.algorithm,
            input,
            activity: a.activity,
            sigma: a.sigma,
            epsilon: a.epsilon,
            alpha: a.alpha,
            capacity_model: a.capacity_model,
            seed: a.seed,
            partitions: a.partitions,
            max_rounds: a.max_rounds,
            out: a.out,
        })
    }

    /// Everything that determines the results. Partition count and output
    /// directory are left out since they never change the output.
    pub fn echo(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        let mut s = format!(
            "algorithm={} input={} sigma={} epsilon={} alpha={} capacity_model={} seed={} max_rounds={}",
            self.algorithm,
            self.input.describe(),
            opt(self.sigma),
            self.epsilon,
            opt(self.alpha),
            self.capacity_model.map_or("-", |m| m.as_str()),
            self.seed,
            self.max_rounds
        );
        if let Some(a) = &self.activity {
            s.push_str(&format!(" activity={}", a.display()));
        }
        s
    }
}
