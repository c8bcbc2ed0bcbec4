//! Loads the input, runs one algorithm and writes the metrics files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use bmatch_core::capacity::{assign_capacities, ActivityProfile, CapacityModel};
use bmatch_core::graph::{is_feasible, matching_value, violation_metric};
use bmatch_core::greedy::{greedy_centralized, greedy_mr, trace_fractions, TracePoint};
use bmatch_core::io::{read_capacities, read_edge_list, read_tokenized_corpus, write_matching};
use bmatch_core::maximal::{maximal_matching_of, MarkingStrategy};
use bmatch_core::mr::MrEngine;
use bmatch_core::oracle::{exact_b_matching, OracleLimits};
use bmatch_core::simjoin::Corpus;
use bmatch_core::stack::{stack_greedy_mr, stack_mr, stack_mr_feasible, StackParams};
use bmatch_core::synth::{join_graph, synth_dataset, SynthSpec};
use bmatch_core::{BipartiteGraph, Matching, Side};

use crate::config::{Algorithm, Input, RunConfig};
use crate::text::ingest_text;
use crate::RunError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub edges: usize,
    pub value: f64,
    pub rounds_total: usize,
    pub rounds_by_phase: BTreeMap<String, usize>,
    pub violation: f64,
    pub feasible: bool,
    pub matching: Matching,
    pub trace: Option<Vec<TracePoint>>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub wall_time: Duration,
    /// Matched edges as `item<TAB>consumer<TAB>weight` lines.
    pub matching_tsv: String,
}

fn open(path: &Path) -> Result<BufReader<File>, RunError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| RunError::Config(format!("cannot open {}: {e}", path.display())))
}

fn read_activity(path: &Path, g: &BipartiteGraph, alpha: f64) -> Result<ActivityProfile, RunError> {
    let mut activity = vec![0.0; g.consumer_count() as usize];
    let mut favorites = vec![0.0; g.item_count() as usize];
    let mut seen_favorites = false;
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot open {}: {e}", path.display())))?;
    for (i, line) in text.lines().enumerate() {
        let l = line.trim_end_matches('\r');
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        let bad = |m: String| bmatch_core::Error::Parse {
            line: i + 1,
            message: m,
        };
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 3 {
            return Err(bad("expected node<TAB>side<TAB>value".into()).into());
        }
        let side: Side = f[1]
            .parse()
            .map_err(|e: bmatch_core::Error| bad(e.to_string()))?;
        let value: f64 = f[2]
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| bad(format!("bad value {:?}", f[2])))?;
        let node = g
            .find_label(side, f[0])
            .ok_or_else(|| bad(format!("unknown {} {:?}", side.as_str(), f[0])))?;
        match side {
            Side::Consumer => activity[node.index as usize] = value,
            Side::Item => {
                favorites[node.index as usize] = value;
                seen_favorites = true;
            }
        }
    }
    let mut p = ActivityProfile::new(alpha, activity);
    let total: f64 = favorites.iter().sum();
    if seen_favorites && total > 0.0 {
        p.quality = Some(favorites.iter().map(|f| f / total).collect());
        p.favorites = Some(favorites);
    }
    Ok(p)
}

fn apply_profile(config: &RunConfig, g: &mut BipartiteGraph) -> Result<(), RunError> {
    let alpha = config.alpha.unwrap_or(1.0);
    let profile = match &config.activity {
        Some(path) => read_activity(path, g, alpha)?,
        None => ActivityProfile::new(alpha, vec![1.0; g.consumer_count() as usize]),
    };
    let model = config.capacity_model.unwrap_or(CapacityModel::Uniform);
    assign_capacities(g, &profile, model)?;
    Ok(())
}

/// Builds the graph for `config`; returns it with the sigma and alpha that
/// were in effect, if any.
pub fn load_graph(
    config: &RunConfig,
    engine: &mut MrEngine,
) -> Result<(BipartiteGraph, Option<f64>, Option<f64>), RunError> {
    match &config.input {
        Input::Edges { edges, capacities } => {
            let mut g = read_edge_list(open(edges)?)?;
            if let Some(c) = capacities {
                read_capacities(open(c)?, &mut g)?;
            } else if config.activity.is_some()
                || config.alpha.is_some()
                || config.capacity_model.is_some()
            {
                apply_profile(config, &mut g)?;
            }
            Ok((g, None, config.alpha))
        }
        Input::Text { items, consumers } => {
            let mut corpus = Corpus::new();
            ingest_text(open(items)?, Side::Item, &mut corpus)?;
            ingest_text(open(consumers)?, Side::Consumer, &mut corpus)?;
            corpus_graph(config, engine, &corpus)
        }
        Input::Tokenized { corpus } => {
            let corpus = read_tokenized_corpus(open(corpus)?)?;
            corpus_graph(config, engine, &corpus)
        }
        Input::Synth { spec } => {
            let text = fs::read_to_string(spec)
                .map_err(|e| RunError::Config(format!("cannot open {}: {e}", spec.display())))?;
            let spec = effective_spec(config, &text)?;
            let data = synth_dataset(engine, &spec, config.seed)?;
            Ok((data.graph, Some(spec.sigma), Some(spec.alpha)))
        }
    }
}

/// The synthetic spec with command-line overrides applied.
pub fn effective_spec(config: &RunConfig, text: &str) -> Result<SynthSpec, RunError> {
    let mut spec = SynthSpec::parse(text).map_err(|e| RunError::Config(e.to_string()))?;
    if let Some(s) = config.sigma {
        spec.sigma = s;
    }
    if let Some(a) = config.alpha {
        spec.alpha = a;
    }
    if let Some(m) = config.capacity_model {
        spec.capacity_model = m;
    }
    spec.validate()
        .map_err(|e| RunError::Config(e.to_string()))?;
    Ok(spec)
}

fn corpus_graph(
    config: &RunConfig,
    engine: &mut MrEngine,
    corpus: &Corpus,
) -> Result<(BipartiteGraph, Option<f64>, Option<f64>), RunError> {
    let sigma = config.sigma.expect("validated");
    let (mut g, _) = join_graph(engine, corpus, sigma)?;
    apply_profile(config, &mut g)?;
    Ok((g, Some(sigma), Some(config.alpha.unwrap_or(1.0))))
}

fn phase_group(label: &str) -> &str {
    label.split('/').next().unwrap_or(label)
}

/// Runs the configured algorithm and returns its metrics without writing
/// anything.
pub fn execute(config: &RunConfig) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut engine = MrEngine::new(config.seed, config.partitions);
    let (g, sigma, alpha) = load_graph(config, &mut engine)?;
    let params = StackParams {
        max_push_rounds: config.max_rounds,
        max_matching_iterations: config.max_rounds,
        ..StackParams::new(config.epsilon)
    };
    let mut trace = None;
    let matching = match config.algorithm {
        Algorithm::GreedyMr => {
            let out = greedy_mr(&mut engine, &g, config.max_rounds)?;
            trace = Some(out.trace);
            out.matching
        }
        Algorithm::GreedyCentralized => greedy_centralized(&g),
        Algorithm::StackMr => stack_mr(&mut engine, &g, &params)?.matching,
        Algorithm::StackGreedyMr => stack_greedy_mr(&mut engine, &g, &params)?.matching,
        Algorithm::StackMrFeasible => stack_mr_feasible(&mut engine, &g, &params)?.matching,
        Algorithm::Maximal => {
            maximal_matching_of(&mut engine, &g, MarkingStrategy::Random, config.max_rounds)?
                .matched
        }
        Algorithm::Exact => exact_b_matching(&g, OracleLimits::default())?.matching,
    };
    let mut buf = Vec::new();
    write_matching(&mut buf, &matching, &g)?;
    let mut rounds_by_phase = BTreeMap::new();
    for r in engine.ledger() {
        *rounds_by_phase
            .entry(phase_group(&r.phase_label).to_string())
            .or_insert(0) += 1;
    }
    Ok(RunReport {
        algorithm: config.algorithm,
        edges: g.edge_count(),
        value: matching_value(&matching, &g)?,
        rounds_total: engine.ledger().len(),
        rounds_by_phase,
        violation: violation_metric(&matching, &g)?,
        feasible: is_feasible(&matching, &g),
        trace,
        sigma,
        alpha,
        wall_time: started.elapsed(),
        matching_tsv: String::from_utf8(buf).expect("labels are utf-8"),
        matching,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| {
        RunError::Runtime(bmatch_core::Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    }
}

fn header(config: &RunConfig) -> String {
    format!("# schema={SCHEMA}\n# config: {}\n", config.echo())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Summary CSV text: comment header, column row, one data row.
pub fn summary_csv(config: &RunConfig, r: &RunReport) -> String {
    let phases: Vec<String> = r
        .rounds_by_phase
        .iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect();
    format!(
        "{}schema,algorithm,sigma,epsilon,alpha,seed,edges,matching_value,rounds_total,rounds_by_phase,violation_epsilon_prime\n{},{},{},{},{},{},{},{},{},{},{}\n",
        header(config),
        SCHEMA,
        r.algorithm,
        opt(r.sigma),
        config.epsilon,
        opt(r.alpha),
        config.seed,
        r.edges,
        r.value,
        r.rounds_total,
        phases.join(";"),
        r.violation
    )
}

/// Convergence trace CSV text.
pub fn trace_csv(config: &RunConfig, trace: &[TracePoint]) -> String {
    let mut s = header(config);
    s.push_str("round,value,fraction_of_final,included_edges\n");
    for (p, f) in trace.iter().zip(trace_fractions(trace)) {
        s.push_str(&format!(
            "{},{},{},{}\n",
            p.round, p.value, f, p.included_edges
        ));
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    w.write_all(text.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Runs `config` and writes `summary.csv`, `matching.tsv`, `timing.csv` and,
/// for the round-based greedy algorithm, `trace.csv` into the output
/// directory. Wall time lives in `timing.csv` so the other files stay
/// byte-identical across reruns.
pub fn run_experiment(config: &RunConfig) -> Result<RunReport, RunError> {
    let report = execute(config)?;
    let out = &config.out;
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_file(&out.join("matching.tsv"), &report.matching_tsv)?;
    write_file(&out.join("summary.csv"), &summary_csv(config, &report))?;
    let trace_path = out.join("trace.csv");
    match &report.trace {
        Some(trace) => write_file(&trace_path, &trace_csv(config, trace))?,
        // A trace left by an earlier run would belong to another algorithm.
        None if trace_path.exists() => fs::remove_file(&trace_path).map_err(io_err(&trace_path))?,
        None => {}
    }
    write_file(
        &out.join("timing.csv"),
        &format!(
            "algorithm,partitions,wall_time_seconds\n{},{},{}\n",
            report.algorithm,
            config.partitions,
            report.wall_time.as_secs_f64()
        ),
    )?;
    Ok(report)
}
