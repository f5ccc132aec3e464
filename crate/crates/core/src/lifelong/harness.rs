use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    class_labels, edge_as_vertex_transform, encode_features, extend_vocabularies, split_vertices, target_batches,
    BatchSampler, ClassVocabulary, FeatureMatrix, PredicateVocabulary, Split, SplitTag, Subgraph, DEFAULT_BATCH_CAP,
};
use crate::nn::{adam_step, AdamState, Architecture, BatchInput, Checkpoint, Hyper, Network};
use crate::rdf::SnapshotGraph;
use crate::summary::{summarize, Summary, SummaryModel, SummaryOptions};

use super::matrix::ResultMatrix;

pub const DEFAULT_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restart {
    #[default]
    Warm,
    Cold,
}

impl fmt::Display for Restart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Restart::Warm => "warm",
            Restart::Cold => "cold",
        })
    }
}

impl FromStr for Restart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warm" => Ok(Restart::Warm),
            "cold" => Ok(Restart::Cold),
            _ => Err(Error::Config(format!("unknown restart mode {s:?}"))),
        }
    }
}

/// Per-task training settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub arch: Architecture,
    pub hyper: Hyper,
    pub iterations: usize,
    pub batch_cap: usize,
    /// Zero-initialize parameters added by growth.
    pub zero_init_growth: bool,
    /// Evaluate the validation split after every iteration.
    pub track_validation: bool,
}

impl TrainConfig {
    pub fn new(arch: Architecture) -> Self {
        Self {
            arch,
            hyper: Hyper::defaults(arch),
            iterations: DEFAULT_ITERATIONS,
            batch_cap: DEFAULT_BATCH_CAP,
            zero_init_growth: false,
            track_validation: false,
        }
    }
}

/// A snapshot prepared for training and evaluation. Features and labels use
/// the vocabularies the task was prepared with; models narrower than those
/// see truncated features, and labels they cannot emit count as errors.
#[derive(Debug, Clone)]
pub struct Task {
    pub graph: SnapshotGraph,
    pub summary: Summary,
    pub split: Split,
    pub features: FeatureMatrix,
    pub labels: Vec<u32>,
}

impl Task {
    pub fn timestamp(&self) -> &str {
        self.graph.timestamp()
    }
}

/// Ordered tasks with the cumulative vocabularies after each of them.
#[derive(Debug, Clone)]
pub struct TaskSequence {
    pub tasks: Vec<Task>,
    pub predicates: Vec<PredicateVocabulary>,
    pub classes: Vec<ClassVocabulary>,
    pub model: SummaryModel,
    pub opts: SummaryOptions,
    pub split_seed: u64,
}

impl TaskSequence {
    /// Summarize every snapshot, grow the vocabularies task by task and
    /// encode each task against the final vocabularies.
    pub fn build(
        graphs: Vec<SnapshotGraph>,
        model: SummaryModel,
        opts: SummaryOptions,
        split_seed: u64,
    ) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::Config("a task sequence needs at least one snapshot".into()));
        }
        for w in graphs.windows(2) {
            if w[0].timestamp() >= w[1].timestamp() {
                return Err(Error::Config(format!(
                    "snapshot timestamps must increase: {} then {}",
                    w[0].timestamp(),
                    w[1].timestamp()
                )));
            }
        }
        let summaries: Vec<Summary> = graphs.par_iter().map(|g| summarize(g, model, opts)).collect();
        let mut pv = PredicateVocabulary::new();
        let mut cv = ClassVocabulary::new();
        let mut predicates = Vec::with_capacity(graphs.len());
        let mut classes = Vec::with_capacity(graphs.len());
        for s in &summaries {
            extend_vocabularies(&s.graph, &mut pv, &mut cv);
            predicates.push(pv.clone());
            classes.push(cv.clone());
        }
        let tasks = graphs
            .into_iter()
            .zip(summaries)
            .map(|(graph, summary)| prepare_task(graph, summary, &pv, &cv, opts, split_seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tasks,
            predicates,
            classes,
            model,
            opts,
            split_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.tasks.iter().map(|t| t.timestamp().to_string()).collect()
    }
}

pub fn prepare_task(
    graph: SnapshotGraph,
    summary: Summary,
    pv: &PredicateVocabulary,
    cv: &ClassVocabulary,
    opts: SummaryOptions,
    split_seed: u64,
) -> Result<Task> {
    let features = encode_features(&graph, pv, opts)?;
    let labels = class_labels(&summary, cv)?;
    let split = split_vertices(&graph, split_seed);
    Ok(Task {
        graph,
        summary,
        split,
        features,
        labels,
    })
}

/// Random stream of task `index` under `seed`.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn to_input(b: &Subgraph, arch: Architecture, width: usize) -> Result<BatchInput> {
    if arch.edge_as_vertex() {
        Ok(BatchInput::from_subgraph(&edge_as_vertex_transform(b)?, width))
    } else {
        Ok(BatchInput::from_subgraph(b, width))
    }
}

/// Accuracy on the vertices of `tag`, with the fraction whose class the
/// network cannot emit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub accuracy: f64,
    pub evaluated: usize,
    pub unseen_fraction: f64,
}

pub fn evaluate(net: &Network, task: &Task, tag: SplitTag, batch_cap: usize, model: SummaryModel) -> Result<Accuracy> {
    let targets = task.split.vertices(tag);
    if targets.is_empty() {
        return Ok(Accuracy {
            accuracy: 0.0,
            evaluated: 0,
            unseen_fraction: 0.0,
        });
    }
    let hops = net.arch.batch_hops(model.hops());
    let batches = target_batches(&task.graph, &task.features, &task.labels, &targets, hops, batch_cap);
    let mut correct = 0usize;
    let mut unseen = 0usize;
    for b in &batches {
        let input = to_input(b, net.arch, net.input_width())?;
        let pred = net.predict(&input)?;
        for (p, &l) in pred.iter().zip(&b.labels) {
            correct += (*p == l) as usize;
            unseen += (l as usize >= net.classes()) as usize;
        }
    }
    let n = targets.len() as f64;
    Ok(Accuracy {
        accuracy: correct as f64 / n,
        evaluated: targets.len(),
        unseen_fraction: unseen as f64 / n,
    })
}

/// Loss trace of one task.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub losses: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub validation: Vec<f64>,
}

/// Train `net` on `task` for the configured iterations with a fresh Adam
/// state. Labels must fit the network's output width.
pub fn train_task(
    net: &mut Network,
    task: &Task,
    cfg: &TrainConfig,
    model: SummaryModel,
    rng: &mut ChaCha8Rng,
) -> Result<TrainLog> {
    let hops = cfg.arch.batch_hops(model.hops());
    let sampler = BatchSampler::new(
        &task.graph,
        &task.features,
        &task.labels,
        &task.split,
        hops,
        cfg.batch_cap,
    )?;
    let mut state = AdamState::new(&net.params);
    let mut log = TrainLog::default();
    for it in 0..cfg.iterations {
        let batch = sampler.sample(rng);
        let input = to_input(&batch, cfg.arch, net.input_width())?;
        let step = net.loss_and_grads(&input, Some(rng)).map_err(|e| match e {
            Error::Numerical(m) => Error::Numerical(format!("task {}, step {}: {m}", task.timestamp(), it + 1)),
            other => other,
        })?;
        adam_step(&mut net.params, &step.grads, &mut state, net.hyper.lr)?;
        for (p, name) in net.params.iter().zip(net.param_names()) {
            p.ensure_finite(&format!("task {}, step {}, {name}", task.timestamp(), it + 1))?;
        }
        log.losses.push(step.loss);
        log.batch_sizes.push(batch.len());
        if cfg.track_validation {
            log.validation
                .push(evaluate(net, task, SplitTag::Val, cfg.batch_cap, model)?.accuracy);
        }
    }
    Ok(log)
}

/// Per-task record of a sequence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDiagnostics {
    pub timestamp: String,
    pub vertices: usize,
    pub classes: usize,
    pub predicates: usize,
    pub train_vertices: usize,
    pub final_loss: f64,
    pub validation_accuracy: f64,
    /// Per evaluated task, the share of test vertices with unseen classes.
    pub unseen_fraction: Vec<f64>,
    pub log: TrainLog,
}

#[derive(Debug, Clone)]
pub struct SequenceRun {
    pub checkpoints: Vec<Checkpoint>,
    pub matrix: ResultMatrix,
    pub diagnostics: Vec<TaskDiagnostics>,
}

pub fn run_sequence(seq: &TaskSequence, cfg: &TrainConfig, restart: Restart, seed: u64) -> Result<SequenceRun> {
    let mut checkpoints: Vec<Checkpoint> = Vec::with_capacity(seq.len());
    let mut rows = Vec::with_capacity(seq.len());
    let mut diagnostics = Vec::with_capacity(seq.len());
    for (i, task) in seq.tasks.iter().enumerate() {
        let width = seq.predicates[i].width();
        let classes = seq.classes[i].width();
        let mut rng = task_rng(seed, i as u64);
        let mut net = match (restart, checkpoints.last()) {
            (Restart::Warm, Some(prev)) => {
                let mut n = prev.network.clone();
                n.grow(width, classes, &mut rng, cfg.zero_init_growth)?;
                n
            }
            _ => Network::new(cfg.arch, cfg.hyper, width, classes, &mut rng)?,
        };
        let log = train_task(&mut net, task, cfg, seq.model, &mut rng)?;
        let results = seq
            .tasks
            .par_iter()
            .map(|t| evaluate(&net, t, SplitTag::Test, cfg.batch_cap, seq.model))
            .collect::<Result<Vec<_>>>()?;
        let val = evaluate(&net, task, SplitTag::Val, cfg.batch_cap, seq.model)?;
        rows.push(results.iter().map(|a| a.accuracy).collect::<Vec<_>>());
        diagnostics.push(TaskDiagnostics {
            timestamp: task.timestamp().to_string(),
            vertices: task.graph.vertex_count(),
            classes,
            predicates: width,
            train_vertices: task.split.count(SplitTag::Train),
            final_loss: log.losses.last().copied().unwrap_or(f64::NAN),
            validation_accuracy: val.accuracy,
            unseen_fraction: results.iter().map(|a| a.unseen_fraction).collect(),
            log,
        });
        checkpoints.push(Checkpoint {
            network: net,
            predicates: seq.predicates[i].clone(),
            classes: seq.classes[i].clone(),
            model: seq.model,
            include_rdf_type: seq.opts.include_rdf_type,
            seed,
            trained_through: task.timestamp().to_string(),
        });
    }
    Ok(SequenceRun {
        checkpoints,
        matrix: ResultMatrix::new(seq.labels(), rows)?,
        diagnostics,
    })
}

/// Accuracies of an old checkpoint on a new task: unchanged, retrained from
/// the grown checkpoint, and a fresh network trained from scratch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWarpReport {
    pub frozen: f64,
    pub retrained: f64,
    pub fresh: f64,
    pub frozen_unseen_fraction: f64,
}

pub fn time_warp(old: &Checkpoint, graph: SnapshotGraph, cfg: &TrainConfig, seed: u64) -> Result<TimeWarpReport> {
    if cfg.arch != old.network.arch {
        return Err(Error::Config(format!(
            "checkpoint is a {} network, configuration asks for {}",
            old.network.arch, cfg.arch
        )));
    }
    let opts = SummaryOptions {
        include_rdf_type: old.include_rdf_type,
    };
    let summary = summarize(&graph, old.model, opts);
    let mut pv = old.predicates.clone();
    let mut cv = old.classes.clone();
    extend_vocabularies(&summary.graph, &mut pv, &mut cv);
    let task = prepare_task(graph, summary, &pv, &cv, opts, seed)?;

    let frozen = evaluate(&old.network, &task, SplitTag::Test, cfg.batch_cap, old.model)?;

    let mut rng = task_rng(seed, 0);
    let mut warm = old.network.clone();
    warm.grow(pv.width(), cv.width(), &mut rng, cfg.zero_init_growth)?;
    train_task(&mut warm, &task, cfg, old.model, &mut rng)?;
    let retrained = evaluate(&warm, &task, SplitTag::Test, cfg.batch_cap, old.model)?;

    let mut rng = task_rng(seed, 0);
    let mut fresh = Network::new(cfg.arch, cfg.hyper, pv.width(), cv.width(), &mut rng)?;
    train_task(&mut fresh, &task, cfg, old.model, &mut rng)?;
    let fresh = evaluate(&fresh, &task, SplitTag::Test, cfg.batch_cap, old.model)?;

    Ok(TimeWarpReport {
        frozen: frozen.accuracy,
        retrained: retrained.accuracy,
        fresh: fresh.accuracy,
        frozen_unseen_fraction: frozen.unseen_fraction,
    })
}
