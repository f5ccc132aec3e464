use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::features::{extend_vocabularies, Split, SplitTag};
use crate::lifelong::{evaluate, prepare_task, run_sequence, time_warp, LifelongReport, ResultMatrix, TaskSequence};
use crate::measures::{diff, histogram_csv, meta_track, snapshot_reports, unary_stats, DiffReport, SummaryStats};
use crate::nn::Checkpoint;
use crate::rdf::{filter_high_degree, load_snapshot, LoadStats, SnapshotGraph};
use crate::summary::{
    read_vertex_eqcs, summarize, write_summary_edges, write_vertex_eqcs, ExtensionMap, SummaryGraph, SummaryModel,
};

use super::config::{EvalSplit, RunConfig};
use super::manifest::RunManifest;
use super::svg::heatmap_svg;

pub const SUMMARY_JSON: &str = "summary.json";
pub const EQCS_TSV: &str = "eqcs.tsv";

/// Column order of `series.csv` written by [`cmd_diff`].
pub const SERIES_COLUMNS: &str =
    "timestamp,eqcs,added,deleted,recurring,jaccard_prev,js_prev,avg_size,avg_edges,cumulative_seen";

/// Column order of `meta.csv` written by [`cmd_diff`].
pub const META_COLUMNS: &str = "timestamp,eqcs,added_vs_prev,deleted_vs_prev,recurring_vs_prev,new_vs_first,gone_vs_first,reappearing,disappeared,cumulative_seen";

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, 0, e))
}

/// Load one snapshot and apply the configured degree filter.
pub fn load_filtered(cfg: &RunConfig, path: &Path, label: &str) -> Result<SnapshotGraph> {
    let g = load_snapshot(path, label)?;
    Ok(match cfg.degree_limit() {
        Some(cap) => filter_high_degree(&g, Some(cap), cfg.degree_mode),
        None => g,
    })
}

fn load_all(cfg: &RunConfig, m: &mut RunManifest) -> Result<Vec<SnapshotGraph>> {
    if cfg.snapshots.is_empty() {
        return Err(Error::Config("no snapshots configured".into()));
    }
    let labels = cfg.snapshot_labels()?;
    m.stage("load", || {
        cfg.snapshots
            .iter()
            .zip(&labels)
            .map(|(p, l)| load_filtered(cfg, p, l))
            .collect()
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummarizeStats {
    pub timestamp: String,
    pub model: SummaryModel,
    pub include_rdf_type: bool,
    pub degree_cap: Option<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub load: LoadStats,
    pub summary: SummaryStats,
}

/// Ingest, filter and summarize one snapshot. Writes `eqcs.tsv`,
/// `edges.tsv`, `summary.json`, `stats.json` and histogram CSVs.
pub fn cmd_summarize(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    if cfg.snapshots.len() != 1 {
        return Err(Error::Config(format!(
            "summarize takes exactly one snapshot, got {}",
            cfg.snapshots.len()
        )));
    }
    prepare_out(out)?;
    let mut m = RunManifest::new("summarize", cfg.to_text());
    let label = cfg.snapshot_labels()?.remove(0);
    let raw = m.stage("load", || load_snapshot(&cfg.snapshots[0], &label))?;
    let load = raw.stats().clone();
    let g = m.stage("filter", || {
        Ok(match cfg.degree_limit() {
            Some(cap) => filter_high_degree(&raw, Some(cap), cfg.degree_mode),
            None => raw.clone(),
        })
    })?;
    drop(raw);
    let s = m.stage("summarize", || Ok(summarize(&g, cfg.model, cfg.summary_options())))?;
    let stats = m.stage("stats", || unary_stats(&s.graph, &s.extension))?;

    let mut eqcs = Vec::new();
    write_vertex_eqcs(&g, &s, &mut eqcs).map_err(|e| Error::io(out.join(EQCS_TSV), 0, e))?;
    let mut edges = Vec::new();
    write_summary_edges(&s.graph, &mut edges).map_err(|e| Error::io(out.join("edges.tsv"), 0, e))?;
    m.write_output(out, EQCS_TSV, &eqcs)?;
    m.write_output(out, "edges.tsv", &edges)?;
    m.write_output(out, SUMMARY_JSON, &json(&s.graph))?;
    m.write_output(
        out,
        "attrs_per_eqc.csv",
        histogram_csv(&stats.dist_attrs_per_eqc).as_bytes(),
    )?;
    m.write_output(
        out,
        "members_per_eqc.csv",
        histogram_csv(&stats.dist_members_per_eqc).as_bytes(),
    )?;
    m.write_output(
        out,
        "predicate_usage.csv",
        histogram_csv(&stats.dist_predicate_usage).as_bytes(),
    )?;
    let report = SummarizeStats {
        timestamp: label,
        model: cfg.model,
        include_rdf_type: cfg.include_rdf_type,
        degree_cap: cfg.degree_limit(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        load,
        summary: stats,
    };
    m.write_output(out, "stats.json", &json(&report))?;
    m.write(out)?;
    Ok(m)
}

/// Read a directory written by [`cmd_summarize`].
pub fn read_summary_dir(dir: &Path) -> Result<(SummaryGraph, ExtensionMap)> {
    let sp = dir.join(SUMMARY_JSON);
    let text = std::fs::read_to_string(&sp).map_err(|e| Error::io(&sp, 0, e))?;
    let graph: SummaryGraph =
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", sp.display())))?;
    let ep = dir.join(EQCS_TSV);
    let f = std::fs::File::open(&ep).map_err(|e| Error::io(&ep, 0, e))?;
    let (ext, _) = read_vertex_eqcs(std::io::BufReader::new(f))?;
    if ext.hashes().ne(graph.eqcs.iter().copied()) {
        return Err(Error::Invalid(format!("{} disagrees with {}", EQCS_TSV, SUMMARY_JSON)));
    }
    Ok((graph, ext))
}

fn is_summary_dir(p: &Path) -> bool {
    p.is_dir() && p.join(SUMMARY_JSON).is_file()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDiff {
    pub from: String,
    pub to: String,
    #[serde(flatten)]
    pub report: DiffReport,
}

/// Compare consecutive snapshots or summary directories. Writes `diff.json`,
/// `series.csv` and `meta.csv`.
pub fn cmd_diff(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    if cfg.snapshots.len() < 2 {
        return Err(Error::Config("diff needs at least two inputs".into()));
    }
    prepare_out(out)?;
    let mut m = RunManifest::new("diff", cfg.to_text());
    let labels = cfg.snapshot_labels()?;
    let summaries: Vec<(SummaryGraph, ExtensionMap)> = m.stage("summarize", || {
        cfg.snapshots
            .iter()
            .zip(&labels)
            .map(|(p, l)| {
                if is_summary_dir(p) {
                    read_summary_dir(p)
                } else {
                    let g = load_filtered(cfg, p, l)?;
                    let s = summarize(&g, cfg.model, cfg.summary_options());
                    Ok((s.graph, s.extension))
                }
            })
            .collect()
    })?;
    let model = summaries[0].0.model;
    if let Some((s, _)) = summaries.iter().find(|(s, _)| s.model != model) {
        return Err(Error::Config(format!(
            "mixed summary models: {} and {} ({})",
            model, s.model, s.timestamp
        )));
    }
    let seq: Vec<(&SummaryGraph, &ExtensionMap)> = summaries.iter().map(|(s, e)| (s, e)).collect();
    let (pairs, series, track) = m.stage("measures", || {
        let pairs = seq
            .windows(2)
            .map(|w| {
                Ok(PairDiff {
                    from: w[0].0.timestamp.clone(),
                    to: w[1].0.timestamp.clone(),
                    report: diff(w[0], w[1], cfg.js_normalization)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let series = snapshot_reports(&seq, cfg.js_normalization)?;
        let track = meta_track(seq.iter().map(|(s, _)| *s))?;
        Ok((pairs, series, track))
    })?;

    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let mut csv = format!("{SERIES_COLUMNS}\n");
    for (r, (s, _)) in series.iter().zip(&seq) {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.timestamp,
            s.eqcs.len(),
            r.added,
            r.deleted,
            r.recurring,
            opt(r.jaccard_prev),
            opt(r.js_prev),
            r.avg_size,
            r.avg_edges,
            r.cumulative_seen
        )
        .unwrap();
    }
    let mut meta = format!("{META_COLUMNS}\n");
    for (e, (s, _)) in track.entries.iter().zip(&seq) {
        writeln!(
            meta,
            "{},{},{},{},{},{},{},{},{},{}",
            s.timestamp,
            e.eqcs,
            e.added_vs_prev,
            e.deleted_vs_prev,
            e.recurring_vs_prev,
            e.new_vs_first,
            e.gone_vs_first,
            e.reappearing,
            e.disappeared,
            e.cumulative_seen
        )
        .unwrap();
    }
    m.write_output(out, "diff.json", &json(&pairs))?;
    m.write_output(out, "series.csv", csv.as_bytes())?;
    m.write_output(out, "meta.csv", meta.as_bytes())?;
    m.write(out)?;
    Ok(m)
}

pub const RESULTS_CSV: &str = "results.csv";
pub const REPORT_JSON: &str = "report.json";
pub const HEATMAP_SVG: &str = "heatmap.svg";

fn checkpoint_name(i: usize) -> String {
    format!("checkpoints/task-{:03}.gslc", i + 1)
}

/// Train over the snapshot sequence and evaluate every checkpoint on every
/// task. With `time_warp` set, also run the old checkpoint against the first
/// snapshot.
pub fn cmd_lifelong(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    prepare_out(out)?;
    let mut m = RunManifest::new("lifelong", cfg.to_text());
    let old = cfg.time_warp.as_deref().map(Checkpoint::load).transpose()?;
    let graphs = load_all(cfg, &mut m)?;
    let first = graphs[0].clone();
    let seq = m.stage("prepare", || {
        TaskSequence::build(graphs, cfg.model, cfg.summary_options(), cfg.seed)
    })?;
    let tc = cfg.train_config();
    let run = m.stage("train", || run_sequence(&seq, &tc, cfg.restart, cfg.seed))?;
    let report = LifelongReport::from_matrix(&run.matrix)?;

    for (i, ck) in run.checkpoints.iter().enumerate() {
        m.write_output(out, &checkpoint_name(i), &ck.to_bytes(cfg.checkpoint_precision))?;
    }
    let last = seq.len() - 1;
    m.write_output(out, "predicates.txt", seq.predicates[last].to_text().as_bytes())?;
    m.write_output(out, "classes.txt", seq.classes[last].to_text().as_bytes())?;
    m.write_output(out, RESULTS_CSV, run.matrix.to_csv().as_bytes())?;
    m.write_output(out, REPORT_JSON, &json(&report))?;
    m.write_output(out, "diagnostics.json", &json(&run.diagnostics))?;
    m.write_output(out, HEATMAP_SVG, heatmap_svg(&run.matrix).as_bytes())?;

    if let Some(old) = old {
        let warp = m.stage("time-warp", || time_warp(&old, first, &tc, cfg.seed))?;
        m.write_output(out, "time_warp.json", &json(&warp))?;
    }
    m.write(out)?;
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub snapshot: String,
    pub split: EvalSplit,
    pub accuracy: f64,
    pub evaluated: usize,
    pub unseen_fraction: f64,
}

/// Apply a checkpoint to each configured snapshot.
pub fn cmd_eval(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    let path: PathBuf = cfg
        .checkpoint
        .clone()
        .ok_or_else(|| Error::Config("eval needs a checkpoint".into()))?;
    prepare_out(out)?;
    let mut m = RunManifest::new("eval", cfg.to_text());
    let ck = m.stage("load-checkpoint", || Checkpoint::load(&path))?;
    let mut eval_cfg = cfg.clone();
    eval_cfg.model = ck.model;
    eval_cfg.include_rdf_type = ck.include_rdf_type;
    let graphs = load_all(&eval_cfg, &mut m)?;
    let tag = match cfg.eval_split {
        EvalSplit::Train => SplitTag::Train,
        EvalSplit::Val => SplitTag::Val,
        EvalSplit::Test | EvalSplit::All => SplitTag::Test,
    };
    let records = m.stage("evaluate", || {
        graphs
            .into_par_iter()
            .map(|g| {
                let opts = eval_cfg.summary_options();
                let s = summarize(&g, ck.model, opts);
                let mut pv = ck.predicates.clone();
                let mut cv = ck.classes.clone();
                extend_vocabularies(&s.graph, &mut pv, &mut cv);
                let mut task = prepare_task(g, s, &pv, &cv, opts, cfg.seed)?;
                if cfg.eval_split == EvalSplit::All {
                    task.split = Split::from_tags(vec![SplitTag::Test; task.graph.vertex_count()]);
                }
                let a = evaluate(&ck.network, &task, tag, cfg.batch_cap, ck.model)?;
                Ok(EvalRecord {
                    snapshot: task.timestamp().to_string(),
                    split: cfg.eval_split,
                    accuracy: a.accuracy,
                    evaluated: a.evaluated,
                    unseen_fraction: a.unseen_fraction,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    m.write_output(out, "eval.json", &json(&records))?;
    m.write(out)?;
    Ok(m)
}

/// Recompute the lifelong measures and heatmap from a result-matrix CSV.
pub fn cmd_report(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    let path = cfg
        .results
        .clone()
        .ok_or_else(|| Error::Config("report needs a results CSV".into()))?;
    prepare_out(out)?;
    let mut m = RunManifest::new("report", cfg.to_text());
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, 0, e))?;
    let r = ResultMatrix::from_csv(&text)?;
    let report = m.stage("measures", || LifelongReport::from_matrix(&r))?;
    m.write_output(out, REPORT_JSON, &json(&report))?;
    m.write_output(out, HEATMAP_SVG, heatmap_svg(&r).as_bytes())?;
    m.write(out)?;
    Ok(m)
}
