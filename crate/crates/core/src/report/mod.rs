//! Run configuration, output manifests and the end-to-end pipelines behind
//! the command-line tool.

mod config;
mod manifest;
mod pipeline;
mod svg;

pub use config::{DegreeCap, EvalSplit, RunConfig, DEFAULT_AC2_DEGREE_CAP, KEYS, SEED_ENV};
pub use manifest::{peak_memory_kib, RunManifest, StageRecord, MANIFEST_FILE};
pub use pipeline::{
    cmd_diff, cmd_eval, cmd_lifelong, cmd_report, cmd_summarize, load_filtered, read_summary_dir, EvalRecord, PairDiff,
    SummarizeStats, EQCS_TSV, HEATMAP_SVG, META_COLUMNS, REPORT_JSON, RESULTS_CSV, SERIES_COLUMNS, SUMMARY_JSON,
};
pub use svg::heatmap_svg;
