use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifelong::{Restart, TrainConfig, DEFAULT_ITERATIONS};
use crate::measures::JsNormalization;
use crate::nn::{Architecture, Hyper, Precision};
use crate::rdf::DegreeMode;
use crate::summary::{SummaryModel, SummaryOptions};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "SUMLIFE_SEED";

/// Degree cap used for AC2 unless configured otherwise.
pub const DEFAULT_AC2_DEGREE_CAP: usize = 100;

/// Keys accepted in configuration files, with their meaning.
pub const KEYS: &[(&str, &str)] = &[
    (
        "snapshots",
        "comma-separated snapshot files or directories, oldest first",
    ),
    (
        "timestamps",
        "comma-separated snapshot labels; default: file names without extension",
    ),
    ("model", "summary model: ac1 | ac2 (default ac1)"),
    ("architecture", "mlp | graph-mlp | gcn | gcn-edges (default mlp)"),
    ("hidden", "hidden layer width (default per architecture)"),
    ("layers", "graph-convolution layers (default per architecture)"),
    ("dropout", "dropout rate (default per architecture)"),
    ("lr", "Adam learning rate (default per architecture)"),
    ("alpha", "weight of the neighbour-contrastive loss (default 1)"),
    ("tau", "temperature of the neighbour-contrastive loss (default 2)"),
    (
        "normalize",
        "degree-normalize graph convolutions: true | false (default false)",
    ),
    ("iterations", "training iterations per task (default 100)"),
    ("batch_cap", "maximum vertices per batch (default 1000)"),
    ("seed", "run seed (default 0)"),
    (
        "degree_cap",
        "auto | none | N; auto caps AC2 at 100 and leaves AC1 unfiltered",
    ),
    ("degree_mode", "total | out | in (default total)"),
    ("restart", "warm | cold (default warm)"),
    ("include_rdf_type", "count rdf:type edges: true | false (default false)"),
    (
        "zero_init_growth",
        "zero-initialize grown parameters: true | false (default false)",
    ),
    (
        "js_normalization",
        "extension-mass | summary-vertices (default extension-mass)",
    ),
    ("checkpoint_precision", "f64 | f32 (default f64)"),
    (
        "track_validation",
        "record validation accuracy every iteration (default false)",
    ),
    ("time_warp", "checkpoint to test and retrain on the first snapshot"),
    ("checkpoint", "checkpoint applied by eval"),
    ("eval_split", "train | val | test | all (default test)"),
    ("results", "result-matrix CSV read by report"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DegreeCap {
    #[default]
    Auto,
    Unlimited,
    Limit(usize),
}

impl DegreeCap {
    pub fn resolve(self, model: SummaryModel) -> Option<usize> {
        match self {
            DegreeCap::Auto => (model == SummaryModel::Ac2).then_some(DEFAULT_AC2_DEGREE_CAP),
            DegreeCap::Unlimited => None,
            DegreeCap::Limit(n) => Some(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    Train,
    Val,
    #[default]
    Test,
    All,
}

/// Every setting of a run. Values not given keep their documented default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub snapshots: Vec<PathBuf>,
    pub timestamps: Vec<String>,
    pub model: SummaryModel,
    pub architecture: Architecture,
    pub hidden: Option<usize>,
    pub layers: Option<usize>,
    pub dropout: Option<f64>,
    pub lr: Option<f64>,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub normalize: bool,
    pub iterations: usize,
    pub batch_cap: usize,
    pub seed: u64,
    pub degree_cap: DegreeCap,
    pub degree_mode: DegreeMode,
    pub restart: Restart,
    pub include_rdf_type: bool,
    pub zero_init_growth: bool,
    pub js_normalization: JsNormalization,
    pub checkpoint_precision: Precision,
    pub track_validation: bool,
    pub time_warp: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub eval_split: EvalSplit,
    pub results: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            snapshots: Vec::new(),
            timestamps: Vec::new(),
            model: SummaryModel::Ac1,
            architecture: Architecture::Mlp,
            hidden: None,
            layers: None,
            dropout: None,
            lr: None,
            alpha: None,
            tau: None,
            normalize: false,
            iterations: DEFAULT_ITERATIONS,
            batch_cap: crate::features::DEFAULT_BATCH_CAP,
            seed: 0,
            degree_cap: DegreeCap::Auto,
            degree_mode: DegreeMode::Total,
            restart: Restart::Warm,
            include_rdf_type: false,
            zero_init_growth: false,
            js_normalization: JsNormalization::ExtensionMass,
            checkpoint_precision: Precision::F64,
            track_validation: false,
            time_warp: None,
            checkpoint: None,
            eval_split: EvalSplit::Test,
            results: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn opt_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty() && v != "none").then(|| PathBuf::from(v))
}

impl RunConfig {
    /// Apply one `key = value` setting. Dashes in keys are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "snapshots" => self.snapshots = list(v).into_iter().map(PathBuf::from).collect(),
            "timestamps" => self.timestamps = list(v),
            "model" => self.model = v.parse()?,
            "architecture" => self.architecture = v.parse()?,
            "hidden" => self.hidden = Some(parse(&key, v)?),
            "layers" => self.layers = Some(parse(&key, v)?),
            "dropout" => self.dropout = Some(parse(&key, v)?),
            "lr" => self.lr = Some(parse(&key, v)?),
            "alpha" => self.alpha = Some(parse(&key, v)?),
            "tau" => self.tau = Some(parse(&key, v)?),
            "normalize" => self.normalize = parse_bool(&key, v)?,
            "iterations" => self.iterations = parse(&key, v)?,
            "batch_cap" => self.batch_cap = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "degree_cap" => {
                self.degree_cap = match v {
                    "auto" => DegreeCap::Auto,
                    "none" => DegreeCap::Unlimited,
                    n => DegreeCap::Limit(parse(&key, n)?),
                }
            }
            "degree_mode" => self.degree_mode = v.parse()?,
            "restart" => self.restart = v.parse()?,
            "include_rdf_type" => self.include_rdf_type = parse_bool(&key, v)?,
            "zero_init_growth" => self.zero_init_growth = parse_bool(&key, v)?,
            "js_normalization" => self.js_normalization = v.parse()?,
            "checkpoint_precision" => {
                self.checkpoint_precision = match v {
                    "f64" => Precision::F64,
                    "f32" => Precision::F32,
                    _ => {
                        return Err(Error::Config(format!(
                            "checkpoint_precision: expected f64 or f32, got {v:?}"
                        )))
                    }
                }
            }
            "track_validation" => self.track_validation = parse_bool(&key, v)?,
            "time_warp" => self.time_warp = opt_path(v),
            "checkpoint" => self.checkpoint = opt_path(v),
            "eval_split" => {
                self.eval_split = match v {
                    "train" => EvalSplit::Train,
                    "val" => EvalSplit::Val,
                    "test" => EvalSplit::Test,
                    "all" => EvalSplit::All,
                    _ => return Err(Error::Config(format!("eval_split: unknown split {v:?}"))),
                }
            }
            "results" => self.results = opt_path(v),
            other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a configuration text of `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, strip(e))))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, 0, e))?;
        let mut c = Self::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    /// Apply the seed override from the environment, if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = parse(SEED_ENV, v.trim())?;
        }
        Ok(())
    }

    pub fn summary_options(&self) -> SummaryOptions {
        SummaryOptions {
            include_rdf_type: self.include_rdf_type,
        }
    }

    pub fn degree_limit(&self) -> Option<usize> {
        self.degree_cap.resolve(self.model)
    }

    pub fn hyper(&self) -> Hyper {
        let d = Hyper::defaults(self.architecture);
        Hyper {
            hidden: self.hidden.unwrap_or(d.hidden),
            layers: self.layers.unwrap_or(d.layers),
            dropout: self.dropout.unwrap_or(d.dropout),
            lr: self.lr.unwrap_or(d.lr),
            alpha: self.alpha.unwrap_or(d.alpha),
            tau: self.tau.unwrap_or(d.tau),
            normalize: self.normalize,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            arch: self.architecture,
            hyper: self.hyper(),
            iterations: self.iterations,
            batch_cap: self.batch_cap,
            zero_init_growth: self.zero_init_growth,
            track_validation: self.track_validation,
        }
    }

    /// Snapshot labels: configured timestamps or file names.
    pub fn snapshot_labels(&self) -> Result<Vec<String>> {
        if !self.timestamps.is_empty() {
            if self.timestamps.len() != self.snapshots.len() {
                return Err(Error::Config(format!(
                    "{} timestamps for {} snapshots",
                    self.timestamps.len(),
                    self.snapshots.len()
                )));
            }
            return Ok(self.timestamps.clone());
        }
        Ok(self
            .snapshots
            .iter()
            .map(|p| {
                let name = p
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let name = name.strip_suffix(".gz").unwrap_or(&name);
                match name.rsplit_once('.') {
                    Some((stem, "nt" | "nq" | "ntriples" | "nquads")) => stem.to_string(),
                    _ => name.to_string(),
                }
            })
            .collect())
    }

    /// Every setting, resolved, as configuration text. Feeding it back
    /// yields an equal configuration.
    pub fn to_text(&self) -> String {
        let h = self.hyper();
        let join = |v: &[String]| v.join(",");
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv(
            "snapshots",
            join(
                &self
                    .snapshots
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        kv("timestamps", join(&self.timestamps));
        kv("model", self.model.to_string());
        kv("architecture", self.architecture.to_string());
        kv("hidden", h.hidden.to_string());
        kv("layers", h.layers.to_string());
        kv("dropout", h.dropout.to_string());
        kv("lr", h.lr.to_string());
        kv("alpha", h.alpha.to_string());
        kv("tau", h.tau.to_string());
        kv("normalize", self.normalize.to_string());
        kv("iterations", self.iterations.to_string());
        kv("batch_cap", self.batch_cap.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "degree_cap",
            match self.degree_cap {
                DegreeCap::Auto => "auto".into(),
                DegreeCap::Unlimited => "none".into(),
                DegreeCap::Limit(n) => n.to_string(),
            },
        );
        kv("degree_mode", self.degree_mode.to_string());
        kv("restart", self.restart.to_string());
        kv("include_rdf_type", self.include_rdf_type.to_string());
        kv("zero_init_growth", self.zero_init_growth.to_string());
        kv("js_normalization", self.js_normalization.to_string());
        kv(
            "checkpoint_precision",
            match self.checkpoint_precision {
                Precision::F64 => "f64".into(),
                Precision::F32 => "f32".into(),
            },
        );
        kv("track_validation", self.track_validation.to_string());
        kv("time_warp", path(&self.time_warp));
        kv("checkpoint", path(&self.checkpoint));
        kv(
            "eval_split",
            match self.eval_split {
                EvalSplit::Train => "train",
                EvalSplit::Val => "val",
                EvalSplit::Test => "test",
                EvalSplit::All => "all",
            }
            .into(),
        );
        kv("results", path(&self.results));
        s
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
