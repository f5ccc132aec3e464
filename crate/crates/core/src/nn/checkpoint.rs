use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ClassVocabulary, PredicateVocabulary};
use crate::summary::SummaryModel;
use crate::tensor::Tensor;

use super::network::{Architecture, Hyper, Network};

pub const MAGIC: &[u8; 4] = b"GSLC";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

/// A trained network with the vocabularies it was trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub predicates: PredicateVocabulary,
    pub classes: ClassVocabulary,
    pub model: SummaryModel,
    pub include_rdf_type: bool,
    pub seed: u64,
    /// Timestamp of the last snapshot trained on.
    pub trained_through: String,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    architecture: Architecture,
    hyper: Hyper,
    input_width: usize,
    classes: usize,
    summary_model: SummaryModel,
    include_rdf_type: bool,
    seed: u64,
    trained_through: String,
    precision: Precision,
    predicate_digest: String,
    class_digest: String,
    predicates: Vec<String>,
    class_hashes: Vec<String>,
    tensors: Vec<TensorEntry>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn to_bytes(&self, precision: Precision) -> Vec<u8> {
        let net = &self.network;
        let header = Header {
            architecture: net.arch,
            hyper: net.hyper,
            input_width: net.input_width(),
            classes: net.classes(),
            summary_model: self.model,
            include_rdf_type: self.include_rdf_type,
            seed: self.seed,
            trained_through: self.trained_through.clone(),
            precision,
            predicate_digest: self.predicates.digest(),
            class_digest: self.classes.digest(),
            predicates: self.predicates.iris().to_vec(),
            class_hashes: self.classes.classes().iter().map(|q| q.to_hex()).collect(),
            tensors: net
                .param_names()
                .into_iter()
                .zip(&net.params)
                .map(|(name, t)| TensorEntry {
                    name,
                    rows: t.rows(),
                    cols: t.cols(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for t in &net.params {
            for &x in t.data() {
                match precision {
                    Precision::F64 => out.extend_from_slice(&x.to_le_bytes()),
                    Precision::F32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(bad("not a checkpoint (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
        let h: Header = serde_json::from_slice(body).map_err(|e| bad(format!("header: {e}")))?;

        let predicates = PredicateVocabulary::read(h.predicates.join("\n").as_bytes())?;
        let classes = ClassVocabulary::read(h.class_hashes.join("\n").as_bytes())?;
        if predicates.digest() != h.predicate_digest || classes.digest() != h.class_digest {
            return Err(bad("vocabulary digest mismatch"));
        }

        let width = match h.precision {
            Precision::F64 => 8,
            Precision::F32 => 4,
        };
        let mut at = 16 + len;
        let mut params = Vec::with_capacity(h.tensors.len());
        for e in &h.tensors {
            let n = e.rows * e.cols;
            let raw = bytes
                .get(at..at + n * width)
                .ok_or_else(|| bad(format!("truncated payload in {}", e.name)))?;
            let data = raw
                .chunks_exact(width)
                .map(|c| match h.precision {
                    Precision::F64 => f64::from_le_bytes(c.try_into().unwrap()),
                    Precision::F32 => f32::from_le_bytes(c.try_into().unwrap()) as f64,
                })
                .collect();
            params.push(Tensor::from_vec(e.rows, e.cols, data)?);
            at += n * width;
        }
        if at != bytes.len() {
            return Err(bad("trailing bytes after payload"));
        }
        let network = Network::from_parts(h.architecture, h.hyper, params)?;
        if network.input_width() != h.input_width || network.classes() != h.classes {
            return Err(bad("declared dimensions disagree with tensors"));
        }
        if network.param_names() != h.tensors.iter().map(|e| e.name.clone()).collect::<Vec<_>>() {
            return Err(bad("unexpected tensor names"));
        }
        Ok(Self {
            network,
            predicates,
            classes,
            model: h.summary_model,
            include_rdf_type: h.include_rdf_type,
            seed: h.seed,
            trained_through: h.trained_through,
        })
    }

    pub fn save(&self, path: &Path, precision: Precision) -> Result<()> {
        std::fs::write(path, self.to_bytes(precision)).map_err(|e| Error::io(path, 0, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, 0, e))?;
        Self::from_bytes(&bytes)
    }
}
