use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const GELU_CUBIC: f64 = 0.044_715;

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// GELU, tanh approximation: `0.5·x·(1 + tanh(√(2/π)·(x + 0.044715·x³)))`.
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (SQRT_2_OVER_PI * (x + GELU_CUBIC * x * x * x)).tanh())
}

pub fn gelu_grad(x: f64) -> f64 {
    let t = (SQRT_2_OVER_PI * (x + GELU_CUBIC * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_CUBIC * x * x)
}

/// Inverted-dropout mask: entries are `0` or `1/(1-p)`. `None` when no
/// dropout applies, in which case no randomness is consumed.
pub fn dropout_mask<R: RngCore + ?Sized>(rows: usize, cols: usize, p: f64, rng: Option<&mut R>) -> Option<Tensor> {
    let rng = rng?;
    if p <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - p);
    let mut m = Tensor::zeros(rows, cols);
    for x in m.data_mut() {
        if rng.gen::<f64>() >= p {
            *x = keep;
        }
    }
    Some(m)
}

pub(crate) fn apply_mask(t: &mut Tensor, mask: Option<&Tensor>) {
    if let Some(m) = mask {
        for (x, k) in t.data_mut().iter_mut().zip(m.data()) {
            *x *= k;
        }
    }
}

/// Square sparse matrix in compressed rows, columns ascending per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Adjacency {
    /// `Ã[v,u] = 1` for each edge `v → u`, plus the diagonal when `self_loops`.
    /// With `normalize`, entries become `1/√(d̂_v·d̂_u)` where `d̂` counts the
    /// nonzeros of a row of `Ã`.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        self_loops: bool,
        normalize: bool,
    ) -> Self {
        let mut pairs: Vec<(u32, u32)> = edges.into_iter().collect();
        if self_loops {
            pairs.extend((0..n as u32).map(|v| (v, v)));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(v, _) in &pairs {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let cols: Vec<u32> = pairs.iter().map(|&(_, u)| u).collect();
        let mut vals = vec![1.0; cols.len()];
        if normalize {
            let deg: Vec<f64> = (0..n).map(|v| (offsets[v + 1] - offsets[v]) as f64).collect();
            for v in 0..n {
                for k in offsets[v]..offsets[v + 1] {
                    vals[k] = 1.0 / (deg[v] * deg[cols[k] as usize]).sqrt();
                }
            }
        }
        Self { n, offsets, cols, vals }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, v: usize, u: usize) -> f64 {
        let row = &self.cols[self.offsets[v]..self.offsets[v + 1]];
        match row.binary_search(&(u as u32)) {
            Ok(k) => self.vals[self.offsets[v] + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Adjacency {
        let mut triples: Vec<(u32, u32, f64)> = Vec::with_capacity(self.nnz());
        for v in 0..self.n {
            for k in self.offsets[v]..self.offsets[v + 1] {
                triples.push((self.cols[k], v as u32, self.vals[k]));
            }
        }
        triples.sort_by_key(|&(r, c, _)| (r, c));
        let mut offsets = vec![0usize; self.n + 1];
        for &(r, _, _) in &triples {
            offsets[r as usize + 1] += 1;
        }
        for i in 0..self.n {
            offsets[i + 1] += offsets[i];
        }
        Adjacency {
            n: self.n,
            offsets,
            cols: triples.iter().map(|t| t.1).collect(),
            vals: triples.iter().map(|t| t.2).collect(),
        }
    }

    /// `self · x`.
    pub fn spmm(&self, x: &Tensor) -> Result<Tensor> {
        if x.rows() != self.n {
            return Err(Error::Shape(format!(
                "adjacency of size {} applied to {} rows",
                self.n,
                x.rows()
            )));
        }
        let cols = x.cols();
        let mut out = Tensor::zeros(self.n, cols);
        if cols == 0 {
            return Ok(out);
        }
        out.data_mut().par_chunks_mut(cols).enumerate().for_each(|(v, orow)| {
            for k in self.offsets[v]..self.offsets[v + 1] {
                let a = self.vals[k];
                for (o, &h) in orow.iter_mut().zip(x.row(self.cols[k] as usize)) {
                    *o += a * h;
                }
            }
        });
        Ok(out)
    }
}

/// One graph convolution without bias: `ReLU(Ã · H · W)`.
pub fn gcn_layer(h_prev: &Tensor, adjacency: &Adjacency, w: &Tensor) -> Result<Tensor> {
    Ok(adjacency.spmm(&h_prev.matmul(w)?)?.map(relu))
}
