use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Subgraph;
use crate::tensor::Tensor;

use super::loss::{combined_loss, cross_entropy, ncontrast_loss};
use super::ops::{apply_mask, dropout_mask, gelu, gelu_grad, relu, Adjacency};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Mlp,
    GraphMlp,
    Gcn,
    GcnEdges,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [Self::Mlp, Self::GraphMlp, Self::Gcn, Self::GcnEdges];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mlp => "mlp",
            Self::GraphMlp => "graph-mlp",
            Self::Gcn => "gcn",
            Self::GcnEdges => "gcn-edges",
        }
    }

    /// Hops of the batch neighbourhood the architecture reads, given the
    /// hops of the summary model.
    pub fn batch_hops(self, summary_hops: usize) -> usize {
        match self {
            Self::Mlp => 0,
            Self::GcnEdges => 2,
            Self::GraphMlp | Self::Gcn => summary_hops,
        }
    }

    pub fn edge_as_vertex(self) -> bool {
        self == Self::GcnEdges
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown architecture {s:?}")))
    }
}

/// Hyperparameters of one network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub hidden: usize,
    /// Hidden graph-convolution layers; only read by the GCN variants.
    pub layers: usize,
    pub dropout: f64,
    pub lr: f64,
    pub alpha: f64,
    pub tau: f64,
    pub normalize: bool,
}

impl Hyper {
    pub fn defaults(arch: Architecture) -> Self {
        let base = Hyper {
            hidden: 64,
            layers: 1,
            dropout: 0.0,
            lr: 0.1,
            alpha: 1.0,
            tau: 2.0,
            normalize: false,
        };
        match arch {
            Architecture::Mlp => Hyper {
                hidden: 1024,
                dropout: 0.5,
                lr: 0.01,
                ..base
            },
            Architecture::GraphMlp => Hyper {
                dropout: 0.2,
                lr: 0.01,
                ..base
            },
            Architecture::Gcn => base,
            Architecture::GcnEdges => Hyper {
                hidden: 32,
                layers: 2,
                ..base
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        let valid = self.lr > 0.0 && self.tau > 0.0 && self.alpha >= 0.0;
        if !valid {
            return Err(Error::Config("lr and tau must be positive, alpha non-negative".into()));
        }
        Ok(())
    }
}

/// Dense inputs of one batch.
#[derive(Debug, Clone)]
pub struct BatchInput {
    pub x: Tensor,
    /// Rows `0..targets` carry labels.
    pub targets: usize,
    pub labels: Vec<u32>,
    /// Directed edges between batch rows.
    pub edges: Vec<(u32, u32)>,
}

impl BatchInput {
    pub fn from_subgraph(b: &Subgraph, width: usize) -> Self {
        Self {
            x: b.features(width),
            targets: b.targets,
            labels: b.labels.clone(),
            edges: b.edges.iter().map(|e| (e.source, e.target)).collect(),
        }
    }

    /// 1-hop neighbours of every row in either direction, self excluded.
    pub fn positives(&self) -> Vec<Vec<u32>> {
        let mut pos = vec![Vec::new(); self.x.rows()];
        for &(u, v) in &self.edges {
            if u != v {
                pos[u as usize].push(v);
                pos[v as usize].push(u);
            }
        }
        for p in &mut pos {
            p.sort_unstable();
            p.dedup();
        }
        pos
    }
}

/// Loss and gradients of one training step.
#[derive(Debug, Clone)]
pub struct Step {
    pub loss: f64,
    pub ce: f64,
    pub nc: f64,
    pub grads: Vec<Tensor>,
}

/// A classifier: architecture, hyperparameters and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: Architecture,
    pub hyper: Hyper,
    pub params: Vec<Tensor>,
}

/// Glorot-uniform `rows × cols` sample.
pub fn glorot(rows: usize, cols: usize, rng: &mut dyn RngCore) -> Tensor {
    let limit = (6.0 / (rows + cols).max(1) as f64).sqrt();
    let mut t = Tensor::zeros(rows, cols);
    for x in t.data_mut() {
        *x = rng.gen_range(-limit..=limit);
    }
    t
}

fn layer_shapes(arch: Architecture, h: &Hyper, input: usize, classes: usize) -> Vec<(usize, usize)> {
    let hid = h.hidden;
    match arch {
        Architecture::Mlp => vec![(input, hid), (1, hid), (hid, classes), (1, classes)],
        Architecture::GraphMlp => vec![
            (input, hid),
            (1, hid),
            (hid, hid),
            (1, hid),
            (hid, classes),
            (1, classes),
        ],
        Architecture::Gcn | Architecture::GcnEdges => {
            let mut s = Vec::new();
            let mut fan_in = input;
            for _ in 0..h.layers {
                s.push((fan_in, hid));
                s.push((1, hid));
                fan_in = hid;
            }
            s.push((hid * h.layers, classes));
            s.push((1, classes));
            s
        }
    }
}

impl Network {
    /// Glorot-uniform weights and zero biases.
    pub fn new(arch: Architecture, hyper: Hyper, input: usize, classes: usize, rng: &mut dyn RngCore) -> Result<Self> {
        hyper.validate()?;
        if matches!(arch, Architecture::Gcn | Architecture::GcnEdges) && hyper.layers == 0 {
            return Err(Error::Config("a GCN needs at least one layer".into()));
        }
        let params = layer_shapes(arch, &hyper, input, classes)
            .into_iter()
            .map(|(r, c)| if r == 1 { Tensor::zeros(1, c) } else { glorot(r, c, rng) })
            .collect();
        Ok(Self { arch, hyper, params })
    }

    pub fn from_parts(arch: Architecture, hyper: Hyper, params: Vec<Tensor>) -> Result<Self> {
        hyper.validate()?;
        let input = params.first().map_or(0, Tensor::rows);
        let classes = params.last().map_or(0, Tensor::cols);
        let want = layer_shapes(arch, &hyper, input, classes);
        let got: Vec<_> = params.iter().map(Tensor::shape).collect();
        if want != got {
            return Err(Error::Shape(format!("{arch} expects tensors {want:?}, got {got:?}")));
        }
        Ok(Self { arch, hyper, params })
    }

    pub fn input_width(&self) -> usize {
        self.params[0].rows()
    }

    pub fn classes(&self) -> usize {
        self.params[self.params.len() - 1].cols()
    }

    pub fn param_names(&self) -> Vec<String> {
        match self.arch {
            Architecture::Mlp => ["hidden.w", "hidden.b", "out.w", "out.b"].map(String::from).to_vec(),
            Architecture::GraphMlp => ["hidden.w", "hidden.b", "embed.w", "embed.b", "out.w", "out.b"]
                .map(String::from)
                .to_vec(),
            Architecture::Gcn | Architecture::GcnEdges => {
                let mut n = Vec::new();
                for l in 1..=self.hyper.layers {
                    n.push(format!("conv{l}.w"));
                    n.push(format!("conv{l}.b"));
                }
                n.push("out.w".into());
                n.push("out.b".into());
                n
            }
        }
    }

    fn adjacency(&self, b: &BatchInput) -> Adjacency {
        Adjacency::from_edges(b.x.rows(), b.edges.iter().copied(), true, self.hyper.normalize)
    }

    fn check_input(&self, b: &BatchInput) -> Result<()> {
        if b.x.cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "batch width {} but network input {}",
                b.x.cols(),
                self.input_width()
            )));
        }
        if b.targets > b.x.rows() || b.labels.len() != b.targets {
            return Err(Error::Shape("batch targets and labels disagree".into()));
        }
        Ok(())
    }

    /// Logits of the target rows in evaluation mode.
    pub fn logits(&self, b: &BatchInput) -> Result<Tensor> {
        self.check_input(b)?;
        Ok(self.forward(b, None)?.logits)
    }

    /// Arg-max class of every target row; ties resolve to the lowest index.
    pub fn predict(&self, b: &BatchInput) -> Result<Vec<u32>> {
        Ok(argmax_rows(&self.logits(b)?))
    }

    /// Training-mode forward and backward pass. Dropout draws from `rng`;
    /// without one the pass runs deterministically as in evaluation.
    pub fn loss_and_grads(&self, b: &BatchInput, rng: Option<&mut dyn RngCore>) -> Result<Step> {
        self.check_input(b)?;
        let fwd = self.forward(b, rng)?;
        let (ce, dlogits) = cross_entropy(&fwd.logits, &b.labels)?;
        let (step, grads) = self.backward(b, &fwd, ce, &dlogits)?;
        for (g, name) in grads.iter().zip(self.param_names()) {
            g.ensure_finite(&format!("gradient of {name}"))?;
        }
        if !step.0.is_finite() {
            return Err(Error::Numerical(format!("loss is {}", step.0)));
        }
        Ok(Step {
            loss: step.0,
            ce,
            nc: step.1,
            grads,
        })
    }

    fn forward(&self, b: &BatchInput, mut rng: Option<&mut dyn RngCore>) -> Result<Forward> {
        let p = &self.params;
        let drop = self.hyper.dropout;
        match self.arch {
            Architecture::Mlp => {
                let x = b.x.select_rows(&(0..b.targets).collect::<Vec<_>>());
                let mut z0 = x.matmul(&p[0])?;
                z0.add_row_vector(&p[1])?;
                let mut h = z0.map(relu);
                let mask = dropout_mask(h.rows(), h.cols(), drop, rng.as_deref_mut());
                apply_mask(&mut h, mask.as_ref());
                let mut logits = h.matmul(&p[2])?;
                logits.add_row_vector(&p[3])?;
                Ok(Forward {
                    logits,
                    cache: Cache::Mlp { x, z0, mask, h },
                })
            }
            Architecture::GraphMlp => {
                let mut z0 = b.x.matmul(&p[0])?;
                z0.add_row_vector(&p[1])?;
                let mut a = z0.map(gelu);
                let mask = dropout_mask(a.rows(), a.cols(), drop, rng.as_deref_mut());
                apply_mask(&mut a, mask.as_ref());
                let mut z = a.matmul(&p[2])?;
                z.add_row_vector(&p[3])?;
                let zt = z.select_rows(&(0..b.targets).collect::<Vec<_>>());
                let mut logits = zt.matmul(&p[4])?;
                logits.add_row_vector(&p[5])?;
                Ok(Forward {
                    logits,
                    cache: Cache::GraphMlp { z0, mask, a, z, zt },
                })
            }
            Architecture::Gcn | Architecture::GcnEdges => {
                let adj = self.adjacency(b);
                let layers = self.hyper.layers;
                let mut pre = Vec::with_capacity(layers);
                let mut hs: Vec<Tensor> = Vec::with_capacity(layers);
                let mut masks = Vec::with_capacity(layers);
                for l in 0..layers {
                    let input = if l == 0 { &b.x } else { &hs[l - 1] };
                    let mut pl = adj.spmm(&input.matmul(&p[2 * l])?)?;
                    pl.add_row_vector(&p[2 * l + 1])?;
                    let mut h = pl.map(relu);
                    let mask = dropout_mask(h.rows(), h.cols(), drop, rng.as_deref_mut());
                    apply_mask(&mut h, mask.as_ref());
                    pre.push(pl);
                    hs.push(h);
                    masks.push(mask);
                }
                let refs: Vec<&Tensor> = hs.iter().collect();
                let jk = Tensor::hstack(&refs)?.select_rows(&(0..b.targets).collect::<Vec<_>>());
                let mut logits = jk.matmul(&p[2 * layers])?;
                logits.add_row_vector(&p[2 * layers + 1])?;
                Ok(Forward {
                    logits,
                    cache: Cache::Gcn {
                        adj,
                        pre,
                        hs,
                        masks,
                        jk,
                    },
                })
            }
        }
    }

    /// Returns `((loss, nc), grads)`.
    fn backward(&self, b: &BatchInput, fwd: &Forward, ce: f64, dlogits: &Tensor) -> Result<((f64, f64), Vec<Tensor>)> {
        let p = &self.params;
        match &fwd.cache {
            Cache::Mlp { x, z0, mask, h } => {
                let dw1 = h.t_matmul(dlogits)?;
                let db1 = dlogits.sum_rows();
                let mut dz = dlogits.matmul_t(&p[2])?;
                apply_mask(&mut dz, mask.as_ref());
                let dz = dz.zip_map(z0, |g, z| if z > 0.0 { g } else { 0.0 })?;
                let dw0 = x.t_matmul(&dz)?;
                let db0 = dz.sum_rows();
                Ok(((ce, 0.0), vec![dw0, db0, dw1, db1]))
            }
            Cache::GraphMlp { z0, mask, a, z, zt } => {
                let alpha = self.hyper.alpha;
                let (nc, mut dz) = if alpha > 0.0 {
                    let r = ncontrast_loss(z, &b.positives(), self.hyper.tau)?;
                    let mut g = r.grad;
                    g.scale(alpha);
                    (r.loss, g)
                } else {
                    (0.0, Tensor::zeros(z.rows(), z.cols()))
                };
                let dw2 = zt.t_matmul(dlogits)?;
                let db2 = dlogits.sum_rows();
                let dzt = dlogits.matmul_t(&p[4])?;
                for r in 0..dzt.rows() {
                    for (o, g) in dz.row_mut(r).iter_mut().zip(dzt.row(r)) {
                        *o += g;
                    }
                }
                let dw1 = a.t_matmul(&dz)?;
                let db1 = dz.sum_rows();
                let mut da = dz.matmul_t(&p[2])?;
                apply_mask(&mut da, mask.as_ref());
                let dz0 = da.zip_map(z0, |g, x| g * gelu_grad(x))?;
                let dw0 = b.x.t_matmul(&dz0)?;
                let db0 = dz0.sum_rows();
                Ok(((combined_loss(ce, nc, alpha), nc), vec![dw0, db0, dw1, db1, dw2, db2]))
            }
            Cache::Gcn {
                adj,
                pre,
                hs,
                masks,
                jk,
            } => {
                let layers = self.hyper.layers;
                let hid = self.hyper.hidden;
                let n = b.x.rows();
                let mut grads = vec![Tensor::zeros(0, 0); 2 * layers + 2];
                grads[2 * layers] = jk.t_matmul(dlogits)?;
                grads[2 * layers + 1] = dlogits.sum_rows();
                let djk = dlogits.matmul_t(&p[2 * layers])?;
                // Jumping-knowledge contributions to each hidden output.
                let mut dh: Vec<Tensor> = (0..layers)
                    .map(|l| {
                        let mut t = Tensor::zeros(n, hid);
                        for r in 0..djk.rows() {
                            t.row_mut(r).copy_from_slice(&djk.row(r)[l * hid..(l + 1) * hid]);
                        }
                        t
                    })
                    .collect();
                let adj_t = adj.transpose();
                for l in (0..layers).rev() {
                    let mut d = dh[l].clone();
                    apply_mask(&mut d, masks[l].as_ref());
                    let dpre = d.zip_map(&pre[l], |g, x| if x > 0.0 { g } else { 0.0 })?;
                    grads[2 * l + 1] = dpre.sum_rows();
                    let dq = adj_t.spmm(&dpre)?;
                    let input = if l == 0 { &b.x } else { &hs[l - 1] };
                    grads[2 * l] = input.t_matmul(&dq)?;
                    if l > 0 {
                        let back = dq.matmul_t(&p[2 * l])?;
                        dh[l - 1].add_assign(&back)?;
                    }
                }
                Ok(((ce, 0.0), grads))
            }
        }
    }

    /// Widen the input and output layers. Existing weights are kept bit for
    /// bit; new input rows and output columns are Glorot-uniform, or zero
    /// when `zero_init` is set. New output biases start at zero.
    pub fn grow(&mut self, input: usize, classes: usize, rng: &mut dyn RngCore, zero_init: bool) -> Result<()> {
        let (old_in, old_c) = (self.input_width(), self.classes());
        if input < old_in || classes < old_c {
            return Err(Error::Shape(format!(
                "cannot shrink {old_in}x{old_c} network to {input}x{classes}"
            )));
        }
        if input == old_in && classes == old_c {
            return Ok(());
        }
        let first = &self.params[0];
        let mut w0 = Tensor::zeros(input, first.cols());
        w0.data_mut()[..first.len()].copy_from_slice(first.data());
        if !zero_init && input > old_in {
            let limit = (6.0 / (input + first.cols()) as f64).sqrt();
            for x in &mut w0.data_mut()[first.len()..] {
                *x = rng.gen_range(-limit..=limit);
            }
        }
        self.params[0] = w0;

        let k = self.params.len() - 2;
        let last = &self.params[k];
        let mut wo = Tensor::zeros(last.rows(), classes);
        let limit = (6.0 / (last.rows() + classes) as f64).sqrt();
        for r in 0..last.rows() {
            wo.row_mut(r)[..old_c].copy_from_slice(last.row(r));
            if !zero_init {
                for x in &mut wo.row_mut(r)[old_c..] {
                    *x = rng.gen_range(-limit..=limit);
                }
            }
        }
        self.params[k] = wo;
        self.params[k + 1] = self.params[k + 1].resize_cols(classes);
        Ok(())
    }
}

pub fn argmax_rows(t: &Tensor) -> Vec<u32> {
    (0..t.rows())
        .map(|r| {
            let row = t.row(r);
            let mut best = 0;
            for (i, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = i;
                }
            }
            best as u32
        })
        .collect()
}

struct Forward {
    logits: Tensor,
    cache: Cache,
}

enum Cache {
    Mlp {
        x: Tensor,
        z0: Tensor,
        mask: Option<Tensor>,
        h: Tensor,
    },
    GraphMlp {
        z0: Tensor,
        mask: Option<Tensor>,
        a: Tensor,
        z: Tensor,
        zt: Tensor,
    },
    Gcn {
        adj: Adjacency,
        pre: Vec<Tensor>,
        hs: Vec<Tensor>,
        masks: Vec<Option<Tensor>>,
        jk: Tensor,
    },
}
