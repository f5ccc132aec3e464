use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Row-wise softmax with the maximum subtracted first.
pub fn softmax(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

/// Mean cross-entropy over the rows of `logits` and its gradient.
pub fn cross_entropy(logits: &Tensor, labels: &[u32]) -> Result<(f64, Tensor)> {
    if labels.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} logit rows",
            labels.len(),
            logits.rows()
        )));
    }
    if let Some(&c) = labels.iter().find(|&&c| c as usize >= logits.cols()) {
        return Err(Error::Shape(format!("label {c} outside {} classes", logits.cols())));
    }
    let n = labels.len();
    if n == 0 {
        return Ok((0.0, logits.clone()));
    }
    let mut grad = softmax(logits);
    let mut loss = 0.0;
    for (r, &c) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        loss += lse - row[c as usize];
        let g = grad.row_mut(r);
        g[c as usize] -= 1.0;
    }
    grad.scale(1.0 / n as f64);
    Ok((loss / n as f64, grad))
}

/// Result of the neighbour-contrastive loss.
#[derive(Debug, Clone)]
pub struct NContrast {
    pub loss: f64,
    pub grad: Tensor,
    /// Rows that had at least one positive.
    pub retained: usize,
}

/// Neighbour-contrastive loss over embeddings `z` with cosine similarity and
/// temperature `tau`. `positives[i]` lists the positives of row `i`; rows
/// without positives are left out of the mean.
pub fn ncontrast_loss(z: &Tensor, positives: &[Vec<u32>], tau: f64) -> Result<NContrast> {
    let b = z.rows();
    if positives.len() != b {
        return Err(Error::Shape(format!("{} positive lists for {b} rows", positives.len())));
    }
    let retained = positives
        .iter()
        .enumerate()
        .filter(|(i, p)| p.iter().any(|&j| j as usize != *i))
        .count();
    if retained == 0 {
        return Ok(NContrast {
            loss: 0.0,
            grad: Tensor::zeros(b, z.cols()),
            retained: 0,
        });
    }

    let norms: Vec<f64> = (0..b)
        .map(|i| z.row(i).iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12))
        .collect();
    let mut zh = z.clone();
    for i in 0..b {
        let n = norms[i];
        for x in zh.row_mut(i) {
            *x /= n;
        }
    }
    let sim = zh.matmul_t(&zh)?;

    // g[i][j] = ∂loss/∂sim[i][j]
    let mut g = Tensor::zeros(b, b);
    let mut loss = 0.0;
    let scale = 1.0 / retained as f64;
    let mut is_pos = vec![false; b];
    for i in 0..b {
        for &j in &positives[i] {
            if j as usize != i {
                is_pos[j as usize] = true;
            }
        }
        let e: Vec<f64> = (0..b)
            .map(|k| if k == i { 0.0 } else { (sim.get(i, k) / tau).exp() })
            .collect();
        let num: f64 = (0..b).filter(|&k| is_pos[k]).map(|k| e[k]).sum();
        if num > 0.0 {
            let den: f64 = e.iter().sum();
            loss += den.ln() - num.ln();
            let row = g.row_mut(i);
            for k in 0..b {
                if k == i {
                    continue;
                }
                let mut d = e[k] / den;
                if is_pos[k] {
                    d -= e[k] / num;
                }
                row[k] = scale * d / tau;
            }
        }
        for &j in &positives[i] {
            is_pos[j as usize] = false;
        }
    }

    // Through the similarities to the unit rows, then through normalization.
    let mut dzh = g.matmul(&zh)?;
    dzh.add_assign(&g.t_matmul(&zh)?)?;
    let mut grad = Tensor::zeros(b, z.cols());
    for i in 0..b {
        let u = zh.row(i);
        let d = dzh.row(i);
        let dot: f64 = u.iter().zip(d).map(|(a, b)| a * b).sum();
        for ((o, &dv), &uv) in grad.row_mut(i).iter_mut().zip(d).zip(u) {
            *o = (dv - dot * uv) / norms[i];
        }
    }
    Ok(NContrast {
        loss: loss * scale,
        grad,
        retained,
    })
}

/// `ce + alpha · nc`.
pub fn combined_loss(ce: f64, nc: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        ce
    } else {
        ce + alpha * nc
    }
}
