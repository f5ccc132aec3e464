use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `R[i][j]`: test accuracy on task `j` after training through task `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMatrix {
    pub labels: Vec<String>,
    pub r: Vec<Vec<f64>>,
}

impl ResultMatrix {
    pub fn new(labels: Vec<String>, r: Vec<Vec<f64>>) -> Result<Self> {
        let t = labels.len();
        if r.len() != t || r.iter().any(|row| row.len() != t) {
            return Err(Error::Shape(format!("result matrix must be {t}x{t}")));
        }
        if r.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Invalid("accuracies must lie in [0, 1]".into()));
        }
        Ok(Self { labels, r })
    }

    /// Unlabeled matrix with tasks named `1..=T`.
    pub fn from_rows(r: Vec<Vec<f64>>) -> Result<Self> {
        Self::new((1..=r.len()).map(|i| i.to_string()).collect(), r)
    }

    pub fn tasks(&self) -> usize {
        self.r.len()
    }

    /// Zero-based access.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i][j]
    }

    /// CSV with a header of evaluated tasks; every row starts with the task
    /// trained through. Values use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trained_through");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.r) {
            out.push_str(l);
            for x in row {
                write!(out, ",{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("empty result matrix".into()))?;
        let labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
        let mut r = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut cells = line.split(',');
            let name = cells.next().unwrap_or_default();
            if labels.get(i).map(String::as_str) != Some(name) {
                return Err(Error::Invalid(format!("row {} is labeled {name:?}", i + 1)));
            }
            let row = cells
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Invalid(format!("bad accuracy {c:?} in row {}", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            r.push(row);
        }
        Self::new(labels, r)
    }
}

/// Running mean; exact on constant input.
fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut m = 0.0;
    for (k, x) in xs.into_iter().enumerate() {
        m += (x - m) / (k + 1) as f64;
    }
    m
}

fn need_two(r: &ResultMatrix, what: &str) -> Result<usize> {
    let t = r.tasks();
    if t < 2 {
        return Err(Error::Invalid(format!("{what} needs at least two tasks")));
    }
    Ok(t)
}

/// Mean accuracy of the final model over all tasks.
pub fn acc(r: &ResultMatrix) -> Result<f64> {
    let t = r.tasks();
    if t == 0 {
        return Err(Error::Invalid("empty result matrix".into()));
    }
    Ok(mean(r.r[t - 1].iter().copied()))
}

pub fn bwt(r: &ResultMatrix) -> Result<f64> {
    let t = need_two(r, "BWT")?;
    Ok(mean((0..t - 1).map(|i| r.get(t - 1, i) - r.get(i, i))))
}

/// Forward transfer against the diagonal: mean of `R[i-1][i] - R[i][i]`.
pub fn fwt(r: &ResultMatrix) -> Result<f64> {
    let t = need_two(r, "FWT")?;
    Ok(mean((1..t).map(|i| r.get(i - 1, i) - r.get(i, i))))
}

/// Best diagonal accuracy.
pub fn alpha_ideal(r: &ResultMatrix) -> f64 {
    (0..r.tasks()).map(|i| r.get(i, i)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    pub base: f64,
    pub new: f64,
    pub all: f64,
}

pub fn omega(r: &ResultMatrix) -> Result<Omega> {
    let t = need_two(r, "omega")?;
    let ideal = alpha_ideal(r);
    if ideal == 0.0 {
        return Err(Error::Numerical("best diagonal accuracy is 0".into()));
    }
    let base = mean((1..t).map(|i| r.get(i, 0) / ideal));
    let new = mean((1..t).map(|i| r.get(i, i)));
    let all = mean((1..t).map(|i| mean(r.r[i].iter().copied()) / ideal));
    Ok(Omega { base, new, all })
}

/// Forgetting after training through task `k`, one-based `2 ≤ k ≤ T`.
pub fn forgetting(r: &ResultMatrix, k: usize) -> Result<f64> {
    if k < 2 || k > r.tasks() {
        return Err(Error::Invalid(format!(
            "forgetting index {k} outside 2..={}",
            r.tasks()
        )));
    }
    let row = k - 1;
    Ok(mean((0..row).map(|j| {
        let best = (0..row).map(|l| r.get(l, j)).fold(f64::NEG_INFINITY, f64::max);
        best - r.get(row, j)
    })))
}

/// All measures, derived from the result matrix alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifelongReport {
    pub tasks: usize,
    pub acc: f64,
    pub bwt: Option<f64>,
    pub fwt: Option<f64>,
    pub omega_base: Option<f64>,
    pub omega_new: Option<f64>,
    pub omega_all: Option<f64>,
    pub alpha_ideal: f64,
    /// `(k, F_k)` for `k = 2..=T`.
    pub forgetting: Vec<(usize, f64)>,
}

impl LifelongReport {
    pub fn from_matrix(r: &ResultMatrix) -> Result<Self> {
        let t = r.tasks();
        let two = t >= 2;
        let om = if two && alpha_ideal(r) > 0.0 {
            Some(omega(r)?)
        } else {
            None
        };
        Ok(Self {
            tasks: t,
            acc: acc(r)?,
            bwt: two.then(|| bwt(r)).transpose()?,
            fwt: two.then(|| fwt(r)).transpose()?,
            omega_base: om.map(|o| o.base),
            omega_new: om.map(|o| o.new),
            omega_all: om.map(|o| o.all),
            alpha_ideal: alpha_ideal(r),
            forgetting: (2..=t)
                .map(|k| forgetting(r, k).map(|f| (k, f)))
                .collect::<Result<_>>()?,
        })
    }
}
