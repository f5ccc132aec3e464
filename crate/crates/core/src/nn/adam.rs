use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moments per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &[Tensor]) -> Self {
        Self {
            m: params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(params: &mut [Tensor], grads: &[Tensor], state: &mut AdamState, lr: f64) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape("adam: parameter, gradient and state counts differ".into()));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(Error::Shape(format!(
                "adam: parameter {:?}, gradient {:?}, state {:?}",
                p.shape(),
                g.shape(),
                m.shape()
            )));
        }
    }
    state.t += 1;
    let c1 = 1.0 - BETA1.powi(state.t as i32);
    let c2 = 1.0 - BETA2.powi(state.t as i32);
    for (i, p) in params.iter_mut().enumerate() {
        let g = grads[i].data();
        let m = state.m[i].data_mut();
        for (mk, gk) in m.iter_mut().zip(g) {
            *mk = BETA1 * *mk + (1.0 - BETA1) * gk;
        }
        let v = state.v[i].data_mut();
        for (vk, gk) in v.iter_mut().zip(g) {
            *vk = BETA2 * *vk + (1.0 - BETA2) * gk * gk;
        }
        let (m, v) = (state.m[i].data(), state.v[i].data());
        for ((x, mk), vk) in p.data_mut().iter_mut().zip(m).zip(v) {
            *x -= lr * (mk / c1) / ((vk / c2).sqrt() + EPSILON);
        }
    }
    Ok(())
}
