//! Dense classifiers with hand-derived gradients: MLP, Graph-MLP and a
//! sampled GCN with jumping knowledge.

mod adam;
mod checkpoint;
mod loss;
mod network;
mod ops;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{Checkpoint, Precision, FORMAT_VERSION, MAGIC};
pub use loss::{combined_loss, cross_entropy, ncontrast_loss, softmax, NContrast};
pub use network::{argmax_rows, glorot, Architecture, BatchInput, Hyper, Network, Step};
pub use ops::{dropout_mask, gcn_layer, gelu, gelu_grad, relu, Adjacency};
