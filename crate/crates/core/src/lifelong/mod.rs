//! Incremental training over snapshot sequences and the lifelong-learning
//! measures derived from the result matrix.

mod harness;
mod matrix;

pub use harness::{
    evaluate, prepare_task, run_sequence, task_rng, time_warp, train_task, Accuracy, Restart, SequenceRun, Task,
    TaskDiagnostics, TaskSequence, TimeWarpReport, TrainConfig, TrainLog, DEFAULT_ITERATIONS,
};
pub use matrix::{acc, alpha_ideal, bwt, forgetting, fwt, omega, LifelongReport, Omega, ResultMatrix};
