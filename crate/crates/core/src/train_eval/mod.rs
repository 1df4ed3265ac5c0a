//! Mini-batch training with Adam, prediction and scoring.

mod metrics;
mod train;

pub use metrics::{evaluate_metrics, ClassScores, Metrics};
pub use train::{
    evaluate, predict, train_epochs, train_epochs_with, EpochRecord, History, TrainConfig, HISTORY_HEADER,
};
