//! Training and evaluation: losses, exact gradients, Adam with plateau
//! scheduling, calibration-based initialization, and the color-difference
//! evaluation protocol.

pub mod eval;
pub mod grads;
pub mod init;
pub mod losses;
pub mod optim;
pub mod tape;
pub mod train;

pub use eval::{
    baseline_global_transform, evaluate, evaluate_fixed_transform, parameter_drift,
    EvaluationReport, SceneEvaluation,
};
pub use grads::{batch_loss, loss_gradients, scene_loss, ParamGrads, PreparedIllum, PreparedScene};
pub use init::{init_from_calibration, InitTensors};
pub use losses::{matching_loss, simulation_loss};
pub use optim::{adam_step, OptimizerState, PlateauScheduler};
pub use train::{
    prepare_scenes, train, EpochStats, IlluminationSource, TrainConfig, TrainMode, TrainOutcome,
};
