//! Record and replay, dataset export, anomaly flags and text rendering.

pub mod anomalies;
pub mod exit;
pub mod render;
pub mod replay;

pub use anomalies::{detect_anomalies, Anomaly, AnomalyError};
pub use exit::{exit_samples, write_exit_dataset, ExItSample};
pub use render::{render_observation, render_state};
pub use replay::{
    read_replay, replay_verify, scenario_digest, ReplayError, ReplayHeader, ReplayRecord, ReplayWriter, VerifyReport,
};
