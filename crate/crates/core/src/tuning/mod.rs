//! N-tuple bandit evolutionary parameter tuning.

pub mod ntbea;

pub use ntbea::{
    ntbea_optimize, tune_agent, write_tuning_log, Dimension, EvalLogEntry, NTupleModel, NtbeaParams, NtbeaResult,
    ParamSpace, TuneError, TupleStats,
};
