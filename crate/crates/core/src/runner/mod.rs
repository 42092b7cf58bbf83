//! Experiment orchestration: layered configuration, dataset and model
//! registries, and the data → vocabulary → model → generation → evaluation flow.

mod config;
mod experiment;
mod registry;

pub use config::{
    default_value, load_config, load_config_for, parse_document, parse_overrides, read_document,
    resolve, ConfigError, DataOptions, ExperimentConfig, Layer, ModelOptions, ResolvedConfig,
    Settings, IGNORED_KEYS, KEYS,
};
pub use experiment::{run_experiment, Artifacts, Phase, PhaseError, RunError, RunResult};
pub use registry::{
    dataset, list_registry, model, DatasetEntry, ModelEntry, ModelKind, Registry, Structure, Task,
    DATASETS, MODELS,
};
