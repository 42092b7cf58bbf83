use serde::Serialize;

use super::ConfigError;
use crate::metrics::MetricName;

/// Generation task implied by a dataset's layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// One sequence per line; the model generates from nothing.
    Unconditional,
    /// Line-aligned source/target files; the model generates a target per source.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Single,
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetEntry {
    pub name: &'static str,
    /// Directory under `data_dir`.
    pub dir: &'static str,
    pub structure: Structure,
    pub description: &'static str,
}

impl DatasetEntry {
    pub fn task(&self) -> Task {
        match self.structure {
            Structure::Single => Task::Unconditional,
            Structure::Paired => Task::Conditional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NGram,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelEntry {
    pub name: &'static str,
    pub kind: ModelKind,
    pub description: &'static str,
}

pub const DATASETS: &[DatasetEntry] = &[
    DatasetEntry {
        name: "COCO-mini",
        dir: "coco-mini",
        structure: Structure::Single,
        description: "500 image-caption style sentences",
    },
    DatasetEntry {
        name: "COCO-tiny",
        dir: "coco-tiny",
        structure: Structure::Single,
        description: "50 image-caption style sentences",
    },
    DatasetEntry {
        name: "IWSLT-mini",
        dir: "iwslt-mini",
        structure: Structure::Paired,
        description: "pre-split toy translation pairs",
    },
    DatasetEntry {
        name: "GigaWord-mini",
        dir: "gigaword-mini",
        structure: Structure::Paired,
        description: "toy headline generation pairs, split at load time",
    },
];

pub const MODELS: &[ModelEntry] = &[
    ModelEntry {
        name: "NGLM",
        kind: ModelKind::NGram,
        description: "interpolated add-delta n-gram language model",
    },
    ModelEntry {
        name: "Uniform",
        kind: ModelKind::Uniform,
        description: "uniform distribution over the vocabulary",
    },
];

/// Looks a dataset up by name, ignoring ASCII case.
pub fn dataset(name: &str) -> Result<&'static DatasetEntry, ConfigError> {
    DATASETS
        .iter()
        .find(|d| d.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| ConfigError::UnknownName {
            kind: "dataset",
            name: name.to_string(),
            known: DATASETS.iter().map(|d| d.name).collect(),
        })
}

/// Looks a model up by name, ignoring ASCII case.
pub fn model(name: &str) -> Result<&'static ModelEntry, ConfigError> {
    MODELS
        .iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| ConfigError::UnknownName {
            kind: "model",
            name: name.to_string(),
            known: MODELS.iter().map(|m| m.name).collect(),
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    pub datasets: Vec<&'static str>,
    pub models: Vec<&'static str>,
    pub metrics: Vec<&'static str>,
}

pub fn list_registry() -> Registry {
    Registry {
        datasets: DATASETS.iter().map(|d| d.name).collect(),
        models: MODELS.iter().map(|m| m.name).collect(),
        metrics: MetricName::ALL.iter().map(|m| m.as_str()).collect(),
    }
}
