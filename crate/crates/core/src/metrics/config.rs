use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricError;

/// Metric families selectable through the `metrics` option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Nll,
    Ppl,
    Bleu,
    SelfBleu,
    Rouge,
    Distinct,
}

impl MetricName {
    pub const ALL: [MetricName; 6] = [
        MetricName::Nll,
        MetricName::Ppl,
        MetricName::Bleu,
        MetricName::SelfBleu,
        MetricName::Rouge,
        MetricName::Distinct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Nll => "nll",
            MetricName::Ppl => "ppl",
            MetricName::Bleu => "bleu",
            MetricName::SelfBleu => "self_bleu",
            MetricName::Rouge => "rouge",
            MetricName::Distinct => "distinct",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| {
                MetricError::Config(format!(
                    "unknown metric {s:?}; known metrics: {}",
                    MetricName::ALL.map(|m| m.as_str()).join(", ")
                ))
            })
    }
}

/// Zero-match handling for n-gram precision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    /// A zero match count is replaced by this value.
    Epsilon(f64),
}

impl Smoothing {
    pub const DEFAULT_EPSILON: f64 = 1e-9;
}

/// How per-order precisions combine into one BLEU-n score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BleuWeighting {
    /// Only order n contributes, e.g. weights (0, 0, 0, 1) for BLEU-4.
    #[default]
    OneHot,
    /// Uniform geometric mean of orders 1..=n.
    Geometric,
}

/// Self-BLEU against a seeded random subset of the other hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfBleuSample {
    pub size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub names: Vec<MetricName>,
    pub bleu_max_n: usize,
    pub rouge_max_n: usize,
    pub distinct_max_n: usize,
    pub smoothing: Smoothing,
    pub weighting: BleuWeighting,
    pub self_bleu_sample: Option<SelfBleuSample>,
    /// Worker threads for corpus-level scoring; 0 uses every available core.
    pub threads: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            names: vec![MetricName::Bleu],
            bleu_max_n: 4,
            rouge_max_n: 2,
            distinct_max_n: 2,
            smoothing: Smoothing::None,
            weighting: BleuWeighting::OneHot,
            self_bleu_sample: None,
            threads: 1,
        }
    }
}

impl MetricConfig {
    pub fn with_names(names: impl IntoIterator<Item = MetricName>) -> Self {
        MetricConfig {
            names: names.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if self.names.is_empty() {
            return Err(MetricError::Config("no metrics requested".into()));
        }
        for (name, order) in [
            ("bleu_max_n", self.bleu_max_n),
            ("rouge_max_n", self.rouge_max_n),
            ("distinct_max_n", self.distinct_max_n),
        ] {
            if order == 0 {
                return Err(MetricError::Config(format!("{name} must be at least 1")));
            }
        }
        if let Smoothing::Epsilon(eps) = self.smoothing {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(MetricError::Config(format!(
                    "smoothing epsilon must be positive, got {eps}"
                )));
            }
        }
        if let Some(sample) = self.self_bleu_sample {
            if sample.size == 0 {
                return Err(MetricError::Config(
                    "self_bleu_sample must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }
}
