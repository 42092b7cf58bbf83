use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;
use serde_yaml::Value;

use super::registry::{self, Task};
use crate::corpus::SplitRatio;
use crate::decoding::{DecodeConfig, Strategy};
use crate::lm::NGramParams;
use crate::metrics::{BleuWeighting, MetricConfig, MetricName, SelfBleuSample, Smoothing};

/// Flat key to raw value text. An empty value means "unset".
pub type Settings = IndexMap<String, String>;

/// Where a resolved value came from, lowest precedence first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Default,
    DatasetFile,
    ModelFile,
    CommandLine,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Default => "default",
            Layer::DatasetFile => "dataset-file",
            Layer::ModelFile => "model-file",
            Layer::CommandLine => "command-line",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown {kind} {name:?}; known {kind}s: {}", known.join(", "))]
    UnknownName {
        kind: &'static str,
        name: String,
        known: Vec<&'static str>,
    },
    #[error("required option {0} is not set")]
    Missing(&'static str),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
}

/// Every recognised key, in snapshot order.
pub const KEYS: &[&str] = &[
    "dataset",
    "model",
    "data_dir",
    "output_dir",
    "config_dir",
    "seed",
    "lowercase",
    "min_freq",
    "max_vocab",
    "split_ratio",
    "batch_size",
    "order",
    "delta",
    "lambdas",
    "checkpoint",
    "decoding_strategy",
    "beam_size",
    "topk",
    "max_len",
    "length_penalty",
    "generate_count",
    "metrics",
    "bleu_max_n",
    "rouge_max_n",
    "distinct_max_n",
    "smoothing",
    "epsilon",
    "bleu_weighting",
    "self_bleu_sample",
    "threads",
];

/// Accepted for compatibility with GPU-oriented config files, then ignored.
pub const IGNORED_KEYS: &[&str] = &["use_gpu", "gpu_id", "DDP"];

/// Built-in default for `key`, as raw text.
pub fn default_value(key: &str) -> Option<String> {
    let decode = DecodeConfig::default();
    let lm = NGramParams::default();
    let metrics = MetricConfig::default();
    let ratio = SplitRatio::default();
    let v = match key {
        "dataset" | "model" | "max_vocab" | "lambdas" | "checkpoint" | "self_bleu_sample" => {
            String::new()
        }
        "data_dir" => "data".into(),
        "output_dir" => "runs".into(),
        "config_dir" => "config".into(),
        "seed" => decode.seed.to_string(),
        "lowercase" => "true".into(),
        "min_freq" => "1".into(),
        "split_ratio" => format!("{},{},{}", ratio.train, ratio.valid, ratio.test),
        "batch_size" => "32".into(),
        "order" => lm.order.to_string(),
        "delta" => lm.delta.to_string(),
        "decoding_strategy" => decode.strategy.as_str().into(),
        "beam_size" => decode.beam_size.to_string(),
        "topk" => decode.k.to_string(),
        "max_len" => decode.max_len.to_string(),
        "length_penalty" => decode.length_penalty.to_string(),
        "generate_count" => "100".into(),
        "metrics" => "auto".into(),
        "bleu_max_n" => metrics.bleu_max_n.to_string(),
        "rouge_max_n" => metrics.rouge_max_n.to_string(),
        "distinct_max_n" => metrics.distinct_max_n.to_string(),
        "smoothing" => "none".into(),
        "epsilon" => format!("{:e}", Smoothing::DEFAULT_EPSILON),
        "bleu_weighting" => "one-hot".into(),
        "threads" => metrics.threads.to_string(),
        _ => return None,
    };
    Some(v)
}

/// Parses a flat YAML document. Sequences become comma-joined text and null
/// becomes the empty (unset) value; nested mappings are rejected.
pub fn parse_document(text: &str, source_name: &str) -> Result<Settings, ConfigError> {
    let parse_err = |message: String| ConfigError::Parse {
        source_name: source_name.to_string(),
        message,
    };
    let doc: Value = serde_yaml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let map = match doc {
        Value::Null => return Ok(Settings::new()),
        Value::Mapping(map) => map,
        _ => return Err(parse_err("expected a mapping of keys to values".into())),
    };
    let mut out = Settings::new();
    for (k, v) in map {
        let key = scalar_text(&k).ok_or_else(|| parse_err("keys must be scalars".into()))?;
        let value = match &v {
            Value::Sequence(items) => items
                .iter()
                .map(|item| {
                    scalar_text(item)
                        .ok_or_else(|| parse_err(format!("{key}: list items must be scalars")))
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            other => scalar_text(other)
                .ok_or_else(|| parse_err(format!("{key}: nested values are not supported")))?,
        };
        out.insert(key, value);
    }
    Ok(out)
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

pub fn read_document(path: &Path) -> Result<Settings, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_document(&text, &path.display().to_string())
}

/// Parses `--key=value` arguments; a bare `--key` means `true`.
pub fn parse_overrides<S: AsRef<str>>(args: &[S]) -> Result<Settings, ConfigError> {
    let mut out = Settings::new();
    for arg in args {
        let arg = arg.as_ref();
        let body = arg.strip_prefix("--").ok_or_else(|| ConfigError::Parse {
            source_name: "command line".into(),
            message: format!("expected --key=value, got {arg:?}"),
        })?;
        let (key, value) = body.split_once('=').unwrap_or((body, "true"));
        if key.is_empty() {
            return Err(ConfigError::Parse {
                source_name: "command line".into(),
                message: format!("missing key in {arg:?}"),
            });
        }
        out.insert(key.to_string(), value.to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataOptions {
    pub lowercase: bool,
    pub min_freq: usize,
    /// Vocabulary size cap including the special tokens.
    pub max_vocab: Option<usize>,
    pub split_ratio: SplitRatio,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    pub params: NGramParams,
    /// When set, the model is loaded from here instead of fitted.
    pub checkpoint: Option<PathBuf>,
}

/// Typed experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Canonical registry name.
    pub dataset: String,
    pub model: String,
    pub task: Task,
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub data: DataOptions,
    pub lm: ModelOptions,
    pub decode: DecodeConfig,
    /// Samples drawn for unconditional generation.
    pub generate_count: usize,
    pub metrics: MetricConfig,
}

impl ExperimentConfig {
    /// Re-reads a snapshot written by [`ResolvedConfig::snapshot`].
    pub fn from_snapshot(text: &str) -> Result<Self, ConfigError> {
        let layer = parse_document(text, "config snapshot")?;
        Ok(resolve(&layer, &Settings::new(), &Settings::new())?.config)
    }

    fn from_values(values: &Settings) -> Result<Self, ConfigError> {
        let get = |key: &str| values.get(key).map(String::as_str).unwrap_or("");
        let required = |key: &'static str| match get(key) {
            "" => Err(ConfigError::Missing(key)),
            v => Ok(v),
        };
        let dataset = registry::dataset(required("dataset")?)?;
        let model = registry::model(required("model")?)?;
        let seed: u64 = parse(values, "seed")?;

        let split_ratio = {
            let parts: Vec<f64> = parse_list(values, "split_ratio")?;
            let [train, valid, test] = parts[..] else {
                return Err(invalid(
                    values,
                    "split_ratio",
                    "expected three fractions train,valid,test",
                ));
            };
            SplitRatio::new(train, valid, test).map_err(|e| invalid(values, "split_ratio", e))?
        };
        let data = DataOptions {
            lowercase: parse_bool(values, "lowercase")?,
            min_freq: parse(values, "min_freq")?,
            max_vocab: parse_opt(values, "max_vocab")?,
            split_ratio,
            batch_size: parse(values, "batch_size")?,
        };
        if data.batch_size == 0 {
            return Err(invalid(values, "batch_size", "must be at least 1"));
        }

        let lambdas: Vec<f64> = parse_list(values, "lambdas")?;
        let params = NGramParams {
            order: parse(values, "order")?,
            delta: parse(values, "delta")?,
            lambdas: (!lambdas.is_empty()).then_some(lambdas),
        };
        params
            .resolved_lambdas()
            .map_err(|e| invalid(values, "lambdas", e))?;
        let lm = ModelOptions {
            params,
            checkpoint: match get("checkpoint") {
                "" => None,
                p => Some(PathBuf::from(p)),
            },
        };

        let decode = DecodeConfig {
            strategy: Strategy::from_str(get("decoding_strategy"))
                .map_err(|e| invalid(values, "decoding_strategy", e))?,
            beam_size: parse(values, "beam_size")?,
            k: parse(values, "topk")?,
            max_len: parse(values, "max_len")?,
            seed,
            length_penalty: parse(values, "length_penalty")?,
        };
        // k is checked against the vocabulary once it is known
        decode
            .validate(usize::MAX)
            .map_err(|e| invalid(values, "decoding_strategy", e))?;

        let names = match get("metrics").trim() {
            "auto" => match dataset.task() {
                Task::Unconditional => vec![
                    MetricName::Nll,
                    MetricName::Ppl,
                    MetricName::Bleu,
                    MetricName::SelfBleu,
                    MetricName::Distinct,
                ],
                Task::Conditional => vec![
                    MetricName::Bleu,
                    MetricName::Rouge,
                    MetricName::Nll,
                    MetricName::Ppl,
                ],
            },
            _ => parse_list(values, "metrics")?,
        };
        let metrics = MetricConfig {
            names,
            bleu_max_n: parse(values, "bleu_max_n")?,
            rouge_max_n: parse(values, "rouge_max_n")?,
            distinct_max_n: parse(values, "distinct_max_n")?,
            smoothing: match get("smoothing").trim().to_ascii_lowercase().as_str() {
                "none" | "" => Smoothing::None,
                "epsilon" => Smoothing::Epsilon(parse(values, "epsilon")?),
                _ => return Err(invalid(values, "smoothing", "expected none or epsilon")),
            },
            weighting: match get("bleu_weighting")
                .trim()
                .to_ascii_lowercase()
                .replace('_', "-")
                .as_str()
            {
                "one-hot" | "onehot" => BleuWeighting::OneHot,
                "geometric" => BleuWeighting::Geometric,
                _ => {
                    return Err(invalid(
                        values,
                        "bleu_weighting",
                        "expected one-hot or geometric",
                    ))
                }
            },
            self_bleu_sample: parse_opt(values, "self_bleu_sample")?
                .map(|size| SelfBleuSample { size, seed }),
            threads: parse(values, "threads")?,
        };
        metrics
            .validate()
            .map_err(|e| invalid(values, "metrics", e))?;

        Ok(ExperimentConfig {
            dataset: dataset.name.to_string(),
            model: model.name.to_string(),
            task: dataset.task(),
            data_dir: PathBuf::from(get("data_dir")),
            output_dir: PathBuf::from(get("output_dir")),
            seed,
            data,
            lm,
            decode,
            generate_count: parse(values, "generate_count")?,
            metrics,
        })
    }
}

fn invalid(values: &Settings, key: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: values.get(key).cloned().unwrap_or_default(),
        reason: reason.to_string(),
    }
}

fn parse<T: FromStr>(values: &Settings, key: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    let raw = values.get(key).map(String::as_str).unwrap_or("").trim();
    raw.parse().map_err(|e| invalid(values, key, e))
}

fn parse_opt<T: FromStr>(values: &Settings, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    match values.get(key).map(|s| s.trim()) {
        None | Some("") | Some("none") | Some("null") | Some("~") => Ok(None),
        Some(_) => parse(values, key).map(Some),
    }
}

fn parse_list<T: FromStr>(values: &Settings, key: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let raw = values.get(key).map(String::as_str).unwrap_or("");
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| invalid(values, key, e)))
        .collect()
}

fn parse_bool(values: &Settings, key: &str) -> Result<bool, ConfigError> {
    match values
        .get(key)
        .map(|s| s.trim().to_ascii_lowercase())
        .as_deref()
    {
        Some("true" | "yes" | "1") => Ok(true),
        Some("false" | "no" | "0") => Ok(false),
        _ => Err(invalid(values, key, "expected true or false")),
    }
}

/// Typed config together with the raw value and source layer of every key.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub values: Settings,
    pub provenance: IndexMap<String, Layer>,
    pub warnings: Vec<String>,
}

impl ResolvedConfig {
    pub fn provenance(&self, key: &str) -> Option<Layer> {
        self.provenance.get(key).copied()
    }

    /// YAML document of every resolved value, one key per line, each tagged
    /// with its layer in a trailing comment.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.values {
            let layer = self.provenance[key];
            out.push_str(&format!("{key}: {}  # {layer}\n", yaml_scalar(value)));
        }
        out
    }
}

fn yaml_scalar(value: &str) -> String {
    if value.is_empty() {
        return "~".into();
    }
    let round_trips = serde_yaml::from_str::<Value>(value)
        .ok()
        .and_then(|v| scalar_text(&v))
        .is_some_and(|v| v == value);
    if round_trips {
        value.to_string()
    } else {
        serde_json::to_string(value).expect("strings serialize")
    }
}

/// Merges the layers by precedence and builds the typed config.
pub fn resolve(
    dataset_file: &Settings,
    model_file: &Settings,
    cli: &Settings,
) -> Result<ResolvedConfig, ConfigError> {
    let layers = [
        (Layer::CommandLine, cli),
        (Layer::ModelFile, model_file),
        (Layer::DatasetFile, dataset_file),
    ];

    let mut warnings = Vec::new();
    for (layer, settings) in layers.iter().rev() {
        for key in settings.keys() {
            if IGNORED_KEYS.contains(&key.as_str()) {
                warnings.push(format!(
                    "{key} ({layer}) is ignored: this build runs on the CPU only"
                ));
            } else if !KEYS.contains(&key.as_str()) {
                warnings.push(format!("unknown option {key} ({layer}) is ignored"));
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut values = Settings::new();
    let mut provenance = IndexMap::new();
    for &key in KEYS {
        let (layer, value) = layers
            .iter()
            .find_map(|(layer, s)| s.get(key).map(|v| (*layer, v.clone())))
            .unwrap_or_else(|| {
                (
                    Layer::Default,
                    default_value(key).expect("every key has a default"),
                )
            });
        values.insert(key.to_string(), value);
        provenance.insert(key.to_string(), layer);
    }

    let config = ExperimentConfig::from_values(&values)?;
    Ok(ResolvedConfig {
        config,
        values,
        provenance,
        warnings,
    })
}

/// Reads the optional dataset and model files and resolves them with `cli`.
pub fn load_config(
    dataset_file: Option<&Path>,
    model_file: Option<&Path>,
    cli: &Settings,
) -> Result<ResolvedConfig, ConfigError> {
    let read = |p: Option<&Path>| {
        p.map(read_document)
            .transpose()
            .map(Option::unwrap_or_default)
    };
    resolve(&read(dataset_file)?, &read(model_file)?, cli)
}

/// Resolves a command line, picking up `<config_dir>/dataset/<dataset>.yaml`
/// and `<config_dir>/model/<model>.yaml` when they exist.
pub fn load_config_for(cli: &Settings) -> Result<ResolvedConfig, ConfigError> {
    let config_dir = PathBuf::from(
        cli.get("config_dir")
            .cloned()
            .unwrap_or_else(|| default_value("config_dir").expect("config_dir has a default")),
    );
    let name = |key: &'static str| {
        cli.get(key)
            .filter(|v| !v.is_empty())
            .ok_or(ConfigError::Missing(key))
    };
    let dataset = registry::dataset(name("dataset")?)?;
    let model = registry::model(name("model")?)?;
    let existing = |kind: &str, name: &str| {
        let path = config_dir.join(kind).join(format!("{name}.yaml"));
        path.is_file().then_some(path)
    };
    let dataset_file = existing("dataset", dataset.name);
    let model_file = existing("model", model.name);
    load_config(dataset_file.as_deref(), model_file.as_deref(), cli)
}
