use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use super::registry::{self, ModelKind, Structure, Task};
use super::{ConfigError, Layer, ResolvedConfig};
use crate::corpus::{
    batches, build_vocabulary, decode, detokenize, encode, load_paired, load_single, split,
    CorpusError, PairedExample, TokenId, TokenSequence, Vocabulary,
};
use crate::decoding::{generate_for_prompts, generate_ids, DecodeError, Hypothesis};
use crate::lm::{self, LanguageModel, LmError, NGramModel, UniformModel};
use crate::metrics::{evaluate, EvalInputs, MetricError, MetricReport, References};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Config,
    Data,
    Vocab,
    Model,
    Generate,
    Evaluate,
    Write,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Config => "config",
            Phase::Data => "data",
            Phase::Vocab => "vocab",
            Phase::Model => "model",
            Phase::Generate => "generate",
            Phase::Evaluate => "evaluate",
            Phase::Write => "write",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PhaseError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, thiserror::Error)]
#[error("{phase} phase failed: {source}")]
pub struct RunError {
    pub phase: Phase,
    #[source]
    pub source: PhaseError,
}

impl RunError {
    fn at(phase: Phase) -> impl FnOnce(PhaseError) -> RunError {
        move |source| RunError { phase, source }
    }

    /// Process exit status: 2 for configuration errors, 3 for bad input data,
    /// 4 for failures while running.
    pub fn exit_code(&self) -> i32 {
        const CONFIG: i32 = 2;
        const DATA: i32 = 3;
        const RUNTIME: i32 = 4;
        if self.phase == Phase::Write {
            return RUNTIME;
        }
        match &self.source {
            PhaseError::Config(_) => CONFIG,
            PhaseError::Corpus(CorpusError::Config(_)) => CONFIG,
            PhaseError::Corpus(_) => DATA,
            PhaseError::Lm(LmError::Config(_)) => CONFIG,
            PhaseError::Lm(_) => DATA,
            PhaseError::Decode(DecodeError::Config(_)) => CONFIG,
            PhaseError::Decode(_) => RUNTIME,
            PhaseError::Metric(MetricError::Config(_) | MetricError::MissingInput { .. }) => CONFIG,
            PhaseError::Metric(_) => DATA,
            PhaseError::Io { .. } => RUNTIME,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError {
            phase: Phase::Config,
            source: e.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub vocab: PathBuf,
    /// Absent for models without a checkpoint format.
    pub checkpoint: Option<PathBuf>,
    pub generated: PathBuf,
    pub report_text: PathBuf,
    pub report_json: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: MetricReport,
    pub artifacts: Artifacts,
    pub timing: Vec<(Phase, Duration)>,
    pub warnings: Vec<String>,
}

struct Splits<T> {
    train: Vec<T>,
    test: Vec<T>,
}

enum Data {
    Single(Splits<TokenSequence>),
    Paired(Splits<PairedExample>),
}

enum Model {
    NGram(NGramModel<f64>),
    Uniform(UniformModel),
}

impl Model {
    fn as_dyn(&self) -> &dyn LanguageModel<f64> {
        match self {
            Model::NGram(m) => m,
            Model::Uniform(m) => m,
        }
    }
}

struct Timer {
    phases: Vec<(Phase, Duration)>,
    start: Instant,
}

impl Timer {
    fn lap(&mut self, phase: Phase) {
        let now = Instant::now();
        self.phases.push((phase, now - self.start));
        log::info!("{phase} phase done in {:.3?}", now - self.start);
        self.start = now;
    }
}

/// Runs data preparation, vocabulary, model, generation, evaluation and
/// artifact writing in that order.
pub fn run_experiment(resolved: &ResolvedConfig) -> Result<RunResult, RunError> {
    let cfg = &resolved.config;
    let entry = registry::dataset(&cfg.dataset)?;
    let model_entry = registry::model(&cfg.model)?;
    let mut warnings = resolved.warnings.clone();
    let mut timer = Timer {
        phases: Vec::new(),
        start: Instant::now(),
    };

    let split_ratio_set = resolved.provenance("split_ratio") != Some(Layer::Default);
    let dataset_dir = cfg.data_dir.join(entry.dir);
    let data = load_data(
        &dataset_dir,
        entry.structure,
        resolved,
        split_ratio_set,
        &mut warnings,
    )
    .map_err(RunError::at(Phase::Data))?;
    timer.lap(Phase::Data);

    let vocab = {
        let train_side: Vec<TokenSequence> = match &data {
            Data::Single(s) => s.train.clone(),
            Data::Paired(s) => s
                .train
                .iter()
                .flat_map(|p| [p.source.clone(), p.target.clone()])
                .collect(),
        };
        build_vocabulary(&train_side, cfg.data.max_vocab, cfg.data.min_freq)
            .map_err(|e| RunError::at(Phase::Vocab)(e.into()))?
    };
    log::info!("vocabulary of {} entries", vocab.len());
    timer.lap(Phase::Vocab);

    let model = build_model(model_entry.kind, resolved, &data, &vocab, &mut warnings)
        .map_err(RunError::at(Phase::Model))?;
    if log::log_enabled!(log::Level::Info) {
        let (train, _) = framed(&data, &vocab, false);
        let losses: Vec<f64> = batches(&train, cfg.data.batch_size, &vocab)
            .map_err(|e| RunError::at(Phase::Model)(e.into()))?
            .map(|b| model.as_dyn().forward(&b))
            .collect();
        let mean = losses.iter().sum::<f64>() / losses.len().max(1) as f64;
        log::info!(
            "mean training loss over {} batches: {mean:.4}",
            losses.len()
        );
    }
    timer.lap(Phase::Model);

    let hyps: Vec<Hypothesis<f64>> = match &data {
        Data::Single(_) => generate_ids(model.as_dyn(), &cfg.decode, &[], cfg.generate_count),
        Data::Paired(s) => {
            let prompts: Vec<Vec<TokenId>> = s.test.iter().map(|p| prompt_ids(&vocab, p)).collect();
            generate_for_prompts(model.as_dyn(), &cfg.decode, &prompts)
        }
    }
    .map_err(|e| RunError::at(Phase::Generate)(e.into()))?;
    let hyp_tokens: Vec<TokenSequence> = hyps
        .iter()
        .map(|h| decode(&vocab, h.generated()))
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::at(Phase::Generate)(e.into()))?;
    timer.lap(Phase::Generate);

    let report = evaluate_split(resolved, &data, &vocab, &model, &hyp_tokens)
        .map_err(RunError::at(Phase::Evaluate))?;
    timer.lap(Phase::Evaluate);

    let artifacts = write_artifacts(resolved, &vocab, &model, &hyp_tokens, &report)
        .map_err(RunError::at(Phase::Write))?;
    timer.lap(Phase::Write);

    Ok(RunResult {
        report,
        artifacts,
        timing: timer.phases,
        warnings,
    })
}

fn load_data(
    dir: &Path,
    structure: Structure,
    resolved: &ResolvedConfig,
    split_ratio_set: bool,
    warnings: &mut Vec<String>,
) -> Result<Data, PhaseError> {
    let cfg = &resolved.config;
    let lowercase = cfg.data.lowercase;
    let (ext_a, ext_b) = match structure {
        Structure::Single => ("txt", None),
        Structure::Paired => ("src", Some("tgt")),
    };
    let file = |stem: &str, ext: &str| dir.join(format!("{stem}.{ext}"));
    let presplit = ["train", "test"]
        .iter()
        .all(|stem| file(stem, ext_a).is_file());
    if presplit && split_ratio_set {
        let w = format!(
            "split_ratio is ignored: {} already has train/test files",
            dir.display()
        );
        log::warn!("{w}");
        warnings.push(w);
    }

    Ok(match (structure, ext_b) {
        (Structure::Single, _) => Data::Single(if presplit {
            Splits {
                train: load_single(&file("train", ext_a), lowercase)?,
                test: load_single(&file("test", ext_a), lowercase)?,
            }
        } else {
            let all = load_single(&file("corpus", ext_a), lowercase)?;
            let (train, _, test) = split(all, cfg.data.split_ratio, cfg.seed, true)?;
            Splits { train, test }
        }),
        (Structure::Paired, Some(ext_b)) => {
            let load = |stem: &str| load_paired(&file(stem, ext_a), &file(stem, ext_b), lowercase);
            Data::Paired(if presplit {
                Splits {
                    train: load("train")?,
                    test: load("test")?,
                }
            } else {
                let (train, _, test) =
                    split(load("corpus")?, cfg.data.split_ratio, cfg.seed, true)?;
                Splits { train, test }
            })
        }
        (Structure::Paired, None) => unreachable!("paired datasets have a target extension"),
    })
}

/// Sequences as the model sees them. A conditional pair becomes
/// `SOS source SOS target EOS`: the second SOS marks where the target starts,
/// so generation continues a `source SOS` prompt.
fn framed(data: &Data, vocab: &Vocabulary, test: bool) -> (Vec<Vec<TokenId>>, Option<Vec<usize>>) {
    match data {
        Data::Single(s) => {
            let part = if test { &s.test } else { &s.train };
            (
                part.iter().map(|seq| encode(vocab, seq, true)).collect(),
                None,
            )
        }
        Data::Paired(s) => {
            let part = if test { &s.test } else { &s.train };
            let seqs = part
                .iter()
                .map(|p| {
                    let mut ids = vec![Vocabulary::SOS];
                    ids.extend(prompt_ids(vocab, p));
                    ids.extend(encode(vocab, &p.target, false));
                    ids.push(Vocabulary::EOS);
                    ids
                })
                .collect();
            let prompt_lens = part.iter().map(|p| p.source.len() + 2).collect();
            (seqs, Some(prompt_lens))
        }
    }
}

/// Source ids followed by the target-start marker, without the leading SOS.
fn prompt_ids(vocab: &Vocabulary, p: &PairedExample) -> Vec<TokenId> {
    let mut ids = encode(vocab, &p.source, false);
    ids.push(Vocabulary::SOS);
    ids
}

fn build_model(
    kind: ModelKind,
    resolved: &ResolvedConfig,
    data: &Data,
    vocab: &Vocabulary,
    warnings: &mut Vec<String>,
) -> Result<Model, PhaseError> {
    let opts = &resolved.config.lm;
    match kind {
        ModelKind::Uniform => {
            if opts.checkpoint.is_some() {
                let w = "checkpoint is ignored: the Uniform model has no parameters".to_string();
                log::warn!("{w}");
                warnings.push(w);
            }
            Ok(Model::Uniform(UniformModel::new(vocab.len())?))
        }
        ModelKind::NGram => match &opts.checkpoint {
            Some(path) => {
                log::info!("loading checkpoint {}", path.display());
                let m: NGramModel<f64> = lm::load(path)?;
                if m.vocab_size() != vocab.len() {
                    return Err(LmError::Checkpoint {
                        path: path.clone(),
                        expected: lm::FORMAT_VERSION,
                        found: Some(lm::FORMAT_VERSION),
                        reason: format!(
                            "checkpoint vocabulary has {} entries but the dataset vocabulary has {}",
                            m.vocab_size(),
                            vocab.len()
                        ),
                    }
                    .into());
                }
                Ok(Model::NGram(m))
            }
            None => {
                let (train, _) = framed(data, vocab, false);
                Ok(Model::NGram(NGramModel::fit(
                    &train,
                    vocab.len(),
                    &opts.params,
                )?))
            }
        },
    }
}

fn evaluate_split(
    resolved: &ResolvedConfig,
    data: &Data,
    vocab: &Vocabulary,
    model: &Model,
    hyps: &[TokenSequence],
) -> Result<MetricReport, PhaseError> {
    let cfg = &resolved.config;
    let refs: Vec<TokenSequence> = match data {
        Data::Single(s) => s.test.clone(),
        Data::Paired(s) => s.test.iter().map(|p| p.target.clone()).collect(),
    };
    let (test_ids, prompt_lens) = framed(data, vocab, true);
    let inputs = EvalInputs {
        dataset: &cfg.dataset,
        hyps,
        refs: Some(match cfg.task {
            Task::Unconditional => References::Pooled(&refs),
            Task::Conditional => References::Aligned(&refs),
        }),
        model: Some(model.as_dyn()),
        data: Some(&test_ids),
        prompt_lens: prompt_lens.as_deref(),
    };
    Ok(evaluate(&cfg.metrics, &inputs)?)
}

/// Claims a fresh `<output_dir>/<dataset>/<model>/<timestamp>` directory,
/// adding a numeric suffix when another run took the same second.
fn run_dir(resolved: &ResolvedConfig) -> Result<PathBuf, PhaseError> {
    let cfg = &resolved.config;
    let parent = cfg.output_dir.join(&cfg.dataset).join(&cfg.model);
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| PhaseError::Io { path, source }
    };
    fs::create_dir_all(&parent).map_err(io(&parent))?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S").to_string();
    for attempt in 0.. {
        let name = if attempt == 0 {
            stamp.clone()
        } else {
            format!("{stamp}-{attempt}")
        };
        let dir = parent.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(io(&dir)(e)),
        }
    }
    unreachable!("the attempt counter is unbounded")
}

fn write_artifacts(
    resolved: &ResolvedConfig,
    vocab: &Vocabulary,
    model: &Model,
    hyps: &[TokenSequence],
    report: &MetricReport,
) -> Result<Artifacts, PhaseError> {
    let dir = run_dir(resolved)?;
    let write = |name: &str, contents: &[u8]| -> Result<PathBuf, PhaseError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| PhaseError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };

    let generated: String = hyps.iter().map(|h| detokenize(h) + "\n").collect();
    let checkpoint = match model {
        Model::NGram(m) => Some(write("model.nglm", &m.to_bytes())?),
        Model::Uniform(_) => None,
    };
    let artifacts = Artifacts {
        config: write("config.yaml", resolved.snapshot().as_bytes())?,
        vocab: write("vocab.txt", vocab.to_text().as_bytes())?,
        checkpoint,
        generated: write("generated.txt", generated.as_bytes())?,
        report_text: write("report.txt", report.to_text().as_bytes())?,
        report_json: write("report.json", report.to_json().as_bytes())?,
        dir,
    };
    log::info!("artifacts written to {}", artifacts.dir.display());
    Ok(artifacts)
}
