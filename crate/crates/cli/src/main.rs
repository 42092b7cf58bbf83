use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use genbench::corpus::{load_single, CorpusError, TokenSequence};
use genbench::metrics::{evaluate, EvalInputs, MetricConfig, MetricName, References};
use genbench::runner::{
    list_registry, load_config_for, parse_overrides, run_experiment, Phase, PhaseError, RunError,
};

#[derive(Parser)]
#[command(
    name = "genbench",
    version,
    about = "Text generation experiments and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment: --model=<name> --dataset=<name> [--key=value ...]
    Run {
        /// Configuration overrides of the form --key=value.
        #[arg(
            trailing_var_arg = true,
            allow_hyphen_values = true,
            value_name = "--key=value"
        )]
        overrides: Vec<String>,
    },
    /// Score a hypothesis file against a reference file, one sentence per line.
    Eval {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Comma-separated metric names.
        #[arg(long, default_value = "bleu", value_delimiter = ',')]
        metrics: Vec<String>,
        /// Pair line i of --hyp with line i of --ref instead of pooling all references.
        #[arg(long)]
        aligned: bool,
        #[arg(long)]
        lowercase: bool,
        #[arg(long, default_value_t = 4)]
        bleu_max_n: usize,
        #[arg(long, default_value_t = 2)]
        rouge_max_n: usize,
        #[arg(long, default_value_t = 2)]
        distinct_max_n: usize,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the built-in datasets, models and metrics.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { overrides } => run(&overrides),
        Command::Eval {
            hyp,
            reference,
            metrics,
            aligned,
            lowercase,
            bleu_max_n,
            rouge_max_n,
            distinct_max_n,
            threads,
            json,
        } => {
            let cfg = |names| MetricConfig {
                names,
                bleu_max_n,
                rouge_max_n,
                distinct_max_n,
                threads,
                ..MetricConfig::default()
            };
            eval(&hyp, &reference, &metrics, aligned, lowercase, json, cfg)
        }
        Command::List => {
            let r = list_registry();
            println!("datasets: {}", r.datasets.join(", "));
            println!("models:   {}", r.models.join(", "));
            println!("metrics:  {}", r.metrics.join(", "));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(overrides: &[String]) -> Result<(), RunError> {
    let cli = parse_overrides(overrides)?;
    let resolved = load_config_for(&cli)?;
    let result = run_experiment(&resolved)?;
    print!("{}", result.report.to_text());
    eprintln!("artifacts: {}", result.artifacts.dir.display());
    Ok(())
}

fn eval(
    hyp: &PathBuf,
    reference: &PathBuf,
    metrics: &[String],
    aligned: bool,
    lowercase: bool,
    json: bool,
    cfg: impl FnOnce(Vec<MetricName>) -> MetricConfig,
) -> Result<(), RunError> {
    let fail = |phase| move |e: PhaseError| RunError { phase, source: e };
    let names = metrics
        .iter()
        .map(|m| m.parse::<MetricName>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(Phase::Config)(e.into()))?;
    let cfg = cfg(names);
    let load = |path: &PathBuf| -> Result<Vec<TokenSequence>, RunError> {
        let lines = load_single(path, lowercase).map_err(|e| fail(Phase::Data)(e.into()))?;
        if lines.is_empty() {
            let source = std::io::Error::new(std::io::ErrorKind::InvalidData, "file is empty");
            return Err(fail(Phase::Data)(
                CorpusError::Io {
                    path: path.clone(),
                    source,
                }
                .into(),
            ));
        }
        Ok(lines)
    };
    let hyps = load(hyp)?;
    let refs = load(reference)?;
    let inputs = EvalInputs {
        refs: Some(if aligned {
            References::Aligned(&refs)
        } else {
            References::Pooled(&refs)
        }),
        ..EvalInputs::hyps_only("eval", &hyps)
    };
    let report = evaluate(&cfg, &inputs).map_err(|e| fail(Phase::Evaluate)(e.into()))?;
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}
