use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hfa::config::{FileConfig, OneOrMany};
use hfa::data::{generate_synthetic, load_dataset, save_dense_csv, Dataset, Standardizer};
use hfa::eval::{argmax_class, check_experiment, run_experiment, train_multiclass_with};
use hfa::hfa::ModelBundle;
use hfa::linalg::KernelFamily;
use hfa::{write_atomic, HfaError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "hfa",
    version,
    about = "Heterogeneous feature augmentation for domain adaptation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic source.csv and target.csv pair into --out (a directory).
    Generate,
    /// Train one-vs-rest models and write a model file.
    Train,
    /// Score a target-domain file with a trained model and write predictions CSV.
    Predict,
    /// Run the repeated-split protocol for HFA and the target-only SVM.
    Experiment,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Synthetic seed for `generate`, base seed for `experiment`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (directory for `generate`, file otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    source: Option<PathBuf>,
    #[arg(long, global = true)]
    target: Option<PathBuf>,
    /// Target-domain file to score in `predict` (defaults to --target).
    #[arg(long, global = true)]
    test: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Comma-separated labeled target samples per class, e.g. 5,7,10,15,20.
    #[arg(long, global = true, value_delimiter = ',')]
    per_class_target: Option<Vec<usize>>,
    #[arg(long, global = true)]
    per_class_source: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long = "C", global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    kernel: Option<KernelFamily>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Standardize features with training-split statistics.
    #[arg(long, global = true)]
    standardize: bool,
    /// Suppress per-iteration objective logging.
    #[arg(long, short, global = true)]
    quiet: bool,
}

fn merged_config(cli: &Cli) -> Result<FileConfig> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(seed) = c.seed {
        match cli.command {
            Command::Generate => cfg.synthetic.seed = Some(seed),
            _ => cfg.protocol.base_seed = Some(seed),
        }
    }
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.paths.out, &c.out);
    set(&mut cfg.paths.source, &c.source);
    set(&mut cfg.paths.target, &c.target);
    set(&mut cfg.paths.test, &c.test);
    set(&mut cfg.paths.model, &c.model);
    if let Some(list) = &c.per_class_target {
        cfg.protocol.per_class_target = Some(OneOrMany::Many(list.clone()));
    }
    if c.per_class_source.is_some() {
        cfg.protocol.per_class_source = c.per_class_source;
    }
    if c.trials.is_some() {
        cfg.protocol.trials = c.trials;
    }
    if c.lambda.is_some() {
        cfg.hfa.lambda = c.lambda;
    }
    if c.c.is_some() {
        cfg.hfa.c = c.c;
    }
    if c.kernel.is_some() {
        cfg.kernel.family = c.kernel;
    }
    if c.gamma.is_some() {
        cfg.kernel.gamma = c.gamma;
    }
    if c.standardize {
        cfg.data.standardize = Some(true);
    }
    Ok(cfg)
}

fn required<'a>(path: &'a Option<PathBuf>, key: &str, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| HfaError::Config(format!("missing {flag} (config key paths.{key})")))
}

fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(HfaError::Config(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

/// The output's directory must exist before any work starts.
fn check_output(path: &Path) -> Result<()> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(HfaError::Config(format!(
            "output directory {} does not exist",
            parent.display()
        )))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HfaError::io("<stdout>", e)),
    }
}

fn class_summary(d: &Dataset) -> String {
    d.class_counts()
        .iter()
        .map(|(c, n)| format!("{c}:{n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_generate(cfg: &FileConfig) -> Result<()> {
    let spec = cfg.synthetic_spec()?;
    let dir = cfg.paths.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| HfaError::io(&dir, e))?;
    let (source, target) = generate_synthetic(&spec)?;
    let source_path = dir.join("source.csv");
    let target_path = dir.join("target.csv");
    save_dense_csv(&source, &source_path)?;
    save_dense_csv(&target, &target_path)?;
    for (d, p) in [(&source, &source_path), (&target, &target_path)] {
        println!(
            "{}: {} samples, dim {}, classes {}",
            p.display(),
            d.len(),
            d.dim(),
            class_summary(d)
        );
    }
    Ok(())
}

fn cmd_train(cfg: &FileConfig, quiet: bool) -> Result<()> {
    let hfa_cfg = cfg.hfa_config()?;
    let source_path = required(&cfg.paths.source, "source", "--source")?;
    let target_path = required(&cfg.paths.target, "target", "--target")?;
    let model_path = cfg
        .paths
        .model
        .as_deref()
        .or(cfg.paths.out.as_deref())
        .ok_or_else(|| HfaError::Config("missing --model or --out for the trained model".into()))?;
    check_input(source_path)?;
    check_input(target_path)?;
    check_output(model_path)?;

    let mut source = load_dataset(source_path)?;
    let mut target = load_dataset(target_path)?;
    let mut input = None;
    if cfg.data.standardize.unwrap_or(false) {
        source = Standardizer::fit(&source)?.apply(&source)?;
        let s = Standardizer::fit(&target)?;
        target = s.apply(&target)?;
        input = Some(s);
    }
    let mut bundle = train_multiclass_with(&source, &target, &hfa_cfg, &mut |class, rec| {
        if !quiet {
            eprintln!(
                "class {class} iteration {} objective {:.10e}",
                rec.iteration, rec.objective
            );
        }
    })?;
    if let Some(s) = input {
        bundle = bundle.with_input_standardizer(s)?;
    }
    bundle.save(model_path)?;
    for (class, m) in bundle.entries() {
        println!(
            "class {class}: objective {:.10e} after {} iterations (converged: {})",
            m.objective(),
            m.iterations(),
            m.converged()
        );
    }
    println!("model written to {}", model_path.display());
    Ok(())
}

fn predictions_csv(bundle: &ModelBundle, test: &Dataset) -> Result<String> {
    let classes = bundle.classes();
    let mut out = String::from("row,predicted_class");
    for c in &classes {
        write!(out, ",score_class{c}").unwrap();
    }
    out.push('\n');
    for (row, x) in test.features().iter().enumerate() {
        let scores = bundle.decision_values(x)?;
        write!(out, "{row},{}", argmax_class(&classes, &scores)?).unwrap();
        for s in scores {
            write!(out, ",{s:.16e}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_predict(cfg: &FileConfig) -> Result<()> {
    let model_path = required(&cfg.paths.model, "model", "--model")?;
    let test_path = cfg
        .paths
        .test
        .as_deref()
        .or(cfg.paths.target.as_deref())
        .ok_or_else(|| HfaError::Config("missing --test (config key paths.test)".into()))?;
    check_input(model_path)?;
    check_input(test_path)?;
    if let Some(out) = &cfg.paths.out {
        check_output(out)?;
    }
    let bundle = ModelBundle::load(model_path)?;
    let raw = std::fs::read_to_string(test_path).map_err(|e| HfaError::io(test_path, e))?;
    let text = if raw.trim().is_empty() {
        predictions_csv(&bundle, &Dataset::empty("test", bundle.target_dim())?)?
    } else {
        let test = load_dataset(test_path)?;
        if test.dim() != bundle.target_dim() {
            return Err(HfaError::input(format!(
                "{} has dimension {}, the model expects target dimension {}",
                test_path.display(),
                test.dim(),
                bundle.target_dim()
            )));
        }
        predictions_csv(&bundle, &test)?
    };
    write_output(cfg.paths.out.as_deref(), &text)
}

fn cmd_experiment(cfg: &FileConfig) -> Result<()> {
    let specs = cfg.experiment_specs()?;
    let source_path = required(&cfg.paths.source, "source", "--source")?;
    let target_path = required(&cfg.paths.target, "target", "--target")?;
    check_input(source_path)?;
    check_input(target_path)?;
    if let Some(out) = &cfg.paths.out {
        check_output(out)?;
    }
    let source = load_dataset(source_path)?;
    let target = load_dataset(target_path)?;
    for spec in &specs {
        check_experiment(&source, &target, spec)?;
    }
    let mut text = String::new();
    for (i, spec) in specs.iter().enumerate() {
        let report = run_experiment(&source, &target, spec)?;
        eprintln!(
            "per_class_target {}: hfa {:.4} ± {:.4}, svm_t {:.4} ± {:.4}",
            spec.per_class_target,
            report.hfa().mean,
            report.hfa().std,
            report.svm_t().mean,
            report.svm_t().std
        );
        if i > 0 {
            text.push('\n');
        }
        text.push_str(&report.to_text());
    }
    write_output(cfg.paths.out.as_deref(), &text)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = merged_config(cli)?;
    match cli.command {
        Command::Generate => cmd_generate(&cfg),
        Command::Train => cmd_train(&cfg, cli.common.quiet),
        Command::Predict => cmd_predict(&cfg),
        Command::Experiment => cmd_experiment(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
