use std::path::PathBuf;
use std::process::ExitCode;

use aos_elm::data::{self, CsvOptions, Dataset, PcaModel};
use aos_elm::experiment::runner::{self, accuracy, load_sets, project};
use aos_elm::experiment::{self as exp, ExperimentConfig, RunMetrics};
use aos_elm::{snapshot, Error, ErrorKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "aos-elm", version, about = "Boosted online sequential ELM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit PCA on the training set and write projected CSV files.
    Prep(PrepArgs),
    /// Run one model for the configured number of trials.
    Run(RunArgs),
    /// Run the boosted model over several forgetting factors plus the no-forget variant.
    SweepGamma(SweepArgs),
    /// Run eos, vos, vwos, aos and batch AdaBoost under one seed.
    Compare(OutArgs),
    /// Score a saved model on a test set.
    Eval(EvalArgs),
}

/// Every field can come from `--config`; flags win over the file.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// aos, aos_no_forget, eos, vos, vwos or adaboost_batch.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    initial_size: Option<String>,
    #[arg(long)]
    chunk_size: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// sigmoid or relu.
    #[arg(long)]
    activation: Option<String>,
    /// Hidden weight sampling range as `low,high`.
    #[arg(long, allow_hyphen_values = true)]
    weight_range: Option<String>,
    /// Hidden bias sampling range as `low,high`.
    #[arg(long, allow_hyphen_values = true)]
    bias_range: Option<String>,
    #[arg(long)]
    ridge: Option<String>,
    #[arg(long)]
    error_clamp: Option<String>,
    /// Evaluate on the test set every this many chunks.
    #[arg(long)]
    eval_every: Option<String>,
    /// Variance fraction to keep, or `none`.
    #[arg(long)]
    pca: Option<String>,
    /// Directory holding the four standard MNIST files.
    #[arg(long)]
    mnist_dir: Option<String>,
    #[arg(long)]
    train_images: Option<String>,
    #[arg(long)]
    train_labels: Option<String>,
    #[arg(long)]
    test_images: Option<String>,
    #[arg(long)]
    test_labels: Option<String>,
    #[arg(long)]
    train_csv: Option<String>,
    #[arg(long)]
    test_csv: Option<String>,
    #[arg(long)]
    label_column: Option<String>,
    /// Trials run in parallel.
    #[arg(long)]
    jobs: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> aos_elm::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("model", &self.model),
            ("classifiers", &self.classifiers),
            ("hidden", &self.hidden),
            ("gamma", &self.gamma),
            ("initial_size", &self.initial_size),
            ("chunk_size", &self.chunk_size),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("activation", &self.activation),
            ("weight_range", &self.weight_range),
            ("bias_range", &self.bias_range),
            ("ridge", &self.ridge),
            ("error_clamp", &self.error_clamp),
            ("eval_every", &self.eval_every),
            ("pca", &self.pca),
            ("mnist_dir", &self.mnist_dir),
            ("train_images", &self.train_images),
            ("train_labels", &self.train_labels),
            ("test_images", &self.test_images),
            ("test_labels", &self.test_labels),
            ("train_csv", &self.train_csv),
            ("test_csv", &self.test_csv),
            ("label_column", &self.label_column),
            ("jobs", &self.jobs),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Report directory.
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: OutArgs,
    /// Save the first trial's final model here.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: OutArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.9999,0.999,0.99,0.95,0.8")]
    gammas: Vec<f64>,
}

#[derive(Args, Debug)]
struct PrepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for train.csv, test.csv and pca.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    snapshot: PathBuf,
    /// PCA model written by `prep`, applied to the test features first.
    #[arg(long)]
    pca_model: Option<PathBuf>,
    #[arg(long)]
    test_images: Option<PathBuf>,
    #[arg(long)]
    test_labels: Option<PathBuf>,
    #[arg(long)]
    test_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    label_column: usize,
}

fn print_table(runs: &[RunMetrics]) {
    println!("{:<16} {:>8} {:>10} {:>10} {:>7}", "model", "gamma", "accuracy", "tail_std", "trials");
    for r in runs {
        let g = r.gamma.map_or("-".into(), |g| g.to_string());
        let t = r.tail_std.map_or("-".into(), |t| format!("{t:.4}"));
        println!(
            "{:<16} {:>8} {:>9.2}% {:>10} {:>7}",
            r.label,
            g,
            100.0 * r.mean_final_accuracy,
            t,
            r.trials.len()
        );
    }
}

fn prep(args: &PrepArgs) -> aos_elm::Result<()> {
    let cfg = args.config.resolve()?;
    let (train, test) = load_sets(&cfg.data)?;
    let target = cfg.pca_variance_target.unwrap_or(1.0);
    let prepared = project(train, test, Some(target))?;
    let pca = prepared.pca.as_ref().expect("pca requested");
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    pca.save(args.out.join("pca.txt"))?;
    data::csv::save_csv(args.out.join("train.csv"), &prepared.train)?;
    data::csv::save_csv(args.out.join("test.csv"), &prepared.test)?;
    println!(
        "kept {} of {} components ({} train, {} test rows) in {}",
        pca.output_dim(),
        pca.input_dim(),
        prepared.train.len(),
        prepared.test.len(),
        args.out.display()
    );
    Ok(())
}

fn run(args: &RunArgs) -> aos_elm::Result<()> {
    let cfg = args.common.config.resolve()?;
    let data = exp::prepare_data(&cfg)?;
    let outcomes = exp::run_trials(&cfg, &data)?;
    let metrics = runner::summarize(&cfg, cfg.label(), &outcomes);
    exp::emit_report(std::slice::from_ref(&metrics), &args.common.out)?;
    if let Some(path) = &args.snapshot {
        snapshot::save(&outcomes[0].model, path)?;
    }
    print_table(&[metrics]);
    Ok(())
}

fn sweep(args: &SweepArgs) -> aos_elm::Result<()> {
    let cfg = args.common.config.resolve()?;
    let data = exp::prepare_data(&cfg)?;
    let table = exp::sweep_gamma(&cfg, &data, &args.gammas)?;
    exp::emit_sweep(&table, &args.common.out)?;
    print_table(&table.all_runs());
    println!(
        "tail_std ratio, no forgetting vs gamma {}: {:.2}",
        table.best_gamma, table.std_ratio
    );
    Ok(())
}

fn compare(args: &OutArgs) -> aos_elm::Result<()> {
    let cfg = args.config.resolve()?;
    let data = exp::prepare_data(&cfg)?;
    let runs = exp::compare(&cfg, &data)?;
    exp::emit_report(&runs, &args.out)?;
    print_table(&runs);
    Ok(())
}

fn eval(args: &EvalArgs) -> aos_elm::Result<()> {
    let model = snapshot::load(&args.snapshot)?;
    let test = match (&args.test_csv, &args.test_images, &args.test_labels) {
        (Some(csv), _, _) => data::load_csv(
            csv,
            &CsvOptions {
                label_column: args.label_column,
                ..CsvOptions::default()
            },
        )?,
        (None, Some(img), Some(lab)) => data::load_idx(img, lab)?,
        _ => {
            return Err(Error::Parameter(
                "eval needs --test-csv or both --test-images and --test-labels".into(),
            ))
        }
    };
    let test = match &args.pca_model {
        Some(p) => {
            let pca = PcaModel::load(p)?;
            Dataset::with_class_count(data::apply_pca(&pca, &test.features)?, test.labels, test.class_count)?
        }
        None => test,
    };
    let test = Dataset::with_class_count(test.features, test.labels, model.class_count)?;
    let acc = accuracy(&model, &test)?;
    println!("accuracy {:.4} on {} samples", acc, test.len());
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Prep(a) => prep(a),
        Command::Run(a) => run(a),
        Command::SweepGamma(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
