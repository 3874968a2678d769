//! The `medpredict` command line: `train`, `evaluate`, `sweep` and `serve`.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medpredict_core::classifiers::RfParams;
use medpredict_core::dataset::{load_csv, split_indices};
use medpredict_core::ensemble::{knn_sweep, run_protocol, MemberParams, Protocol, ScoreRow, SweepResult, DEFAULT_SWEEP_RANGE};
use medpredict_core::evaluation::{confusion_matrix, precision_recall, MetricReport};
use medpredict_core::model::ModelDocument;
use medpredict_core::recommender::RecommendationTable;
use medpredict_core::{Classifier, Error, LabeledDataset, Member, SplitSpec};
use medpredict_records::RecordStore;
use medpredict_server::AppState;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_DATA: &str = "data/symptom_survey.csv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Compat(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 2,
            CliError::Compat(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn data_err(context: &str) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "medpredict", version, about = "Symptom-based disease prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep K-NN neighbours, estimate member weights and fit the ensemble.
    Train(TrainArgs),
    /// Confusion matrix and metrics of a saved model.
    Evaluate(EvaluateArgs),
    /// Mean K-NN accuracy for N = 1..15.
    Sweep(SweepArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Symptom survey CSV: `disease,symptom_1,..`.
    #[arg(long, default_value = DEFAULT_DATA)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Holdout repetitions per estimate.
    #[arg(long, default_value_t = 50)]
    pub alpha: usize,
    /// Split without preserving class proportions.
    #[arg(long)]
    pub no_stratify: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl RunConfig {
    fn protocol(&self) -> Protocol {
        Protocol {
            alpha: self.alpha,
            seed: self.seed,
            test_fraction: self.test_fraction,
            stratified: !self.no_stratify,
        }
    }

    fn split(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            seed: self.seed,
            stratified: !self.no_stratify,
        }
    }

    fn load(&self) -> Result<LabeledDataset> {
        load_csv(&self.data).map_err(data_err(&self.data.display().to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunConfig,
    /// K-NN neighbours; defaults to the sweep's best N.
    #[arg(long)]
    pub knn_n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub rf_trees: usize,
    /// Defaults to floor(sqrt(number of symptoms)).
    #[arg(long)]
    pub rf_max_features: Option<usize>,
    #[arg(long)]
    pub rf_max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub rf_min_samples_split: usize,
    #[arg(long, default_value_t = 1.0)]
    pub nb_smoothing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Partition {
    Test,
    Train,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scored {
    Ensemble,
    Knn,
    NaiveBayes,
    RandomForest,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long, default_value = "out/model.json")]
    pub model: PathBuf,
    #[arg(long, default_value = DEFAULT_DATA)]
    pub data: PathBuf,
    /// Rows to score, using the split stored in the model.
    #[arg(long, value_enum, default_value_t = Partition::Test)]
    pub on: Partition,
    #[arg(long, value_enum, default_value_t = Scored::Ensemble)]
    pub member: Scored,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "MEDPREDICT_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    #[arg(long, env = "MEDPREDICT_MODEL", default_value = "out/model.json")]
    pub model: PathBuf,
    #[arg(long, env = "MEDPREDICT_JOURNAL", default_value = "out/journal.jsonl")]
    pub journal: PathBuf,
    #[arg(long, env = "MEDPREDICT_RECOMMENDATIONS", default_value = "data/recommendations.json")]
    pub recommendations: PathBuf,
    #[arg(long, env = "MEDPREDICT_SCHEMES", default_value = "data/schemes.json")]
    pub schemes: PathBuf,
    /// Browser origin allowed by CORS; any origin when omitted.
    #[arg(long, env = "MEDPREDICT_CORS_ORIGIN")]
    pub cors_origin: Option<String>,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn config_err(e: Error) -> CliError {
    CliError::Data(e.to_string())
}

pub struct TrainOutcome {
    pub sweep: Option<SweepResult>,
    pub knn_n: usize,
    pub summary: Vec<ScoreRow>,
    pub document: ModelDocument,
    pub report: String,
}

/// Rows in the order rf, nb, knn, ensemble.
pub fn format_summary(rows: &[ScoreRow]) -> String {
    let mut out = format!("{:<15}{:>10}{:>11}{:>9}\n", "model", "accuracy", "precision", "recall");
    for name in ["random_forest", "naive_bayes", "knn", "ensemble"] {
        if let Some(r) = rows.iter().find(|r| r.name == name) {
            writeln!(
                out,
                "{:<15}{:>10.2}{:>11.2}{:>9.2}",
                r.name,
                r.accuracy * 100.0,
                r.precision * 100.0,
                r.recall * 100.0
            )
            .unwrap();
        }
    }
    out
}

pub fn train(args: &TrainArgs) -> Result<TrainOutcome> {
    let started = Instant::now();
    let ds = args.run.load()?;
    let protocol = args.run.protocol();
    let mut report = format!(
        "{} rows, {} symptoms, {} diseases; alpha = {}, seed = {}\n",
        ds.len(),
        ds.n_features(),
        ds.n_classes(),
        protocol.alpha,
        protocol.seed
    );
    let (sweep, knn_n) = match args.knn_n {
        Some(n) => (None, n),
        None => {
            let sweep = knn_sweep(&ds, DEFAULT_SWEEP_RANGE, &protocol).map_err(config_err)?;
            write(&args.run.out, "sweep.csv", &sweep.to_csv())?;
            write(&args.run.out, "sweep.json", &json(&sweep))?;
            writeln!(report, "knn neighbours: {} (best of sweep)", sweep.best_n).unwrap();
            let n = sweep.best_n;
            (Some(sweep), n)
        }
    };
    let params = MemberParams {
        knn_neighbors: knn_n,
        nb_smoothing: args.nb_smoothing,
        rf: RfParams {
            n_trees: args.rf_trees,
            max_features: args.rf_max_features,
            max_depth: args.rf_max_depth,
            min_samples_split: args.rf_min_samples_split,
            bootstrap: true,
            seed: args.run.seed,
        },
    };
    let runs = run_protocol(&ds, &protocol, &params).map_err(config_err)?;
    let weights = runs.weight_report().map_err(config_err)?;
    let summary = runs.summary(&weights.weights()).map_err(config_err)?;
    let document = ModelDocument::fit(&ds, params, args.run.split(), protocol, weights.clone()).map_err(config_err)?;

    let out = &args.run.out;
    write(out, "weights.csv", &weights.to_csv())?;
    write(out, "weights.json", &json(&weights))?;
    write(out, "summary.json", &json(&summary))?;
    let model_json = document.to_json().map_err(|e| CliError::Runtime(e.to_string()))?;
    write(out, "model.json", &model_json)?;

    report.push('\n');
    report.push_str(&format_summary(&summary));
    writeln!(report, "\nwrote model.json, weights.csv, weights.json, summary.json to {}", out.display()).unwrap();
    writeln!(report, "elapsed {:.1}s", started.elapsed().as_secs_f64()).unwrap();
    Ok(TrainOutcome {
        sweep,
        knn_n,
        summary,
        document,
        report,
    })
}

pub fn sweep(args: &SweepArgs) -> Result<(SweepResult, String)> {
    let ds = args.run.load()?;
    let sweep = knn_sweep(&ds, DEFAULT_SWEEP_RANGE, &args.run.protocol()).map_err(config_err)?;
    write(&args.run.out, "sweep.csv", &sweep.to_csv())?;
    write(&args.run.out, "sweep.json", &json(&sweep))?;
    let mut report = format!("{:>3}{:>12}\n", "n", "mean (%)");
    for e in &sweep.entries {
        writeln!(report, "{:>3}{:>12.2}", e.n, e.mean_score * 100.0).unwrap();
    }
    writeln!(report, "best n = {} over alpha = {}", sweep.best_n, sweep.alpha).unwrap();
    Ok((sweep, report))
}

#[derive(Debug, Serialize)]
pub struct Evaluation {
    pub member: String,
    pub on: String,
    pub rows: usize,
    #[serde(flatten)]
    pub metrics: MetricReport,
}

fn load_model(path: &Path) -> Result<ModelDocument> {
    ModelDocument::load(path).map_err(|e| match e {
        Error::Value(m) => CliError::Compat(format!("{}: {m}", path.display())),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(Evaluation, String)> {
    let doc = load_model(&args.model)?;
    let ds = load_csv(&args.data).map_err(data_err(&args.data.display().to_string()))?;
    let model = &doc.model;
    if ds.vocabulary() != model.vocabulary() {
        return Err(CliError::Compat("the data's symptom vocabulary differs from the model's".into()));
    }
    if ds.class_names() != model.class_names() {
        return Err(CliError::Compat("the data's diseases differ from the model's".into()));
    }
    let rows: Vec<usize> = match args.on {
        Partition::All => (0..ds.len()).collect(),
        Partition::Test | Partition::Train => {
            let idx = split_indices(ds.labels(), &doc.split).map_err(config_err)?;
            if args.on == Partition::Test { idx.test } else { idx.train }
        }
    };
    let scorer: &dyn Classifier = match args.member {
        Scored::Ensemble => model,
        Scored::Knn => model.members().get(Member::Knn),
        Scored::NaiveBayes => model.members().get(Member::NaiveBayes),
        Scored::RandomForest => model.members().get(Member::RandomForest),
    };
    let subset = ds.subset(&rows);
    let predictions = subset
        .rows()
        .iter()
        .map(|x| scorer.predict_class(x))
        .collect::<medpredict_core::Result<Vec<_>>>()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let cm = confusion_matrix(subset.labels(), &predictions, ds.n_classes())
        .and_then(|m| m.with_class_names(ds.class_names()))
        .map_err(config_err)?;
    let metrics = precision_recall(&cm).map_err(config_err)?;
    let member = args.member.to_possible_value().expect("no skipped variants").get_name().to_string();
    let on = args.on.to_possible_value().expect("no skipped variants").get_name().to_string();
    let evaluation = Evaluation {
        member,
        on,
        rows: rows.len(),
        metrics,
    };
    write(&args.out, "confusion.csv", &cm.to_csv().map_err(config_err)?)?;
    write(&args.out, "metrics.json", &json(&evaluation))?;
    let m = &evaluation.metrics;
    let report = format!(
        "{} on {} rows ({}): accuracy {:.2}, macro precision {:.2}, macro recall {:.2}\nwrote confusion.csv, metrics.json to {}\n",
        evaluation.member,
        evaluation.rows,
        evaluation.on,
        m.accuracy * 100.0,
        m.macro_precision * 100.0,
        m.macro_recall * 100.0,
        args.out.display()
    );
    Ok((evaluation, report))
}

/// Loads everything `serve` needs. A missing or unreadable model is a
/// runtime error; a bad recommendation table is a data error.
pub fn app_state(args: &ServeArgs) -> Result<AppState> {
    if !args.model.exists() {
        return Err(CliError::Runtime(format!("model file {} not found", args.model.display())));
    }
    let model = ModelDocument::load(&args.model)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.model.display())))?;
    let recommendations = RecommendationTable::load(&args.recommendations)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.recommendations.display())))?;
    if let Some(dir) = args.journal.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    let records = RecordStore::open(&args.journal)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.journal.display())))?;
    Ok(AppState {
        model: Some(model),
        recommendations,
        records: Arc::new(records),
        schemes_path: Some(args.schemes.clone()),
        cors_origin: args.cors_origin.clone(),
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
    tracing::info!("shutdown requested");
}

pub fn serve(args: &ServeArgs) -> Result<()> {
    let state = app_state(args)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.listen)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {}: {e}", args.listen)))?;
        medpredict_server::serve(listener, Arc::new(state), shutdown_signal())
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))
    })
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => print!("{}", train(&args)?.report),
        Command::Evaluate(args) => print!("{}", evaluate(&args)?.1),
        Command::Sweep(args) => print!("{}", sweep(&args)?.1),
        Command::Serve(args) => serve(&args)?,
    }
    Ok(())
}
