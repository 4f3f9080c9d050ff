use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use minacc::datagen::{generate, load_dataset_csv, save_dataset_csv, standardize, DatasetKind, DatasetSpec};
use minacc::featmap::io::{self as featio, FLAG_BOUNDED, FLAG_PAULI, FLAG_PROXY};
use minacc::featmap::{pauli_feature_matrix, proxy_embed, EncodingCircuitSpec, ProjectionSpec};
use minacc::harness::{emit_report, run_estimator, run_experiment, EstimatorSettings, ExperimentConfig, ReportFormat};
use minacc::sampling::{
    coverage_probability_bound, coverage_probability_exact, sample_size, AdaptiveParams, CoverageQuery, Method,
    PilotParams,
};
use minacc::svmref::{accuracy, scale_gamma, svm_predict, svm_train, Kernel, SvmParams};
use minacc::{Error, Result};

#[derive(Parser)]
#[command(name = "minacc", version, about = "Minimum accuracy of feature maps by axis-aligned classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV
    GenData(GenData),
    /// Embed a dataset CSV into a feature file
    Embed(Embed),
    /// Compute or estimate the minimum accuracy of a feature file
    Minacc(Minacc),
    /// Coverage probability and required sample size
    Coverage(Coverage),
    /// Train and evaluate an SVM baseline
    Svm(Svm),
    /// Run a full experiment from a config file
    Experiment(Experiment),
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    LinearSeparable,
    MultiCluster,
    Circles,
}

impl From<DatasetArg> for DatasetKind {
    fn from(d: DatasetArg) -> Self {
        match d {
            DatasetArg::LinearSeparable => DatasetKind::LinearSeparable,
            DatasetArg::MultiCluster => DatasetKind::MultiCluster,
            DatasetArg::Circles => DatasetKind::Circles,
        }
    }
}

#[derive(Args)]
struct GenData {
    #[arg(long, value_enum)]
    dataset: DatasetArg,
    #[arg(long, default_value_t = 1000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standardize every input column before writing
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    Proxy,
    Pauli,
}

#[derive(Args)]
struct Embed {
    /// Dataset CSV (x_1..x_m,y)
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "proxy")]
    embedding: EmbeddingArg,
    #[arg(long, default_value_t = 8)]
    qubits: usize,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 1.0)]
    rotation_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `.csv` for CSV, anything else for the binary format
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Det,
    Conservative,
    Pilot,
    Adaptive,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Det => Method::Deterministic,
            MethodArg::Conservative => Method::Conservative,
            MethodArg::Pilot => Method::Pilot,
            MethodArg::Adaptive => Method::Adaptive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct EstimatorFlags {
    #[arg(long, value_enum, default_value = "det")]
    method: MethodArg,
    /// Prior fraction of good axes (conservative)
    #[arg(long, default_value_t = 0.25)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    n_pilot: usize,
    #[arg(long, default_value_t = 0.01)]
    cap_fraction: f64,
    #[arg(long, default_value_t = 40)]
    batch_size: usize,
    #[arg(long, default_value_t = 3)]
    patience: usize,
    #[arg(long, default_value_t = 0.01)]
    budget_fraction: f64,
}

impl EstimatorFlags {
    fn settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            p: self.p,
            delta: self.delta,
            pilot: PilotParams { n_pilot: self.n_pilot, delta: self.delta, cap_fraction: self.cap_fraction },
            adaptive: AdaptiveParams {
                batch_size: self.batch_size,
                patience: self.patience,
                budget_fraction: self.budget_fraction,
                ..AdaptiveParams::default()
            },
        }
    }
}

#[derive(Args)]
struct Minacc {
    /// Feature file (binary or `.csv`)
    #[arg(long)]
    features: PathBuf,
    /// Dataset CSV supplying the labels, row-aligned with the features
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    estimator: EstimatorFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Also write the result as JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Coverage {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    p: f64,
    /// Sample size; defaults to the required size
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Accuracy quantile the prior refers to (reported only)
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Args)]
struct Svm {
    /// Training dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Optional evaluation dataset CSV
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// RBF width; defaults to the scale convention
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Write the trained model as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Experiment {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these methods (repeatable)
    #[arg(long, value_enum)]
    method: Vec<MethodArg>,
    /// Conservative priors (repeatable)
    #[arg(long)]
    p: Vec<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n_pilot: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    budget_fraction: Option<f64>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormatArg,
}

fn gen_data(args: GenData) -> Result<()> {
    let spec = DatasetSpec::new(args.dataset.into(), args.n_samples, args.seed);
    let mut data = generate(&spec)?;
    if args.standardize {
        data = standardize(&data)?.0;
    }
    save_dataset_csv(&data, &args.out)?;
    println!("wrote {} samples to {}", data.n_samples(), args.out.display());
    Ok(())
}

fn embed(args: Embed) -> Result<()> {
    let data = load_dataset_csv(&args.data)?;
    let (matrix, flags) = match args.embedding {
        EmbeddingArg::Proxy => {
            let spec = ProjectionSpec {
                input_dim: data.input_dim(),
                feature_dim: 1usize << (2 * args.qubits),
                seed: args.seed,
            };
            (proxy_embed(&data, &spec)?, FLAG_BOUNDED | FLAG_PROXY)
        }
        EmbeddingArg::Pauli => {
            let mut spec = EncodingCircuitSpec::new(args.qubits);
            spec.layers = args.layers;
            spec.rotation_scale = args.rotation_scale;
            (pauli_feature_matrix(&data, &spec)?, FLAG_BOUNDED | FLAG_PAULI)
        }
    };
    featio::save(&matrix, flags, &args.out)?;
    println!("wrote {} x {} features to {}", data.n_samples(), 1usize << (2 * args.qubits), args.out.display());
    Ok(())
}

fn minacc(args: Minacc) -> Result<()> {
    let features = featio::load(&args.features)?;
    let data = load_dataset_csv(&args.data)?;
    let result = run_estimator(&features, data.labels(), args.estimator.method.into(), &args.estimator.settings(), args.seed)?;
    let best = result.best();
    let json = serde_json::json!({
        "method": result.method.as_str(),
        "r_hat": result.r_hat,
        "axes_evaluated": result.axes_evaluated,
        "stop_reason": result.stopping_reason.as_str(),
        "best_axis": best.axis_index,
        "threshold": best.best_threshold,
        "orientation": best.orientation,
        "pilot_stats": result.pilot_stats,
    });
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
    }
    match args.format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&json)?),
        OutputFormat::Text => {
            println!("method = {}", result.method);
            println!("r_hat = {:.6}", result.r_hat);
            println!("axes_evaluated = {}", result.axes_evaluated);
            println!("stop_reason = {}", result.stopping_reason);
            println!("best_axis = {} (threshold {}, {:?})", best.axis_index, best.best_threshold, best.orientation);
        }
    }
    Ok(())
}

fn coverage(args: Coverage) -> Result<()> {
    let required = sample_size(args.p, args.delta)?;
    let t = args.t.unwrap_or(required).min(args.d);
    let query = CoverageQuery { d: args.d, p: args.p, t, eta: args.eta.unwrap_or(0.0), delta: args.delta };
    let exact = coverage_probability_exact(&query)?;
    let bound = coverage_probability_bound(&query);
    println!("d = {}, p = {}, t = {}, delta = {}", args.d, args.p, t, args.delta);
    if let Some(eta) = args.eta {
        println!("eta = {eta}");
    }
    println!("good axes = {}", query.good_axes());
    println!("exact coverage = {exact:.6}");
    println!("bernoulli bound = {bound:.6}");
    println!("required t = {required}");
    Ok(())
}

fn svm(args: Svm) -> Result<()> {
    let train = load_dataset_csv(&args.data)?;
    let kernel = match args.kernel {
        KernelArg::Linear => Kernel::Linear,
        KernelArg::Rbf => Kernel::Rbf { gamma: args.gamma.unwrap_or_else(|| scale_gamma(train.inputs())) },
    };
    let params = SvmParams { c: args.c, tol: args.tol, max_iter: args.max_iter };
    let model = svm_train(train.inputs(), train.labels(), kernel, &params)?;
    println!("training accuracy = {:.6}", model.training_accuracy);
    println!("support vectors = {}", model.support_indices.len());
    println!("converged = {} after {} sweeps", model.diagnostics.converged, model.diagnostics.sweeps);
    if let Some(path) = &args.test {
        let test = load_dataset_csv(path)?;
        let pred = svm_predict(&model, test.inputs())?;
        println!("test accuracy = {:.6}", accuracy(&pred, test.labels()));
    }
    if let Some(path) = &args.out {
        std::fs::write(path, model.to_json()?)?;
    }
    Ok(())
}

fn experiment(args: Experiment) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if !args.method.is_empty() {
        config.methods = args.method.iter().map(|&m| m.into()).collect();
    }
    if !args.p.is_empty() {
        config.p_values = args.p.clone();
    }
    if let Some(v) = args.delta {
        config.delta = v;
    }
    if let Some(v) = args.n_pilot {
        config.n_pilot = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.patience {
        config.patience = v;
    }
    if let Some(v) = args.budget_fraction {
        config.budget_fraction = v;
    }
    if let Some(v) = args.qubits {
        config.qubits = v;
    }
    if let Some(v) = args.repetitions {
        config.repetitions = v;
    }
    if let Some(v) = args.out {
        config.output_dir = v;
    }
    config.validate()?;
    let report = run_experiment(&config)?;
    let format = match args.format {
        ReportFormatArg::Csv => ReportFormat::Csv,
        ReportFormatArg::Json => ReportFormat::Json,
    };
    for path in emit_report(&report, format, &config.output_dir)? {
        println!("wrote {}", path.display());
    }
    for d in &report.datasets {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{}: R_min = {}, svm linear = {}, svm rbf = {}, svm linear (features) = {}",
            d.dataset,
            fmt(d.r_min),
            fmt(d.svm_linear_raw),
            fmt(d.svm_rbf_raw),
            fmt(d.svm_linear_features)
        );
        if let Some(e) = &d.error {
            println!("  error: {e}");
        }
    }
    let problems = report.audit();
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("audit: {p}");
        }
        return Err(Error::InvalidParameter(format!("{} rows failed the audit", problems.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Embed(a) => embed(a),
        Command::Minacc(a) => minacc(a),
        Command::Coverage(a) => coverage(a),
        Command::Svm(a) => svm(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
