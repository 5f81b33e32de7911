use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use neural_fde::alloc::CountingAlloc;
use neural_fde::data::{load_csv, ColumnRef, Manifest, System, GEN_REFINE};
use neural_fde::harness::{
    emit_loss_plot, io_error, report_text, run_experiment, scaled_data, sci, synthetic_series, write_experiment,
    AlphaSetting, ConfigFile, HarnessError,
};
use neural_fde::neuralfde::{evaluate, predict, read_model, train, write_model, LossHistory};
use neural_fde::solvers::benchmark_solvers;

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

#[derive(Parser)]
#[command(name = "nfde", version, about = "Neural fractional differential equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset and its manifest.
    Generate(GenerateArgs),
    /// Train one model and write it with its loss history.
    Train(ConfigArgs),
    /// Solve a trained model over a time range.
    Predict(PredictArgs),
    /// Mean squared error of a trained model on a dataset file.
    Evaluate(EvaluateArgs),
    /// Multi-run experiment producing a report row, models and loss curves.
    Experiment(ConfigArgs),
    /// Time the fractional and integer-order solvers.
    Benchmark(BenchArgs),
    /// Draw loss histories as an SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    system: String,
    /// Order of the generating equation.
    #[arg(long, default_value_t = 0.99)]
    data_alpha: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 200.0)]
    horizon: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML file with the same keys as the flags (underscored).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    /// Fixed order, or `learn`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    alpha_mode: Option<String>,
    #[arg(long)]
    alpha_init: Option<f64>,
    #[arg(long)]
    data_alpha: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// CSV file with a header row.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    time_column: Option<String>,
    #[arg(long)]
    value_column: Option<String>,
    #[arg(long)]
    split: Option<String>,
    /// `nfde` or `node`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated hidden layer widths.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ConfigFile, HarnessError> {
        let base = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            max_iters: self.iters,
            lr: self.lr,
            seed: self.seed,
            solver_dt: self.dt,
            alpha_mode: self.alpha_mode.clone(),
            alpha: self.alpha.as_deref().map(AlphaSetting::parse),
            alpha_init: self.alpha_init,
            runs: self.runs,
            hidden: self.hidden.clone(),
            system: self.system.clone(),
            data_alpha: self.data_alpha,
            points: self.points,
            horizon: self.horizon,
            dataset: self.dataset.clone(),
            time_column: self.time_column.clone(),
            value_column: self.value_column.clone(),
            split: self.split.clone(),
            model: self.model.clone(),
            normalize: self.no_normalize.then_some(false),
            jobs: self.jobs,
            out: self.out.clone(),
            ..ConfigFile::default()
        };
        Ok(base.overlay(flags))
    }
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model_file: PathBuf,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    tf: f64,
    #[arg(long)]
    dt: Option<f64>,
    /// Trajectory CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model_file: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "0")]
    time_column: String,
    #[arg(long, default_value = "1")]
    value_column: String,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "200,400,800")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    fs::write(path, bytes).map_err(io_error(path))
}

fn generate(args: GenerateArgs) -> Result<(), HarnessError> {
    let system = System::parse(&args.system)
        .ok_or_else(|| HarnessError::Usage(format!("unknown system `{}`", args.system)))?;
    if args.points < 2 || !(args.horizon > 0.0) {
        return Err(HarnessError::Usage("need at least 2 points and a positive horizon".into()));
    }
    let dt = args.horizon / (args.points - 1) as f64;
    let series = synthetic_series(system, args.data_alpha, dt, args.points)?;
    let stem = format!("{}_alpha{}", system.as_str(), args.data_alpha);
    let mut csv = Vec::new();
    series.write_csv(&mut csv).expect("writing to memory");
    write_out(&args.out.join(format!("{stem}.csv")), &csv)?;
    let manifest = Manifest {
        system,
        alpha: args.data_alpha,
        t0: 0.0,
        dt,
        points: args.points,
        refine: GEN_REFINE,
        x0: series.value(0)[0],
        pg: (system == System::Pg).then(Default::default),
        seed: 0,
    };
    write_out(&args.out.join(format!("{stem}.manifest.toml")), manifest.to_toml().as_bytes())?;
    println!("wrote {} points to {}", series.len(), args.out.join(format!("{stem}.csv")).display());
    Ok(())
}

fn train_cmd(args: ConfigArgs) -> Result<(), HarnessError> {
    let cfg = args.resolve()?;
    let spec = cfg.experiment_spec()?;
    let (train_set, _, norm) = scaled_data(&spec)?;
    let (mut model, history) = train(&train_set, &spec.train_config())?;
    model.norm = norm;
    let out = cfg.out.unwrap_or_else(|| PathBuf::from("."));
    write_out(&out.join("model.txt"), write_model(&model).as_bytes())?;
    let mut buf = Vec::new();
    history.write_csv(&mut buf, true).expect("writing to memory");
    write_out(&out.join("loss.csv"), &buf)?;
    print!("final training loss {:E}", history.final_loss);
    match model.alpha() {
        Some(a) => println!(", alpha {a}"),
        None => println!(),
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<neural_fde::neuralfde::TrainedModel, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    read_model(&text).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
}

fn predict_cmd(args: PredictArgs) -> Result<(), HarnessError> {
    let model = load_model(&args.model_file)?;
    let t0 = args.t0.unwrap_or(model.t0);
    let traj = predict(&model, t0, args.tf, args.dt.unwrap_or(model.solver_dt))?;
    let values = match &model.norm {
        Some(norm) => traj.map_states(|d, v| norm.unscale(d, v)),
        None => traj,
    };
    let mut buf = Vec::new();
    values.write_csv(&mut buf).expect("writing to memory");
    match args.out {
        Some(p) => write_out(&p, &buf),
        None => std::io::stdout().write_all(&buf).map_err(io_error(Path::new("<stdout>"))),
    }
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<(), HarnessError> {
    let model = load_model(&args.model_file)?;
    let (series, report) =
        load_csv(&args.dataset, &ColumnRef::parse(&args.time_column), &ColumnRef::parse(&args.value_column))?;
    if report.skipped > 0 {
        eprintln!("skipped {} unparseable rows", report.skipped);
    }
    let series = match &model.norm {
        Some(stats) => stats.apply(&series)?,
        None => series,
    };
    let mse = evaluate(&model, &series, args.dt.unwrap_or(model.solver_dt))?;
    println!("{}", sci(mse));
    Ok(())
}

fn experiment_cmd(args: ConfigArgs) -> Result<(), HarnessError> {
    let cfg = args.resolve()?;
    let spec = cfg.experiment_spec()?;
    let result = run_experiment(&spec)?;
    for (run, err) in result.failures() {
        eprintln!("warning: run {} failed: {err}", run + 1);
    }
    let out = cfg.out.unwrap_or_else(|| PathBuf::from("."));
    write_experiment(&result, &out)?;
    print!("{}", report_text(std::slice::from_ref(&result)));
    Ok(())
}

fn benchmark_cmd(args: BenchArgs) -> Result<(), HarnessError> {
    let mut sizes = args.sizes.clone();
    sizes.sort_unstable();
    let rows = benchmark_solvers(&sizes, args.repeats)?;
    let mut csv = String::from("solver,n_steps,mean_s,std_s,storage_bytes,peak_alloc_bytes\n");
    println!("{:<14} {:>8} {:>12} {:>12} {:>14} {:>14}", "solver", "steps", "mean (s)", "std (s)", "storage (B)", "peak (B)");
    for r in &rows {
        let peak = r.peak_alloc_bytes.map(|p| p.to_string()).unwrap_or_default();
        println!(
            "{:<14} {:>8} {:>12.3E} {:>12.3E} {:>14} {:>14}",
            r.solver.as_str(),
            r.n_steps,
            r.mean_s,
            r.std_s,
            r.storage_bytes,
            peak
        );
        csv.push_str(&format!(
            "{},{},{:E},{:E},{},{}\n",
            r.solver.as_str(),
            r.n_steps,
            r.mean_s,
            r.std_s,
            r.storage_bytes,
            peak
        ));
    }
    if let Some(p) = args.out {
        write_out(&p, csv.as_bytes())?;
    }
    Ok(())
}

fn plot_cmd(args: PlotArgs) -> Result<(), HarnessError> {
    let mut curves = Vec::new();
    for path in &args.inputs {
        let file = fs::File::open(path).map_err(io_error(path))?;
        let h = LossHistory::read_csv(file).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        curves.push((label, h));
    }
    emit_loss_plot(&curves, &args.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
        Command::Benchmark(a) => benchmark_cmd(a),
        Command::Plot(a) => plot_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
