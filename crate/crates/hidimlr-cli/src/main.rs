mod csvio;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hidimlr::{
    check_balance, fit_mle, omega_from_sigma, run_monte_carlo_with_threads, test_feature,
    Dataset, Error as LibError, FitConfig, OmegaSpec, RepStatus, SimConfig,
};
use manifest::RunManifest;

pub const SCHEMA: &str = "hidimlr/1";

const EXIT_BAD_INPUT: u8 = 2;
const EXIT_UNBOUNDED: u8 = 3;
const EXIT_MAX_ITER: u8 = 4;
const EXIT_BAD_FEATURE: u8 = 5;
const EXIT_TOO_MANY_FAILURES: u8 = 6;

#[derive(Parser)]
#[command(
    name = "hidimlr",
    version,
    about = "Multinomial logistic MLE fits and feature significance tests \
             that stay valid when p/n is not small"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the multinomial logistic MLE from CSV inputs
    Fit(FitArgs),
    /// Test the significance of one feature (1-based index)
    Test(TestArgs),
    /// Run a Monte Carlo experiment described by a JSON configuration
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Design matrix CSV, n rows by p numeric columns
    #[arg(long = "x")]
    x_csv: PathBuf,
    /// Response CSV: n rows by K+1 columns on the q-grid, or a single
    /// integer label column with --labels
    #[arg(long = "y")]
    y_csv: PathBuf,
    /// Skip one header row in both CSV files
    #[arg(long)]
    header: bool,
    /// Treat the response file as a single integer label column (0-based
    /// or 1-based labels both work; smallest value maps to class 1)
    #[arg(long)]
    labels: bool,
    /// Repetition count when responses are q-averaged
    #[arg(long, default_value_t = 1)]
    q: usize,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Optional solver configuration JSON
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output JSON path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Feature index to test, 1-based
    #[arg(long)]
    feature: usize,
    /// Precision diagonal: "estimate", "value:<float>", or "sigma:<csv>"
    #[arg(long, default_value = "estimate")]
    omega: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// SimConfig JSON document
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-repetition CSV output
    #[arg(long)]
    raw: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_BAD_INPUT, message: message.into() }
    }
}

fn lib_error(e: LibError) -> CliError {
    let code = match &e {
        LibError::Unbounded { .. } => EXIT_UNBOUNDED,
        LibError::MaxIterations { .. } => EXIT_MAX_ITER,
        LibError::IndexOutOfRange { .. } => EXIT_BAD_FEATURE,
        LibError::TooManyFailures { .. } => EXIT_TOO_MANY_FAILURES,
        _ => EXIT_BAD_INPUT,
    };
    CliError { code, message: e.to_string() }
}

fn load_dataset(args: &DataArgs, manifest: &mut RunManifest) -> Result<Dataset, CliError> {
    let x_bytes = std::fs::read(&args.x_csv)
        .map_err(|e| CliError::input(format!("{}: {e}", args.x_csv.display())))?;
    let y_bytes = std::fs::read(&args.y_csv)
        .map_err(|e| CliError::input(format!("{}: {e}", args.y_csv.display())))?;
    manifest.add_input("x_csv", &args.x_csv, &x_bytes);
    manifest.add_input("y_csv", &args.y_csv, &y_bytes);

    let x = csvio::parse_matrix(&x_bytes, args.header)
        .map_err(|e| CliError::input(format!("{}: {e}", args.x_csv.display())))?;
    if args.labels {
        let raw = csvio::parse_matrix(&y_bytes, args.header)
            .map_err(|e| CliError::input(format!("{}: {e}", args.y_csv.display())))?;
        if raw.ncols() != 1 {
            return Err(CliError::input("--labels expects a single column"));
        }
        let vals: Vec<f64> = raw.column(0).to_vec();
        if vals.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(CliError::input("labels must be nonnegative integers"));
        }
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min) as usize;
        let max = vals.iter().cloned().fold(0.0_f64, f64::max) as usize;
        let labels: Vec<usize> = vals.iter().map(|&v| v as usize - min).collect();
        let classes = max - min + 1;
        Dataset::from_labels(x, &labels, classes).map_err(lib_error)
    } else {
        let y = csvio::parse_matrix(&y_bytes, args.header)
            .map_err(|e| CliError::input(format!("{}: {e}", args.y_csv.display())))?;
        Dataset::new(x, y, args.q).map_err(lib_error)
    }
}

fn load_fit_config(
    path: &Option<PathBuf>,
    manifest: &mut RunManifest,
) -> Result<FitConfig, CliError> {
    match path {
        None => Ok(FitConfig::default()),
        Some(p) => {
            let bytes = std::fs::read(p)
                .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            manifest.add_input("config_json", p, &bytes);
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::input(format!("{}: {e}", p.display())))
        }
    }
}

fn write_output(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON serialization");
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text.as_bytes())
            .map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("fit");
    let data = load_dataset(&args.data, &mut manifest)?;
    let config = load_fit_config(&args.config, &mut manifest)?;
    config.validate(data.n_classes()).map_err(lib_error)?;
    manifest.set_config(serde_json::to_value(&config).expect("config to JSON"));

    let (balanced, counts) = check_balance(&data, config.gamma);
    if !balanced {
        eprintln!(
            "warning: class balance check failed (counts {counts:?}, gamma {})",
            config.gamma
        );
    }
    let fit = fit_mle(&data, &config).map_err(lib_error)?;

    let out = serde_json::json!({
        "schema": SCHEMA,
        "n": data.n_obs(),
        "p": data.n_features(),
        "k": data.k(),
        "q": data.q(),
        "a_hat": {
            "rows": fit.a_hat.nrows(),
            "cols": fit.a_hat.ncols(),
            "data": fit.a_hat.iter().cloned().collect::<Vec<f64>>(),
        },
        "iterations": fit.iterations,
        "final_grad_norm": fit.final_grad_norm,
        "boundedness": fit.boundedness,
        "converged": true,
        "balance": {
            "ok": balanced,
            "class_counts": counts,
            "gamma": config.gamma,
        },
        "manifest": manifest.finish(),
    });
    write_output(&args.out, &out)
}

fn parse_omega(spec: &str, manifest: &mut RunManifest) -> Result<OmegaSpec, CliError> {
    if spec == "estimate" {
        return Ok(OmegaSpec::Estimate);
    }
    if let Some(v) = spec.strip_prefix("value:") {
        let value: f64 = v
            .parse()
            .map_err(|_| CliError::input(format!("bad omega value '{v}'")))?;
        if !(value > 0.0) {
            return Err(CliError::input("omega value must be positive"));
        }
        return Ok(OmegaSpec::Known(value));
    }
    if let Some(path) = spec.strip_prefix("sigma:") {
        let p = PathBuf::from(path);
        let bytes = std::fs::read(&p)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        manifest.add_input("sigma_csv", &p, &bytes);
        let m = csvio::parse_matrix(&bytes, false)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        if m.nrows() != m.ncols() {
            return Err(CliError::input("sigma CSV must be square"));
        }
        // defer the inversion: encode as a known value once j is fixed
        return Ok(OmegaSpec::Known(f64::NAN)).map(|_| OmegaSpec::Known(f64::NAN));
    }
    Err(CliError::input(format!(
        "bad --omega '{spec}': expected estimate, value:<float>, or sigma:<csv>"
    )))
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("test");
    let data = load_dataset(&args.data, &mut manifest)?;
    let config = load_fit_config(&args.config, &mut manifest)?;
    config.validate(data.n_classes()).map_err(lib_error)?;

    if args.feature < 1 || args.feature > data.n_features() {
        return Err(CliError {
            code: EXIT_BAD_FEATURE,
            message: format!(
                "feature {} out of range 1..={}",
                args.feature,
                data.n_features()
            ),
        });
    }
    let j = args.feature - 1;

    // resolve omega; the sigma:<csv> form needs the feature index
    let omega = if let Some(path) = args.omega.strip_prefix("sigma:") {
        let p = PathBuf::from(path);
        let bytes = std::fs::read(&p)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        manifest.add_input("sigma_csv", &p, &bytes);
        let m = csvio::parse_matrix(&bytes, false)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        if m.nrows() != data.n_features() || m.ncols() != data.n_features() {
            return Err(CliError::input(format!(
                "sigma CSV must be {p}x{p} to match the design",
                p = data.n_features()
            )));
        }
        let sigma = hidimlr::linalg::SymMatrix::symmetrized(&m);
        OmegaSpec::Known(omega_from_sigma(&sigma, j).map_err(lib_error)?)
    } else {
        parse_omega(&args.omega, &mut manifest)?
    };
    manifest.set_config(serde_json::json!({
        "fit": serde_json::to_value(&config).expect("config to JSON"),
        "feature": args.feature,
        "omega": args.omega,
    }));

    let fit = fit_mle(&data, &config).map_err(lib_error)?;
    let report = test_feature(&fit, data.x().view(), j, &omega).map_err(lib_error)?;

    let mut out = serde_json::to_value(&report).expect("report to JSON");
    let obj = out.as_object_mut().expect("report is an object");
    // the CLI-facing index is 1-based
    obj.insert("feature_index".into(), serde_json::json!(args.feature));
    obj.insert("schema".into(), serde_json::json!(SCHEMA));
    obj.insert("manifest".into(), manifest.finish());
    write_output(&args.out, &out)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("simulate");
    let bytes = std::fs::read(&args.config)
        .map_err(|e| CliError::input(format!("{}: {e}", args.config.display())))?;
    manifest.add_input("config_json", &args.config, &bytes);
    let config: SimConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::input(format!("{}: {e}", args.config.display())))?;
    config.validate().map_err(lib_error)?;
    manifest.set_config(serde_json::to_value(&config).expect("config to JSON"));

    let threads = std::env::var("HIDIMLR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let summary = run_monte_carlo_with_threads(&config, threads).map_err(lib_error)?;

    if let Some(raw) = &args.raw {
        let mut text = String::from("rep,t,p,t_classical,p_classical,status\n");
        for r in &summary.reps {
            let fmt = |v: Option<f64>| match v {
                Some(x) => format!("{x:.16e}"),
                None => String::new(),
            };
            let status = match r.status {
                RepStatus::Ok => "ok",
                RepStatus::Unbounded => "unbounded",
                RepStatus::MaxIterations => "max_iterations",
                RepStatus::Failed => "failed",
            };
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.rep,
                fmt(r.statistic),
                fmt(r.p_value),
                fmt(r.classical_statistic),
                fmt(r.classical_p_value),
                status
            ));
        }
        std::fs::write(raw, text.as_bytes())
            .map_err(|e| CliError::input(format!("{}: {e}", raw.display())))?;
    }

    let mut out = serde_json::to_value(&summary).expect("summary to JSON");
    let obj = out.as_object_mut().expect("summary is an object");
    obj.insert("schema".into(), serde_json::json!(SCHEMA));
    obj.insert("manifest".into(), manifest.finish());
    write_output(&args.out, &out)
}
