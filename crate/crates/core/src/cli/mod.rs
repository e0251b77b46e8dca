//! Command-line interface: `estimate`, `tune`, `simulate` and `toy`.
//!
//! Reports are JSON (or CSV for Monte Carlo tables) on stdout. Failures exit
//! nonzero and print `{"error": {"code", "message"}}` on stderr.

mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use input::{load_dataset, read_dataset, write_dataset, CsvSchema};

use crate::baselines::{sss_value, subbagging_value, SubbaggingConfig};
use crate::data::{validate_dataset, Dataset};
use crate::error::{Error, Result};
use crate::estimator::{
    plug_in_value, repeat_plan_seed, repeated_cross_fit, CrossFits, Estimate, TuningConfig, DEFAULT_CLAMP,
    REAL_DATA_C, SIMULATION_C,
};
use crate::folds::make_fold_plan;
use crate::nuisance::{Family, NuisanceConfig, DEFAULT_SPLINE_DF};
use crate::sim::{run_monte_carlo, McConfig, McReport, MethodSpec, ScenarioId, ScenarioSpec, REPORT_SCHEMA_VERSION};

/// Distinct values above which `--family auto` treats the last covariate as continuous.
const AUTO_SPLINE_LEVELS: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "adaptive-otr", version, about = "Confidence intervals for the value of an optimal treatment regime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the optimal value from a CSV file.
    Estimate(EstimateArgs),
    /// Report the estimated approximation error and bandwidth of each half.
    Tune(TuneArgs),
    /// Monte Carlo coverage study on a simulated scenario.
    Simulate(SimulateArgs),
    /// In-sample plug-in versus adaptive estimator on the two-group example.
    Toy(ToyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyArg {
    Auto,
    Frequency,
    Spline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Comparison {
    Sss,
    Subbagging,
    Plugin,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated covariate columns.
    #[arg(long = "x-cols", value_delimiter = ',', required = true)]
    x_cols: Vec<String>,
    #[arg(long = "a-col")]
    a_col: String,
    #[arg(long = "y-col")]
    y_col: String,
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// The file has no header; columns are zero-based positions.
    #[arg(long)]
    no_header: bool,
    /// Treatment labels as `control,treated`, accepted besides 0/1.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    labels: Option<Vec<String>>,
}

impl DataArgs {
    fn schema(&self) -> Result<CsvSchema> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config("delimiter must be a single ASCII character".into()));
        }
        let mut s = CsvSchema::new(self.x_cols.clone(), self.a_col.clone(), self.y_col.clone());
        s.delimiter = self.delimiter as u8;
        s.header = !self.no_header;
        s.treatment_labels = self.labels.as_ref().map(|l| (l[0].clone(), l[1].clone()));
        Ok(s)
    }

    fn load(&self) -> Result<Dataset> {
        let ds = load_dataset(&self.data, &self.schema()?)?;
        let report = validate_dataset(&ds);
        if !report.is_clean() {
            return Err(Error::InvalidData(report.to_string()));
        }
        Ok(ds)
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "auto")]
    family: FamilyArg,
    #[arg(long = "spline-df", default_value_t = DEFAULT_SPLINE_DF)]
    spline_df: usize,
    /// Interact the spline basis with the first covariate.
    #[arg(long)]
    interaction: bool,
    /// Keep the first covariate as a main effect only in the propensity model.
    #[arg(long)]
    main_effect_propensity: bool,
    /// Propensity truncation bounds `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.05, 0.95])]
    truncation: Vec<f64>,
    /// Clamp `c` on the adaptive t0: `[c, 1 - c]`.
    #[arg(long, default_value_t = DEFAULT_CLAMP)]
    clamp: f64,
}

impl ModelArgs {
    fn config(&self, ds: Option<&Dataset>) -> Result<NuisanceConfig> {
        let family = match self.family {
            FamilyArg::Frequency => Family::Frequency,
            FamilyArg::Spline => Family::Spline,
            FamilyArg::Auto => match ds {
                Some(ds) if distinct_levels(ds, ds.dim() - 1) > AUTO_SPLINE_LEVELS => Family::Spline,
                _ => Family::Frequency,
            },
        };
        let cfg = NuisanceConfig {
            family,
            spline_df: self.spline_df,
            truncation: (self.truncation[0], self.truncation[1]),
            interaction_with_first_covariate: self.interaction,
            propensity_interaction: self.interaction && !self.main_effect_propensity,
            spline_covariate: None,
        };
        cfg.validate()?;
        if !(self.clamp > 0.0 && self.clamp < 0.5) {
            return Err(Error::Config(format!("clamp {} outside (0, 0.5)", self.clamp)));
        }
        Ok(cfg)
    }
}

fn distinct_levels(ds: &Dataset, col: usize) -> usize {
    let mut v: Vec<u64> = ds.iter().map(|o| o.x[col].to_bits()).collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "C", default_value_t = REAL_DATA_C)]
    c: f64,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Additional comparison estimators.
    #[arg(long, value_enum, value_delimiter = ',')]
    method: Vec<Comparison>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "C", default_value_t = REAL_DATA_C)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value = "adaptive")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "C", default_value_t = SIMULATION_C)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    jobs: Option<usize>,
    /// Replace the propensity with the constant 0.5.
    #[arg(long)]
    balanced: bool,
    /// Working models; defaults to the scenario's own family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long = "spline-df", default_value_t = DEFAULT_SPLINE_DF)]
    spline_df: usize,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.05, 0.95])]
    truncation: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_CLAMP)]
    clamp: f64,
    /// Number of subsamples for subbagging.
    #[arg(long = "subbagging-b", default_value_t = 200)]
    subbagging_b: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ToyArgs {
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// One estimator's row in an `estimate` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub method: String,
    pub estimate: f64,
    pub sigma: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_length: f64,
}

impl EstimateRow {
    fn new(e: &Estimate, alpha: f64) -> Result<Self> {
        let (lo, hi) = e.ci(alpha)?;
        Ok(Self {
            method: e.method.label().to_string(),
            estimate: e.value,
            sigma: e.sigma,
            n: e.n,
            ci_low: lo,
            ci_high: hi,
            ci_length: hi - lo,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub data: String,
    pub x_cols: Vec<String>,
    pub a_col: String,
    pub y_col: String,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub repeats: usize,
    pub nuisance: NuisanceConfig,
    pub clamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub method: String,
    pub estimate: f64,
    pub sigma: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_length: f64,
    pub seed: u64,
    pub config: ConfigEcho,
    pub comparisons: Vec<EstimateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub schema_version: u32,
    pub n: usize,
    pub seed: u64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `None` when a quarter cannot support a contrast fit; the floor is used.
    pub eae_1: Option<f64>,
    pub eae_2: Option<f64>,
    pub h_1: f64,
    pub h_2: f64,
    pub floor: f64,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    schema_version: u32,
    error: ErrorBody<'a>,
}

fn emit(text: &str, output: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))
}

fn cmd_estimate(args: &EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let ds = args.data.load()?;
    let cfg = args.model.config(Some(&ds))?;
    let tc = TuningConfig::new(args.c)?;
    let main = repeated_cross_fit(&ds, args.repeats, args.seed, &tc, &cfg, args.model.clamp)?;
    let row = EstimateRow::new(&main, args.alpha)?;
    let seed0 = repeat_plan_seed(args.seed, 0);
    let comparisons = args
        .method
        .iter()
        .map(|m| {
            let e = match m {
                Comparison::Sss => sss_value(&ds, seed0, &cfg)?,
                Comparison::Subbagging => subbagging_value(&ds, &SubbaggingConfig::default(), seed0, &cfg)?,
                Comparison::Plugin => plug_in_value(&ds, &make_fold_plan(ds.n(), seed0)?, &cfg)?,
            };
            EstimateRow::new(&e, args.alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EstimateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        method: row.method,
        estimate: row.estimate,
        sigma: row.sigma,
        n: row.n,
        ci_low: row.ci_low,
        ci_high: row.ci_high,
        ci_length: row.ci_length,
        seed: args.seed,
        config: ConfigEcho {
            data: args.data.data.display().to_string(),
            x_cols: args.data.x_cols.clone(),
            a_col: args.data.a_col.clone(),
            y_col: args.data.y_col.clone(),
            alpha: args.alpha,
            c: args.c,
            repeats: args.repeats,
            nuisance: cfg,
            clamp: args.model.clamp,
        },
        comparisons,
    };
    emit(&json(&report)?, args.output.as_ref(), stdout)
}

/// EAE and bandwidths on the first fold plan of the repeated scheme.
pub fn tune_report(ds: &Dataset, seed: u64, tc: &TuningConfig, cfg: &NuisanceConfig) -> Result<TuneReport> {
    let plan = make_fold_plan(ds.n(), repeat_plan_seed(seed, 0))?;
    let fits = CrossFits::fit(ds, &plan, cfg)?;
    let h = fits.bandwidths(tc);
    Ok(TuneReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n: ds.n(),
        seed,
        c: tc.c,
        eae_1: fits.approx_error(0),
        eae_2: fits.approx_error(1),
        h_1: h[0],
        h_2: h[1],
        floor: tc.floor(ds.n()),
    })
}

fn cmd_tune(args: &TuneArgs, stdout: &mut dyn Write) -> Result<()> {
    let ds = args.data.load()?;
    let cfg = args.model.config(Some(&ds))?;
    let report = tune_report(&ds, args.seed, &TuningConfig::new(args.c)?, &cfg)?;
    emit(&json(&report)?, args.output.as_ref(), stdout)
}

fn write_report(report: &McReport, format: Format, output: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    emit(&text, output, stdout)
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let id: ScenarioId = args.scenario.parse()?;
    let mut spec = ScenarioSpec::get(id);
    if args.balanced {
        spec = spec.balanced();
    }
    let mut cfg = McConfig::new(args.n, args.reps, MethodSpec::parse_list(&args.methods)?, args.seed);
    cfg.alpha = args.alpha;
    cfg.tuning = TuningConfig::new(args.c)?;
    cfg.repeats = args.repeats;
    cfg.jobs = args.jobs;
    cfg.clamp = args.clamp;
    cfg.subbagging.b = args.subbagging_b;
    let mut nuisance = match args.family {
        None | Some(FamilyArg::Auto) => spec.nuisance_config(),
        Some(FamilyArg::Frequency) => NuisanceConfig::frequency(),
        Some(FamilyArg::Spline) => NuisanceConfig { propensity_interaction: false, ..NuisanceConfig::spline(true) },
    };
    nuisance.spline_df = args.spline_df;
    nuisance.truncation = (args.truncation[0], args.truncation[1]);
    cfg.nuisance = Some(nuisance);
    let report = run_monte_carlo(&spec, &cfg)?;
    write_report(&report, args.format, args.output.as_ref(), stdout)
}

fn cmd_toy(args: &ToyArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut cfg = McConfig::new(args.n, args.reps, vec![MethodSpec::InsamplePlugin, MethodSpec::Adaptive], args.seed);
    cfg.jobs = args.jobs;
    let report = run_monte_carlo(&ScenarioSpec::get(ScenarioId::Toy), &cfg)?;
    write_report(&report, args.format, args.output.as_ref(), stdout)
}

fn error_json(code: &str, message: String) -> String {
    let body = ErrorReport { schema_version: REPORT_SCHEMA_VERSION, error: ErrorBody { code, message } };
    serde_json::to_string(&body).expect("error report serializes")
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 on a
/// failed command, 2 on a usage error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = writeln!(stderr, "{}", error_json("usage", e.to_string()));
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, stdout),
        Command::Tune(a) => cmd_tune(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Toy(a) => cmd_toy(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(e.code(), e.to_string()));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("adaptive-otr").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_scenario_is_an_error_object() {
        let (code, out, err) = run_str(&["simulate", "--scenario", "Z", "--reps", "1"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        let v: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert_eq!(v["error"]["code"], "unknown_scenario");
    }

    #[test]
    fn unknown_method_and_usage() {
        let (code, _, err) = run_str(&["simulate", "--scenario", "A", "--methods", "bogus", "--reps", "1"]);
        assert_eq!(code, 1);
        assert!(err.contains("unknown_method"));
        let (code, _, err) = run_str(&["estimate"]);
        assert_eq!(code, 2);
        assert!(err.contains("\"usage\""));
    }

    #[test]
    fn simulate_csv_has_one_row_per_method() {
        let (code, out, _) =
            run_str(&["simulate", "--scenario", "A", "--n", "200", "--reps", "2", "--methods", "adaptive,sss,plugin", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 4);
    }
}
