//! The `retrofit` command line. Exit codes: 0 success, 1 usage error,
//! 2 data error.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::api::{self, ApiConfig, AppState};
use crate::estimate::{estimate, EstimateRequest, McRequest};
use crate::ingest::{
    parse_epc_csv, read_canonical_csv, write_canonical_csv, BoroughRegistry, ColumnMap, DwellingRecord, HouseRatios,
    ParseOptions,
};
use crate::model::{coefficient_table, coefficient_table_csv, fit_model, Basis, BareHomeModel, FitOptions};
use crate::portfolio::{read_counts, run_portfolio, E0Source, PortfolioConfig, PortfolioRun};
use crate::retrofit::{parse_projects, ParamProfile, Project};
use crate::uncertainty::{
    mc_table_csv, mc_table_text, projects_report, scenario_text, BareHouse, PriorSet, PropagateOptions, Scenario,
    ScenarioReport, Setup, Symbol,
};

const ESTIMATE_DEFAULTS: &str = "\
Bare-house preset: semi-detached 1930-1949 house, 109 m², gas, no retrofit in place,
E0 = 29530 ± 28 kWh/yr, annual CO2 = 5906 ± 6 kg/yr.

Monte-Carlo priors (normal, costs/tariffs/U-values truncated at 0):
  external temperature     12 ± 2 °C        internal setpoint   20.13 °C (fixed)
  gas tariff               0.08 ± 0.01 £/kWh electricity tariff  0.3 ± 0.01 £/kWh
  loft material            1.5 ± 0.5 £/(m²·cm)  loft install    15 ± 5 £/m²
  window day rate          120 ± 20 £/day   window material     500 ± 100 £/m²
  U single                 5.7 ± 0.7 W/(m²K) U double           2.7 ± 0.7 W/(m²K)
  heat pump cost           11000 ± 2000 £   LED bulb            7 ± 2 £

Scenario presets: A = windows + loft (15 cm), B = A + LED lighting,
C = A + heat pump, D = all four.";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "retrofit", version, about = "Bare-home baselines and retrofit savings for dwellings and housing stocks")]
pub struct Cli {
    /// TOML file with defaults for any subcommand; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and clean an EPC-style CSV into canonical records.
    Ingest(IngestArgs),
    /// Fit the bare-home regression and write the model artifact.
    Fit(FitArgs),
    /// Savings, cost and ROI for one dwelling.
    #[command(after_help = ESTIMATE_DEFAULTS)]
    Estimate(EstimateArgs),
    /// Evaluate a whole stock, aggregate by borough and total it.
    Portfolio(PortfolioArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub input: PathBuf,
    /// Column map (TOML or JSON). Defaults to the EPC bulk-download headers.
    #[arg(long)]
    pub column_map: Option<PathBuf>,
    /// Input is already in canonical layout.
    #[arg(long, conflicts_with = "column_map")]
    pub canonical: bool,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Canonical CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON ingest report [default: <out>.report.json].
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Canonical records CSV.
    pub records: PathBuf,
    /// Volume basis: ideal or vdw [default: ideal].
    #[arg(long)]
    pub basis: Option<String>,
    /// Cross-validation folds; 0 skips CV [default: 10].
    #[arg(long)]
    pub cv_k: Option<usize>,
    /// Fold shuffle seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// `bare-house`, or a JSON estimate request file [default: bare-house].
    #[arg(long)]
    pub profile: Option<String>,
    /// Named scenario A-D (bare house only); overrides --projects.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Comma-separated: loft, windows, led, hp.
    #[arg(long)]
    pub projects: Option<String>,
    /// Monte-Carlo draws; 0 gives the central estimate only [default: 0].
    #[arg(long)]
    pub mc: Option<usize>,
    /// Monte-Carlo seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parameter profile TOML [default: built-in central values].
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Model artifact, for request files without an explicit baseline.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Floor for per-draw money savings (off by default).
    #[arg(long, allow_negative_numbers = true)]
    pub money_floor: Option<f64>,
    /// Write the machine-readable report here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PortfolioArgs {
    /// Canonical records CSV.
    pub records: PathBuf,
    /// Model artifact.
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// predicted or measured [default: predicted].
    #[arg(long)]
    pub e0_source: Option<String>,
    /// `borough,dwellings` CSV [default: the sample counts].
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// `borough,house_ratio` CSV [default: shipped London ratios].
    #[arg(long)]
    pub ratios: Option<PathBuf>,
    /// Parameter profile TOML.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub model: PathBuf,
    /// Directory written by `retrofit portfolio`.
    #[arg(long)]
    pub portfolio: Option<PathBuf>,
    /// [default: 127.0.0.1:8080]
    #[arg(long)]
    pub addr: Option<SocketAddr>,
    /// Allowed CORS origin; repeatable, `*` for any.
    #[arg(long)]
    pub cors: Vec<String>,
}

/// Defaults read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub fit: FitConfig,
    pub estimate: EstimateConfig,
    pub portfolio: PortfolioFileConfig,
    pub serve: ServeConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub basis: Option<String>,
    pub cv_k: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    pub profile: Option<String>,
    pub projects: Option<String>,
    pub mc: Option<usize>,
    pub params: Option<PathBuf>,
    pub money_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortfolioFileConfig {
    pub e0_source: Option<E0Source>,
    pub params: Option<PathBuf>,
    pub n_bulbs: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServeConfig {
    pub addr: Option<SocketAddr>,
    pub cors: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(data(path.display()))
}

fn write(path: &Path, body: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(data(dir.display()))?;
    }
    fs::write(path, body).map_err(data(path.display()))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn load_config(path: Option<&Path>) -> Result<CliConfig, CliError> {
    match path {
        None => Ok(CliConfig::default()),
        Some(p) => toml::from_str(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
    }
}

fn load_profile(path: Option<&Path>) -> Result<ParamProfile, CliError> {
    match path {
        None => Ok(ParamProfile::default()),
        Some(p) => ParamProfile::from_toml(&read(p)?).map_err(data(p.display())),
    }
}

fn load_records(path: &Path) -> Result<Vec<DwellingRecord>, CliError> {
    let f = fs::File::open(path).map_err(data(path.display()))?;
    let (records, report) = read_canonical_csv(f, &BoroughRegistry::london()).map_err(data(path.display()))?;
    if !report.rejections.is_empty() {
        log::warn!("{}: {} rows rejected", path.display(), report.rejections.len());
    }
    Ok(records)
}

fn load_model(path: &Path) -> Result<BareHomeModel, CliError> {
    BareHomeModel::load(path).map_err(data(path.display()))
}

/// Parses `args` and runs; returns the exit code. Output goes to `out`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(std::io::stderr(), "{e}") } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(std::env::args_os(), &mut lock)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a, &cfg, out),
        Command::Fit(a) => cmd_fit(a, &cfg, out),
        Command::Estimate(a) => cmd_estimate(a, &cfg, out),
        Command::Portfolio(a) => cmd_portfolio(a, &cfg, out),
        Command::Serve(a) => cmd_serve(a, &cfg),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(data("stdout"))
}

pub fn cmd_ingest(a: IngestArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let map = if a.canonical {
        ColumnMap::canonical()
    } else {
        match &a.column_map {
            Some(p) => ColumnMap::from_str_any(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
            None => ColumnMap::epc(),
        }
    };
    if !a.delimiter.is_ascii() {
        return Err(CliError::Usage(format!("delimiter must be a single ASCII character, got {:?}", a.delimiter)));
    }
    let f = fs::File::open(&a.input).map_err(data(a.input.display()))?;
    let (records, report) = parse_epc_csv(f, &map, &BoroughRegistry::london(), ParseOptions { delimiter: a.delimiter as u8 })
        .map_err(data(a.input.display()))?;
    let mut buf = Vec::new();
    write_canonical_csv(&records, &mut buf).map_err(data(a.out.display()))?;
    write(&a.out, &buf)?;
    let report_path = a.report.unwrap_or_else(|| PathBuf::from(format!("{}.report.json", a.out.display())));
    write(&report_path, json(&report).as_bytes())?;
    match a.format.or(cfg.format).unwrap_or_default() {
        Format::Json => emit(out, &json(&report)),
        Format::Csv => {
            let mut s = String::from("reason,count\n");
            for (reason, n) in rejection_counts(&report.rejections) {
                s += &format!("{reason},{n}\n");
            }
            emit(out, &s)
        }
        Format::Text => {
            let mut s = format!("read {} rows, kept {}\n", report.rows_read, report.rows_kept);
            for (reason, n) in rejection_counts(&report.rejections) {
                s += &format!("  rejected ({reason}): {n}\n");
            }
            for (field, n) in &report.imputation_counts {
                s += &format!("  imputed {field}: {n}\n");
            }
            emit(out, &s)
        }
    }
}

fn rejection_counts(rs: &[crate::ingest::Rejection]) -> std::collections::BTreeMap<String, usize> {
    let mut m = std::collections::BTreeMap::new();
    for r in rs {
        *m.entry(r.rule.clone()).or_insert(0) += 1;
    }
    m
}

pub fn cmd_fit(a: FitArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let basis: Basis = a
        .basis
        .or(cfg.fit.basis.clone())
        .unwrap_or_else(|| "ideal".into())
        .parse()
        .map_err(|e| CliError::Usage(format!("--basis: {e}")))?;
    let k = a.cv_k.or(cfg.fit.cv_k).unwrap_or(10);
    let records = load_records(&a.records)?;
    let opts = FitOptions {
        basis,
        cv_k: (k > 0).then_some(k),
        seed: a.seed.or(cfg.seed).unwrap_or(0),
        source: a.records.file_name().map_or_else(|| "records".into(), |n| n.to_string_lossy().into_owned()),
        ..FitOptions::default()
    };
    let model = fit_model(&records, &opts).map_err(data("fit"))?;
    model.save(&a.out).map_err(data(a.out.display()))?;
    match a.format.or(cfg.format).unwrap_or_default() {
        Format::Json => emit(out, &model.to_json().map_err(data("model"))?),
        Format::Csv => emit(out, &coefficient_table_csv(&model.fit)),
        Format::Text => {
            let mut s = coefficient_table(&model.fit);
            if let Some(cv) = &model.cv {
                s += &format!("{}-fold CV RMSE: {:.2} (± {:.2}), seed {}\n", cv.k, cv.mean_rmse, cv.std_rmse, cv.seed);
            }
            s += &format!("model written to {}\n", a.out.display());
            emit(out, &s)
        }
    }
}

fn render_report(r: &ScenarioReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => match &r.mc {
            Some(mc) => mc_table_csv(mc),
            None => {
                let c = &r.central;
                let roi = c.roi_years.map_or_else(String::new, |v| v.to_string());
                format!("energy_kwh,carbon_kg,money_gbp,cost_gbp,roi_years\n{},{},{},{},{roi}\n", c.energy, c.carbon, c.money, c.cost)
            }
        },
        Format::Text => {
            let mut s = scenario_text(r);
            if let Some(mc) = &r.mc {
                s.push('\n');
                s += &mc_table_text(mc);
            }
            s
        }
    }
}

pub fn cmd_estimate(a: EstimateArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let format = a.format.or(cfg.format).unwrap_or_default();
    let n = a.mc.or(cfg.estimate.mc).unwrap_or(0);
    if n == 1 {
        return Err(CliError::Usage("--mc needs at least 2 draws (or 0 for central only)".into()));
    }
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let money_floor = a.money_floor.or(cfg.estimate.money_floor);
    let base = load_profile(a.params.as_deref().or(cfg.estimate.params.as_deref()))?;
    let profile = a.profile.or(cfg.estimate.profile.clone()).unwrap_or_else(|| "bare-house".into());

    let projects_flag = a.projects.or(cfg.estimate.projects.clone());
    let parse = |s: &str| parse_projects(s).map_err(|e| CliError::Usage(format!("--projects: {e}")));

    let report = if profile == "bare-house" || profile == "bare_house" {
        let (title, projects) = match &a.scenario {
            Some(s) => {
                let sc: Scenario = s.parse().map_err(|e| CliError::Usage(format!("--scenario: {e}")))?;
                (format!("Scenario {sc}: {}", sc.title()), sc.projects().to_vec())
            }
            None => {
                let projects = match &projects_flag {
                    Some(p) => parse(p)?,
                    None => Scenario::D.projects().to_vec(),
                };
                (titled(&projects), projects)
            }
        };
        let priors = PriorSet::default();
        let setup = Setup::new(&priors, base, BareHouse::default());
        projects_report(&title, &projects, &setup, &priors, n, seed, PropagateOptions { money_floor })
            .map_err(data("estimate"))?
    } else {
        if a.scenario.is_some() {
            return Err(CliError::Usage("--scenario applies to the bare-house profile only".into()));
        }
        let path = Path::new(&profile);
        let text = read(path)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut req: EstimateRequest = serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Data(format!("{}: {} at {}", path.display(), e.inner(), e.path())))?;
        if let Some(p) = &projects_flag {
            req.projects = parse(p)?;
        }
        if a.params.is_some() || cfg.estimate.params.is_some() {
            req.params = base;
        }
        if n >= 2 {
            req.mc = Some(McRequest { n, seed, money_floor });
        }
        let model = a.model.as_deref().map(load_model).transpose()?;
        let resp = estimate(&req, model.as_ref()).map_err(data("estimate"))?;
        if format == Format::Json {
            let body = json(&resp);
            if let Some(o) = &a.out {
                write(o, body.as_bytes())?;
            }
            return emit(out, &body);
        }
        let mut central = resp.composed.clone();
        central.warnings = resp.warnings.clone();
        ScenarioReport {
            title: titled(&req.projects),
            projects: req.projects.clone(),
            central,
            central_demand_reduction_pct: resp.demand_reduction_pct,
            central_co2_reduction_pct: resp.co2_reduction_pct,
            mc: resp.mc,
        }
    };
    if let Some(o) = &a.out {
        write(o, json(&report).as_bytes())?;
    }
    emit(out, &render_report(&report, format))
}

fn titled(projects: &[Project]) -> String {
    if projects.is_empty() {
        return "No projects".into();
    }
    projects.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" + ")
}

fn totals_text(run: &PortfolioRun) -> String {
    let mut s = format!("evaluated {} dwellings ({} skipped) in {} boroughs\n", run.n_evaluated, run.skipped.len(), run.aggregates.len());
    s += &format!("{:<24}{:>14}{:>18}{:>18}{:>16}{:>16}{:>10}\n", "project", "dwellings", "energy kWh/yr", "CO2 kg/yr", "GBP/yr", "cost GBP", "ROI yr");
    for t in &run.totals.projects {
        let roi = t.roi_years.map_or_else(|| "n/a".to_string(), |r| format!("{r:.2}"));
        s += &format!(
            "{:<24}{:>14.1}{:>18.0}{:>18.0}{:>16.0}{:>16.0}{:>10}\n",
            t.project.to_string(),
            t.dwellings,
            t.energy,
            t.carbon,
            t.money,
            t.cost,
            roi
        );
    }
    s
}

pub fn cmd_portfolio(a: PortfolioArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let e0_source = match a.e0_source.as_deref() {
        Some("predicted") => E0Source::Predicted,
        Some("measured") => E0Source::Measured,
        Some(other) => return Err(CliError::Usage(format!("--e0-source: expected predicted or measured, got {other:?}"))),
        None => cfg.portfolio.e0_source.unwrap_or_default(),
    };
    let profile = load_profile(a.params.as_deref().or(cfg.portfolio.params.as_deref()))?;
    let config = PortfolioConfig {
        e0_source,
        profile,
        n_bulbs: cfg.portfolio.n_bulbs.unwrap_or(PortfolioConfig::default().n_bulbs),
        ..PortfolioConfig::default()
    };
    let records = load_records(&a.records)?;
    let model = load_model(&a.model)?;
    let counts = match &a.counts {
        Some(p) => Some(read_counts(fs::File::open(p).map_err(data(p.display()))?).map_err(data(p.display()))?),
        None => None,
    };
    let ratios = match &a.ratios {
        Some(p) => HouseRatios::from_csv(fs::File::open(p).map_err(data(p.display()))?).map_err(data(p.display()))?,
        None => HouseRatios::london(),
    };
    let run = run_portfolio(&records, &model, &config, counts.as_ref(), &ratios).map_err(data("portfolio"))?;
    crate::portfolio::write_outputs(&a.out, &run.aggregates, &run.totals).map_err(data(a.out.display()))?;
    if !run.skipped.is_empty() {
        write(&a.out.join("portfolio_skipped.json"), json(&run.skipped).as_bytes())?;
    }
    match a.format.or(cfg.format).unwrap_or_default() {
        Format::Json => emit(out, &json(&run.totals)),
        Format::Csv => emit(out, &crate::portfolio::totals_csv(&run.totals).map_err(data("totals"))?),
        Format::Text => emit(out, &totals_text(&run)),
    }
}

pub fn cmd_serve(a: ServeArgs, cfg: &CliConfig) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    if let Some(d) = &a.portfolio {
        if !d.is_dir() {
            return Err(CliError::Data(format!("{}: not a directory", d.display())));
        }
    }
    let addr = a.addr.or(cfg.serve.addr).unwrap_or_else(|| SocketAddr::from(([127, 0, 0, 1], 8080)));
    let cors = if a.cors.is_empty() { cfg.serve.cors.clone() } else { a.cors };
    let state = AppState { model: Arc::new(model), portfolio_dir: a.portfolio };
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(data("runtime"))?;
    rt.block_on(api::serve(addr, state, ApiConfig { cors_origins: cors })).map_err(data(addr))
}

/// Renders each built-in prior as `mean ± std`, to keep the help text honest.
pub fn prior_defaults() -> Vec<(Symbol, String)> {
    let p = PriorSet::default();
    Symbol::ALL
        .into_iter()
        .map(|s| {
            let u = p.get(s).expect("default priors are complete");
            (s, if u.std > 0.0 { format!("{} ± {}", u.mean, u.std) } else { format!("{}", u.mean) })
        })
        .collect()
}

pub fn estimate_help() -> &'static str {
    ESTIMATE_DEFAULTS
}
