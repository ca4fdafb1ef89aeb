//! Command-line interface: argument definitions, validation and dispatch.
//!
//! Exit codes: 0 success, 1 bad input data, 2 usage (including any flag
//! out of range), 3 no solution exists for the requested inputs.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use callrate_core::arbitrage::{bank_payoff, implied_ltv, implied_term, CallLoanTerms, REG_T_MAX_LTV};
use callrate_core::autoregress::{
    fit_ar1, fit_ar2, forecast_ar1, forecast_ar2, impulse_response, Ar1Fit, Ar2Fit, CharacteristicRoots, Forecast,
    RegressionStats,
};
use callrate_core::descriptive::{acf, histogram, kde, pacf, AcfResult, KdeSpec};
use callrate_core::margin::{
    derive_leverage_sde, derive_margin_sde, kelly_bet, monopoly_margin_rate, nash_margin_rate, simulate_leverage,
    MarketIndexParams, STYLIZED_NU_S, STYLIZED_SIGMA_S,
};
use callrate_core::ou::{calibrate_from_ar1, simulate_ou, simulate_ou_euler, OuParams, SimPath};
use callrate_core::series::{continuous_rate, RateSeries, Units};

use crate::csv_io::{load_csv, LoadError};
use crate::parallel::{mc_zero_profit_check_par, simulate_many};
use crate::report::{sha256_hex, Cell, Format, Provenance, Report, Table};

pub const DEFAULT_SEED: u64 = 42;

/// Reference AR(1) estimates for the monthly call rate (continuous percent),
/// used when no data file is given.
pub const REFERENCE_AR1: (f64, f64, f64) = (3.943, 0.597, 2.362);
/// Reference AR(2) estimates `(c, phi1, phi2, sigma)`.
pub const REFERENCE_AR2: (f64, f64, f64, f64) = (1.215, 0.456, 0.235, 2.297);

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "callrate",
    version,
    about = "Call-money rate models, margin pricing and call-loan arbitrage bounds"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Summary statistics, histogram, kernel density, ACF and PACF.
    Describe(DescribeArgs),
    /// Estimate an AR(1) or AR(2) model by least squares.
    Fit(FitArgs),
    /// Multi-step forecasts with error bands, or impulse responses.
    Forecast(ForecastArgs),
    /// Simulate call-rate (Ornstein-Uhlenbeck) or Kelly leverage paths.
    Simulate(SimulateArgs),
    /// Margin-loan pricing and the bank's call-loan payoff.
    #[command(subcommand)]
    Price(PriceCommand),
    /// Solve the zero-profit condition for loan-to-value or loan term.
    #[command(subcommand)]
    Implied(ImpliedCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitsArg {
    /// Nominal percent per annum; converted with 100 ln(1 + x/100).
    Nominal,
    /// Already continuously compounded.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ar1,
    Ar2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    Ou,
    Leverage,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// CSV file with `YYYY-MM,value` rows (percent).
    #[serde(skip)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = UnitsArg::Nominal)]
    pub units: UnitsArg,
}

#[derive(Debug, Args, Serialize)]
pub struct DescribeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.25, value_parser = positive)]
    pub bin_width: f64,
    /// Values above this go to the overflow count.
    #[arg(long, default_value_t = 12.0, value_parser = finite)]
    pub hist_max: f64,
    #[arg(long, default_value_t = 0.502, value_parser = positive)]
    pub bandwidth: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub kde_from: f64,
    #[arg(long, default_value_t = 12.0, value_parser = finite)]
    pub kde_to: f64,
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    pub kde_step: f64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
    pub acf_lags: u32,
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u32).range(1..))]
    pub pacf_lags: u32,
    /// Write one file per table into this directory.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Model::Ar1)]
    pub model: Model,
}

#[derive(Debug, Args, Serialize)]
pub struct ForecastArgs {
    #[arg(long, value_enum, default_value_t = Model::Ar1)]
    pub model: Model,
    /// Fit the model to this file; without it the reference estimates are used.
    #[arg(long)]
    #[serde(skip)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = UnitsArg::Nominal)]
    pub units: UnitsArg,
    /// Older observation (the only one for AR(1)), continuous percent.
    #[arg(long, value_parser = percent)]
    pub y0: Option<f64>,
    /// Latest observation, AR(2) only.
    #[arg(long, value_parser = percent)]
    pub y1: Option<f64>,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=100_000))]
    pub horizon: u32,
    /// Print the response (basis points) to a 100 bp shock instead.
    #[arg(long)]
    pub impulse: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(value_enum, default_value_t = SimKind::Ou)]
    pub kind: SimKind,
    /// Calibrate to an AR(1) fit of this file instead of --mu/--rho/--sigma.
    #[arg(long)]
    #[serde(skip)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = UnitsArg::Nominal)]
    pub units: UnitsArg,
    /// AR(1) long-run mean, continuous percent.
    #[arg(long, default_value_t = REFERENCE_AR1.0, value_parser = percent)]
    pub mu: f64,
    /// AR(1) coefficient, in (0, 1).
    #[arg(long, default_value_t = REFERENCE_AR1.1, value_parser = open_unit)]
    pub rho: f64,
    /// AR(1) innovation standard deviation, percent.
    #[arg(long, default_value_t = REFERENCE_AR1.2, value_parser = nonneg)]
    pub sigma: f64,
    /// Starting call rate (default: the long-run mean).
    #[arg(long, value_parser = percent)]
    pub y0: Option<f64>,
    /// Starting leverage ratio.
    #[arg(long, default_value_t = 2.0, value_parser = finite)]
    pub b0: f64,
    #[arg(long, default_value_t = STYLIZED_NU_S, value_parser = unit_rate)]
    pub nu_s: f64,
    #[arg(long, default_value_t = STYLIZED_SIGMA_S, value_parser = positive)]
    pub sigma_s: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1_000_000))]
    pub paths: u32,
    /// Path i uses seed + i.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Step in months.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub step: f64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=100_000_000))]
    pub steps: u32,
    /// Euler-Maruyama instead of the exact transition (call rate only).
    #[arg(long)]
    pub euler: bool,
    /// Report time in years rather than months.
    #[arg(long)]
    pub per_year: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct MarketArgs {
    /// Log growth rate of the index, unit interval.
    #[arg(long, default_value_t = STYLIZED_NU_S, value_parser = unit_rate)]
    pub nu_s: f64,
    /// Index volatility.
    #[arg(long, default_value_t = STYLIZED_SIGMA_S, value_parser = positive)]
    pub sigma_s: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriceCommand {
    /// Margin rate for a given call rate, and the Kelly bet it induces.
    Margin {
        /// Broker call rate, unit interval (0.0425 for 4.25%).
        #[arg(long, value_parser = unit_rate)]
        call: f64,
        /// Nash bargaining instead of monopoly pricing.
        #[arg(long)]
        nash: bool,
        #[command(flatten)]
        market: MarketArgs,
    },
    /// Margin-rate and leverage SDEs implied by an AR(1) call-rate model.
    Sde {
        #[arg(long, default_value_t = REFERENCE_AR1.0, value_parser = percent)]
        mu: f64,
        #[arg(long, default_value_t = REFERENCE_AR1.1, value_parser = open_unit)]
        rho: f64,
        #[arg(long, default_value_t = REFERENCE_AR1.2, value_parser = nonneg)]
        sigma: f64,
        #[command(flatten)]
        market: MarketArgs,
    },
    /// Bank's payoff and the credit event at a terminal portfolio value.
    BankPayoff {
        #[arg(long, value_parser = unit_rate)]
        r: f64,
        #[arg(long, value_parser = unit_rate)]
        call: f64,
        /// Call loan over initial portfolio value, d / S0.
        #[arg(long, value_parser = open_unit)]
        ltv: f64,
        /// Years.
        #[arg(long, value_parser = positive)]
        term: f64,
        #[arg(long, default_value_t = 0.4, value_parser = positive)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0, value_parser = positive)]
        s0: f64,
        /// Client's margin loan D, with d < D < S0.
        #[arg(long, value_parser = positive)]
        big_d: f64,
        /// Rate charged to the client, above the call rate.
        #[arg(long, value_parser = unit_rate)]
        margin_rate: f64,
        /// Portfolio value at maturity.
        #[arg(long, value_parser = nonneg)]
        st: f64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    /// Risk-free rate, unit interval.
    #[arg(long, value_parser = unit_rate)]
    pub r: f64,
    /// Broker call rate, unit interval.
    #[arg(long, value_parser = unit_rate)]
    pub call: f64,
    /// Collateral volatility.
    #[arg(long, value_parser = positive)]
    pub sigma: f64,
    /// `nominal` converts both rates with ln(1 + x) first.
    #[arg(long, value_enum, default_value_t = UnitsArg::Continuous)]
    pub units: UnitsArg,
    /// Also run the risk-neutral Monte-Carlo check with this many paths.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=100_000_000))]
    pub mc_paths: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpliedCommand {
    /// Loan-to-value d/S0 for a given term.
    Ltv {
        /// Years.
        #[arg(long, value_parser = positive)]
        term: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Loan term (years) for a given loan-to-value.
    Term {
        #[arg(long, value_parser = open_unit)]
        ltv: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s} is not finite"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    parse_f64(s)
}

fn positive(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{x} must be positive"))
    }
}

fn nonneg(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("{x} must be non-negative"))
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} must lie strictly between 0 and 1"))
    }
}

/// Rates in percent per annum, above -100.
fn percent(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > -100.0 {
        Ok(x)
    } else {
        Err(format!("{x} must exceed -100"))
    }
}

/// Rates on the unit interval. Anything above 1 is almost certainly a
/// percentage typed by mistake.
fn unit_rate(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 1.0 {
        Err(format!(
            "{x} looks like a percentage; rates are on the unit interval (did you mean {}?)",
            x / 100.0
        ))
    } else if x <= -1.0 {
        Err(format!("{x} must exceed -1"))
    } else {
        Ok(x)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NoSolution(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 1,
            CliError::NoSolution(_) => 3,
        }
    }
}

impl From<callrate_core::Error> for CliError {
    fn from(e: callrate_core::Error) -> Self {
        match e {
            callrate_core::Error::NoSolution(_) => CliError::NoSolution(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Checks that depend on several flags at once. Runs before any file is
/// read or anything is computed.
pub fn validate(cli: &Cli) -> Result<(), CliError> {
    let usage = |m: String| Err(CliError::Usage(m));
    match &cli.command {
        Command::Describe(a) => {
            if a.kde_to < a.kde_from {
                return usage(format!("--kde-to {} is below --kde-from {}", a.kde_to, a.kde_from));
            }
            if (a.kde_to - a.kde_from) / a.kde_step > 1e7 {
                return usage("KDE grid has more than 10^7 points; raise --kde-step".into());
            }
        }
        Command::Forecast(a) => {
            if a.y0.is_none() && !a.impulse {
                return usage("--y0 is required".into());
            }
            if a.model == Model::Ar2 && a.y1.is_none() && !a.impulse {
                return usage("--model ar2 needs both --y0 (older) and --y1 (latest)".into());
            }
            if a.model == Model::Ar1 && a.y1.is_some() {
                return usage("--y1 only applies to --model ar2".into());
            }
        }
        Command::Simulate(a) => {
            if a.euler && a.kind == SimKind::Leverage {
                return usage("--euler applies to call-rate paths only".into());
            }
            if u64::from(a.paths) * u64::from(a.steps) > 200_000_000 {
                return usage("--paths x --steps exceeds 2x10^8 draws".into());
            }
        }
        Command::Price(PriceCommand::BankPayoff {
            ltv,
            s0,
            big_d,
            margin_rate,
            call,
            ..
        }) => {
            let d = ltv * s0;
            if !(*big_d > d && *big_d < *s0) {
                return usage(format!("--big-d {big_d} must lie between d = {d} and --s0 {s0}"));
            }
            if margin_rate <= call {
                return usage(format!("--margin-rate {margin_rate} must exceed --call {call}"));
            }
        }
        Command::Implied(ImpliedCommand::Ltv { solver, .. } | ImpliedCommand::Term { solver, .. }) => {
            let (r, call) = solver_rates(solver);
            if call <= r {
                return usage(format!(
                    "call rate {call} must exceed the risk-free rate {r}: with no premium there is no credit risk to price"
                ));
            }
        }
        Command::Fit(_) | Command::Price(_) => {}
    }
    Ok(())
}

/// What a run produced.
pub enum Output {
    Single(Report),
    /// One file per table, written into the directory.
    Directory(PathBuf, Report),
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    validate(cli)?;
    let input_digest = input_path(&cli.command).map(file_digest).transpose()?;
    let seed = match &cli.command {
        Command::Simulate(a) => Some(a.seed),
        Command::Implied(ImpliedCommand::Ltv { solver, .. } | ImpliedCommand::Term { solver, .. }) => {
            solver.mc_paths.map(|_| solver.seed)
        }
        _ => None,
    };
    let provenance = Provenance::new(&(cli, &input_digest), seed);
    let tables = match &cli.command {
        Command::Describe(a) => describe(a)?,
        Command::Fit(a) => fit(a)?,
        Command::Forecast(a) => forecast(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Price(p) => price(p)?,
        Command::Implied(i) => implied(i)?,
    };
    let report = Report { provenance, tables };
    Ok(match &cli.command {
        Command::Describe(DescribeArgs { out_dir: Some(dir), .. }) => Output::Directory(dir.clone(), report),
        _ => Output::Single(report),
    })
}

/// Writes the output where the flags say, stdout by default.
pub fn emit(cli: &Cli, output: &Output) -> Result<(), CliError> {
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    };
    match output {
        Output::Single(report) => {
            let text = report.render(cli.format);
            match &cli.output {
                Some(path) => write(path, &text)?,
                None => print!("{text}"),
            }
        }
        Output::Directory(dir, report) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            for part in report.split() {
                let name = format!("{}.{}", part.tables[0].name, cli.format.extension());
                write(&dir.join(name), &part.render(cli.format))?;
            }
        }
    }
    Ok(())
}

fn input_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Describe(a) => Some(&a.data.input),
        Command::Fit(a) => Some(&a.data.input),
        Command::Forecast(a) => a.input.as_deref(),
        Command::Simulate(a) => a.input.as_deref(),
        _ => None,
    }
}

fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Loads a series and returns it in continuous percent.
fn load_continuous(path: &Path, units: UnitsArg) -> Result<RateSeries, CliError> {
    Ok(match units {
        UnitsArg::Nominal => load_csv(path, Units::NominalPercent)?.to_continuous()?,
        UnitsArg::Continuous => load_csv(path, Units::ContinuousPercent)?,
    })
}

fn band_table(name: &str, column: &str, r: &AcfResult) -> Table {
    let mut t = Table::new(name, &["lag", column, "band_lower", "band_upper"]);
    for (lag, v) in r.lags() {
        t.push(vec![lag.into(), v.into(), (-r.band).into(), r.band.into()]);
    }
    t
}

fn describe(a: &DescribeArgs) -> Result<Vec<Table>, CliError> {
    let series = load_continuous(&a.data.input, a.data.units)?;
    let y = series.values();
    let s = series.summarize()?;
    let hist = histogram(y, a.bin_width, a.hist_max)?;
    let months: Vec<_> = series.months().collect();
    let summary = Table::key_value(
        "summary",
        vec![
            ("label", series.label().into()),
            ("units", series.units().to_string().into()),
            (
                "first_month",
                months.first().map_or(String::new(), |m| m.to_string()).into(),
            ),
            (
                "last_month",
                months.last().map_or(String::new(), |m| m.to_string()).into(),
            ),
            ("count", s.count.into()),
            ("mean", s.mean.into()),
            ("min", s.min.into()),
            ("max", s.max.into()),
            ("std_dev", s.std_dev.into()),
            ("mean_abs_dev", s.mean_abs_dev.into()),
            ("p5", s.p5.into()),
            ("median", s.median.into()),
            ("p95", s.p95.into()),
            ("histogram_overflow", hist.overflow.into()),
        ],
    );
    let mut h = Table::new("histogram", &["lower", "upper", "count"]);
    for b in &hist.bins {
        h.push(vec![b.lower.into(), (b.lower + hist.bin_width).into(), b.count.into()]);
    }
    let spec = KdeSpec::uniform(a.bandwidth, a.kde_from, a.kde_to, a.kde_step)?;
    let mut k = Table::new("kde", &["y", "density"]);
    for (g, d) in kde(y, &spec)? {
        k.push(vec![g.into(), d.into()]);
    }
    let acf_t = band_table("acf", "acf", &acf(y, a.acf_lags as usize)?);
    let pacf_t = band_table("pacf", "pacf", &pacf(y, a.pacf_lags as usize)?);
    Ok(vec![summary, h, k, acf_t, pacf_t])
}

fn coefficient_rows(t: &mut Table, names: &[&str], estimates: &[f64], stats: &RegressionStats) {
    for (i, (name, est)) in names.iter().zip(estimates).enumerate() {
        let (lo, hi) = stats.conf_interval(i, *est);
        t.push(vec![
            (*name).into(),
            (*est).into(),
            stats.std_errors[i].into(),
            lo.into(),
            hi.into(),
        ]);
    }
}

fn fit_stats_rows(stats: &RegressionStats) -> Vec<(&'static str, Cell)> {
    vec![
        ("r_squared", stats.r_squared.into()),
        ("n_obs", stats.n_obs.into()),
        ("residual_mean_abs", stats.residuals.mean_abs.into()),
        ("residual_p5_abs", stats.residuals.p5_abs.into()),
        ("residual_median_abs", stats.residuals.median_abs.into()),
        ("residual_p95_abs", stats.residuals.p95_abs.into()),
    ]
}

fn fit(a: &FitArgs) -> Result<Vec<Table>, CliError> {
    let series = load_continuous(&a.data.input, a.data.units)?;
    let mut coefs = Table::new(
        "coefficients",
        &["parameter", "estimate", "std_error", "ci95_lower", "ci95_upper"],
    );
    let summary = match a.model {
        Model::Ar1 => {
            let f = fit_ar1(&series)?;
            let stats = f.stats.as_ref().expect("estimated fit has stats");
            coefficient_rows(&mut coefs, &["alpha", "rho"], &[f.alpha, f.rho], stats);
            let mut rows = vec![
                ("sigma", f.sigma.into()),
                ("theta", f.theta().into()),
                ("mu", f.mu().into()),
                ("s", f.s().into()),
                ("lag_root", f.lag_root().into()),
            ];
            if let Ok(ou) = calibrate_from_ar1(&f) {
                rows.push(("ou_theta_bar", ou.theta_bar.into()));
                rows.push(("ou_sigma_bar", ou.sigma_bar.into()));
            }
            rows.extend(fit_stats_rows(stats));
            rows
        }
        Model::Ar2 => {
            let f = fit_ar2(&series)?;
            let stats = f.stats.as_ref().expect("estimated fit has stats");
            coefficient_rows(&mut coefs, &["c", "phi1", "phi2"], &[f.c, f.phi1, f.phi2], stats);
            let mut rows = vec![("sigma", f.sigma.into()), ("mu", f.mu().into()), ("s", f.s().into())];
            rows.extend(root_rows(&f));
            rows.extend(fit_stats_rows(stats));
            rows
        }
    };
    Ok(vec![coefs, Table::key_value("summary", summary)])
}

fn root_rows(f: &Ar2Fit) -> Vec<(&'static str, Cell)> {
    let roots = f.roots();
    let mut rows: Vec<(&'static str, Cell)> = match roots {
        CharacteristicRoots::Real { first, second } => vec![
            ("root_kind", "real".into()),
            ("lambda1", first.into()),
            ("lambda2", second.into()),
        ],
        CharacteristicRoots::Complex { re, im } => vec![
            ("root_kind", "complex".into()),
            ("lambda_re", re.into()),
            ("lambda_im", im.into()),
        ],
    };
    rows.push(("max_modulus", roots.max_modulus().into()));
    rows
}

fn reference_ar1() -> Ar1Fit {
    let (mu, rho, sigma) = REFERENCE_AR1;
    Ar1Fit::from_mean_form(mu, rho, sigma).expect("reference AR(1) is valid")
}

fn reference_ar2() -> Ar2Fit {
    let (c, p1, p2, sigma) = REFERENCE_AR2;
    Ar2Fit::from_coefficients(c, p1, p2, sigma).expect("reference AR(2) is valid")
}

fn forecast_table(rows: &[Forecast]) -> Table {
    let mut t = Table::new("forecast", &["t", "point", "rmse"]);
    for f in rows {
        t.push(vec![f.horizon.into(), f.point.into(), f.rmse.into()]);
    }
    t
}

fn impulse_table(rows: Vec<(u32, f64)>) -> Table {
    let mut t = Table::new("impulse_response", &["t", "response_bp"]);
    for (h, v) in rows {
        t.push(vec![h.into(), v.into()]);
    }
    t
}

fn forecast(a: &ForecastArgs) -> Result<Vec<Table>, CliError> {
    let series = a.input.as_deref().map(|p| load_continuous(p, a.units)).transpose()?;
    let table = match a.model {
        Model::Ar1 => {
            let f = series.as_ref().map(fit_ar1).transpose()?.unwrap_or_else(reference_ar1);
            if a.impulse {
                impulse_table(impulse_response(&f, a.horizon)?)
            } else {
                forecast_table(&forecast_ar1(&f, a.y0.expect("validated"), a.horizon)?)
            }
        }
        Model::Ar2 => {
            let f = series.as_ref().map(fit_ar2).transpose()?.unwrap_or_else(reference_ar2);
            if a.impulse {
                impulse_table(impulse_response(&f, a.horizon)?)
            } else {
                forecast_table(&forecast_ar2(
                    &f,
                    a.y0.expect("validated"),
                    a.y1.expect("validated"),
                    a.horizon,
                )?)
            }
        }
    };
    Ok(vec![table])
}

fn simulate(a: &SimulateArgs) -> Result<Vec<Table>, CliError> {
    let ar1 = match &a.input {
        Some(p) => fit_ar1(&load_continuous(p, a.units)?)?,
        None => Ar1Fit::from_mean_form(a.mu, a.rho, a.sigma)?,
    };
    let ou: OuParams = calibrate_from_ar1(&ar1)?;
    let (n, step) = (a.steps as usize, a.step);
    let paths: Vec<SimPath> = match a.kind {
        SimKind::Ou => {
            let y0 = a.y0.unwrap_or(ou.mu_bar);
            if a.euler {
                simulate_many(a.paths as usize, a.seed, |s| simulate_ou_euler(&ou, y0, step, n, s))?
            } else {
                simulate_many(a.paths as usize, a.seed, |s| simulate_ou(&ou, y0, step, n, s))?
            }
        }
        SimKind::Leverage => {
            let market = MarketIndexParams::new(a.nu_s, a.sigma_s)?;
            let sde = derive_leverage_sde(&ou, &market);
            simulate_many(a.paths as usize, a.seed, |s| simulate_leverage(&sde, a.b0, step, n, s))?
        }
    };
    let time_col = if a.per_year { "t_years" } else { "t_months" };
    let value_col = match a.kind {
        SimKind::Ou => "call_rate",
        SimKind::Leverage => "leverage",
    };
    let mut t = Table::new("paths", &["path", "seed", time_col, value_col]);
    for (i, p) in paths.iter().enumerate() {
        for (time, v) in p.times.iter().zip(&p.values) {
            let time = if a.per_year { time / 12.0 } else { *time };
            t.push(vec![i.into(), p.seed.into(), time.into(), (*v).into()]);
        }
    }
    Ok(vec![t])
}

fn price(p: &PriceCommand) -> Result<Vec<Table>, CliError> {
    Ok(match p {
        PriceCommand::Margin { call, nash, market } => {
            let m = MarketIndexParams::new(market.nu_s, market.sigma_s)?;
            let (rule, rate) = if *nash {
                ("nash", nash_margin_rate(*call, &m)?)
            } else {
                ("monopoly", monopoly_margin_rate(*call, &m)?)
            };
            let bet = kelly_bet(rate, &m)?;
            vec![Table::key_value(
                "margin",
                vec![
                    ("rule", rule.into()),
                    ("call_rate", (*call).into()),
                    ("margin_rate", rate.into()),
                    ("net_interest_margin", (rate - call).into()),
                    ("pricing_constant", m.pricing_constant().into()),
                    ("choke_price", m.choke_price().into()),
                    ("kelly_b", bet.b.into()),
                    ("kelly_q", bet.q.into()),
                ],
            )]
        }
        PriceCommand::Sde { mu, rho, sigma, market } => {
            let m = MarketIndexParams::new(market.nu_s, market.sigma_s)?;
            let ou = calibrate_from_ar1(&Ar1Fit::from_mean_form(*mu, *rho, *sigma)?)?;
            let margin = derive_margin_sde(&ou, &m);
            let lev = derive_leverage_sde(&ou, &m);
            let mut t = Table::new(
                "sde",
                &["process", "theta", "long_run_mean", "diffusion", "stationary_std"],
            );
            t.push(vec![
                "call_rate_percent".into(),
                ou.theta_bar.into(),
                ou.mu_bar.into(),
                ou.sigma_bar.into(),
                ou.stationary_std().into(),
            ]);
            t.push(vec![
                "margin_rate".into(),
                margin.theta.into(),
                margin.long_run_mean.into(),
                margin.diffusion.into(),
                (margin.diffusion.abs() / (2.0 * margin.theta).sqrt()).into(),
            ]);
            t.push(vec![
                "leverage_b".into(),
                lev.theta.into(),
                lev.long_run_mean.into(),
                lev.diffusion.into(),
                lev.stationary_std().into(),
            ]);
            t.push(vec![
                "margin_debt_q".into(),
                lev.theta.into(),
                lev.q_long_run_mean().into(),
                lev.diffusion.into(),
                lev.stationary_std().into(),
            ]);
            vec![t]
        }
        PriceCommand::BankPayoff {
            r,
            call,
            ltv,
            term,
            sigma,
            s0,
            big_d,
            margin_rate,
            st,
        } => {
            let terms = CallLoanTerms::from_call_rate(*r, *call, *ltv, *term, *sigma)?.with_collateral(
                *s0,
                *big_d,
                *margin_rate,
            )?;
            let pay = bank_payoff(&terms, *st)?;
            let event = match pay.event {
                callrate_core::arbitrage::CreditEvent::NoDefault => "no_default",
                callrate_core::arbitrage::CreditEvent::ClientDefaultsOnly => "client_defaults_only",
                callrate_core::arbitrage::CreditEvent::CascadedDefault => "cascaded_default",
            };
            vec![Table::key_value(
                "bank_payoff",
                vec![
                    ("s_t", (*st).into()),
                    ("strike", terms.strike().into()),
                    ("payoff", pay.payoff.into()),
                    ("covered_call_form", pay.covered_call_form.into()),
                    ("credit_event", event.into()),
                ],
            )]
        }
    })
}

fn solver_rates(s: &SolverArgs) -> (f64, f64) {
    match s.units {
        UnitsArg::Continuous => (s.r, s.call),
        // continuous_rate works in percent
        UnitsArg::Nominal => (
            continuous_rate(100.0 * s.r) / 100.0,
            continuous_rate(100.0 * s.call) / 100.0,
        ),
    }
}

const REG_T_NOTE: &str = "loan-to-value above the 50% Regulation-T limit on retail margin debt";

fn implied(i: &ImpliedCommand) -> Result<Vec<Table>, CliError> {
    let (solver, (ltv, term, delta, residual, roots)) = match i {
        ImpliedCommand::Ltv { term, solver } => {
            let (r, call) = solver_rates(solver);
            let sol = implied_ltv(call - r, *term, solver.sigma)?;
            (solver, (sol.ltv, *term, sol.delta, sol.residual, sol.roots))
        }
        ImpliedCommand::Term { ltv, solver } => {
            let (r, call) = solver_rates(solver);
            let sol = implied_term(call - r, *ltv, solver.sigma)?;
            (solver, (*ltv, sol.term, sol.delta, sol.residual, sol.roots))
        }
    };
    let (r, call) = solver_rates(solver);
    let reg_t = ltv > REG_T_MAX_LTV;
    let mut rows: Vec<(&str, Cell)> = vec![
        ("risk_free", r.into()),
        ("call_rate", call.into()),
        ("risk_premium", (call - r).into()),
        ("sigma", solver.sigma.into()),
        ("ltv", ltv.into()),
        ("term_years", term.into()),
        ("delta", delta.into()),
        ("residual", residual.into()),
        ("roots_found", roots.len().into()),
        ("reg_t_exceeded", reg_t.into()),
        ("note", if reg_t { REG_T_NOTE } else { "" }.into()),
    ];
    if let Some(n) = solver.mc_paths {
        let terms = CallLoanTerms::from_call_rate(r, call, ltv, term, solver.sigma)?;
        let est = mc_zero_profit_check_par(&terms, n as usize, solver.seed)?;
        rows.push(("mc_mean_profit", est.mean.into()));
        rows.push(("mc_std_error", est.std_error.into()));
        rows.push(("mc_within_3se", est.within(3.0).into()));
    }
    let mut t = Table::key_value("implied", rows);
    if roots.len() > 1 {
        let list = roots.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec!["all_roots".into(), list.into()]);
    }
    Ok(vec![t])
}
