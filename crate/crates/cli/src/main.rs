//! Command-line front end: simulate genealogies, tabulate closed forms and
//! run the acceptance checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use cppsfs::asymptotics::{covariance_matrix, integral_closed_form, integral_quadrature, Integral};
use cppsfs::genealogy::Regime;
use cppsfs::io::write_table;
use cppsfs::montecarlo::{condition_diagnostics, run_replicates, ExperimentConfig, HorizonRule};
use cppsfs::svg::render_histograms;
use cppsfs::{verify, ModelParams};

const CONFIG_SCHEMA: u32 = 1;
const DEFAULT_HORIZON_FACTOR: f64 = 10.0;
const INTEGRAL_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "cppsfs", version, about = "Branch lengths and site frequency spectra of birth-death genealogies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicate genealogies and write their branch-length table.
    Simulate(RunArgs),
    /// Like `simulate`, with Poisson mutations scattered on every replicate.
    Sfs(RunArgs),
    /// Write the limiting covariance matrix of the supercritical statistics.
    Cov(CovArgs),
    /// Compare the closed-form covariance integrals with quadrature.
    Integrals(IntegralArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Report how well a configuration fits the limit theorems.
    Diag(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RegimeArg {
    /// Exact sampler with `mu = lambda`.
    Critical,
    /// Exact sampler with `mu < lambda`.
    Supercritical,
    /// Exact sampler; criticality follows from the rates.
    Exact,
    CriticalIntermediate,
    CriticalLimit,
    SupercriticalLimit,
}

impl RegimeArg {
    fn regime(self) -> Regime {
        match self {
            Self::Critical | Self::Supercritical | Self::Exact => Regime::Exact,
            Self::CriticalIntermediate => Regime::CriticalIntermediate,
            Self::CriticalLimit => Regime::CriticalLimit,
            Self::SupercriticalLimit => Regime::SupercriticalLimit,
        }
    }

    fn is_critical(self, lambda: f64, mu: Option<f64>) -> bool {
        match self {
            Self::Critical | Self::CriticalIntermediate | Self::CriticalLimit => true,
            Self::Supercritical | Self::SupercriticalLimit => false,
            Self::Exact => mu.is_none_or(|m| m == lambda),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Birth rate.
    #[arg(long)]
    lambda: Option<f64>,
    /// Death rate; defaults to lambda for critical regimes and 0 otherwise.
    #[arg(long)]
    mu: Option<f64>,
    /// Sampling time; critical runs default to 10 n.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Mutation rate per unit branch length.
    #[arg(long)]
    nu: Option<f64>,
    /// Largest family size reported.
    #[arg(long = "K")]
    k_max: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Output table (`.csv` or `.jsonl`); a `.meta.json` file is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for SVG histograms of the standardized statistics.
    #[arg(long)]
    plots: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "CPPSFS_THREADS")]
    parallelism: Option<usize>,
    /// JSON configuration file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CovArgs {
    #[arg(long = "K")]
    k_max: Option<usize>,
    /// Output file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct IntegralArgs {
    /// Largest k tabulated.
    #[arg(long, default_value_t = 8)]
    kmax: usize,
    /// Optional CSV copy of the table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only the named checks (A1..A9); all by default.
    #[arg(long = "criterion", value_name = "ID")]
    criteria: Vec<String>,
}

/// On-disk configuration; every field is optional.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema: u32,
    lambda: Option<f64>,
    mu: Option<f64>,
    #[serde(rename = "T")]
    horizon: Option<f64>,
    n: Option<usize>,
    nu: Option<f64>,
    #[serde(rename = "K")]
    k_max: Option<usize>,
    replicates: Option<usize>,
    seed: Option<u64>,
    regime: Option<RegimeArg>,
    out: Option<PathBuf>,
    plots: Option<PathBuf>,
    parallelism: Option<usize>,
}

/// Failure classes, mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

impl From<cppsfs::Error> for Failure {
    fn from(e: cppsfs::Error) -> Self {
        Self::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(Failure::Usage)?;
    let file: ConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))
        .map_err(Failure::Usage)?;
    if file.schema != CONFIG_SCHEMA {
        return Err(usage(format!(
            "config {} has schema {}, expected {CONFIG_SCHEMA}",
            path.display(),
            file.schema
        )));
    }
    Ok(file)
}

impl RunArgs {
    /// Fills unset flags from the configuration file, if any.
    fn merged(mut self) -> Result<Self, Failure> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let f = load_config(&path)?;
        self.lambda = self.lambda.or(f.lambda);
        self.mu = self.mu.or(f.mu);
        self.horizon = self.horizon.or(f.horizon);
        self.n = self.n.or(f.n);
        self.nu = self.nu.or(f.nu);
        self.k_max = self.k_max.or(f.k_max);
        self.replicates = self.replicates.or(f.replicates);
        self.seed = self.seed.or(f.seed);
        self.regime = self.regime.or(f.regime);
        self.out = self.out.or(f.out);
        self.plots = self.plots.or(f.plots);
        self.parallelism = self.parallelism.or(f.parallelism);
        Ok(self)
    }

    fn experiment(&self, mutations: bool) -> Result<ExperimentConfig, Failure> {
        let regime = self.regime.unwrap_or(RegimeArg::Critical);
        let lambda = self.lambda.unwrap_or(1.0);
        let critical = regime.is_critical(lambda, self.mu);
        let mu = self.mu.unwrap_or(if critical { lambda } else { 0.0 });
        if regime != RegimeArg::Exact {
            if critical && mu != lambda {
                return Err(usage(format!("a critical regime needs mu = lambda, got mu = {mu}")));
            }
            if !critical && mu >= lambda {
                return Err(usage(format!("a supercritical regime needs mu < lambda, got mu = {mu}")));
            }
        }
        let n = self.n.unwrap_or(100);
        let k_max = self.k_max.unwrap_or(5.min(n.saturating_sub(1)).max(1));
        let nu = self.nu.unwrap_or(if mutations { 1.0 } else { 0.0 });
        let (horizon, rule) = match self.horizon {
            Some(t) => (t, HorizonRule::Explicit),
            None if critical => (
                DEFAULT_HORIZON_FACTOR * n as f64,
                HorizonRule::MultipleOfN {
                    factor: DEFAULT_HORIZON_FACTOR,
                },
            ),
            None => return Err(usage("supercritical runs need --T")),
        };
        let params = ModelParams::new(lambda, mu, horizon, n, nu).map_err(|e| Failure::Usage(e.into()))?;
        let mut config = ExperimentConfig::new(
            params,
            regime.regime(),
            self.replicates.unwrap_or(1000),
            k_max,
            self.seed.unwrap_or(0),
        );
        config.horizon_rule = rule;
        config.parallelism = self.parallelism;
        config.mutations = mutations;
        config.validate().map_err(|e| Failure::Usage(e.into()))?;
        Ok(config)
    }
}

fn simulate(args: RunArgs, mutations: bool) -> Result<(), Failure> {
    let args = args.merged()?;
    let config = args.experiment(mutations)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(if mutations { "sfs.csv" } else { "table.csv" }));
    let table = run_replicates(&config)?;
    write_table(&table, &out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "{} replicates in {:.2}s -> {}",
        table.rows.len(),
        table.meta.wall_time_secs,
        out.display()
    );
    if let Some(dir) = &args.plots {
        let files = render_histograms(&table, dir).with_context(|| format!("writing plots to {}", dir.display()))?;
        eprintln!("{} histograms -> {}", files.len(), dir.display());
    }
    Ok(())
}

fn diag(args: RunArgs) -> Result<(), Failure> {
    let args = args.merged()?;
    let config = args.experiment(false)?;
    let report = condition_diagnostics(&config)?;
    println!("{report}");
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).context("serializing report")?;
        fs::write(out, json + "\n").with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn cov(args: CovArgs) -> Result<(), Failure> {
    let mut k_max = args.k_max;
    let mut out = args.out;
    if let Some(path) = &args.config {
        let f = load_config(path)?;
        k_max = k_max.or(f.k_max);
        out = out.or(f.out);
    }
    let k_max = k_max.unwrap_or(4);
    if k_max < 2 {
        return Err(usage(format!("--K must be at least 2, got {k_max}")));
    }
    let v = covariance_matrix(k_max)?;
    let csv = v.to_csv()?;
    match out {
        Some(path) => {
            let body = if path.extension().is_some_and(|e| e == "json") {
                v.to_json()?
            } else {
                csv
            };
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn integrals(args: IntegralArgs) -> Result<(), Failure> {
    if args.kmax < 2 {
        return Err(usage(format!("--kmax must be at least 2, got {}", args.kmax)));
    }
    let mut table = String::from("integral,k,kp,closed_form,quadrature,abs_diff\n");
    let mut worst = 0.0f64;
    for k in 2..=args.kmax {
        for kp in 2..=k {
            for which in Integral::ALL {
                if !which.applies(k, kp) {
                    continue;
                }
                let closed = integral_closed_form(which, k, kp)?;
                let quad = integral_quadrature(which, k, kp)?;
                let diff = (closed - quad).abs();
                worst = worst.max(diff);
                table.push_str(&format!("{},{k},{kp},{closed},{quad},{diff:e}\n", which.name()));
            }
        }
    }
    print!("{table}");
    if let Some(path) = &args.out {
        fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?;
    }
    if worst > INTEGRAL_TOL {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "largest discrepancy {worst:e} exceeds {INTEGRAL_TOL:e}"
        )));
    }
    Ok(())
}

type CheckFn = fn() -> cppsfs::Result<verify::CriterionOutcome>;

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let checks: [(&str, CheckFn); 9] = [
        ("A1", verify::integrals_match_quadrature),
        ("A2", verify::covariance_cross_check),
        ("A3", verify::critical_clt),
        ("A4", verify::supercritical_lln),
        ("A5", verify::supercritical_clt),
        ("A6", verify::branch_means),
        ("A7", verify::structural_oracles),
        ("A8", verify::forward_oracle),
        ("A9", verify::sfs_poisson_law),
    ];
    let wanted: Vec<String> = args.criteria.iter().map(|c| c.to_ascii_uppercase()).collect();
    if let Some(bad) = wanted.iter().find(|w| !checks.iter().any(|(id, _)| id == w)) {
        return Err(usage(format!("unknown criterion '{bad}'")));
    }
    let mut failed = 0;
    for (id, check) in checks {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let outcome = check()?;
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Failure::Runtime(anyhow::anyhow!("{failed} check(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, false),
        Command::Sfs(a) => simulate(a, true),
        Command::Cov(a) => cov(a),
        Command::Integrals(a) => integrals(a),
        Command::Verify(a) => run_verify(a),
        Command::Diag(a) => diag(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
