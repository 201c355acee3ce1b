use std::fs;
use std::path::{Path, PathBuf};

use besov_lab::besov::{besov_norm_with, modulus_curve, BesovOptions, BesovParams};
use besov_lab::harness::{run_alpha_sweep, ExperimentConfig};
use besov_lab::lemma::{
    boundedness_probe, lemma_statistic, paley_zygmund_check, CoefficientRule, DisjointFamily, FamilyRule,
    ProbeConfig, PzInstance, PzMode, WeightSequence,
};
use besov_lab::report::{fmt_f64, version_string};
use besov_lab::{
    kamont_series, GeneratorRegistry, GeneratorSpec, Grid, LabError, StochasticMeasureSample, WeightFn,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::ingest::{self, IngestSummary};
use crate::CliError;

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "besovlab", version, about = "Path regularity of sampled stochastic measures")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a measure and write its path as `t,value` CSV.
    Generate(GenerateArgs),
    /// Dyadic level series and convergence verdict for a path file.
    Dyadic(DyadicArgs),
    /// Besov norm of a path file.
    Besov(BesovArgs),
    /// Monte Carlo alpha sweep driven by a TOML or JSON config.
    Sweep(SweepArgs),
    /// Weighted-sum statistic, Paley-Zygmund checks and boundedness probes.
    Lemma(LemmaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    /// Registered generator: bm, martingale, fbm, wfbm.
    #[arg(long, default_value = "bm")]
    process: String,
    /// Hurst index for fbm and wfbm.
    #[arg(long = "H")]
    hurst: Option<f64>,
    /// Weight function, e.g. `constant:2`, `affine:1,0.5`, `sine:1,2,0`, `indicator:0.2,0.7`.
    #[arg(long)]
    weight: Option<WeightFn>,
    /// Left end of the time interval.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    /// Right end of the time interval.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    b: f64,
}

impl ProcessArgs {
    fn spec(&self, exponent: u32, seed: u64) -> CliResult<GeneratorSpec> {
        let mut spec = GeneratorSpec::new(self.process.clone(), Grid::new(self.a, self.b, exponent)?, seed);
        spec.params.hurst = self.hurst;
        spec.params.weight = self.weight;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Grid exponent: 2^J cells.
    #[arg(long = "J", default_value_t = 12)]
    exponent: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DyadicArgs {
    /// `t,value` CSV file.
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Number of levels; defaults to the grid exponent.
    #[arg(long = "N")]
    levels: Option<u32>,
    /// Resample the input onto 2^J cells.
    #[arg(long = "J")]
    exponent: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BesovArgs {
    /// `t,value` CSV file.
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Add a power-law estimate of the scales below the grid spacing.
    #[arg(long)]
    extrapolate: bool,
    /// Resample the input onto 2^J cells.
    #[arg(long = "J")]
    exponent: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Experiment config (.toml or .json).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the generator seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the grid exponent of the config.
    #[arg(long = "J")]
    exponent: Option<u32>,
    /// Overrides the worker count of the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Output stem: writes `<stem>.json` and `<stem>.csv`.
    #[arg(long, default_value = "sweep")]
    out: PathBuf,
    /// Write only one of the two report files.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Random,
    Dyadic,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["pz_exact", "pz_mc", "statistic", "probe"])))]
struct LemmaArgs {
    /// Exact Paley-Zygmund check over all sign patterns of a comma-separated list.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pz_exact: Option<String>,
    /// Monte Carlo Paley-Zygmund check of a comma-separated list.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pz_mc: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Partial sums of the weighted quadratic statistic over dyadic levels.
    #[arg(long)]
    statistic: bool,
    /// Quantiles of |sum c_k mu(A_k)| for growing disjoint families.
    #[arg(long)]
    probe: bool,
    /// Path file for --statistic instead of a simulated sample.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.4)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Number of levels for --statistic; defaults to the grid exponent.
    #[arg(long = "N")]
    levels: Option<u32>,
    #[arg(long, value_name = "LIST", default_value = "2,8,32,128,512")]
    sizes: String,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 0.99)]
    quantile: f64,
    #[arg(long, value_enum, default_value = "random")]
    families: FamilyArg,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long = "J")]
    exponent: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Dyadic(args) => dyadic(args),
        Command::Besov(args) => besov(args),
        Command::Sweep(args) => sweep(args),
        Command::Lemma(args) => lemma(args),
    }
}

fn write_output(out: Option<&Path>, contents: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, contents)
            .map_err(|e| LabError::Data(format!("cannot write {}: {e}", path.display())).into()),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("{flag}: cannot parse {s:?}"))))
        .collect()
}

fn path_csv(values: &[f64], grid: &Grid) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    out.push_str("t,value\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&fmt_f64(grid.point(k)));
        out.push(',');
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

fn generate(args: GenerateArgs) -> CliResult {
    let spec = args.process.spec(args.exponent, args.seed)?;
    let path = spec.sample(&GeneratorRegistry::with_builtins())?.path_of();
    let out = args.output.out.as_deref();
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            write_output(out, &path_csv(path.values(), path.grid()))?;
            if let Some(out) = out {
                let mut sidecar = out.as_os_str().to_owned();
                sidecar.push(".json");
                let meta = json!({ "spec": spec, "seed": spec.seed, "version": version_string() });
                write_output(Some(Path::new(&sidecar)), &to_json(&meta))?;
            }
        }
        Format::Json => {
            let points: Vec<f64> = (0..path.grid().points()).map(|k| path.grid().point(k)).collect();
            let doc = json!({ "spec": spec, "version": version_string(), "t": points, "value": path.values() });
            write_output(out, &to_json(&doc))?;
        }
    }
    Ok(())
}

fn dyadic(args: DyadicArgs) -> CliResult {
    let series = ingest::load(&args.input, args.exponent)?;
    let path = &series.resampled;
    let levels = args.levels.unwrap_or(path.grid().exponent());
    let report = kamont_series(path, levels, args.alpha, args.p)?;
    eprintln!(
        "verdict: {:?} (tail slope {})",
        report.verdict,
        report.fitted_log2_slope.map_or("n/a".into(), fmt_f64)
    );
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({ "ingest": series.summary, "series": report })),
        Format::Csv => {
            let mut out = String::from("n,T_n,partial_sum\n");
            for ((n, t), s) in report.levels.iter().zip(&report.terms).zip(&report.partial_sums) {
                out.push_str(&format!("{n},{},{}\n", fmt_f64(*t), fmt_f64(*s)));
            }
            out
        }
    };
    write_output(args.output.out.as_deref(), &text)
}

fn besov(args: BesovArgs) -> CliResult {
    let series = ingest::load(&args.input, args.exponent)?;
    let params = BesovParams::new(args.alpha, args.p, args.q)?;
    let options = BesovOptions { extrapolate: args.extrapolate };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let report = besov_norm_with(&series.resampled, params, options)?;
            to_json(&json!({ "ingest": series.summary, "norm": report }))
        }
        Format::Csv => {
            let curve = modulus_curve(&series.resampled, args.p)?;
            let mut out = String::from("t,w\n");
            for (t, w) in curve.t_grid.iter().zip(&curve.w_values) {
                out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*w)));
            }
            out
        }
    };
    write_output(args.output.out.as_deref(), &text)
}

fn sweep(args: SweepArgs) -> CliResult {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.generator.seed = seed;
    }
    if let Some(j) = args.exponent {
        config.generator.grid = config.generator.grid.with_exponent(j)?;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    let report = run_alpha_sweep(&config)?;
    match report.critical_alpha {
        Some(a) => eprintln!("critical alpha: {}", fmt_f64(a)),
        None => eprintln!("critical alpha: no sign change of the median slope"),
    }
    let with_ext = |ext: &str| {
        let mut p = args.out.as_os_str().to_owned();
        p.push(ext);
        PathBuf::from(p)
    };
    if args.format != Some(Format::Csv) {
        write_output(Some(&with_ext(".json")), &report.to_json())?;
    }
    if args.format != Some(Format::Json) {
        write_output(Some(&with_ext(".csv")), &report.to_csv())?;
    }
    Ok(())
}

fn lemma(args: LemmaArgs) -> CliResult {
    let format = args.output.format;
    let out = args.output.out.as_deref();
    if let Some(list) = args.pz_exact.as_deref().or(args.pz_mc.as_deref()) {
        let flag = if args.pz_exact.is_some() { "--pz-exact" } else { "--pz-mc" };
        let instance = PzInstance::new(parse_list(flag, list)?)?;
        let mode = if args.pz_exact.is_some() {
            PzMode::Exact
        } else {
            PzMode::MonteCarlo { samples: args.samples, seed: args.seed }
        };
        let outcome = paley_zygmund_check(&instance, mode)?;
        let text = match format.unwrap_or(Format::Csv) {
            Format::Json => to_json(&outcome),
            Format::Csv => {
                let se = outcome.standard_error.map(|s| format!(" standard_error={}", fmt_f64(s)));
                format!(
                    "probability={} bound={}{} {}\n",
                    fmt_f64(outcome.probability),
                    fmt_f64(outcome.bound),
                    se.unwrap_or_default(),
                    if outcome.pass { "PASS" } else { "FAIL" }
                )
            }
        };
        return write_output(out, &text);
    }
    let exponent = args.exponent.unwrap_or(12);
    let spec = args.process.spec(exponent, args.seed)?;
    if args.statistic {
        let (sample, ingest): (StochasticMeasureSample, Option<IngestSummary>) = match &args.input {
            Some(path) => {
                let s = ingest::load(path, args.exponent)?;
                (StochasticMeasureSample::from_path(&s.resampled), Some(s.summary))
            }
            None => (spec.sample(&GeneratorRegistry::with_builtins())?, None),
        };
        let depth = args.levels.unwrap_or(sample.grid().exponent());
        let weights = WeightSequence::geometric(args.alpha, args.p, depth as usize)?;
        let family = DisjointFamily::dyadic(depth)?;
        let sums = lemma_statistic(&sample, &weights, &family)?;
        let text = match format.unwrap_or(Format::Csv) {
            Format::Json => to_json(&json!({
                "ingest": ingest,
                "spec": if ingest.is_none() { Some(&spec) } else { None },
                "weights": weights.values(),
                "summability_margin": weights.summability_margin(),
                "partial_sums": sums,
            })),
            Format::Csv => {
                let mut text = String::from("n,weight,partial_sum\n");
                for (n, (w, s)) in weights.values().iter().zip(&sums).enumerate() {
                    text.push_str(&format!("{},{},{}\n", n + 1, fmt_f64(*w), fmt_f64(*s)));
                }
                text
            }
        };
        return write_output(out, &text);
    }
    let config = ProbeConfig {
        family_sizes: parse_list("--sizes", &args.sizes)?,
        replicates: args.replicates,
        quantile: args.quantile,
        families: match args.families {
            FamilyArg::Random => FamilyRule::RandomPartition,
            FamilyArg::Dyadic => FamilyRule::DyadicPartition,
        },
        coefficients: CoefficientRule::Uniform,
    };
    let table = boundedness_probe(&spec, &GeneratorRegistry::with_builtins(), &config)?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&json!({ "spec": spec, "config": config, "table": table })),
        Format::Csv => table.to_csv(),
    };
    write_output(out, &text)
}
