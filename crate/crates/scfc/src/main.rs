//! Thin command-line front end over the scfc library.
//!
//! Exit codes: 0 the verdict clears the gate, 1 it does not, 2 usage or
//! input error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scfc::{
    assess, draw_sample, evaluate_counts, evaluate_records, exit_status, fmt_number,
    max_deviation, parse_counts_path, parse_records_path, parse_spec_path, plan_sample,
    render_json, render_markdown, render_records, representativeness_report, verdict_line,
    ConfidenceInterval, EvaluateOptions, EvaluationReport, ExitStatus, RecordFormat,
    SpecificationLimits,
};

#[derive(Parser)]
#[command(
    name = "scfc",
    version,
    about = "Statistical confidence in functional correctness: bootstrap intervals, \
             capability indices, and deployment verdicts for AI evaluation results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate results against specification limits and gate deployment
    Evaluate(EvaluateArgs),
    /// Draw a stratified, proportionally allocated sample
    Sample(SampleArgs),
    /// Capability indices and a verdict from already-computed statistics
    Capability(CapabilityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
    Both,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Per-record results, CSV or JSONL
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with = "counts",
        required_unless_present = "counts"
    )]
    records: Option<PathBuf>,

    /// Aggregate confusion counts, JSON
    #[arg(long, value_name = "FILE")]
    counts: Option<PathBuf>,

    /// Metric definitions and specification limits, JSON
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,

    /// Bootstrap seed; overrides SCFC_SEED and the spec file
    #[arg(long)]
    seed: Option<u64>,

    /// Bootstrap resample count; overrides the spec file
    #[arg(long)]
    resamples: Option<u64>,

    /// Draws per resample; defaults to the input sample size
    #[arg(long, value_name = "N")]
    resample_size: Option<usize>,

    /// Report destination; stdout when absent. With --format both this is
    /// a base path and .json/.md extensions are applied
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write each metric's bootstrap distribution as a one-column CSV
    #[arg(long, value_name = "PATH")]
    dump_distribution: Option<PathBuf>,

    /// Omit the timestamp so report bytes are reproducible
    #[arg(long)]
    no_timestamp: bool,

    /// Pass only an Excellent verdict
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SampleArgs {
    /// Candidate records, CSV or JSONL
    #[arg(long, value_name = "FILE")]
    population: PathBuf,

    /// Comma-separated stratification keys, e.g. region,type
    #[arg(long, value_delimiter = ',', value_name = "KEYS")]
    strata: Vec<String>,

    /// Sample size to draw
    #[arg(long, value_name = "N")]
    size: usize,

    /// Sampling seed; overrides SCFC_SEED
    #[arg(long)]
    seed: Option<u64>,

    /// Target proportions JSON keyed by stratum label; observed population
    /// shares when absent
    #[arg(long, value_name = "FILE")]
    proportions: Option<PathBuf>,

    /// Sample destination; stdout in the population's format when absent
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CapabilityArgs {
    /// Bootstrap distribution mean (or a published point statistic)
    #[arg(long)]
    mean: f64,

    /// Lower specification limit; requires --ci-lower
    #[arg(long, requires = "ci_lower")]
    lsl: Option<f64>,

    /// Lower confidence bound; requires --lsl
    #[arg(long, requires = "lsl")]
    ci_lower: Option<f64>,

    /// Upper specification limit; requires --ci-upper
    #[arg(long, requires = "ci_upper")]
    usl: Option<f64>,

    /// Upper confidence bound; requires --usl
    #[arg(long, requires = "usl")]
    ci_upper: Option<f64>,

    /// Pass only an Excellent verdict
    #[arg(long)]
    strict: bool,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Capability(args) => cmd_capability(args),
    };
    match result {
        Ok(status) => process::exit(status.code()),
        Err(message) => {
            eprintln!("error: {message}");
            process::exit(ExitStatus::UsageError.code());
        }
    }
}

type CliResult<T> = Result<T, String>;

/// Seed precedence: --seed, then SCFC_SEED, then the caller's default.
fn resolve_seed(flag: Option<u64>) -> CliResult<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SCFC_SEED") {
        Ok(raw) => match raw.trim().parse::<u64>() {
            Ok(seed) => Ok(Some(seed)),
            Err(_) => Err(format!(
                "SCFC_SEED must be a nonnegative integer, got `{raw}`"
            )),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(error) => Err(format!("SCFC_SEED: {error}")),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Returns whether the verdict line still needs to be echoed; a Markdown
/// report on stdout already ends with it.
fn emit_report(report: &EvaluationReport, format: Format, out: Option<&Path>) -> CliResult<bool> {
    match (format, out) {
        (Format::Json, None) => print!("{}", render_json(report)),
        (Format::Markdown, None) => {
            print!("{}", render_markdown(report));
            return Ok(false);
        }
        (Format::Both, None) => return Err("--format both requires --out".into()),
        (Format::Json, Some(path)) => write_text(path, &render_json(report))?,
        (Format::Markdown, Some(path)) => write_text(path, &render_markdown(report))?,
        (Format::Both, Some(base)) => {
            write_text(&base.with_extension("json"), &render_json(report))?;
            write_text(&base.with_extension("md"), &render_markdown(report))?;
        }
    }
    Ok(true)
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<ExitStatus> {
    let spec = parse_spec_path(&args.spec).map_err(|e| e.to_string())?;
    let options = EvaluateOptions {
        seed: resolve_seed(args.seed)?,
        resamples: args.resamples,
        resample_size: args.resample_size,
        include_timestamp: !args.no_timestamp,
        distribution_dump: args.dump_distribution.clone(),
    };

    let report = if let Some(path) = &args.records {
        let records = parse_records_path(path).map_err(|e| e.to_string())?;
        evaluate_records(&records, &spec, &options).map_err(|e| e.to_string())?
    } else {
        let path = args.counts.as_ref().expect("clap enforces records xor counts");
        let counts = parse_counts_path(path).map_err(|e| e.to_string())?;
        evaluate_counts(&counts, &spec, &options).map_err(|e| e.to_string())?
    };

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if emit_report(&report, args.format, args.out.as_deref())? {
        println!("{}", verdict_line(&report));
    }
    Ok(exit_status(report.overall_verdict, args.strict))
}

fn load_proportions(path: &Path) -> CliResult<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let object = value
        .as_object()
        .ok_or_else(|| format!("{}: expected a JSON object of label: proportion", path.display()))?;
    let mut proportions = BTreeMap::new();
    for (label, entry) in object {
        let share = entry.as_f64().ok_or_else(|| {
            format!("{}: proportion for `{label}` must be a number", path.display())
        })?;
        proportions.insert(label.clone(), share);
    }
    Ok(proportions)
}

fn cmd_sample(args: SampleArgs) -> CliResult<ExitStatus> {
    let population = parse_records_path(&args.population).map_err(|e| e.to_string())?;
    let proportions = args
        .proportions
        .as_deref()
        .map(load_proportions)
        .transpose()?;
    let seed = resolve_seed(args.seed)?.unwrap_or(0);

    let plan = plan_sample(
        &population,
        &args.strata,
        args.size,
        seed,
        proportions.as_ref(),
    )
    .map_err(|e| e.to_string())?;
    let sample = draw_sample(&population, &plan).map_err(|e| e.to_string())?;

    if plan.redistributed {
        eprintln!(
            "warning: requested proportions exceeded stratum availability; allocation was \
             capped and redistributed"
        );
    }
    if plan.total_allocated() < args.size {
        eprintln!(
            "warning: population holds only {} records; drew {} instead of {}",
            population.len(),
            plan.total_allocated(),
            args.size
        );
    }
    if sample.is_empty() {
        eprintln!("warning: empty sample; nothing to report");
    } else {
        let deviations =
            representativeness_report(&sample, &population, &args.strata).map_err(|e| e.to_string())?;
        eprintln!("representativeness (population vs sample):");
        for deviation in &deviations {
            eprintln!(
                "  {}: population {:.4}, sample {:.4}, |deviation| {:.4}",
                deviation.key.label(),
                deviation.population_proportion,
                deviation.sample_proportion,
                deviation.absolute_deviation
            );
        }
        eprintln!("  max deviation: {:.4}", max_deviation(&deviations));
    }

    let format = args
        .out
        .as_deref()
        .and_then(RecordFormat::from_path)
        .or_else(|| RecordFormat::from_path(&args.population))
        .unwrap_or(RecordFormat::Csv);
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let mut writer = std::io::BufWriter::new(file);
            render_records(&sample, format, &mut writer).map_err(|e| e.to_string())?;
            writer.flush().map_err(|e| e.to_string())?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut writer = stdout.lock();
            render_records(&sample, format, &mut writer).map_err(|e| e.to_string())?;
            writer.flush().map_err(|e| e.to_string())?;
        }
    }
    Ok(ExitStatus::Pass)
}

fn cmd_capability(args: CapabilityArgs) -> CliResult<ExitStatus> {
    let limits = match (args.lsl, args.usl) {
        (None, None) => {
            return Err(
                "provide --lsl with --ci-lower, --usl with --ci-upper, or both pairs".into(),
            )
        }
        (Some(lsl), None) => SpecificationLimits::lower(lsl),
        (None, Some(usl)) => SpecificationLimits::upper(usl),
        (Some(lsl), Some(usl)) => SpecificationLimits::band(lsl, usl),
    };
    limits.validate("capability", false).map_err(|e| e.to_string())?;

    let ci = ConfidenceInterval {
        lower: args.ci_lower.unwrap_or(args.mean),
        upper: args.ci_upper.unwrap_or(args.mean),
        level: 0.95,
    };
    let result = assess(args.mean, &ci, &limits).map_err(|e| e.to_string())?;

    let side = |index: Option<scfc::IndexValue>| match index {
        Some(value) => fmt_number(value.value),
        None => "-".to_string(),
    };
    println!("Cpl: {}", side(result.cpl));
    println!("Cpu: {}", side(result.cpu));
    println!("Cpk: {}", fmt_number(result.cpk.value));
    if result.is_degenerate() {
        eprintln!(
            "warning: zero-width interval on the governing side; the index is a signed infinity"
        );
    }
    println!(
        "SCFC verdict: {} (Cpk={})",
        result.verdict.as_str(),
        fmt_number(result.cpk.value)
    );
    Ok(exit_status(result.verdict, args.strict))
}
