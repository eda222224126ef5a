//! `qabias` command-line interface.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use qabias::metrics::{summarize_par, MetricsReport};
use qabias::oracle::{synthesize_records, BiasField, LexicalField, PositionalOffsets};
use qabias::report::{sentiment_ranking, top_k, GroupBy, Labels};
use qabias::score::{ingest, DatasetIndex};
use qabias::template::{
    bundled, load_probe_config, write_dataset, write_dataset_parallel, Mode, ProbeConfig,
    ProbeExample, BUNDLED_CONFIGS,
};
use qabias::SyntheticModelSpec64;

#[derive(Parser)]
#[command(
    name = "qabias",
    version,
    about = "Underspecified QA bias probes and metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render every probe example of a configuration as JSON lines.
    Generate(GenerateArgs),
    /// Check a score file against a dataset and print the ingest report.
    ValidateScores(ValidateArgs),
    /// Compute the bias metrics of one score file.
    Metrics(MetricsArgs),
    /// Score a dataset with a synthetic model of known bias.
    Synth(SynthArgs),
    /// Render rankings from metric reports.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Qa,
    MaskedLm,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Qa => Mode::Qa,
            ModeArg::MaskedLm => Mode::MaskedLm,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Configuration directory, or `bundled:<name>`.
    #[arg(long)]
    config: String,
    #[arg(long, value_enum, default_value = "qa")]
    mode: ModeArg,
    /// Output file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Stop after this many examples.
    #[arg(long)]
    limit: Option<u64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    scores: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Restrict score records to this dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comparative biases with magnitude below this count as ties in eta.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// JSON report path; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Bias towards the alphabetically first subject of every pair.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bias: f64,
    /// Bias of one subject under one attribute, `SUBJECT:ATTRIBUTE:VALUE`;
    /// repeatable and exclusive with `--bias`.
    #[arg(long, value_parser = parse_plant, conflicts_with = "bias")]
    plant: Vec<(String, String, f64)>,
    /// Score bonus of the subject mentioned first (the other loses as much).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pos: f64,
    /// Lexical bonus of the alphabetically first subject (the other loses as much).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lex: f64,
    #[arg(long, default_value_t = 0.5)]
    base: f64,
    /// Standard deviation of Gaussian score noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synthetic")]
    model_id: String,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

fn parse_plant(s: &str) -> Result<(String, String, f64), String> {
    let parts: Vec<&str> = s.rsplitn(3, ':').collect();
    match parts.as_slice() {
        [value, attribute, subject] => value
            .parse()
            .map(|v| (subject.to_string(), attribute.to_string(), v))
            .map_err(|e| format!("bad value in {s:?}: {e}")),
        _ => Err(format!("expected SUBJECT:ATTRIBUTE:VALUE, got {s:?}")),
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupByArg {
    None,
    Class,
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Highest-gamma subject/attribute rows, globally or per subject class.
    TopK {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value = "none")]
        group_by: GroupByArg,
        /// Configuration supplying subject classes and attribute categories.
        #[arg(long)]
        config: Option<String>,
        /// Show attribute categories instead of attribute ids.
        #[arg(long)]
        anonymize: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Subject ranks by gamma in each model, with mean and stddev.
    Sentiment {
        /// Metric reports, one per model.
        #[arg(long, value_delimiter = ',', required = true)]
        models: Vec<PathBuf>,
        /// Keep only the N best and N worst subjects (0 keeps all).
        #[arg(long, default_value_t = 0)]
        trim: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

fn load_config(spec: &str) -> Result<ProbeConfig> {
    match spec.strip_prefix("bundled:") {
        Some(name) => bundled(name).with_context(|| {
            format!(
                "available bundled configurations: {}",
                BUNDLED_CONFIGS.join(", ")
            )
        }),
        None => load_probe_config(spec).with_context(|| format!("loading configuration {spec}")),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn read_report(path: &Path) -> Result<MetricsReport> {
    serde_json::from_reader(open(path)?)
        .with_context(|| format!("parsing metric report {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let config = load_config(&args.config)?;
    let out = create(&args.out)?;
    let mode = args.mode.into();
    let stats = match args.limit {
        Some(_) => write_dataset(&config, mode, args.limit, out)?,
        None => write_dataset_parallel(&config, mode, out)?,
    };
    eprintln!(
        "{}: {} templates, {} subject pairs, {} base examples ({} emitted in full), {} subject slots skipped",
        config.name, stats.templates, stats.unordered_pairs, stats.base_count, stats.emitted, stats.skipped_subjects
    );
    Ok(ExitCode::SUCCESS)
}

fn validate_scores(args: ValidateArgs) -> Result<ExitCode> {
    let index = DatasetIndex::read_jsonl(args.dataset.display().to_string(), open(&args.dataset)?)?;
    let (table, report) = ingest::<f64, _>(open(&args.scores)?, Some(&index))?;
    println!("model:                        {}", table.model_id);
    println!("records total:                {}", report.records_total);
    println!("quartets complete:            {}", report.quartets_complete);
    println!(
        "partial quartets quarantined: {}",
        report.partial_quartets_quarantined
    );
    println!(
        "out-of-range records:         {}",
        report.out_of_range_rejected
    );
    println!("pair sums above 1 (warning):  {}", report.sum_violations);
    println!("exact duplicate records:      {}", report.duplicate_records);
    Ok(if report.has_rejections() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn metrics(args: MetricsArgs) -> Result<ExitCode> {
    let index = match &args.dataset {
        Some(p) => Some(DatasetIndex::read_jsonl(p.display().to_string(), open(p)?)?),
        None => None,
    };
    let (table, ingest_report) = ingest::<f64, _>(open(&args.scores)?, index.as_ref())?;
    if ingest_report.has_rejections() {
        log::warn!("ingest excluded records: {ingest_report:?}");
    }
    let report = summarize_par(&table, args.theta)?;
    let mut out = create(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    let s = &report.summary;
    eprintln!(
        "{}: {} quartets, delta {:.4}, epsilon {:.4}, mu {:.4}, eta {:.4}, avg answer prob {:.4}",
        s.model_id, s.quartets, s.delta, s.epsilon, s.mu, s.eta_abs, s.avg_answer_prob
    );
    Ok(ExitCode::SUCCESS)
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    const BATCH: usize = 100_000;
    let bias = if args.plant.is_empty() {
        BiasField::Uniform(args.bias)
    } else {
        BiasField::Potential(
            args.plant
                .iter()
                .map(|(s, a, v)| ((s.clone(), a.clone()), *v))
                .collect(),
        )
    };
    let spec = SyntheticModelSpec64 {
        model_id: args.model_id,
        base: args.base,
        bias,
        positional: PositionalOffsets::leading(args.pos),
        lexical: LexicalField::Uniform(args.lex),
        noise: args.noise,
        seed: args.seed,
    };
    let mut out = create(&args.out)?;
    let mut lines = open(&args.dataset)?.lines();
    let mut written = 0u64;
    let mut line_no = 0usize;
    loop {
        let mut batch: Vec<ProbeExample> = Vec::with_capacity(BATCH);
        for line in lines.by_ref() {
            line_no += 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            batch.push(serde_json::from_str(&line).with_context(|| {
                format!("{}:{line_no}: not a probe example", args.dataset.display())
            })?);
            if batch.len() == BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        for record in synthesize_records(&spec, &batch)? {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
            written += 1;
        }
    }
    out.flush()?;
    info!("wrote {written} score records");
    Ok(ExitCode::SUCCESS)
}

fn report(cmd: ReportCommand) -> Result<ExitCode> {
    let mut out = io::stdout().lock();
    match cmd {
        ReportCommand::TopK {
            report,
            k,
            group_by,
            config,
            anonymize,
            format,
        } => {
            let metrics = read_report(&report)?;
            let labels = match &config {
                Some(c) => Labels::from_config(&load_config(c)?),
                None if matches!(group_by, GroupByArg::Class) || anonymize => {
                    bail!("--group-by class and --anonymize need --config for subject classes and attribute categories")
                }
                None => Labels::default(),
            };
            let group_by = match group_by {
                GroupByArg::None => GroupBy::None,
                GroupByArg::Class => GroupBy::Class,
            };
            let rows = top_k(&metrics, group_by, k, &labels, anonymize)?;
            match format {
                Format::Table => write!(out, "{rows}")?,
                Format::Csv => rows.write_csv(&mut out)?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
            }
        }
        ReportCommand::Sentiment {
            models,
            trim,
            format,
        } => {
            let reports = models
                .iter()
                .map(|p| read_report(p))
                .collect::<Result<Vec<_>>>()?;
            let ranks = sentiment_ranking(&reports)?.trimmed(trim);
            match format {
                Format::Table => write!(out, "{ranks}")?,
                Format::Csv => ranks.write_csv(&mut out)?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&ranks)?)?,
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::ValidateScores(a) => validate_scores(a),
        Command::Metrics(a) => metrics(a),
        Command::Synth(a) => synth(a),
        Command::Report(c) => report(c),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
