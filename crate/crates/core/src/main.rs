use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use vqa_dialogue::dialogue::Transcript;
use vqa_dialogue::eval::{
    object_coverage, parse_tsv_taxonomy, parse_wordnet_nouns, render_coverage_table, render_uncertain_table,
    render_unique_table, render_yes_no_table, Coverage, MatchOptions, MetricsReport, Taxonomy, UncertaintyDetector,
};
use vqa_dialogue::pipeline::{
    manifest_path_for, read_lines, run_batch, Clock, DialogueBackends, Override, RunConfig, RunManifest,
    TranscriptWriter,
};

/// Top-level config fields that may be overridden with a plain flag.
const TOP_LEVEL_FIELDS: [&str; 3] = ["total_questions", "first_question", "max_question_retries"];

#[derive(Parser)]
#[command(
    name = "vqa-dialogue",
    version,
    about = "Caption images by question/answer dialogue and evaluate the results",
    after_help = "Config fields can be overridden with dotted flags, e.g. --questioner.temperature 0.7 \
                  or --total-questions 5. API keys are read from the environment only."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one captioning dialogue per image
    Caption {
        /// Run config (TOML, or JSON with a .json extension)
        #[arg(long)]
        config: PathBuf,
        /// File with one image reference per line
        #[arg(long)]
        images: PathBuf,
        /// Transcript JSONL output. Defaults to the config's output_path
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Zero all timestamps so identical inputs give identical bytes
        #[arg(long)]
        deterministic: bool,
    },
    /// Compute metrics over transcript files, one report per file
    Eval {
        #[arg(required = true)]
        transcripts: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Metric::All)]
        metric: Metric,
        /// JSONL of {"image_id": ..., "labels": [...]}
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Directory with WordNet data.noun and index.noun
        #[arg(long, conflicts_with = "taxonomy_tsv")]
        wordnet_dir: Option<PathBuf>,
        /// TSV taxonomy: id, lemmas, hypernym ids
        #[arg(long)]
        taxonomy_tsv: Option<PathBuf>,
        /// Only compare each word's first sense
        #[arg(long)]
        first_sense_only: bool,
        /// Count the fixed first question too
        #[arg(long)]
        include_first_question: bool,
        /// Print reports as JSON lines instead of tables
        #[arg(long)]
        json: bool,
        /// Also write the JSON reports to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a stored transcript as a dialogue
    Replay {
        file: PathBuf,
        /// Image reference or file stem; all transcripts when omitted
        #[arg(long)]
        id: Option<String>,
        /// Echo the stored JSON record
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Unique,
    Yesno,
    Uncertain,
    Coverage,
    All,
}

impl Metric {
    fn wants(self, m: Metric) -> bool {
        self == Metric::All || self == m
    }
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult = Result<ExitCode, UsageError>;

fn is_override_flag(name: &str) -> bool {
    name.contains('.') || TOP_LEVEL_FIELDS.contains(&name.replace('-', "_").as_str())
}

/// Pulls `--a.b value` / `--a.b=value` config overrides out of argv.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<Override>), UsageError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--" {
            rest.push(arg);
            rest.extend(it.by_ref());
            break;
        }
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !is_override_flag(&name) {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| UsageError(format!("--{name} needs a value")))?,
        };
        overrides.push(Override::parse(&name, &value)?);
    }
    Ok((rest, overrides))
}

fn read_image_list(path: &Path) -> Result<Vec<String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read image list {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn cmd_caption(
    config: &Path,
    images: &Path,
    out: Option<PathBuf>,
    parallelism: usize,
    deterministic: bool,
    overrides: &[Override],
) -> CliResult {
    let mut config = RunConfig::load(config, overrides)?;
    if let Some(out) = out {
        config.output_path = out;
    }
    let images = read_image_list(images)?;
    let clock = if deterministic {
        Clock::deterministic()
    } else {
        Clock::System
    };
    let started_at = clock.now();

    let writer = TranscriptWriter::create(&config.output_path)?;
    let report = run_batch(&images, &config, parallelism, clock, &writer, DialogueBackends::connect)?;
    for f in &report.failures {
        eprintln!("{}: {}", f.image_ref, f.error);
    }
    let manifest = RunManifest {
        config: config.clone(),
        started_at,
        finished_at: clock.now(),
        images: images.len(),
        completed: report.transcripts.len(),
        failures: report.failures.clone(),
    };
    manifest.write(&manifest_path_for(&config.output_path))?;
    log::info!("{} of {} dialogues completed", report.transcripts.len(), images.len());
    Ok(if report.is_success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Deserialize)]
struct LabelRecord {
    image_id: String,
    labels: Vec<String>,
}

fn load_labels(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>, UsageError> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (n, line) in read_lines(path)? {
        let rec: LabelRecord =
            serde_json::from_str(&line).map_err(|e| UsageError(format!("{}:{n}: {e}", path.display())))?;
        out.entry(rec.image_id).or_default().extend(rec.labels);
    }
    Ok(out)
}

fn image_stem(image_ref: &str) -> Option<String> {
    let tail = image_ref.rsplit(['/', '\\']).next()?;
    Path::new(tail).file_stem().map(|s| s.to_string_lossy().into_owned())
}

/// Captions keyed by image_ref and, where unambiguous, by file stem.
/// Transcripts without a caption contribute an empty one.
fn captions_by_image(transcripts: &[Transcript]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for t in transcripts {
        out.insert(t.image_ref.clone(), t.caption.clone().unwrap_or_default());
    }
    for t in transcripts {
        if let Some(stem) = image_stem(&t.image_ref) {
            out.entry(stem).or_insert_with(|| t.caption.clone().unwrap_or_default());
        }
    }
    out
}

struct CoverageInputs {
    labels: BTreeMap<String, BTreeSet<String>>,
    taxonomy: Taxonomy,
    opts: MatchOptions,
}

fn coverage_inputs(
    labels: Option<PathBuf>,
    wordnet_dir: Option<PathBuf>,
    taxonomy_tsv: Option<PathBuf>,
    first_sense_only: bool,
) -> Result<Option<CoverageInputs>, UsageError> {
    let Some(labels) = labels else { return Ok(None) };
    let taxonomy = match (wordnet_dir, taxonomy_tsv) {
        (Some(dir), _) => parse_wordnet_nouns(&dir)?,
        (None, Some(tsv)) => parse_tsv_taxonomy(&tsv)?,
        (None, None) => return Err(UsageError("--labels needs --wordnet-dir or --taxonomy-tsv".into())),
    };
    Ok(Some(CoverageInputs {
        labels: load_labels(&labels)?,
        taxonomy,
        opts: MatchOptions { first_sense_only },
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    files: Vec<PathBuf>,
    metric: Metric,
    labels: Option<PathBuf>,
    wordnet_dir: Option<PathBuf>,
    taxonomy_tsv: Option<PathBuf>,
    first_sense_only: bool,
    include_first_question: bool,
    json: bool,
    out: Option<PathBuf>,
) -> CliResult {
    let coverage = if metric.wants(Metric::Coverage) {
        let inputs = coverage_inputs(labels, wordnet_dir, taxonomy_tsv, first_sense_only)?;
        if metric == Metric::Coverage && inputs.is_none() {
            return Err(UsageError("--metric coverage needs --labels and a taxonomy".into()));
        }
        inputs
    } else {
        None
    };

    let detector = UncertaintyDetector::default();
    let mut reports = Vec::with_capacity(files.len());
    for path in &files {
        let transcripts = vqa_dialogue::pipeline::load_transcripts(path)?;
        let mut report = MetricsReport::from_transcripts(&transcripts, !include_first_question, &detector);
        if let Some(c) = &coverage {
            let covered = object_coverage(&captions_by_image(&transcripts), &c.labels, &c.taxonomy, c.opts)
                .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            report = report.with_coverage(covered);
        }
        reports.push((path.display().to_string(), report));
    }

    let json_lines: String = reports
        .iter()
        .map(|(source, r)| {
            let mut v = serde_json::to_value(r).expect("report serializes");
            v.as_object_mut()
                .expect("report is an object")
                .insert("source".into(), source.clone().into());
            format!("{v}\n")
        })
        .collect();
    if let Some(out) = &out {
        std::fs::write(out, &json_lines).map_err(|e| UsageError(format!("{}: {e}", out.display())))?;
    }

    let mut stdout = std::io::stdout().lock();
    if json {
        stdout.write_all(json_lines.as_bytes())?;
        return Ok(ExitCode::SUCCESS);
    }
    let rows: Vec<(&str, &MetricsReport)> = reports.iter().map(|(s, r)| (s.as_str(), r)).collect();
    let mut sections = Vec::new();
    if metric.wants(Metric::Unique) {
        sections.push(render_unique_table(&rows));
    }
    if metric.wants(Metric::Yesno) {
        sections.push(render_yes_no_table(&rows));
    }
    if metric.wants(Metric::Uncertain) {
        sections.push(render_uncertain_table(&rows));
    }
    if coverage.is_some() {
        let cov: Vec<(&str, Coverage)> = rows.iter().map(|(s, r)| (*s, r.coverage())).collect();
        sections.push(render_coverage_table(&cov));
    }
    writeln!(stdout, "{}", sections.join("\n").trim_end())?;
    Ok(ExitCode::SUCCESS)
}

fn render_dialogue(t: &Transcript) -> String {
    let mut out = format!("image: {}\n", t.image_ref);
    for turn in &t.turns {
        out.push_str(&format!("Question: {}\n", turn.question));
        if turn.is_answered() {
            out.push_str(&format!("Answer: {}\n", turn.answer));
        }
    }
    match t.caption.as_deref().filter(|c| !c.is_empty()) {
        Some(c) => out.push_str(&format!("caption: {c}\n")),
        None => out.push_str("caption: <none>\n"),
    }
    out
}

fn cmd_replay(file: &Path, id: Option<&str>, json: bool) -> CliResult {
    let records = read_lines(file)?;
    let mut shown = Vec::new();
    for (n, line) in records {
        let t = vqa_dialogue::pipeline::parse_line(n, &line)?;
        let selected = match id {
            None => true,
            Some(id) => t.image_ref == id || image_stem(&t.image_ref).as_deref() == Some(id),
        };
        if selected {
            shown.push(if json { format!("{line}\n") } else { render_dialogue(&t) });
        }
    }
    if shown.is_empty() {
        return Err(UsageError(match id {
            Some(id) => format!("no transcript for {id} in {}", file.display()),
            None => format!("{} has no transcripts", file.display()),
        }));
    }
    let sep = if json { "" } else { "\n" };
    print!("{}", shown.join(sep));
    Ok(ExitCode::SUCCESS)
}

fn run(args: Vec<String>) -> CliResult {
    let (args, overrides) = split_overrides(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(ExitCode::from(code));
        }
    };
    if !overrides.is_empty() && !matches!(cli.command, Command::Caption { .. }) {
        return Err(UsageError("config overrides only apply to caption".into()));
    }
    match cli.command {
        Command::Caption {
            config,
            images,
            out,
            parallelism,
            deterministic,
        } => cmd_caption(&config, &images, out, parallelism, deterministic, &overrides),
        Command::Eval {
            transcripts,
            metric,
            labels,
            wordnet_dir,
            taxonomy_tsv,
            first_sense_only,
            include_first_question,
            json,
            out,
        } => cmd_eval(
            transcripts,
            metric,
            labels,
            wordnet_dir,
            taxonomy_tsv,
            first_sense_only,
            include_first_question,
            json,
            out,
        ),
        Command::Replay { file, id, json } => cmd_replay(&file, id.as_deref(), json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(std::env::args().collect()) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
