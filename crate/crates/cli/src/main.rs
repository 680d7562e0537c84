use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use chemcensor::harness::{
    build_prompt, emit_report, query_model, read_completions, read_targets, render_document, run_benchmark,
    write_completion_line, write_files, BenchConfig, CompletionRecord, EndpointConfig, FewShotExample,
    Provenance, ReportFormat, Target, DEFAULT_API_KEY_ENV,
};
use chemcensor::kb::{build_kb, load_kb, read_corpus, save_kb, BuildOptions, DEFAULT_DOC_REF_CAP};
use chemcensor::reaction::FgLibrary;
use chemcensor::scorer::{explain, CcResult, Scorer};

#[derive(Parser)]
#[command(name = "chemcensor", version, about = "Precedent-based plausibility scoring for single-step retrosynthesis")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Functional-group library (TSV: id, name, SMARTS); defaults to the built-in library.
    #[arg(long, global = true, value_name = "TSV")]
    fg_library: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a knowledge base from an atom-mapped reaction corpus.
    BuildKb(BuildKbArgs),
    /// Score one reaction, or a file of reactions with --input.
    Score(ScoreArgs),
    /// Render few-shot prompts for a target list.
    Prompts(PromptArgs),
    /// Query a chat-completions endpoint and write a completions file.
    Generate(GenerateArgs),
    /// Score a completions file and write benchmark reports.
    Bench(BenchArgs),
    /// Re-render tables from a saved report.json.
    Report(ReportArgs),
}

#[derive(Args)]
struct BuildKbArgs {
    /// Corpus: one mapped reaction SMILES per line, optional tab-separated document reference.
    #[arg(long)]
    corpus: PathBuf,
    /// Output knowledge-base file.
    #[arg(long, short)]
    out: PathBuf,
    /// Corpus identifier recorded in the metadata (defaults to the file name).
    #[arg(long)]
    source: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DOC_REF_CAP)]
    doc_ref_cap: usize,
    /// Fixed build time in Unix seconds, for reproducible files.
    #[arg(long)]
    built_at: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordFormat {
    Json,
    Tsv,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Reaction SMILES (mapped or unmapped).
    reaction: Option<String>,
    /// Batch mode: one reaction per line (`-` for stdin).
    #[arg(long, conflicts_with = "reaction")]
    input: Option<PathBuf>,
    /// Batch output (defaults to stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: RecordFormat,
}

#[derive(Args)]
struct TargetArgs {
    /// Targets file: id and SMILES per line.
    #[arg(long)]
    targets: PathBuf,
    /// Field delimiter of the targets file: tab, comma, or a single character.
    #[arg(long, default_value = "tab")]
    delimiter: String,
}

#[derive(Args)]
struct PromptArgs {
    #[command(flatten)]
    targets: TargetArgs,
    /// Few-shot pool: reaction SMILES per line.
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSONL (defaults to stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    targets: TargetArgs,
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base URL of an OpenAI-style API (`/chat/completions` is appended).
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    model: String,
    /// Recorded model id (defaults to --model).
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long, default_value_t = 15)]
    samples: usize,
    /// Environment variable holding the API key.
    #[arg(long, default_value = DEFAULT_API_KEY_ENV)]
    api_key_env: String,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 120)]
    timeout: u64,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    /// Concurrent in-flight requests.
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    kb: PathBuf,
    #[command(flatten)]
    targets: TargetArgs,
    /// Completions JSONL.
    #[arg(long)]
    completions: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 15)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "json,tsv")]
    format: Vec<ReportFormat>,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// A report.json written by `bench`.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "tsv")]
    format: Vec<ReportFormat>,
    /// Output directory; without it the summary table goes to stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn library(path: Option<&Path>) -> Result<FgLibrary> {
    match path {
        Some(p) => FgLibrary::load(p).with_context(|| format!("loading functional-group library {}", p.display())),
        None => Ok(FgLibrary::default_library()),
    }
}

fn delimiter(spec: &str) -> Result<char> {
    match spec {
        "tab" | "\\t" => Ok('\t'),
        "comma" => Ok(','),
        s if s.chars().count() == 1 => Ok(s.chars().next().expect("one char")),
        other => bail!("unsupported delimiter '{other}'"),
    }
}

fn load_targets(args: &TargetArgs) -> Result<Vec<Target>> {
    let text = fs::read_to_string(&args.targets).with_context(|| format!("reading {}", args.targets.display()))?;
    Ok(read_targets(&text, delimiter(&args.delimiter)?)?)
}

fn load_pool(path: &Path) -> Result<Vec<FewShotExample>> {
    let records = read_corpus(path).with_context(|| format!("reading few-shot pool {}", path.display()))?;
    let pool: Vec<FewShotExample> = records.iter().filter_map(|r| FewShotExample::from_reaction(&r.reaction)).collect();
    if pool.len() < records.len() {
        log::warn!("{} of {} pool reactions could not be parsed", records.len() - pool.len(), records.len());
    }
    Ok(pool)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_build_kb(args: BuildKbArgs, lib: &FgLibrary) -> Result<()> {
    let records = read_corpus(&args.corpus).with_context(|| format!("reading corpus {}", args.corpus.display()))?;
    let source = args.source.unwrap_or_else(|| {
        args.corpus.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    });
    let opts = BuildOptions { doc_ref_cap: args.doc_ref_cap, source, built: args.built_at };
    let start = Instant::now();
    let (kb, stats) = build_kb(&records, lib, &opts);
    let secs = start.elapsed().as_secs_f64();
    save_kb(&kb, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "indexed {} of {} reactions in {secs:.2}s ({:.0}/s); skipped {} unmapped, {} invalid, {} without reaction center",
        stats.added,
        stats.records,
        stats.records as f64 / secs.max(1e-9),
        stats.unmapped,
        stats.invalid,
        stats.empty_center
    );
    for (line, msg) in stats.examples.iter().take(5) {
        eprintln!("  line {line}: {msg}");
    }
    let counts: Vec<String> = (1..=5).map(|l| format!("L{l}={}", kb.entry_count(l))).collect();
    eprintln!("entries: {}", counts.join(" "));
    Ok(())
}

fn result_record(line: Option<usize>, reaction: &str, r: &CcResult) -> serde_json::Value {
    let mut v = serde_json::to_value(r).expect("results serialize");
    v["reaction"] = json!(reaction);
    if let Some(l) = line {
        v["line"] = json!(l);
    }
    v
}

fn cmd_score(args: ScoreArgs, lib: &FgLibrary) -> Result<()> {
    let kb = load_kb(&args.kb).with_context(|| format!("loading knowledge base {}", args.kb.display()))?;
    let scorer = Scorer::new(&kb, lib)?;
    if let Some(rxn) = &args.reaction {
        let r = scorer.score(rxn);
        print!("{}", explain(&r, lib));
        println!("{}", result_record(None, rxn, &r));
        return Ok(());
    }
    let Some(input) = &args.input else { bail!("give a reaction SMILES or --input FILE") };
    let mut text = String::new();
    if input.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    }
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').next().unwrap_or("").trim()))
        .collect();
    use rayon::prelude::*;
    let results: Vec<CcResult> = lines.par_iter().map(|(_, l)| scorer.score(l)).collect();
    let mut out = output(args.output.as_deref())?;
    if matches!(args.format, RecordFormat::Tsv) {
        writeln!(out, "line\treaction\tscore\tcategory\tmatched_level\tviolating_fgs\tdetail")?;
    }
    for ((line, rxn), r) in lines.iter().zip(&results) {
        match args.format {
            RecordFormat::Json => writeln!(out, "{}", result_record(Some(*line), rxn, r))?,
            RecordFormat::Tsv => {
                let fgs: Vec<&str> = r.violating_fgs.iter().filter_map(|&i| lib.name(i)).collect();
                writeln!(
                    out,
                    "{line}\t{rxn}\t{}\t{}\t{}\t{}\t{}",
                    r.score,
                    r.category,
                    r.matched_level,
                    fgs.join(","),
                    r.detail.replace('\t', " ")
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_prompts(args: PromptArgs) -> Result<()> {
    let targets = load_targets(&args.targets)?;
    let pool = load_pool(&args.pool)?;
    let mut out = output(args.out.as_deref())?;
    for t in &targets {
        let p = build_prompt(&t.smiles, &pool, args.seed)?;
        let mut v = serde_json::to_value(&p)?;
        v["target_id"] = json!(t.id);
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let targets = load_targets(&args.targets)?;
    let pool = load_pool(&args.pool)?;
    let mut cfg = EndpointConfig::new(&args.endpoint, &args.model);
    cfg.api_key_env = args.api_key_env.clone();
    cfg.temperature = args.temperature;
    cfg.max_tokens = args.max_tokens;
    cfg.timeout = Duration::from_secs(args.timeout);
    cfg.max_retries = args.retries;
    cfg.concurrency = args.concurrency.max(1);
    let model_id = args.model_id.clone().unwrap_or_else(|| args.model.clone());
    let mut out = BufWriter::new(fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?);
    for (i, t) in targets.iter().enumerate() {
        let prompt = build_prompt(&t.smiles, &pool, args.seed)?;
        let results = query_model(&cfg, &prompt.rendered, args.samples)?;
        let failed = results.iter().filter(|r| r.text().is_none()).count();
        info!("target {}/{} {}: {} samples, {failed} failed", i + 1, targets.len(), t.id, results.len());
        let record = CompletionRecord {
            target_id: t.id.clone(),
            target_smiles: t.smiles.clone(),
            model_id: model_id.clone(),
            samples: results.iter().map(|r| r.text().map(str::to_string)).collect(),
            provenance: Some(Provenance { file: None, endpoint: Some(cfg.base_url.clone()) }),
        };
        out.write_all(write_completion_line(&record).as_bytes())?;
        out.flush()?;
    }
    Ok(())
}

fn print_summary(files: &[(String, String)]) {
    if let Some((_, summary)) = files.iter().find(|(n, _)| n.starts_with("summary.")) {
        print!("{summary}");
    }
}

fn cmd_bench(args: BenchArgs, lib: &FgLibrary) -> Result<()> {
    let kb = load_kb(&args.kb).with_context(|| format!("loading knowledge base {}", args.kb.display()))?;
    let scorer = Scorer::new(&kb, lib)?;
    let targets = load_targets(&args.targets)?;
    let text = fs::read_to_string(&args.completions).with_context(|| format!("reading {}", args.completions.display()))?;
    let completions = read_completions(&text)?;
    let config = BenchConfig { k_list: args.k.clone(), n_samples: args.samples, seed: args.seed };
    let report = run_benchmark(&targets, &completions, &scorer, &config)?;
    for issue in &report.issues {
        eprintln!("warning: {issue}");
    }
    let paths = emit_report(&report, &args.out, &args.format)?;
    let tables = chemcensor::harness::render_report(&report, &[ReportFormat::Tsv]);
    print_summary(&tables);
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.report).with_context(|| format!("reading {}", args.report.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text).context("report is not valid JSON")?;
    let files = render_document(&doc, &args.format)?;
    match &args.out {
        Some(dir) => {
            for p in write_files(&files, dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print_summary(&files),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global().context("configuring worker threads")?;
    }
    let lib_path = cli.fg_library.as_deref();
    match cli.command {
        Command::BuildKb(a) => cmd_build_kb(a, &library(lib_path)?),
        Command::Score(a) => cmd_score(a, &library(lib_path)?),
        Command::Prompts(a) => cmd_prompts(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a, &library(lib_path)?),
        Command::Report(a) => cmd_report(a),
    }
}
