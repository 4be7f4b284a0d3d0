//! `qasida`: command-line front end.
//!
//! `analyze` goes through the service request handler, in-process by default
//! or over HTTP with `--server`, so its JSON matches the service byte for
//! byte. The corpus and evaluation commands run locally.

mod render;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qasida_core::analysis::AnalyzeRequest;
use qasida_core::corpus::{
    self, augment_swap, build_vocab, clean, dedupe_against, filter_by_coverage, load_jsonl, write_jsonl, CorpusError,
    LoadMode, Poem, SpecialTokenVocab,
};
use qasida_core::meterdb::{MeterDbError, PatternDb};
use qasida_core::metrics::{der_wer_counts, rhythm_eval, DiacritizationCounts, MetricsError};
use qasida_core::normalize::normalize_unicode;
use qasida_core::scansion::{ScanOptions, DEFAULT_MIN_COVERAGE};
use qasida_service::{api, Reply};

#[derive(Parser, Debug)]
#[command(name = "qasida", version, about = "Arabic prosody: scansion, meter detection, corpus tooling")]
struct Cli {
    /// Meter database (JSON); the built-in seed when absent.
    #[arg(long, global = true, env = "QASIDA_DB")]
    db: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan a poem and detect its meter. One bait per line, hemistiches split by '#'.
    Analyze(AnalyzeArgs),
    /// Drop poems that fail the cleaning rules; prints the removal report.
    Clean {
        input: PathBuf,
        output: PathBuf,
        /// Also drop poems whose mean diacritic coverage is below this.
        #[arg(long)]
        min_coverage: Option<f64>,
        /// Remove poems sharing a hemistich with this held-out corpus.
        #[arg(long)]
        dedupe_against: Option<PathBuf>,
        /// Keep at most this many poems per era bucket; poems without a known era are dropped.
        #[arg(long)]
        cap_era: Option<usize>,
        /// Cut poems to this many baits.
        #[arg(long)]
        max_baits: Option<usize>,
        /// Skip unparseable lines instead of failing.
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Swap sadr and ajuz of each bait with probability 0.5.
    Augment {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Encode poems into the special-token prompt format.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// Check meter labels against the classifier and fill missing ones.
        #[arg(long)]
        check_meter: bool,
    },
    /// Build the character vocabulary of a corpus.
    Vocab { input: PathBuf, output: PathBuf },
    /// DER/WER of predicted against gold diacritization, one verse per line.
    EvalDer {
        gold: PathBuf,
        pred: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rhythm accuracy of a labelled corpus against the rule-based classifier.
    EvalRhythm {
        input: PathBuf,
        #[arg(long)]
        json: bool,
        /// Write the confusion matrix as CSV.
        #[arg(long)]
        confusion: Option<PathBuf>,
        #[arg(long, env = "QASIDA_MIN_COVERAGE", default_value_t = DEFAULT_MIN_COVERAGE)]
        min_coverage: f64,
    },
    /// Validate a meter database file.
    DbValidate { meters: PathBuf },
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Poem file, or '-' for stdin.
    input: String,
    /// Print the service JSON.
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Print a readable report (default).
    #[arg(long)]
    text: bool,
    /// Restrict matching to this meter index.
    #[arg(long)]
    meter: Option<usize>,
    #[arg(long, env = "QASIDA_MIN_COVERAGE")]
    min_coverage: Option<f64>,
    /// Send the request to a running service instead of analysing in-process.
    #[arg(long, env = "QASIDA_SERVER")]
    server: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<MeterDbError> for Failure {
    fn from(e: MeterDbError) -> Self {
        match e {
            MeterDbError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn load_db(path: Option<&Path>) -> Result<PatternDb, Failure> {
    match path {
        Some(p) => PatternDb::load(p).map_err(|e| match e {
            MeterDbError::Io(e) => Failure::Io(format!("{}: {e}", p.display())),
            e => Failure::Domain(format!("{}: {e}", p.display())),
        }),
        None => Ok(PatternDb::seed()),
    }
}

fn load_poems(path: &Path, mode: LoadMode) -> Result<Vec<Poem>, Failure> {
    let loaded = load_jsonl(path, mode).map_err(|e| match e {
        CorpusError::Io(e) => Failure::Io(format!("{}: {e}", path.display())),
        e => Failure::Domain(format!("{}: {e}", path.display())),
    })?;
    for s in &loaded.skipped {
        eprintln!("warning: {}: skipped line {}: {}", path.display(), s.line, s.message);
    }
    Ok(loaded.poems)
}

fn check_coverage(c: f64) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&c) {
        Ok(c)
    } else {
        Err(Failure::Usage(format!("coverage threshold {c} is outside [0, 1]")))
    }
}

fn read_input(input: &str) -> Result<String, Failure> {
    if input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(io_err(Path::new(input)))
    }
}

fn analyze(db: Option<&Path>, args: AnalyzeArgs) -> Result<(), Failure> {
    let text = read_input(&args.input)?;
    let req = AnalyzeRequest { text, meter_hint: args.meter, min_coverage: args.min_coverage };
    let reply = match &args.server {
        Some(url) => {
            let client = qasida_client::Client::new(url.clone());
            let rt = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .map_err(|e| Failure::Io(e.to_string()))?;
            let resp = rt.block_on(client.analyze(&req)).map_err(|e| Failure::Io(e.to_string()))?;
            Reply { status: resp.status, body: resp.body }
        }
        None => api::analyze_request(&load_db(db)?, &ScanOptions::default(), &req),
    };
    let outcome = render::reply_outcome(&reply);
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", reply.body).map_err(|e| Failure::Io(e.to_string()))?;
    } else if let Some(analysis) = &outcome.analysis {
        out.write_all(render::text_report(analysis).as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
    }
    if !args.json && outcome.error.is_none() {
        if let Some(analysis) = &outcome.analysis {
            for w in &analysis.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    match outcome.error {
        None => Ok(()),
        Some(e) => Err(Failure::Domain(format!("{}: {}", e.kind, e.message))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let db_path = cli.db.as_deref();
    match cli.command {
        Command::Analyze(args) => analyze(db_path, args),
        Command::Clean { input, output, min_coverage, dedupe_against: held_out, cap_era, max_baits, skip_invalid } => {
            let mode = if skip_invalid { LoadMode::SkipInvalid } else { LoadMode::Strict };
            let (mut kept, report) = clean(load_poems(&input, mode)?);
            if let Some(c) = min_coverage {
                kept = filter_by_coverage(kept, check_coverage(c)?);
            }
            if let Some(path) = held_out {
                kept = dedupe_against(kept, &load_poems(&path, LoadMode::Strict)?);
            }
            if let Some(n) = max_baits {
                kept = corpus::truncate_poems(kept, n);
            }
            if let Some(n) = cap_era {
                kept = corpus::cap_classes(kept, n, corpus::era_class);
            }
            write_jsonl(&kept, &output)?;
            let summary = serde_json::json!({ "report": report, "written": kept.len() });
            println!("{summary}");
            Ok(())
        }
        Command::Augment { input, output, seed } => {
            let poems = load_poems(&input, LoadMode::Strict)?;
            let lines: Vec<String> = poems.iter().flat_map(Poem::bait_lines).collect();
            let mut swapped = augment_swap(&lines, seed)?.into_iter();
            let out: Vec<Poem> = poems
                .into_iter()
                .map(|p| {
                    let baits: Vec<(String, String)> = swapped
                        .by_ref()
                        .take(p.verses.len() / 2)
                        .map(|l| {
                            let (a, b) = l.split_once('#').unwrap_or((l.as_str(), ""));
                            (a.to_string(), b.to_string())
                        })
                        .collect();
                    Poem { verses: Poem::from_baits(baits).verses, ..p }
                })
                .collect();
            write_jsonl(&out, &output)?;
            Ok(())
        }
        Command::Encode { input, output, vocab, check_meter } => {
            let vocab = SpecialTokenVocab::read(&vocab).map_err(|e| match e {
                CorpusError::Io(e) => Failure::Io(format!("{}: {e}", vocab.display())),
                e => Failure::Domain(format!("{}: {e}", vocab.display())),
            })?;
            let db = if check_meter { Some(load_db(db_path)?) } else { None };
            let poems = load_poems(&input, LoadMode::Strict)?;
            let records = poems
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    corpus::encode(p, &vocab, db.as_ref()).map_err(|e| Failure::Domain(format!("poem {}: {e}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            corpus::write_encoded_corpus(&output, &records)?;
            Ok(())
        }
        Command::Vocab { input, output } => {
            let vocab = build_vocab(&load_poems(&input, LoadMode::Strict)?);
            vocab.write(&output)?;
            println!("{} tokens ({} special, {} characters)", vocab.len(), vocab.specials().len(), vocab.chars().len());
            Ok(())
        }
        Command::EvalDer { gold, pred, json } => {
            let g = fs::read_to_string(&gold).map_err(io_err(&gold))?;
            let p = fs::read_to_string(&pred).map_err(io_err(&pred))?;
            let (g, p): (Vec<&str>, Vec<&str>) = (g.lines().collect(), p.lines().collect());
            if g.len() != p.len() {
                return Err(MetricsError::LengthMismatch { golds: g.len(), preds: p.len() }.into());
            }
            let mut counts = DiacritizationCounts::default();
            for (n, (gl, pl)) in g.iter().zip(&p).enumerate().filter(|(_, (gl, _))| !gl.trim().is_empty()) {
                let norm = |s: &str| normalize_unicode(s).map_err(|e| Failure::Domain(format!("line {}: {e}", n + 1)));
                counts += der_wer_counts(&norm(gl)?, &norm(pl)?)
                    .map_err(|e| Failure::Domain(format!("line {}: {e}", n + 1)))?;
            }
            let s = counts.score();
            if json {
                println!("{}", serde_json::json!({ "score": s, "counts": counts }));
            } else {
                println!("DER  {:.2}\nWER  {:.2}\nDER* {:.2}\nWER* {:.2}", s.der, s.wer, s.der_star, s.wer_star);
            }
            Ok(())
        }
        Command::EvalRhythm { input, json, confusion, min_coverage } => {
            let db = load_db(db_path)?;
            let opts = ScanOptions { min_coverage: check_coverage(min_coverage)?, ..Default::default() };
            let labelled = load_poems(&input, LoadMode::Strict)?
                .into_iter()
                .enumerate()
                .map(|(i, p)| match p.meter {
                    Some(m) if (0..db.templates().len() as i64).contains(&m) => Ok((m as usize, p)),
                    Some(m) => {
                        Err(Failure::Domain(format!("poem {}: meter label {m} is not one of the meters", i + 1)))
                    }
                    None => Err(Failure::Domain(format!("poem {}: no meter label", i + 1))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = rhythm_eval(&labelled, &db, &opts)?;
            if let Some(path) = confusion {
                let file = fs::File::create(&path).map_err(io_err(&path))?;
                report.confusion.write_csv(file)?;
            }
            if json {
                println!("{}", serde_json::to_string(&report).map_err(|e| Failure::Domain(e.to_string()))?);
            } else {
                println!(
                    "poems    {}\nfailed   {}\naccuracy {:.2}\ntop3     {:.2}\ntop5     {:.2}",
                    report.total, report.failed, report.accuracy, report.top3, report.top5
                );
            }
            Ok(())
        }
        Command::DbValidate { meters } => {
            let db = load_db(Some(&meters))?;
            for t in db.templates() {
                println!("{:>2} {:<10} {:>6} variants", t.index, t.name_translit, t.variant_count());
            }
            println!("checksum {}", db.checksum());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
