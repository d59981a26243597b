//! `resolve`: runs anaphora resolution over an annotated document.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use centering_core::corpus::LoadedDocument;
use centering_core::engine::{run_document, EngineConfig, RunReport, TraceLevel};

#[derive(Parser, Debug)]
#[command(name = "resolve", version, about = "Incremental anaphora resolution with centering")]
struct Args {
    /// Annotated document (one token per line).
    doc: PathBuf,
    /// Concept taxonomy; overrides the document's `#taxonomy` directive.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Category hierarchy; overrides the document's `#categories` directive.
    #[arg(long)]
    categories: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TraceLevel::Full)]
    trace: TraceLevel,
    /// Also write JSON versions of every artifact.
    #[arg(long)]
    json: bool,
    /// Directory for the artifacts; without it everything goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Process only the first N sentences.
    #[arg(long)]
    sentences: Option<usize>,
    #[arg(long, default_value_t = 32)]
    max_readings: usize,
}

const LOAD_ERROR: u8 = 1;
const ENGINE_ERROR: u8 = 2;

fn main() -> ExitCode {
    let args = Args::parse();
    let doc = match LoadedDocument::load(&args.doc, args.taxonomy.as_deref(), args.categories.as_deref()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(LOAD_ERROR);
        }
    };
    let config = EngineConfig { max_readings: args.max_readings, trace: args.trace, ..EngineConfig::default() };
    let report = match run_document(&doc, config, args.sentences) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ENGINE_ERROR);
        }
    };
    let written = match &args.out {
        Some(dir) => write_artifacts(dir, &report, args.json),
        None => {
            print_artifacts(&report, args.json);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(ENGINE_ERROR);
    }
    ExitCode::SUCCESS
}

fn artifacts(report: &RunReport) -> [(&'static str, String); 4] {
    [
        ("centering", report.centering_text()),
        ("resolution", report.resolution_text()),
        ("trace", report.trace_text()),
        ("ambiguity", report.ambiguity_text()),
    ]
}

fn json_artifacts(report: &RunReport) -> serde_json::Result<[(&'static str, String); 4]> {
    Ok([
        ("centering", serde_json::to_string_pretty(&report.rows)?),
        (
            "resolution",
            serde_json::to_string_pretty(&serde_json::json!({
                "sentences": report.sentences,
                "episodes": report.episodes,
                "deaths": report.deaths,
            }))?,
        ),
        ("trace", serde_json::to_string_pretty(&report.trace)?),
        ("ambiguity", serde_json::to_string_pretty(&report.ambiguity)?),
    ])
}

fn write_artifacts(dir: &Path, report: &RunReport, json: bool) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in artifacts(report) {
        std::fs::write(dir.join(format!("{name}.txt")), text)?;
    }
    if json {
        for (name, text) in json_artifacts(report)? {
            std::fs::write(dir.join(format!("{name}.json")), text + "\n")?;
        }
    }
    Ok(())
}

fn print_artifacts(report: &RunReport, json: bool) {
    if json {
        println!("{}", report.to_json().expect("report serializes"));
        return;
    }
    for (name, text) in artifacts(report) {
        println!("== {name}");
        print!("{text}");
    }
}
