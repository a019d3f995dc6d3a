use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use pdf_remediate::autotag::{auto_tag, auto_tag_with, HeuristicConfig, HeuristicDetector};
use pdf_remediate::mathtext::formula_alt_text;
use pdf_remediate::pdf::{is_valid_language_tag, parse_pdf, set_meta, write_tagged_pdf};
use pdf_remediate::scorer::{render_csv, render_table, score_corpus, score_document, CorpusColumn, TruthMap};
use pdf_remediate::session::{http, SessionStore};
use pdf_remediate::structure::repair_tree;
use pdf_remediate::tagmap::Tagmap;
use pdf_remediate::{Error, Result};

#[derive(Parser)]
#[command(name = "pdf-remediate", version, about = "Tag PDFs for accessibility and score tag accuracy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Detect regions and propose a tagmap for an untagged PDF.
    Autotag {
        input: PathBuf,
        /// Where to write the tagmap (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Heuristic detector settings (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a tagged PDF from a PDF and its tagmap.
    Apply {
        input: PathBuf,
        tagmap: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score a tagged PDF against ground truth.
    Score {
        pdf: PathBuf,
        truth: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Score several corpora listed in a manifest, one column each.
    ScoreCorpus {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Print the spoken form of a LaTeX formula.
    Mathspeak { latex: String },
    /// Repair table and list structure in an already tagged PDF.
    Repair {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Language written when the document declares none or an invalid one.
        #[arg(long, default_value = "en")]
        language: String,
    },
    /// Run the session HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        /// Directory holding session data.
        #[arg(long, default_value = "sessions")]
        data: PathBuf,
    },
}

/// `{"corpora": [{"name": .., "documents": [{"pdf": .., "truth": ..}]}]}`,
/// paths relative to the manifest.
#[derive(Deserialize)]
struct Manifest {
    corpora: Vec<ManifestCorpus>,
}

#[derive(Deserialize)]
struct ManifestCorpus {
    name: String,
    documents: Vec<ManifestDocument>,
}

#[derive(Deserialize)]
struct ManifestDocument {
    pdf: PathBuf,
    truth: PathBuf,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn print_columns(columns: &[CorpusColumn], format: Format) -> Result<()> {
    match format {
        Format::Table => print!("{}", render_table(columns)),
        Format::Csv => print!("{}", render_csv(columns)),
        Format::Json => {
            let value: serde_json::Map<String, serde_json::Value> = columns
                .iter()
                .map(|c| Ok((c.name.clone(), serde_json::to_value(&c.report)?)))
                .collect::<Result<_>>()?;
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Autotag { input, output, config } => {
            let doc = parse_pdf(&read(&input)?)?;
            let map = match config {
                Some(path) => auto_tag_with(&doc, &HeuristicDetector { config: HeuristicConfig::load(&path)? })?,
                None => auto_tag(&doc)?,
            };
            match output {
                Some(path) => write(&path, &map.to_json())?,
                None => println!("{}", String::from_utf8_lossy(&map.to_json())),
            }
        }
        Command::Apply { input, tagmap, output } => {
            let doc = parse_pdf(&read(&input)?)?;
            let map = Tagmap::from_json(&read(&tagmap)?)?;
            map.check_consistency(&doc)?;
            let tree = map.assemble_valid(&doc)?;
            write(&output, &write_tagged_pdf(&doc, &tree, &map.meta)?)?;
        }
        Command::Score { pdf, truth, format } => {
            let doc = parse_pdf(&read(&pdf)?)?;
            let truth = TruthMap::from_json(&read(&truth)?)?;
            let name = pdf.file_stem().map_or_else(|| "document".into(), |s| s.to_string_lossy().into_owned());
            print_columns(&[CorpusColumn { name, report: score_document(&doc, &truth)? }], format)?;
        }
        Command::ScoreCorpus { manifest, format } => {
            let base = manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
            let parsed: Manifest = serde_json::from_slice(&read(&manifest)?)?;
            let mut columns = Vec::new();
            for corpus in parsed.corpora {
                let pairs = corpus
                    .documents
                    .iter()
                    .map(|d| {
                        let doc = parse_pdf(&read(&base.join(&d.pdf))?)?;
                        let truth = TruthMap::from_json(&read(&base.join(&d.truth))?)?;
                        Ok((doc, truth))
                    })
                    .collect::<Result<Vec<_>>>()?;
                columns.push(CorpusColumn { name: corpus.name, report: score_corpus(&pairs)? });
            }
            print_columns(&columns, format)?;
        }
        Command::Mathspeak { latex } => println!("{}", formula_alt_text(&latex)?),
        Command::Repair { input, output, language } => {
            let doc = parse_pdf(&read(&input)?)?;
            let tree = doc
                .struct_tree
                .as_ref()
                .ok_or_else(|| Error::InvalidInput(format!("{} has no structure tree", input.display())))?;
            let repaired = repair_tree(tree);
            let lang = if is_valid_language_tag(&doc.meta.language) { doc.meta.language.clone() } else { language };
            let title = if doc.meta.title.trim().is_empty() { "Untitled document" } else { &doc.meta.title };
            let meta = set_meta(title, &doc.meta.author, &lang)?;
            write(&output, &write_tagged_pdf(&doc, &repaired, &meta)?)?;
        }
        Command::Serve { port, bind, data } => {
            let store = Arc::new(SessionStore::open(data)?);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(http::serve(store, SocketAddr::new(bind, port)))?;
        }
    }
    Ok(())
}

/// 1 for documents that fail validation, 2 for unreadable input.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidTree(_) | Error::ValidationFailed(_) | Error::StepsIncomplete { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            for v in e.violations() {
                eprintln!("  {v}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
