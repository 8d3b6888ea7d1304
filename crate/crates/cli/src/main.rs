use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use saxnav_core::{
    cluster_words, encode_dataset, load_dataset, znormalize, EncodedCorpus, Format, SaxConfig,
    WordIndex, DEFAULT_MIN_FRACTION,
};
use saxnav_server::{ServiceConfig, SessionStore, DEFAULT_MAX_SERIES};

#[derive(Parser)]
#[command(name = "saxnav", version, about = "Cluster and query time series through SAX words")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a dataset and write its SAX words as JSON.
    Encode {
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        omega: usize,
        /// Dataset file (long CSV or series JSON).
        #[arg(short, long)]
        input: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// `long-csv` or `series-json`; guessed from the extension by default.
        #[arg(long)]
        format: Option<Format>,
        /// `series_id,key,value` sidecar CSV.
        #[arg(long)]
        metadata: Option<PathBuf>,
    },
    /// Cluster encoded words and write the pruned tree as JSON.
    Cluster {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Clusters must be larger than this share of the collection to be shown.
        #[arg(long, default_value_t = DEFAULT_MIN_FRACTION)]
        min_fraction: f64,
    },
    /// Print the ids of words containing a pattern match, one per line.
    Query {
        /// Letters and bracket classes, e.g. `abcba` or `a[bc]d`.
        #[arg(short, long)]
        pattern: String,
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "SAXNAV_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "SAXNAV_HOST", default_value = "127.0.0.1")]
        host: IpAddr,
        /// Write-through directory for session artifacts.
        #[arg(long, env = "SAXNAV_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
        #[arg(long, env = "SAXNAV_MAX_SERIES", default_value_t = DEFAULT_MAX_SERIES)]
        max_series: usize,
    },
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn read_corpus(path: &Path) -> Result<EncodedCorpus> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    EncodedCorpus::from_json(&text).with_context(|| format!("cannot read words from {}", path.display()))
}

fn write_json(output: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut out: Box<dyn Write> = match output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Encode {
            alpha,
            omega,
            input,
            output,
            format,
            metadata,
        } => {
            let config = SaxConfig::new(alpha, omega)?;
            let format = format.unwrap_or_else(|| Format::from_path(&input));
            let mut dataset = load_dataset(open(&input)?, format)
                .with_context(|| format!("cannot load {}", input.display()))?;
            if let Some(meta) = metadata {
                dataset
                    .attach_metadata(open(&meta)?)
                    .with_context(|| format!("cannot attach {}", meta.display()))?;
            }
            let corpus = encode_dataset(&znormalize(&dataset)?, config)?;
            write_json(output.as_deref(), &corpus.to_json())
        }
        Command::Cluster {
            input,
            output,
            min_fraction,
        } => {
            let corpus = read_corpus(&input)?;
            let (dendrogram, view) = cluster_words(&corpus.words, corpus.config.omega, min_fraction)?;
            write_json(output.as_deref(), &view.to_json(&dendrogram))
        }
        Command::Query { pattern, input } => {
            let corpus = read_corpus(&input)?;
            let ids = WordIndex::new(&corpus.words).search(&pattern)?;
            let mut out = BufWriter::new(io::stdout().lock());
            for id in ids {
                writeln!(out, "{id}")?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Serve {
            port,
            host,
            cache_dir,
            max_series,
        } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            let store = SessionStore::new(ServiceConfig {
                max_series,
                cache_dir,
                ..ServiceConfig::default()
            })?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(saxnav_server::serve(store, SocketAddr::new(host, port)))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saxnav: {e:#}");
            ExitCode::FAILURE
        }
    }
}
