use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use elosteer::analytics::{report_from_dataset, ReportOptions};
use elosteer::clock::SystemClock;
use elosteer::recommender::parse_catalog_jsonl;
use elosteer::service::{self, read_log_file, ServeConfig, Store, EVENTS_FILE};
use elosteer::sim::{run_trial, TrialConfig};
use elosteer::study::{export_dataset, write_jsonl, DatasetRow, StudyConfig};

#[derive(Parser)]
#[command(name = "elosteer", version, about = "Elo-rated practice study server and tools")]
struct Cli {
    /// TOML config file for the chosen command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Study data directory (event log, snapshot, config).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Jsonl,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<std::net::SocketAddr>,
    },
    /// Run a synthetic trial and print its event log and summary.
    Simulate {
        /// Write the event log here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the group comparison report.
    Analyze {
        /// Event log to analyse instead of the data directory's log.
        #[arg(long, conflicts_with = "dataset")]
        log: Option<PathBuf>,
        /// Exported dataset to analyse.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Welch instead of pooled-variance t-tests.
        #[arg(long)]
        welch: bool,
    },
    /// Add exercises from a JSONL catalog file to the study.
    Ingest { catalog: PathBuf },
    /// Write the shareable dataset (rating changes and questionnaires).
    ExportDataset {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn data_dir(cli: &Cli) -> Result<PathBuf> {
    cli.data_dir
        .clone()
        .context("--data-dir is required for this command")
}

fn study_config(cli: &Cli) -> Result<StudyConfig> {
    let mut cfg: ServeConfig = read_toml(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.study.seed = seed;
    }
    Ok(cfg.study)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    Ok(rows)
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Serve { bind } => {
            let mut cfg: ServeConfig = read_toml(cli.config.as_deref())?;
            if let Some(seed) = cli.seed {
                cfg.study.seed = seed;
            }
            if let Some(dir) = &cli.data_dir {
                cfg.service.data_dir = dir.clone();
            }
            if let Some(b) = bind {
                cfg.service.bind = *b;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(cfg))?;
        }
        Command::Simulate { out } => {
            let mut cfg: TrialConfig = read_toml(cli.config.as_deref())?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let outcome = run_trial(&cfg)?;
            let mut w = output(out.as_deref())?;
            write_jsonl(&outcome.log, &mut w)?;
            w.flush()?;
            drop(w);
            // With the log on stdout the summary goes to stderr.
            let mut summary: Box<dyn Write> = if out.is_some() {
                Box::new(io::stdout())
            } else {
                Box::new(io::stderr())
            };
            writeln!(
                summary,
                "{:<16}{:>9}{:>10}{:>10}{:>10}{:>10}{:>10}",
                "group", "learners", "start", "final", "total", "attempts", "steering"
            )?;
            for g in &outcome.growth.groups {
                writeln!(
                    summary,
                    "{:<16}{:>9}{:>10.1}{:>10.1}{:>10.1}{:>10.1}{:>10.1}",
                    g.group.to_string(),
                    g.learners,
                    g.mean_start,
                    g.mean_last,
                    g.mean_total_change,
                    g.mean_attempt_change,
                    g.mean_steer_change
                )?;
            }
        }
        Command::Analyze {
            log,
            dataset,
            format,
            welch,
        } => {
            let rows = match (log, dataset) {
                (_, Some(d)) => read_dataset(d)?,
                (Some(l), None) => export_dataset(&read_log_file(l)?)?,
                (None, None) => export_dataset(&read_log_file(&data_dir(&cli)?.join(EVENTS_FILE))?)?,
            };
            let report = report_from_dataset(&rows, ReportOptions { welch: *welch })?;
            let mut w = output(None)?;
            match format {
                Format::Text => write!(w, "{}", report.to_text())?,
                Format::Jsonl => write!(w, "{}", report.to_jsonl())?,
                Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?,
            }
            w.flush()?;
        }
        Command::Ingest { catalog } => {
            let dir = data_dir(&cli)?;
            let text = fs::read_to_string(catalog)
                .with_context(|| format!("reading {}", catalog.display()))?;
            let entries = parse_catalog_jsonl(&text)?;
            let (mut store, mut study) = Store::open(&dir, study_config(&cli)?, Arc::new(SystemClock), 0)?;
            let n = study.ingest_catalog(entries)?;
            store.persist(&study)?;
            println!("ingested {n} exercises; catalog now has {}", study.catalog().len());
        }
        Command::ExportDataset { out } => {
            let dir = data_dir(&cli)?;
            let records = read_log_file(&dir.join(EVENTS_FILE))?;
            if records.is_empty() && !dir.join(EVENTS_FILE).exists() {
                bail!("no event log in {}", dir.display());
            }
            let rows = export_dataset(&records)?;
            let mut w = output(out.as_deref())?;
            for r in &rows {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
