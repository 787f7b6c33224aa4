//! `scha`: batch tools for `.scha.json` analyses.
//!
//! Exit codes: 0 on success, 1 when an analysis is well-formed but fails
//! validation (or cannot be reduced), 2 for parse, usage and I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use scha_core::graph::{build_graph, export_graph, GraphConfig, GraphFormat};
use scha_core::reduction::{all_prolongations, cluster_stack, export_kirlin_text, ClusterOptions};
use scha_core::render::{derive_render_model, render_svg};
use scha_core::stats::CorpusStats;
use scha_core::validate::Finding;
use scha_core::{format, validate, Analysis};

#[derive(Debug, Parser)]
#[command(name = "scha", version, about = "Validate, reduce, graph, count and render Schenkerian analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a file; findings go to stderr, one per line.
    Validate {
        file: PathBuf,
        /// Let an outer voice without survivors fold into the other outer voice.
        #[arg(long)]
        lenient: bool,
    },
    /// Write one clustering matrix per layer.
    Clusters {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
        format: MatrixFormat,
        /// Also write the product of layers I..J.
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        compose: Option<Vec<usize>>,
        #[arg(long)]
        lenient: bool,
    },
    /// Print the prolongations implied by the depths.
    Prolongations {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ProlongationFormat::Kirlin)]
        format: ProlongationFormat,
    },
    /// Print the typed score graph.
    Graph {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphOutput::Edgelist)]
        format: GraphOutput,
        /// Signed semitone intervals that create linear edges, e.g. -2,-1,1,2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        linear_intervals: Option<Vec<i32>>,
        /// Maximum verticality distance of a linear edge.
        #[arg(long)]
        window: Option<usize>,
        /// Only connect notes of the same voice by linear edges.
        #[arg(long)]
        linear_same_voice: bool,
    },
    /// Corpus statistics over every `*.scha.json` below DIR.
    Stats {
        dir: PathBuf,
        /// Output prefix; writes PREFIX.csv and, with --histograms, one CSV per voice and depth.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        histograms: bool,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write an SVG rendering.
    Render {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a directory of analyses over HTTP on 127.0.0.1.
    Serve {
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Browser origin allowed to call the API.
        #[arg(long)]
        cors: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProlongationFormat {
    Kirlin,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphOutput {
    Edgelist,
    Dot,
}

/// Why a command stopped early, mapped onto the exit code.
enum Failure {
    /// Already reported on stderr; exit 1.
    Invalid,
    /// Already reported on stderr; exit 2.
    Unreadable,
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(1),
        Err(Failure::Unreadable) => ExitCode::from(2),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { file, lenient } => {
            let a = load(&file)?;
            let report = validate(&a, lenient);
            for finding in &report.findings {
                eprintln!("{finding}");
            }
            if report.has_errors() {
                return Err(Failure::Invalid);
            }
        }
        Command::Clusters {
            file,
            out,
            format,
            compose,
            lenient,
        } => clusters(&file, &out, format, compose, lenient)?,
        Command::Prolongations { file, format } => {
            let a = load(&file)?;
            match format {
                ProlongationFormat::Kirlin => print!("{}", export_kirlin_text(&a)),
                ProlongationFormat::Json => {
                    let json = serde_json_pretty(&all_prolongations(&a))?;
                    println!("{json}");
                }
            }
        }
        Command::Graph {
            file,
            format,
            linear_intervals,
            window,
            linear_same_voice,
        } => {
            let a = load(&file)?;
            let mut cfg = GraphConfig::default();
            if let Some(intervals) = linear_intervals {
                cfg.linear_intervals = intervals.into_iter().collect();
            }
            if let Some(window) = window {
                cfg.linear_window = window;
            }
            cfg.linear_same_voice = linear_same_voice;
            let format = match format {
                GraphOutput::Edgelist => GraphFormat::EdgelistJson,
                GraphOutput::Dot => GraphFormat::Dot,
            };
            let text = export_graph(&build_graph(&a, &cfg), format);
            if text.ends_with('\n') {
                print!("{text}");
            } else {
                println!("{text}");
            }
        }
        Command::Stats {
            dir,
            out,
            histograms,
            jobs,
        } => stats(&dir, &out, histograms, jobs)?,
        Command::Render { file, out } => {
            let a = load(&file)?;
            write(&out, &render_svg(&derive_render_model(&a)))?;
        }
        Command::Serve { root, port, cors } => {
            let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
            runtime
                .block_on(scha_service::serve(scha_service::ServeConfig { root, port, cors }))
                .context("serving")?;
        }
    }
    Ok(())
}

fn serde_json_pretty<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn parse_file(path: &Path) -> Result<Analysis, Finding> {
    let text = fs::read_to_string(path)
        .map_err(|e| Finding::error("E_IO", path.display().to_string(), e.to_string()))?;
    format::parse(&text).map_err(|e| Finding::error(e.code(), e.location(), e.message()))
}

/// Reads and parses a file, reporting failures as a finding line.
fn load(path: &Path) -> Result<Analysis, Failure> {
    parse_file(path).map_err(|finding| {
        eprintln!("{finding}");
        Failure::Unreadable
    })
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn clusters(
    file: &Path,
    out: &Path,
    format: MatrixFormat,
    compose: Option<Vec<usize>>,
    lenient: bool,
) -> Outcome {
    let a = load(file)?;
    let stack = match cluster_stack(&a, ClusterOptions { lenient }) {
        Ok(stack) => stack,
        Err(e) => {
            eprintln!("{}", Finding::error(e.code(), "$", e.to_string()));
            return Err(Failure::Invalid);
        }
    };
    let composed = match compose.as_deref() {
        Some(&[i, j]) => Some((i, j, stack.compose(i, j).map_err(anyhow::Error::from)?)),
        _ => None,
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match format {
        MatrixFormat::Csv => {
            for (l, layer) in stack.layers.iter().enumerate() {
                write(&out.join(format!("S{l}.csv")), &layer.matrix.to_csv())?;
            }
            if let Some((i, j, m)) = composed {
                write(&out.join(format!("S_{i}_to_{j}.csv")), &m.matrix.to_csv())?;
            }
        }
        MatrixFormat::Json => {
            write(&out.join("layers.json"), &format!("{}\n", serde_json_pretty(&stack.to_json())?))?;
            if let Some((i, j, m)) = composed {
                write(
                    &out.join(format!("S_{i}_to_{j}.json")),
                    &format!("{}\n", serde_json_pretty(&m.to_json())?),
                )?;
            }
        }
    }
    Ok(())
}

fn corpus_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("reading {}", dir.display()))?;
        let is_analysis = entry.file_name().to_str().is_some_and(|n| n.ends_with(".scha.json"));
        if entry.file_type().is_file() && is_analysis {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

/// Unreadable files are reported and skipped; the outputs cover the rest and
/// the exit code is 1.
fn stats(dir: &Path, out: &Path, histograms: bool, jobs: Option<usize>) -> Outcome {
    let files = corpus_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("starting worker threads")?;
    let results: Vec<Result<CorpusStats, Finding>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                parse_file(path).map(|a| CorpusStats::of(&a)).map_err(|mut f| {
                    f.location = format!("{}:{}", path.display(), f.location);
                    f
                })
            })
            .collect()
    });

    let mut total = CorpusStats::default();
    let mut skipped = 0;
    for result in results {
        match result {
            Ok(s) => total = total.merge(s),
            Err(finding) => {
                eprintln!("{finding}");
                skipped += 1;
            }
        }
    }

    let prefixed = |suffix: &str| {
        let mut name = out.as_os_str().to_owned();
        name.push(suffix);
        PathBuf::from(name)
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    write(&prefixed(".csv"), &total.summary_csv())?;
    if histograms {
        for (voice, depth, csv) in total.histogram_csvs() {
            write(&prefixed(&format!("_intervals_{}_d{depth}.csv", voice.name())), &csv)?;
        }
    }
    if skipped > 0 {
        eprintln!("{skipped} of {} files skipped", files.len());
        return Err(Failure::Invalid);
    }
    Ok(())
}
