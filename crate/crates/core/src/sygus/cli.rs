//! The `strsynth` command line.
//!
//! Exit codes: 0 when every problem is solved, 1 when some search ends
//! without a solution, 2 on usage, input or I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::{bench_files, seconds, solve_file, FrontendError, RunConfig, RunReport, StatsJson};
use crate::synth::{Outcome, SynthConfig};

#[derive(Debug, Parser)]
#[command(
    name = "strsynth",
    version,
    about = "Synthesize string programs from SyGuS input/output examples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem and print the solution as a define-fun.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Solve every `.sl` file in a directory and print a table.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Debug, Args)]
struct RunOpts {
    /// Per-problem time limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Largest candidate size, in AST nodes.
    #[arg(long, default_value_t = 12)]
    max_size: usize,
    /// Comma-separated abstract domains, or `none`.
    #[arg(long, default_value = "prefix,suffix,length")]
    domains: String,
    /// Output annotation, e.g. prefix:"Dr. " or len:len(name)-3. Repeatable.
    /// Replaces the file's own annotations.
    #[arg(long = "abs-out")]
    abs_out: Vec<String>,
    /// Longest string length the solver considers.
    #[arg(long)]
    max_len: Option<i64>,
    /// Also write the statistics as JSON to this file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Disable the small-term cache.
    #[arg(long)]
    no_cache: bool,
    /// Disable template inference.
    #[arg(long)]
    no_templates: bool,
    /// Also infer the prefix-extraction template.
    #[arg(long)]
    prefix_template: bool,
    /// Ignore `;; @abs-out` directives in the file and search at Top -> Top.
    #[arg(long)]
    top: bool,
}

impl RunOpts {
    fn config(&self) -> RunConfig {
        RunConfig {
            synth: SynthConfig {
                max_size: self.max_size,
                timeout: seconds(self.timeout),
                use_cache: !self.no_cache,
                use_templates: !self.no_templates,
                prefix_template: self.prefix_template,
                trace: false,
            },
            domains: self.domains.clone(),
            abs_out: self.abs_out.clone(),
            use_directives: !self.top,
            max_len: self.max_len,
        }
    }
}

#[derive(Serialize)]
struct BenchRow<'a> {
    task: &'a str,
    solution: Option<String>,
    #[serde(flatten)]
    stats: StatsJson,
}

fn outcome_word(o: &Outcome) -> &'static str {
    match o {
        Outcome::Solved(_) => "solved",
        Outcome::Timeout => "timeout",
        Outcome::Exhausted => "exhausted",
    }
}

fn write_stats(path: &Path, json: &str) -> Result<(), FrontendError> {
    std::fs::write(path, format!("{json}\n")).map_err(|source| FrontendError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn report_warnings(r: &RunReport, err: &mut dyn Write) {
    for w in &r.warnings {
        match w.pos {
            Some(p) => {
                let _ = writeln!(err, "warning: {}: {p}: {}", r.task, w.msg);
            }
            None => {
                let _ = writeln!(err, "warning: {}: {}", r.task, w.msg);
            }
        }
    }
}

fn solve(file: &Path, opts: &RunOpts, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, FrontendError> {
    let r = solve_file(file, &opts.config())?;
    report_warnings(&r, err);
    let json = serde_json::to_string(&r.json()).expect("stats serialize");
    let _ = writeln!(err, "{json}");
    if let Some(p) = &opts.stats {
        write_stats(p, &json)?;
    }
    match r.solution() {
        Some(p) => {
            let _ = writeln!(out, "{p}");
            Ok(0)
        }
        None => {
            let _ = writeln!(err, "{}: no solution ({})", r.task, outcome_word(&r.outcome));
            Ok(1)
        }
    }
}

fn bench(dir: &Path, opts: &RunOpts, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, FrontendError> {
    let config = opts.config();
    let mut reports = Vec::new();
    for f in bench_files(dir)? {
        let r = solve_file(&f, &config)?;
        report_warnings(&r, err);
        reports.push(r);
    }
    let _ = writeln!(
        out,
        "{:<16} {:>9} {:>4} {:>6} {:>10} {:>10} {:>10} {:>10} {:>9}",
        "task", "result", "size", "height", "tested", "eliminated", "generated", "cache_hits", "time_ms"
    );
    let dash = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
    for r in &reports {
        let j = r.json();
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>4} {:>6} {:>10} {:>10} {:>10} {:>10} {:>9}",
            r.task,
            outcome_word(&r.outcome),
            dash(j.size),
            dash(j.height),
            j.tested,
            j.eliminated,
            j.generated,
            j.cache_hits,
            j.time_ms
        );
    }
    let _ = writeln!(out);
    for r in &reports {
        match r.solution() {
            Some(p) => {
                let _ = writeln!(out, "; {}\n{p}", r.task);
            }
            None => {
                let _ = writeln!(out, "; {}\n; {}", r.task, outcome_word(&r.outcome));
            }
        }
    }
    let solved = reports.iter().filter(|r| r.solution().is_some()).count();
    let _ = writeln!(err, "solved {solved}/{}", reports.len());
    if let Some(p) = &opts.stats {
        let rows: Vec<BenchRow> = reports
            .iter()
            .map(|r| BenchRow {
                task: &r.task,
                solution: r.solution().map(|p| p.to_string()),
                stats: r.json(),
            })
            .collect();
        write_stats(p, &serde_json::to_string_pretty(&rows).expect("stats serialize"))?;
    }
    Ok(if solved == reports.len() { 0 } else { 1 })
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 2;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Solve { file, opts } => solve(file, opts, out, err),
        Command::Bench { dir, opts } => bench(dir, opts, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
