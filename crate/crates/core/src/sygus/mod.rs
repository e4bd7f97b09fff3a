//! SyGuS front end: reading problems, turning them into synthesis tasks
//! and running them.

pub mod annot;
pub mod cli;
pub mod parse;
pub mod print;
pub mod sexp;

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

pub use annot::{build_spec, parse_abs_out, parse_len_expr, AbsOut, AnnotError, LenExpr};
pub use parse::{
    mine_constants, parse, parse_with_warnings, summarize_grammar, ConstantPool, GrammarSummary,
    ParseError, SygusFile, SynthFun, Warning,
};
pub use print::print;

use crate::ast::Program;
use crate::domains::{domain_by_name, sort_domains, UnknownDomain};
use crate::lattice::DomainSet;
use crate::synth::{
    default_max_len, synthesize, AbsSpec, Outcome, Problem, Stats, SynthConfig, SynthError,
};

#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Annot { path: PathBuf, source: AnnotError },
    #[error(transparent)]
    Domain(#[from] UnknownDomain),
    #[error("{path}: {source}")]
    Synth { path: PathBuf, source: SynthError },
}

/// Builds the search problem for `file`, with the constants the search
/// proposes and the operators and leaves its grammar allows.
pub fn to_problem(file: &SygusFile) -> (Problem, Vec<Warning>) {
    let f = &file.synth_fun;
    let (summary, warnings) = summarize_grammar(f);
    let pool = mine_constants(file);
    let mut constants = pool.search_pool();
    for sort in &summary.any_constant {
        for v in pool.of_sort(*sort) {
            if !constants.contains(&v) {
                constants.push(v);
            }
        }
    }
    let mut problem = Problem::new(
        f.name.clone(),
        f.params.clone(),
        f.ret,
        file.examples.clone(),
        constants,
    )
    .with_ops(summary.ops);
    problem.leaf_params = summary.params;
    (problem, warnings)
}

/// Parses a comma-separated domain list; `none` or an empty string gives
/// plain enumeration.
pub fn parse_domains(list: &str) -> Result<DomainSet, UnknownDomain> {
    if list.trim().is_empty() || list.trim() == "none" {
        return Ok(Vec::new());
    }
    let mut ds = list
        .split(',')
        .map(domain_by_name)
        .collect::<Result<DomainSet, _>>()?;
    sort_domains(&mut ds);
    Ok(ds)
}

/// Everything a run needs besides the file.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub domains: String,
    /// Output annotations in `--abs-out` syntax.
    pub abs_out: Vec<String>,
    /// Use the file's `;; @abs-out` directives when `abs_out` is empty.
    pub use_directives: bool,
    pub max_len: Option<i64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            synth: SynthConfig::default(),
            domains: "prefix,suffix,length".into(),
            abs_out: Vec::new(),
            use_directives: true,
            max_len: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub task: String,
    pub outcome: Outcome,
    pub stats: Stats,
    pub warnings: Vec<Warning>,
}

impl RunReport {
    pub fn solution(&self) -> Option<&Program> {
        match &self.outcome {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn json(&self) -> StatsJson {
        let sol = self.solution();
        StatsJson {
            solved: sol.is_some(),
            time_ms: self.stats.elapsed.as_millis() as u64,
            size: sol.map(|p| p.body.size()),
            height: sol.map(|p| p.body.height()),
            tested: self.stats.tested,
            eliminated: self.stats.eliminated,
            generated: self.stats.generated,
            cache_hits: self.stats.cache_hits,
        }
    }
}

/// The statistics record written by `solve --stats` and to stderr.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatsJson {
    pub solved: bool,
    pub time_ms: u64,
    pub size: Option<usize>,
    pub height: Option<usize>,
    pub tested: u64,
    pub eliminated: u64,
    pub generated: u64,
    pub cache_hits: u64,
}

fn annotations(file: &SygusFile, config: &RunConfig) -> Vec<String> {
    if !config.abs_out.is_empty() || !config.use_directives {
        return config.abs_out.clone();
    }
    file.directives
        .iter()
        .filter(|(k, _)| k == "abs-out")
        .map(|(_, v)| v.clone())
        .collect()
}

fn prepare(
    file: &SygusFile,
    path: &Path,
    config: &RunConfig,
) -> Result<(Problem, AbsSpec, Vec<Warning>), FrontendError> {
    let annot = |source| FrontendError::Annot {
        path: path.to_path_buf(),
        source,
    };
    let (problem, mut warnings) = to_problem(file);
    for (k, _) in &file.directives {
        if k != "abs-out" {
            warnings.push(Warning {
                pos: None,
                msg: format!("ignoring unknown directive `@{k}`"),
            });
        }
    }
    let outs = annotations(file, config)
        .iter()
        .map(|s| parse_abs_out(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(annot)?;
    let domains = parse_domains(&config.domains)?;
    let max_len = config.max_len.unwrap_or_else(|| default_max_len(&problem));
    let spec = build_spec(&problem, domains, &outs, max_len).map_err(annot)?;
    Ok((problem, spec, warnings))
}

/// The problem and abstract spec a run of `file` would use.
pub fn spec_for(file: &SygusFile, config: &RunConfig) -> Result<(Problem, AbsSpec), FrontendError> {
    prepare(file, Path::new(""), config).map(|(p, s, _)| (p, s))
}

/// Solves the problem in `text`; `path` only labels errors and the task.
pub fn solve_text(text: &str, path: &Path, config: &RunConfig) -> Result<RunReport, FrontendError> {
    let (file, mut warnings) = parse_with_warnings(text).map_err(|source| FrontendError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let (problem, spec, w) = prepare(&file, path, config)?;
    warnings.extend(w);
    let result = synthesize(&problem, &spec, &config.synth).map_err(|source| FrontendError::Synth {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(RunReport {
        task: task_name(path),
        outcome: result.outcome,
        stats: result.stats,
        warnings,
    })
}

pub fn solve_file(path: &Path, config: &RunConfig) -> Result<RunReport, FrontendError> {
    let text = std::fs::read_to_string(path).map_err(|source| FrontendError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    solve_text(&text, path, config)
}

fn task_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// The `.sl` files directly inside `dir`, sorted by name.
pub fn bench_files(dir: &Path) -> Result<Vec<PathBuf>, FrontendError> {
    let io = |source| FrontendError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e == "sl") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Seconds as a duration, clamped to something representable.
pub fn seconds(s: f64) -> Duration {
    Duration::from_secs_f64(s.clamp(0.0, 1e9))
}
