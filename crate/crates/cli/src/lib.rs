//! Command-line experiments: configuration, subcommands and artifact output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{Experiment, NAIVE_SAMPLE_CAP};
use crate::error::CliError;
use crate::output::{header, to_json, write_file, Cell, CsvTable, TOOL, VERSION};

#[derive(Debug, Parser)]
#[command(name = "hazard-twist", version, about = "Tail probabilities of sums of heavy-tailed variables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides the config output directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Permit naive runs above 10^6 samples.
    #[arg(long, global = true)]
    pub allow_large: bool,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Twist parameter and hazard-sum minimiser per threshold.
    Solve,
    /// Naive and twisted tail estimates per threshold.
    Ccdf,
    /// Hit counts of both estimators per threshold.
    FreqTable,
    /// Relative errors and the efficiency indicator.
    Efficiency,
    /// Second moment against its bound over a grid of twists.
    ThetaSweep,
    /// Both estimators against an exact or quadrature reference.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Ccdf => "ccdf",
            Command::FreqTable => "freq-table",
            Command::Efficiency => "efficiency",
            Command::ThetaSweep => "theta-sweep",
            Command::Validate => "validate",
        }
    }

    fn runs_naive(self) -> bool {
        matches!(self, Command::Ccdf | Command::FreqTable | Command::Validate)
    }
}

#[derive(Serialize)]
struct RunReport<'a, T: Serialize> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config_sha256: &'a str,
    seed: u64,
    theta_rule: String,
    duration_seconds: f64,
    result: T,
}

/// Files written by one invocation.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub table: String,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(a) => {
            print!("{}", a.table);
            eprintln!("wrote {} and {}", a.csv.display(), a.report.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Artifacts, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let exp = Experiment::load(path)?;
    if cli.command.runs_naive() && exp.config.samples_naive > NAIVE_SAMPLE_CAP && !cli.allow_large {
        return Err(CliError::Config(format!(
            "samples_naive = {} exceeds {NAIVE_SAMPLE_CAP}; pass --allow-large",
            exp.config.samples_naive
        )));
    }
    let seed = cli.seed.unwrap_or(exp.config.seed);
    let out_dir = cli
        .output
        .clone()
        .or_else(|| exp.config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start workers: {e}")))?;
    pool.install(|| execute(cli.command, &exp, seed, &out_dir))
}

fn execute(command: Command, exp: &Experiment, seed: u64, out_dir: &std::path::Path) -> Result<Artifacts, CliError> {
    let start = Instant::now();
    let (mut table, result, failure) = match command {
        Command::Solve => {
            let rows = commands::solve(exp)?;
            for r in rows.iter().filter(|r| r.solution.clamped) {
                eprintln!(
                    "warning: threshold {} dB: hazard-sum minimum {} <= {}, twist clamped to 0",
                    r.gamma_db,
                    r.solution.objective_a,
                    exp.components.len()
                );
            }
            (solve_table(exp, &rows), serde_json::to_value(&rows), None)
        }
        Command::Ccdf => {
            let rows = commands::ccdf(exp, seed)?;
            let mut t = CsvTable::new(&["gamma_db", "alpha_naive", "alpha_is", "se_naive", "se_is"]);
            for r in &rows {
                t.push(vec![
                    r.gamma_db.into(),
                    r.naive.alpha_hat.into(),
                    r.twisted.alpha_hat.into(),
                    r.naive.std_error.into(),
                    r.twisted.std_error.into(),
                ]);
            }
            (t, serde_json::to_value(&rows), None)
        }
        Command::FreqTable => {
            let rows = commands::freq_table(exp, seed)?;
            let mut t = CsvTable::new(&["gamma_db", "alpha_is", "freq_is", "freq_naive"]);
            for r in &rows {
                t.push(vec![
                    r.gamma_db.into(),
                    r.twisted.alpha_hat.into(),
                    r.twisted.hit_frequency.into(),
                    r.naive.hit_frequency.into(),
                ]);
            }
            (t, serde_json::to_value(&rows), None)
        }
        Command::Efficiency => {
            let rep = commands::efficiency(exp, seed)?;
            for (g, why) in &rep.skipped {
                eprintln!("warning: threshold {g} dB skipped: {why}");
            }
            let mut t = CsvTable::new(&["gamma_db", "rel_err_naive", "rel_err_is", "k"]);
            t.meta("samples_naive", exp.config.samples_naive);
            for r in &rep.rows {
                t.push(vec![r.gamma_db.into(), r.rel_err_naive.into(), r.rel_err_is.into(), r.k.into()]);
            }
            (t, serde_json::to_value(&rep), None)
        }
        Command::ThetaSweep => {
            let blocks = commands::theta_sweep(exp, seed)?;
            let mut t = CsvTable::new(&[
                "gamma_db",
                "theta",
                "second_moment_empirical",
                "second_moment_bound",
                "std_error",
            ]);
            for b in &blocks {
                t.meta(format!("theta_star[{:.12e}]", b.gamma_db), format!("{:.12e}", b.theta_star));
                for r in &b.rows {
                    t.push(vec![
                        b.gamma_db.into(),
                        r.theta.into(),
                        r.second_moment_empirical.into(),
                        r.second_moment_bound.into(),
                        r.std_error.into(),
                    ]);
                }
            }
            (t, serde_json::to_value(&blocks), None)
        }
        Command::Validate => {
            let rows = commands::validate(exp, seed)?;
            let mut t = CsvTable::new(&[
                "gamma_db",
                "oracle",
                "alpha_is",
                "se_is",
                "alpha_naive",
                "se_naive",
                "is_check",
                "naive_check",
            ]);
            for r in &rows {
                t.push(vec![
                    r.gamma_db.into(),
                    r.oracle.into(),
                    r.twisted.alpha_hat.into(),
                    r.twisted.std_error.into(),
                    r.naive.alpha_hat.into(),
                    r.naive_std_error.into(),
                    r.twisted_pass.into(),
                    r.naive_pass.into(),
                ]);
            }
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !(r.twisted_pass && r.naive_pass))
                .map(|r| format!("{} dB", r.gamma_db))
                .collect();
            let failure = (!failed.is_empty())
                .then(|| CliError::ValidationFailed(format!("outside 3 standard errors at {}", failed.join(", "))));
            (t, serde_json::to_value(&rows), failure)
        }
    };
    let result = result.map_err(|e| CliError::Output(e.to_string()))?;
    let name = command.name();
    header(&mut table, name, &exp.config_hash, seed);
    let rendered = table.render();
    let csv = write_file(out_dir, &format!("{name}.csv"), &rendered)?;
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: name,
        config_sha256: &exp.config_hash,
        seed,
        theta_rule: commands::rule_name(exp)?,
        duration_seconds: start.elapsed().as_secs_f64(),
        result,
    };
    let report = write_file(out_dir, &format!("{name}.json"), &to_json(&report)?)?;
    match failure {
        Some(e) => {
            print!("{rendered}");
            Err(e)
        }
        None => Ok(Artifacts {
            csv,
            report,
            table: rendered,
        }),
    }
}

fn solve_table(exp: &Experiment, rows: &[commands::SolveRow]) -> CsvTable {
    let n = exp.components.len();
    let mut cols: Vec<String> = ["gamma_db", "objective_a", "theta_star", "second_moment_bound", "dominant_index", "clamped"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=n).map(|i| format!("x_star_{i}")));
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = CsvTable::new(&cols);
    for r in rows {
        let s = &r.solution;
        let mut row = vec![
            r.gamma_db.into(),
            s.objective_a.into(),
            s.theta_star.into(),
            s.second_moment_bound.into(),
            Cell::Int(s.dominant_index as u64),
            Cell::Text(s.clamped.to_string()),
        ];
        row.extend(s.x_star.iter().map(|&x| Cell::Float(x)));
        t.push(row);
    }
    t
}
