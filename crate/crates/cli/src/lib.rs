//! `grtl`: verification suites, parameter sweeps, corpus export, Eulerian
//! reductions and report merging.
//!
//! Exit codes: 0 when every check passed, 1 when a check failed, 2 on a
//! usage or configuration error (nothing is written in that case).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

mod gen;
mod reduce;
mod report;
mod svg;
mod sweep;
mod verify;

pub use verify::trial_graph;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "GRTL_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "grtl",
    version,
    about = "Constructed graph transformers checked against oracles"
)]
pub struct Cli {
    /// Worker threads for trial fan-out (default: all cores). Output does
    /// not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a construction on random or given inputs and compare with its oracle.
    #[command(after_help = verify::HELP)]
    Verify(verify::VerifyArgs),
    /// Measure exactness or success rate against a parameter; writes CSV.
    #[command(after_help = sweep::HELP)]
    Sweep(sweep::SweepArgs),
    /// Generate a labelled graph corpus, tokenize it and export it.
    #[command(after_help = gen::HELP)]
    Gen(gen::GenArgs),
    /// Reduce a union of cycles to an Eulerian-verification instance.
    Reduce(reduce::ReduceArgs),
    /// Merge verify reports into one CSV and optionally an SVG chart.
    #[command(after_help = report::HELP)]
    Report(report::ReportArgs),
}

/// Seed flag shared by every randomized command.
#[derive(Args, Debug, Clone)]
pub(crate) struct SeedArg {
    /// Base seed; falls back to the GRTL_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    pub(crate) fn resolve(&self) -> anyhow::Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
            Err(_) => bail!("a seed is required: pass --seed or set {SEED_ENV}"),
        }
    }
}

/// Whether a command's checks all passed.
pub(crate) enum Verdict {
    Pass,
    Fail,
}

/// Where a command's primary output goes.
pub(crate) fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => stdout.write_all(bytes).context("writing to stdout"),
    }
}

pub(crate) fn to_json_bytes<T: serde::Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> anyhow::Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses `argv` (program name first) and runs the command, writing primary
/// output that has no `--out` to `stdout` and diagnostics to `stderr`.
pub fn run_with_io<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(Verdict::Pass) => 0,
        Ok(Verdict::Fail) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            2
        }
    }
}

/// [`run_with_io`] on the process's standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> anyhow::Result<Verdict> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("starting the worker pool")?;
    // Primary output is buffered so that a failing command prints nothing.
    let mut buf: Vec<u8> = Vec::new();
    let verdict = pool.install(|| {
        let out: &mut dyn Write = &mut buf;
        match cli.command {
            Command::Verify(a) => verify::run(a, out),
            Command::Sweep(a) => sweep::run(a, out),
            Command::Gen(a) => gen::run(a, out),
            Command::Reduce(a) => reduce::run(a, out),
            Command::Report(a) => report::run(a, out),
        }
    })?;
    stdout.write_all(&buf).context("writing to stdout")?;
    Ok(verdict)
}
