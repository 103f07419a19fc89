//! `hefdiv` command-line tool.
//!
//! Exit codes: 0 success, 1 domain failure (no solution at the cap, a
//! common zero, a rank drop), 2 usage or input error, 3 a quadrature
//! tolerance that was not met.

pub mod commands;
pub mod corpus;
pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hefdiv_core::complexes::BuildOptions;
use hefdiv_core::division::{BoundMethod, BoundQuery};
use hefdiv_core::Error as CoreError;
use serde::Serialize;

use commands::{ComplexChoice, FlavorChoice, QuadKind};
use corpus::Profile;
pub use manifest::{Outcome, RunManifest};

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_CORPUS_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "hefdiv", version, about = "Exact polynomial division with degree bounds")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a degree bound.
    Bound(BoundArgs),
    /// Build a graded complex from a matrix.
    Complex(ComplexArgs),
    /// Build a Hefer tower for a Koszul or Buchsbaum-Rim complex.
    Hefer(HeferArgs),
    /// Solve P Q = Φ at a method's degree cap.
    Solve(SolveArgs),
    /// Find Q with P Q = I at the certificate cap.
    Certify(CertifyArgs),
    /// Run a quadrature check.
    Quadcheck(QuadArgs),
    /// Generate a seeded corpus.
    Corpus(CorpusArgs),
}

fn parse_method(s: &str) -> std::result::Result<BoundMethod, String> {
    s.parse().map_err(|e: CoreError| e.to_string())
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// eliot, koszul, macaulay, mountie or fuhrmann.
    #[arg(long, value_parser = parse_method)]
    pub method: BoundMethod,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub r: usize,
    /// Column degrees, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub deg: Vec<i64>,
    #[arg(long, default_value_t = 0)]
    pub rho: i64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Seed for the generic surjectivity check.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct ComplexArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: ComplexChoice,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct HeferArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "koszul")]
    pub kind: ComplexChoice,
    #[arg(long, value_enum, default_value = "affine")]
    pub flavor: FlavorChoice,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// eliot, koszul, macaulay, mountie or fuhrmann.
    #[arg(long, value_parser = parse_method, default_value = "eliot")]
    pub method: BoundMethod,
    /// Also search for the least feasible cap.
    #[arg(long)]
    pub minimize: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(value_enum)]
    pub kind: QuadKind,
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long, default_value_t = DEFAULT_CORPUS_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub profile: Profile,
    /// Directory for instance files and sidecars.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub count: Option<usize>,
}

/// Marks a completed run whose numbers missed the tolerance.
#[derive(Debug)]
struct ToleranceMissed;

impl std::fmt::Display for ToleranceMissed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("tolerance not met")
    }
}

impl std::error::Error for ToleranceMissed {}

/// Exit class of an error.
pub fn classify(err: &anyhow::Error) -> Outcome {
    for cause in err.chain() {
        if cause.downcast_ref::<ToleranceMissed>().is_some() {
            return Outcome::ToleranceFailure;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::ToleranceNotReached { .. } => Outcome::ToleranceFailure,
                CoreError::NoSolutionAtCap { .. }
                | CoreError::Failure(_)
                | CoreError::Infeasible(_)
                | CoreError::GenericSurjectivity { .. }
                | CoreError::RankDropOnGrid { .. }
                | CoreError::NotClosed
                | CoreError::ComplexInvariant(_)
                | CoreError::Internal(_) => Outcome::DomainFailure,
                _ => Outcome::UsageError,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return Outcome::UsageError;
        }
    }
    Outcome::DomainFailure
}

struct Run {
    manifest: RunManifest,
    out: Option<PathBuf>,
}

impl Run {
    fn read_json(&mut self, path: &Path) -> Result<serde_json::Value> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.record_input(path, &bytes);
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }

    fn emit_text(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }

    fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit_text(&(to_json(value)? + "\n"))
    }
}

/// Pretty JSON; the byte-level form every command writes.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn build_options(b: &BuildArgs) -> BuildOptions {
    BuildOptions { seed: b.seed, trials: b.trials }
}

fn execute(cmd: &Command, run: &mut Run) -> Result<()> {
    match cmd {
        Command::Bound(a) => {
            let q = BoundQuery {
                n: a.n,
                m: a.m,
                r: a.r,
                degrees: a.deg.clone(),
                rho: a.rho,
                method: a.method,
            };
            let v = commands::bound(&q)?;
            run.emit_text(&format!("{v}\n"))
        }
        Command::Complex(a) => {
            run.manifest.seed = Some(a.build.seed);
            let p = commands::parse_matrix(run.read_json(&a.input)?)?;
            run.emit(&commands::complex(&p, a.kind, &build_options(&a.build))?)
        }
        Command::Hefer(a) => {
            run.manifest.seed = Some(a.build.seed);
            let p = commands::parse_matrix(run.read_json(&a.input)?)?;
            run.emit(&commands::hefer(&p, a.kind, a.flavor, &build_options(&a.build))?)
        }
        Command::Solve(a) => {
            let prob = commands::parse_problem(run.read_json(&a.input)?)?;
            run.emit(&commands::solve(&prob, a.method, a.minimize)?)
        }
        Command::Certify(a) => {
            let p = commands::parse_matrix(run.read_json(&a.input)?)?;
            run.emit(&commands::certify(&p)?)
        }
        Command::Quadcheck(a) => {
            let spec: commands::QuadcheckSpec = serde_json::from_value(run.read_json(&a.spec)?)
                .with_context(|| format!("parsing {}", a.spec.display()))?;
            run.manifest.tolerances = Some(serde_json::to_value(spec.quadrature()?)?);
            let out = commands::quadcheck(a.kind, &spec)?;
            run.emit(&out)?;
            if out.passed {
                Ok(())
            } else {
                Err(ToleranceMissed.into())
            }
        }
        Command::Corpus(a) => {
            run.manifest.seed = Some(a.seed);
            let instances = corpus::generate(a.seed, a.profile, a.count)?;
            fs::create_dir_all(&a.dir).with_context(|| format!("creating {}", a.dir.display()))?;
            let mut index = Vec::new();
            for inst in &instances {
                let prob = a.dir.join(format!("{}.json", inst.name));
                let meta = a.dir.join(format!("{}.meta.json", inst.name));
                fs::write(&prob, to_json(&inst.problem)? + "\n")?;
                fs::write(&meta, to_json(&inst.meta)? + "\n")?;
                index.push(inst.name.clone());
            }
            let summary = serde_json::json!({
                "profile": a.profile,
                "seed": a.seed,
                "instances": index,
            });
            fs::write(a.dir.join("index.json"), to_json(&summary)? + "\n")?;
            run.emit(&summary)
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Bound(_) => "bound",
        Command::Complex(_) => "complex",
        Command::Hefer(_) => "hefer",
        Command::Solve(_) => "solve",
        Command::Certify(_) => "certify",
        Command::Quadcheck(_) => "quadcheck",
        Command::Corpus(_) => "corpus",
    }
}

fn write_manifest(m: &RunManifest, path: Option<&Path>) {
    let text = match serde_json::to_string(m) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("hefdiv: cannot serialize manifest: {e}");
            return;
        }
    };
    match path {
        Some(p) => {
            if let Err(e) = fs::write(p, text + "\n") {
                eprintln!("hefdiv: cannot write manifest {}: {e}", p.display());
            }
        }
        None => eprintln!("{text}"),
    }
}

/// Parses `argv`, runs the command, writes one manifest and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut manifest = RunManifest {
        args,
        version: env!("CARGO_PKG_VERSION").to_string(),
        ..RunManifest::default()
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return 0;
            }
            manifest.outcome = Outcome::UsageError;
            manifest.exit_code = 2;
            manifest.message = Some(e.kind().to_string());
            manifest.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            write_manifest(&manifest, None);
            return 2;
        }
    };
    manifest.command = command_name(&cli.command).to_string();
    let mut run = Run { manifest, out: cli.out.clone() };
    let result = execute(&cli.command, &mut run);
    let mut manifest = run.manifest;
    let outcome = match &result {
        Ok(()) => Outcome::Ok,
        Err(e) => {
            eprintln!("hefdiv: {e:#}");
            manifest.message = Some(format!("{e:#}"));
            classify(e)
        }
    };
    manifest.outcome = outcome;
    manifest.exit_code = outcome.exit_code();
    manifest.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    write_manifest(&manifest, cli.manifest.as_deref());
    outcome.exit_code()
}
