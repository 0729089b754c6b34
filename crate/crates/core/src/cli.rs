//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or malformed input file, 2 invalid flags or
//! arguments outside an operation's domain, 3 incompatible signatures
//! (differing configuration or unset slots).

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::analytics;
use crate::error::Error;
use crate::io::{decode_signature, elements, write_signature};
use crate::sim::{self, RuntimeSimSpec, SetProfile, VarianceSimSpec};
use crate::sketch::{Algorithm, Signature, SketchBuilder, SketchConfig};

#[derive(Debug, Parser)]
#[command(name = "superminhash", version, about = "SuperMinHash signatures and Jaccard estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a signature from newline-delimited elements.
    Sketch(SketchArgs),
    /// Estimate the Jaccard index of two signature files.
    Estimate { a: PathBuf, b: PathBuf },
    /// Merge signature files into the signature of the union.
    Merge {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Variance reduction factor alpha(m, u).
    Alpha {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        u: u64,
    },
    /// SuperMinHash estimator variance for Jaccard index j.
    Variance {
        #[arg(long)]
        j: f64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        u: u64,
    },
    /// Upper bound on expected total inner-loop iterations.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Empirical variance reduction factor by simulation.
    SimVariance(SimVarianceArgs),
    /// Average inner-loop iterations per element by simulation.
    SimRuntime(SimRuntimeArgs),
}

#[derive(Debug, Args)]
pub struct SketchArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long, default_value_t = Algorithm::SuperMinHash)]
    pub algo: Algorithm,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Input file; standard input when omitted or "-".
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimVarianceArgs {
    #[arg(long)]
    pub m: u32,
    /// Cardinalities |A\B|,|B\A|,|A∩B|.
    #[arg(long)]
    pub profile: SetProfile,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = Algorithm::SuperMinHash)]
    pub algo: Algorithm,
    /// Append the result row here; print to standard output when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimRuntimeArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Incompatible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Incompatible(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ConfigMismatch { .. } | Error::UnsetSlots { .. } => CliError::Incompatible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// `x` in plain decimal notation with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), x);
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // log10 can land one below a power of ten
    let significant = s.chars().filter(char::is_ascii_digit).skip_while(|c| *c == '0').count();
    if significant > digits && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

fn load_signature(path: &Path) -> Result<Signature, CliError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    decode_signature(&bytes).map_err(|e| io_error(path, e))
}

fn save_signature(sig: &Signature, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    write_signature(sig, &mut w).map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

fn merge_checked(acc: Signature, next: &Signature, path: &Path) -> Result<Signature, CliError> {
    acc.merge(next)
        .map_err(|e| CliError::Incompatible(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct VarianceRow {
    m: u32,
    u: u64,
    j: f64,
    trials: u64,
    seed: u64,
    empirical_variance: f64,
    empirical_alpha: f64,
    theoretical_alpha: f64,
    mean_estimate: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct RuntimeRow {
    m: u32,
    n: u64,
    trials: u64,
    seed: u64,
    mean_iters_per_element: f64,
    bound_per_element: f64,
}

fn emit_row<T: Serialize>(row: &T, csv_path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match csv_path {
        Some(path) => {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| io_error(path, e))?;
            let is_new = file.metadata().map_err(|e| io_error(path, e))?.len() == 0;
            let mut w = csv::WriterBuilder::new().has_headers(is_new).from_writer(file);
            w.serialize(row).map_err(|e| io_error(path, e))?;
            w.flush().map_err(|e| io_error(path, e))
        }
        None => {
            let mut w = csv::Writer::from_writer(stdout);
            w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
            w.flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn print_value(stdout: &mut dyn Write, value: f64) -> Result<(), CliError> {
    writeln!(stdout, "{value}").map_err(|e| CliError::Io(e.to_string()))
}

fn sketch(args: &SketchArgs, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = SketchConfig::new(args.m, args.algo, args.seed)?;
    let mut builder = SketchBuilder::new(config);
    let mut count = 0u64;
    let mut ingest = |source: &mut dyn io::BufRead, name: &Path| -> Result<(), CliError> {
        for record in elements(source) {
            let record = record.map_err(|e| io_error(name, e))?;
            builder.add(&record);
            count += 1;
        }
        Ok(())
    };
    match args.input.as_deref() {
        None => ingest(&mut io::stdin().lock(), Path::new("<stdin>"))?,
        Some(p) if p == Path::new("-") => ingest(&mut io::stdin().lock(), Path::new("<stdin>"))?,
        Some(p) => {
            let file = File::open(p).map_err(|e| io_error(p, e))?;
            ingest(&mut BufReader::new(file), p)?
        }
    }
    save_signature(&builder.finalize(), &args.out)?;
    let _ = writeln!(
        stderr,
        "m={} elements={} inner_iterations={}",
        args.m,
        count,
        builder.inner_iterations()
    );
    Ok(())
}

fn estimate(a_path: &Path, b_path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let a = load_signature(a_path)?;
    let b = load_signature(b_path)?;
    if a.config() != b.config() {
        return Err(CliError::Incompatible(format!(
            "{} ({}) and {} ({}) have different configurations",
            a_path.display(),
            a.config(),
            b_path.display(),
            b.config()
        )));
    }
    for (sig, path) in [(&a, a_path), (&b, b_path)] {
        let unset = sig.unset_count();
        if unset > 0 {
            return Err(CliError::Incompatible(format!(
                "{}: {unset} unset slot(s); signature of an empty set",
                path.display()
            )));
        }
    }
    let r = analytics::estimate_jaccard(&a, &b)?;
    writeln!(stdout, "{}\t{}", format_significant(r.j_hat, 17), r.matches).map_err(|e| CliError::Io(e.to_string()))
}

fn merge(inputs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    let (first, rest) = inputs.split_first().ok_or_else(|| CliError::Usage("nothing to merge".into()))?;
    let mut acc = load_signature(first)?;
    for path in rest {
        let next = load_signature(path)?;
        acc = merge_checked(acc, &next, path)?;
    }
    save_signature(&acc, out)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Sketch(args) => sketch(args, stderr),
        Command::Estimate { a, b } => estimate(a, b, stdout),
        Command::Merge { inputs, out } => merge(inputs, out),
        Command::Alpha { m, u } => print_value(stdout, analytics::alpha(*m, *u)?),
        Command::Variance { j, m, u } => print_value(stdout, analytics::superminhash_variance(*j, *m, *u)?),
        Command::Bound { n, m } => print_value(stdout, analytics::runtime_bound(*n, *m)?),
        Command::SimVariance(args) => {
            let spec = VarianceSimSpec::new(args.m, args.profile, args.trials, args.seed).with_algorithm(args.algo);
            let r = sim::run_variance_sim(&spec)?;
            let row = VarianceRow {
                m: r.m,
                u: r.union,
                j: r.jaccard,
                trials: r.trials,
                seed: r.master_seed,
                empirical_variance: r.empirical_variance,
                empirical_alpha: r.empirical_alpha,
                theoretical_alpha: r.theoretical_alpha,
                mean_estimate: r.mean_estimate,
                std_error: r.std_error,
            };
            emit_row(&row, args.csv.as_deref(), stdout)
        }
        Command::SimRuntime(args) => {
            let spec = RuntimeSimSpec {
                m: args.m,
                n: args.n,
                trials: args.trials,
                master_seed: args.seed,
            };
            let r = sim::run_runtime_sim(&spec)?;
            let row = RuntimeRow {
                m: r.m,
                n: r.n,
                trials: r.trials,
                seed: r.master_seed,
                mean_iters_per_element: r.mean_iters_per_element,
                bound_per_element: r.bound_per_element,
            };
            emit_row(&row, args.csv.as_deref(), stdout)
        }
    }
}
