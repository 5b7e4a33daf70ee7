//! `toptrace`: dataset generation, releases, the tracing attack, Monte Carlo
//! experiments and bound calculators.
//!
//! Every subcommand writes JSON (or the dataset text format for `gen`) to
//! stdout. Exit status is 0 on success, 1 for invalid arguments or configs
//! and 2 for I/O failures.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use toptrace_core::dataset::{parse_text, write_text};
use toptrace_core::harness::{summary_path, ReportFormat};
use toptrace_core::rng::{derive_seed, Purpose};
use toptrace_core::{
    anticonc_lower, chernoff_bounds, dp_witness, exact_regime_check, exact_top_k, hoeffding_tail, marginals,
    noisy_constants, release, run_experiment, summarize, trace_dataset, write_report, AttackParams, Budget,
    DatasetMatrix, Error, ExperimentConfig, Mechanism, MechanismConfig, Result, SignVector,
};

#[derive(Parser)]
#[command(name = "toptrace", version, about = "Tracing attacks against top-k selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a uniform ±1 dataset in the text format.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact top-k of a dataset.
    Topk {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
    },
    /// Release a top-k vector with one of the mechanisms.
    Release {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        mech: MechArgs,
    },
    /// Release a top-k vector and run the inner-product attack on every row
    /// and on a fresh out-of-sample target.
    Attack {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        mech: MechArgs,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to json for a .json output path and csv otherwise.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check the exact-release regime, or evaluate the noisy-release
    /// constants with --noisy.
    Regime {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        noisy: bool,
    },
    /// The (epsilon, delta) pairs ruled out by observed attack rates.
    Witness {
        #[arg(long)]
        rho_sound: f64,
        #[arg(long)]
        untraced: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Evaluate a tail bound.
    Bounds {
        #[arg(long, value_enum)]
        kind: BoundKind,
        #[arg(long)]
        nu: f64,
        /// Sample count (hoeffding, anticonc).
        #[arg(long)]
        n: Option<u64>,
        /// Mean (chernoff).
        #[arg(long)]
        mu: Option<f64>,
        /// Exponent slack (anticonc).
        #[arg(long)]
        beta: Option<f64>,
    },
}

/// Where the dataset comes from: a text file, or a uniform draw.
#[derive(Args)]
struct DataArgs {
    /// Read the dataset from this file instead of generating one.
    #[arg(long, conflicts_with_all = ["n", "d"])]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Seeds the dataset, mechanism and out-of-sample streams exactly as
    /// trial 0 of an experiment with this master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MechArgs {
    #[arg(long = "mech", value_enum, default_value_t = MechArg::Exact)]
    kind: MechArg,
    /// Privacy budget for expmech: a positive number or "noiseless".
    #[arg(long)]
    epsilon: Option<Budget>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    target_row: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechArg {
    Exact,
    Expmech,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Hoeffding,
    Chernoff,
    Anticonc,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required here")))
}

impl DataArgs {
    fn load(&self) -> Result<DatasetMatrix> {
        match &self.input {
            Some(path) => {
                let file = File::open(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_text(BufReader::new(file))
            }
            None => DatasetMatrix::generate_uniform(
                required(self.n, "n")?,
                required(self.d, "d")?,
                derive_seed(self.seed, 0, Purpose::Dataset),
            ),
        }
    }
}

impl MechArgs {
    fn mechanism(&self) -> Result<Mechanism> {
        Ok(match self.kind {
            MechArg::Exact => Mechanism::Exact,
            MechArg::Expmech => Mechanism::ExpMechPeeling {
                epsilon: required(self.epsilon, "epsilon")?,
            },
            MechArg::Adversarial => Mechanism::Adversarial {
                alpha: required(self.alpha, "alpha")?,
                target_row: required(self.target_row, "target-row")?,
            },
        })
    }
}

fn stdout_err(source: io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)
        .map_err(io::Error::from)
        .and_then(|()| writeln!(out))
        .map_err(stdout_err)
}

fn write_dataset(x: &DatasetMatrix, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let io_err = |source| Error::Io {
                path: path.to_path_buf(),
                source,
            };
            let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
            write_text(x, &mut w).and_then(|()| w.flush()).map_err(io_err)
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_text(x, &mut w).and_then(|()| w.flush()).map_err(stdout_err)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { n, d, seed, out } => {
            let x = DatasetMatrix::generate_uniform(n, d, derive_seed(seed, 0, Purpose::Dataset))?;
            write_dataset(&x, out.as_deref())
        }
        Command::Topk { data, k } => {
            let x = data.load()?;
            let t = exact_top_k(&x, k)?;
            let q_k = marginals(&x).kth_largest(k);
            print_json(&json!({
                "n": x.n(),
                "d": x.d(),
                "k": k,
                "selected": t.selected(),
                "q_k": { "num": q_k.numer(), "den": q_k.denom() },
            }))
        }
        Command::Release { data, k, mech } => {
            let x = data.load()?;
            let config = MechanismConfig {
                mechanism: mech.mechanism()?,
                seed: derive_seed(data.seed, 0, Purpose::Mechanism),
            };
            print_json(&release(&x, k, &config)?)
        }
        Command::Attack { data, k, rho, mech } => {
            let x = data.load()?;
            let params = AttackParams::new(k, rho)?;
            let config = MechanismConfig {
                mechanism: mech.mechanism()?,
                seed: derive_seed(data.seed, 0, Purpose::Mechanism),
            };
            let outcome = release(&x, k, &config)?;
            let y = SignVector::uniform(x.d(), derive_seed(data.seed, 0, Purpose::OutSample));
            let report = trace_dataset(&x, &outcome.t_hat, &params, &y)?;
            print_json(&json!({
                "k": k,
                "rho": rho,
                "threshold": params.tau(),
                "selected": outcome.t_hat.selected(),
                "release_error": outcome.error,
                "traced_count": report.traced_count,
                "inner_min": report.inner_min(),
                "inner_mean": report.inner_mean(),
                "report": report,
            }))
        }
        Command::Experiment {
            config,
            out,
            format,
            threads,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let format = match format {
                Some(FormatArg::Csv) => ReportFormat::Csv,
                Some(FormatArg::Json) => ReportFormat::Json,
                None if out.extension().is_some_and(|e| e == "json") => ReportFormat::Json,
                None => ReportFormat::Csv,
            };
            let results = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| usage(format!("thread pool: {e}")))?
                    .install(|| run_experiment(&config))?,
                None => run_experiment(&config)?,
            };
            let summary = summarize(&results, &config)?;
            write_report(&summary, &results, &out, format)?;
            let mut written: Vec<Value> = vec![json!(out)];
            if format == ReportFormat::Csv {
                written.push(json!(summary_path(&out)));
            }
            print_json(&json!({ "written": written, "summary": summary }))
        }
        Command::Regime { n, d, k, rho, noisy } => {
            if noisy {
                print_json(&noisy_constants(rho, n, d, k)?)
            } else {
                print_json(&exact_regime_check(n, d, k, rho)?)
            }
        }
        Command::Witness {
            rho_sound,
            untraced,
            delta,
        } => print_json(&dp_witness(rho_sound, untraced, delta)?),
        Command::Bounds { kind, nu, n, mu, beta } => match kind {
            BoundKind::Hoeffding => print_json(&json!({ "tail": hoeffding_tail(nu, required(n, "n")?)? })),
            BoundKind::Chernoff => print_json(&chernoff_bounds(nu, required(mu, "mu")?)?),
            BoundKind::Anticonc => print_json(&anticonc_lower(required(beta, "beta")?, nu, required(n, "n")?)?),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
