use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use psb_factor::debf::{debf_observed, DebfOptions, Factorisation, IterationTrace, RunError};
use psb_factor::encoder::{generate_encoder, order_columns, Direction, EncoderParams};
use psb_factor::harness::{run_grid, write_grid_csv, GridConfig, Settings, StreamIngest};
use psb_factor::ndebf::ndebf_run;
use psb_factor::psb::{sample_instance, PsbParams};
use psb_factor::sparse::io::{load_binary, load_real, save_binary, save_real};
use psb_factor::verify::{exact_recovery, match_up_to_permutation};
use psb_factor::{BinaryColumnMatrix, CodeMatrix};

const THREADS_VAR: &str = "PSB_FACTOR_THREADS";

#[derive(Parser)]
#[command(name = "psb-factor", version, about = "Blind factorisation of Y = A X with a sparse binary expander A")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random m x n encoder with d ones per column.
    GenEncoder(GenEncoderArgs),
    /// Sample A, X and Y = A X and write A.txt, X.txt and Y.txt.
    GenInstance(GenInstanceArgs),
    /// Factorise a measurement matrix.
    Run(RunArgs),
    /// Compare reconstructions with ground truth.
    Verify(VerifyArgs),
    /// Run a seeded experiment grid and write one CSV row per cell.
    Grid(GridArgs),
    /// Feed measurement columns to the online factoriser in batches.
    Stream(StreamArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Asc,
    Desc,
}

impl From<Order> for Direction {
    fn from(o: Order) -> Self {
        match o {
            Order::Asc => Direction::Ascending,
            Order::Desc => Direction::Descending,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Debf,
    Ndebf,
}

#[derive(Args)]
struct GenEncoderArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sort the columns as binary numbers before writing.
    #[arg(long, value_enum)]
    order: Option<Order>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenInstanceArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    /// Number of measurement columns N.
    #[arg(long = "samples", short = 'N')]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sort the encoder columns (and the code rows with them) first.
    #[arg(long, value_enum)]
    order: Option<Order>,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Driver settings shared by `run` and `stream`.
#[derive(Args)]
struct SolverArgs {
    /// Column weight of the encoder.
    #[arg(long)]
    d: usize,
    /// Expansion parameter, or `practical` for 1/6 with merging.
    #[arg(long, default_value = "practical")]
    epsilon: String,
    /// Force the merge pass on.
    #[arg(long)]
    merge: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> Result<DebfOptions<f64>> {
        let mut opts = DebfOptions::new(self.d).with_tol(self.tol);
        if self.epsilon.eq_ignore_ascii_case("practical") {
            opts.merge = true;
        } else {
            let e: f64 = self.epsilon.parse().with_context(|| format!("bad --epsilon `{}`", self.epsilon))?;
            opts = opts.with_epsilon(e);
        }
        opts.merge |= self.merge;
        opts.max_iterations = self.max_iterations;
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Measurement matrix Y.
    #[arg(long)]
    y: PathBuf,
    /// Number of encoder columns.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "debf")]
    algo: Algo,
    /// Write per-iteration diagnostics as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Sort the reconstructed encoder columns (and code rows) before writing.
    #[arg(long, value_enum)]
    order: Option<Order>,
    /// Directory receiving Ahat.txt and Xhat.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    ahat: PathBuf,
    #[arg(long)]
    xhat: PathBuf,
    /// Accepted for symmetry with `run`; matching does not depend on it.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct GridArgs {
    /// key = value settings; flags below override them.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// List of k values, e.g. `10,20` or `10..100:10`.
    #[arg(long)]
    k: Option<String>,
    /// List of k/n percentages.
    #[arg(long)]
    k_pct: Option<String>,
    /// List of N values.
    #[arg(long = "samples", short = 'N')]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Record mean wall-clock time per cell.
    #[arg(long)]
    timing: bool,
    /// Run trials one after another.
    #[arg(long)]
    serial: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GridArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => Settings::default(),
        };
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                s.set(key, v);
            }
        };
        put("n", self.n.map(|v| v.to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("d", self.d.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("tol", self.tol.map(|v| v.to_string()));
        put("max_iterations", self.max_iterations.map(|v| v.to_string()));
        put("epsilon", self.epsilon.clone());
        put("N", self.samples.clone());
        put("timing", self.timing.then(|| "true".to_string()));
        if self.k.is_some() || self.k_pct.is_some() {
            s.remove("k");
            s.remove("k_pct");
        }
        if let Some(k) = &self.k {
            s.set("k", k.clone());
        }
        if let Some(k) = &self.k_pct {
            s.set("k_pct", k.clone());
        }
        Ok(s)
    }
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    y: PathBuf,
    /// Number of encoder columns; the encoder grows on demand when absent.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|()| dispatch(cli.command)) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenEncoder(args) => gen_encoder(args),
        Command::GenInstance(args) => gen_instance(args),
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Grid(args) => grid(args),
        Command::Stream(args) => stream(args),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn gen_encoder(args: GenEncoderArgs) -> Result<()> {
    let mut a = generate_encoder(&EncoderParams::new(args.m, args.n, args.d, args.seed)?)?;
    if let Some(order) = args.order {
        a = order_columns::<f64>(&a, None, order.into(), false)?.encoder;
    }
    save_binary(&args.out, &a).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn gen_instance(args: GenInstanceArgs) -> Result<()> {
    let params = PsbParams::new(args.d, args.k, args.m, args.n, args.samples, args.seed);
    let mut inst = sample_instance::<f64>(&params)?;
    if let Some(order) = args.order {
        let sorted = order_columns(&inst.encoder, Some(&inst.codes), order.into(), false)?;
        inst.encoder = sorted.encoder;
        inst.codes = sorted.codes.expect("codes were supplied");
    }
    create_dir(&args.out_dir)?;
    save_binary(args.out_dir.join("A.txt"), &inst.encoder)?;
    save_real(args.out_dir.join("X.txt"), &inst.codes)?;
    save_real(args.out_dir.join("Y.txt"), &inst.measurements)?;
    Ok(())
}

fn write_outputs(dir: &Path, ahat: &BinaryColumnMatrix, xhat: &CodeMatrix, order: Option<Order>) -> Result<()> {
    create_dir(dir)?;
    match order {
        Some(order) => {
            let sorted = order_columns(ahat, Some(xhat), order.into(), false)?;
            save_binary(dir.join("Ahat.txt"), &sorted.encoder)?;
            save_real(dir.join("Xhat.txt"), sorted.codes.as_ref().expect("codes were supplied"))?;
        }
        None => {
            save_binary(dir.join("Ahat.txt"), ahat)?;
            save_real(dir.join("Xhat.txt"), xhat)?;
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let y: CodeMatrix = load_real(&args.y).with_context(|| format!("reading {}", args.y.display()))?;
    let opts = args.solver.options()?;
    let result = match args.algo {
        Algo::Debf => debf_observed(&y, args.n, &opts, |_, row| log::info!("{}", row.csv_row())),
        Algo::Ndebf => ndebf_run(&y, args.n, &opts),
    };
    let (out, limit_hit): (Factorisation<f64>, bool) = match result {
        Ok(out) => (out, false),
        Err(RunError::IterationLimit { partial, limit }) => {
            log::warn!("stopped at the iteration limit of {limit}");
            (*partial, true)
        }
        Err(RunError::Invalid(e)) => return Err(e.into()),
    };
    if let Some(path) = &args.trace {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "{}", IterationTrace::CSV_HEADER)?;
        for row in &out.trace {
            writeln!(w, "{}", row.csv_row())?;
        }
        w.flush()?;
    }
    write_outputs(&args.out_dir, &out.ahat, &out.xhat, args.order)?;
    println!(
        "{}",
        json!({
            "iterations": out.iterations,
            "eta": out.eta,
            "residual_pct": out.residual_pct(&y),
            "exact_fit": out.is_exact_fit(),
            "exit": format!("{:?}", out.exit),
            "iteration_limit": limit_hit,
        })
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let a = load_binary(&args.a)?;
    let x: CodeMatrix = load_real(&args.x)?;
    let ahat = load_binary(&args.ahat)?;
    let xhat: CodeMatrix = load_real(&args.xhat)?;
    let m = match_up_to_permutation(&ahat, &xhat, &a, &x, args.tol)?;
    let exact = m.exact || exact_recovery(&ahat, &xhat, &a, &x, args.tol);
    println!(
        "{}",
        json!({
            "exact": exact,
            "containment": m.containment,
            "matched_columns": m.matched_columns(),
        })
    );
    Ok(())
}

fn grid(args: GridArgs) -> Result<()> {
    let config = GridConfig::from_settings(&args.settings()?)?;
    let cells = run_grid::<f64>(&config, !args.serial)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_grid_csv(BufWriter::new(file), &cells, config.timing)?;
        }
        None => write_grid_csv(std::io::stdout().lock(), &cells, config.timing)?,
    }
    Ok(())
}

fn stream(args: StreamArgs) -> Result<()> {
    if args.batch_size == 0 {
        bail!("--batch-size must be positive");
    }
    let y: CodeMatrix = load_real(&args.y).with_context(|| format!("reading {}", args.y.display()))?;
    let mut ingest = StreamIngest::new(y.rows(), args.n, args.solver.options()?)?;
    for (b, chunk) in y.columns().chunks(args.batch_size).enumerate() {
        let report = ingest.ingest(chunk.to_vec())?;
        println!(
            "{}",
            json!({
                "batch": b,
                "columns": report.columns,
                "direct": report.direct,
                "iterations": report.iterations,
                "restarted": report.restarted,
                "unresolved": report.unresolved,
                "stable": ingest.is_stable(),
            })
        );
    }
    let state = ingest.state();
    write_outputs(&args.out_dir, state.ahat(), state.xhat(), None)?;
    Ok(())
}
