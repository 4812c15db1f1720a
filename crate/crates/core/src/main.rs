use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ptsense::bench::{self, ExperimentConfig, SweepOptions, SweepResult};
use ptsense::coherence::{self, ConcentrationConfig, ProbeMode};
use ptsense::matrix_model::{decompose, LowRankMatrix};
use ptsense::{io, Error, Operator, OperatorKind, Result, SensingOperator};

#[derive(Parser)]
#[command(
    name = "ptsense",
    version,
    about = "Piecewise Toeplitz sensing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override any config key, e.g. `--set ranks=1,2,3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    /// `base`, then the config file, then `--set`, then `--seed`.
    fn load_onto(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            cfg.merge_str(&text)?;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.set(k, v)?;
        }
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        Ok(cfg)
    }

    fn load(&self) -> Result<ExperimentConfig> {
        self.load_onto(ExperimentConfig::default())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an error-vs-rank sweep; writes the trial CSV, `<stem>.agg.csv`,
    /// `<stem>.gp` and `<stem>.config`.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Trial CSV path.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Start from the reduced 20x20 preset instead of the defaults.
        #[arg(long)]
        reduced: bool,
        /// Suppress progress output.
        #[arg(long)]
        quiet: bool,
    },
    /// Coherence and uniqueness report for one operator.
    Probe {
        #[command(flatten)]
        common: Common,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the concentration study (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Load the operator from a file instead of generating it.
        #[arg(long)]
        operator: Option<PathBuf>,
        /// Operator kind to generate.
        #[arg(long, default_value = "piecewise_toeplitz")]
        kind: OperatorKind,
        /// Measurement count; defaults to round(rho n1 n2).
        #[arg(long)]
        measurements: Option<usize>,
        /// Rank of the probe matrix; defaults to the first configured rank.
        #[arg(long)]
        rank: Option<usize>,
        /// Uniqueness probe mode: exact or sampled.
        #[arg(long, default_value = "exact")]
        mode: ProbeMode,
        /// Maximum supports (exact) or directions (sampled).
        #[arg(long, default_value_t = coherence::DEFAULT_PROBE_BUDGET)]
        budget: usize,
        /// Constant `c` of the measurement bound.
        #[arg(long, default_value_t = 1.0)]
        bound_constant: f64,
        /// Also run the concentration study over this comma-separated M grid.
        #[arg(long, value_delimiter = ',')]
        concentration: Vec<usize>,
        /// Trials per M in the concentration study.
        #[arg(long, default_value_t = 200)]
        concentration_trials: usize,
        /// Thresholds for the four concentration cases.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5, 0.5, 0.5])]
        thresholds: Vec<f64>,
    },
    /// Recompute aggregates and the plot script from a trial CSV.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Trial CSV produced by `sweep`.
        input: PathBuf,
        /// Aggregate CSV path; defaults to `<input stem>.agg.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for symmetry with the other subcommands; unused.
        #[arg(long, default_value_t = 0, hide = true)]
        threads: usize,
    },
}

fn run_sweep_cmd(
    common: &Common,
    out: &Path,
    threads: usize,
    reduced: bool,
    quiet: bool,
) -> Result<()> {
    let base = if reduced {
        ExperimentConfig::reduced()
    } else {
        ExperimentConfig::default()
    };
    let cfg = common.load_onto(base)?;
    cfg.validate()?;
    let result = bench::run_sweep(
        &cfg,
        &SweepOptions {
            threads,
            progress: !quiet,
        },
    )?;
    write_outputs(&result, out)?;
    fs::write(bench::sibling_path(out, "config"), cfg.to_config_string())
        .map_err(|e| Error::io(out, e))?;
    if !quiet {
        eprintln!(
            "wrote {} records to {} (aggregates: {})",
            result.records.len(),
            out.display(),
            bench::aggregate_path(out).display()
        );
    }
    Ok(())
}

fn write_outputs(result: &SweepResult, out: &Path) -> Result<()> {
    bench::write_csv(result, out)?;
    bench::emit_plot_script(result, &bench::sibling_path(out, "gp"), out)
}

#[allow(clippy::too_many_arguments)]
fn run_probe_cmd(
    common: &Common,
    out: Option<&Path>,
    threads: usize,
    operator: Option<&Path>,
    kind: OperatorKind,
    measurements: Option<usize>,
    rank: Option<usize>,
    mode: ProbeMode,
    budget: usize,
    bound_constant: f64,
    concentration: &[usize],
    concentration_trials: usize,
    thresholds: &[f64],
) -> Result<()> {
    let cfg = common.load()?;
    let op = match operator {
        Some(p) => io::read_operator(p)?,
        None => Operator::generate(
            kind,
            measurements.unwrap_or_else(|| cfg.measurements()),
            cfg.n1,
            cfg.n2,
            cfg.c0,
            cfg.base_seed,
        )?,
    };
    let (m, n1, n2) = (op.measurements(), op.n1(), op.n2());
    let r = rank.unwrap_or(cfg.ranks[0]);

    let mut s = String::new();
    let _ = writeln!(s, "operator: {} (M = {m}, n1 = {n1}, n2 = {n2})", op.kind());
    let _ = writeln!(
        s,
        "storage: {} floats (dense equivalent {})",
        op.storage_cost(),
        m * n1 * n2
    );
    let _ = writeln!(
        s,
        "measurement bound (c = {bound_constant}, r = {r}): {}",
        coherence::measurement_bound(n1, n2, r, bound_constant)?
    );

    let x = LowRankMatrix::generate(n1, n2, r, cfg.base_seed.wrapping_add(1))?;
    let theta = coherence::build_theta(&op, &decompose(&x)?)?;
    let gram = coherence::gram_report(&theta)?;
    let _ = writeln!(s, "gram (rank {r} probe matrix): {gram}");
    let _ = writeln!(
        s,
        "primary blocks Toeplitz: {}",
        theta.primary_blocks_are_toeplitz()
    );

    match coherence::uniqueness_probe(&op, r, mode, budget, cfg.base_seed) {
        Ok(rep) => {
            let _ = writeln!(s, "uniqueness: {rep}");
        }
        Err(Error::Parameter(msg)) if mode == ProbeMode::ExactEnumeration => {
            let _ = writeln!(s, "uniqueness: skipped ({msg}); retry with --mode sampled");
        }
        Err(e) => return Err(e),
    }

    if !concentration.is_empty() {
        if thresholds.len() != 4 {
            return Err(Error::param("--thresholds needs exactly four values"));
        }
        let ccfg = ConcentrationConfig {
            m_grid: concentration.to_vec(),
            n1,
            n2,
            r,
            trials: concentration_trials,
            thresholds: [thresholds[0], thresholds[1], thresholds[2], thresholds[3]],
            c0: cfg.c0,
            seed: cfg.base_seed,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::param(format!("cannot build thread pool: {e}")))?;
        let report = pool.install(|| coherence::concentration_study(&ccfg))?;
        let _ = writeln!(s, "concentration:\n{report}");
    }

    print!("{s}");
    if let Some(p) = out {
        fs::write(p, &s).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

fn run_analyze_cmd(common: &Common, input: &Path, out: Option<&Path>) -> Result<()> {
    let cfg = common.load()?;
    let records = bench::read_records(input)?;
    let aggregates = bench::compute_aggregates(&records, cfg.success_threshold);
    let result = SweepResult {
        config: cfg,
        records,
        aggregates,
    };
    let agg = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| bench::aggregate_path(input));
    fs::write(
        &agg,
        bench::aggregates_to_csv(&result.aggregates, result.config.success_threshold),
    )
    .map_err(|e| Error::io(&agg, e))?;
    let script = bench::sibling_path(input, "gp");
    let agg_name = agg
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let image = bench::sibling_path(input, "svg");
    let image = image
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    fs::write(&script, bench::plot_script(&result, &agg_name, &image))
        .map_err(|e| Error::io(&script, e))?;
    for a in &result.aggregates {
        println!(
            "{:<20} {:<4} r={:<3} mean={:.3e} sd={:.3e} success={:.3}",
            a.operator.as_str(),
            a.solver.as_str(),
            a.rank,
            a.mean_rel_error,
            a.std_rel_error,
            a.success_rate
        );
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Parse { .. } => 2,
        Error::Io { .. } => 3,
        Error::Degenerate(_) => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Sweep {
            common,
            out,
            threads,
            reduced,
            quiet,
        } => run_sweep_cmd(common, out, *threads, *reduced, *quiet),
        Command::Probe {
            common,
            out,
            threads,
            operator,
            kind,
            measurements,
            rank,
            mode,
            budget,
            bound_constant,
            concentration,
            concentration_trials,
            thresholds,
        } => run_probe_cmd(
            common,
            out.as_deref(),
            *threads,
            operator.as_deref(),
            *kind,
            *measurements,
            *rank,
            *mode,
            *budget,
            *bound_constant,
            concentration,
            *concentration_trials,
            thresholds,
        ),
        Command::Analyze {
            common, input, out, ..
        } => run_analyze_cmd(common, input, out.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
