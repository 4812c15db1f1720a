//! Monte Carlo error-vs-rank harness.
//!
//! A sweep runs the cross product operators x solvers x ranks x trials.
//! Every trial is a pure function of the config and its coordinates: the
//! trial seed is `base_seed + mix(rank, operator, solver, trial)` (wrapping),
//! so serial and parallel runs produce identical records, and records are
//! sorted by (operator, solver, rank, trial) before anything is written.
//!
//! # Config format
//!
//! Flat `key = value` lines; `#` starts a comment; lists are
//! comma-separated and integer lists accept inclusive ranges `a..b`.
//!
//! ```text
//! n1 = 50
//! n2 = 50
//! rho = 0.3
//! ranks = 1..10
//! trials = 200
//! operators = gaussian, bernoulli, three_valued, piecewise_toeplitz
//! solvers = svt, als
//! base_seed = 0
//! c0 = 4
//! success_threshold = 1e-3
//! record_timing = false
//! # solver overrides
//! max_iters = 500
//! tol = 1e-8
//! tau = 120       # or "auto"
//! step = 1.2
//! als_reg = 1e-10
//! stall_window = 25
//! stall_tol = 1e-3
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::matrix_model::LowRankMatrix;
use crate::operators::{Operator, OperatorKind, SensingOperator, DEFAULT_C0};
use crate::rng::{child_seed, mix_coords};
use crate::solvers::{self, relative_error, SolverConfig, SolverKind};

pub const CSV_HEADER: &str =
    "operator,solver,rank,trial,seed,rel_error,iterations,converged,wall_time_s";
pub const AGG_HEADER: &str =
    "operator,solver,rank,trials,mean_rel_error,std_rel_error,success_rate,success_threshold";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n1: usize,
    pub n2: usize,
    /// Sampling rate; `M = round(rho n1 n2)`.
    pub rho: f64,
    pub ranks: Vec<usize>,
    pub trials: usize,
    pub operators: Vec<OperatorKind>,
    pub solvers: Vec<SolverKind>,
    pub base_seed: u64,
    pub c0: f64,
    pub solver_config: SolverConfig,
    /// Relative error below which a trial counts as recovered.
    pub success_threshold: f64,
    /// Store measured wall time; off by default so outputs stay byte-stable.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n1: 50,
            n2: 50,
            rho: 0.3,
            ranks: (1..=10).collect(),
            trials: 200,
            operators: OperatorKind::RANDOM.to_vec(),
            solvers: vec![SolverKind::Svt, SolverKind::Als],
            base_seed: 0,
            c0: DEFAULT_C0,
            solver_config: SolverConfig::default(),
            success_threshold: 1e-3,
            record_timing: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::param(format!("{key}: cannot parse '{v}'")))
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b): (usize, usize) = (
                parse_num(key, a)?,
                parse_num(key, b.trim_start_matches('='))?,
            );
            if a > b {
                return Err(Error::param(format!("{key}: empty range '{item}'")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_num(key, item)?);
        }
    }
    Ok(out)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::param(format!(
            "{key}: expected true/false, got '{other}'"
        ))),
    }
}

impl ExperimentConfig {
    /// Reduced configuration that finishes in minutes on one core.
    pub fn reduced() -> Self {
        ExperimentConfig {
            n1: 20,
            n2: 20,
            ranks: vec![1, 2, 4],
            trials: 25,
            ..Default::default()
        }
    }

    pub fn measurements(&self) -> usize {
        ((self.rho * (self.n1 * self.n2) as f64).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::param("n1 and n2 must be positive"));
        }
        if self.n1 > self.n2 {
            return Err(Error::param("expected n1 <= n2"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::param(format!(
                "rho must lie in (0, 1], got {}",
                self.rho
            )));
        }
        if self.ranks.is_empty()
            || self
                .ranks
                .iter()
                .any(|&r| r == 0 || r > self.n1.min(self.n2))
        {
            return Err(Error::param(format!(
                "ranks must be non-empty and within 1..={}",
                self.n1.min(self.n2)
            )));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if self.operators.is_empty() || self.solvers.is_empty() {
            return Err(Error::param("need at least one operator and one solver"));
        }
        if let Some(k) = self
            .operators
            .iter()
            .find(|k| !OperatorKind::RANDOM.contains(k))
        {
            return Err(Error::param(format!(
                "operator '{k}' cannot be drawn at random"
            )));
        }
        if !(self.c0 > 1.0) {
            return Err(Error::param("c0 must be > 1"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::param("success_threshold must be > 0"));
        }
        self.solver_config.validate()
    }

    /// Set one key. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let sc = &mut self.solver_config;
        match key.trim() {
            "n1" => self.n1 = parse_num(key, v)?,
            "n2" => self.n2 = parse_num(key, v)?,
            "rho" => self.rho = parse_num(key, v)?,
            "ranks" => self.ranks = parse_usize_list(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "operators" => {
                self.operators = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "solvers" => {
                self.solvers = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "base_seed" | "seed" => self.base_seed = parse_num(key, v)?,
            "c0" => self.c0 = parse_num(key, v)?,
            "success_threshold" => self.success_threshold = parse_num(key, v)?,
            "record_timing" => self.record_timing = parse_bool(key, v)?,
            "max_iters" => {
                sc.max_iters = if v == "auto" {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "tol" => sc.tol = parse_num(key, v)?,
            "tau" => {
                sc.tau = if v == "auto" {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "step" => sc.step = parse_num(key, v)?,
            "als_reg" => sc.als_reg = parse_num(key, v)?,
            "stall_window" => sc.stall_window = parse_num(key, v)?,
            "stall_tol" => sc.stall_tol = parse_num(key, v)?,
            other => return Err(Error::param(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Apply `key = value` lines on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(i + 1, format!("expected key = value, got '{line}'"))
            })?;
            self.set(k, v)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::default();
        cfg.merge_str(&text)?;
        Ok(cfg)
    }

    /// Serialize in the config format; parsing it back gives `self`.
    pub fn to_config_string(&self) -> String {
        let join = |it: Vec<String>| it.join(", ");
        let sc = &self.solver_config;
        let opt = |o: Option<String>| o.unwrap_or_else(|| "auto".into());
        let mut s = String::new();
        let _ = writeln!(s, "n1 = {}", self.n1);
        let _ = writeln!(s, "n2 = {}", self.n2);
        let _ = writeln!(s, "rho = {}", format_f64(self.rho));
        let _ = writeln!(
            s,
            "ranks = {}",
            join(self.ranks.iter().map(|r| r.to_string()).collect())
        );
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(
            s,
            "operators = {}",
            join(self.operators.iter().map(|k| k.to_string()).collect())
        );
        let _ = writeln!(
            s,
            "solvers = {}",
            join(self.solvers.iter().map(|k| k.to_string()).collect())
        );
        let _ = writeln!(s, "base_seed = {}", self.base_seed);
        let _ = writeln!(s, "c0 = {}", format_f64(self.c0));
        let _ = writeln!(
            s,
            "success_threshold = {}",
            format_f64(self.success_threshold)
        );
        let _ = writeln!(s, "record_timing = {}", self.record_timing);
        let _ = writeln!(
            s,
            "max_iters = {}",
            opt(sc.max_iters.map(|v| v.to_string()))
        );
        let _ = writeln!(s, "tol = {}", format_f64(sc.tol));
        let _ = writeln!(s, "tau = {}", opt(sc.tau.map(format_f64)));
        let _ = writeln!(s, "step = {}", format_f64(sc.step));
        let _ = writeln!(s, "als_reg = {}", format_f64(sc.als_reg));
        let _ = writeln!(s, "stall_window = {}", sc.stall_window);
        let _ = writeln!(s, "stall_tol = {}", format_f64(sc.stall_tol));
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub operator: OperatorKind,
    pub solver: SolverKind,
    pub rank: usize,
    pub trial: usize,
    pub seed: u64,
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub operator: OperatorKind,
    pub solver: SolverKind,
    pub rank: usize,
    pub trials: usize,
    pub mean_rel_error: f64,
    /// Sample standard deviation (`n - 1`); 0 for a single trial.
    pub std_rel_error: f64,
    pub success_rate: f64,
}

impl Aggregate {
    pub fn standard_error(&self) -> f64 {
        self.std_rel_error / (self.trials as f64).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl SweepResult {
    pub fn aggregate(
        &self,
        op: OperatorKind,
        solver: SolverKind,
        rank: usize,
    ) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.operator == op && a.solver == solver && a.rank == rank)
    }
}

/// Seed of one trial.
pub fn trial_seed(
    base_seed: u64,
    rank: usize,
    op: OperatorKind,
    solver: SolverKind,
    trial: usize,
) -> u64 {
    base_seed.wrapping_add(mix_coords(&[
        rank as u64,
        op.code(),
        solver.code(),
        trial as u64,
    ]))
}

/// Generate, measure, solve, score. Solver failures are recorded as a
/// non-converged trial with relative error 1 (the zero estimate).
pub fn run_trial(
    cfg: &ExperimentConfig,
    rank: usize,
    op_kind: OperatorKind,
    solver_kind: SolverKind,
    trial_index: usize,
) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.base_seed, rank, op_kind, solver_kind, trial_index);
    let start = Instant::now();
    let x = LowRankMatrix::generate(cfg.n1, cfg.n2, rank, child_seed(seed, 1))?;
    let op = Operator::generate(
        op_kind,
        cfg.measurements(),
        cfg.n1,
        cfg.n2,
        cfg.c0,
        child_seed(seed, 2),
    )?;
    let y = op.apply(x.entries())?;
    let (rel_error, iterations, converged) =
        match solvers::solve(solver_kind, &op, &y, &cfg.solver_config, Some(rank)) {
            Ok(res) => (
                relative_error(&res.x_hat, x.entries())?,
                res.iterations,
                res.converged,
            ),
            Err(e) => {
                log::warn!("trial {trial_index} ({op_kind}, {solver_kind}, r={rank}) failed: {e}");
                (1.0, 0, false)
            }
        };
    let wall_time_s = if cfg.record_timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(TrialRecord {
        operator: op_kind,
        solver: solver_kind,
        rank,
        trial: trial_index,
        seed,
        rel_error,
        iterations,
        converged,
        wall_time_s,
    })
}

/// Execution knobs that never change results.
#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Report progress on standard error.
    pub progress: bool,
}

fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        (a.operator, a.solver, a.rank, a.trial).cmp(&(b.operator, b.solver, b.rank, b.trial))
    });
}

pub fn run_sweep(cfg: &ExperimentConfig, opts: &SweepOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let mut coords = Vec::new();
    for &op in &cfg.operators {
        for &solver in &cfg.solvers {
            for &rank in &cfg.ranks {
                for trial in 0..cfg.trials {
                    coords.push((op, solver, rank, trial));
                }
            }
        }
    }
    coords.sort();
    coords.dedup();

    let total = coords.len();
    let done = AtomicUsize::new(0);
    let report_every = (total / 100).max(1);
    let work = || -> Result<Vec<TrialRecord>> {
        coords
            .par_iter()
            .map(|&(op, solver, rank, trial)| {
                let rec = run_trial(cfg, rank, op, solver, trial);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if opts.progress && (n.is_multiple_of(report_every) || n == total) {
                    eprintln!("[{n}/{total}] {op} {solver} r={rank}");
                }
                rec
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::param(format!("cannot build thread pool: {e}")))?;
    let mut records = pool.install(work)?;
    sort_records(&mut records);
    let aggregates = compute_aggregates(&records, cfg.success_threshold);
    Ok(SweepResult {
        config: cfg.clone(),
        records,
        aggregates,
    })
}

/// Per (operator, solver, rank) statistics, in canonical order.
pub fn compute_aggregates(records: &[TrialRecord], success_threshold: f64) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(OperatorKind, SolverKind, usize), Vec<&TrialRecord>> =
        BTreeMap::new();
    for r in records {
        groups
            .entry((r.operator, r.solver, r.rank))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((operator, solver, rank), rs)| {
            let n = rs.len() as f64;
            let mean = rs.iter().map(|r| r.rel_error).sum::<f64>() / n;
            let std = if rs.len() > 1 {
                (rs.iter().map(|r| (r.rel_error - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let ok = rs
                .iter()
                .filter(|r| r.rel_error < success_threshold)
                .count() as f64;
            Aggregate {
                operator,
                solver,
                rank,
                trials: rs.len(),
                mean_rel_error: mean,
                std_rel_error: std,
                success_rate: ok / n,
            }
        })
        .collect()
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.operator,
            r.solver,
            r.rank,
            r.trial,
            r.seed,
            format_f64(r.rel_error),
            r.iterations,
            r.converged,
            format_f64(r.wall_time_s)
        );
    }
    s
}

pub fn aggregates_to_csv(aggs: &[Aggregate], success_threshold: f64) -> String {
    let mut s = String::from(AGG_HEADER);
    s.push('\n');
    for a in aggs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            a.operator,
            a.solver,
            a.rank,
            a.trials,
            format_f64(a.mean_rel_error),
            format_f64(a.std_rel_error),
            format_f64(a.success_rate),
            format_f64(success_threshold)
        );
    }
    s
}

pub fn records_from_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse(1, "unexpected CSV header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::parse(
                ln,
                format!("expected 9 fields, found {}", f.len()),
            ));
        }
        let p = |e: Error| Error::parse(ln, e.to_string());
        out.push(TrialRecord {
            operator: f[0].parse().map_err(p)?,
            solver: f[1].parse().map_err(p)?,
            rank: parse_num("rank", f[2]).map_err(p)?,
            trial: parse_num("trial", f[3]).map_err(p)?,
            seed: parse_num("seed", f[4]).map_err(p)?,
            rel_error: parse_num("rel_error", f[5]).map_err(p)?,
            iterations: parse_num("iterations", f[6]).map_err(p)?,
            converged: parse_bool("converged", f[7]).map_err(p)?,
            wall_time_s: parse_num("wall_time_s", f[8]).map_err(p)?,
        });
    }
    Ok(out)
}

/// `sweep.csv` -> `sweep.agg.csv`; other names get `.agg.csv` appended.
pub fn aggregate_path(path: &Path) -> PathBuf {
    sibling_path(path, "agg.csv")
}

/// `x.csv` -> `x.<ext>`; other names get `.<ext>` appended.
pub fn sibling_path(path: &Path, ext: &str) -> PathBuf {
    match path.extension() {
        Some(e) if e == "csv" => path.with_extension(ext),
        _ => {
            let mut s = path.as_os_str().to_owned();
            s.push(".");
            s.push(ext);
            PathBuf::from(s)
        }
    }
}

/// Write the per-trial CSV at `path` and the aggregates next to it
/// (see [`aggregate_path`]).
pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, records_to_csv(&result.records)).map_err(|e| Error::io(path, e))?;
    let agg = aggregate_path(path);
    fs::write(
        &agg,
        aggregates_to_csv(&result.aggregates, result.config.success_threshold),
    )
    .map_err(|e| Error::io(&agg, e))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    records_from_csv(&text)
}

/// gnuplot script: one panel per solver, one curve per operator, mean
/// relative error against rank, read from the aggregate CSV `agg_csv`
/// (a path relative to the script's directory).
pub fn plot_script(result: &SweepResult, agg_csv: &str, image: &str) -> String {
    let mut solvers: Vec<SolverKind> = result.aggregates.iter().map(|a| a.solver).collect();
    solvers.dedup();
    solvers.sort();
    solvers.dedup();
    let mut ops: Vec<OperatorKind> = result.aggregates.iter().map(|a| a.operator).collect();
    ops.sort();
    ops.dedup();

    let mut s = String::new();
    let _ = writeln!(s, "# mean relative error vs rank; data: {agg_csv}");
    let _ = writeln!(s, "# columns: {AGG_HEADER}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(
        s,
        "set terminal svg size 640,{} dynamic",
        360 * solvers.len().max(1)
    );
    let _ = writeln!(s, "set output '{image}'");
    let _ = writeln!(s, "set multiplot layout {},1", solvers.len().max(1));
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set format y '10^{{%L}}'");
    let _ = writeln!(s, "set xlabel 'rank r'");
    let _ = writeln!(s, "set ylabel 'mean relative error'");
    let _ = writeln!(s, "set key outside right");
    for solver in &solvers {
        let _ = writeln!(
            s,
            "set title '{solver} ({}x{}, rho = {})'",
            result.config.n1, result.config.n2, result.config.rho
        );
        let curves: Vec<String> = ops
            .iter()
            .filter(|op| result.aggregates.iter().any(|a| a.operator == **op && a.solver == *solver))
            .map(|op| {
                format!(
                    "'{agg_csv}' every ::1 using 3:((strcol(1) eq '{op}' && strcol(2) eq '{solver}') ? $5 : 1/0) with linespoints title '{op}'"
                )
            })
            .collect();
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

/// Write [`plot_script`] to `path`, reading the aggregates of `csv_path`.
pub fn emit_plot_script(result: &SweepResult, path: &Path, csv_path: &Path) -> Result<()> {
    let agg = aggregate_path(csv_path);
    let name = |p: &Path| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let image = name(&path.with_extension("svg"));
    fs::write(path, plot_script(result, &name(&agg), &image)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            n1: 6,
            n2: 6,
            rho: 0.8,
            ranks: vec![1, 2],
            trials: 3,
            operators: vec![OperatorKind::Gaussian, OperatorKind::PiecewiseToeplitz],
            solvers: vec![SolverKind::Als],
            ..Default::default()
        }
    }

    #[test]
    fn config_round_trip_and_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.merge_str("n1 = 20\nn2=20 # square\nranks = 1..3, 6\nsolvers = als\ntau = 12.5\n")
            .unwrap();
        assert_eq!(cfg.ranks, vec![1, 2, 3, 6]);
        assert_eq!(cfg.solvers, vec![SolverKind::Als]);
        assert_eq!(cfg.solver_config.tau, Some(12.5));
        let mut back = ExperimentConfig::default();
        back.merge_str(&cfg.to_config_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let mut cfg = ExperimentConfig::default();
        match cfg.merge_str("n1 = 3\nbogus = 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let bad = ExperimentConfig {
            ranks: vec![0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            rho: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn measurement_count() {
        assert_eq!(ExperimentConfig::default().measurements(), 750);
        assert_eq!(ExperimentConfig::reduced().measurements(), 120);
    }

    #[test]
    fn single_trial_sweep() {
        let cfg = ExperimentConfig {
            ranks: vec![1],
            trials: 1,
            operators: vec![OperatorKind::Gaussian],
            ..tiny()
        };
        let res = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.aggregates.len(), 1);
        assert_eq!(res.aggregates[0].std_rel_error, 0.0);
    }

    #[test]
    fn one_by_one_full_sampling_is_exact() {
        {
            let solver = SolverKind::Als;
            let cfg = ExperimentConfig {
                n1: 1,
                n2: 1,
                rho: 1.0,
                ranks: vec![1],
                trials: 1,
                operators: vec![OperatorKind::Gaussian],
                solvers: vec![solver],
                solver_config: SolverConfig {
                    als_reg: 0.0,
                    ..Default::default()
                },
                ..Default::default()
            };
            let rec = run_trial(&cfg, 1, OperatorKind::Gaussian, solver, 0).unwrap();
            assert!(rec.rel_error < 1e-12, "{solver}: {}", rec.rel_error);
        }
    }

    #[test]
    fn full_rank_full_sampling_als() {
        let cfg = ExperimentConfig {
            n1: 5,
            n2: 5,
            rho: 1.0,
            ..tiny()
        };
        let rec = run_trial(&cfg, 5, OperatorKind::Gaussian, SolverKind::Als, 0).unwrap();
        assert!(rec.rel_error < 1e-6, "{}", rec.rel_error);
    }

    #[test]
    fn toeplitz_als_small_rank_at_full_scale() {
        let cfg = ExperimentConfig::default();
        let rec = run_trial(&cfg, 2, OperatorKind::PiecewiseToeplitz, SolverKind::Als, 0).unwrap();
        assert!(rec.rel_error < cfg.success_threshold, "{}", rec.rel_error);
        assert!(rec.converged);
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let res = run_sweep(&tiny(), &SweepOptions::default()).unwrap();
        let text = records_to_csv(&res.records);
        assert_eq!(text.lines().count(), res.records.len() + 1);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(records_from_csv(&text).unwrap(), res.records);
        assert_eq!(records_to_csv(&[]), format!("{CSV_HEADER}\n"));
        let three = &res.records[..3];
        assert_eq!(records_to_csv(three).lines().count(), 4);
    }

    #[test]
    fn aggregates_recompute_exactly() {
        let res = run_sweep(&tiny(), &SweepOptions::default()).unwrap();
        let again = compute_aggregates(
            &records_from_csv(&records_to_csv(&res.records)).unwrap(),
            1e-3,
        );
        assert_eq!(again, res.aggregates);
        // independent recomputation for one group
        let g: Vec<f64> = res
            .records
            .iter()
            .filter(|r| r.operator == OperatorKind::Gaussian && r.rank == 2)
            .map(|r| r.rel_error)
            .collect();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        let a = res
            .aggregate(OperatorKind::Gaussian, SolverKind::Als, 2)
            .unwrap();
        assert!((a.mean_rel_error - mean).abs() <= 1e-12);
    }

    #[test]
    fn ordering_is_canonical() {
        let mut cfg = tiny();
        cfg.operators.reverse();
        cfg.ranks.reverse();
        let res = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        let keys: Vec<_> = res
            .records
            .iter()
            .map(|r| (r.operator, r.solver, r.rank, r.trial))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn plot_script_is_relative_and_per_solver() {
        let mut cfg = tiny();
        cfg.operators = vec![OperatorKind::Gaussian];
        cfg.ranks = vec![1];
        cfg.trials = 1;
        let res = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        let s = plot_script(&res, "out.agg.csv", "out.svg");
        assert_eq!(s.matches("with linespoints").count(), 1);
        assert!(s.contains("multiplot layout 1,1"));
        assert!(!s.contains("'/"));

        cfg.solvers = vec![SolverKind::Svt, SolverKind::Als];
        cfg.operators = OperatorKind::RANDOM.to_vec();
        let fake = SweepResult {
            aggregates: cfg
                .operators
                .iter()
                .flat_map(|&operator| {
                    cfg.solvers.iter().map(move |&solver| Aggregate {
                        operator,
                        solver,
                        rank: 1,
                        trials: 1,
                        mean_rel_error: 0.1,
                        std_rel_error: 0.0,
                        success_rate: 0.0,
                    })
                })
                .collect(),
            config: cfg,
            records: vec![],
        };
        let s = plot_script(&fake, "a.agg.csv", "a.svg");
        assert!(s.contains("multiplot layout 2,1"));
        assert_eq!(s.matches("plot '").count(), 2);
        assert_eq!(s.matches("with linespoints").count(), 8);
    }

    #[test]
    fn aggregate_path_naming() {
        assert_eq!(
            aggregate_path(Path::new("out/sweep.csv")),
            PathBuf::from("out/sweep.agg.csv")
        );
        assert_eq!(
            aggregate_path(Path::new("sweep")),
            PathBuf::from("sweep.agg.csv")
        );
    }
}
