//! Effective sensing matrix of a decomposed low-rank matrix and the
//! coherence measurements built on it.
//!
//! With `vec(X) = Psi f`, the measurements read `y = A Psi f = Theta f`.
//! `Theta` keeps one `M x n1` block per column of `X`; blocks at secondary
//! indices are zero and the block at primary index `p` is
//!
//! ```text
//! Theta[p] = A[p] + sum_{s in star} alpha[s, p] * A[s]
//! ```
//!
//! which is again Toeplitz when every `A[i]` is.

use std::fmt;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, hcat};
use crate::matrix_model::{BlockSparseVector, LowRankMatrix, RankDecomposition};
use crate::operators::{truncated_normal_variance, PiecewiseToeplitzOperator, SensingOperator};
use crate::rng::{child_seed, mix_coords, rng_from_seed};

/// `sqrt(2) - 1`, the classical sufficient RIP level; used only as an
/// advisory flag in [`GramReport`].
pub const RIP_ADVISORY_THRESHOLD: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Relative singular-value floor for certifying uniqueness.
pub const UNIQUENESS_RTOL: f64 = 1e-8;

/// Default cap on the number of enumerated block supports.
pub const DEFAULT_PROBE_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMatrix {
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub diamond: Vec<usize>,
    /// `n2` blocks of shape `M x n1`, zero outside `diamond`.
    pub column_blocks: Vec<DMatrix<f64>>,
}

impl ThetaMatrix {
    /// Assemble from explicit primary blocks (one per entry of `diamond`).
    pub fn from_primary_blocks(
        n2: usize,
        diamond: Vec<usize>,
        primary: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if diamond.len() != primary.len() || primary.is_empty() {
            return Err(Error::param("need one block per primary index"));
        }
        let (m, n1) = primary[0].shape();
        if primary.iter().any(|b| b.shape() != (m, n1)) || diamond.iter().any(|&p| p >= n2) {
            return Err(Error::param("inconsistent theta blocks"));
        }
        let mut column_blocks = vec![DMatrix::zeros(m, n1); n2];
        for (&p, b) in diamond.iter().zip(primary) {
            column_blocks[p] = b;
        }
        Ok(ThetaMatrix {
            m,
            n1,
            n2,
            diamond,
            column_blocks,
        })
    }

    /// Full `M x (n1 n2)` matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        hcat(&self.column_blocks.iter().collect::<Vec<_>>())
    }

    /// `Theta[diamond]`: the `M x (n1 r)` submatrix of primary blocks.
    pub fn primary_submatrix(&self) -> DMatrix<f64> {
        hcat(
            &self
                .diamond
                .iter()
                .map(|&p| &self.column_blocks[p])
                .collect::<Vec<_>>(),
        )
    }

    pub fn apply_block_sparse(&self, f: &BlockSparseVector) -> Result<DVector<f64>> {
        if f.n1 != self.n1 || f.n2 != self.n2 {
            return Err(Error::param("block-sparse vector has the wrong shape"));
        }
        let mut y = DVector::zeros(self.m);
        for (&b, v) in f.active_blocks.iter().zip(&f.values) {
            y += &self.column_blocks[b] * v;
        }
        Ok(y)
    }

    pub fn primary_blocks_are_toeplitz(&self) -> bool {
        self.diamond
            .iter()
            .all(|&p| linalg::is_toeplitz(&self.column_blocks[p]))
    }
}

/// Build `Theta` for operator `op` and decomposition `decomp`.
pub fn build_theta(op: &dyn SensingOperator, decomp: &RankDecomposition) -> Result<ThetaMatrix> {
    if op.n1() != decomp.n1 || op.n2() != decomp.n2 {
        return Err(Error::param(format!(
            "operator is {}x{}, decomposition is {}x{}",
            op.n1(),
            op.n2(),
            decomp.n1,
            decomp.n2
        )));
    }
    let (m, n1) = (op.measurements(), op.n1());
    let secondary: Vec<DMatrix<f64>> = decomp.star.iter().map(|&s| op.block(s)).collect();
    let mut column_blocks = vec![DMatrix::zeros(m, n1); decomp.n2];
    for (j, &p) in decomp.diamond.iter().enumerate() {
        let mut t = op.block(p);
        for (s, a_s) in secondary.iter().enumerate() {
            t += a_s * decomp.alpha[(s, j)];
        }
        column_blocks[p] = t;
    }
    Ok(ThetaMatrix {
        m,
        n1,
        n2: decomp.n2,
        diamond: decomp.diamond.clone(),
        column_blocks,
    })
}

/// Coherence summary of the normalized Gram matrix of `Theta[diamond]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramReport {
    /// Largest squared-norm deviation of a column from its block's mean
    /// squared norm (the empirical scale), and never below `max |g_ii - 1|`.
    pub eps1: f64,
    /// Largest off-diagonal absolute row sum of the normalized Gram matrix.
    pub eps2: f64,
    pub eps: f64,
    pub gershgorin_interval: (f64, f64),
    pub eig_min: f64,
    pub eig_max: f64,
    /// `eps < sqrt(2) - 1`. Advisory only.
    pub rip_advisory: bool,
}

impl GramReport {
    /// Spectrum inside the Gershgorin interval, allowing `slack` for the
    /// eigensolver's rounding.
    pub fn spectrum_contained(&self, slack: f64) -> bool {
        let (lo, hi) = self.gershgorin_interval;
        self.eig_min >= lo - slack && self.eig_max <= hi + slack
    }
}

impl fmt::Display for GramReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eps1 (empirical-scale surrogate) = {:.6e}", self.eps1)?;
        writeln!(f, "eps2 (max off-diagonal row sum)  = {:.6e}", self.eps2)?;
        writeln!(f, "eps = eps1 + eps2                = {:.6e}", self.eps)?;
        writeln!(
            f,
            "gershgorin interval              = [{:.6}, {:.6}]",
            self.gershgorin_interval.0, self.gershgorin_interval.1
        )?;
        writeln!(
            f,
            "gram eigenvalues                 = [{:.6}, {:.6}]",
            self.eig_min, self.eig_max
        )?;
        write!(
            f,
            "advisory eps < sqrt(2)-1         = {}",
            if self.rip_advisory { "yes" } else { "no" }
        )
    }
}

pub fn gram_report(theta: &ThetaMatrix) -> Result<GramReport> {
    if theta.diamond.is_empty() {
        return Err(Error::degenerate("theta has no primary blocks"));
    }
    let sub = theta.primary_submatrix();
    let n1 = theta.n1;
    let sq_norms: Vec<f64> = sub.column_iter().map(|c| c.norm_squared()).collect();
    if let Some(k) = sq_norms.iter().position(|&v| v == 0.0) {
        return Err(Error::degenerate(format!(
            "column {k} of Theta[diamond] is zero"
        )));
    }

    let mut eps1: f64 = 0.0;
    for block in sq_norms.chunks(n1) {
        let scale = block.iter().sum::<f64>() / block.len() as f64;
        for &v in block {
            eps1 = eps1.max((v / scale - 1.0).abs());
        }
    }

    let mut normalized = sub;
    for (mut c, v) in normalized.column_iter_mut().zip(&sq_norms) {
        c /= v.sqrt();
    }
    let g = normalized.tr_mul(&normalized);
    let k = g.nrows();
    let mut eps2: f64 = 0.0;
    for i in 0..k {
        eps1 = eps1.max((g[(i, i)] - 1.0).abs());
        let r: f64 = (0..k).filter(|&j| j != i).map(|j| g[(i, j)].abs()).sum();
        eps2 = eps2.max(r);
    }
    let eig = SymmetricEigen::new(g).eigenvalues;
    let eig_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let eig_max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = eps1 + eps2;
    Ok(GramReport {
        eps1,
        eps2,
        eps,
        gershgorin_interval: (1.0 - eps, 1.0 + eps),
        eig_min,
        eig_max,
        rip_advisory: eps < RIP_ADVISORY_THRESHOLD,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeMode {
    ExactEnumeration,
    SampledProbe,
}

impl std::str::FromStr for ProbeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" | "exact_enumeration" => Ok(ProbeMode::ExactEnumeration),
            "sampled" | "sampled_probe" => Ok(ProbeMode::SampledProbe),
            other => Err(Error::param(format!("unknown probe mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub mode: ProbeMode,
    /// Smallest singular value (exact) or smallest `||A(X')||` over unit
    /// Frobenius-norm directions (sampled).
    pub min_sigma: f64,
    /// Largest singular value / measurement norm seen, the reference scale
    /// for certification.
    pub max_sigma: f64,
    pub witnesses_checked: usize,
    pub certified: bool,
}

impl fmt::Display for UniquenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            ProbeMode::ExactEnumeration => "exact enumeration",
            ProbeMode::SampledProbe => "sampled probe",
        };
        write!(
            f,
            "{mode}: min_sigma = {:.6e}, max_sigma = {:.6e}, witnesses = {}, certified = {}",
            self.min_sigma, self.max_sigma, self.witnesses_checked, self.certified
        )
    }
}

/// `C(n, k)`, saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Check that no nonzero matrix supported on `2r` column blocks (exact
/// mode) or no sampled rank-`2r` direction (sampled mode) is annihilated
/// by `op`.
///
/// Exact enumeration covers every block support of size `min(2r, n2)` and
/// is a sufficient condition; the sampled probe only gives evidence.
pub fn uniqueness_probe(
    op: &dyn SensingOperator,
    r: usize,
    mode: ProbeMode,
    budget: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let (m, n1, n2) = (op.measurements(), op.n1(), op.n2());
    if r == 0 || r > n1.min(n2) {
        return Err(Error::param(format!("rank {r} out of range")));
    }
    match mode {
        ProbeMode::ExactEnumeration => {
            let k = (2 * r).min(n2);
            let supports = binomial(n2, k);
            if supports > budget {
                return Err(Error::param(format!(
                    "exact enumeration needs C({n2},{k}) = {supports} supports, budget is {budget}"
                )));
            }
            if m < k * n1 {
                return Ok(UniquenessReport {
                    mode,
                    min_sigma: 0.0,
                    max_sigma: 0.0,
                    witnesses_checked: 0,
                    certified: false,
                });
            }
            let blocks: Vec<DMatrix<f64>> = (0..n2).map(|i| op.block(i)).collect();
            let mut min_sigma = f64::INFINITY;
            let mut max_sigma: f64 = 0.0;
            let mut checked = 0;
            for support in (0..n2).combinations(k) {
                let sub = hcat(&support.iter().map(|&i| &blocks[i]).collect::<Vec<_>>());
                let s = linalg::singular_values(&sub);
                min_sigma = min_sigma.min(*s.last().unwrap_or(&0.0));
                max_sigma = max_sigma.max(*s.first().unwrap_or(&0.0));
                checked += 1;
            }
            Ok(UniquenessReport {
                mode,
                min_sigma,
                max_sigma,
                witnesses_checked: checked,
                certified: min_sigma > UNIQUENESS_RTOL * max_sigma,
            })
        }
        ProbeMode::SampledProbe => {
            if budget == 0 {
                return Err(Error::param("sampled probe needs a positive budget"));
            }
            let mut min_sigma = f64::INFINITY;
            let mut max_sigma: f64 = 0.0;
            for w in 0..budget {
                let x = rank_2r_direction(n1, n2, r, child_seed(seed, w as u64))?;
                let v = op.apply(&x)?.norm();
                min_sigma = min_sigma.min(v);
                max_sigma = max_sigma.max(v);
            }
            Ok(UniquenessReport {
                mode,
                min_sigma,
                max_sigma,
                witnesses_checked: budget,
                certified: min_sigma > UNIQUENESS_RTOL * max_sigma,
            })
        }
    }
}

/// `X' = X1 - X2` for two independent rank-`r` factor products, scaled to
/// unit Frobenius norm; rank at most `2r`.
pub fn rank_2r_direction(n1: usize, n2: usize, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = rng_from_seed(seed);
    let mut draw =
        |rows: usize| DMatrix::<f64>::from_fn(rows, r, |_, _| StandardNormal.sample(&mut rng));
    let x1 = draw(n1) * draw(n2).transpose();
    let x2 = draw(n1) * draw(n2).transpose();
    let d = x1 - x2;
    let n = d.norm();
    if n == 0.0 {
        return Err(Error::degenerate("sampled direction vanished"));
    }
    Ok(d / n)
}

/// Smallest `M` of the measurement bound `c r^2 (n1 + n2) ln(n1 n2)`.
pub fn measurement_bound(n1: usize, n2: usize, r: usize, constant: f64) -> Result<u64> {
    if !(constant > 0.0) {
        return Err(Error::param("constant must be positive"));
    }
    let v = constant * (r * r) as f64 * (n1 + n2) as f64 * ((n1 * n2) as f64).ln();
    Ok(v.ceil().max(0.0) as u64)
}

/// Proof cases probed by [`concentration_study`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProofCase {
    /// Same block, same internal column: squared norm vs its scale.
    SameBlockSameColumn,
    /// Different blocks, same internal column: inner product vs `kappa sigma^2 M`.
    CrossBlockSameColumn,
    /// Same block, columns `offset` apart: raw inner product.
    SameBlockOffset { offset: usize },
    /// Different blocks, different internal columns: raw inner product.
    CrossBlockCrossColumn,
}

impl ProofCase {
    pub fn number(self) -> usize {
        match self {
            ProofCase::SameBlockSameColumn => 1,
            ProofCase::CrossBlockSameColumn => 2,
            ProofCase::SameBlockOffset { .. } => 3,
            ProofCase::CrossBlockCrossColumn => 4,
        }
    }

    pub fn offset(self) -> Option<usize> {
        match self {
            ProofCase::SameBlockOffset { offset } => Some(offset),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConcentrationConfig {
    pub m_grid: Vec<usize>,
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub trials: usize,
    /// Thresholds `t0..t3` for cases 1..4.
    pub thresholds: [f64; 4],
    pub c0: f64,
    pub seed: u64,
}

/// Tail frequency of one case at one `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub case: ProofCase,
    pub m: usize,
    pub threshold: f64,
    pub exceed: usize,
    pub trials: usize,
}

impl TailRow {
    pub fn frequency(&self) -> f64 {
        self.exceed as f64 / self.trials as f64
    }

    /// Binomial standard error of [`Self::frequency`].
    pub fn standard_error(&self) -> f64 {
        let p = self.frequency();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub config: ConcentrationConfig,
    /// Per `M`: trial-averaged empirical `gamma_i`, one per primary slot.
    pub gamma_estimates: Vec<Vec<f64>>,
    /// Per `M`: trial-averaged `kappa_ij` for `i < j`, in row-major pair order.
    pub kappa_estimates: Vec<Vec<f64>>,
    pub deviation_thresholds: [f64; 4],
    /// Rows ordered by case, then offset, then `M` in grid order. Cases
    /// that have no column pair at the requested rank are absent.
    pub empirical_tail_freqs: Vec<TailRow>,
}

impl ConcentrationReport {
    pub fn rows_for(&self, case: ProofCase) -> Vec<&TailRow> {
        self.empirical_tail_freqs
            .iter()
            .filter(|r| r.case == case)
            .collect()
    }

    pub fn cases(&self) -> Vec<ProofCase> {
        self.empirical_tail_freqs
            .iter()
            .map(|r| r.case)
            .unique()
            .collect()
    }

    /// CSV with header `case,offset,M,threshold,exceed,trials,freq`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,offset,M,threshold,exceed,trials,freq\n");
        for row in &self.empirical_tail_freqs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.case.number(),
                row.case.offset().map_or(String::new(), |d| d.to_string()),
                row.m,
                row.threshold,
                row.exceed,
                row.trials,
                row.frequency()
            ));
        }
        out
    }
}

impl fmt::Display for ConcentrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "concentration study: n1={} n2={} r={} trials={} c0={}",
            self.config.n1, self.config.n2, self.config.r, self.config.trials, self.config.c0
        )?;
        for row in &self.empirical_tail_freqs {
            let case = match row.case.offset() {
                Some(d) => format!("case 3 (d={d})"),
                None => format!("case {}", row.case.number()),
            };
            writeln!(
                f,
                "  {case:<14} M={:<6} t={:<8} freq={:.4} (+/- {:.4})",
                row.m,
                row.threshold,
                row.frequency(),
                row.standard_error()
            )?;
        }
        Ok(())
    }
}

/// Largest deviation per case within one trial.
struct TrialDeviations {
    gammas: Vec<f64>,
    kappas: Vec<f64>,
    /// Keyed like the report rows; `None` where the case has no pairs.
    case1: f64,
    case2: Option<f64>,
    case3: Vec<f64>,
    case4: Option<f64>,
}

fn trial_deviations(cfg: &ConcentrationConfig, m: usize, trial: usize) -> Result<TrialDeviations> {
    let seed = mix_coords(&[cfg.seed, m as u64, trial as u64]);
    let x = LowRankMatrix::generate(cfg.n1, cfg.n2, cfg.r, child_seed(seed, 1))?;
    let decomp = x
        .generating_decomposition()
        .expect("generated matrices keep their decomposition");
    let op = PiecewiseToeplitzOperator::generate(m, cfg.n1, cfg.n2, cfg.c0, child_seed(seed, 2))?;
    let theta = build_theta(&op, decomp)?;
    let sigma2 = truncated_normal_variance(m, cfg.c0);
    let (n1, r) = (cfg.n1, cfg.r);
    let cols: Vec<&DMatrix<f64>> = decomp
        .diamond
        .iter()
        .map(|&p| &theta.column_blocks[p])
        .collect();
    let col = |i: usize, q: usize| cols[i].column(q);

    let mut gammas = Vec::with_capacity(r);
    let mut case1: f64 = 0.0;
    for i in 0..r {
        let sq: Vec<f64> = (0..n1).map(|q| col(i, q).norm_squared()).collect();
        let scale = sq.iter().sum::<f64>() / n1 as f64;
        gammas.push((scale / (sigma2 * m as f64)).sqrt());
        for v in sq {
            case1 = case1.max((v - scale).abs());
        }
    }

    let mut kappas = Vec::new();
    let mut case2 = None::<f64>;
    let mut case4 = None::<f64>;
    for i in 0..r {
        for j in (i + 1)..r {
            let kappa: f64 = (0..decomp.star.len())
                .map(|s| decomp.alpha[(s, i)] * decomp.alpha[(s, j)])
                .sum();
            kappas.push(kappa);
            let center = kappa * sigma2 * m as f64;
            for q in 0..n1 {
                let dev = (col(i, q).dot(&col(j, q)) - center).abs();
                case2 = Some(case2.map_or(dev, |c| c.max(dev)));
            }
            for q1 in 0..n1 {
                for q2 in 0..n1 {
                    if q1 != q2 {
                        let dev = col(i, q1).dot(&col(j, q2)).abs();
                        case4 = Some(case4.map_or(dev, |c| c.max(dev)));
                    }
                }
            }
        }
    }

    let case3 = (1..n1)
        .map(|d| {
            let mut best: f64 = 0.0;
            for i in 0..r {
                for q in 0..n1 - d {
                    best = best.max(col(i, q).dot(&col(i, q + d)).abs());
                }
            }
            best
        })
        .collect();

    Ok(TrialDeviations {
        gammas,
        kappas,
        case1,
        case2,
        case3,
        case4,
    })
}

/// Monte Carlo tail frequencies of the four column-pair cases.
///
/// Each trial draws a fresh piecewise Toeplitz operator (Gaussian entries
/// truncated at `sqrt(c0/M)`) and a fresh rank-`r` matrix, forms `Theta`,
/// and records per case the largest deviation over all column pairs of
/// that case. The frequency is the share of trials whose largest deviation
/// reaches the case threshold. `sigma^2` is the variance of the truncated
/// entry law.
pub fn concentration_study(cfg: &ConcentrationConfig) -> Result<ConcentrationReport> {
    if cfg.m_grid.is_empty() {
        return Err(Error::param("M grid is empty"));
    }
    if cfg.m_grid.iter().any(|&m| m < 2) {
        return Err(Error::param("every M in the grid must be >= 2"));
    }
    if cfg.trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }

    let mut gamma_estimates = Vec::new();
    let mut kappa_estimates = Vec::new();
    // (case, m index) -> exceed count
    let mut rows: Vec<TailRow> = Vec::new();
    let mut push = |case: ProofCase, m: usize, threshold: f64, exceed: usize| {
        rows.push(TailRow {
            case,
            m,
            threshold,
            exceed,
            trials: cfg.trials,
        })
    };

    for &m in &cfg.m_grid {
        let devs: Vec<TrialDeviations> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial_deviations(cfg, m, t))
            .collect::<Result<_>>()?;
        let tf = cfg.trials as f64;
        let mut g = vec![0.0; cfg.r];
        let mut k = vec![0.0; devs[0].kappas.len()];
        for d in &devs {
            g.iter_mut().zip(&d.gammas).for_each(|(a, b)| *a += b / tf);
            k.iter_mut().zip(&d.kappas).for_each(|(a, b)| *a += b / tf);
        }
        gamma_estimates.push(g);
        kappa_estimates.push(k);

        let t = cfg.thresholds;
        push(
            ProofCase::SameBlockSameColumn,
            m,
            t[0],
            devs.iter().filter(|d| d.case1 >= t[0]).count(),
        );
        if devs[0].case2.is_some() {
            let c = devs
                .iter()
                .filter(|d| d.case2.is_some_and(|v| v >= t[1]))
                .count();
            push(ProofCase::CrossBlockSameColumn, m, t[1], c);
        }
        for off in 1..cfg.n1 {
            let c = devs.iter().filter(|d| d.case3[off - 1] >= t[2]).count();
            push(ProofCase::SameBlockOffset { offset: off }, m, t[2], c);
        }
        if devs[0].case4.is_some() {
            let c = devs
                .iter()
                .filter(|d| d.case4.is_some_and(|v| v >= t[3]))
                .count();
            push(ProofCase::CrossBlockCrossColumn, m, t[3], c);
        }
    }

    let order: Vec<usize> = cfg.m_grid.clone();
    rows.sort_by_key(|row| (row.case, order.iter().position(|&m| m == row.m)));
    Ok(ConcentrationReport {
        config: cfg.clone(),
        gamma_estimates,
        kappa_estimates,
        deviation_thresholds: cfg.thresholds,
        empirical_tail_freqs: rows,
    })
}

/// Rows whose frequency rises above an earlier (smaller-`M`) row of the
/// same case by more than `k` combined standard errors.
pub fn concentration_violations(report: &ConcentrationReport, k: f64) -> Vec<(TailRow, TailRow)> {
    let mut out = Vec::new();
    for case in report.cases() {
        let mut rows = report.rows_for(case);
        rows.sort_by_key(|r| r.m);
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                let se = (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt();
                if b.frequency() > a.frequency() + k * se {
                    out.push(((*a).clone(), (*b).clone()));
                }
            }
        }
    }
    out
}
