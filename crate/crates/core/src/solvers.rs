//! Low-rank recovery from `y = A(X)`.
//!
//! * [`svt_solve`]: singular value thresholding, a dual ascent on the
//!   nuclear-norm problem `min tau ||X||_* + ||X||_F^2 / 2  s.t. A(X) = y`.
//! * [`als_solve`]: alternating least squares on `X = L Rᵀ` with a fixed
//!   rank, started from [`spectral_init`].
//!
//! Both work with any [`SensingOperator`] through `apply`/`adjoint` (SVT)
//! or the design matrices (ALS).

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::SensingOperator;

pub const SVT_DEFAULT_MAX_ITERS: usize = 2000;
pub const ALS_DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_STEP: f64 = 1.2;
pub const DEFAULT_ALS_REG: f64 = 1e-10;

/// SVT stops as diverged once the residual exceeds this multiple of the
/// first one.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Svt,
    Als,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Svt => "svt",
            SolverKind::Als => "als",
        }
    }

    pub(crate) fn code(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "svt" => Ok(SolverKind::Svt),
            "als" => Ok(SolverKind::Als),
            other => Err(Error::param(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// `None` picks the solver default (2000 for SVT, 500 for ALS).
    pub max_iters: Option<usize>,
    /// Relative residual `||A(X) - y|| / ||y||` at which a run converges.
    pub tol: f64,
    /// SVT shrinkage; `None` uses [`default_tau`].
    pub tau: Option<f64>,
    /// SVT dual step.
    pub step: f64,
    /// ALS target rank.
    pub rank: Option<usize>,
    /// Ridge weight of the ALS least-squares subproblems.
    pub als_reg: f64,
    /// ALS stops as stalled when the residual improved by less than a
    /// factor `1 + stall_tol` over the last `stall_window` iterations.
    /// `stall_window = 0` disables the check.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: None,
            tol: DEFAULT_TOL,
            tau: None,
            step: DEFAULT_STEP,
            rank: None,
            als_reg: DEFAULT_ALS_REG,
            stall_window: 25,
            stall_tol: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == Some(0) {
            return Err(Error::param("max_iters must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol must be > 0"));
        }
        if !(self.step > 0.0) {
            return Err(Error::param("step must be > 0"));
        }
        if !(self.als_reg >= 0.0) {
            return Err(Error::param("als_reg must be >= 0"));
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0) {
                return Err(Error::param("tau must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// ALS residual stopped improving.
    Stalled,
    /// SVT residual blew up; the result holds the best iterate seen.
    Diverged,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub x_hat: DMatrix<f64>,
    pub iterations: usize,
    /// One relative residual per iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub status: SolveStatus,
    /// Filled by callers that know the ground truth.
    pub relative_error: Option<f64>,
}

impl SolveResult {
    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    fn zero(n1: usize, n2: usize) -> Self {
        SolveResult {
            x_hat: DMatrix::zeros(n1, n2),
            iterations: 1,
            residual_history: vec![0.0],
            converged: true,
            status: SolveStatus::Converged,
            relative_error: None,
        }
    }
}

/// `||X_hat - X_true||_F / ||X_true||_F`, with `0/0 = 0`.
pub fn relative_error(x_hat: &DMatrix<f64>, x_true: &DMatrix<f64>) -> Result<f64> {
    if x_hat.shape() != x_true.shape() {
        return Err(Error::param(format!(
            "shape mismatch: {:?} vs {:?}",
            x_hat.shape(),
            x_true.shape()
        )));
    }
    let num = (x_hat - x_true).norm();
    let den = x_true.norm();
    Ok(if num == 0.0 { 0.0 } else { num / den })
}

/// `U max(S - tau, 0) Vᵀ`.
pub fn singular_value_threshold(x: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::param("tau must be >= 0"));
    }
    Ok(shrink(x, tau).0)
}

/// Shrinkage plus the number of singular values that survive it.
fn shrink(x: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, usize) {
    if x.is_empty() {
        return (x.clone(), 0);
    }
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    let mut kept = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let t = s - tau;
        if t > 0.0 {
            out += (u.column(k) * t) * vt.row(k);
            kept += 1;
        }
    }
    (out, kept)
}

/// Default shrinkage level `5 sqrt(n1 n2) ||y||_1 / ||y||_2`, equivalently
/// `5 sqrt(n1 n2) mean(|y|) M / ||y||`.
pub fn default_tau(n1: usize, n2: usize, y: &DVector<f64>) -> f64 {
    let l2 = y.norm();
    if l2 == 0.0 {
        return 0.0;
    }
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    5.0 * ((n1 * n2) as f64).sqrt() * l1 / l2
}

fn relative_residual(
    op: &dyn SensingOperator,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    ynorm: f64,
) -> Result<f64> {
    Ok((op.apply(x)? - y).norm() / ynorm)
}

/// Singular value thresholding.
///
/// `X_k = shrink(A*(z_{k-1}), tau)`, `z_k = z_{k-1} + step (y - A(X_k))`,
/// `z_0 = 0`. While `step k ||A*(y)||_2 <= tau` every iterate is zero and
/// `z_k = k step y`; those iterations are counted (residual 1) without
/// being recomputed. Returns the iterate with the smallest residual.
pub fn svt_solve(
    op: &dyn SensingOperator,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    op.check_measurements(y)?;
    let (n1, n2) = (op.n1(), op.n2());
    let ynorm = y.norm();
    if ynorm == 0.0 {
        return Ok(SolveResult::zero(n1, n2));
    }
    let max_iters = cfg.max_iters.unwrap_or(SVT_DEFAULT_MAX_ITERS);
    let tau = cfg.tau.unwrap_or_else(|| default_tau(n1, n2, y));
    let step = cfg.step;

    let mut history = Vec::with_capacity(max_iters.min(4096));
    let aty = op.adjoint(y)?;
    let aty_norm = aty.clone().svd(false, false).singular_values.max();
    let idle = if aty_norm > 0.0 {
        ((tau / (step * aty_norm)).floor() as usize).min(max_iters)
    } else {
        max_iters
    };
    let mut z = y * (step * idle as f64);
    history.extend(std::iter::repeat_n(1.0, idle));

    let mut best = DMatrix::zeros(n1, n2);
    let mut best_res = if idle > 0 { 1.0 } else { f64::INFINITY };
    let mut status = SolveStatus::MaxIters;
    let mut first_res: Option<f64> = (idle > 0).then_some(1.0);

    while history.len() < max_iters {
        let (x, _) = shrink(&op.adjoint(&z)?, tau);
        let resid = y - op.apply(&x)?;
        let res = resid.norm() / ynorm;
        history.push(res);
        let first = *first_res.get_or_insert(res);
        if res < best_res {
            best_res = res;
            best = x;
        }
        if res <= cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        if !res.is_finite() || res > DIVERGENCE_FACTOR * first {
            status = SolveStatus::Diverged;
            break;
        }
        z += resid * step;
    }

    // Keep the contract "converged => last residual <= tol": the best
    // iterate is the last one whenever we converged.
    Ok(SolveResult {
        x_hat: best,
        iterations: history.len(),
        residual_history: history,
        converged: status == SolveStatus::Converged,
        status,
        relative_error: None,
    })
}

/// Top-`rank` factors of `A*(y)`, each scaled by `sqrt(sigma)`.
pub fn spectral_init(
    op: &dyn SensingOperator,
    y: &DVector<f64>,
    rank: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n1, n2) = (op.n1(), op.n2());
    if rank == 0 || rank > n1.min(n2) {
        return Err(Error::param(format!(
            "rank {rank} out of range 1..={}",
            n1.min(n2)
        )));
    }
    let z = op.adjoint(y)?;
    let svd = z.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut l = DMatrix::zeros(n1, rank);
    let mut r = DMatrix::zeros(n2, rank);
    for (c, &k) in order.iter().take(rank).enumerate() {
        let s = svd.singular_values[k].sqrt();
        l.set_column(c, &(u.column(k) * s));
        r.set_column(c, &(vt.row(k).transpose() * s));
    }
    Ok((l, r))
}

/// Ridge least squares `min ||D v - y||^2 + reg ||v||^2` through the normal
/// equations. A failed Cholesky bumps `reg` tenfold and retries.
fn ridge_solve(d: &DMatrix<f64>, y: &DVector<f64>, reg: &mut f64) -> Result<DVector<f64>> {
    // `&dt * d` takes the blocked gemm path; `tr_mul` does not
    let dt = d.transpose();
    let gram = &dt * d;
    let rhs = &dt * y;
    let scale = gram.diagonal().amax().max(f64::MIN_POSITIVE);
    for _ in 0..32 {
        let mut g = gram.clone();
        for i in 0..g.nrows() {
            g[(i, i)] += *reg;
        }
        if let Some(ch) = g.cholesky() {
            return Ok(ch.solve(&rhs));
        }
        let bumped = if *reg > 0.0 {
            *reg * 10.0
        } else {
            1e-14 * scale
        };
        warn!(
            "ALS normal equations singular; ridge {:e} -> {:e}",
            *reg, bumped
        );
        *reg = bumped;
    }
    Err(Error::degenerate("ALS normal equations stayed singular"))
}

/// `Q` of the thin QR of `f`.
fn orthonormal_basis(f: &DMatrix<f64>) -> DMatrix<f64> {
    f.clone().qr().q()
}

/// Alternating least squares on `X = L Rᵀ`.
///
/// Before each half step the fixed factor is replaced by an orthonormal
/// basis of its column space; the subproblem then has the same minimum and
/// stays well conditioned. Each half step is an exact ridge least-squares solve,
/// so the residual is non-increasing up to the ridge term.
pub fn als_solve(
    op: &dyn SensingOperator,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    op.check_measurements(y)?;
    let rank = cfg
        .rank
        .ok_or_else(|| Error::param("ALS needs a target rank"))?;
    let (n1, n2, m) = (op.n1(), op.n2(), op.measurements());
    if m < rank * (n1 + n2) {
        warn!(
            "ALS with M = {m} below r(n1 + n2) = {}; recovery is unlikely",
            rank * (n1 + n2)
        );
    }
    let (mut l, mut r) = spectral_init(op, y, rank)?;
    let ynorm = y.norm();
    if ynorm == 0.0 {
        return Ok(SolveResult::zero(n1, n2));
    }
    let max_iters = cfg.max_iters.unwrap_or(ALS_DEFAULT_MAX_ITERS);
    let mut reg = cfg.als_reg;
    let mut history: Vec<f64> = Vec::new();
    let mut status = SolveStatus::MaxIters;

    while history.len() < max_iters {
        r = orthonormal_basis(&r);
        let d = op.right_design(&r)?;
        let v = ridge_solve(&d, y, &mut reg)?;
        l = DMatrix::from_column_slice(n1, rank, v.as_slice());

        l = orthonormal_basis(&l);
        let d = op.left_design(&l)?;
        let v = ridge_solve(&d, y, &mut reg)?;
        r = DMatrix::from_column_slice(n2, rank, v.as_slice());

        let res = relative_residual(op, &(&l * r.transpose()), y, ynorm)?;
        history.push(res);
        if res <= cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        let w = cfg.stall_window;
        if w > 0 && history.len() > w {
            let before = history[history.len() - 1 - w];
            if before <= res * (1.0 + cfg.stall_tol) {
                status = SolveStatus::Stalled;
                break;
            }
        }
    }

    Ok(SolveResult {
        x_hat: &l * r.transpose(),
        iterations: history.len(),
        residual_history: history,
        converged: status == SolveStatus::Converged,
        status,
        relative_error: None,
    })
}

/// Dispatch on [`SolverKind`]; for ALS `rank` overrides `cfg.rank`.
pub fn solve(
    kind: SolverKind,
    op: &dyn SensingOperator,
    y: &DVector<f64>,
    cfg: &SolverConfig,
    rank: Option<usize>,
) -> Result<SolveResult> {
    match kind {
        SolverKind::Svt => svt_solve(op, y, cfg),
        SolverKind::Als => {
            let mut c = cfg.clone();
            if rank.is_some() {
                c.rank = rank;
            }
            als_solve(op, y, &c)
        }
    }
}

/// Residual of a candidate, exposed for diagnostics.
pub fn measurement_residual(
    op: &dyn SensingOperator,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let ynorm = y.norm();
    let r = (op.apply(x)? - y).norm();
    Ok(if ynorm == 0.0 { r } else { r / ynorm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_model::LowRankMatrix;
    use crate::operators::{DenseOperator, OperatorKind, PiecewiseToeplitzOperator};
    use proptest::prelude::*;

    fn identity_op(n1: usize, n2: usize) -> DenseOperator {
        DenseOperator::from_rows(n1, n2, DMatrix::identity(n1 * n2, n1 * n2)).unwrap()
    }

    fn vec_of(x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_column_slice(x.as_slice())
    }

    #[test]
    fn svt_tau_zero_is_identity() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.0, 4.0]);
        assert_eq!(singular_value_threshold(&x, 0.0).unwrap().shape(), (2, 3));
        assert!((singular_value_threshold(&x, 0.0).unwrap() - &x).norm() < 1e-12);
        assert!(singular_value_threshold(&x, -1.0).is_err());
    }

    #[test]
    fn svt_shrinks_diagonal() {
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let out = singular_value_threshold(&x, 2.0).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((out - want).norm() < 1e-12);
    }

    #[test]
    fn svt_at_second_singular_value_leaves_rank_one() {
        let x = DMatrix::from_fn(5, 4, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 1.7 + 0.1 * (i * j) as f64
        });
        let s = crate::linalg::singular_values(&x);
        let out = singular_value_threshold(&x, s[1]).unwrap();
        assert_eq!(
            crate::linalg::numerical_rank(&out, crate::linalg::RANK_RTOL),
            1
        );
    }

    #[test]
    fn relative_error_examples() {
        let x = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
        assert_eq!(relative_error(&DMatrix::zeros(1, 2), &x).unwrap(), 1.0);
        assert!((relative_error(&(&x * 2.0), &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((relative_error(&(&x * 1.1), &x).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(
            relative_error(&DMatrix::zeros(1, 2), &DMatrix::zeros(1, 2)).unwrap(),
            0.0
        );
        assert!(relative_error(&DMatrix::zeros(2, 1), &x).is_err());
    }

    #[test]
    fn zero_measurements_give_zero_estimate() {
        let op = identity_op(2, 3);
        let y = DVector::zeros(6);
        for kind in [SolverKind::Svt, SolverKind::Als] {
            let res = solve(kind, &op, &y, &SolverConfig::default(), Some(1)).unwrap();
            assert_eq!(res.x_hat, DMatrix::zeros(2, 3));
            assert!(res.converged);
        }
        let (l, r) = spectral_init(&op, &y, 1).unwrap();
        assert_eq!(l.norm() + r.norm(), 0.0);
    }

    #[test]
    fn spectral_init_identity_operator() {
        let x = LowRankMatrix::generate(4, 6, 2, 3).unwrap();
        let op = identity_op(4, 6);
        let y = op.apply(x.entries()).unwrap();
        let (l, r) = spectral_init(&op, &y, 2).unwrap();
        assert_eq!(l.shape(), (4, 2));
        assert_eq!(r.shape(), (6, 2));
        assert!((&l * r.transpose() - x.entries()).norm() < 1e-10 * x.entries().norm());
        assert!(spectral_init(&op, &y, 0).is_err());
        assert!(spectral_init(&op, &y, 5).is_err());
    }

    #[test]
    fn svt_exact_with_identity_sampling() {
        let x = LowRankMatrix::generate(3, 4, 2, 11).unwrap();
        let op = identity_op(3, 4);
        let y = op.apply(x.entries()).unwrap();
        let cfg = SolverConfig {
            tau: Some(0.0),
            step: 1.0,
            ..Default::default()
        };
        let res = svt_solve(&op, &y, &cfg).unwrap();
        assert!(res.converged);
        assert!(relative_error(&res.x_hat, x.entries()).unwrap() < 1e-12);
        assert!(*res.residual_history.last().unwrap() <= cfg.tol);
    }

    #[test]
    fn als_exact_with_full_sampling() {
        for kind in [OperatorKind::Gaussian, OperatorKind::PiecewiseToeplitz] {
            let x = LowRankMatrix::generate(5, 5, 2, 4).unwrap();
            let op = crate::operators::Operator::generate(kind, 25, 5, 5, 4.0, 9).unwrap();
            let y = op.apply(x.entries()).unwrap();
            let res = solve(SolverKind::Als, &op, &y, &SolverConfig::default(), Some(2)).unwrap();
            assert!(
                relative_error(&res.x_hat, x.entries()).unwrap() < 1e-6,
                "{kind}"
            );
        }
    }

    #[test]
    fn als_requires_rank() {
        let op = identity_op(2, 2);
        let y = DVector::from_element(4, 1.0);
        assert!(matches!(
            als_solve(&op, &y, &SolverConfig::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn als_residual_is_monotone() {
        let x = LowRankMatrix::generate(8, 8, 2, 1).unwrap();
        let op = DenseOperator::generate(40, 8, 8, OperatorKind::Gaussian, 2).unwrap();
        let y = op.apply(x.entries()).unwrap();
        let cfg = SolverConfig {
            rank: Some(2),
            max_iters: Some(60),
            stall_window: 0,
            ..Default::default()
        };
        let res = als_solve(&op, &y, &cfg).unwrap();
        for w in res.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn als_recovers_small_problem() {
        let mut ok = 0;
        for seed in 0..10u64 {
            let x = LowRankMatrix::generate(10, 10, 2, seed).unwrap();
            let op =
                DenseOperator::generate(120, 10, 10, OperatorKind::Gaussian, 1000 + seed).unwrap();
            let y = op.apply(x.entries()).unwrap();
            let cfg = SolverConfig {
                max_iters: Some(200),
                ..Default::default()
            };
            let res = solve(SolverKind::Als, &op, &y, &cfg, Some(2)).unwrap();
            if relative_error(&res.x_hat, x.entries()).unwrap() < 1e-6 {
                ok += 1;
            }
        }
        assert!(ok >= 9, "{ok}/10");
    }

    #[test]
    fn svt_recovers_rank_one() {
        let mut ok = 0;
        for seed in 0..10u64 {
            let x = LowRankMatrix::generate(10, 10, 1, seed).unwrap();
            let op =
                DenseOperator::generate(80, 10, 10, OperatorKind::Gaussian, 1000 + seed).unwrap();
            let y = op.apply(x.entries()).unwrap();
            let res = svt_solve(&op, &y, &SolverConfig::default()).unwrap();
            if relative_error(&res.x_hat, x.entries()).unwrap() < 1e-3 {
                ok += 1;
            }
        }
        assert!(ok >= 9, "{ok}/10");
    }

    #[test]
    fn structured_and_materialized_solves_agree() {
        let x = LowRankMatrix::generate(6, 8, 1, 5).unwrap();
        let t = PiecewiseToeplitzOperator::generate(30, 6, 8, 4.0, 6).unwrap();
        let d = t.materialize();
        let y = t.apply(x.entries()).unwrap();
        for kind in [SolverKind::Svt, SolverKind::Als] {
            let cfg = SolverConfig {
                max_iters: Some(100),
                ..Default::default()
            };
            let a = solve(kind, &t, &y, &cfg, Some(1)).unwrap();
            let b = solve(kind, &d, &y, &cfg, Some(1)).unwrap();
            assert!(
                (&a.x_hat - &b.x_hat).norm() <= 1e-8 * a.x_hat.norm().max(1.0),
                "{kind}"
            );
        }
    }

    #[test]
    fn rejects_bad_measurement_length() {
        let op = identity_op(2, 2);
        let y = DVector::zeros(3);
        assert!(svt_solve(&op, &y, &SolverConfig::default()).is_err());
        let bad = SolverConfig {
            step: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn measurement_residual_of_truth_is_zero() {
        let x = LowRankMatrix::generate(3, 3, 1, 0).unwrap();
        let op = identity_op(3, 3);
        let y = vec_of(x.entries());
        assert!(measurement_residual(&op, x.entries(), &y).unwrap() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn shrinkage_lowers_each_singular_value(vals in proptest::collection::vec(-5.0f64..5.0, 12), tau in 0.0f64..4.0) {
            let x = DMatrix::from_column_slice(3, 4, &vals);
            let s = crate::linalg::singular_values(&x);
            let t = crate::linalg::singular_values(&singular_value_threshold(&x, tau).unwrap());
            for (a, b) in s.iter().zip(t.iter()) {
                prop_assert!((b - (a - tau).max(0.0)).abs() <= 1e-10);
            }
        }
    }
}
