//! C ABI for `ptsense`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Every fallible call returns a [`PtsStatus`]; on failure the message is
//! kept per thread and read with [`pts_last_error_message`]. Matrices cross
//! the boundary in column-major order. Panics are caught and reported as
//! `PTS_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use ptsense::coherence::measurement_bound;
use ptsense::matrix_model::LowRankMatrix;
use ptsense::solvers::{self, relative_error, SolverConfig, SolverKind};
use ptsense::{Error, Operator, OperatorKind, SensingOperator};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtsStatus {
    PtsOk = 0,
    PtsErrNull = 1,
    PtsErrParameter = 2,
    PtsErrDegenerate = 3,
    PtsErrParse = 4,
    PtsErrIo = 5,
    PtsErrPanic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtsOperatorKind {
    PtsGaussian = 0,
    PtsBernoulli = 1,
    PtsThreeValued = 2,
    PtsPiecewiseToeplitz = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtsSolver {
    PtsSvt = 0,
    PtsAls = 1,
}

/// Opaque sensing operator.
pub struct PtsOperator(Operator);

/// Opaque dense matrix.
pub struct PtsMatrix(DMatrix<f64>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PtsStatus {
    match e {
        Error::Parameter(_) => PtsStatus::PtsErrParameter,
        Error::Degenerate(_) => PtsStatus::PtsErrDegenerate,
        Error::Parse { .. } => PtsStatus::PtsErrParse,
        Error::Io { .. } => PtsStatus::PtsErrIo,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PtsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtsStatus::PtsOk,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PtsStatus::PtsErrNull
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            PtsStatus::PtsErrPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL;
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pts_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// New `rows x cols` matrix from column-major `data`.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pts_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut PtsMatrix,
) -> PtsStatus {
    guard(|| {
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::param("matrix size overflows"))?;
        let d = slice(data, n, "data")?;
        write_out(
            out,
            boxed(PtsMatrix(DMatrix::from_column_slice(rows, cols, d))),
            "out",
        )
    })
}

/// Random `n1 x n2` matrix of rank `r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pts_matrix_low_rank(
    n1: usize,
    n2: usize,
    r: usize,
    seed: u64,
    out: *mut *mut PtsMatrix,
) -> PtsStatus {
    guard(|| {
        let x = LowRankMatrix::generate(n1, n2, r, seed)?;
        write_out(out, boxed(PtsMatrix(x.into_entries())), "out")
    })
}

/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn pts_matrix_rows(m: *const PtsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn pts_matrix_cols(m: *const PtsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.ncols())
}

/// Copy the entries (column-major) into `buf`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pts_matrix_data(
    m: *const PtsMatrix,
    buf: *mut f64,
    len: usize,
) -> PtsStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let src = m.0.as_slice();
        if len != src.len() {
            return Err(Error::param(format!(
                "buffer holds {len} values, matrix has {}",
                src.len()
            ))
            .into());
        }
        if buf.is_null() && len > 0 {
            return Err(Fail::Null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, len);
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pts_matrix_free(m: *mut PtsMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `||a - b||_F / ||b||_F`.
///
/// # Safety
/// `a`, `b` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pts_relative_error(
    a: *const PtsMatrix,
    b: *const PtsMatrix,
    out: *mut f64,
) -> PtsStatus {
    guard(|| {
        let e = relative_error(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        write_out(out, e, "out")
    })
}

/// Random operator with `m` measurements of `n1 x n2` matrices. `c0` is
/// the truncation constant of the piecewise Toeplitz law (ignored for the
/// other kinds).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_generate(
    kind: PtsOperatorKind,
    m: usize,
    n1: usize,
    n2: usize,
    c0: f64,
    seed: u64,
    out: *mut *mut PtsOperator,
) -> PtsStatus {
    guard(|| {
        let kind = match kind {
            PtsOperatorKind::PtsGaussian => OperatorKind::Gaussian,
            PtsOperatorKind::PtsBernoulli => OperatorKind::Bernoulli,
            PtsOperatorKind::PtsThreeValued => OperatorKind::ThreeValued,
            PtsOperatorKind::PtsPiecewiseToeplitz => OperatorKind::PiecewiseToeplitz,
        };
        let op = Operator::generate(kind, m, n1, n2, c0, seed)?;
        write_out(out, boxed(PtsOperator(op)), "out")
    })
}

/// Dense copy of an operator (same measurements, explicit storage).
///
/// # Safety
/// `op` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_materialize(
    op: *const PtsOperator,
    out: *mut *mut PtsOperator,
) -> PtsStatus {
    guard(|| {
        let op = deref(op, "op")?;
        write_out(out, boxed(PtsOperator(op.0.materialize().into())), "out")
    })
}

/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_measurements(op: *const PtsOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.measurements())
}

/// Stored floating-point values.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_storage_cost(op: *const PtsOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.storage_cost())
}

/// `y = A(X)`; `y` holds `len` doubles, `len` must equal the measurement count.
///
/// # Safety
/// `op`, `x` live handles; `y` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_apply(
    op: *const PtsOperator,
    x: *const PtsMatrix,
    y: *mut f64,
    len: usize,
) -> PtsStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let v = op.0.apply(&deref(x, "x")?.0)?;
        if len != v.len() {
            return Err(Error::param(format!(
                "buffer holds {len} values, operator has {} measurements",
                v.len()
            ))
            .into());
        }
        if y.is_null() {
            return Err(Fail::Null("y"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), y, len);
        Ok(())
    })
}

/// `A*(y)` as a new matrix.
///
/// # Safety
/// `op` live handle; `y` points to `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_adjoint(
    op: *const PtsOperator,
    y: *const f64,
    len: usize,
    out: *mut *mut PtsMatrix,
) -> PtsStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let y = DVector::from_column_slice(slice(y, len, "y")?);
        let x = op.0.adjoint(&y)?;
        write_out(out, boxed(PtsMatrix(x)), "out")
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pts_operator_free(op: *mut PtsOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Recover `X` from `y = A(X)`.
///
/// `rank` is required for ALS and ignored by SVT. `max_iters = 0` and a
/// NaN `tau` select the defaults. `iterations` may be null.
///
/// # Safety
/// `op` live handle; `y` points to `len` doubles; `out` writable;
/// `iterations` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pts_solve(
    solver: PtsSolver,
    op: *const PtsOperator,
    y: *const f64,
    len: usize,
    rank: usize,
    max_iters: usize,
    tau: f64,
    out: *mut *mut PtsMatrix,
    iterations: *mut usize,
) -> PtsStatus {
    guard(|| {
        let op = deref(op, "op")?;
        let y = DVector::from_column_slice(slice(y, len, "y")?);
        let cfg = SolverConfig {
            max_iters: (max_iters > 0).then_some(max_iters),
            tau: (!tau.is_nan()).then_some(tau),
            ..Default::default()
        };
        let kind = match solver {
            PtsSolver::PtsSvt => SolverKind::Svt,
            PtsSolver::PtsAls => SolverKind::Als,
        };
        let res = solvers::solve(kind, &op.0, &y, &cfg, (rank > 0).then_some(rank))?;
        if !iterations.is_null() {
            iterations.write(res.iterations);
        }
        write_out(out, boxed(PtsMatrix(res.x_hat)), "out")
    })
}

/// `ceil(c r^2 (n1 + n2) ln(n1 n2))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pts_measurement_bound(
    n1: usize,
    n2: usize,
    r: usize,
    c: f64,
    out: *mut u64,
) -> PtsStatus {
    guard(|| {
        let b = measurement_bound(n1, n2, r, c)?;
        write_out(out, b, "out")
    })
}
