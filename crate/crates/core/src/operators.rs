//! Linear sensing operators `A: R^{n1 x n2} -> R^M`, `y_j = <A_j, X>`.
//!
//! Two storage forms are provided. [`DenseOperator`] keeps the full
//! `M x (n1 n2)` matrix whose row `j` is `vec(A_j)ᵀ`. [`PiecewiseToeplitzOperator`]
//! keeps one generator per column block: the matrix `A[i]` that stacks the
//! `i`-th columns of every `A_j` as rows is Toeplitz, so it is fully
//! described by `M + n1 - 1` numbers.
//!
//! Generator convention (zero-based): `A[i][(k, l)] = g_i[k - l + n1 - 1]`,
//! i.e. `g_i[n1 - 1]` is the top-left entry and increasing index walks down
//! the first column.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Default truncation constant for bounded Toeplitz entries.
pub const DEFAULT_C0: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    Gaussian,
    Bernoulli,
    ThreeValued,
    PiecewiseToeplitz,
    MaterializedToeplitz,
    /// Dense rows supplied by the caller.
    Custom,
}

impl OperatorKind {
    pub const RANDOM: [OperatorKind; 4] = [
        OperatorKind::Gaussian,
        OperatorKind::Bernoulli,
        OperatorKind::ThreeValued,
        OperatorKind::PiecewiseToeplitz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Gaussian => "gaussian",
            OperatorKind::Bernoulli => "bernoulli",
            OperatorKind::ThreeValued => "three_valued",
            OperatorKind::PiecewiseToeplitz => "piecewise_toeplitz",
            OperatorKind::MaterializedToeplitz => "materialized_toeplitz",
            OperatorKind::Custom => "custom",
        }
    }

    pub(crate) fn code(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "gaussian" => OperatorKind::Gaussian,
            "bernoulli" => OperatorKind::Bernoulli,
            "three_valued" => OperatorKind::ThreeValued,
            "piecewise_toeplitz" | "toeplitz" => OperatorKind::PiecewiseToeplitz,
            "materialized_toeplitz" => OperatorKind::MaterializedToeplitz,
            "custom" => OperatorKind::Custom,
            other => return Err(Error::param(format!("unknown operator kind '{other}'"))),
        })
    }
}

/// Common interface of every sensing operator.
pub trait SensingOperator: Send + Sync {
    fn measurements(&self) -> usize;
    fn n1(&self) -> usize;
    fn n2(&self) -> usize;
    fn kind(&self) -> OperatorKind;

    /// `y = A(X)`.
    fn apply(&self, x: &DMatrix<f64>) -> Result<DVector<f64>>;

    /// `A*(y) = sum_j y_j A_j`.
    fn adjoint(&self, y: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// The `M x n1` column block `A[i]`.
    fn block(&self, i: usize) -> DMatrix<f64>;

    /// Number of stored reals.
    fn storage_cost(&self) -> usize;

    /// `M x (n1 k)` matrix whose row `j` is `vec(A_j R)ᵀ`, for `R` of shape
    /// `n2 x k`. Then `A(L Rᵀ) = D vec(L)`.
    fn right_design(&self, r: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    /// `M x (n2 k)` matrix whose row `j` is `vec(A_jᵀ L)ᵀ`, for `L` of shape
    /// `n1 x k`. Then `A(L Rᵀ) = D vec(R)`.
    fn left_design(&self, l: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    fn check_matrix(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.shape() != (self.n1(), self.n2()) {
            return Err(Error::param(format!(
                "operator expects {}x{} input, got {}x{}",
                self.n1(),
                self.n2(),
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    fn check_measurements(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.measurements() {
            return Err(Error::param(format!(
                "operator expects {} measurements, got {}",
                self.measurements(),
                y.len()
            )));
        }
        Ok(())
    }
}

/// One Toeplitz block, stored by its generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzBlock {
    m: usize,
    n1: usize,
    generator: Vec<f64>,
}

impl ToeplitzBlock {
    pub fn new(m: usize, n1: usize, generator: Vec<f64>) -> Result<Self> {
        if m == 0 || n1 == 0 {
            return Err(Error::param("Toeplitz block dimensions must be positive"));
        }
        if generator.len() != m + n1 - 1 {
            return Err(Error::param(format!(
                "generator length {} != M + n1 - 1 = {}",
                generator.len(),
                m + n1 - 1
            )));
        }
        Ok(ToeplitzBlock { m, n1, generator })
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    #[inline]
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.generator[k + self.n1 - 1 - l]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.n1, |k, l| self.entry(k, l))
    }

    /// `out += A[i] * x` by the direct O(M n1) product.
    fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        let off = self.n1 - 1;
        for (l, &xl) in x.iter().enumerate() {
            if xl == 0.0 {
                continue;
            }
            let g = &self.generator[off - l..off - l + self.m];
            for (o, gv) in out.iter_mut().zip(g) {
                *o += gv * xl;
            }
        }
    }

    /// `out = A[i]ᵀ y`.
    fn rmatvec(&self, y: &[f64], out: &mut [f64]) {
        let off = self.n1 - 1;
        for (l, o) in out.iter_mut().enumerate() {
            let g = &self.generator[off - l..off - l + self.m];
            *o = g.iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }
}

/// Piecewise Toeplitz operator: `n2` Toeplitz blocks, one per column of X.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseToeplitzOperator {
    m: usize,
    n1: usize,
    n2: usize,
    blocks: Vec<ToeplitzBlock>,
    c0: Option<f64>,
    seed: Option<u64>,
}

impl PiecewiseToeplitzOperator {
    /// Random operator with i.i.d. `N(0, 1/M)` generator entries, each
    /// redrawn until it lies within `sqrt(c0 / M)`.
    pub fn generate(m: usize, n1: usize, n2: usize, c0: f64, seed: u64) -> Result<Self> {
        check_dims(m, n1, n2)?;
        if !(c0 > 1.0) || !c0.is_finite() {
            return Err(Error::param(format!(
                "c0 must be a finite value > 1, got {c0}"
            )));
        }
        let sigma = (1.0 / m as f64).sqrt();
        let bound = (c0 / m as f64).sqrt();
        let law = Normal::new(0.0, sigma).expect("finite sigma");
        let mut rng = rng_from_seed(seed);
        let blocks = (0..n2)
            .map(|_| {
                let g = (0..m + n1 - 1)
                    .map(|_| loop {
                        let v: f64 = law.sample(&mut rng);
                        if v.abs() <= bound {
                            break v;
                        }
                    })
                    .collect();
                ToeplitzBlock {
                    m,
                    n1,
                    generator: g,
                }
            })
            .collect();
        Ok(PiecewiseToeplitzOperator {
            m,
            n1,
            n2,
            blocks,
            c0: Some(c0),
            seed: Some(seed),
        })
    }

    /// Build from caller-supplied generators, one per block.
    pub fn from_generators(m: usize, n1: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        let n2 = generators.len();
        check_dims(m, n1, n2)?;
        let blocks = generators
            .into_iter()
            .map(|g| ToeplitzBlock::new(m, n1, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(PiecewiseToeplitzOperator {
            m,
            n1,
            n2,
            blocks,
            c0: None,
            seed: None,
        })
    }

    pub(crate) fn with_meta(mut self, c0: Option<f64>, seed: Option<u64>) -> Self {
        self.c0 = c0;
        self.seed = seed;
        self
    }

    pub fn blocks(&self) -> &[ToeplitzBlock] {
        &self.blocks
    }

    pub fn c0(&self) -> Option<f64> {
        self.c0
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Entry bound `sqrt(c0 / M)`, when the operator was drawn randomly.
    pub fn entry_bound(&self) -> Option<f64> {
        self.c0.map(|c0| (c0 / self.m as f64).sqrt())
    }

    /// Expand into the dense `M x (n1 n2)` form.
    pub fn materialize(&self) -> DenseOperator {
        let mut rows = DMatrix::zeros(self.m, self.n1 * self.n2);
        for (i, b) in self.blocks.iter().enumerate() {
            rows.view_mut((0, i * self.n1), (self.m, self.n1))
                .copy_from(&b.to_dense());
        }
        DenseOperator {
            m: self.m,
            n1: self.n1,
            n2: self.n2,
            rows,
            kind: OperatorKind::MaterializedToeplitz,
            c0: self.c0,
            seed: self.seed,
        }
    }
}

impl SensingOperator for PiecewiseToeplitzOperator {
    fn measurements(&self) -> usize {
        self.m
    }
    fn n1(&self) -> usize {
        self.n1
    }
    fn n2(&self) -> usize {
        self.n2
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::PiecewiseToeplitz
    }

    fn apply(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_matrix(x)?;
        let mut y = vec![0.0; self.m];
        for (i, b) in self.blocks.iter().enumerate() {
            b.matvec_acc(x.column(i).as_slice(), &mut y);
        }
        Ok(DVector::from_vec(y))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_measurements(y)?;
        let mut out = DMatrix::zeros(self.n1, self.n2);
        for (i, b) in self.blocks.iter().enumerate() {
            let mut col = out.column_mut(i);
            b.rmatvec(y.as_slice(), col.as_mut_slice());
        }
        Ok(out)
    }

    fn block(&self, i: usize) -> DMatrix<f64> {
        self.blocks[i].to_dense()
    }

    fn storage_cost(&self) -> usize {
        self.n2 * (self.m + self.n1 - 1)
    }

    fn right_design(&self, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if r.nrows() != self.n2 {
            return Err(Error::param("right factor must have n2 rows"));
        }
        let n1 = self.n1;
        Ok(right_design_with(self.m, n1, self.n2, r, |j, p, i| {
            self.blocks[i].generator[j + n1 - 1 - p]
        }))
    }

    fn left_design(&self, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if l.nrows() != self.n1 {
            return Err(Error::param("left factor must have n1 rows"));
        }
        let n1 = self.n1;
        Ok(left_design_with(self.m, n1, self.n2, l, |j, p, i| {
            self.blocks[i].generator[j + n1 - 1 - p]
        }))
    }
}

/// Operator stored as the full `M x (n1 n2)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    m: usize,
    n1: usize,
    n2: usize,
    rows: DMatrix<f64>,
    kind: OperatorKind,
    c0: Option<f64>,
    seed: Option<u64>,
}

impl DenseOperator {
    /// Random dense operator. Every law has mean 0 and variance `1/M`:
    /// gaussian `N(0, 1/M)`; bernoulli `±1/sqrt(M)`; three-valued
    /// `{-sqrt(3/M), 0, sqrt(3/M)}` with probabilities `{1/6, 2/3, 1/6}`.
    pub fn generate(m: usize, n1: usize, n2: usize, kind: OperatorKind, seed: u64) -> Result<Self> {
        check_dims(m, n1, n2)?;
        let mf = m as f64;
        let mut rng = rng_from_seed(seed);
        let rows = match kind {
            OperatorKind::Gaussian => {
                let law = Normal::new(0.0, (1.0 / mf).sqrt()).expect("finite sigma");
                DMatrix::from_fn(m, n1 * n2, |_, _| law.sample(&mut rng))
            }
            OperatorKind::Bernoulli => {
                let a = 1.0 / mf.sqrt();
                DMatrix::from_fn(m, n1 * n2, |_, _| if rng.random::<bool>() { a } else { -a })
            }
            OperatorKind::ThreeValued => {
                let a = (3.0 / mf).sqrt();
                DMatrix::from_fn(m, n1 * n2, |_, _| match rng.random_range(0..6u32) {
                    0 => -a,
                    5 => a,
                    _ => 0.0,
                })
            }
            other => {
                return Err(Error::param(format!(
                    "'{other}' is not a dense random operator kind"
                )))
            }
        };
        Ok(DenseOperator {
            m,
            n1,
            n2,
            rows,
            kind,
            c0: None,
            seed: Some(seed),
        })
    }

    /// Wrap caller-supplied rows (`M x (n1 n2)`, row `j` = `vec(A_j)ᵀ`).
    pub fn from_rows(n1: usize, n2: usize, rows: DMatrix<f64>) -> Result<Self> {
        check_dims(rows.nrows(), n1, n2)?;
        if rows.ncols() != n1 * n2 {
            return Err(Error::param(format!(
                "rows have {} columns, expected n1*n2 = {}",
                rows.ncols(),
                n1 * n2
            )));
        }
        Ok(DenseOperator {
            m: rows.nrows(),
            n1,
            n2,
            rows,
            kind: OperatorKind::Custom,
            c0: None,
            seed: None,
        })
    }

    pub(crate) fn with_meta(
        mut self,
        kind: OperatorKind,
        c0: Option<f64>,
        seed: Option<u64>,
    ) -> Self {
        self.kind = kind;
        self.c0 = c0;
        self.seed = seed;
        self
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn c0(&self) -> Option<f64> {
        self.c0
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `A_j` reshaped column-major to `n1 x n2`.
    pub fn sensing_matrix(&self, j: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n1, self.n2, |p, i| self.rows[(j, p + i * self.n1)])
    }
}

impl SensingOperator for DenseOperator {
    fn measurements(&self) -> usize {
        self.m
    }
    fn n1(&self) -> usize {
        self.n1
    }
    fn n2(&self) -> usize {
        self.n2
    }
    fn kind(&self) -> OperatorKind {
        self.kind
    }

    fn apply(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_matrix(x)?;
        let v = DVector::from_column_slice(x.as_slice());
        Ok(&self.rows * v)
    }

    fn adjoint(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_measurements(y)?;
        let v = self.rows.tr_mul(y);
        Ok(DMatrix::from_column_slice(self.n1, self.n2, v.as_slice()))
    }

    fn block(&self, i: usize) -> DMatrix<f64> {
        self.rows.columns(i * self.n1, self.n1).into_owned()
    }

    fn storage_cost(&self) -> usize {
        self.m * self.n1 * self.n2
    }

    fn right_design(&self, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if r.nrows() != self.n2 {
            return Err(Error::param("right factor must have n2 rows"));
        }
        let n1 = self.n1;
        Ok(right_design_with(self.m, n1, self.n2, r, |j, p, i| {
            self.rows[(j, p + i * n1)]
        }))
    }

    fn left_design(&self, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if l.nrows() != self.n1 {
            return Err(Error::param("left factor must have n1 rows"));
        }
        let n1 = self.n1;
        Ok(left_design_with(self.m, n1, self.n2, l, |j, p, i| {
            self.rows[(j, p + i * n1)]
        }))
    }
}

/// Either storage form, for code that picks the kind at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Toeplitz(PiecewiseToeplitzOperator),
    Dense(DenseOperator),
}

impl Operator {
    pub fn generate(
        kind: OperatorKind,
        m: usize,
        n1: usize,
        n2: usize,
        c0: f64,
        seed: u64,
    ) -> Result<Self> {
        match kind {
            OperatorKind::PiecewiseToeplitz => {
                PiecewiseToeplitzOperator::generate(m, n1, n2, c0, seed).map(Operator::Toeplitz)
            }
            OperatorKind::MaterializedToeplitz => {
                PiecewiseToeplitzOperator::generate(m, n1, n2, c0, seed)
                    .map(|t| Operator::Dense(t.materialize()))
            }
            _ => DenseOperator::generate(m, n1, n2, kind, seed).map(Operator::Dense),
        }
    }

    pub fn materialize(&self) -> DenseOperator {
        match self {
            Operator::Toeplitz(t) => t.materialize(),
            Operator::Dense(d) => d.clone(),
        }
    }

    fn inner(&self) -> &dyn SensingOperator {
        match self {
            Operator::Toeplitz(t) => t,
            Operator::Dense(d) => d,
        }
    }
}

impl SensingOperator for Operator {
    fn measurements(&self) -> usize {
        self.inner().measurements()
    }
    fn n1(&self) -> usize {
        self.inner().n1()
    }
    fn n2(&self) -> usize {
        self.inner().n2()
    }
    fn kind(&self) -> OperatorKind {
        self.inner().kind()
    }
    fn apply(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.inner().apply(x)
    }
    fn adjoint(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.inner().adjoint(y)
    }
    fn block(&self, i: usize) -> DMatrix<f64> {
        self.inner().block(i)
    }
    fn storage_cost(&self) -> usize {
        self.inner().storage_cost()
    }
    fn right_design(&self, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.inner().right_design(r)
    }
    fn left_design(&self, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.inner().left_design(l)
    }
}

impl From<PiecewiseToeplitzOperator> for Operator {
    fn from(t: PiecewiseToeplitzOperator) -> Self {
        Operator::Toeplitz(t)
    }
}

impl From<DenseOperator> for Operator {
    fn from(d: DenseOperator) -> Self {
        Operator::Dense(d)
    }
}

fn check_dims(m: usize, n1: usize, n2: usize) -> Result<()> {
    if m == 0 || n1 == 0 || n2 == 0 {
        return Err(Error::param(format!(
            "operator dimensions must be positive (M={m}, n1={n1}, n2={n2})"
        )));
    }
    Ok(())
}

/// Row `j`: `vec(A_j R)`, where `(A_j R)[p, c] = sum_i A_j[p, i] R[i, c]`.
fn right_design_with<F>(m: usize, n1: usize, n2: usize, r: &DMatrix<f64>, a: F) -> DMatrix<f64>
where
    F: Fn(usize, usize, usize) -> f64,
{
    let k = r.ncols();
    let mut d = DMatrix::zeros(m, n1 * k);
    for c in 0..k {
        for i in 0..n2 {
            let ric = r[(i, c)];
            if ric == 0.0 {
                continue;
            }
            for p in 0..n1 {
                let mut col = d.column_mut(p + c * n1);
                for j in 0..m {
                    col[j] += a(j, p, i) * ric;
                }
            }
        }
    }
    d
}

/// Row `j`: `vec(A_jᵀ L)`, where `(A_jᵀ L)[i, c] = sum_p A_j[p, i] L[p, c]`.
fn left_design_with<F>(m: usize, n1: usize, n2: usize, l: &DMatrix<f64>, a: F) -> DMatrix<f64>
where
    F: Fn(usize, usize, usize) -> f64,
{
    let k = l.ncols();
    let mut d = DMatrix::zeros(m, n2 * k);
    for c in 0..k {
        for p in 0..n1 {
            let lpc = l[(p, c)];
            if lpc == 0.0 {
                continue;
            }
            for i in 0..n2 {
                let mut col = d.column_mut(i + c * n2);
                for j in 0..m {
                    col[j] += a(j, p, i) * lpc;
                }
            }
        }
    }
    d
}

/// Variance of `N(0, 1/M)` truncated to `|e| <= sqrt(c0/M)`.
pub fn truncated_normal_variance(m: usize, c0: f64) -> f64 {
    let c = c0.sqrt();
    let phi = (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mass = libm::erf(c / std::f64::consts::SQRT_2);
    (1.0 - 2.0 * c * phi / mass) / m as f64
}
