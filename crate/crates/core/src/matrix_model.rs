//! Low-rank matrices in primary/secondary column form.
//!
//! A rank-`r` matrix `X` (n1 x n2) is described by `r` primary columns
//! (index set `diamond`) and the coefficients `alpha` that express every
//! secondary column (index set `star`) as a combination of the primaries:
//!
//! ```text
//! x_s = sum_j alpha[s, j] * x_{diamond[j]}      for s in star
//! ```
//!
//! Stacking the primaries into a block-sparse vector `f` gives
//! `vec(X) = Psi * f`, with `Psi` built from identity and `alpha`-scaled
//! identity blocks. All indices are zero-based.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_RTOL};
use crate::rng::{child_seed, rng_from_seed};

/// A dense matrix of known numerical rank, optionally carrying the
/// decomposition it was generated from.
#[derive(Clone, Debug)]
pub struct LowRankMatrix {
    entries: DMatrix<f64>,
    rank: usize,
    generating: Option<RankDecomposition>,
}

/// Primary/secondary column split of a rank-`r` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDecomposition {
    pub n1: usize,
    pub n2: usize,
    /// Sorted primary column indices, `r` of them.
    pub diamond: Vec<usize>,
    /// Sorted secondary column indices, `n2 - r` of them.
    pub star: Vec<usize>,
    /// `(n2 - r) x r`; row `s` holds the coefficients of column `star[s]`.
    pub alpha: DMatrix<f64>,
    /// `n1 x r`; column `j` is `X[:, diamond[j]]`.
    pub primary_columns: DMatrix<f64>,
}

/// A length `n1 * n2` vector split into `n2` blocks of `n1`, of which only
/// `active_blocks` are nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparseVector {
    pub n1: usize,
    pub n2: usize,
    pub active_blocks: Vec<usize>,
    pub values: Vec<DVector<f64>>,
}

/// Knobs for [`LowRankMatrix::generate_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct GenOptions {
    /// Return the zero matrix for `r = 0` instead of rejecting it.
    pub allow_zero_rank: bool,
}

impl LowRankMatrix {
    /// Draw a rank-`r` matrix with the statistical low rank property:
    /// standard normal primary columns at `r` uniformly random positions,
    /// secondary columns mixed with i.i.d. `N(0, 1/r)` coefficients.
    pub fn generate(n1: usize, n2: usize, r: usize, seed: u64) -> Result<Self> {
        Self::generate_with(n1, n2, r, seed, GenOptions::default())
    }

    pub fn generate_with(
        n1: usize,
        n2: usize,
        r: usize,
        seed: u64,
        opts: GenOptions,
    ) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::param("matrix dimensions must be positive"));
        }
        if n1 > n2 {
            return Err(Error::param(format!(
                "expected n1 <= n2, got {n1}x{n2} (transpose the problem)"
            )));
        }
        if r == 0 && opts.allow_zero_rank {
            return Ok(LowRankMatrix {
                entries: DMatrix::zeros(n1, n2),
                rank: 0,
                generating: Some(RankDecomposition {
                    n1,
                    n2,
                    diamond: Vec::new(),
                    star: (0..n2).collect(),
                    alpha: DMatrix::zeros(n2, 0),
                    primary_columns: DMatrix::zeros(n1, 0),
                }),
            });
        }
        if r == 0 || r > n1.min(n2) {
            return Err(Error::param(format!(
                "rank {r} out of range 1..={}",
                n1.min(n2)
            )));
        }

        let mut rng = rng_from_seed(seed);
        let mut diamond = index::sample(&mut rng, n2, r).into_vec();
        diamond.sort_unstable();
        let star: Vec<usize> = (0..n2)
            .filter(|i| diamond.binary_search(i).is_err())
            .collect();

        let primary_columns = DMatrix::from_fn(n1, r, |_, _| StandardNormal.sample(&mut rng));
        // Separate stream so the primaries do not depend on n2 - r.
        let mut alpha_rng = rng_from_seed(child_seed(seed, 0xA1FA));
        let law = Normal::new(0.0, (1.0 / r as f64).sqrt()).expect("finite variance");
        let alpha = DMatrix::from_fn(n2 - r, r, |_, _| law.sample(&mut alpha_rng));

        let decomp = RankDecomposition {
            n1,
            n2,
            diamond,
            star,
            alpha,
            primary_columns,
        };
        Ok(LowRankMatrix {
            entries: decomp.reconstruct(),
            rank: r,
            generating: Some(decomp),
        })
    }

    /// Wrap an arbitrary dense matrix; its rank is measured numerically.
    pub fn from_entries(entries: DMatrix<f64>) -> Self {
        let rank = linalg::numerical_rank(&entries, RANK_RTOL);
        LowRankMatrix {
            entries,
            rank,
            generating: None,
        }
    }

    pub fn n1(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n2(&self) -> usize {
        self.entries.ncols()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// The decomposition used to generate this matrix, including the drawn
    /// `alpha`. `None` for matrices built with [`Self::from_entries`].
    pub fn generating_decomposition(&self) -> Option<&RankDecomposition> {
        self.generating.as_ref()
    }
}

impl RankDecomposition {
    pub fn rank(&self) -> usize {
        self.diamond.len()
    }

    /// Rebuild the dense matrix from primaries and `alpha`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.n1, self.n2);
        for (j, &p) in self.diamond.iter().enumerate() {
            x.set_column(p, &self.primary_columns.column(j));
        }
        if self.rank() > 0 {
            let secondary = &self.primary_columns * self.alpha.transpose();
            for (s, &q) in self.star.iter().enumerate() {
                x.set_column(q, &secondary.column(s));
            }
        }
        x
    }

    /// Coefficient of primary `j` in the expansion of block `block`:
    /// 1 on its own primary, `alpha` on secondaries, 0 otherwise.
    pub fn coefficient(&self, block: usize, j: usize) -> f64 {
        if let Ok(pos) = self.diamond.binary_search(&block) {
            return if pos == j { 1.0 } else { 0.0 };
        }
        match self.star.binary_search(&block) {
            Ok(s) => self.alpha[(s, j)],
            Err(_) => 0.0,
        }
    }

    /// Dense `(n1 n2) x (n1 n2)` expansion of `Psi`, with `vec(X) = Psi f`.
    pub fn psi_dense(&self) -> DMatrix<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let mut psi = DMatrix::zeros(n1 * n2, n1 * n2);
        for block in 0..n2 {
            for (j, &p) in self.diamond.iter().enumerate() {
                let c = self.coefficient(block, j);
                if c != 0.0 {
                    for t in 0..n1 {
                        psi[(block * n1 + t, p * n1 + t)] = c;
                    }
                }
            }
        }
        psi
    }

    fn check(&self) -> Result<()> {
        let r = self.diamond.len();
        if r + self.star.len() != self.n2
            || self.alpha.shape() != (self.n2 - r, r)
            || self.primary_columns.shape() != (self.n1, r)
        {
            return Err(Error::param("inconsistent rank decomposition shapes"));
        }
        Ok(())
    }
}

/// Split `x` into primary and secondary columns.
///
/// Primaries are the first `r` pivots of a column-pivoted QR, with `r` the
/// numerical rank; `alpha` is the least-squares fit of the secondaries.
pub fn decompose(x: &LowRankMatrix) -> Result<RankDecomposition> {
    decompose_dense(x.entries())
}

pub fn decompose_dense(x: &DMatrix<f64>) -> Result<RankDecomposition> {
    let (n1, n2) = x.shape();
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::degenerate("all columns are zero"));
    }
    let r = linalg::numerical_rank(x, RANK_RTOL);
    if r == 0 {
        return Err(Error::degenerate("numerical rank is zero"));
    }
    let mut diamond = linalg::pivoted_qr_order(x, r);
    if diamond.len() != r {
        return Err(Error::degenerate("column pivoting returned too few pivots"));
    }
    diamond.sort_unstable();
    let star: Vec<usize> = (0..n2)
        .filter(|i| diamond.binary_search(i).is_err())
        .collect();

    let primary_columns = x.select_columns(diamond.iter());
    let secondary = x.select_columns(star.iter());
    let alpha = if star.is_empty() {
        DMatrix::zeros(0, r)
    } else {
        linalg::least_squares(&primary_columns, &secondary)?.transpose()
    };
    Ok(RankDecomposition {
        n1,
        n2,
        diamond,
        star,
        alpha,
        primary_columns,
    })
}

/// Place the primary columns of `decomp` at their block positions.
pub fn build_block_sparse(decomp: &RankDecomposition) -> Result<BlockSparseVector> {
    decomp.check()?;
    Ok(BlockSparseVector {
        n1: decomp.n1,
        n2: decomp.n2,
        active_blocks: decomp.diamond.clone(),
        values: decomp
            .primary_columns
            .column_iter()
            .map(|c| c.into_owned())
            .collect(),
    })
}

impl BlockSparseVector {
    pub fn to_dense(&self) -> DVector<f64> {
        let mut f = DVector::zeros(self.n1 * self.n2);
        for (&b, v) in self.active_blocks.iter().zip(&self.values) {
            f.rows_mut(b * self.n1, self.n1).copy_from(v);
        }
        f
    }
}
