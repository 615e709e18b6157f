//! Sliding and disjoint block maxima and their rank-based
//! pseudo-observations.

use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};

/// `n x d` observation window, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    columns: Vec<Vec<f64>>,
    n: usize,
}

impl DataMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n == 0 {
            return Err(invalid("data matrix must have at least one row and one column"));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("data matrix entries must be finite"));
        }
        Ok(Self { columns, n })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for (c, &x) in columns.iter_mut().zip(row) {
                c.push(x);
            }
        }
        Self::from_columns(columns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Applies `f` to every entry of column `j`.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut columns = self.columns.clone();
        columns[j].iter_mut().for_each(|x| *x = f(*x));
        Self::from_columns(columns)
    }

    /// Per column, whether any value occurs more than once. Continuous
    /// margins are assumed; ties are tolerated but worth knowing about.
    pub fn tied_columns(&self) -> Vec<bool> {
        self.columns
            .iter()
            .map(|c| {
                let mut s = c.clone();
                s.sort_by(f64::total_cmp);
                s.windows(2).any(|w| w[0] == w[1])
            })
            .collect()
    }

    /// Rows `[start, start + len)`.
    pub fn slice_rows(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n {
            return Err(invalid("row slice out of range"));
        }
        Self::from_columns(self.columns.iter().map(|c| c[start..start + len].to_vec()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockScheme {
    Sliding,
    Disjoint,
}

/// Componentwise block maxima for one block size.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMaximaPanel {
    block_size: usize,
    scheme: BlockScheme,
    columns: Vec<Vec<f64>>,
}

impl BlockMaximaPanel {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn scheme(&self) -> BlockScheme {
        self.scheme
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }
}

fn check_block(data: &DataMatrix, m: usize) -> Result<()> {
    if m == 0 || m > data.n() {
        return Err(Error::BlockSize { m, n: data.n() });
    }
    Ok(())
}

/// Maxima of every window of length `m` in `xs`, using a monotone deque.
pub fn sliding_window_max(xs: &[f64], m: usize) -> Vec<f64> {
    assert!(m >= 1 && m <= xs.len());
    let mut out = Vec::with_capacity(xs.len() - m + 1);
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(m);
    for (i, &x) in xs.iter().enumerate() {
        while let Some(&back) = deque.back() {
            if xs[back] <= x {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i);
        if deque[0] + m <= i {
            deque.pop_front();
        }
        if i + 1 >= m {
            out.push(xs[deque[0]]);
        }
    }
    out
}

/// Sliding block maxima: row `i` is the componentwise maximum of input rows
/// `[i, i + m)`, giving `n - m + 1` rows.
pub fn sliding_maxima(data: &DataMatrix, m: usize) -> Result<BlockMaximaPanel> {
    check_block(data, m)?;
    let columns = data.columns().iter().map(|c| sliding_window_max(c, m)).collect();
    Ok(BlockMaximaPanel {
        block_size: m,
        scheme: BlockScheme::Sliding,
        columns,
    })
}

/// Disjoint block maxima over `floor(n / m)` consecutive blocks; trailing
/// rows that do not fill a block are discarded.
pub fn disjoint_maxima(data: &DataMatrix, m: usize) -> Result<BlockMaximaPanel> {
    check_block(data, m)?;
    let columns = data
        .columns()
        .iter()
        .map(|c| {
            c.chunks_exact(m)
                .map(|chunk| chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect()
        })
        .collect();
    Ok(BlockMaximaPanel {
        block_size: m,
        scheme: BlockScheme::Disjoint,
        columns,
    })
}

pub fn block_maxima(data: &DataMatrix, m: usize, scheme: BlockScheme) -> Result<BlockMaximaPanel> {
    match scheme {
        BlockScheme::Sliding => sliding_maxima(data, m),
        BlockScheme::Disjoint => disjoint_maxima(data, m),
    }
}

/// Rank pseudo-observations `U_hat[i][j] = rank[i][j] / k`, where the rank
/// counts the rows whose value is `<=` the entry (ties share the maximal
/// rank). This is exactly the empirical marginal CDF at each maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations {
    k: usize,
    ranks: Vec<Vec<u32>>,
}

impl PseudoObservations {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[j][i]
    }

    pub fn rank_column(&self, j: usize) -> &[u32] {
        &self.ranks[j]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        rank_value(self.ranks[j][i], self.k)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.d()).map(|j| self.value(i, j)).collect()
    }
}

/// Pseudo-observation value of `rank` among `k` rows. Every comparison
/// against a pseudo-observation goes through this one expression.
#[inline]
pub fn rank_value(rank: u32, k: usize) -> f64 {
    rank as f64 / k as f64
}

/// Max-ranks of `xs` (count of entries `<=` each entry).
pub fn max_ranks(xs: &[f64]) -> Vec<u32> {
    let k = xs.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0u32; k];
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        for &idx in &order[start..end] {
            ranks[idx] = end as u32;
        }
        start = end;
    }
    ranks
}

pub fn pseudo_observations(panel: &BlockMaximaPanel) -> PseudoObservations {
    let ranks = panel.columns.iter().map(|c| max_ranks(c)).collect();
    PseudoObservations { k: panel.rows(), ranks }
}
