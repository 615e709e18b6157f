//! Empirical copulas of block-maxima pseudo-observations.

use std::collections::HashMap;

use super::Grid;
use crate::blocks::{block_maxima, pseudo_observations, rank_value, BlockScheme, DataMatrix, PseudoObservations};
use crate::error::{Error, Result};

/// Largest rank `r` in `0..=k` with `r / k <= u`, computed through the same
/// expression as the pseudo-observations so comparisons are exact.
fn rank_threshold(u: f64, k: usize) -> u32 {
    let mut r = ((u * k as f64).floor().max(0.0) as usize).min(k);
    while r < k && rank_value(r as u32 + 1, k) <= u {
        r += 1;
    }
    while r > 0 && rank_value(r as u32, k) > u {
        r -= 1;
    }
    r as u32
}

/// Fraction of pseudo-observation rows componentwise `<= u`.
pub fn empirical_copula(pseudo: &PseudoObservations, u: &[f64]) -> f64 {
    assert_eq!(u.len(), pseudo.d(), "dimension mismatch");
    let k = pseudo.k();
    let t: Vec<u32> = u.iter().map(|&x| rank_threshold(x, k)).collect();
    let hits = (0..k)
        .filter(|&i| (0..pseudo.d()).all(|j| pseudo.rank(i, j) <= t[j]))
        .count();
    hits as f64 / k as f64
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, mut i: usize) {
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Empirical copula at every grid point. Bivariate panels use one sweep
/// over the first coordinate with a Fenwick tree over the second.
pub fn empirical_copula_grid(pseudo: &PseudoObservations, grid: &Grid) -> Result<Vec<f64>> {
    if grid.d() != pseudo.d() {
        return Err(Error::DimensionMismatch {
            expected: pseudo.d(),
            got: grid.d(),
        });
    }
    let k = pseudo.k();
    let kf = k as f64;
    if pseudo.d() != 2 {
        return Ok(grid.points().iter().map(|u| empirical_copula(pseudo, u)).collect());
    }

    // rows bucketed by first-coordinate rank
    let mut by_rank: Vec<Vec<u32>> = vec![Vec::new(); k + 1];
    for i in 0..k {
        by_rank[pseudo.rank(i, 0) as usize].push(pseudo.rank(i, 1));
    }
    let mut queries: Vec<(u32, u32, usize)> = grid
        .points()
        .iter()
        .enumerate()
        .map(|(q, u)| (rank_threshold(u[0], k), rank_threshold(u[1], k), q))
        .collect();
    queries.sort_unstable();

    let mut tree = Fenwick::new(k);
    let mut inserted = 0usize;
    let mut out = vec![0.0; grid.len()];
    for (t0, t1, q) in queries {
        while inserted < t0 as usize {
            inserted += 1;
            for &r1 in &by_rank[inserted] {
                tree.add(r1 as usize);
            }
        }
        out[q] = tree.prefix(t1 as usize) as f64 / kf;
    }
    Ok(out)
}

fn estimate(data: &DataMatrix, m: usize, grid: &Grid, scheme: BlockScheme) -> Result<Vec<f64>> {
    let panel = block_maxima(data, m, scheme)?;
    empirical_copula_grid(&pseudo_observations(&panel), grid)
}

/// Sliding block-maxima empirical copula at block size `m`.
pub fn sliding_estimator(data: &DataMatrix, m: usize, grid: &Grid) -> Result<Vec<f64>> {
    estimate(data, m, grid, BlockScheme::Sliding)
}

/// Disjoint block-maxima empirical copula at block size `m`.
pub fn disjoint_estimator(data: &DataMatrix, m: usize, grid: &Grid) -> Result<Vec<f64>> {
    estimate(data, m, grid, BlockScheme::Disjoint)
}

/// Memoised empirical-copula estimates of one data set on one grid, keyed by
/// scheme and block size.
#[derive(Debug)]
pub struct EstimateCache<'a> {
    data: &'a DataMatrix,
    grid: Grid,
    values: HashMap<(BlockScheme, usize), Vec<f64>>,
}

impl<'a> EstimateCache<'a> {
    pub fn new(data: &'a DataMatrix, grid: Grid) -> Result<Self> {
        if grid.d() != data.d() {
            return Err(Error::DimensionMismatch {
                expected: data.d(),
                got: grid.d(),
            });
        }
        Ok(Self {
            data,
            grid,
            values: HashMap::new(),
        })
    }

    pub fn data(&self) -> &DataMatrix {
        self.data
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&mut self, scheme: BlockScheme, m: usize) -> Result<&[f64]> {
        if !self.values.contains_key(&(scheme, m)) {
            let v = estimate(self.data, m, &self.grid, scheme)?;
            self.values.insert((scheme, m), v);
        }
        Ok(&self.values[&(scheme, m)])
    }

    pub fn sliding(&mut self, m: usize) -> Result<Vec<f64>> {
        self.get(BlockScheme::Sliding, m).map(<[f64]>::to_vec)
    }

    pub fn disjoint(&mut self, m: usize) -> Result<Vec<f64>> {
        self.get(BlockScheme::Disjoint, m).map(<[f64]>::to_vec)
    }
}
