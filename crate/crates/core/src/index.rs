//! Grid-to-vector index convention.
//!
//! An `M x N` grid (delay x Doppler, or frequency x time) is flattened
//! column-major: entry `(l, k)` lands at `k * M + l`. The same rule is used for
//! DD vectors, TF vectors, the Gram matrix and the channel matrices, which makes
//! the SFFT matrix exactly `F_N ⊗ F_M^H`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexMap {
    m: usize,
    n: usize,
}

impl IndexMap {
    pub fn new(m: usize, n: usize) -> Self {
        IndexMap { m, n }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of grid entry `(l, k)`, `l < M`, `k < N`.
    pub fn flat_index(&self, l: usize, k: usize) -> Result<usize> {
        if l >= self.m || k >= self.n {
            return Err(Error::Index {
                l,
                k,
                m: self.m,
                n: self.n,
            });
        }
        Ok(self.flat(l, k))
    }

    /// Unchecked variant for hot loops that already iterate inside the grid.
    #[inline]
    pub fn flat(&self, l: usize, k: usize) -> usize {
        debug_assert!(l < self.m && k < self.n);
        k * self.m + l
    }

    /// Inverse of [`IndexMap::flat`].
    #[inline]
    pub fn grid(&self, flat: usize) -> (usize, usize) {
        (flat % self.m, flat / self.m)
    }

    /// All `(l, k)` pairs in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(move |i| self.grid(i))
    }
}
