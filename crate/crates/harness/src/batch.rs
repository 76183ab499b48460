//! Deterministic parallel batches.
//!
//! Paths are cut into fixed blocks of [`BLOCK_PATHS`] indices. Each block is
//! simulated by one worker and produces a partial result; the partial results
//! come back in block order and are merged sequentially by the caller. Since
//! path `p` always uses substream `p` and the merge order never changes, the
//! merged statistics are bitwise identical for any worker count.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::HarnessError;

pub const BLOCK_PATHS: u64 = 1024;

pub struct Executor {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Executor {
    pub fn new(workers: usize) -> Result<Self, HarnessError> {
        if workers == 0 {
            return Err(HarnessError::Pool("at least one worker is needed".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Applies `f` to every block of `0..paths` and returns the results in
    /// block order.
    pub fn map_blocks<T, F>(&self, paths: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync + Send,
    {
        let blocks: Vec<Range<u64>> = (0..paths.div_ceil(BLOCK_PATHS))
            .map(|b| b * BLOCK_PATHS..((b + 1) * BLOCK_PATHS).min(paths))
            .collect();
        self.pool.install(|| blocks.into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_every_index_once_in_order() {
        let exec = Executor::new(3).unwrap();
        let ranges = exec.map_blocks(2500, |r| r);
        assert_eq!(ranges, vec![0..1024, 1024..2048, 2048..2500]);
        assert!(exec.map_blocks(0, |r| r).is_empty());
        assert!(Executor::new(0).is_err());
    }
}
