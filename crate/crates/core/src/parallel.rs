//! Replicate fan-out.
//!
//! Work items are indexed, each owns its substream, and results come back in
//! index order, so any reduction over them is independent of how many
//! threads ran the work.

use rayon::prelude::*;

use crate::error::Result;

pub fn map_replicates<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

pub fn try_map_replicates<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}
