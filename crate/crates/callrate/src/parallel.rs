//! Rayon drivers for the embarrassingly parallel work: many simulated paths
//! and blocked Monte-Carlo. Results are collected in index order, so they do
//! not depend on the thread count.

use rayon::prelude::*;

use callrate_core::arbitrage::{combine_blocks, mc_block, mc_block_sizes, CallLoanTerms, McEstimate};
use callrate_core::ou::SimPath;
use callrate_core::{Error, Result};

/// Path `i` uses seed `seed + i` (wrapping).
pub fn simulate_many<F>(n_paths: usize, seed: u64, simulate: F) -> Result<Vec<SimPath>>
where
    F: Fn(u64) -> Result<SimPath> + Sync,
{
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate(seed.wrapping_add(i)))
        .collect()
}

/// Same result as [`callrate_core::arbitrage::mc_zero_profit_check`], bit for bit.
pub fn mc_zero_profit_check_par(terms: &CallLoanTerms, n_paths: usize, seed: u64) -> Result<McEstimate> {
    if n_paths < 2 {
        return Err(Error::InvalidParameter {
            name: "n_paths",
            value: n_paths as f64,
            constraint: "at least 2",
        });
    }
    let sizes: Vec<(u64, usize)> = mc_block_sizes(n_paths).collect();
    let blocks: Vec<_> = sizes
        .into_par_iter()
        .map(|(b, n)| mc_block(terms, b, n, seed))
        .collect();
    Ok(combine_blocks(blocks))
}
