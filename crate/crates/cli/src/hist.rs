//! Distributions of initial correlations.

use qcrevival_core::states::sample_state;
use qcrevival_core::stats::{qc_histogram, HistogramBin};
use qcrevival_core::{Measure, OptimizerSettings, RandomStateSpec, Rank, Sweeper};
use rayon::prelude::*;

use crate::error::Result;

/// `measure` of the first `count` states of the ensemble, in index order.
pub fn initial_values(
    rank: Rank,
    measure: Measure,
    count: usize,
    master_seed: u64,
    optimizer: &OptimizerSettings,
) -> Result<Vec<f64>> {
    let spec = RandomStateSpec::new(rank, count, master_seed)?;
    let opt = *optimizer;
    let values = (0..count)
        .into_par_iter()
        .map_init(
            || Sweeper::new(opt),
            |s, i| sample_state(&spec, i).map(|rho| s.evaluate(measure, &rho)),
        )
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    Ok(values)
}

pub fn initial_histogram(
    rank: Rank,
    measure: Measure,
    count: usize,
    master_seed: u64,
    optimizer: &OptimizerSettings,
    bin_width: f64,
) -> Result<Vec<HistogramBin>> {
    let values = initial_values(rank, measure, count, master_seed, optimizer)?;
    // discord can undershoot zero by optimizer slack
    let clamped: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(qc_histogram(&clamped, bin_width)?)
}
