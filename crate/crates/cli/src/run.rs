//! Ensemble execution and aggregation.

use std::ops::Range;
use std::path::Path;

use qcrevival_core::states::sample_state;
use qcrevival_core::sweep::{detect_events, SweepStop};
use qcrevival_core::{
    ChannelConfig, ChannelKind, EnsembleStats, IndexedRecord, Measure, RandomStateSpec, Rank, Sides, Sweeper,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::records::{records_path, CellEvent, RecordSettings, RecordWriter, StateRecord};

/// Statistics of one (channel, sides, rank, α, measure) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub kind: ChannelKind,
    pub sides: Sides,
    pub rank: Rank,
    pub alpha: f64,
    pub measure: Measure,
    pub sweep_stop: SweepStop,
    pub stats: EnsembleStats,
    pub non_psd_points: u64,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Sweeps one state through every (α, measure) cell of the config.
pub fn simulate_state(settings: &RecordSettings, sweeper: &Sweeper, index: usize) -> Result<StateRecord> {
    let spec = RandomStateSpec::new(settings.rank, settings.ensemble_count, settings.master_seed)?;
    let rho = sample_state(&spec, index)?;
    let grid = qcrevival_core::SweepGrid::for_channel(settings.kind, settings.grid_steps)?;
    let mut events = Vec::with_capacity(settings.alphas.len() * settings.measures.len());
    for &alpha in &settings.alphas {
        let cfg = ChannelConfig::new(settings.kind, alpha, settings.sides)?;
        for &measure in &settings.measures {
            let traj = sweeper.sweep_until(&rho, &cfg, &grid, measure, settings.zero_threshold, settings.sweep_stop)?;
            events.push(CellEvent {
                alpha,
                measure,
                record: detect_events(&traj, settings.zero_threshold)?,
                non_psd_points: traj.non_psd_points,
            });
        }
    }
    Ok(StateRecord { index, events })
}

/// Simulates `range` in parallel; the result is in index order whatever
/// the worker count.
pub fn simulate_range(settings: &RecordSettings, range: Range<usize>, pool: &rayon::ThreadPool) -> Result<Vec<StateRecord>> {
    let opt = settings.optimizer;
    pool.install(|| {
        range
            .into_par_iter()
            .map_init(|| Sweeper::new(opt), |sweeper, i| simulate_state(settings, sweeper, i))
            .collect()
    })
}

/// Runs the whole ensemble in memory.
pub fn run_in_memory(cfg: &RunConfig) -> Result<Vec<StateRecord>> {
    cfg.validate()?;
    let settings = RecordSettings::from(cfg);
    simulate_range(&settings, 0..cfg.ensemble_count, &thread_pool(cfg.workers)?)
}

/// Runs the ensemble into `cfg.output_dir`, resuming from any records
/// already there, and returns all records.
pub fn run_to_dir(cfg: &RunConfig, mut progress: impl FnMut(usize, usize)) -> Result<Vec<StateRecord>> {
    cfg.validate()?;
    let settings = RecordSettings::from(cfg);
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    let path = records_path(&cfg.output_dir);
    let (mut writer, mut states) = RecordWriter::open(&path, &settings)?;
    if !states.is_empty() {
        log::info!("resuming at state {} of {}", states.len(), cfg.ensemble_count);
    }
    let pool = thread_pool(cfg.workers)?;
    while states.len() < cfg.ensemble_count {
        let start = states.len();
        let end = (start + cfg.checkpoint_interval).min(cfg.ensemble_count);
        let chunk = simulate_range(&settings, start..end, &pool)?;
        writer.append(&chunk)?;
        states.extend(chunk);
        progress(states.len(), cfg.ensemble_count);
    }
    Ok(states)
}

/// Aggregates records cell by cell, in the config's (α, measure) order.
pub fn aggregate(settings: &RecordSettings, states: &[StateRecord]) -> Result<Vec<CellStats>> {
    let n_cells = settings.alphas.len() * settings.measures.len();
    let mut cells = Vec::with_capacity(n_cells);
    for (ai, &alpha) in settings.alphas.iter().enumerate() {
        for (mi, &measure) in settings.measures.iter().enumerate() {
            let k = ai * settings.measures.len() + mi;
            let mut records = Vec::with_capacity(states.len());
            let mut non_psd = 0u64;
            for s in states {
                let e = s.events.get(k).filter(|e| e.alpha == alpha && e.measure == measure).ok_or_else(|| {
                    CliError::Config(format!("state {} has no record for alpha {alpha}, {measure}", s.index))
                })?;
                records.push(IndexedRecord {
                    index: s.index as u64,
                    record: e.record,
                });
                non_psd += e.non_psd_points as u64;
            }
            cells.push(CellStats {
                kind: settings.kind,
                sides: settings.sides,
                rank: settings.rank,
                alpha,
                measure,
                sweep_stop: settings.sweep_stop,
                stats: EnsembleStats::from_records(&records)?,
                non_psd_points: non_psd,
            });
        }
    }
    Ok(cells)
}

/// Runs into `cfg.output_dir` and writes the CSV tables next to the records.
pub fn run_and_tabulate(cfg: &RunConfig, progress: impl FnMut(usize, usize)) -> Result<Vec<CellStats>> {
    let states = run_to_dir(cfg, progress)?;
    let cells = aggregate(&RecordSettings::from(cfg), &states)?;
    crate::tables::write_tables(&cfg.output_dir, &cells)?;
    Ok(cells)
}

/// Re-aggregates a record file written earlier.
pub fn tabulate_dir(dir: &Path, out_dir: &Path) -> Result<Vec<CellStats>> {
    let file = crate::records::read_records(&records_path(dir))?;
    let settings = &file.header.settings;
    if file.states.len() < settings.ensemble_count {
        log::warn!(
            "{} holds {} of {} states; tabulating the partial ensemble",
            dir.display(),
            file.states.len(),
            settings.ensemble_count
        );
    }
    let cells = aggregate(settings, &file.states)?;
    crate::tables::write_tables(out_dir, &cells)?;
    Ok(cells)
}
