//! CSV output.

use std::path::Path;

use qcrevival_core::stats::HistogramBin;
use qcrevival_core::sweep::SweepStop;
use qcrevival_core::{EnsembleStats, Estimate};

use crate::error::{CliError, Result};
use crate::format::{fmt_g, fmt_opt};
use crate::run::CellStats;

pub const HEADER: &str = "channel,sides,rank,alpha,measure,n_total,n_collapsed,n_regenerated,value,stderr";
pub const BIN_HEADER: &str = "channel,sides,rank,alpha,measure,bin_lower,bin_upper,n_collapsed,regenerations,value";
pub const HIST_HEADER: &str = "bin_lower,bin_upper,frequency";

/// One scalar statistic per cell, written to `<name>.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    MeanRegeneration,
    MeanRegenerationUnweighted,
    MeanPCollapse,
    MeanPRegeneration,
    MeanInitialQc,
    RegenerationPercent,
}

impl Statistic {
    pub const ALL: [Statistic; 6] = [
        Statistic::MeanRegeneration,
        Statistic::MeanRegenerationUnweighted,
        Statistic::MeanPCollapse,
        Statistic::MeanPRegeneration,
        Statistic::MeanInitialQc,
        Statistic::RegenerationPercent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::MeanRegeneration => "mean_regeneration",
            Statistic::MeanRegenerationUnweighted => "mean_regeneration_unweighted",
            Statistic::MeanPCollapse => "mean_p_collapse",
            Statistic::MeanPRegeneration => "mean_p_regeneration",
            Statistic::MeanInitialQc => "mean_initial_qc",
            Statistic::RegenerationPercent => "regeneration_percent",
        }
    }

    /// Whether sweeps cut short by `stop` still determine this statistic.
    pub fn resolved_by(self, stop: SweepStop) -> bool {
        match stop {
            SweepStop::Never => true,
            SweepStop::AfterFirstRegeneration => !matches!(
                self,
                Statistic::MeanRegeneration | Statistic::MeanRegenerationUnweighted
            ),
            SweepStop::AfterFirstCollapse => self == Statistic::MeanPCollapse,
        }
    }

    pub fn of(self, s: &EnsembleStats) -> Option<Estimate> {
        match self {
            Statistic::MeanRegeneration => s.mean_regeneration,
            Statistic::MeanRegenerationUnweighted => s.mean_regeneration_unweighted.map(|value| Estimate {
                value,
                stderr: f64::NAN,
            }),
            Statistic::MeanPCollapse => s.mean_p_collapse,
            Statistic::MeanPRegeneration => s.mean_p_regeneration,
            Statistic::MeanInitialQc => s.mean_initial_qc,
            Statistic::RegenerationPercent => s.regeneration_percent,
        }
    }
}

fn cell_prefix(c: &CellStats) -> String {
    format!("{},{},{},{},{}", c.kind, c.sides, c.rank, fmt_g(c.alpha, 6), c.measure)
}

/// Long-form CSV of one statistic over `cells`, in the given order.
pub fn statistic_csv(stat: Statistic, cells: &[CellStats]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for c in cells {
        let s = &c.stats;
        let est = stat.of(s);
        let stderr = est.map(|e| e.stderr).filter(|e| e.is_finite());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell_prefix(c),
            s.n_total,
            s.n_collapsed,
            s.n_regenerated,
            fmt_opt(est.map(|e| e.value)),
            fmt_opt(stderr)
        ));
    }
    out
}

pub fn normalized_regeneration_csv(cells: &[CellStats]) -> String {
    let mut out = String::from(BIN_HEADER);
    out.push('\n');
    for c in cells {
        for b in &c.stats.bins {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                cell_prefix(c),
                fmt_g(b.lower, 6),
                fmt_g(b.upper, 6),
                b.collapsed_in_bin,
                b.regenerations_in_bin,
                fmt_opt(b.normalized_regeneration())
            ));
        }
    }
    out
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from(HIST_HEADER);
    out.push('\n');
    for b in bins {
        out.push_str(&format!("{},{},{}\n", fmt_g(b.lower, 6), fmt_g(b.upper, 6), fmt_g(b.frequency, 6)));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes every statistic the sweeps resolved; returns the file names.
pub fn write_tables(dir: &Path, cells: &[CellStats]) -> Result<Vec<String>> {
    if cells.is_empty() {
        return Err(CliError::Config("no cells to tabulate".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let stop = cells[0].sweep_stop;
    let mut written = vec![];
    for stat in Statistic::ALL.into_iter().filter(|s| s.resolved_by(stop)) {
        let name = format!("{}.csv", stat.name());
        write(&dir.join(&name), &statistic_csv(stat, cells))?;
        written.push(name);
    }
    if stop == SweepStop::Never {
        let name = "normalized_regeneration.csv".to_string();
        write(&dir.join(&name), &normalized_regeneration_csv(cells))?;
        written.push(name);
    }
    Ok(written)
}

pub fn write_histogram(path: &Path, bins: &[HistogramBin]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    write(path, &histogram_csv(bins))
}
