//! Noise sweeps and collapse/revival detection.
//!
//! A sweep evaluates one correlation measure on `channel(ρ₀, p)` for every
//! point of a uniform noise grid. Each point is computed from `ρ₀` directly:
//! the channel is a family indexed by `p`, not an iterated map.

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelConfig, ChannelKind};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, PSD_SLACK};
use crate::measures::{log_negativity, DiscordOptimizer, Measure, OptimizerSettings};

/// Default number of grid intervals.
pub const DEFAULT_STEPS: usize = 500;
/// Correlations below this value count as zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-5;

/// `steps + 1` equally spaced noise values from `p_min` to `p_max`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub steps: usize,
}

impl SweepGrid {
    /// Full admissible range of `kind`.
    pub fn for_channel(kind: ChannelKind, steps: usize) -> Result<Self> {
        let grid = Self {
            p_min: 0.0,
            p_max: kind.p_max(),
            steps,
        };
        grid.validate_for(kind)?;
        Ok(grid)
    }

    pub fn validate_for(&self, kind: ChannelKind) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("sweep grid needs at least one step".into()));
        }
        if !(self.p_min >= 0.0 && self.p_min < self.p_max && self.p_max <= kind.p_max()) {
            return Err(Error::Config(format!(
                "grid [{}, {}] is not an increasing sub-range of [0, {}] for {kind} noise",
                self.p_min,
                self.p_max,
                kind.p_max()
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.p_max - self.p_min) / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        if j == self.steps {
            self.p_max
        } else {
            self.p_min + j as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }
}

/// Values of one measure along a noise grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub measure: Measure,
    pub p_values: Vec<f64>,
    pub qc_values: Vec<f64>,
    /// Grid points whose channel output had an eigenvalue below `-PSD_SLACK`.
    #[serde(default)]
    pub non_psd_points: usize,
}

impl Trajectory {
    pub fn new(measure: Measure, p_values: Vec<f64>, qc_values: Vec<f64>) -> Result<Self> {
        if p_values.len() != qc_values.len() {
            return Err(Error::Dimension(format!(
                "{} noise values but {} correlation values",
                p_values.len(),
                qc_values.len()
            )));
        }
        Ok(Self {
            measure,
            p_values,
            qc_values,
            non_psd_points: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_values.is_empty()
    }
}

/// Where a sweep may stop early. Events past the stopping point are not
/// observed, so the resulting [`EventRecord`] is only complete for
/// [`SweepStop::Never`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStop {
    #[default]
    Never,
    /// Enough for the initial value and the first collapse.
    AfterFirstCollapse,
    /// Enough for the first collapse and the first regeneration.
    AfterFirstRegeneration,
}

/// Collapse and revival structure of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub initial_qc: f64,
    pub collapsed: bool,
    pub p_c: Option<f64>,
    pub regenerated: bool,
    pub p_reg: Option<f64>,
    pub regeneration_count: u32,
}

/// Reusable sweep evaluator; holds the discord optimizer so its scan grid is
/// built once.
#[derive(Debug, Clone)]
pub struct Sweeper {
    optimizer: DiscordOptimizer,
}

impl Sweeper {
    pub fn new(settings: OptimizerSettings) -> Self {
        Self {
            optimizer: DiscordOptimizer::new(settings),
        }
    }

    pub fn optimizer(&self) -> &DiscordOptimizer {
        &self.optimizer
    }

    pub fn evaluate(&self, measure: Measure, rho: &DensityMatrix) -> f64 {
        match measure {
            Measure::LogNegativity => log_negativity(rho),
            Measure::Discord => self.optimizer.discord(rho).discord,
        }
    }

    pub fn sweep(&self, rho0: &DensityMatrix, cfg: &ChannelConfig, grid: &SweepGrid, measure: Measure) -> Result<Trajectory> {
        self.sweep_until(rho0, cfg, grid, measure, DEFAULT_ZERO_THRESHOLD, SweepStop::Never)
    }

    /// Sweep that may stop once the requested events have been seen.
    pub fn sweep_until(
        &self,
        rho0: &DensityMatrix,
        cfg: &ChannelConfig,
        grid: &SweepGrid,
        measure: Measure,
        zero_threshold: f64,
        stop: SweepStop,
    ) -> Result<Trajectory> {
        grid.validate_for(cfg.kind)?;
        let mut traj = Trajectory::new(measure, Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()))?;
        let mut tracker = EventTracker::new(zero_threshold);
        for j in 0..grid.len() {
            let p = grid.point(j);
            let weights = cfg.weights(p)?;
            let rho = cfg.apply(rho0, p)?;
            if weights.has_negative() {
                let min = rho.min_eigenvalue();
                if min < -PSD_SLACK {
                    log::debug!("non-positive channel output at p = {p} (min eigenvalue {min:e})");
                    traj.non_psd_points += 1;
                }
            }
            let q = self.evaluate(measure, &rho);
            traj.p_values.push(p);
            traj.qc_values.push(q);
            tracker.push(p, q);
            let done = match stop {
                SweepStop::Never => false,
                SweepStop::AfterFirstCollapse => tracker.record.collapsed,
                SweepStop::AfterFirstRegeneration => tracker.record.regenerated,
            };
            if done {
                break;
            }
        }
        Ok(traj)
    }
}

/// One full sweep with a freshly built optimizer.
pub fn sweep(
    rho0: &DensityMatrix,
    cfg: &ChannelConfig,
    grid: &SweepGrid,
    measure: Measure,
    opt: &OptimizerSettings,
) -> Result<Trajectory> {
    Sweeper::new(*opt).sweep(rho0, cfg, grid, measure)
}

struct EventTracker {
    threshold: f64,
    seen_nonzero: bool,
    below: bool,
    first: bool,
    record: EventRecord,
}

impl EventTracker {
    fn new(threshold: f64) -> Self {
        Self {
            threshold,
            seen_nonzero: false,
            below: false,
            first: true,
            record: EventRecord {
                initial_qc: f64::NAN,
                collapsed: false,
                p_c: None,
                regenerated: false,
                p_reg: None,
                regeneration_count: 0,
            },
        }
    }

    fn push(&mut self, p: f64, q: f64) {
        if self.first {
            self.record.initial_qc = q;
            self.first = false;
        }
        let above = q >= self.threshold;
        let rec = &mut self.record;
        if above {
            if self.below && rec.collapsed {
                rec.regeneration_count += 1;
                if !rec.regenerated {
                    rec.regenerated = true;
                    rec.p_reg = Some(p);
                }
            }
            self.seen_nonzero = true;
            self.below = false;
        } else {
            if self.seen_nonzero && !rec.collapsed {
                rec.collapsed = true;
                rec.p_c = Some(p);
            }
            self.below = true;
        }
    }
}

/// Extracts the collapse/revival structure of `traj`.
///
/// A collapse is the first point below `zero_threshold` that follows a point
/// at or above it; every later return above the threshold is a regeneration.
/// Noise values are reported at the grid points where the transitions are
/// observed, without interpolation.
pub fn detect_events(traj: &Trajectory, zero_threshold: f64) -> Result<EventRecord> {
    if traj.is_empty() {
        return Err(Error::Dimension("empty trajectory".into()));
    }
    let mut tracker = EventTracker::new(zero_threshold);
    for (&p, &q) in traj.p_values.iter().zip(&traj.qc_values) {
        tracker.push(p, q);
    }
    Ok(tracker.record)
}
