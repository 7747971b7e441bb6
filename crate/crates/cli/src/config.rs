//! Run configuration: a flat TOML document whose keys double as
//! command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use qcrevival_core::sweep::{SweepStop, DEFAULT_STEPS, DEFAULT_ZERO_THRESHOLD};
use qcrevival_core::{ChannelKind, Measure, OptimizerSettings, Rank, Sides, SweepGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// The α values tabulated for every channel.
pub const DEFAULT_ALPHAS: [f64; 8] = [0.0, 0.2, 0.3, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ChannelKind,
    pub sides: Sides,
    pub rank: Rank,
    /// States per cell. 5000 puts the standard error of p_c near 0.001.
    pub ensemble_count: usize,
    pub master_seed: u64,
    pub grid_steps: usize,
    pub zero_threshold: f64,
    pub measures: Vec<Measure>,
    pub alphas: Vec<f64>,
    /// Stop each sweep once the statistics that need it are resolved.
    pub sweep_stop: SweepStop,
    pub output_dir: PathBuf,
    pub optimizer_theta_points: usize,
    pub optimizer_phi_points: usize,
    pub optimizer_refine_starts: usize,
    pub optimizer_tolerance: f64,
    pub optimizer_max_iterations: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// States simulated between two flushes of the record file.
    pub checkpoint_interval: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = OptimizerSettings::default();
        Self {
            kind: ChannelKind::Dephasing,
            sides: Sides::Single,
            rank: Rank::Two,
            ensemble_count: 5000,
            master_seed: 1,
            grid_steps: DEFAULT_STEPS,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            measures: vec![Measure::LogNegativity],
            alphas: DEFAULT_ALPHAS.to_vec(),
            sweep_stop: SweepStop::Never,
            output_dir: PathBuf::from("results"),
            optimizer_theta_points: opt.theta_points,
            optimizer_phi_points: opt.phi_points,
            optimizer_refine_starts: opt.refine_starts,
            optimizer_tolerance: opt.tolerance,
            optimizer_max_iterations: opt.max_iterations,
            workers: 0,
            checkpoint_interval: 256,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn optimizer(&self) -> OptimizerSettings {
        OptimizerSettings {
            theta_points: self.optimizer_theta_points,
            phi_points: self.optimizer_phi_points,
            refine_starts: self.optimizer_refine_starts,
            tolerance: self.optimizer_tolerance,
            max_iterations: self.optimizer_max_iterations,
        }
    }

    pub fn grid(&self) -> Result<SweepGrid> {
        Ok(SweepGrid::for_channel(self.kind, self.grid_steps)?)
    }

    /// Rejects anything that would fail after compute has started.
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_count == 0 {
            return Err(CliError::Config("ensemble_count must be positive".into()));
        }
        self.grid()?;
        if !(self.zero_threshold > 0.0) {
            return Err(CliError::Config("zero_threshold must be positive".into()));
        }
        if self.measures.is_empty() {
            return Err(CliError::Config("measures must not be empty".into()));
        }
        if has_duplicates(&self.measures) {
            return Err(CliError::Config("measures contains duplicates".into()));
        }
        if self.alphas.is_empty() {
            return Err(CliError::Config("alphas must not be empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(CliError::Config(format!("alpha {a} outside [0, 1]")));
        }
        if has_duplicates(&self.alphas) {
            return Err(CliError::Config("alphas contains duplicates".into()));
        }
        if self.checkpoint_interval == 0 {
            return Err(CliError::Config("checkpoint_interval must be positive".into()));
        }
        self.optimizer().validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = &o.$field { self.$field = v.clone(); } )* };
        }
        set!(
            kind,
            sides,
            ensemble_count,
            master_seed,
            grid_steps,
            zero_threshold,
            output_dir,
            optimizer_theta_points,
            optimizer_phi_points,
            optimizer_refine_starts,
            optimizer_tolerance,
            optimizer_max_iterations,
            workers,
            checkpoint_interval
        );
        if let Some(r) = o.rank {
            self.rank = Rank::try_from(r)?;
        }
        if let Some(s) = &o.measures {
            self.measures = parse_list(s, |x| x.parse::<Measure>().map_err(|e| e.to_string()))?;
        }
        if let Some(s) = &o.alphas {
            self.alphas = parse_list(s, |x| x.parse::<f64>().map_err(|e| format!("alpha `{x}`: {e}")))?;
        }
        if let Some(s) = &o.sweep_stop {
            self.sweep_stop = match s.as_str() {
                "never" => SweepStop::Never,
                "after_first_collapse" => SweepStop::AfterFirstCollapse,
                "after_first_regeneration" => SweepStop::AfterFirstRegeneration,
                other => return Err(CliError::Config(format!("unknown sweep_stop `{other}`"))),
            };
        }
        Ok(())
    }
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, x)| v[..i].contains(x))
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| f(x).map_err(CliError::Config))
        .collect()
}

/// Command-line overrides, one per config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long = "kind", value_parser = parse_kind)]
    pub kind: Option<ChannelKind>,
    #[arg(long = "sides", value_parser = parse_sides)]
    pub sides: Option<Sides>,
    #[arg(long = "rank")]
    pub rank: Option<u8>,
    #[arg(long = "ensemble_count", visible_alias = "ensemble-count")]
    pub ensemble_count: Option<usize>,
    #[arg(long = "master_seed", visible_alias = "master-seed")]
    pub master_seed: Option<u64>,
    #[arg(long = "grid_steps", visible_alias = "grid-steps")]
    pub grid_steps: Option<usize>,
    #[arg(long = "zero_threshold", visible_alias = "zero-threshold")]
    pub zero_threshold: Option<f64>,
    /// Comma-separated, e.g. `LN,QD`.
    #[arg(long = "measures")]
    pub measures: Option<String>,
    /// Comma-separated, e.g. `0,0.5,0.9`.
    #[arg(long = "alphas")]
    pub alphas: Option<String>,
    /// `never`, `after_first_collapse` or `after_first_regeneration`.
    #[arg(long = "sweep_stop", visible_alias = "sweep-stop")]
    pub sweep_stop: Option<String>,
    #[arg(long = "output_dir", visible_alias = "output-dir")]
    pub output_dir: Option<PathBuf>,
    #[arg(long = "optimizer_theta_points", visible_alias = "optimizer-theta-points")]
    pub optimizer_theta_points: Option<usize>,
    #[arg(long = "optimizer_phi_points", visible_alias = "optimizer-phi-points")]
    pub optimizer_phi_points: Option<usize>,
    #[arg(long = "optimizer_refine_starts", visible_alias = "optimizer-refine-starts")]
    pub optimizer_refine_starts: Option<usize>,
    #[arg(long = "optimizer_tolerance", visible_alias = "optimizer-tolerance")]
    pub optimizer_tolerance: Option<f64>,
    #[arg(long = "optimizer_max_iterations", visible_alias = "optimizer-max-iterations")]
    pub optimizer_max_iterations: Option<usize>,
    #[arg(long = "workers")]
    pub workers: Option<usize>,
    #[arg(long = "checkpoint_interval", visible_alias = "checkpoint-interval")]
    pub checkpoint_interval: Option<usize>,
}

fn parse_kind(s: &str) -> std::result::Result<ChannelKind, String> {
    s.parse().map_err(|e: qcrevival_core::Error| e.to_string())
}

fn parse_sides(s: &str) -> std::result::Result<Sides, String> {
    s.parse().map_err(|e: qcrevival_core::Error| e.to_string())
}

/// Resolves defaults, then the optional file, then flag overrides.
pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}
