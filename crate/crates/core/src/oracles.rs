//! Closed-form reference results for Bell-diagonal states with
//! `C_xx = 1`, `C_yy = -C_zz` under Markovian dephasing, and the harness
//! that checks the numerical pipeline against them.
//!
//! The eigenvalue expressions are written out in closed form rather than
//! computed, so that a slip in either place shows up as a mismatch against
//! the numerical spectrum.

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelConfig, ChannelKind, Sides};
use crate::error::{check_range, Result};
use crate::linalg::{hermitian_eigenvalues, partial_trace, partial_transpose, von_neumann_entropy, DensityMatrix, Subsystem};
use crate::measures::{mutual_information, BlochForm, Measure, OptimizerSettings};
use crate::states::{bell_diagonal, sample_state, Rank, RandomStateSpec};
use crate::sweep::{detect_events, SweepGrid, Sweeper};

/// A Bell-diagonal state `(1, -czz, czz)` dephased at strength `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BDDephasingCase {
    pub czz: f64,
    pub sides: Sides,
    pub p: f64,
}

impl BDDephasingCase {
    pub fn new(czz: f64, sides: Sides, p: f64) -> Result<Self> {
        check_range("czz", czz, -1.0, 1.0)?;
        check_range("p", p, 0.0, 0.5)?;
        Ok(Self { czz, sides, p })
    }

    pub fn initial_state(&self) -> DensityMatrix {
        bell_diagonal(1.0, -self.czz, self.czz).expect("correlators (1, -c, c) are always admissible")
    }

    /// The dephased state, computed numerically.
    pub fn output_state(&self) -> Result<DensityMatrix> {
        ChannelConfig::new(ChannelKind::Dephasing, 0.0, self.sides)?.apply(&self.initial_state(), self.p)
    }
}

/// Partial-transpose eigenvalues of the dephased state, unsorted.
pub fn bd_pt_eigenvalues(case: &BDDephasingCase) -> [f64; 4] {
    let (c, p) = (case.czz, case.p);
    match case.sides {
        Sides::Single => [
            0.5 * (1.0 + (-1.0 + c) * p),
            0.5 * (c * (-1.0 + p) + p),
            0.5 * (1.0 - (1.0 + c) * p),
            0.5 * (c + p - c * p),
        ],
        Sides::Double => {
            let q = 0.5 - p + p * p;
            [
                (1.0 - p) * p + c * q,
                (1.0 - p) * p - c * q,
                0.5 - (1.0 + c) * p + (1.0 + c) * p * p,
                0.5 - (1.0 - c) * p + (1.0 - c) * p * p,
            ]
        }
    }
}

/// Noise strength at which the entanglement of the dephased state vanishes;
/// `None` when the state is separable from the start (`czz = 0`).
///
/// For two-sided noise the negative eigenvalue is a quadratic in `p` with
/// two roots; entanglement always dies at the smaller one.
pub fn bd_collapse_point(czz: f64, sides: Sides) -> Option<f64> {
    if czz == 0.0 {
        return None;
    }
    Some(match sides {
        Sides::Single if czz < 0.0 => czz / (czz - 1.0),
        Sides::Single => czz / (1.0 + czz),
        Sides::Double => {
            let s = czz.abs();
            let disc = (1.0 - s * s).max(0.0).sqrt();
            (1.0 + s - disc) / (2.0 * (1.0 + s))
        }
    })
}

/// Evenly spaced `czz` values over `[-1, 1]`.
pub fn czz_grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        n => (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub label: f64,
    pub p: f64,
    pub value: f64,
}

/// Outcome of [`verify_proposition`]. A failure list is empty on success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub sides: Sides,
    pub czz_points: usize,
    pub p_steps: usize,
    pub max_eigenvalue_error: f64,
    /// `(czz, expected, observed)` for collapses off by more than one grid step.
    pub collapse_mismatches: Vec<(f64, Option<f64>, Option<f64>)>,
    pub ln_revivals: Vec<Violation>,
    pub qd_revivals: Vec<Violation>,
}

impl PropositionReport {
    pub fn passed(&self, eigen_tol: f64) -> bool {
        self.max_eigenvalue_error <= eigen_tol
            && self.collapse_mismatches.is_empty()
            && self.ln_revivals.is_empty()
            && self.qd_revivals.is_empty()
    }
}

/// Runs the Bell-diagonal family through Markovian dephasing and checks
/// spectra, collapse points and the absence of revivals of both measures.
pub fn verify_proposition(
    sides: Sides,
    czz_points: usize,
    p_steps: usize,
    zero_threshold: f64,
    optimizer: &OptimizerSettings,
) -> Result<PropositionReport> {
    let cfg = ChannelConfig::new(ChannelKind::Dephasing, 0.0, sides)?;
    let grid = SweepGrid::for_channel(ChannelKind::Dephasing, p_steps)?;
    let sweeper = Sweeper::new(*optimizer);
    let mut report = PropositionReport {
        sides,
        czz_points,
        p_steps,
        max_eigenvalue_error: 0.0,
        collapse_mismatches: vec![],
        ln_revivals: vec![],
        qd_revivals: vec![],
    };
    for czz in czz_grid(czz_points) {
        for p in grid.points() {
            let case = BDDephasingCase::new(czz, sides, p)?;
            let mut expected = bd_pt_eigenvalues(&case);
            expected.sort_by(f64::total_cmp);
            let pt = partial_transpose(case.output_state()?.matrix(), Subsystem::A);
            let numeric = hermitian_eigenvalues(&pt)?;
            for (e, n) in expected.iter().zip(&numeric) {
                report.max_eigenvalue_error = report.max_eigenvalue_error.max((e - n).abs());
            }
        }

        let rho = BDDephasingCase::new(czz, sides, 0.0)?.initial_state();
        let ln = sweeper.sweep(&rho, &cfg, &grid, Measure::LogNegativity)?;
        let events = detect_events(&ln, zero_threshold)?;
        let expected = bd_collapse_point(czz, sides);
        let ok = match (expected, events.p_c) {
            (None, None) => true,
            (Some(e), Some(o)) => (o - e).abs() <= grid.spacing() * (1.0 + 1e-9),
            _ => false,
        };
        if !ok {
            report.collapse_mismatches.push((czz, expected, events.p_c));
        }
        collect_revivals(&ln, zero_threshold, czz, &mut report.ln_revivals);

        let qd = sweeper.sweep(&rho, &cfg, &grid, Measure::Discord)?;
        collect_revivals(&qd, zero_threshold, czz, &mut report.qd_revivals);
    }
    Ok(report)
}

fn collect_revivals(traj: &crate::sweep::Trajectory, threshold: f64, label: f64, out: &mut Vec<Violation>) {
    let mut dead = false;
    let mut seen = false;
    for (&p, &q) in traj.p_values.iter().zip(&traj.qc_values) {
        if q >= threshold {
            if dead {
                out.push(Violation { label, p, value: q });
            }
            seen = true;
        } else if seen {
            dead = true;
        }
    }
}

/// Discord from an exhaustive scan of measurement axes over the upper
/// hemisphere with angular spacing `step` (radians). Slow by design; used
/// to grade the optimizer.
pub fn dense_grid_discord(rho: &DensityMatrix, step: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, TAU};
    let form = BlochForm::from_state(rho);
    let nt = (FRAC_PI_2 / step).ceil() as usize;
    let np = (TAU / step).ceil() as usize;
    let phis: Vec<(f64, f64)> = (0..np).map(|j| (j as f64 * step).sin_cos()).collect();
    let mut best = f64::INFINITY;
    for i in 0..=nt {
        let (st, ct) = (i as f64 * step).min(FRAC_PI_2).sin_cos();
        for &(sp, cp) in &phis {
            best = best.min(form.conditional_entropy([st * cp, st * sp, ct]));
        }
    }
    let s_a = von_neumann_entropy(&partial_trace(rho, Subsystem::B));
    mutual_information(rho) - (s_a - best)
}

/// Counts entanglement revivals of random states under Markovian noise.
/// Returns the indices of states whose log negativity came back.
pub fn verify_no_revival_random(
    kind: ChannelKind,
    sides: Sides,
    rank: Rank,
    count: usize,
    master_seed: u64,
    p_steps: usize,
    zero_threshold: f64,
) -> Result<Vec<usize>> {
    let spec = RandomStateSpec::new(rank, count, master_seed)?;
    let cfg = ChannelConfig::new(kind, 0.0, sides)?;
    let grid = SweepGrid::for_channel(kind, p_steps)?;
    let sweeper = Sweeper::new(OptimizerSettings::default());
    let mut revived = vec![];
    for i in 0..count {
        let rho = sample_state(&spec, i)?;
        let t = sweeper.sweep(&rho, &cfg, &grid, Measure::LogNegativity)?;
        if detect_events(&t, zero_threshold)?.regenerated {
            revived.push(i);
        }
    }
    Ok(revived)
}
