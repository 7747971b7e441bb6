//! Verification suites behind `qcrevival verify`.

use std::fmt;
use std::str::FromStr;

use qcrevival_core::linalg::HERMITICITY_TOL;
use qcrevival_core::measures::{log_negativity, mutual_information, quantum_discord};
use qcrevival_core::oracles::{dense_grid_discord, verify_no_revival_random, verify_proposition};
use qcrevival_core::states::{bell_diagonal, phi_plus, product_state, sample_state, werner};
use qcrevival_core::{
    ChannelConfig, ChannelKind, DensityMatrix, Measure, OptimizerSettings, Rank, RandomStateSpec, Sides,
};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Proposition,
    Channels,
    Measures,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Proposition, Suite::Channels, Suite::Measures, Suite::Determinism];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Proposition => "proposition",
            Suite::Channels => "channels",
            Suite::Measures => "measures",
            Suite::Determinism => "determinism",
        })
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// One named check inside a suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("suite {}: {}\n", self.suite, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            out.push_str(&format!("  [{}] {}: {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail));
        }
        out
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Sizes of the verification workloads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub czz_points: usize,
    pub p_steps: usize,
    /// Random states per rank for the Markovian no-revival check.
    pub random_states: usize,
    pub channel_states: usize,
    pub channel_p_points: usize,
    pub oracle_states: usize,
    pub oracle_step: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            czz_points: 41,
            p_steps: 100,
            random_states: 1000,
            channel_states: 100,
            channel_p_points: 100,
            oracle_states: 50,
            oracle_step: 1e-3,
            seed: 2024,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    match suite {
        Suite::Proposition => proposition(opts),
        Suite::Channels => channels(opts),
        Suite::Measures => measures(opts),
        Suite::Determinism => determinism(opts),
    }
}

pub fn proposition(opts: &VerifyOptions) -> Result<Report> {
    let opt = OptimizerSettings::default();
    let mut checks = vec![];
    for sides in [Sides::Single, Sides::Double] {
        let r = verify_proposition(sides, opts.czz_points, opts.p_steps, 1e-5, &opt)?;
        checks.push(check(
            format!("{sides}-sided eigenvalues"),
            r.max_eigenvalue_error <= 1e-10,
            format!("max |closed form - numeric| = {:.2e} on {}x{} grid", r.max_eigenvalue_error, opts.czz_points, opts.p_steps + 1),
        ));
        checks.push(check(
            format!("{sides}-sided collapse points"),
            r.collapse_mismatches.is_empty(),
            format!("{} mismatches beyond one grid step {:?}", r.collapse_mismatches.len(), r.collapse_mismatches),
        ));
        checks.push(check(
            format!("{sides}-sided LN revivals"),
            r.ln_revivals.is_empty(),
            format!("{} revived points", r.ln_revivals.len()),
        ));
        checks.push(check(
            format!("{sides}-sided QD revivals"),
            r.qd_revivals.is_empty(),
            format!("{} revived points", r.qd_revivals.len()),
        ));
    }
    if opts.random_states > 0 {
        for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
            for sides in [Sides::Single, Sides::Double] {
                let mut revived = 0;
                for rank in Rank::ALL {
                    revived += verify_no_revival_random(kind, sides, rank, opts.random_states, opts.seed, opts.p_steps, 1e-5)?.len();
                }
                checks.push(check(
                    format!("Markovian {kind} {sides}-sided random states"),
                    revived == 0,
                    format!("{revived} LN revivals over {} states of each rank", opts.random_states),
                ));
            }
        }
    }
    Ok(Report::new(Suite::Proposition, checks))
}

pub fn channels(opts: &VerifyOptions) -> Result<Report> {
    let per_rank = opts.channel_states.div_ceil(4).max(1);
    let inputs: Vec<DensityMatrix> = Rank::ALL
        .iter()
        .flat_map(|&rank| {
            let spec = RandomStateSpec::new(rank, per_rank, opts.seed).expect("positive count");
            (0..per_rank).map(move |i| sample_state(&spec, i))
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut checks = vec![];
    for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
        for sides in [Sides::Single, Sides::Double] {
            let (mut trace_err, mut herm_err) = (0.0f64, 0.0f64);
            let (mut non_psd, mut non_psd_signed) = (0usize, 0usize);
            let mut evaluated = 0usize;
            for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let cfg = ChannelConfig::new(kind, alpha, sides)?;
                for j in 0..opts.channel_p_points {
                    let p = kind.p_max() * j as f64 / (opts.channel_p_points - 1).max(1) as f64;
                    let signed = cfg.weights(p)?.has_negative();
                    for rho in &inputs {
                        let out = cfg.apply(rho, p)?;
                        let m = out.matrix();
                        trace_err = trace_err.max((m.trace() - 1.0).norm());
                        herm_err = herm_err.max(m.hermiticity_error());
                        if out.min_eigenvalue() < -qcrevival_core::linalg::PSD_SLACK {
                            non_psd += 1;
                            non_psd_signed += usize::from(signed);
                        }
                        evaluated += 1;
                    }
                }
            }
            checks.push(check(
                format!("{kind} {sides}-sided trace and Hermiticity"),
                trace_err < 1e-12 && herm_err < HERMITICITY_TOL,
                format!("max trace error {trace_err:.1e}, max Hermiticity error {herm_err:.1e} over {evaluated} outputs"),
            ));
            // positivity can only fail where a weight is negative
            checks.push(check(
                format!("{kind} {sides}-sided positivity"),
                non_psd == non_psd_signed,
                format!("{non_psd} non-positive outputs, {non_psd_signed} of them in the negative-weight regime"),
            ));
        }
    }
    Ok(Report::new(Suite::Channels, checks))
}

fn random_bd<R: Rng>(rng: &mut R) -> Result<DensityMatrix> {
    let e: Vec<f64> = (0..4).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let w: Vec<f64> = e.iter().map(|x| x / s).collect();
    Ok(bell_diagonal(
        w[0] - w[1] + w[2] - w[3],
        -w[0] + w[1] + w[2] - w[3],
        w[0] + w[1] - w[2] - w[3],
    )?)
}

pub fn measures(opts: &VerifyOptions) -> Result<Report> {
    let opt = OptimizerSettings::default();
    let mut checks = vec![];
    let bell = phi_plus();
    let up = DensityMatrix::from_pure(&[1.0.into(), 0.0.into()])?;
    let plus = DensityMatrix::from_pure(&[std::f64::consts::FRAC_1_SQRT_2.into(), std::f64::consts::FRAC_1_SQRT_2.into()])?;
    let product = product_state(&up, &plus);
    let golden = [
        ("LN(Phi+) = 1", log_negativity(&bell), 1.0, 1e-8),
        ("QD(Phi+) = 1", quantum_discord(&bell, &opt).discord, 1.0, 1e-8),
        ("LN(product) = 0", log_negativity(&product), 0.0, 1e-8),
        ("QD(product) = 0", quantum_discord(&product, &opt).discord, 0.0, 1e-8),
        ("I(Phi+) = 2", mutual_information(&bell), 2.0, 1e-8),
        ("LN(werner(0.5)) = log2(1.25)", log_negativity(&werner(0.5)?), 1.25f64.log2(), 1e-10),
    ];
    for (name, got, want, tol) in golden {
        checks.push(check(name, (got - want).abs() <= tol, format!("{got:.12}")));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut states = vec![bell_diagonal(0.5, 0.25, 0.25)?];
    for _ in 0..opts.oracle_states {
        states.push(random_bd(&mut rng)?);
    }
    let mut worst = 0.0f64;
    for rho in &states {
        let d = quantum_discord(rho, &opt).discord;
        worst = worst.max((d - dense_grid_discord(rho, opts.oracle_step)).abs());
    }
    checks.push(check(
        "optimizer vs dense grid",
        worst <= 1e-4,
        format!("max deviation {worst:.2e} over {} Bell-diagonal states at {} rad", states.len(), opts.oracle_step),
    ));
    Ok(Report::new(Suite::Measures, checks))
}

pub fn determinism(opts: &VerifyOptions) -> Result<Report> {
    let mut checks = vec![];
    let spec = RandomStateSpec::new(Rank::Three, 64, opts.seed)?;
    let a: Vec<_> = (0..64).map(|i| sample_state(&spec, i)).collect::<std::result::Result<_, _>>()?;
    let b: Vec<_> = (0..64).rev().map(|i| sample_state(&spec, i)).collect::<std::result::Result<_, _>>()?;
    let same = a.iter().zip(b.iter().rev()).all(|(x, y)| x.matrix().as_slice() == y.matrix().as_slice());
    checks.push(check("state sampling is order independent", same, "64 rank-3 states drawn forwards and backwards"));

    let base = RunConfig {
        kind: ChannelKind::Depolarizing,
        sides: Sides::Double,
        rank: Rank::One,
        ensemble_count: 48,
        master_seed: opts.seed,
        grid_steps: 100,
        measures: vec![Measure::LogNegativity, Measure::Discord],
        alphas: vec![0.5, 0.9],
        optimizer_theta_points: 10,
        optimizer_phi_points: 20,
        checkpoint_interval: 16,
        ..RunConfig::default()
    };
    let csv = |workers: usize| -> Result<String> {
        let cfg = RunConfig { workers, ..base.clone() };
        let states = crate::run::run_in_memory(&cfg)?;
        let cells = crate::run::aggregate(&(&cfg).into(), &states)?;
        let mut text = String::new();
        for stat in crate::tables::Statistic::ALL {
            text.push_str(&crate::tables::statistic_csv(stat, &cells));
        }
        text.push_str(&crate::tables::normalized_regeneration_csv(&cells));
        Ok(text)
    };
    let one = csv(1)?;
    let four = csv(4)?;
    checks.push(check(
        "CSV identical for 1 and 4 workers",
        one == four,
        format!("{} bytes", one.len()),
    ));
    Ok(Report::new(Suite::Determinism, checks))
}

pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}
