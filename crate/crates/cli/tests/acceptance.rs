//! Desk-scale acceptance run. Prints one `criterion N: PASS|FAIL` line per
//! criterion; a failing criterion is reported, not turned into a panic.
//!
//! `QCREVIVAL_CRITERIA=1,3,10` runs a subset.

use std::time::{Duration, Instant};

use qcrevival::config::DEFAULT_ALPHAS;
use qcrevival::hist::initial_values;
use qcrevival::run::{aggregate, run_in_memory};
use qcrevival::verify::{self, Report, VerifyOptions};
use qcrevival::{CellStats, RunConfig};
use qcrevival_core::sweep::SweepStop;
use qcrevival_core::{ChannelKind, Measure, OptimizerSettings, Rank, Sides};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn cells(cfg: &RunConfig) -> Vec<CellStats> {
    let states = run_in_memory(cfg).expect("ensemble run");
    aggregate(&cfg.into(), &states).expect("aggregation")
}

fn base(kind: ChannelKind, sides: Sides, rank: Rank, n: usize) -> RunConfig {
    RunConfig {
        kind,
        sides,
        rank,
        ensemble_count: n,
        master_seed: 20240601,
        ..RunConfig::default()
    }
}

fn with_optimizer(mut cfg: RunConfig, opt: OptimizerSettings) -> RunConfig {
    cfg.optimizer_theta_points = opt.theta_points;
    cfg.optimizer_phi_points = opt.phi_points;
    cfg.optimizer_refine_starts = opt.refine_starts;
    cfg.optimizer_tolerance = opt.tolerance;
    cfg.optimizer_max_iterations = opt.max_iterations;
    cfg
}

fn p_collapse(c: &CellStats) -> Option<f64> {
    c.stats.mean_p_collapse.map(|e| e.value)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("undefined".into(), |v| format!("{v:.4}"))
}

fn suite_outcome(report: &Report, elapsed: Duration, limit: Duration) -> Outcome {
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    let in_time = elapsed <= limit;
    let mut detail = format!("{} checks, {:.1}s (limit {}s)", report.checks.len(), elapsed.as_secs_f64(), limit.as_secs());
    if !failed.is_empty() {
        detail.push_str(&format!("; failed: {}", failed.join("; ")));
    }
    outcome(report.passed && in_time, detail)
}

fn timed_suite(f: fn(&VerifyOptions) -> qcrevival::Result<Report>, opts: &VerifyOptions, limit_s: u64) -> Outcome {
    let t = Instant::now();
    match f(opts) {
        Ok(r) => suite_outcome(&r, t.elapsed(), Duration::from_secs(limit_s)),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_1() -> Outcome {
    let opts = VerifyOptions {
        czz_points: 41,
        p_steps: 100,
        ..VerifyOptions::default()
    };
    timed_suite(verify::proposition, &opts, 60)
}

fn criterion_2() -> Outcome {
    let opts = VerifyOptions {
        channel_states: 100,
        channel_p_points: 100,
        ..VerifyOptions::default()
    };
    timed_suite(verify::channels, &opts, 60)
}

fn criterion_3() -> Outcome {
    let opts = VerifyOptions {
        oracle_states: 50,
        oracle_step: 1e-3,
        ..VerifyOptions::default()
    };
    timed_suite(verify::measures, &opts, 300)
}

/// Reference p̄_c^E for dephasing at α = 0, 0.5, 0.9.
const TABLE_III: [(Rank, Sides, [f64; 3]); 7] = [
    (Rank::One, Sides::Double, [0.261, 0.185, 0.146]),
    (Rank::Two, Sides::Single, [0.335, 0.246, 0.195]),
    (Rank::Two, Sides::Double, [0.168, 0.116, 0.091]),
    (Rank::Three, Sides::Single, [0.224, 0.160, 0.127]),
    (Rank::Three, Sides::Double, [0.113, 0.077, 0.060]),
    (Rank::Four, Sides::Single, [0.173, 0.118, 0.093]),
    (Rank::Four, Sides::Double, [0.084, 0.056, 0.044]),
];

fn criterion_4() -> Outcome {
    let mut misses = vec![];
    let mut worst = 0.0f64;
    for (rank, sides, want) in TABLE_III {
        let cfg = RunConfig {
            alphas: vec![0.0, 0.5, 0.9],
            sweep_stop: SweepStop::AfterFirstCollapse,
            ..base(ChannelKind::Dephasing, sides, rank, 5000)
        };
        for (c, w) in cells(&cfg).iter().zip(want) {
            let got = p_collapse(c);
            let dev = got.map_or(f64::INFINITY, |g| (g - w).abs());
            worst = worst.max(dev);
            if dev > 0.01 {
                misses.push(format!("rank-{rank} {sides} a={} got {} want {w}", c.alpha, fmt_opt(got)));
            }
        }
    }
    outcome(
        misses.is_empty(),
        format!("21 cells, worst |dev| {worst:.4}, {} beyond 0.01 [{}]", misses.len(), misses.join("; ")),
    )
}

fn criterion_5() -> Outcome {
    let cfg = RunConfig {
        measures: vec![Measure::Discord],
        alphas: vec![0.0, 0.9],
        sweep_stop: SweepStop::AfterFirstCollapse,
        ..base(ChannelKind::Dephasing, Sides::Double, Rank::One, 2000)
    };
    let mut ok = true;
    let mut parts = vec![];
    for (c, want) in cells(&cfg).iter().zip([0.487, 0.312]) {
        let got = p_collapse(c);
        ok &= got.is_some_and(|g| (g - want).abs() <= 0.01);
        parts.push(format!("a={} got {} want {want}", c.alpha, fmt_opt(got)));
    }
    outcome(ok, parts.join(", "))
}

fn criterion_6() -> Outcome {
    let cfg = RunConfig {
        alphas: vec![0.2, 0.5, 0.9],
        ..base(ChannelKind::Dephasing, Sides::Single, Rank::Two, 5000)
    };
    let got: Vec<Option<f64>> = cells(&cfg).iter().map(|c| c.stats.mean_regeneration.map(|e| e.value)).collect();
    let want = [0.159, 0.458, 0.738];
    let close = got.iter().zip(want).all(|(g, w)| g.is_some_and(|g| (g - w).abs() <= 0.03));
    let vals: Vec<f64> = got.iter().map(|g| g.unwrap_or(f64::NAN)).collect();
    let monotone = vals.windows(2).all(|w| w[0] < w[1]);
    outcome(
        close && monotone,
        format!(
            "R_g = {} want 0.159/0.458/0.738, monotone {monotone}",
            got.iter().map(|g| fmt_opt(*g)).collect::<Vec<_>>().join("/")
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = RunConfig {
        measures: vec![Measure::Discord],
        alphas: vec![0.2, 0.5, 0.6, 0.7, 0.8, 0.9],
        sweep_stop: SweepStop::AfterFirstRegeneration,
        ..base(ChannelKind::Dephasing, Sides::Double, Rank::Four, 2000)
    };
    let mut ok = true;
    let mut parts = vec![];
    for c in cells(&cfg) {
        let pct = c.stats.regeneration_percent.map(|e| e.value);
        ok &= match pct {
            Some(v) if c.alpha < 0.3 => (v - 89.8).abs() <= 1.5,
            Some(v) => v >= 99.9,
            None => false,
        };
        parts.push(format!("a={} {}%", c.alpha, pct.map_or("undefined".into(), |v| format!("{v:.2}"))));
    }
    outcome(ok, format!("{} (want 89.8±1.5 at a=0.2, >=99.9 above)", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];

    let mut single_regens = 0;
    for rank in Rank::ALL {
        let cfg = RunConfig {
            alphas: DEFAULT_ALPHAS.to_vec(),
            sweep_stop: SweepStop::AfterFirstRegeneration,
            ..base(ChannelKind::Depolarizing, Sides::Single, rank, 1000)
        };
        single_regens += cells(&cfg).iter().map(|c| c.stats.n_regenerated).sum::<u64>();
    }
    ok &= single_regens == 0;
    parts.push(format!("single-sided regenerating states {single_regens}"));

    let mut early = vec![];
    let mut late = 0;
    for rank in Rank::ALL {
        let cfg = RunConfig {
            alphas: DEFAULT_ALPHAS.to_vec(),
            sweep_stop: SweepStop::AfterFirstRegeneration,
            ..base(ChannelKind::Depolarizing, Sides::Double, rank, 1000)
        };
        for c in cells(&cfg) {
            if c.alpha < 0.8 && c.stats.n_regenerated > 0 {
                early.push(format!("rank-{rank} a={} ({})", c.alpha, c.stats.n_regenerated));
            }
            if c.alpha >= 0.8 {
                late += c.stats.n_regenerated;
            }
        }
    }
    ok &= early.is_empty() && late > 0;
    parts.push(format!("double-sided regeneration below a=0.8: [{}], at a>=0.8: {late} states", early.join(", ")));

    let cfg = RunConfig {
        alphas: vec![0.9],
        ..base(ChannelKind::Depolarizing, Sides::Double, Rank::One, 5000)
    };
    let c = &cells(&cfg)[0];
    let rg = c.stats.mean_regeneration.map(|e| e.value);
    let preg = c.stats.mean_p_regeneration.map(|e| e.value);
    ok &= rg.is_some_and(|v| (v - 0.579).abs() <= 0.03);
    ok &= preg.is_some_and(|v| (v - 0.571).abs() <= 0.01);
    parts.push(format!("rank-1 a=0.9 R_g {} want 0.579, p_reg {} want 0.571", fmt_opt(rg), fmt_opt(preg)));
    outcome(ok, parts.join("; "))
}

/// Cheaper discord search for the many-cell monotonicity sweep. Collapse
/// points match the default search; the grid must stay fine, since QD only
/// dips below threshold in a narrow window.
fn coarse_optimizer() -> OptimizerSettings {
    OptimizerSettings {
        theta_points: 8,
        phi_points: 16,
        refine_starts: 1,
        ..OptimizerSettings::default()
    }
}

struct Monotone {
    p_c: Vec<f64>,
    /// Smallest collapsed fraction over the α values.
    min_collapsed: f64,
}

fn monotone_cell(kind: ChannelKind, sides: Sides, rank: Rank, measure: Measure) -> std::result::Result<Monotone, String> {
    let mut cfg = RunConfig {
        measures: vec![measure],
        sweep_stop: SweepStop::AfterFirstCollapse,
        ..base(kind, sides, rank, 5000)
    };
    if measure == Measure::Discord {
        cfg = with_optimizer(cfg, coarse_optimizer());
    }
    let mut seen = vec![];
    let mut min_collapsed = 1.0f64;
    for alpha in DEFAULT_ALPHAS {
        cfg.alphas = vec![alpha];
        let c = &cells(&cfg)[0];
        let Some(p) = p_collapse(c) else {
            return Err(format!("undefined at a={alpha} ({} of {} collapsed)", c.stats.n_collapsed, c.stats.n_total));
        };
        if seen.last().is_some_and(|&prev| p >= prev) {
            seen.push(p);
            return Err(format!("not decreasing at a={alpha}: {seen:.4?}"));
        }
        seen.push(p);
        min_collapsed = min_collapsed.min(c.stats.n_collapsed as f64 / c.stats.n_total as f64);
    }
    Ok(Monotone { p_c: seen, min_collapsed })
}

fn criterion_9() -> Outcome {
    let mut failures = vec![];
    let mut thin = vec![];
    let mut checked = 0;
    for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
        for rank in Rank::ALL {
            for sides in [Sides::Single, Sides::Double] {
                // pure states never collapse under one-sided dephasing
                if kind == ChannelKind::Dephasing && rank == Rank::One && sides == Sides::Single {
                    continue;
                }
                for measure in [Measure::LogNegativity, Measure::Discord] {
                    checked += 1;
                    match monotone_cell(kind, sides, rank, measure) {
                        Ok(m) if m.min_collapsed < 0.5 => thin.push(format!(
                            "{kind} {sides} rank-{rank} {measure} (min {:.1}% collapsed, p_c {:.4?})",
                            100.0 * m.min_collapsed,
                            m.p_c
                        )),
                        Ok(_) => {}
                        Err(e) => failures.push(format!("{kind} {sides} rank-{rank} {measure}: {e}")),
                    }
                }
            }
        }
    }

    let opt = OptimizerSettings::default();
    let mut order_ok = true;
    let mut means = vec![];
    for measure in [Measure::LogNegativity, Measure::Discord] {
        let m: Vec<f64> = Rank::ALL
            .iter()
            .map(|&r| {
                let v = initial_values(r, measure, 2000, 20240601, &opt).expect("initial values");
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect();
        order_ok &= m.windows(2).all(|w| w[0] > w[1]);
        means.push(format!("{measure} {m:.3?}"));
    }
    outcome(
        failures.is_empty() && order_ok,
        format!(
            "{} of {checked} p_c cells strictly decreasing; initial means by rank {} decreasing {order_ok}; decreasing on a minority of collapsing states: [{}]{}",
            checked - failures.len(),
            means.join(", "),
            thin.join("; "),
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join("; ")) }
        ),
    )
}

fn criterion_10() -> Outcome {
    timed_suite(verify::determinism, &VerifyOptions::default(), 600)
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; nothing to list here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let selected: Option<Vec<usize>> = std::env::var("QCREVIVAL_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        failed += usize::from(!o.passed);
        println!(
            "criterion {n}: {} ({:.0}s) {}",
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {failed} criteria failed");
}
