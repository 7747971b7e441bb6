use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcrevival::config::{resolve, Overrides};
use qcrevival::verify::{self, Report, Suite, VerifyOptions};
use qcrevival::{run, tables, CliError};
use qcrevival_core::Rank;

#[derive(Parser)]
#[command(name = "qcrevival", version, about = "Collapse and revival of quantum correlations in random two-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// TOML run configuration; flags override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = VerifyOptions::default().czz_points)]
    czz_points: usize,
    #[arg(long, default_value_t = VerifyOptions::default().p_steps)]
    p_steps: usize,
    #[arg(long, default_value_t = VerifyOptions::default().random_states)]
    random_states: usize,
    #[arg(long, default_value_t = VerifyOptions::default().oracle_states)]
    oracle_states: usize,
    #[arg(long, default_value_t = VerifyOptions::default().oracle_step)]
    oracle_step: f64,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    /// Print the reports as JSON instead of text.
    #[arg(long)]
    json: bool,
}

impl VerifyArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            czz_points: self.czz_points,
            p_steps: self.p_steps,
            random_states: self.random_states,
            oracle_states: self.oracle_states,
            oracle_step: self.oracle_step,
            seed: self.seed,
            ..VerifyOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble, write per-state records and CSV tables.
    Sweep(ConfigArgs),
    /// Recompute the CSV tables from a record directory.
    Tables {
        /// Directory holding records.jsonl.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the tables; defaults to the input directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Histograms of the initial correlations.
    Hist {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0.1)]
        bin_width: f64,
        /// Every rank instead of the configured one.
        #[arg(long)]
        all_ranks: bool,
    },
    /// Check the Bell-diagonal closed forms against the numerics.
    VerifyProposition(VerifyArgs),
    /// Run verification suites: proposition, channels, measures, determinism or all.
    Verify {
        suite: String,
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Print the resolved configuration.
    ShowConfig(ConfigArgs),
}

fn print_reports(reports: &[Report], json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(reports).expect("reports serialize"));
    } else {
        for r in reports {
            print!("{}", r.render());
        }
    }
}

fn run_verify(suites: &[Suite], args: &VerifyArgs) -> Result<i32, CliError> {
    let opts = args.options();
    let reports = suites
        .iter()
        .map(|&s| verify::run_suite(s, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    print_reports(&reports, args.json);
    Ok(verify::exit_code(&reports))
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Sweep(a) => {
            let cfg = resolve(a.config.as_deref(), &a.overrides)?;
            let cells = run::run_and_tabulate(&cfg, |done, total| log::info!("{done}/{total} states"))?;
            for c in &cells {
                let pc = c.stats.mean_p_collapse.map(|e| format!("{:.4}", e.value)).unwrap_or_else(|| "-".into());
                println!(
                    "{} {} rank {} alpha {} {}: {} of {} collapsed, {} regenerated, mean p_c {}",
                    c.kind, c.sides, c.rank, c.alpha, c.measure, c.stats.n_collapsed, c.stats.n_total, c.stats.n_regenerated, pc
                );
            }
            println!("tables written to {}", cfg.output_dir.display());
            Ok(0)
        }
        Command::Tables { input, output } => {
            let out = output.unwrap_or_else(|| input.clone());
            let cells = run::tabulate_dir(&input, &out)?;
            println!("{} cells tabulated into {}", cells.len(), out.display());
            Ok(0)
        }
        Command::Hist { config, bin_width, all_ranks } => {
            let cfg = resolve(config.config.as_deref(), &config.overrides)?;
            let ranks = if all_ranks { Rank::ALL.to_vec() } else { vec![cfg.rank] };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            for rank in ranks {
                for &measure in &cfg.measures {
                    let bins = pool.install(|| {
                        qcrevival::hist::initial_histogram(rank, measure, cfg.ensemble_count, cfg.master_seed, &cfg.optimizer(), bin_width)
                    })?;
                    let path = cfg.output_dir.join(format!("hist_{measure}_rank{rank}.csv"));
                    tables::write_histogram(&path, &bins)?;
                    println!("{}", path.display());
                }
            }
            Ok(0)
        }
        Command::VerifyProposition(args) => run_verify(&[Suite::Proposition], &args),
        Command::Verify { suite, args } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse::<Suite>().map_err(CliError::Config)?]
            };
            run_verify(&suites, &args)
        }
        Command::ShowConfig(a) => {
            let cfg = resolve(a.config.as_deref(), &a.overrides)?;
            print!("{}", cfg.to_toml());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
