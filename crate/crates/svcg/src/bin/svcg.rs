//! Command-line surface: solving, verification, share reports, closed-form
//! bounds, brute-force optima, measured metrics, and instance generation.
//!
//! Exit codes: 0 on success (and for `verify`, only when the profile is a
//! rho-PNE), 1 on validation/precondition failures (single line with an
//! `error:` prefix on stderr), 2 when an enumeration cap refuses the run.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use svcg::analysis::{self, BoundValues, EnumerationLimits, MeasuredRatio, Objective};
use svcg::game::{self, read_game, read_profile, write_game, write_profile};
use svcg::generator::{generate, GeneratorParams};
use svcg::sharing::{budget_residuals, recommended_batch_count, share_report, SampleConfig};
use svcg::solver;
use svcg::{Error, ShareMethod};

#[derive(Parser)]
#[command(
    name = "svcg",
    about = "Weighted congestion games under Shapley cost sharing: solver and analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ShapleyExact,
    ShapleySampled,
    Proportional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Sc,
    Potential,
}

#[derive(Subcommand)]
enum Command {
    /// Run the phased improvement dynamics to an approximate equilibrium.
    Solve {
        game: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "shapley-exact")]
        method: MethodArg,
        /// Sampling accuracy (shapley-sampled only); defaults to gamma.
        #[arg(long)]
        mu: Option<f64>,
        /// Sampling batch count (shapley-sampled only); defaults to the
        /// amplification count derived from the schedule.
        #[arg(long)]
        batches: Option<u32>,
        /// Master seed (required for shapley-sampled).
        #[arg(long)]
        seed: Option<u64>,
        /// Move log output, one JSON record per line.
        #[arg(long)]
        trace: PathBuf,
        /// Final profile output (default: trace path with .profile.json).
        #[arg(long)]
        profile_out: Option<PathBuf>,
        /// Per-phase summary CSV (default: trace path with .summary.csv).
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Check whether a profile is a rho-approximate equilibrium.
    Verify {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, value_enum, default_value = "shapley-exact")]
        method: MethodArg,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        #[arg(long, default_value_t = 11)]
        batches: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print per-(player, resource) cost shares and budget residuals.
    Shapley {
        game: PathBuf,
        profile: PathBuf,
        /// Exact Shapley shares (default).
        #[arg(long, conflicts_with = "sample")]
        exact: bool,
        /// Sampled Shapley shares.
        #[arg(long)]
        sample: bool,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        #[arg(long, default_value_t = 11)]
        batches: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the closed-form bounds for a degree and rho.
    Bounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Exact minimizer of social cost or potential by full enumeration.
    Bruteforce {
        game: PathBuf,
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
    },
    /// Measured price of anarchy and stretch against the closed-form bounds.
    Metrics {
        game: PathBuf,
        #[arg(long)]
        rho: f64,
    },
    /// Generate a random instance.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        players: usize,
        #[arg(long, default_value_t = 5)]
        resources: usize,
        #[arg(long, default_value_t = 3)]
        strategies: usize,
        #[arg(long, default_value_t = 1)]
        strategy_size_min: usize,
        #[arg(long, default_value_t = 2)]
        strategy_size_max: usize,
        #[arg(long, default_value_t = 0.5)]
        weight_min: f64,
        #[arg(long, default_value_t = 3.0)]
        weight_max: f64,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 0.1)]
        coeff_min: f64,
        #[arg(long, default_value_t = 2.0)]
        coeff_max: f64,
        #[arg(long)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CapExceeded(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn build_method(
    arg: MethodArg,
    mu: f64,
    batches: u32,
    seed: Option<u64>,
) -> Result<ShareMethod, Error> {
    Ok(match arg {
        MethodArg::ShapleyExact => ShareMethod::ShapleyExact,
        MethodArg::Proportional => ShareMethod::Proportional,
        MethodArg::ShapleySampled => {
            let seed = seed.ok_or_else(|| {
                Error::Precondition("--seed is required with method shapley-sampled".into())
            })?;
            ShareMethod::ShapleySampled(SampleConfig::new(mu, batches, seed)?)
        }
    })
}

fn sibling_path(trace: &Path, suffix: &str) -> PathBuf {
    let stem = trace
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    trace.with_file_name(format!("{stem}{suffix}"))
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Solve {
            game: game_path,
            gamma,
            method,
            mu,
            batches,
            seed,
            trace,
            profile_out,
            summary_out,
        } => {
            let game = read_game(&game_path)?;
            game::ensure_valid(&game)?;
            let initial = svcg::Profile::new(vec![0; game.players.len()]);

            let method = match method {
                MethodArg::ShapleySampled => {
                    // The amplification count needs the schedule, so derive
                    // it (and the default mu = gamma) before building the
                    // sampled method.
                    let sched = solver::compute_schedule(&game, &initial, gamma)?;
                    let mu = mu.unwrap_or(gamma);
                    let batches = batches.unwrap_or_else(|| {
                        let max_strategies = game
                            .players
                            .iter()
                            .map(|p| p.strategies.len())
                            .max()
                            .unwrap_or(1);
                        let cost_ratio_log =
                            (sched.x_max / sched.x_min).max(1.0).ln() / sched.g.ln();
                        recommended_batch_count(
                            game.players.len(),
                            max_strategies,
                            game.resources.len(),
                            cost_ratio_log,
                            game.d,
                            gamma,
                            1.0,
                        )
                    });
                    build_method(MethodArg::ShapleySampled, mu, batches, seed)?
                }
                other => build_method(other, 0.1, 11, seed)?,
            };

            let out = solver::solve(&game, &initial, gamma, &method)?;
            std::fs::write(&trace, out.trace.to_json_lines())?;
            let profile_path = profile_out.unwrap_or_else(|| sibling_path(&trace, ".profile.json"));
            write_profile(&profile_path, &out.final_profile)?;
            let summary_path = summary_out.unwrap_or_else(|| sibling_path(&trace, ".summary.csv"));
            std::fs::write(&summary_path, out.trace.phase_csv())?;

            println!("alpha {}", out.schedule.alpha);
            println!("theta {}", out.schedule.theta);
            println!("m {}", out.schedule.m);
            println!("steps {}", out.trace.moves.len());
            Ok(0)
        }
        Command::Verify {
            game: game_path,
            profile: profile_path,
            rho,
            method,
            mu,
            batches,
            seed,
        } => {
            let game = read_game(&game_path)?;
            game::ensure_valid(&game)?;
            let profile = read_profile(&profile_path)?;
            let method = build_method(method, mu, batches, seed)?;
            let report = analysis::verify_approx_equilibrium(
                &game,
                &profile,
                &method,
                &EnumerationLimits::default(),
            )?;
            println!("worst_ratio {}", report.worst_ratio);
            if let Some((player, strategy)) = report.witness {
                println!("witness player={player} strategy={strategy}");
            }
            let is_pne = report.is_rho_pne(rho);
            println!("rho_pne {is_pne}");
            Ok(if is_pne { 0 } else { 1 })
        }
        Command::Shapley {
            game: game_path,
            profile: profile_path,
            exact: _,
            sample,
            mu,
            batches,
            seed,
        } => {
            let game = read_game(&game_path)?;
            game::ensure_valid(&game)?;
            let profile = read_profile(&profile_path)?;
            let method = if sample {
                build_method(MethodArg::ShapleySampled, mu, batches, seed)?
            } else {
                ShareMethod::ShapleyExact
            };
            let report = share_report(&game, &profile, &method)?;
            let residuals = budget_residuals(&game, &profile, &report)?;
            let mut value = serde_json::to_value(&report)?;
            value["residuals"] = serde_json::to_value(&residuals)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(0)
        }
        Command::Bounds { d, rho, gamma } => {
            let bounds = BoundValues::compute(rho, d)?;
            println!("lambda {}", bounds.lambda);
            println!("mu_smooth {}", bounds.mu_smooth);
            println!("poa_bound {}", bounds.poa_bound);
            println!("stretch_bound {}", bounds.stretch_bound);
            println!("limited_stretch_bound {}", bounds.limited_stretch_bound);
            if let Some(gamma) = gamma {
                println!("alpha {}", analysis::alpha_of(gamma, d)?);
            }
            Ok(0)
        }
        Command::Bruteforce {
            game: game_path,
            objective,
        } => {
            let game = read_game(&game_path)?;
            let objective = match objective {
                ObjectiveArg::Sc => Objective::SocialCost,
                ObjectiveArg::Potential => Objective::Potential,
            };
            let (profile, value) =
                analysis::brute_force_min(&game, objective, &EnumerationLimits::default())?;
            println!("minimizer {}", serde_json::to_string(&profile.choice)?);
            println!("value {value}");
            Ok(0)
        }
        Command::Metrics {
            game: game_path,
            rho,
        } => {
            let game = read_game(&game_path)?;
            game::ensure_valid(&game)?;
            let limits = EnumerationLimits::default();
            let poa = analysis::measured_poa(&game, rho, &ShareMethod::ShapleyExact, &limits)?;
            let stretch = analysis::measured_stretch(&game, rho, None, &limits)?;
            print_metric(
                "measured_poa",
                poa,
                analysis::poa_bound(rho, game.d),
                "poa_bound",
            );
            print_metric(
                "measured_stretch",
                stretch,
                analysis::stretch_bound(rho, game.d),
                "stretch_bound",
            );
            Ok(0)
        }
        Command::Generate {
            out,
            players,
            resources,
            strategies,
            strategy_size_min,
            strategy_size_max,
            weight_min,
            weight_max,
            degree,
            coeff_min,
            coeff_max,
            seed,
        } => {
            let params = GeneratorParams {
                players,
                resources,
                strategies_per_player: strategies,
                strategy_size: (strategy_size_min, strategy_size_max),
                weight_range: (weight_min, weight_max),
                degree,
                coeff_range: (coeff_min, coeff_max),
                seed,
            };
            let game = generate(&params)?;
            write_game(&out, &game)?;
            println!(
                "wrote {} ({} players, {} resources, d={})",
                out.display(),
                game.players.len(),
                game.resources.len(),
                game.d
            );
            Ok(0)
        }
    }
}

fn print_metric(
    measured_label: &str,
    measured: MeasuredRatio,
    bound: Result<f64, Error>,
    bound_label: &str,
) {
    println!("{measured_label} {measured}");
    match bound {
        Ok(b) => println!("{bound_label} {b}"),
        Err(_) => println!("{bound_label} inadmissible"),
    }
}
