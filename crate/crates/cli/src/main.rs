use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sfp_core::game::{check_ergodicity, classify, load, save, validate, PayoffModel};
use sfp_core::harness::{
    emit_plot_data, load_traces, run_experiment, ClassSpec, ExperimentConfig, GeneratorSpec,
};
use sfp_core::oracles::{equilibrium_residuals, solve_oracle};
use sfp_core::regularizers::{ArgmaxOptions, RegularizerKind, Temperature};
use sfp_core::Game;

/// Smooth fictitious play laboratory for discounted stochastic games.
#[derive(Parser)]
#[command(name = "sfplab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a game file and report its class and ergodicity.
    CheckGame {
        /// Game file (JSON).
        #[arg(long)]
        game: PathBuf,
    },
    /// Generate a seeded random ergodic game.
    GenGame(GenGameArgs),
    /// Solve a zero-sum or single-player game with the reference oracle.
    SolveOracle(SolveArgs),
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reshape one metric of a run's traces into long format.
    PlotData {
        /// Output directory of a run.
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        metric: String,
        /// Destination CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenGameArgs {
    #[arg(long)]
    states: usize,
    #[arg(long)]
    players: usize,
    /// Actions per player: one count for all, or a comma-separated list.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    actions: Vec<usize>,
    /// zero-sum, identical-interest, team or general.
    #[arg(long)]
    class: ClassSpec,
    /// Uniform mixing weight in (0, 1].
    #[arg(long, default_value_t = 0.3)]
    mixing: f64,
    #[arg(long, default_value_t = 0.5)]
    discount: f64,
    /// Team offsets, one per player.
    #[arg(long, value_delimiter = ',')]
    offsets: Vec<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    game: PathBuf,
    /// Regularization temperature.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = RegularizerKind::Entropy)]
    regularizer: RegularizerKind,
    /// Result file (JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with an explicit exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Exit(2, msg.into()).into()
}

fn domain(msg: impl Into<String>) -> anyhow::Error {
    Exit(1, msg.into()).into()
}

/// Maps library errors on user input to the parse/usage code.
fn input_error(e: sfp_core::Error) -> anyhow::Error {
    match e {
        sfp_core::Error::Parse { .. } | sfp_core::Error::Config(_) | sfp_core::Error::Io(_) => {
            usage(e.to_string())
        }
        other => domain(other.to_string()),
    }
}

fn check_game(path: PathBuf) -> anyhow::Result<u8> {
    let game: Game = load(&path).map_err(input_error)?;
    let report = validate(&game);
    if report.is_valid() {
        println!("valid");
    } else {
        println!("invalid");
        for issue in &report.issues {
            println!("  {issue}");
        }
    }
    println!("class: {}", classify(&game));
    println!("{}", check_ergodicity(&game));
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn gen_game(args: GenGameArgs) -> anyhow::Result<u8> {
    let action_counts = match args.actions.as_slice() {
        [n] => vec![*n; args.players],
        list if list.len() == args.players => list.to_vec(),
        list => {
            return Err(usage(format!(
                "--actions lists {} counts for {} players",
                list.len(),
                args.players
            )))
        }
    };
    let spec = GeneratorSpec {
        num_states: args.states,
        action_counts,
        discount: args.discount,
        class: args.class,
        offsets: args.offsets,
        mixing: args.mixing,
        seed: args.seed,
    };
    let game = spec.generate().map_err(|e| usage(e.to_string()))?;
    save(&game, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(0)
}

fn solve(args: SolveArgs) -> anyhow::Result<u8> {
    let game: Game = load(&args.game).map_err(input_error)?;
    let report = validate(&game);
    if !report.is_valid() {
        return Err(domain(format!("invalid game: {report}")));
    }
    let beta = Temperature::new(args.beta).map_err(|e| usage(e.to_string()))?;
    let result = solve_oracle(&game, beta, &args.regularizer, args.tol)
        .map_err(|e| domain(e.to_string()))?;
    let residuals = equilibrium_residuals(
        &game,
        beta,
        &args.regularizer,
        &ArgmaxOptions::default(),
        &result.profile,
        &result.values,
    )?;
    let values: Vec<Vec<f64>> = (0..game.num_players())
        .map(|i| result.values.player_values(i))
        .collect();
    let doc = json!({
        "class": classify(&game).name(),
        "beta": args.beta,
        "values": values,
        "profile": result.profile.as_nested(),
        "residual": result.residual,
        "iterations": result.iterations,
        "value_residuals": residuals.value,
        "best_response_residuals": residuals.best_response,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(if result.residual <= args.tol { 0 } else { 1 })
}

fn run(config: PathBuf) -> anyhow::Result<u8> {
    let cfg = ExperimentConfig::load(&config).map_err(input_error)?;
    let report = run_experiment(&cfg).map_err(input_error)?;
    for seed in &report.seeds {
        match &seed.error {
            Some(e) => println!("seed {}: error: {e}", seed.seed),
            None => println!("seed {}: ok", seed.seed),
        }
    }
    for t in &report.thresholds {
        println!(
            "threshold {} <= {}: {}/{} seeds, {}",
            t.metric,
            t.max,
            t.passed_seeds,
            t.total_seeds,
            if t.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "summary: {}",
        cfg.output_dir
            .join(sfp_core::harness::SUMMARY_FILE)
            .display()
    );
    Ok(if report.pass { 0 } else { 1 })
}

fn plot_data(dir: PathBuf, metric: String, out: Option<PathBuf>) -> anyhow::Result<u8> {
    if !dir.is_dir() {
        bail!(usage(format!("{} is not a directory", dir.display())));
    }
    let traces = load_traces(&dir).map_err(input_error)?;
    if traces.is_empty() {
        return Err(domain(format!("no trace files in {}", dir.display())));
    }
    let table = emit_plot_data(&traces, &metric).map_err(|e| domain(e.to_string()))?;
    match out {
        Some(path) => {
            let file =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            table.write_csv(std::io::BufWriter::new(file))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::CheckGame { game } => check_game(game),
        Command::GenGame(args) => gen_game(args),
        Command::SolveOracle(args) => solve(args),
        Command::Run { config } => run(config),
        Command::PlotData { dir, metric, out } => plot_data(dir, metric, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Exit>().map_or(1, |x| x.0);
            ExitCode::from(code)
        }
    }
}
