//! Command-line front end: single-point evaluation, sweeps, simulation,
//! oracle cross-checks, preset listing.
//!
//! Exit codes: 0 success; 1 config/validation error; 2 every requested
//! point failed (for example an unstable instance); 3 every point failed
//! and at least one failure was numerical (iteration limit, singular
//! solve, truncation too small).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::model::ModelParams;
use crate::oracle;
use crate::plot;
use crate::sim::SimConfig;
use crate::solver;
use crate::sweep::{self, ColumnSet, EvalOptions, Mode, OutputFormat, SweepConfig, SweepRow};
use crate::{Error, Result};

fn parse_mode(s: &str) -> Result<Mode> {
    Mode::from_str(s)
}

fn parse_format(s: &str) -> Result<OutputFormat> {
    OutputFormat::from_str(s)
}

#[derive(Parser, Debug)]
#[command(
    name = "pbft-qbd",
    version,
    about = "Analytic performance evaluation of the PBFT consensus queue",
    after_help = "Exit codes: 0 success, 1 config/validation error, \
                  2 all points failed, 3 internal numerical failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Arrival rate of transaction packages.
    #[arg(long)]
    lambda: f64,
    /// Per-node three-stage completion rate.
    #[arg(long)]
    mu: f64,
    /// Maximum Byzantine node count (N = 3f + 1 is derived).
    #[arg(short = 'f', long = "byzantine")]
    f: u32,
    /// Block reward per pegged block.
    #[arg(long = "reward", default_value_t = 0.0)]
    c: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.lambda, self.mu, self.f, self.c)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// RNG seed (ChaCha12).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated time units.
    #[arg(long, default_value_t = 1_000_000.0)]
    horizon: f64,
    /// Warmup discarded before averaging; defaults to 1% of the horizon.
    #[arg(long)]
    warmup: Option<f64>,
    /// Batch count for confidence intervals.
    #[arg(long, default_value_t = 20)]
    batches: usize,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        let mut config = SimConfig::new(self.horizon, self.seed);
        if let Some(warmup) = self.warmup {
            config.warmup = warmup;
        }
        config.batches = self.batches;
        config
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one parameter point through the analytic engine (or
    /// another mode via --mode).
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        /// Rate-matrix iteration tolerance.
        #[arg(long, default_value_t = solver::DEFAULT_TOL)]
        tol: f64,
        /// Rate-matrix iteration budget.
        #[arg(long = "max-iter", default_value_t = solver::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// analytic | simulate | oracle | compare.
        #[arg(long, default_value = "analytic", value_parser = parse_mode)]
        mode: Mode,
        /// Oracle truncation level (adaptive when omitted).
        #[arg(long = "level-cap")]
        level_cap: Option<usize>,
        /// In compare mode, simulate points the oracle cannot cover.
        #[arg(long = "with-sim")]
        with_sim: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a sweep from a preset or a TOML config file.
    Sweep {
        /// Preset name (see `presets`).
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// TOML sweep description.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured mode.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Override the configured format.
        #[arg(long, value_parser = parse_format)]
        format: Option<OutputFormat>,
        /// Write rows here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Render an SVG of the sweep to this path.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long = "level-cap")]
        level_cap: Option<usize>,
        /// Worker threads (rows stay in grid order).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "with-sim")]
        with_sim: bool,
        /// Override the base simulation seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the simulation horizon.
        #[arg(long)]
        horizon: Option<f64>,
        /// Override the simulation warmup.
        #[arg(long)]
        warmup: Option<f64>,
        /// Override the simulation batch count.
        #[arg(long)]
        batches: Option<usize>,
    },
    /// Simulate one parameter point.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve one point with the truncated-chain oracle.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        /// Truncation level (adaptive when omitted).
        #[arg(long = "level-cap")]
        level_cap: Option<usize>,
        /// Maximum probability mass allowed at the truncation level.
        #[arg(long = "tail-threshold", default_value_t = oracle::DEFAULT_TAIL_THRESHOLD)]
        tail_threshold: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the shipped sweep presets.
    Presets,
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                3
            } else {
                1
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Eval {
            model,
            tol,
            max_iter,
            mode,
            level_cap,
            with_sim,
            sim,
            output,
        } => {
            let opts = EvalOptions {
                mode,
                tol,
                max_iter,
                sim: Some(sim.config()),
                level_cap,
                tail_threshold: oracle::DEFAULT_TAIL_THRESHOLD,
                with_sim,
            };
            let columns = columns_for(mode, with_sim);
            let row = sweep::run_point(&model.params()?, &opts);
            emit(
                std::slice::from_ref(&row),
                columns,
                output.format,
                output.out.as_deref(),
            )?;
            Ok(exit_code(&[row]))
        }
        Command::Sweep {
            preset,
            config,
            mode,
            format,
            out,
            plot,
            tol,
            max_iter,
            level_cap,
            jobs,
            with_sim,
            seed,
            horizon,
            warmup,
            batches,
        } => {
            let mut sweep_config = load_sweep_config(preset.as_deref(), config.as_deref())?;
            if let Some(mode) = mode {
                sweep_config.mode = mode;
            }
            if let Some(format) = format {
                sweep_config.format = format;
            }
            if let Some(plot) = plot {
                sweep_config.plot = Some(plot);
            }
            if let Some(tol) = tol {
                sweep_config.tol = tol;
            }
            if let Some(max_iter) = max_iter {
                sweep_config.max_iter = max_iter;
            }
            if let Some(level_cap) = level_cap {
                sweep_config.level_cap = Some(level_cap);
            }
            if let Some(jobs) = jobs {
                sweep_config.jobs = jobs;
            }
            if with_sim {
                sweep_config.with_sim = true;
            }
            if seed.is_some() || horizon.is_some() || warmup.is_some() || batches.is_some() {
                let mut sim = sweep_config
                    .sim
                    .unwrap_or_else(|| SimConfig::new(1_000_000.0, 0));
                if let Some(horizon) = horizon {
                    sim = SimConfig::new(horizon, sim.seed);
                }
                if let Some(seed) = seed {
                    sim.seed = seed;
                }
                if let Some(warmup) = warmup {
                    sim.warmup = warmup;
                }
                if let Some(batches) = batches {
                    sim.batches = batches;
                }
                sweep_config.sim = Some(sim);
            }
            sweep_config.validate()?;

            let rows = sweep::run_sweep(&sweep_config)?;
            emit(
                &rows,
                sweep_config.columns(),
                sweep_config.format,
                out.as_deref(),
            )?;
            if let Some(svg_path) = &sweep_config.plot {
                let svg = plot::render_svg(&sweep_config, &rows)?;
                fs::write(svg_path, svg).map_err(io_error)?;
            }
            Ok(exit_code(&rows))
        }
        Command::Simulate { model, sim, output } => {
            let opts = EvalOptions {
                mode: Mode::Simulate,
                sim: Some(sim.config()),
                ..EvalOptions::default()
            };
            let columns = columns_for(Mode::Simulate, false);
            let row = sweep::run_point(&model.params()?, &opts);
            emit(
                std::slice::from_ref(&row),
                columns,
                output.format,
                output.out.as_deref(),
            )?;
            Ok(exit_code(&[row]))
        }
        Command::Oracle {
            model,
            level_cap,
            tail_threshold,
            output,
        } => {
            let opts = EvalOptions {
                mode: Mode::Oracle,
                level_cap,
                tail_threshold,
                ..EvalOptions::default()
            };
            let columns = columns_for(Mode::Oracle, false);
            let row = sweep::run_point(&model.params()?, &opts);
            emit(
                std::slice::from_ref(&row),
                columns,
                output.format,
                output.out.as_deref(),
            )?;
            Ok(exit_code(&[row]))
        }
        Command::Presets => {
            let mut stdout = std::io::stdout().lock();
            for (name, config) in sweep::presets() {
                let fixed: Vec<String> = config
                    .fixed
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                let swept: Vec<String> = config
                    .sweep
                    .iter()
                    .map(|sp| {
                        let values = sp.values.values().expect("preset values are valid");
                        format!(
                            "{} ({} points in [{}, {}])",
                            sp.param,
                            values.len(),
                            values.first().unwrap(),
                            values.last().unwrap()
                        )
                    })
                    .collect();
                writeln!(
                    stdout,
                    "{name}: fixed {{{}}}, swept {}",
                    fixed.join(", "),
                    swept.join(" x ")
                )
                .map_err(io_error)?;
            }
            Ok(0)
        }
    }
}

fn columns_for(mode: Mode, with_sim: bool) -> ColumnSet {
    ColumnSet {
        oracle: mode == Mode::Compare,
        sim: mode == Mode::Simulate || (mode == Mode::Compare && with_sim),
    }
}

fn load_sweep_config(preset: Option<&str>, path: Option<&std::path::Path>) -> Result<SweepConfig> {
    match (preset, path) {
        (Some(name), None) => sweep::preset(name).ok_or_else(|| {
            Error::InvalidSweepConfig(format!(
                "unknown preset `{name}` (available: fig3, fig4, fig5, fig6)"
            ))
        }),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(io_error)?;
            toml::from_str(&text)
                .map_err(|e| Error::InvalidSweepConfig(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(Error::InvalidSweepConfig(
            "sweep needs either --preset or --config".into(),
        )),
        (Some(_), Some(_)) => Err(Error::InvalidSweepConfig(
            "--preset and --config are mutually exclusive".into(),
        )),
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidSweepConfig(format!("io: {e}"))
}

fn emit(
    rows: &[SweepRow],
    columns: ColumnSet,
    format: OutputFormat,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let mut buffer = Vec::new();
    match format {
        OutputFormat::Csv => sweep::write_csv(&mut buffer, rows, columns).map_err(io_error)?,
        OutputFormat::Json => sweep::write_json(&mut buffer, rows, columns).map_err(io_error)?,
    }
    match out {
        Some(path) => fs::write(path, buffer).map_err(io_error)?,
        None => std::io::stdout()
            .lock()
            .write_all(&buffer)
            .map_err(io_error)?,
    }
    Ok(())
}

/// 0 when any point succeeded; otherwise 3 if a numerical failure exists,
/// 1 if everything was rejected as invalid input, else 2.
fn exit_code(rows: &[SweepRow]) -> i32 {
    let failed = rows
        .iter()
        .filter(|r| r.error_code.is_some())
        .collect::<Vec<_>>();
    if failed.len() < rows.len() {
        return 0;
    }
    const NUMERICAL: [&str; 4] = [
        "ITER_LIMIT",
        "BOUNDARY_SOLVE",
        "SINGULAR",
        "TRUNCATION_TOO_SMALL",
    ];
    if failed.iter().any(|r| {
        r.error_code
            .as_deref()
            .is_some_and(|code| NUMERICAL.contains(&code))
    }) {
        3
    } else if failed
        .iter()
        .all(|r| r.error_code.as_deref() == Some("INVALID_PARAM"))
    {
        1
    } else {
        2
    }
}
