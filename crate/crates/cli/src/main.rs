use clap::{Args, Parser, Subcommand, ValueEnum};
use ehfbl::harness::{
    emit_csv, emit_json, emit_plot_data, load_config, moments_report, read_csv, read_json,
    run_sweep, ExperimentConfig, Mode, MomentsReport, ResultRow,
};
use ehfbl::{Error, Result};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_VAR: &str = "EHFBL_THREADS";

#[derive(Parser)]
#[command(name = "ehfbl", version, about = "Finite-blocklength bounds and simulation for energy-harvesting AWGN channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the analytic bounds over the config grid.
    Bounds(Common),
    /// Information-density moments, quadrature against Monte Carlo.
    Moments(Common),
    /// Bounds plus Monte Carlo error events at every grid point.
    Simulate(Common),
    /// Evaluate the grid as configured.
    Sweep(Common),
    /// Extract gnuplot series from a config run or a saved result file.
    PlotData(PlotArgs),
}

#[derive(Args)]
struct Overrides {
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte Carlo trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct PlotArgs {
    /// Run this config and plot its rows.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    config: Option<PathBuf>,
    /// Plot rows from a saved `.json` or `.csv` result file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column for the x axis.
    #[arg(long, default_value = "n_hat")]
    x: String,
    /// Comma-separated columns for the y axis.
    #[arg(long, value_delimiter = ',', default_value = "rate_bits_per_use")]
    y: Vec<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) => 1,
        _ => 2,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Error::Validation(format!("{THREADS_VAR} = {raw:?} must be a positive integer"))
        })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Validation(format!("{THREADS_VAR}: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn load(path: &Path, o: &Overrides, mode: Option<Mode>) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path)?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = o.trials {
        cfg.trials = trials;
    }
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Io {
                path: path.into(),
                source: e,
            })?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| relabel(e, path))?;
            w.flush().map_err(|e| Error::Io {
                path: path.into(),
                source: e,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush().map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.into(),
            source,
        },
        other => other,
    }
}

// Rows that carried a per-point failure are still written; the run then
// reports a runtime error.
fn check_rows(rows: &[ResultRow]) -> Result<()> {
    let failed: Vec<_> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.error.as_ref().map(|e| (i, e)))
        .collect();
    for (i, e) in &failed {
        eprintln!("ehfbl: row {i}: {e}");
    }
    match failed.len() {
        0 => Ok(()),
        k => Err(Error::NumericInconsistency(format!(
            "{k} of {} grid points failed",
            rows.len()
        ))),
    }
}

fn rows_command(args: &Common, mode: Mode) -> Result<()> {
    let cfg = load(&args.config, &args.overrides, Some(mode))?;
    let rows = run_sweep(&cfg)?;
    with_output(args.overrides.out.as_deref(), |w| match args.format {
        Format::Csv => emit_csv(&rows, w),
        Format::Json => emit_json(&rows, w),
    })?;
    check_rows(&rows)
}

fn moments_csv(rep: &MomentsReport, w: &mut dyn Write) -> Result<()> {
    let io = |e| Error::Io {
        path: "<stream>".into(),
        source: e,
    };
    let f = |v: f64| format!("{v:.11e}");
    let (q, mc) = (&rep.quadrature, &rep.monte_carlo);
    writeln!(w, "quantity,closed_form,quadrature,monte_carlo,std_error").map_err(io)?;
    let lines = [
        ("mean_bits", Some(rep.capacity_bits), q.mean_bits, mc.set.mean_bits, Some(mc.se_mean)),
        ("var_bits2", Some(rep.dispersion_bits2), q.var_bits2, mc.set.var_bits2, Some(mc.se_var)),
        ("abs3_bits3", None, q.abs3_bits3, mc.set.abs3_bits3, Some(mc.se_abs3)),
        ("k", None, q.k, mc.set.k, None),
        ("var_z", None, q.var_z, mc.set.var_z, None),
    ];
    for (name, closed, qv, mv, se) in lines {
        writeln!(
            w,
            "{name},{},{},{},{}",
            closed.map(f).unwrap_or_default(),
            f(qv),
            f(mv),
            se.map(f).unwrap_or_default()
        )
        .map_err(io)?;
    }
    Ok(())
}

fn moments_command(args: &Common) -> Result<()> {
    let cfg = load(&args.config, &args.overrides, Some(Mode::Moments))?;
    let rep = moments_report(&cfg)?;
    with_output(args.overrides.out.as_deref(), |w| match args.format {
        Format::Csv => moments_csv(&rep, w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &rep).map_err(|e| Error::Parse(e.to_string()))?;
            writeln!(w).map_err(|e| Error::Io {
                path: "<stream>".into(),
                source: e,
            })
        }
    })?;
    if rep.consistent {
        Ok(())
    } else {
        Err(Error::NumericInconsistency(
            "Monte Carlo moments differ from quadrature by more than 5 standard errors".into(),
        ))
    }
}

fn plot_command(args: &PlotArgs) -> Result<()> {
    let rows = match (&args.config, &args.input) {
        (Some(path), _) => run_sweep(&load(path, &args.overrides, None)?)?,
        (None, Some(path)) => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => read_json(path)?,
            _ => read_csv(path)?,
        },
        (None, None) => unreachable!("clap requires one of --config and --input"),
    };
    let ys: Vec<&str> = args.y.iter().map(String::as_str).collect();
    with_output(args.overrides.out.as_deref(), |w| {
        emit_plot_data(&rows, &args.x, &ys, w)
    })
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Bounds(a) => rows_command(a, Mode::Bounds),
        Command::Simulate(a) => rows_command(a, Mode::Simulate),
        Command::Sweep(a) => rows_command(a, Mode::Sweep),
        Command::Moments(a) => moments_command(a),
        Command::PlotData(a) => plot_command(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ehfbl: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
