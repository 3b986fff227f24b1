//! Command-line front end for the `netmimo` binary.

use crate::channel_model::QualityPair;
use crate::converse_oracle::{probe_average, GridSpec};
use crate::dof_analysis::{dof_region, estimate_dof_slope, RateCurve, RatePoint};
use crate::error::{Error, Result};
use crate::harness::{
    reproduce_fig2, run_experiment, run_experiment_with_threads, seed_from_env, CsitMode, ResultTable, SimConfig,
    DEFAULT_SEED,
};
use crate::schemes::Scheme;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "netmimo",
    version,
    about = "Two-cell Network MIMO simulator with delayed, heterogeneous CSIT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo sum-rate curve of one scheme, written as CSV.
    Simulate(SimulateArgs),
    /// Optimal DoF region as JSON half-spaces and vertices.
    Region(RegionArgs),
    /// Fitted high-SNR slopes of every scheme in a result CSV.
    Slopes(SlopesArgs),
    /// Numerical probe of the outer-bound inequality.
    Converse(ConverseArgs),
    /// Sum-rate curves of the five reference schemes (CSV and gnuplot files).
    #[command(name = "reproduce-fig2")]
    ReproduceFig2(Fig2Args),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON configuration file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    snr_db_start: Option<f64>,
    #[arg(long)]
    snr_db_stop: Option<f64>,
    #[arg(long)]
    snr_db_step: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<CsitMode>,
    #[arg(long)]
    tau_fb: Option<f64>,
    #[arg(long)]
    tau_bh: Option<f64>,
    #[arg(long)]
    f_d: Option<f64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[arg(long)]
    alpha1: f64,
    #[arg(long)]
    alpha2: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SlopesArgs {
    /// Result CSV produced by `simulate` or `reproduce-fig2`.
    #[arg(long)]
    input: PathBuf,
    /// Number of highest-SNR points in the fit.
    #[arg(long, default_value_t = 3)]
    window: usize,
}

#[derive(Args, Debug)]
struct ConverseArgs {
    #[arg(long)]
    alpha1: f64,
    #[arg(long)]
    alpha2: f64,
    /// Comma-separated SNR values in dB.
    #[arg(long, value_delimiter = ',', default_values_t = vec![20.0, 30.0, 40.0, 50.0])]
    snr_db: Vec<f64>,
    /// Points per grid axis.
    #[arg(long, default_value_t = 12)]
    grid: usize,
    #[arg(long, default_value_t = 1)]
    refine: usize,
    #[arg(long, default_value_t = 2000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 50)]
    draws: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct Fig2Args {
    /// Directory receiving fig2.csv, fig2.dat and fig2.gp.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_mode(s: &str) -> std::result::Result<CsitMode, String> {
    match s {
        "exponent" => Ok(CsitMode::Exponent),
        "physical" => Ok(CsitMode::Physical),
        _ => Err(format!("unknown mode {s:?} (expected exponent or physical)")),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter { .. } | Error::UnknownScheme(_) | Error::Json(_) | Error::Table(_) => {
                    EXIT_CONFIG
                }
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Region(a) => {
            let qual = QualityPair::new(a.alpha1, a.alpha2)?;
            let mut json = dof_region(&qual).to_json();
            json.push('\n');
            emit(a.out.as_ref(), &json)
        }
        Command::Slopes(a) => {
            let text = read_input(&a.input)?;
            let table = ResultTable::from_csv(&text)?;
            let mut out = String::from("scheme,slope\n");
            for (scheme, slope) in table.slopes(a.window)? {
                out.push_str(&format!("{scheme},{slope}\n"));
            }
            emit(None, &out)
        }
        Command::Converse(a) => converse(a),
        Command::ReproduceFig2(a) => {
            let seed = resolve_seed(a.seed, None)?;
            let fig = reproduce_fig2(seed, a.trials, a.threads)?;
            std::fs::create_dir_all(&a.out_dir)?;
            std::fs::write(a.out_dir.join("fig2.csv"), fig.table.to_csv())?;
            std::fs::write(a.out_dir.join("fig2.dat"), &fig.plot_data)?;
            std::fs::write(a.out_dir.join("fig2.gp"), fig.gnuplot_script("fig2.dat"))?;
            eprintln!("wrote fig2.csv, fig2.dat, fig2.gp to {}", a.out_dir.display());
            Ok(())
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid("input", format!("{}: {e}", path.display())))
}

/// Flag beats `NETMIMO_SEED`, which beats the configuration value.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    Ok(seed_from_env()?.or(config).unwrap_or(DEFAULT_SEED))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
            SimConfig::from_json(&text)?
        }
        None => {
            let scheme = a
                .scheme
                .ok_or_else(|| Error::invalid("scheme", "required without --config"))?;
            let mut cfg = SimConfig::new(scheme, 1.0, 0.5, (0.0, 60.0, 5.0), 1000, DEFAULT_SEED);
            let env = seed_from_env()?;
            cfg.seed = env.unwrap_or(DEFAULT_SEED);
            cfg
        }
    };
    if a.config.is_some() {
        cfg.seed = resolve_seed(None, Some(cfg.seed))?;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = a.$field { cfg.$field = v; } )* };
    }
    set!(
        scheme,
        alpha1,
        alpha2,
        snr_db_start,
        snr_db_stop,
        snr_db_step,
        trials,
        seed,
        mode
    );
    if a.tau_fb.is_some() {
        cfg.tau_fb = a.tau_fb;
    }
    if a.tau_bh.is_some() {
        cfg.tau_bh = a.tau_bh;
    }
    if a.f_d.is_some() {
        cfg.f_d = a.f_d;
    }
    if let Some(out) = &a.out {
        cfg.out_path = Some(out.display().to_string());
    }
    cfg.validate()?;
    let table = match a.threads {
        Some(n) => run_experiment_with_threads(&cfg, n)?,
        None => run_experiment(&cfg)?,
    };
    for r in &table.rows {
        if let Some(rate) = r.rejection_rate {
            if rate > 0.01 {
                eprintln!(
                    "warning: {} at {} dB rejected {:.2}% of draws",
                    r.scheme,
                    r.snr_db,
                    100.0 * rate
                );
            }
        }
    }
    let out = cfg.out_path.as_ref().map(PathBuf::from);
    emit(out.as_ref(), &table.to_csv())
}

fn converse(a: ConverseArgs) -> Result<()> {
    let qual = QualityPair::new(a.alpha1, a.alpha2)?;
    let seed = resolve_seed(a.seed, None)?;
    let grid = GridSpec::uniform(a.grid).with_refinement(a.refine);
    let mut pts = Vec::with_capacity(a.snr_db.len());
    let mut values = Vec::with_capacity(a.snr_db.len());
    for &db in &a.snr_db {
        let p = crate::harness::db_to_linear(db);
        let (mean, stderr) = probe_average(&qual, p, &grid, a.mc_samples, a.draws, seed)?;
        values.push(serde_json::json!({"snr_db": db, "mean_bits": mean, "stderr": stderr}));
        pts.push(RatePoint {
            p,
            mean_sum_rate: mean,
            stderr,
        });
    }
    let slope = estimate_dof_slope(&RateCurve::new(pts)?, a.snr_db.len())?;
    let doc = serde_json::json!({
        "alpha_max": qual.max(),
        "slope": slope,
        "bound": qual.max() + 0.15,
        "within_bound": slope <= qual.max() + 0.15,
        "points": values,
    });
    emit(None, &format!("{doc}\n"))
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
