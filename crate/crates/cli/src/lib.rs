//! Command-line front end for correlated G_A^0 clutter simulation.
//!
//! Exit codes: 0 success, 2 infeasible model or degenerate data, 3 invalid
//! correlation structure, 64 usage, 66 unreadable or malformed input file,
//! 70 unexpected internal or output failure.

pub mod raster;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use clutter_core::corr_map::{self, CorrMapKey};
use clutter_core::corr_models::{pearson_estimate, to_r1_rho};
use clutter_core::field_gen::{extend_rho, simulate};
use clutter_core::ga0::{fit_moments, normalizing_scale};
use clutter_core::{CorrelationGrid, Error, GA0Params, MatrixCorr, ParametricCorr, SimulationConfig};

use raster::Bounds;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INVALID_STRUCTURE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 70;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 66;

#[derive(Debug, Parser)]
#[command(name = "clutter", version, about = "Correlated G_A^0 clutter simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a correlated clutter field.
    Simulate(SimulateArgs),
    /// Gaussian correlation that yields a given clutter correlation.
    Corrmap(CorrmapArgs),
    /// Tabulate the Gaussian correlation over grids of rho, alpha and looks.
    Table(TableArgs),
    /// Block Pearson correlation estimate of an image, optionally with a moments fit.
    Estimate(EstimateArgs),
    /// Tabulate the G_A^0 density.
    Density(DensityArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm16,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct MapArgs {
    /// Gauss-Hermite points per axis.
    #[arg(long, default_value_t = corr_map::DEFAULT_QUADRATURE_ORDER)]
    quad_order: usize,
    /// Points in the tabulated correlation map.
    #[arg(long, default_value_t = corr_map::DEFAULT_LOOKUP_SIZE)]
    lookup_size: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    looks: u32,
    /// Side N of the square field (even).
    #[arg(long)]
    size: usize,
    /// `param:a=..,L=..[,eps=..]` or `matrix:PATH`.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the Gaussian correlation grid (CSV).
    #[arg(long)]
    emit_tau: Option<PathBuf>,
    /// Also write the spectral mask (CSV).
    #[arg(long)]
    emit_psi: Option<PathBuf>,
    #[command(flatten)]
    map: MapArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CorrmapArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    looks: u32,
    #[arg(long)]
    rho: f64,
    #[command(flatten)]
    map: MapArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct TableArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![-1.5, -3.0, -9.0])]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 3, 6, 10])]
    looks: Vec<u32>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_rhos())]
    rhos: Vec<f64>,
    #[command(flatten)]
    map: MapArgs,
}

fn default_rhos() -> Vec<f64> {
    (-9..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Amplitude raster (CSV).
    #[arg(long)]
    input: PathBuf,
    /// Side n_v of the lag window.
    #[arg(long)]
    window: usize,
    /// Where to write the estimated correlation matrix.
    #[arg(long)]
    out: PathBuf,
    /// Also fit (alpha, gamma) by the method of moments.
    #[arg(long)]
    fit_moments: bool,
    #[arg(long, default_value_t = 1)]
    looks: u32,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct DensityArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    looks: u32,
    /// Use the scale that gives unit mean.
    #[arg(long, conflicts_with = "gamma")]
    normalized: bool,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    zmax: f64,
    #[arg(long, default_value_t = 501)]
    points: usize,
    /// Emit the natural log of the density.
    #[arg(long)]
    log: bool,
}

/// A failed command: exit code plus message.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn input(path: &Path, message: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_INPUT, message: format!("{}: {message}", path.display()) }
    }

    fn output(path: &Path, err: std::io::Error) -> Self {
        Failure { code: EXIT_INTERNAL, message: format!("cannot write {}: {err}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err.root() {
            Error::Infeasible { .. }
            | Error::InfeasibleLags { .. }
            | Error::DegenerateVariance { .. }
            | Error::NoMomentSolution { .. }
            | Error::InfiniteMoment { .. } => EXIT_INFEASIBLE,
            Error::InvalidCorrelation { .. } => EXIT_INVALID_STRUCTURE,
            Error::Domain(_) => EXIT_USAGE,
            Error::Parse { .. } => EXIT_INPUT,
            _ => EXIT_INTERNAL,
        };
        Failure { code, message: err.to_string() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, err),
        Command::Corrmap(a) => cmd_corrmap(a, out, err),
        Command::Table(a) => cmd_table(a, out, err),
        Command::Estimate(a) => cmd_estimate(a, out, err),
        Command::Density(a) => cmd_density(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn map_key(alpha: f64, looks: u32) -> std::result::Result<CorrMapKey, Failure> {
    CorrMapKey::new(alpha, looks).map_err(Failure::from)
}

/// Target structure named by a `--model` flag.
fn load_model(model: &str, size: usize) -> std::result::Result<(CorrelationGrid, String), Failure> {
    if let Some(params) = model.strip_prefix("param:") {
        let (mut a, mut length, mut eps) = (None, None, ParametricCorr::DEFAULT_EPS);
        for item in params.split(',').filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("model parameter '{item}' is not name=value")))?;
            let bad = || Failure::usage(format!("model parameter {name} has bad value '{value}'"));
            match name.trim() {
                "a" => a = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
                "L" => length = Some(value.trim().parse::<u32>().map_err(|_| bad())?),
                "eps" => eps = value.trim().parse::<f64>().map_err(|_| bad())?,
                other => return Err(Failure::usage(format!("unknown model parameter '{other}'"))),
            }
        }
        let a = a.ok_or_else(|| Failure::usage("parametric model needs a=.."))?;
        let length = length.ok_or_else(|| Failure::usage("parametric model needs L=.."))?;
        let model = ParametricCorr::new(a, length, eps)?;
        let grid = model.correlation_grid(size)?;
        Ok((grid, format!("param:a={a},L={length},eps={eps}")))
    } else if let Some(path) = model.strip_prefix("matrix:") {
        let path = Path::new(path);
        let text = fs::read_to_string(path).map_err(|e| Failure::input(path, e))?;
        let matrix = MatrixCorr::parse(&text).map_err(|e| Failure::input(path, e))?;
        let grid = extend_rho(&to_r1_rho(&matrix, size)?, size)?;
        Ok((grid, format!("matrix:{}", path.display())))
    } else {
        Err(Failure::usage(format!("--model must start with 'param:' or 'matrix:', got '{model}'")))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| Failure::output(path, e))
}

fn cmd_simulate(a: SimulateArgs, err: &mut dyn Write) -> CmdResult {
    let params = GA0Params::new(a.alpha, a.gamma, a.looks)?;
    params.require_simulation_valid()?;
    if a.size < 4 || a.size % 2 != 0 {
        return Err(Failure::usage(format!("--size must be even and >= 4, got {}", a.size)));
    }
    let (corr, model) = load_model(&a.model, a.size)?;
    let _ = writeln!(
        err,
        "simulate: alpha={} gamma={} looks={} size={} model={} seed={} format={:?} quad_order={} lookup_size={} out={}",
        a.alpha,
        a.gamma,
        a.looks,
        a.size,
        model,
        a.seed,
        a.format,
        a.map.quad_order,
        a.map.lookup_size,
        a.out.display()
    );
    let mut config = SimulationConfig::new(params, corr, a.seed);
    config.quadrature_order = a.map.quad_order;
    config.lookup_size = a.map.lookup_size;
    let sim = simulate(&config)?;
    if sim.clutter.clamped > 0 {
        let _ = writeln!(err, "warning: {} pixel(s) had their tail probability floored", sim.clutter.clamped);
    }
    if sim.mask.clamped > 0 {
        let _ = writeln!(err, "warning: {} slightly negative spectrum value(s) set to zero", sim.mask.clamped);
    }

    let n = a.size;
    let values = &sim.clutter.field.values;
    match a.format {
        Format::Csv => write_file(&a.out, raster::to_csv(values, n).as_bytes())?,
        Format::Pgm16 => {
            let bounds = Bounds::of(values);
            write_file(&a.out, &raster::to_pgm16(values, n, n, bounds))?;
            let mut sidecar = a.out.clone().into_os_string();
            sidecar.push(".bounds");
            write_file(Path::new(&sidecar), bounds.sidecar().as_bytes())?;
        }
    }
    if let Some(path) = &a.emit_tau {
        write_file(path, raster::to_csv(&sim.tau.tau, n).as_bytes())?;
    }
    if let Some(path) = &a.emit_psi {
        write_file(path, raster::to_csv(&sim.mask.psi, n).as_bytes())?;
    }
    Ok(())
}

fn cmd_corrmap(a: CorrmapArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let key = map_key(a.alpha, a.looks)?;
    if !(a.rho.abs() <= 1.0) {
        return Err(Failure::usage(format!("--rho must lie in [-1, 1], got {}", a.rho)));
    }
    let _ = writeln!(
        err,
        "corrmap: alpha={} looks={} rho={} quad_order={} lookup_size={}",
        a.alpha, a.looks, a.rho, a.map.quad_order, a.map.lookup_size
    );
    let lookup = corr_map::lookup(key, a.map.lookup_size, a.map.quad_order)?;
    let tau = lookup.tau_of_rho(a.rho)?;
    let _ = writeln!(out, "{tau:.6}");
    Ok(())
}

fn cmd_table(a: TableArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let keys = a
        .alphas
        .iter()
        .flat_map(|&alpha| a.looks.iter().map(move |&n| (alpha, n)))
        .map(|(alpha, n)| map_key(alpha, n))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let _ = writeln!(
        err,
        "table: alphas={:?} looks={:?} rhos={:?} quad_order={} lookup_size={}",
        a.alphas, a.looks, a.rhos, a.map.quad_order, a.map.lookup_size
    );
    let lookups = keys
        .iter()
        .map(|&k| corr_map::lookup(k, a.map.lookup_size, a.map.quad_order))
        .collect::<clutter_core::Result<Vec<_>>>()?;

    let mut text = String::from("rho");
    for k in &keys {
        text.push_str(&format!(",alpha={} n={}", k.alpha, k.looks));
    }
    text.push('\n');
    for &rho in &a.rhos {
        text.push_str(&format!("{rho}"));
        for lk in &lookups {
            text.push(',');
            match lk.tau_of_rho(rho) {
                Ok(tau) => text.push_str(&format!("{tau:.6}")),
                Err(Error::Infeasible { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_INTERNAL, message: e.to_string() })
}

fn cmd_estimate(a: EstimateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let text = fs::read_to_string(&a.input).map_err(|e| Failure::input(&a.input, e))?;
    let (rows, cols, values) = raster::parse_csv(&text).map_err(|e| Failure::input(&a.input, e))?;
    let _ = writeln!(
        err,
        "estimate: input={} ({rows}x{cols}) window={} out={} fit_moments={} looks={}",
        a.input.display(),
        a.window,
        a.out.display(),
        a.fit_moments,
        a.looks
    );
    let est = pearson_estimate(&values, rows, cols, a.window)?;
    let _ = writeln!(err, "blocks: n_c={} n_f={}", est.n_c, est.n_f);
    let matrix = est.to_matrix()?;
    write_file(&a.out, matrix.to_csv().as_bytes())?;
    if a.fit_moments {
        let fitted = fit_moments(&values, a.looks)?;
        let _ = writeln!(out, "alpha={:.6} gamma={:.6} looks={}", fitted.alpha, fitted.gamma, fitted.looks);
    }
    Ok(())
}

fn cmd_density(a: DensityArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let gamma = match (a.normalized, a.gamma) {
        (true, _) => normalizing_scale(a.alpha, a.looks)?,
        (false, Some(g)) => g,
        (false, None) => return Err(Failure::usage("density needs --gamma or --normalized")),
    };
    let params = GA0Params::new(a.alpha, gamma, a.looks)?;
    if a.points < 2 || !(a.zmax > 0.0) {
        return Err(Failure::usage("density needs --points >= 2 and --zmax > 0"));
    }
    let _ = writeln!(
        err,
        "density: alpha={} looks={} gamma={} zmax={} points={} log={}",
        a.alpha, a.looks, gamma, a.zmax, a.points, a.log
    );
    let mut text = String::from(if a.log { "z,ln_pdf\n" } else { "z,pdf\n" });
    for i in 0..a.points {
        let z = a.zmax * i as f64 / (a.points - 1) as f64;
        let v = if a.log { params.ln_pdf(z)? } else { params.pdf(z)? };
        text.push_str(&format!("{z:.16e},{v:.16e}\n"));
    }
    out.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_INTERNAL, message: e.to_string() })
}
