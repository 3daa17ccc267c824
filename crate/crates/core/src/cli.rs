//! The `fourmode` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! physics-level failures (an unstable operating point or a mean-field solve
//! that does not converge).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{matrix_csv, Bipartition};
use crate::error::{Error, Result};
use crate::figures::{preset, FigureId, PRESETS};
use crate::meanfield::scan_roots;
use crate::params::ParamConfig;
use crate::pipeline::{evaluate, resolve};
use crate::plot::{emit_plot, PlotKind};
use crate::sweep::{emit_csv, run_sweep, Axis, PointStatus, SweepResult, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PHYSICS: i32 = 2;

/// Environment variable holding the sweep worker count.
pub const WORKERS_ENV: &str = "FOURMODE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "fourmode", version, about = "Steady-state entanglement in a cavity / mirror / atomic-ensemble / LC-circuit system")]
pub struct Cli {
    /// More detail in the report (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a single operating point.
    Point(PointArgs),
    /// Sweep one or two parameters and write CSV + SVG.
    Sweep(SweepArgs),
    /// Sweep two parameters and map the stability margin only.
    StabilityMap(StabilityArgs),
    /// Run a bundled figure recipe.
    ReproduceFigure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct ParamSource {
    /// JSON parameter file; its `mode` key selects EFFECTIVE or PHYSICAL.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    pub params: Option<PathBuf>,
    /// Bundled parameter set: table1 or figure-base.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Comma-separated pairs such as MO-AE,AE-LC (default: all six).
    #[arg(long)]
    pub bipartitions: Option<String>,
    /// Write `<out>_drift.csv` and `<out>_diffusion.csv`.
    #[arg(long)]
    pub dump_matrices: bool,
    /// Write `<out>_covariance.csv`.
    #[arg(long)]
    pub dump_covariance: bool,
    /// Prefix for dumped matrices.
    #[arg(long, value_name = "PREFIX", default_value = "fourmode")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep spec file. Axis and bipartition flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub source: ParamSource,
    /// `name:start:stop:count`; frequencies in units of omega_m.
    #[arg(long)]
    pub axis1: Option<String>,
    #[arg(long)]
    pub axis2: Option<String>,
    /// Comma-separated pairs (default: MO-AE,AE-LC,MO-LC).
    #[arg(long)]
    pub bipartitions: Option<String>,
    /// Output prefix: writes `<out>.csv` and `<out>.svg`.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub source: ParamSource,
    #[arg(long)]
    pub axis1: String,
    #[arg(long)]
    pub axis2: String,
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig2a, fig2b, fig3, fig4a, fig4b or fig5.
    pub figure: String,
    /// Writes `<out>_<figure>.csv` and `<out>_<figure>.svg`.
    #[arg(long, value_name = "PREFIX", default_value = "fourmode")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. The report goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    if let Err(e) = configure_workers() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_physical() {
                EXIT_PHYSICS
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::param(WORKERS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    // a second call in the same process (tests) finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Point(args) => cmd_point(args, cli.verbose, out),
        Command::Sweep(args) => cmd_sweep(args, cli.verbose, out),
        Command::StabilityMap(args) => cmd_stability_map(args, cli.verbose, out),
        Command::ReproduceFigure(args) => cmd_reproduce_figure(args, cli.verbose, out),
    }
}

fn load_params(source: &ParamSource) -> Result<ParamConfig> {
    let config = match (&source.params, &source.preset) {
        (Some(path), _) => ParamConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => {
            return Err(Error::param(
                "params",
                format!("give --params FILE or --preset ({})", PRESETS.join(", ")),
            ))
        }
    };
    config.validate()?;
    Ok(config)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_point(args: &PointArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    let config = load_params(&args.source)?;
    let pairs = match &args.bipartitions {
        Some(s) => Bipartition::parse_list(s)?,
        None => Bipartition::all_pairs(),
    };
    let point = resolve(&config)?;
    let p = &point.effective;
    let w = p.omega_m;
    let mut r = String::new();
    let mode = match config {
        ParamConfig::Effective(_) => "EFFECTIVE",
        ParamConfig::Physical(_) => "PHYSICAL",
    };
    let _ = writeln!(r, "mode: {mode}");

    if let (Some((ss, report)), ParamConfig::Physical(phys)) = (&point.mean_field, &config) {
        let _ = writeln!(r, "mean field:");
        let _ = writeln!(r, "  a_s = {:.6e} {:+.6e}i  (|a_s| = {:.6e})", ss.a_s.re, ss.a_s.im, ss.a_s.norm());
        let _ = writeln!(r, "  c_s = {:.6e} {:+.6e}i", ss.c_s.re, ss.c_s.im);
        let _ = writeln!(r, "  x_s = {:.6e}", ss.x_s);
        let _ = writeln!(r, "  q_s = {:.6e}", ss.q_s);
        if verbose > 0 {
            let _ = writeln!(r, "  iterations = {}, residual = {:.3e}", report.iterations, report.residual);
            let hi = 4.0 * ss.x_s.abs().max(1.0);
            match scan_roots(phys, -hi, hi, 400) {
                Ok(roots) if roots.len() > 1 => {
                    let list: Vec<String> = roots.iter().map(|x| format!("{x:.6e}")).collect();
                    let _ = writeln!(r, "  bistable: {} roots in [{:.3e}, {:.3e}]: {}", roots.len(), -hi, hi, list.join(", "));
                }
                Ok(_) => {}
                Err(e) => {
                    let _ = writeln!(r, "  root scan failed: {e}");
                }
            }
        }
    }

    let _ = writeln!(r, "effective parameters (units of omega_m = {w:.6e} rad/s):");
    let _ = writeln!(
        r,
        "  Delta'_cav = {:.6}  omega'_LC = {:.6}  Delta_at = {:.6}",
        p.delta_cav_eff / w,
        p.omega_lc_eff / w,
        p.delta_at / w
    );
    let _ = writeln!(
        r,
        "  G'_om = {:.6}  G'_LC = {:.6}  G_at' = {:.6}",
        p.g_om_eff / w,
        p.g_lc_eff / w,
        p.g_at_eff / w
    );
    let _ = writeln!(r, "  nbar_m = {:.6}  nbar_LC = {:.6}", p.nbar_m, p.nbar_lc);

    let ev = evaluate(&point, &pairs)?;
    let margin = ev.stability.max_real_eigenvalue / w;
    let verdict = if ev.stability.stable {
        "stable"
    } else if ev.stability.is_marginal(w) {
        "marginal"
    } else {
        "unstable"
    };
    let _ = writeln!(r, "stability: max Re(lambda) / omega_m = {margin:.6e} ({verdict})");
    if verbose > 0 {
        for z in ev.stability.eigenvalues.iter() {
            let _ = writeln!(r, "  lambda / omega_m = {:+.6e} {:+.6e}i", z.re / w, z.im / w);
        }
    }

    if args.dump_matrices {
        write_file(&with_suffix(&args.out, "_drift.csv"), &matrix_csv(&ev.drift))?;
        write_file(&with_suffix(&args.out, "_diffusion.csv"), &matrix_csv(&ev.diffusion))?;
    }

    let Some(v) = &ev.covariance else {
        let _ = writeln!(r, "no steady state: the drift matrix is not Hurwitz");
        emit(out, &r)?;
        return Ok(EXIT_PHYSICS);
    };
    if args.dump_covariance {
        write_file(&with_suffix(&args.out, "_covariance.csv"), &matrix_csv(v.matrix()))?;
    }
    if verbose > 0 {
        let _ = writeln!(r, "covariance: uncertainty margin = {:.3e}", v.uncertainty_margin());
    }
    let _ = writeln!(r, "{:<8} {:>14} {:>14}", "pair", "E_N", "eta_minus");
    for e in &ev.entanglement {
        let _ = writeln!(
            r,
            "{:<8} {:>14.6e} {:>14.6e}",
            e.bipartition.to_string(),
            e.log_negativity,
            e.eta_minus
        );
    }
    emit(out, &r)?;
    Ok(EXIT_OK)
}

fn parse_axis(s: &str) -> Result<Axis> {
    s.parse()
}

pub fn cmd_sweep(args: &SweepArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    let mut spec = match &args.spec {
        Some(path) => SweepSpec::load(path)?,
        None => {
            let base = load_params(&args.source)?;
            let axis1 = args
                .axis1
                .as_deref()
                .ok_or_else(|| Error::param("axis1", "required without --spec"))?;
            SweepSpec {
                base,
                axis1: parse_axis(axis1)?,
                axis2: None,
                bipartitions: Bipartition::macroscopic().to_vec(),
                record_stability: true,
            }
        }
    };
    if args.spec.is_some() && (args.source.params.is_some() || args.source.preset.is_some()) {
        spec.base = load_params(&args.source)?;
    }
    if let (Some(_), Some(a1)) = (&args.spec, &args.axis1) {
        spec.axis1 = parse_axis(a1)?;
    }
    if let Some(a2) = &args.axis2 {
        spec.axis2 = Some(parse_axis(a2)?);
    }
    if let Some(b) = &args.bipartitions {
        spec.bipartitions = Bipartition::parse_list(b)?;
    }
    let result = run_sweep(&spec)?;
    let kind = if result.dims() == 2 {
        PlotKind::Contour
    } else {
        PlotKind::Lines
    };
    write_outputs(&result, kind, &args.out, "", verbose, out)
}

pub fn cmd_stability_map(args: &StabilityArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    let spec = SweepSpec {
        base: load_params(&args.source)?,
        axis1: parse_axis(&args.axis1)?,
        axis2: Some(parse_axis(&args.axis2)?),
        bipartitions: Vec::new(),
        record_stability: true,
    };
    let result = run_sweep(&spec)?;
    write_outputs(&result, PlotKind::Contour, &args.out, "", verbose, out)
}

pub fn cmd_reproduce_figure(args: &FigureArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    let id: FigureId = args.figure.parse()?;
    let spec = id.spec()?;
    let result = run_sweep(&spec)?;
    let suffix = format!("_{id}");
    write_outputs(&result, id.plot_kind(), &args.out, &suffix, verbose, out)
}

fn write_outputs(
    result: &SweepResult,
    kind: PlotKind,
    prefix: &Path,
    suffix: &str,
    verbose: u8,
    out: &mut dyn Write,
) -> Result<i32> {
    let csv = with_suffix(prefix, &format!("{suffix}.csv"));
    let svg = with_suffix(prefix, &format!("{suffix}.svg"));
    emit_csv(result, &csv)?;
    emit_plot(result, kind, &svg)?;
    emit(out, &sweep_summary(result, verbose))?;
    let _ = writeln!(out, "wrote {}", csv.display());
    let _ = writeln!(out, "wrote {}", svg.display());
    Ok(EXIT_OK)
}

fn sweep_summary(result: &SweepResult, verbose: u8) -> String {
    let count = |s: PointStatus| result.points.iter().filter(|p| p.status == s).count();
    let mut r = String::new();
    let _ = writeln!(
        r,
        "{} points: {} ok, {} unstable, {} solver-failed",
        result.points.len(),
        count(PointStatus::Ok),
        count(PointStatus::Unstable),
        count(PointStatus::SolverFailed)
    );
    for &b in &result.bipartitions {
        match result.max_log_negativity(b) {
            Some((v, p)) => {
                let at = match p.axis2 {
                    Some(y) => format!("({}, {})", p.axis1, y),
                    None => format!("{}", p.axis1),
                };
                let _ = writeln!(r, "max E_N {b}: {v:.6} at {at}");
            }
            None => {
                let _ = writeln!(r, "max E_N {b}: none (no stable points)");
            }
        }
    }
    if verbose > 0 {
        for p in result.points.iter().filter(|p| p.status == PointStatus::SolverFailed) {
            let _ = writeln!(
                r,
                "  failed at {} {:?}: {}",
                p.axis1,
                p.axis2,
                p.message.as_deref().unwrap_or("")
            );
        }
    }
    r
}
