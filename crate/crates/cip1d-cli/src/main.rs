use anyhow::{bail, Context, Result};
use cip1d::agcm::{run_agcm, AgcmData};
use cip1d::forward::{laplace_transform, solve_boundary, solve_cauchy, BoundarySimulation, CauchySimulation};
use cip1d::glk::{fbar, run_glk};
use cip1d::harness::plot::{emit_plot, PlotSeries};
use cip1d::harness::{
    calibrate_glk, compare, reference_intervals, sweep_cf, write_sweep, Experiment, Method, Scenario,
};
use cip1d::io::{load_profile_with, load_spectral, load_time_series, save_profile, save_series, write_json};
use cip1d::preprocess::{add_noise, calibrate, glk_normalize, select_peak, TargetPlacement};
use cip1d::Config;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cip1d", version, about = "1-D dielectric profile inversion from backscattering data")]
struct Cli {
    /// JSON configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving outputs; relative output paths resolve against it.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cauchy,
    Boundary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Placement {
    Air,
    Buried,
}

impl From<Placement> for TargetPlacement {
    fn from(p: Placement) -> Self {
        match p {
            Placement::Air => TargetPlacement::Air,
            Placement::Buried => TargetPlacement::Buried,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AgcmKind {
    /// Full trace `u(0,t)` including the direct wave.
    Total,
    /// Calibrated scattered signal, e.g. from `preprocess`.
    Scattered,
    /// `ḡ(s)` on the configured s-grid.
    Laplace,
}

#[derive(Clone, Copy, ValueEnum)]
enum GlkKind {
    /// Trace `f(t)` of the boundary-source problem.
    Total,
    /// Scattered signal `F`; inverted as `f = −1 + CF·F`.
    Scattered,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Agcm,
    Glk,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Agcm => Method::Agcm,
            MethodArg::Glk => Method::Glk,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulates the trace `u(0,t)` for a profile.
    Simulate {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value = "cauchy")]
        mode: Mode,
        #[arg(long = "T")]
        t_end: f64,
        /// Multiplicative noise level; defaults to the configured one.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
    },
    /// Laplace transform of a trace on a uniform s-grid.
    Laplace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        smin: Option<f64>,
        #[arg(long)]
        smax: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "T")]
        t_max: Option<f64>,
        #[arg(long, default_value = "laplace.csv")]
        out: PathBuf,
    },
    /// Noise, peak selection and calibration of a raw trace.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        placement: Placement,
        #[arg(long)]
        cf: Option<f64>,
        #[arg(long, default_value = "pre.csv")]
        out: PathBuf,
        #[arg(long, default_value = "sel.json")]
        report: PathBuf,
    },
    /// Layer-stripping inversion.
    InvertAgcm {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "scattered")]
        kind: AgcmKind,
        #[arg(long, default_value = "eps_agcm.csv")]
        out: PathBuf,
        #[arg(long, default_value = "agcm.json")]
        report: PathBuf,
    },
    /// Integral-equation inversion.
    InvertGlk {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "scattered")]
        kind: GlkKind,
        /// Factor applied to scattered data.
        #[arg(long, default_value_t = 1.0)]
        cf: f64,
        #[arg(long, default_value = "eps_glk.csv")]
        out: PathBuf,
        #[arg(long, default_value = "glk.json")]
        report: PathBuf,
    },
    /// Finds CF with `R̄_GLK(CF·F) = target`.
    CalibrateGlk {
        #[arg(long)]
        data: PathBuf,
        /// Reference contrast, typically `R̄_AGCM` of the calibration target.
        #[arg(long)]
        target: f64,
        /// Reference factor; the bracket is `[cf/100, 100·cf]` unless given.
        #[arg(long, default_value_t = 1.0)]
        cf: f64,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value = "calibration.json")]
        report: PathBuf,
    },
    /// Contrast as a function of the calibration factor.
    SweepCf {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Comma-separated factors (at least 8).
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<f64>,
        #[arg(long, default_value = "sweep")]
        name: String,
    },
    /// Runs both methods on a profile or on measured data and tabulates R̄.
    ///
    /// Exits with status 3 when a result is flagged or a method fails.
    Compare {
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        profile: Option<PathBuf>,
        #[arg(long, requires = "placement")]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        placement: Option<Placement>,
        #[arg(long, default_value_t = 1.0)]
        agcm_cf: f64,
        #[arg(long, default_value_t = 1.0)]
        glk_cf: f64,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        background: f64,
        /// Admissible interval `lo,hi` for R̄.
        #[arg(long, value_delimiter = ',', conflicts_with = "material")]
        reference: Option<Vec<f64>>,
        /// Material whose shipped interval is used for flagging.
        #[arg(long)]
        material: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "agcm,glk")]
        methods: Vec<String>,
        #[arg(long, default_value = "comparison")]
        name: String,
        /// Record wall-clock runtimes in the report.
        #[arg(long)]
        timing: bool,
    },
}

fn resolve(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    cfg.validate()?;
    let dir = cli.out_dir.as_path();
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let out = |p: &Path| resolve(dir, p);

    match cli.command {
        Command::Simulate { profile, mode, t_end, noise, out: o } => {
            let p = load_profile_with(&profile, cfg.bounds)?;
            let trace = match mode {
                Mode::Cauchy => {
                    let sim = CauchySimulation::new(&p, cfg.x0, t_end, cfg.forward.dx, cfg.forward.pad)?;
                    solve_cauchy(&sim)?.trace
                }
                Mode::Boundary => solve_boundary(&BoundarySimulation::new(&p, t_end, cfg.forward.dz)?)?,
            };
            let trace = add_noise(&trace, noise.unwrap_or(cfg.noise), cfg.seed)?;
            let path = out(&o);
            save_series(&trace, &path)?;
            if let Mode::Boundary = mode {
                let fb = fbar(&trace);
                let t: Vec<f64> = (0..fb.len()).map(|i| fb.t(i)).collect();
                emit_plot(&[PlotSeries::new("f̄", t, fb.samples)], "f̄(t)", "t", "f̄", &path.with_extension("svg"))?;
            }
        }
        Command::Laplace { input, smin, smax, h, t_max, out: o } => {
            let g = load_time_series(&input)?;
            let (a, b, h) = (smin.unwrap_or(cfg.s_min), smax.unwrap_or(cfg.s_max), h.unwrap_or(cfg.s_step));
            let n = ((b - a) / h).round() as usize;
            if n == 0 || ((b - a) - n as f64 * h).abs() > 1e-9 * h {
                bail!("s-interval [{a}, {b}] is not a multiple of h = {h}");
            }
            let gbar = laplace_transform(&g, a, b, n, t_max.unwrap_or(cfg.laplace_t))?;
            save_series(&gbar, &out(&o))?;
        }
        Command::Preprocess { input, placement, cf, out: o, report } => {
            let raw = load_time_series(&input)?;
            let noisy = add_noise(&raw, cfg.noise, cfg.seed)?;
            let (peak, sel) =
                select_peak(&noisy, placement.into(), cfg.preprocess.threshold, cfg.preprocess.onset_lead)?;
            let pre = calibrate(&peak, cf.unwrap_or(cfg.cf))?;
            save_series(&pre, &out(&o))?;
            write_json(&sel, &out(&report))?;
        }
        Command::InvertAgcm { data, kind, out: o, report } => {
            let input = match kind {
                AgcmKind::Total => AgcmData::Total(load_time_series(&data)?),
                AgcmKind::Scattered => AgcmData::Scattered(load_time_series(&data)?),
                AgcmKind::Laplace => AgcmData::Laplace(load_spectral(&data)?),
            };
            let r = run_agcm(&input, &cfg)?;
            save_profile(&r.profile, &out(&o))?;
            write_json(&r, &out(&report))?;
            println!("R̄ = {:.6} ({:?} after {} sweeps)", r.rbar, r.stop, r.sweeps);
        }
        Command::InvertGlk { data, kind, cf, out: o, report } => {
            let series = load_time_series(&data)?;
            let f = match kind {
                GlkKind::Total => series,
                GlkKind::Scattered => glk_normalize(&series, cf)?,
            };
            let r = run_glk(&f, &cfg)?;
            save_profile(&r.profile, &out(&o))?;
            write_json(&r, &out(&report))?;
            println!("R̄ = {:.6} ({} layers)", r.rbar, r.trace.len());
        }
        Command::CalibrateGlk { data, target, cf, lo, hi, report } => {
            let f = load_time_series(&data)?;
            let bracket = (lo.unwrap_or(cf / 100.0), hi.unwrap_or(cf * 100.0));
            let c = calibrate_glk(&f, target, bracket, &cfg)?;
            write_json(&c, &out(&report))?;
            println!("CF = {:e} (R̄_GLK = {:.6})", c.cf, c.rbar);
        }
        Command::SweepCf { data, method, factors, name } => {
            let series = load_time_series(&data)?;
            let table = sweep_cf(&series, method.into(), &factors, &cfg)?;
            write_sweep(&table, dir, &name)?;
            let failed = table.errors.iter().flatten().count();
            println!(
                "linear residual {:.4}, increasing {}, convex {}, failed points {failed}",
                table.linear_residual, table.increasing, table.convex
            );
        }
        Command::Compare {
            profile,
            data,
            placement,
            agcm_cf,
            glk_cf,
            noise,
            background,
            reference,
            material,
            methods,
            name,
            timing,
        } => {
            let scenario = match (profile, data) {
                (Some(p), _) => Scenario::Profile(load_profile_with(&p, cfg.bounds)?),
                (None, Some(d)) => Scenario::Measured {
                    raw: load_time_series(&d)?,
                    placement: placement.context("--placement is required with --data")?.into(),
                    agcm_cf,
                    glk_cf,
                },
                (None, None) => bail!("either --profile or --data is required"),
            };
            let reference = match (reference, material) {
                (Some(r), _) => match r[..] {
                    [lo, hi] if lo < hi => Some((lo, hi)),
                    _ => bail!("--reference expects lo,hi with lo < hi"),
                },
                (None, Some(m)) => {
                    let hit = reference_intervals().into_iter().find(|r| r.material == m);
                    Some(hit.map(|r| (r.lo, r.hi)).with_context(|| format!("no interval for material '{m}'"))?)
                }
                (None, None) => None,
            };
            let methods = methods.iter().map(|m| m.parse()).collect::<cip1d::Result<Vec<Method>>>()?;
            let exp = Experiment {
                name,
                scenario,
                noise: noise.unwrap_or(cfg.noise),
                methods,
                background,
                reference,
                out_dir: dir.to_path_buf(),
                record_timing: timing,
            };
            let report = compare(&exp, &cfg)?;
            let mut bad = false;
            for m in &report.methods {
                match (&m.rbar, &m.error) {
                    (Some(r), _) => println!(
                        "{:?}: R̄ = {r:.6}, ε(target) = {:.6}{}",
                        m.method,
                        m.eps_target.unwrap_or(f64::NAN),
                        if m.flagged { " [outside reference]" } else { "" }
                    ),
                    (None, Some(e)) => println!("{:?}: failed: {e}", m.method),
                    _ => {}
                }
                bad |= m.flagged || m.error.is_some();
            }
            if bad {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
