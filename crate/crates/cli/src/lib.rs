//! Command-line front end for `tandyn`.
//!
//! Every subcommand prints tab-separated records (see [`record`]). Exit codes:
//! 0 on success, 1 when a computation fails, 2 on usage errors.

pub mod config;
pub mod record;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{error::ErrorKind, CommandFactory, Parser, Subcommand};
use num_complex::Complex64;
use tandyn::dynamics::eval_f;
use tandyn::inverse::enumerate_prepoles;
use tandyn::parameter::{
    classify_parameter, find_virtual_center, period_two_center, trace_internal_ray, DEFAULT_BUDGET,
};
use tandyn::render::{render_dynamic_plane, render_parameter_plane, write_image};
use tandyn::{
    cycles::refine_cycle_newton, Classification, Error, Itinerary, Palette, Parameter,
    RenderOptions, Viewport,
};

use record::{Field, Record};

/// Environment variable holding the render thread count.
pub const THREADS_ENV: &str = "TANDYN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tandyn", version, about = "Dynamics of the tangent family λ tan z")]
struct Cli {
    /// key=value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    tandyn::parse_complex(s).map_err(|e| e.to_string())
}

fn parameter_arg(s: &str) -> Result<Parameter, String> {
    Parameter::new(complex_arg(s)?).map_err(|e| e.to_string())
}

fn itinerary_arg(s: &str) -> Result<Itinerary, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn palette_arg(s: &str) -> Result<Palette, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, clap::Args)]
struct RenderArgs {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0")]
    center: Complex64,
    #[arg(long, default_value_t = 12.0)]
    width: f64,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 256)]
    pixels: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, value_parser = palette_arg, default_value = "standard")]
    palette: Palette,
    #[arg(long, default_value_t = 1)]
    supersample: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Period, kind and multiplier of the attracting cycle at λ.
    Classify {
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        lambda: Parameter,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Print z_0, ..., z_steps.
    Orbit {
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        lambda: Parameter,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        z0: Complex64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Prepoles of a given order with itinerary entries in [-bound, bound].
    Prepoles {
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        lambda: Parameter,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 2)]
        bound: u32,
    },
    /// Refine a periodic cycle from a guess.
    Cycle {
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        lambda: Parameter,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        guess: Complex64,
        #[arg(long)]
        period: usize,
    },
    /// Virtual center of a period-p component pair.
    VirtualCenter {
        #[arg(long)]
        period: usize,
        /// Comma-separated, p - 1 entries.
        #[arg(long, value_parser = itinerary_arg, allow_hyphen_values = true)]
        itinerary: Itinerary,
        /// Starting λ; defaults to the period-2 center named by the last entry.
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        seed: Option<Parameter>,
    },
    /// Trace an internal ray from a hyperbolic seed.
    Ray {
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        seed: Parameter,
        /// Angle in turns; the current angle of the seed if omitted.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        r_end: f64,
    },
    /// Render the parameter plane to a PPM file.
    RenderParam {
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Render the dynamic plane of λ to a PPM file.
    RenderDynamic {
        #[arg(long, value_parser = parameter_arg, allow_hyphen_values = true)]
        lambda: Parameter,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Run the embedded invariant suite.
    Selftest,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

fn io_err(e: std::io::Error) -> Failure {
    Failure::Compute(e.to_string())
}

/// Thread count from `TANDYN_THREADS`; unset means all logical cores.
pub fn threads_from_env(value: Option<&str>) -> Result<Option<usize>, String> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

fn emit(out: &mut dyn Write, fields: Vec<Field>) -> Result<(), Failure> {
    writeln!(out, "{}", Record(fields)).map_err(io_err)
}

fn render(
    args: RenderArgs,
    lambda: Option<Parameter>,
    out: &mut dyn Write,
) -> Result<bool, Failure> {
    let threads = threads_from_env(std::env::var(THREADS_ENV).ok().as_deref()).map_err(Failure::Usage)?;
    let vp = Viewport::square(args.center, args.width, args.pixels)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let opts = RenderOptions {
        budget: args.budget,
        palette: args.palette,
        threads,
        supersample: args.supersample,
    };
    let img = match lambda {
        Some(l) => render_dynamic_plane(l, &vp, &opts)?,
        None => render_parameter_plane(&vp, &opts)?,
    };
    write_image(&args.out, &img).map_err(io_err)?;
    emit(
        out,
        vec![
            Field::Word(args.out.display().to_string()),
            Field::Int(img.cols as i64),
            Field::Int(img.rows as i64),
        ],
    )?;
    Ok(true)
}

/// Returns `Ok(false)` when the command ran but reports failure (selftest).
fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool, Failure> {
    match cmd {
        Command::Classify { lambda, budget } => {
            let fields = match classify_parameter(lambda, budget) {
                Classification::Hyperbolic(s) => vec![
                    Field::Int(s.period as i64),
                    Field::Word(s.kind.to_string()),
                    Field::Complex(s.multiplier),
                ],
                Classification::Undetermined { .. } => {
                    vec![Field::Int(0), Field::Word("Undetermined".into()), Field::Missing]
                }
            };
            emit(out, fields)?;
        }
        Command::Orbit { lambda, z0, steps } => {
            let mut z = z0;
            emit(out, vec![Field::Int(0), Field::Point(Some(z))])?;
            for k in 1..=steps {
                match eval_f(lambda, z) {
                    Ok(w) => {
                        z = w;
                        emit(out, vec![Field::Int(k as i64), Field::Point(Some(z))])?;
                    }
                    Err(Error::PoleProximity { .. }) => {
                        emit(out, vec![Field::Int(k as i64), Field::Point(None)])?;
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Command::Prepoles { lambda, order, bound } => {
            if order == 0 {
                return Err(Failure::Usage("--order must be at least 1".into()));
            }
            let found = enumerate_prepoles(order, bound, lambda);
            for p in found.prepoles {
                emit(
                    out,
                    vec![
                        Field::Itinerary(p.itinerary.clone()),
                        Field::Point(p.finite_point()),
                        Field::Real(p.forward_residual),
                    ],
                )?;
            }
            for (itin, e) in found.skipped {
                writeln!(err, "skipped {itin}: {e}").map_err(io_err)?;
            }
        }
        Command::Cycle { lambda, guess, period } => {
            if period == 0 {
                return Err(Failure::Usage("--period must be at least 1".into()));
            }
            let c = refine_cycle_newton(lambda, guess, period)?;
            let residual = c.residual(lambda);
            emit(
                out,
                vec![
                    Field::Int(c.period as i64),
                    Field::Word(c.stability.to_string()),
                    Field::Complex(c.multiplier),
                    Field::Real(residual),
                    Field::Points(c.points),
                ],
            )?;
        }
        Command::VirtualCenter { period, itinerary, seed } => {
            let seed = match seed {
                Some(s) => s,
                None => {
                    let last = *itinerary.entries().last().expect("itineraries are nonempty");
                    Parameter::new(period_two_center(last))?
                }
            };
            let vc = find_virtual_center(period, &itinerary, seed)?;
            emit(
                out,
                vec![
                    Field::Complex(vc.lambda_star.value()),
                    Field::Real(vc.residual),
                    Field::Int(vc.pole_index),
                ],
            )?;
        }
        Command::Ray { seed, alpha, r_end } => {
            let alpha = match alpha {
                Some(a) => a,
                None => {
                    let m = tandyn::parameter::eigenvalue(seed)?;
                    m.arg().rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU
                }
            };
            for p in trace_internal_ray(seed, alpha, r_end)? {
                emit(
                    out,
                    vec![
                        Field::Real(p.r),
                        Field::Real(p.alpha),
                        Field::Complex(p.lambda.value()),
                        Field::Complex(p.multiplier),
                    ],
                )?;
            }
        }
        Command::RenderParam { render: args } => return render(args, None, out),
        Command::RenderDynamic { lambda, render: args } => return render(args, Some(lambda), out),
        Command::Selftest => {
            let checks = tandyn::selftest::run_all();
            let ok = checks.iter().all(|c| c.passed);
            for c in checks {
                let detail = c.detail.replace(['\t', '\n'], " ");
                emit(
                    out,
                    vec![
                        Field::Word(c.name.to_string()),
                        Field::Word(if c.passed { "PASS" } else { "FAIL" }.into()),
                        if detail.is_empty() { Field::Missing } else { Field::Word(detail) },
                    ],
                )?;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

/// Run the CLI on `argv` (program name first) and return the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args = Vec::new();
    for a in argv {
        match a.into().into_string() {
            Ok(s) => args.push(s),
            Err(raw) => {
                let _ = writeln!(err, "error: argument is not valid UTF-8: {raw:?}");
                return 2;
            }
        }
    }
    let args = match config::apply(args, &Cli::command()) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Compute(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
