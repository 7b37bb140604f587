//! Command-line front end for `wallach-core`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
//! 3 truncated integration (the partial trajectory is still written).

pub mod args;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;
use wallach_core::equilibria::equilibria_in_regions;
use wallach_core::numeric::{linspace, logspace};
use wallach_core::verify::{self, DEFAULT_SWEEP};
use wallach_core::{
    classify, integrate, normalize_to_sigma, CurveId, Error as CoreError, IntegratorOptions,
    Metric, SampleFlags, SpaceParams, Suite, Tolerances, Trajectory, VerifyConfig,
};

use args::*;
pub use args::{Cli, Command};
use output::*;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0} check(s) failed")]
    VerifyFailed(usize),
    #[error("integration truncated: {0}")]
    Truncated(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Usage(_) | CliError::Core(_) | CliError::Io(_) => 2,
            CliError::Truncated(_) => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses a decimal or a rational literal `p/q`. The rational form is a
/// single correctly rounded division, so `1/6` equals `1.0 / 6.0`.
pub fn parse_real(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("not a number: '{s}'")))
    };
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let q = num(q)?;
            if q == 0.0 {
                return usage(format!("zero denominator in '{s}'"));
            }
            num(p)? / q
        }
        None => num(s)?,
    };
    if !v.is_finite() {
        return usage(format!("not a finite number: '{s}'"));
    }
    Ok(v)
}

pub fn parse_triple(s: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return usage(format!("expected three comma-separated values, got '{s}'"));
    }
    Ok([
        parse_real(parts[0])?,
        parse_real(parts[1])?,
        parse_real(parts[2])?,
    ])
}

fn params(a: &str) -> CliResult<SpaceParams> {
    Ok(SpaceParams::new(parse_real(a)?)?)
}

/// Parses arguments and runs the command. Returns the process exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Command) -> CliResult<()> {
    let tol = Tolerances::default();
    match cmd {
        Command::SampleCurve(a) => sample_curve(&a),
        Command::Integrate(a) => integrate_cmd(&a, &tol),
        Command::Classify(a) => classify_cmd(&a, &tol),
        Command::Equilibria(a) => equilibria_cmd(&a, &tol),
        Command::Verify(a) => verify_cmd(&a, &tol),
    }
}

fn sample_curve(args: &SampleCurveArgs) -> CliResult<()> {
    let id: CurveId = args.curve.parse()?;
    let p = match (&args.a, id.needs_a()) {
        (Some(a), _) => Some(params(a)?),
        (None, true) => return usage(format!("curve {id} requires --a")),
        (None, false) => None,
    };
    if args.untrimmed && id.family != wallach_core::CurveFamily::R {
        return usage("--untrimmed applies to r-curves only");
    }
    if args.n == 0 {
        return usage("--n must be at least 1");
    }
    if !(args.t_min.is_finite() && args.t_max.is_finite() && args.t_min <= args.t_max) {
        return usage("need finite --t-min <= --t-max");
    }
    let ts = if args.log_spacing {
        if args.t_min <= 0.0 {
            return usage("log spacing needs --t-min > 0");
        }
        logspace(args.t_min, args.t_max, args.n)
    } else {
        linspace(args.t_min, args.t_max, args.n)
    };
    let flags = SampleFlags {
        untrimmed: args.untrimmed,
        force_kahler: args.force_kahler,
    };
    let samples = id.sample_grid(&ts, p.as_ref(), flags)?;
    let contents = match args.format {
        Format::Csv => curve_csv(&samples),
        Format::Json => json(&OutputRecord::new(
            Space::from_params(p.as_ref()),
            Payload::CurveSamples(CurveSamples::new(&id, &samples)),
        ))?,
    };
    emit(args.out.as_deref(), &contents)?;
    Ok(())
}

fn integrator_options(args: &IntegrateArgs) -> CliResult<IntegratorOptions> {
    let mut opts = match args.method {
        MethodArg::Rk4 => {
            if args.rel_tol.is_some() {
                return usage("--rel-tol applies to rk45 only");
            }
            IntegratorOptions::rk4(args.t_end, args.dt.unwrap_or(1e-3))
        }
        MethodArg::Rk45 => {
            if args.dt.is_some() {
                return usage("--dt applies to rk4 only");
            }
            let mut o = IntegratorOptions::rk45(args.t_end);
            if let Some(tol) = args.rel_tol {
                o.rel_tol = tol;
                o.abs_tol = tol;
            }
            o
        }
    };
    opts.renormalize_each_step = args.renormalize;
    opts.detect_events = args.events;
    opts.store_every = args.store_every;
    Ok(opts)
}

fn events_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".events.csv");
    out.with_file_name(name)
}

fn write_trajectory(
    args: &IntegrateArgs,
    p: &SpaceParams,
    traj: &Trajectory,
    error: Option<String>,
) -> CliResult<()> {
    match args.format {
        Format::Csv => {
            emit(args.out.as_deref(), &trajectory_csv(traj))?;
            if args.events {
                match &args.out {
                    Some(out) => write_atomic(&events_path(out), &events_csv(&traj.events))?,
                    None => eprint!("{}", events_csv(&traj.events)),
                }
            }
        }
        Format::Json => {
            let record = OutputRecord::new(
                Space::from_params(Some(p)),
                Payload::Trajectory(TrajectoryPayload {
                    trajectory: traj,
                    truncated: error.is_some(),
                    error,
                }),
            );
            emit(args.out.as_deref(), &json(&record)?)?;
        }
    }
    Ok(())
}

fn integrate_cmd(args: &IntegrateArgs, tol: &Tolerances) -> CliResult<()> {
    let p = params(&args.a)?;
    let [x1, x2, x3] = parse_triple(&args.x0)?;
    let m0 = normalize_to_sigma(&Metric::new(x1, x2, x3)?);
    let opts = integrator_options(args)?;
    match integrate(&m0, &p, &opts, tol) {
        Ok(traj) => write_trajectory(args, &p, &traj, None),
        Err(CoreError::Flow(fe)) => {
            let msg = fe.to_string();
            write_trajectory(args, &p, fe.partial(), Some(msg.clone()))?;
            Err(CliError::Truncated(msg))
        }
        Err(e) => Err(e.into()),
    }
}

fn classify_cmd(args: &ClassifyArgs, tol: &Tolerances) -> CliResult<()> {
    let p = params(&args.a)?;
    let [x1, x2, x3] = parse_triple(&args.x)?;
    let m = Metric::new(x1, x2, x3)?;
    let record = OutputRecord::new(
        Space::from_params(Some(&p)),
        Payload::ClassifyResult(ClassifyResult {
            x: m,
            signs: classify(&m, &p, tol),
        }),
    );
    emit(None, &json(&record)?)?;
    Ok(())
}

fn equilibria_cmd(args: &EquilibriaArgs, tol: &Tolerances) -> CliResult<()> {
    let p = params(&args.a)?;
    let report = equilibria_in_regions(&p, tol)?;
    let record = OutputRecord::new(
        Space::from_params(Some(&p)),
        Payload::EquilibriaReport(&report),
    );
    emit(args.out.as_deref(), &json(&record)?)?;
    Ok(())
}

fn verify_cmd(args: &VerifyArgs, tol: &Tolerances) -> CliResult<()> {
    let suite: Suite = args
        .suite
        .parse()
        .map_err(|e: CoreError| CliError::Usage(e.to_string()))?;
    let a_values = match args.a.as_deref() {
        None => None,
        Some("sweep") => Some(DEFAULT_SWEEP.to_vec()),
        Some(list) => Some(
            list.split(',')
                .map(parse_real)
                .collect::<CliResult<Vec<f64>>>()?,
        ),
    };
    let cfg = VerifyConfig {
        suite,
        a_values,
        seed: args.seed,
        n_random: args.n_random,
    };
    let report = verify::run(&cfg, tol)?;
    let a = match report.a_values.as_slice() {
        [a] => Some(*a),
        _ => None,
    };
    let record = OutputRecord::new(
        Space {
            a,
            ..Space::default()
        },
        Payload::VerifyReport(&report),
    );
    emit(args.out.as_deref(), &json(&record)?)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(report.failures))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals_are_exact() {
        assert_eq!(parse_real("1/6").unwrap(), 1.0 / 6.0);
        assert_eq!(parse_real(" 3 / 14 ").unwrap(), 3.0 / 14.0);
        assert_eq!(parse_real("0.125").unwrap(), 0.125);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn triples() {
        assert_eq!(parse_triple("1,2,3/2").unwrap(), [1.0, 2.0, 1.5]);
        assert!(parse_triple("1,2").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::VerifyFailed(3).exit_code(), 1);
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::MissingDimensions).exit_code(), 2);
        assert_eq!(CliError::Truncated(String::new()).exit_code(), 3);
    }

    #[test]
    fn events_sidecar_name() {
        assert_eq!(
            events_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.events.csv")
        );
    }
}
