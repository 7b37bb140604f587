//! Serialization of command results: CSV tables, JSON records and atomic
//! file replacement.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use wallach_core::{
    CrossingEvent, CrossingKind, CurvatureSigns, CurveId, CurveSample, EquilibriaReport, Metric,
    SpaceParams, Trajectory, VerifyReport,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub struct OutputRecord<'a> {
    pub schema_version: &'static str,
    pub space: Space,
    pub payload: Payload<'a>,
}

impl<'a> OutputRecord<'a> {
    pub fn new(space: Space, payload: Payload<'a>) -> Self {
        OutputRecord {
            schema_version: SCHEMA_VERSION,
            space,
            payload,
        }
    }
}

/// Space parameters of a record; `a` is absent for parameter-free curves.
#[derive(Debug, Default, Serialize)]
pub struct Space {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_i: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_i: Option<[u32; 3]>,
}

impl Space {
    pub fn from_params(p: Option<&SpaceParams>) -> Space {
        match p {
            Some(p) => Space {
                a: Some(p.a),
                a_i: p.a_i,
                d_i: p.d,
            },
            None => Space::default(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload<'a> {
    CurveSamples(CurveSamples<'a>),
    Trajectory(TrajectoryPayload<'a>),
    EquilibriaReport(&'a EquilibriaReport),
    VerifyReport(&'a VerifyReport),
    ClassifyResult(ClassifyResult),
}

#[derive(Debug, Serialize)]
pub struct CurveSamples<'a> {
    pub curve: String,
    pub samples: &'a [CurveSample],
}

impl<'a> CurveSamples<'a> {
    pub fn new(id: &CurveId, samples: &'a [CurveSample]) -> Self {
        CurveSamples {
            curve: id.to_string(),
            samples,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TrajectoryPayload<'a> {
    #[serde(flatten)]
    pub trajectory: &'a Trajectory,
    /// Whether integration stopped early; the samples are then a prefix.
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ClassifyResult {
    pub x: Metric,
    #[serde(flatten)]
    pub signs: CurvatureSigns,
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn curve_csv(samples: &[CurveSample]) -> String {
    let mut s = String::from("t,x1,x2,x3\n");
    for c in samples {
        let [x1, x2, x3] = c.m.coords();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(c.t),
            fmt_f64(x1),
            fmt_f64(x2),
            fmt_f64(x3)
        );
    }
    s
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("time,x1,x2,x3,volume_drift\n");
    for smp in &traj.samples {
        let [x1, x2, x3] = smp.m.coords();
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(smp.t),
            fmt_f64(x1),
            fmt_f64(x2),
            fmt_f64(x3),
            fmt_f64(smp.volume_drift)
        );
    }
    s
}

pub fn events_csv(events: &[CrossingEvent]) -> String {
    let mut s = String::from("time,kind,k,x1,x2,x3\n");
    for e in events {
        let (kind, k) = match e.kind {
            CrossingKind::GammaZero(k) => ("gamma_zero", k),
            CrossingKind::LambdaZero(k) => ("lambda_zero", k),
        };
        let [x1, x2, x3] = e.m.coords();
        let _ = writeln!(
            s,
            "{},{kind},{},{},{},{}",
            fmt_f64(e.t),
            k.number(),
            fmt_f64(x1),
            fmt_f64(x2),
            fmt_f64(x3)
        );
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        Some(path) => write_atomic(path, contents),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()
        }
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
