//! Normalized Ricci flow on invariant metrics.
//!
//! The reduced equal-parameter system is
//!
//! ```text
//! dx_i/dt = x_i/x_j + x_i/x_k + 2a (x_j/x_k + x_k/x_j - 2 x_i^2/(x_j x_k)) - 2
//! ```
//!
//! Its right-hand side is homogeneous of degree zero and `x1 x2 x3` is a first
//! integral. The general diagonal form `dx_i/dt = -2 x_i r_i + 2 x_i S/n`
//! needs the module dimensions and conserves `x1^d1 x2^d2 x3^d3`.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{gamma, lambda, principal_ricci, scalar_curvature};
use crate::error::{Error, FlowError, Result};
use crate::metric::{Axis, Metric, SpaceParams, Tolerances};
use crate::numeric::bisect;
use crate::regions::ROUNDING_BAND;

/// Coordinates outside this window terminate integration with [`FlowError::BlowUp`].
pub const COORD_MIN: f64 = 1e-12;
pub const COORD_MAX: f64 = 1e12;
/// Adaptive steps below this size raise [`FlowError::StepFailure`].
pub const MIN_STEP: f64 = 1e-14;

#[inline]
pub(crate) fn field(x: [f64; 3], a: f64) -> [f64; 3] {
    let [x1, x2, x3] = x;
    [
        component(x1, x2, x3, a),
        component(x2, x1, x3, a),
        component(x3, x1, x2, a),
    ]
}

#[inline]
fn component(xi: f64, xj: f64, xk: f64, a: f64) -> f64 {
    xi / xj + xi / xk + 2.0 * a * (xj / xk + xk / xj - 2.0 * xi * xi / (xj * xk)) - 2.0
}

/// Right-hand side `(f1, f2, f3)` of the reduced equal-parameter system.
pub fn vector_field_equal_a(m: &Metric, p: &SpaceParams) -> [f64; 3] {
    field(m.coords(), p.a)
}

/// Diagonal normalized Ricci flow `dx_i/dt = -2 x_i r_i + 2 x_i S / n`, `n = d1 + d2 + d3`.
pub fn vector_field_general(m: &Metric, p: &SpaceParams) -> Result<[f64; 3]> {
    let d = p.dimensions()?;
    let n: f64 = d.iter().map(|&v| v as f64).sum();
    let s = scalar_curvature(m, p)?;
    Ok(Axis::ALL.map(|k| {
        let x = m.get(k);
        -2.0 * x * principal_ricci(k, m, p) + 2.0 * x * s / n
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Step size for [`Method::Rk4Fixed`].
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Project every accepted step back onto the unit-volume surface.
    pub renormalize_each_step: bool,
    /// Keep every n-th step (the first and last states are always kept).
    pub store_every: usize,
    pub detect_events: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            method: Method::Rk45Adaptive,
            dt: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            t_end: 10.0,
            renormalize_each_step: false,
            store_every: 1,
            detect_events: false,
        }
    }
}

impl IntegratorOptions {
    pub fn rk45(t_end: f64) -> Self {
        IntegratorOptions {
            t_end,
            ..Default::default()
        }
    }

    pub fn rk4(t_end: f64, dt: f64) -> Self {
        IntegratorOptions {
            method: Method::Rk4Fixed,
            dt,
            t_end,
            ..Default::default()
        }
    }

    pub fn with_events(mut self) -> Self {
        self.detect_events = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidOptions(msg.to_string()));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if self.store_every == 0 {
            return bad("store_every must be >= 1");
        }
        match self.method {
            Method::Rk4Fixed if !(self.dt > 0.0 && self.dt.is_finite()) => {
                bad("dt must be positive")
            }
            Method::Rk45Adaptive if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) => {
                bad("tolerances must be positive")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub m: Metric,
    /// Relative volume drift `|V - V0| / V0`; measured before projection
    /// when the trajectory is renormalized.
    pub volume_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum CrossingKind {
    GammaZero(Axis),
    LambdaZero(Axis),
}

impl CrossingKind {
    pub fn eval(&self, m: &Metric, p: &SpaceParams) -> f64 {
        match *self {
            CrossingKind::GammaZero(k) => gamma(k, m),
            CrossingKind::LambdaZero(k) => lambda(k, m, p),
        }
    }

    const ALL: [CrossingKind; 6] = [
        CrossingKind::GammaZero(Axis::X1),
        CrossingKind::GammaZero(Axis::X2),
        CrossingKind::GammaZero(Axis::X3),
        CrossingKind::LambdaZero(Axis::X1),
        CrossingKind::LambdaZero(Axis::X2),
        CrossingKind::LambdaZero(Axis::X3),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingEvent {
    pub t: f64,
    pub kind: CrossingKind,
    pub m: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub max_volume_drift: f64,
    pub events: Vec<CrossingEvent>,
}

impl Trajectory {
    fn new() -> Self {
        Trajectory {
            samples: Vec::new(),
            max_volume_drift: 0.0,
            events: Vec::new(),
        }
    }

    fn push(&mut self, s: Sample) {
        self.max_volume_drift = self.max_volume_drift.max(s.volume_drift);
        self.samples.push(s);
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

fn axpy(x: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]]
}

pub(crate) fn rk4_step(x: [f64; 3], a: f64, h: f64) -> [f64; 3] {
    let k1 = field(x, a);
    let k2 = field(axpy(x, 0.5 * h, k1), a);
    let k3 = field(axpy(x, 0.5 * h, k2), a);
    let k4 = field(axpy(x, h, k3), a);
    [0, 1, 2].map(|n| x[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]))
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step; returns the 5th-order solution and the embedded error vector.
fn dopri_step(x: [f64; 3], a: f64, h: f64) -> ([f64; 3], [f64; 3]) {
    debug_assert_eq!(C[0], 0.0);
    let mut k = [[0.0; 3]; 7];
    k[0] = field(x, a);
    for s in 1..7 {
        let mut y = x;
        for (r, kr) in k.iter().enumerate().take(s) {
            let c = A[s][r];
            if c != 0.0 {
                y = axpy(y, h * c, *kr);
            }
        }
        k[s] = field(y, a);
    }
    let mut y = x;
    let mut err = [0.0; 3];
    for s in 0..7 {
        y = axpy(y, h * B[s], k[s]);
        err = axpy(err, h * E[s], k[s]);
    }
    (y, err)
}

fn in_window(x: &[f64; 3]) -> bool {
    x.iter()
        .all(|&v| v.is_finite() && (COORD_MIN..=COORD_MAX).contains(&v))
}

fn project(x: [f64; 3]) -> [f64; 3] {
    let s = (x[0] * x[1] * x[2]).cbrt();
    x.map(|v| v / s)
}

struct Recorder<'a> {
    traj: Trajectory,
    opts: &'a IntegratorOptions,
    v0: f64,
    steps: usize,
}

impl Recorder<'_> {
    /// Accepts a completed step, applying projection and storage policy.
    fn accept(&mut self, t: f64, x: [f64; 3], last: bool) -> [f64; 3] {
        self.steps += 1;
        let v = x[0] * x[1] * x[2];
        let drift = (v - self.v0).abs() / self.v0;
        let x = if self.opts.renormalize_each_step {
            project(x)
        } else {
            x
        };
        self.traj.max_volume_drift = self.traj.max_volume_drift.max(drift);
        if last || self.steps.is_multiple_of(self.opts.store_every) {
            self.traj.push(Sample {
                t,
                m: Metric::from_coords(x).expect("coordinates checked against the window"),
                volume_drift: drift,
            });
        }
        x
    }

    fn fail_blowup(mut self, t: f64, p: &SpaceParams, tol: &Tolerances) -> Error {
        self.finish_events(p, tol);
        Error::Flow(FlowError::BlowUp {
            t,
            partial: Box::new(self.traj),
        })
    }

    fn finish_events(&mut self, p: &SpaceParams, tol: &Tolerances) {
        if self.opts.detect_events {
            self.traj.events = detect_crossings(&self.traj, p, tol);
        }
    }
}

/// Integrates the reduced system from `m0` up to `opts.t_end`.
///
/// With `renormalize_each_step` the initial point is first projected onto
/// the unit-volume surface and every accepted step is projected back; the
/// recorded drift is the pre-projection deviation of that step.
pub fn integrate(
    m0: &Metric,
    p: &SpaceParams,
    opts: &IntegratorOptions,
    tol: &Tolerances,
) -> Result<Trajectory> {
    opts.validate()?;
    let a = p.a;
    let mut x = if opts.renormalize_each_step {
        project(m0.coords())
    } else {
        m0.coords()
    };
    let mut rec = Recorder {
        traj: Trajectory::new(),
        opts,
        v0: x[0] * x[1] * x[2],
        steps: 0,
    };
    rec.traj.push(Sample {
        t: 0.0,
        m: Metric::from_coords(x)?,
        volume_drift: 0.0,
    });
    let mut t = 0.0;

    match opts.method {
        Method::Rk4Fixed => {
            let n = (opts.t_end / opts.dt).ceil() as usize;
            for step in 1..=n {
                let t_next = if step == n {
                    opts.t_end
                } else {
                    step as f64 * opts.dt
                };
                let next = rk4_step(x, a, t_next - t);
                if !in_window(&next) {
                    return Err(rec.fail_blowup(t, p, tol));
                }
                t = t_next;
                x = rec.accept(t, next, step == n);
            }
        }
        Method::Rk45Adaptive => {
            let mut h = initial_step(x, a, opts);
            while t < opts.t_end {
                let last = t + h >= opts.t_end;
                if last {
                    h = opts.t_end - t;
                }
                let (next, err_vec) = dopri_step(x, a, h);
                let err = error_norm(&x, &next, &err_vec, opts);
                if err.is_finite() && err <= 1.0 {
                    if !in_window(&next) {
                        return Err(rec.fail_blowup(t, p, tol));
                    }
                    t = if last { opts.t_end } else { t + h };
                    x = rec.accept(t, next, last);
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= factor;
                } else {
                    let factor = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    h *= factor;
                    if h < MIN_STEP {
                        rec.finish_events(p, tol);
                        return Err(Error::Flow(FlowError::StepFailure {
                            t,
                            h,
                            partial: Box::new(rec.traj),
                        }));
                    }
                }
            }
        }
    }
    rec.finish_events(p, tol);
    Ok(rec.traj)
}

fn error_norm(x: &[f64; 3], y: &[f64; 3], e: &[f64; 3], opts: &IntegratorOptions) -> f64 {
    let s: f64 = (0..3)
        .map(|n| {
            let sc = opts.abs_tol + opts.rel_tol * x[n].abs().max(y[n].abs());
            (e[n] / sc).powi(2)
        })
        .sum();
    (s / 3.0).sqrt()
}

fn initial_step(x: [f64; 3], a: f64, opts: &IntegratorOptions) -> f64 {
    let f = field(x, a);
    let sc = |n: usize| opts.abs_tol + opts.rel_tol * x[n].abs();
    let d0 = ((0..3).map(|n| (x[n] / sc(n)).powi(2)).sum::<f64>() / 3.0).sqrt();
    let d1 = ((0..3).map(|n| (f[n] / sc(n)).powi(2)).sum::<f64>() / 3.0).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(opts.t_end).max(MIN_STEP)
}

/// Integrates a batch of initial conditions in parallel.
pub fn integrate_many(
    starts: &[Metric],
    p: &SpaceParams,
    opts: &IntegratorOptions,
    tol: &Tolerances,
) -> Vec<Result<Trajectory>> {
    starts
        .par_iter()
        .map(|m0| integrate(m0, p, opts, tol))
        .collect()
}

fn rounding_band(m: &Metric) -> f64 {
    ROUNDING_BAND * m.coords().iter().map(|x| x * x).sum::<f64>()
}

/// Finds every sign change of a `gamma_k` or `lambda_k` between consecutive
/// samples and refines its time by bisection.
///
/// The state inside a bracket is recomputed by integrating the reduced
/// system from the left sample with short RK4 substeps, so refined points lie
/// on the trajectory rather than on a chord between samples.
pub fn detect_crossings(
    traj: &Trajectory,
    p: &SpaceParams,
    tol: &Tolerances,
) -> Vec<CrossingEvent> {
    let mut events = Vec::new();
    for w in traj.samples.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        for kind in CrossingKind::ALL {
            let g0 = kind.eval(&s0.m, p);
            let g1 = kind.eval(&s1.m, p);
            if g0 == 0.0 || g0.signum() == g1.signum() {
                continue;
            }
            // Both ends within round-off of zero: cancellation noise, not a crossing.
            if g0.abs() <= rounding_band(&s0.m) && g1.abs() <= rounding_band(&s1.m) {
                continue;
            }
            events.push(refine_crossing(s0, s1, kind, p, tol));
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    events
}

const SUBSTEP: f64 = 1e-3;

fn advance(x0: [f64; 3], a: f64, tau: f64) -> [f64; 3] {
    if tau <= 0.0 {
        return x0;
    }
    let n = (tau / SUBSTEP).ceil().max(1.0) as usize;
    let h = tau / n as f64;
    (0..n).fold(x0, |x, _| rk4_step(x, a, h))
}

fn refine_crossing(
    s0: &Sample,
    s1: &Sample,
    kind: CrossingKind,
    p: &SpaceParams,
    tol: &Tolerances,
) -> CrossingEvent {
    let x0 = s0.m.coords();
    let span = s1.t - s0.t;
    let eval = |x: [f64; 3]| match Metric::from_coords(x) {
        Ok(m) => kind.eval(&m, p),
        Err(_) => f64::NAN,
    };
    let g_end = eval(advance(x0, p.a, span));
    let g0 = kind.eval(&s0.m, p);
    if g_end.is_finite() && g_end.signum() != g0.signum() {
        // Bisection on the re-integrated state; bracket at [0, span].
        let mut lo = 0.0;
        let mut hi = span;
        let mut x_lo = x0;
        while hi - lo > tol.root_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let x_mid = advance(x_lo, p.a, mid - lo);
            let g = eval(x_mid);
            if g == 0.0 {
                lo = mid;
                x_lo = x_mid;
                break;
            }
            if g.signum() == g0.signum() {
                lo = mid;
                x_lo = x_mid;
            } else {
                hi = mid;
            }
        }
        let x_hi = advance(x_lo, p.a, hi - lo);
        let (t, x) = if eval(x_lo).abs() <= eval(x_hi).abs() {
            (lo, x_lo)
        } else {
            (hi, x_hi)
        };
        if let Ok(m) = Metric::from_coords(x) {
            return CrossingEvent {
                t: s0.t + t,
                kind,
                m,
            };
        }
    }
    // Grazing crossing the substep integration does not reproduce: fall back
    // to the chord between the two samples.
    let chord = |s: f64| {
        let c0 = s0.m.coords();
        let c1 = s1.m.coords();
        [0, 1, 2].map(|n| c0[n] + s * (c1[n] - c0[n]))
    };
    let s = bisect(|s| eval(chord(s)), 0.0, 1.0, 1e-15).unwrap_or(0.5);
    CrossingEvent {
        t: s0.t + s * span,
        kind,
        m: Metric::from_coords(chord(s)).unwrap_or(s0.m),
    }
}
