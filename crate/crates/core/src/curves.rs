//! Closed-form parametrizations of the curves that structure the unit-volume
//! surface Σ:
//!
//! * `s_k = Σ ∩ {gamma_k = 0}`, boundary of the positive sectional curvature set;
//! * `r_k = Σ ∩ {lambda_k = 0}`, boundary of the positive Ricci set, made of two
//!   connected branches;
//! * `l_k = Σ ∩ {x_k = x_i + x_j}`, the Kähler curves (saddle separatrices at a = 1/6);
//! * `I_k = {x_i = x_j = p, x_k = p^-2}`, invariant curves of the reduced flow.
//!
//! Every sampler writes the distinguished coordinate to axis `k` and the
//! other two to `k.complement() = (i, j)` in increasing index order. All
//! samples have unit volume by algebraic cancellation.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::curvature::{gamma, lambda};
use crate::error::{Error, Result};
use crate::metric::{Axis, Metric, SpaceParams};
use crate::numeric::{bisect, logspace, scan_roots};

/// Parameter of the I_k ∩ s_k point, `6^(1/3) / 2 = (3/4)^(1/3)`.
pub fn p0() -> f64 {
    6f64.cbrt() / 2.0
}

/// Tolerance used to decide whether `a` is the Kähler value 1/6.
pub const KAHLER_A_TOL: f64 = 1e-12;

pub fn is_kahler_a(a: f64) -> bool {
    (a - 1.0 / 6.0).abs() <= KAHLER_A_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CurveFamily {
    S,
    R,
    L,
    I,
}

/// Branch of `r_k`: `TowardI` is the component whose `x_i` carries the
/// factor `t`; it reaches `r_i` at `P_ki`. `TowardJ` is its mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    TowardI,
    TowardJ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CurveId {
    pub family: CurveFamily,
    pub k: Axis,
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub t: f64,
    pub m: Metric,
}

/// Flags that widen the default sampling domains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleFlags {
    /// Sample `r_k` on `(0, m) ∪ (M, ∞)` instead of `(0, a]`.
    pub untrimmed: bool,
    /// Sample `l_k` for `a != 1/6`.
    pub force_kahler: bool,
}

fn positive(t: f64, what: &str) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} = {t} must be positive")))
    }
}

/// Scale function of `s_k`.
///
/// Evaluated through the conjugate-rationalized form
/// `alpha^3 = 3 / (t (t + 1 + 2 sqrt(t^2 - t + 1)))`, which equals
/// `(-t - 1 + 2 sqrt(t^2 - t + 1)) / (t (t - 1)^2)` for `t != 1` and has no
/// removable singularity at `t = 1`, where it gives `p0`.
pub fn alpha(t: f64) -> Result<f64> {
    positive(t, "t")?;
    let root = (t * t - t + 1.0).sqrt();
    Ok((3.0 / (t * (t + 1.0 + 2.0 * root))).cbrt())
}

pub fn sample_s(k: Axis, t: f64) -> Result<CurveSample> {
    let al = alpha(t)?;
    let m = Metric::assemble(k, 1.0 / (t * al * al), t * al, al)?;
    Ok(CurveSample { t, m })
}

/// Endpoints `(m, M)` of the interval where `x_i^2 - x_i x_j / a + x_j^2 <= 0`
/// along `x_j = t x_i`; `m M = 1` and `a < m < 1 < M < 1/a`.
pub fn ricci_gap(p: &SpaceParams) -> (f64, f64) {
    let a = p.a;
    let s = (1.0 - 4.0 * a * a).sqrt();
    // (1 - s) / (2a) rewritten without cancellation.
    let m = 2.0 * a / (1.0 + s);
    let big = (1.0 + s) / (2.0 * a);
    (m, big)
}

/// Scale function of `r_k`, `(t^4 - t^3/a + t^2)^(-1/6)`.
pub fn beta(t: f64, p: &SpaceParams) -> Result<f64> {
    positive(t, "t")?;
    let radicand = t * t * (t * t - t / p.a + 1.0);
    if radicand <= 0.0 || !radicand.is_finite() {
        let (m, big) = ricci_gap(p);
        return Err(Error::Domain(format!(
            "beta needs t in (0, {m}) or ({big}, inf); got t = {t}"
        )));
    }
    Ok(radicand.powf(-1.0 / 6.0))
}

pub fn sample_r(
    k: Axis,
    branch: Branch,
    t: f64,
    p: &SpaceParams,
    untrimmed: bool,
) -> Result<CurveSample> {
    positive(t, "t")?;
    if !untrimmed && t > p.a {
        return Err(Error::Domain(format!(
            "trimmed r-curve parameter must lie in (0, a] = (0, {}]; got {t}",
            p.a
        )));
    }
    let b = beta(t, p)?;
    let xk = 1.0 / (t * b * b);
    let m = match branch {
        Branch::TowardI => Metric::assemble(k, xk, t * b, b)?,
        Branch::TowardJ => Metric::assemble(k, xk, b, t * b)?,
    };
    Ok(CurveSample { t, m })
}

/// Scale function of `l_k`, `(t^2 + t)^(-1/3)`.
pub fn phi(t: f64) -> Result<f64> {
    positive(t, "t")?;
    Ok((t * t + t).powf(-1.0 / 3.0))
}

/// Samples the Kähler curve `l_k`. Requires `a = 1/6` unless `force` is set.
pub fn sample_l(k: Axis, t: f64, p: &SpaceParams, force: bool) -> Result<CurveSample> {
    if !force && !is_kahler_a(p.a) {
        return Err(Error::KahlerOnlyAtOneSixth { a: p.a });
    }
    kahler_point(k, t)
}

/// The point of `Σ ∩ {x_k = x_i + x_j}` at parameter `t`, independent of `a`.
pub fn kahler_point(k: Axis, t: f64) -> Result<CurveSample> {
    let f = phi(t)?;
    let m = Metric::assemble(k, 1.0 / (t * f * f), t * f, f)?;
    Ok(CurveSample { t, m })
}

/// Point of the invariant curve `I_k` at `x_i = x_j = q`, `x_k = q^-2`.
pub fn sample_i(k: Axis, q: f64) -> Result<CurveSample> {
    positive(q, "p")?;
    Ok(CurveSample {
        t: q,
        m: Metric::assemble(k, q.powi(-2), q, q)?,
    })
}

/// Unique common point `P_ij` of `r_i` and `r_j`.
pub fn intersection_p(i: Axis, j: Axis, p: &SpaceParams) -> Result<Metric> {
    if i == j {
        return Err(Error::Domain("P_ij needs two distinct indices".into()));
    }
    let k = i.third(j);
    let c = p.a.cbrt();
    Metric::assemble(k, 1.0 / (c * c), c, c)
}

/// Unique point of `I_k ∩ s_k`.
pub fn s_i_intersection(k: Axis) -> Metric {
    sample_i(k, p0()).expect("p0 is positive").m
}

/// `gamma_k` restricted to `I_k`, `(4 p^3 - 3) p^-4`.
pub fn gamma_on_invariant_curve(q: f64) -> f64 {
    (4.0 * q.powi(3) - 3.0) / q.powi(4)
}

/// Root of `gamma_k` along `I_k` by bisection on `[0.1, 10]`.
pub fn p0_by_bisection(tol: f64) -> Option<f64> {
    bisect(gamma_on_invariant_curve, 0.1, 10.0, tol)
}

/// Counts sign changes of `gamma_k` along `I_k` on an `n`-point grid over `[0.1, 10]`.
pub fn p0_sign_changes(n: usize) -> usize {
    let grid = crate::numeric::linspace(0.1, 10.0, n);
    grid.windows(2)
        .filter(|w| {
            gamma_on_invariant_curve(w[0]).signum() != gamma_on_invariant_curve(w[1]).signum()
        })
        .count()
}

/// Roots of `a t^2 - (a^2 + 1) t + a`, the parameters where the first formula
/// for `r_k` passes through `P_ki` (t = a) and `P_kj` (t = 1/a).
pub fn tail_roots(p: &SpaceParams) -> (f64, f64) {
    let a = p.a;
    let b = a * a + 1.0;
    let disc = (b * b - 4.0 * a * a).sqrt();
    // Larger root directly, smaller from the product of roots (= 1).
    let big = (b + disc) / (2.0 * a);
    (1.0 / big, big)
}

/// Parameters on the untrimmed domain of the `TowardI` branch of `r_k` where
/// the distinguished coordinate equals one of the other two, found by a sign
/// scan plus bisection. Analytically these are exactly `a` and `1/a`.
pub fn coincidence_roots(k: Axis, p: &SpaceParams, tol: f64) -> Vec<f64> {
    let (m, big) = ricci_gap(p);
    let (i, j) = k.complement();
    let diff = |t: f64| match sample_r(k, Branch::TowardI, t, p, true) {
        Ok(s) => (s.m.get(k) - s.m.get(i)) * (s.m.get(k) - s.m.get(j)),
        Err(_) => f64::NAN,
    };
    let eps = 1e-9;
    let mut roots = scan_roots(diff, &logspace(1e-6, m * (1.0 - eps), 4000), tol);
    roots.extend(scan_roots(
        diff,
        &logspace(big * (1.0 + eps), 1e6 * big, 4000),
        tol,
    ));
    roots
}

/// Leading terms of `s_3` as `t -> 0+`, written with `x2` the small coordinate:
/// `(t^(-1/3), t^(2/3), t^(-1/3))`.
///
/// The exact counterpart is `sample_s(X3, 1/t)`.
pub fn asymptote_s3(t: f64) -> Result<Metric> {
    asymptotic_domain(t)?;
    let small = t.powf(2.0 / 3.0);
    let big = t.powf(-1.0 / 3.0);
    Metric::new(big, small, big)
}

/// Leading terms of the `TowardI` branch of `r_1` as `t -> 0+`:
/// `x1 = t^(-1/3)`, `x2 = t^(2/3) + t^(5/3)/(6a)`, `x3 = t^(-1/3) + t^(2/3)/(6a)`.
///
/// The first coordinate's true correction is `-t^(2/3)/(3a)`, which this
/// truncation leaves out.
pub fn asymptote_r1(t: f64, p: &SpaceParams) -> Result<Metric> {
    asymptotic_domain(t)?;
    let c = 1.0 / (6.0 * p.a);
    Metric::new(
        t.powf(-1.0 / 3.0),
        t.powf(2.0 / 3.0) + c * t.powf(5.0 / 3.0),
        t.powf(-1.0 / 3.0) + c * t.powf(2.0 / 3.0),
    )
}

fn asymptotic_domain(t: f64) -> Result<()> {
    if t > 0.0 && t <= 0.1 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "asymptotic expansions need t in (0, 0.1]; got {t}"
        )))
    }
}

/// Projections of the curves onto the `(x1, x2)` coordinate plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Projection {
    S1p,
    S2p,
    S3p,
    R1p,
    R2p,
    R3p,
    K1p,
    K2p,
    K3p,
}

impl Projection {
    pub const ALL: [Projection; 9] = [
        Projection::S1p,
        Projection::S2p,
        Projection::S3p,
        Projection::R1p,
        Projection::R2p,
        Projection::R3p,
        Projection::K1p,
        Projection::K2p,
        Projection::K3p,
    ];
}

/// Residual of the implicit polynomial describing the projection of a curve
/// onto the `(x1, x2)` plane. `p` is only read by the `R` projections.
pub fn project_implicit(curve: Projection, x1: f64, x2: f64, p: &SpaceParams) -> f64 {
    let a = p.a;
    let s_side = |u: f64, v: f64| {
        3.0 * u.powi(4) * v * v - 2.0 * u.powi(3) * v.powi(3) - u * u * v.powi(4) - 2.0 * u * u * v
            + 2.0 * u * v * v
            - 1.0
    };
    let r_side = |u: f64, v: f64| a * u.powi(4) * v * v - a * u * u * v.powi(4) + u * v * v - a;
    match curve {
        Projection::S1p => s_side(x1, x2),
        Projection::S2p => s_side(x2, x1),
        Projection::S3p => {
            x1.powi(4) * x2 * x2 - 2.0 * x1.powi(3) * x2.powi(3)
                + x1 * x1 * x2.powi(4)
                + 2.0 * x1 * x1 * x2
                + 2.0 * x1 * x2 * x2
                - 3.0
        }
        Projection::R1p => r_side(x1, x2),
        Projection::R2p => r_side(x2, x1),
        Projection::R3p => {
            a * x1.powi(4) * x2 * x2 + a * x1 * x1 * x2.powi(4) - x1.powi(3) * x2.powi(3) - a
        }
        Projection::K1p => x1 * x2 * (x1 - x2) - 1.0,
        Projection::K2p => x1 * x2 * (x2 - x1) - 1.0,
        Projection::K3p => x1 * x2 * (x1 + x2) - 1.0,
    }
}

impl CurveId {
    pub fn new(family: CurveFamily, k: Axis, branch: Option<Branch>) -> Result<CurveId> {
        if (family == CurveFamily::R) != branch.is_some() {
            return Err(Error::Domain(
                "a branch is required for r-curves and only for them".into(),
            ));
        }
        Ok(CurveId { family, k, branch })
    }

    /// Whether sampling needs the space parameter `a`.
    pub fn needs_a(&self) -> bool {
        matches!(self.family, CurveFamily::R | CurveFamily::L)
    }

    pub fn sample(
        &self,
        t: f64,
        p: Option<&SpaceParams>,
        flags: SampleFlags,
    ) -> Result<CurveSample> {
        let need =
            || p.ok_or_else(|| Error::InvalidParams(format!("curve {self} needs the parameter a")));
        match self.family {
            CurveFamily::S => sample_s(self.k, t),
            CurveFamily::I => sample_i(self.k, t),
            CurveFamily::R => sample_r(
                self.k,
                self.branch.expect("validated"),
                t,
                need()?,
                flags.untrimmed,
            ),
            CurveFamily::L => sample_l(self.k, t, need()?, flags.force_kahler),
        }
    }

    /// Samples on a grid of parameters, failing on the first invalid one.
    pub fn sample_grid(
        &self,
        ts: &[f64],
        p: Option<&SpaceParams>,
        flags: SampleFlags,
    ) -> Result<Vec<CurveSample>> {
        ts.iter().map(|&t| self.sample(t, p, flags)).collect()
    }

    /// Residual of the defining equation at `m`: `gamma_k` for s, `lambda_k`
    /// for r, `x_k - x_i - x_j` for l, `x_i - x_j` for I.
    pub fn residual(&self, m: &Metric, p: Option<&SpaceParams>) -> f64 {
        let (i, j) = self.k.complement();
        match self.family {
            CurveFamily::S => gamma(self.k, m),
            CurveFamily::R => p.map_or(f64::NAN, |p| lambda(self.k, m, p)),
            CurveFamily::L => m.get(self.k) - m.get(i) - m.get(j),
            CurveFamily::I => m.get(i) - m.get(j),
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            CurveFamily::S => "s",
            CurveFamily::R => "r",
            CurveFamily::L => "l",
            CurveFamily::I => "I",
        };
        let br = match self.branch {
            Some(Branch::TowardI) => "i",
            Some(Branch::TowardJ) => "j",
            None => "",
        };
        write!(f, "{fam}{}{br}", self.k.number())
    }
}

impl FromStr for CurveId {
    type Err = Error;

    /// Parses `s1..s3`, `r1i, r1j, .., r3j`, `l1..l3` and `I1..I3`.
    fn from_str(s: &str) -> Result<CurveId> {
        let bad = || Error::Domain(format!("unknown curve '{s}'"));
        let mut chars = s.chars();
        let family = match chars.next() {
            Some('s') => CurveFamily::S,
            Some('r') => CurveFamily::R,
            Some('l') => CurveFamily::L,
            Some('I') => CurveFamily::I,
            _ => return Err(bad()),
        };
        let k = chars
            .next()
            .and_then(|c| c.to_digit(10))
            .and_then(|d| Axis::new(d as usize).ok())
            .ok_or_else(bad)?;
        let branch = match (family, chars.next(), chars.next()) {
            (CurveFamily::R, Some('i'), None) => Some(Branch::TowardI),
            (CurveFamily::R, Some('j'), None) => Some(Branch::TowardJ),
            (CurveFamily::R, _, _) => return Err(bad()),
            (_, None, _) => None,
            _ => return Err(bad()),
        };
        CurveId::new(family, k, branch)
    }
}
