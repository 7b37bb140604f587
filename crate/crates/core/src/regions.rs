//! Membership in the positive sectional set `S` and positive Ricci set `R`,
//! the conical boundaries `Gamma_k = {gamma_k = 0}` and `Lambda_k = {lambda_k = 0}`,
//! and numerical checks of `S ⊂ R` and of the cone intersection pattern.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{gamma, gammas, lambda, lambdas};
use crate::error::{Error, Result};
use crate::flow::{integrate, IntegratorOptions};
use crate::metric::{normalize_to_sigma, Axis, Metric, SpaceParams, Tolerances};
use crate::numeric::{linspace, logspace};

/// Relative rounding band: values within `ROUNDING_BAND * |x|^2` of zero count as zero,
/// so points computed on a boundary curve are not reported as interior.
pub const ROUNDING_BAND: f64 = 64.0 * f64::EPSILON;

fn all_positive(values: [f64; 3], m: &Metric) -> bool {
    let band = ROUNDING_BAND * sq_norm(m);
    values.iter().all(|&v| v > band)
}

pub fn in_s(m: &Metric) -> bool {
    all_positive(gammas(m), m)
}

pub fn in_r(m: &Metric, p: &SpaceParams) -> bool {
    all_positive(lambdas(m, p), m)
}

pub fn in_sigma_s(m: &Metric, sigma_tol: f64) -> bool {
    m.on_sigma(sigma_tol) && in_s(m)
}

pub fn in_sigma_r(m: &Metric, p: &SpaceParams, sigma_tol: f64) -> bool {
    m.on_sigma(sigma_tol) && in_r(m, p)
}

/// A generating ray `t (nu, mu, 1)` of the cone `Gamma_k`, with `nu` on axis `k`
/// and `(mu, 1)` on `k.complement()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeGenerator {
    pub k: Axis,
    pub nu: f64,
    pub mu: f64,
    pub direction: [f64; 3],
}

pub fn cone_generator(k: Axis, nu: f64) -> Result<ConeGenerator> {
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(Error::Domain(format!(
            "cone generator needs nu > 1; got {nu}"
        )));
    }
    let s = (nu * (nu - 1.0)).sqrt();
    let mu = 1.0 - nu + 2.0 * s;
    let direction = Metric::assemble(k, nu, mu, 1.0)?.coords();
    Ok(ConeGenerator {
        k,
        nu,
        mu,
        direction,
    })
}

impl ConeGenerator {
    pub fn point(&self, t: f64) -> Result<Metric> {
        Metric::from_coords(self.direction.map(|v| v * t))
    }

    /// `X = (4a(nu - 1) + 2) sqrt(nu (nu - 1))`.
    pub fn x_term(&self, p: &SpaceParams) -> f64 {
        (4.0 * p.a * (self.nu - 1.0) + 2.0) * (self.nu * (self.nu - 1.0)).sqrt()
    }

    /// `Y = 4a nu^2 + (1 - 6a) nu + 2a - 1`. Along the ray `lambda_k = (X - Y) t^2`.
    pub fn y_term(&self, p: &SpaceParams) -> f64 {
        let a = p.a;
        4.0 * a * self.nu * self.nu + (1.0 - 6.0 * a) * self.nu + 2.0 * a - 1.0
    }
}

/// `p(nu) = 8a nu^2 - (2a + 3)(2a - 1) nu + (2a - 1)^2`; `X^2 - Y^2 = (nu - 1) p(nu)`.
pub fn p_nu(nu: f64, p: &SpaceParams) -> f64 {
    let a = p.a;
    8.0 * a * nu * nu - (2.0 * a + 3.0) * (2.0 * a - 1.0) * nu + (2.0 * a - 1.0).powi(2)
}

/// Both roots of `p(nu)`, smaller first. They are real and negative for a in (0, 1/2).
pub fn p_nu_roots(p: &SpaceParams) -> (f64, f64) {
    let a = p.a;
    let c = (2.0 * a - 1.0) / (16.0 * a);
    let d = ((2.0 * a - 1.0) * (2.0 * a - 9.0)).sqrt();
    let r1 = c * (2.0 * a + 3.0 + d);
    let r2 = c * (2.0 * a + 3.0 - d);
    (r1.min(r2), r1.max(r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionOptions {
    /// Generator rays per cone, log-spaced in `nu - 1`.
    pub n_rays: usize,
    /// Random metrics for the brute-force check.
    pub n_random: usize,
    /// Grid size for the positivity of `p(nu)`.
    pub n_p_grid: usize,
    pub seed: u64,
}

impl Default for InclusionOptions {
    fn default() -> Self {
        InclusionOptions {
            n_rays: 200,
            n_random: 100_000,
            n_p_grid: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub point: [f64; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub a: f64,
    pub seed: u64,
    pub boundary_points: usize,
    /// Minimum of `lambda_k / |x|^2` over sampled points of `Gamma_k`.
    pub boundary_min_lambda: f64,
    /// Points of `Gamma_k` with the other two `gamma >= 0`, i.e. on `∂S`.
    pub closure_points: usize,
    /// Minimum over those points of `min_i lambda_i / |x|^2`.
    pub closure_min_lambda: f64,
    pub p_grid_points: usize,
    pub p_min: f64,
    pub p_roots: (f64, f64),
    pub random_samples: usize,
    pub random_in_s: usize,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
}

const MAX_LISTED_VIOLATIONS: usize = 20;

fn sq_norm(m: &Metric) -> f64 {
    m.coords().iter().map(|v| v * v).sum()
}

/// Random metric with coordinates log-uniform in `[0.05, 20]`.
pub fn random_metric<R: Rng>(rng: &mut R) -> Metric {
    let (lo, hi) = (0.05f64.ln(), 20f64.ln());
    let mut x = [0.0; 3];
    for v in &mut x {
        *v = rng.gen_range(lo..=hi).exp();
    }
    Metric::from_coords(x).expect("positive")
}

/// Numerical evidence for `S ⊂ R`: `lambda` on generator rays of every `Gamma_k`,
/// positivity of `p(nu)` on `(1, 1000]`, and a seeded brute-force search.
pub fn verify_s_subset_r(p: &SpaceParams, opts: &InclusionOptions) -> InclusionReport {
    let mut violations = Vec::new();
    let mut count = 0usize;
    let mut record = |check: &str, m: &Metric, value: f64, list: &mut Vec<Violation>| {
        count += 1;
        if list.len() < MAX_LISTED_VIOLATIONS {
            list.push(Violation {
                check: check.to_string(),
                point: m.coords(),
                value,
            });
        }
    };

    let nus: Vec<f64> = logspace(1e-6, 999.0, opts.n_rays)
        .into_iter()
        .map(|s| 1.0 + s)
        .collect();
    let mut boundary_points = 0;
    let mut boundary_min = f64::INFINITY;
    let mut closure_points = 0;
    let mut closure_min = f64::INFINITY;
    for k in Axis::ALL {
        let (i, j) = k.complement();
        for &nu in &nus {
            let g = cone_generator(k, nu).expect("nu > 1");
            for t in [0.1, 1.0, 10.0] {
                let base = g.point(t).expect("positive");
                // Both placements of (mu, 1) on the complement.
                let mut swap = [0, 1, 2];
                swap.swap(i.pos(), j.pos());
                for m in [base, base.permuted(swap)] {
                    boundary_points += 1;
                    let lk = lambda(k, &m, p) / sq_norm(&m);
                    boundary_min = boundary_min.min(lk);
                    if lk <= 0.0 {
                        record("lambda_k on Gamma_k", &m, lk, &mut violations);
                    }
                    if gamma(i, &m) >= 0.0 && gamma(j, &m) >= 0.0 {
                        closure_points += 1;
                        let l =
                            lambdas(&m, p).into_iter().fold(f64::INFINITY, f64::min) / sq_norm(&m);
                        closure_min = closure_min.min(l);
                        if l <= 0.0 {
                            record("lambda on boundary of S", &m, l, &mut violations);
                        }
                    }
                }
            }
        }
    }

    let grid: Vec<f64> = logspace(1e-9, 999.0, opts.n_p_grid)
        .into_iter()
        .map(|s| 1.0 + s)
        .collect();
    let mut p_min = f64::INFINITY;
    for &nu in &grid {
        let v = p_nu(nu, p);
        p_min = p_min.min(v);
        if v <= 0.0 {
            let m = Metric::new(nu, 1.0, 1.0).expect("positive");
            record("p(nu) > 0", &m, v, &mut violations);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut in_s_count = 0;
    for _ in 0..opts.n_random {
        let m = random_metric(&mut rng);
        if in_s(&m) {
            in_s_count += 1;
            if !in_r(&m, p) {
                let l = lambdas(&m, p).into_iter().fold(f64::INFINITY, f64::min);
                record("in_S implies in_R", &m, l, &mut violations);
            }
        }
    }

    InclusionReport {
        a: p.a,
        seed: opts.seed,
        boundary_points,
        boundary_min_lambda: boundary_min,
        closure_points,
        closure_min_lambda: closure_min,
        p_grid_points: grid.len(),
        p_min,
        p_roots: p_nu_roots(p),
        random_samples: opts.n_random,
        random_in_s: in_s_count,
        violations,
        violation_count: count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeIntersectionReport {
    pub i: usize,
    pub j: usize,
    /// Interior common line of `Lambda_i` and `Lambda_j`: `a` on axes `i`, `j`, 1 on the third.
    pub lambda_line_direction: [f64; 3],
    pub lambda_line_max_residual: f64,
    /// Where the line meets Σ (`v = a^(-2/3)`).
    pub lambda_line_sigma_point: [f64; 3],
    /// Distance from that point to `P_ij`.
    pub lambda_line_pij_distance: f64,
    /// Minimum of `|gamma_j| / |x|^2` over points of `Gamma_i` found by the search.
    pub gamma_min_separation: f64,
    pub gamma_min_point: [f64; 3],
}

/// Distinguished coordinate on `Gamma_i` given the other two:
/// the positive root of `gamma_i = 0`.
pub fn gamma_cone_height(u: f64, v: f64) -> f64 {
    let s = u + v;
    (s + (s * s + 3.0 * (u - v).powi(2)).sqrt()) / 3.0
}

const BOX: (f64, f64) = (0.05, 20.0);

/// Normalized `|gamma_j|` at the point of `Gamma_i` over `(x_o1, x_o2)`,
/// or `None` outside the sampling box.
fn gamma_gap(i: Axis, j: Axis, u: f64, v: f64) -> Option<(f64, Metric)> {
    let xi = gamma_cone_height(u, v);
    if !(BOX.0..=BOX.1).contains(&xi) {
        return None;
    }
    let m = Metric::assemble(i, xi, u, v).ok()?;
    Some((gamma(j, &m).abs() / sq_norm(&m), m))
}

pub fn cone_intersections(i: Axis, j: Axis, p: &SpaceParams) -> Result<ConeIntersectionReport> {
    if i == j {
        return Err(Error::Domain(
            "cone intersections need two distinct indices".into(),
        ));
    }
    let k = i.third(j);
    let a = p.a;
    let direction = Metric::assemble(k, 1.0, a, a)?.coords();
    let mut residual: f64 = 0.0;
    for v in logspace(0.05, 20.0, 20) {
        let m = Metric::from_coords(direction.map(|d| d * v))?;
        residual = residual
            .max(lambda(i, &m, p).abs())
            .max(lambda(j, &m, p).abs());
    }
    let v0 = a.powf(-2.0 / 3.0);
    let on_sigma = Metric::from_coords(direction.map(|d| d * v0))?;
    let pij = crate::curves::intersection_p(i, j, p)?;

    // Grid search over the two free coordinates of Gamma_i, then zoom on the best cell.
    let n = 300;
    let (lo, hi) = (BOX.0.ln(), BOX.1.ln());
    let mut best = (f64::INFINITY, on_sigma, 0.0, 0.0);
    let mut step = (hi - lo) / (n - 1) as f64;
    let grid = linspace(lo, hi, n);
    let found: Vec<(f64, Metric, f64, f64)> = grid
        .par_iter()
        .filter_map(|&lu| {
            let mut local: Option<(f64, Metric, f64, f64)> = None;
            for &lv in &grid {
                if let Some((g, m)) = gamma_gap(i, j, lu.exp(), lv.exp()) {
                    if local.as_ref().is_none_or(|b| g < b.0) {
                        local = Some((g, m, lu, lv));
                    }
                }
            }
            local
        })
        .collect();
    for c in found {
        if c.0 < best.0 {
            best = c;
        }
    }
    for _ in 0..40 {
        let (cu, cv) = (best.2, best.3);
        for lu in linspace((cu - 2.0 * step).max(lo), (cu + 2.0 * step).min(hi), 21) {
            for lv in linspace((cv - 2.0 * step).max(lo), (cv + 2.0 * step).min(hi), 21) {
                if let Some((g, m)) = gamma_gap(i, j, lu.exp(), lv.exp()) {
                    if g < best.0 {
                        best = (g, m, lu, lv);
                    }
                }
            }
        }
        step *= 0.25;
    }
    Ok(ConeIntersectionReport {
        i: i.number(),
        j: j.number(),
        lambda_line_direction: direction,
        lambda_line_max_residual: residual,
        lambda_line_sigma_point: on_sigma.coords(),
        lambda_line_pij_distance: on_sigma.distance(&pij),
        gamma_min_separation: best.0,
        gamma_min_point: best.1.coords(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KahlerWallOptions {
    pub trajectories: usize,
    pub t_end: f64,
    pub seed: u64,
}

impl Default for KahlerWallOptions {
    fn default() -> Self {
        KahlerWallOptions {
            trajectories: 20,
            t_end: 50.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KahlerWallReport {
    pub a: f64,
    pub seed: u64,
    pub trajectories: usize,
    pub t_end: f64,
    pub samples_checked: usize,
    /// Trajectories that reached the aspect-ratio cutoff before `t_end`.
    pub degenerated: usize,
    /// Minimum of `min_i lambda_i / |x|^2` over checked samples.
    pub min_lambda: f64,
    /// Minimum of `min_k (x_i + x_j - x_k) / |x|` over checked samples.
    pub min_wall_margin: f64,
    /// Checked samples outside `ΣR` or outside the region `x_k < x_i + x_j`.
    pub exits: usize,
}

/// Samples with `max x / min x` above this are not checked: the trajectory is
/// degenerating and its distance to the walls drops below the integration error.
pub const ASPECT_CUTOFF: f64 = 1e6;

fn aspect(m: &Metric) -> f64 {
    let x = m.coords();
    x.iter().cloned().fold(0.0, f64::max) / x.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn wall_margin(m: &Metric) -> f64 {
    let x = m.coords();
    let s: f64 = x.iter().sum();
    let n = sq_norm(m).sqrt();
    x.iter()
        .map(|&v| (s - 2.0 * v) / n)
        .fold(f64::INFINITY, f64::min)
}

/// True when `x_k < x_i + x_j` for every `k`.
pub fn inside_kahler_triangle(m: &Metric) -> bool {
    let [x1, x2, x3] = m.coords();
    x1 < x2 + x3 && x2 < x1 + x3 && x3 < x1 + x2
}

/// Random points of `ΣR` strictly inside the region bounded by the Kähler curves.
pub fn kahler_region_starts(p: &SpaceParams, n: usize, seed: u64) -> Vec<Metric> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let raw = random_metric(&mut rng);
        let m = normalize_to_sigma(&raw);
        if inside_kahler_triangle(&m) && in_r(&m, p) && m.generic(1e-3) {
            out.push(m);
        }
    }
    out
}

/// Integrates trajectories started inside the Kähler triangle and checks that
/// every sample stays in `ΣR` and inside the triangle. Requires `a = 1/6`.
pub fn kahler_wall_check(
    p: &SpaceParams,
    opts: &KahlerWallOptions,
    tol: &Tolerances,
) -> Result<KahlerWallReport> {
    if !crate::curves::is_kahler_a(p.a) {
        return Err(Error::KahlerOnlyAtOneSixth { a: p.a });
    }
    let starts = kahler_region_starts(p, opts.trajectories, opts.seed);
    let mut iopts = IntegratorOptions::rk45(opts.t_end);
    iopts.renormalize_each_step = true;
    let results: Vec<(crate::flow::Trajectory, bool)> = starts
        .par_iter()
        .map(|m0| match integrate(m0, p, &iopts, tol) {
            Ok(tr) => Ok((tr, false)),
            Err(Error::Flow(e)) => Ok((e.partial().clone(), true)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut report = KahlerWallReport {
        a: p.a,
        seed: opts.seed,
        trajectories: starts.len(),
        t_end: opts.t_end,
        samples_checked: 0,
        degenerated: 0,
        min_lambda: f64::INFINITY,
        min_wall_margin: f64::INFINITY,
        exits: 0,
    };
    for (tr, truncated) in &results {
        let mut cut = *truncated;
        for s in &tr.samples {
            if aspect(&s.m) > ASPECT_CUTOFF {
                cut = true;
                break;
            }
            report.samples_checked += 1;
            let l = lambdas(&s.m, p).into_iter().fold(f64::INFINITY, f64::min) / sq_norm(&s.m);
            report.min_lambda = report.min_lambda.min(l);
            report.min_wall_margin = report.min_wall_margin.min(wall_margin(&s.m));
            if !in_sigma_r(&s.m, p, tol.sigma_tol) || !inside_kahler_triangle(&s.m) {
                report.exits += 1;
            }
        }
        report.degenerated += usize::from(cut);
    }
    Ok(report)
}
