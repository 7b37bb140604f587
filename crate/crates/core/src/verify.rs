//! Verification suites that re-derive the structural facts numerically and
//! report every measured quantity next to its threshold.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{cross, gamma, lambda, norm};
use crate::curves::{
    alpha, asymptote_r1, asymptote_s3, coincidence_roots, intersection_p, is_kahler_a,
    kahler_point, p0_by_bisection, p0_sign_changes, sample_i, sample_l, sample_r, sample_s, Branch,
};
use crate::equilibria::{equilibria_in_regions, kappa, EquilibriumKind};
use crate::error::{Error, FlowError, Result};
use crate::flow::{
    integrate, vector_field_equal_a, vector_field_general, CrossingKind, IntegratorOptions,
    Trajectory,
};
use crate::metric::{normalize_to_sigma, volume, Axis, Metric, SpaceParams, Tolerances};
use crate::numeric::{fit_slope, logspace};
use crate::regions::{
    cone_intersections, kahler_wall_check, verify_s_subset_r, InclusionOptions, KahlerWallOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Theorem1,
    Theorem2,
    Inclusion,
    Kahler,
    Asymptotics,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "all" => Suite::All,
            "theorem1" => Suite::Theorem1,
            "theorem2" => Suite::Theorem2,
            "inclusion" => Suite::Inclusion,
            "kahler" => Suite::Kahler,
            "asymptotics" => Suite::Asymptotics,
            _ => return Err(Error::InvalidOptions(format!("unknown suite '{s}'"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::All => "all",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Inclusion => "inclusion",
            Suite::Kahler => "kahler",
            Suite::Asymptotics => "asymptotics",
        };
        f.write_str(s)
    }
}

/// Default sweep of `a` for the parameter-dependent suites.
pub const DEFAULT_SWEEP: [f64; 4] = [0.05, 1.0 / 6.0, 0.3, 0.45];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Equals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub a: Option<f64>,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub a_values: Vec<f64>,
    pub checks: Vec<Check>,
    pub failures: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub suite: Suite,
    /// `None` selects the default sweep (or 1/6 for the Kähler suite).
    pub a_values: Option<Vec<f64>>,
    pub seed: u64,
    /// Random metrics per `a` in the inclusion brute-force check.
    pub n_random: usize,
}

impl VerifyConfig {
    pub fn new(suite: Suite) -> VerifyConfig {
        VerifyConfig {
            suite,
            a_values: None,
            seed: 0,
            n_random: 100_000,
        }
    }
}

struct Collector {
    suite: Suite,
    a: Option<f64>,
    checks: Vec<Check>,
}

impl Collector {
    fn push(&mut self, name: &str, measured: f64, relation: Relation, threshold: f64) {
        let passed = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::Above => measured > threshold,
            Relation::Equals => measured == threshold,
        };
        self.checks.push(Check {
            suite: self.suite,
            name: name.to_string(),
            a: self.a,
            measured,
            relation,
            threshold,
            passed,
        });
    }

    fn at_most(&mut self, name: &str, measured: f64, threshold: f64) {
        self.push(name, measured, Relation::AtMost, threshold);
    }

    fn above(&mut self, name: &str, measured: f64, threshold: f64) {
        self.push(name, measured, Relation::Above, threshold);
    }

    fn equals(&mut self, name: &str, measured: usize, expected: usize) {
        self.push(name, measured as f64, Relation::Equals, expected as f64);
    }

    fn for_suite(&mut self, suite: Suite, a: Option<f64>) {
        self.suite = suite;
        self.a = a;
    }
}

fn params(a: f64) -> Result<SpaceParams> {
    SpaceParams::new(a)
}

/// Runs the configured suite. The Kähler suite requires every `a` to be 1/6.
pub fn run(cfg: &VerifyConfig, tol: &Tolerances) -> Result<VerifyReport> {
    tol.validate()?;
    let a_values = match (&cfg.a_values, cfg.suite) {
        (Some(v), _) => v.clone(),
        (None, Suite::Kahler) => vec![1.0 / 6.0],
        (None, _) => DEFAULT_SWEEP.to_vec(),
    };
    let sweep: Vec<SpaceParams> = a_values.iter().map(|&a| params(a)).collect::<Result<_>>()?;
    if cfg.suite == Suite::Kahler {
        if let Some(p) = sweep.iter().find(|p| !is_kahler_a(p.a)) {
            return Err(Error::KahlerOnlyAtOneSixth { a: p.a });
        }
    }
    let mut c = Collector {
        suite: cfg.suite,
        a: None,
        checks: Vec::new(),
    };
    let wants = |s: Suite| cfg.suite == Suite::All || cfg.suite == s;
    if wants(Suite::Theorem1) {
        c.for_suite(Suite::Theorem1, None);
        theorem1(&mut c, tol)?;
    }
    for p in &sweep {
        if wants(Suite::Theorem2) {
            c.for_suite(Suite::Theorem2, Some(p.a));
            theorem2(&mut c, p, cfg.seed, tol)?;
        }
        if wants(Suite::Inclusion) {
            c.for_suite(Suite::Inclusion, Some(p.a));
            inclusion(&mut c, p, cfg, tol)?;
        }
        if wants(Suite::Asymptotics) {
            c.for_suite(Suite::Asymptotics, Some(p.a));
            asymptotics(&mut c, p)?;
        }
    }
    if wants(Suite::Kahler) {
        let p = params(1.0 / 6.0)?;
        c.for_suite(Suite::Kahler, Some(p.a));
        kahler(&mut c, &p, cfg.seed, tol)?;
    }
    let failures = c.checks.iter().filter(|k| !k.passed).count();
    Ok(VerifyReport {
        suite: cfg.suite,
        seed: cfg.seed,
        a_values,
        checks: c.checks,
        failures,
        passed: failures == 0,
    })
}

/// Integrates, keeping the partial trajectory on degeneration.
fn integrate_partial(
    m0: &Metric,
    p: &SpaceParams,
    opts: &IntegratorOptions,
    tol: &Tolerances,
) -> Result<Trajectory> {
    match integrate(m0, p, opts, tol) {
        Ok(tr) => Ok(tr),
        Err(Error::Flow(
            FlowError::BlowUp { partial, .. } | FlowError::StepFailure { partial, .. },
        )) => Ok(*partial),
        Err(e) => Err(e),
    }
}

fn count_events(tr: &Trajectory, pred: impl Fn(&CrossingKind) -> bool) -> usize {
    tr.events.iter().filter(|e| pred(&e.kind)).count()
}

fn theorem1(c: &mut Collector, tol: &Tolerances) -> Result<()> {
    let want = 6f64.cbrt() / 2.0;
    let root = p0_by_bisection(1e-15).unwrap_or(f64::NAN);
    c.at_most("p0_bisection_error", (root - want).abs(), 1e-12);
    c.at_most("alpha_at_one_error", (alpha(1.0)? - want).abs(), 1e-13);
    c.equals("p0_sign_changes", p0_sign_changes(100_000), 1);

    let ts = logspace(1e-3, 1e3, 1000);
    for k in Axis::ALL {
        let mut res: f64 = 0.0;
        let mut vol: f64 = 0.0;
        for &t in &ts {
            let m = sample_s(k, t)?.m;
            res = res.max(gamma(k, &m).abs());
            vol = vol.max((volume(&m) - 1.0).abs());
        }
        c.at_most(&format!("s{}_gamma_residual", k.number()), res, 1e-10);
        c.at_most(&format!("s{}_volume_residual", k.number()), vol, 1e-13);
    }

    let grid = logspace(1e-2, 1e2, 200);
    for (i, j) in [
        (Axis::X1, Axis::X2),
        (Axis::X1, Axis::X3),
        (Axis::X2, Axis::X3),
    ] {
        let si: Vec<Metric> = grid
            .iter()
            .map(|&t| sample_s(i, t).map(|s| s.m))
            .collect::<Result<_>>()?;
        let sj: Vec<Metric> = grid
            .iter()
            .map(|&t| sample_s(j, t).map(|s| s.m))
            .collect::<Result<_>>()?;
        let d = si
            .iter()
            .flat_map(|u| sj.iter().map(move |v| u.distance(v)))
            .fold(f64::INFINITY, f64::min);
        c.above(
            &format!("s{}_s{}_min_distance", i.number(), j.number()),
            d,
            0.0,
        );
    }

    let mut dev: f64 = 0.0;
    for q in logspace(0.05, 50.0, 200) {
        let m = sample_i(Axis::X3, q)?.m;
        for i in [Axis::X1, Axis::X2] {
            dev = dev.max((gamma(i, &m) - q.powi(-4)).abs() / (q * q + q.powi(-4)));
        }
    }
    c.at_most("gamma_i_on_I_k_scaled_error", dev, 1e-13);

    // A generic point of ΣS at a = 1/6 acquires mixed sectional curvature.
    let p = params(1.0 / 6.0)?;
    let m0 = normalize_to_sigma(&Metric::new(0.95, 0.92, 1.145)?);
    let tr = integrate_partial(&m0, &p, &IntegratorOptions::rk45(30.0).with_events(), tol)?;
    let n = count_events(&tr, |k| matches!(k, CrossingKind::GammaZero(_)));
    c.above("sectional_positivity_lost_events", n as f64, 0.0);
    Ok(())
}

fn theorem2(c: &mut Collector, p: &SpaceParams, seed: u64, tol: &Tolerances) -> Result<()> {
    let a = p.a;
    let ts = logspace(1e-4, a, 1000);
    for k in Axis::ALL {
        for (branch, tag) in [(Branch::TowardI, "i"), (Branch::TowardJ, "j")] {
            let mut res: f64 = 0.0;
            let mut vol: f64 = 0.0;
            for &t in &ts {
                let m = sample_r(k, branch, t, p, false)?.m;
                res = res.max(lambda(k, &m, p).abs());
                vol = vol.max((volume(&m) - 1.0).abs());
            }
            c.at_most(&format!("r{}{tag}_lambda_residual", k.number()), res, 1e-10);
            c.at_most(&format!("r{}{tag}_volume_residual", k.number()), vol, 1e-13);
        }
    }

    let mut pij_err: f64 = 0.0;
    let mut pij_lambda: f64 = 0.0;
    for k in Axis::ALL {
        let (i, j) = k.complement();
        for (branch, other) in [(Branch::TowardI, i), (Branch::TowardJ, j)] {
            let m = sample_r(k, branch, a, p, false)?.m;
            let want = intersection_p(k, other, p)?;
            pij_err = pij_err.max(m.distance(&want));
            pij_lambda = pij_lambda
                .max(lambda(k, &m, p).abs())
                .max(lambda(other, &m, p).abs());
        }
    }
    c.at_most("r_branch_end_is_pij", pij_err, 1e-12);
    c.at_most("pij_lambda_residual", pij_lambda, 1e-12);

    let roots = coincidence_roots(Axis::X1, p, 1e-15);
    c.equals("coincidence_root_count", roots.len(), 2);
    let root_err = if roots.len() == 2 {
        ((roots[0] - a) / a)
            .abs()
            .max(((roots[1] - 1.0 / a) * a).abs())
    } else {
        f64::NAN
    };
    c.at_most("coincidence_roots_relative_error", root_err, 1e-9);

    let mut ik_err: f64 = 0.0;
    let mut ik_min = f64::INFINITY;
    for q in logspace(0.05, 50.0, 200) {
        let m = sample_i(Axis::X3, q)?.m;
        let lk = lambda(Axis::X3, &m, p);
        let want = (1.0 - 2.0 * a) * q * q + a * q.powi(-4);
        ik_err = ik_err.max(((lk - want) / want).abs());
        ik_min = ik_min.min(lk);
        let li = (q.powi(3) - a) * q.powi(-4);
        ik_err = ik_err.max((lambda(Axis::X1, &m, p) - li).abs() / (q * q + q.powi(-4)));
    }
    c.at_most("lambda_on_I_k_relative_error", ik_err, 1e-12);
    c.above("lambda_k_on_I_k_min", ik_min, 0.0);

    let report = equilibria_in_regions(p, tol)?;
    let field = report
        .entries
        .iter()
        .map(|e| norm(vector_field_equal_a(&e.equilibrium.m, p)))
        .fold(0.0, f64::max);
    c.at_most("equilibria_field_norm", field, 1e-12);
    c.above("equilibria_min_lambda", report.min_lambda, 0.0);
    let quarter = (a - 0.25).abs() <= crate::equilibria::QUARTER_TOL;
    let expected_o0 = if quarter {
        EquilibriumKind::DegenerateLinearZero
    } else if a < 0.25 {
        EquilibriumKind::UnstableNode
    } else {
        EquilibriumKind::StableNode
    };
    let mut mismatches = usize::from(report.entries[0].equilibrium.kind != expected_o0);
    let kap = kappa(p);
    let q = kap.cbrt().recip();
    let mut gamma_err: f64 = 0.0;
    for (n, e) in report.entries.iter().enumerate().skip(1) {
        mismatches += usize::from(e.equilibrium.kind != EquilibriumKind::HyperbolicSaddle);
        let k = Axis::new(n)?;
        gamma_err =
            gamma_err.max((gamma(k, &e.equilibrium.m) - q * q * kap * (4.0 - 3.0 * kap)).abs());
        mismatches += usize::from(e.in_sigma_s != (a > 3.0 / 14.0 + 1e-12));
    }
    c.equals("equilibria_classification_mismatches", mismatches, 0);
    c.equals(
        "equilibria_count",
        report.entries.len(),
        if quarter { 1 } else { 4 },
    );
    c.at_most("gamma_at_saddles_error", gamma_err, 1e-12);

    if a > 1.0 / 6.0 + 1e-12 {
        // Positive Ricci curvature is preserved for a in (1/6, 1/2).
        let m0 = normalize_to_sigma(&Metric::new(0.9, 1.0, 1.2)?);
        let tr = integrate_partial(&m0, p, &IntegratorOptions::rk45(50.0).with_events(), tol)?;
        let n = count_events(&tr, |k| matches!(k, CrossingKind::LambdaZero(_)));
        c.equals("ricci_positivity_lost_events", n, 0);
    }
    if a > 0.25 + 1e-12 {
        let drift = first_integral_drift(p, 20, 100.0, seed, tol)?;
        c.at_most("first_integral_max_drift", drift, 1e-9);
    }
    Ok(())
}

/// Random points of Σ whose coordinates lie within a factor 1.25 of 1.
pub fn points_near_center(n: usize, seed: u64) -> Vec<Metric> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = 1.25f64.ln();
    (0..n)
        .map(|_| {
            let x = [0, 1, 2].map(|_| rng.gen_range(-r..=r).exp());
            normalize_to_sigma(&Metric::from_coords(x).expect("positive"))
        })
        .collect()
}

/// Largest `max_volume_drift` of RK45 trajectories (rel_tol 1e-10) over `t_end`.
pub fn first_integral_drift(
    p: &SpaceParams,
    n: usize,
    t_end: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<f64> {
    let opts = IntegratorOptions::rk45(t_end);
    let mut worst: f64 = 0.0;
    for m0 in points_near_center(n, seed) {
        worst = worst.max(integrate(&m0, p, &opts, tol)?.max_volume_drift);
    }
    Ok(worst)
}

fn inclusion(
    c: &mut Collector,
    p: &SpaceParams,
    cfg: &VerifyConfig,
    _tol: &Tolerances,
) -> Result<()> {
    let opts = InclusionOptions {
        n_random: cfg.n_random,
        seed: cfg.seed,
        ..InclusionOptions::default()
    };
    let r = verify_s_subset_r(p, &opts);
    c.equals("inclusion_violations", r.violation_count, 0);
    c.above("boundary_min_lambda", r.boundary_min_lambda, 0.0);
    c.above("p_nu_min", r.p_min, 0.0);
    c.above("negated_larger_p_nu_root", -r.p_roots.1, 0.0);
    for (i, j) in [
        (Axis::X1, Axis::X2),
        (Axis::X1, Axis::X3),
        (Axis::X2, Axis::X3),
    ] {
        let ci = cone_intersections(i, j, p)?;
        let tag = format!("{}{}", i.number(), j.number());
        c.at_most(
            &format!("lambda_line_{tag}_residual"),
            ci.lambda_line_max_residual,
            1e-12,
        );
        c.at_most(
            &format!("lambda_line_{tag}_pij_distance"),
            ci.lambda_line_pij_distance,
            1e-12,
        );
        c.above(
            &format!("gamma_cones_{tag}_separation"),
            ci.gamma_min_separation,
            1e-8,
        );
    }
    Ok(())
}

fn asymptotics(c: &mut Collector, p: &SpaceParams) -> Result<()> {
    let ts = logspace(1e-4, 1e-2, 30);
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mut s3 = Vec::new();
    let mut r1 = Vec::new();
    for &t in &ts {
        let exact = sample_s(Axis::X3, 1.0 / t)?.m;
        s3.push((asymptote_s3(t)?.x2() - exact.x2()).abs().ln());
        let exact = sample_r(Axis::X1, Branch::TowardI, t, p, false)?.m;
        r1.push((asymptote_r1(t, p)?.x3() - exact.x3()).abs().ln());
    }
    c.at_most(
        "s3_error_slope_deviation",
        (fit_slope(&lt, &s3) - 8.0 / 3.0).abs(),
        0.1,
    );
    c.at_most(
        "r1_error_slope_deviation",
        (fit_slope(&lt, &r1) - 5.0 / 3.0).abs(),
        0.1,
    );
    Ok(())
}

fn sine(u: [f64; 3], v: [f64; 3]) -> f64 {
    norm(cross(u, v)) / (norm(u) * norm(v))
}

fn kahler(c: &mut Collector, p: &SpaceParams, seed: u64, tol: &Tolerances) -> Result<()> {
    let q = 2f64.powf(-1.0 / 3.0);
    let o3 = Metric::new(q, q, 2f64.powf(2.0 / 3.0))?;
    c.at_most(
        "o3_on_l3",
        sample_l(Axis::X3, 1.0, p, false)?.m.distance(&o3),
        1e-14,
    );

    let mut res: f64 = 0.0;
    for k in Axis::ALL {
        let (i, j) = k.complement();
        for t in logspace(1e-2, 1e2, 1000) {
            let m = sample_l(k, t, p, false)?.m;
            res = res.max((m.get(k) - m.get(i) - m.get(j)).abs());
        }
    }
    c.at_most("l_curve_residual", res, 1e-12);

    // Printed identities use x1 = phi(t), x2 = t phi(t): our parameter 1/t.
    let equal_d = p.with_dimensions([1, 1, 1])?;
    let (mut f1_err, mut f1_reduced_err, mut ratio_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in logspace(1e-2, 1e2, 100) {
        if (t - 1.0).abs() < 1e-2 {
            continue;
        }
        let m = kahler_point(Axis::X3, 1.0 / t)?.m;
        let want = -2.0 / 9.0 * (2.0 * t + 1.0) * (t - 1.0) / (t * (t + 1.0));
        let g = vector_field_general(&m, &equal_d)?;
        let f = vector_field_equal_a(&m, p);
        f1_err = f1_err.max((g[0] - want).abs());
        f1_reduced_err = f1_reduced_err.max((f[0] - 3.0 * want).abs());
        let r21 = -t * (t + 2.0) / (2.0 * t + 1.0);
        let r31 = -(t * t - 1.0) / (2.0 * t + 1.0);
        for v in [f, g] {
            ratio_err = ratio_err
                .max((v[1] / v[0] - r21).abs())
                .max((v[2] / v[0] - r31).abs());
        }
    }
    c.at_most("l3_f1_normalized_flow_error", f1_err, 1e-11);
    c.at_most("l3_f1_reduced_field_error", f1_reduced_err, 3e-11);
    c.at_most("l3_ratio_identity_error", ratio_err, 1e-10);

    let report = equilibria_in_regions(p, tol)?;
    let e3 = &report.entries[3].equilibrium;
    let (stable_sine, unstable_sine) = match e3.eigenvectors {
        Some([s, u]) => (
            sine(s, [1.0, 1.0, -2.0 / q.powi(3)]),
            sine(u, [1.0, -1.0, 0.0]),
        ),
        None => (f64::NAN, f64::NAN),
    };
    c.at_most("o3_stable_direction_along_I3", stable_sine, 1e-8);
    c.at_most("o3_unstable_direction_along_l3", unstable_sine, 1e-8);

    let wall = kahler_wall_check(
        p,
        &KahlerWallOptions {
            seed,
            ..KahlerWallOptions::default()
        },
        tol,
    )?;
    c.equals("kahler_wall_exits", wall.exits, 0);
    c.above("kahler_wall_min_lambda", wall.min_lambda, 0.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [
            "all",
            "theorem1",
            "theorem2",
            "inclusion",
            "kahler",
            "asymptotics",
        ] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!("theorem3".parse::<Suite>().is_err());
    }

    #[test]
    fn kahler_suite_rejects_other_a() {
        let mut cfg = VerifyConfig::new(Suite::Kahler);
        cfg.a_values = Some(vec![0.2]);
        assert!(matches!(
            run(&cfg, &Tolerances::default()),
            Err(Error::KahlerOnlyAtOneSixth { .. })
        ));
    }

    #[test]
    fn theorem1_passes() {
        let r = run(&VerifyConfig::new(Suite::Theorem1), &Tolerances::default()).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
        assert!(r.passed, "{failed:#?}");
    }

    #[test]
    fn asymptotics_pass() {
        let r = run(
            &VerifyConfig::new(Suite::Asymptotics),
            &Tolerances::default(),
        )
        .unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
        assert!(r.passed, "{failed:#?}");
    }
}
