//! Singular points of the reduced flow on Σ and their linear type.

use num_complex::Complex64;
use serde::Serialize;

use crate::curvature::{cross, gammas, grad_volume, lambdas, norm};
use crate::error::{Error, Result};
use crate::flow::vector_field_equal_a;
use crate::metric::{Axis, Metric, SpaceParams, Tolerances};
use crate::regions::{in_sigma_r, in_sigma_s};

/// `kappa = (1 - 2a) / (2a)`.
pub fn kappa(p: &SpaceParams) -> f64 {
    (1.0 - 2.0 * p.a) / (2.0 * p.a)
}

/// Distance from 1/4 below which the three saddle families are merged into o0.
pub const QUARTER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumName {
    O0,
    O1,
    O2,
    O3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    StableNode,
    UnstableNode,
    HyperbolicSaddle,
    DegenerateLinearZero,
    /// Complex restricted spectrum; never expected for this system.
    Focus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Eigenvalue {
    fn from(z: Complex64) -> Self {
        Eigenvalue { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub name: EquilibriumName,
    pub m: Metric,
    /// Eigenvalues of the Jacobian restricted to the tangent plane of Σ,
    /// in increasing order of real part.
    pub restricted_eigenvalues: [Eigenvalue; 2],
    /// Unit eigenvectors in ambient coordinates, paired with the eigenvalues;
    /// absent for a complex spectrum.
    pub eigenvectors: Option<[[f64; 3]; 2]>,
    pub kind: EquilibriumKind,
}

/// All equilibria on Σ: `o0 = (1, 1, 1)` and `o_k`, the point with `q kappa` on
/// axis `k` and `q = kappa^(-1/3)` elsewhere. At `a = 1/4` only `o0` exists.
pub fn equilibrium_points(p: &SpaceParams) -> Vec<(EquilibriumName, Metric)> {
    let o0 = Metric::new(1.0, 1.0, 1.0).expect("positive");
    let mut out = vec![(EquilibriumName::O0, o0)];
    if (p.a - 0.25).abs() <= QUARTER_TOL {
        return out;
    }
    let k = kappa(p);
    let q = k.cbrt().recip();
    for (axis, name) in Axis::ALL.into_iter().zip([
        EquilibriumName::O1,
        EquilibriumName::O2,
        EquilibriumName::O3,
    ]) {
        out.push((name, Metric::assemble(axis, q * k, q, q).expect("positive")));
    }
    out
}

pub fn equilibria_on_sigma(p: &SpaceParams, tol: &Tolerances) -> Result<Vec<Equilibrium>> {
    equilibrium_points(p)
        .into_iter()
        .map(|(name, m)| classify_named(name, &m, p, tol))
        .collect()
}

/// Analytic Jacobian `J[r][c] = d f_r / d x_c` of the equal-a field.
pub fn jacobian(m: &Metric, p: &SpaceParams) -> [[f64; 3]; 3] {
    let a = p.a;
    let x = m.coords();
    let mut jac = [[0.0; 3]; 3];
    for i in Axis::ALL {
        let (j, k) = i.complement();
        let (xi, xj, xk) = (x[i.pos()], x[j.pos()], x[k.pos()]);
        let r = &mut jac[i.pos()];
        r[i.pos()] = 1.0 / xj + 1.0 / xk - 8.0 * a * xi / (xj * xk);
        for (d, o) in [(j, k), (k, j)] {
            let (xd, xo) = (x[d.pos()], x[o.pos()]);
            r[d.pos()] = -xi / (xd * xd)
                + 2.0 * a * (1.0 / xo - xo / (xd * xd) + 2.0 * xi * xi / (xd * xd * xo));
        }
    }
    jac
}

/// Orthonormal basis `(e1, e2)` of the plane orthogonal to `grad_volume(m)`.
pub fn tangent_basis(m: &Metric) -> [[f64; 3]; 2] {
    let g = grad_volume(m);
    let gn = norm(g);
    let n = g.map(|v| v / gn);
    // Seed with the coordinate axis least aligned with the normal.
    let mut seed = [0.0; 3];
    let least = (0..3)
        .min_by(|&u, &v| n[u].abs().total_cmp(&n[v].abs()))
        .expect("three entries");
    seed[least] = 1.0;
    let e1 = cross(n, seed);
    let l1 = norm(e1);
    let e1 = e1.map(|v| v / l1);
    let e2 = cross(n, e1);
    [e1, e2]
}

fn mat_vec(a: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| a[r][0] * v[0] + a[r][1] * v[1] + a[r][2] * v[2])
}

fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// `E^T J E` for the tangent basis `E` at `m`.
pub fn restricted_jacobian(m: &Metric, p: &SpaceParams) -> [[f64; 2]; 2] {
    let jac = jacobian(m, p);
    let e = tangent_basis(m);
    let je = [mat_vec(&jac, e[0]), mat_vec(&jac, e[1])];
    [
        [dot(e[0], je[0]), dot(e[0], je[1])],
        [dot(e[1], je[0]), dot(e[1], je[1])],
    ]
}

fn eigen2(b: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let half_tr = 0.5 * (b[0][0] + b[1][1]);
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let disc = Complex64::new(half_tr * half_tr - det, 0.0).sqrt();
    let mut ev = [half_tr - disc, half_tr + disc];
    ev.sort_by(|u, v| u.re.total_cmp(&v.re));
    ev
}

/// Real eigenvector of the 2x2 matrix `b` for the real eigenvalue `l`.
fn eigvec2(b: &[[f64; 2]; 2], l: f64) -> [f64; 2] {
    let c1 = [b[0][1], l - b[0][0]];
    let c2 = [l - b[1][1], b[1][0]];
    let n1 = c1[0].hypot(c1[1]);
    let n2 = c2[0].hypot(c2[1]);
    if n1.max(n2) == 0.0 {
        // b is a multiple of the identity; every vector is an eigenvector.
        return [1.0, 0.0];
    }
    let (c, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    [c[0] / n, c[1] / n]
}

fn name_of(m: &Metric) -> EquilibriumName {
    let x = m.coords();
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-8 * u.abs().max(v.abs());
    match (close(x[0], x[1]), close(x[1], x[2]), close(x[0], x[2])) {
        (true, true, _) => EquilibriumName::O0,
        (true, false, _) => EquilibriumName::O3,
        (false, true, _) => EquilibriumName::O1,
        _ => EquilibriumName::O2,
    }
}

/// Linear type of an equilibrium on Σ from the spectrum of the restricted
/// Jacobian. Fails with `NotAnEquilibrium` if the field norm exceeds 1e-10.
pub fn classify_on_sigma(m: &Metric, p: &SpaceParams, tol: &Tolerances) -> Result<Equilibrium> {
    classify_named(name_of(m), m, p, tol)
}

fn classify_named(
    name: EquilibriumName,
    m: &Metric,
    p: &SpaceParams,
    tol: &Tolerances,
) -> Result<Equilibrium> {
    let f = norm(vector_field_equal_a(m, p));
    if f > 1e-10 || !f.is_finite() {
        return Err(Error::NotAnEquilibrium { norm: f });
    }
    let b = restricted_jacobian(m, p);
    let ev = eigen2(&b);
    let eps = tol.eig_tol;
    let kind = if ev.iter().any(|z| z.norm() <= eps) {
        EquilibriumKind::DegenerateLinearZero
    } else if ev[0].im.abs() > eps {
        EquilibriumKind::Focus
    } else if ev[1].re < 0.0 {
        EquilibriumKind::StableNode
    } else if ev[0].re > 0.0 {
        EquilibriumKind::UnstableNode
    } else {
        EquilibriumKind::HyperbolicSaddle
    };
    let eigenvectors = (kind != EquilibriumKind::Focus).then(|| {
        let e = tangent_basis(m);
        ev.map(|z| {
            let v = eigvec2(&b, z.re);
            [0, 1, 2].map(|n| v[0] * e[0][n] + v[1] * e[1][n])
        })
    });
    let mut restricted_eigenvalues = ev.map(Eigenvalue::from);
    if kind != EquilibriumKind::Focus {
        for z in &mut restricted_eigenvalues {
            z.im = 0.0;
        }
    }
    Ok(Equilibrium {
        name,
        m: *m,
        restricted_eigenvalues,
        eigenvectors,
        kind,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumEntry {
    #[serde(flatten)]
    pub equilibrium: Equilibrium,
    pub gamma: [f64; 3],
    pub lambda: [f64; 3],
    pub in_sigma_s: bool,
    pub in_sigma_r: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriaReport {
    pub a: f64,
    pub kappa: f64,
    pub entries: Vec<EquilibriumEntry>,
    pub min_lambda: f64,
    pub all_in_sigma_r: bool,
}

/// Equilibria with their curvature functionals and region membership.
pub fn equilibria_in_regions(p: &SpaceParams, tol: &Tolerances) -> Result<EquilibriaReport> {
    let entries: Vec<EquilibriumEntry> = equilibria_on_sigma(p, tol)?
        .into_iter()
        .map(|e| EquilibriumEntry {
            gamma: gammas(&e.m),
            lambda: lambdas(&e.m, p),
            in_sigma_s: in_sigma_s(&e.m, tol.sigma_tol),
            in_sigma_r: in_sigma_r(&e.m, p, tol.sigma_tol),
            equilibrium: e,
        })
        .collect();
    let min_lambda = entries
        .iter()
        .flat_map(|e| e.lambda)
        .fold(f64::INFINITY, f64::min);
    Ok(EquilibriaReport {
        a: p.a,
        kappa: kappa(p),
        all_in_sigma_r: entries.iter().all(|e| e.in_sigma_r),
        min_lambda,
        entries,
    })
}
