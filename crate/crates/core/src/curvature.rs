//! Curvature functionals of invariant metrics.
//!
//! `gamma(k, m)` are the quadratic forms whose simultaneous positivity
//! characterizes positive sectional curvature on the Wallach spaces
//! (a = 1/6, 1/8, 1/9); `lambda(k, m, p)` do the same for positive Ricci
//! curvature on every generalized Wallach space with equal parameters.
//!
//! Both are homogeneous of degree two, so every sign statement below is
//! invariant under `m -> c m`.

use serde::Serialize;

use crate::error::Result;
use crate::metric::{Axis, Metric, SpaceParams, Tolerances};

/// `(x_j - x_k)^2 + 2 x_i (x_j + x_k) - 3 x_i^2` with `i = k` the distinguished index.
#[inline]
pub fn gamma(k: Axis, m: &Metric) -> f64 {
    let (j, l) = k.complement();
    let (xi, xj, xk) = (m.get(k), m.get(j), m.get(l));
    (xj - xk).powi(2) + 2.0 * xi * (xj + xk) - 3.0 * xi * xi
}

/// `x_j x_k + a (x_i^2 - x_j^2 - x_k^2)` with `i = k` the distinguished index.
#[inline]
pub fn lambda(k: Axis, m: &Metric, p: &SpaceParams) -> f64 {
    let (j, l) = k.complement();
    let (xi, xj, xk) = (m.get(k), m.get(j), m.get(l));
    xj * xk + p.a * (xi * xi - xj * xj - xk * xk)
}

pub fn gammas(m: &Metric) -> [f64; 3] {
    Axis::ALL.map(|k| gamma(k, m))
}

pub fn lambdas(m: &Metric, p: &SpaceParams) -> [f64; 3] {
    Axis::ALL.map(|k| lambda(k, m, p))
}

/// Principal Ricci curvature `r_k` of the metric on module `k`.
///
/// Uses the per-index parameter `a_k` when the space carries one. With a
/// common `a` this satisfies `2 V r_k = lambda(k, m, p)`.
pub fn principal_ricci(k: Axis, m: &Metric, p: &SpaceParams) -> f64 {
    let (j, l) = k.complement();
    let (xi, xj, xk) = (m.get(k), m.get(j), m.get(l));
    let ak = p.a_at(k);
    0.5 / xi + 0.5 * ak * (xi / (xj * xk) - xk / (xi * xj) - xj / (xi * xk))
}

/// `S = d1 r1 + d2 r2 + d3 r3`.
pub fn scalar_curvature(m: &Metric, p: &SpaceParams) -> Result<f64> {
    let d = p.dimensions()?;
    Ok(Axis::ALL
        .iter()
        .map(|&k| d[k.pos()] as f64 * principal_ricci(k, m, p))
        .sum())
}

/// Analytic gradient of `gamma(k, .)`.
pub fn grad_gamma(k: Axis, m: &Metric) -> [f64; 3] {
    let (j, l) = k.complement();
    let (xi, xj, xk) = (m.get(k), m.get(j), m.get(l));
    let mut g = [0.0; 3];
    g[k.pos()] = 2.0 * (-3.0 * xi + xj + xk);
    g[j.pos()] = 2.0 * (xi + xj - xk);
    g[l.pos()] = 2.0 * (xi + xk - xj);
    g
}

/// Analytic gradient of `lambda(k, ., p)`.
pub fn grad_lambda(k: Axis, m: &Metric, p: &SpaceParams) -> [f64; 3] {
    let (j, l) = k.complement();
    let a = p.a;
    let mut g = [0.0; 3];
    g[k.pos()] = 2.0 * a * m.get(k);
    g[j.pos()] = m.get(l) - 2.0 * a * m.get(j);
    g[l.pos()] = m.get(j) - 2.0 * a * m.get(l);
    g
}

/// `(x2 x3, x1 x3, x1 x2)`; on the unit-volume surface this is `(1/x1, 1/x2, 1/x3)`.
pub fn grad_volume(m: &Metric) -> [f64; 3] {
    let [x1, x2, x3] = m.coords();
    [x2 * x3, x1 * x3, x1 * x2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureLabel {
    /// All `gamma_i > 0` (and hence all `lambda_i > 0`).
    PositiveSectional,
    /// All `lambda_i > 0` but some `gamma_i < 0`.
    PositiveRicciOnly,
    /// Some `lambda_i < 0`.
    MixedRicci,
    /// Some `|gamma_i|` or `|lambda_i|` within the boundary tolerance.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSigns {
    pub gamma: [f64; 3],
    pub lambda: [f64; 3],
    pub sec_positive: bool,
    pub ricci_positive: bool,
    pub label: CurvatureLabel,
}

pub fn classify(m: &Metric, p: &SpaceParams, tol: &Tolerances) -> CurvatureSigns {
    let gamma = gammas(m);
    let lambda = lambdas(m, p);
    let min = |v: &[f64; 3]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let min_abs = |v: &[f64; 3]| v.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let sec_positive = min(&gamma) > 0.0;
    let ricci_positive = min(&lambda) > 0.0;
    let label = if min_abs(&gamma) <= tol.boundary_tol || min_abs(&lambda) <= tol.boundary_tol {
        CurvatureLabel::Boundary
    } else if sec_positive {
        CurvatureLabel::PositiveSectional
    } else if ricci_positive {
        CurvatureLabel::PositiveRicciOnly
    } else {
        CurvatureLabel::MixedRicci
    };
    CurvatureSigns {
        gamma,
        lambda,
        sec_positive,
        ricci_positive,
        label,
    }
}

pub(crate) fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub(crate) fn norm(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::volume;

    fn m(x1: f64, x2: f64, x3: f64) -> Metric {
        Metric::new(x1, x2, x3).unwrap()
    }

    fn sixth() -> SpaceParams {
        SpaceParams::new(1.0 / 6.0).unwrap()
    }

    const P0: f64 = 0.908_560_296_416_069_8;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(Axis::X1, &m(1.0, 1.0, 1.0)), 1.0);
        assert_eq!(gamma(Axis::X1, &m(1.0, 2.0, 3.0)), 8.0);
        let p0 = 6f64.cbrt() / 2.0;
        assert!((p0 - P0).abs() < 1e-15);
        assert!(gamma(Axis::X3, &m(p0, p0, p0.powi(-2))).abs() < 1e-14);
    }

    #[test]
    fn lambda_examples() {
        let p = sixth();
        for k in Axis::ALL {
            assert!((lambda(k, &m(1.0, 1.0, 1.0), &p) - 5.0 / 6.0).abs() < 1e-15);
            assert!((lambda(k, &m(2.0, 1.0, 1.0), &p) - 4.0 / 3.0).abs() < 1e-15);
        }
        let c = (1.0f64 / 6.0).cbrt();
        let pij = m(c, c, c.powi(-2));
        assert!(lambda(Axis::X1, &pij, &p).abs() < 1e-14);
        assert!(lambda(Axis::X2, &pij, &p).abs() < 1e-14);
    }

    #[test]
    fn principal_ricci_identity_examples() {
        let p = sixth();
        assert!((principal_ricci(Axis::X1, &m(1.0, 1.0, 1.0), &p) - 5.0 / 12.0).abs() < 1e-15);
        let q = SpaceParams::new(0.2).unwrap();
        let x = m(2.0, 3.0, 4.0);
        let r = principal_ricci(Axis::X1, &x, &q);
        assert!((r - lambda(Axis::X1, &x, &q) / 48.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_curvature_examples() {
        let p = sixth().with_dimensions([2, 2, 2]).unwrap();
        assert!((scalar_curvature(&m(1.0, 1.0, 1.0), &p).unwrap() - 2.5).abs() < 1e-15);
        let q = SpaceParams::new(0.3)
            .unwrap()
            .with_dimensions([1, 1, 1])
            .unwrap();
        let r = principal_ricci(Axis::X1, &m(1.0, 1.0, 1.0), &q);
        assert!((scalar_curvature(&m(1.0, 1.0, 1.0), &q).unwrap() - 3.0 * r).abs() < 1e-15);
        assert_eq!(
            scalar_curvature(&m(1.0, 1.0, 1.0), &sixth()),
            Err(crate::Error::MissingDimensions)
        );
    }

    #[test]
    fn gradient_examples() {
        // The transversality argument uses half the gradient of gamma; the
        // direction is what matters there.
        assert_eq!(grad_gamma(Axis::X1, &m(1.0, 1.0, 1.0)), [-2.0, 2.0, 2.0]);
        assert_eq!(grad_gamma(Axis::X1, &m(1.0, 2.0, 3.0))[0], 4.0);
        let g = grad_lambda(Axis::X3, &m(1.0, 1.0, 1.0), &sixth());
        for (got, want) in g.iter().zip([2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let c = (1.0f64 / 6.0).cbrt();
        let g = grad_lambda(Axis::X1, &m(c, c, c.powi(-2)), &sixth());
        assert!(g[0] > 0.0);
        assert_eq!(grad_volume(&m(2.0, 3.0, 4.0)), [12.0, 8.0, 6.0]);
        assert_eq!(grad_volume(&m(0.5, 2.0, 1.0)), [2.0, 0.5, 1.0]);
    }

    #[test]
    fn classify_examples() {
        let tol = Tolerances::default();
        let s = classify(&m(1.0, 1.0, 1.0), &sixth(), &tol);
        assert_eq!(s.label, CurvatureLabel::PositiveSectional);
        assert_eq!(s.gamma, [1.0; 3]);
        let s = classify(&m(P0, P0, P0.powi(-2)), &sixth(), &tol);
        assert_eq!(s.label, CurvatureLabel::Boundary);
        let s = classify(&m(1.0, 1.0, 10.0), &sixth(), &tol);
        assert_eq!(s.label, CurvatureLabel::MixedRicci);
        assert!(s.lambda[2] > 0.0 && s.lambda[0] < 0.0);
        assert!(!s.ricci_positive);
    }

    #[test]
    fn ricci_only_label() {
        // o3 at a = 1/6: positive Ricci, gamma_3 < 0.
        let q = 2f64.powf(-1.0 / 3.0);
        let s = classify(&m(q, q, 2.0 * q), &sixth(), &Tolerances::default());
        assert_eq!(s.label, CurvatureLabel::PositiveRicciOnly);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn metric() -> impl Strategy<Value = Metric> {
            (0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0).prop_map(|(a, b, c)| m(a, b, c))
        }

        fn axis() -> impl Strategy<Value = Axis> {
            prop_oneof![Just(Axis::X1), Just(Axis::X2), Just(Axis::X3)]
        }

        fn central_difference(f: impl Fn(&Metric) -> f64, x: &Metric) -> [f64; 3] {
            let h = 1e-6;
            let mut g = [0.0; 3];
            for (n, gn) in g.iter_mut().enumerate() {
                let mut up = x.coords();
                let mut dn = x.coords();
                up[n] += h;
                dn[n] -= h;
                *gn = (f(&Metric::from_coords(up).unwrap()) - f(&Metric::from_coords(dn).unwrap()))
                    / (2.0 * h);
            }
            g
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn ricci_identity(x in metric(), k in axis(), a in 0.01f64..0.49) {
                let p = SpaceParams::new(a).unwrap();
                let lhs = 2.0 * volume(&x) * principal_ricci(k, &x, &p);
                let rhs = lambda(k, &x, &p);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
            }

            #[test]
            fn gradients_match_finite_differences(x in metric(), k in axis(), a in 0.01f64..0.49) {
                let p = SpaceParams::new(a).unwrap();
                let tol = Tolerances::default().grad_fd_tol;
                let fd = central_difference(|y| gamma(k, y), &x);
                for (g, f) in grad_gamma(k, &x).iter().zip(fd) {
                    prop_assert!((g - f).abs() <= tol * g.abs().max(1.0));
                }
                let fd = central_difference(|y| lambda(k, y, &p), &x);
                for (g, f) in grad_lambda(k, &x, &p).iter().zip(fd) {
                    prop_assert!((g - f).abs() <= tol * g.abs().max(1.0));
                }
                let fd = central_difference(volume, &x);
                for (g, f) in grad_volume(&x).iter().zip(fd) {
                    prop_assert!((g - f).abs() <= tol * g.abs().max(1.0));
                }
            }

            #[test]
            fn transposition_symmetry(x in metric(), k in axis(), a in 0.01f64..0.49) {
                let p = SpaceParams::new(a).unwrap();
                let (i, j) = k.complement();
                let mut perm = [0, 1, 2];
                perm.swap(i.pos(), j.pos());
                let y = x.permuted(perm);
                let scale = x.coords().iter().map(|v| v * v).sum::<f64>();
                prop_assert!((gamma(k, &x) - gamma(k, &y)).abs() <= 1e-14 * scale);
                prop_assert!((lambda(k, &x, &p) - lambda(k, &y, &p)).abs() <= 1e-14 * scale);
            }

            #[test]
            fn homogeneity_and_scale_invariant_labels(x in metric(), k in axis(), a in 0.01f64..0.49) {
                let p = SpaceParams::new(a).unwrap();
                let tol = Tolerances::default();
                let base = classify(&x, &p, &tol);
                for c in [0.1, 1.0, 10.0] {
                    let y = x.scaled(c).unwrap();
                    let g = gamma(k, &y);
                    prop_assert!((g - c * c * gamma(k, &x)).abs() <= 1e-12 * c * c * 100.0);
                    let l = lambda(k, &y, &p);
                    prop_assert!((l - c * c * lambda(k, &x, &p)).abs() <= 1e-12 * c * c * 100.0);
                    let s = classify(&y, &p, &tol);
                    // Labels agree unless a value sits at the boundary tolerance scale.
                    let margin = base.gamma.iter().chain(&base.lambda)
                        .map(|v| v.abs()).fold(f64::INFINITY, f64::min);
                    if margin > 1e-6 {
                        prop_assert_eq!(s.label, base.label);
                    }
                }
            }

            #[test]
            fn sectional_implies_ricci(x in metric(), a in 0.01f64..0.49) {
                let p = SpaceParams::new(a).unwrap();
                let s = classify(&x, &p, &Tolerances::default());
                prop_assert!(!s.sec_positive || s.ricci_positive);
            }

            #[test]
            fn normals_are_independent_off_diagonal(x in metric(), k in axis(), a in 0.01f64..0.49) {
                prop_assume!(x.generic(1e-3));
                let p = SpaceParams::new(a).unwrap();
                let nv = grad_volume(&x);
                prop_assert!(norm(cross(nv, grad_gamma(k, &x))) > 0.0);
                prop_assert!(norm(cross(nv, grad_lambda(k, &x, &p))) > 0.0);
            }
        }
    }
}
