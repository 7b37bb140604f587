//! Shared domain types: invariant metrics, space parameters and the tolerance
//! policy threaded through every other module.
//!
//! An invariant metric on a generalized Wallach space is the diagonal scaling
//! `(x1, x2, x3)` of a fixed bi-invariant inner product on the three isotropy
//! modules. The unit-volume surface `x1 x2 x3 = 1` (called Σ below) is
//! invariant under the normalized Ricci flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three coordinate indices, 1-based in its public face.
///
/// Index-parametrized operations take a distinguished axis `k`; the other
/// two indices are returned by [`Axis::complement`] in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    /// Builds an axis from a 1-based index.
    pub fn new(index: usize) -> Result<Axis> {
        match index {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            _ => Err(Error::Domain(format!("index {index} is not in 1..=3"))),
        }
    }

    /// 0-based position in a coordinate array.
    #[inline]
    pub fn pos(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// 1-based index.
    #[inline]
    pub fn number(self) -> usize {
        self.pos() + 1
    }

    /// The two remaining axes in increasing order.
    #[inline]
    pub fn complement(self) -> (Axis, Axis) {
        match self {
            Axis::X1 => (Axis::X2, Axis::X3),
            Axis::X2 => (Axis::X1, Axis::X3),
            Axis::X3 => (Axis::X1, Axis::X2),
        }
    }

    /// The axis that is neither `self` nor `other`. Panics if they coincide.
    pub fn third(self, other: Axis) -> Axis {
        assert_ne!(self, other, "third() needs two distinct axes");
        Axis::ALL
            .into_iter()
            .find(|&a| a != self && a != other)
            .unwrap()
    }
}

/// A diagonal invariant metric `(x1, x2, x3)` with strictly positive entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Metric {
    x: [f64; 3],
}

impl Metric {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Metric> {
        Metric::from_coords([x1, x2, x3])
    }

    pub fn from_coords(x: [f64; 3]) -> Result<Metric> {
        for (i, &v) in x.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveCoordinate(i + 1));
            }
        }
        Ok(Metric { x })
    }

    /// Places `distinguished` on axis `k` and `first`, `second` on the
    /// complement of `k` in increasing index order.
    pub fn assemble(k: Axis, distinguished: f64, first: f64, second: f64) -> Result<Metric> {
        let (i, j) = k.complement();
        let mut x = [0.0; 3];
        x[k.pos()] = distinguished;
        x[i.pos()] = first;
        x[j.pos()] = second;
        Metric::from_coords(x)
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        self.x
    }

    #[inline]
    pub fn get(&self, axis: Axis) -> f64 {
        self.x[axis.pos()]
    }

    pub fn x1(&self) -> f64 {
        self.x[0]
    }

    pub fn x2(&self) -> f64 {
        self.x[1]
    }

    pub fn x3(&self) -> f64 {
        self.x[2]
    }

    /// `c * m` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Metric> {
        Metric::from_coords(self.x.map(|v| v * c))
    }

    /// Coordinates reordered so that entry `n` of the result is entry `perm[n]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Metric {
        Metric {
            x: [self.x[perm[0]], self.x[perm[1]], self.x[perm[2]]],
        }
    }

    pub fn on_sigma(&self, tol: f64) -> bool {
        (volume(self) - 1.0).abs() <= tol
    }

    /// True when all three coordinates are pairwise distinct beyond `tol`.
    pub fn generic(&self, tol: f64) -> bool {
        let [a, b, c] = self.x;
        (a - b).abs() > tol && (b - c).abs() > tol && (a - c).abs() > tol
    }

    pub fn distance(&self, other: &Metric) -> f64 {
        let d: f64 = (0..3).map(|n| (self.x[n] - other.x[n]).powi(2)).sum();
        d.sqrt()
    }
}

/// Validates `(x1, x2, x3)` as a metric.
pub fn validate_metric(x1: f64, x2: f64, x3: f64) -> Result<Metric> {
    Metric::new(x1, x2, x3)
}

/// `V = x1 x2 x3`, the first integral of the reduced flow.
#[inline]
pub fn volume(m: &Metric) -> f64 {
    m.x[0] * m.x[1] * m.x[2]
}

/// Rescales `m` onto the unit-volume surface.
pub fn normalize_to_sigma(m: &Metric) -> Metric {
    let s = volume(m).cbrt();
    Metric {
        x: m.x.map(|v| v / s),
    }
}

/// Parameters of a generalized Wallach space.
///
/// `a` is the common value used by the reduced flow and the region
/// predicates. `a_i` (per-index values) and `d` (module dimensions) are only
/// consulted by the principal Ricci curvatures, the scalar curvature and the
/// general diagonal flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_i: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<[u32; 3]>,
}

impl SpaceParams {
    /// Equal-parameter space, `a` in the open interval (0, 1/2).
    pub fn new(a: f64) -> Result<SpaceParams> {
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::InvalidParams(format!("a = {a} is not in (0, 1/2)")));
        }
        Ok(SpaceParams {
            a,
            a_i: None,
            d: None,
        })
    }

    pub fn with_dimensions(mut self, d: [u32; 3]) -> Result<SpaceParams> {
        if d.contains(&0) {
            return Err(Error::InvalidParams(
                "module dimensions must be >= 1".into(),
            ));
        }
        self.d = Some(d);
        Ok(self)
    }

    pub fn with_a_i(mut self, a_i: [f64; 3]) -> Result<SpaceParams> {
        if a_i.iter().any(|&v| !(v > 0.0 && v <= 0.5)) {
            return Err(Error::InvalidParams(format!(
                "a_i = {a_i:?} not all in (0, 1/2]"
            )));
        }
        self.a_i = Some(a_i);
        Ok(self)
    }

    /// Per-index parameter, falling back to the common `a`.
    #[inline]
    pub fn a_at(&self, k: Axis) -> f64 {
        self.a_i.map_or(self.a, |v| v[k.pos()])
    }

    pub fn dimensions(&self) -> Result<[u32; 3]> {
        self.d.ok_or(Error::MissingDimensions)
    }
}

/// Central tolerance policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub sigma_tol: f64,
    pub root_tol: f64,
    pub eig_tol: f64,
    pub grad_fd_tol: f64,
    /// `|gamma_i|` or `|lambda_i|` at or below this value classifies a metric as boundary.
    pub boundary_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sigma_tol: 1e-10,
            root_tol: 1e-12,
            eig_tol: 1e-9,
            grad_fd_tol: 1e-6,
            boundary_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sigma_tol,
            self.root_tol,
            self.eig_tol,
            self.grad_fd_tol,
            self.boundary_tol,
        ];
        if all.iter().all(|&v| v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                "tolerances must be strictly positive".into(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_identity() {
        let m = validate_metric(1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.coords(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn validate_rejects_zero_with_index() {
        assert_eq!(
            validate_metric(1.0, 0.0, 2.0),
            Err(Error::NonPositiveCoordinate(2))
        );
        assert_eq!(
            validate_metric(-1.0, 1.0, 2.0),
            Err(Error::NonPositiveCoordinate(1))
        );
        assert_eq!(
            validate_metric(1.0, 1.0, f64::NAN),
            Err(Error::NonPositiveCoordinate(3))
        );
    }

    #[test]
    fn product_one_is_on_sigma() {
        let m = validate_metric(0.5, 2.0, 1.0).unwrap();
        assert!(m.on_sigma(1e-10));
    }

    #[test]
    fn volumes() {
        assert_eq!(volume(&Metric::new(1.0, 1.0, 1.0).unwrap()), 1.0);
        assert_eq!(volume(&Metric::new(2.0, 3.0, 4.0).unwrap()), 24.0);
        let o3 = Metric::new(
            2f64.powf(-1.0 / 3.0),
            2f64.powf(-1.0 / 3.0),
            2f64.powf(2.0 / 3.0),
        )
        .unwrap();
        assert!((volume(&o3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_examples() {
        let n = normalize_to_sigma(&Metric::new(2.0, 2.0, 2.0).unwrap());
        assert_eq!(n.coords(), [1.0, 1.0, 1.0]);
        let n = normalize_to_sigma(&Metric::new(1.0, 1.0, 1.0).unwrap());
        assert_eq!(n.coords(), [1.0, 1.0, 1.0]);
        let n = normalize_to_sigma(&Metric::new(3.0, 4.0, 5.0).unwrap());
        let s = 60f64.cbrt();
        for (got, want) in n.coords().iter().zip([3.0 / s, 4.0 / s, 5.0 / s]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((volume(&n) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_is_increasing() {
        assert_eq!(Axis::X1.complement(), (Axis::X2, Axis::X3));
        assert_eq!(Axis::X2.complement(), (Axis::X1, Axis::X3));
        assert_eq!(Axis::X3.complement(), (Axis::X1, Axis::X2));
        assert_eq!(Axis::X1.third(Axis::X3), Axis::X2);
        assert!(Axis::new(4).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SpaceParams::new(0.5).is_err());
        assert!(SpaceParams::new(0.0).is_err());
        assert!(SpaceParams::new(0.2)
            .unwrap()
            .with_dimensions([1, 0, 2])
            .is_err());
        assert!(SpaceParams::new(0.2)
            .unwrap()
            .with_a_i([0.5, 0.2, 0.1])
            .is_ok());
        assert_eq!(
            SpaceParams::new(0.2).unwrap().dimensions(),
            Err(Error::MissingDimensions)
        );
        assert!(Tolerances::default().validate().is_ok());
    }

    #[test]
    fn generic_predicate() {
        assert!(Metric::new(1.0, 2.0, 3.0).unwrap().generic(1e-12));
        assert!(!Metric::new(1.0, 1.0, 3.0).unwrap().generic(1e-12));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalized_volume_is_one(x in 1e-3f64..1e3, y in 1e-3f64..1e3, z in 1e-3f64..1e3) {
                let m = Metric::new(x, y, z).unwrap();
                let n = normalize_to_sigma(&m);
                prop_assert!((volume(&n) - 1.0).abs() <= 1e-13);
                let nn = normalize_to_sigma(&n);
                for (a, b) in n.coords().iter().zip(nn.coords()) {
                    prop_assert!((a - b).abs() <= 1e-13 * a.max(1.0));
                }
            }
        }
    }
}
