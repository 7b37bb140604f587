//! Curvature, Ricci flow and invariant curves on generalized Wallach spaces
//! with equal parameters `a_1 = a_2 = a_3 = a`.

pub mod curvature;
pub mod curves;
pub mod equilibria;
pub mod error;
pub mod flow;
pub mod metric;
pub mod numeric;
pub mod regions;
pub mod verify;

pub use curvature::{classify, CurvatureLabel, CurvatureSigns};
pub use curves::{Branch, CurveFamily, CurveId, CurveSample, SampleFlags};
pub use equilibria::{EquilibriaReport, Equilibrium, EquilibriumKind, EquilibriumName};
pub use error::{Error, FlowError, Result};
pub use flow::{
    integrate, CrossingEvent, CrossingKind, IntegratorOptions, Method, Sample, Trajectory,
};
pub use metric::{
    normalize_to_sigma, validate_metric, volume, Axis, Metric, SpaceParams, Tolerances,
};
pub use verify::{Suite, VerifyConfig, VerifyReport};
