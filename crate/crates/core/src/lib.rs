//! Risk of the constrained least-squares (projection) estimator in the
//! Gaussian sequence model `Y = θ* + σZ` over compact convex polytopes.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`gaussfn`]: normal pdf/cdf, Owen's T-function and the Gaussian
//!   integral identities the closed-form risks are assembled from.
//! * [`geometry`]: vertex-represented polytopes, Euclidean projections,
//!   exposed faces, tangent and normal cones.
//! * [`exact_risk`]: closed-form risks for the segment/triangle example.
//! * [`asymptotics`]: vanishing-noise risk via statistical dimension and
//!   diverging-noise risk via vertex selection, worst-case envelopes.
//! * [`montecarlo`]: seeded, reproducibly parallel risk estimation.

pub mod asymptotics;
pub mod error;
pub mod exact_risk;
pub mod gaussfn;
pub mod geometry;
pub mod montecarlo;

pub use error::{Error, Result};
