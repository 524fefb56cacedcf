//! Phase-space laboratory for helicoidal surfaces whose mean curvature is a
//! prescribed function `h` of the angle function `nu`.
//!
//! A helicoidal surface `Psi(s, theta) = (x cos theta, x sin theta, z + c0 theta)`
//! is generated by an arclength profile `(x(s), z(s))`. Writing `x' = cos phi`
//! and `z' = sin phi`, the condition `H = h(nu)` becomes a smooth first order
//! system in `(x, z, phi)`, whose projection `(x, y = x')` is the phase plane.

// `!(a < b)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod export;
pub mod geometry;
pub mod ode;
pub mod orbit;
pub mod phase;
pub mod prescription;
pub mod verify;

pub use geometry::{HelicoidMesh, ProfileCurve, SurfaceLabel};
pub use orbit::{CurveState, Orbit, OrbitClass, OrbitEvent};
pub use phase::{NullclineCurve, Orientation, PhaseModel, PhasePoint};
pub use prescription::{parse_h, profile_of, HFunction, HProfile};
