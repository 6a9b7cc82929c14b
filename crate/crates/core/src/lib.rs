//! qflab-core: a numerical laboratory for the dynamics of maps whose modulus
//! grows so fast that orbits leave every floating-point range within a few
//! iterations.
//!
//! The crate is organised around five building blocks:
//!
//! * [`loggrowth`] — arithmetic on magnitudes stored as natural logarithms
//!   ([`loggrowth::LogMag`]) and the piecewise-linear growth profile that
//!   drives the radial model map.
//! * [`maps`] — the map families under study (radial model, entire product,
//!   three-dimensional beam map), maximum-modulus estimation and ring
//!   containment checks.
//! * [`escape`] — orbit computation, the maximum-modulus ladder and the
//!   classification of orbits as fast escaping / escaping / bounded so far.
//! * [`topology`] — voxel-grid connectivity: component labelling, topological
//!   hulls, surrounds relations and the nested-web detector.
//! * [`analysis`] — drivers that combine the above into engulfing
//!   certificates, wandering-ring reports and modulus-of-continuity bounds.
//!
//! All numeric kernels are generic over the scalar type through [`real::Real`]
//! (implemented for `f32` and `f64`). The aliases exported at the crate root
//! fix the scalar to `f64`, which is what the command-line driver and the
//! stated tolerances assume; `f32` instantiations work for small knot indices
//! but overflow the exponent range sooner.

// Validation uses `!(x > bound)` deliberately: unlike `x <= bound`, the
// negated form also rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod escape;
pub mod loggrowth;
pub mod maps;
pub mod real;
pub mod topology;

pub use real::Real;

/// Natural-log-scale magnitude with `f64` exponent.
pub type LogMag = loggrowth::LogMag<f64>;
/// Piecewise-linear growth profile with `f64` knots.
pub type GrowthProfile = loggrowth::GrowthProfile<f64>;
/// Exceptional-set view over an `f64` profile.
pub type ExceptionalSet<'a> = loggrowth::ExceptionalSet<'a, f64>;
/// Point in `R^d` with `f64` coordinates.
pub type Point = maps::Point<f64>;
/// Map family with `f64` parameters.
pub type MapFamily = maps::MapFamily<f64>;
/// Maximum-modulus ladder with `f64` levels.
pub type Ladder = escape::Ladder<f64>;
/// Orbit record with `f64` radii.
pub type OrbitRecord = escape::OrbitRecord<f64>;
/// Voxel grid geometry with `f64` coordinates.
pub type GridSpec = topology::GridSpec<f64>;
/// Voxel mask over an `f64` grid.
pub type CellMask = topology::CellMask<f64>;
/// Modulus-of-continuity estimate with `f64` scalars.
pub type MuEstimate = analysis::MuEstimate<f64>;
/// Engulfing certificate with `f64` scalars.
pub type CertificateReport = analysis::CertificateReport<f64>;
/// Wandering-ring report with `f64` scalars.
pub type WanderingReport = analysis::WanderingReport<f64>;
