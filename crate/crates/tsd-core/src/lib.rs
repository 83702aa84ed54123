//! Exact-arithmetic toolkit for torus shadow diagrams of bridge-trisected
//! surfaces in the complex projective plane.
//!
//! A surface in general position with respect to the standard genus-1
//! trisection of CP^2 meets the central torus in bridge points and each of
//! the three solid tori in a tangle. Projecting the tangles to the torus
//! yields three families of arcs (`A`, `B`, `C`). Everything here is
//! computed over exact rationals; angular coordinates are measured in turns
//! (period 1), so there is no floating point anywhere in the computational
//! path.
//!
//! Modules map onto the main concerns:
//! - [`kernel`]: planar/toroidal PL geometry predicates over rationals.
//! - [`diagram`]: the [`diagram::TorusDiagram`] data model, validation,
//!   crossings, signs.
//! - [`invariants`]: degree, writhes, framings, Euler characteristic,
//!   self-linking numbers, adjunction bookkeeping.
//! - [`moves`]: braid and mini bridge stabilization, rigid arc translations,
//!   seeded move scripts.
//! - [`transversality`]: transversality/braiding predicates, the deficit
//!   vector normalizer, and the pull-tight clasp classifier.
//! - [`builders`]: reference diagram constructors.

pub mod builders;
pub mod diagram;
pub mod invariants;
pub mod kernel;
pub mod moves;
pub mod rat;
pub mod report;
pub mod transversality;

pub use diagram::{BridgePoint, Crossing, Family, TangleArc, TorusDiagram, ValidationReport};
pub use kernel::{CoverPoint, HomologyClass, Segment, Vec2Q};
pub use rat::Q;
pub use report::InvariantReport;
