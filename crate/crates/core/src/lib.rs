//! Exact-arithmetic engine for genus-zero Givental I-functions of root stacks
//! X_{D,r}, relative pairs (X,D), the ambient weighted-projective bundle, and
//! the local theory of O_X(-D), with mirror-map inversion and one-point
//! descendant invariant extraction.
//!
//! Everything is exact: coefficients are arbitrary-precision rationals, all
//! z-expansions terminate by nilpotency of divisor classes, and every
//! truncation is explicit in the data types.
//!
//! Module layout:
//! - [`exactalg`] — rationals, finite graded cohomology rings, curve classes;
//! - [`sectors`] — the two state spaces (age-indexed and contact-indexed),
//!   their pairings, and the root-stack/relative identification;
//! - [`zseries`] — factored rational functions in z, Laurent expansion at
//!   z = infinity, truncated graded series, and mirror-map inversion;
//! - [`ifactory`] — all I-functions of the theory as graded series;
//! - [`mirror`] — I-to-J assembly and invariant extraction.

pub mod error;
pub mod exactalg;
pub mod ifactory;
pub mod mirror;
pub mod sectors;
pub mod zseries;

pub use error::{Error, Result};
pub use exactalg::{BaseRing, CurveClass, Rational, RingElement};
pub use ifactory::{BaseJProvider, GeometryConfig};
pub use mirror::{InvariantRecord, JFunction, Theory};
pub use sectors::{SectorLabel, SectorPairingContext, StateVector};
pub use zseries::{FactoredZFunction, GradedSeries, LaurentBlock, MirrorMap};
