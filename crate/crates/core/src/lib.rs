//! Numerical toolkit for the four classical bounded symmetric domains.
//!
//! The crate covers points and generic norms of the type I–IV domains, the
//! fractional-linear action of their automorphism groups, sparse polynomial
//! maps between domains, unitary invariants of such maps at the origin, and a
//! deterministic harness that checks the identities these objects satisfy.
//!
//! ```
//! use bsdkit::domains::{generic_norm, DomainSpec, Point};
//!
//! let spec: DomainSpec = "I:2,3".parse().unwrap();
//! let origin = Point::origin(spec);
//! assert_eq!(generic_norm(&origin).unwrap(), 1.0);
//! ```

pub mod autgroups;
pub mod domains;
pub mod error;
pub mod invariants;
pub mod linalg;
pub mod polymaps;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
