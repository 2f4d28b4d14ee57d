//! Verification engine for iterated monodromy groups of quadratic rational
//! maps whose two critical points share one periodic orbit.
//!
//! - [`tree`]: wreath-recursion algebra on the rooted binary tree.
//! - [`family`]: the generators `a_1, …, a_r`, their signs, odometers.
//! - [`dynamics`]: cycle structure, stable cycles, settledness estimates.
//! - [`group`]: exact finite-level group orders, normal closures, quotients.
//! - [`frob`]: Frobenius factor trees of pullbacks over prime fields.

pub mod dynamics;
pub mod error;
pub mod family;
pub mod frob;
pub mod group;
pub mod limits;
pub mod tree;

pub use error::{Error, Result};
pub use family::{build_family, GeneratorFamily, PCOrbit};
pub use limits::Limits;
