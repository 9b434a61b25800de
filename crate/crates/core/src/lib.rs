//! Blocking measures of nearest-neighbour 0-1-...-k particle systems,
//! stand-up bijections, generalized Frobenius partitions, and the
//! Jacobi-type identities that tie them together.

pub mod blocking;
pub mod cli;
pub mod error;
pub mod gfp;
pub mod identities;
pub mod normalizers;
pub mod series;
pub mod simulate;
pub mod standup;

pub use error::{Error, Result};
