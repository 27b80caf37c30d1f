//! Exact analysis of linear differential systems `dy/dz = B(z) y` on the Riemann sphere.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod gauge;
pub mod local;
pub mod monodromy;
mod residue;
pub mod scalarize;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
