//! Online POMCP planning for active object search in known grid maps.

#[cfg(feature = "cli")]
pub mod cli;
pub mod docking;
pub mod domain;
pub mod harness;
pub mod perception;
pub mod scenario;
pub mod solver;
