//! Simulation of a wheeled-humanoid drink-fetch service.
//!
//! The crate covers the whole loop of a fetch request: geometric 3D object
//! detection from depth points inside a 2D region of interest, base and
//! manipulator trajectory generation, the seven-state task machine that
//! sequences them, and the path/localization metrics used to evaluate a run.
//! Everything is deterministic given a seed; there is no hardware in the loop.

// Negated float comparisons are how validation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Joint and axis loops index several parallel fixed-size arrays.
#![allow(clippy::needless_range_loop)]
// Events and commands are created a handful of times per episode.
#![allow(clippy::large_enum_variant)]

pub mod arm;
pub mod base_planner;
pub mod error;
pub mod formats;
pub mod fsm;
pub mod metrics;
pub mod model;
pub mod perception;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
