//! Deterministic planning library for grid-divided wireless sensor fields:
//! technology ranking, node placement, network extension, and evaluation.

pub mod config;
pub mod error;
pub mod extras;
pub mod fahp;
pub mod field;
pub mod gdl;
pub mod metrics;
pub mod placement;
pub mod plot;
pub mod pso;
pub mod radio;
pub mod report;

pub use error::{Error, Result};
