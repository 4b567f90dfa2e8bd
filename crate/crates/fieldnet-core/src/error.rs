//! Error type shared across the library.

use std::fmt;

/// Library-wide error enum. Variants carry enough context to be actionable
/// from a CLI message without a backtrace.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Field dimensions are not integer multiples of the cell edge.
    Dimension {
        width_m: f64,
        height_m: f64,
        cell_edge_m: f64,
    },
    /// A numeric argument is outside its mathematical domain.
    Domain { what: &'static str, value: f64 },
    /// A point lies outside the field rectangle.
    OutOfBounds { x_m: f64, y_m: f64 },
    /// Structured input failed validation (matrices, deployments, sizes).
    Validation(String),
    /// Configuration file or section is invalid.
    Config(String),
    /// A named entity (cell, radio profile) is missing.
    Lookup(String),
    /// A link exceeds the child radio's range.
    Feasibility {
        child: u32,
        parent: u32,
        distance_m: f64,
        range_m: f64,
    },
    /// The link graph is not a forest rooted at the anchor.
    Topology(String),
    /// Problem instance is too large for the exact solver.
    Scale { cells: usize, max_cells: usize },
    /// No node subset can satisfy the requested threshold.
    Infeasible(String),
    /// Filesystem or serialization failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                width_m,
                height_m,
                cell_edge_m,
            } => write!(
                f,
                "field {width_m} x {height_m} m is not an integer multiple of cell edge {cell_edge_m} m"
            ),
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::OutOfBounds { x_m, y_m } => {
                write!(f, "point ({x_m}, {y_m}) lies outside the field")
            }
            Error::Validation(msg) => write!(f, "validation failed: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Lookup(what) => write!(f, "unknown {what}"),
            Error::Feasibility {
                child,
                parent,
                distance_m,
                range_m,
            } => write!(
                f,
                "link {child} -> {parent} spans {distance_m:.3} m, beyond the {range_m} m radio range"
            ),
            Error::Topology(msg) => write!(f, "link topology: {msg}"),
            Error::Scale { cells, max_cells } => {
                write!(f, "grid has {cells} cells; exact search handles at most {max_cells}")
            }
            Error::Infeasible(msg) => write!(f, "infeasible instance: {msg}"),
            Error::Io(msg) => write!(f, "i/o failure: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
