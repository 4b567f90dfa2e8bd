//! Field geometry: the rectangular area, its square-cell grid, evenly spaced
//! targets, and per-cell weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the divisibility check on field dimensions.
const DIM_EPS: f64 = 1e-9;

/// A point in field coordinates, meters, origin at the bottom-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x_m: f64,
    pub y_m: f64,
}

impl Point2D {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        Point2D { x_m, y_m }
    }

    /// Euclidean distance to another point.
    pub fn dist(&self, other: &Point2D) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

/// The rectangular field and its gridding/targeting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub width_m: f64,
    pub height_m: f64,
    pub cell_edge_m: f64,
    pub target_spacing_m: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            width_m: 300.0,
            height_m: 300.0,
            cell_edge_m: 50.0,
            target_spacing_m: 5.0,
        }
    }
}

impl FieldSpec {
    pub fn new(width_m: f64, height_m: f64, cell_edge_m: f64, target_spacing_m: f64) -> Result<Self> {
        let spec = FieldSpec {
            width_m,
            height_m,
            cell_edge_m,
            target_spacing_m,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("width_m", self.width_m),
            ("height_m", self.height_m),
            ("cell_edge_m", self.cell_edge_m),
            ("target_spacing_m", self.target_spacing_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain { what, value: v });
            }
        }
        let divides = |len: f64| {
            let ratio = len / self.cell_edge_m;
            (ratio - ratio.round()).abs() <= DIM_EPS * ratio.max(1.0)
        };
        if !divides(self.width_m) || !divides(self.height_m) {
            return Err(Error::Dimension {
                width_m: self.width_m,
                height_m: self.height_m,
                cell_edge_m: self.cell_edge_m,
            });
        }
        Ok(())
    }

    pub fn n_cols(&self) -> u32 {
        (self.width_m / self.cell_edge_m).round() as u32
    }

    pub fn n_rows(&self) -> u32 {
        (self.height_m / self.cell_edge_m).round() as u32
    }

    pub fn n_cells(&self) -> u32 {
        self.n_cols() * self.n_rows()
    }

    /// Geometric center of the field.
    pub fn center(&self) -> Point2D {
        Point2D::new(self.width_m / 2.0, self.height_m / 2.0)
    }

    /// True if `p` lies inside the closed field rectangle.
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x_m >= 0.0 && p.x_m <= self.width_m && p.y_m >= 0.0 && p.y_m <= self.height_m
    }

    /// Clamp a point into the field with the given edge margin.
    pub fn clamp_with_margin(&self, p: Point2D, margin: f64) -> Point2D {
        Point2D::new(
            p.x_m.clamp(margin, self.width_m - margin),
            p.y_m.clamp(margin, self.height_m - margin),
        )
    }
}

/// One grid cell, identified by 1-based column/row and a 1-based row-major
/// serial index (bottom-left cell is index 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
    pub index: u32,
}

impl Cell {
    pub fn new(col: u32, row: u32, n_cols: u32) -> Self {
        Cell {
            col,
            row,
            index: (row - 1) * n_cols + col,
        }
    }
}

/// A cell together with its center point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub cell: Cell,
    pub center: Point2D,
}

/// The full grid: row-major ordered cells with centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub spec: FieldSpec,
    pub cells: Vec<GridCell>,
}

/// Build the row-major grid of square cells for a field.
pub fn build_grid(spec: &FieldSpec) -> Result<Grid> {
    spec.validate()?;
    let (n_cols, n_rows, edge) = (spec.n_cols(), spec.n_rows(), spec.cell_edge_m);
    let mut cells = Vec::with_capacity((n_cols * n_rows) as usize);
    for row in 1..=n_rows {
        for col in 1..=n_cols {
            let center = Point2D::new(
                (col as f64 - 0.5) * edge,
                (row as f64 - 0.5) * edge,
            );
            cells.push(GridCell {
                cell: Cell::new(col, row, n_cols),
                center,
            });
        }
    }
    Ok(Grid { spec: *spec, cells })
}

/// Evenly spaced measurement targets on a centered square lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub positions: Vec<Point2D>,
    /// Count of targets per cell, keyed by the cell's serial index.
    pub per_cell_counts: BTreeMap<u32, usize>,
}

impl TargetSet {
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Generate the target lattice: pitch `target_spacing_m`, centered inside the
/// field so no target touches the boundary. A spacing larger than the field
/// yields an empty set (callers may warn).
pub fn generate_targets(spec: &FieldSpec) -> Result<TargetSet> {
    spec.validate()?;
    let count_along = |len: f64| ((len / spec.target_spacing_m) + DIM_EPS).floor() as usize;
    let (nx, ny) = (count_along(spec.width_m), count_along(spec.height_m));
    if nx == 0 || ny == 0 {
        return Ok(TargetSet {
            positions: Vec::new(),
            per_cell_counts: BTreeMap::new(),
        });
    }
    let s = spec.target_spacing_m;
    let inset_x = (spec.width_m - (nx - 1) as f64 * s) / 2.0;
    let inset_y = (spec.height_m - (ny - 1) as f64 * s) / 2.0;
    let mut positions = Vec::with_capacity(nx * ny);
    let mut per_cell_counts = BTreeMap::new();
    for j in 0..ny {
        for i in 0..nx {
            let p = Point2D::new(inset_x + i as f64 * s, inset_y + j as f64 * s);
            let cell = cell_of(spec, &p)?;
            *per_cell_counts.entry(cell.index).or_insert(0) += 1;
            positions.push(p);
        }
    }
    Ok(TargetSet {
        positions,
        per_cell_counts,
    })
}

/// Map a point to its containing cell. Cells are half-open squares
/// `[x0, x0+edge) x [y0, y0+edge)`; points on the far field boundary snap to
/// the last cell along that axis.
pub fn cell_of(spec: &FieldSpec, p: &Point2D) -> Result<Cell> {
    if !spec.contains(p) {
        return Err(Error::OutOfBounds {
            x_m: p.x_m,
            y_m: p.y_m,
        });
    }
    let idx = |coord: f64, n: u32| -> u32 {
        let i = (coord / spec.cell_edge_m).floor() as u32 + 1;
        i.min(n)
    };
    let col = idx(p.x_m, spec.n_cols());
    let row = idx(p.y_m, spec.n_rows());
    Ok(Cell::new(col, row, spec.n_cols()))
}

/// Per-cell power-consumption rates. Defaults to a uniform rate of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub per_cell: BTreeMap<u32, f64>,
}

impl PowerMap {
    /// Uniform rate over every cell of the grid.
    pub fn uniform(grid: &Grid, rate: f64) -> Self {
        PowerMap {
            per_cell: grid
                .cells
                .iter()
                .map(|gc| (gc.cell.index, rate))
                .collect(),
        }
    }

    pub fn rate(&self, cell_index: u32) -> Result<f64> {
        self.per_cell
            .get(&cell_index)
            .copied()
            .ok_or_else(|| Error::Lookup(format!("cell {cell_index} in power map")))
    }
}

/// Cell weight: consumption rate times coverable-target count.
pub fn cell_weight(power: &PowerMap, targets: &TargetSet, c: &Cell) -> Result<f64> {
    let rate = power.rate(c.index)?;
    let count = *targets.per_cell_counts.get(&c.index).unwrap_or(&0);
    Ok(rate * count as f64)
}
