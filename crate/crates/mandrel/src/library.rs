//! Cell library: a set of cells sharing one row height plus the process
//! parameters that govern decomposition.

use crate::geometry::{Cell, CellError, Net, Side};
use std::fmt;

/// Process parameters carried by a library file. `s_b_min` may be given
/// explicitly; otherwise it is derived from the library itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Minimum same-mask spacing in layout units.
    pub s_dp: f64,
    /// Sidewall spacer width; trim edges within this distance of a mandrel
    /// pattern are spacer-aligned.
    pub w_spacer: f64,
    /// Library-wide minimum signal-to-boundary spacing override.
    pub s_b_min: Option<f64>,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            s_dp: 2.0,
            w_spacer: 1.0,
            s_b_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Library {
    pub units: String,
    pub params: Params,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LibraryError {
    NoCells,
    DuplicateCell {
        name: String,
    },
    MixedHeights {
        cell: String,
        height: i64,
        expected: i64,
    },
    BadParam {
        param: &'static str,
        value: f64,
    },
    Cell {
        cell: String,
        error: CellError,
    },
    /// Lenient-mode warnings promoted to an error under strict policy.
    Strict {
        warnings: Vec<String>,
    },
}

impl fmt::Display for LibraryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LibraryError::NoCells => write!(f, "library has no cells"),
            LibraryError::DuplicateCell { name } => write!(f, "duplicate cell name {name}"),
            LibraryError::MixedHeights {
                cell,
                height,
                expected,
            } => {
                write!(f, "cell {cell} has height {height}, expected {expected}")
            }
            LibraryError::BadParam { param, value } => {
                write!(f, "parameter {param} must be positive, got {value}")
            }
            LibraryError::Cell { cell, error } => write!(f, "cell {cell}: {error}"),
            LibraryError::Strict { warnings } => {
                write!(f, "strict mode: {}", warnings.join("; "))
            }
        }
    }
}

impl std::error::Error for LibraryError {}

impl Library {
    /// Validates and assembles a library. Rows are single-height, so all
    /// cells must share one height. Cells without power or ground rails are
    /// legal (fill and the like) but reported as warnings; under `strict`
    /// the warnings become an error.
    pub fn new(
        units: String,
        params: Params,
        cells: Vec<Cell>,
        strict: bool,
    ) -> Result<(Library, Vec<String>), LibraryError> {
        if params.s_dp <= 0.0 {
            return Err(LibraryError::BadParam {
                param: "s_dp",
                value: params.s_dp,
            });
        }
        if params.w_spacer <= 0.0 {
            return Err(LibraryError::BadParam {
                param: "w_spacer",
                value: params.w_spacer,
            });
        }
        if cells.is_empty() {
            return Err(LibraryError::NoCells);
        }
        let expected = cells[0].height;
        let mut warnings = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            if cells[..i].iter().any(|d| d.name == c.name) {
                return Err(LibraryError::DuplicateCell {
                    name: c.name.clone(),
                });
            }
            if c.height != expected {
                return Err(LibraryError::MixedHeights {
                    cell: c.name.clone(),
                    height: c.height,
                    expected,
                });
            }
            if c.rail(Net::Power).is_none() || c.rail(Net::Ground).is_none() {
                warnings.push(format!("cell {} has no power/ground rails", c.name));
            }
        }
        if strict && !warnings.is_empty() {
            return Err(LibraryError::Strict { warnings });
        }
        Ok((
            Library {
                units,
                params,
                cells,
            },
            warnings,
        ))
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn cell_index(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.name == name)
    }

    pub fn row_height(&self) -> i64 {
        self.cells.first().map(|c| c.height).unwrap_or(0)
    }

    /// Library-wide minimum signal-to-boundary spacing: the explicit
    /// override when present, otherwise the minimum signal boundary
    /// clearance over every cell side. A library whose cells have no signal
    /// patterns at all falls back to `s_dp` (every abutment is trivially
    /// safe there).
    pub fn s_b_min(&self) -> f64 {
        if let Some(v) = self.params.s_b_min {
            return v;
        }
        let min = self
            .cells
            .iter()
            .flat_map(|c| {
                [
                    c.signal_boundary_clearance(Side::Left),
                    c.signal_boundary_clearance(Side::Right),
                ]
            })
            .filter(|&v| v != i64::MAX)
            .min();
        match min {
            Some(v) => v as f64,
            None => self.params.s_dp,
        }
    }
}
