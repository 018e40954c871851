//! Placed layouts: rows of cell instances plus the netlist.

use crate::geometry::Orientation;
use crate::profile::LibraryProfile;
use std::collections::BTreeMap;
use std::fmt;

/// One cell instance in a row. `coloring` indexes the cell's canonical
/// candidate list; None means the decomposition is not chosen yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedCell {
    pub instance: String,
    pub cell: String,
    pub x: i64,
    pub orient: Orientation,
    pub coloring: Option<usize>,
}

/// A placement row. Cells are kept in ascending x order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub index: usize,
    pub y: i64,
    pub capacity: i64,
    pub cells: Vec<PlacedCell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetEndpoint {
    pub instance: String,
    pub pin: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDef {
    pub name: String,
    pub endpoints: Vec<NetEndpoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub library_name: String,
    pub rows: Vec<Row>,
    pub nets: Vec<NetDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlacementError {
    UnknownCell {
        instance: String,
        cell: String,
    },
    DuplicateInstance {
        instance: String,
    },
    NegativeX {
        instance: String,
    },
    Overlap {
        row: usize,
        left: String,
        right: String,
    },
    BadColoring {
        instance: String,
        coloring: usize,
        count: usize,
    },
    UnknownInstance {
        net: String,
        instance: String,
    },
    UnknownPin {
        net: String,
        instance: String,
        pin: String,
    },
}

impl fmt::Display for PlacementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementError::UnknownCell { instance, cell } => {
                write!(f, "instance {instance} references unknown cell {cell}")
            }
            PlacementError::DuplicateInstance { instance } => {
                write!(f, "duplicate instance name {instance}")
            }
            PlacementError::NegativeX { instance } => {
                write!(f, "instance {instance} placed at negative x")
            }
            PlacementError::Overlap { row, left, right } => {
                write!(f, "row {row}: {left} overlaps or passes {right}")
            }
            PlacementError::BadColoring {
                instance,
                coloring,
                count,
            } => {
                write!(
                    f,
                    "instance {instance}: coloring {coloring} out of range (cell has {count})"
                )
            }
            PlacementError::UnknownInstance { net, instance } => {
                write!(f, "net {net} references unknown instance {instance}")
            }
            PlacementError::UnknownPin { net, instance, pin } => {
                write!(f, "net {net}: instance {instance} has no pin {pin}")
            }
        }
    }
}

impl std::error::Error for PlacementError {}

impl Placement {
    /// Structural validation against the profiled library: instances
    /// resolve and are unique, rows are ordered and overlap-free, coloring
    /// indices are in range, net endpoints resolve to real pins.
    pub fn validate(&self, profile: &LibraryProfile) -> Result<(), PlacementError> {
        let mut instances: BTreeMap<&str, &str> = BTreeMap::new();
        for row in &self.rows {
            let mut cursor: Option<(i64, &str)> = None;
            for pc in &row.cells {
                let idx =
                    profile
                        .index_of(&pc.cell)
                        .ok_or_else(|| PlacementError::UnknownCell {
                            instance: pc.instance.clone(),
                            cell: pc.cell.clone(),
                        })?;
                let prof = &profile.profiles[idx];
                if instances.insert(&pc.instance, &pc.cell).is_some() {
                    return Err(PlacementError::DuplicateInstance {
                        instance: pc.instance.clone(),
                    });
                }
                if pc.x < 0 {
                    return Err(PlacementError::NegativeX {
                        instance: pc.instance.clone(),
                    });
                }
                if let Some((right, prev)) = cursor {
                    if pc.x < right {
                        return Err(PlacementError::Overlap {
                            row: row.index,
                            left: prev.to_string(),
                            right: pc.instance.clone(),
                        });
                    }
                }
                if let Some(c) = pc.coloring {
                    let count = prof.colorings.len();
                    if c >= count {
                        return Err(PlacementError::BadColoring {
                            instance: pc.instance.clone(),
                            coloring: c,
                            count,
                        });
                    }
                }
                cursor = Some((pc.x + prof.cell.width, &pc.instance));
            }
        }
        for net in &self.nets {
            for ep in &net.endpoints {
                let cell_name = instances.get(ep.instance.as_str()).ok_or_else(|| {
                    PlacementError::UnknownInstance {
                        net: net.name.clone(),
                        instance: ep.instance.clone(),
                    }
                })?;
                let idx = profile.index_of(cell_name).unwrap();
                let cell = &profile.profiles[idx].cell;
                if !cell.pins.iter().any(|p| p.name == ep.pin) {
                    return Err(PlacementError::UnknownPin {
                        net: net.name.clone(),
                        instance: ep.instance.clone(),
                        pin: ep.pin.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Occupied horizontal extent of one row, if any cell is placed.
    pub fn row_extent(&self, row: &Row, profile: &LibraryProfile) -> Option<(i64, i64)> {
        let first = row.cells.first()?;
        let last = row.cells.last()?;
        let last_w = profile.profiles[profile.index_of(&last.cell)?].cell.width;
        Some((first.x, last.x + last_w))
    }

    /// Bounding area: global occupied width times the stacked row height.
    pub fn area(&self, profile: &LibraryProfile) -> i64 {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for row in &self.rows {
            if let Some((l, r)) = self.row_extent(row, profile) {
                lo = lo.min(l);
                hi = hi.max(r);
            }
        }
        if lo >= hi {
            return 0;
        }
        let row_height = profile.profiles.first().map_or(0, |p| p.cell.height);
        (hi - lo) * row_height * self.rows.len() as i64
    }

    /// Half-perimeter wirelength over all nets, with pin positions
    /// transformed by each instance's placement and orientation.
    pub fn hpwl(&self, profile: &LibraryProfile) -> i64 {
        let mut placed: BTreeMap<&str, (&PlacedCell, i64, usize)> = BTreeMap::new();
        for row in &self.rows {
            for pc in &row.cells {
                if let Some(idx) = profile.index_of(&pc.cell) {
                    placed.insert(&pc.instance, (pc, row.y, idx));
                }
            }
        }
        let mut total = 0;
        for net in &self.nets {
            let mut bbox: Option<(i64, i64, i64, i64)> = None;
            for ep in &net.endpoints {
                let Some(&(pc, row_y, idx)) = placed.get(ep.instance.as_str()) else {
                    continue;
                };
                let cell = &profile.profiles[idx].cell;
                let Some(pin) = cell.pins.iter().find(|p| p.name == ep.pin) else {
                    continue;
                };
                let px = match pc.orient {
                    Orientation::R0 => pin.x,
                    Orientation::MY => cell.width - pin.x,
                };
                let (x, y) = (pc.x + px, row_y + pin.y);
                bbox = Some(match bbox {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
            if let Some((x0, y0, x1, y1)) = bbox {
                total += (x1 - x0) + (y1 - y0);
            }
        }
        total
    }
}
