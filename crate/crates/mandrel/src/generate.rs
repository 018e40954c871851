//! Seeded synthetic benchmarks: a cell library with a controlled PG-type
//! mix and a row placement filled to a target utilization.
//!
//! Cells are random but decomposable by construction. Interior structures
//! live on x slots three units apart, so edges only form inside a slot
//! (vertical stacks) or inside a deliberate two-slot kink; the conflict
//! graph is a union of paths. Boundary features sit on the cell edge and
//! drive cell-to-cell interaction: clear sides never interact, ports give
//! pairs that a coloring or orientation change fixes, and the symmetric
//! double-prickle cell jams against any boundary pattern that reaches both
//! prickles, which no coloring fixes at zero gap.

use crate::geometry::{Cell, Net, Orientation, Pattern, Pin, Rect};
use crate::library::{Library, LibraryError, Params};
use crate::placement::{NetDef, NetEndpoint, PlacedCell, Placement, Row};
use crate::profile::{build_profiles, ProfileError};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt;

const ROW_HEIGHT: i64 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub cells: usize,
    /// 0 picks a row count targeting about 25 cells per row.
    pub rows: usize,
    pub util: f64,
    pub seed: u64,
    pub lib_cells: usize,
    /// Relative weights for Same, Diff, and Free PG cells.
    pub pg_mix: (u32, u32, u32),
    /// Mix Same and Diff cells inside single rows, making them unsolvable.
    pub pg_infeasible: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            cells: 1000,
            rows: 0,
            util: 0.7,
            seed: 1,
            lib_cells: 10,
            pg_mix: (1, 1, 2),
            pg_infeasible: false,
        }
    }
}

#[derive(Debug)]
pub enum GenError {
    BadUtil(f64),
    NoCells,
    TooFewLibCells(usize),
    Library(LibraryError),
    Profile(ProfileError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::BadUtil(u) => write!(f, "utilization must be in (0, 1], got {u}"),
            GenError::NoCells => write!(f, "cell count must be positive"),
            GenError::TooFewLibCells(n) => {
                write!(
                    f,
                    "library needs at least 4 cells to cover the PG mix, got {n}"
                )
            }
            GenError::Library(e) => write!(f, "generated library is invalid: {e}"),
            GenError::Profile(e) => write!(f, "generated library does not profile: {e}"),
        }
    }
}

impl std::error::Error for GenError {}

pub struct Generated {
    pub library: Library,
    pub placement: Placement,
}

fn rect(x_lo: i64, y_lo: i64, x_hi: i64, y_hi: i64) -> Rect {
    Rect::new(x_lo, y_lo, x_hi, y_hi).unwrap()
}

fn pattern(id: &str, net: Net, rects: Vec<Rect>) -> Pattern {
    Pattern {
        id: id.to_string(),
        net,
        rects,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Boundary {
    Clear,
    Port { y_lo: i64, y_hi: i64 },
    RailNear,
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Same,
    Diff,
    Free,
}

fn draw_boundary(rng: &mut ChaCha8Rng) -> Boundary {
    let r: f64 = rng.gen();
    if r < 0.3 {
        Boundary::Clear
    } else if r < 0.75 {
        let (y_lo, y_hi) = *[(3, 7), (4, 8), (5, 9)].choose(rng).unwrap();
        Boundary::Port { y_lo, y_hi }
    } else {
        Boundary::RailNear
    }
}

fn boundary_pattern(id: &str, kind: Boundary, width: i64, side_right: bool) -> Option<Pattern> {
    let (x_lo, x_hi) = if side_right {
        (width - 1, width)
    } else {
        (0, 1)
    };
    match kind {
        Boundary::Clear => None,
        Boundary::Port { y_lo, y_hi } => {
            Some(pattern(id, Net::Signal, vec![rect(x_lo, y_lo, x_hi, y_hi)]))
        }
        Boundary::RailNear => Some(pattern(id, Net::Signal, vec![rect(x_lo, 2, x_hi, 6)])),
    }
}

/// Interior x slots: stride 3 keeps distinct slots two apart, under the
/// spacing threshold's reach, so only intra-slot stacks form edges.
fn slots(width: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut x = 4;
    while x < width - 4 {
        out.push(x);
        x += 3;
    }
    out
}

fn build_cell(name: &str, width: i64, role: Role, rng: &mut ChaCha8Rng) -> Cell {
    let mut patterns = vec![
        pattern("vdd", Net::Power, vec![rect(0, 0, width, 1)]),
        pattern(
            "vss",
            Net::Ground,
            vec![rect(0, ROW_HEIGHT - 1, width, ROW_HEIGHT)],
        ),
    ];
    let xs = slots(width);
    let mut used = 0;
    match role {
        Role::Same => {
            // One bar close to both rails links them through an even path.
            patterns.push(pattern(
                "k0",
                Net::Signal,
                vec![rect(xs[0], 2, xs[0] + 1, 10)],
            ));
            used = 1;
        }
        Role::Diff => {
            // A staggered pair links the rails through an odd path.
            patterns.push(pattern(
                "k0",
                Net::Signal,
                vec![rect(xs[0], 2, xs[0] + 1, 6)],
            ));
            patterns.push(pattern(
                "k1",
                Net::Signal,
                vec![rect(xs[0] + 2, 5, xs[0] + 3, 10)],
            ));
            used = 2;
        }
        Role::Free => {}
    }
    for (i, &x) in xs.iter().enumerate().skip(used) {
        if !rng.gen_bool(0.5) {
            continue;
        }
        if rng.gen_bool(0.4) {
            patterns.push(pattern(
                &format!("m{i}a"),
                Net::Signal,
                vec![rect(x, 3, x + 1, 6)],
            ));
            patterns.push(pattern(
                &format!("m{i}b"),
                Net::Signal,
                vec![rect(x, 7, x + 1, 9)],
            ));
        } else {
            patterns.push(pattern(
                &format!("m{i}"),
                Net::Signal,
                vec![rect(x, 4, x + 1, 8)],
            ));
        }
    }
    for (side_right, id) in [(false, "bl"), (true, "br")] {
        if let Some(p) = boundary_pattern(id, draw_boundary(rng), width, side_right) {
            patterns.push(p);
        }
    }
    let mid = width / 2;
    let pins = vec![
        Pin {
            name: "A".into(),
            x: mid,
            y: 5,
        },
        Pin {
            name: "Z".into(),
            x: mid,
            y: 7,
        },
    ];
    Cell::new(name.to_string(), width, ROW_HEIGHT, patterns, pins).unwrap()
}

/// Two stacked prickles on each edge. The stack forces opposite colors,
/// so any neighboring boundary pattern reaching both prickles closes an
/// odd triangle: the pair has no zero-gap solution in any orientation.
fn build_thorn(name: &str, width: i64) -> Cell {
    let patterns = vec![
        pattern("vdd", Net::Power, vec![rect(0, 0, width, 1)]),
        pattern(
            "vss",
            Net::Ground,
            vec![rect(0, ROW_HEIGHT - 1, width, ROW_HEIGHT)],
        ),
        pattern("l0", Net::Signal, vec![rect(0, 3, 1, 5)]),
        pattern("l1", Net::Signal, vec![rect(0, 6, 1, 8)]),
        pattern("r0", Net::Signal, vec![rect(width - 1, 3, width, 5)]),
        pattern("r1", Net::Signal, vec![rect(width - 1, 6, width, 8)]),
    ];
    let mid = width / 2;
    let pins = vec![
        Pin {
            name: "A".into(),
            x: mid,
            y: 5,
        },
        Pin {
            name: "Z".into(),
            x: mid,
            y: 7,
        },
    ];
    Cell::new(name.to_string(), width, ROW_HEIGHT, patterns, pins).unwrap()
}

struct Pools {
    same: Vec<usize>,
    diff: Vec<usize>,
    free: Vec<usize>,
    thorn: usize,
}

fn build_library(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<(Library, Pools), GenError> {
    let (ws, wd, wf) = cfg.pg_mix;
    let total = ws + wd + wf;
    let n = cfg.lib_cells - 1;
    let mut n_same = usize::from(ws > 0 || cfg.pg_infeasible);
    let mut n_diff = usize::from(wd > 0 || cfg.pg_infeasible);
    let mut n_free = usize::from(wf > 0 || total == 0);
    for _ in (n_same + n_diff + n_free)..n {
        if total == 0 {
            n_free += 1;
            continue;
        }
        let r = rng.gen_range(0..total);
        if r < ws {
            n_same += 1;
        } else if r < ws + wd {
            n_diff += 1;
        } else {
            n_free += 1;
        }
    }
    let mut cells = Vec::new();
    let mut pools = Pools {
        same: Vec::new(),
        diff: Vec::new(),
        free: Vec::new(),
        thorn: 0,
    };
    for i in 0..n_same {
        let w = rng.gen_range(12..=18);
        pools.same.push(cells.len());
        cells.push(build_cell(&format!("sm{i}"), w, Role::Same, rng));
    }
    for i in 0..n_diff {
        // The staggered kink spans two slots, so these need the extra width.
        let w = rng.gen_range(15..=18);
        pools.diff.push(cells.len());
        cells.push(build_cell(&format!("df{i}"), w, Role::Diff, rng));
    }
    for i in 0..n_free {
        let w = rng.gen_range(12..=18);
        pools.free.push(cells.len());
        cells.push(build_cell(&format!("fr{i}"), w, Role::Free, rng));
    }
    pools.thorn = cells.len();
    cells.push(build_thorn("th0", 12));
    let (library, _) =
        Library::new("nm".into(), Params::default(), cells, true).map_err(GenError::Library)?;
    Ok((library, pools))
}

/// Splits `free` whitespace units over a random ~30% of the interior gap
/// sites; the rest of the units trail the last cell. Clustering keeps most
/// pairs abutted.
fn gaps(count: usize, free: i64, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut out = vec![0; count];
    if count == 0 {
        return out;
    }
    let active: Vec<usize> = (0..count).filter(|_| rng.gen_bool(0.3)).collect();
    for _ in 0..free {
        let t = rng.gen_range(0..=active.len());
        if t < active.len() {
            out[active[t]] += 1;
        }
    }
    out
}

pub fn generate(cfg: &GenConfig) -> Result<Generated, GenError> {
    if !(cfg.util > 0.0 && cfg.util <= 1.0) {
        return Err(GenError::BadUtil(cfg.util));
    }
    if cfg.cells == 0 {
        return Err(GenError::NoCells);
    }
    if cfg.lib_cells < 4 {
        return Err(GenError::TooFewLibCells(cfg.lib_cells));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (library, pools) = build_library(cfg, &mut rng)?;
    let profile = build_profiles(&library).map_err(GenError::Profile)?;

    let (ws, wd, wf) = cfg.pg_mix;
    let row_count = if cfg.rows == 0 {
        cfg.cells.div_ceil(25)
    } else {
        cfg.rows
    };
    let mut rows = Vec::new();
    let mut instances = Vec::new();
    let mut remaining = cfg.cells;
    for r in 0..row_count {
        let in_row = remaining.div_ceil(row_count - r);
        remaining -= in_row;
        let class = if cfg.pg_infeasible {
            None
        } else if ws + wd > 0 && rng.gen_range(0..ws + wd) < ws {
            Some(Role::Same)
        } else if wd > 0 {
            Some(Role::Diff)
        } else {
            None
        };
        let mut picks = Vec::with_capacity(in_row);
        for k in 0..in_row {
            let idx = if cfg.pg_infeasible && k < 2 {
                // Seed the contradiction before random draws take over.
                if k == 0 {
                    pools.same[0]
                } else {
                    pools.diff[0]
                }
            } else if rng.gen_bool(0.10) {
                pools.thorn
            } else {
                let (class_pool, w_class) = match class {
                    Some(Role::Same) => (&pools.same, ws),
                    Some(Role::Diff) => (&pools.diff, wd),
                    _ if cfg.pg_infeasible => {
                        if rng.gen_bool(0.5) {
                            (&pools.same, 1)
                        } else {
                            (&pools.diff, 1)
                        }
                    }
                    _ => (&pools.free, 0),
                };
                let take_free =
                    class_pool.is_empty() || (wf > 0 && rng.gen_range(0..wf + w_class) < wf);
                let pool = if take_free && !pools.free.is_empty() {
                    &pools.free
                } else {
                    class_pool
                };
                *pool.choose(&mut rng).unwrap()
            };
            picks.push(idx);
        }
        let width_sum: i64 = picks.iter().map(|&i| library.cells[i].width).sum();
        let capacity = (width_sum as f64 / cfg.util).ceil() as i64;
        let pad = gaps(
            picks.len().saturating_sub(1),
            capacity - width_sum,
            &mut rng,
        );
        let mut cells = Vec::with_capacity(picks.len());
        let mut x = 0;
        for (k, &idx) in picks.iter().enumerate() {
            let cell = &library.cells[idx];
            let name = format!("u{}", instances.len());
            let colorings = profile.profiles[idx].colorings.len();
            cells.push(PlacedCell {
                instance: name.clone(),
                cell: cell.name.clone(),
                x,
                orient: if rng.gen_bool(0.5) {
                    Orientation::R0
                } else {
                    Orientation::MY
                },
                coloring: Some(rng.gen_range(0..colorings)),
            });
            instances.push(name);
            x += cell.width;
            if k < pad.len() {
                x += pad[k];
            }
        }
        rows.push(Row {
            index: r,
            y: r as i64 * ROW_HEIGHT,
            capacity,
            cells,
        });
    }

    let mut nets = Vec::new();
    if instances.len() >= 2 {
        let n_nets = (cfg.cells as f64 * 0.8).round() as usize;
        for i in 0..n_nets {
            let k = rng.gen_range(2..=4usize).min(instances.len());
            let chosen = rand::seq::index::sample(&mut rng, instances.len(), k);
            let endpoints = chosen
                .iter()
                .map(|j| NetEndpoint {
                    instance: instances[j].clone(),
                    pin: if rng.gen_bool(0.5) {
                        "A".into()
                    } else {
                        "Z".into()
                    },
                })
                .collect();
            nets.push(NetDef {
                name: format!("n{i}"),
                endpoints,
            });
        }
    }

    let placement = Placement {
        library_name: "generated".into(),
        rows,
        nets,
    };
    Ok(Generated { library, placement })
}
