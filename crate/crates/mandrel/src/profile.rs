//! Per-cell decomposition profiles.
//!
//! A profile captures everything pair checks need to know about a cell in
//! isolation: its valid colorings, how its power/ground rails relate across
//! those colorings, and how risky each vertical boundary is when another
//! cell abuts it.

use crate::coloring::{
    build_conflict_graph, enumerate_colorings, ColoringCandidate, ColoringError, ConflictGraph,
    MaskColor,
};
use crate::geometry::{Cell, Net, Orientation, Side};
use crate::library::Library;
use std::fmt;

/// Relation between the power and ground rail colors over all candidates.
///
/// The rails sit in cell-specific conflict components: when they share a
/// component their relation is fixed by path parity (Same or Diff); when
/// they sit in different components (or a rail is absent) both relations
/// are reachable and the cell is Free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgType {
    Same,
    Diff,
    Free,
}

impl fmt::Display for PgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgType::Same => write!(f, "same"),
            PgType::Diff => write!(f, "diff"),
            PgType::Free => write!(f, "free"),
        }
    }
}

/// Risk class of one vertical cell boundary.
///
/// Safe: every signal pattern is far enough from the boundary that no
/// neighbor drawn from this library can conflict across it.
///
/// Free: the signal patterns near the boundary are independent free agents;
/// each lies in its own conflict component, and none of those components
/// touch the rails. Their colors can be bent to any neighbor whose own
/// boundary patterns are equally unconstrained.
///
/// Unknown: anything else; near-boundary colors are tied to the rails or to
/// each other, so compatibility depends on the actual neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbutType {
    Safe,
    Free,
    Unknown,
}

impl fmt::Display for AbutType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbutType::Safe => write!(f, "safe"),
            AbutType::Free => write!(f, "free"),
            AbutType::Unknown => write!(f, "unknown"),
        }
    }
}

/// Outcome of the abutment fast path for a (left cell right side, right
/// cell left side) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbutCheck {
    Compatible,
    NeedsFullCheck,
}

/// Power/ground compatibility: a Same cell and a Diff cell can never share
/// a row section because the rails are continuous row patterns.
pub fn pg_compatible(a: PgType, b: PgType) -> bool {
    !matches!(
        (a, b),
        (PgType::Same, PgType::Diff) | (PgType::Diff, PgType::Same)
    )
}

/// Fast compatibility screen from boundary classes alone.
///
/// A Safe side guarantees no cross-boundary signal constraints regardless
/// of the neighbor. Two Free sides always admit a joint coloring: the
/// near-boundary patterns form a bipartite port graph (left ports vs right
/// ports) whose components are rail-free and single-port, so ports can be
/// two-colored and each component extended independently. A Free side
/// facing an Unknown side is not decided here: the Unknown side can pin
/// opposite colors onto one free port (for example via an odd-length path
/// between two of its boundary patterns), so the full merged check runs.
pub fn abut_fast_path(left_right_side: AbutType, right_left_side: AbutType) -> AbutCheck {
    match (left_right_side, right_left_side) {
        (AbutType::Safe, _) | (_, AbutType::Safe) => AbutCheck::Compatible,
        (AbutType::Free, AbutType::Free) => AbutCheck::Compatible,
        _ => AbutCheck::NeedsFullCheck,
    }
}

/// Classifies one boundary of a cell.
pub fn classify_abut(
    cell: &Cell,
    graph: &ConflictGraph,
    side: Side,
    s_dp: f64,
    s_b_min: f64,
) -> AbutType {
    let clearance = cell.signal_boundary_clearance(side);
    if clearance == i64::MAX || (clearance as f64) > s_dp - s_b_min {
        return AbutType::Safe;
    }
    let at = match side {
        Side::Left => 0,
        Side::Right => cell.width,
    };
    let mut seen_components = Vec::new();
    for (i, p) in cell.patterns.iter().enumerate() {
        if p.net != Net::Signal || (p.x_distance(at) as f64) >= s_dp {
            continue;
        }
        let comp = graph.component_of(i);
        if seen_components.contains(&comp) {
            return AbutType::Unknown;
        }
        seen_components.push(comp);
        let rail_linked = cell
            .patterns
            .iter()
            .enumerate()
            .any(|(j, q)| q.net != Net::Signal && graph.component_of(j) == comp);
        if rail_linked {
            return AbutType::Unknown;
        }
    }
    AbutType::Free
}

/// Classifies the rail relation. Cells missing a rail are Free by fiat.
pub fn classify_pg(cell: &Cell, graph: &ConflictGraph) -> PgType {
    let (p, g) = match (cell.rail_index(Net::Power), cell.rail_index(Net::Ground)) {
        (Some(p), Some(g)) => (p, g),
        _ => return PgType::Free,
    };
    if graph.component_of(p) != graph.component_of(g) {
        return PgType::Free;
    }
    if graph.same_parity(p, g) {
        PgType::Same
    } else {
        PgType::Diff
    }
}

/// Everything pairwise checks need to know about one cell.
#[derive(Debug, Clone)]
pub struct CellProfile {
    pub cell: Cell,
    pub graph: ConflictGraph,
    pub colorings: Vec<ColoringCandidate>,
    pub pg: PgType,
    pub abut_left: AbutType,
    pub abut_right: AbutType,
    /// Signal boundary clearances in units; infinite when the cell has no
    /// signal patterns.
    pub s_b_left: f64,
    pub s_b_right: f64,
    power_index: Option<usize>,
    ground_index: Option<usize>,
}

impl CellProfile {
    /// Boundary class of the given placed side under an orientation.
    pub fn abut(&self, side: Side, orient: Orientation) -> AbutType {
        match (side, orient) {
            (Side::Left, Orientation::R0) | (Side::Right, Orientation::MY) => self.abut_left,
            (Side::Right, Orientation::R0) | (Side::Left, Orientation::MY) => self.abut_right,
        }
    }

    /// Signal boundary clearance of the given placed side under an
    /// orientation.
    pub fn s_b(&self, side: Side, orient: Orientation) -> f64 {
        match (side, orient) {
            (Side::Left, Orientation::R0) | (Side::Right, Orientation::MY) => self.s_b_left,
            (Side::Right, Orientation::R0) | (Side::Left, Orientation::MY) => self.s_b_right,
        }
    }

    /// Rail colors under coloring candidate `index`.
    pub fn rail_colors(&self, index: usize) -> (Option<MaskColor>, Option<MaskColor>) {
        let cand = &self.colorings[index];
        (
            self.power_index.map(|i| cand.colors[i]),
            self.ground_index.map(|i| cand.colors[i]),
        )
    }

    /// True when candidate `index` gives each present rail the requested
    /// color (requests for absent rails are vacuous).
    pub fn rails_match(
        &self,
        index: usize,
        power: Option<MaskColor>,
        ground: Option<MaskColor>,
    ) -> bool {
        let (p, g) = self.rail_colors(index);
        let ok = |want: Option<MaskColor>, have: Option<MaskColor>| match (want, have) {
            (Some(w), Some(h)) => w == h,
            _ => true,
        };
        ok(power, p) && ok(ground, g)
    }

    /// The candidate nearest to `index` whose rails take the requested
    /// colors: only the rail components' orientation bits change. Returns
    /// None when the cell's rail relation contradicts the request.
    pub fn index_with_rails(
        &self,
        index: usize,
        power: Option<MaskColor>,
        ground: Option<MaskColor>,
    ) -> Option<usize> {
        let mut idx = index;
        if let (Some(node), Some(color)) = (self.power_index, power) {
            let comp = self.graph.component_of(node);
            idx = self.graph.with_component_option(
                idx,
                comp,
                self.graph.option_for_color(node, color),
            );
        }
        if let (Some(node), Some(color)) = (self.ground_index, ground) {
            let comp = self.graph.component_of(node);
            let want = self.graph.option_for_color(node, color);
            if let (Some(p_node), Some(_)) = (self.power_index, power) {
                // Shared component: the power adjustment above already fixed
                // the bit; a contradicting ground request is unsatisfiable.
                if self.graph.component_of(p_node) == comp {
                    return if self.graph.component_option(idx, comp) == want {
                        Some(idx)
                    } else {
                        None
                    };
                }
            }
            idx = self.graph.with_component_option(idx, comp, want);
        }
        Some(idx)
    }
}

/// Profiles for a whole library, plus the resolved process parameters.
#[derive(Debug, Clone)]
pub struct LibraryProfile {
    pub s_dp: f64,
    pub w_spacer: f64,
    pub s_b_min: f64,
    pub profiles: Vec<CellProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileError {
    Coloring { cell: String, error: ColoringError },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::Coloring { cell, error } => write!(f, "cell {cell}: {error}"),
        }
    }
}

impl std::error::Error for ProfileError {}

/// Profiles every cell. Fails with the offending cell named when any cell
/// is not decomposable.
pub fn build_profiles(library: &Library) -> Result<LibraryProfile, ProfileError> {
    let s_dp = library.params.s_dp;
    let w_spacer = library.params.w_spacer;
    let s_b_min = library.s_b_min();
    let mut profiles = Vec::with_capacity(library.cells.len());
    for cell in &library.cells {
        let graph = build_conflict_graph(cell, s_dp);
        let colorings = enumerate_colorings(&graph).map_err(|error| ProfileError::Coloring {
            cell: cell.name.clone(),
            error,
        })?;
        let pg = classify_pg(cell, &graph);
        let abut_left = classify_abut(cell, &graph, Side::Left, s_dp, s_b_min);
        let abut_right = classify_abut(cell, &graph, Side::Right, s_dp, s_b_min);
        let s_b = |side| {
            let v = cell.signal_boundary_clearance(side);
            if v == i64::MAX {
                f64::INFINITY
            } else {
                v as f64
            }
        };
        profiles.push(CellProfile {
            power_index: cell.rail_index(Net::Power),
            ground_index: cell.rail_index(Net::Ground),
            s_b_left: s_b(Side::Left),
            s_b_right: s_b(Side::Right),
            cell: cell.clone(),
            graph,
            colorings,
            pg,
            abut_left,
            abut_right,
        });
    }
    Ok(LibraryProfile {
        s_dp,
        w_spacer,
        s_b_min,
        profiles,
    })
}

impl LibraryProfile {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.profiles.iter().position(|p| p.cell.name == name)
    }
}
