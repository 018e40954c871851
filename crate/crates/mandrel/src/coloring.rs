//! Two-mask decomposition of a cell's patterns.
//!
//! Patterns closer than the same-mask spacing rule must land on different
//! masks. That induces a conflict graph; the cell is decomposable iff the
//! graph is bipartite, and the set of valid colorings is the product of two
//! choices per connected component.
//!
//! Candidate order is canonical so that indices stored in tables and
//! placement files stay stable: components are ordered by their smallest
//! pattern id, and candidate index bits (most significant bit = first
//! component) select each component's orientation, with bit 0 meaning the
//! component's smallest pattern is on the mandrel mask.

use crate::geometry::Cell;
use std::collections::BTreeMap;
use std::fmt;

/// Hard cap on connected components per cell; beyond this the candidate
/// list would be too large to enumerate.
pub const MAX_COMPONENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskColor {
    Mandrel,
    Trim,
}

impl MaskColor {
    pub fn swapped(self) -> MaskColor {
        match self {
            MaskColor::Mandrel => MaskColor::Trim,
            MaskColor::Trim => MaskColor::Mandrel,
        }
    }
}

impl fmt::Display for MaskColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskColor::Mandrel => write!(f, "mandrel"),
            MaskColor::Trim => write!(f, "trim"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoringError {
    /// The conflict graph contains an odd cycle; the witness lists the
    /// pattern ids around one such cycle.
    NotDecomposable {
        cycle: Vec<String>,
    },
    TooManyComponents {
        count: usize,
    },
    UnknownPattern {
        id: String,
    },
    MissingPattern {
        id: String,
    },
    IndexOutOfRange {
        index: usize,
        count: usize,
    },
}

impl fmt::Display for ColoringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColoringError::NotDecomposable { cycle } => {
                write!(
                    f,
                    "not two-colorable: odd cycle through {}",
                    cycle.join(" -> ")
                )
            }
            ColoringError::TooManyComponents { count } => {
                write!(
                    f,
                    "{count} conflict components exceed the cap of {MAX_COMPONENTS}"
                )
            }
            ColoringError::UnknownPattern { id } => write!(f, "unknown pattern id {id}"),
            ColoringError::MissingPattern { id } => {
                write!(f, "assignment does not cover pattern {id}")
            }
            ColoringError::IndexOutOfRange { index, count } => {
                write!(
                    f,
                    "coloring index {index} out of range ({count} candidates)"
                )
            }
        }
    }
}

impl std::error::Error for ColoringError {}

/// Conflict graph over a cell's patterns. Node order follows the cell's
/// pattern order; components are listed by smallest pattern id.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    ids: Vec<String>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    /// components[c] lists node indices; component_of[v] and parity[v] place
    /// each node. parity is relative to the component's smallest-id node.
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    parity: Vec<u8>,
}

/// Builds the conflict graph: an edge joins two patterns whose clearance is
/// strictly below `s_dp`. Distance exactly `s_dp` is legal.
pub fn build_conflict_graph(cell: &Cell, s_dp: f64) -> ConflictGraph {
    let n = cell.patterns.len();
    let ids: Vec<String> = cell.patterns.iter().map(|p| p.id.clone()).collect();
    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); n];
    let limit = s_dp * s_dp;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = cell.patterns[i].clearance_sq(&cell.patterns[j]);
            if (d2 as f64) < limit {
                edges.push((i, j));
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }

    // Discover components seeded in ascending id order, then sort the list
    // by each component's smallest id so the order is independent of pattern
    // declaration order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let mut component_of = vec![usize::MAX; n];
    let mut parity = vec![0u8; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &root in &order {
        if component_of[root] != usize::MAX {
            continue;
        }
        let c = components.len();
        let mut members = vec![root];
        component_of[root] = c;
        parity[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if component_of[v] == usize::MAX {
                    component_of[v] = c;
                    parity[v] = parity[u] ^ 1;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        components.push(members);
    }

    ConflictGraph {
        ids,
        edges,
        adj,
        components,
        component_of,
        parity,
    }
}

impl ConflictGraph {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_of(&self, node: usize) -> usize {
        self.component_of[node]
    }

    /// Returns an odd cycle if the graph is not bipartite. The BFS parity
    /// labeling is consistent iff every edge joins opposite parities.
    fn odd_cycle(&self) -> Option<Vec<String>> {
        for &(u, v) in &self.edges {
            if self.parity[u] == self.parity[v] {
                return Some(self.cycle_through(u, v));
            }
        }
        None
    }

    /// Shortest path u..v avoiding nothing (BFS), closed by the (u,v) edge.
    /// Same-parity endpoints make the cycle odd.
    fn cycle_through(&self, u: usize, v: usize) -> Vec<String> {
        let n = self.ids.len();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([u]);
        seen[u] = true;
        while let Some(x) = queue.pop_front() {
            if x == v {
                break;
            }
            for &y in &self.adj[x] {
                if !seen[y] && !(x == u && y == v) {
                    seen[y] = true;
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path.into_iter().map(|i| self.ids[i].clone()).collect()
    }

    /// Number of valid colorings (2^components) after the bipartite check.
    pub fn candidate_count(&self) -> Result<usize, ColoringError> {
        if let Some(cycle) = self.odd_cycle() {
            return Err(ColoringError::NotDecomposable { cycle });
        }
        if self.components.len() > MAX_COMPONENTS {
            return Err(ColoringError::TooManyComponents {
                count: self.components.len(),
            });
        }
        Ok(1usize << self.components.len())
    }

    /// Bit of `index` that selects component `comp`'s orientation. The first
    /// component occupies the most significant bit.
    pub fn component_option(&self, index: usize, comp: usize) -> usize {
        let k = self.components.len();
        (index >> (k - 1 - comp)) & 1
    }

    /// True when two nodes always share a color (same component, even path).
    pub fn same_parity(&self, a: usize, b: usize) -> bool {
        self.parity[a] == self.parity[b]
    }

    /// The orientation bit of `node`'s component under which `node` takes
    /// `color`.
    pub fn option_for_color(&self, node: usize, color: MaskColor) -> usize {
        (self.parity[node] ^ (color == MaskColor::Trim) as u8) as usize
    }

    /// `index` with component `comp`'s orientation bit replaced.
    pub fn with_component_option(&self, index: usize, comp: usize, option: usize) -> usize {
        let k = self.components.len();
        let bit = 1usize << (k - 1 - comp);
        if option == 0 {
            index & !bit
        } else {
            index | bit
        }
    }

    /// Materializes candidate `index` in canonical order.
    pub fn candidate(&self, index: usize) -> Result<ColoringCandidate, ColoringError> {
        let count = self.candidate_count()?;
        if index >= count {
            return Err(ColoringError::IndexOutOfRange { index, count });
        }
        let mut colors = vec![MaskColor::Mandrel; self.ids.len()];
        for (v, color) in colors.iter_mut().enumerate() {
            let bit = self.component_option(index, self.component_of[v]) as u8;
            *color = if self.parity[v] ^ bit == 0 {
                MaskColor::Mandrel
            } else {
                MaskColor::Trim
            };
        }
        Ok(ColoringCandidate { colors })
    }
}

/// One valid two-coloring; colors are indexed by the cell's pattern order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringCandidate {
    pub colors: Vec<MaskColor>,
}

impl ColoringCandidate {
    pub fn assignment(&self, graph: &ConflictGraph) -> BTreeMap<String, MaskColor> {
        graph
            .ids()
            .iter()
            .cloned()
            .zip(self.colors.iter().copied())
            .collect()
    }
}

/// Enumerates every valid coloring in canonical order. Errors rather than
/// returning an empty list: a bipartite graph always has at least one
/// candidate.
pub fn enumerate_colorings(graph: &ConflictGraph) -> Result<Vec<ColoringCandidate>, ColoringError> {
    let count = graph.candidate_count()?;
    (0..count).map(|i| graph.candidate(i)).collect()
}

/// Checks a full assignment against the graph: true iff every edge joins
/// different colors.
pub fn validate_coloring(
    graph: &ConflictGraph,
    assignment: &BTreeMap<String, MaskColor>,
) -> Result<bool, ColoringError> {
    for id in assignment.keys() {
        if !graph.ids().iter().any(|g| g == id) {
            return Err(ColoringError::UnknownPattern { id: id.clone() });
        }
    }
    let mut colors = Vec::with_capacity(graph.node_count());
    for id in graph.ids() {
        match assignment.get(id) {
            Some(c) => colors.push(*c),
            None => return Err(ColoringError::MissingPattern { id: id.clone() }),
        }
    }
    Ok(graph.edges().iter().all(|&(u, v)| colors[u] != colors[v]))
}
