//! Pairwise decomposability table.
//!
//! For every ordered cell pair and orientation pair, the table stores the
//! minimum-overlay coloring pair that lets the two cells abut at zero gap,
//! or nothing when no coloring works. Legalization consults the table
//! instead of re-solving the merged coloring problem per placement site.

use crate::coloring::MaskColor;
use crate::geometry::{Net, Orientation, Pattern, Rect, Side};
use crate::profile::{pg_compatible, CellProfile, LibraryProfile};
use std::fmt;

/// Orientation pairs in canonical order; entry candidate lists and tie
/// breaks follow this ranking.
pub const ORIENTATION_PAIRS: [(Orientation, Orientation); 4] = [
    (Orientation::R0, Orientation::R0),
    (Orientation::R0, Orientation::MY),
    (Orientation::MY, Orientation::R0),
    (Orientation::MY, Orientation::MY),
];

fn orientation_rank(left: Orientation, right: Orientation) -> usize {
    ORIENTATION_PAIRS
        .iter()
        .position(|&p| p == (left, right))
        .unwrap()
}

/// One decomposable way to abut a cell pair at zero gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolutionCandidate {
    pub orient_left: Orientation,
    pub orient_right: Orientation,
    pub coloring_left: usize,
    pub coloring_right: usize,
    pub overlay: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DplutError {
    UnknownCell { name: String },
}

impl fmt::Display for DplutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DplutError::UnknownCell { name } => write!(f, "cell {name} not in table"),
        }
    }
}

impl std::error::Error for DplutError {}

/// The N x N table plus the parameters and library fingerprint it was
/// built under.
#[derive(Debug, Clone, PartialEq)]
pub struct Dplut {
    pub s_dp: f64,
    pub w_spacer: f64,
    pub s_b_min: f64,
    pub library_hash: String,
    pub cells: Vec<String>,
    entries: Vec<Vec<SolutionCandidate>>,
}

impl Dplut {
    pub fn from_parts(
        s_dp: f64,
        w_spacer: f64,
        s_b_min: f64,
        library_hash: String,
        cells: Vec<String>,
        entries: Vec<Vec<SolutionCandidate>>,
    ) -> Dplut {
        assert_eq!(entries.len(), cells.len() * cells.len());
        Dplut {
            s_dp,
            w_spacer,
            s_b_min,
            library_hash,
            cells,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_index(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c == name)
    }

    /// Candidates for left cell index `i` abutting right cell index `j`,
    /// sorted by ascending overlay then orientation rank.
    pub fn entry(&self, i: usize, j: usize) -> &[SolutionCandidate] {
        &self.entries[i * self.cells.len() + j]
    }

    pub fn query(&self, left: &str, right: &str) -> Result<&[SolutionCandidate], DplutError> {
        let i = self
            .cell_index(left)
            .ok_or_else(|| DplutError::UnknownCell {
                name: left.to_string(),
            })?;
        let j = self
            .cell_index(right)
            .ok_or_else(|| DplutError::UnknownCell {
                name: right.to_string(),
            })?;
        Ok(self.entry(i, j))
    }

    pub fn non_empty_entries(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_empty()).count()
    }
}

fn shifted_pattern(p: &Pattern, dx: i64) -> Pattern {
    Pattern {
        id: p.id.clone(),
        net: p.net,
        rects: p.rects.iter().map(|r| r.shifted(dx, 0)).collect(),
    }
}

/// All coloring pairs under which the oriented cells, abutted with `gap`
/// between them, stay conflict-free. Power and ground rails of the two
/// cells are treated as single row-spanning patterns, so both rails must
/// take one color and never conflict with each other.
///
/// Pairs are returned in lexicographic (left index, right index) order.
pub fn full_pair_check(
    left: &CellProfile,
    o_left: Orientation,
    right: &CellProfile,
    o_right: Orientation,
    gap: i64,
    s_dp: f64,
) -> Vec<(usize, usize)> {
    let lc = left.cell.oriented(o_left);
    let rc = right.cell.oriented(o_right);
    let dx = lc.width + gap;
    let rp: Vec<Pattern> = rc.patterns.iter().map(|p| shifted_pattern(p, dx)).collect();

    let limit = s_dp * s_dp;
    let is_rail_pair = |a: &Pattern, b: &Pattern| a.net == b.net && a.net != Net::Signal;

    // Cross edges between left and right patterns; same-net rail pairs are
    // one merged pattern, not a conflicting pair.
    let mut cross = Vec::new();
    for (i, a) in lc.patterns.iter().enumerate() {
        for (j, b) in rp.iter().enumerate() {
            if is_rail_pair(a, b) {
                continue;
            }
            if (a.clearance_sq(b) as f64) < limit {
                cross.push((i, j));
            }
        }
    }

    let rail_link = |net| match (lc.rail_index(net), rc.rail_index(net)) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let power = rail_link(Net::Power);
    let ground = rail_link(Net::Ground);

    let mut out = Vec::new();
    for (ci, cand_l) in left.colorings.iter().enumerate() {
        for (cj, cand_r) in right.colorings.iter().enumerate() {
            let linked_ok = |link: Option<(usize, usize)>| {
                link.is_none_or(|(a, b)| cand_l.colors[a] == cand_r.colors[b])
            };
            if !linked_ok(power) || !linked_ok(ground) {
                continue;
            }
            if cross
                .iter()
                .all(|&(i, j)| cand_l.colors[i] != cand_r.colors[j])
            {
                out.push((ci, cj));
            }
        }
    }
    out
}

/// One merged pattern of the abutted pair: rects in row coordinates plus
/// the color it takes under the chosen candidates.
struct MergedPattern {
    color: MaskColor,
    rects: Vec<Rect>,
}

fn merged_patterns(
    left: &CellProfile,
    o_left: Orientation,
    c_left: usize,
    right: &CellProfile,
    o_right: Orientation,
    c_right: usize,
) -> (Vec<MergedPattern>, i64) {
    let lc = left.cell.oriented(o_left);
    let rc = right.cell.oriented(o_right);
    let boundary = lc.width;
    let cl = &left.colorings[c_left].colors;
    let cr = &right.colorings[c_right].colors;

    let mut out: Vec<MergedPattern> = Vec::new();
    let mut rail_slot: [Option<usize>; 2] = [None, None];
    let rail_id = |net| match net {
        Net::Power => Some(0usize),
        Net::Ground => Some(1),
        Net::Signal => None,
    };

    let mut add = |p: &Pattern, color: MaskColor, dx: i64| {
        let rects = p.rects.iter().map(|r| r.shifted(dx, 0)).collect::<Vec<_>>();
        if let Some(slot) = rail_id(p.net) {
            if let Some(idx) = rail_slot[slot] {
                out[idx].rects.extend(rects);
                return;
            }
            rail_slot[slot] = Some(out.len());
        }
        out.push(MergedPattern { color, rects });
    };

    for (i, p) in lc.patterns.iter().enumerate() {
        add(p, cl[i], 0);
    }
    for (j, p) in rc.patterns.iter().enumerate() {
        add(p, cr[j], boundary);
    }
    (out, boundary)
}

/// Exposed vertical edges of a rect union, per horizontal slab.
fn exposed_edges(rects: &[Rect]) -> Vec<(i64, i64, i64, Side)> {
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| [r.y_lo, r.y_hi]).collect();
    ys.sort_unstable();
    ys.dedup();
    let mut edges = Vec::new();
    for w in ys.windows(2) {
        let (y0, y1) = (w[0], w[1]);
        let mut spans: Vec<(i64, i64)> = rects
            .iter()
            .filter(|r| r.y_lo <= y0 && r.y_hi >= y1)
            .map(|r| (r.x_lo, r.x_hi))
            .collect();
        if spans.is_empty() {
            continue;
        }
        spans.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::new();
        for (lo, hi) in spans {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        for (lo, hi) in merged {
            edges.push((lo, y0, y1, Side::Left));
            edges.push((hi, y0, y1, Side::Right));
        }
    }
    edges
}

/// Total y-length of `[y0, y1]` not covered by `protected` intervals.
fn unprotected_length(y0: i64, y1: i64, protected: &mut [(i64, i64)]) -> i64 {
    protected.sort_unstable();
    let mut uncovered = 0;
    let mut cursor = y0;
    for &(lo, hi) in protected.iter() {
        let lo = lo.max(y0);
        let hi = hi.min(y1);
        if hi <= cursor {
            continue;
        }
        if lo > cursor {
            uncovered += lo - cursor;
        }
        cursor = cursor.max(hi);
    }
    uncovered + (y1 - cursor).max(0)
}

/// Overlay error of one abutted, conflict-free configuration: the boundary
/// facing trim edge length left unprotected by nearby mandrel material.
///
/// A trim edge within `s_dp` of the boundary and facing it is protected
/// where some mandrel rect of either cell sits within `w_spacer`
/// horizontally and overlaps it in y. The reported value is the total
/// unprotected length.
#[allow(clippy::too_many_arguments)]
pub fn overlay_error(
    left: &CellProfile,
    o_left: Orientation,
    c_left: usize,
    right: &CellProfile,
    o_right: Orientation,
    c_right: usize,
    s_dp: f64,
    w_spacer: f64,
) -> i64 {
    let (patterns, boundary) = merged_patterns(left, o_left, c_left, right, o_right, c_right);
    let mandrels: Vec<&Rect> = patterns
        .iter()
        .filter(|p| p.color == MaskColor::Mandrel)
        .flat_map(|p| p.rects.iter())
        .collect();

    let mut overlay = 0;
    for pattern in patterns.iter().filter(|p| p.color == MaskColor::Trim) {
        for (x, y0, y1, facing) in exposed_edges(&pattern.rects) {
            let near = match facing {
                Side::Right => x <= boundary && ((boundary - x) as f64) < s_dp,
                Side::Left => x >= boundary && ((x - boundary) as f64) < s_dp,
            };
            if !near {
                continue;
            }
            let mut protected: Vec<(i64, i64)> = mandrels
                .iter()
                .filter(|r| {
                    let dist = (r.x_lo - x).max(x - r.x_hi).max(0);
                    (dist as f64) <= w_spacer && r.y_hi > y0 && r.y_lo < y1
                })
                .map(|r| (r.y_lo.max(y0), r.y_hi.min(y1)))
                .collect();
            overlay += unprotected_length(y0, y1, &mut protected);
        }
    }
    overlay
}

/// Builds the full table. Entries hold at most one candidate per
/// orientation pair (the minimum-overlay coloring pair, lexicographic tie
/// break) and are sorted by overlay then orientation rank.
pub fn build_dplut(profile: &LibraryProfile, library_hash: String) -> Dplut {
    let n = profile.profiles.len();
    let mut entries = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in 0..n {
            let pl = &profile.profiles[i];
            let pr = &profile.profiles[j];
            if !pg_compatible(pl.pg, pr.pg) {
                continue;
            }
            let mut list: Vec<SolutionCandidate> = Vec::new();
            for &(ol, or) in &ORIENTATION_PAIRS {
                let mut best: Option<SolutionCandidate> = None;
                for (cl, cr) in full_pair_check(pl, ol, pr, or, 0, profile.s_dp) {
                    let overlay =
                        overlay_error(pl, ol, cl, pr, or, cr, profile.s_dp, profile.w_spacer);
                    if best.is_none_or(|b| overlay < b.overlay) {
                        best = Some(SolutionCandidate {
                            orient_left: ol,
                            orient_right: or,
                            coloring_left: cl,
                            coloring_right: cr,
                            overlay,
                        });
                    }
                }
                list.extend(best);
            }
            list.sort_by_key(|c| (c.overlay, orientation_rank(c.orient_left, c.orient_right)));
            entries[i * n + j] = list;
        }
    }
    Dplut {
        s_dp: profile.s_dp,
        w_spacer: profile.w_spacer,
        s_b_min: profile.s_b_min,
        library_hash,
        cells: profile
            .profiles
            .iter()
            .map(|p| p.cell.name.clone())
            .collect(),
        entries,
    }
}
