//! Row-wise placement legalization.
//!
//! Each row is processed independently: rail colors are harmonized to a
//! deterministic row target, a flip pass rewrites orientations and
//! colorings of conflicting pairs from the pair table, and a spread pass
//! opens gaps for whatever the flips could not fix. The bounded mode caps
//! every row at its original occupied extent, so it resolves conflicts by
//! flipping alone and the layout area is preserved exactly.

use crate::coloring::MaskColor;
use crate::dplut::Dplut;
use crate::geometry::Side;
use crate::placement::{PlacedCell, Placement};
use crate::profile::{pg_compatible, CellProfile, LibraryProfile, PgType};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Area-unbounded: spread as far as needed.
    Ub,
    /// Area-bounded: never grow a row past its original extent.
    B,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Ub => write!(f, "ub"),
            Mode::B => write!(f, "b"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalizeReport {
    pub mode: Mode,
    pub conflicts_before: usize,
    pub conflicts_after: usize,
    pub area_before: i64,
    pub area_after: i64,
    pub hpwl_before: i64,
    pub hpwl_after: i64,
    pub flips: usize,
    pub total_spread: i64,
    pub unsolvable_pg_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LegalizeError {
    InconsistentLibrary { cell: String },
}

impl fmt::Display for LegalizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LegalizeError::InconsistentLibrary { cell } => {
                write!(f, "cell {cell} missing from the pair table or library")
            }
        }
    }
}

impl std::error::Error for LegalizeError {}

fn prof<'a>(profile: &'a LibraryProfile, pc: &PlacedCell) -> &'a CellProfile {
    &profile.profiles[profile.index_of(&pc.cell).unwrap()]
}

/// True when the adjacent pair cannot be manufactured as placed: the gap
/// is too small for their oriented boundary clearances and the current
/// (orientation, coloring) tuple is not a stored solution candidate.
/// Rail-incompatible cells conflict at any gap; the merged row rails
/// contradict no matter how far apart the cells sit.
pub fn is_conflict(
    left: &PlacedCell,
    right: &PlacedCell,
    profile: &LibraryProfile,
    table: &Dplut,
) -> bool {
    let lp = prof(profile, left);
    let rp = prof(profile, right);
    if !pg_compatible(lp.pg, rp.pg) {
        return true;
    }
    let gap = right.x - (left.x + lp.cell.width);
    let b_left = lp.s_b(Side::Right, left.orient);
    let b_right = rp.s_b(Side::Left, right.orient);
    if gap as f64 >= profile.s_dp - b_left - b_right {
        return false;
    }
    let stored = table.query(&left.cell, &right.cell).is_ok_and(|cands| {
        cands.iter().any(|c| {
            c.orient_left == left.orient
                && c.orient_right == right.orient
                && Some(c.coloring_left) == left.coloring
                && Some(c.coloring_right) == right.coloring
        })
    });
    !(stored && gap >= 0)
}

fn count_conflicts(cells: &[PlacedCell], profile: &LibraryProfile, table: &Dplut) -> usize {
    cells
        .windows(2)
        .filter(|w| is_conflict(&w[0], &w[1], profile, table))
        .count()
}

/// Total adjacent-pair conflicts over every row, as placed.
pub fn placement_conflicts(
    placement: &Placement,
    profile: &LibraryProfile,
    table: &Dplut,
) -> usize {
    placement
        .rows
        .iter()
        .map(|r| count_conflicts(&r.cells, profile, table))
        .sum()
}

/// Row-wide rail color targets: the first rail-bearing cell anchors the
/// power color, and the first Same or Diff cell fixes the relation.
fn row_rail_targets(
    cells: &[PlacedCell],
    profile: &LibraryProfile,
) -> (Option<MaskColor>, Option<MaskColor>) {
    let mut power = None;
    let mut ground = None;
    let mut relation = None;
    for pc in cells {
        let p = prof(profile, pc);
        let (cp, cg) = p.rail_colors(pc.coloring.unwrap_or(0));
        if power.is_none() {
            power = cp;
        }
        if ground.is_none() {
            ground = cg;
        }
        if relation.is_none() && matches!(p.pg, PgType::Same | PgType::Diff) {
            relation = Some(p.pg);
        }
    }
    match (power, relation) {
        (Some(p), Some(PgType::Same)) => (Some(p), Some(p)),
        (Some(p), Some(PgType::Diff)) => (Some(p), Some(p.swapped())),
        _ => (power, ground),
    }
}

fn harmonize_row(
    cells: &mut [PlacedCell],
    profile: &LibraryProfile,
    power: Option<MaskColor>,
    ground: Option<MaskColor>,
) {
    for pc in cells {
        let p = prof(profile, pc);
        let idx = pc.coloring.unwrap_or(0);
        if let Some(adjusted) = p.index_with_rails(idx, power, ground) {
            pc.coloring = Some(adjusted);
        }
    }
}

/// Resolves conflicting pairs by rewriting orientations and colorings from
/// the table, sweeping left to right until a full sweep changes nothing.
/// The left cell of a pair stays fixed except at the row start, candidates
/// must keep row rail targets, and a candidate is rejected when it would
/// newly break the pair to its right. Positions never change.
fn flip_pass(
    cells: &mut [PlacedCell],
    profile: &LibraryProfile,
    table: &Dplut,
    power: Option<MaskColor>,
    ground: Option<MaskColor>,
) -> usize {
    let mut flips = 0;
    loop {
        let mut changed = false;
        for i in 0..cells.len().saturating_sub(1) {
            let (left, right) = (&cells[i], &cells[i + 1]);
            let lp = prof(profile, left);
            let rp = prof(profile, right);
            if !pg_compatible(lp.pg, rp.pg) || !is_conflict(left, right, profile, table) {
                continue;
            }
            let Ok(cands) = table.query(&left.cell, &right.cell) else {
                continue;
            };
            let chosen = cands.iter().find(|c| {
                let keeps_left =
                    c.orient_left == left.orient && Some(c.coloring_left) == left.coloring;
                if i > 0 && !keeps_left {
                    return false;
                }
                if !lp.rails_match(c.coloring_left, power, ground)
                    || !rp.rails_match(c.coloring_right, power, ground)
                {
                    return false;
                }
                if let Some(after) = cells.get(i + 2) {
                    let mut next = right.clone();
                    next.orient = c.orient_right;
                    next.coloring = Some(c.coloring_right);
                    if is_conflict(&next, after, profile, table)
                        && !is_conflict(right, after, profile, table)
                    {
                        return false;
                    }
                }
                true
            });
            if let Some(c) = chosen.copied() {
                cells[i].orient = c.orient_left;
                cells[i].coloring = Some(c.coloring_left);
                cells[i + 1].orient = c.orient_right;
                cells[i + 1].coloring = Some(c.coloring_right);
                flips += 1;
                changed = true;
            }
        }
        if !changed {
            return flips;
        }
    }
}

/// Opens the minimum distance-safe gap at each remaining conflicting pair
/// by shifting the suffix right. `row_limit` caps the row's right edge;
/// pairs whose shift would exceed it stay unresolved.
fn spread_pass(
    cells: &mut [PlacedCell],
    profile: &LibraryProfile,
    table: &Dplut,
    row_limit: Option<i64>,
) -> i64 {
    let mut total = 0;
    for i in 0..cells.len().saturating_sub(1) {
        let (left, right) = (&cells[i], &cells[i + 1]);
        let lp = prof(profile, left);
        let rp = prof(profile, right);
        if !pg_compatible(lp.pg, rp.pg) || !is_conflict(left, right, profile, table) {
            continue;
        }
        let needed =
            profile.s_dp - lp.s_b(Side::Right, left.orient) - rp.s_b(Side::Left, right.orient);
        let g = (needed.ceil() as i64).max(0);
        let gap = right.x - (left.x + lp.cell.width);
        let shift = g - gap;
        if shift <= 0 {
            continue;
        }
        if let Some(limit) = row_limit {
            let last = cells.last().unwrap();
            let end = last.x + prof(profile, last).cell.width;
            if end + shift > limit {
                continue;
            }
        }
        for pc in &mut cells[i + 1..] {
            pc.x += shift;
        }
        total += shift;
    }
    total
}

/// Legalizes every row and reports the before/after metrics.
pub fn legalize(
    placement: &Placement,
    profile: &LibraryProfile,
    table: &Dplut,
    mode: Mode,
) -> Result<(Placement, LegalizeReport), LegalizeError> {
    for row in &placement.rows {
        for pc in &row.cells {
            if profile.index_of(&pc.cell).is_none() || table.cell_index(&pc.cell).is_none() {
                return Err(LegalizeError::InconsistentLibrary {
                    cell: pc.cell.clone(),
                });
            }
        }
    }

    let mut work = placement.clone();
    for row in &mut work.rows {
        for pc in &mut row.cells {
            pc.coloring = Some(pc.coloring.unwrap_or(0));
        }
    }

    let conflicts_before: usize = work
        .rows
        .iter()
        .map(|r| count_conflicts(&r.cells, profile, table))
        .sum();
    let area_before = work.area(profile);
    let hpwl_before = work.hpwl(profile);

    let mut flips = 0;
    let mut total_spread = 0;
    let mut unsolvable_pg_rows = Vec::new();

    for row in &mut work.rows {
        let mut has_same = false;
        let mut has_diff = false;
        for pc in &row.cells {
            match prof(profile, pc).pg {
                PgType::Same => has_same = true,
                PgType::Diff => has_diff = true,
                PgType::Free => {}
            }
        }
        if has_same && has_diff {
            unsolvable_pg_rows.push(row.index);
        }

        let row_limit = match (mode, row.cells.last()) {
            (Mode::B, Some(last)) => Some(last.x + prof(profile, last).cell.width),
            _ => None,
        };

        let (power, ground) = row_rail_targets(&row.cells, profile);
        let before = count_conflicts(&row.cells, profile, table);
        let saved: Vec<Option<usize>> = row.cells.iter().map(|c| c.coloring).collect();
        harmonize_row(&mut row.cells, profile, power, ground);
        if mode == Mode::B && count_conflicts(&row.cells, profile, table) > before {
            for (pc, c) in row.cells.iter_mut().zip(saved) {
                pc.coloring = c;
            }
        }

        flips += flip_pass(&mut row.cells, profile, table, power, ground);
        total_spread += spread_pass(&mut row.cells, profile, table, row_limit);
    }

    let conflicts_after: usize = work
        .rows
        .iter()
        .map(|r| count_conflicts(&r.cells, profile, table))
        .sum();
    let report = LegalizeReport {
        mode,
        conflicts_before,
        conflicts_after,
        area_before,
        area_after: work.area(profile),
        hpwl_before,
        hpwl_after: work.hpwl(profile),
        flips,
        total_spread,
        unsolvable_pg_rows,
    };
    Ok((work, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::audit_placement;
    use crate::dplut::build_dplut;
    use crate::geometry::{Cell, Net, Orientation, Pattern, Rect};
    use crate::library::{Library, Params};
    use crate::placement::Row;
    use crate::profile::build_profiles;

    fn rect(x_lo: i64, y_lo: i64, x_hi: i64, y_hi: i64) -> Rect {
        Rect::new(x_lo, y_lo, x_hi, y_hi).unwrap()
    }

    fn cell(name: &str, signals: Vec<(&str, Rect)>) -> Cell {
        let mut patterns = vec![
            Pattern {
                id: "vdd".into(),
                net: Net::Power,
                rects: vec![rect(0, 0, 12, 1)],
            },
            Pattern {
                id: "vss".into(),
                net: Net::Ground,
                rects: vec![rect(0, 11, 12, 12)],
            },
        ];
        for (id, r) in signals {
            patterns.push(Pattern {
                id: id.into(),
                net: Net::Signal,
                rects: vec![r],
            });
        }
        Cell::new(name.into(), 12, 12, patterns, vec![]).unwrap()
    }

    fn setup(cells: Vec<Cell>) -> (LibraryProfile, Dplut) {
        let (lib, _) = Library::new("u".into(), Params::default(), cells, false).unwrap();
        let profile = build_profiles(&lib).unwrap();
        let table = build_dplut(&profile, "h".into());
        (profile, table)
    }

    fn inst(name: &str, cell: &str, x: i64) -> PlacedCell {
        PlacedCell {
            instance: name.into(),
            cell: cell.into(),
            x,
            orient: Orientation::R0,
            coloring: None,
        }
    }

    fn place(cells: Vec<PlacedCell>) -> Placement {
        Placement {
            library_name: "lib".into(),
            rows: vec![Row {
                index: 0,
                y: 0,
                capacity: 1000,
                cells,
            }],
            nets: vec![],
        }
    }

    #[test]
    fn distance_safe_pairs_are_not_conflicts() {
        let (profile, table) = setup(vec![
            cell("a", vec![("p", rect(11, 4, 12, 8))]),
            cell("b", vec![]),
        ]);
        let l = inst("u0", "a", 0);
        let r = inst("u1", "a", 17);
        // Gap 5 with port clearances 0: safe by distance alone.
        assert!(!is_conflict(&l, &r, &profile, &table));
        // Mirrored, the right cell's port faces the boundary; abutted with no
        // stored tuple (colorings unset) this is conservatively a conflict.
        let mut r = inst("u1", "a", 12);
        r.orient = Orientation::MY;
        assert!(is_conflict(&l, &r, &profile, &table));
    }

    #[test]
    fn stored_candidate_tuples_are_not_conflicts() {
        let (profile, table) = setup(vec![
            cell("a", vec![("p", rect(11, 4, 12, 8))]),
            cell("b", vec![("q", rect(0, 4, 1, 8))]),
        ]);
        let cand = table.query("a", "b").unwrap()[0];
        let mut l = inst("u0", "a", 0);
        let mut r = inst("u1", "b", 12);
        l.orient = cand.orient_left;
        l.coloring = Some(cand.coloring_left);
        r.orient = cand.orient_right;
        r.coloring = Some(cand.coloring_right);
        assert!(!is_conflict(&l, &r, &profile, &table));
        // A different coloring tuple is conservatively a conflict.
        r.coloring = Some((cand.coloring_right + 1) % 4);
        assert!(is_conflict(&l, &r, &profile, &table));
    }

    #[test]
    fn same_next_to_diff_is_always_a_conflict_when_abutted() {
        let (profile, table) = setup(vec![
            cell("same", vec![("s", rect(6, 2, 7, 10))]),
            cell(
                "diff",
                vec![("a", rect(5, 2, 6, 6)), ("b", rect(7, 5, 8, 10))],
            ),
        ]);
        for ol in [Orientation::R0, Orientation::MY] {
            for or in [Orientation::R0, Orientation::MY] {
                let mut l = inst("u0", "same", 0);
                let mut r = inst("u1", "diff", 12);
                l.orient = ol;
                r.orient = or;
                assert!(is_conflict(&l, &r, &profile, &table));
            }
        }
    }

    #[test]
    fn ub_resolves_everything_and_audits_clean() {
        let (profile, table) = setup(vec![
            cell("a", vec![("p", rect(11, 4, 12, 8))]),
            cell("b", vec![("q", rect(0, 4, 1, 8))]),
        ]);
        let p = place(vec![
            inst("u0", "a", 0),
            inst("u1", "b", 12),
            inst("u2", "a", 24),
            inst("u3", "b", 36),
        ]);
        let (out, report) = legalize(&p, &profile, &table, Mode::Ub).unwrap();
        assert_eq!(report.conflicts_after, 0);
        assert!(report.conflicts_before > 0);
        assert!(audit_placement(&out, &profile, profile.s_dp).is_empty());
        assert!(report.unsolvable_pg_rows.is_empty());
    }

    #[test]
    fn bounded_mode_preserves_area_exactly() {
        let (profile, table) = setup(vec![
            cell("a", vec![("p", rect(11, 4, 12, 8))]),
            cell("b", vec![("q", rect(0, 4, 1, 8))]),
        ]);
        let p = place(vec![inst("u0", "a", 0), inst("u1", "b", 12)]);
        let (out, report) = legalize(&p, &profile, &table, Mode::B).unwrap();
        assert_eq!(report.area_after, report.area_before);
        assert_eq!(report.total_spread, 0);
        assert!(report.conflicts_after <= report.conflicts_before);
        for (pc, original) in out.rows[0].cells.iter().zip(&p.rows[0].cells) {
            assert_eq!(pc.x, original.x);
        }
    }

    #[test]
    fn harmonization_aligns_distant_rail_colors() {
        let (profile, table) = setup(vec![
            cell("a", vec![("p", rect(11, 4, 12, 8))]),
            cell("b", vec![]),
        ]);
        let mut l = inst("u0", "a", 0);
        let mut r = inst("u1", "b", 60);
        // Force clashing rail colors on two distance-safe cells.
        let find = |ci: usize, color| {
            let prof = &profile.profiles[ci];
            (0..prof.colorings.len())
                .find(|&i| prof.rail_colors(i) == (Some(color), Some(color)))
                .unwrap()
        };
        l.coloring = Some(find(0, MaskColor::Mandrel));
        r.coloring = Some(find(1, MaskColor::Trim));
        let p = place(vec![l, r]);
        assert!(!audit_placement(&p, &profile, profile.s_dp).is_empty());
        let (out, report) = legalize(&p, &profile, &table, Mode::Ub).unwrap();
        assert_eq!(report.conflicts_before, 0);
        assert!(audit_placement(&out, &profile, profile.s_dp).is_empty());
    }

    #[test]
    fn legalize_is_idempotent() {
        let (profile, table) = setup(vec![
            cell("a", vec![("p", rect(11, 4, 12, 8))]),
            cell("b", vec![("q", rect(0, 4, 1, 8))]),
        ]);
        let p = place(vec![
            inst("u0", "a", 0),
            inst("u1", "b", 12),
            inst("u2", "b", 30),
        ]);
        for mode in [Mode::Ub, Mode::B] {
            let (once, r1) = legalize(&p, &profile, &table, mode).unwrap();
            let (twice, r2) = legalize(&once, &profile, &table, mode).unwrap();
            assert_eq!(once, twice);
            assert_eq!(r2.flips, 0, "{mode} second pass flipped");
            assert_eq!(r2.total_spread, 0);
            assert_eq!(r2.conflicts_before, r1.conflicts_after);
            assert_eq!(r2.conflicts_after, r1.conflicts_after);
        }
    }

    #[test]
    fn mixed_same_diff_rows_are_reported() {
        let (profile, table) = setup(vec![
            cell("same", vec![("s", rect(6, 2, 7, 10))]),
            cell(
                "diff",
                vec![("a", rect(5, 2, 6, 6)), ("b", rect(7, 5, 8, 10))],
            ),
        ]);
        let p = place(vec![inst("u0", "same", 0), inst("u1", "diff", 12)]);
        let (_, report) = legalize(&p, &profile, &table, Mode::Ub).unwrap();
        assert_eq!(report.unsolvable_pg_rows, vec![0]);
        assert_eq!(report.conflicts_after, 1);
    }
}
