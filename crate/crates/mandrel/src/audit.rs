//! Independent manufacturability audit.
//!
//! Flattens a colored placement row by row and re-derives every spacing
//! violation straight from geometry, without consulting the pair table.
//! Power and ground rails are merged into one row-spanning pattern each;
//! cells disagreeing on a rail color are reported as mismatches and that
//! rail is excluded from spacing analysis. Rows are independent; rail
//! sharing between vertically adjacent rows is out of scope.

use crate::coloring::MaskColor;
use crate::geometry::{Net, Rect};
use crate::placement::Placement;
use crate::profile::LibraryProfile;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Cells in one row give a merged rail different colors.
    RailMismatch { row: usize, net: Net },
    /// Two same-color patterns closer than the spacing threshold.
    Spacing {
        a: String,
        b: String,
        clearance_sq: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RailMismatch { row, net } => {
                write!(f, "row {row}: inconsistent {net} rail colors")
            }
            Violation::Spacing { a, b, clearance_sq } => {
                write!(
                    f,
                    "{a} and {b} same-color at squared clearance {clearance_sq}"
                )
            }
        }
    }
}

struct AuditNode {
    name: String,
    color: MaskColor,
    rects: Vec<Rect>,
}

/// All violations in deterministic order: per row, rail mismatches first
/// (power before ground), then spacing pairs sorted by name. Instances
/// without a chosen coloring are audited under candidate 0, matching the
/// legalizer's default.
pub fn audit_placement(
    placement: &Placement,
    profile: &LibraryProfile,
    s_dp: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for row in &placement.rows {
        let mut nodes: Vec<AuditNode> = Vec::new();
        let mut rails: [(Vec<MaskColor>, Vec<Rect>); 2] = Default::default();

        for pc in &row.cells {
            let Some(idx) = profile.index_of(&pc.cell) else {
                continue;
            };
            let prof = &profile.profiles[idx];
            let cell = prof.cell.oriented(pc.orient);
            let colors = &prof.colorings[pc.coloring.unwrap_or(0)].colors;
            for (pi, pattern) in cell.patterns.iter().enumerate() {
                let rects: Vec<Rect> = pattern
                    .rects
                    .iter()
                    .map(|r| r.shifted(pc.x, row.y))
                    .collect();
                match pattern.net {
                    Net::Power => {
                        rails[0].0.push(colors[pi]);
                        rails[0].1.extend(rects);
                    }
                    Net::Ground => {
                        rails[1].0.push(colors[pi]);
                        rails[1].1.extend(rects);
                    }
                    Net::Signal => nodes.push(AuditNode {
                        name: format!("{}/{}", pc.instance, pattern.id),
                        color: colors[pi],
                        rects,
                    }),
                }
            }
        }

        for (slot, net) in [(0, Net::Power), (1, Net::Ground)] {
            let (colors, rects) = &rails[slot];
            if colors.is_empty() {
                continue;
            }
            if colors.iter().any(|&c| c != colors[0]) {
                out.push(Violation::RailMismatch {
                    row: row.index,
                    net,
                });
            } else {
                nodes.push(AuditNode {
                    name: format!("row{}/{net}", row.index),
                    color: colors[0],
                    rects: rects.clone(),
                });
            }
        }

        out.extend(row_spacing_violations(&nodes, s_dp));
    }
    out
}

fn row_spacing_violations(nodes: &[AuditNode], s_dp: f64) -> Vec<Violation> {
    let limit = s_dp * s_dp;
    let window = s_dp.ceil() as i64;
    let mut flat: Vec<(Rect, usize)> = nodes
        .iter()
        .enumerate()
        .flat_map(|(ni, n)| n.rects.iter().map(move |&r| (r, ni)))
        .collect();
    flat.sort_unstable_by_key(|(r, ni)| (r.x_lo, r.y_lo, r.x_hi, r.y_hi, *ni));

    let mut worst: BTreeMap<(&str, &str), i64> = BTreeMap::new();
    for i in 0..flat.len() {
        let (ra, na) = flat[i];
        for &(rb, nb) in flat[i + 1..].iter() {
            if rb.x_lo - ra.x_hi >= window {
                break;
            }
            if na == nb || nodes[na].color != nodes[nb].color {
                continue;
            }
            let c2 = ra.clearance_sq(&rb);
            if (c2 as f64) < limit {
                let (a, b) = (nodes[na].name.as_str(), nodes[nb].name.as_str());
                let key = if a <= b { (a, b) } else { (b, a) };
                let slot = worst.entry(key).or_insert(i64::MAX);
                *slot = (*slot).min(c2);
            }
        }
    }
    worst
        .into_iter()
        .map(|((a, b), clearance_sq)| Violation::Spacing {
            a: a.to_string(),
            b: b.to_string(),
            clearance_sq,
        })
        .collect()
}
