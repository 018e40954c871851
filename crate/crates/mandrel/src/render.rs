//! SVG rendering of colored placements.
//!
//! Layout y grows upward; SVG y grows downward, so rects are flipped about
//! the drawing's top edge. Output is deterministic: fixed header, fixed
//! iteration order, integer coordinates only.

use crate::coloring::MaskColor;
use crate::placement::Placement;
use crate::profile::LibraryProfile;
use std::fmt;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderError {
    UnknownCell {
        instance: String,
        cell: String,
    },
    MissingColoring {
        instance: String,
    },
    BadColoring {
        instance: String,
        coloring: usize,
        count: usize,
    },
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::UnknownCell { instance, cell } => {
                write!(f, "instance {instance} references unknown cell {cell}")
            }
            RenderError::MissingColoring { instance } => {
                write!(f, "instance {instance} has no coloring index")
            }
            RenderError::BadColoring {
                instance,
                coloring,
                count,
            } => {
                write!(
                    f,
                    "instance {instance}: coloring {coloring} out of range (cell has {count})"
                )
            }
        }
    }
}

impl std::error::Error for RenderError {}

const MARGIN: i64 = 2;

/// Renders every row with one fill class per mask, a stroked outline per
/// cell instance, and the instance name as a hover title.
pub fn render_svg(placement: &Placement, profile: &LibraryProfile) -> Result<String, RenderError> {
    let row_h = profile.profiles.first().map(|p| p.cell.height).unwrap_or(0);
    let mut x_lo = i64::MAX;
    let mut x_hi = i64::MIN;
    let mut y_lo = i64::MAX;
    let mut y_hi = i64::MIN;
    for row in &placement.rows {
        if row.cells.is_empty() {
            continue;
        }
        y_lo = y_lo.min(row.y);
        y_hi = y_hi.max(row.y + row_h);
        for pc in &row.cells {
            let prof = profile
                .index_of(&pc.cell)
                .map(|i| &profile.profiles[i])
                .ok_or_else(|| RenderError::UnknownCell {
                    instance: pc.instance.clone(),
                    cell: pc.cell.clone(),
                })?;
            x_lo = x_lo.min(pc.x);
            x_hi = x_hi.max(pc.x + prof.cell.width);
        }
    }
    if x_lo > x_hi {
        x_lo = 0;
        x_hi = 0;
        y_lo = 0;
        y_hi = 0;
    }
    let width = x_hi - x_lo + 2 * MARGIN;
    let height = y_hi - y_lo + 2 * MARGIN;
    // Flips a layout rect's top edge into SVG space.
    let fy = |layout_y_hi: i64| y_hi - layout_y_hi + MARGIN;
    let fx = |layout_x: i64| layout_x - x_lo + MARGIN;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" width=\"{w}\" height=\"{h}\">",
        w = width * 8,
        h = height * 8,
    );
    s.push_str("<style>\n");
    s.push_str(".mandrel { fill: #2f6fb2; }\n");
    s.push_str(".trim { fill: #e2892b; }\n");
    s.push_str(".cell { fill: none; stroke: #444444; stroke-width: 0.2; }\n");
    s.push_str("</style>\n");
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    for row in &placement.rows {
        for pc in &row.cells {
            let prof = &profile.profiles[profile.index_of(&pc.cell).unwrap()];
            let coloring = pc.coloring.ok_or_else(|| RenderError::MissingColoring {
                instance: pc.instance.clone(),
            })?;
            let colors = &prof
                .colorings
                .get(coloring)
                .ok_or_else(|| RenderError::BadColoring {
                    instance: pc.instance.clone(),
                    coloring,
                    count: prof.colorings.len(),
                })?
                .colors;
            let cell = prof.cell.oriented(pc.orient);
            let _ = writeln!(s, "<g><title>{} {}</title>", pc.instance, pc.cell);
            let _ = writeln!(
                s,
                "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                fx(pc.x),
                fy(row.y + cell.height),
                cell.width,
                cell.height,
            );
            for (pi, pat) in cell.patterns.iter().enumerate() {
                let class = match colors[pi] {
                    MaskColor::Mandrel => "mandrel",
                    MaskColor::Trim => "trim",
                };
                for r in &pat.rects {
                    let _ = writeln!(
                        s,
                        "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                        fx(pc.x + r.x_lo),
                        fy(row.y + r.y_hi),
                        r.width(),
                        r.height(),
                    );
                }
            }
            s.push_str("</g>\n");
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
