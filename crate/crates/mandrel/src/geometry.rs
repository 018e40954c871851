//! Layout primitives: rectangles, patterns, cells.
//!
//! All coordinates are integer layout units (1 unit = minimum feature width).
//! Distances between shapes are real-valued Euclidean clearances; conflict
//! predicates elsewhere compare squared distances so integer geometry never
//! suffers sqrt rounding at the threshold.

use std::fmt;

/// Axis-aligned rectangle with positive area, in integer layout units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x_lo: i64,
    pub y_lo: i64,
    pub x_hi: i64,
    pub y_hi: i64,
}

impl Rect {
    pub fn new(x_lo: i64, y_lo: i64, x_hi: i64, y_hi: i64) -> Result<Rect, CellError> {
        if x_lo >= x_hi || y_lo >= y_hi {
            return Err(CellError::DegenerateRect {
                x_lo,
                y_lo,
                x_hi,
                y_hi,
            });
        }
        Ok(Rect {
            x_lo,
            y_lo,
            x_hi,
            y_hi,
        })
    }

    pub fn width(&self) -> i64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> i64 {
        self.y_hi - self.y_lo
    }

    /// Axis gap to another rect: 0 when the projections overlap or touch.
    fn gap_x(&self, other: &Rect) -> i64 {
        (self.x_lo.max(other.x_lo) - self.x_hi.min(other.x_hi)).max(0)
    }

    fn gap_y(&self, other: &Rect) -> i64 {
        (self.y_lo.max(other.y_lo) - self.y_hi.min(other.y_hi)).max(0)
    }

    /// Squared Euclidean clearance. Exact in integer arithmetic.
    pub fn clearance_sq(&self, other: &Rect) -> i64 {
        let dx = self.gap_x(other);
        let dy = self.gap_y(other);
        dx * dx + dy * dy
    }

    /// Euclidean clearance between closest points; 0 iff the rects
    /// intersect or touch.
    pub fn clearance(&self, other: &Rect) -> f64 {
        (self.clearance_sq(other) as f64).sqrt()
    }

    /// True when the closed rects share more than a single corner point,
    /// i.e. they overlap or share an edge segment. Two rects meeting only
    /// at a corner do not make a pattern connected.
    fn connects(&self, other: &Rect) -> bool {
        let ix = self.x_hi.min(other.x_hi) - self.x_lo.max(other.x_lo);
        let iy = self.y_hi.min(other.y_hi) - self.y_lo.max(other.y_lo);
        ix >= 0 && iy >= 0 && ix + iy > 0
    }

    fn mirrored(&self, width: i64) -> Rect {
        Rect {
            x_lo: width - self.x_hi,
            y_lo: self.y_lo,
            x_hi: width - self.x_lo,
            y_hi: self.y_hi,
        }
    }

    pub fn shifted(&self, dx: i64, dy: i64) -> Rect {
        Rect {
            x_lo: self.x_lo + dx,
            y_lo: self.y_lo + dy,
            x_hi: self.x_hi + dx,
            y_hi: self.y_hi + dy,
        }
    }
}

/// Net class of a pattern. Power and ground rails are row-global: every cell
/// in a row contributes a segment of the same physical net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Net {
    Power,
    Ground,
    Signal,
}

impl fmt::Display for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Net::Power => write!(f, "power"),
            Net::Ground => write!(f, "ground"),
            Net::Signal => write!(f, "signal"),
        }
    }
}

/// A connected union of rects drawn on one mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub id: String,
    pub net: Net,
    pub rects: Vec<Rect>,
}

impl Pattern {
    /// Minimum squared clearance over all rect pairs.
    pub fn clearance_sq(&self, other: &Pattern) -> i64 {
        let mut best = i64::MAX;
        for a in &self.rects {
            for b in &other.rects {
                best = best.min(a.clearance_sq(b));
            }
        }
        best
    }

    pub fn clearance(&self, other: &Pattern) -> f64 {
        (self.clearance_sq(other) as f64).sqrt()
    }

    /// Horizontal distance from the pattern to a vertical line x = at.
    pub fn x_distance(&self, at: i64) -> i64 {
        self.rects
            .iter()
            .map(|r| (r.x_lo - at).max(at - r.x_hi).max(0))
            .min()
            .unwrap_or(i64::MAX)
    }

    fn connected(&self) -> bool {
        let n = self.rects.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, visited) in seen.iter_mut().enumerate() {
                if !*visited && self.rects[i].connects(&self.rects[j]) {
                    *visited = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Named pin point used for wirelength accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pin {
    pub name: String,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Placement orientation: as-drawn or mirrored about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    R0,
    MY,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::R0 => write!(f, "R0"),
            Orientation::MY => write!(f, "MY"),
        }
    }
}

/// A standard cell: fixed outline, patterns, pins. Cells are immutable once
/// built; orientation is applied by producing a mirrored copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
    pub width: i64,
    pub height: i64,
    pub patterns: Vec<Pattern>,
    pub pins: Vec<Pin>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellError {
    DegenerateRect {
        x_lo: i64,
        y_lo: i64,
        x_hi: i64,
        y_hi: i64,
    },
    EmptyPattern {
        pattern: String,
    },
    DisconnectedPattern {
        pattern: String,
    },
    DuplicatePattern {
        pattern: String,
    },
    DuplicatePin {
        pin: String,
    },
    OutOfBounds {
        pattern: String,
    },
    MultipleRails {
        net: Net,
    },
    BadOutline {
        width: i64,
        height: i64,
    },
    EmptyCell,
}

impl fmt::Display for CellError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellError::DegenerateRect {
                x_lo,
                y_lo,
                x_hi,
                y_hi,
            } => {
                write!(f, "rect ({x_lo},{y_lo},{x_hi},{y_hi}) has no area")
            }
            CellError::EmptyPattern { pattern } => write!(f, "pattern {pattern} has no rects"),
            CellError::DisconnectedPattern { pattern } => {
                write!(f, "pattern {pattern} is not a connected union of rects")
            }
            CellError::DuplicatePattern { pattern } => {
                write!(f, "duplicate pattern id {pattern}")
            }
            CellError::DuplicatePin { pin } => write!(f, "duplicate pin name {pin}"),
            CellError::OutOfBounds { pattern } => {
                write!(f, "pattern {pattern} extends outside the cell outline")
            }
            CellError::MultipleRails { net } => write!(f, "more than one {net} pattern"),
            CellError::BadOutline { width, height } => {
                write!(f, "cell outline {width}x{height} has no area")
            }
            CellError::EmptyCell => write!(f, "cell has no patterns"),
        }
    }
}

impl std::error::Error for CellError {}

impl Cell {
    pub fn new(
        name: String,
        width: i64,
        height: i64,
        patterns: Vec<Pattern>,
        pins: Vec<Pin>,
    ) -> Result<Cell, CellError> {
        if width <= 0 || height <= 0 {
            return Err(CellError::BadOutline { width, height });
        }
        let mut rail_power = 0usize;
        let mut rail_ground = 0usize;
        for (i, p) in patterns.iter().enumerate() {
            if p.rects.is_empty() {
                return Err(CellError::EmptyPattern {
                    pattern: p.id.clone(),
                });
            }
            if !p.connected() {
                return Err(CellError::DisconnectedPattern {
                    pattern: p.id.clone(),
                });
            }
            if patterns[..i].iter().any(|q| q.id == p.id) {
                return Err(CellError::DuplicatePattern {
                    pattern: p.id.clone(),
                });
            }
            for r in &p.rects {
                if r.x_lo < 0 || r.y_lo < 0 || r.x_hi > width || r.y_hi > height {
                    return Err(CellError::OutOfBounds {
                        pattern: p.id.clone(),
                    });
                }
            }
            match p.net {
                Net::Power => rail_power += 1,
                Net::Ground => rail_ground += 1,
                Net::Signal => {}
            }
        }
        if rail_power > 1 {
            return Err(CellError::MultipleRails { net: Net::Power });
        }
        if rail_ground > 1 {
            return Err(CellError::MultipleRails { net: Net::Ground });
        }
        for (i, p) in pins.iter().enumerate() {
            if pins[..i].iter().any(|q| q.name == p.name) {
                return Err(CellError::DuplicatePin {
                    pin: p.name.clone(),
                });
            }
        }
        Ok(Cell {
            name,
            width,
            height,
            patterns,
            pins,
        })
    }

    pub fn pattern(&self, id: &str) -> Option<&Pattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn pattern_index(&self, id: &str) -> Option<usize> {
        self.patterns.iter().position(|p| p.id == id)
    }

    pub fn rail(&self, net: Net) -> Option<&Pattern> {
        self.patterns.iter().find(|p| p.net == net)
    }

    pub fn rail_index(&self, net: Net) -> Option<usize> {
        self.patterns.iter().position(|p| p.net == net)
    }

    /// Minimum horizontal distance from any pattern rect to the named
    /// vertical cell boundary.
    pub fn boundary_clearance(&self, side: Side) -> Result<i64, CellError> {
        if self.patterns.is_empty() {
            return Err(CellError::EmptyCell);
        }
        let at = match side {
            Side::Left => 0,
            Side::Right => self.width,
        };
        Ok(self
            .patterns
            .iter()
            .map(|p| p.x_distance(at))
            .min()
            .unwrap())
    }

    /// Boundary clearance over signal patterns only. Rails run the full cell
    /// width by convention and are merged per row, so they do not count
    /// toward abutment spacing. A cell with no signal patterns reports
    /// `i64::MAX` (nothing can conflict across its boundary).
    pub fn signal_boundary_clearance(&self, side: Side) -> i64 {
        let at = match side {
            Side::Left => 0,
            Side::Right => self.width,
        };
        self.patterns
            .iter()
            .filter(|p| p.net == Net::Signal)
            .map(|p| p.x_distance(at))
            .min()
            .unwrap_or(i64::MAX)
    }

    /// The cell geometry as placed under `orient`.
    pub fn oriented(&self, orient: Orientation) -> Cell {
        match orient {
            Orientation::R0 => self.clone(),
            Orientation::MY => self.mirrored(),
        }
    }

    /// Mirror about the vertical axis: x -> width - x. Pattern ids, nets,
    /// and pin names are preserved; applying twice returns the original.
    pub fn mirrored(&self) -> Cell {
        Cell {
            name: self.name.clone(),
            width: self.width,
            height: self.height,
            patterns: self
                .patterns
                .iter()
                .map(|p| Pattern {
                    id: p.id.clone(),
                    net: p.net,
                    rects: p.rects.iter().map(|r| r.mirrored(self.width)).collect(),
                })
                .collect(),
            pins: self
                .pins
                .iter()
                .map(|p| Pin {
                    name: p.name.clone(),
                    x: self.width - p.x,
                    y: p.y,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x_lo: i64, y_lo: i64, x_hi: i64, y_hi: i64) -> Rect {
        Rect::new(x_lo, y_lo, x_hi, y_hi).unwrap()
    }

    /// Dense sampling oracle: minimum distance between points on a fine grid
    /// restricted to the two rects. Close rects are sampled exactly at unit
    /// resolution because all inputs are integers.
    fn clearance_oracle(a: &Rect, b: &Rect) -> f64 {
        let step = 1.0 / 4.0;
        let mut best = f64::INFINITY;
        let samples = |lo: i64, hi: i64| -> Vec<f64> {
            let mut v = Vec::new();
            let mut x = lo as f64;
            while x <= hi as f64 + 1e-9 {
                v.push(x);
                x += step;
            }
            v
        };
        for ax in samples(a.x_lo, a.x_hi) {
            for ay in samples(a.y_lo, a.y_hi) {
                for bx in samples(b.x_lo, b.x_hi) {
                    for by in samples(b.y_lo, b.y_hi) {
                        let d = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
                        best = best.min(d);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn touching_rects_have_zero_clearance() {
        let a = rect(0, 0, 2, 2);
        let b = rect(2, 0, 4, 2);
        assert_eq!(a.clearance(&b), 0.0);
        assert_eq!(a.clearance_sq(&b), 0);
    }

    #[test]
    fn horizontal_gap_is_axis_distance() {
        let a = rect(0, 0, 2, 2);
        let b = rect(4, 0, 6, 2);
        assert_eq!(a.clearance(&b), 2.0);
    }

    #[test]
    fn diagonal_clearance_is_corner_distance() {
        // Opposite corners at (1,1) and (4,4): sqrt(9 + 9) = sqrt(18).
        let a = rect(0, 0, 1, 1);
        let b = rect(4, 4, 5, 5);
        assert_eq!(a.clearance_sq(&b), 18);
        assert!((a.clearance(&b) - 18f64.sqrt()).abs() < 1e-12);
        assert!((a.clearance(&b) - clearance_oracle(&a, &b)).abs() < 0.3);
    }

    #[test]
    fn clearance_matches_sampling_oracle_on_grid() {
        let rects = [
            rect(0, 0, 2, 2),
            rect(3, 0, 5, 1),
            rect(0, 4, 1, 6),
            rect(4, 3, 6, 6),
            rect(1, 1, 4, 5),
        ];
        for a in &rects {
            for b in &rects {
                let exact = a.clearance(b);
                let sampled = clearance_oracle(a, b);
                // Sampling overestimates by at most the grid diagonal.
                assert!(sampled >= exact - 1e-9);
                assert!(sampled - exact < 0.4, "exact {exact} sampled {sampled}");
            }
        }
    }

    #[test]
    fn pattern_clearance_takes_closest_rects() {
        // Two bars at different distances from a probe square: pattern
        // clearance is the minimum over rect pairs, here the diagonal to
        // the left bar.
        let bars = Pattern {
            id: "b".into(),
            net: Net::Signal,
            rects: vec![rect(0, 0, 1, 4), rect(5, 0, 6, 4)],
        };
        let sq = Pattern {
            id: "s".into(),
            net: Net::Signal,
            rects: vec![rect(2, 5, 3, 6)],
        };
        assert_eq!(bars.clearance_sq(&sq), 2);
        assert!((bars.clearance(&sq) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn corner_contact_does_not_connect_a_pattern() {
        let p = Pattern {
            id: "p".into(),
            net: Net::Signal,
            rects: vec![rect(0, 0, 1, 1), rect(1, 1, 2, 2)],
        };
        assert!(!p.connected());
        let q = Pattern {
            id: "q".into(),
            net: Net::Signal,
            rects: vec![rect(0, 0, 1, 2), rect(1, 1, 2, 2)],
        };
        assert!(q.connected());
    }

    fn one_rect_cell() -> Cell {
        Cell::new(
            "c".into(),
            6,
            4,
            vec![Pattern {
                id: "a".into(),
                net: Net::Signal,
                rects: vec![rect(1, 0, 2, 4)],
            }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn boundary_clearance_measures_each_side() {
        let c = one_rect_cell();
        assert_eq!(c.boundary_clearance(Side::Left).unwrap(), 1);
        assert_eq!(c.boundary_clearance(Side::Right).unwrap(), 4);
    }

    #[test]
    fn mirror_maps_rect_and_swaps_boundary_clearances() {
        let c = one_rect_cell();
        let m = c.mirrored();
        assert_eq!(m.patterns[0].rects[0], rect(4, 0, 5, 4));
        assert_eq!(m.boundary_clearance(Side::Left).unwrap(), 4);
        assert_eq!(m.boundary_clearance(Side::Right).unwrap(), 1);
        assert_eq!(m.mirrored(), c);
    }

    #[test]
    fn signal_clearance_ignores_rails() {
        let c = Cell::new(
            "r".into(),
            8,
            10,
            vec![
                Pattern {
                    id: "vdd".into(),
                    net: Net::Power,
                    rects: vec![rect(0, 0, 8, 1)],
                },
                Pattern {
                    id: "s".into(),
                    net: Net::Signal,
                    rects: vec![rect(3, 4, 4, 6)],
                },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(c.boundary_clearance(Side::Left).unwrap(), 0);
        assert_eq!(c.signal_boundary_clearance(Side::Left), 3);
        assert_eq!(c.signal_boundary_clearance(Side::Right), 4);
    }

    #[test]
    fn empty_cell_boundary_clearance_errors() {
        let c = Cell {
            name: "e".into(),
            width: 4,
            height: 4,
            patterns: vec![],
            pins: vec![],
        };
        assert_eq!(c.boundary_clearance(Side::Left), Err(CellError::EmptyCell));
    }

    #[test]
    fn cell_validation_rejects_bad_shapes() {
        assert!(Rect::new(0, 0, 0, 4).is_err());
        let out = Cell::new(
            "o".into(),
            4,
            4,
            vec![Pattern {
                id: "p".into(),
                net: Net::Signal,
                rects: vec![rect(2, 0, 5, 1)],
            }],
            vec![],
        );
        assert!(matches!(out, Err(CellError::OutOfBounds { .. })));
        let dup = Cell::new(
            "d".into(),
            4,
            4,
            vec![
                Pattern {
                    id: "p".into(),
                    net: Net::Signal,
                    rects: vec![rect(0, 0, 1, 1)],
                },
                Pattern {
                    id: "p".into(),
                    net: Net::Signal,
                    rects: vec![rect(2, 2, 3, 3)],
                },
            ],
            vec![],
        );
        assert!(matches!(dup, Err(CellError::DuplicatePattern { .. })));
        let two_power = Cell::new(
            "t".into(),
            4,
            4,
            vec![
                Pattern {
                    id: "v1".into(),
                    net: Net::Power,
                    rects: vec![rect(0, 0, 4, 1)],
                },
                Pattern {
                    id: "v2".into(),
                    net: Net::Power,
                    rects: vec![rect(0, 3, 4, 4)],
                },
            ],
            vec![],
        );
        assert!(matches!(
            two_power,
            Err(CellError::MultipleRails { net: Net::Power })
        ));
    }
}
