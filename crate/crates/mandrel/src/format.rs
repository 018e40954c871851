//! Versioned text formats for libraries, placements, pair tables, and
//! legalization reports.
//!
//! All four documents share one shape: line-oriented, whitespace-tokenized,
//! `#` starts a comment running to end of line, and the first line names
//! the document type and version (`sadp_library v1` and so on). Names are
//! single tokens; the only free-text field is the library units note.
//! Serialization is canonical: fixed field order and shortest-round-trip
//! float text, so parse then serialize reproduces a serialized document
//! byte for byte. The library fingerprint stored in pair tables is the
//! SHA-256 of that canonical form.

use crate::dplut::{Dplut, SolutionCandidate};
use crate::geometry::{Cell, Net, Orientation, Pattern, Pin, Rect};
use crate::legalize::{LegalizeReport, Mode};
use crate::library::{Library, LibraryError, Params};
use crate::placement::{NetDef, NetEndpoint, PlacedCell, Placement, Row};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum FormatError {
    Parse(ParseError),
    Library(LibraryError),
    StaleTable {
        table_hash: String,
        library_hash: String,
    },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Parse(e) => e.fmt(f),
            FormatError::Library(e) => e.fmt(f),
            FormatError::StaleTable { table_hash, library_hash } => write!(
                f,
                "stale pair table: built for library {table_hash}, current library is {library_hash}"
            ),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<ParseError> for FormatError {
    fn from(e: ParseError) -> FormatError {
        FormatError::Parse(e)
    }
}

/// One line's worth of tokens with their 1-based byte columns.
struct Cursor<'a> {
    line: usize,
    toks: Vec<(usize, &'a str)>,
    pos: usize,
    data: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Cursor<'a> {
        let data = match text.find('#') {
            Some(i) => &text[..i],
            None => text,
        };
        let mut toks = Vec::new();
        let mut rest = data;
        let mut base = 0usize;
        loop {
            let trimmed = rest.trim_start();
            base += rest.len() - trimmed.len();
            if trimmed.is_empty() {
                break;
            }
            let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
            toks.push((base + 1, &trimmed[..end]));
            base += end;
            rest = &trimmed[end..];
        }
        Cursor {
            line,
            toks,
            pos: 0,
            data,
        }
    }

    fn is_blank(&self) -> bool {
        self.toks.is_empty()
    }

    fn remaining(&self) -> usize {
        self.toks.len() - self.pos
    }

    fn err_at(&self, col: usize, message: String) -> ParseError {
        ParseError {
            line: self.line,
            col,
            message,
        }
    }

    fn take(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.toks.get(self.pos).copied() {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err_at(self.data.len() + 1, format!("expected {what}"))),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ParseError> {
        Ok(self.take(what)?.1)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (col, t) = self.take(kw)?;
        if t == kw {
            Ok(())
        } else {
            Err(self.err_at(col, format!("expected '{kw}', got '{t}'")))
        }
    }

    fn parse<T: FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let (col, t) = self.take(what)?;
        t.parse()
            .map_err(|_| self.err_at(col, format!("expected {what}, got '{t}'")))
    }

    fn orient(&mut self) -> Result<Orientation, ParseError> {
        let (col, t) = self.take("orientation")?;
        match t {
            "R0" => Ok(Orientation::R0),
            "MY" => Ok(Orientation::MY),
            _ => Err(self.err_at(col, format!("expected orientation R0 or MY, got '{t}'"))),
        }
    }

    fn net(&mut self) -> Result<Net, ParseError> {
        let (col, t) = self.take("net tag")?;
        match t {
            "power" => Ok(Net::Power),
            "ground" => Ok(Net::Ground),
            "signal" => Ok(Net::Signal),
            _ => Err(self.err_at(
                col,
                format!("expected net tag power/ground/signal, got '{t}'"),
            )),
        }
    }

    /// Remainder of the line as free text (trailing whitespace stripped).
    fn rest(&mut self) -> &'a str {
        let out = match self.toks.get(self.pos) {
            Some(&(col, _)) => self.data[col - 1..].trim_end(),
            None => "",
        };
        self.pos = self.toks.len();
        out
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(&(col, t)) => Err(self.err_at(col, format!("unexpected trailing token '{t}'"))),
            None => Ok(()),
        }
    }
}

/// Non-blank lines as cursors, plus the line count for end-of-file errors.
fn scan(src: &str) -> (Vec<Cursor<'_>>, usize) {
    let mut out = Vec::new();
    let mut count = 0;
    for (i, text) in src.lines().enumerate() {
        count = i + 1;
        let cur = Cursor::new(i + 1, text);
        if !cur.is_blank() {
            out.push(cur);
        }
    }
    (out, count)
}

fn header<'a, I: Iterator<Item = Cursor<'a>>>(it: &mut I, doctype: &str) -> Result<(), ParseError> {
    let mut cur = it.next().ok_or(ParseError {
        line: 1,
        col: 1,
        message: format!("expected header '{doctype} v1'"),
    })?;
    cur.keyword(doctype)?;
    cur.keyword("v1")?;
    cur.finish()
}

pub fn serialize_library(lib: &Library) -> String {
    let mut s = String::new();
    s.push_str("sadp_library v1\n");
    if lib.units.is_empty() {
        s.push_str("units\n");
    } else {
        let _ = writeln!(s, "units {}", lib.units);
    }
    let _ = writeln!(s, "param s_dp {}", lib.params.s_dp);
    let _ = writeln!(s, "param w_spacer {}", lib.params.w_spacer);
    if let Some(v) = lib.params.s_b_min {
        let _ = writeln!(s, "param s_b_min {v}");
    }
    for c in &lib.cells {
        let _ = writeln!(s, "cell {} width {} height {}", c.name, c.width, c.height);
        for p in &c.patterns {
            let _ = writeln!(s, "pattern {} {}", p.id, p.net);
            for r in &p.rects {
                let _ = writeln!(s, "rect {} {} {} {}", r.x_lo, r.y_lo, r.x_hi, r.y_hi);
            }
        }
        for pin in &c.pins {
            let _ = writeln!(s, "pin {} {} {}", pin.name, pin.x, pin.y);
        }
        s.push_str("end\n");
    }
    s
}

pub fn parse_library(src: &str, strict: bool) -> Result<(Library, Vec<String>), FormatError> {
    parse_library_with(src, strict, Params::default())
}

/// Parses a standalone parameter file: `param` directives only, no header.
/// Values override `base`.
pub fn parse_params(src: &str, base: Params) -> Result<Params, ParseError> {
    let (cursors, _) = scan(src);
    let mut params = base;
    for mut cur in cursors {
        let (col, kw) = cur.take("directive")?;
        if kw != "param" {
            return Err(cur.err_at(col, format!("unknown directive '{kw}'")));
        }
        let (pcol, key) = cur.take("parameter name")?;
        let v: f64 = cur.parse("parameter value")?;
        cur.finish()?;
        match key {
            "s_dp" => params.s_dp = v,
            "w_spacer" => params.w_spacer = v,
            "s_b_min" => params.s_b_min = Some(v),
            _ => return Err(cur.err_at(pcol, format!("unknown parameter '{key}'"))),
        }
    }
    Ok(params)
}

/// Like [`parse_library`] but starting from caller-supplied default
/// parameters; `param` directives in the file still override them.
pub fn parse_library_with(
    src: &str,
    strict: bool,
    base: Params,
) -> Result<(Library, Vec<String>), FormatError> {
    let (cursors, last_line) = scan(src);
    let mut it = cursors.into_iter();
    header(&mut it, "sadp_library")?;
    let mut units = String::new();
    let mut params = base;
    let mut cells = Vec::new();
    while let Some(mut cur) = it.next() {
        let (col, kw) = cur.take("directive")?;
        match kw {
            "units" => {
                units = cur.rest().to_string();
            }
            "param" => {
                let (pcol, key) = cur.take("parameter name")?;
                let v: f64 = cur.parse("parameter value")?;
                cur.finish()?;
                match key {
                    "s_dp" => params.s_dp = v,
                    "w_spacer" => params.w_spacer = v,
                    "s_b_min" => params.s_b_min = Some(v),
                    _ => {
                        return Err(cur
                            .err_at(pcol, format!("unknown parameter '{key}'"))
                            .into())
                    }
                }
            }
            "cell" => {
                let name = cur.next("cell name")?.to_string();
                cur.keyword("width")?;
                let width: i64 = cur.parse("width")?;
                cur.keyword("height")?;
                let height: i64 = cur.parse("height")?;
                cur.finish()?;
                let mut patterns: Vec<Pattern> = Vec::new();
                let mut pins = Vec::new();
                let end_line = loop {
                    let Some(mut inner) = it.next() else {
                        return Err(ParseError {
                            line: last_line,
                            col: 1,
                            message: format!("cell {name} is not closed with 'end'"),
                        }
                        .into());
                    };
                    let (icol, ikw) = inner.take("cell directive")?;
                    match ikw {
                        "pattern" => {
                            let id = inner.next("pattern id")?.to_string();
                            let net = inner.net()?;
                            inner.finish()?;
                            patterns.push(Pattern {
                                id,
                                net,
                                rects: Vec::new(),
                            });
                        }
                        "rect" => {
                            let x_lo = inner.parse("x_lo")?;
                            let y_lo = inner.parse("y_lo")?;
                            let x_hi = inner.parse("x_hi")?;
                            let y_hi = inner.parse("y_hi")?;
                            inner.finish()?;
                            let r = Rect::new(x_lo, y_lo, x_hi, y_hi)
                                .map_err(|e| inner.err_at(icol, e.to_string()))?;
                            match patterns.last_mut() {
                                Some(p) => p.rects.push(r),
                                None => {
                                    return Err(inner
                                        .err_at(icol, "rect before any pattern".to_string())
                                        .into())
                                }
                            }
                        }
                        "pin" => {
                            let pname = inner.next("pin name")?.to_string();
                            let x = inner.parse("pin x")?;
                            let y = inner.parse("pin y")?;
                            inner.finish()?;
                            pins.push(Pin { name: pname, x, y });
                        }
                        "end" => {
                            inner.finish()?;
                            break inner.line;
                        }
                        _ => {
                            return Err(inner
                                .err_at(icol, format!("unknown cell directive '{ikw}'"))
                                .into())
                        }
                    }
                };
                let cell = Cell::new(name.clone(), width, height, patterns, pins).map_err(|e| {
                    ParseError {
                        line: end_line,
                        col: 1,
                        message: format!("cell {name}: {e}"),
                    }
                })?;
                cells.push(cell);
            }
            _ => return Err(cur.err_at(col, format!("unknown directive '{kw}'")).into()),
        }
    }
    Library::new(units, params, cells, strict).map_err(FormatError::Library)
}

pub fn serialize_placement(p: &Placement) -> String {
    let mut s = String::new();
    s.push_str("sadp_placement v1\n");
    if p.library_name.is_empty() {
        s.push_str("library\n");
    } else {
        let _ = writeln!(s, "library {}", p.library_name);
    }
    for row in &p.rows {
        let _ = writeln!(s, "row {} y {} capacity {}", row.index, row.y, row.capacity);
        for pc in &row.cells {
            let _ = write!(s, "inst {} {} {} {}", pc.instance, pc.cell, pc.x, pc.orient);
            if let Some(c) = pc.coloring {
                let _ = write!(s, " {c}");
            }
            s.push('\n');
        }
        s.push_str("end\n");
    }
    for net in &p.nets {
        let _ = write!(s, "net {}", net.name);
        for ep in &net.endpoints {
            let _ = write!(s, " {} {}", ep.instance, ep.pin);
        }
        s.push('\n');
    }
    s
}

pub fn parse_placement(src: &str) -> Result<Placement, ParseError> {
    let (cursors, last_line) = scan(src);
    let mut it = cursors.into_iter();
    header(&mut it, "sadp_placement")?;
    let mut library_name = String::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut nets = Vec::new();
    let mut open: Option<Row> = None;
    for mut cur in it {
        let (col, kw) = cur.take("directive")?;
        match kw {
            "library" => {
                library_name = cur.rest().to_string();
            }
            "row" => {
                if open.is_some() {
                    return Err(cur.err_at(col, "previous row not closed with 'end'".to_string()));
                }
                let index = cur.parse("row index")?;
                cur.keyword("y")?;
                let y = cur.parse("row y")?;
                cur.keyword("capacity")?;
                let capacity = cur.parse("row capacity")?;
                cur.finish()?;
                open = Some(Row {
                    index,
                    y,
                    capacity,
                    cells: Vec::new(),
                });
            }
            "inst" => {
                let Some(row) = open.as_mut() else {
                    return Err(cur.err_at(col, "inst outside a row".to_string()));
                };
                let instance = cur.next("instance name")?.to_string();
                let cell = cur.next("cell name")?.to_string();
                let x = cur.parse("x")?;
                let orient = cur.orient()?;
                let coloring = if cur.remaining() > 0 {
                    Some(cur.parse("coloring index")?)
                } else {
                    None
                };
                cur.finish()?;
                row.cells.push(PlacedCell {
                    instance,
                    cell,
                    x,
                    orient,
                    coloring,
                });
            }
            "end" => {
                cur.finish()?;
                match open.take() {
                    Some(row) => rows.push(row),
                    None => return Err(cur.err_at(col, "end without an open row".to_string())),
                }
            }
            "net" => {
                let name = cur.next("net name")?.to_string();
                let mut endpoints = Vec::new();
                while cur.remaining() > 0 {
                    let instance = cur.next("instance name")?.to_string();
                    let pin = cur.next("pin name")?.to_string();
                    endpoints.push(NetEndpoint { instance, pin });
                }
                nets.push(NetDef { name, endpoints });
            }
            _ => return Err(cur.err_at(col, format!("unknown directive '{kw}'"))),
        }
    }
    if open.is_some() {
        return Err(ParseError {
            line: last_line,
            col: 1,
            message: "row is not closed with 'end'".to_string(),
        });
    }
    Ok(Placement {
        library_name,
        rows,
        nets,
    })
}

pub fn serialize_dplut(t: &Dplut) -> String {
    let mut s = String::new();
    s.push_str("sadp_dplut v1\n");
    let _ = writeln!(s, "param s_dp {}", t.s_dp);
    let _ = writeln!(s, "param w_spacer {}", t.w_spacer);
    let _ = writeln!(s, "param s_b_min {}", t.s_b_min);
    let _ = writeln!(s, "library_hash {}", t.library_hash);
    let _ = write!(s, "cells {}", t.cells.len());
    for c in &t.cells {
        let _ = write!(s, " {c}");
    }
    s.push('\n');
    for i in 0..t.cells.len() {
        for j in 0..t.cells.len() {
            let cands = t.entry(i, j);
            if cands.is_empty() {
                continue;
            }
            let _ = writeln!(s, "entry {} {} {}", t.cells[i], t.cells[j], cands.len());
            for c in cands {
                let _ = writeln!(
                    s,
                    "cand {} {} {} {} {}",
                    c.orient_left, c.orient_right, c.coloring_left, c.coloring_right, c.overlay
                );
            }
        }
    }
    s
}

pub fn parse_dplut(src: &str) -> Result<Dplut, ParseError> {
    let (cursors, last_line) = scan(src);
    let mut it = cursors.into_iter();
    header(&mut it, "sadp_dplut")?;
    let mut s_dp = None;
    let mut w_spacer = None;
    let mut s_b_min = None;
    let mut hash = None;
    let mut cells: Option<Vec<String>> = None;
    let mut entries: Vec<Vec<SolutionCandidate>> = Vec::new();
    let mut pending: Option<(usize, usize)> = None;
    for mut cur in it {
        let (col, kw) = cur.take("directive")?;
        if kw != "cand" {
            if let Some((_, left)) = pending {
                if left > 0 {
                    return Err(cur.err_at(col, format!("expected {left} more cand lines")));
                }
            }
            pending = None;
        }
        match kw {
            "param" => {
                let (pcol, key) = cur.take("parameter name")?;
                let v: f64 = cur.parse("parameter value")?;
                cur.finish()?;
                match key {
                    "s_dp" => s_dp = Some(v),
                    "w_spacer" => w_spacer = Some(v),
                    "s_b_min" => s_b_min = Some(v),
                    _ => return Err(cur.err_at(pcol, format!("unknown parameter '{key}'"))),
                }
            }
            "library_hash" => {
                hash = Some(cur.next("hash")?.to_string());
                cur.finish()?;
            }
            "cells" => {
                let n: usize = cur.parse("cell count")?;
                let mut names = Vec::with_capacity(n);
                for _ in 0..n {
                    names.push(cur.next("cell name")?.to_string());
                }
                cur.finish()?;
                entries = vec![Vec::new(); n * n];
                cells = Some(names);
            }
            "entry" => {
                let Some(names) = cells.as_ref() else {
                    return Err(cur.err_at(col, "entry before the cells line".to_string()));
                };
                let (lcol, left) = cur.take("left cell")?;
                let (rcol, right) = cur.take("right cell")?;
                let count: usize = cur.parse("candidate count")?;
                cur.finish()?;
                let i = names
                    .iter()
                    .position(|c| c == left)
                    .ok_or_else(|| cur.err_at(lcol, format!("unknown cell '{left}'")))?;
                let j = names
                    .iter()
                    .position(|c| c == right)
                    .ok_or_else(|| cur.err_at(rcol, format!("unknown cell '{right}'")))?;
                let slot = i * names.len() + j;
                if !entries[slot].is_empty() {
                    return Err(cur.err_at(col, format!("duplicate entry {left} {right}")));
                }
                pending = Some((slot, count));
            }
            "cand" => {
                let Some((slot, left)) = pending else {
                    return Err(cur.err_at(col, "cand without a preceding entry".to_string()));
                };
                if left == 0 {
                    return Err(cur.err_at(col, "more cand lines than declared".to_string()));
                }
                let orient_left = cur.orient()?;
                let orient_right = cur.orient()?;
                let coloring_left = cur.parse("left coloring")?;
                let coloring_right = cur.parse("right coloring")?;
                let overlay = cur.parse("overlay")?;
                cur.finish()?;
                entries[slot].push(SolutionCandidate {
                    orient_left,
                    orient_right,
                    coloring_left,
                    coloring_right,
                    overlay,
                });
                pending = Some((slot, left - 1));
            }
            _ => return Err(cur.err_at(col, format!("unknown directive '{kw}'"))),
        }
    }
    let eof = |what: &str| ParseError {
        line: last_line,
        col: 1,
        message: format!("missing {what}"),
    };
    if let Some((_, left)) = pending {
        if left > 0 {
            return Err(eof(&format!("{left} cand lines for the last entry")));
        }
    }
    Ok(Dplut::from_parts(
        s_dp.ok_or_else(|| eof("param s_dp"))?,
        w_spacer.ok_or_else(|| eof("param w_spacer"))?,
        s_b_min.ok_or_else(|| eof("param s_b_min"))?,
        hash.ok_or_else(|| eof("library_hash"))?,
        cells.ok_or_else(|| eof("cells line"))?,
        entries,
    ))
}

fn delta_pct(before: i64, after: i64) -> f64 {
    if before == 0 {
        0.0
    } else {
        (after - before) as f64 / before as f64 * 100.0
    }
}

pub fn serialize_report(r: &LegalizeReport) -> String {
    let mut s = String::new();
    s.push_str("sadp_report v1\n");
    let _ = writeln!(s, "mode {}", r.mode);
    let _ = writeln!(s, "conflicts_before {}", r.conflicts_before);
    let _ = writeln!(s, "conflicts_after {}", r.conflicts_after);
    let _ = writeln!(s, "area_before {}", r.area_before);
    let _ = writeln!(s, "area_after {}", r.area_after);
    let _ = writeln!(
        s,
        "area_delta_pct {:.2}",
        delta_pct(r.area_before, r.area_after)
    );
    let _ = writeln!(s, "hpwl_before {}", r.hpwl_before);
    let _ = writeln!(s, "hpwl_after {}", r.hpwl_after);
    let _ = writeln!(
        s,
        "hpwl_delta_pct {:.2}",
        delta_pct(r.hpwl_before, r.hpwl_after)
    );
    let _ = writeln!(s, "flips {}", r.flips);
    let _ = writeln!(s, "total_spread {}", r.total_spread);
    let _ = write!(s, "unsolvable_pg_rows");
    for row in &r.unsolvable_pg_rows {
        let _ = write!(s, " {row}");
    }
    s.push('\n');
    s
}

pub fn parse_report(src: &str) -> Result<LegalizeReport, ParseError> {
    let (cursors, last_line) = scan(src);
    let mut it = cursors.into_iter();
    header(&mut it, "sadp_report")?;
    let mut mode = None;
    let mut fields: [Option<i64>; 8] = [None; 8];
    const KEYS: [&str; 8] = [
        "conflicts_before",
        "conflicts_after",
        "area_before",
        "area_after",
        "hpwl_before",
        "hpwl_after",
        "flips",
        "total_spread",
    ];
    let mut rows: Option<Vec<usize>> = None;
    for mut cur in it {
        let (col, kw) = cur.take("directive")?;
        match kw {
            "mode" => {
                let (mcol, t) = cur.take("mode")?;
                cur.finish()?;
                mode = Some(match t {
                    "ub" => Mode::Ub,
                    "b" => Mode::B,
                    _ => return Err(cur.err_at(mcol, format!("expected mode ub or b, got '{t}'"))),
                });
            }
            "area_delta_pct" | "hpwl_delta_pct" => {
                // Derived from the absolute fields; accepted and recomputed.
                let _: f64 = cur.parse("percentage")?;
                cur.finish()?;
            }
            "unsolvable_pg_rows" => {
                let mut list = Vec::new();
                while cur.remaining() > 0 {
                    list.push(cur.parse("row index")?);
                }
                rows = Some(list);
            }
            _ => match KEYS.iter().position(|&k| k == kw) {
                Some(i) => {
                    fields[i] = Some(cur.parse("value")?);
                    cur.finish()?;
                }
                None => return Err(cur.err_at(col, format!("unknown directive '{kw}'"))),
            },
        }
    }
    let eof = |what: &str| ParseError {
        line: last_line,
        col: 1,
        message: format!("missing {what}"),
    };
    let field = |i: usize| fields[i].ok_or_else(|| eof(KEYS[i]));
    Ok(LegalizeReport {
        mode: mode.ok_or_else(|| eof("mode"))?,
        conflicts_before: field(0)? as usize,
        conflicts_after: field(1)? as usize,
        area_before: field(2)?,
        area_after: field(3)?,
        hpwl_before: field(4)?,
        hpwl_after: field(5)?,
        flips: field(6)? as usize,
        total_spread: field(7)?,
        unsolvable_pg_rows: rows.ok_or_else(|| eof("unsolvable_pg_rows"))?,
    })
}

/// SHA-256 of the canonical serialization, lowercase hex.
pub fn library_hash(lib: &Library) -> String {
    let mut h = Sha256::new();
    h.update(serialize_library(lib).as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// A table is only valid for the exact library it was built from.
pub fn verify_table_hash(table: &Dplut, library: &Library) -> Result<(), FormatError> {
    let current = library_hash(library);
    if table.library_hash == current {
        Ok(())
    } else {
        Err(FormatError::StaleTable {
            table_hash: table.library_hash.clone(),
            library_hash: current,
        })
    }
}
