//! Reader for the ASCII DXF interchange format.
//!
//! Only the HEADER, BLOCKS and ENTITIES sections are interpreted. The entity
//! subset is what floor plans are drawn with in practice: lines, polylines,
//! arcs, circles, filled faces, block inserts, dimensions and text. Anything
//! else is counted per entity type and skipped.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: invalid group code {text:?}")]
    BadGroupCode { line: usize, text: String },
    #[error("line {line}: invalid value {text:?} for group code {code}")]
    BadValue { line: usize, code: i32, text: String },
    #[error("line {line}: unexpected {found:?} ({context})")]
    Unexpected { line: usize, found: String, context: &'static str },
    #[error("truncated file: {0}")]
    Truncated(String),
}

impl ParseError {
    /// Source line the error points at, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::BadGroupCode { line, .. }
            | ParseError::BadValue { line, .. }
            | ParseError::Unexpected { line, .. } => Some(*line),
            ParseError::Truncated(_) => None,
        }
    }
}

/// Drawing unit declared by the `$INSUNITS` header variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Unitless,
    Inches,
    Feet,
    Millimetres,
    Centimetres,
    Metres,
    /// A code outside the supported set; treated as unitless.
    Unknown(i32),
}

impl Units {
    pub fn from_code(code: i32) -> Units {
        match code {
            0 => Units::Unitless,
            1 => Units::Inches,
            2 => Units::Feet,
            4 => Units::Millimetres,
            5 => Units::Centimetres,
            6 => Units::Metres,
            other => Units::Unknown(other),
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Units::Unitless => 0,
            Units::Inches => 1,
            Units::Feet => 2,
            Units::Millimetres => 4,
            Units::Centimetres => 5,
            Units::Metres => 6,
            Units::Unknown(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }
}

pub const Z_AXIS: Point3 = Point3::new(0.0, 0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyVertex {
    pub pos: Point3,
    /// Tangent of a quarter of the included angle of the arc to the next
    /// vertex; 0 for a straight edge.
    pub bulge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntityKind {
    Line {
        start: Point3,
        end: Point3,
    },
    /// LWPOLYLINE, POLYLINE and LEADER. Vertices are in the object
    /// coordinate system given by `extrusion`.
    Polyline {
        vertices: Vec<PolyVertex>,
        closed: bool,
        extrusion: Point3,
    },
    Arc {
        center: Point3,
        radius: f64,
        start_deg: f64,
        end_deg: f64,
        extrusion: Point3,
    },
    Circle {
        center: Point3,
        radius: f64,
        extrusion: Point3,
    },
    /// SOLID, TRACE and 3DFACE, corners in boundary order.
    Face {
        corners: Vec<Point3>,
        extrusion: Point3,
    },
    Insert {
        block: String,
        position: Point3,
        scale: Point3,
        rotation_deg: f64,
        columns: u32,
        rows: u32,
        column_spacing: f64,
        row_spacing: f64,
        extrusion: Point3,
    },
    /// TEXT, MTEXT, ATTRIB and ATTDEF; only their presence is recorded.
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub layer: String,
    pub kind: EntityKind,
    /// Line number of the entity's `0` group code.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub base: Point3,
    pub entities: Vec<Entity>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DrawingDocument {
    pub source_unit: Units,
    pub entities: Vec<Entity>,
    pub blocks: BTreeMap<String, Block>,
    /// Header variables by name (`$INSUNITS`, ...); multi-valued variables
    /// are joined with single spaces.
    pub header_vars: BTreeMap<String, String>,
    /// Unsupported entity types and how many were skipped.
    pub skipped: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

impl DrawingDocument {
    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }
}

#[derive(Debug, Clone)]
struct Pair {
    code: i32,
    value: String,
    line: usize,
}

fn tokenize(text: &str) -> Result<Vec<Pair>, ParseError> {
    let mut pairs = Vec::new();
    let mut lines = text.lines().enumerate();
    while let Some((idx, code_line)) = lines.next() {
        let code_text = code_line.trim();
        if code_text.is_empty() {
            // Trailing blank lines after EOF are common.
            if lines.clone().all(|(_, l)| l.trim().is_empty()) {
                break;
            }
            return Err(ParseError::BadGroupCode { line: idx + 1, text: code_line.to_string() });
        }
        let code = code_text
            .parse::<i32>()
            .map_err(|_| ParseError::BadGroupCode { line: idx + 1, text: code_line.to_string() })?;
        let Some((_, value)) = lines.next() else {
            return Err(ParseError::Truncated(format!(
                "group code {code} on line {} has no value",
                idx + 1
            )));
        };
        pairs.push(Pair { code, value: value.trim().to_string(), line: idx + 1 });
    }
    Ok(pairs)
}

fn float(p: &Pair) -> Result<f64, ParseError> {
    p.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ParseError::BadValue { line: p.line + 1, code: p.code, text: p.value.clone() })
}

fn int(p: &Pair) -> Result<i64, ParseError> {
    p.value
        .parse::<i64>()
        .map_err(|_| ParseError::BadValue { line: p.line + 1, code: p.code, text: p.value.clone() })
}

/// Group pairs of one entity, excluding its leading `0` pair.
struct Record<'a> {
    kind: &'a str,
    line: usize,
    pairs: &'a [Pair],
}

impl Record<'_> {
    fn get(&self, code: i32) -> Option<&Pair> {
        self.pairs.iter().find(|p| p.code == code)
    }

    fn f(&self, code: i32, default: f64) -> Result<f64, ParseError> {
        self.get(code).map(float).unwrap_or(Ok(default))
    }

    fn i(&self, code: i32, default: i64) -> Result<i64, ParseError> {
        self.get(code).map(int).unwrap_or(Ok(default))
    }

    fn point(&self, base: i32) -> Result<Point3, ParseError> {
        Ok(Point3::new(self.f(base, 0.0)?, self.f(base + 10, 0.0)?, self.f(base + 20, 0.0)?))
    }

    fn extrusion(&self) -> Result<Point3, ParseError> {
        Ok(Point3::new(self.f(210, 0.0)?, self.f(220, 0.0)?, self.f(230, 1.0)?))
    }

    fn layer(&self) -> String {
        self.get(8).map(|p| p.value.clone()).unwrap_or_else(|| "0".to_string())
    }
}

struct Cursor<'a> {
    pairs: &'a [Pair],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Pair> {
        self.pairs.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Pair> {
        let p = self.pairs.get(self.pos);
        self.pos += 1;
        p
    }

    /// Takes one `0`-delimited record.
    fn record(&mut self) -> Option<Record<'a>> {
        let head = self.next()?;
        let start = self.pos;
        while let Some(p) = self.peek() {
            if p.code == 0 {
                break;
            }
            self.pos += 1;
        }
        Some(Record { kind: head.value.as_str(), line: head.line, pairs: &self.pairs[start..self.pos] })
    }

    fn truncated(&self, what: &str) -> ParseError {
        ParseError::Truncated(format!("input ended inside {what}"))
    }
}

/// Parses DXF text into a [`DrawingDocument`].
pub fn parse_dxf(text: &str) -> Result<DrawingDocument, ParseError> {
    let pairs = tokenize(text)?;
    let mut cur = Cursor { pairs: &pairs, pos: 0 };
    let mut doc = DrawingDocument::default();

    while let Some(p) = cur.next() {
        if p.code == 999 {
            continue;
        }
        if p.code != 0 {
            return Err(ParseError::Unexpected {
                line: p.line,
                found: format!("{} {}", p.code, p.value),
                context: "expected SECTION or EOF",
            });
        }
        match p.value.as_str() {
            "EOF" => break,
            "SECTION" => {
                let name = match cur.next() {
                    Some(n) if n.code == 2 => n.value.clone(),
                    Some(n) => {
                        return Err(ParseError::Unexpected {
                            line: n.line,
                            found: n.value.clone(),
                            context: "expected section name",
                        })
                    }
                    None => return Err(cur.truncated("a section header")),
                };
                match name.as_str() {
                    "HEADER" => parse_header(&mut cur, &mut doc)?,
                    "BLOCKS" => parse_blocks(&mut cur, &mut doc)?,
                    "ENTITIES" => {
                        let entities = parse_entity_list(&mut cur, &mut doc, "ENDSEC")?;
                        doc.entities.extend(entities);
                        cur.next();
                    }
                    _ => skip_section(&mut cur)?,
                }
            }
            other => {
                return Err(ParseError::Unexpected {
                    line: p.line,
                    found: other.to_string(),
                    context: "expected SECTION or EOF",
                })
            }
        }
    }

    if let Some(units) = doc.header_vars.get("$INSUNITS") {
        match units.trim().parse::<i32>() {
            Ok(code) => doc.source_unit = Units::from_code(code),
            Err(_) => doc.warnings.push(format!("unreadable $INSUNITS value {units:?}")),
        }
    }
    drop_dangling_inserts(&mut doc);
    Ok(doc)
}

fn skip_section(cur: &mut Cursor) -> Result<(), ParseError> {
    while let Some(p) = cur.next() {
        if p.code == 0 && p.value == "ENDSEC" {
            return Ok(());
        }
    }
    Err(cur.truncated("a section"))
}

fn parse_header(cur: &mut Cursor, doc: &mut DrawingDocument) -> Result<(), ParseError> {
    let mut current: Option<String> = None;
    while let Some(p) = cur.next() {
        match p.code {
            0 if p.value == "ENDSEC" => return Ok(()),
            9 => {
                doc.header_vars.insert(p.value.clone(), String::new());
                current = Some(p.value.clone());
            }
            _ => {
                if let Some(name) = &current {
                    let slot = doc.header_vars.entry(name.clone()).or_default();
                    if !slot.is_empty() {
                        slot.push(' ');
                    }
                    slot.push_str(&p.value);
                }
            }
        }
    }
    Err(cur.truncated("the HEADER section"))
}

fn parse_blocks(cur: &mut Cursor, doc: &mut DrawingDocument) -> Result<(), ParseError> {
    loop {
        let Some(p) = cur.peek() else {
            return Err(cur.truncated("the BLOCKS section"));
        };
        if p.code != 0 {
            return Err(ParseError::Unexpected {
                line: p.line,
                found: p.value.clone(),
                context: "expected BLOCK",
            });
        }
        match p.value.as_str() {
            "ENDSEC" => {
                cur.next();
                return Ok(());
            }
            "BLOCK" => {
                let head = cur.record().expect("peeked");
                let name = head.get(2).map(|p| p.value.clone()).unwrap_or_default();
                let base = head.point(10)?;
                let entities = parse_entity_list(cur, doc, "ENDBLK")?;
                cur.record(); // ENDBLK and its own group pairs
                doc.blocks.insert(name.clone(), Block { name, base, entities });
            }
            other => {
                return Err(ParseError::Unexpected {
                    line: p.line,
                    found: other.to_string(),
                    context: "expected BLOCK or ENDSEC",
                })
            }
        }
    }
}

/// Reads entities until a `0 <terminator>` pair, which is left unconsumed.
fn parse_entity_list(
    cur: &mut Cursor,
    doc: &mut DrawingDocument,
    terminator: &str,
) -> Result<Vec<Entity>, ParseError> {
    let mut out = Vec::new();
    loop {
        let Some(p) = cur.peek() else {
            return Err(cur.truncated(if terminator == "ENDSEC" { "the ENTITIES section" } else { "a block" }));
        };
        if p.code != 0 {
            return Err(ParseError::Unexpected {
                line: p.line,
                found: format!("{} {}", p.code, p.value),
                context: "expected an entity",
            });
        }
        if p.value == terminator {
            return Ok(out);
        }
        if p.value == "ENDSEC" || p.value == "EOF" {
            return Err(ParseError::Unexpected {
                line: p.line,
                found: p.value.clone(),
                context: "missing block terminator",
            });
        }
        let rec = cur.record().expect("peeked");
        if let Some(entity) = parse_entity(&rec, cur, doc)? {
            out.push(entity);
        }
    }
}

fn parse_entity(
    rec: &Record,
    cur: &mut Cursor,
    doc: &mut DrawingDocument,
) -> Result<Option<Entity>, ParseError> {
    let kind = match rec.kind {
        "LINE" => EntityKind::Line { start: rec.point(10)?, end: rec.point(11)? },
        "LWPOLYLINE" => lwpolyline(rec)?,
        "POLYLINE" => match polyline(rec, cur)? {
            Some(k) => k,
            None => {
                *doc.skipped.entry("POLYLINE(mesh)".to_string()).or_default() += 1;
                return Ok(None);
            }
        },
        "LEADER" => {
            let vertices = collect_vertices(rec)?;
            EntityKind::Polyline { vertices, closed: false, extrusion: Z_AXIS }
        }
        "ARC" => EntityKind::Arc {
            center: rec.point(10)?,
            radius: rec.f(40, 0.0)?,
            start_deg: rec.f(50, 0.0)?,
            end_deg: rec.f(51, 360.0)?,
            extrusion: rec.extrusion()?,
        },
        "CIRCLE" => EntityKind::Circle {
            center: rec.point(10)?,
            radius: rec.f(40, 0.0)?,
            extrusion: rec.extrusion()?,
        },
        "SOLID" | "TRACE" => {
            // SOLID stores its third and fourth corners in zig-zag order.
            let p = [rec.point(10)?, rec.point(11)?, rec.point(12)?, rec.point(13)?];
            let mut corners = vec![p[0], p[1], p[3], p[2]];
            if p[2] == p[3] {
                corners.remove(2);
            }
            EntityKind::Face { corners, extrusion: rec.extrusion()? }
        }
        "3DFACE" => {
            let p = [rec.point(10)?, rec.point(11)?, rec.point(12)?, rec.point(13)?];
            let mut corners = p.to_vec();
            if p[2] == p[3] {
                corners.pop();
            }
            EntityKind::Face { corners, extrusion: Z_AXIS }
        }
        "INSERT" => EntityKind::Insert {
            block: rec.get(2).map(|p| p.value.clone()).unwrap_or_default(),
            position: rec.point(10)?,
            scale: Point3::new(rec.f(41, 1.0)?, rec.f(42, 1.0)?, rec.f(43, 1.0)?),
            rotation_deg: rec.f(50, 0.0)?,
            columns: rec.i(70, 1)?.max(1) as u32,
            rows: rec.i(71, 1)?.max(1) as u32,
            column_spacing: rec.f(44, 0.0)?,
            row_spacing: rec.f(45, 0.0)?,
            extrusion: rec.extrusion()?,
        },
        // Dimension graphics live in an anonymous block placed in world
        // coordinates; exploding it keeps the extension and leader lines.
        "DIMENSION" => match rec.get(2) {
            Some(name) => EntityKind::Insert {
                block: name.value.clone(),
                position: Point3::default(),
                scale: Point3::new(1.0, 1.0, 1.0),
                rotation_deg: 0.0,
                columns: 1,
                rows: 1,
                column_spacing: 0.0,
                row_spacing: 0.0,
                extrusion: Z_AXIS,
            },
            None => EntityKind::Text,
        },
        "TEXT" | "MTEXT" | "ATTRIB" | "ATTDEF" => EntityKind::Text,
        other => {
            *doc.skipped.entry(other.to_string()).or_default() += 1;
            return Ok(None);
        }
    };
    Ok(Some(Entity { layer: rec.layer(), kind, line: rec.line }))
}

fn collect_vertices(rec: &Record) -> Result<Vec<PolyVertex>, ParseError> {
    let mut vertices: Vec<PolyVertex> = Vec::new();
    let elevation = rec.f(38, 0.0)?;
    for p in rec.pairs {
        match p.code {
            10 => vertices.push(PolyVertex { pos: Point3::new(float(p)?, 0.0, elevation), bulge: 0.0 }),
            20 | 30 | 42 => {
                let Some(v) = vertices.last_mut() else {
                    return Err(ParseError::Unexpected {
                        line: p.line,
                        found: p.code.to_string(),
                        context: "vertex coordinate before its x value",
                    });
                };
                match p.code {
                    20 => v.pos.y = float(p)?,
                    30 => v.pos.z = float(p)?,
                    _ => v.bulge = float(p)?,
                }
            }
            _ => {}
        }
    }
    Ok(vertices)
}

fn lwpolyline(rec: &Record) -> Result<EntityKind, ParseError> {
    Ok(EntityKind::Polyline {
        vertices: collect_vertices(rec)?,
        closed: rec.i(70, 0)? & 1 == 1,
        extrusion: rec.extrusion()?,
    })
}

/// Old-style POLYLINE followed by VERTEX records and SEQEND. Returns `None`
/// for polygon and polyface meshes.
fn polyline(rec: &Record, cur: &mut Cursor) -> Result<Option<EntityKind>, ParseError> {
    let flags = rec.i(70, 0)?;
    let mut vertices = Vec::new();
    loop {
        let Some(p) = cur.peek() else {
            return Err(cur.truncated("a POLYLINE"));
        };
        match (p.code, p.value.as_str()) {
            (0, "VERTEX") => {
                let v = cur.record().expect("peeked");
                // Face records of polyface meshes carry flag 128 and no position.
                if v.i(70, 0)? & 128 != 0 && v.i(70, 0)? & 64 == 0 {
                    continue;
                }
                vertices.push(PolyVertex { pos: v.point(10)?, bulge: v.f(42, 0.0)? });
            }
            (0, "SEQEND") => {
                cur.record();
                break;
            }
            (0, _) => break,
            _ => unreachable!("records end at group code 0"),
        }
    }
    if flags & (16 | 64) != 0 {
        return Ok(None);
    }
    let extrusion = if flags & 8 != 0 { Z_AXIS } else { rec.extrusion()? };
    Ok(Some(EntityKind::Polyline { vertices, closed: flags & 1 == 1, extrusion }))
}

fn drop_dangling_inserts(doc: &mut DrawingDocument) {
    let names: Vec<String> = doc.blocks.keys().cloned().collect();
    let known = |e: &Entity| match &e.kind {
        EntityKind::Insert { block, .. } => names.binary_search(block).is_ok(),
        _ => true,
    };
    let mut dropped = Vec::new();
    let mut filter = |list: &mut Vec<Entity>| {
        list.retain(|e| {
            let ok = known(e);
            if !ok {
                if let EntityKind::Insert { block, .. } = &e.kind {
                    dropped.push((block.clone(), e.line));
                }
            }
            ok
        })
    };
    filter(&mut doc.entities);
    for block in doc.blocks.values_mut() {
        filter(&mut block.entities);
    }
    for (name, line) in dropped {
        doc.warnings.push(format!("line {line}: insert of undefined block {name:?} skipped"));
    }
}
