//! Standardization of a parsed drawing: unit conversion, decomposition of
//! every entity into line segments, arc tessellation, projection to the XY
//! plane and splitting of multi-plan drawings.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dxf::{DrawingDocument, Entity, EntityKind, Point3, PolyVertex, Units, Z_AXIS};
use crate::geometry::{min_distance, point_distance, Aabb, ArcGeom, Point2, Segment, EPS};
use crate::union_find::UnionFind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("cyclic block reference: {}", .0.join(" -> "))]
    BlockCycle(Vec<String>),
    #[error("block nesting deeper than {0} levels")]
    DepthExceeded(usize),
    #[error("insert of block {block:?} (line {line}) has non-uniform scale ({sx}, {sy})")]
    NonUniformScale { block: String, line: usize, sx: f64, sy: f64 },
    #[error("unit scale must be positive, got {0}")]
    InvalidScale(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Maximum sagitta of an arc chord, millimetres.
    pub chord_tol: f64,
    /// Single-linkage distance separating independent plans, millimetres.
    pub cluster_threshold: f64,
    pub max_block_depth: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { chord_tol: 2.0, cluster_threshold: 5000.0, max_block_depth: 32 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitResolution {
    /// Multiplier from drawing units to millimetres.
    pub scale: f64,
    pub warning: Option<String>,
}

pub fn resolve_units(doc: &DrawingDocument) -> UnitResolution {
    let scale = |s| UnitResolution { scale: s, warning: None };
    match doc.source_unit {
        Units::Millimetres => scale(1.0),
        Units::Centimetres => scale(10.0),
        Units::Metres => scale(1000.0),
        Units::Inches => scale(25.4),
        Units::Feet => scale(304.8),
        Units::Unitless => UnitResolution {
            scale: 1.0,
            warning: Some("drawing declares no units; assuming millimetres".to_string()),
        },
        Units::Unknown(code) => UnitResolution {
            scale: 1.0,
            warning: Some(format!("unsupported unit code {code}; assuming millimetres")),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment3 {
    pub a: Point3,
    pub b: Point3,
}

/// Circular arc embedded in 3D: `center + radius * (cos t * u + sin t * v)`
/// for `t` in `[start, end]`, with `u` and `v` orthonormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc3 {
    pub center: Point3,
    pub u: Point3,
    pub v: Point3,
    pub radius: f64,
    pub start: f64,
    pub end: f64,
}

impl Arc3 {
    fn point_at(&self, t: f64) -> Point3 {
        let (s, c) = t.sin_cos();
        Point3::new(
            self.center.x + self.radius * (c * self.u.x + s * self.v.x),
            self.center.y + self.radius * (c * self.u.y + s * self.v.y),
            self.center.z + self.radius * (c * self.u.z + s * self.v.z),
        )
    }
}

/// Exploded geometry before projection to the XY plane.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Plan3d {
    pub segments: Vec<Segment3>,
    pub arcs: Vec<Arc3>,
    pub text_dropped: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StandardizedPlan {
    pub segments: Vec<Segment>,
    /// Circular arcs as drawn, kept alongside their tessellation.
    pub arcs: Vec<ArcGeom>,
    pub unit_scale: f64,
    /// Segments whose XY projection collapsed to a point.
    pub dropped_degenerate: usize,
    pub text_dropped: usize,
    pub warnings: Vec<String>,
}

/// Number of chords needed so that no chord's sagitta exceeds `chord_tol`.
fn chord_count(radius: f64, sweep: f64, chord_tol: f64) -> usize {
    let max_angle = if chord_tol >= 2.0 * radius {
        TAU
    } else {
        2.0 * (1.0 - chord_tol / radius).max(-1.0).acos()
    };
    let n = (sweep / max_angle).ceil().max(1.0) as usize;
    if sweep >= TAU - 1e-12 {
        n.max(3)
    } else {
        n
    }
}

fn arc_angles(start: f64, end: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (end - start) / n as f64;
    (0..=n).map(move |i| if i == n { end } else { start + step * i as f64 })
}

/// Replaces `arc` by a connected chain of chords whose sagitta is at most
/// `chord_tol`. The chain starts and ends exactly at the arc's endpoints.
pub fn tessellate_arc(arc: &ArcGeom, chord_tol: f64) -> Vec<Segment> {
    let n = chord_count(arc.radius, arc.sweep(), chord_tol);
    let mut points: Vec<Point2> = arc_angles(arc.start_angle, arc.end_angle, n).map(|t| arc.point_at(t)).collect();
    if arc.is_full_circle() {
        points[n] = points[0];
    }
    points.windows(2).filter_map(|w| Segment::new(w[0], w[1]).ok()).collect()
}

fn tessellate_arc3(arc: &Arc3, chord_tol: f64) -> Vec<Segment3> {
    let sweep = arc.end - arc.start;
    let n = chord_count(arc.radius, sweep, chord_tol);
    let mut points: Vec<Point3> = arc_angles(arc.start, arc.end, n).map(|t| arc.point_at(t)).collect();
    if sweep >= TAU - 1e-12 {
        points[n] = points[0];
    }
    points.windows(2).map(|w| Segment3 { a: w[0], b: w[1] }).collect()
}

/// Affine map of 3D space, `p -> m * p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    m: [[f64; 3]; 3],
    t: [f64; 3],
}

impl Affine {
    fn identity() -> Self {
        Affine::linear([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    fn linear(m: [[f64; 3]; 3]) -> Self {
        Affine { m, t: [0.0; 3] }
    }

    fn scale(sx: f64, sy: f64, sz: f64) -> Self {
        Affine::linear([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, sz]])
    }

    fn translate(x: f64, y: f64, z: f64) -> Self {
        Affine { t: [x, y, z], ..Affine::identity() }
    }

    fn rotate_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Affine::linear([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Object coordinate system of an extrusion direction (the DXF
    /// "arbitrary axis" rule).
    fn ocs(normal: Point3) -> Self {
        let len = (normal.x * normal.x + normal.y * normal.y + normal.z * normal.z).sqrt();
        if len < 1e-12 || (normal == Z_AXIS) {
            return Affine::identity();
        }
        let n = [normal.x / len, normal.y / len, normal.z / len];
        let limit = 1.0 / 64.0;
        let w = if n[0].abs() < limit && n[1].abs() < limit { [0.0, 1.0, 0.0] } else { [0.0, 0.0, 1.0] };
        let ax = normalize(cross(w, n));
        let ay = normalize(cross(n, ax));
        Affine::linear([[ax[0], ay[0], n[0]], [ax[1], ay[1], n[1]], [ax[2], ay[2], n[2]]])
    }

    /// `self ∘ other`: applies `other` first.
    fn then_after(&self, other: &Affine) -> Affine {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        let t_other = self.apply_vec(other.t);
        Affine { m, t: [t_other[0] + self.t[0], t_other[1] + self.t[1], t_other[2] + self.t[2]] }
    }

    fn apply_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2];
        }
        out
    }

    fn apply(&self, p: Point3) -> Point3 {
        let v = self.apply_vec([p.x, p.y, p.z]);
        Point3::new(v[0] + self.t[0], v[1] + self.t[1], v[2] + self.t[2])
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

struct Exploder<'a> {
    doc: &'a DrawingDocument,
    cfg: &'a IngestConfig,
    out: Plan3d,
    stack: Vec<String>,
}

impl Exploder<'_> {
    fn entities(&mut self, list: &[Entity], xf: &Affine) -> Result<(), IngestError> {
        for e in list {
            self.entity(e, xf)?;
        }
        Ok(())
    }

    fn push_segment(&mut self, a: Point3, b: Point3) {
        self.out.segments.push(Segment3 { a, b });
    }

    /// Arc given in the object coordinate system `ocs`, mapped by `xf`.
    fn push_arc(&mut self, xf: &Affine, ocs: &Affine, center: Point3, radius: f64, start: f64, end: f64) {
        if !(radius > 0.0) || !(end > start) {
            return;
        }
        let full = xf.then_after(ocs);
        let u = full.apply_vec([1.0, 0.0, 0.0]);
        let v = full.apply_vec([0.0, 1.0, 0.0]);
        let r = radius * norm(u);
        if !(r > 0.0) || !r.is_finite() {
            return;
        }
        let c = full.apply(center);
        let to_p = |w: [f64; 3]| {
            let w = normalize(w);
            Point3::new(w[0], w[1], w[2])
        };
        let arc = Arc3 { center: c, u: to_p(u), v: to_p(v), radius: r, start, end };
        let chords = tessellate_arc3(&arc, self.cfg.chord_tol);
        self.out.segments.extend(chords);
        self.out.arcs.push(arc);
    }

    fn polyline(&mut self, xf: &Affine, vertices: &[PolyVertex], closed: bool, extrusion: Point3) {
        let ocs = Affine::ocs(extrusion);
        let n = vertices.len();
        let edges = if closed { n } else { n.saturating_sub(1) };
        for i in 0..edges {
            let v1 = vertices[i];
            let v2 = vertices[(i + 1) % n];
            if v1.bulge.abs() < 1e-12 {
                let (a, b) = (xf.apply(ocs.apply(v1.pos)), xf.apply(ocs.apply(v2.pos)));
                self.push_segment(a, b);
                continue;
            }
            let (dx, dy) = (v2.pos.x - v1.pos.x, v2.pos.y - v1.pos.y);
            let chord = dx.hypot(dy);
            if chord < EPS {
                continue;
            }
            let b = v1.bulge;
            let k = (1.0 - b * b) / (4.0 * b);
            let center = Point3::new(
                (v1.pos.x + v2.pos.x) * 0.5 - k * dy,
                (v1.pos.y + v2.pos.y) * 0.5 + k * dx,
                v1.pos.z,
            );
            let radius = (v1.pos.x - center.x).hypot(v1.pos.y - center.y);
            let a1 = (v1.pos.y - center.y).atan2(v1.pos.x - center.x);
            let a2 = (v2.pos.y - center.y).atan2(v2.pos.x - center.x);
            let (start, mut end) = if b > 0.0 { (a1, a2) } else { (a2, a1) };
            while end <= start {
                end += TAU;
            }
            self.push_arc(xf, &ocs, center, radius, start, end);
        }
    }

    fn entity(&mut self, e: &Entity, xf: &Affine) -> Result<(), IngestError> {
        match &e.kind {
            EntityKind::Line { start, end } => self.push_segment(xf.apply(*start), xf.apply(*end)),
            EntityKind::Polyline { vertices, closed, extrusion } => {
                self.polyline(xf, vertices, *closed, *extrusion)
            }
            EntityKind::Arc { center, radius, start_deg, end_deg, extrusion } => {
                let start = start_deg.to_radians().rem_euclid(TAU);
                let mut end = end_deg.to_radians().rem_euclid(TAU);
                if end <= start {
                    end += TAU;
                }
                self.push_arc(xf, &Affine::ocs(*extrusion), *center, *radius, start, end);
            }
            EntityKind::Circle { center, radius, extrusion } => {
                self.push_arc(xf, &Affine::ocs(*extrusion), *center, *radius, 0.0, TAU);
            }
            EntityKind::Face { corners, extrusion } => {
                let ocs = Affine::ocs(*extrusion);
                let pts: Vec<Point3> = corners.iter().map(|p| xf.apply(ocs.apply(*p))).collect();
                for i in 0..pts.len() {
                    self.push_segment(pts[i], pts[(i + 1) % pts.len()]);
                }
            }
            EntityKind::Insert {
                block,
                position,
                scale,
                rotation_deg,
                columns,
                rows,
                column_spacing,
                row_spacing,
                extrusion,
            } => {
                let (sx, sy) = (scale.x, scale.y);
                if sx == 0.0 || sy == 0.0 || ((sx.abs() - sy.abs()).abs() > 1e-9 * sx.abs().max(sy.abs())) {
                    return Err(IngestError::NonUniformScale { block: block.clone(), line: e.line, sx, sy });
                }
                if let Some(pos) = self.stack.iter().position(|b| b == block) {
                    let mut cycle = self.stack[pos..].to_vec();
                    cycle.push(block.clone());
                    return Err(IngestError::BlockCycle(cycle));
                }
                if self.stack.len() >= self.cfg.max_block_depth {
                    return Err(IngestError::DepthExceeded(self.cfg.max_block_depth));
                }
                let def = &self.doc.blocks[block];
                let rotation = rotation_deg.to_radians();
                let local = Affine::rotate_z(rotation)
                    .then_after(&Affine::scale(sx, sy, scale.z))
                    .then_after(&Affine::translate(-def.base.x, -def.base.y, -def.base.z));
                let ocs = Affine::ocs(*extrusion);
                self.stack.push(block.clone());
                for row in 0..*rows {
                    for col in 0..*columns {
                        let (s, c) = rotation.sin_cos();
                        let ox = col as f64 * column_spacing;
                        let oy = row as f64 * row_spacing;
                        let at = Affine::translate(
                            position.x + c * ox - s * oy,
                            position.y + s * ox + c * oy,
                            position.z,
                        );
                        let inner = xf.then_after(&ocs).then_after(&at).then_after(&local);
                        self.entities(&def.entities, &inner)?;
                    }
                }
                self.stack.pop();
            }
            EntityKind::Text => self.out.text_dropped += 1,
        }
        Ok(())
    }
}

/// Decomposes every entity into 3D segments (plus the arcs they came from),
/// with all coordinates multiplied by `scale`.
pub fn explode_to_3d(doc: &DrawingDocument, scale: f64, cfg: &IngestConfig) -> Result<Plan3d, IngestError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(IngestError::InvalidScale(scale));
    }
    let mut ex = Exploder { doc, cfg, out: Plan3d::default(), stack: Vec::new() };
    ex.entities(&doc.entities, &Affine::scale(scale, scale, scale))?;
    Ok(ex.out)
}

/// Orthographic projection onto the XY plane. Arcs whose plane is not
/// parallel to XY project to ellipses; only their chords are kept.
pub fn flatten_to_2d(plan: Plan3d, unit_scale: f64) -> StandardizedPlan {
    let mut out = StandardizedPlan { unit_scale, text_dropped: plan.text_dropped, ..Default::default() };
    for s in &plan.segments {
        match Segment::from_coords(s.a.x, s.a.y, s.b.x, s.b.y) {
            Ok(seg) => out.segments.push(seg),
            Err(_) => out.dropped_degenerate += 1,
        }
    }
    let mut tilted = 0;
    for arc in &plan.arcs {
        if arc.u.z.abs() > 1e-9 || arc.v.z.abs() > 1e-9 {
            tilted += 1;
            continue;
        }
        let phi = arc.u.y.atan2(arc.u.x);
        let ccw = arc.u.x * arc.v.y - arc.u.y * arc.v.x > 0.0;
        let sweep = arc.end - arc.start;
        let start = if ccw { phi + arc.start } else { phi - arc.end };
        let center = Point2::new(arc.center.x, arc.center.y);
        if let Ok(a) = ArcGeom::from_sweep(center, arc.radius, start, sweep.min(TAU)) {
            out.arcs.push(a);
        }
    }
    if tilted > 0 {
        out.warnings.push(format!("{tilted} arcs not parallel to the XY plane were kept as chords only"));
    }
    out
}

/// Explodes and flattens in one step.
pub fn explode_entities(
    doc: &DrawingDocument,
    scale: f64,
    cfg: &IngestConfig,
) -> Result<StandardizedPlan, IngestError> {
    Ok(flatten_to_2d(explode_to_3d(doc, scale, cfg)?, scale))
}

/// Unit resolution followed by explosion, collecting user-facing warnings.
pub fn standardize(doc: &DrawingDocument, cfg: &IngestConfig) -> Result<StandardizedPlan, IngestError> {
    let units = resolve_units(doc);
    let mut plan = explode_entities(doc, units.scale, cfg)?;
    let mut warnings: Vec<String> = units.warning.into_iter().collect();
    warnings.extend(doc.warnings.iter().cloned());
    for (kind, n) in &doc.skipped {
        warnings.push(format!("skipped {n} unsupported {kind} entities"));
    }
    if plan.dropped_degenerate > 0 {
        warnings.push(format!("dropped {} segments degenerate in plan view", plan.dropped_degenerate));
    }
    warnings.append(&mut plan.warnings);
    plan.warnings = warnings;
    Ok(plan)
}

/// One independent floor plan of a drawing.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanCluster {
    pub segments: Vec<Segment>,
    pub arcs: Vec<ArcGeom>,
    pub bounds: Aabb,
}

impl PlanCluster {
    pub fn from_segments(segments: Vec<Segment>, arcs: Vec<ArcGeom>) -> Option<PlanCluster> {
        let bounds = crate::geometry::bounds_of(&segments)?;
        Some(PlanCluster { segments, arcs, bounds })
    }
}

/// Connected components of the graph joining segments at distance
/// `<= threshold`. Returns a dense component index per segment, numbered in
/// order of each component's first segment.
pub fn single_linkage(segments: &[Segment], threshold: f64) -> Vec<usize> {
    let n = segments.len();
    if n == 0 {
        return Vec::new();
    }
    let mut uf = UnionFind::new(n);
    let bounds = crate::geometry::bounds_of(segments).expect("non-empty");
    let threshold = threshold.max(0.0);

    // Any two points inside one cell are strictly closer than `threshold`,
    // so all segments crossing a cell are linked without distance tests.
    let shortcut = threshold > 0.0;
    let cell = if shortcut { threshold / SQRT_2 * (1.0 - 1e-6) } else { 1.0 };
    let reach = (threshold / cell).floor() as i64 + 1;
    let margin = cell * 1e-9;
    let key = |v: f64, o: f64| ((v - o) / cell).floor() as i64;

    let mut cells: std::collections::HashMap<(i64, i64), Vec<u32>> = std::collections::HashMap::new();
    for (idx, s) in segments.iter().enumerate() {
        let b = s.bounds();
        let (i0, i1) = (key(b.min.x - margin, bounds.min.x), key(b.max.x + margin, bounds.min.x));
        let (j0, j1) = (key(b.min.y - margin, bounds.min.y), key(b.max.y + margin, bounds.min.y));
        for i in i0..=i1 {
            for j in j0..=j1 {
                let lo = Point2::new(bounds.min.x + i as f64 * cell - margin, bounds.min.y + j as f64 * cell - margin);
                let hi = Point2::new(lo.x + cell + 2.0 * margin, lo.y + cell + 2.0 * margin);
                if segment_hits_box(s, lo, hi) {
                    cells.entry((i, j)).or_default().push(idx as u32);
                }
            }
        }
    }
    let mut keys: Vec<(i64, i64)> = cells.keys().copied().collect();
    keys.sort_unstable();
    if shortcut {
        for k in &keys {
            let members = &cells[k];
            for w in members.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }
    for &(i, j) in &keys {
        let here = &cells[&(i, j)];
        for di in -reach..=reach {
            for dj in -reach..=reach {
                if (di, dj) <= (0, 0) && !(di == 0 && dj == 0 && !shortcut) {
                    continue;
                }
                let Some(there) = cells.get(&(i + di, j + dj)) else { continue };
                if shortcut && uf.find(here[0]) == uf.find(there[0]) {
                    continue;
                }
                'pairs: for &a in here {
                    for &b in there {
                        if a == b || uf.find(a) == uf.find(b) {
                            continue;
                        }
                        if min_distance(&segments[a as usize], &segments[b as usize]) <= threshold {
                            uf.union(a, b);
                            if shortcut {
                                break 'pairs;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut dense = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let r = uf.find(i as u32) as usize;
            if dense[r] == usize::MAX {
                dense[r] = next;
                next += 1;
            }
            dense[r]
        })
        .collect()
}

/// Liang-Barsky clip test of a segment against a closed box.
fn segment_hits_box(s: &Segment, lo: Point2, hi: Point2) -> bool {
    let (dx, dy) = (s.b.x - s.a.x, s.b.y - s.a.y);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-dx, s.a.x - lo.x),
        (dx, hi.x - s.a.x),
        (-dy, s.a.y - lo.y),
        (dy, hi.y - s.a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Splits a standardized drawing into independent plans. Clusters come back
/// sorted by descending segment count.
pub fn cluster_plans(plan: &StandardizedPlan, threshold: f64) -> Vec<PlanCluster> {
    let labels = single_linkage(&plan.segments, threshold);
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups: Vec<(Vec<Segment>, Vec<ArcGeom>)> = vec![(Vec::new(), Vec::new()); count];
    for (s, &l) in plan.segments.iter().zip(&labels) {
        groups[l].0.push(*s);
    }
    for arc in &plan.arcs {
        let anchor = arc.start_point();
        let nearest = plan
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| (point_distance(anchor, s), i))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, i)) = nearest {
            groups[labels[i]].1.push(*arc);
        }
    }
    let mut clusters: Vec<PlanCluster> =
        groups.into_iter().filter_map(|(segs, arcs)| PlanCluster::from_segments(segs, arcs)).collect();
    clusters.sort_by_key(|c| std::cmp::Reverse(c.segments.len()));
    clusters
}
