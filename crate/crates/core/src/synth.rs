//! Synthetic floor plans with exact ground truth.
//!
//! Rooms are drawn as an outer and an inner rectangle of face lines (or as
//! filled quads), doors as gaps closed by jambs with a quarter-arc swing,
//! windows as a stack of parallel pane lines centred in the wall.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Axis, Point2, Segment};
use crate::openings::{Door, Window};
use crate::scene::{SceneResult, SceneWall, WallSource};

/// Perpendicular distance between adjacent pane lines.
pub const PANE_SPACING: f64 = 15.0;
/// Shortest wall piece a door may leave on either side, including between
/// two doors.
pub const MIN_DOOR_PIECE: f64 = 500.0;
/// Clearance between a window and wall ends or other openings.
pub const WINDOW_CLEARANCE: f64 = 100.0;
/// Smallest gap between two rooms.
pub const MIN_ROOM_GAP: f64 = 500.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    /// Outer rectangle corner and size, millimetres.
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    Bottom,
    Right,
    Top,
    Left,
}

impl WallSide {
    pub const ALL: [WallSide; 4] = [WallSide::Bottom, WallSide::Right, WallSide::Top, WallSide::Left];

    pub fn axis(self) -> Axis {
        match self {
            WallSide::Bottom | WallSide::Top => Axis::Horizontal,
            WallSide::Left | WallSide::Right => Axis::Vertical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallRef {
    pub room: usize,
    pub side: WallSide,
}

/// Opening placed `offset` millimetres from the start of the wall's inner
/// span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoorSlot {
    pub wall: WallRef,
    pub offset: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSlot {
    pub wall: WallRef,
    pub offset: f64,
    pub width: f64,
    #[serde(default = "default_panes")]
    pub pane_count: usize,
}

fn default_panes() -> usize {
    3
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub short_stroke_count: usize,
    pub furniture_block_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rooms: Vec<RoomSpec>,
    pub wall_thickness: f64,
    #[serde(default)]
    pub door_slots: Vec<DoorSlot>,
    #[serde(default)]
    pub window_slots: Vec<WindowSlot>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub seed: u64,
    /// Draw walls as filled quads instead of face lines.
    #[serde(default)]
    pub solid_walls: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomPlanParams {
    pub rooms: (usize, usize),
    pub thickness: (f64, f64),
    pub doors: (usize, usize),
    pub windows: (usize, usize),
    pub noise: NoiseSpec,
    pub solid_walls: bool,
}

impl Default for RandomPlanParams {
    fn default() -> Self {
        RandomPlanParams {
            rooms: (1, 6),
            thickness: (120.0, 240.0),
            doors: (0, 4),
            windows: (0, 4),
            noise: NoiseSpec::default(),
            solid_walls: false,
        }
    }
}

fn round10(v: f64) -> f64 {
    (v / 10.0).round() * 10.0
}

impl SyntheticSpec {
    /// A valid random plan: rooms on a grid, openings placed by rejection
    /// sampling.
    pub fn random(seed: u64, p: &RandomPlanParams) -> SyntheticSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(p.rooms.0..=p.rooms.1);
        let t = round10(rng.random_range(p.thickness.0..=p.thickness.1));
        let cols = (n as f64).sqrt().ceil() as usize;
        let mut rooms = Vec::with_capacity(n);
        let (mut x, mut y, mut row_h) = (0.0, 0.0, 0.0f64);
        for i in 0..n {
            if i > 0 && i % cols == 0 {
                x = 0.0;
                y += row_h + round10(rng.random_range(800.0..=1500.0));
                row_h = 0.0;
            }
            let w = round10(rng.random_range(3000.0..=6000.0));
            let h = round10(rng.random_range(2500.0..=5000.0));
            rooms.push(RoomSpec { x, y, width: w, height: h });
            x += w + round10(rng.random_range(800.0..=1500.0));
            row_h = row_h.max(h);
        }
        let mut spec = SyntheticSpec {
            rooms,
            wall_thickness: t,
            door_slots: Vec::new(),
            window_slots: Vec::new(),
            noise: p.noise,
            seed,
            solid_walls: p.solid_walls,
        };
        if n == 0 {
            return spec;
        }
        let want_doors = rng.random_range(p.doors.0..=p.doors.1);
        let want_windows = rng.random_range(p.windows.0..=p.windows.1);
        for _ in 0..200 {
            if spec.door_slots.len() >= want_doors {
                break;
            }
            let wall = WallRef { room: rng.random_range(0..n), side: WallSide::ALL[rng.random_range(0..4)] };
            let len = spec.inner_length(wall);
            let width = round10(rng.random_range(700.0..=1000.0));
            if len < width + 2.0 * MIN_DOOR_PIECE {
                continue;
            }
            let offset = round10(rng.random_range(MIN_DOOR_PIECE..=len - width - MIN_DOOR_PIECE));
            let slot = DoorSlot { wall, offset, width };
            spec.door_slots.push(slot);
            if spec.validate().is_err() {
                spec.door_slots.pop();
            }
        }
        for _ in 0..200 {
            if spec.window_slots.len() >= want_windows {
                break;
            }
            let wall = WallRef { room: rng.random_range(0..n), side: WallSide::ALL[rng.random_range(0..4)] };
            let len = spec.inner_length(wall);
            let width = round10(rng.random_range(600.0..=1500.0));
            if len < width + 2.0 * WINDOW_CLEARANCE + 200.0 {
                continue;
            }
            let offset = round10(rng.random_range(WINDOW_CLEARANCE + 100.0..=len - width - WINDOW_CLEARANCE - 100.0));
            spec.window_slots.push(WindowSlot { wall, offset, width, pane_count: 3 });
            if spec.validate().is_err() {
                spec.window_slots.pop();
            }
        }
        spec
    }

    fn inner_span(&self, w: WallRef) -> (f64, f64) {
        let r = &self.rooms[w.room];
        let t = self.wall_thickness;
        match w.side.axis() {
            Axis::Horizontal => (r.x + t, r.x + r.width - t),
            Axis::Vertical => (r.y + t, r.y + r.height - t),
        }
    }

    fn inner_length(&self, w: WallRef) -> f64 {
        let (a, b) = self.inner_span(w);
        b - a
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        let t = self.wall_thickness;
        if !(t > 0.0 && t.is_finite()) {
            return bad(format!("wall thickness must be positive, got {t}"));
        }
        for (i, r) in self.rooms.iter().enumerate() {
            let vals = [r.x, r.y, r.width, r.height];
            if vals.iter().any(|v| !v.is_finite()) {
                return bad(format!("room {i} has non-finite coordinates"));
            }
            if r.width < 2.0 * t + 500.0 || r.height < 2.0 * t + 500.0 {
                return bad(format!("room {i} is too small for walls {t} mm thick"));
            }
        }
        for i in 0..self.rooms.len() {
            for j in i + 1..self.rooms.len() {
                let (a, b) = (room_box(&self.rooms[i]), room_box(&self.rooms[j]));
                if a.expand(MIN_ROOM_GAP / 2.0).intersection_area(&b.expand(MIN_ROOM_GAP / 2.0)) > 0.0 {
                    return bad(format!("rooms {i} and {j} are closer than {MIN_ROOM_GAP} mm"));
                }
            }
        }
        // Occupied intervals per wall, padded by the clearance they need.
        let mut taken: Vec<(usize, WallSide, f64, f64, bool)> = Vec::new();
        for (k, d) in self.door_slots.iter().enumerate() {
            self.check_ref(d.wall)?;
            let len = self.inner_length(d.wall);
            if !(d.width > 0.0) || d.offset < MIN_DOOR_PIECE || d.offset + d.width > len - MIN_DOOR_PIECE {
                return bad(format!("door {k} must leave {MIN_DOOR_PIECE} mm of wall on both sides"));
            }
            taken.push((d.wall.room, d.wall.side, d.offset, d.offset + d.width, true));
        }
        for (k, w) in self.window_slots.iter().enumerate() {
            self.check_ref(w.wall)?;
            let len = self.inner_length(w.wall);
            if !(w.width > 0.0) || w.offset < WINDOW_CLEARANCE || w.offset + w.width > len - WINDOW_CLEARANCE {
                return bad(format!("window {k} must stay {WINDOW_CLEARANCE} mm inside its wall"));
            }
            if w.pane_count < 2 || (w.pane_count - 1) as f64 * PANE_SPACING >= t - 20.0 {
                return bad(format!("window {k} has {} panes, which do not fit the wall", w.pane_count));
            }
            taken.push((w.wall.room, w.wall.side, w.offset, w.offset + w.width, false));
        }
        for i in 0..taken.len() {
            for j in i + 1..taken.len() {
                let (a, b) = (taken[i], taken[j]);
                let pad = if a.4 && b.4 { MIN_DOOR_PIECE } else { WINDOW_CLEARANCE };
                if a.0 == b.0 && a.1 == b.1 && a.2 < b.3 + pad && b.2 < a.3 + pad {
                    return bad(format!("overlapping slots on room {} {:?} wall", a.0, a.1));
                }
            }
        }
        Ok(())
    }

    fn check_ref(&self, w: WallRef) -> Result<(), SynthError> {
        if w.room >= self.rooms.len() {
            return Err(SynthError::Invalid(format!("slot names room {} of {}", w.room, self.rooms.len())));
        }
        Ok(())
    }
}

fn room_box(r: &RoomSpec) -> Aabb {
    Aabb::from_points(Point2::new(r.x, r.y), Point2::new(r.x + r.width, r.y + r.height))
}

/// Minimal ASCII DXF writer.
struct DxfWriter {
    out: String,
}

impl DxfWriter {
    fn pair(&mut self, code: i32, value: impl Display) {
        use std::fmt::Write;
        let _ = write!(self.out, "{code}\n{value}\n");
    }

    fn line(&mut self, layer: &str, a: Point2, b: Point2) {
        self.pair(0, "LINE");
        self.pair(8, layer);
        self.pair(10, a.x);
        self.pair(20, a.y);
        self.pair(30, 0.0);
        self.pair(11, b.x);
        self.pair(21, b.y);
        self.pair(31, 0.0);
    }

    fn arc(&mut self, layer: &str, c: Point2, r: f64, start_deg: f64, end_deg: f64) {
        self.pair(0, "ARC");
        self.pair(8, layer);
        self.pair(10, c.x);
        self.pair(20, c.y);
        self.pair(30, 0.0);
        self.pair(40, r);
        self.pair(50, start_deg);
        self.pair(51, end_deg);
    }

    /// Filled axis-aligned quad; DXF lists the corners in zig-zag order.
    fn solid(&mut self, layer: &str, r: &Aabb) {
        self.pair(0, "SOLID");
        self.pair(8, layer);
        let corners = [(r.min.x, r.min.y), (r.max.x, r.min.y), (r.min.x, r.max.y), (r.max.x, r.max.y)];
        for (i, (x, y)) in corners.iter().enumerate() {
            self.pair(10 + i as i32, x);
            self.pair(20 + i as i32, y);
            self.pair(30 + i as i32, 0.0);
        }
    }
}

/// A wall of one room side: its outer and inner faces as (offset, lo, hi)
/// along the side's axis.
struct SideGeom {
    axis: Axis,
    outer: (f64, f64, f64),
    inner: (f64, f64, f64),
    /// Direction from the outer face towards the room interior.
    inward: f64,
}

fn side_geom(r: &RoomSpec, t: f64, side: WallSide) -> SideGeom {
    let (l, b, rt, tp) = (r.x, r.y, r.x + r.width, r.y + r.height);
    match side {
        WallSide::Bottom => SideGeom { axis: Axis::Horizontal, outer: (b, l, rt), inner: (b + t, l + t, rt - t), inward: 1.0 },
        WallSide::Top => SideGeom { axis: Axis::Horizontal, outer: (tp, l, rt), inner: (tp - t, l + t, rt - t), inward: -1.0 },
        WallSide::Left => SideGeom { axis: Axis::Vertical, outer: (l, b, tp), inner: (l + t, b + t, tp - t), inward: 1.0 },
        WallSide::Right => SideGeom { axis: Axis::Vertical, outer: (rt, b, tp), inner: (rt - t, b + t, tp - t), inward: -1.0 },
    }
}

/// Subtracts sorted disjoint gaps from `[lo, hi]`.
fn pieces(lo: f64, hi: f64, gaps: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut cur = lo;
    for &(a, b) in gaps {
        if a > cur {
            out.push((cur, a));
        }
        cur = cur.max(b);
    }
    if hi > cur {
        out.push((cur, hi));
    }
    out
}

fn grow(bounds: &mut Option<Aabb>, b: Aabb) {
    *bounds = Some(bounds.map_or(b, |x| x.union(&b)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub dxf: String,
    pub truth: SceneResult,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Synthetic, SynthError> {
    spec.validate()?;
    let t = spec.wall_thickness;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut w = DxfWriter { out: String::new() };
    let mut entities = DxfWriter { out: String::new() };
    let mut walls: Vec<SceneWall> = Vec::new();
    let mut doors: Vec<Door> = Vec::new();
    let mut windows: Vec<Window> = Vec::new();
    let mut bounds: Option<Aabb> = None;

    for (ri, room) in spec.rooms.iter().enumerate() {
        grow(&mut bounds, room_box(room));
        for side in WallSide::ALL {
            let g = side_geom(room, t, side);
            let axis = g.axis;
            let at = |along: f64, across: f64| axis.point(along, across);
            let wall_ref = |s: &WallRef| s.room == ri && s.side == side;
            let mut gaps: Vec<(f64, f64)> = spec
                .door_slots
                .iter()
                .filter(|d| wall_ref(&d.wall))
                .map(|d| (g.inner.1 + d.offset, g.inner.1 + d.offset + d.width))
                .collect();
            gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
            let center = (g.outer.0 + g.inner.0) / 2.0;

            // Truth pieces: solid walls keep the full outer extent on
            // horizontal sides, face-line walls the inner extent.
            let (truth_lo, truth_hi) = if spec.solid_walls && axis == Axis::Horizontal {
                (g.outer.1, g.outer.2)
            } else {
                (g.inner.1, g.inner.2)
            };
            let first_id = walls.len();
            for (lo, hi) in pieces(truth_lo, truth_hi, &gaps) {
                let centerline = Segment::on_axis(axis, lo, hi, center).expect("pieces are long");
                walls.push(SceneWall { id: walls.len(), source: WallSource::Cascade, axis, centerline, thickness: t });
            }
            let host_of = |along: f64, walls: &[SceneWall]| -> usize {
                walls[first_id..]
                    .iter()
                    .find(|w| {
                        let (lo, hi) = w.centerline.interval(axis);
                        along >= lo - 1e-9 && along <= hi + 1e-9
                    })
                    .map(|w| w.id)
                    .expect("opening borders a piece")
            };

            if spec.solid_walls {
                let (lo, hi) = if axis == Axis::Horizontal { (g.outer.1, g.outer.2) } else { (g.inner.1, g.inner.2) };
                for (a, b) in pieces(lo, hi, &gaps) {
                    let r = Aabb::from_points(at(a, g.outer.0), at(b, g.inner.0));
                    entities.solid("WALL", &r);
                }
            } else {
                for (a, b) in pieces(g.outer.1, g.outer.2, &gaps) {
                    entities.line("WALL", at(a, g.outer.0), at(b, g.outer.0));
                }
                for (a, b) in pieces(g.inner.1, g.inner.2, &gaps) {
                    entities.line("WALL", at(a, g.inner.0), at(b, g.inner.0));
                }
                for &(a, b) in &gaps {
                    entities.line("WALL", at(a, g.outer.0), at(a, g.inner.0));
                    entities.line("WALL", at(b, g.outer.0), at(b, g.inner.0));
                }
            }

            for &(a, b) in &gaps {
                let hinge = at(a, g.inner.0);
                let radius = b - a;
                // Closed leaf lies along the wall, the open leaf points
                // into the room.
                let along_angle = match axis {
                    Axis::Horizontal => 0.0,
                    Axis::Vertical => FRAC_PI_2,
                };
                let into = match (axis, g.inward > 0.0) {
                    (Axis::Horizontal, true) => FRAC_PI_2,
                    (Axis::Horizontal, false) => -FRAC_PI_2,
                    (Axis::Vertical, true) => 0.0,
                    (Axis::Vertical, false) => std::f64::consts::PI,
                };
                let start = if (into - along_angle).rem_euclid(2.0 * std::f64::consts::PI) < std::f64::consts::PI {
                    along_angle
                } else {
                    into
                };
                let start = start.rem_euclid(2.0 * std::f64::consts::PI);
                let start_deg = start.to_degrees();
                entities.arc("DOOR", hinge, radius, start_deg, start_deg + 90.0);
                let opening_span = Segment::on_axis(axis, a, b, center).expect("door width positive");
                doors.push(Door {
                    hinge,
                    radius,
                    sweep: FRAC_PI_2,
                    start_angle: start,
                    host_wall: host_of(a, &walls),
                    opening_span,
                    conflict: false,
                });
            }

            for win in spec.window_slots.iter().filter(|s| wall_ref(&s.wall)) {
                let (a, b) = (g.inner.1 + win.offset, g.inner.1 + win.offset + win.width);
                let n = win.pane_count;
                for k in 0..n {
                    let off = center + (k as f64 - (n - 1) as f64 / 2.0) * PANE_SPACING;
                    entities.line("WINDOW", at(a, off), at(b, off));
                }
                windows.push(Window {
                    span: Segment::on_axis(axis, a, b, center).expect("window width positive"),
                    width: b - a,
                    host_wall: host_of((a + b) / 2.0, &walls),
                    pane_lines: n,
                    conflict: false,
                });
            }
        }
    }

    let plan_box = bounds;
    if let Some(b) = plan_box {
        for _ in 0..spec.noise.short_stroke_count {
            let p = Point2::new(rng.random_range(b.min.x - 500.0..b.max.x + 500.0), rng.random_range(b.min.y - 500.0..b.max.y + 500.0));
            let len: f64 = rng.random_range(10.0..80.0);
            let ang: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            entities.line("NOISE", p, Point2::new(p.x + len * ang.cos(), p.y + len * ang.sin()));
        }
    }

    w.pair(0, "SECTION");
    w.pair(2, "HEADER");
    w.pair(9, "$INSUNITS");
    w.pair(70, 4);
    w.pair(0, "ENDSEC");

    let mut blocks = DxfWriter { out: String::new() };
    let strip_y = plan_box.map_or(0.0, |b| b.min.y) - 1500.0;
    let mut fx = plan_box.map_or(0.0, |b| b.min.x);
    for k in 0..spec.noise.furniture_block_count {
        let fw = round10(rng.random_range(2100.0..=2600.0));
        let fh = round10(rng.random_range(2100.0..=2600.0));
        let name = format!("FURNITURE{k}");
        blocks.pair(0, "BLOCK");
        blocks.pair(8, "FURNITURE");
        blocks.pair(2, &name);
        blocks.pair(70, 0);
        blocks.pair(10, 0.0);
        blocks.pair(20, 0.0);
        blocks.pair(30, 0.0);
        let corners = [Point2::new(0.0, 0.0), Point2::new(fw, 0.0), Point2::new(fw, fh), Point2::new(0.0, fh)];
        for i in 0..4 {
            blocks.line("FURNITURE", corners[i], corners[(i + 1) % 4]);
        }
        let mut y = 2.0;
        while y < fh {
            blocks.line("FURNITURE", Point2::new(0.0, y), Point2::new(fw, y));
            y += 2.0;
        }
        blocks.pair(0, "ENDBLK");
        entities.pair(0, "INSERT");
        entities.pair(8, "FURNITURE");
        entities.pair(2, &name);
        entities.pair(10, fx);
        entities.pair(20, strip_y - fh);
        entities.pair(30, 0.0);
        grow(&mut bounds, Aabb::from_points(Point2::new(fx, strip_y - fh), Point2::new(fx + fw, strip_y)));
        fx += fw + 1500.0;
    }
    if !blocks.out.is_empty() {
        w.pair(0, "SECTION");
        w.pair(2, "BLOCKS");
        w.out.push_str(&blocks.out);
        w.pair(0, "ENDSEC");
    }
    w.pair(0, "SECTION");
    w.pair(2, "ENTITIES");
    w.out.push_str(&entities.out);
    w.pair(0, "ENDSEC");
    w.pair(0, "EOF");

    let truth = SceneResult { plan_index: 0, bounds, walls, doors, windows, ..Default::default() };
    Ok(Synthetic { dxf: w.out, truth })
}
