//! 2D primitives shared by every pipeline stage.
//!
//! All coordinates are millimetres. Segments are directionless: every
//! predicate here treats `(a, b)` and `(b, a)` identically.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for point-coincidence predicates, in millimetres.
///
/// This is a numerical tolerance only. Semantic thresholds (1 mm gap filling,
/// 2 mm length filtering, ...) live in the stage configs.
pub const EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("degenerate segment: endpoints coincide at ({0}, {1})")]
    Degenerate(f64, f64),
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("segments are not classified to the same axis")]
    AxisMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    /// Unchecked constructor; use [`Point2::try_new`] for untrusted input.
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point2 { x, y })
        } else {
            Err(GeometryError::NonFinite(x, y))
        }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(self, dx: f64, dy: f64) -> Point2 {
        Point2::new(self.x + dx, self.y + dy)
    }

    fn sub(self, o: Point2) -> (f64, f64) {
        (self.x - o.x, self.y - o.y)
    }
}

/// Horizontal or vertical classification of a near-axis segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }

    /// Coordinate along the axis.
    pub fn along(self, p: Point2) -> f64 {
        match self {
            Axis::Horizontal => p.x,
            Axis::Vertical => p.y,
        }
    }

    /// Coordinate perpendicular to the axis.
    pub fn across(self, p: Point2) -> f64 {
        match self {
            Axis::Horizontal => p.y,
            Axis::Vertical => p.x,
        }
    }

    /// Builds a point from (along, across) coordinates.
    pub fn point(self, along: f64, across: f64) -> Point2 {
        match self {
            Axis::Horizontal => Point2::new(along, across),
            Axis::Vertical => Point2::new(across, along),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSegment")]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

#[derive(Deserialize)]
struct RawSegment {
    a: Point2,
    b: Point2,
}

impl TryFrom<RawSegment> for Segment {
    type Error = GeometryError;
    fn try_from(raw: RawSegment) -> Result<Self, Self::Error> {
        Segment::new(raw.a, raw.b)
    }
}

impl Segment {
    /// Rejects non-finite coordinates and segments shorter than [`EPS`].
    pub fn new(a: Point2, b: Point2) -> Result<Self, GeometryError> {
        Point2::try_new(a.x, a.y)?;
        Point2::try_new(b.x, b.y)?;
        if a.dist(b) <= EPS {
            return Err(GeometryError::Degenerate(a.x, a.y));
        }
        Ok(Segment { a, b })
    }

    pub fn from_coords(ax: f64, ay: f64, bx: f64, by: f64) -> Result<Self, GeometryError> {
        Segment::new(Point2::new(ax, ay), Point2::new(bx, by))
    }

    /// Axis-aligned segment from an interval along `axis` at a fixed offset.
    pub fn on_axis(axis: Axis, lo: f64, hi: f64, offset: f64) -> Result<Self, GeometryError> {
        Segment::new(axis.point(lo, offset), axis.point(hi, offset))
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        Point2::new((self.a.x + self.b.x) * 0.5, (self.a.y + self.b.y) * 0.5)
    }

    pub fn reversed(&self) -> Segment {
        Segment { a: self.b, b: self.a }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Segment {
        Segment { a: self.a.translate(dx, dy), b: self.b.translate(dx, dy) }
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.a, self.b)
    }

    /// Angle of the undirected line against the x-axis, folded into [0, π/2].
    fn folded_angle(&self) -> f64 {
        let (dx, dy) = self.b.sub(self.a);
        dy.abs().atan2(dx.abs())
    }

    /// Nearest principal axis; exact 45° ties go to horizontal.
    pub fn axis(&self) -> Axis {
        if self.folded_angle() <= FRAC_PI_4 {
            Axis::Horizontal
        } else {
            Axis::Vertical
        }
    }

    /// Projection interval onto `axis`, as `(lo, hi)`.
    pub fn interval(&self, axis: Axis) -> (f64, f64) {
        let (p, q) = (axis.along(self.a), axis.along(self.b));
        if p <= q {
            (p, q)
        } else {
            (q, p)
        }
    }

    /// Perpendicular coordinate of the midpoint with respect to `axis`.
    pub fn offset(&self, axis: Axis) -> f64 {
        axis.across(self.midpoint())
    }
}

/// Absolute angular deviation of `s` from the nearest of the two principal
/// axes, in `[0, π/4]`.
pub fn axis_deviation(s: &Segment) -> f64 {
    let angle = s.folded_angle();
    angle.min(FRAC_PI_2 - angle).max(0.0)
}

fn point_segment_distance(p: Point2, s: &Segment) -> f64 {
    let (dx, dy) = s.b.sub(s.a);
    let (px, py) = p.sub(s.a);
    let len2 = dx * dx + dy * dy;
    let t = ((px * dx + py * dy) / len2).clamp(0.0, 1.0);
    let cx = s.a.x + t * dx;
    let cy = s.a.y + t * dy;
    (p.x - cx).hypot(p.y - cy)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_cross(s1: &Segment, s2: &Segment) -> bool {
    let d1 = orient(s2.a, s2.b, s1.a);
    let d2 = orient(s2.a, s2.b, s1.b);
    let d3 = orient(s1.a, s1.b, s2.a);
    let d4 = orient(s1.a, s1.b, s2.b);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Euclidean distance between two closed segments; zero iff they touch.
pub fn min_distance(s1: &Segment, s2: &Segment) -> f64 {
    if segments_cross(s1, s2) {
        return 0.0;
    }
    point_segment_distance(s1.a, s2)
        .min(point_segment_distance(s1.b, s2))
        .min(point_segment_distance(s2.a, s1))
        .min(point_segment_distance(s2.b, s1))
}

/// Distance from a point to a closed segment.
pub fn point_distance(p: Point2, s: &Segment) -> f64 {
    point_segment_distance(p, s)
}

/// Length of the 1D intersection of two closed intervals (0 when disjoint).
pub fn interval_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Overlap of the two segments' projections onto their shared axis.
pub fn parallel_overlap(s1: &Segment, s2: &Segment) -> Result<f64, GeometryError> {
    let axis = s1.axis();
    if s2.axis() != axis {
        return Err(GeometryError::AxisMismatch);
    }
    Ok(interval_overlap(s1.interval(axis), s2.interval(axis)))
}

/// Circular arc, swept counter-clockwise from `start_angle` to `end_angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcGeom {
    pub center: Point2,
    pub radius: f64,
    pub start_angle: f64,
    pub end_angle: f64,
}

impl ArcGeom {
    /// Arc from `start` counter-clockwise to `end` (radians). Equal angles
    /// (modulo 2π) describe a full circle.
    pub fn new(center: Point2, radius: f64, start: f64, end: f64) -> Result<Self, GeometryError> {
        Point2::try_new(center.x, center.y)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidArc(format!("radius {radius} must be > 0")));
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err(GeometryError::InvalidArc("non-finite angle".into()));
        }
        let start = start.rem_euclid(TAU);
        let mut end = end.rem_euclid(TAU);
        if end <= start {
            end += TAU;
        }
        Ok(ArcGeom { center, radius, start_angle: start, end_angle: end })
    }

    pub fn from_sweep(center: Point2, radius: f64, start: f64, sweep: f64) -> Result<Self, GeometryError> {
        if !(sweep > 0.0 && sweep <= TAU) {
            return Err(GeometryError::InvalidArc(format!("sweep {sweep} outside (0, 2π]")));
        }
        let mut arc = ArcGeom::new(center, radius, start, start)?;
        arc.end_angle = arc.start_angle + sweep;
        Ok(arc)
    }

    pub fn full_circle(center: Point2, radius: f64) -> Result<Self, GeometryError> {
        ArcGeom::from_sweep(center, radius, 0.0, TAU)
    }

    /// Counter-clockwise sweep in `(0, 2π]`.
    pub fn sweep(&self) -> f64 {
        self.end_angle - self.start_angle
    }

    pub fn point_at(&self, angle: f64) -> Point2 {
        Point2::new(
            self.center.x + self.radius * angle.cos(),
            self.center.y + self.radius * angle.sin(),
        )
    }

    pub fn start_point(&self) -> Point2 {
        self.point_at(self.start_angle)
    }

    pub fn end_point(&self) -> Point2 {
        self.point_at(self.end_angle)
    }

    pub fn is_full_circle(&self) -> bool {
        (self.sweep() - TAU).abs() <= 1e-12
    }

    pub fn translate(&self, dx: f64, dy: f64) -> ArcGeom {
        ArcGeom { center: self.center.translate(dx, dy), ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb {
    pub fn from_points(p: Point2, q: Point2) -> Aabb {
        Aabb {
            min: Point2::new(p.x.min(q.x), p.y.min(q.y)),
            max: Point2::new(p.x.max(q.x), p.y.max(q.y)),
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn include(&mut self, p: Point2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn expand(&self, d: f64) -> Aabb {
        Aabb {
            min: Point2::new(self.min.x - d, self.min.y - d),
            max: Point2::new(self.max.x + d, self.max.y + d),
        }
    }

    pub fn intersection_area(&self, other: &Aabb) -> f64 {
        interval_overlap((self.min.x, self.max.x), (other.min.x, other.max.x))
            * interval_overlap((self.min.y, self.max.y), (other.min.y, other.max.y))
    }

    pub fn iou(&self, other: &Aabb) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    pub fn contains(&self, other: &Aabb, tol: f64) -> bool {
        other.min.x >= self.min.x - tol
            && other.min.y >= self.min.y - tol
            && other.max.x <= self.max.x + tol
            && other.max.y <= self.max.y + tol
    }
}

/// Bounding box of a set of segments, or `None` when empty.
pub fn bounds_of<'a>(segments: impl IntoIterator<Item = &'a Segment>) -> Option<Aabb> {
    let mut it = segments.into_iter();
    let first = it.next()?.bounds();
    Some(it.fold(first, |acc, s| acc.union(&s.bounds())))
}
