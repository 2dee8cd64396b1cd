//! Door and window recognition on top of the detected walls.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::geometry::{axis_deviation, interval_overlap, ArcGeom, Axis, Point2, Segment, EPS};
use crate::wall_pipeline::Wall;
pub use crate::wall_pipeline::WindowHint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpeningConfig {
    pub door_sweep_tol: f64,
    pub door_radius_min: f64,
    pub door_radius_max: f64,
    /// Largest hinge distance from a wall footprint.
    pub door_wall_dist: f64,
    /// Adjacent pane lines must be strictly closer than this.
    pub window_gap_max: f64,
    /// Pane group centre must lie within this fraction of the wall thickness
    /// from the wall centreline.
    pub window_center_ratio: f64,
    pub window_min_lines: usize,
    /// Largest angle between a pane line and its wall.
    pub window_angle_tol: f64,
    /// Minimum interval IoU between a pane line and the first line of its
    /// group.
    pub window_group_iou: f64,
}

impl Default for OpeningConfig {
    fn default() -> Self {
        OpeningConfig {
            door_sweep_tol: PI / 36.0,
            door_radius_min: 300.0,
            door_radius_max: 25000.0,
            door_wall_dist: 50.0,
            window_gap_max: 20.0,
            window_center_ratio: 0.25,
            window_min_lines: 3,
            window_angle_tol: PI / 36.0,
            window_group_iou: 0.8,
        }
    }
}

impl OpeningConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("door_sweep_tol", self.door_sweep_tol),
            ("door_radius_min", self.door_radius_min),
            ("door_wall_dist", self.door_wall_dist),
            ("window_gap_max", self.window_gap_max),
            ("window_center_ratio", self.window_center_ratio),
            ("window_angle_tol", self.window_angle_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        if self.door_radius_min > self.door_radius_max {
            return Err("door_radius_min exceeds door_radius_max".into());
        }
        if self.window_min_lines < 2 {
            return Err("window_min_lines must be at least 2".into());
        }
        if !(0.0..=1.0).contains(&self.window_group_iou) {
            return Err("window_group_iou must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Door {
    pub hinge: Point2,
    pub radius: f64,
    pub sweep: f64,
    pub start_angle: f64,
    pub host_wall: usize,
    /// Chord of the swing projected onto the host centreline.
    pub opening_span: Segment,
    #[serde(default)]
    pub conflict: bool,
}

impl Door {
    pub fn arc(&self) -> Option<ArcGeom> {
        ArcGeom::from_sweep(self.hinge, self.radius, self.start_angle, self.sweep).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub span: Segment,
    pub width: f64,
    pub host_wall: usize,
    pub pane_lines: usize,
    #[serde(default)]
    pub conflict: bool,
}

fn nearest_wall(p: Point2, walls: &[Wall], max_dist: f64) -> Option<usize> {
    walls
        .iter()
        .enumerate()
        .map(|(i, w)| (w.footprint().distance_to(p), i))
        .filter(|(d, _)| *d <= max_dist)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, i)| i)
}

/// Quarter arcs of plausible radius hinged on a wall.
pub fn detect_doors(arcs: &[ArcGeom], walls: &[Wall], cfg: &OpeningConfig) -> Vec<Door> {
    arcs.iter()
        .filter(|a| (a.sweep() - FRAC_PI_2).abs() <= cfg.door_sweep_tol)
        .filter(|a| a.radius >= cfg.door_radius_min && a.radius <= cfg.door_radius_max)
        .filter_map(|a| {
            let host = nearest_wall(a.center, walls, cfg.door_wall_dist)?;
            let w = &walls[host];
            let (p, q) = (w.axis.along(a.start_point()), w.axis.along(a.end_point()));
            let opening_span = Segment::on_axis(w.axis, p.min(q), p.max(q), w.offset()).ok()?;
            Some(Door {
                hinge: a.center,
                radius: a.radius,
                sweep: a.sweep(),
                start_angle: a.start_angle,
                host_wall: host,
                opening_span,
                conflict: false,
            })
        })
        .collect()
}

fn clip(span: (f64, f64), to: (f64, f64)) -> Option<(f64, f64)> {
    let lo = span.0.max(to.0);
    let hi = span.1.min(to.1);
    (hi - lo > EPS).then_some((lo, hi))
}

fn interval_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = interval_overlap(a, b);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn window_on(wall_idx: usize, w: &Wall, span: (f64, f64), pane_lines: usize) -> Option<Window> {
    let (lo, hi) = clip(span, w.span())?;
    Some(Window {
        span: Segment::on_axis(w.axis, lo, hi, w.offset()).ok()?,
        width: hi - lo,
        host_wall: wall_idx,
        pane_lines,
        conflict: false,
    })
}

/// Groups of closely spaced parallel lines near a wall's centre line, seen
/// in the raw segments lying in or on a wall footprint.
fn scan_walls(raw: &[Segment], walls: &[Wall], cfg: &OpeningConfig) -> Vec<Window> {
    let mut out = Vec::new();
    for (wi, w) in walls.iter().enumerate() {
        let axis = w.axis;
        let half = w.thickness / 2.0;
        let (off, span) = (w.offset(), w.span());
        let mut cands: Vec<(f64, f64, f64)> = raw
            .iter()
            .filter(|s| s.axis() == axis && axis_deviation(s) <= cfg.window_angle_tol)
            .filter_map(|s| {
                let o = s.offset(axis);
                if (o - off).abs() > half + 1.0 {
                    return None;
                }
                let iv = s.interval(axis);
                clip(iv, span).map(|_| (o, iv.0, iv.1))
            })
            .collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        let mut used = vec![false; cands.len()];
        for i in 0..cands.len() {
            if used[i] {
                continue;
            }
            let seed = (cands[i].1, cands[i].2);
            let mut group = vec![i];
            let mut common = seed;
            for j in i + 1..cands.len() {
                let last = cands[*group.last().expect("non-empty")].0;
                let gap = cands[j].0 - last;
                if gap >= cfg.window_gap_max {
                    break;
                }
                if used[j] || gap <= EPS || interval_iou(seed, (cands[j].1, cands[j].2)) < cfg.window_group_iou {
                    continue;
                }
                group.push(j);
                common = (common.0.max(cands[j].1), common.1.min(cands[j].2));
            }
            if group.len() < cfg.window_min_lines || common.1 - common.0 <= EPS {
                continue;
            }
            let center = (cands[group[0]].0 + cands[*group.last().expect("non-empty")].0) / 2.0;
            if (center - off).abs() > cfg.window_center_ratio * w.thickness {
                continue;
            }
            for &g in &group {
                used[g] = true;
            }
            out.extend(window_on(wi, w, common, group.len()));
        }
    }
    out
}

fn from_hints(hints: &[WindowHint], walls: &[Wall], cfg: &OpeningConfig) -> Vec<Window> {
    let mut out = Vec::new();
    for h in hints {
        if h.spacing() >= cfg.window_gap_max {
            continue;
        }
        let axis = h.axis;
        let center = (h.outer_a.offset(axis) + h.outer_b.offset(axis)) / 2.0;
        let ia = h.outer_a.interval(axis);
        let ib = h.outer_b.interval(axis);
        let Some(common) = clip(ia, ib) else { continue };
        let host = walls
            .iter()
            .enumerate()
            .filter(|(_, w)| w.axis == axis && clip(common, w.span()).is_some())
            .map(|(i, w)| ((center - w.offset()).abs(), i, w))
            .filter(|(d, _, w)| *d <= cfg.window_center_ratio * w.thickness)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, i, w)) = host {
            out.extend(window_on(i, w, common, h.inner_count + 2));
        }
    }
    out
}

fn same_span(a: &Window, b: &Window, walls: &[Wall]) -> bool {
    let axis = walls[a.host_wall].axis;
    a.host_wall == b.host_wall && interval_overlap(a.span.interval(axis), b.span.interval(axis)) > EPS
}

/// Windows from the raw-segment scan plus those recorded by the
/// multi-parallel filter, the latter only where the scan found nothing.
pub fn detect_windows(hints: &[WindowHint], raw: &[Segment], walls: &[Wall], cfg: &OpeningConfig) -> Vec<Window> {
    let mut out = scan_walls(raw, walls, cfg);
    for h in from_hints(hints, walls, cfg) {
        if !out.iter().any(|w| same_span(w, &h, walls)) {
            out.push(h);
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Openings {
    pub doors: Vec<Door>,
    pub windows: Vec<Window>,
}

/// Merges overlapping windows on one wall and flags doors and windows that
/// claim the same stretch of the same wall.
///
/// # Panics
/// When a door or window names a wall index out of range.
pub fn attach_openings(walls: &[Wall], mut doors: Vec<Door>, windows: Vec<Window>) -> Openings {
    for d in &doors {
        assert!(d.host_wall < walls.len(), "door host {} out of range", d.host_wall);
    }
    for w in &windows {
        assert!(w.host_wall < walls.len(), "window host {} out of range", w.host_wall);
    }
    let mut sorted = windows;
    sorted.sort_by(|a, b| {
        let ax = walls[a.host_wall].axis;
        a.host_wall.cmp(&b.host_wall).then(a.span.interval(ax).0.total_cmp(&b.span.interval(ax).0))
    });
    let mut merged: Vec<Window> = Vec::new();
    for w in sorted {
        let wall = &walls[w.host_wall];
        match merged.last_mut() {
            Some(m) if same_span(m, &w, walls) => {
                let (a, b) = (m.span.interval(wall.axis), w.span.interval(wall.axis));
                let (lo, hi) = (a.0.min(b.0), a.1.max(b.1));
                m.span = Segment::on_axis(wall.axis, lo, hi, wall.offset()).expect("non-degenerate union");
                m.width = hi - lo;
                m.pane_lines = m.pane_lines.max(w.pane_lines);
            }
            _ => merged.push(w),
        }
    }
    for d in doors.iter_mut() {
        let axis: Axis = walls[d.host_wall].axis;
        for w in merged.iter_mut().filter(|w| w.host_wall == d.host_wall) {
            if interval_overlap(d.opening_span.interval(axis), w.span.interval(axis)) > EPS {
                d.conflict = true;
                w.conflict = true;
            }
        }
    }
    Openings { doors, windows: merged }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hwall(lo: f64, hi: f64, off: f64, t: f64) -> Wall {
        Wall::from_span(Axis::Horizontal, lo, hi, off, t).unwrap()
    }

    fn h(x0: f64, x1: f64, y: f64) -> Segment {
        Segment::from_coords(x0, y, x1, y).unwrap()
    }

    #[test]
    fn door_examples() {
        let walls = [hwall(0.0, 3000.0, 120.0, 240.0)];
        let cfg = OpeningConfig::default();
        let quarter = ArcGeom::from_sweep(Point2::new(1000.0, 0.0), 800.0, -FRAC_PI_2, FRAC_PI_2).unwrap();
        let doors = detect_doors(&[quarter], &walls, &cfg);
        assert_eq!(doors.len(), 1);
        assert_eq!(doors[0].host_wall, 0);
        let (lo, hi) = doors[0].opening_span.interval(Axis::Horizontal);
        assert!((lo - 1000.0).abs() < 1e-9 && (hi - 1800.0).abs() < 1e-9);
        let small = ArcGeom::from_sweep(Point2::new(1000.0, 0.0), 200.0, -FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!(detect_doors(&[small], &walls, &cfg).is_empty());
        let half = ArcGeom::from_sweep(Point2::new(1000.0, 0.0), 800.0, PI, PI).unwrap();
        assert!(detect_doors(&[half], &walls, &cfg).is_empty());
        let far = ArcGeom::from_sweep(Point2::new(1000.0, -500.0), 800.0, 0.0, FRAC_PI_2).unwrap();
        assert!(detect_doors(&[far], &walls, &cfg).is_empty());
    }

    #[test]
    fn window_examples() {
        let walls = [hwall(0.0, 4000.0, 120.0, 240.0)];
        let cfg = OpeningConfig::default();
        let faces = [h(0.0, 4000.0, 0.0), h(0.0, 4000.0, 240.0)];
        let panes = |c: f64, step: f64| (0..3).map(move |i| h(1000.0, 2000.0, c + (i as f64 - 1.0) * step));
        let mut raw: Vec<Segment> = faces.to_vec();
        raw.extend(panes(120.0, 15.0));
        let w = detect_windows(&[], &raw, &walls, &cfg);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].span.interval(Axis::Horizontal), (1000.0, 2000.0));
        assert_eq!(w[0].pane_lines, 3);
        assert_eq!(w[0].width, 1000.0);

        let mut off_center: Vec<Segment> = faces.to_vec();
        off_center.extend(panes(220.0, 15.0));
        assert!(detect_windows(&[], &off_center, &walls, &cfg).is_empty());

        let mut wide: Vec<Segment> = faces.to_vec();
        wide.extend(panes(120.0, 30.0));
        assert!(detect_windows(&[], &wide, &walls, &cfg).is_empty());
    }

    #[test]
    fn hint_windows_and_dedup() {
        let walls = [hwall(0.0, 4000.0, 120.0, 240.0)];
        let cfg = OpeningConfig::default();
        let hint = WindowHint { outer_a: h(1000.0, 2000.0, 105.0), outer_b: h(1000.0, 2000.0, 135.0), inner_count: 1, axis: Axis::Horizontal };
        let w = detect_windows(&[hint], &[], &walls, &cfg);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].pane_lines, 3);
        let raw: Vec<Segment> = (0..3).map(|i| h(1000.0, 2000.0, 105.0 + 15.0 * i as f64)).collect();
        assert_eq!(detect_windows(&[hint], &raw, &walls, &cfg).len(), 1);
        let wide = WindowHint { outer_b: h(1000.0, 2000.0, 165.0), ..hint };
        assert!(detect_windows(&[wide], &[], &walls, &cfg).is_empty());
    }

    #[test]
    fn window_span_clipped_to_wall() {
        let walls = [hwall(0.0, 1500.0, 120.0, 240.0)];
        let raw: Vec<Segment> = (0..3).map(|i| h(1000.0, 2000.0, 105.0 + 15.0 * i as f64)).collect();
        let w = detect_windows(&[], &raw, &walls, &OpeningConfig::default());
        assert_eq!(w[0].span.interval(Axis::Horizontal), (1000.0, 1500.0));
    }

    #[test]
    fn attach_examples() {
        let walls = vec![hwall(0.0, 4000.0, 120.0, 240.0)];
        let door = Door {
            hinge: Point2::new(500.0, 0.0),
            radius: 800.0,
            sweep: FRAC_PI_2,
            start_angle: -FRAC_PI_2,
            host_wall: 0,
            opening_span: h(500.0, 1300.0, 120.0),
            conflict: false,
        };
        let o = attach_openings(&walls, vec![door], vec![]);
        assert_eq!(o.doors[0].host_wall, 0);
        assert!(!o.doors[0].conflict);

        let win = |a: f64, b: f64| Window { span: h(a, b, 120.0), width: b - a, host_wall: 0, pane_lines: 3, conflict: false };
        let o = attach_openings(&walls, vec![], vec![win(2000.0, 2600.0), win(2400.0, 3000.0)]);
        assert_eq!(o.windows.len(), 1);
        assert_eq!(o.windows[0].span.interval(Axis::Horizontal), (2000.0, 3000.0));
        assert_eq!(o.windows[0].width, 1000.0);

        let o = attach_openings(&walls, vec![door], vec![win(1000.0, 1500.0)]);
        assert_eq!(o.doors.len(), 1);
        assert_eq!(o.windows.len(), 1);
        assert!(o.doors[0].conflict && o.windows[0].conflict);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn dangling_host_panics() {
        let walls = vec![hwall(0.0, 4000.0, 120.0, 240.0)];
        let w = Window { span: h(0.0, 1.0, 0.0), width: 1.0, host_wall: 3, pane_lines: 3, conflict: false };
        attach_openings(&walls, vec![], vec![w]);
    }

    #[test]
    fn detection_is_translation_equivariant() {
        let walls = [hwall(0.0, 3000.0, 120.0, 240.0)];
        let arc = ArcGeom::from_sweep(Point2::new(1000.0, 0.0), 800.0, -FRAC_PI_2, FRAC_PI_2).unwrap();
        let raw: Vec<Segment> = (0..3).map(|i| h(1800.0, 2600.0, 105.0 + 15.0 * i as f64)).collect();
        let cfg = OpeningConfig::default();
        let (dx, dy) = (12345.0, -678.0);
        let moved_walls: Vec<Wall> = walls.iter().map(|w| w.translate(dx, dy)).collect();
        let moved_raw: Vec<Segment> = raw.iter().map(|s| s.translate(dx, dy)).collect();
        let d0 = detect_doors(&[arc], &walls, &cfg);
        let d1 = detect_doors(&[arc.translate(dx, dy)], &moved_walls, &cfg);
        assert_eq!(d0[0].hinge.translate(dx, dy), d1[0].hinge);
        let w0 = detect_windows(&[], &raw, &walls, &cfg);
        let w1 = detect_windows(&[], &moved_raw, &moved_walls, &cfg);
        assert_eq!(w0[0].span.translate(dx, dy), w1[0].span);
    }
}
