//! Raster side of wall extraction: the plan and the detected walls are drawn
//! into two bitmaps sharing one transform, the plan image is split into
//! 8-connected components, and components mostly covered by walls are kept.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Axis, Point2, Segment};
use crate::ingest::PlanCluster;
use crate::union_find::UnionFind;
use crate::wall_pipeline::Wall;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RasterError {
    #[error("image size mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// Plan millimetres to pixel coordinates: `col = (x - origin.x) / mm_per_pixel`,
/// likewise for rows. Row 0 is the smallest y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterTransform {
    pub origin: Point2,
    pub mm_per_pixel: f64,
}

/// Fraction of the larger extent added on each side of the plan.
pub const RASTER_MARGIN: f64 = 0.02;

impl RasterTransform {
    /// Fits `bounds` centred in a square image with a uniform margin.
    pub fn fit(bounds: &Aabb, resolution: usize) -> RasterTransform {
        let extent = bounds.width().max(bounds.height()).max(1.0);
        let mm_per_pixel = extent * (1.0 + 2.0 * RASTER_MARGIN) / resolution as f64;
        let half = resolution as f64 * mm_per_pixel / 2.0;
        let cx = (bounds.min.x + bounds.max.x) / 2.0;
        let cy = (bounds.min.y + bounds.max.y) / 2.0;
        RasterTransform { origin: Point2::new(cx - half, cy - half), mm_per_pixel }
    }

    pub fn to_pixel(&self, p: Point2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.mm_per_pixel).floor() as i64,
            ((p.y - self.origin.y) / self.mm_per_pixel).floor() as i64,
        )
    }

    /// Millimetre rectangle covered by an inclusive pixel range.
    pub fn pixel_rect(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Aabb {
        let m = self.mm_per_pixel;
        Aabb::from_points(
            Point2::new(self.origin.x + x0 as f64 * m, self.origin.y + y0 as f64 * m),
            Point2::new(self.origin.x + (x1 + 1) as f64 * m, self.origin.y + (y1 + 1) as f64 * m),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    /// Row-major, one byte per pixel, 0 or 1.
    pub bits: Vec<u8>,
    pub transform: RasterTransform,
}

impl Bitmap {
    pub fn new(width: usize, height: usize, transform: RasterTransform) -> Bitmap {
        Bitmap { width, height, bits: vec![0; width * height], transform }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.bits[y * self.width + x] = 1;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn mm_per_pixel(&self) -> f64 {
        self.transform.mm_per_pixel
    }

    fn plot(&mut self, x: i64, y: i64, stroke: usize) {
        let lo = -((stroke as i64 - 1) / 2);
        let hi = lo + stroke.max(1) as i64;
        for dy in lo..hi {
            for dx in lo..hi {
                let (px, py) = (x + dx, y + dy);
                if px >= 0 && py >= 0 && (px as usize) < self.width && (py as usize) < self.height {
                    self.set(px as usize, py as usize);
                }
            }
        }
    }

    /// Bresenham line between the pixels containing the endpoints, with a
    /// square brush `stroke` pixels wide.
    pub fn draw_segment(&mut self, s: &Segment, stroke: usize) {
        let (mut x0, mut y0) = self.transform.to_pixel(s.a);
        let (x1, y1) = self.transform.to_pixel(s.b);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.plot(x0, y0, stroke);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// Inclusive pixel range covered by a millimetre rectangle, clipped.
    pub fn pixel_range(&self, r: &Aabb) -> Option<(usize, usize, usize, usize)> {
        let (x0, y0) = self.transform.to_pixel(r.min);
        let (x1, y1) = self.transform.to_pixel(r.max);
        let (w, h) = (self.width as i64, self.height as i64);
        if x1 < 0 || y1 < 0 || x0 >= w || y0 >= h {
            return None;
        }
        Some((x0.max(0) as usize, y0.max(0) as usize, x1.min(w - 1) as usize, y1.min(h - 1) as usize))
    }

    pub fn fill_rect(&mut self, r: &Aabb) {
        if let Some((x0, y0, x1, y1)) = self.pixel_range(r) {
            for y in y0..=y1 {
                self.bits[y * self.width + x0..=y * self.width + x1].fill(1);
            }
        }
    }

    /// Binary PGM (P5), foreground white.
    pub fn write_pgm(&self, out: &mut impl Write) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        // Image rows run top-down, plan y runs up.
        for y in (0..self.height).rev() {
            let row: Vec<u8> = self.bits[y * self.width..(y + 1) * self.width].iter().map(|&b| b * 255).collect();
            out.write_all(&row)?;
        }
        Ok(())
    }
}

/// Draws segments into a fresh image fitted to their bounds.
pub fn rasterize(segments: &[Segment], resolution: usize, stroke: usize) -> Bitmap {
    let bounds = crate::geometry::bounds_of(segments)
        .unwrap_or(Aabb { min: Point2::new(0.0, 0.0), max: Point2::new(1.0, 1.0) });
    rasterize_with(segments, RasterTransform::fit(&bounds, resolution), resolution, stroke)
}

pub fn rasterize_with(segments: &[Segment], transform: RasterTransform, resolution: usize, stroke: usize) -> Bitmap {
    let mut img = Bitmap::new(resolution, resolution, transform);
    for s in segments {
        img.draw_segment(s, stroke);
    }
    img
}

/// Filled wall footprints.
pub fn rasterize_walls(walls: &[Wall], transform: RasterTransform, resolution: usize) -> Bitmap {
    let mut img = Bitmap::new(resolution, resolution, transform);
    for w in walls {
        img.fill_rect(&w.footprint());
    }
    img
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    /// Row-major component ids, 0 for background.
    pub labels: Vec<u32>,
    pub count: u32,
}

/// Two-pass 8-connected labeling. The first raster scan gives each pixel the
/// smallest label among its already visited neighbours (W, NW, N, NE) and
/// records every equivalence; the second rewrites each label to the least
/// member of its class. Ids are then renumbered 1..=count in order of first
/// appearance.
pub fn label_components(img: &Bitmap) -> LabelMap {
    let (w, h) = (img.width, img.height);
    let mut labels = vec![0u32; w * h];
    let mut eq = UnionFind::new(1);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            if img.bits[row + x] == 0 {
                continue;
            }
            let mut neigh = [0u32; 4];
            if x > 0 {
                neigh[0] = labels[row + x - 1];
            }
            if y > 0 {
                let up = row - w;
                neigh[2] = labels[up + x];
                if x > 0 {
                    neigh[1] = labels[up + x - 1];
                }
                if x + 1 < w {
                    neigh[3] = labels[up + x + 1];
                }
            }
            let smallest = neigh.iter().copied().filter(|&l| l != 0).min();
            labels[row + x] = match smallest {
                None => eq.push(),
                Some(m) => {
                    for &l in &neigh {
                        if l != 0 && l != m {
                            eq.union(m, l);
                        }
                    }
                    m
                }
            };
        }
    }
    let mut dense = vec![0u32; eq.len()];
    let mut count = 0;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = eq.find(*l) as usize;
        if dense[root] == 0 {
            count += 1;
            dense[root] = count;
        }
        *l = dense[root];
    }
    LabelMap { width: w, height: h, labels, count }
}

impl LabelMap {
    /// Label ids folded into 1..=255 for inspection.
    pub fn write_pgm(&self, out: &mut impl Write) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        for y in (0..self.height).rev() {
            let row: Vec<u8> = self.labels[y * self.width..(y + 1) * self.width]
                .iter()
                .map(|&l| if l == 0 { 0 } else { (1 + (l * 37) % 255) as u8 })
                .collect();
            out.write_all(&row)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentStats {
    pub pixels: u64,
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl ComponentStats {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn bbox_area(&self) -> u64 {
        (self.width() * self.height()) as u64
    }
}

/// Pixel count and bounding box per component; index `id - 1`.
pub fn component_stats(labels: &LabelMap) -> Vec<ComponentStats> {
    let mut stats =
        vec![ComponentStats { pixels: 0, min_x: usize::MAX, min_y: usize::MAX, max_x: 0, max_y: 0 }; labels.count as usize];
    for y in 0..labels.height {
        for x in 0..labels.width {
            let l = labels.labels[y * labels.width + x];
            if l == 0 {
                continue;
            }
            let s = &mut stats[l as usize - 1];
            s.pixels += 1;
            s.min_x = s.min_x.min(x);
            s.min_y = s.min_y.min(y);
            s.max_x = s.max_x.max(x);
            s.max_y = s.max_y.max(y);
        }
    }
    stats
}

/// Components whose share of pixels inside `mask` strictly exceeds `ratio`.
pub fn match_wall_components(labels: &LabelMap, mask: &Bitmap, ratio: f64) -> Result<Vec<u32>, RasterError> {
    if labels.width != mask.width || labels.height != mask.height {
        return Err(RasterError::DimensionMismatch(labels.width, labels.height, mask.width, mask.height));
    }
    let mut total = vec![0u64; labels.count as usize + 1];
    let mut covered = vec![0u64; labels.count as usize + 1];
    for (l, &m) in labels.labels.iter().zip(&mask.bits) {
        total[*l as usize] += 1;
        if m != 0 {
            covered[*l as usize] += 1;
        }
    }
    Ok((1..=labels.count)
        .filter(|&id| covered[id as usize] as f64 > ratio * total[id as usize] as f64)
        .collect())
}

fn extents_mm(s: &ComponentStats, mm_per_pixel: f64) -> (f64, f64) {
    let a = s.width() as f64 * mm_per_pixel;
    let b = s.height() as f64 * mm_per_pixel;
    (a.max(b), a.min(b))
}

/// Removes small candidates that no other candidate comes near. Two
/// components count as attached when a 1-pixel dilation of each makes them
/// touch, i.e. some pixel pair lies within Chebyshev distance 2.
pub fn prune_unattached(
    candidates: &[u32],
    labels: &LabelMap,
    mm_per_pixel: f64,
    min_len: f64,
    min_wid: f64,
) -> Vec<u32> {
    let stats = component_stats(labels);
    let mut is_candidate = vec![false; labels.count as usize + 1];
    for &c in candidates {
        is_candidate[c as usize] = true;
    }
    let (w, h) = (labels.width as i64, labels.height as i64);
    let at = |x: i64, y: i64| -> u32 {
        if x < 0 || y < 0 || x >= w || y >= h {
            0
        } else {
            labels.labels[(y * w + x) as usize]
        }
    };
    candidates
        .iter()
        .copied()
        .filter(|&c| {
            let s = &stats[c as usize - 1];
            let (long, short) = extents_mm(s, mm_per_pixel);
            if !(long < min_len && short < min_wid) {
                return true;
            }
            for y in s.min_y as i64..=s.max_y as i64 {
                for x in s.min_x as i64..=s.max_x as i64 {
                    if at(x, y) != c {
                        continue;
                    }
                    for dy in -2..=2 {
                        for dx in -2..=2 {
                            let o = at(x + dx, y + dy);
                            if o != 0 && o != c && is_candidate[o as usize] {
                                return true;
                            }
                        }
                    }
                }
            }
            false
        })
        .collect()
}

/// Removes candidates filling more than `occupancy` of their bounding
/// rectangle when both rectangle extents exceed `min_extent`.
pub fn prune_large_occupancy(
    candidates: &[u32],
    labels: &LabelMap,
    mm_per_pixel: f64,
    occupancy: f64,
    min_extent: f64,
) -> Vec<u32> {
    let stats = component_stats(labels);
    candidates
        .iter()
        .copied()
        .filter(|&c| {
            let s = &stats[c as usize - 1];
            let (long, short) = extents_mm(s, mm_per_pixel);
            let dense = s.pixels as f64 > occupancy * s.bbox_area() as f64;
            !(dense && long > min_extent && short > min_extent)
        })
        .collect()
}

/// Greedy rectangle cover of a bitmap: maximal horizontal runs, stacked while
/// consecutive rows repeat the same run. Returns inclusive pixel rectangles
/// `(x0, y0, x1, y1)`.
pub fn polygonize(mask: &Bitmap) -> Vec<(usize, usize, usize, usize)> {
    let mut done = Vec::new();
    // Open rectangles keyed by run (x0, x1), with their first row.
    let mut open: Vec<(usize, usize, usize)> = Vec::new();
    for y in 0..=mask.height {
        let mut runs = Vec::new();
        if y < mask.height {
            let row = &mask.bits[y * mask.width..(y + 1) * mask.width];
            let mut x = 0;
            while x < mask.width {
                if row[x] == 0 {
                    x += 1;
                    continue;
                }
                let start = x;
                while x < mask.width && row[x] != 0 {
                    x += 1;
                }
                runs.push((start, x - 1));
            }
        }
        let mut next = Vec::with_capacity(runs.len());
        let mut oi = 0;
        for (x0, x1) in runs {
            while oi < open.len() && (open[oi].0, open[oi].1) < (x0, x1) {
                let (a, b, y0) = open[oi];
                done.push((a, y0, b, y - 1));
                oi += 1;
            }
            if oi < open.len() && (open[oi].0, open[oi].1) == (x0, x1) {
                next.push(open[oi]);
                oi += 1;
            } else {
                next.push((x0, x1, y));
            }
        }
        for &(a, b, y0) in &open[oi..] {
            done.push((a, y0, b, y - 1));
        }
        open = next;
    }
    done.sort_unstable_by_key(|&(x0, y0, x1, y1)| (y0, x0, y1, x1));
    done
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestoreConfig {
    pub resolution: usize,
    pub stroke: usize,
    pub match_ratio: f64,
    pub unattached_min_len: f64,
    pub unattached_min_wid: f64,
    pub occupancy: f64,
    pub occupancy_min_extent: f64,
    /// Smallest short side of a restored rectangle admitted as a wall.
    pub restored_min_thickness: f64,
    /// Restored rectangles must be longer than this to become walls.
    pub restored_min_length: f64,
    /// Keep the intermediate images in the result.
    pub keep_debug: bool,
}

impl Default for RestoreConfig {
    fn default() -> Self {
        RestoreConfig {
            resolution: 4096,
            stroke: 1,
            match_ratio: 0.4,
            unattached_min_len: 2000.0,
            unattached_min_wid: 200.0,
            occupancy: 0.5,
            occupancy_min_extent: 2000.0,
            restored_min_thickness: 100.0,
            restored_min_length: 400.0,
            keep_debug: false,
        }
    }
}

impl RestoreConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.resolution < 64 {
            return Err(format!("resolution must be at least 64, got {}", self.resolution));
        }
        if self.stroke == 0 {
            return Err("stroke must be at least 1 pixel".into());
        }
        if !(0.0..1.0).contains(&self.match_ratio) {
            return Err("match_ratio must lie in [0, 1)".into());
        }
        if !(self.occupancy > 0.0 && self.occupancy <= 1.0) {
            return Err("occupancy must lie in (0, 1]".into());
        }
        for (name, v) in [
            ("unattached_min_len", self.unattached_min_len),
            ("unattached_min_wid", self.unattached_min_wid),
            ("occupancy_min_extent", self.occupancy_min_extent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreDebug {
    pub raw: Bitmap,
    pub walls: Bitmap,
    pub labels: LabelMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoredWalls {
    /// Pixels of the surviving components.
    pub mask: Bitmap,
    /// Rectangle cover of `mask`, millimetres.
    pub polygons: Vec<Aabb>,
    pub accepted_components: Vec<u32>,
    /// Components that passed the overlap rule but failed a pruning rule.
    pub pruned_components: Vec<u32>,
    /// Per input wall: true when at least half of the plan pixels inside its
    /// footprint belong to accepted components.
    pub kept_cascade: Vec<bool>,
    /// Rectangles of the mask admitted as additional walls.
    pub restored: Vec<Wall>,
    pub debug: Option<RestoreDebug>,
}

impl RestoredWalls {
    /// Result for a plan with nothing to rasterize.
    pub fn empty() -> RestoredWalls {
        let transform = RasterTransform { origin: Point2::new(0.0, 0.0), mm_per_pixel: 1.0 };
        RestoredWalls {
            mask: Bitmap::new(0, 0, transform),
            polygons: Vec::new(),
            accepted_components: Vec::new(),
            pruned_components: Vec::new(),
            kept_cascade: Vec::new(),
            restored: Vec::new(),
            debug: None,
        }
    }
}

/// Rasterizes the plan and the walls, keeps plan components mostly covered by
/// walls, prunes small detached ones and large solid ones, and covers the
/// survivors with rectangles.
pub fn restore_walls(cluster: &PlanCluster, walls: &[Wall], cfg: &RestoreConfig) -> RestoredWalls {
    let res = cfg.resolution;
    let transform = RasterTransform::fit(&cluster.bounds, res);
    let raw = rasterize_with(&cluster.segments, transform, res, cfg.stroke);
    let wall_mask = rasterize_walls(walls, transform, res);
    let labels = label_components(&raw);
    let matched = match_wall_components(&labels, &wall_mask, cfg.match_ratio).expect("same transform and size");
    let mpp = transform.mm_per_pixel;
    let attached = prune_unattached(&matched, &labels, mpp, cfg.unattached_min_len, cfg.unattached_min_wid);
    let accepted = prune_large_occupancy(&attached, &labels, mpp, cfg.occupancy, cfg.occupancy_min_extent);

    let n = labels.count as usize + 1;
    let mut state = vec![0u8; n];
    for &c in &matched {
        state[c as usize] = 2;
    }
    for &c in &accepted {
        state[c as usize] = 1;
    }
    let pruned: Vec<u32> = matched.iter().copied().filter(|&c| state[c as usize] == 2).collect();

    let mut mask = Bitmap::new(res, res, transform);
    for (i, &l) in labels.labels.iter().enumerate() {
        if state[l as usize] == 1 {
            mask.bits[i] = 1;
        }
    }

    let kept_cascade: Vec<bool> = walls
        .iter()
        .map(|w| {
            let Some((x0, y0, x1, y1)) = raw.pixel_range(&w.footprint()) else { return true };
            let (mut ink, mut supported) = (0u64, 0u64);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let l = labels.labels[y * res + x];
                    if l != 0 {
                        ink += 1;
                        if state[l as usize] == 1 {
                            supported += 1;
                        }
                    }
                }
            }
            ink == 0 || 2 * supported >= ink
        })
        .collect();

    let polygons: Vec<Aabb> =
        polygonize(&mask).into_iter().map(|(x0, y0, x1, y1)| transform.pixel_rect(x0, y0, x1, y1)).collect();
    let kept_fp: Vec<Aabb> = walls.iter().zip(&kept_cascade).filter(|(_, &k)| k).map(|(w, _)| w.footprint()).collect();
    let restored = polygons
        .iter()
        .filter_map(|r| {
            let (wd, ht) = (r.width(), r.height());
            let (long, short) = (wd.max(ht), wd.min(ht));
            if short < cfg.restored_min_thickness || long <= cfg.restored_min_length {
                return None;
            }
            let covered: f64 = kept_fp.iter().map(|f| f.intersection_area(r)).sum();
            if covered >= 0.5 * r.area() {
                return None;
            }
            let axis = if wd >= ht { Axis::Horizontal } else { Axis::Vertical };
            let (lo, hi) = (axis.along(r.min), axis.along(r.max));
            let off = (axis.across(r.min) + axis.across(r.max)) / 2.0;
            Wall::from_span(axis, lo, hi, off, short)
        })
        .collect();

    let debug = cfg.keep_debug.then_some(RestoreDebug { raw, walls: wall_mask, labels });
    RestoredWalls { mask, polygons, accepted_components: accepted, pruned_components: pruned, kept_cascade, restored, debug }
}
