//! Fixtures and oracles shared by the integration tests.
#![allow(dead_code)]

use floorscan_core::geometry::{Point2, Segment};
use floorscan_core::raster::{Bitmap, LabelMap, RasterTransform};
use floorscan_core::synth::{generate_synthetic, NoiseSpec, RoomSpec, Synthetic, SyntheticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bitmap(width: usize, height: usize, on: impl Fn(usize, usize) -> bool) -> Bitmap {
    let t = RasterTransform { origin: Point2::new(0.0, 0.0), mm_per_pixel: 1.0 };
    let mut b = Bitmap::new(width, height, t);
    for y in 0..height {
        for x in 0..width {
            if on(x, y) {
                b.bits[y * width + x] = 1;
            }
        }
    }
    b
}

pub fn random_bitmap(seed: u64) -> Bitmap {
    let mut r = rng(seed);
    let w = r.random_range(1..=256);
    let h = r.random_range(1..=256);
    let density: f64 = r.random_range(0.1..=0.9);
    let cells: Vec<bool> = (0..w * h).map(|_| r.random_bool(density)).collect();
    bitmap(w, h, |x, y| cells[y * w + x])
}

/// Bitmaps built to stress label merging: late joins, diagonal-only
/// contacts, nesting, and degenerate shapes.
pub fn adversarial_bitmaps() -> Vec<(&'static str, Bitmap)> {
    vec![
        ("checkerboard", bitmap(64, 64, |x, y| (x + y) % 2 == 0)),
        ("spiral", {
            let g = spiral_bits(101);
            bitmap(101, 101, |x, y| g[y * 101 + x])
        }),
        ("comb", bitmap(120, 60, |x, y| y == 59 || (x % 2 == 0 && y > 0))),
        ("staircase", bitmap(128, 128, |x, y| x == y || x == y + 1)),
        ("anti-diagonals", bitmap(80, 80, |x, y| (x + y) % 4 == 0)),
        ("rings", bitmap(97, 97, |x, y| {
            let d = (x as i64 - 48).abs().max((y as i64 - 48).abs());
            d % 3 == 0
        })),
        ("full", bitmap(200, 150, |_, _| true)),
        ("empty", bitmap(50, 70, |_, _| false)),
        ("single-row", bitmap(256, 1, |x, _| x % 3 != 2)),
        ("single-column", bitmap(1, 256, |_, y| y % 5 < 3)),
    ]
}

/// One connected square spiral with one-pixel corridors.
fn spiral_bits(n: usize) -> Vec<bool> {
    let mut g = vec![false; n * n];
    let (mut x0, mut y0, mut x1, mut y1) = (0usize, 0usize, n - 1, n - 1);
    while x0 + 2 <= x1 && y0 + 2 <= y1 {
        for x in x0..=x1 {
            g[y0 * n + x] = true;
            g[y1 * n + x] = true;
        }
        for y in y0..=y1 {
            g[y * n + x1] = true;
        }
        for y in y0 + 2..=y1 {
            g[y * n + x0] = true;
        }
        g[(y0 + 2) * n + x0 + 1] = true;
        x0 += 2;
        y0 += 2;
        x1 -= 2;
        y1 -= 2;
    }
    g
}

/// Flood fill with an explicit stack; labels in raster order of first pixel.
pub fn flood_fill(b: &Bitmap) -> Vec<u32> {
    let (w, h) = (b.width, b.height);
    let mut out = vec![0u32; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if b.bits[start] == 0 || out[start] != 0 {
            continue;
        }
        next += 1;
        out[start] = next;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if b.bits[j] != 0 && out[j] == 0 {
                        out[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
    }
    out
}

/// Whether two labelings induce the same partition of the foreground.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut fwd: HashMap<u32, u32> = HashMap::new();
    let mut back: HashMap<u32, u32> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if (x == 0) != (y == 0) {
            return false;
        }
        if x == 0 {
            continue;
        }
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

pub fn label_partition_ok(b: &Bitmap, labels: &LabelMap) -> bool {
    same_partition(&labels.labels, &flood_fill(b))
}

pub fn random_segments(seed: u64, n: usize, extent: f64, max_len: f64) -> Vec<Segment> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: f64 = r.random_range(0.0..extent);
        let y: f64 = r.random_range(0.0..extent);
        let len: f64 = r.random_range(1.0..max_len);
        let a: f64 = r.random_range(0.0..std::f64::consts::TAU);
        if let Ok(s) = Segment::from_coords(x, y, x + len * a.cos(), y + len * a.sin()) {
            out.push(s);
        }
    }
    out
}

/// Mostly axis-aligned segments on a coarse grid, so fills, merges and pairs
/// actually occur.
pub fn wall_like_segments(seed: u64, n: usize) -> Vec<Segment> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let off = (r.random_range(0..60) as f64) * 40.0 + r.random_range(-0.6..0.6);
        let lo = (r.random_range(0..40) as f64) * 100.0 + r.random_range(-50.0..50.0);
        let len = r.random_range(0.5..2500.0);
        let tilt: f64 = r.random_range(-0.5..0.5);
        let s = if r.random_bool(0.5) {
            Segment::from_coords(lo, off, lo + len, off + tilt)
        } else {
            Segment::from_coords(off, lo, off + tilt, lo + len)
        };
        if let Ok(s) = s {
            out.push(s);
        }
        if r.random_bool(0.05) {
            let x: f64 = r.random_range(0.0..4000.0);
            let y: f64 = r.random_range(0.0..4000.0);
            if let Ok(s) = Segment::from_coords(x, y, x + r.random_range(-300.0..300.0), y + r.random_range(-300.0..300.0)) {
                out.push(s);
            }
        }
    }
    out
}

pub fn one_room_spec() -> SyntheticSpec {
    SyntheticSpec {
        rooms: vec![RoomSpec { x: 0.0, y: 0.0, width: 4000.0, height: 3000.0 }],
        wall_thickness: 240.0,
        door_slots: vec![],
        window_slots: vec![],
        noise: NoiseSpec::default(),
        seed: 7,
        solid_walls: false,
    }
}

/// Inserts extra `LINE` entities at the end of the entity section.
pub fn with_lines(dxf: &str, lines: &[(f64, f64, f64, f64)]) -> String {
    let mut extra = String::new();
    for (ax, ay, bx, by) in lines {
        extra.push_str(&format!("0\nLINE\n8\nEXTRA\n10\n{ax}\n20\n{ay}\n30\n0\n11\n{bx}\n21\n{by}\n31\n0\n"));
    }
    let tail = "0\nENDSEC\n0\nEOF\n";
    assert!(dxf.ends_with(tail));
    format!("{}{}{}", &dxf[..dxf.len() - tail.len()], extra, tail)
}

/// A 240 mm thick stub, 300 mm long, jutting out of the right wall of the
/// 4000 x 3000 room.
pub const STUB: [(f64, f64, f64, f64); 3] =
    [(4000.0, 1000.0, 4300.0, 1000.0), (4000.0, 1240.0, 4300.0, 1240.0), (4300.0, 1000.0, 4300.0, 1240.0)];

pub fn stub_fixture() -> String {
    with_lines(&generate_synthetic(&one_room_spec()).unwrap().dxf, &STUB)
}

/// The room with one hatched furniture block placed below it.
pub fn furniture_fixture() -> Synthetic {
    let mut spec = one_room_spec();
    spec.noise.furniture_block_count = 1;
    generate_synthetic(&spec).unwrap()
}

/// Two one-room plans 20 m apart.
pub fn two_plan_fixture() -> String {
    let mut spec = one_room_spec();
    spec.rooms.push(RoomSpec { x: 24000.0, y: 0.0, width: 5000.0, height: 3500.0 });
    generate_synthetic(&spec).unwrap().dxf
}

pub fn fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// Every DXF fixture, checked-in and generated, by name.
pub fn all_fixtures() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(fixture_dir())
        .map(|d| d.filter_map(|e| e.ok()).map(|e| e.path()).collect())
        .unwrap_or_default();
    files.sort();
    for p in files {
        if p.extension().is_some_and(|e| e == "dxf") {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            out.push((name, std::fs::read_to_string(&p).unwrap()));
        }
    }
    out.push(("stub".into(), stub_fixture()));
    out.push(("furniture".into(), furniture_fixture().dxf));
    out.push(("two-plans".into(), two_plan_fixture()));
    for seed in 0..4 {
        let p = floorscan_core::synth::RandomPlanParams {
            noise: NoiseSpec { short_stroke_count: 100 * seed as usize, furniture_block_count: seed as usize % 3 },
            solid_walls: seed == 3,
            ..Default::default()
        };
        out.push((format!("random-{seed}"), generate_synthetic(&SyntheticSpec::random(seed, &p)).unwrap().dxf));
    }
    out
}
