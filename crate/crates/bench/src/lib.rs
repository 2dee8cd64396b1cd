//! Plans used by the benchmarks.

use floorscan_core::ingest::{cluster_plans, standardize, IngestConfig, PlanCluster};
use floorscan_core::parse_dxf;
use floorscan_core::synth::{generate_synthetic, NoiseSpec, RandomPlanParams, SyntheticSpec};

/// A single room with one door and one window.
pub fn one_room_dxf() -> String {
    let p = RandomPlanParams { rooms: (1, 1), doors: (1, 1), windows: (1, 1), ..Default::default() };
    generate_synthetic(&SyntheticSpec::random(1, &p)).expect("valid spec").dxf
}

/// `side * side` copies of a six-room block with openings, plus furniture
/// and strokes proportional to the block count.
pub fn grid_dxf(side: usize) -> String {
    let base = SyntheticSpec::random(
        11,
        &RandomPlanParams { rooms: (6, 6), doors: (4, 4), windows: (4, 4), ..Default::default() },
    );
    let (w, h) = base.rooms.iter().fold((0.0f64, 0.0f64), |(w, h), r| (w.max(r.x + r.width), h.max(r.y + r.height)));
    let mut spec = SyntheticSpec { rooms: vec![], door_slots: vec![], window_slots: vec![], ..base.clone() };
    for gx in 0..side {
        for gy in 0..side {
            let first = spec.rooms.len();
            for r in &base.rooms {
                let mut r = *r;
                r.x += gx as f64 * (w + 1200.0);
                r.y += gy as f64 * (h + 1200.0);
                spec.rooms.push(r);
            }
            spec.door_slots.extend(base.door_slots.iter().map(|d| {
                let mut d = *d;
                d.wall.room += first;
                d
            }));
            spec.window_slots.extend(base.window_slots.iter().map(|x| {
                let mut x = *x;
                x.wall.room += first;
                x
            }));
        }
    }
    let blocks = side * side;
    spec.noise = NoiseSpec { short_stroke_count: 230 * blocks, furniture_block_count: (blocks / 5).max(1) };
    generate_synthetic(&spec).expect("grid spec is valid").dxf
}

/// Largest plan of a drawing.
pub fn main_cluster(dxf: &str) -> PlanCluster {
    let doc = parse_dxf(dxf).expect("generated drawings parse");
    let plan = standardize(&doc, &IngestConfig::default()).expect("no block cycles");
    cluster_plans(&plan, 5000.0).into_iter().next().expect("non-empty plan")
}
