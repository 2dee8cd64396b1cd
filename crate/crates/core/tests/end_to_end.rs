mod common;

use floorscan_core::config::FloorscanConfig;
use floorscan_core::dxf::parse_dxf;
use floorscan_core::geometry::Axis;
use floorscan_core::ingest::{standardize, IngestConfig};
use floorscan_core::pipeline::{analyze_dxf, AnalyzeOptions, PlanAnalysis};
use floorscan_core::scene::{emit_json, parse_json, SCENE_SCHEMA};
use floorscan_core::score::score;
use floorscan_core::svg::emit_svg;
use floorscan_core::synth::{generate_synthetic, SyntheticSpec};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(common::fixture_dir().join(name)).unwrap()
}

fn analyze(text: &str) -> Vec<PlanAnalysis> {
    analyze_dxf(text, &FloorscanConfig::default(), AnalyzeOptions::default()).unwrap()
}

fn thicknesses(a: &PlanAnalysis) -> Vec<f64> {
    a.scene.walls.iter().map(|w| w.thickness).collect()
}

#[test]
fn inch_polyline_room() {
    let text = fixture("polyline_room_inches.dxf");
    let plan = standardize(&parse_dxf(&text).unwrap(), &IngestConfig::default()).unwrap();
    assert_eq!(plan.unit_scale, 25.4);
    assert_eq!(plan.text_dropped, 1);
    assert_eq!(plan.arcs.len(), 1);
    assert!((plan.arcs[0].radius - 36.0 * 25.4).abs() < 1e-9);

    let out = analyze(&text);
    assert_eq!(out.len(), 1);
    let scene = &out[0].scene;
    assert_eq!(scene.walls.len(), 4);
    for t in thicknesses(&out[0]) {
        assert!((t - 8.0 * 25.4).abs() < 1e-9, "{t}");
    }
    assert_eq!(scene.doors.len(), 1);
    assert!((scene.doors[0].hinge.x - 40.0 * 25.4).abs() < 1e-9);
}

#[test]
fn nested_rotated_blocks() {
    let text = fixture("nested_blocks.dxf");
    let plan = standardize(&parse_dxf(&text).unwrap(), &IngestConfig::default()).unwrap();
    assert_eq!(plan.segments.len(), 16);
    // Each room is 4000 square with 200 mm walls; the second sits 6000 to
    // the right.
    let xs: Vec<f64> = plan.segments.iter().flat_map(|s| [s.a.x, s.b.x]).collect();
    let max_x = xs.iter().copied().fold(f64::MIN, f64::max);
    assert!((max_x - 10_000.0).abs() < 1e-9);
    for s in &plan.segments {
        for v in [s.a.x, s.a.y, s.b.x, s.b.y] {
            let k = v / 200.0;
            assert!((k - k.round()).abs() < 1e-9, "{v} off the 200 mm lattice");
        }
    }

    let out = analyze(&text);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].scene.walls.len(), 8);
    assert!(thicknesses(&out[0]).iter().all(|t| (t - 200.0).abs() < 1e-9));
    let vertical = out[0].scene.walls.iter().filter(|w| w.axis == Axis::Vertical).count();
    assert_eq!(vertical, 4);
}

#[test]
fn unitless_mixed_drawing() {
    let text = fixture("unitless_mixed.dxf");
    let doc = parse_dxf(&text).unwrap();
    assert_eq!(doc.skipped.get("SPLINE"), Some(&1));
    let out = analyze(&text);
    let scene = &out[0].scene;
    assert!(scene.warnings.iter().any(|w| w.contains("units")), "{:?}", scene.warnings);
    assert!(scene.warnings.iter().any(|w| w.contains("SPLINE")));
    assert_eq!(scene.stats.cluster_arcs, 1);
    // Slab quad edges and the circle chords join the four lines.
    assert!(scene.stats.segments_after_standardize > 8);
}

#[test]
fn two_distant_plans_give_two_scenes() {
    let out = analyze(&common::two_plan_fixture());
    assert_eq!(out.len(), 2);
    let idx: Vec<usize> = out.iter().map(|a| a.scene.plan_index).collect();
    assert_eq!(idx, vec![0, 1]);
    assert!(out[0].cluster.segments.len() >= out[1].cluster.segments.len());
    let b0 = out[0].scene.bounds.unwrap();
    let b1 = out[1].scene.bounds.unwrap();
    assert!(b0.intersection_area(&b1) == 0.0);
    assert_eq!(out[0].scene.walls.len() + out[1].scene.walls.len(), 8);
}

#[test]
fn every_fixture_validates_and_round_trips() {
    let schema: serde_json::Value = serde_json::from_str(SCENE_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for (name, text) in common::all_fixtures() {
        let out = analyze(&text);
        let scenes: Vec<_> = out.iter().map(|a| a.scene.clone()).collect();
        for s in &scenes {
            assert!(s.dangling_hosts().is_empty(), "{name}");
        }
        let json = emit_json(&scenes);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        assert_eq!(parse_json(&json).unwrap().scenes, scenes, "{name}");
    }
}

#[test]
fn svg_renders_one_element_per_object() {
    for (name, text) in common::all_fixtures() {
        for a in analyze(&text) {
            let svg = emit_svg(&a.scene, &a.cluster);
            let doc = roxmltree::Document::parse(&svg).unwrap();
            let group = |id: &str| doc.descendants().find(|n| n.attribute("id") == Some(id)).unwrap();
            let count = |id: &str, tag: &str| group(id).children().filter(|c| c.has_tag_name(tag)).count();
            assert_eq!(count("walls", "rect"), a.scene.walls.len(), "{name}");
            assert_eq!(count("doors", "path"), a.scene.doors.len(), "{name}");
            assert_eq!(count("windows", "rect"), a.scene.windows.len(), "{name}");
        }
    }
}

#[test]
fn solid_walls_are_recovered() {
    let mut spec: SyntheticSpec = common::one_room_spec();
    spec.solid_walls = true;
    spec.door_slots.push(floorscan_core::synth::DoorSlot {
        wall: floorscan_core::synth::WallRef { room: 0, side: floorscan_core::synth::WallSide::Left },
        offset: 700.0,
        width: 900.0,
    });
    let syn = generate_synthetic(&spec).unwrap();
    let out = analyze(&syn.dxf);
    let s = score(&out[0].scene, &syn.truth, 0.7);
    assert_eq!((s.walls.f1(), s.doors.f1()), (1.0, 1.0), "{s:?}");
}

#[test]
fn synthetic_spec_json_round_trip() {
    let spec = SyntheticSpec::random(9, &Default::default());
    let text = serde_json::to_string(&spec).unwrap();
    let back: SyntheticSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    assert_eq!(generate_synthetic(&back).unwrap().dxf, generate_synthetic(&spec).unwrap().dxf);
}
