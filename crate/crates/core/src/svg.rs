//! SVG overlay of a scene on its source plan. One user unit is one
//! millimetre; plan y points up, so geometry sits in a flipped group.

use std::fmt::Write;

use crate::geometry::{Aabb, Point2};
use crate::ingest::PlanCluster;
use crate::scene::SceneResult;

const MARGIN_FRACTION: f64 = 0.02;

fn n(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn pt(p: Point2) -> String {
    format!("{} {}", n(p.x), n(p.y))
}

fn scene_bounds(result: &SceneResult, raw: &PlanCluster) -> Aabb {
    let mut b = raw.bounds;
    for w in &result.walls {
        b = b.union(&w.wall().footprint());
    }
    b
}

pub fn emit_svg(result: &SceneResult, raw: &PlanCluster) -> String {
    let b = scene_bounds(result, raw);
    let margin = (b.width().max(b.height()) * MARGIN_FRACTION).max(10.0);
    let view = b.expand(margin);
    let stroke = (view.width().max(view.height()) / 2000.0).max(0.5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        n(view.min.x),
        n(-view.max.y),
        n(view.width()),
        n(view.height())
    );
    let hatch = (stroke * 16.0).max(20.0);
    let _ = writeln!(
        s,
        r##"<defs><pattern id="window-hatch" patternUnits="userSpaceOnUse" width="{w}" height="{w}" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="{w}" stroke="#1565c0" stroke-width="{sw}"/></pattern></defs>"##,
        w = n(hatch),
        sw = n(hatch / 4.0)
    );
    s.push_str("<g transform=\"scale(1,-1)\">\n");

    let _ = write!(s, r##"<g id="raw" fill="none" stroke="#9e9e9e" stroke-width="{}">"##, n(stroke));
    if !raw.segments.is_empty() {
        s.push_str("<path d=\"");
        for (i, seg) in raw.segments.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "M{}L{}", pt(seg.a), pt(seg.b));
        }
        s.push_str("\"/>");
    }
    s.push_str("</g>\n");

    s.push_str(r##"<g id="walls" fill="#37474f" fill-opacity="0.7" stroke="none">"##);
    for w in &result.walls {
        let f = w.wall().footprint();
        let _ = write!(
            s,
            r#"<rect data-id="{}" data-source="{}" x="{}" y="{}" width="{}" height="{}"/>"#,
            w.id,
            match w.source {
                crate::scene::WallSource::Cascade => "cascade",
                crate::scene::WallSource::Restored => "restored",
            },
            n(f.min.x),
            n(f.min.y),
            n(f.width()),
            n(f.height())
        );
    }
    s.push_str("</g>\n");

    let _ = write!(s, r##"<g id="doors" fill="none" stroke="#c62828" stroke-width="{}">"##, n(stroke * 2.0));
    for d in &result.doors {
        let Some(arc) = d.arc() else { continue };
        let (a, e) = (arc.start_point(), arc.end_point());
        let large = u8::from(arc.sweep() > std::f64::consts::PI);
        let _ = write!(
            s,
            r#"<path class="door-arc" d="M{} A{} {} 0 {} 1 {}"/><line class="door-chord" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            pt(a),
            n(arc.radius),
            n(arc.radius),
            large,
            pt(e),
            n(a.x),
            n(a.y),
            n(e.x),
            n(e.y)
        );
    }
    s.push_str("</g>\n");

    s.push_str(r##"<g id="windows" fill="url(#window-hatch)" stroke="#1565c0">"##);
    for win in &result.windows {
        let Some(host) = result.walls.iter().find(|w| w.id == win.host_wall) else { continue };
        let axis = host.axis;
        let (lo, hi) = win.span.interval(axis);
        let off = host.centerline.offset(axis);
        let half = host.thickness / 2.0;
        let r = Aabb::from_points(axis.point(lo, off - half), axis.point(hi, off + half));
        let _ = write!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
            n(r.min.x),
            n(r.min.y),
            n(r.width()),
            n(r.height())
        );
    }
    s.push_str("</g>\n</g>\n</svg>\n");
    s
}
