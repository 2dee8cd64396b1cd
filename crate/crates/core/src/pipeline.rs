//! End-to-end analysis of a drawing: standardize, cluster, then per plan the
//! filter cascade, raster restoration and opening detection.

use std::time::Instant;

use thiserror::Error;

use crate::config::FloorscanConfig;
use crate::geometry::{Aabb, Point2};
use crate::dxf::{parse_dxf, DrawingDocument, ParseError};
use crate::ingest::{cluster_plans, standardize, IngestError, PlanCluster};
use crate::openings::{attach_openings, detect_doors, detect_windows};
use crate::raster::RestoredWalls;
use crate::scene::{SceneResult, SceneStats, SceneWall, StageTimings, WallSource};
use crate::wall_pipeline::{run_filter_cascade, CascadeOutput, Wall};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Record per-stage timings in the scene statistics.
    pub timings: bool,
}

/// One analysed plan with its intermediate products.
#[derive(Debug, Clone)]
pub struct PlanAnalysis {
    pub scene: SceneResult,
    pub cluster: PlanCluster,
    pub cascade: CascadeOutput,
    pub restored: RestoredWalls,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

pub fn analyze_cluster(cluster: &PlanCluster, plan_index: usize, cfg: &FloorscanConfig, opts: AnalyzeOptions) -> PlanAnalysis {
    let t0 = Instant::now();
    let cascade = run_filter_cascade(cluster, &cfg.pipeline);
    let t_cascade = ms(t0);

    let t1 = Instant::now();
    let restored = crate::raster::restore_walls(cluster, &cascade.walls, &cfg.restore);
    let t_restore = ms(t1);

    let t2 = Instant::now();
    let mut scene_walls: Vec<SceneWall> = Vec::new();
    let mut walls: Vec<Wall> = Vec::new();
    let kept = cascade.walls.iter().zip(&restored.kept_cascade).filter(|(_, &k)| k).map(|(w, _)| (w, WallSource::Cascade));
    for (w, source) in kept.chain(restored.restored.iter().map(|w| (w, WallSource::Restored))) {
        scene_walls.push(SceneWall { id: walls.len(), source, axis: w.axis, centerline: w.centerline, thickness: w.thickness });
        walls.push(*w);
    }
    let doors = detect_doors(&cluster.arcs, &walls, &cfg.openings);
    let windows = detect_windows(&cascade.hints, &cluster.segments, &walls, &cfg.openings);
    let openings = attach_openings(&walls, doors, windows);
    let t_openings = ms(t2);

    let timing_ms = opts.timings.then(|| StageTimings {
        cascade: t_cascade,
        restore: t_restore,
        openings: t_openings,
        total: ms(t0),
    });
    let scene = SceneResult {
        plan_index,
        bounds: Some(cluster.bounds),
        walls: scene_walls,
        doors: openings.doors,
        windows: openings.windows,
        stats: SceneStats {
            input_entities: 0,
            segments_after_standardize: 0,
            cluster_segments: cluster.segments.len(),
            cluster_arcs: cluster.arcs.len(),
            timing_ms,
        },
        warnings: Vec::new(),
    };
    PlanAnalysis { scene, cluster: cluster.clone(), cascade, restored }
}

/// Scenes for every plan of the drawing, largest plan first. A drawing with
/// no line geometry yields one empty scene carrying a warning.
pub fn analyze_document(
    doc: &DrawingDocument,
    cfg: &FloorscanConfig,
    opts: AnalyzeOptions,
) -> Result<Vec<PlanAnalysis>, AnalyzeError> {
    let plan = standardize(doc, &cfg.ingest)?;
    let clusters = cluster_plans(&plan, cfg.ingest.cluster_threshold);
    let stats = |cluster_segments, cluster_arcs| SceneStats {
        input_entities: doc.entity_count(),
        segments_after_standardize: plan.segments.len(),
        cluster_segments,
        cluster_arcs,
        timing_ms: None,
    };
    if clusters.is_empty() {
        let mut warnings = plan.warnings.clone();
        warnings.push("drawing contains no line geometry".into());
        let scene = SceneResult { stats: stats(0, 0), warnings, ..Default::default() };
        let origin = Point2::new(0.0, 0.0);
        let empty = PlanCluster { segments: Vec::new(), arcs: Vec::new(), bounds: Aabb::from_points(origin, origin) };
        let cascade = crate::wall_pipeline::run_cascade_on(&[], &cfg.pipeline);
        let restored = RestoredWalls::empty();
        return Ok(vec![PlanAnalysis { scene, cluster: empty, cascade, restored }]);
    }
    Ok(clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut a = analyze_cluster(c, i, cfg, opts);
            let timing = a.scene.stats.timing_ms.take();
            a.scene.stats = SceneStats { timing_ms: timing, ..stats(c.segments.len(), c.arcs.len()) };
            a.scene.warnings = plan.warnings.clone();
            a
        })
        .collect())
}

pub fn analyze_dxf(text: &str, cfg: &FloorscanConfig, opts: AnalyzeOptions) -> Result<Vec<PlanAnalysis>, AnalyzeError> {
    let doc = parse_dxf(text)?;
    analyze_document(&doc, cfg, opts)
}
