//! Wall, door and window extraction from vector CAD floor plans.

// Negated float comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dxf;
pub mod geometry;
pub mod ingest;
pub mod union_find;
pub mod wall_pipeline;
pub mod raster;
pub mod openings;
pub mod scene;
pub mod svg;
pub mod synth;
pub mod score;
pub mod config;
pub mod pipeline;

pub use config::{parse_config, ConfigError, FloorscanConfig};
pub use dxf::{parse_dxf, DrawingDocument, ParseError};
pub use geometry::{Aabb, ArcGeom, Axis, Point2, Segment};
pub use ingest::{cluster_plans, standardize, PlanCluster, StandardizedPlan};
pub use openings::{Door, Window};
pub use pipeline::{analyze_cluster, analyze_document, analyze_dxf, AnalyzeError, AnalyzeOptions, PlanAnalysis};
pub use raster::label_components;
pub use scene::{emit_json, parse_json, SceneResult};
pub use score::{score, ClassScore, SceneScore};
pub use svg::emit_svg;
pub use synth::{generate_synthetic, SyntheticSpec};
pub use wall_pipeline::{run_filter_cascade, Wall};
