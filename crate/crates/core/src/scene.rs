//! Scene records and their JSON form.

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Axis, Segment};
use crate::openings::{Door, Window};
use crate::wall_pipeline::Wall;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema of the document written by [`emit_json`].
pub const SCENE_SCHEMA: &str = include_str!("../schema/scene.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSource {
    Cascade,
    Restored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneWall {
    pub id: usize,
    pub source: WallSource,
    pub axis: Axis,
    pub centerline: Segment,
    pub thickness: f64,
}

impl SceneWall {
    pub fn wall(&self) -> Wall {
        Wall { centerline: self.centerline, thickness: self.thickness, axis: self.axis }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub cascade: f64,
    pub restore: f64,
    pub openings: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneStats {
    pub input_entities: usize,
    pub segments_after_standardize: usize,
    pub cluster_segments: usize,
    pub cluster_arcs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<StageTimings>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneResult {
    pub plan_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Aabb>,
    pub walls: Vec<SceneWall>,
    pub doors: Vec<Door>,
    pub windows: Vec<Window>,
    pub stats: SceneStats,
    pub warnings: Vec<String>,
}

impl SceneResult {
    /// Host ids of all doors and windows that name no wall of this scene.
    pub fn dangling_hosts(&self) -> Vec<usize> {
        let ids: Vec<usize> = self.walls.iter().map(|w| w.id).collect();
        self.doors
            .iter()
            .map(|d| d.host_wall)
            .chain(self.windows.iter().map(|w| w.host_wall))
            .filter(|h| !ids.contains(h))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub schema_version: u32,
    pub scenes: Vec<SceneResult>,
}

/// Compact JSON with fixed field order; numbers round-trip exactly.
pub fn emit_json(results: &[SceneResult]) -> String {
    let doc = SceneDocument { schema_version: SCHEMA_VERSION, scenes: results.to_vec() };
    serde_json::to_string(&doc).expect("scene records always serialize")
}

pub fn parse_json(text: &str) -> Result<SceneDocument, serde_json::Error> {
    serde_json::from_str(text)
}
