//! Precision and recall of a scene against ground truth.

use serde::{Deserialize, Serialize};

use crate::geometry::{interval_overlap, Segment};
use crate::scene::SceneResult;

pub const DOOR_HINGE_TOL: f64 = 100.0;
pub const DOOR_RADIUS_REL_TOL: f64 = 0.1;
pub const WINDOW_IOU: f64 = 0.5;
/// Largest offset between matched window spans across their axis.
pub const WINDOW_OFFSET_TOL: f64 = 200.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassScore {
    pub matched: usize,
    pub predicted: usize,
    pub truth: usize,
}

impl ClassScore {
    /// 1.0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            1.0
        } else {
            self.matched as f64 / self.predicted as f64
        }
    }

    /// 1.0 when there was nothing to find.
    pub fn recall(&self) -> f64 {
        if self.truth == 0 {
            1.0
        } else {
            self.matched as f64 / self.truth as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn add(&mut self, other: &ClassScore) {
        self.matched += other.matched;
        self.predicted += other.predicted;
        self.truth += other.truth;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneScore {
    pub walls: ClassScore,
    pub doors: ClassScore,
    pub windows: ClassScore,
}

impl SceneScore {
    pub fn add(&mut self, other: &SceneScore) {
        self.walls.add(&other.walls);
        self.doors.add(&other.doors);
        self.windows.add(&other.windows);
    }
}

/// Greedy one-to-one matching: candidate pairs in descending quality,
/// ties broken by index.
fn greedy(n_pred: usize, n_truth: usize, quality: impl Fn(usize, usize) -> Option<f64>) -> ClassScore {
    let mut cands = Vec::new();
    for p in 0..n_pred {
        for t in 0..n_truth {
            if let Some(q) = quality(p, t) {
                cands.push((q, p, t));
            }
        }
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; n_pred];
    let mut used_t = vec![false; n_truth];
    let mut matched = 0;
    for (_, p, t) in cands {
        if !used_p[p] && !used_t[t] {
            used_p[p] = true;
            used_t[t] = true;
            matched += 1;
        }
    }
    ClassScore { matched, predicted: n_pred, truth: n_truth }
}

fn span_iou(a: &Segment, b: &Segment) -> Option<f64> {
    let axis = a.axis();
    if b.axis() != axis || (a.offset(axis) - b.offset(axis)).abs() > WINDOW_OFFSET_TOL {
        return None;
    }
    let (ia, ib) = (a.interval(axis), b.interval(axis));
    let inter = interval_overlap(ia, ib).max(0.0);
    let union = (ia.1 - ia.0) + (ib.1 - ib.0) - inter;
    (union > 0.0).then(|| inter / union)
}

pub fn score(result: &SceneResult, truth: &SceneResult, iou_threshold: f64) -> SceneScore {
    let pw: Vec<_> = result.walls.iter().map(|w| w.wall().footprint()).collect();
    let tw: Vec<_> = truth.walls.iter().map(|w| w.wall().footprint()).collect();
    let walls = greedy(pw.len(), tw.len(), |p, t| {
        let iou = pw[p].iou(&tw[t]);
        (iou >= iou_threshold).then_some(iou)
    });
    let doors = greedy(result.doors.len(), truth.doors.len(), |p, t| {
        let (a, b) = (&result.doors[p], &truth.doors[t]);
        let d = a.hinge.dist(b.hinge);
        let ok = d <= DOOR_HINGE_TOL && (a.radius - b.radius).abs() <= DOOR_RADIUS_REL_TOL * b.radius;
        ok.then_some(-d)
    });
    let windows = greedy(result.windows.len(), truth.windows.len(), |p, t| {
        span_iou(&result.windows[p].span, &truth.windows[t].span).filter(|&iou| iou >= WINDOW_IOU)
    });
    SceneScore { walls, doors, windows }
}

/// Scores scenes pairwise by position and pools the counts.
pub fn score_all(results: &[SceneResult], truths: &[SceneResult], iou_threshold: f64) -> SceneScore {
    let mut total = SceneScore::default();
    let empty = SceneResult::default();
    for i in 0..results.len().max(truths.len()) {
        let r = results.get(i).unwrap_or(&empty);
        let t = truths.get(i).unwrap_or(&empty);
        total.add(&score(r, t, iou_threshold));
    }
    total
}
