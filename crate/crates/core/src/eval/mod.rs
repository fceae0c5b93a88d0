//! Box and tracklet mAP, scheduler confusion matrices, the cost model and
//! speed/accuracy sweeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::featmap::Tensor3;
use crate::geometry::{iou, BoundingBox};
use crate::pipeline::DecisionRecord;
use crate::scheduler::{label_pair, Action, LabelConfig};
use crate::synthdata::GroundtruthTable;
use crate::{Error, Result};

mod sweep;

pub use sweep::{
    effective_fps, pareto_svg, run_suite, sweep, write_results_csv, CostModel, EvalSequence, SweepConfig, SweepResult, SweepRow,
    RESULTS_HEADER,
};

/// Predictions and groundtruth boxes of one sequence.
#[derive(Clone, Copy, Debug)]
pub struct SequenceBoxes<'a> {
    pub predictions: &'a [BoundingBox],
    pub groundtruth: &'a [BoundingBox],
}

/// All-points interpolated area under the precision/recall curve of a ranked
/// list of hit flags, with `n_positive` groundtruth items.
pub fn average_precision(hits: &[bool], n_positive: usize) -> f64 {
    if n_positive == 0 {
        return 0.0;
    }
    let mut recall = Vec::with_capacity(hits.len());
    let mut precision = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (k, &hit) in hits.iter().enumerate() {
        tp += hit as usize;
        recall.push(tp as f64 / n_positive as f64);
        precision.push(tp as f64 / (k + 1) as f64);
    }
    // precision envelope, right to left
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&precision) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    ap
}

/// Indices sorted by descending score; ties keep input order.
fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

fn mean_over_classes(per_class: &BTreeMap<u32, f64>) -> f64 {
    if per_class.is_empty() {
        0.0
    } else {
        per_class.values().sum::<f64>() / per_class.len() as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub map: f64,
    /// AP of every class that has groundtruth.
    pub per_class: BTreeMap<u32, f64>,
}

/// Box-level mAP pooled over sequences. Predictions are ranked by score and
/// greedily matched to the highest-IOU unmatched groundtruth box of the same
/// class, sequence and frame; a match needs IOU at or above `iou_thresh`.
pub fn box_map(sequences: &[SequenceBoxes<'_>], iou_thresh: f64) -> MapReport {
    let mut classes: BTreeMap<u32, usize> = BTreeMap::new();
    for s in sequences {
        for g in s.groundtruth {
            *classes.entry(g.class_id).or_default() += 1;
        }
    }
    let mut per_class = BTreeMap::new();
    for (&class, &n_gt) in &classes {
        // (sequence, box) pairs of this class
        let preds: Vec<(usize, &BoundingBox)> = sequences
            .iter()
            .enumerate()
            .flat_map(|(s, seq)| seq.predictions.iter().filter(|b| b.class_id == class).map(move |b| (s, b)))
            .collect();
        let gts: Vec<(usize, &BoundingBox)> = sequences
            .iter()
            .enumerate()
            .flat_map(|(s, seq)| seq.groundtruth.iter().filter(|b| b.class_id == class).map(move |b| (s, b)))
            .collect();
        let mut by_frame: BTreeMap<(usize, u32), Vec<usize>> = BTreeMap::new();
        for (k, (s, g)) in gts.iter().enumerate() {
            by_frame.entry((*s, g.fid)).or_default().push(k);
        }
        let mut taken = vec![false; gts.len()];
        let scores: Vec<f64> = preds.iter().map(|(_, b)| b.score).collect();
        let hits: Vec<bool> = ranked(&scores)
            .into_iter()
            .map(|k| {
                let (s, p) = preds[k];
                let mut best: Option<(usize, f64)> = None;
                for &g in by_frame.get(&(s, p.fid)).map_or(&[][..], Vec::as_slice) {
                    if taken[g] {
                        continue;
                    }
                    let o = iou(&p.rect, &gts[g].1.rect);
                    if o >= iou_thresh && best.is_none_or(|(_, b)| o > b) {
                        best = Some((g, o));
                    }
                }
                if let Some((g, _)) = best {
                    taken[g] = true;
                }
                best.is_some()
            })
            .collect();
        per_class.insert(class, average_precision(&hits, n_gt));
    }
    MapReport { map: mean_over_classes(&per_class), per_class }
}

/// Boxes sharing one object id, ordered by frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracklet {
    pub object_id: u64,
    pub class_id: u32,
    pub boxes: Vec<BoundingBox>,
    /// Mean of the member box scores.
    pub score: f64,
}

impl Tracklet {
    fn box_at(&self, fid: u32) -> Option<&BoundingBox> {
        self.boxes.binary_search_by_key(&fid, |b| b.fid).ok().map(|k| &self.boxes[k])
    }
}

/// Groups boxes into tracklets by id, in ascending id order. A second box with
/// the same id in one frame is ignored; the class is that of the first box.
pub fn tracklets(boxes: &[BoundingBox]) -> Result<Vec<Tracklet>> {
    let mut groups: BTreeMap<u64, Vec<BoundingBox>> = BTreeMap::new();
    for b in boxes {
        let id = b.id.ok_or(Error::MissingIds { frame: b.fid })?;
        groups.entry(id).or_default().push(*b);
    }
    Ok(groups
        .into_iter()
        .map(|(object_id, mut boxes)| {
            boxes.sort_by_key(|b| b.fid);
            boxes.dedup_by_key(|b| b.fid);
            let score = boxes.iter().map(|b| b.score).sum::<f64>() / boxes.len() as f64;
            Tracklet { object_id, class_id: boxes[0].class_id, boxes, score }
        })
        .collect())
}

/// Frames where both tracklets have a box overlapping at `box_iou` or more,
/// over frames where either has a box.
pub fn tracklet_iou(a: &Tracklet, b: &Tracklet, box_iou: f64) -> f64 {
    let mut frames: Vec<u32> = a.boxes.iter().chain(&b.boxes).map(|x| x.fid).collect();
    frames.sort_unstable();
    frames.dedup();
    if frames.is_empty() {
        return 0.0;
    }
    let matched = frames
        .iter()
        .filter(|&&f| match (a.box_at(f), b.box_at(f)) {
            (Some(x), Some(y)) => iou(&x.rect, &y.rect) >= box_iou,
            _ => false,
        })
        .count();
    matched as f64 / frames.len() as f64
}

/// Tracklet-level mAP pooled over sequences. Predicted tracklets are ranked by
/// mean score and greedily matched to the unmatched same-class groundtruth
/// tracklet of highest temporal IOU, which must reach `tracklet_thresh`.
pub fn tracklet_map(sequences: &[SequenceBoxes<'_>], box_iou: f64, tracklet_thresh: f64) -> Result<MapReport> {
    let mut pred = Vec::new();
    let mut gt = Vec::new();
    for (s, seq) in sequences.iter().enumerate() {
        pred.extend(tracklets(seq.predictions)?.into_iter().map(|t| (s, t)));
        gt.extend(tracklets(seq.groundtruth)?.into_iter().map(|t| (s, t)));
    }
    let mut classes: BTreeMap<u32, usize> = BTreeMap::new();
    for (_, t) in &gt {
        *classes.entry(t.class_id).or_default() += 1;
    }
    let mut per_class = BTreeMap::new();
    for (&class, &n_gt) in &classes {
        let preds: Vec<&(usize, Tracklet)> = pred.iter().filter(|(_, t)| t.class_id == class).collect();
        let gts: Vec<&(usize, Tracklet)> = gt.iter().filter(|(_, t)| t.class_id == class).collect();
        let mut taken = vec![false; gts.len()];
        let scores: Vec<f64> = preds.iter().map(|(_, t)| t.score).collect();
        let hits: Vec<bool> = ranked(&scores)
            .into_iter()
            .map(|k| {
                let (s, p) = preds[k];
                let mut best: Option<(usize, f64)> = None;
                for (g, (gs, gt_t)) in gts.iter().enumerate() {
                    if taken[g] || gs != s {
                        continue;
                    }
                    let o = tracklet_iou(p, gt_t, box_iou);
                    if o >= tracklet_thresh && best.is_none_or(|(_, b)| o > b) {
                        best = Some((g, o));
                    }
                }
                if let Some((g, _)) = best {
                    taken[g] = true;
                }
                best.is_some()
            })
            .collect();
        per_class.insert(class, average_precision(&hits, n_gt));
    }
    Ok(MapReport { map: mean_over_classes(&per_class), per_class })
}

/// 2x2 counts indexed `[groundtruth][predicted]` with `Action::index` order
/// (detect first).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: [[usize; 2]; 2],
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            0.0
        } else {
            (self.counts[0][0] + self.counts[1][1]) as f64 / n as f64
        }
    }

    /// Share of groundtruth-detect cases predicted as track.
    pub fn false_positive_rate(&self) -> f64 {
        let detects = self.counts[0][0] + self.counts[0][1];
        if detects == 0 {
            0.0
        } else {
            self.counts[0][1] as f64 / detects as f64
        }
    }

    pub fn add(&mut self, other: &Confusion) {
        for g in 0..2 {
            for p in 0..2 {
                self.counts[g][p] += other.counts[g][p];
            }
        }
    }
}

pub fn confusion(predicted: &[Action], labels: &[Action]) -> Result<Confusion> {
    if predicted.len() != labels.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: labels.len() });
    }
    let mut c = Confusion::default();
    for (p, g) in predicted.iter().zip(labels) {
        c.counts[g.index()][p.index()] += 1;
    }
    Ok(c)
}

/// Actions at the frames where a decision model was consulted.
pub fn consulted_actions(log: &[DecisionRecord]) -> Vec<Action> {
    log.iter().filter(|d| d.source.consulted()).map(|d| d.action).collect()
}

/// Groundtruth labels for the consulted frames of a log: each frame is
/// labeled against the keyframe its decision compared with. `features` holds
/// per-frame features, frame 1 first.
pub fn oracle_labels(log: &[DecisionRecord], gt: &GroundtruthTable, features: &[std::sync::Arc<Tensor3>], cfg: &LabelConfig) -> Result<Vec<Action>> {
    let by_frame = gt.by_frame(features.len() as u32);
    log.iter()
        .filter(|d| d.source.consulted())
        .map(|d| {
            let (t, i) = (d.reference as usize - 1, d.frame as usize - 1);
            if i >= features.len() {
                return Err(Error::LengthMismatch { left: d.frame as usize, right: features.len() });
            }
            label_pair(&by_frame[t], &by_frame[i], &features[t], &features[i], cfg)
        })
        .collect()
}
