use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::featmap::Image;
use crate::geometry::{BoundingBox, Rect};
use crate::synthdata::GroundtruthTable;
use crate::{seed, Error, Result};

/// Single-frame detector: scored, class-labeled boxes without ids.
pub trait Detector {
    /// `image` is `None` when the caller only holds precomputed features;
    /// detectors that need pixels should fail in that case.
    fn detect(&mut self, frame_id: u32, image: Option<&Image>) -> Result<Vec<BoundingBox>>;
}

/// Noise model of [`SimulatedDetector`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorNoise {
    /// Std of the Gaussian shift applied to box centers, in px.
    pub center_jitter: f64,
    /// Std of the Gaussian change applied to width and height, in px.
    pub size_jitter: f64,
    /// Probability that a groundtruth box is missed.
    pub drop_prob: f64,
    /// Expected number of spurious boxes per frame.
    pub spurious_rate: f64,
    /// Side-length range of spurious boxes, in px.
    pub spurious_size: [f64; 2],
    /// Beta parameters of true-positive scores; `None` scores them 1.0.
    pub true_score: Option<[f64; 2]>,
    /// Beta parameters of spurious scores.
    pub spurious_score: [f64; 2],
    /// Classes spurious boxes are drawn from.
    pub classes: u32,
}

impl Default for DetectorNoise {
    fn default() -> Self {
        DetectorNoise {
            center_jitter: 1.5,
            size_jitter: 1.0,
            drop_prob: 0.01,
            spurious_rate: 0.15,
            spurious_size: [24.0, 44.0],
            true_score: Some([8.0, 2.0]),
            spurious_score: [2.0, 6.0],
            classes: 3,
        }
    }
}

impl DetectorNoise {
    /// Reproduces the groundtruth exactly with score 1.0.
    pub fn perfect() -> DetectorNoise {
        DetectorNoise {
            center_jitter: 0.0,
            size_jitter: 0.0,
            drop_prob: 0.0,
            spurious_rate: 0.0,
            true_score: None,
            ..DetectorNoise::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.center_jitter >= 0.0
            && self.size_jitter >= 0.0
            && (0.0..=1.0).contains(&self.drop_prob)
            && self.spurious_rate >= 0.0
            && self.spurious_size[0] > 0.0
            && self.spurious_size[0] <= self.spurious_size[1]
            && self.true_score.is_none_or(|[a, b]| a > 0.0 && b > 0.0)
            && self.spurious_score.iter().all(|&v| v > 0.0)
            && self.classes > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid detector noise {:?}", self)))
        }
    }
}

/// Corrupted groundtruth standing in for a learned detector. Output for a frame
/// depends only on `(seed, stream, frame_id)`, not on call order.
#[derive(Clone, Debug)]
pub struct SimulatedDetector {
    gt: GroundtruthTable,
    noise: DetectorNoise,
    seed: u64,
    stream: u64,
    frame_dims: (usize, usize),
}

impl SimulatedDetector {
    /// `stream` separates sequences sharing a seed; `frame_dims` is `(height, width)`.
    pub fn new(gt: GroundtruthTable, noise: DetectorNoise, seed: u64, stream: u64, frame_dims: (usize, usize)) -> Result<Self> {
        noise.validate()?;
        Ok(SimulatedDetector { gt, noise, seed, stream, frame_dims })
    }

    pub fn detections(&self, frame_id: u32) -> Vec<BoundingBox> {
        let n = &self.noise;
        let mut rng = seed::rng(self.seed, &[0xde7, self.stream, frame_id as u64]);
        let frame = Rect::new(0.0, 0.0, self.frame_dims.1 as f64, self.frame_dims.0 as f64).expect("positive frame");
        let center = Normal::new(0.0, n.center_jitter).expect("non-negative std");
        let size = Normal::new(0.0, n.size_jitter).expect("non-negative std");
        let true_score = n.true_score.map(|[a, b]| Beta::new(a, b).expect("validated"));
        let spurious_score = Beta::new(n.spurious_score[0], n.spurious_score[1]).expect("validated");
        let mut out = Vec::new();
        for g in self.gt.boxes_at(frame_id) {
            // draw every variate so one box's fate does not shift the others
            let (dx, dy, dw, dh) = (center.sample(&mut rng), center.sample(&mut rng), size.sample(&mut rng), size.sample(&mut rng));
            let keep = rng.random::<f64>() >= n.drop_prob;
            let score = true_score.map_or(1.0, |b| b.sample(&mut rng));
            if !keep {
                continue;
            }
            let (cx, cy) = g.rect.center();
            let jittered = Rect::from_center(cx + dx, cy + dy, (g.rect.w + dw).max(1.0), (g.rect.h + dh).max(1.0));
            let Ok(rect) = jittered.and_then(|r| r.clip(&frame)) else {
                continue;
            };
            out.push(BoundingBox::new(rect, frame_id, score, g.class_id));
        }
        let mut spurious = n.spurious_rate.floor() as usize;
        if rng.random::<f64>() < n.spurious_rate.fract() {
            spurious += 1;
        }
        let (fh, fw) = (self.frame_dims.0 as f64, self.frame_dims.1 as f64);
        for _ in 0..spurious {
            let w = rng.random_range(n.spurious_size[0]..=n.spurious_size[1]).min(fw);
            let h = rng.random_range(n.spurious_size[0]..=n.spurious_size[1]).min(fh);
            let x = rng.random_range(0.0..=fw - w);
            let y = rng.random_range(0.0..=fh - h);
            let class_id = rng.random_range(0..n.classes);
            let score = spurious_score.sample(&mut rng);
            out.push(BoundingBox::new(Rect::new(x, y, w, h).expect("positive size"), frame_id, score, class_id));
        }
        out
    }
}

impl Detector for SimulatedDetector {
    fn detect(&mut self, frame_id: u32, _image: Option<&Image>) -> Result<Vec<BoundingBox>> {
        Ok(self.detections(frame_id))
    }
}

/// Replays detections loaded from a cache file.
#[derive(Clone, Debug, Default)]
pub struct CachedDetector {
    boxes: Vec<BoundingBox>,
}

impl CachedDetector {
    pub fn new(mut boxes: Vec<BoundingBox>) -> CachedDetector {
        boxes.sort_by_key(|b| b.fid);
        boxes.iter_mut().for_each(|b| b.id = None);
        CachedDetector { boxes }
    }
}

impl Detector for CachedDetector {
    fn detect(&mut self, frame_id: u32, _image: Option<&Image>) -> Result<Vec<BoundingBox>> {
        let lo = self.boxes.partition_point(|b| b.fid < frame_id);
        let hi = self.boxes.partition_point(|b| b.fid <= frame_id);
        Ok(self.boxes[lo..hi].to_vec())
    }
}
