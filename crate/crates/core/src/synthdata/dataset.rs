use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GroundtruthTable;
use crate::featmap::Tensor3;
use crate::scheduler::{label_pair, Action, LabelConfig, SchedulerState};
use crate::{seed, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Largest frame gap of a sampled pair.
    pub tau_max: u32,
    /// Pairs drawn per sequence; `None` takes every pair with gap `1..=tau_max`.
    pub pairs_per_sequence: Option<usize>,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig { tau_max: 10, pairs_per_sequence: Some(40), seed: 0 }
    }
}

/// Labeled frame pairs for scheduler training.
#[derive(Clone, Debug)]
pub struct SchedulerDataset {
    pub samples: Vec<(SchedulerState, Action)>,
    pub n_detect: usize,
    pub n_track: usize,
}

impl SchedulerDataset {
    pub fn track_fraction(&self) -> f64 {
        self.n_track as f64 / self.samples.len().max(1) as f64
    }
}

/// Samples `(t, t + tau)` frame pairs from each sequence and labels them by
/// tracking the groundtruth of frame `t` into frame `t + tau`.
///
/// `sequences` holds per-frame features (frame 1 first) and the groundtruth.
pub fn build_scheduler_dataset(
    sequences: &[(&[Arc<Tensor3>], &GroundtruthTable)],
    label_cfg: &LabelConfig,
    cfg: &DatasetConfig,
) -> Result<SchedulerDataset> {
    let tau_max = cfg.tau_max.max(1);
    let mut samples = Vec::new();
    for (s, (features, gt)) in sequences.iter().enumerate() {
        let n = features.len() as u32;
        if n < 2 {
            continue;
        }
        let by_frame = gt.by_frame(n);
        let pairs: Vec<(u32, u32)> = match cfg.pairs_per_sequence {
            None => (1..n).flat_map(|t| (1..=tau_max.min(n - t)).map(move |tau| (t, t + tau))).collect(),
            Some(k) => {
                let mut rng = seed::rng(cfg.seed, &[0xda7a, s as u64]);
                (0..k)
                    .map(|_| {
                        let t = rng.random_range(1..n);
                        (t, t + rng.random_range(1..=tau_max.min(n - t)))
                    })
                    .collect()
            }
        };
        for (t, later) in pairs {
            let (ft, fl) = (&features[t as usize - 1], &features[later as usize - 1]);
            let label = label_pair(&by_frame[t as usize - 1], &by_frame[later as usize - 1], ft, fl, label_cfg)?;
            samples.push((SchedulerState::new(t, ft.clone(), later, fl.clone())?, label));
        }
    }
    let n_track = samples.iter().filter(|(_, a)| *a == Action::Track).count();
    Ok(SchedulerDataset { n_detect: samples.len() - n_track, n_track, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featmap::FeatureExtractor;
    use crate::synthdata::{generate, GtRow, Motion, ObjectSpec, SceneSpec};

    fn scene(motion: Motion, exit: Option<u32>) -> SceneSpec {
        SceneSpec {
            frames: 24,
            height: 96,
            width: 160,
            background_seed: 8,
            objects: vec![
                ObjectSpec { id: 1, class_id: 0, width: 36, height: 36, texture_seed: 1, x: 20.0, y: 20.0, motion, enter: 1, exit },
                ObjectSpec {
                    id: 2,
                    class_id: 1,
                    width: 40,
                    height: 32,
                    texture_seed: 2,
                    x: 100.0,
                    y: 50.0,
                    motion: Motion::Static,
                    enter: 1,
                    exit: None,
                },
            ],
        }
    }

    fn dataset(spec: &SceneSpec, cfg: &DatasetConfig) -> SchedulerDataset {
        let seq = generate(spec).unwrap();
        let fx = FeatureExtractor::new(0, 3);
        let feats: Vec<Arc<Tensor3>> = seq.frames.iter().map(|f| Arc::new(fx.extract(f).unwrap())).collect();
        let label = LabelConfig::new(fx.total_stride(), (spec.height, spec.width));
        build_scheduler_dataset(&[(&feats, &seq.gt)], &label, cfg).unwrap()
    }

    #[test]
    fn static_scene_is_all_track() {
        let cfg = DatasetConfig { pairs_per_sequence: None, ..DatasetConfig::default() };
        let ds = dataset(&scene(Motion::Static, None), &cfg);
        assert_eq!(ds.samples.len(), (1..24u32).map(|t| 10.min(24 - t) as usize).sum::<usize>());
        assert_eq!(ds.n_detect, 0);
        assert_eq!(ds.track_fraction(), 1.0);
    }

    #[test]
    fn pairs_straddling_exit_are_detect() {
        let cfg = DatasetConfig { pairs_per_sequence: None, ..DatasetConfig::default() };
        let ds = dataset(&scene(Motion::Static, Some(12)), &cfg);
        for (s, a) in &ds.samples {
            let straddles = s.keyframe_index < 12 && s.current_index >= 12;
            assert_eq!(*a == Action::Detect, straddles, "pair {}->{}", s.keyframe_index, s.current_index);
        }
    }

    #[test]
    fn fast_motion_is_mostly_detect() {
        // 30 px/frame exceeds the search margin (20 px) on every pair
        let cfg = DatasetConfig { pairs_per_sequence: Some(60), tau_max: 3, seed: 4 };
        let mut spec = scene(Motion::Linear { vx: 30.0, vy: 0.0 }, None);
        spec.objects[0].x = 0.0;
        let ds = dataset(&spec, &cfg);
        assert!(ds.n_detect * 2 > ds.samples.len(), "{} of {}", ds.n_detect, ds.samples.len());
    }

    #[test]
    fn labels_ignore_id_permutation() {
        let spec = scene(Motion::Linear { vx: 2.0, vy: 1.0 }, Some(15));
        let seq = generate(&spec).unwrap();
        let fx = FeatureExtractor::new(0, 3);
        let feats: Vec<Arc<Tensor3>> = seq.frames.iter().map(|f| Arc::new(fx.extract(f).unwrap())).collect();
        let label = LabelConfig::new(4, (96, 160));
        let swapped = GroundtruthTable::new(seq.gt.rows.iter().map(|r| GtRow { object_id: 3 - r.object_id, ..*r }).collect());
        let cfg = DatasetConfig { pairs_per_sequence: Some(30), ..DatasetConfig::default() };
        let a = build_scheduler_dataset(&[(&feats, &seq.gt)], &label, &cfg).unwrap();
        let b = build_scheduler_dataset(&[(&feats, &swapped)], &label, &cfg).unwrap();
        let la: Vec<Action> = a.samples.iter().map(|s| s.1).collect();
        let lb: Vec<Action> = b.samples.iter().map(|s| s.1).collect();
        assert_eq!(la, lb);
    }
}
