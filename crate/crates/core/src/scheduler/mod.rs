//! The detect/track scheduler.
//!
//! Keyframe and current-frame feature maps are compared point-wise over a
//! `(2d+1)^2` neighbourhood, and the resulting correlation volume is classified
//! by two strided convolutions and a fully-connected layer with a 2-way softmax.
//! Each spatial cell of the correlation volume is a tiny single-target tracking
//! response, so the head fuses many local tracking results into one decision.
//!
//! Framed as a decision process, the action is [`Action`], the state is
//! [`SchedulerState`], [`state_transition`] moves the keyframe on detect, and
//! [`reward`] is 1 exactly when the action agrees with the label from
//! [`label_pair`]. With no discount on future rewards, maximizing reward is
//! plain supervised classification, which is what [`train`] does.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::featmap::{conv2d_valid, dot, softmax2, Activation, ConvLayer, Tensor3};
use crate::geometry::{iou, BoundingBox};
use crate::tracker::{roi_track_all, TrackState, TrackerConfig};
use crate::{seed, Error, Result};

mod checkpoint;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, sidecar_path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use train::{batch_gradient, class_weights, train, train_on_maps, Gradients, TrainConfig, TrainReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Detect,
    Track,
}

impl Action {
    /// Class index: detect is 0, track is 1.
    pub fn index(self) -> usize {
        match self {
            Action::Detect => 0,
            Action::Track => 1,
        }
    }

    pub fn other(self) -> Action {
        match self {
            Action::Detect => Action::Track,
            Action::Track => Action::Detect,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Detect => "detect",
            Action::Track => "track",
        }
    }

    pub fn parse(s: &str) -> Option<Action> {
        match s {
            "detect" => Some(Action::Detect),
            "track" => Some(Action::Track),
            _ => None,
        }
    }
}

/// `H x W x (2d+1)^2` correlation volume. Channel `(p + d) * (2d + 1) + (q + d)`
/// holds the comparison at row offset `p` and column offset `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMap {
    pub d: usize,
    pub map: Tensor3,
}

impl CorrelationMap {
    pub fn channel(d: usize, p: i64, q: i64) -> usize {
        let side = 2 * d as i64 + 1;
        ((p + d as i64) * side + (q + d as i64)) as usize
    }

    /// Inverse of [`CorrelationMap::channel`].
    pub fn offset(d: usize, channel: usize) -> (i64, i64) {
        let side = 2 * d + 1;
        ((channel / side) as i64 - d as i64, (channel % side) as i64 - d as i64)
    }

    /// Offset with the largest response at cell `(i, j)`; ties go to the lowest channel.
    pub fn best_offset(&self, i: usize, j: usize) -> (i64, i64) {
        let v = self.map.pixel(i, j);
        let mut best = 0;
        for (k, &x) in v.iter().enumerate() {
            if x > v[best] {
                best = k;
            }
        }
        CorrelationMap::offset(self.d, best)
    }
}

/// Point-wise neighbourhood comparison of two same-shape feature maps.
/// Comparisons that fall outside `b` contribute zero.
pub fn correlation_layer(a: &Tensor3, b: &Tensor3, d: usize) -> Result<CorrelationMap> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch(format!("correlation inputs {:?} vs {:?}", a.dims(), b.dims())));
    }
    let (h, w, _) = a.dims();
    let side = 2 * d + 1;
    let mut out = Tensor3::zeros(h, w, side * side);
    let di = d as i64;
    for p in -di..=di {
        for q in -di..=di {
            let ch = CorrelationMap::channel(d, p, q);
            let i_lo = (-p).max(0) as usize;
            let i_hi = (h as i64 - p).min(h as i64).max(0) as usize;
            let j_lo = (-q).max(0) as usize;
            let j_hi = (w as i64 - q).min(w as i64).max(0) as usize;
            for i in i_lo..i_hi {
                for j in j_lo..j_hi {
                    let v = dot(a.pixel(i, j), b.pixel((i as i64 + p) as usize, (j as i64 + q) as usize));
                    out.set(i, j, ch, v);
                }
            }
        }
    }
    Ok(CorrelationMap { d, map: out })
}

/// Architecture hyperparameters of the scheduler head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub d: usize,
    pub conv1_channels: usize,
    pub conv2_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub delta: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig { d: 3, conv1_channels: 32, conv2_channels: 32, kernel: 3, stride: 2, delta: 0.97 }
    }
}

/// Correlation layer parameters, two conv layers and a 2-logit linear layer,
/// plus the track threshold `delta`. The input feature size is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulerModel {
    pub d: usize,
    pub delta: f64,
    /// `(height, width, channels)` of the feature maps this model accepts.
    pub feature_dims: (usize, usize, usize),
    pub conv1: ConvLayer,
    pub conv2: ConvLayer,
    /// Row-major `2 x fc_inputs`.
    pub fc_weights: Vec<f64>,
    pub fc_bias: [f64; 2],
}

/// Intermediate activations of one forward pass.
pub struct Forward {
    pub hidden1: Tensor3,
    pub hidden2: Tensor3,
    pub logits: [f64; 2],
    pub probs: [f64; 2],
}

impl SchedulerModel {
    pub fn new(feature_dims: (usize, usize, usize), cfg: &SchedulerConfig, seed: u64) -> Result<SchedulerModel> {
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
            return Err(Error::Config(format!("delta {} outside (0, 1)", cfg.delta)));
        }
        let mut rng = seed::rng(seed, &[0x5c4e]);
        let side = 2 * cfg.d + 1;
        let conv1 = ConvLayer::seeded(cfg.kernel, side * side, cfg.conv1_channels, cfg.stride, Activation::Relu, 0.0, &mut rng);
        let conv2 = ConvLayer::seeded(cfg.kernel, cfg.conv1_channels, cfg.conv2_channels, cfg.stride, Activation::Relu, 0.0, &mut rng);
        let n = fc_inputs(feature_dims, &conv1, &conv2)?;
        let scale = 1.0 / (n as f64).sqrt();
        let fc_weights = (0..2 * n).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
        Ok(SchedulerModel { d: cfg.d, delta: cfg.delta, feature_dims, conv1, conv2, fc_weights, fc_bias: [0.0; 2] })
    }

    pub fn config(&self) -> SchedulerConfig {
        SchedulerConfig {
            d: self.d,
            conv1_channels: self.conv1.out_channels,
            conv2_channels: self.conv2.out_channels,
            kernel: self.conv1.kernel,
            stride: self.conv1.stride,
            delta: self.delta,
        }
    }

    pub fn fc_inputs(&self) -> usize {
        self.fc_weights.len() / 2
    }

    pub fn param_count(&self) -> usize {
        self.conv1.param_count() + self.conv2.param_count() + self.fc_weights.len() + 2
    }

    /// Parameter arrays in declared layer order.
    pub fn params(&self) -> [&[f64]; 6] {
        [&self.conv1.weights, &self.conv1.bias, &self.conv2.weights, &self.conv2.bias, &self.fc_weights, &self.fc_bias]
    }

    pub fn params_mut(&mut self) -> [&mut [f64]; 6] {
        [
            &mut self.conv1.weights,
            &mut self.conv1.bias,
            &mut self.conv2.weights,
            &mut self.conv2.bias,
            &mut self.fc_weights,
            &mut self.fc_bias,
        ]
    }

    pub fn forward(&self, corr: &CorrelationMap) -> Result<Forward> {
        let (h, w, _) = self.feature_dims;
        if corr.d != self.d || corr.map.height() != h || corr.map.width() != w {
            return Err(Error::ShapeMismatch(format!(
                "model expects {}x{} correlation with d={}, got {}x{} d={}",
                h,
                w,
                self.d,
                corr.map.height(),
                corr.map.width(),
                corr.d
            )));
        }
        let hidden1 = conv2d_valid(&corr.map, &self.conv1)?;
        let hidden2 = conv2d_valid(&hidden1, &self.conv2)?;
        let n = self.fc_inputs();
        let x = hidden2.data();
        let logits = [
            self.fc_bias[0] + dot(&self.fc_weights[..n], x),
            self.fc_bias[1] + dot(&self.fc_weights[n..], x),
        ];
        let probs = softmax2(logits);
        Ok(Forward { hidden1, hidden2, logits, probs })
    }

    pub fn correlate(&self, keyframe: &Tensor3, current: &Tensor3) -> Result<CorrelationMap> {
        if keyframe.dims() != self.feature_dims {
            return Err(Error::ShapeMismatch(format!(
                "model expects {:?} features, got {:?}",
                self.feature_dims,
                keyframe.dims()
            )));
        }
        correlation_layer(keyframe, current, self.d)
    }

    /// Probability of `track` for a precomputed correlation volume.
    pub fn p_track(&self, corr: &CorrelationMap) -> Result<f64> {
        Ok(self.forward(corr)?.probs[1])
    }

    /// Track iff `p_track >= delta`.
    pub fn decide(&self, p_track: f64) -> Action {
        if p_track >= self.delta {
            Action::Track
        } else {
            Action::Detect
        }
    }
}

fn fc_inputs(feature_dims: (usize, usize, usize), conv1: &ConvLayer, conv2: &ConvLayer) -> Result<usize> {
    let (h, w, _) = feature_dims;
    let (h1, w1) = conv1
        .output_dims(h, w)
        .ok_or_else(|| Error::ShapeMismatch(format!("feature map {}x{} too small for scheduler conv1", h, w)))?;
    let (h2, w2) = conv2
        .output_dims(h1, w1)
        .ok_or_else(|| Error::ShapeMismatch(format!("feature map {}x{} too small for scheduler conv2", h, w)))?;
    Ok(h2 * w2 * conv2.out_channels)
}

/// Keyframe feature and current-frame feature, with their frame indices.
#[derive(Clone, Debug)]
pub struct SchedulerState {
    pub keyframe_index: u32,
    pub current_index: u32,
    pub keyframe_feature: Arc<Tensor3>,
    pub current_feature: Arc<Tensor3>,
}

impl SchedulerState {
    pub fn new(keyframe_index: u32, keyframe_feature: Arc<Tensor3>, current_index: u32, current_feature: Arc<Tensor3>) -> Result<SchedulerState> {
        if keyframe_feature.dims() != current_feature.dims() {
            return Err(Error::ShapeMismatch("keyframe and current features differ in shape".into()));
        }
        Ok(SchedulerState { keyframe_index, current_index, keyframe_feature, current_feature })
    }
}

/// Full forward pass and thresholded decision.
pub fn schedule(model: &SchedulerModel, s: &SchedulerState) -> Result<(f64, Action)> {
    let corr = model.correlate(&s.keyframe_feature, &s.current_feature)?;
    let p = model.p_track(&corr)?;
    Ok((p, model.decide(p)))
}

/// Detect makes the current frame the new keyframe; track keeps the keyframe.
/// Either way `next_feature` becomes the current frame.
pub fn state_transition(s: &SchedulerState, a: Action, next_feature: Arc<Tensor3>) -> SchedulerState {
    let next_index = s.current_index + 1;
    match a {
        Action::Detect => SchedulerState {
            keyframe_index: s.current_index,
            keyframe_feature: Arc::clone(&s.current_feature),
            current_index: next_index,
            current_feature: next_feature,
        },
        Action::Track => SchedulerState {
            keyframe_index: s.keyframe_index,
            keyframe_feature: Arc::clone(&s.keyframe_feature),
            current_index: next_index,
            current_feature: next_feature,
        },
    }
}

/// 1 when the action agrees with the groundtruth label, else 0.
pub fn reward(label: Action, a: Action) -> u8 {
    (label == a) as u8
}

/// Settings for the groundtruth detect/track labeling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub iou_threshold: f64,
    pub total_stride: usize,
    /// `(height, width)` of the frames in pixels.
    pub frame_dims: (usize, usize),
    pub tracker: TrackerConfig,
}

impl LabelConfig {
    pub fn new(total_stride: usize, frame_dims: (usize, usize)) -> LabelConfig {
        LabelConfig { iou_threshold: 0.8, total_stride, frame_dims, tracker: TrackerConfig::default() }
    }
}

/// Labels a frame pair by tracking the groundtruth boxes of the earlier frame
/// into the later one. The pair is `Track` only if both frames hold the same
/// set of object ids and every later box overlaps its tracked counterpart with
/// IOU at or above the threshold.
pub fn label_pair(
    gt_t: &[BoundingBox],
    gt_later: &[BoundingBox],
    feature_t: &Tensor3,
    feature_later: &Tensor3,
    cfg: &LabelConfig,
) -> Result<Action> {
    if gt_t.len() != gt_later.len() {
        return Ok(Action::Detect);
    }
    if gt_t.is_empty() {
        return Ok(Action::Track);
    }
    let mut state = TrackState::new(feature_t.clone(), gt_t.to_vec(), cfg.total_stride, cfg.frame_dims, cfg.tracker)?;
    let fid = gt_later[0].fid;
    let tracked = roi_track_all(&mut state, feature_later, fid)?.boxes;
    for g in gt_later {
        let Some(t) = tracked.iter().find(|t| t.id.is_some() && t.id == g.id) else {
            return Ok(Action::Detect);
        };
        if iou(&t.rect, &g.rect) < cfg.iou_threshold {
            return Ok(Action::Detect);
        }
    }
    Ok(Action::Track)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featmap::FeatureExtractor;
    use crate::geometry::Rect;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(h: usize, w: usize, c: usize, rng: &mut impl Rng) -> Tensor3 {
        Tensor3::from_fn(h, w, c, |_, _, _| rng.random_range(-1.0..1.0))
    }

    /// Direct transcription of the comparison with explicit bounds checks.
    fn reference_correlation(a: &Tensor3, b: &Tensor3, d: usize) -> Tensor3 {
        let (h, w, c) = a.dims();
        let side = 2 * d + 1;
        Tensor3::from_fn(h, w, side * side, |i, j, ch| {
            let p = (ch / side) as i64 - d as i64;
            let q = (ch % side) as i64 - d as i64;
            let (y, x) = (i as i64 + p, j as i64 + q);
            if y < 0 || x < 0 || y >= h as i64 || x >= w as i64 {
                return 0.0;
            }
            let mut s = 0.0;
            for k in 0..c {
                s += a.get(i, j, k) * b.get(y as usize, x as usize, k);
            }
            s
        })
    }

    #[test]
    fn all_ones_gives_channel_count() {
        let a = Tensor3::from_fn(5, 6, 4, |_, _, _| 1.0);
        let corr = correlation_layer(&a, &a, 2).unwrap();
        assert_eq!(corr.map.channels(), 25);
        for i in 0..5 {
            for j in 0..6 {
                for p in -2i64..=2 {
                    for q in -2i64..=2 {
                        let inside = (0..5).contains(&(i as i64 + p)) && (0..6).contains(&(j as i64 + q));
                        let v = corr.map.get(i, j, CorrelationMap::channel(2, p, q));
                        assert_eq!(v, if inside { 4.0 } else { 0.0 });
                    }
                }
            }
        }
    }

    #[test]
    fn single_cell_shift_lands_in_one_channel() {
        let (p0, q0) = (1i64, -2i64);
        let a = Tensor3::from_fn(7, 7, 2, |y, x, c| if (y, x) == (3, 3) { 1.0 + c as f64 } else { 0.0 });
        let b = Tensor3::from_fn(7, 7, 2, |y, x, c| if (y as i64, x as i64) == (3 + p0, 3 + q0) { 1.0 + c as f64 } else { 0.0 });
        let corr = correlation_layer(&a, &b, 2).unwrap();
        let reference = reference_correlation(&a, &b, 2);
        assert_eq!(corr.map, reference);
        let nonzero: Vec<_> = (0..corr.map.data().len()).filter(|&k| corr.map.data()[k] != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(corr.map.get(3, 3, CorrelationMap::channel(2, p0, q0)), 5.0);
    }

    #[test]
    fn zero_displacement_is_cellwise_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_tensor(4, 5, 3, &mut rng);
        let b = random_tensor(4, 5, 3, &mut rng);
        let corr = correlation_layer(&a, &b, 0).unwrap();
        assert_eq!(corr.map.channels(), 1);
        for i in 0..4 {
            for j in 0..5 {
                assert_eq!(corr.map.get(i, j, 0), dot(a.pixel(i, j), b.pixel(i, j)));
            }
        }
        assert!(correlation_layer(&a, &random_tensor(4, 6, 3, &mut rng), 1).is_err());
    }

    proptest! {
        #[test]
        fn correlation_matches_reference(seed in 0u64..10_000, h in 1usize..13, w in 1usize..13, c in 1usize..5, d in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_tensor(h, w, c, &mut rng);
            let b = random_tensor(h, w, c, &mut rng);
            let fast = correlation_layer(&a, &b, d).unwrap();
            let slow = reference_correlation(&a, &b, d);
            for (x, y) in fast.map.data().iter().zip(slow.data()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    fn small_model(delta: f64) -> SchedulerModel {
        let cfg = SchedulerConfig { delta, conv1_channels: 4, conv2_channels: 4, ..SchedulerConfig::default() };
        SchedulerModel::new((12, 14, 3), &cfg, 5).unwrap()
    }

    #[test]
    fn threshold_rule() {
        let m = small_model(0.97);
        assert_eq!(m.decide(0.98), Action::Track);
        assert_eq!(m.decide(0.96), Action::Detect);
        assert_eq!(m.decide(0.97), Action::Track);
    }

    #[test]
    fn zero_head_is_undecided() {
        let mut m = small_model(0.97);
        m.fc_weights.iter_mut().for_each(|w| *w = 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SchedulerState::new(1, Arc::new(random_tensor(12, 14, 3, &mut rng)), 2, Arc::new(random_tensor(12, 14, 3, &mut rng))).unwrap();
        let (p, a) = schedule(&m, &s).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(a, Action::Detect);
    }

    #[test]
    fn rejects_other_sizes() {
        let m = small_model(0.97);
        let f = Arc::new(Tensor3::zeros(13, 14, 3));
        let s = SchedulerState::new(1, f.clone(), 2, f).unwrap();
        assert!(matches!(schedule(&m, &s), Err(Error::ShapeMismatch(_))));
        assert!(SchedulerModel::new((12, 14, 3), &SchedulerConfig { delta: 1.0, ..SchedulerConfig::default() }, 0).is_err());
        assert!(SchedulerModel::new((4, 4, 3), &SchedulerConfig::default(), 0).is_err());
    }

    proptest! {
        #[test]
        fn raising_delta_never_turns_detect_into_track(seed in 0u64..200, lo in 0.01..0.98f64, bump in 0.0..0.5f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = small_model(lo);
            let s = SchedulerState::new(1, Arc::new(random_tensor(12, 14, 3, &mut rng)), 2, Arc::new(random_tensor(12, 14, 3, &mut rng))).unwrap();
            let (p, a) = schedule(&m, &s).unwrap();
            m.delta = (lo + bump).min(0.999);
            let (p2, a2) = schedule(&m, &s).unwrap();
            prop_assert_eq!(p, p2);
            if a == Action::Detect {
                prop_assert_eq!(a2, Action::Detect);
            }
        }
    }

    #[test]
    fn rewards() {
        assert_eq!(reward(Action::Track, Action::Track), 1);
        assert_eq!(reward(Action::Track, Action::Detect), 0);
        for gt in [Action::Detect, Action::Track] {
            for a in [Action::Detect, Action::Track] {
                assert_eq!(reward(gt, a) + reward(gt, a.other()), 1);
            }
        }
    }

    #[test]
    fn transitions() {
        let f = |v: f64| Arc::new(Tensor3::from_fn(2, 2, 1, |_, _, _| v));
        let s = SchedulerState::new(1, f(1.0), 5, f(5.0)).unwrap();
        let d = state_transition(&s, Action::Detect, f(6.0));
        assert_eq!((d.keyframe_index, d.current_index), (5, 6));
        assert_eq!(d.keyframe_feature.get(0, 0, 0), 5.0);
        let t = state_transition(&s, Action::Track, f(6.0));
        assert_eq!((t.keyframe_index, t.current_index), (1, 6));
        let dt = state_transition(&d, Action::Track, f(7.0));
        assert_eq!(dt.keyframe_index, 5);
    }

    fn textured_frame(h: usize, w: usize, objects: &[(usize, usize, usize, usize, u64)], bg_seed: u64) -> Tensor3 {
        let mut bg = ChaCha8Rng::seed_from_u64(bg_seed);
        let mut img = Tensor3::from_fn(h, w, 3, |_, _, _| bg.random_range(0..256) as f64 / 255.0);
        for &(x, y, ow, oh, tex) in objects {
            let mut rng = ChaCha8Rng::seed_from_u64(tex);
            for yy in 0..oh {
                for xx in 0..ow {
                    for c in 0..3 {
                        img.set(y + yy, x + xx, c, rng.random_range(0..256) as f64 / 255.0);
                    }
                }
            }
        }
        img
    }

    fn gt(fid: u32, items: &[(u64, f64, f64, f64, f64)]) -> Vec<BoundingBox> {
        items.iter().map(|&(id, x, y, w, h)| BoundingBox::new(Rect::new(x, y, w, h).unwrap(), fid, 1.0, 0).with_id(id)).collect()
    }

    #[test]
    fn labeling_protocol_cases() {
        let fx = FeatureExtractor::new(1, 3);
        let cfg = LabelConfig::new(4, (96, 128));
        let objs = [(16, 16, 32, 32, 7), (72, 40, 36, 36, 8)];
        let f1 = fx.extract(&textured_frame(96, 128, &objs, 3)).unwrap();
        let g1 = gt(1, &[(1, 16.0, 16.0, 32.0, 32.0), (2, 72.0, 40.0, 36.0, 36.0)]);
        // static
        let g2 = gt(2, &[(1, 16.0, 16.0, 32.0, 32.0), (2, 72.0, 40.0, 36.0, 36.0)]);
        assert_eq!(label_pair(&g1, &g2, &f1, &f1, &cfg).unwrap(), Action::Track);
        // disappearance
        let f3 = fx.extract(&textured_frame(96, 128, &objs[..1], 3)).unwrap();
        let g3 = gt(3, &[(1, 16.0, 16.0, 32.0, 32.0)]);
        assert_eq!(label_pair(&g1, &g3, &f1, &f3, &cfg).unwrap(), Action::Detect);
        // same count but a different object
        let g4 = gt(4, &[(1, 16.0, 16.0, 32.0, 32.0), (3, 72.0, 40.0, 36.0, 36.0)]);
        assert_eq!(label_pair(&g1, &g4, &f1, &f1, &cfg).unwrap(), Action::Detect);
        // the groundtruth box at t+1 sits where the tracker cannot reach IOU 0.8
        let g5 = gt(5, &[(1, 16.0, 16.0, 32.0, 32.0), (2, 72.0 + 6.0, 40.0 + 6.0, 36.0, 36.0)]);
        assert_eq!(label_pair(&g1, &g5, &f1, &f1, &cfg).unwrap(), Action::Detect);
    }

    #[test]
    fn labels_ignore_id_relabeling() {
        let fx = FeatureExtractor::new(1, 3);
        let cfg = LabelConfig::new(4, (96, 128));
        let objs = [(16, 16, 32, 32, 7), (72, 40, 36, 36, 8)];
        let moved = [(20, 16, 32, 32, 7), (72, 52, 36, 36, 8)];
        let f1 = fx.extract(&textured_frame(96, 128, &objs, 3)).unwrap();
        let f2 = fx.extract(&textured_frame(96, 128, &moved, 3)).unwrap();
        let a1 = gt(1, &[(1, 16.0, 16.0, 32.0, 32.0), (2, 72.0, 40.0, 36.0, 36.0)]);
        let a2 = gt(2, &[(1, 20.0, 16.0, 32.0, 32.0), (2, 72.0, 52.0, 36.0, 36.0)]);
        let b1 = gt(1, &[(9, 16.0, 16.0, 32.0, 32.0), (4, 72.0, 40.0, 36.0, 36.0)]);
        let b2 = gt(2, &[(9, 20.0, 16.0, 32.0, 32.0), (4, 72.0, 52.0, 36.0, 36.0)]);
        assert_eq!(label_pair(&a1, &a2, &f1, &f2, &cfg).unwrap(), label_pair(&b1, &b2, &f1, &f2, &cfg).unwrap());
    }
}
