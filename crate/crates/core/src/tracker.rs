//! Correlation tracking on shared feature maps.
//!
//! Every box is tracked by correlating its keyframe target feature against a
//! search window around its previous position in the current frame's feature
//! map. [`roi_track_all`] crops both windows out of full-frame feature maps (RoI
//! convolution, no parameters), while [`crop_track_all`] re-extracts features
//! from pixel crops per box and serves as the reference path.

use serde::{Deserialize, Serialize};

use crate::featmap::{cross_correlate, dot, FeatureExtractor, Image, Tensor3};
use crate::geometry::{BoundingBox, Rect};
use crate::{Error, Result};

/// Rectangle on the feature grid, in cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Search window side relative to the target side.
    pub search_scale: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig { search_scale: 2.0 }
    }
}

/// Target and search windows for one box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec {
    pub target_cells: CellRect,
    pub search_cells: CellRect,
    pub search_scale: f64,
}

fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Maps pixel edges to cells with round-half-up, keeping at least one cell
/// and clamping to the feature extent.
pub fn to_grid(rect: &Rect, total_stride: usize, feat_height: usize, feat_width: usize) -> CellRect {
    let s = total_stride as f64;
    let axis = |lo: f64, len: f64, extent: usize| {
        let a = round_half_up(lo / s);
        let b = round_half_up((lo + len) / s);
        let start = a.clamp(0, extent as i64 - 1);
        let end = b.clamp(start + 1, extent as i64);
        (start as usize, (end - start) as usize)
    };
    let (row, height) = axis(rect.y, rect.h, feat_height);
    let (col, width) = axis(rect.x, rect.w, feat_width);
    CellRect { row, col, height, width }
}

/// Location and value of the response maximum; ties go to the lowest row-major index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

fn argmax(resp: &Tensor3) -> Peak {
    let mut best = Peak { row: 0, col: 0, value: f64::NEG_INFINITY };
    for row in 0..resp.height() {
        for col in 0..resp.width() {
            let v = resp.get(row, col, 0);
            if v > best.value {
                best = Peak { row, col, value: v };
            }
        }
    }
    best
}

pub fn response_peak(target: &Tensor3, search: &Tensor3) -> Result<Peak> {
    Ok(argmax(&cross_correlate(target, search)?))
}

/// Single-box step: `search` is assumed centered on the previous position, so
/// zero displacement sits at the middle of the response map. Returns the new
/// center and the peak response.
pub fn track_single(target: &Tensor3, search: &Tensor3, prev_center: (f64, f64), total_stride: usize) -> Result<((f64, f64), f64)> {
    let peak = response_peak(target, search)?;
    let mid_row = (search.height() - target.height()) / 2;
    let mid_col = (search.width() - target.width()) / 2;
    let s = total_stride as f64;
    let cx = prev_center.0 + (peak.col as f64 - mid_col as f64) * s;
    let cy = prev_center.1 + (peak.row as f64 - mid_row as f64) * s;
    Ok(((cx, cy), peak.value))
}

/// Per-box geometry shared by both tracking paths.
struct BoxPlan {
    roi: RoiSpec,
    prev_row: i64,
    prev_col: i64,
}

fn margin(cells: usize, scale: f64) -> i64 {
    round_half_up(cells as f64 * (scale - 1.0) / 2.0).max(1)
}

fn plan(
    target_cells: CellRect,
    prev_rect: &Rect,
    stride: usize,
    feat_height: usize,
    feat_width: usize,
    scale: f64,
    index: usize,
) -> Result<BoxPlan> {
    let s = stride as f64;
    let prev_row = round_half_up(prev_rect.y / s);
    let prev_col = round_half_up(prev_rect.x / s);
    let my = margin(target_cells.height, scale);
    let mx = margin(target_cells.width, scale);
    let clip = |start: i64, len: i64, extent: usize| {
        let a = start.max(0);
        let b = (start + len).min(extent as i64);
        (a, b - a)
    };
    let (r0, h) = clip(prev_row - my, target_cells.height as i64 + 2 * my, feat_height);
    let (c0, w) = clip(prev_col - mx, target_cells.width as i64 + 2 * mx, feat_width);
    if h < target_cells.height as i64 || w < target_cells.width as i64 {
        return Err(Error::EmptySearchRegion { index });
    }
    let search_cells = CellRect { row: r0 as usize, col: c0 as usize, height: h as usize, width: w as usize };
    Ok(BoxPlan { roi: RoiSpec { target_cells, search_cells, search_scale: scale }, prev_row, prev_col })
}

/// Multi-box tracking state anchored at a keyframe.
#[derive(Clone, Debug)]
pub struct TrackState {
    keyframe_feature: Tensor3,
    /// Keyframe detections being propagated.
    pub boxes: Vec<BoundingBox>,
    targets: Vec<CellRect>,
    target_feats: Vec<Tensor3>,
    /// Latest `(cx, cy)` per box, in pixels.
    pub centers: Vec<(f64, f64)>,
    /// Set for boxes whose search window left the feature map.
    pub frozen: Vec<bool>,
    /// Frame index the centers refer to.
    pub frame_of_centers: u32,
    stride: usize,
    frame_height: f64,
    frame_width: f64,
    config: TrackerConfig,
}

impl TrackState {
    pub fn new(
        keyframe_feature: Tensor3,
        boxes: Vec<BoundingBox>,
        total_stride: usize,
        frame_dims: (usize, usize),
        config: TrackerConfig,
    ) -> Result<TrackState> {
        let (fh, fw, _) = keyframe_feature.dims();
        let targets: Vec<CellRect> = boxes.iter().map(|b| to_grid(&b.rect, total_stride, fh, fw)).collect();
        let target_feats = targets
            .iter()
            .map(|t| keyframe_feature.crop(t.row, t.col, t.height, t.width))
            .collect::<Result<Vec<_>>>()?;
        let centers = boxes.iter().map(|b| b.rect.center()).collect();
        let frame_of_centers = boxes.first().map_or(0, |b| b.fid);
        Ok(TrackState {
            keyframe_feature,
            frozen: vec![false; boxes.len()],
            boxes,
            targets,
            target_feats,
            centers,
            frame_of_centers,
            stride: total_stride,
            frame_height: frame_dims.0 as f64,
            frame_width: frame_dims.1 as f64,
            config,
        })
    }

    pub fn keyframe_feature(&self) -> &Tensor3 {
        &self.keyframe_feature
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn target_cells(&self) -> &[CellRect] {
        &self.targets
    }

    fn prev_rect(&self, i: usize) -> Rect {
        let (cx, cy) = self.centers[i];
        let r = self.boxes[i].rect;
        Rect { x: cx - r.w / 2.0, y: cy - r.h / 2.0, w: r.w, h: r.h }
    }

    /// RoI windows used for box `i` against a feature map of the given size.
    pub fn roi(&self, i: usize, feat_height: usize, feat_width: usize) -> Result<RoiSpec> {
        let p = plan(self.targets[i], &self.prev_rect(i), self.stride, feat_height, feat_width, self.config.search_scale, i)?;
        Ok(p.roi)
    }

    fn advance(&mut self, i: usize, p: &BoxPlan, peak: &Peak) {
        let new_row = (p.roi.search_cells.row + peak.row) as i64;
        let new_col = (p.roi.search_cells.col + peak.col) as i64;
        let s = self.stride as f64;
        let (cx, cy) = self.centers[i];
        let cx = (cx + (new_col - p.prev_col) as f64 * s).clamp(0.0, self.frame_width);
        let cy = (cy + (new_row - p.prev_row) as f64 * s).clamp(0.0, self.frame_height);
        self.centers[i] = (cx, cy);
    }

    fn emit(&self, fid: u32) -> Vec<BoundingBox> {
        self.boxes
            .iter()
            .zip(&self.centers)
            .map(|(b, &(cx, cy))| BoundingBox {
                rect: Rect { x: cx - b.rect.w / 2.0, y: cy - b.rect.h / 2.0, w: b.rect.w, h: b.rect.h },
                fid,
                ..*b
            })
            .collect()
    }
}

/// Result of one tracking step.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackStep {
    pub boxes: Vec<BoundingBox>,
    /// Peak response per box; `None` for frozen boxes.
    pub peaks: Vec<Option<f64>>,
}

/// RoI-convolution step: correlates each cached target against a window of
/// `current_feature` in place and moves the box to the best offset. Box size,
/// id and score are carried over from the keyframe detection.
pub fn roi_track_all(state: &mut TrackState, current_feature: &Tensor3, fid: u32) -> Result<TrackStep> {
    if current_feature.dims() != state.keyframe_feature.dims() {
        return Err(Error::ShapeMismatch("current feature map differs from keyframe feature map".into()));
    }
    let (fh, fw, c) = current_feature.dims();
    let mut peaks = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let p = match plan(state.targets[i], &state.prev_rect(i), state.stride, fh, fw, state.config.search_scale, i) {
            Ok(p) => p,
            Err(Error::EmptySearchRegion { .. }) => {
                state.frozen[i] = true;
                peaks.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let target = &state.target_feats[i];
        let (th, tw) = (target.height(), target.width());
        let s = p.roi.search_cells;
        let row_len = tw * c;
        let mut best = Peak { row: 0, col: 0, value: f64::NEG_INFINITY };
        for oy in 0..=s.height - th {
            for ox in 0..=s.width - tw {
                let mut acc = 0.0;
                for ty in 0..th {
                    let t = target.offset(ty, 0, 0);
                    let q = current_feature.offset(s.row + oy + ty, s.col + ox, 0);
                    acc += dot(&target.data()[t..t + row_len], &current_feature.data()[q..q + row_len]);
                }
                if acc > best.value {
                    best = Peak { row: oy, col: ox, value: acc };
                }
            }
        }
        state.advance(i, &p, &best);
        peaks.push(Some(best.value));
    }
    state.frame_of_centers = fid;
    Ok(TrackStep { boxes: state.emit(fid), peaks })
}

/// Pixel window whose features are exactly the given cell rectangle.
fn pixel_window(cells: CellRect, stride: usize, rf: usize) -> (usize, usize, usize, usize) {
    (cells.row * stride, cells.col * stride, (cells.height - 1) * stride + rf, (cells.width - 1) * stride + rf)
}

/// Reference path: for every box, crops pixels for the target (keyframe image)
/// and the search region (current image), extracts features from each crop and
/// runs [`response_peak`] on the crops.
pub fn crop_track_all(
    state: &mut TrackState,
    keyframe_image: &Image,
    current_image: &Image,
    extractor: &FeatureExtractor,
    fid: u32,
) -> Result<TrackStep> {
    let (fh, fw) = extractor
        .output_dims(current_image.height(), current_image.width())
        .ok_or(Error::ImageTooSmall { height: current_image.height(), width: current_image.width(), min: extractor.receptive_field() })?;
    let stride = extractor.total_stride();
    let rf = extractor.receptive_field();
    let mut peaks = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let p = match plan(state.targets[i], &state.prev_rect(i), stride, fh, fw, state.config.search_scale, i) {
            Ok(p) => p,
            Err(Error::EmptySearchRegion { .. }) => {
                state.frozen[i] = true;
                peaks.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let (ty, tx, th, tw) = pixel_window(p.roi.target_cells, stride, rf);
        let target = extractor.extract(&keyframe_image.crop(ty, tx, th, tw)?)?;
        let (sy, sx, sh, sw) = pixel_window(p.roi.search_cells, stride, rf);
        let search = extractor.extract(&current_image.crop(sy, sx, sh, sw)?)?;
        let peak = response_peak(&target, &search)?;
        state.advance(i, &p, &peak);
        peaks.push(Some(peak.value));
    }
    state.frame_of_centers = fid;
    Ok(TrackStep { boxes: state.emit(fid), peaks })
}
