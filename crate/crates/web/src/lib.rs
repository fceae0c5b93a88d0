//! wasm-bindgen surface for the static demo page in `www/`.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use dort_core::eval::{effective_fps, CostModel};
use dort_core::featmap::{FeatureExtractor, Image, Tensor3};
use dort_core::geometry::BoundingBox;
use dort_core::pipeline::{
    run_with_features, DecisionRecord, DecisionSource, DetectorNoise, Mode, PipelineConfig, SimulatedDetector,
};
use dort_core::scheduler::{correlation_layer, Action};
use dort_core::synthdata::{generate, random_scene, GroundtruthTable, SuiteConfig};

const STRIDE: usize = 4;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// A rendered synthetic sequence plus the latest pipeline run over it.
#[wasm_bindgen]
pub struct Scene {
    frames: Vec<Image>,
    features: Vec<Arc<Tensor3>>,
    gt: GroundtruthTable,
    boxes: Vec<BoundingBox>,
    decisions: Vec<DecisionRecord>,
}

#[wasm_bindgen]
impl Scene {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, frames: u32) -> Result<Scene, JsError> {
        let cfg = SuiteConfig { frames, height: 96, width: 160, ..SuiteConfig::default() };
        let seq = generate(&random_scene(&cfg, seed, 0).map_err(js_err)?).map_err(js_err)?;
        let fx = FeatureExtractor::new(0, 3);
        let features = seq.frames.iter().map(|f| fx.extract(f).map(Arc::new)).collect::<Result<_, _>>().map_err(js_err)?;
        Ok(Scene { frames: seq.frames, features, gt: seq.gt, boxes: Vec::new(), decisions: Vec::new() })
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Run the pipeline in `mode` ("fixed" or "oracle"; no trained scheduler ships with the page).
    pub fn run(&mut self, mode: &str, sigma: u32) -> Result<(), JsError> {
        let mode: Mode = mode.parse().map_err(js_err)?;
        let dims = (self.height(), self.width());
        let mut det = SimulatedDetector::new(self.gt.clone(), DetectorNoise::default(), 0, 0, dims).map_err(js_err)?;
        let cfg = PipelineConfig { mode, sigma, ..PipelineConfig::default() };
        let out = run_with_features(&self.features, None, Some(&self.gt), &mut det, None, STRIDE, dims, &cfg).map_err(js_err)?;
        self.boxes = out.boxes;
        self.decisions = out.decisions;
        Ok(())
    }

    /// RGBA bytes of 1-based frame `fid`.
    pub fn rgba(&self, fid: u32) -> Vec<u8> {
        let img = &self.frames[fid as usize - 1];
        let mut out = Vec::with_capacity(img.height() * img.width() * 4);
        for y in 0..img.height() {
            for x in 0..img.width() {
                out.extend(img.pixel(y, x).iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
                out.push(255);
            }
        }
        out
    }

    /// Output boxes of frame `fid`, flattened as x, y, w, h, id.
    pub fn boxes(&self, fid: u32) -> Vec<f64> {
        self.boxes
            .iter()
            .filter(|b| b.fid == fid)
            .flat_map(|b| [b.rect.x, b.rect.y, b.rect.w, b.rect.h, b.id.unwrap_or(0) as f64])
            .collect()
    }

    /// True when frame `fid` was a detect event.
    pub fn detected(&self, fid: u32) -> bool {
        fid == 1 || self.decisions.iter().any(|d| d.frame == fid && d.action == Action::Detect)
    }

    pub fn fps(&self) -> f64 {
        effective_fps(&self.decisions, &CostModel::default())
    }
}

/// Shift a noise frame by (dx, dy) px and report, for every feature cell whose
/// shifted position stays inside the map, the winning correlation offset.
/// Returns a (2d+1)² histogram in row-major (p, q) order.
#[wasm_bindgen]
pub fn correlation_histogram(seed: u64, dx: i32, dy: i32, d: usize) -> Result<Vec<u32>, JsError> {
    let (h, w) = (64, 96);
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut noise = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as f64 / (1u64 << 31) as f64
    };
    let base = Tensor3::from_fn(h, w, 3, |_, _, _| noise());
    let moved = Tensor3::from_fn(h, w, 3, |y, x, c| {
        let (sy, sx) = (y as i64 - dy as i64, x as i64 - dx as i64);
        base.get(sy.rem_euclid(h as i64) as usize, sx.rem_euclid(w as i64) as usize, c)
    });
    let fx = FeatureExtractor::new(0, 3);
    let (a, b) = (fx.extract(&base).map_err(js_err)?, fx.extract(&moved).map_err(js_err)?);
    let corr = correlation_layer(&a, &b, d).map_err(js_err)?;
    let side = 2 * d + 1;
    let mut hist = vec![0; side * side];
    let (fh, fw, _) = a.dims();
    for i in d..fh.saturating_sub(d) {
        for j in d..fw.saturating_sub(d) {
            let (p, q) = corr.best_offset(i, j);
            hist[((p + d as i64) as usize) * side + (q + d as i64) as usize] += 1;
        }
    }
    Ok(hist)
}

/// Effective fps for σ = 1..=max_sigma over `frames` frames: fixed schedule,
/// then a scheduler that always answers track. Flattened as [fixed, track] per σ.
#[wasm_bindgen]
pub fn fps_curve(frames: u32, max_sigma: u32) -> Vec<f64> {
    let cost = CostModel::default();
    let log = |sigma: u32, consult: bool| -> Vec<DecisionRecord> {
        (2..=frames)
            .map(|f| {
                let on_stride = (f - 1) % sigma == 0;
                let (source, action) = match (on_stride, consult) {
                    (true, false) => (DecisionSource::Fixed, Action::Detect),
                    (true, true) => (DecisionSource::Scheduler, Action::Track),
                    (false, _) => (DecisionSource::Stride, Action::Track),
                };
                DecisionRecord { frame: f, source, p_track: None, action, reference: 1, keyframe: 1 }
            })
            .collect()
    };
    (1..=max_sigma).flat_map(|s| [effective_fps(&log(s, false), &cost), effective_fps(&log(s, true), &cost)]).collect()
}
