//! Deterministic synthetic video: textured rectangles moving over a textured
//! background, with per-frame groundtruth boxes and stable object ids.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::featmap::{Image, Tensor3};
use crate::geometry::{BoundingBox, Rect};
use crate::{seed, Error, Result};

mod dataset;
mod io;

pub use dataset::{build_scheduler_dataset, DatasetConfig, SchedulerDataset};
pub use io::{
    frame_path, list_sequences, load_sequence, read_boxes, read_frames, read_groundtruth, save_sequence, write_boxes, write_frames,
    write_groundtruth, LoadedSequence, BOX_HEADER, GT_HEADER,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Motion {
    Static,
    /// Constant velocity in px/frame, reflecting off the frame edges.
    Linear { vx: f64, vy: f64 },
    /// Drift plus a sinusoidal wobble of the given amplitude and period (frames).
    Sine { vx: f64, vy: f64, ax: f64, ay: f64, period: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: u64,
    pub class_id: u32,
    pub width: usize,
    pub height: usize,
    pub texture_seed: u64,
    /// Top-left position at frame 1.
    pub x: f64,
    pub y: f64,
    pub motion: Motion,
    /// First frame the object is visible (1-based).
    pub enter: u32,
    /// First frame the object is gone, if it leaves.
    pub exit: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub frames: u32,
    pub height: usize,
    pub width: usize,
    pub background_seed: u64,
    pub objects: Vec<ObjectSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtRow {
    pub frame_id: u32,
    pub object_id: u64,
    pub class_id: u32,
    pub rect: Rect,
}

/// Groundtruth rows sorted by `(frame_id, object_id)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundtruthTable {
    pub rows: Vec<GtRow>,
}

impl GroundtruthTable {
    pub fn new(mut rows: Vec<GtRow>) -> GroundtruthTable {
        rows.sort_by_key(|r| (r.frame_id, r.object_id));
        GroundtruthTable { rows }
    }

    pub fn max_frame(&self) -> u32 {
        self.rows.iter().map(|r| r.frame_id).max().unwrap_or(0)
    }

    pub fn boxes_at(&self, frame_id: u32) -> Vec<BoundingBox> {
        let lo = self.rows.partition_point(|r| r.frame_id < frame_id);
        let hi = self.rows.partition_point(|r| r.frame_id <= frame_id);
        self.rows[lo..hi].iter().map(GtRow::to_box).collect()
    }

    /// Boxes for frames `1..=frames`, index 0 holding frame 1.
    pub fn by_frame(&self, frames: u32) -> Vec<Vec<BoundingBox>> {
        let mut out = vec![Vec::new(); frames as usize];
        for r in &self.rows {
            if r.frame_id >= 1 && r.frame_id <= frames {
                out[r.frame_id as usize - 1].push(r.to_box());
            }
        }
        out
    }

    pub fn all_boxes(&self) -> Vec<BoundingBox> {
        self.rows.iter().map(GtRow::to_box).collect()
    }
}

impl GtRow {
    pub fn to_box(&self) -> BoundingBox {
        BoundingBox { rect: self.rect, fid: self.frame_id, score: 1.0, id: Some(self.object_id), class_id: self.class_id }
    }
}

/// Rendered frames plus groundtruth.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub frames: Vec<Image>,
    pub gt: GroundtruthTable,
}

/// Triangle-wave fold of `p` into `[0, span]`.
fn reflect(p: f64, span: f64) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let m = p.rem_euclid(2.0 * span);
    if m > span {
        2.0 * span - m
    } else {
        m
    }
}

impl ObjectSpec {
    pub fn present(&self, frame: u32) -> bool {
        frame >= self.enter && self.exit.is_none_or(|e| frame < e)
    }

    /// Integer top-left position at `frame` inside a `height x width` frame.
    pub fn position(&self, frame: u32, height: usize, width: usize) -> (usize, usize) {
        let t = frame as f64 - 1.0;
        let (dx, dy) = match self.motion {
            Motion::Static => (0.0, 0.0),
            Motion::Linear { vx, vy } => (vx * t, vy * t),
            Motion::Sine { vx, vy, ax, ay, period } => {
                let phase = std::f64::consts::TAU * t / period;
                (vx * t + ax * phase.sin(), vy * t + ay * phase.sin())
            }
        };
        let x = reflect(self.x + dx, (width - self.width) as f64).round() as usize;
        let y = reflect(self.y + dy, (height - self.height) as f64).round() as usize;
        (x, y)
    }
}

fn hash_unit(seed: u64, parts: &[u64]) -> f64 {
    (seed::derive(seed, parts) >> 11) as f64 / (1u64 << 53) as f64
}

fn quantize(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

fn background_pixel(seed: u64, y: usize, x: usize, c: usize, height: usize, width: usize) -> f64 {
    let gy = y as f64 / height as f64;
    let gx = x as f64 / width as f64;
    let phase = hash_unit(seed, &[c as u64, 1]) * std::f64::consts::TAU;
    let wave = 0.12 * (gx * 9.0 + gy * 5.0 + phase).sin() + 0.08 * (gy * 13.0 - gx * 4.0 + 2.0 * phase).cos();
    let block = hash_unit(seed, &[(y / 8) as u64, (x / 8) as u64, c as u64]) - 0.5;
    let grain = hash_unit(seed, &[y as u64, x as u64, c as u64, 7]) - 0.5;
    0.45 + 0.1 * gx - 0.05 * gy + wave + 0.18 * block + 0.06 * grain
}

fn object_pixel(seed: u64, y: usize, x: usize, c: usize, h: usize, w: usize) -> f64 {
    let tint = hash_unit(seed, &[c as u64, 99]);
    let block = hash_unit(seed, &[(y / 4) as u64, (x / 4) as u64, c as u64]);
    let ramp = (y as f64 / h as f64 - x as f64 / w as f64) * 0.2;
    0.15 + 0.3 * tint + 0.5 * block + ramp
}

pub fn validate(spec: &SceneSpec) -> Result<()> {
    if spec.frames == 0 {
        return Err(Error::SpecOverflow("scene needs at least one frame".into()));
    }
    for o in &spec.objects {
        if o.width == 0 || o.height == 0 || o.width > spec.width || o.height > spec.height {
            return Err(Error::SpecOverflow(format!(
                "object {} of size {}x{} does not fit a {}x{} frame",
                o.id, o.width, o.height, spec.width, spec.height
            )));
        }
        if o.enter == 0 || o.exit.is_some_and(|e| e <= o.enter) {
            return Err(Error::SpecOverflow(format!("object {} has an empty lifespan", o.id)));
        }
        if let Motion::Sine { period, .. } = o.motion {
            if !(period > 0.0) {
                return Err(Error::SpecOverflow(format!("object {} has non-positive period", o.id)));
            }
        }
    }
    let mut ids: Vec<u64> = spec.objects.iter().map(|o| o.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::SpecOverflow("duplicate object ids".into()));
    }
    Ok(())
}

/// Renders every frame and its groundtruth. Later objects paint over earlier ones.
pub fn generate(spec: &SceneSpec) -> Result<Sequence> {
    validate(spec)?;
    let (h, w) = (spec.height, spec.width);
    let background = Tensor3::from_fn(h, w, 3, |y, x, c| quantize(background_pixel(spec.background_seed, y, x, c, h, w)));
    let textures: Vec<Tensor3> = spec
        .objects
        .iter()
        .map(|o| Tensor3::from_fn(o.height, o.width, 3, |y, x, c| quantize(object_pixel(o.texture_seed, y, x, c, o.height, o.width))))
        .collect();
    let mut frames = Vec::with_capacity(spec.frames as usize);
    let mut rows = Vec::new();
    for f in 1..=spec.frames {
        let mut img = background.clone();
        for (o, tex) in spec.objects.iter().zip(&textures) {
            if !o.present(f) {
                continue;
            }
            let (x0, y0) = o.position(f, h, w);
            for y in 0..o.height {
                let dst = img.offset(y0 + y, x0, 0);
                let src = tex.offset(y, 0, 0);
                img.data_mut()[dst..dst + 3 * o.width].copy_from_slice(&tex.data()[src..src + 3 * o.width]);
            }
            rows.push(GtRow {
                frame_id: f,
                object_id: o.id,
                class_id: o.class_id,
                rect: Rect::new(x0 as f64, y0 as f64, o.width as f64, o.height as f64)?,
            });
        }
        frames.push(img);
    }
    Ok(Sequence { frames, gt: GroundtruthTable::new(rows) })
}

/// Parameters of a randomly drawn suite of scenes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub sequences: usize,
    pub frames: u32,
    pub height: usize,
    pub width: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub classes: u32,
    /// Probability that an object does not move.
    pub static_prob: f64,
    /// Probability of a sinusoidal trajectory.
    pub sine_prob: f64,
    /// Probability of a fast linear trajectory.
    pub fast_prob: f64,
    /// Speed range (px/frame) of slow linear motion.
    pub slow_speed: [f64; 2],
    /// Speed range (px/frame) of fast linear motion.
    pub fast_speed: [f64; 2],
    /// Probability that an object enters late or leaves early.
    pub event_prob: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            sequences: 20,
            frames: 100,
            height: 96,
            width: 160,
            min_objects: 1,
            max_objects: 3,
            min_size: 32,
            max_size: 44,
            classes: 3,
            static_prob: 0.25,
            sine_prob: 0.2,
            fast_prob: 0.2,
            slow_speed: [0.3, 1.5],
            fast_speed: [3.0, 6.0],
            event_prob: 0.35,
        }
    }
}

fn overlaps_over_time(a: &ObjectSpec, b: &ObjectSpec, frames: u32, h: usize, w: usize) -> bool {
    const GAP: usize = 2;
    (1..=frames).any(|f| {
        if !a.present(f) || !b.present(f) {
            return false;
        }
        let (ax, ay) = a.position(f, h, w);
        let (bx, by) = b.position(f, h, w);
        ax < bx + b.width + GAP && bx < ax + a.width + GAP && ay < by + b.height + GAP && by < ay + a.height + GAP
    })
}

fn random_speed(rng: &mut impl Rng, range: [f64; 2]) -> (f64, f64) {
    let speed = rng.random_range(range[0]..=range[1]);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    (speed * angle.cos(), speed * angle.sin())
}

/// Draws one scene. Objects whose trajectories would touch an accepted object
/// are redrawn, so scenes are occlusion-free.
pub fn random_scene(cfg: &SuiteConfig, seed: u64, index: u64) -> Result<SceneSpec> {
    if cfg.min_size > cfg.max_size || cfg.max_size > cfg.height.min(cfg.width) || cfg.min_objects > cfg.max_objects || cfg.min_size == 0 {
        return Err(Error::SpecOverflow("object size/count ranges are inconsistent with the frame".into()));
    }
    if cfg.classes == 0 || cfg.frames == 0 {
        return Err(Error::SpecOverflow("need at least one class and one frame".into()));
    }
    let mut rng = seed::rng(seed, &[0x5ce4e, index]);
    let n_objects = rng.random_range(cfg.min_objects..=cfg.max_objects);
    let mut objects: Vec<ObjectSpec> = Vec::new();
    let mut next_id = 1u64;
    for _ in 0..n_objects {
        for _attempt in 0..60 {
            let width = rng.random_range(cfg.min_size..=cfg.max_size);
            let height = rng.random_range(cfg.min_size..=cfg.max_size);
            let roll: f64 = rng.random();
            let motion = if roll < cfg.static_prob {
                Motion::Static
            } else if roll < cfg.static_prob + cfg.sine_prob {
                let (vx, vy) = random_speed(&mut rng, cfg.slow_speed);
                let period = rng.random_range(20.0..60.0);
                Motion::Sine { vx: vx * 0.5, vy: vy * 0.5, ax: rng.random_range(2.0..10.0), ay: rng.random_range(0.0..4.0), period }
            } else if roll < cfg.static_prob + cfg.sine_prob + cfg.fast_prob {
                let (vx, vy) = random_speed(&mut rng, cfg.fast_speed);
                Motion::Linear { vx, vy }
            } else {
                let (vx, vy) = random_speed(&mut rng, cfg.slow_speed);
                Motion::Linear { vx, vy }
            };
            let (mut enter, mut exit) = (1, None);
            if cfg.frames > 20 && rng.random_bool(cfg.event_prob.clamp(0.0, 1.0)) {
                let half = cfg.frames / 2;
                match rng.random_range(0..3) {
                    0 => enter = rng.random_range(10..=half),
                    1 => exit = Some(rng.random_range(half..=cfg.frames - 10)),
                    _ => {
                        enter = rng.random_range(10..=half.saturating_sub(5).max(10));
                        exit = Some(rng.random_range(half + 5..=cfg.frames - 5));
                    }
                }
            }
            let candidate = ObjectSpec {
                id: next_id,
                class_id: rng.random_range(0..cfg.classes),
                width,
                height,
                texture_seed: rng.random(),
                x: rng.random_range(0.0..=(cfg.width - width) as f64),
                y: rng.random_range(0.0..=(cfg.height - height) as f64),
                motion,
                enter,
                exit,
            };
            if objects.iter().all(|o| !overlaps_over_time(o, &candidate, cfg.frames, cfg.height, cfg.width)) {
                objects.push(candidate);
                next_id += 1;
                break;
            }
        }
    }
    Ok(SceneSpec { frames: cfg.frames, height: cfg.height, width: cfg.width, background_seed: rng.random(), objects })
}

/// The scene specs of a whole suite, one per sequence.
pub fn suite_scenes(cfg: &SuiteConfig, seed: u64) -> Result<Vec<SceneSpec>> {
    (0..cfg.sequences as u64).map(|i| random_scene(cfg, seed, i)).collect()
}

/// Conventional directory name of sequence `i`.
pub fn sequence_name(i: usize) -> String {
    format!("seq_{:03}", i)
}
