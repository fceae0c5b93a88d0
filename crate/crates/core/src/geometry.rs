//! Axis-aligned boxes in continuous pixel coordinates.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned rectangle, `(x, y)` is the top-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Rect> {
        let finite = x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite();
        if !finite || w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidRect { x, y, w, h });
        }
        Ok(Rect { x, y, w, h })
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Rect> {
        Rect::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect { x: self.x + dx, y: self.y + dy, ..*self }
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        iou(self, other)
    }

    /// Intersects `self` with `bounds`.
    pub fn clip(&self, bounds: &Rect) -> Result<Rect> {
        clip(self, bounds)
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }
}

pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn clip(r: &Rect, bounds: &Rect) -> Result<Rect> {
    let x0 = r.x.max(bounds.x);
    let y0 = r.y.max(bounds.y);
    let x1 = r.right().min(bounds.right());
    let y1 = r.bottom().min(bounds.bottom());
    if x1 <= x0 || y1 <= y0 {
        return Err(Error::EmptyAfterClip);
    }
    Ok(Rect { x: x0, y: y0, w: x1 - x0, h: y1 - y0 })
}

/// One box of the output set: rectangle, 1-based frame index, confidence,
/// object id (absent for raw detections) and category.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub rect: Rect,
    pub fid: u32,
    pub score: f64,
    pub id: Option<u64>,
    pub class_id: u32,
}

impl BoundingBox {
    pub fn new(rect: Rect, fid: u32, score: f64, class_id: u32) -> BoundingBox {
        BoundingBox { rect, fid, score: score.clamp(0.0, 1.0), id: None, class_id }
    }

    pub fn with_id(mut self, id: u64) -> BoundingBox {
        self.id = Some(id);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x: f64, y: f64, w: f64, h: f64) -> Rect {
        Rect::new(x, y, w, h).unwrap()
    }

    /// Counts unit pixels covered by both integer rects.
    fn pixel_iou(a: (i32, i32, i32, i32), b: (i32, i32, i32, i32)) -> f64 {
        let (mut inter, mut union) = (0u32, 0u32);
        for py in -50..100 {
            for px in -50..100 {
                let ina = px >= a.0 && px < a.0 + a.2 && py >= a.1 && py < a.1 + a.3;
                let inb = px >= b.0 && px < b.0 + b.2 && py >= b.1 && py < b.1 + b.3;
                inter += (ina && inb) as u32;
                union += (ina || inb) as u32;
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_examples() {
        let a = r(3.5, 2.0, 10.0, 7.25);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&r(0.0, 0.0, 10.0, 10.0), &r(20.0, 20.0, 5.0, 5.0)), 0.0);
        let expected = pixel_iou((0, 0, 10, 10), (5, 0, 10, 10));
        assert!((expected - 1.0 / 3.0).abs() < 1e-12);
        assert!((iou(&r(0.0, 0.0, 10.0, 10.0), &r(5.0, 0.0, 10.0, 10.0)) - expected).abs() < 1e-12);
    }

    #[test]
    fn iou_matches_pixel_count_on_integer_rects() {
        let cases = [
            ((0, 0, 10, 10), (3, 4, 6, 9)),
            ((2, 2, 5, 7), (4, 1, 8, 3)),
            ((0, 0, 1, 1), (0, 0, 2, 2)),
            ((10, 10, 20, 5), (15, 12, 2, 30)),
        ];
        for (a, b) in cases {
            let ra = r(a.0 as f64, a.1 as f64, a.2 as f64, a.3 as f64);
            let rb = r(b.0 as f64, b.1 as f64, b.2 as f64, b.3 as f64);
            assert!((iou(&ra, &rb) - pixel_iou(a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(matches!(Rect::new(0.0, 0.0, 0.0, 5.0), Err(Error::InvalidRect { .. })));
        assert!(Rect::new(0.0, 0.0, 5.0, -1.0).is_err());
        assert!(Rect::new(f64::NAN, 0.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn clip_examples() {
        let frame = r(0.0, 0.0, 100.0, 100.0);
        let inside = r(10.0, 20.0, 30.0, 40.0);
        assert_eq!(clip(&inside, &frame).unwrap(), inside);
        assert_eq!(clip(&r(-5.0, 0.0, 10.0, 10.0), &frame).unwrap(), r(0.0, 0.0, 5.0, 10.0));
        assert!(matches!(clip(&r(200.0, 0.0, 10.0, 10.0), &frame), Err(Error::EmptyAfterClip)));
        // touching the edge has zero area
        assert!(clip(&r(-10.0, 0.0, 10.0, 10.0), &frame).is_err());
    }

    fn arb_rect() -> impl Strategy<Value = Rect> {
        (-50.0..50.0f64, -50.0..50.0f64, 0.5..40.0f64, 0.5..40.0f64).prop_map(|(x, y, w, h)| r(x, y, w, h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_rect(), b in arb_rect()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            if a != b {
                prop_assert!(ab < 1.0);
            }
        }

        #[test]
        fn iou_translation_invariant(a in arb_rect(), b in arb_rect(), tx in -64i32..64, ty in -64i32..64) {
            // integer shifts keep coordinates exactly representable
            let (tx, ty) = (tx as f64 * 0.25, ty as f64 * 0.25);
            let before = iou(&a, &b);
            let after = iou(&a.translate(tx, ty), &b.translate(tx, ty));
            prop_assert!((before - after).abs() < 1e-9);
        }
    }
}
