use serde::{Deserialize, Serialize};

use super::TrackError;

/// Axis-aligned box `(x1, y1, x2, y2)` in pixels with `x1 < x2`, `y1 < y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, TrackError> {
        let b = Self { x1, y1, x2, y2 };
        if !b.is_valid() {
            return Err(TrackError::InvalidInput(format!("box [{x1}, {y1}, {x2}, {y2}] is not well-ordered")));
        }
        Ok(b)
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite()) && self.x1 < self.x2 && self.y1 < self.y2
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { x1: a[0], y1: a[1], x2: a[2], y2: a[3] }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> [f64; 2] {
        [(self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0]
    }

    pub fn lerp(&self, other: &BBox, t: f64) -> BBox {
        let (a, b) = (self.to_array(), other.to_array());
        BBox::from_array(std::array::from_fn(|k| a[k] + (b[k] - a[k]) * t))
    }

    /// Corner-wise extrapolation `self + (self - prev) * steps`; falls back to
    /// `self` if the result is not well-ordered.
    pub fn extrapolate(&self, prev: &BBox, steps: f64) -> BBox {
        let b = prev.lerp(self, 1.0 + steps);
        if b.is_valid() {
            b
        } else {
            *self
        }
    }
}

impl TryFrom<[f64; 4]> for BBox {
    type Error = TrackError;

    fn try_from(a: [f64; 4]) -> Result<Self, Self::Error> {
        BBox::new(a[0], a[1], a[2], a[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

/// Intersection over union; 0 for disjoint boxes.
pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn examples() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(box_iou(&a, &a), 1.0);
        assert_eq!(box_iou(&a, &b(20.0, 20.0, 30.0, 30.0)), 0.0);
        assert!((box_iou(&a, &b(5.0, 0.0, 15.0, 10.0)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn touching_boxes_are_disjoint() {
        assert_eq!(box_iou(&b(0.0, 0.0, 1.0, 1.0), &b(1.0, 0.0, 2.0, 1.0)), 0.0);
    }

    #[test]
    fn rejects_ill_ordered() {
        assert!(BBox::new(5.0, 0.0, 5.0, 1.0).is_err());
        assert!(BBox::new(0.0, f64::NAN, 5.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(x in -50.0f64..50.0, y in -50.0f64..50.0, w in 0.1f64..40.0, h in 0.1f64..40.0,
                                     x2 in -50.0f64..50.0, y2 in -50.0f64..50.0, w2 in 0.1f64..40.0, h2 in 0.1f64..40.0) {
            let a = b(x, y, x + w, y + h);
            let c = b(x2, y2, x2 + w2, y2 + h2);
            let v = box_iou(&a, &c);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, box_iou(&c, &a));
            prop_assert_eq!(box_iou(&a, &a), 1.0);
        }
    }
}
