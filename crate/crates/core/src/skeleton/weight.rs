use image::RgbImage;

use super::topology::Rgb8;
use super::SkeletonError;
use crate::mask::BinaryMask;

/// Per-pixel loss weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

impl WeightMap {
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }
}

/// Pixels that differ from `background`.
pub fn occupancy(frame: &RgbImage, background: Rgb8) -> BinaryMask {
    BinaryMask::from_fn(frame.width(), frame.height(), |x, y| frame.get_pixel(x, y).0 != background)
}

/// `weight` within Euclidean `dilation_radius` of any occupied pixel, 1 elsewhere.
pub fn region_weight_mask(
    occupied: &BinaryMask,
    dilation_radius: f64,
    weight: f32,
) -> Result<WeightMap, SkeletonError> {
    if !(weight >= 1.0 && weight.is_finite()) {
        return Err(SkeletonError::InvalidInput(format!("weight must be >= 1, got {weight}")));
    }
    if !(dilation_radius >= 0.0) {
        return Err(SkeletonError::InvalidInput(format!(
            "dilation radius must be >= 0, got {dilation_radius}"
        )));
    }
    let region = occupied.dilate(dilation_radius);
    Ok(WeightMap {
        width: occupied.width(),
        height: occupied.height(),
        data: region.as_slice().iter().map(|&m| if m { weight } else { 1.0 }).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_all_ones() {
        let m = region_weight_mask(&BinaryMask::new(10, 8), 3.0, 5.0).unwrap();
        assert!(m.data.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn zero_dilation_matches_occupancy() {
        let occ = BinaryMask::from_fn(10, 10, |x, y| (x + y) % 3 == 0);
        let m = region_weight_mask(&occ, 0.0, 2.0).unwrap();
        for (w, &o) in m.data.iter().zip(occ.as_slice()) {
            assert_eq!(*w == 2.0, o);
        }
    }

    #[test]
    fn single_pixel_disk() {
        let mut occ = BinaryMask::new(20, 20);
        occ.set(10, 10, true);
        let m = region_weight_mask(&occ, 3.0, 5.0).unwrap();
        assert_eq!(m.data.iter().filter(|&&w| w == 5.0).count(), 29);
        assert_eq!(m.get(13, 10), 5.0);
        assert_eq!(m.get(13, 11), 1.0);
    }

    #[test]
    fn occupancy_from_frame() {
        let mut f = RgbImage::new(4, 4);
        f.put_pixel(1, 2, image::Rgb([0, 0, 1]));
        let occ = occupancy(&f, [0, 0, 0]);
        assert_eq!(occ.count(), 1);
        assert!(occ.get(1, 2));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(region_weight_mask(&BinaryMask::new(2, 2), 1.0, 0.5).is_err());
        assert!(region_weight_mask(&BinaryMask::new(2, 2), -1.0, 2.0).is_err());
    }
}
