use image::{Rgb, RgbImage};

use super::Homography;

/// Snap sample coordinates this close to an integer onto it.
const SNAP: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP {
        r
    } else {
        v
    }
}

/// Resample `frame` under `h` (source → destination) by inverse mapping with
/// bilinear interpolation. Samples outside the source frame are black.
pub fn warp_frame(h: &Homography, frame: &RgbImage) -> RgbImage {
    let (w, hgt) = frame.dimensions();
    let inv = h.inverse();
    let max_x = f64::from(w) - 1.0;
    let max_y = f64::from(hgt) - 1.0;
    RgbImage::from_fn(w, hgt, |x, y| {
        let Some([sx, sy]) = inv.apply_point([f64::from(x), f64::from(y)]) else {
            return Rgb([0, 0, 0]);
        };
        let (sx, sy) = (snap(sx), snap(sy));
        if !(sx >= 0.0 && sy >= 0.0 && sx <= max_x && sy <= max_y) {
            return Rgb([0, 0, 0]);
        }
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as u32, y0 as u32);
        let x1 = (x0 + 1).min(w - 1);
        let y1 = (y0 + 1).min(hgt - 1);
        let p00 = frame.get_pixel(x0, y0).0;
        let p10 = frame.get_pixel(x1, y0).0;
        let p01 = frame.get_pixel(x0, y1).0;
        let p11 = frame.get_pixel(x1, y1).0;
        let mut out = [0u8; 3];
        for c in 0..3 {
            let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
            let bottom = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            out[c] = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        Rgb(out)
    })
}
