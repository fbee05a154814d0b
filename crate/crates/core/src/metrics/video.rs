use image::RgbImage;
use rayon::prelude::*;

use super::{check_clips, stable_mean, MaskTrack, MetricsError, VideoClip};
use crate::mask::BinaryMask;

/// Reported PSNR for identical inputs, and the ceiling for all others.
pub const PSNR_CAP_DB: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// PSNR in dB over all pixels, channels and frames.
pub fn psnr(a: &VideoClip, b: &VideoClip) -> Result<f64, MetricsError> {
    check_clips(a, b)?;
    let sq: u64 = a
        .frames()
        .par_iter()
        .zip(b.frames())
        .map(|(fa, fb)| {
            fa.as_raw()
                .iter()
                .zip(fb.as_raw())
                .map(|(&x, &y)| {
                    let d = u64::from(x.abs_diff(y));
                    d * d
                })
                .sum::<u64>()
        })
        .sum();
    if sq == 0 {
        return Ok(PSNR_CAP_DB);
    }
    let n = a.len() * a.frames()[0].as_raw().len();
    let mse = sq as f64 / n as f64;
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP_DB))
}

/// Luma plane as `f64`, row-major.
pub(crate) fn luma(img: &RgbImage) -> Vec<f64> {
    img.pixels().map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])).collect()
}

/// Normalized 1D Gaussian of the given length.
pub(crate) fn gaussian_kernel(sigma: f64, len: usize) -> Vec<f64> {
    let c = (len as f64 - 1.0) / 2.0;
    let k: Vec<f64> = (0..len).map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable correlation keeping only fully interior windows.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * tmp[(y + i) * ow + x]).sum();
        }
    }
    out
}

fn ssim_frame(a: &RgbImage, b: &RgbImage, k: &[f64]) -> f64 {
    let (w, h) = (a.width() as usize, a.height() as usize);
    let (la, lb) = (luma(a), luma(b));
    let aa: Vec<f64> = la.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = lb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(&la, w, h, k);
    let mu_b = filter_valid(&lb, w, h, k);
    let e_aa = filter_valid(&aa, w, h, k);
    let e_bb = filter_valid(&bb, w, h, k);
    let e_ab = filter_valid(&ab, w, h, k);
    let mut map = Vec::with_capacity(mu_a.len());
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        map.push(((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2)));
    }
    map.iter().sum::<f64>() / map.len() as f64
}

/// Mean over frames of grayscale SSIM with an 11×11 Gaussian window (σ = 1.5),
/// averaged over fully interior windows.
pub fn ssim(a: &VideoClip, b: &VideoClip) -> Result<f64, MetricsError> {
    check_clips(a, b)?;
    let (w, h) = a.dimensions();
    if (w as usize) < SSIM_WINDOW || (h as usize) < SSIM_WINDOW {
        return Err(MetricsError::InvalidInput(format!("frames of {w}x{h} are smaller than the {SSIM_WINDOW}px window")));
    }
    let k = gaussian_kernel(SSIM_SIGMA, SSIM_WINDOW);
    let per_frame: Vec<f64> = a.frames().par_iter().zip(b.frames()).map(|(fa, fb)| ssim_frame(fa, fb, &k)).collect();
    Ok(stable_mean(&per_frame).expect("clips are nonempty"))
}

/// Gaussian blur with clamp-to-edge borders; σ = 0 returns the input.
pub(crate) fn blur(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let r = (3.0 * sigma).ceil() as usize;
    let k = gaussian_kernel(sigma, 2 * r + 1);
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] =
                k.iter().enumerate().map(|(i, kv)| kv * src[y * w + clamp(x as isize + i as isize - r as isize, w)]).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] =
                k.iter().enumerate().map(|(i, kv)| kv * tmp[clamp(y as isize + i as isize - r as isize, h) * w + x]).sum();
        }
    }
    out
}

/// Pixels whose blurred luma changes by more than `tau` between consecutive frames.
pub fn motion_mask(clip: &VideoClip, tau: f64, blur_sigma: f64) -> Result<MaskTrack, MetricsError> {
    if clip.len() < 2 {
        return Err(MetricsError::InvalidInput("motion masks need at least two frames".into()));
    }
    if !(tau.is_finite() && blur_sigma.is_finite() && blur_sigma >= 0.0) {
        return Err(MetricsError::InvalidInput(format!("bad motion parameters tau={tau} sigma={blur_sigma}")));
    }
    let (w, h) = clip.dimensions();
    let planes: Vec<Vec<f64>> =
        clip.frames().par_iter().map(|f| blur(&luma(f), w as usize, h as usize, blur_sigma)).collect();
    let masks = planes
        .windows(2)
        .map(|p| {
            let data = p[0].iter().zip(&p[1]).map(|(a, b)| (a - b).abs() > tau).collect();
            BinaryMask::from_vec(w, h, data).expect("plane matches frame size")
        })
        .collect();
    MaskTrack::new(masks)
}

/// Intersection over union of the two clips' motion-mask volumes; 1.0 when
/// neither clip moves.
pub fn st_iou(gen: &VideoClip, gt: &VideoClip, tau: f64, blur_sigma: f64) -> Result<f64, MetricsError> {
    Ok(st_iou_counts(gen, gt, tau, blur_sigma)?.value())
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct VolumeCounts {
    pub intersection: usize,
    pub union: usize,
}

impl VolumeCounts {
    pub fn value(self) -> f64 {
        if self.union == 0 {
            1.0
        } else {
            self.intersection as f64 / self.union as f64
        }
    }
}

pub(crate) fn st_iou_counts(gen: &VideoClip, gt: &VideoClip, tau: f64, blur_sigma: f64) -> Result<VolumeCounts, MetricsError> {
    check_clips(gen, gt)?;
    let mg = motion_mask(gen, tau, blur_sigma)?;
    let mt = motion_mask(gt, tau, blur_sigma)?;
    let (mut intersection, mut union) = (0, 0);
    for (a, b) in mg.frames().iter().zip(mt.frames()) {
        intersection += a.intersection_count(b);
        union += a.union_count(b);
    }
    Ok(VolumeCounts { intersection, union })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant(v: u8, n: usize) -> VideoClip {
        VideoClip::new(vec![RgbImage::from_pixel(16, 12, Rgb([v; 3])); n], 30.0).unwrap()
    }

    fn random_clip(seed: u64, w: u32, h: u32, n: usize) -> VideoClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = (0..n).map(|_| RgbImage::from_fn(w, h, |_, _| Rgb([rng.random(), rng.random(), rng.random()]))).collect();
        VideoClip::new(frames, 30.0).unwrap()
    }

    #[test]
    fn psnr_cap_and_closed_form() {
        assert_eq!(psnr(&constant(7, 2), &constant(7, 2)).unwrap(), PSNR_CAP_DB);
        let v = psnr(&constant(100, 2), &constant(110, 2)).unwrap();
        assert!((v - 10.0 * (65025.0f64 / 100.0).log10()).abs() < 1e-12);
        assert!((v - 28.13).abs() < 0.01);
        assert!(psnr(&constant(0, 2), &constant(0, 3)).is_err());
    }

    /// Direct double loop over every window position.
    fn ssim_oracle(a: &RgbImage, b: &RgbImage) -> f64 {
        let g: Vec<f64> = (0..11).map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp()).collect();
        let gs: f64 = g.iter().sum();
        let lum = |im: &RgbImage, x: u32, y: u32| {
            let p = im.get_pixel(x, y);
            0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])
        };
        let (w, h) = a.dimensions();
        let mut total = 0.0;
        let mut count = 0;
        for y0 in 0..=h - 11 {
            for x0 in 0..=w - 11 {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for j in 0..11 {
                    for i in 0..11 {
                        let wt = g[i as usize] * g[j as usize] / (gs * gs);
                        let (va, vb) = (lum(a, x0 + i, y0 + j), lum(b, x0 + i, y0 + j));
                        ma += wt * va;
                        mb += wt * vb;
                        saa += wt * va * va;
                        sbb += wt * vb * vb;
                        sab += wt * va * vb;
                    }
                }
                let (c1, c2) = (6.5025, 58.5225);
                let num = (2.0 * ma * mb + c1) * (2.0 * (sab - ma * mb) + c2);
                let den = (ma * ma + mb * mb + c1) * (saa - ma * ma + sbb - mb * mb + c2);
                total += num / den;
                count += 1;
            }
        }
        total / f64::from(count)
    }

    #[test]
    fn ssim_matches_direct_summation() {
        let (a, b) = (random_clip(1, 23, 17, 2), random_clip(2, 23, 17, 2));
        let oracle = (ssim_oracle(&a.frames()[0], &b.frames()[0]) + ssim_oracle(&a.frames()[1], &b.frames()[1])) / 2.0;
        assert!((ssim(&a, &b).unwrap() - oracle).abs() < 1e-6);
        assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ssim_identity_and_anticorrelation() {
        let a = random_clip(3, 20, 20, 1);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        let pattern = RgbImage::from_fn(20, 20, |x, y| Rgb([if (x / 2 + y / 3) % 2 == 0 { 0 } else { 255 }; 3]));
        let mut inverted = pattern.clone();
        inverted.pixels_mut().for_each(|p| p.0 = p.0.map(|v| 255 - v));
        let s = ssim(&VideoClip::new(vec![pattern], 30.0).unwrap(), &VideoClip::new(vec![inverted], 30.0).unwrap()).unwrap();
        assert!(s < 0.0, "{s}");
        assert!(ssim(&constant(0, 1), &VideoClip::new(vec![RgbImage::new(10, 10)], 30.0).unwrap()).is_err());
        let small = VideoClip::new(vec![RgbImage::new(10, 10)], 30.0).unwrap();
        assert!(ssim(&small, &small).is_err());
    }

    #[test]
    fn motion_mask_cases() {
        assert!(motion_mask(&constant(90, 3), 12.0, 1.0).unwrap().frames().iter().all(BinaryMask::is_empty));
        let mut frames = vec![RgbImage::new(8, 8); 2];
        frames[1].put_pixel(3, 5, Rgb([255; 3]));
        let clip = VideoClip::new(frames, 30.0).unwrap();
        let m = motion_mask(&clip, 20.0, 0.0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.frames()[0].count(), 1);
        assert!(m.frames()[0].get(3, 5));
        assert!(motion_mask(&clip, 255.0, 0.0).unwrap().frames()[0].is_empty());
        assert!(motion_mask(&constant(0, 1), 12.0, 1.0).is_err());
    }

    fn moving_block(x0: u32, x1: u32) -> VideoClip {
        let mut frames = vec![RgbImage::new(20, 10); 2];
        for y in 2..6 {
            for x in x0..x1 {
                frames[1].put_pixel(x, y, Rgb([200; 3]));
            }
        }
        VideoClip::new(frames, 30.0).unwrap()
    }

    #[test]
    fn st_iou_cases() {
        let gt = moving_block(4, 12);
        assert_eq!(st_iou(&gt, &gt, 12.0, 0.0).unwrap(), 1.0);
        assert_eq!(st_iou(&constant(5, 3), &constant(9, 3), 12.0, 1.0).unwrap(), 1.0);
        // gen moves only on the left half of gt's region: 16 of 32 pixels
        let gen = moving_block(4, 8);
        assert_eq!(st_iou(&gen, &gt, 12.0, 0.0).unwrap(), 0.5);
        assert_eq!(st_iou(&gt, &gen, 12.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn blur_preserves_constant() {
        let src = vec![42.0; 30];
        assert!(blur(&src, 6, 5, 1.0).iter().all(|v| (v - 42.0).abs() < 1e-12));
    }
}
