//! Binary masks, exact Euclidean distance transforms and run-length encoding.

use image::GrayImage;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![false; width as usize * height as usize] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<bool>) -> Option<Self> {
        (data.len() == width as usize * height as usize).then_some(Self { width, height, data })
    }

    /// Nonzero pixels are set.
    pub fn from_gray(img: &GrayImage) -> Self {
        let (w, h) = img.dimensions();
        Self { width: w, height: h, data: img.as_raw().iter().map(|&v| v != 0).collect() }
    }

    pub fn to_gray(&self) -> GrayImage {
        let raw = self.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
        GrayImage::from_raw(self.width, self.height, raw).expect("dimensions match")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.data.iter().zip(&other.data).filter(|(&a, &b)| a && b).count()
    }

    pub fn union_count(&self, other: &BinaryMask) -> usize {
        self.data.iter().zip(&other.data).filter(|(&a, &b)| a || b).count()
    }

    /// Squared Euclidean distance from every pixel to the nearest pixel where
    /// `site(x, y)` holds. When `outside_is_site`, the ring of pixels just
    /// outside the frame also counts as sites.
    pub(crate) fn squared_distance_to(
        width: u32,
        height: u32,
        outside_is_site: bool,
        site: impl Fn(u32, u32) -> bool,
    ) -> Vec<f64> {
        let pad = usize::from(outside_is_site);
        let (w, h) = (width as usize + 2 * pad, height as usize + 2 * pad);
        let mut grid = vec![f64::INFINITY; w * h];
        for y in 0..h {
            for x in 0..w {
                let inside = x >= pad && y >= pad && x < w - pad && y < h - pad;
                let is_site = if inside { site((x - pad) as u32, (y - pad) as u32) } else { true };
                if is_site {
                    grid[y * w + x] = 0.0;
                }
            }
        }
        let mut col = vec![0.0; h];
        let mut out = vec![0.0; h];
        for x in 0..w {
            for y in 0..h {
                col[y] = grid[y * w + x];
            }
            edt_1d(&col, &mut out);
            for y in 0..h {
                grid[y * w + x] = out[y];
            }
        }
        let mut row = vec![0.0; w];
        let mut out = vec![0.0; w];
        for y in 0..h {
            row.copy_from_slice(&grid[y * w..(y + 1) * w]);
            edt_1d(&row, &mut out);
            grid[y * w..(y + 1) * w].copy_from_slice(&out);
        }
        if pad == 0 {
            return grid;
        }
        let mut cropped = Vec::with_capacity(width as usize * height as usize);
        for y in pad..h - pad {
            cropped.extend_from_slice(&grid[y * w + pad..y * w + w - pad]);
        }
        cropped
    }

    /// Erosion by a Euclidean disk of `radius`; pixels beyond the frame are background.
    pub fn erode(&self, radius: f64) -> BinaryMask {
        let dist = Self::squared_distance_to(self.width, self.height, true, |x, y| !self.get(x, y));
        let r2 = radius * radius;
        BinaryMask {
            width: self.width,
            height: self.height,
            data: dist.iter().zip(&self.data).map(|(&d, &m)| m && d > r2).collect(),
        }
    }

    /// Dilation by a Euclidean disk of `radius`.
    pub fn dilate(&self, radius: f64) -> BinaryMask {
        let dist = Self::squared_distance_to(self.width, self.height, false, |x, y| self.get(x, y));
        let r2 = radius * radius;
        BinaryMask { width: self.width, height: self.height, data: dist.iter().map(|&d| d <= r2).collect() }
    }

    /// `self \ other`.
    pub fn minus(&self, other: &BinaryMask) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a && !b).collect(),
        }
    }

    /// Band of pixels whose Euclidean distance to the background (or frame edge) is ≤ `radius`.
    pub fn boundary_band(&self, radius: f64) -> BinaryMask {
        self.minus(&self.erode(radius))
    }

    /// Row-major run lengths, alternating unset/set and starting with unset.
    pub fn to_rle(&self) -> Vec<u32> {
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for &v in &self.data {
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
        counts.push(run);
        counts
    }

    pub fn from_rle(width: u32, height: u32, counts: &[u32]) -> Option<Self> {
        let total = width as usize * height as usize;
        let mut data = Vec::with_capacity(total);
        let mut value = false;
        for &c in counts {
            if data.len() + c as usize > total {
                return None;
            }
            data.extend(std::iter::repeat_n(value, c as usize));
            value = !value;
        }
        (data.len() == total).then_some(Self { width, height, data })
    }
}

/// Run-length record for one mask frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RleFrame {
    pub schema_version: u32,
    pub frame_index: usize,
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u32>,
}

/// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), exact for squared distances.
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let mut started = false;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        if !started {
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            started = true;
            continue;
        }
        // z[0] is -inf, so the scan always stops at k >= 0.
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    if !started {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        d[q] = (q as f64 - p as f64).powi(2) + f[p];
    }
}
