//! Seeded RANSAC around the normalized DLT.
//!
//! Minimal samples are drawn with ChaCha8 seeded from `seed` via
//! `SeedableRng::seed_from_u64`, using 32-bit index draws only, so a given
//! `(pairs, params)` produces the same model on every platform.
//!
//! Sampling stops early once `ln(1 - confidence) / ln(1 - w^4)` draws have
//! been made, `w` being the best inlier ratio so far.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::homography::{estimate_homography_dlt, is_collinear, symmetric_transfer_error};
use super::{Correspondence, GeomError, Homography};

const REFIT_ROUNDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    pub threshold_px: f64,
    pub max_iters: u32,
    pub seed: u64,
    /// Probability of having drawn one all-inlier sample before stopping; 1 disables early stopping.
    pub confidence: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self { threshold_px: 1.0, max_iters: 2000, seed: 0, confidence: 0.999 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub homography: Homography,
    pub inliers: Vec<bool>,
}

impl RansacResult {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }

    pub fn inlier_ratio(&self) -> f64 {
        if self.inliers.is_empty() {
            0.0
        } else {
            self.inlier_count() as f64 / self.inliers.len() as f64
        }
    }
}

struct Consensus {
    mask: Vec<bool>,
    count: usize,
    cost: f64,
}

fn consensus(h: &Homography, pairs: &[Correspondence], threshold: f64) -> Consensus {
    let h_inv = h.inverse();
    let mut mask = Vec::with_capacity(pairs.len());
    let (mut count, mut cost) = (0, 0.0);
    for c in pairs {
        let e = symmetric_transfer_error(h, &h_inv, c);
        let inlier = e <= threshold;
        if inlier {
            count += 1;
            cost += e;
        }
        mask.push(inlier);
    }
    Consensus { mask, count, cost }
}

fn better(a: &Consensus, b: &Consensus) -> bool {
    a.count > b.count || (a.count == b.count && a.cost < b.cost)
}

/// Draws needed to see an all-inlier sample with probability `confidence`.
fn required_iters(inlier_ratio: f64, confidence: f64, max_iters: u32) -> u32 {
    let p_good = inlier_ratio.powi(4);
    if confidence >= 1.0 || p_good <= 0.0 {
        return max_iters;
    }
    if p_good >= 1.0 {
        return 1;
    }
    let n = ((1.0 - confidence).ln() / (1.0 - p_good).ln()).ceil();
    if n.is_finite() && n < f64::from(max_iters) {
        (n as u32).max(1)
    } else {
        max_iters
    }
}

fn draw_sample(rng: &mut ChaCha8Rng, n: u32) -> [usize; 4] {
    let mut idx = [0usize; 4];
    let mut k = 0;
    while k < 4 {
        let i = rng.random_range(0..n) as usize;
        if !idx[..k].contains(&i) {
            idx[k] = i;
            k += 1;
        }
    }
    idx
}

pub fn estimate_homography_ransac(
    pairs: &[Correspondence],
    params: &RansacParams,
) -> Result<RansacResult, GeomError> {
    if pairs.len() < 4 {
        return Err(GeomError::TooFewPairs(pairs.len()));
    }
    if !(params.threshold_px > 0.0 && params.threshold_px.is_finite()) {
        return Err(GeomError::InvalidInput(format!("threshold_px must be > 0, got {}", params.threshold_px)));
    }
    if !(0.0..=1.0).contains(&params.confidence) {
        return Err(GeomError::InvalidInput(format!("confidence must be in [0, 1], got {}", params.confidence)));
    }
    if let Some(i) = pairs.iter().position(|c| !c.is_valid()) {
        return Err(GeomError::InvalidInput(format!("correspondence {i} is not finite or has negative weight")));
    }
    let n = u32::try_from(pairs.len())
        .map_err(|_| GeomError::InvalidInput("too many correspondences".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Homography, Consensus)> = None;
    let mut limit = params.max_iters;
    let mut iter = 0;
    while iter < limit {
        iter += 1;
        let idx = draw_sample(&mut rng, n);
        let sample: Vec<Correspondence> = idx.iter().map(|&i| pairs[i]).collect();
        let src: Vec<_> = sample.iter().map(|c| c.src).collect();
        let dst: Vec<_> = sample.iter().map(|c| c.dst).collect();
        if is_collinear(&src) || is_collinear(&dst) {
            continue;
        }
        let Ok(h) = estimate_homography_dlt(&sample) else { continue };
        let cons = consensus(&h, pairs, params.threshold_px);
        if best.as_ref().is_none_or(|(_, b)| better(&cons, b)) {
            limit = limit.min(required_iters(cons.count as f64 / pairs.len() as f64, params.confidence, params.max_iters));
            best = Some((h, cons));
        }
    }

    let Some((mut model, mut cons)) = best else {
        return Err(GeomError::NoConsensus { best: 0 });
    };
    if cons.count < 4 {
        return Err(GeomError::NoConsensus { best: cons.count });
    }
    for _ in 0..REFIT_ROUNDS {
        let inliers: Vec<Correspondence> =
            pairs.iter().zip(&cons.mask).filter(|(_, &m)| m).map(|(c, _)| *c).collect();
        let Ok(refit) = estimate_homography_dlt(&inliers) else { break };
        let refit_cons = consensus(&refit, pairs, params.threshold_px);
        if refit_cons.count < cons.count {
            break;
        }
        let unchanged = refit_cons.mask == cons.mask;
        model = refit;
        cons = refit_cons;
        if unchanged {
            break;
        }
    }
    Ok(RansacResult { homography: model, inliers: cons.mask })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_pairs(h: &Homography) -> Vec<Correspondence> {
        let mut out = Vec::new();
        for i in 0..5 {
            for j in 0..4 {
                let p = [10.0 + 30.0 * f64::from(i), 15.0 + 25.0 * f64::from(j)];
                out.push(Correspondence::new(p, h.apply_point(p).unwrap()));
            }
        }
        out
    }

    #[test]
    fn clean_data_all_inliers() {
        let h = Homography::from_row_major(&[1.02, 0.01, 3.0, -0.02, 0.98, -4.0, 1e-5, -2e-5, 1.0]).unwrap();
        let pairs = grid_pairs(&h);
        let res = estimate_homography_ransac(&pairs, &RansacParams::default()).unwrap();
        assert!(res.inliers.iter().all(|&b| b));
        for c in &pairs {
            let p = res.homography.apply_point(c.src).unwrap();
            assert!((p[0] - c.dst[0]).abs() < 1e-6 && (p[1] - c.dst[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn no_consensus_error() {
        // Every sample is collinear in the source, so no model is ever fitted.
        let pairs: Vec<_> =
            (0..8).map(|i| Correspondence::new([f64::from(i) * 10.0, 5.0], [f64::from(i * i), f64::from(i)])).collect();
        let params = RansacParams { threshold_px: 1e-9, max_iters: 50, seed: 1, ..RansacParams::default() };
        assert!(matches!(estimate_homography_ransac(&pairs, &params), Err(GeomError::NoConsensus { .. })));
    }

    #[test]
    fn rejects_bad_threshold() {
        let pairs = grid_pairs(&Homography::identity());
        let params = RansacParams { threshold_px: 0.0, ..Default::default() };
        assert!(matches!(estimate_homography_ransac(&pairs, &params), Err(GeomError::InvalidInput(_))));
    }

    #[test]
    fn required_iters_cases() {
        assert_eq!(required_iters(1.0, 0.999, 2000), 1);
        assert_eq!(required_iters(0.0, 0.999, 2000), 2000);
        assert_eq!(required_iters(0.7, 1.0, 2000), 2000);
        // 0.7^4 = 0.2401: ln(0.001) / ln(0.7599) = 25.1
        assert_eq!(required_iters(0.7, 0.999, 2000), 26);
        assert_eq!(required_iters(0.1, 0.999, 2000), 2000);
    }

    #[test]
    fn rejects_bad_confidence() {
        let pairs = grid_pairs(&Homography::identity());
        let params = RansacParams { confidence: 1.5, ..Default::default() };
        assert!(matches!(estimate_homography_ransac(&pairs, &params), Err(GeomError::InvalidInput(_))));
    }
}
