//! OneEuro adaptive low-pass filter.
//!
//! Per step: `dx = (x_i - x̂_{i-1}) · rate` is smoothed with cutoff `d_cutoff`;
//! the signal cutoff is `min_cutoff + beta · |d̂x|` and
//! `x̂_i = α x_i + (1 - α) x̂_{i-1}` with `α = 1 / (1 + τ · rate)`, `τ = 1 / (2π f_c)`.
//! Vector samples share one cutoff driven by the Euclidean norm of `d̂x`.

use serde::{Deserialize, Serialize};

use super::TrackError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OneEuroParams {
    pub min_cutoff: f64,
    pub beta: f64,
    pub d_cutoff: f64,
    pub rate: f64,
}

impl Default for OneEuroParams {
    fn default() -> Self {
        Self { min_cutoff: 1.0, beta: 0.007, d_cutoff: 1.0, rate: 30.0 }
    }
}

impl OneEuroParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        let fields = [
            ("min_cutoff", self.min_cutoff),
            ("beta", self.beta),
            ("d_cutoff", self.d_cutoff),
            ("rate", self.rate),
        ];
        for (name, v) in fields {
            // beta = 0 is the fixed-cutoff special case
            let ok = if name == "beta" { v >= 0.0 } else { v > 0.0 };
            if !ok || !v.is_finite() {
                return Err(TrackError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

pub fn smoothing_factor(cutoff: f64, rate: f64) -> f64 {
    let tau = 1.0 / (2.0 * std::f64::consts::PI * cutoff);
    1.0 / (1.0 + tau * rate)
}

#[derive(Debug, Clone)]
pub struct OneEuroFilter {
    params: OneEuroParams,
    state: Option<(Vec<f64>, Vec<f64>)>,
}

impl OneEuroFilter {
    pub fn new(params: OneEuroParams) -> Result<Self, TrackError> {
        params.validate()?;
        Ok(Self { params, state: None })
    }

    pub fn reset(&mut self) {
        self.state = None;
    }

    pub fn filter(&mut self, x: &[f64]) -> Result<Vec<f64>, TrackError> {
        let p = self.params;
        let Some((prev, prev_dx)) = &mut self.state else {
            self.state = Some((x.to_vec(), vec![0.0; x.len()]));
            return Ok(x.to_vec());
        };
        if prev.len() != x.len() {
            return Err(TrackError::InvalidInput(format!(
                "sample dimension changed from {} to {}",
                prev.len(),
                x.len()
            )));
        }
        let a_d = smoothing_factor(p.d_cutoff, p.rate);
        for k in 0..x.len() {
            let dx = (x[k] - prev[k]) * p.rate;
            prev_dx[k] += a_d * (dx - prev_dx[k]);
        }
        let speed = prev_dx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = smoothing_factor(p.min_cutoff + p.beta * speed, p.rate);
        for k in 0..x.len() {
            prev[k] += a * (x[k] - prev[k]);
        }
        Ok(prev.clone())
    }
}

pub fn one_euro(series: &[Vec<f64>], params: &OneEuroParams) -> Result<Vec<Vec<f64>>, TrackError> {
    let mut f = OneEuroFilter::new(*params)?;
    series.iter().map(|x| f.filter(x)).collect()
}

pub fn one_euro_scalar(series: &[f64], params: &OneEuroParams) -> Result<Vec<f64>, TrackError> {
    let mut f = OneEuroFilter::new(*params)?;
    series.iter().map(|&x| f.filter(&[x]).map(|v| v[0])).collect()
}
