use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{covariance_norms, CovarianceNorms};
use crate::error::{Error, Result};
use crate::grassmann::Covariance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSample {
    pub j: i32,
    pub norms: CovarianceNorms,
}

impl ScaleSample {
    pub fn from_covariance(j: i32, cov: &Covariance) -> Self {
        ScaleSample { j, norms: covariance_norms(cov) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// 95% interval from the Student t quantile; `slope ± 0` for exact fits.
    pub ci95: (f64, f64),
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCountingFit {
    pub m_scale: f64,
    pub d: usize,
    pub estimates: Vec<SlopeEstimate>,
}

impl PowerCountingFit {
    pub fn get(&self, quantity: &str) -> Option<&SlopeEstimate> {
        self.estimates.iter().find(|e| e.quantity == quantity)
    }
}

/// Least-squares slopes of `log_M(norm)` against `j` for `sup_hat`,
/// `l1_hat`, `l1_pos` and `𝔠`.
pub fn power_counting_fit(samples: &[ScaleSample], m_scale: f64, d: usize) -> Result<PowerCountingFit> {
    let mut js: Vec<i32> = samples.iter().map(|s| s.j).collect();
    js.sort_unstable();
    js.dedup();
    if js.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} distinct scales, need at least 3", js.len())));
    }
    if !(m_scale > 1.0) {
        return Err(Error::DegenerateFit(format!("M = {m_scale} must exceed 1")));
    }
    let quantities: [(&str, fn(&CovarianceNorms) -> f64, String); 4] = [
        ("sup_hat", |n| n.sup_hat, "+1".into()),
        ("l1_hat", |n| n.l1_hat, "-1".into()),
        ("l1_pos", |n| n.l1_pos, format!("<= {d}")),
        ("frak_c", |n| n.frak_c(), format!("{}", d + 1)),
    ];
    let x: Vec<f64> = samples.iter().map(|s| s.j as f64).collect();
    let mut estimates = Vec::new();
    for (name, get, expected) in quantities {
        let mut y = Vec::with_capacity(samples.len());
        for s in samples {
            let v = get(&s.norms);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::DegenerateFit(format!("{name} = {v} at j = {}", s.j)));
            }
            y.push(v.ln() / m_scale.ln());
        }
        let (slope, intercept, stderr) = least_squares(&x, &y);
        let half = if x.len() > 2 && stderr > 0.0 {
            let t = StudentsT::new(0.0, 1.0, (x.len() - 2) as f64)
                .map_err(|e| Error::DegenerateFit(e.to_string()))?;
            t.inverse_cdf(0.975) * stderr
        } else {
            0.0
        };
        estimates.push(SlopeEstimate {
            quantity: name.into(),
            slope,
            intercept,
            stderr,
            ci95: (slope - half, slope + half),
            expected,
        });
    }
    Ok(PowerCountingFit { m_scale, d, estimates })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, intercept, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let (s, i, e) = least_squares(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && e < 1e-7);
    }
}
