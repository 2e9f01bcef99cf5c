//! Small regression and binomial helpers.

use serde::{Deserialize, Serialize};

/// Least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    /// Standard error of the slope (NaN with fewer than three points).
    pub slope_se: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// 95% half-width of the slope.
    pub fn slope_ci95(&self) -> f64 {
        1.96 * self.slope_se
    }
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if x.len() > 2 && sxx > 0.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { intercept, slope, r2, slope_se }
}

/// 95% normal-approximation half-width for a binomial proportion.
pub fn ci95(hits: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let p = hits as f64 / trials as f64;
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.slope_se.abs() < 1e-12);
    }

    #[test]
    fn ci_half_width() {
        assert_eq!(ci95(10, 10), 0.0);
        assert!((ci95(50, 100) - 1.96 * 0.05).abs() < 1e-12);
    }
}
