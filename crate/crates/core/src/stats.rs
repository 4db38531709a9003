//! Summary statistics and log-log rate fitting.

use crate::error::{Error, Result};
use crate::math;

/// Means below this are treated as numerically zero by rate fits.
pub const RESOLUTION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    /// Sample standard deviation (ddof = 1) over `sqrt(count)`; 0 for one value.
    pub stderr: f64,
    pub count: usize,
}

/// Sums in slice order, so the result depends only on the values and their order.
pub fn mean_and_stderr(values: &[f64]) -> Result<MeanStderr> {
    let count = values.len();
    if count == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    // Shifted by the first value so a constant input has an exact mean and zero spread.
    let pivot = values[0];
    let mut shifted = 0.0;
    for v in values {
        shifted += v - pivot;
    }
    let mean = pivot + shifted / count as f64;
    if count == 1 {
        return Ok(MeanStderr { mean, stderr: 0.0, count });
    }
    let mut ss = 0.0;
    for v in values {
        ss += (v - mean) * (v - mean);
    }
    let sd = math::sqrt(ss / (count - 1) as f64);
    Ok(MeanStderr { mean, stderr: sd / math::sqrt(count as f64), count })
}

/// Ordinary least squares of `ln mean` on `ln n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Residual-based standard error of the slope; 0 with only two points.
    pub slope_stderr: f64,
    pub points: usize,
}

/// `points` are `(n, mean)` pairs. Needs at least 3 of them, all with positive mean.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: points.len() });
    }
    for &(n, mean) in points {
        if !(mean > 0.0) {
            return Err(Error::NonPositiveMean { n, mean });
        }
        if !(n > 0.0) {
            return Err(Error::BadGrid(alloc::format!("sample size {n} is not positive")));
        }
    }
    let m = points.len() as f64;
    let xs = points.iter().map(|p| math::ln(p.0));
    let ys = points.iter().map(|p| math::ln(p.1));
    let x_bar = xs.clone().sum::<f64>() / m;
    let y_bar = ys.clone().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.zip(ys) {
        sxx += (x - x_bar) * (x - x_bar);
        sxy += (x - x_bar) * (y - y_bar);
        syy += (y - y_bar) * (y - y_bar);
    }
    if sxx == 0.0 {
        return Err(Error::BadGrid("all sample sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    let slope_stderr = if points.len() > 2 { math::sqrt(ss_res / (m - 2.0) / sxx) } else { 0.0 };
    Ok(RateFit { slope, intercept, r_squared, slope_stderr, points: points.len() })
}

/// Slope standard error implied by per-point standard errors of the means,
/// propagated through `ln` to first order. `points` are `(n, mean, stderr)`.
pub fn propagated_slope_stderr(points: &[(f64, f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let x_bar = points.iter().map(|p| math::ln(p.0)).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (math::ln(p.0) - x_bar) * (math::ln(p.0) - x_bar)).sum();
    let var: f64 = points
        .iter()
        .map(|&(n, mean, se)| {
            let w = (math::ln(n) - x_bar) / sxx;
            let rel = se / mean;
            w * w * rel * rel
        })
        .sum();
    math::sqrt(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = [1e3, 2e3, 4e3, 8e3].iter().map(|&n| (n, 4.0 / n)).collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.intercept - math::ln(4.0)).abs() < 1e-10);

        let pts: Vec<(f64, f64)> = [1e3, 2e3, 4e3].iter().map(|&n| (n, 3.0 / math::sqrt(n))).collect();
        assert!((fit_rate(&pts).unwrap().slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let err = fit_rate(&[(1.0, 1.0), (2.0, 0.0), (4.0, 0.3)]).unwrap_err();
        assert_eq!(err.kind(), "NonPositiveMean");
        assert_eq!(fit_rate(&[(1.0, 1.0), (2.0, 0.5)]).unwrap_err().kind(), "TooFewPoints");
    }

    #[test]
    fn stderr_uses_sample_deviation() {
        let s = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        // sd = sqrt(5/3), se = sd / 2
        assert!((s.stderr - math::sqrt(5.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!(mean_and_stderr(&[0.7, 0.7, 0.7]).unwrap().stderr < 1e-15);
    }

    #[test]
    fn propagated_error_scales() {
        let pts = [(1e3, 1.0, 0.01), (2e3, 0.5, 0.005), (4e3, 0.25, 0.0025)];
        let a = propagated_slope_stderr(&pts);
        let pts2 = [(1e3, 1.0, 0.02), (2e3, 0.5, 0.01), (4e3, 0.25, 0.005)];
        assert!((propagated_slope_stderr(&pts2) / a - 2.0).abs() < 1e-12);
    }
}
