//! Least-squares exponent estimates on log-log data.

use serde::Serialize;

use crate::error::{input, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    /// fitted exponent `e` in `value ≈ C·n^e`
    pub slope: f64,
    /// `ln C`
    pub intercept: f64,
    /// sum of squared residuals in log space
    pub residual: f64,
}

/// Ordinary least squares of `ln value` on `ln n`.
pub fn exponent_fit(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return input(format!("exponent fit needs at least 3 points, got {}", points.len()));
    }
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0)) {
        return input(format!("exponent fit needs positive data, got ({n}, {v})"));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return input("exponent fit needs at least two distinct n");
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(ExponentFit { slope, intercept, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_laws() {
        let pts: Vec<(f64, f64)> = [10.0f64, 100.0, 1000.0].iter().map(|&n| (n, 7.0 * n.powf(4.0 / 3.0))).collect();
        let fit = exponent_fit(&pts).unwrap();
        assert!((fit.slope - 4.0 / 3.0).abs() < 1e-12);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-9);
        assert!(fit.residual < 1e-20);

        let pts: Vec<(f64, f64)> = (1..=6).map(|n| (n as f64, (n * n) as f64)).collect();
        assert!((exponent_fit(&pts).unwrap().slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn elekes_totals_fit_four_thirds() {
        let pts: Vec<(f64, f64)> = [64u64, 512, 4096]
            .iter()
            .map(|&n| (n as f64, (n * (n as f64).cbrt().round() as u64 / 2) as f64))
            .collect();
        assert!((exponent_fit(&pts).unwrap().slope - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(exponent_fit(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }
}
