//! Linear least squares and power-law residual estimation.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Affine/power-law fit summary for a quantity swept against `r`.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Exponent of the power-law remainder from a log–log fit; `None` when
    /// the residuals sit at the numerical floor (nothing left to fit).
    pub residual_exponent: Option<f64>,
    pub r_range: (f64, f64),
    pub max_rel_residual: f64,
}

/// Solve `min ||A c - y||` for the coefficient vector, columns given
/// explicitly. Uses an SVD solve, deterministic for fixed input.
pub fn least_squares(columns: &[&[f64]], y: &[f64]) -> Result<Vec<f64>> {
    let rows = y.len();
    if columns.is_empty() || rows == 0 {
        return Err(Error::FitConditioning("empty design matrix".into()));
    }
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::FitConditioning("column length mismatch".into()));
    }
    if rows < columns.len() {
        return Err(Error::FitConditioning(format!(
            "{} samples cannot determine {} coefficients",
            rows,
            columns.len()
        )));
    }
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let b = DMatrix::from_column_slice(rows, 1, y);
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::FitConditioning(e.to_string()))?;
    Ok(sol.column(0).iter().copied().collect())
}

/// Ordinary affine fit `y = slope * x + intercept`.
pub fn affine(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let c = least_squares(&[x, &vec![1.0; x.len()]], y)?;
    Ok((c[0], c[1]))
}

/// Slope and intercept of `ln|y|` against `ln x`, skipping points below
/// `floor`. Returns `None` when fewer than 3 points survive.
pub fn loglog(x: &[f64], y: &[f64], floor: f64) -> Result<Option<(f64, f64)>> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&xi, &yi) in x.iter().zip(y) {
        if yi.abs() > floor && xi > 0.0 {
            lx.push(xi.ln());
            ly.push(yi.abs().ln());
        }
    }
    if lx.len() < 3 {
        return Ok(None);
    }
    let (slope, intercept) = affine(&lx, &ly)?;
    Ok(Some((slope, intercept)))
}

/// Require the sweep range to span at least `decades` decades.
pub fn require_decades(values: &[f64], decades: f64) -> Result<(f64, f64)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi / lo < 10f64.powf(decades) * (1.0 - 1e-12) {
        return Err(Error::FitConditioning(format!(
            "sweep [{lo:.3e}, {hi:.3e}] spans less than {decades} decades"
        )));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_affine_coefficients() {
        let x: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.5 * v - 1.25).collect();
        let (s, b) = affine(&x, &y).unwrap();
        assert_relative_eq!(s, 3.5, max_relative = 1e-12);
        assert_relative_eq!(b, -1.25, max_relative = 1e-12);
    }

    #[test]
    fn three_column_fit_separates_remainder() {
        // y = 2 x + 5 + 7/x recovered exactly by [x, 1, 1/x] columns.
        let x: Vec<f64> = (1..=12).map(|i| 10f64.powf(1.0 + 2.0 * (i - 1) as f64 / 11.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 5.0 + 7.0 / v).collect();
        let inv: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
        let ones = vec![1.0; x.len()];
        let c = least_squares(&[&x, &ones, &inv], &y).unwrap();
        assert_relative_eq!(c[0], 2.0, max_relative = 1e-10);
        assert_relative_eq!(c[1], 5.0, max_relative = 1e-8);
        assert_relative_eq!(c[2], 7.0, max_relative = 1e-8);
    }

    #[test]
    fn loglog_recovers_power() {
        let x: Vec<f64> = (1..=10).map(|i| 2f64.powi(i)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v.powf(-1.0)).collect();
        let (slope, _) = loglog(&x, &y, 1e-300).unwrap().unwrap();
        assert_relative_eq!(slope, -1.0, max_relative = 1e-10);
    }

    #[test]
    fn loglog_below_floor_is_none() {
        let x = [1.0, 10.0, 100.0, 1000.0];
        let y = [1e-18, -1e-18, 1e-19, 1e-18];
        assert!(loglog(&x, &y, 1e-12).unwrap().is_none());
    }

    #[test]
    fn decade_guard() {
        assert!(require_decades(&[10.0, 1000.0], 2.0).is_ok());
        assert!(matches!(
            require_decades(&[10.0, 500.0], 2.0),
            Err(Error::FitConditioning(_))
        ));
    }
}
