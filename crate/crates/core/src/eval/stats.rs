use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Pearson product-moment correlation.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::validation("correlation needs at least 2 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("x"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("y"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Grid size closest to `target`; ties go to the smaller size.
pub fn nearest_tested_size(target: usize, grid: &[usize]) -> Option<usize> {
    grid.iter()
        .copied()
        .min_by_key(|&n| (n.abs_diff(target), n))
}

/// `100 · acc(n) / max acc` over the map.
pub fn percent_of_max(accuracy_by_n: &BTreeMap<usize, f64>, n: usize) -> Result<f64> {
    let acc = accuracy_by_n
        .get(&n)
        .ok_or_else(|| Error::validation(format!("no accuracy recorded for n = {n}")))?;
    let max = accuracy_by_n
        .values()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(Error::validation("maximum accuracy must be positive"));
    }
    Ok(100.0 * acc / max)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_and_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert!(
            (pearson_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12
        );
        assert!(
            (pearson_correlation(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12
        );
        // Σdxdy = 1, Σdx² = 2, Σdy² = 2/3
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(matches!(
            pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation("x"))
        ));
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn nearest_examples() {
        let grid = [2, 4, 8, 16, 32, 64, 128];
        assert_eq!(nearest_tested_size(33, &grid), Some(32));
        assert_eq!(nearest_tested_size(61, &grid), Some(64));
        assert_eq!(nearest_tested_size(48, &grid), Some(32));
        assert_eq!(nearest_tested_size(1000, &grid), Some(128));
        assert_eq!(nearest_tested_size(5, &[]), None);
    }

    #[test]
    fn percent_examples() {
        let mut acc = BTreeMap::new();
        acc.insert(4, 0.8);
        acc.insert(8, 0.9);
        assert!((percent_of_max(&acc, 4).unwrap() - 800.0 / 9.0).abs() < 1e-12);
        assert_eq!(percent_of_max(&acc, 8).unwrap(), 100.0);
        assert!(percent_of_max(&acc, 16).is_err());
        let single: BTreeMap<_, _> = [(2, 0.42)].into_iter().collect();
        assert_eq!(percent_of_max(&single, 2).unwrap(), 100.0);
    }

    #[test]
    fn mean_std() {
        let (m, s) = mean_and_stddev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_and_stddev(&[3.0]), (3.0, 0.0));
    }
}
