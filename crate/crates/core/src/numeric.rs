//! Small numeric helpers shared across modules: summary statistics, order
//! statistics by linear interpolation, Gaussian kernel density with the
//! Silverman bandwidth rule, and the standard normal density/CDF.

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divides by n).
pub fn population_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Sample variance (divides by n - 1); 0 for fewer than 2 values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Quantile of already-sorted data by linear interpolation of order
/// statistics: position (n-1)q between neighbouring values.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile fraction out of range");
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 >= sorted.len() {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Silverman's rule of thumb: 0.9 min(sd, IQR/1.34) n^(-1/5).
/// Returns 0 for degenerate (zero-spread) data; callers pick a fallback.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 {
        return 0.0;
    }
    let sd = sample_variance(sorted).sqrt();
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 {
        sd.min(iqr / 1.34)
    } else {
        sd
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

/// Gaussian kernel density of `values` evaluated on `grid`, renormalized so
/// the trapezoid integral over the grid is exactly 1 (the plain truncated
/// estimate loses tail mass when data sit near a grid edge).
pub fn gaussian_kde(values: &[f64], grid: &[f64], bandwidth: f64) -> Vec<f64> {
    assert!(bandwidth > 0.0, "kde bandwidth must be positive");
    let n = values.len() as f64;
    let mut dens: Vec<f64> = grid
        .iter()
        .map(|&x| {
            values
                .iter()
                .map(|&v| standard_normal_pdf((x - v) / bandwidth))
                .sum::<f64>()
                / (n * bandwidth)
        })
        .collect();
    let total = trapezoid(grid, &dens);
    if total > 0.0 {
        for d in &mut dens {
            *d /= total;
        }
    }
    dens
}

/// Trapezoid-rule integral of y over x.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

pub fn standard_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via a Chebyshev erfc approximation; absolute error
/// below ~1.5e-7, plenty for acquisition-function ranking.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
    .exp();
    if x >= 0.0 {
        poly
    } else {
        2.0 - poly
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate_order_statistics() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile_sorted(&v, 0.25) - 1.75).abs() < 1e-12);
        assert!((quantile_sorted(&v, 0.5) - 2.5).abs() < 1e-12);
        assert!((quantile_sorted(&v, 0.75) - 3.25).abs() < 1e-12);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
    }

    #[test]
    fn kde_is_normalized_and_nonnegative() {
        let values: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7919).fract()).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let grid = linspace(0.0, 1.0, 200);
        let h = silverman_bandwidth(&sorted);
        assert!(h > 0.0);
        let dens = gaussian_kde(&values, &grid, h);
        assert!(dens.iter().all(|&d| d >= 0.0));
        let integral = trapezoid(&grid, &dens);
        assert!((integral - 1.0).abs() <= 1e-3, "integral {integral}");
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((standard_normal_cdf(1.959963985) - 0.975).abs() < 1e-7);
        assert!((standard_normal_cdf(-1.0) - 0.15865525393146).abs() < 1e-7);
        assert!((standard_normal_pdf(0.0) - 0.39894228040143).abs() < 1e-12);
    }
}
