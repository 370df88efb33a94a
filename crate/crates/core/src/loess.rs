//! Classical single-pass LOESS: for each query, a tricube-weighted
//! least-squares polynomial over the k = ceil(span*n) nearest points.
//! Exact-duplicate abscissae are aggregated (mean ordinate) before fitting;
//! no extrapolation outside the data range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoessConfig {
    /// Fraction of points in each local window, in (0, 1].
    pub span: f64,
    /// Local polynomial degree: 0, 1 or 2.
    pub degree: usize,
    pub query_grid: Vec<f64>,
}

impl Default for LoessConfig {
    fn default() -> Self {
        Self {
            span: 0.5,
            degree: 1,
            query_grid: Vec::new(),
        }
    }
}

impl LoessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.span > 0.0 && self.span <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "loess span = {} outside (0, 1]",
                self.span
            )));
        }
        if self.degree > 2 {
            return Err(Error::InvalidInput(format!(
                "loess degree = {} not in {{0, 1, 2}}",
                self.degree
            )));
        }
        Ok(())
    }
}

/// Smooths scattered points onto the configured query grid.
pub fn loess(points: &[(f64, f64)], config: &LoessConfig) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("loess input contains non-finite values".into()));
    }

    // Aggregate duplicate abscissae, then sort.
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut data: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i].0;
        let mut sum = 0.0;
        let mut count = 0usize;
        while i < sorted.len() && sorted[i].0 == x {
            sum += sorted[i].1;
            count += 1;
            i += 1;
        }
        data.push((x, sum / count as f64));
    }

    let n = data.len();
    if n < config.degree + 1 {
        return Err(Error::InvalidInput(format!(
            "loess needs at least degree+1 = {} distinct points, got {n}",
            config.degree + 1
        )));
    }
    let k = (config.span * n as f64).ceil() as usize;
    let k = k.clamp(1, n);
    if k < config.degree + 1 {
        return Err(Error::InvalidInput(format!(
            "window of ceil(span*n) = {k} points cannot support degree {}",
            config.degree
        )));
    }

    let (x_min, x_max) = (data[0].0, data[n - 1].0);
    let mut out = Vec::with_capacity(config.query_grid.len());
    for &xq in &config.query_grid {
        if !(x_min..=x_max).contains(&xq) {
            return Err(Error::InvalidInput(format!(
                "query {xq} outside data range [{x_min}, {x_max}] (no extrapolation)"
            )));
        }
        out.push((xq, fit_at(&data, xq, k, config.degree)));
    }
    Ok(out)
}

fn fit_at(data: &[(f64, f64)], xq: f64, k: usize, degree: usize) -> f64 {
    // k nearest by distance; ties resolved by abscissa for determinism.
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (data[a].0 - xq).abs();
        let db = (data[b].0 - xq).abs();
        da.total_cmp(&db).then(data[a].0.total_cmp(&data[b].0))
    });
    let window = &order[..k];
    let d_max = (data[window[k - 1]].0 - xq).abs();
    if d_max == 0.0 {
        // all window points coincide with the query
        let mean: f64 = window.iter().map(|&i| data[i].1).sum::<f64>() / k as f64;
        return mean;
    }

    // Tricube gives the farthest point weight zero; when that starves the
    // fit below degree+1 points, widen the denominator so every window
    // point keeps positive weight.
    let positive = window
        .iter()
        .filter(|&&i| (data[i].0 - xq).abs() < d_max)
        .count();
    let denom = if positive < degree + 1 {
        d_max * 1.2
    } else {
        d_max
    };
    let weights: Vec<f64> = window
        .iter()
        .map(|&i| {
            let t = ((data[i].0 - xq).abs() / denom).min(1.0);
            let c = 1.0 - t * t * t;
            c * c * c
        })
        .collect();

    for d in (0..=degree).rev() {
        if let Some(value) = weighted_poly_at_zero(data, window, &weights, xq, d) {
            return value;
        }
    }
    // all weights zero cannot happen (denom > 0 keeps the nearest positive)
    window.iter().map(|&i| data[i].1).sum::<f64>() / k as f64
}

/// Weighted least squares of the given degree in u = x - xq, evaluated at
/// u = 0 (the intercept). None when the normal matrix is singular.
fn weighted_poly_at_zero(
    data: &[(f64, f64)],
    window: &[usize],
    weights: &[f64],
    xq: f64,
    degree: usize,
) -> Option<f64> {
    let p = degree + 1;
    let mut moments = [0.0; 5]; // sum w u^j, j = 0..2*degree
    let mut rhs = [0.0; 3]; // sum w u^j y
    for (&i, &w) in window.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let u = data[i].0 - xq;
        let y = data[i].1;
        let mut uj = 1.0;
        for j in 0..=2 * degree {
            moments[j] += w * uj;
            if j <= degree {
                rhs[j] += w * uj * y;
            }
            uj *= u;
        }
    }
    let mut a = [[0.0; 3]; 3];
    for r in 0..p {
        for c in 0..p {
            a[r][c] = moments[r + c];
        }
    }
    let mut b = [0.0; 3];
    b[..p].copy_from_slice(&rhs[..p]);

    // Gaussian elimination with partial pivoting on the tiny system.
    let scale = moments[0].abs().max(1e-300);
    for col in 0..p {
        let piv = (col..p).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..p {
            let f = a[r][col] / a[col][col];
            for c in col..p {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut beta = [0.0; 3];
    for r in (0..p).rev() {
        let mut acc = b[r];
        for c in (r + 1)..p {
            acc -= a[r][c] * beta[c];
        }
        beta[r] = acc / a[r][r];
    }
    Some(beta[0])
}

/// Flags a smoothed backbone that dips by more than 1% of its maximum:
/// physically suspect for a monotone resistance curve.
pub fn monotonicity_warning(curve: &[(f64, f64)]) -> Option<String> {
    let max = curve.iter().map(|&(_, y)| y).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() || max <= 0.0 {
        return None;
    }
    let mut running = f64::NEG_INFINITY;
    for &(x, y) in curve {
        if y < running - 0.01 * max {
            return Some(format!(
                "smoothed curve decreases by more than 1% of its maximum near x = {x}"
            ));
        }
        running = running.max(y);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;

    fn config(span: f64, degree: usize, grid: Vec<f64>) -> LoessConfig {
        LoessConfig {
            span,
            degree,
            query_grid: grid,
        }
    }

    #[test]
    fn reproduces_lines_for_any_span() {
        let points: Vec<(f64, f64)> = (0..20).map(|i| {
            let x = i as f64 / 19.0;
            (x, 2.0 * x + 1.0)
        }).collect();
        for span in [0.1, 0.25, 0.5, 1.0] {
            let grid = linspace(0.0, 1.0, 31);
            let out = loess(&points, &config(span, 1, grid)).unwrap();
            for &(xq, yq) in &out {
                assert!(
                    (yq - (2.0 * xq + 1.0)).abs() <= 1e-9,
                    "span {span}: f({xq}) = {yq}"
                );
            }
        }
    }

    #[test]
    fn reproduces_quadratics_at_degree_two() {
        let points: Vec<(f64, f64)> = (0..25).map(|i| {
            let x = i as f64 / 24.0;
            (x, 3.0 * x * x - x + 0.5)
        }).collect();
        let grid = linspace(0.0, 1.0, 21);
        let out = loess(&points, &config(0.4, 2, grid)).unwrap();
        for &(xq, yq) in &out {
            let want = 3.0 * xq * xq - xq + 0.5;
            assert!((yq - want).abs() <= 1e-8, "f({xq}) = {yq} vs {want}");
        }
    }

    #[test]
    fn constant_data_smooths_to_constant() {
        let points: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 4.25)).collect();
        let out = loess(&points, &config(0.5, 1, vec![0.0, 3.7, 9.0])).unwrap();
        for &(_, y) in &out {
            assert_eq!(y, 4.25);
        }
    }

    #[test]
    fn degree_zero_stays_within_window_range() {
        let points: Vec<(f64, f64)> = (0..30)
            .map(|i| {
                let x = i as f64;
                (x, (x * 0.77).sin() * 3.0)
            })
            .collect();
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(_, y)| {
                (l.min(y), h.max(y))
            });
        let grid = linspace(0.0, 29.0, 40);
        let out = loess(&points, &config(0.3, 0, grid)).unwrap();
        for &(_, y) in &out {
            assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }
    }

    #[test]
    fn permutation_invariance() {
        let points: Vec<(f64, f64)> = (0..15)
            .map(|i| (i as f64 * 0.3, ((i * 7) % 5) as f64))
            .collect();
        let mut shuffled = points.clone();
        shuffled.reverse();
        shuffled.swap(2, 9);
        let grid = linspace(0.0, 14.0 * 0.3, 11);
        let a = loess(&points, &config(0.6, 1, grid.clone())).unwrap();
        let b = loess(&shuffled, &config(0.6, 1, grid)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_abscissae_aggregate_to_mean() {
        let points = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (2.0, 2.0), (3.0, 3.0)];
        // after aggregation: (0,0), (1,1), (2,2), (3,3) is exactly linear
        let out = loess(&points, &config(1.0, 1, vec![0.5, 1.5, 2.5])).unwrap();
        for &(xq, yq) in &out {
            assert!((yq - xq).abs() <= 1e-9);
        }
    }

    #[test]
    fn rejects_extrapolation_and_starved_windows() {
        let points: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, i as f64)).collect();
        assert!(loess(&points, &config(0.5, 1, vec![-0.1])).is_err());
        assert!(loess(&points, &config(0.5, 1, vec![4.5])).is_err());
        // ceil(0.1 * 5) = 1 point cannot support degree 1
        assert!(loess(&points, &config(0.1, 1, vec![2.0])).is_err());
        // fewer points than degree + 1
        assert!(loess(&[(0.0, 1.0), (1.0, 2.0)], &config(1.0, 2, vec![0.5])).is_err());
    }

    #[test]
    fn smoothing_beats_raw_noise_against_clean_backbone() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let clean = |x: f64| (2.5 * x).tanh() * 8.0;
        let mut improved = 0;
        for seed in 0..10u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let points: Vec<(f64, f64)> = (0..60)
                .map(|i| {
                    let x = i as f64 / 59.0 * 2.0;
                    (x, clean(x) * (1.0 + rng.random_range(-0.15..0.15)))
                })
                .collect();
            let grid: Vec<f64> = linspace(0.0, 2.0, 60);
            let smoothed = loess(&points, &config(0.35, 1, grid)).unwrap();
            let rmse_raw: f64 = (points
                .iter()
                .map(|&(x, y)| (y - clean(x)).powi(2))
                .sum::<f64>()
                / points.len() as f64)
                .sqrt();
            let rmse_smooth: f64 = (smoothed
                .iter()
                .map(|&(x, y)| (y - clean(x)).powi(2))
                .sum::<f64>()
                / smoothed.len() as f64)
                .sqrt();
            if rmse_smooth < rmse_raw {
                improved += 1;
            }
        }
        assert_eq!(improved, 10, "smoothing failed to reduce error on some seeds");
    }

    #[test]
    fn monotonicity_warning_triggers_on_dips() {
        let rising: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, i as f64)).collect();
        assert!(monotonicity_warning(&rising).is_none());
        let mut dipping = rising.clone();
        dipping[7].1 = 3.0; // drop from 6 to 3 with max 9
        assert!(monotonicity_warning(&dipping).is_some());
        // sub-1% wiggle is tolerated
        let mut wiggle = rising;
        wiggle[7].1 = 6.0 - 0.005 * 9.0;
        assert!(monotonicity_warning(&wiggle).is_none());
    }
}
