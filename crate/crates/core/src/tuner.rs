//! Bayesian hyperparameter optimization: a squared-exponential Gaussian
//! process over the normalized search cube, expected improvement as the
//! acquisition, and a seeded candidate-pool maximizer (the space mixes
//! integer and continuous dimensions, so no gradient ascent).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::numeric::{standard_normal_cdf, standard_normal_pdf};

pub const LENGTH_SCALE_BOUNDS: (f64, f64) = (0.001, 100.0);
pub const NOISE_BOUNDS: (f64, f64) = (0.0001, 0.1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionKind {
    Integer,
    Continuous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub kind: DimensionKind,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        for d in &dims {
            if !(d.low < d.high) {
                return Err(Error::InvalidInput(format!(
                    "dimension {}: low {} must be < high {}",
                    d.name, d.low, d.high
                )));
            }
        }
        Ok(Self { dims })
    }

    /// The boosted-tree search space used throughout this crate.
    pub fn default_gbt() -> Self {
        let dim = |name: &str, kind, low, high| Dimension {
            name: name.into(),
            kind,
            low,
            high,
        };
        Self {
            dims: vec![
                dim("n_estimators", DimensionKind::Integer, 600.0, 1000.0),
                dim("max_depth", DimensionKind::Integer, 3.0, 10.0),
                dim("learning_rate", DimensionKind::Continuous, 0.01, 0.3),
                dim("subsample", DimensionKind::Continuous, 0.5, 1.0),
                dim("min_child_weight", DimensionKind::Continuous, 1.0, 10.0),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Maps a unit-cube point to parameter values, rounding integer
    /// dimensions to the nearest value (ties away from zero, i.e. up).
    pub fn denormalize(&self, unit: &[f64]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(unit)
            .map(|(d, &u)| {
                let v = d.low + u.clamp(0.0, 1.0) * (d.high - d.low);
                match d.kind {
                    DimensionKind::Integer => v.round().clamp(d.low, d.high),
                    DimensionKind::Continuous => v,
                }
            })
            .collect()
    }

    pub fn normalize(&self, values: &[f64]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(values)
            .map(|(d, &v)| ((v - d.low) / (d.high - d.low)).clamp(0.0, 1.0))
            .collect()
    }

    /// Rounds integer dimensions of a unit-cube point onto their grid so the
    /// surrogate sees the coordinates that were actually evaluated.
    pub fn snap(&self, unit: &[f64]) -> Vec<f64> {
        self.normalize(&self.denormalize(unit))
    }
}

/// Gaussian-process posterior over normalized points. Objective values are
/// standardized internally; posterior queries return original units.
#[derive(Debug, Clone)]
pub struct GpSurrogate {
    x: Vec<Vec<f64>>,
    length_scale: f64,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    log_marginal: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl GpSurrogate {
    /// Fits with an explicit length scale (clamped to the allowed range)
    /// and noise variance (floored at the allowed minimum).
    pub fn fit(observations: &[(Vec<f64>, f64)], length_scale: f64, noise: f64) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidInput(
                "GP fit needs at least 1 observation".into(),
            ));
        }
        let length_scale = length_scale.clamp(LENGTH_SCALE_BOUNDS.0, LENGTH_SCALE_BOUNDS.1);
        let noise = noise.clamp(NOISE_BOUNDS.0, NOISE_BOUNDS.1);
        let n = observations.len();
        let y_raw: Vec<f64> = observations.iter().map(|(_, v)| *v).collect();
        let y_mean = crate::numeric::mean(&y_raw);
        let var = crate::numeric::population_variance(&y_raw);
        let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let y_std: Vec<f64> = y_raw.iter().map(|v| (v - y_mean) / y_scale).collect();

        let x: Vec<Vec<f64>> = observations.iter().map(|(p, _)| p.clone()).collect();
        let mut k = vec![0.0; n * n];
        let inv2l2 = 1.0 / (2.0 * length_scale * length_scale);
        for i in 0..n {
            for j in 0..=i {
                let v = (-sq_dist(&x[i], &x[j]) * inv2l2).exp();
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
            k[i * n + i] += noise;
        }
        let chol = cholesky(&k, n)?;
        let alpha = cholesky_solve(&chol, n, &y_std);
        let mut log_det = 0.0;
        for i in 0..n {
            log_det += chol[i * n + i].ln();
        }
        let fit_term: f64 = y_std.iter().zip(&alpha).map(|(y, a)| y * a).sum();
        let log_marginal =
            -0.5 * fit_term - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        Ok(Self {
            x,
            length_scale,
            chol,
            alpha,
            y_mean,
            y_scale,
            log_marginal,
        })
    }

    /// Fits the length scale by maximizing log marginal likelihood over a
    /// 16-point log-spaced grid spanning the allowed range.
    pub fn fit_auto(observations: &[(Vec<f64>, f64)], noise: f64) -> Result<Self> {
        let (lo, hi) = LENGTH_SCALE_BOUNDS;
        let mut best: Option<GpSurrogate> = None;
        for i in 0..16 {
            let ell = lo * (hi / lo).powf(i as f64 / 15.0);
            if let Ok(gp) = Self::fit(observations, ell, noise) {
                if best
                    .as_ref()
                    .is_none_or(|b| gp.log_marginal > b.log_marginal)
                {
                    best = Some(gp);
                }
            }
        }
        best.ok_or_else(|| {
            Error::Singular("GP fit failed for every length scale on the grid".into())
        })
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal
    }

    /// Latent (noise-free) posterior mean and variance at a normalized
    /// point, in original objective units.
    pub fn posterior(&self, point: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let inv2l2 = 1.0 / (2.0 * self.length_scale * self.length_scale);
        let k_star: Vec<f64> = self
            .x
            .iter()
            .map(|xi| (-sq_dist(xi, point) * inv2l2).exp())
            .collect();
        let mean_std: f64 = k_star.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        let v = cholesky_solve(&self.chol, n, &k_star);
        let var_std = 1.0 - k_star.iter().zip(&v).map(|(k, w)| k * w).sum::<f64>();
        let var_std = var_std.max(0.0);
        (
            self.y_mean + self.y_scale * mean_std,
            self.y_scale * self.y_scale * var_std,
        )
    }

    /// Prior (far-field) variance in original units.
    pub fn prior_variance(&self) -> f64 {
        self.y_scale * self.y_scale
    }
}

/// Expected improvement for minimization at a normalized point.
pub fn expected_improvement(gp: &GpSurrogate, point: &[f64], best_value: f64) -> f64 {
    let (mu, var) = gp.posterior(point);
    let sigma = var.sqrt();
    let gap = best_value - mu;
    if sigma <= 1e-15 {
        return gap.max(0.0);
    }
    let u = gap / sigma;
    (gap * standard_normal_cdf(u) + sigma * standard_normal_pdf(u)).max(0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Parameter values in search-space order.
    pub point: Vec<f64>,
    pub objective: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneTrace {
    pub entries: Vec<TraceEntry>,
    pub best_point: Vec<f64>,
    pub best_value: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub budget: usize,
    pub seed: u64,
    /// Latin-hypercube points evaluated before any surrogate fit.
    pub init_points: usize,
    /// Uniform candidates scored per acquisition maximization.
    pub candidates: usize,
    /// Gaussian perturbations of the incumbent added to the pool.
    pub local_perturbations: usize,
    pub perturbation_sigma: f64,
    /// Surrogate noise variance.
    pub noise: f64,
}

impl OptimizeOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            init_points: 8,
            candidates: 2048,
            local_perturbations: 64,
            perturbation_sigma: 0.05,
            noise: NOISE_BOUNDS.0,
        }
    }
}

struct RunState {
    observations: Vec<(Vec<f64>, f64)>,
    entries: Vec<TraceEntry>,
    worst_success: Option<f64>,
    best: Option<(Vec<f64>, f64)>,
}

impl RunState {
    fn evaluate(
        &mut self,
        space: &SearchSpace,
        unit: Vec<f64>,
        objective: &mut dyn FnMut(&[f64]) -> Result<f64>,
    ) {
        let snapped = space.snap(&unit);
        let values = space.denormalize(&snapped);
        let obj = match objective(&values) {
            Ok(v) => {
                self.worst_success = Some(self.worst_success.map_or(v, |w| w.max(v)));
                v
            }
            Err(_) => self
                .worst_success
                .map_or(1e6, |w| 10.0 * w.abs().max(1e-12)),
        };
        self.observations.push((snapped, obj));
        if self.best.as_ref().is_none_or(|(_, b)| obj < *b) {
            self.best = Some((values.clone(), obj));
        }
        self.entries.push(TraceEntry {
            iteration: self.entries.len(),
            point: values,
            objective: obj,
            best_so_far: self.best.as_ref().map(|(_, b)| *b).unwrap(),
        });
    }
}

/// Minimizes a black-box objective over the search space. The objective
/// receives denormalized values in space order; failures are recorded as a
/// penalty (10x the worst observed value) rather than aborting the run.
pub fn optimize(
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    space: &SearchSpace,
    opts: &OptimizeOptions,
) -> Result<TuneTrace> {
    if space.is_empty() {
        return Err(Error::InvalidInput("search space has no dimensions".into()));
    }
    if opts.budget < opts.init_points || opts.init_points == 0 {
        return Err(Error::InvalidInput(format!(
            "budget {} must cover the initial design of {} points",
            opts.budget, opts.init_points
        )));
    }
    let d = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // Latin hypercube: one stratum per point and dimension.
    let k = opts.init_points;
    let mut design: Vec<Vec<f64>> = vec![vec![0.0; d]; k];
    for dim in 0..d {
        let mut strata: Vec<usize> = (0..k).collect();
        use rand::seq::SliceRandom;
        strata.shuffle(&mut rng);
        for (i, &s) in strata.iter().enumerate() {
            design[i][dim] = (s as f64 + rng.random::<f64>()) / k as f64;
        }
    }

    let mut state = RunState {
        observations: Vec::with_capacity(opts.budget),
        entries: Vec::with_capacity(opts.budget),
        worst_success: None,
        best: None,
    };

    for unit in design {
        state.evaluate(space, unit, &mut objective);
    }

    while state.entries.len() < opts.budget {
        let gp = GpSurrogate::fit_auto(&state.observations, opts.noise)?;
        let best_value = state.best.as_ref().map(|(_, b)| *b).unwrap();
        let incumbent = state
            .observations
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(x, _)| x.clone())
            .unwrap();

        let mut best_cand: Option<(Vec<f64>, f64)> = None;
        let total = opts.candidates + opts.local_perturbations;
        for c in 0..total {
            let unit: Vec<f64> = if c < opts.candidates {
                (0..d).map(|_| rng.random::<f64>()).collect()
            } else {
                incumbent
                    .iter()
                    .map(|&v| {
                        let z: f64 = rng.sample(rand_distr::StandardNormal);
                        (v + opts.perturbation_sigma * z).clamp(0.0, 1.0)
                    })
                    .collect()
            };
            let snapped = space.snap(&unit);
            let ei = expected_improvement(&gp, &snapped, best_value);
            if best_cand.as_ref().is_none_or(|(_, b)| ei > *b) {
                best_cand = Some((snapped, ei));
            }
        }
        let (proposal, _) = best_cand.unwrap();
        state.evaluate(space, proposal, &mut objective);
    }

    let (best_point, best_value) = state.best.unwrap();
    Ok(TuneTrace {
        entries: state.entries,
        best_point,
        best_value,
    })
}

/// Writes the trace as CSV with one column per search dimension.
pub fn write_trace_csv(path: &Path, space: &SearchSpace, trace: &TuneTrace) -> Result<()> {
    let mut out = String::from("iteration,");
    out.push_str(
        &space
            .dims
            .iter()
            .map(|d| d.name.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push_str(",objective,best_so_far\n");
    for e in &trace.entries {
        out.push_str(&e.iteration.to_string());
        for v in &e.point {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push(',');
        out.push_str(&e.objective.to_string());
        out.push(',');
        out.push_str(&e.best_so_far.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_1d() -> SearchSpace {
        SearchSpace::new(vec![Dimension {
            name: "x".into(),
            kind: DimensionKind::Continuous,
            low: 0.0,
            high: 1.0,
        }])
        .unwrap()
    }

    #[test]
    fn integer_dimensions_round_ties_up() {
        let space = SearchSpace::new(vec![Dimension {
            name: "n".into(),
            kind: DimensionKind::Integer,
            low: 3.0,
            high: 10.0,
        }])
        .unwrap();
        // unit 1.5/7 -> 3 + 1.5 = 4.5 -> 5
        let v = space.denormalize(&[1.5 / 7.0]);
        assert_eq!(v[0], 5.0);
        assert_eq!(space.denormalize(&[0.0])[0], 3.0);
        assert_eq!(space.denormalize(&[1.0])[0], 10.0);
    }

    #[test]
    fn gp_interpolates_single_observation() {
        let obs = vec![(vec![0.4, 0.6], 5.0)];
        let gp = GpSurrogate::fit(&obs, 1.0, 1e-4).unwrap();
        let (mean, _) = gp.posterior(&[0.4, 0.6]);
        assert!((mean - 5.0).abs() < 1e-3, "mean {mean}");
    }

    #[test]
    fn gp_reverts_to_prior_far_from_data() {
        let obs = vec![(vec![0.1], 1.0), (vec![0.15], 1.2), (vec![0.2], 0.9)];
        let gp = GpSurrogate::fit(&obs, 0.01, 1e-4).unwrap();
        let (mean, var) = gp.posterior(&[0.9]);
        let y_mean = (1.0 + 1.2 + 0.9) / 3.0;
        assert!((mean - y_mean).abs() < 0.01 * y_mean);
        assert!((var - gp.prior_variance()).abs() < 0.01 * gp.prior_variance());
    }

    #[test]
    fn gp_variance_shrinks_at_training_point() {
        let obs = vec![(vec![0.3], 2.0), (vec![0.7], 4.0)];
        let gp = GpSurrogate::fit(&obs, 0.2, 1e-4).unwrap();
        let (_, var_at) = gp.posterior(&[0.3]);
        assert!(var_at < gp.prior_variance());
    }

    #[test]
    fn gp_posterior_symmetry() {
        // data symmetric about 0.5 -> posterior symmetric about 0.5
        let obs = vec![(vec![0.2], 1.0), (vec![0.8], 1.0)];
        let gp = GpSurrogate::fit(&obs, 0.3, 1e-4).unwrap();
        let (m1, v1) = gp.posterior(&[0.35]);
        let (m2, v2) = gp.posterior(&[0.65]);
        assert!((m1 - m2).abs() < 1e-10);
        assert!((v1 - v2).abs() < 1e-10);
    }

    #[test]
    fn gp_matches_dense_solve_oracle() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(17);
        let n = 20;
        let d = 2;
        let obs: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|_| {
                (
                    (0..d).map(|_| rng.random::<f64>()).collect::<Vec<f64>>(),
                    rng.random_range(-2.0..2.0),
                )
            })
            .collect();
        let ell = 0.4;
        let noise = 1e-3;
        let gp = GpSurrogate::fit(&obs, ell, noise).unwrap();

        // independent oracle: Gauss-Jordan inverse of the kernel matrix
        let y_raw: Vec<f64> = obs.iter().map(|(_, v)| *v).collect();
        let y_mean = crate::numeric::mean(&y_raw);
        let y_sd = crate::numeric::population_variance(&y_raw).sqrt();
        let y_std: Vec<f64> = y_raw.iter().map(|v| (v - y_mean) / y_sd).collect();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                k[i][j] = (-sq_dist(&obs[i].0, &obs[j].0) / (2.0 * ell * ell)).exp();
            }
            k[i][i] += noise;
        }
        let kinv = gauss_jordan_inverse(&k);
        for _ in 0..25 {
            let q: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let ks: Vec<f64> = obs
                .iter()
                .map(|(x, _)| (-sq_dist(x, &q) / (2.0 * ell * ell)).exp())
                .collect();
            let mut mean_std = 0.0;
            let mut quad = 0.0;
            for i in 0..n {
                let mut kinv_y = 0.0;
                let mut kinv_k = 0.0;
                for j in 0..n {
                    kinv_y += kinv[i][j] * y_std[j];
                    kinv_k += kinv[i][j] * ks[j];
                }
                mean_std += ks[i] * kinv_y;
                quad += ks[i] * kinv_k;
            }
            let want_mean = y_mean + y_sd * mean_std;
            let want_var = y_sd * y_sd * (1.0 - quad).max(0.0);
            let (got_mean, got_var) = gp.posterior(&q);
            assert!(
                (got_mean - want_mean).abs() < 1e-8,
                "{got_mean} vs {want_mean}"
            );
            assert!((got_var - want_var).abs() < 1e-8, "{got_var} vs {want_var}");
        }
    }

    fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut aug: Vec<Vec<f64>> = a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
                .unwrap();
            aug.swap(col, piv);
            let p = aug[col][col];
            for v in &mut aug[col] {
                *v /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[r][col];
                    if f != 0.0 {
                        for c in 0..2 * n {
                            aug[r][c] -= f * aug[col][c];
                        }
                    }
                }
            }
        }
        aug.into_iter().map(|r| r[n..].to_vec()).collect()
    }

    #[test]
    fn gp_variance_never_negative() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        let obs: Vec<(Vec<f64>, f64)> = (0..15)
            .map(|_| (vec![rng.random::<f64>()], rng.random_range(-1.0..1.0)))
            .collect();
        let gp = GpSurrogate::fit(&obs, 0.05, 1e-4).unwrap();
        for _ in 0..10_000 {
            let (_, var) = gp.posterior(&[rng.random::<f64>()]);
            assert!(var >= 0.0);
        }
    }

    #[test]
    fn gp_duplicate_points_survive_noise_floor() {
        let obs = vec![(vec![0.5], 1.0), (vec![0.5], 1.2)];
        // requesting zero noise is floored to the minimum
        let gp = GpSurrogate::fit(&obs, 1.0, 0.0).unwrap();
        assert!(gp.posterior(&[0.5]).0.is_finite());
    }

    #[test]
    fn expected_improvement_closed_forms() {
        let obs = vec![(vec![0.5], 2.0)];
        let gp = GpSurrogate::fit(&obs, 1.0, 1e-4).unwrap();
        // mu = best: the mean term vanishes, EI = sigma * pdf(0)
        let (mu, var) = gp.posterior(&[0.5]);
        let ei = expected_improvement(&gp, &[0.5], mu);
        assert!((ei - var.sqrt() * standard_normal_pdf(0.0)).abs() < 1e-12);
        let (mu_far, var_far) = gp.posterior(&[50.0]);
        let ei_far = expected_improvement(&gp, &[50.0], mu_far);
        assert!((ei_far - var_far.sqrt() * 0.3989422804014327).abs() < 1e-6);
    }

    #[test]
    fn optimize_budget_equals_design_is_pure_space_filling() {
        let space = space_1d();
        let opts = OptimizeOptions::new(8, 4);
        let trace = optimize(|v| Ok((v[0] - 0.3) * (v[0] - 0.3)), &space, &opts).unwrap();
        assert_eq!(trace.entries.len(), 8);
        let min = trace
            .entries
            .iter()
            .map(|e| e.objective)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, trace.best_value);
    }

    #[test]
    fn optimize_finds_quadratic_minimum() {
        let space = space_1d();
        let opts = OptimizeOptions::new(25, 11);
        let trace = optimize(|v| Ok((v[0] - 0.3) * (v[0] - 0.3)), &space, &opts).unwrap();
        assert!(
            (trace.best_point[0] - 0.3).abs() <= 0.02,
            "best x = {}",
            trace.best_point[0]
        );
    }

    #[test]
    fn optimize_is_deterministic_and_monotone() {
        let space = space_1d();
        let opts = OptimizeOptions::new(16, 7);
        let a = optimize(|v| Ok((v[0] - 0.62) * (v[0] - 0.62)), &space, &opts).unwrap();
        let b = optimize(|v| Ok((v[0] - 0.62) * (v[0] - 0.62)), &space, &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&a.entries).unwrap(),
            serde_json::to_string(&b.entries).unwrap()
        );
        for w in a.entries.windows(2) {
            assert!(w[1].best_so_far <= w[0].best_so_far);
        }
    }

    #[test]
    fn optimize_stays_inside_space_with_integral_ints() {
        let space = SearchSpace::default_gbt();
        let opts = OptimizeOptions::new(14, 3);
        let trace = optimize(
            |v| Ok(v.iter().map(|x| x * 1e-3).sum::<f64>().sin().abs()),
            &space,
            &opts,
        )
        .unwrap();
        for e in &trace.entries {
            for (d, v) in space.dims.iter().zip(&e.point) {
                assert!(*v >= d.low && *v <= d.high, "{} = {v} outside", d.name);
                if d.kind == DimensionKind::Integer {
                    assert_eq!(v.fract(), 0.0, "{} = {v} not integral", d.name);
                }
            }
        }
    }

    #[test]
    fn optimize_records_penalties_instead_of_crashing() {
        let space = space_1d();
        let opts = OptimizeOptions::new(12, 19);
        let trace = optimize(
            |v| {
                if v[0] < 0.5 {
                    Err(Error::InvalidInput("objective blew up".into()))
                } else {
                    Ok(v[0])
                }
            },
            &space,
            &opts,
        )
        .unwrap();
        assert_eq!(trace.entries.len(), 12);
        assert!(trace.best_value >= 0.5);
        // failed evaluations got the 10x-worst penalty, not a crash
        let max = trace
            .entries
            .iter()
            .map(|e| e.objective)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max > 1.0);
    }

    #[test]
    fn optimize_rejects_budget_below_design() {
        let space = space_1d();
        let opts = OptimizeOptions::new(4, 0);
        assert!(optimize(|v| Ok(v[0]), &space, &opts).is_err());
    }

    #[test]
    fn trace_csv_has_exact_header() {
        let dir = tempfile::tempdir().unwrap();
        let space = SearchSpace::default_gbt();
        let trace = TuneTrace {
            entries: vec![TraceEntry {
                iteration: 0,
                point: vec![700.0, 5.0, 0.1, 0.8, 2.0],
                objective: 1.5,
                best_so_far: 1.5,
            }],
            best_point: vec![700.0, 5.0, 0.1, 0.8, 2.0],
            best_value: 1.5,
        };
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &space, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "iteration,n_estimators,max_depth,learning_rate,subsample,min_child_weight,objective,best_so_far\n"
        ));
    }
}
