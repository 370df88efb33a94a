//! Beam on nonlinear Winkler springs: solves EI y'''' + p(z, y) = 0 over the
//! embedded length with head shear H and head moment H*e at the mudline and
//! a free tip, by Newton continuation over 20 uniform load steps. Fourth
//! derivatives use the 5-point central stencil with two ghost nodes per end.
//!
//! Sign conventions: z is depth below mudline, y is deflection in the load
//! direction, M = EI y'' with M(0) = H*e, V = EI y''' with V(0) = H, and the
//! reported soil reaction is the spring resistance (same sign as y). The
//! distributed load on the beam is the negated resistance, so d2M/dz2
//! reproduces the reaction profile up to that orientation.

use serde::{Deserialize, Serialize};

use crate::baseline::ApiPyParams;
use crate::dataset::{featurize, FeatureEnvelopes, PYRecord, PileSoilCase};
use crate::error::{Error, Result};
use crate::gbt::TreeEnsemble;
use crate::linalg::BandedMatrix;
use crate::loess::{loess, LoessConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PileModel {
    /// Embedded length, m.
    pub embedded_length: f64,
    /// Diameter, m.
    pub diameter: f64,
    /// Flexural rigidity E_p I_p, kN m^2.
    pub ei: f64,
    /// Load eccentricity above mudline, m (applied as a head moment H*e).
    pub eccentricity: f64,
    /// Grid nodes over [0, L]; odd and >= 21.
    pub n_nodes: usize,
}

impl PileModel {
    pub fn from_case(case: &PileSoilCase, n_nodes: usize) -> Self {
        Self {
            embedded_length: case.embedded_length,
            diameter: case.diameter,
            ei: case.flexural_rigidity(),
            eccentricity: case.eccentricity,
            n_nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ei > 0.0) {
            return Err(Error::InvalidInput(format!("EI = {} must be > 0", self.ei)));
        }
        if !(self.embedded_length > 0.0 && self.diameter > 0.0) {
            return Err(Error::InvalidInput(
                "pile length and diameter must be > 0".into(),
            ));
        }
        if !(self.eccentricity >= 0.0) {
            return Err(Error::InvalidInput("eccentricity must be >= 0".into()));
        }
        if self.n_nodes < 21 || self.n_nodes % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "n_nodes = {} must be odd and >= 21",
                self.n_nodes
            )));
        }
        Ok(())
    }

    pub fn node_depths(&self) -> Vec<f64> {
        crate::numeric::linspace(0.0, self.embedded_length, self.n_nodes)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LoadCase {
    /// Lateral head load, kN.
    pub h: f64,
}

/// Monotone p-y backbone at one depth: piecewise linear over sorted knots,
/// constant at the ultimate value beyond the last knot, extended
/// antisymmetrically to negative deflections.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneCurve {
    pub y_knots: Vec<f64>,
    pub p_knots: Vec<f64>,
}

impl MonotoneCurve {
    pub fn validate(&self) -> Result<()> {
        if self.y_knots.len() != self.p_knots.len() || self.y_knots.len() < 2 {
            return Err(Error::InvalidInput(
                "spring curve needs matching knot vectors of length >= 2".into(),
            ));
        }
        if self.y_knots[0] != 0.0 || self.p_knots[0] != 0.0 {
            return Err(Error::InvalidInput("spring curve must start at (0, 0)".into()));
        }
        if self.y_knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "spring deflection knots must be strictly increasing".into(),
            ));
        }
        if self.p_knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "spring resistance knots must be non-decreasing".into(),
            ));
        }
        Ok(())
    }

    fn tangent_floor(&self) -> f64 {
        let p_max = *self.p_knots.last().unwrap();
        let y_max = *self.y_knots.last().unwrap();
        if p_max > 0.0 && y_max > 0.0 {
            1e-6 * p_max / y_max
        } else {
            0.0
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let a = y.abs();
        let sign = if y < 0.0 { -1.0 } else { 1.0 };
        let n = self.y_knots.len();
        if a >= self.y_knots[n - 1] {
            return sign * self.p_knots[n - 1];
        }
        let seg = self.y_knots.partition_point(|&k| k <= a).max(1) - 1;
        let (y0, y1) = (self.y_knots[seg], self.y_knots[seg + 1]);
        let (p0, p1) = (self.p_knots[seg], self.p_knots[seg + 1]);
        sign * (p0 + (a - y0) / (y1 - y0) * (p1 - p0))
    }

    /// dp/dy; even in y, floored to keep the Newton matrix nonsingular
    /// whenever the curve carries any resistance.
    pub fn tangent(&self, y: f64) -> f64 {
        let a = y.abs();
        let n = self.y_knots.len();
        let slope = if a >= self.y_knots[n - 1] {
            0.0
        } else {
            let seg = self.y_knots.partition_point(|&k| k <= a).max(1) - 1;
            (self.p_knots[seg + 1] - self.p_knots[seg]) / (self.y_knots[seg + 1] - self.y_knots[seg])
        };
        slope.max(self.tangent_floor())
    }

    pub fn is_zero(&self) -> bool {
        self.p_knots.iter().all(|&p| p == 0.0)
    }
}

/// p-y curves over a depth grid with linear interpolation in depth. Depths
/// below the first grid entry blend linearly toward zero resistance at the
/// mudline surface (no overburden, no resistance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpringField {
    pub depths: Vec<f64>,
    pub curves: Vec<MonotoneCurve>,
    pub warnings: Vec<String>,
    /// Knots adjusted by the isotonic repair during construction.
    pub repaired_knots: usize,
}

impl SpringField {
    pub fn new(depths: Vec<f64>, curves: Vec<MonotoneCurve>) -> Result<Self> {
        if depths.len() != curves.len() || depths.is_empty() {
            return Err(Error::InvalidInput(
                "spring field needs one curve per depth".into(),
            ));
        }
        if depths[0] <= 0.0 || depths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "spring field depths must be positive and strictly increasing".into(),
            ));
        }
        for c in &curves {
            c.validate()?;
        }
        Ok(Self {
            depths,
            curves,
            warnings: Vec::new(),
            repaired_knots: 0,
        })
    }

    fn locate(&self, z: f64) -> (usize, usize, f64) {
        let n = self.depths.len();
        if z >= self.depths[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let hi = self.depths.partition_point(|&d| d < z);
        if hi == 0 {
            // blend toward zero resistance at the surface
            return (0, 0, z / self.depths[0] - 1.0);
        }
        let lo = hi - 1;
        let t = (z - self.depths[lo]) / (self.depths[hi] - self.depths[lo]);
        (lo, hi, t)
    }

    pub fn resistance(&self, z: f64, y: f64) -> f64 {
        let (lo, hi, t) = self.locate(z);
        if lo == hi {
            let v = self.curves[lo].eval(y);
            if t < 0.0 {
                // t = z/z0 - 1 in the surface blend
                return v * (1.0 + t);
            }
            return v;
        }
        (1.0 - t) * self.curves[lo].eval(y) + t * self.curves[hi].eval(y)
    }

    pub fn tangent(&self, z: f64, y: f64) -> f64 {
        let (lo, hi, t) = self.locate(z);
        if lo == hi {
            let v = self.curves[lo].tangent(y);
            if t < 0.0 {
                return v * (1.0 + t);
            }
            return v;
        }
        (1.0 - t) * self.curves[lo].tangent(y) + t * self.curves[hi].tangent(y)
    }

    pub fn max_depth(&self) -> f64 {
        *self.depths.last().unwrap()
    }
}

/// Where the spring backbone comes from.
pub enum SpringSource<'a> {
    Model(&'a TreeEnsemble),
    Baseline(&'a ApiPyParams),
}

/// Pool-adjacent-violators projection onto non-decreasing sequences.
/// Returns the number of entries it moved.
fn isotonic_repair(values: &mut [f64]) -> usize {
    let n = values.len();
    let original = values.to_vec();
    let mut sums: Vec<f64> = Vec::with_capacity(n);
    let mut counts: Vec<usize> = Vec::with_capacity(n);
    for &v in values.iter() {
        sums.push(v);
        counts.push(1);
        while sums.len() > 1 {
            let k = sums.len();
            if sums[k - 2] / counts[k - 2] as f64 > sums[k - 1] / counts[k - 1] as f64 {
                let s = sums.pop().unwrap();
                let c = counts.pop().unwrap();
                sums[k - 2] += s;
                counts[k - 2] += c;
            } else {
                break;
            }
        }
    }
    let mut idx = 0;
    for (s, c) in sums.iter().zip(&counts) {
        let avg = s / *c as f64;
        for _ in 0..*c {
            values[idx] = avg;
            idx += 1;
        }
    }
    let scale = original
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    values
        .iter()
        .zip(&original)
        .filter(|(a, b)| (**a - **b).abs() > 1e-12 * scale)
        .count()
}

/// Builds the spring field by evaluating the prediction source on a
/// (depth, deflection) grid and re-dimensionalizing p = p_bar * gamma' z D.
/// Model output is LOESS-smoothed along y, clamped non-negative and
/// isotonically repaired; the baseline is monotone by construction.
pub fn build_spring_field(
    source: &SpringSource,
    case: &PileSoilCase,
    z_grid: &[f64],
    y_grid: &[f64],
    smoothing: Option<&LoessConfig>,
) -> Result<SpringField> {
    if z_grid.is_empty() || z_grid[0] <= 0.0 || z_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "spring depth grid must be positive and strictly increasing".into(),
        ));
    }
    if y_grid.len() < 2 || y_grid[0] < 0.0 || y_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "spring deflection grid must be non-negative, strictly increasing, len >= 2".into(),
        ));
    }
    let env = FeatureEnvelopes::default();
    let mut warnings = Vec::new();
    let mut repaired = 0usize;

    // knot deflections always start at zero
    let mut y_knots: Vec<f64> = Vec::with_capacity(y_grid.len() + 1);
    if y_grid[0] > 0.0 {
        y_knots.push(0.0);
    }
    y_knots.extend_from_slice(y_grid);

    let y_over_d_max = y_knots.last().unwrap() / case.diameter;
    if y_over_d_max > env.y_over_d.1 {
        warnings.push(format!(
            "deflection grid reaches y/D = {y_over_d_max:.3}, beyond the database envelope {:.2}",
            env.y_over_d.1
        ));
    }

    let mut curves = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let zd = z / case.diameter;
        if zd < env.z_over_d.0 || zd > env.z_over_d.1 {
            warnings.push(format!(
                "depth z = {z:.3} m (z/D = {zd:.2}) outside the database envelope [{}, {}]",
                env.z_over_d.0, env.z_over_d.1
            ));
        }
        let scale = case.gamma_eff * z * case.diameter;
        let mut p: Vec<f64> = match source {
            SpringSource::Baseline(params) => y_knots
                .iter()
                .map(|&y| crate::baseline::api_p(y, z, params, case))
                .collect::<Result<_>>()?,
            SpringSource::Model(model) => {
                let p_bar: Vec<f64> = y_knots
                    .iter()
                    .map(|&y| {
                        let rec = PYRecord {
                            case_id: case.case_id.clone(),
                            depth: z,
                            deflection: y,
                            resistance: 0.0,
                        };
                        let sample = featurize(case, &rec)?;
                        model.predict(sample.features.as_slice())
                    })
                    .collect::<Result<_>>()?;
                let smoothed = match smoothing {
                    Some(cfg) => {
                        let points: Vec<(f64, f64)> =
                            y_knots.iter().copied().zip(p_bar.iter().copied()).collect();
                        let mut c = cfg.clone();
                        c.query_grid = y_knots.clone();
                        loess(&points, &c)?.into_iter().map(|(_, v)| v).collect()
                    }
                    None => p_bar,
                };
                smoothed.into_iter().map(|pb| pb * scale).collect()
            }
        };
        // anchor the origin, clamp negatives, project to non-decreasing
        for v in p.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                repaired += 1;
            }
        }
        p[0] = 0.0;
        repaired += isotonic_repair(&mut p);
        let curve = MonotoneCurve {
            y_knots: y_knots.clone(),
            p_knots: p,
        };
        if curve.is_zero() {
            warnings.push(format!(
                "all-zero p-y curve at z = {z:.3} m; treated as a zero spring"
            ));
        }
        curve.validate()?;
        curves.push(curve);
    }
    let mut field = SpringField::new(z_grid.to_vec(), curves)?;
    field.warnings = warnings;
    field.repaired_knots = repaired;
    Ok(field)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeamSolution {
    pub depths: Vec<f64>,
    /// Deflection, m.
    pub deflection: Vec<f64>,
    /// Rotation dy/dz, rad.
    pub rotation: Vec<f64>,
    /// Bending moment EI y'', kN m.
    pub moment: Vec<f64>,
    /// Shear EI y''', kN.
    pub shear: Vec<f64>,
    /// Spring resistance at the converged deflection, kN/m.
    pub soil_reaction: Vec<f64>,
    pub converged: bool,
    /// Final infinity norm of the scaled residual, relative to the load step
    /// start.
    pub residual_norm: f64,
}

struct System<'a> {
    pile: &'a PileModel,
    springs: &'a SpringField,
    depths: Vec<f64>,
    n: usize,
    dz: f64,
}

impl System<'_> {
    // Unknown layout: [y_-2, y_-1, y_0 .. y_{N-1}, y_N, y_{N+1}];
    // equation layout: [V(0), M(0), ODE_0 .. ODE_{N-1}, M(L), V(L)].
    // Shear rows are scaled by 1/h and moment rows by 1/h^2 so every
    // residual entry carries force-per-length units like the ODE rows.
    fn residual(&self, u: &[f64], load: f64) -> Vec<f64> {
        let n = self.n;
        let ei = self.pile.ei;
        let h = self.dz;
        let mut f = vec![0.0; n + 4];
        f[0] = (ei * (-u[0] + 2.0 * u[1] - 2.0 * u[3] + u[4]) / (2.0 * h * h * h) - load) / h;
        f[1] = (ei * (u[1] - 2.0 * u[2] + u[3]) / (h * h) - load * self.pile.eccentricity)
            / (h * h);
        for j in 0..n {
            let d4 = (u[j] - 4.0 * u[j + 1] + 6.0 * u[j + 2] - 4.0 * u[j + 3] + u[j + 4])
                / (h * h * h * h);
            f[2 + j] = ei * d4 + self.springs.resistance(self.depths[j], u[j + 2]);
        }
        f[n + 2] = ei * (u[n] - 2.0 * u[n + 1] + u[n + 2]) / (h * h) / (h * h);
        f[n + 3] =
            ei * (-u[n - 1] + 2.0 * u[n] - 2.0 * u[n + 2] + u[n + 3]) / (2.0 * h * h * h) / h;
        f
    }

    fn jacobian(&self, u: &[f64]) -> BandedMatrix {
        let n = self.n;
        let ei = self.pile.ei;
        let h = self.dz;
        let mut m = BandedMatrix::zeros(n + 4, 4, 4);
        let s3 = 1.0 / (2.0 * h * h * h) / h;
        let s2 = 1.0 / (h * h) / (h * h);
        m.set(0, 0, -ei * s3);
        m.set(0, 1, 2.0 * ei * s3);
        m.set(0, 3, -2.0 * ei * s3);
        m.set(0, 4, ei * s3);
        m.set(1, 1, ei * s2);
        m.set(1, 2, -2.0 * ei * s2);
        m.set(1, 3, ei * s2);
        let c = ei / (h * h * h * h);
        for j in 0..n {
            let r = 2 + j;
            m.set(r, j, c);
            m.set(r, j + 1, -4.0 * c);
            m.set(r, j + 2, 6.0 * c + self.springs.tangent(self.depths[j], u[j + 2]));
            m.set(r, j + 3, -4.0 * c);
            m.set(r, j + 4, c);
        }
        m.set(n + 2, n, ei * s2);
        m.set(n + 2, n + 1, -2.0 * ei * s2);
        m.set(n + 2, n + 2, ei * s2);
        m.set(n + 3, n - 1, -ei * s3);
        m.set(n + 3, n, 2.0 * ei * s3);
        m.set(n + 3, n + 2, -2.0 * ei * s3);
        m.set(n + 3, n + 3, ei * s3);
        m
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

const MAX_NEWTON_ITERS: usize = 100;
const REL_RESIDUAL_TOL: f64 = 1e-8;
const ABS_UPDATE_TOL: f64 = 1e-10;

/// Newton iteration at a fixed load from an initial state. Returns the
/// extended unknown vector and the relative residual reached.
fn newton_at_load(sys: &System, mut u: Vec<f64>, load: f64, step: usize) -> Result<(Vec<f64>, f64)> {
    let f0 = sys.residual(&u, load);
    let ref_norm = inf_norm(&f0);
    if ref_norm == 0.0 {
        return Ok((u, 0.0));
    }
    let mut norm = ref_norm;
    let mut history = vec![norm];
    for _ in 0..MAX_NEWTON_ITERS {
        let f = sys.residual(&u, load);
        norm = inf_norm(&f);
        if norm <= REL_RESIDUAL_TOL * ref_norm {
            return Ok((u, norm / ref_norm));
        }
        let jac = sys.jacobian(&u);
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = jac.solve(rhs).map_err(|e| match e {
            Error::Singular(msg) => Error::Singular(format!(
                "rigid-body singularity or degenerate springs at load {load}: {msg}"
            )),
            other => other,
        })?;
        // light backtracking: accept the longest step that does not grow
        // the residual
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&delta)
                .map(|(a, d)| a + alpha * d)
                .collect();
            let trial_norm = inf_norm(&sys.residual(&trial, load));
            if trial_norm <= norm || alpha * inf_norm(&delta) <= ABS_UPDATE_TOL {
                u = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // take the damped step anyway; the next iteration re-linearizes
            u = u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
        }
        history.push(inf_norm(&sys.residual(&u, load)));
        if alpha * inf_norm(&delta) <= ABS_UPDATE_TOL {
            let final_norm = *history.last().unwrap();
            return Ok((u, final_norm / ref_norm));
        }
    }
    let tail = history.split_off(history.len().saturating_sub(8));
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON_ITERS,
        step,
        load,
        history: tail,
    })
}

fn extract_solution(sys: &System, u: &[f64], last_rel_residual: f64) -> BeamSolution {
    let n = sys.n;
    let h = sys.dz;
    let ei = sys.pile.ei;
    let mut deflection = Vec::with_capacity(n);
    let mut rotation = Vec::with_capacity(n);
    let mut moment = Vec::with_capacity(n);
    let mut shear = Vec::with_capacity(n);
    let mut soil = Vec::with_capacity(n);
    for j in 0..n {
        let y = u[j + 2];
        deflection.push(y);
        rotation.push((u[j + 3] - u[j + 1]) / (2.0 * h));
        moment.push(ei * (u[j + 1] - 2.0 * u[j + 2] + u[j + 3]) / (h * h));
        shear.push(ei * (-u[j] + 2.0 * u[j + 1] - 2.0 * u[j + 3] + u[j + 4]) / (2.0 * h * h * h));
        soil.push(sys.springs.resistance(sys.depths[j], y));
    }
    BeamSolution {
        depths: sys.depths.clone(),
        deflection,
        rotation,
        moment,
        shear,
        soil_reaction: soil,
        converged: true,
        residual_norm: last_rel_residual,
    }
}

/// Continuation solve from rest: the load ramps to H over `steps` uniform
/// increments, each warm-started from the previous one.
pub fn solve_stepped(
    pile: &PileModel,
    springs: &SpringField,
    load: LoadCase,
    steps: usize,
    initial: Option<&[f64]>,
) -> Result<BeamSolution> {
    pile.validate()?;
    if springs.max_depth() < pile.embedded_length - 1e-9 * pile.embedded_length {
        return Err(Error::InvalidInput(format!(
            "springs cover depth {:.3} m but the pile is embedded {:.3} m",
            springs.max_depth(),
            pile.embedded_length
        )));
    }
    let n = pile.n_nodes;
    let sys = System {
        pile,
        springs,
        depths: pile.node_depths(),
        n,
        dz: pile.embedded_length / (n - 1) as f64,
    };
    let steps = steps.max(1);
    let mut u = match initial {
        Some(v) if v.len() == n + 4 => v.to_vec(),
        Some(_) => {
            return Err(Error::InvalidInput(
                "initial state has the wrong dimension".into(),
            ))
        }
        None => vec![0.0; n + 4],
    };
    let mut rel = 0.0;
    for step in 1..=steps {
        let h_now = load.h * step as f64 / steps as f64;
        let (next, r) = newton_at_load(&sys, u, h_now, step)?;
        u = next;
        rel = r;
    }
    Ok(extract_solution(&sys, &u, rel))
}

/// 20-step continuation from rest.
pub fn solve(pile: &PileModel, springs: &SpringField, load: LoadCase) -> Result<BeamSolution> {
    solve_stepped(pile, springs, load, 20, None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    /// (H, mudline deflection) pairs, one per solved load.
    pub points: Vec<(f64, f64)>,
    /// Set when a load failed; points cover everything before it.
    pub failure: Option<String>,
    pub solutions: Vec<BeamSolution>,
}

/// Solves an ascending load schedule with warm starts, returning partial
/// results up to the first failure.
pub fn head_sweep(pile: &PileModel, springs: &SpringField, h_values: &[f64]) -> Result<SweepResult> {
    pile.validate()?;
    if h_values.is_empty() || h_values[0] != 0.0 {
        return Err(Error::InvalidInput(
            "head sweep loads must start at 0".into(),
        ));
    }
    if h_values.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidInput(
            "head sweep loads must be sorted ascending".into(),
        ));
    }
    let n = pile.n_nodes;
    let mut points = Vec::with_capacity(h_values.len());
    let mut solutions = Vec::with_capacity(h_values.len());
    let mut state: Vec<f64> = vec![0.0; n + 4];
    let mut failure = None;
    for (i, &h) in h_values.iter().enumerate() {
        // warm start from the previous load; fall back to substepping
        let attempt = solve_stepped(pile, springs, LoadCase { h }, 1, Some(&state))
            .or_else(|_| solve_stepped(pile, springs, LoadCase { h }, 5, Some(&state)));
        match attempt {
            Ok(sol) => {
                points.push((h, sol.deflection[0]));
                // reconstruct the extended state for the next warm start
                state = reconstruct_state(pile, &sol);
                solutions.push(sol);
            }
            Err(e) => {
                failure = Some(format!("load {h} kN (index {i}): {e}"));
                break;
            }
        }
    }
    Ok(SweepResult {
        points,
        failure,
        solutions,
    })
}

fn reconstruct_state(pile: &PileModel, sol: &BeamSolution) -> Vec<f64> {
    let n = pile.n_nodes;
    let h = pile.embedded_length / (n - 1) as f64;
    let ei = pile.ei;
    let mut u = vec![0.0; n + 4];
    u[2..n + 2].copy_from_slice(&sol.deflection);
    // ghosts from the stored curvature/shear at the ends
    // y_{-1} = 2 y_0 - y_1 + M_0 h^2 / EI
    u[1] = 2.0 * sol.deflection[0] - sol.deflection[1] + sol.moment[0] * h * h / ei;
    // y_{-2} from the head shear stencil
    u[0] = -2.0 * sol.shear[0] * h * h * h / ei + 2.0 * u[1] - 2.0 * sol.deflection[1]
        + sol.deflection[2];
    u[n + 2] = 2.0 * sol.deflection[n - 1] - sol.deflection[n - 2]
        + sol.moment[n - 1] * h * h / ei;
    u[n + 3] = 2.0 * sol.shear[n - 1] * h * h * h / ei + sol.deflection[n - 3]
        - 2.0 * sol.deflection[n - 2] + 2.0 * u[n + 2];
    u
}

/// Moment profile recomputed from the deflections alone: central second
/// differences inside, second-order one-sided at the ends.
pub fn moment_profile(pile: &PileModel, solution: &BeamSolution) -> Vec<(f64, f64)> {
    let y = &solution.deflection;
    let n = y.len();
    let h = pile.embedded_length / (n - 1) as f64;
    let ei = pile.ei;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let ypp = if j == 0 {
            (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (h * h)
        } else if j == n - 1 {
            (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / (h * h)
        } else {
            (y[j - 1] - 2.0 * y[j] + y[j + 1]) / (h * h)
        };
        out.push((solution.depths[j], ei * ypp));
    }
    out
}

/// d2M/dz2 by central differences; non-uniform profiles are resampled onto
/// a uniform grid by natural cubic spline first. Endpoints are dropped.
pub fn differentiate_moment(profile: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if profile.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "moment differentiation needs at least 5 points, got {}",
            profile.len()
        )));
    }
    if profile.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidInput(
            "moment profile depths must be strictly increasing".into(),
        ));
    }
    let n = profile.len();
    let span = profile[n - 1].0 - profile[0].0;
    let h0 = span / (n - 1) as f64;
    let uniform = profile
        .windows(2)
        .all(|w| ((w[1].0 - w[0].0) - h0).abs() <= 1e-9 * span);
    let (zs, ms): (Vec<f64>, Vec<f64>) = if uniform {
        profile.iter().copied().unzip()
    } else {
        let zs: Vec<f64> = (0..n).map(|i| profile[0].0 + h0 * i as f64).collect();
        let ms = cubic_resample(profile, &zs);
        (zs, ms)
    };
    let mut out = Vec::with_capacity(n - 2);
    for j in 1..n - 1 {
        out.push((zs[j], (ms[j - 1] - 2.0 * ms[j] + ms[j + 1]) / (h0 * h0)));
    }
    Ok(out)
}

/// Natural cubic spline interpolation of (x, y) points at the query grid.
fn cubic_resample(points: &[(f64, f64)], queries: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut h = vec![0.0; n - 1];
    for i in 0..n - 1 {
        h[i] = points[i + 1].0 - points[i].0;
    }
    // second derivatives via the tridiagonal natural-spline system
    let mut a = vec![0.0; n];
    let mut b = vec![1.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        a[i] = h[i - 1];
        b[i] = 2.0 * (h[i - 1] + h[i]);
        c[i] = h[i];
        d[i] = 6.0
            * ((points[i + 1].1 - points[i].1) / h[i]
                - (points[i].1 - points[i - 1].1) / h[i - 1]);
    }
    // Thomas algorithm
    for i in 1..n {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = d[n - 1] / b[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
    }
    queries
        .iter()
        .map(|&x| {
            let mut seg = points.partition_point(|p| p.0 <= x);
            seg = seg.clamp(1, n - 1) - 1;
            let t = x - points[seg].0;
            let hi = h[seg];
            let (y0, y1) = (points[seg].1, points[seg + 1].1);
            let (m0, m1) = (m[seg], m[seg + 1]);
            y0 + t * ((y1 - y0) / hi - hi * (2.0 * m0 + m1) / 6.0)
                + t * t * m0 / 2.0
                + t * t * t * (m1 - m0) / (6.0 * hi)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct BalanceReport {
    /// |sum(p w) - H| over max(|H|, sum |p| w).
    pub force_residual: f64,
    /// |sum(p z w) + H e| over max(|H e|, sum |p| z w): in the resistance
    /// sign convention the reaction moment about the mudline cancels the
    /// applied head moment (integrate M'' = -p against z with free-tip
    /// boundaries to see the sign).
    pub moment_residual: f64,
}

/// Global force and mudline moment balance of a converged solution.
pub fn balance_report(pile: &PileModel, solution: &BeamSolution, load: LoadCase) -> BalanceReport {
    let n = solution.depths.len();
    let h = pile.embedded_length / (n - 1) as f64;
    let mut force = 0.0;
    let mut force_abs = 0.0;
    let mut moment = 0.0;
    let mut moment_abs = 0.0;
    for j in 0..n {
        let w = if j == 0 || j == n - 1 { h / 2.0 } else { h };
        let p = solution.soil_reaction[j];
        let z = solution.depths[j];
        force += p * w;
        force_abs += p.abs() * w;
        moment += p * z * w;
        moment_abs += p.abs() * z * w;
    }
    let he = load.h * pile.eccentricity;
    BalanceReport {
        force_residual: (force - load.h).abs() / load.h.abs().max(force_abs).max(1e-300),
        moment_residual: (moment + he).abs() / he.abs().max(moment_abs).max(1e-300),
    }
}

/// Writes z_m,y_m,rotation_rad,M_kNm,V_kN,p_kNm rows.
pub fn write_solution_csv(path: &std::path::Path, solution: &BeamSolution) -> Result<()> {
    let mut out = String::from("z_m,y_m,rotation_rad,M_kNm,V_kN,p_kNm\n");
    for j in 0..solution.depths.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            solution.depths[j],
            solution.deflection[j],
            solution.rotation[j],
            solution.moment[j],
            solution.shear[j],
            solution.soil_reaction[j]
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes H_kN,y_head_m rows.
pub fn write_sweep_csv(path: &std::path::Path, sweep: &SweepResult) -> Result<()> {
    let mut out = String::from("H_kN,y_head_m\n");
    for &(h, y) in &sweep.points {
        out.push_str(&format!("{h},{y}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
