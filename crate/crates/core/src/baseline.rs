//! Hyperbolic-tangent p-y backbone in the style of the offshore design
//! codes: p = A_c · p_u · tanh(k_in · z · y / (A_c · p_u)). Serves as the
//! synthetic-data oracle and as a comparison baseline for the learned model.
//! The wedge/flow coefficients are explicit inputs, not code-clause values.

use serde::{Deserialize, Serialize};

use crate::dataset::{PYRecord, PileSoilCase};
use crate::error::{Error, Result};

/// Loading coefficient A_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadingCoefficient {
    /// Conventional static coefficient max(3 - 0.8 z/D, 0.9).
    Static,
    /// Fixed value; must be >= 0.9.
    Constant(f64),
}

impl LoadingCoefficient {
    pub fn value(&self, z: f64, diameter: f64) -> f64 {
        match self {
            LoadingCoefficient::Static => (3.0 - 0.8 * z / diameter).max(0.9),
            LoadingCoefficient::Constant(a) => *a,
        }
    }
}

/// Shallow-wedge / deep-flow coefficients for the ultimate resistance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeFlowCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for WedgeFlowCoeffs {
    fn default() -> Self {
        // Placeholder magnitudes for synthetic-data generation; calibrate
        // per project when matching a specific design code.
        Self {
            c1: 3.0,
            c2: 3.0,
            c3: 30.0,
        }
    }
}

/// How the ultimate resistance profile is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PuModel {
    /// Piecewise-linear (z, p_u) table; no extrapolation outside its range.
    Direct(Vec<(f64, f64)>),
    /// min(C1 z + C2 D, C3 D) · γ′ z from the case properties.
    Computed(WedgeFlowCoeffs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiPyParams {
    pub a_c: LoadingCoefficient,
    /// Initial modulus-of-subgrade-reaction coefficient, kN/m³.
    pub k_in: f64,
    pub p_u: PuModel,
}

impl Default for ApiPyParams {
    fn default() -> Self {
        Self {
            a_c: LoadingCoefficient::Static,
            k_in: 15_000.0,
            p_u: PuModel::Computed(WedgeFlowCoeffs::default()),
        }
    }
}

impl ApiPyParams {
    pub fn validate(&self) -> Result<()> {
        if let LoadingCoefficient::Constant(a) = self.a_c {
            if !(a >= 0.9) {
                return Err(Error::InvalidInput(format!(
                    "loading coefficient {a} below the 0.9 static floor"
                )));
            }
        }
        if !(self.k_in > 0.0) {
            return Err(Error::InvalidInput(format!(
                "k_in = {} must be > 0",
                self.k_in
            )));
        }
        match &self.p_u {
            PuModel::Direct(table) => {
                if table.is_empty() {
                    return Err(Error::InvalidInput("empty p_u table".into()));
                }
                for w in table.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidInput(
                            "p_u table depths must be strictly increasing".into(),
                        ));
                    }
                }
                if table.iter().any(|&(_, p)| !(p > 0.0)) {
                    return Err(Error::InvalidInput("p_u table values must be > 0".into()));
                }
            }
            PuModel::Computed(c) => {
                if !(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "wedge/flow coefficients ({}, {}, {}) must be positive",
                        c.c1, c.c2, c.c3
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolves p_u at depth z for the given case.
    pub fn ultimate(&self, z: f64, case: &PileSoilCase) -> Result<f64> {
        match &self.p_u {
            PuModel::Direct(table) => {
                let (z0, _) = table[0];
                let (z1, _) = table[table.len() - 1];
                if z < z0 || z > z1 {
                    return Err(Error::InvalidInput(format!(
                        "depth z = {z} outside p_u table range [{z0}, {z1}] (no extrapolation)"
                    )));
                }
                for w in table.windows(2) {
                    if z <= w[1].0 {
                        let t = (z - w[0].0) / (w[1].0 - w[0].0);
                        return Ok(w[0].1 + t * (w[1].1 - w[0].1));
                    }
                }
                Ok(table[table.len() - 1].1)
            }
            PuModel::Computed(c) => {
                ultimate_resistance(z, case.gamma_eff, case.diameter, c)
            }
        }
    }
}

/// Ultimate resistance p_u = min(C1 z + C2 D, C3 D) · γ′ z, kN/m: the
/// shallow-wedge vs. deep-flow minimum with explicit coefficients.
pub fn ultimate_resistance(
    z: f64,
    gamma_eff: f64,
    diameter: f64,
    coeffs: &WedgeFlowCoeffs,
) -> Result<f64> {
    if !(z > 0.0 && gamma_eff > 0.0 && diameter > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ultimate_resistance needs positive inputs (z = {z}, gamma' = {gamma_eff}, D = {diameter})"
        )));
    }
    if !(coeffs.c1 > 0.0 && coeffs.c2 > 0.0 && coeffs.c3 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wedge/flow coefficients ({}, {}, {}) must be positive",
            coeffs.c1, coeffs.c2, coeffs.c3
        )));
    }
    let wedge = coeffs.c1 * z + coeffs.c2 * diameter;
    let flow = coeffs.c3 * diameter;
    Ok(wedge.min(flow) * gamma_eff * z)
}

/// Backbone resistance at deflection y and depth z, kN/m. Continuous and
/// monotone non-decreasing in y, saturating at A_c · p_u.
pub fn api_p(y: f64, z: f64, params: &ApiPyParams, case: &PileSoilCase) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::InvalidInput(format!("deflection y = {y} must be >= 0")));
    }
    if !(z > 0.0) {
        return Err(Error::InvalidInput(format!("depth z = {z} must be > 0")));
    }
    let p_u = params.ultimate(z, case)?;
    let cap = params.a_c.value(z, case.diameter) * p_u;
    if cap <= 0.0 {
        return Ok(0.0);
    }
    Ok(cap * (params.k_in * z * y / cap).tanh())
}

/// Evaluates the backbone over a sorted deflection grid at one depth.
pub fn sample_curve(
    params: &ApiPyParams,
    case: &PileSoilCase,
    z: f64,
    y_grid: &[f64],
) -> Result<Vec<PYRecord>> {
    if y_grid.windows(2).any(|w| w[1] < w[0]) || y_grid.first().is_some_and(|&y| y < 0.0) {
        return Err(Error::InvalidInput(
            "y_grid must be sorted ascending and non-negative".into(),
        ));
    }
    y_grid
        .iter()
        .map(|&y| {
            Ok(PYRecord {
                case_id: case.case_id.clone(),
                depth: z,
                deflection: y,
                resistance: api_p(y, z, params, case)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::GAMMA_WATER_KNM3;

    fn case() -> PileSoilCase {
        PileSoilCase {
            case_id: "b1".into(),
            source_id: "unit".into(),
            relative_density: 0.8,
            friction_angle_deg: 33.0,
            gamma_eff: 10.0,
            gamma_water: GAMMA_WATER_KNM3,
            diameter: 2.0,
            embedded_length: 20.0,
            pile_modulus: 2.1e8,
            eccentricity: 0.0,
        }
    }

    #[test]
    fn zero_deflection_gives_zero_resistance() {
        let p = api_p(0.0, 3.0, &ApiPyParams::default(), &case()).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn saturates_at_capacity() {
        let params = ApiPyParams::default();
        let c = case();
        let z = 3.0;
        let p_u = params.ultimate(z, &c).unwrap();
        let cap = params.a_c.value(z, c.diameter) * p_u;
        // y where the tanh argument reaches 5
        let y = 5.0 * cap / (params.k_in * z);
        let p = api_p(y, z, &params, &c).unwrap();
        assert!(p >= 0.9999 * cap);
        assert!(p <= cap);
    }

    #[test]
    fn initial_slope_equals_kin_times_depth() {
        let params = ApiPyParams::default();
        let c = case();
        for z in [0.5, 2.0, 5.0] {
            let y = 1e-9;
            let slope = api_p(y, z, &params, &c).unwrap() / y;
            let expect = params.k_in * z;
            assert!(
                (slope - expect).abs() / expect < 1e-4,
                "z = {z}: slope {slope} vs {expect}"
            );
        }
    }

    #[test]
    fn ultimate_resistance_hand_value() {
        // C1=3, C2=2, C3=30, D=1, gamma'=10, z=2 -> min(8, 30) * 20 = 160
        let coeffs = WedgeFlowCoeffs {
            c1: 3.0,
            c2: 2.0,
            c3: 30.0,
        };
        let p_u = ultimate_resistance(2.0, 10.0, 1.0, &coeffs).unwrap();
        assert!((p_u - 160.0).abs() < 1e-12);
    }

    #[test]
    fn ultimate_resistance_deep_branch_governs() {
        let coeffs = WedgeFlowCoeffs {
            c1: 3.0,
            c2: 3.0,
            c3: 4.0,
        };
        // z large: C1 z + C2 D = 33 > C3 D = 4
        let p_u = ultimate_resistance(10.0, 10.0, 1.0, &coeffs).unwrap();
        assert!((p_u - 4.0 * 10.0 * 10.0).abs() < 1e-12);
    }

    #[test]
    fn ultimate_resistance_vanishes_toward_surface() {
        let coeffs = WedgeFlowCoeffs::default();
        let p_small = ultimate_resistance(1e-9, 10.0, 1.0, &coeffs).unwrap();
        assert!(p_small < 1e-6);
    }

    #[test]
    fn direct_table_interpolates_and_refuses_extrapolation() {
        let params = ApiPyParams {
            p_u: PuModel::Direct(vec![(1.0, 100.0), (3.0, 300.0)]),
            ..ApiPyParams::default()
        };
        let c = case();
        assert!((params.ultimate(2.0, &c).unwrap() - 200.0).abs() < 1e-12);
        assert!(params.ultimate(0.5, &c).is_err());
        assert!(params.ultimate(3.5, &c).is_err());
        assert!(api_p(0.01, 4.0, &params, &c).is_err());
    }

    #[test]
    fn curve_is_monotone_and_bounded() {
        let params = ApiPyParams::default();
        let c = case();
        for zi in 1..=10 {
            let z = zi as f64 * 0.8;
            let cap = params.a_c.value(z, c.diameter) * params.ultimate(z, &c).unwrap();
            let mut prev = -1.0;
            for yi in 0..100 {
                let y = yi as f64 * 0.005;
                let p = api_p(y, z, &params, &c).unwrap();
                assert!(p >= prev, "monotonicity broken at z={z}, y={y}");
                assert!(p <= cap + 1e-9);
                prev = p;
            }
        }
    }

    #[test]
    fn secant_stiffness_non_increasing() {
        // p(y)/y non-increasing in y (concave backbone)
        let params = ApiPyParams::default();
        let c = case();
        let z = 3.0;
        let mut prev = f64::INFINITY;
        for yi in 1..60 {
            let y = yi as f64 * 0.002;
            let sec = api_p(y, z, &params, &c).unwrap() / y;
            assert!(sec <= prev + 1e-9);
            prev = sec;
        }
    }

    #[test]
    fn sample_curve_grid_behaviour() {
        let params = ApiPyParams::default();
        let c = case();
        let recs = sample_curve(&params, &c, 2.0, &[0.0]).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].resistance, 0.0);

        let grid: Vec<f64> = (0..12).map(|i| i as f64 * 0.004).collect();
        let recs = sample_curve(&params, &c, 2.0, &grid).unwrap();
        assert_eq!(recs.len(), 12);
        assert!(recs.windows(2).all(|w| w[1].resistance >= w[0].resistance));

        // doubling k_in doubles the small-deflection secant slope
        let y1 = 1e-6;
        let p1 = api_p(y1, 2.0, &params, &c).unwrap();
        let params2 = ApiPyParams {
            k_in: 2.0 * params.k_in,
            ..params.clone()
        };
        let p2 = api_p(y1, 2.0, &params2, &c).unwrap();
        assert!((p2 / p1 - 2.0).abs() < 0.01);
    }

    #[test]
    fn ultimate_is_continuous_in_depth() {
        // min of two continuous branches: scan across the crossover
        let coeffs = WedgeFlowCoeffs {
            c1: 3.0,
            c2: 3.0,
            c3: 10.0,
        };
        // crossover where 3z + 3D = 10D -> z = 7D/3
        let d = 1.5;
        let zc = 7.0 * d / 3.0;
        let mut prev = None;
        for i in -50..=50 {
            let z = zc + i as f64 * 1e-4;
            let v = ultimate_resistance(z, 10.0, d, &coeffs).unwrap();
            if let Some(p) = prev {
                let p: f64 = p;
                assert!((v - p).abs() < 0.5, "jump near crossover: {p} -> {v}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn constant_loading_coefficient_floor() {
        let params = ApiPyParams {
            a_c: LoadingCoefficient::Constant(0.5),
            ..ApiPyParams::default()
        };
        assert!(params.validate().is_err());
    }
}
