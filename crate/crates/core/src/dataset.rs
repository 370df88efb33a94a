//! Physical and dimensionless data model for the p-y curve database:
//! CSV ingestion with per-row validation, featurization of (case, record)
//! pairs into the six dimensionless inputs plus the target p/(γ′zD),
//! train/validation/test splitting, violin-style distribution summaries,
//! and a synthetic database generator driven by the backbone model.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::baseline::ApiPyParams;
use crate::error::{Error, Result};
use crate::numeric;

/// Atmospheric pressure, kPa.
pub const P_ATM_KPA: f64 = 101.325;
/// Unit weight of water used by the synthetic generator, kN/m³.
pub const GAMMA_WATER_KNM3: f64 = 9.81;

pub const N_FEATURES: usize = 6;
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "Dr",
    "phi_cr_deg",
    "stress_slenderness",
    "z_over_D",
    "y_over_D",
    "gamma_ratio",
];
pub const TARGET_NAME: &str = "p_bar";

/// Database envelopes per feature: the ranges the learned model was
/// developed for. Queries outside them are extrapolation and get flagged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureEnvelopes {
    pub dr: (f64, f64),
    pub phi_cr_deg: (f64, f64),
    pub gamma_ratio: (f64, f64),
    pub diameter_m: (f64, f64),
    pub stress_slenderness: (f64, f64),
    pub z_over_d: (f64, f64),
    pub y_over_d: (f64, f64),
    pub p_bar: (f64, f64),
}

impl Default for FeatureEnvelopes {
    fn default() -> Self {
        Self {
            dr: (0.60, 1.00),
            phi_cr_deg: (28.50, 37.10),
            gamma_ratio: (0.48, 1.00),
            diameter_m: (0.24, 8.00),
            stress_slenderness: (2.50, 120.14),
            z_over_d: (0.20, 6.13),
            y_over_d: (0.00, 0.43),
            p_bar: (0.00, 96.84),
        }
    }
}

/// One pile-soil test setup: geometry of the monopile and the mechanical
/// state of the sand it is driven in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PileSoilCase {
    pub case_id: String,
    /// Study or test campaign the curve came from.
    pub source_id: String,
    /// Relative density Dr, fraction in (0, 1].
    pub relative_density: f64,
    /// Critical-state friction angle, degrees.
    pub friction_angle_deg: f64,
    /// Effective unit weight γ′, kN/m³.
    pub gamma_eff: f64,
    /// Unit weight of water γ_w, kN/m³; 0 for dry tests.
    pub gamma_water: f64,
    /// Pile diameter D, m.
    pub diameter: f64,
    /// Embedded pile length L_p, m.
    pub embedded_length: f64,
    /// Pile elastic modulus E_p, kPa.
    pub pile_modulus: f64,
    /// Lateral-load eccentricity above mudline, m.
    pub eccentricity: f64,
}

impl PileSoilCase {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("case {}: {msg}", self.case_id)));
        if !(self.relative_density > 0.0 && self.relative_density <= 1.0) {
            return bad(format!("Dr = {} outside (0, 1]", self.relative_density));
        }
        if !(20.0..=50.0).contains(&self.friction_angle_deg) {
            return bad(format!(
                "phi_cr_deg = {} outside [20, 50]",
                self.friction_angle_deg
            ));
        }
        if !(self.gamma_eff > 0.0) {
            return bad(format!("gamma_eff = {} must be > 0", self.gamma_eff));
        }
        if !(self.gamma_water >= 0.0) {
            return bad(format!("gamma_w = {} must be >= 0", self.gamma_water));
        }
        if !(self.diameter > 0.0) {
            return bad(format!("D = {} must be > 0", self.diameter));
        }
        if !(self.embedded_length > 0.0) {
            return bad(format!("Lp = {} must be > 0", self.embedded_length));
        }
        if !(self.pile_modulus > 0.0) {
            return bad(format!("Ep = {} must be > 0", self.pile_modulus));
        }
        if !(self.eccentricity >= 0.0) {
            return bad(format!("e = {} must be >= 0", self.eccentricity));
        }
        Ok(())
    }

    /// Gross cross-section area πD²/4, m².
    pub fn cross_section_area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    /// Gross second moment of area πD⁴/64, m⁴.
    pub fn second_moment(&self) -> f64 {
        std::f64::consts::PI * self.diameter.powi(4) / 64.0
    }

    /// Flexural rigidity E_p I_p, kN·m².
    pub fn flexural_rigidity(&self) -> f64 {
        self.pile_modulus * self.second_moment()
    }

    /// γ′ / (γ_w + γ′), dimensionless in (0, 1].
    pub fn gamma_ratio(&self) -> f64 {
        self.gamma_eff / (self.gamma_water + self.gamma_eff)
    }
}

/// One digitized point of a p-y curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PYRecord {
    pub case_id: String,
    /// Depth below mudline z, m.
    pub depth: f64,
    /// Lateral deflection y, m.
    pub deflection: f64,
    /// Soil resistance per unit length p, kN/m.
    pub resistance: f64,
}

impl PYRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "record for case {}: z_m = {} must be > 0",
                self.case_id, self.depth
            )));
        }
        if !(self.deflection >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "record for case {}: y_m = {} must be >= 0",
                self.case_id, self.deflection
            )));
        }
        if !(self.resistance >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "record for case {}: p_kNm = {} must be >= 0",
                self.case_id, self.resistance
            )));
        }
        Ok(())
    }
}

/// The six dimensionless model inputs, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn relative_density(&self) -> f64 {
        self.0[0]
    }
    pub fn friction_angle_deg(&self) -> f64 {
        self.0[1]
    }
    /// sqrt(σ′_v L_p² / (p_a A)).
    pub fn stress_slenderness(&self) -> f64 {
        self.0[2]
    }
    pub fn z_over_d(&self) -> f64 {
        self.0[3]
    }
    pub fn y_over_d(&self) -> f64 {
        self.0[4]
    }
    pub fn gamma_ratio(&self) -> f64 {
        self.0[5]
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "feature vector has non-finite entries: {:?}",
                self.0
            )));
        }
        if !(self.stress_slenderness() > 0.0) {
            return Err(Error::InvalidInput(
                "stress_slenderness must be > 0".into(),
            ));
        }
        if !(self.z_over_d() > 0.0) {
            return Err(Error::InvalidInput("z_over_D must be > 0".into()));
        }
        if !(self.y_over_d() >= 0.0) {
            return Err(Error::InvalidInput("y_over_D must be >= 0".into()));
        }
        if !(self.gamma_ratio() > 0.0 && self.gamma_ratio() <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "gamma_ratio = {} outside (0, 1]",
                self.gamma_ratio()
            )));
        }
        Ok(())
    }
}

/// One training point: dimensionless features and target p̄ = p/(γ′zD).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: FeatureVector,
    pub target: f64,
    pub case_id: String,
}

/// Builds a [`Sample`] from a case and one of its records.
pub fn featurize(case: &PileSoilCase, rec: &PYRecord) -> Result<Sample> {
    if rec.case_id != case.case_id {
        return Err(Error::InvalidInput(format!(
            "record case_id {} does not match case {}",
            rec.case_id, case.case_id
        )));
    }
    if !(rec.depth > 0.0) {
        return Err(Error::InvalidInput(format!(
            "case {}: record at z = {} rejected (depth must be > 0)",
            case.case_id, rec.depth
        )));
    }
    let sigma_v = case.gamma_eff * rec.depth;
    let area = case.cross_section_area();
    let features = FeatureVector([
        case.relative_density,
        case.friction_angle_deg,
        (sigma_v * case.embedded_length * case.embedded_length / (P_ATM_KPA * area)).sqrt(),
        rec.depth / case.diameter,
        rec.deflection / case.diameter,
        case.gamma_ratio(),
    ]);
    features.validate()?;
    let target = rec.resistance / (case.gamma_eff * rec.depth * case.diameter);
    if !target.is_finite() || target < 0.0 {
        return Err(Error::InvalidInput(format!(
            "case {}: target p_bar = {target} invalid",
            case.case_id
        )));
    }
    Ok(Sample {
        features,
        target,
        case_id: case.case_id.clone(),
    })
}

/// Featurizes a whole database, indexing cases by id.
pub fn featurize_all(cases: &[PileSoilCase], records: &[PYRecord]) -> Result<Vec<Sample>> {
    let by_id: BTreeMap<&str, &PileSoilCase> =
        cases.iter().map(|c| (c.case_id.as_str(), c)).collect();
    records
        .iter()
        .map(|r| {
            let case = by_id.get(r.case_id.as_str()).ok_or_else(|| {
                Error::InvalidInput(format!("record references unknown case_id {}", r.case_id))
            })?;
            featurize(case, r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Individual samples shuffled into subsets; curve identity leaks.
    PointWise,
    /// Whole curves (grouped by case_id) assigned to one subset each.
    CurveWise,
}

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    pub seed: u64,
    pub mode: SplitMode,
}

/// Deterministic 70/15/15 split. Point-wise shuffles samples; curve-wise
/// shuffles case ids so no curve straddles two subsets.
pub fn split(samples: &[Sample], seed: u64, mode: SplitMode) -> Result<DatasetSplit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, validation, test) = match mode {
        SplitMode::PointWise => {
            if samples.len() < 10 {
                return Err(Error::InvalidInput(format!(
                    "point-wise split needs at least 10 samples, got {}",
                    samples.len()
                )));
            }
            let mut idx: Vec<usize> = (0..samples.len()).collect();
            idx.shuffle(&mut rng);
            let (a, b) = seventy_fifteen(samples.len());
            let pick = |ix: &[usize]| ix.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
            (pick(&idx[..a]), pick(&idx[a..a + b]), pick(&idx[a + b..]))
        }
        SplitMode::CurveWise => {
            let mut curve_ids: Vec<&str> = Vec::new();
            let mut seen = BTreeSet::new();
            for s in samples {
                if seen.insert(s.case_id.as_str()) {
                    curve_ids.push(s.case_id.as_str());
                }
            }
            if curve_ids.len() < 10 {
                return Err(Error::InvalidInput(format!(
                    "curve-wise split needs at least 10 distinct case_ids, got {}",
                    curve_ids.len()
                )));
            }
            curve_ids.shuffle(&mut rng);
            let (a, b) = seventy_fifteen(curve_ids.len());
            let train_set: BTreeSet<&str> = curve_ids[..a].iter().copied().collect();
            let val_set: BTreeSet<&str> = curve_ids[a..a + b].iter().copied().collect();
            let mut tr = Vec::new();
            let mut va = Vec::new();
            let mut te = Vec::new();
            for s in samples {
                if train_set.contains(s.case_id.as_str()) {
                    tr.push(s.clone());
                } else if val_set.contains(s.case_id.as_str()) {
                    va.push(s.clone());
                } else {
                    te.push(s.clone());
                }
            }
            (tr, va, te)
        }
    };
    Ok(DatasetSplit {
        train,
        validation,
        test,
        seed,
        mode,
    })
}

fn seventy_fifteen(n: usize) -> (usize, usize) {
    let train = (0.70 * n as f64).round() as usize;
    let val = (0.15 * n as f64).round() as usize;
    (train.min(n), val.min(n - train.min(n)))
}

/// Splits off the listed case ids for generalization checks. Returns
/// (retained, held_out); errors on unknown ids.
pub fn hold_out(samples: &[Sample], case_ids: &[String]) -> Result<(Vec<Sample>, Vec<Sample>)> {
    let present: BTreeSet<&str> = samples.iter().map(|s| s.case_id.as_str()).collect();
    for id in case_ids {
        if !present.contains(id.as_str()) {
            return Err(Error::InvalidInput(format!(
                "hold-out case_id {id} not present in dataset"
            )));
        }
    }
    let held: BTreeSet<&str> = case_ids.iter().map(|s| s.as_str()).collect();
    let (out, kept): (Vec<Sample>, Vec<Sample>) = samples
        .iter()
        .cloned()
        .partition(|s| held.contains(s.case_id.as_str()));
    Ok((kept, out))
}

/// Violin/box summary of one feature (or the target): raw-value quartiles
/// and a kernel density over the min-max-normalized values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// (normalized grid value, density) pairs; grid spans [0, 1].
    pub kde: Vec<(f64, f64)>,
}

const KDE_GRID: usize = 200;

fn summarize_values(values: &[f64]) -> FeatureSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let q1 = numeric::quantile_sorted(&sorted, 0.25);
    let median = numeric::quantile_sorted(&sorted, 0.5);
    let q3 = numeric::quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let range = max - min;
    // Normalize to [0, 1] for the violin silhouette; a zero-spread feature
    // collapses to 0.5.
    let norm: Vec<f64> = if range > 0.0 {
        sorted.iter().map(|v| (v - min) / range).collect()
    } else {
        vec![0.5; sorted.len()]
    };
    let mut h = numeric::silverman_bandwidth(&norm);
    if h <= 0.0 {
        h = 0.05;
    }
    let grid = numeric::linspace(0.0, 1.0, KDE_GRID);
    let dens = numeric::gaussian_kde(&norm, &grid, h);
    FeatureSummary {
        min,
        max,
        q1,
        median,
        q3,
        whisker_low: min.max(q1 - 1.5 * iqr),
        whisker_high: max.min(q3 + 1.5 * iqr),
        kde: grid.into_iter().zip(dens).collect(),
    }
}

/// Summaries for the six features plus the target, keyed by name.
pub fn summarize(samples: &[Sample]) -> Result<BTreeMap<String, FeatureSummary>> {
    if samples.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "summary needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    let mut out = BTreeMap::new();
    for (k, name) in FEATURE_NAMES.iter().enumerate() {
        let col: Vec<f64> = samples.iter().map(|s| s.features.0[k]).collect();
        out.insert(name.to_string(), summarize_values(&col));
    }
    let targets: Vec<f64> = samples.iter().map(|s| s.target).collect();
    out.insert(TARGET_NAME.to_string(), summarize_values(&targets));
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV ingestion and emission
// ---------------------------------------------------------------------------

pub const CASES_HEADER: [&str; 10] = [
    "case_id",
    "source_id",
    "Dr",
    "phi_cr_deg",
    "gamma_eff_kNm3",
    "gamma_w_kNm3",
    "D_m",
    "Lp_m",
    "Ep_kPa",
    "e_m",
];
pub const RECORDS_HEADER: [&str; 4] = ["case_id", "z_m", "y_m", "p_kNm"];

fn check_header(path: &Path, got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    let got_cols: Vec<&str> = got.iter().collect();
    if got_cols != want {
        return Err(Error::CsvFile {
            path: path.to_path_buf(),
            message: format!("header {got_cols:?} does not match expected {want:?}"),
        });
    }
    Ok(())
}

fn parse_field(path: &Path, row: usize, name: &str, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::CsvRow {
        path: path.to_path_buf(),
        row,
        message: format!("column {name}: non-numeric value {raw:?}"),
    })
}

/// Loads the cases table. Row numbers in errors are 1-based file lines.
pub fn load_cases(path: &Path) -> Result<Vec<PileSoilCase>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::CsvFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    check_header(path, rdr.headers().map_err(|e| Error::CsvFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?, &CASES_HEADER)?;
    let mut cases = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::CsvRow {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if rec.len() != CASES_HEADER.len() {
            return Err(Error::CsvRow {
                path: path.to_path_buf(),
                row,
                message: format!("expected {} columns, got {}", CASES_HEADER.len(), rec.len()),
            });
        }
        let case = PileSoilCase {
            case_id: rec[0].trim().to_string(),
            source_id: rec[1].trim().to_string(),
            relative_density: parse_field(path, row, "Dr", &rec[2])?,
            friction_angle_deg: parse_field(path, row, "phi_cr_deg", &rec[3])?,
            gamma_eff: parse_field(path, row, "gamma_eff_kNm3", &rec[4])?,
            gamma_water: parse_field(path, row, "gamma_w_kNm3", &rec[5])?,
            diameter: parse_field(path, row, "D_m", &rec[6])?,
            embedded_length: parse_field(path, row, "Lp_m", &rec[7])?,
            pile_modulus: parse_field(path, row, "Ep_kPa", &rec[8])?,
            eccentricity: parse_field(path, row, "e_m", &rec[9])?,
        };
        case.validate().map_err(|e| Error::CsvRow {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if !ids.insert(case.case_id.clone()) {
            return Err(Error::CsvRow {
                path: path.to_path_buf(),
                row,
                message: format!("duplicate case_id {}", case.case_id),
            });
        }
        cases.push(case);
    }
    Ok(cases)
}

/// Loads the p-y records table and checks every row against a known case.
pub fn load_records(path: &Path, cases: &[PileSoilCase]) -> Result<Vec<PYRecord>> {
    let known: BTreeSet<&str> = cases.iter().map(|c| c.case_id.as_str()).collect();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::CsvFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    check_header(path, rdr.headers().map_err(|e| Error::CsvFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?, &RECORDS_HEADER)?;
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::CsvRow {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if rec.len() != RECORDS_HEADER.len() {
            return Err(Error::CsvRow {
                path: path.to_path_buf(),
                row,
                message: format!(
                    "expected {} columns, got {}",
                    RECORDS_HEADER.len(),
                    rec.len()
                ),
            });
        }
        let r = PYRecord {
            case_id: rec[0].trim().to_string(),
            depth: parse_field(path, row, "z_m", &rec[1])?,
            deflection: parse_field(path, row, "y_m", &rec[2])?,
            resistance: parse_field(path, row, "p_kNm", &rec[3])?,
        };
        if !known.contains(r.case_id.as_str()) {
            return Err(Error::CsvRow {
                path: path.to_path_buf(),
                row,
                message: format!("unknown case_id {}", r.case_id),
            });
        }
        r.validate().map_err(|e| Error::CsvRow {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        records.push(r);
    }
    Ok(records)
}

/// Loads a full database from the two canonical CSV files.
pub fn load_database(cases_path: &Path, records_path: &Path) -> Result<(Vec<PileSoilCase>, Vec<PYRecord>)> {
    let cases = load_cases(cases_path)?;
    let records = load_records(records_path, &cases)?;
    Ok((cases, records))
}

pub fn write_cases_csv(path: &Path, cases: &[PileSoilCase]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::CsvFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let emit = |w: &mut csv::Writer<std::fs::File>, fields: &[String]| -> Result<()> {
        w.write_record(fields).map_err(|e| Error::CsvFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    };
    emit(&mut w, &CASES_HEADER.map(String::from))?;
    for c in cases {
        emit(
            &mut w,
            &[
                c.case_id.clone(),
                c.source_id.clone(),
                c.relative_density.to_string(),
                c.friction_angle_deg.to_string(),
                c.gamma_eff.to_string(),
                c.gamma_water.to_string(),
                c.diameter.to_string(),
                c.embedded_length.to_string(),
                c.pile_modulus.to_string(),
                c.eccentricity.to_string(),
            ],
        )?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records_csv(path: &Path, records: &[PYRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::CsvFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    w.write_record(RECORDS_HEADER)
        .map_err(|e| Error::CsvFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    for r in records {
        w.write_record([
            r.case_id.clone(),
            r.depth.to_string(),
            r.deflection.to_string(),
            r.resistance.to_string(),
        ])
        .map_err(|e| Error::CsvFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Synthetic database generation
// ---------------------------------------------------------------------------

/// Ranges the generator samples pile-soil cases from. Defaults stay inside
/// the database envelopes so featurized values land in-range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_curves: usize,
    pub points_per_curve: usize,
    /// Sigma of the multiplicative lognormal noise (median 1); 0 disables.
    pub noise_sigma: f64,
    /// Fraction of curves generated as dry tests (γ_w = 0, gamma_ratio = 1).
    pub dry_fraction: f64,
    pub dr_range: (f64, f64),
    pub phi_range_deg: (f64, f64),
    pub diameter_range_m: (f64, f64),
    /// Slenderness L_p/D range.
    pub slenderness_range: (f64, f64),
    /// γ′ for submerged tests; dry tests use `gamma_eff_dry_range`.
    pub gamma_eff_wet_range: (f64, f64),
    pub gamma_eff_dry_range: (f64, f64),
    pub z_over_d_range: (f64, f64),
    pub y_over_d_max: f64,
    /// Deflection grid y_i ∝ (i/(n-1))^grid_power clusters points near the
    /// origin where the backbone rises.
    pub grid_power: f64,
    pub eccentricity_range_m: (f64, f64),
    /// Steel modulus, kPa.
    pub pile_modulus_kpa: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let env = FeatureEnvelopes::default();
        Self {
            n_curves: 221,
            points_per_curve: 12,
            noise_sigma: 0.05,
            dry_fraction: 0.5,
            dr_range: env.dr,
            phi_range_deg: env.phi_cr_deg,
            diameter_range_m: env.diameter_m,
            slenderness_range: (5.0, 35.0),
            gamma_eff_wet_range: (9.2, 11.0),
            gamma_eff_dry_range: (14.0, 17.0),
            z_over_d_range: env.z_over_d,
            y_over_d_max: env.y_over_d.1,
            grid_power: 2.0,
            eccentricity_range_m: (0.0, 0.0),
            pile_modulus_kpa: 2.1e8,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("dr_range", self.dr_range),
            ("phi_range_deg", self.phi_range_deg),
            ("diameter_range_m", self.diameter_range_m),
            ("slenderness_range", self.slenderness_range),
            ("gamma_eff_wet_range", self.gamma_eff_wet_range),
            ("gamma_eff_dry_range", self.gamma_eff_dry_range),
            ("z_over_d_range", self.z_over_d_range),
            ("eccentricity_range_m", self.eccentricity_range_m),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidInput(format!(
                    "generator {name} = ({lo}, {hi}) is empty or non-finite"
                )));
            }
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::InvalidInput(format!(
                "generator noise_sigma = {} must be >= 0",
                self.noise_sigma
            )));
        }
        if self.n_curves == 0 || self.points_per_curve < 2 {
            return Err(Error::InvalidInput(
                "generator needs n_curves >= 1 and points_per_curve >= 2".into(),
            ));
        }
        if !(self.y_over_d_max > 0.0) || !(self.grid_power > 0.0) {
            return Err(Error::InvalidInput(
                "generator y_over_d_max and grid_power must be > 0".into(),
            ));
        }
        Ok(())
    }
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Samples cases over the configured ranges and evaluates the backbone model
/// at a clustered y/D grid, one case per curve. Curves whose derived
/// stress-slenderness falls outside the database envelope are resampled.
pub fn generate_synthetic(
    config: &GeneratorConfig,
    baseline: &ApiPyParams,
    seed: u64,
) -> Result<(Vec<PileSoilCase>, Vec<PYRecord>)> {
    config.validate()?;
    baseline.validate()?;
    let env = FeatureEnvelopes::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if config.noise_sigma > 0.0 {
        Some(LogNormal::new(0.0, config.noise_sigma).map_err(|e| {
            Error::InvalidInput(format!("lognormal noise_sigma {}: {e}", config.noise_sigma))
        })?)
    } else {
        None
    };

    let mut cases = Vec::with_capacity(config.n_curves);
    let mut records = Vec::new();
    for i in 0..config.n_curves {
        let mut accepted = None;
        for _ in 0..1000 {
            let dry = rng.random::<f64>() < config.dry_fraction;
            let (gamma_eff, gamma_water) = if dry {
                (sample_range(&mut rng, config.gamma_eff_dry_range), 0.0)
            } else {
                (
                    sample_range(&mut rng, config.gamma_eff_wet_range),
                    GAMMA_WATER_KNM3,
                )
            };
            let diameter = sample_range(&mut rng, config.diameter_range_m);
            let slenderness = sample_range(&mut rng, config.slenderness_range);
            let z_over_d = sample_range(&mut rng, config.z_over_d_range);
            let case = PileSoilCase {
                case_id: format!("case_{i:04}"),
                source_id: "synthetic".into(),
                relative_density: sample_range(&mut rng, config.dr_range),
                friction_angle_deg: sample_range(&mut rng, config.phi_range_deg),
                gamma_eff,
                gamma_water,
                diameter,
                embedded_length: slenderness * diameter,
                pile_modulus: config.pile_modulus_kpa,
                eccentricity: sample_range(&mut rng, config.eccentricity_range_m),
            };
            let depth = z_over_d * diameter;
            let sigma_v = gamma_eff * depth;
            let f3 = (sigma_v * case.embedded_length * case.embedded_length
                / (P_ATM_KPA * case.cross_section_area()))
            .sqrt();
            if f3 >= env.stress_slenderness.0 && f3 <= env.stress_slenderness.1 {
                accepted = Some((case, depth));
                break;
            }
        }
        let (case, depth) = accepted.ok_or_else(|| {
            Error::InvalidInput(
                "generator could not sample a case inside the stress-slenderness envelope \
                 after 1000 tries; widen the configured ranges"
                    .into(),
            )
        })?;
        case.validate()?;
        let n = config.points_per_curve;
        for j in 0..n {
            let frac = (j as f64 / (n - 1) as f64).powf(config.grid_power);
            let y = config.y_over_d_max * case.diameter * frac;
            let p_clean = crate::baseline::api_p(y, depth, baseline, &case)?;
            let p = match &noise {
                Some(dist) => p_clean * dist.sample(&mut rng),
                None => p_clean,
            };
            records.push(PYRecord {
                case_id: case.case_id.clone(),
                depth,
                deflection: y,
                resistance: p,
            });
        }
        cases.push(case);
    }
    Ok((cases, records))
}
