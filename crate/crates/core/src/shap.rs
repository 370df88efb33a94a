//! Exact Shapley-value attribution for tree ensembles with an interventional
//! value function: coalition values are means over a background set with the
//! out-of-coalition features substituted from each background row. With six
//! features the 2^m enumeration is exact and cheap; no sampling involved.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbt::TreeEnsemble;

/// Enumeration guard: 2^m coalition values per explained sample.
const MAX_FEATURES: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapExplanation {
    /// τ(∅): mean background prediction.
    pub base_value: f64,
    /// One attribution per feature; sums with the base to the prediction.
    pub values: Vec<f64>,
    pub prediction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalImportance {
    /// Mean absolute attribution per feature index.
    pub mean_abs: Vec<f64>,
    /// Feature indices in descending importance; ties break to lower index.
    pub ranking: Vec<usize>,
}

fn check_background(model: &TreeEnsemble, background: &[Vec<f64>]) -> Result<()> {
    if background.is_empty() {
        return Err(Error::InvalidInput("empty SHAP background set".into()));
    }
    for row in background {
        if row.len() != model.n_features {
            return Err(Error::InvalidInput(format!(
                "background row has {} features, model expects {}",
                row.len(),
                model.n_features
            )));
        }
    }
    Ok(())
}

fn tau_mask(model: &TreeEnsemble, x: &[f64], mask: u32, background: &[Vec<f64>]) -> f64 {
    let mut composite = vec![0.0; x.len()];
    let mut acc = 0.0;
    for row in background {
        for f in 0..x.len() {
            composite[f] = if mask & (1 << f) != 0 { x[f] } else { row[f] };
        }
        acc += model.eval(&composite);
    }
    acc / background.len() as f64
}

/// Interventional coalition value τ(S): the model's mean prediction with
/// features in `subset` taken from `x` and the rest from each background row.
pub fn coalition_value(
    model: &TreeEnsemble,
    x: &[f64],
    subset: &[usize],
    background: &[Vec<f64>],
) -> Result<f64> {
    check_background(model, background)?;
    if x.len() != model.n_features {
        return Err(Error::InvalidInput(format!(
            "sample has {} features, model expects {}",
            x.len(),
            model.n_features
        )));
    }
    let mut mask = 0u32;
    for &f in subset {
        if f >= model.n_features {
            return Err(Error::InvalidInput(format!(
                "subset feature index {f} out of range"
            )));
        }
        mask |= 1 << f;
    }
    Ok(tau_mask(model, x, mask, background))
}

/// Exact Shapley attribution of one prediction over all 2^m coalitions with
/// the combinatorial weights |S|!(m-|S|-1)!/m!.
pub fn shapley_values(
    model: &TreeEnsemble,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<ShapExplanation> {
    check_background(model, background)?;
    let m = model.n_features;
    if x.len() != m {
        return Err(Error::InvalidInput(format!(
            "sample has {} features, model expects {m}",
            x.len()
        )));
    }
    if m > MAX_FEATURES {
        return Err(Error::InvalidInput(format!(
            "exact enumeration over {m} features would need 2^{m} coalitions"
        )));
    }

    let n_masks = 1usize << m;
    let mut taus = vec![0.0; n_masks];
    for (mask, tau) in taus.iter_mut().enumerate() {
        *tau = tau_mask(model, x, mask as u32, background);
    }

    let mut factorial = vec![1.0; m + 1];
    for k in 1..=m {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    // weight by coalition size |S| for S not containing the feature
    let weight: Vec<f64> = (0..m)
        .map(|s| factorial[s] * factorial[m - s - 1] / factorial[m])
        .collect();

    let mut values = vec![0.0; m];
    for i in 0..m {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..n_masks {
            if mask & bit != 0 {
                continue;
            }
            let s = (mask as u32).count_ones() as usize;
            acc += weight[s] * (taus[mask | bit] - taus[mask]);
        }
        values[i] = acc;
    }

    Ok(ShapExplanation {
        base_value: taus[0],
        values,
        prediction: model.eval(x),
    })
}

/// Attributions for a batch of samples.
pub fn explain_all(
    model: &TreeEnsemble,
    samples: &[Vec<f64>],
    background: &[Vec<f64>],
) -> Result<Vec<ShapExplanation>> {
    samples
        .iter()
        .map(|x| shapley_values(model, x, background))
        .collect()
}

/// Mean |SHAP| per feature with a deterministic descending ranking.
pub fn global_importance(
    model: &TreeEnsemble,
    samples: &[Vec<f64>],
    background: &[Vec<f64>],
) -> Result<GlobalImportance> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "global importance needs at least one sample".into(),
        ));
    }
    let explanations = explain_all(model, samples, background)?;
    let m = model.n_features;
    let mut mean_abs = vec![0.0; m];
    for e in &explanations {
        for (acc, v) in mean_abs.iter_mut().zip(&e.values) {
            *acc += v.abs();
        }
    }
    for v in &mut mean_abs {
        *v /= explanations.len() as f64;
    }
    let mut ranking: Vec<usize> = (0..m).collect();
    ranking.sort_by(|&a, &b| mean_abs[b].total_cmp(&mean_abs[a]).then(a.cmp(&b)));
    Ok(GlobalImportance { mean_abs, ranking })
}

/// One beeswarm point: raw feature value paired with its attribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub sample_id: String,
    pub feature_index: usize,
    pub feature_value: f64,
    pub shap_value: f64,
}

/// Computes summary points and writes the per-(sample, feature) CSV. The
/// caller renders the beeswarm SVG from the returned points.
pub fn export_summary_csv(
    model: &TreeEnsemble,
    samples: &[Vec<f64>],
    sample_ids: &[String],
    background: &[Vec<f64>],
    path: &Path,
) -> Result<Vec<SummaryPoint>> {
    if samples.len() != sample_ids.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples but {} ids",
            samples.len(),
            sample_ids.len()
        )));
    }
    let explanations = explain_all(model, samples, background)?;
    let mut points = Vec::with_capacity(samples.len() * model.n_features);
    let mut csv = String::from("sample_id,feature_name,feature_value,shap_value\n");
    for ((x, id), e) in samples.iter().zip(sample_ids).zip(&explanations) {
        for f in 0..model.n_features {
            let name = model
                .feature_names
                .get(f)
                .cloned()
                .unwrap_or_else(|| format!("f{f}"));
            csv.push_str(&format!("{id},{name},{},{}\n", x[f], e.values[f]));
            points.push(SummaryPoint {
                sample_id: id.clone(),
                feature_index: f,
                feature_value: x[f],
                shap_value: e.values[f],
            });
        }
    }
    std::fs::write(path, csv).map_err(|e| Error::io(path, e))?;
    Ok(points)
}

/// Writes the ordered importance list as JSON.
pub fn write_importance_json(
    path: &Path,
    feature_names: &[String],
    importance: &GlobalImportance,
) -> Result<()> {
    #[derive(Serialize)]
    struct Entry<'a> {
        feature: &'a str,
        mean_abs_shap: f64,
    }
    let entries: Vec<Entry> = importance
        .ranking
        .iter()
        .map(|&f| Entry {
            feature: feature_names.get(f).map(|s| s.as_str()).unwrap_or("?"),
            mean_abs_shap: importance.mean_abs[f],
        })
        .collect();
    let json = serde_json::to_string_pretty(&entries)
        .map_err(|e| Error::InvalidInput(format!("serialize importance: {e}")))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}
