//! Explaining campaign results: configuration → AOCC feature matrices,
//! a tree-ensemble surrogate, Shapley attributions and swarm-plot tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::campaign::{mean, RunRecord};
use crate::error::{Error, Result};
use crate::topology::Topology;

pub mod forest;
pub mod shapley;

pub use crate::campaign::FEATURE_NAMES;
pub use forest::{fit_surrogate, ForestParams, SurrogateModel};
pub use shapley::{shapley_exact_grid, shapley_surrogate, ExactShapley};

pub const NUM_FEATURES: usize = 7;

pub const ATTRIBUTION_HEADER: [&str; 7] =
    ["fid", "topology", "config_index", "feature", "feature_value", "shap_exact", "shap_surrogate"];

pub const SURROGATE_HEADER: [&str; 6] = ["fid", "topology", "r2_train", "trees", "max_depth", "seed"];

/// One row per configuration: its seven hyperparameter values and a target.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    config_indices: Vec<usize>,
    rows: Vec<[f64; NUM_FEATURES]>,
    target: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(config_indices: Vec<usize>, rows: Vec<[f64; NUM_FEATURES]>, target: Vec<f64>) -> Result<Self> {
        if config_indices.len() != rows.len() || rows.len() != target.len() {
            return Err(Error::Argument("feature matrix columns differ in length".into()));
        }
        Ok(Self { config_indices, rows, target })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[[f64; NUM_FEATURES]] {
        &self.rows
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn config_indices(&self) -> &[usize] {
        &self.config_indices
    }

    /// Same rows, different target.
    pub fn with_target(&self, target: Vec<f64>) -> Result<Self> {
        Self::new(self.config_indices.clone(), self.rows.clone(), target)
    }
}

/// Signed contribution of one feature to one sample's target.
#[derive(Clone, Debug, PartialEq)]
pub struct Attribution {
    pub sample_index: usize,
    pub config_index: usize,
    pub feature: &'static str,
    pub feature_value: f64,
    pub shap_value: f64,
}

/// Averages AOCC per configuration over every record of `topology` (and of
/// `fid`, when given). All configurations must carry the same number of runs.
pub fn build_feature_matrix(records: &[RunRecord], topology: Topology, fid: Option<u32>) -> Result<FeatureMatrix> {
    let mut groups: BTreeMap<usize, (RunRecord, Vec<f64>)> = BTreeMap::new();
    for rec in records.iter().filter(|r| r.topology == topology && fid.is_none_or(|f| r.fid == f)) {
        let entry = groups.entry(rec.config_index).or_insert_with(|| (rec.clone(), Vec::new()));
        if entry.0.point() != rec.point() {
            return Err(Error::DataIntegrity(format!(
                "config {} appears with different hyperparameters",
                rec.config_index
            )));
        }
        entry.1.push(rec.aocc);
    }
    let slice = match fid {
        Some(f) => format!("{topology} f{f}"),
        None => topology.to_string(),
    };
    if groups.is_empty() {
        return Err(Error::DataIntegrity(format!("no records for {slice}")));
    }
    let sizes: Vec<usize> = groups.values().map(|g| g.1.len()).collect();
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(Error::DataIntegrity(format!(
            "incomplete groups in {slice}: run counts range {}..{}",
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap()
        )));
    }
    let mut config_indices = Vec::with_capacity(groups.len());
    let mut rows = Vec::with_capacity(groups.len());
    let mut target = Vec::with_capacity(groups.len());
    for (c, (rec, values)) in groups {
        config_indices.push(c);
        rows.push(rec.point().features());
        target.push(mean(&values));
    }
    FeatureMatrix::new(config_indices, rows, target)
}

/// Exact attributions for every sample, in sample order.
pub fn exact_attributions(fm: &FeatureMatrix) -> Result<Vec<Vec<Attribution>>> {
    let ex = ExactShapley::new(fm)?;
    (0..fm.len()).into_par_iter().map(|i| ex.attributions(i)).collect()
}

/// Surrogate attributions for every sample, sharing one background order.
pub fn surrogate_attributions(
    model: &SurrogateModel,
    fm: &FeatureMatrix,
    permutations: usize,
    seed: u64,
) -> Result<Vec<Vec<Attribution>>> {
    let bg = shapley::background_order(fm, seed);
    (0..fm.len())
        .into_par_iter()
        .map(|i| shapley::shapley_surrogate_with(model, fm, i, permutations, seed, &bg))
        .collect()
}

/// Mean absolute attribution per feature, in [`FEATURE_NAMES`] order.
pub fn mean_abs_by_feature(attributions: &[Attribution]) -> [f64; NUM_FEATURES] {
    let mut sum = [0.0; NUM_FEATURES];
    let mut count = [0usize; NUM_FEATURES];
    for a in attributions {
        if let Some(j) = FEATURE_NAMES.iter().position(|&f| f == a.feature) {
            sum[j] += a.shap_value.abs();
            count[j] += 1;
        }
    }
    std::array::from_fn(|j| if count[j] == 0 { 0.0 } else { sum[j] / count[j] as f64 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmPoint {
    pub feature: String,
    pub shap_value: f64,
    /// Feature value rescaled to [0, 1]; 0.5 when the feature has one level.
    pub normalized_value: f64,
}

/// Plot rows grouped by feature, features ordered by descending mean |shap|
/// (ties keep first-seen order), rows within a feature in input order.
pub fn swarm_plot_data<'a, I>(rows: I) -> Vec<SwarmPoint>
where
    I: IntoIterator<Item = (&'a str, f64, f64)>,
{
    // feature -> (first seen, values, shaps)
    let mut by_feature: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (feature, value, shap) in rows {
        let slot = match by_feature.iter().position(|g| g.0 == feature) {
            Some(i) => i,
            None => {
                by_feature.push((feature.to_string(), Vec::new(), Vec::new()));
                by_feature.len() - 1
            }
        };
        by_feature[slot].1.push(value);
        by_feature[slot].2.push(shap);
    }
    let mut order: Vec<(usize, f64)> = by_feature
        .iter()
        .enumerate()
        .map(|(i, g)| (i, g.2.iter().map(|s| s.abs()).sum::<f64>() / g.2.len() as f64))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut out = Vec::new();
    for (i, _) in order {
        let (feature, values, shaps) = &by_feature[i];
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (&v, &s) in values.iter().zip(shaps) {
            let normalized_value = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            out.push(SwarmPoint { feature: feature.clone(), shap_value: s, normalized_value });
        }
    }
    out
}

/// Convenience wrapper over [`swarm_plot_data`] for attribution lists.
pub fn swarm_plot_from_attributions(attributions: &[Attribution]) -> Vec<SwarmPoint> {
    swarm_plot_data(attributions.iter().map(|a| (a.feature, a.feature_value, a.shap_value)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub fid: u32,
    pub topology: Topology,
    pub config_index: usize,
    pub feature: String,
    pub feature_value: f64,
    pub shap_exact: Option<f64>,
    pub shap_surrogate: Option<f64>,
}

impl AttributionRow {
    /// Exact value when present, else the surrogate estimate.
    pub fn shap(&self) -> Option<f64> {
        self.shap_exact.or(self.shap_surrogate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateReport {
    pub fid: u32,
    pub topology: Topology,
    pub r2_train: f64,
    pub trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

fn write_rows<W: Write, S: Serialize>(writer: W, header: &[&str], rows: &[S]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, S: serde::de::DeserializeOwned>(reader: R, header: &[&str]) -> Result<Vec<S>> {
    let mut r = csv::Reader::from_reader(reader);
    let got = r.headers()?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::DataIntegrity(format!(
            "unexpected header '{}', expected '{}'",
            got.iter().collect::<Vec<_>>().join(","),
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<S>, _>>()?)
}

pub fn write_attributions_csv<W: Write>(writer: W, rows: &[AttributionRow]) -> Result<()> {
    write_rows(writer, &ATTRIBUTION_HEADER, rows)
}

pub fn read_attributions_csv<R: Read>(reader: R) -> Result<Vec<AttributionRow>> {
    read_rows(reader, &ATTRIBUTION_HEADER)
}

pub fn write_surrogate_csv<W: Write>(writer: W, rows: &[SurrogateReport]) -> Result<()> {
    write_rows(writer, &SURROGATE_HEADER, rows)
}

pub fn read_surrogate_csv<R: Read>(reader: R) -> Result<Vec<SurrogateReport>> {
    read_rows(reader, &SURROGATE_HEADER)
}
