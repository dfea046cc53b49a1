//! Shapley attribution of hyperparameters.
//!
//! Two independent routes:
//! * [`ExactShapley`] enumerates all 2^7 coalitions on a complete factorial
//!   grid, where the value of a coalition is the mean target over the rows
//!   that agree with the sample on the coalition's features.
//! * [`shapley_surrogate`] estimates interventional Shapley values of a
//!   surrogate model by permutation sampling against the grid as background.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::forest::SurrogateModel;
use super::{Attribution, FeatureMatrix, FEATURE_NAMES, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::seed;

const COALITIONS: usize = 1 << NUM_FEATURES;

/// `|S|! (M - |S| - 1)! / M!` for coalition size `s`.
fn coalition_weight(s: usize) -> f64 {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    fact(s) * fact(NUM_FEATURES - s - 1) / fact(NUM_FEATURES)
}

/// Coalition value tables over a complete factorial feature matrix.
pub struct ExactShapley<'a> {
    fm: &'a FeatureMatrix,
    codes: Vec<[u8; NUM_FEATURES]>,
    tables: Vec<HashMap<u64, f64>>,
    grand_mean: f64,
}

fn coalition_key(code: &[u8; NUM_FEATURES], mask: usize) -> u64 {
    (0..NUM_FEATURES).fold(0u64, |key, j| {
        let byte = if mask & (1 << j) != 0 { code[j] as u64 + 1 } else { 0 };
        key | (byte << (8 * j))
    })
}

impl<'a> ExactShapley<'a> {
    pub fn new(fm: &'a FeatureMatrix) -> Result<Self> {
        if fm.is_empty() {
            return Err(Error::Precondition("empty feature matrix".into()));
        }
        let mut levels: Vec<Vec<f64>> = (0..NUM_FEATURES)
            .map(|j| fm.rows().iter().map(|r| r[j]).collect())
            .collect();
        for lv in &mut levels {
            lv.sort_by(f64::total_cmp);
            lv.dedup();
            if lv.len() > 254 {
                return Err(Error::Precondition("too many levels for a factorial grid".into()));
            }
        }
        let cells: usize = levels.iter().map(Vec::len).product();
        if cells != fm.len() {
            return Err(Error::Precondition(format!(
                "grid incomplete: {} rows for a {cells}-cell factorial",
                fm.len()
            )));
        }
        let codes: Vec<[u8; NUM_FEATURES]> = fm
            .rows()
            .iter()
            .map(|row| {
                let mut code = [0u8; NUM_FEATURES];
                for j in 0..NUM_FEATURES {
                    code[j] = levels[j].partition_point(|&v| v.total_cmp(&row[j]).is_lt()) as u8;
                }
                code
            })
            .collect();
        let full = COALITIONS - 1;
        let mut seen = std::collections::HashSet::with_capacity(codes.len());
        if !codes.iter().all(|c| seen.insert(coalition_key(c, full))) {
            return Err(Error::Precondition("grid incomplete: duplicate configurations".into()));
        }

        let tables = (0..COALITIONS)
            .map(|mask| {
                // Deviations from a per-group pivot keep constant groups exact.
                let mut acc: HashMap<u64, (f64, f64, usize)> = HashMap::new();
                for (code, &t) in codes.iter().zip(fm.target()) {
                    let e = acc.entry(coalition_key(code, mask)).or_insert((t, 0.0, 0));
                    e.1 += t - e.0;
                    e.2 += 1;
                }
                acc.into_iter().map(|(k, (pivot, dev, c))| (k, pivot + dev / c as f64)).collect()
            })
            .collect::<Vec<HashMap<u64, f64>>>();
        let grand_mean = tables[0][&0];
        Ok(Self { fm, codes, tables, grand_mean })
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Mean target over rows agreeing with `sample` on the features in `mask`.
    pub fn coalition_value(&self, sample: usize, mask: usize) -> f64 {
        self.tables[mask][&coalition_key(&self.codes[sample], mask)]
    }

    pub fn values(&self, sample: usize) -> Result<[f64; NUM_FEATURES]> {
        if sample >= self.fm.len() {
            return Err(Error::Argument(format!("sample {sample} out of range")));
        }
        let v: Vec<f64> = (0..COALITIONS).map(|m| self.coalition_value(sample, m)).collect();
        let mut phi = [0.0; NUM_FEATURES];
        for (i, out) in phi.iter_mut().enumerate() {
            let bit = 1 << i;
            *out = (0..COALITIONS)
                .filter(|m| m & bit == 0)
                .map(|m| coalition_weight(m.count_ones() as usize) * (v[m | bit] - v[m]))
                .sum();
        }
        Ok(phi)
    }

    pub fn attributions(&self, sample: usize) -> Result<Vec<Attribution>> {
        let phi = self.values(sample)?;
        Ok(to_attributions(self.fm, sample, &phi))
    }
}

fn to_attributions(fm: &FeatureMatrix, sample: usize, phi: &[f64; NUM_FEATURES]) -> Vec<Attribution> {
    (0..NUM_FEATURES)
        .map(|j| Attribution {
            sample_index: sample,
            config_index: fm.config_indices()[sample],
            feature: FEATURE_NAMES[j],
            feature_value: fm.rows()[sample][j],
            shap_value: phi[j],
        })
        .collect()
}

/// Exact attributions for one sample. Builds the coalition tables on every
/// call; use [`ExactShapley`] directly when attributing many samples.
pub fn shapley_exact_grid(fm: &FeatureMatrix, sample_index: usize) -> Result<Vec<Attribution>> {
    ExactShapley::new(fm)?.attributions(sample_index)
}

/// Permutation-sampling Shapley estimate of the surrogate's prediction.
///
/// Permutation `j` walks a random feature order starting from background row
/// `bg[j mod len]`, where `bg` is a shuffle of the grid seeded by `seed` alone,
/// so backgrounds are drawn without replacement.
pub fn shapley_surrogate(
    model: &SurrogateModel,
    fm: &FeatureMatrix,
    sample_index: usize,
    permutations: usize,
    seed: u64,
) -> Result<Vec<Attribution>> {
    let background = background_order(fm, seed);
    shapley_surrogate_with(model, fm, sample_index, permutations, seed, &background)
}

pub fn background_order(fm: &FeatureMatrix, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fm.len()).collect();
    order.shuffle(&mut seed::rng_from_words(&[seed::PERMUTATION_DOMAIN, seed, u64::MAX]));
    order
}

pub fn shapley_surrogate_with(
    model: &SurrogateModel,
    fm: &FeatureMatrix,
    sample_index: usize,
    permutations: usize,
    seed: u64,
    background: &[usize],
) -> Result<Vec<Attribution>> {
    if permutations < 1 {
        return Err(Error::Argument("permutations must be >= 1".into()));
    }
    if sample_index >= fm.len() {
        return Err(Error::Argument(format!("sample {sample_index} out of range")));
    }
    if background.is_empty() {
        return Err(Error::Argument("empty background".into()));
    }
    let x = fm.rows()[sample_index];
    let mut rng = seed::rng_from_words(&[seed::PERMUTATION_DOMAIN, seed, sample_index as u64]);
    let mut order: [usize; NUM_FEATURES] = std::array::from_fn(|j| j);
    let mut phi = [0.0; NUM_FEATURES];
    for j in 0..permutations {
        order.shuffle(&mut rng);
        let mut z = fm.rows()[background[j % background.len()]];
        let mut prev = model.predict(&z);
        for &f in &order {
            z[f] = x[f];
            let cur = model.predict(&z);
            phi[f] += cur - prev;
            prev = cur;
        }
    }
    phi.iter_mut().for_each(|p| *p /= permutations as f64);
    Ok(to_attributions(fm, sample_index, &phi))
}
