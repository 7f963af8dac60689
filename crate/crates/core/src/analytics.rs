//! Corpus-level statistics over classified abstracts: prevalence,
//! distinctiveness, temporal trends, PMI co-occurrence, and matched-pattern
//! frequency.
//!
//! All operations here are pure functions of their inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::corpus::{FieldGroup, STUDY_END_YEAR, STUDY_START_YEAR};
use crate::lexicon::PatternMatch;
use crate::values::{ResearchValue, ValueLabelVector};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("no labeled abstracts given")]
    EmptyInput,
    #[error("group {0:?} is empty")]
    EmptyGroup(String),
    #[error("group {0:?} covers the whole corpus; its complement is empty")]
    EmptyComplement(String),
    #[error("unknown group_by key {0:?}")]
    UnknownGroupBy(String),
    #[error("trend needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("trend series years must be strictly increasing")]
    YearsNotIncreasing,
    #[error("record {0}: sentence labels required for sentence-level analysis")]
    MissingSentenceLabels(String),
}

/// One classified abstract: corpus metadata plus the predicted label vector.
/// `sentence_labels` and `matches` are optional detail used by sentence-level
/// analytics and pattern reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedRecord {
    pub paper_id: String,
    pub venue: String,
    pub subfield: String,
    pub field_group: FieldGroup,
    pub year: i32,
    pub labels: ValueLabelVector,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentence_labels: Vec<ValueLabelVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matches: Vec<PatternMatch>,
}

/// Grouping attribute for prevalence and distinctiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Venue,
    Subfield,
    FieldGroup,
    Year,
    SubfieldYear,
}

impl GroupBy {
    pub fn id(self) -> &'static str {
        match self {
            GroupBy::Venue => "venue",
            GroupBy::Subfield => "subfield",
            GroupBy::FieldGroup => "field_group",
            GroupBy::Year => "year",
            GroupBy::SubfieldYear => "subfield_year",
        }
    }

    pub fn key(self, record: &ClassifiedRecord) -> String {
        match self {
            GroupBy::Venue => record.venue.clone(),
            GroupBy::Subfield => record.subfield.clone(),
            GroupBy::FieldGroup => record.field_group.to_string(),
            GroupBy::Year => record.year.to_string(),
            GroupBy::SubfieldYear => format!("{}/{}", record.subfield, record.year),
        }
    }
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GroupBy {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "venue" => Ok(GroupBy::Venue),
            "subfield" => Ok(GroupBy::Subfield),
            "field_group" => Ok(GroupBy::FieldGroup),
            "year" => Ok(GroupBy::Year),
            "subfield_year" | "subfield-year" => Ok(GroupBy::SubfieldYear),
            other => Err(AnalyticsError::UnknownGroupBy(other.to_string())),
        }
    }
}

/// Unit of analysis: a value counts once per abstract (default) or once per
/// sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Abstract,
    Sentence,
}

impl Unit {
    pub fn id(self) -> &'static str {
        match self {
            Unit::Abstract => "abstract",
            Unit::Sentence => "sentence",
        }
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abstract" => Ok(Unit::Abstract),
            "sentence" => Ok(Unit::Sentence),
            other => Err(format!("unknown unit {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub group: String,
    pub value: ResearchValue,
    pub count: u64,
    pub denominator: u64,
    pub proportion: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrevalenceTable {
    pub group_by: GroupBy,
    pub unit: Unit,
    pub rows: Vec<PrevalenceRow>,
}

/// Fraction of units in each group carrying each value flag. Rows are sorted
/// by (group, taxonomy order).
pub fn prevalence(
    records: &[ClassifiedRecord],
    group_by: GroupBy,
    unit: Unit,
) -> Result<PrevalenceTable, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut counts: BTreeMap<String, ([u64; ResearchValue::COUNT], u64)> = BTreeMap::new();
    for record in records {
        let entry = counts.entry(group_by.key(record)).or_default();
        match unit {
            Unit::Abstract => {
                entry.1 += 1;
                for (value, flag) in record.labels.iter() {
                    if flag {
                        entry.0[value.index()] += 1;
                    }
                }
            }
            Unit::Sentence => {
                if record.sentence_labels.is_empty() {
                    return Err(AnalyticsError::MissingSentenceLabels(record.paper_id.clone()));
                }
                for labels in &record.sentence_labels {
                    entry.1 += 1;
                    for (value, flag) in labels.iter() {
                        if flag {
                            entry.0[value.index()] += 1;
                        }
                    }
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (group, (per_value, denominator)) in counts {
        for value in ResearchValue::ALL {
            let count = per_value[value.index()];
            rows.push(PrevalenceRow {
                group: group.clone(),
                value,
                count,
                denominator,
                proportion: count as f64 / denominator as f64,
            });
        }
    }
    Ok(PrevalenceTable { group_by, unit, rows })
}

/// Weighted log-odds with an informative Dirichlet prior.
///
/// `y` of `n` units in the group are flagged, `y_prime` of `n_prime` in the
/// complement; the prior allocates `a = alpha0 * corpus_rate` pseudo-flags
/// out of `a0 = alpha0` pseudo-units to both sides. Returns `(delta, z)`
/// where `delta` is the log-odds difference and `z = delta / sqrt(var)` with
/// `var = 1/(y+a) + 1/(y_prime+a)`. Degenerate inputs (no information at
/// all) yield `(0, 0)`.
pub fn weighted_log_odds(
    y: f64,
    n: f64,
    y_prime: f64,
    n_prime: f64,
    corpus_rate: f64,
    alpha0: f64,
) -> (f64, f64) {
    let a = alpha0 * corpus_rate;
    let a0 = alpha0;
    if y + a <= 0.0 || y_prime + a <= 0.0 || n + a0 - y - a <= 0.0 || n_prime + a0 - y_prime - a <= 0.0 {
        return (0.0, 0.0);
    }
    let delta = ((y + a) / (n + a0 - y - a)).ln() - ((y_prime + a) / (n_prime + a0 - y_prime - a)).ln();
    let variance = 1.0 / (y + a) + 1.0 / (y_prime + a);
    (delta, delta / variance.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctivenessScore {
    pub value: ResearchValue,
    pub group: String,
    pub delta: f64,
    pub z: f64,
}

/// Score how distinctive each value is for `group` versus the rest of the
/// corpus, ranked by z descending.
pub fn distinctiveness(
    records: &[ClassifiedRecord],
    group_by: GroupBy,
    group: &str,
    alpha0: f64,
) -> Result<Vec<DistinctivenessScore>, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let in_group: Vec<bool> = records.iter().map(|r| group_by.key(r) == group).collect();
    let n = in_group.iter().filter(|&&g| g).count();
    let n_prime = records.len() - n;
    if n == 0 {
        return Err(AnalyticsError::EmptyGroup(group.to_string()));
    }
    if n_prime == 0 {
        return Err(AnalyticsError::EmptyComplement(group.to_string()));
    }

    let mut scores = Vec::with_capacity(ResearchValue::COUNT);
    for value in ResearchValue::ALL {
        let mut y = 0u64;
        let mut y_prime = 0u64;
        for (record, &g) in records.iter().zip(&in_group) {
            if record.labels.get(value) {
                if g {
                    y += 1;
                } else {
                    y_prime += 1;
                }
            }
        }
        let corpus_rate = (y + y_prime) as f64 / records.len() as f64;
        let (delta, z) = weighted_log_odds(
            y as f64,
            n as f64,
            y_prime as f64,
            n_prime as f64,
            corpus_rate,
            alpha0,
        );
        scores.push(DistinctivenessScore {
            value,
            group: group.to_string(),
            delta,
            z,
        });
    }
    scores.sort_by(|a, b| b.z.partial_cmp(&a.z).unwrap_or(std::cmp::Ordering::Equal));
    Ok(scores)
}

/// Distinctiveness for every group under `group_by`.
pub fn distinctiveness_all(
    records: &[ClassifiedRecord],
    group_by: GroupBy,
    alpha0: f64,
) -> Result<BTreeMap<String, Vec<DistinctivenessScore>>, AnalyticsError> {
    let mut groups: Vec<String> = records.iter().map(|r| group_by.key(r)).collect();
    groups.sort();
    groups.dedup();
    if groups.len() < 2 {
        return Err(AnalyticsError::EmptyComplement(
            groups.first().cloned().unwrap_or_default(),
        ));
    }
    groups
        .into_iter()
        .map(|g| distinctiveness(records, group_by, &g, alpha0).map(|s| (g, s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    None,
}

impl fmt::Display for TrendDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendDirection::Increasing => "increasing",
            TrendDirection::Decreasing => "decreasing",
            TrendDirection::None => "none",
        })
    }
}

/// Mann–Kendall test plus Theil–Sen slope over a yearly series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub series: Vec<(i32, f64)>,
    pub mk_s: i64,
    pub var_s: f64,
    pub p_value: f64,
    pub sen_slope: f64,
    pub alpha: f64,
    pub direction: TrendDirection,
}

/// Mann–Kendall S with tie-corrected normal approximation (continuity
/// corrected) and Theil–Sen slope (median of pairwise slopes). Needs at
/// least 3 points with strictly increasing years.
pub fn trend(series: &[(i32, f64)], alpha: f64) -> Result<TrendResult, AnalyticsError> {
    let n = series.len();
    if n < 3 {
        return Err(AnalyticsError::TooFewPoints(n));
    }
    if series.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(AnalyticsError::YearsNotIncreasing);
    }

    let mut s: i64 = 0;
    let mut slopes = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = series[j].1 - series[i].1;
            s += if dx > 0.0 {
                1
            } else if dx < 0.0 {
                -1
            } else {
                0
            };
            let dt = (series[j].0 - series[i].0) as f64;
            slopes.push(dx / dt);
        }
    }

    // Tie correction: group sizes of exactly equal values.
    let mut sorted: Vec<f64> = series.iter().map(|&(_, x)| x).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut tie_term = 0f64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        if t > 1.0 {
            tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        }
        i = j;
    }
    let nf = n as f64;
    let var_s = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;

    let z = if var_s > 0.0 && s != 0 {
        let corrected = if s > 0 { s as f64 - 1.0 } else { s as f64 + 1.0 };
        corrected / var_s.sqrt()
    } else {
        0.0
    };
    let normal = Normal::standard();
    let p_value = (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0);

    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = slopes.len();
    let sen_slope = if m % 2 == 1 {
        slopes[m / 2]
    } else {
        (slopes[m / 2 - 1] + slopes[m / 2]) / 2.0
    };

    let direction = if p_value < alpha && s > 0 {
        TrendDirection::Increasing
    } else if p_value < alpha && s < 0 {
        TrendDirection::Decreasing
    } else {
        TrendDirection::None
    };

    Ok(TrendResult {
        series: series.to_vec(),
        mk_s: s,
        var_s,
        p_value,
        sen_slope,
        alpha,
        direction,
    })
}

/// Yearly prevalence series for one value over the study window, restricted
/// to years that have any abstracts.
pub fn yearly_series(records: &[ClassifiedRecord], value: ResearchValue) -> Vec<(i32, f64)> {
    let mut by_year: BTreeMap<i32, (u64, u64)> = BTreeMap::new();
    for record in records {
        if !(STUDY_START_YEAR..=STUDY_END_YEAR).contains(&record.year) {
            continue;
        }
        let entry = by_year.entry(record.year).or_default();
        entry.1 += 1;
        if record.labels.get(value) {
            entry.0 += 1;
        }
    }
    by_year
        .into_iter()
        .map(|(year, (count, total))| (year, count as f64 / total as f64))
        .collect()
}

/// Trend per value over the study window.
pub fn trend_by_value(
    records: &[ClassifiedRecord],
    alpha: f64,
) -> Result<BTreeMap<ResearchValue, TrendResult>, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut out = BTreeMap::new();
    for value in ResearchValue::ALL {
        let series = yearly_series(records, value);
        out.insert(value, trend(&series, alpha)?);
    }
    Ok(out)
}

/// Pairwise PMI of value co-occurrence, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmiMatrix {
    pub unit: Unit,
    pub epsilon: f64,
    pub n: u64,
    /// Row-major 10x10, indexed by taxonomy order.
    pub matrix: Vec<Vec<f64>>,
}

impl PmiMatrix {
    pub fn get(&self, i: ResearchValue, j: ResearchValue) -> f64 {
        self.matrix[i.index()][j.index()]
    }
}

/// pmi(i,j) = log2(((c_ij+eps)/(N+eps)) / (((c_i+eps)/(N+eps)) * ((c_j+eps)/(N+eps)))),
/// computed in the algebraically equal form
/// log2(((c_ij+eps) * (N+eps)) / ((c_i+eps) * (c_j+eps))), which is exact on
/// factorable integer counts with eps = 0.
pub fn pmi_matrix(labels: &[ValueLabelVector], epsilon: f64) -> Result<PmiMatrix, AnalyticsError> {
    pmi_matrix_with_unit(labels, epsilon, Unit::Abstract)
}

pub fn pmi_matrix_with_unit(
    labels: &[ValueLabelVector],
    epsilon: f64,
    unit: Unit,
) -> Result<PmiMatrix, AnalyticsError> {
    if labels.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let n = labels.len() as u64;
    let mut single = [0u64; ResearchValue::COUNT];
    let mut joint = [[0u64; ResearchValue::COUNT]; ResearchValue::COUNT];
    for vec in labels {
        for i in ResearchValue::ALL {
            if !vec.get(i) {
                continue;
            }
            single[i.index()] += 1;
            for j in ResearchValue::ALL {
                if vec.get(j) {
                    joint[i.index()][j.index()] += 1;
                }
            }
        }
    }

    let mut matrix = vec![vec![0f64; ResearchValue::COUNT]; ResearchValue::COUNT];
    for i in 0..ResearchValue::COUNT {
        for j in i..ResearchValue::COUNT {
            let num = (joint[i][j] as f64 + epsilon) * (n as f64 + epsilon);
            let den = (single[i] as f64 + epsilon) * (single[j] as f64 + epsilon);
            let pmi = (num / den).log2();
            matrix[i][j] = pmi;
            matrix[j][i] = pmi;
        }
    }
    Ok(PmiMatrix {
        unit,
        epsilon,
        n,
        matrix,
    })
}

/// Per-value counts of matched patterns across a classification run, sorted
/// by count descending then pattern ascending.
pub fn pattern_frequency(
    match_log: &[PatternMatch],
) -> BTreeMap<ResearchValue, Vec<(String, u64)>> {
    let mut counts: BTreeMap<ResearchValue, BTreeMap<String, u64>> = BTreeMap::new();
    for m in match_log {
        *counts
            .entry(m.value)
            .or_default()
            .entry(m.pattern.clone())
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(value, by_pattern)| {
            let mut ranked: Vec<(String, u64)> = by_pattern.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            (value, ranked)
        })
        .collect()
}
