//! Annotated dataset handling, split assignment, and classification metrics.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::values::{ResearchValue, ValueLabelVector};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to read annotations: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse annotations: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: label for {column} must be 0 or 1, got {got:?}")]
    NonBinaryLabel { row: usize, column: String, got: String },
    #[error("row {row}: unknown split tag {got:?}")]
    UnknownSplit { row: usize, got: String },
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("split ratios must sum to 1, got {0}")]
    BadRatios(f64),
    #[error("predictions and gold differ in length: {predictions} vs {gold}")]
    LengthMismatch { predictions: usize, gold: usize },
}

/// Which of the three splits an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn id(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "val" | "dev" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// One annotated sentence: text, source paper, ten gold flags, and an
/// optional split tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedInstance {
    pub sentence_text: String,
    pub paper_id: String,
    pub gold: ValueLabelVector,
    pub split: Option<Split>,
}

/// The column order of the annotations table.
pub fn annotation_header() -> Vec<&'static str> {
    let mut cols = vec!["sentence_text", "paper_id"];
    cols.extend(ResearchValue::ALL.iter().map(|v| v.id()));
    cols.push("split");
    cols
}

/// Load an annotations table (delimited, header required).
///
/// Required columns: `sentence_text`, `paper_id`, and the ten value columns.
/// A `split` column is optional. Label cells must be exactly `0` or `1`;
/// anything else is fatal with the offending row number (1-based, counting
/// the header as row 1).
pub fn load_annotations(path: &Path) -> Result<Vec<AnnotatedInstance>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let sentence_col = col("sentence_text").ok_or_else(|| EvalError::MissingColumn("sentence_text".into()))?;
    let paper_col = col("paper_id").ok_or_else(|| EvalError::MissingColumn("paper_id".into()))?;
    let mut value_cols = Vec::with_capacity(ResearchValue::COUNT);
    for value in ResearchValue::ALL {
        value_cols.push(col(value.id()).ok_or_else(|| EvalError::MissingColumn(value.id().into()))?);
    }
    let split_col = col("split");

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is row 1
        let record = record?;
        let mut gold = ValueLabelVector::new();
        for (value, &c) in ResearchValue::ALL.iter().zip(&value_cols) {
            let cell = record.get(c).unwrap_or("");
            let flag = match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(EvalError::NonBinaryLabel {
                        row,
                        column: value.id().to_string(),
                        got: other.to_string(),
                    })
                }
            };
            gold.set(*value, flag);
        }
        let split = match split_col.map(|c| record.get(c).unwrap_or("")) {
            None | Some("") => None,
            Some(raw) => Some(raw.parse().map_err(|_| EvalError::UnknownSplit {
                row,
                got: raw.to_string(),
            })?),
        };
        out.push(AnnotatedInstance {
            sentence_text: record.get(sentence_col).unwrap_or("").to_string(),
            paper_id: record.get(paper_col).unwrap_or("").to_string(),
            gold,
            split,
        });
    }
    Ok(out)
}

/// Write an annotations table with the standard header.
pub fn save_annotations(path: &Path, instances: &[AnnotatedInstance]) -> Result<(), EvalError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(annotation_header())?;
    for inst in instances {
        let mut record = vec![inst.sentence_text.clone(), inst.paper_id.clone()];
        for value in ResearchValue::ALL {
            record.push(if inst.gold.get(value) { "1".into() } else { "0".into() });
        }
        record.push(inst.split.map(|s| s.id().to_string()).unwrap_or_default());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Train/validation/test fractions. Must sum to 1 (±1e-9).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.4, validation: 0.3, test: 0.3 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<(), EvalError> {
        let sum = self.train + self.validation + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(EvalError::BadRatios(sum));
        }
        Ok(())
    }
}

/// Deterministic seeded split assignment under the floor rule:
/// `n_train = floor(r_train * n)`, `n_val = floor(r_val * n)`, the rest is
/// test. Pre-existing split tags are preserved unless `resplit` is set.
/// With `stratify`, the floor rule is applied separately inside the positive
/// and negative strata of the given value.
pub fn assign_splits(
    instances: &mut [AnnotatedInstance],
    ratios: SplitRatios,
    seed: u64,
    resplit: bool,
    stratify: Option<ResearchValue>,
) -> Result<(), EvalError> {
    ratios.validate()?;
    if !resplit && instances.iter().all(|i| i.split.is_some()) {
        return Ok(());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strata: Vec<Vec<usize>> = match stratify {
        None => vec![(0..instances.len()).collect()],
        Some(value) => {
            let (pos, neg): (Vec<usize>, Vec<usize>) =
                (0..instances.len()).partition(|&i| instances[i].gold.get(value));
            vec![pos, neg]
        }
    };

    for mut idxs in strata {
        idxs.shuffle(&mut rng);
        let n = idxs.len();
        let n_train = (ratios.train * n as f64).floor() as usize;
        let n_val = (ratios.validation * n as f64).floor() as usize;
        for (k, &i) in idxs.iter().enumerate() {
            instances[i].split = Some(if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Validation
            } else {
                Split::Test
            });
        }
    }
    Ok(())
}

/// Counts of a binary confusion matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_pairs(predictions: &[bool], gold: &[bool]) -> Result<Self, EvalError> {
        if predictions.len() != gold.len() {
            return Err(EvalError::LengthMismatch {
                predictions: predictions.len(),
                gold: gold.len(),
            });
        }
        let mut counts = ConfusionCounts::default();
        for (&p, &g) in predictions.iter().zip(gold) {
            match (p, g) {
                (true, true) => counts.tp += 1,
                (true, false) => counts.fp += 1,
                (false, true) => counts.fn_ += 1,
                (false, false) => counts.tn += 1,
            }
        }
        Ok(counts)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// tp / (tp + fp); 0 when the denominator is 0.
    pub fn precision(&self) -> f64 {
        ratio_or_zero(self.tp, self.tp + self.fp)
    }

    /// tp / (tp + fn); 0 when the denominator is 0.
    pub fn recall(&self) -> f64 {
        ratio_or_zero(self.tp, self.tp + self.fn_)
    }

    /// 2PR / (P + R); 0 when P + R = 0.
    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio_or_zero(self.tp + self.tn, self.total())
    }
}

fn ratio_or_zero(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics for a single value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueMetrics {
    pub value: ResearchValue,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Set when precision or recall had a zero denominator and was defined
    /// as 0.
    pub degenerate: bool,
}

/// Per-value metrics for a prediction/gold pairing.
pub fn evaluate_value(
    predictions: &[bool],
    gold: &[bool],
    value: ResearchValue,
) -> Result<ValueMetrics, EvalError> {
    let counts = ConfusionCounts::from_pairs(predictions, gold)?;
    Ok(ValueMetrics {
        value,
        precision: counts.precision(),
        recall: counts.recall(),
        f1: counts.f1(),
        accuracy: counts.accuracy(),
        degenerate: counts.tp + counts.fp == 0 || counts.tp + counts.fn_ == 0,
        counts,
    })
}

/// Full evaluation report: per-value metrics plus macro-F1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub per_value: Vec<ValueMetrics>,
    pub macro_f1: f64,
}

/// Evaluate aligned prediction/gold label vectors over all ten values.
pub fn evaluate_predictions(
    predictions: &[ValueLabelVector],
    gold: &[ValueLabelVector],
) -> Result<MetricsReport, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    let mut per_value = Vec::with_capacity(ResearchValue::COUNT);
    for value in ResearchValue::ALL {
        let p: Vec<bool> = predictions.iter().map(|v| v.get(value)).collect();
        let g: Vec<bool> = gold.iter().map(|v| v.get(value)).collect();
        per_value.push(evaluate_value(&p, &g, value)?);
    }
    let macro_f1 = per_value.iter().map(|m| m.f1).sum::<f64>() / per_value.len() as f64;
    Ok(MetricsReport {
        n: predictions.len(),
        per_value,
        macro_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(text: &str, flags: ValueLabelVector) -> AnnotatedInstance {
        AnnotatedInstance {
            sentence_text: text.to_string(),
            paper_id: format!("p-{text}"),
            gold: flags,
            split: None,
        }
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let mut data: Vec<AnnotatedInstance> =
            (0..10).map(|i| instance(&i.to_string(), ValueLabelVector::new())).collect();
        assign_splits(&mut data, SplitRatios::default(), 7, false, None).unwrap();
        let count = |s: Split| data.iter().filter(|i| i.split == Some(s)).count();
        assert_eq!(count(Split::Train), 4);
        assert_eq!(count(Split::Validation), 3);
        assert_eq!(count(Split::Test), 3);
    }

    #[test]
    fn splits_are_deterministic_and_respect_existing_tags() {
        let mut a: Vec<AnnotatedInstance> =
            (0..57).map(|i| instance(&i.to_string(), ValueLabelVector::new())).collect();
        let mut b = a.clone();
        assign_splits(&mut a, SplitRatios::default(), 99, false, None).unwrap();
        assign_splits(&mut b, SplitRatios::default(), 99, false, None).unwrap();
        assert_eq!(a, b);

        // Existing tags survive unless resplit is requested.
        let frozen = a.clone();
        assign_splits(&mut a, SplitRatios::default(), 1234, false, None).unwrap();
        assert_eq!(a, frozen);
        assign_splits(&mut a, SplitRatios::default(), 1234, true, None).unwrap();
        assert_ne!(a, frozen);
    }

    #[test]
    fn stratified_split_balances_positives() {
        let mut data = Vec::new();
        for i in 0..20 {
            let mut flags = ValueLabelVector::new();
            flags.set(ResearchValue::Novelty, i < 10);
            data.push(instance(&i.to_string(), flags));
        }
        assign_splits(&mut data, SplitRatios::default(), 5, false, Some(ResearchValue::Novelty)).unwrap();
        let pos_train = data
            .iter()
            .filter(|i| i.gold.get(ResearchValue::Novelty) && i.split == Some(Split::Train))
            .count();
        assert_eq!(pos_train, 4); // floor(0.4 * 10)
    }

    #[test]
    fn bad_ratios_rejected() {
        let mut data = vec![instance("x", ValueLabelVector::new())];
        let bad = SplitRatios { train: 0.5, validation: 0.4, test: 0.3 };
        assert!(assign_splits(&mut data, bad, 0, false, None).is_err());
    }

    #[test]
    fn metrics_hand_example() {
        // tp=2, fp=1, fn=1, tn=6
        let predictions = [true, true, true, false, false, false, false, false, false, false];
        let gold = [true, true, false, true, false, false, false, false, false, false];
        let m = evaluate_value(&predictions, &gold, ResearchValue::Novelty).unwrap();
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.accuracy - 0.8).abs() < 1e-12);
        assert!(!m.degenerate);
    }

    #[test]
    fn perfect_and_degenerate_predictions() {
        let gold = [true, false, true];
        let m = evaluate_value(&gold, &gold, ResearchValue::Novelty).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));

        let none = [false, false, false];
        let m = evaluate_value(&none, &gold, ResearchValue::Novelty).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
        assert!(m.degenerate, "all-negative predictions have no positive denominator");
    }

    #[test]
    fn length_mismatch_is_fatal() {
        let err = evaluate_value(&[true], &[true, false], ResearchValue::Novelty);
        assert!(matches!(err, Err(EvalError::LengthMismatch { .. })));
    }

    #[test]
    fn annotations_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        let mut data = vec![
            instance("We propose a novel parser.", ValueLabelVector::new().with(ResearchValue::Novelty)),
            instance("It is fast.", ValueLabelVector::new().with(ResearchValue::Efficiency)),
        ];
        data[0].split = Some(Split::Train);
        save_annotations(&path, &data).unwrap();
        let back = load_annotations(&path).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn empty_file_with_header_is_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        save_annotations(&path, &[]).unwrap();
        assert!(load_annotations(&path).unwrap().is_empty());
    }

    #[test]
    fn non_binary_label_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        let header = annotation_header().join(",");
        let good = "ok,p1,0,0,0,0,0,0,0,0,0,0,";
        let bad = "bad,p2,0,2,0,0,0,0,0,0,0,0,";
        std::fs::write(&path, format!("{header}\n{good}\n{bad}\n")).unwrap();
        match load_annotations(&path) {
            Err(EvalError::NonBinaryLabel { row, column, got }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "novelty");
                assert_eq!(got, "2");
            }
            other => panic!("expected NonBinaryLabel, got {other:?}"),
        }
    }
}
