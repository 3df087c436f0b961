use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use super::{align_text, AlignmentResult};
use crate::error::{Error, Result};
use crate::ingest::UtteranceRecord;

/// Alignment of one record's hypothesis for `model`.
pub fn utterance_result(record: &UtteranceRecord, model: &str) -> Result<AlignmentResult> {
    let hyp = record
        .hypotheses
        .get(model)
        .ok_or_else(|| Error::MissingModel {
            id: record.id.clone(),
            model: model.to_string(),
        })?;
    align_text(&record.reference, hyp).map_err(|e| match e {
        Error::EmptyRef(_) => Error::EmptyRef(record.id.clone()),
        e => e.in_record(&record.id),
    })
}

/// Summed error counts; merging is commutative and associative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub utterances: u64,
    pub substitutions: u64,
    pub deletions: u64,
    pub insertions: u64,
    pub ref_words: u64,
}

impl ErrorCounts {
    pub fn add(&mut self, r: &AlignmentResult) {
        self.utterances += 1;
        self.substitutions += r.substitutions as u64;
        self.deletions += r.deletions as u64;
        self.insertions += r.insertions as u64;
        self.ref_words += r.ref_len as u64;
    }

    pub fn merge(mut self, other: ErrorCounts) -> ErrorCounts {
        self.utterances += other.utterances;
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.ref_words += other.ref_words;
        self
    }

    pub fn errors(&self) -> u64 {
        self.substitutions + self.deletions + self.insertions
    }

    /// Micro-averaged WER in percent.
    pub fn wer_percent(&self) -> f64 {
        percent(self.errors(), self.ref_words)
    }

    pub fn to_aggregate(&self, key: impl Into<String>) -> ErrorAggregate {
        ErrorAggregate {
            key: key.into(),
            counts: *self,
            sub_rate: percent(self.substitutions, self.ref_words),
            del_rate: percent(self.deletions, self.ref_words),
            ins_rate: percent(self.insertions, self.ref_words),
            wer: self.wer_percent(),
        }
    }
}

fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Micro-averaged error rates (percent) for one group of utterances.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorAggregate {
    pub key: String,
    pub counts: ErrorCounts,
    pub sub_rate: f64,
    pub del_rate: f64,
    pub ins_rate: f64,
    pub wer: f64,
}

/// Scores every record against `model` and aggregates by `group`, emitting
/// groups in key order.
pub fn score_dataset<K, F>(
    records: &[UtteranceRecord],
    model: &str,
    group: F,
) -> Result<Vec<ErrorAggregate>>
where
    K: Ord + Display,
    F: Fn(&UtteranceRecord) -> K,
{
    let mut groups: BTreeMap<K, ErrorCounts> = BTreeMap::new();
    for r in records {
        let res = utterance_result(r, model)?;
        groups.entry(group(r)).or_default().add(&res);
    }
    Ok(groups
        .into_iter()
        .map(|(k, c)| c.to_aggregate(k.to_string()))
        .collect())
}

/// Whole-set aggregate per model, in model-name order.
pub fn score_models(records: &[UtteranceRecord]) -> Result<Vec<ErrorAggregate>> {
    let models = model_names(records)?;
    models
        .iter()
        .map(|m| {
            let mut c = ErrorCounts::default();
            for r in records {
                c.add(&utterance_result(r, m)?);
            }
            Ok(c.to_aggregate(m.clone()))
        })
        .collect()
}

/// The shared model set. Every record must carry every model seen in any record.
pub fn model_names(records: &[UtteranceRecord]) -> Result<Vec<String>> {
    let all: BTreeSet<&String> = records.iter().flat_map(|r| r.hypotheses.keys()).collect();
    for r in records {
        if let Some(m) = all.iter().find(|m| !r.hypotheses.contains_key(m.as_str())) {
            return Err(Error::MissingModel {
                id: r.id.clone(),
                model: (*m).clone(),
            });
        }
    }
    Ok(all.into_iter().cloned().collect())
}

/// Picks, per utterance, the model with the lowest WER. Ties go to fewer
/// substitutions, then to the lexicographically smallest model name.
pub fn oracle_select(records: &[UtteranceRecord]) -> Result<BTreeMap<String, String>> {
    let models = model_names(records)?;
    let mut out = BTreeMap::new();
    for r in records {
        let mut best: Option<((u32, u32), &str)> = None;
        // models are sorted, so strict improvement keeps the smallest name on ties
        for m in &models {
            let res = utterance_result(r, m)?;
            let key = (res.errors(), res.substitutions);
            if best.is_none_or(|(b, _)| key < b) {
                best = Some((key, m));
            }
        }
        if let Some((_, m)) = best {
            out.insert(r.id.clone(), m.to_string());
        }
    }
    Ok(out)
}

/// Aggregate counts when each utterance uses its selected model.
pub fn oracle_aggregate(
    records: &[UtteranceRecord],
    selection: &BTreeMap<String, String>,
) -> Result<ErrorCounts> {
    let mut c = ErrorCounts::default();
    for r in records {
        let model = selection.get(&r.id).ok_or_else(|| Error::MissingModel {
            id: r.id.clone(),
            model: "<oracle>".into(),
        })?;
        c.add(&utterance_result(r, model)?);
    }
    Ok(c)
}

/// Symmetric Pearson correlation matrix of utterance-level WER. Entries are
/// `None` where a model's WER vector has zero variance.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    pub models: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub utterances: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.models.iter().position(|m| m == a)?;
        let j = self.models.iter().position(|m| m == b)?;
        self.values[i][j]
    }
}

pub fn model_correlation(records: &[UtteranceRecord]) -> Result<CorrelationMatrix> {
    if records.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: records.len(),
        });
    }
    let models = model_names(records)?;
    let vectors = models
        .iter()
        .map(|m| {
            records
                .iter()
                .map(|r| utterance_result(r, m).map(|a| a.wer))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let k = models.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        values[i][i] = Some(1.0);
        for j in (i + 1)..k {
            let r = pearson(&vectors[i], &vectors[j]);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        models,
        values,
        utterances: records.len(),
    })
}

/// Correlation matrices per group; groups with fewer than two utterances are skipped.
pub fn model_correlation_by<K, F>(
    records: &[UtteranceRecord],
    group: F,
) -> Result<BTreeMap<K, CorrelationMatrix>>
where
    K: Ord,
    F: Fn(&UtteranceRecord) -> K,
{
    let mut groups: BTreeMap<K, Vec<UtteranceRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group(r)).or_default().push(r.clone());
    }
    let mut out = BTreeMap::new();
    for (k, rs) in groups {
        if rs.len() >= 2 {
            out.insert(k, model_correlation(&rs)?);
        }
    }
    Ok(out)
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
