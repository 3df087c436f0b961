use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::alignment::AlignmentResult;
use crate::error::{Error, Result};

/// School grade of the speaker: kindergarten (`K`) through grade 10.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grade(u8);

impl Grade {
    pub const KINDERGARTEN: Grade = Grade(0);
    pub const MAX: u8 = 10;

    pub fn new(level: u8) -> Option<Grade> {
        (level <= Self::MAX).then_some(Grade(level))
    }

    /// 0 for kindergarten, otherwise the grade number.
    pub fn level(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Grade> {
        (0..=Self::MAX).map(Grade)
    }

    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("K"),
            n => write!(f, "{n}"),
        }
    }
}

impl FromStr for Grade {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("k") {
            return Ok(Grade::KINDERGARTEN);
        }
        s.parse::<u8>()
            .ok()
            .filter(|n| (1..=Self::MAX).contains(n))
            .map(Grade)
            .ok_or_else(|| format!("invalid grade `{s}` (expected K or 1..10)"))
    }
}

impl Serialize for Grade {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Grade {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(u64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(n) => u8::try_from(n)
                .ok()
                .filter(|n| (1..=Self::MAX).contains(n))
                .map(Grade)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid grade {n}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Boy,
    Girl,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Boy => "boy",
            Gender::Girl => "girl",
        })
    }
}

/// One utterance with its reference transcript, per-model hypotheses and
/// covariates. Absent covariates stay `None`; they are never defaulted to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    #[serde(default)]
    pub speaker_id: String,
    pub reference: String,
    pub hypotheses: BTreeMap<String, String>,
    #[serde(default)]
    pub grade: Option<Grade>,
    #[serde(default)]
    pub gender: Option<Gender>,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub gop: Option<f64>,
    #[serde(default)]
    pub word_count: Option<u64>,
    #[serde(default)]
    pub vocab_difficulty: Option<f64>,
    /// Per-model alignment results, filled in by the `align` stage.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scores: BTreeMap<String, AlignmentResult>,
}

impl UtteranceRecord {
    pub fn new(id: impl Into<String>, reference: impl Into<String>) -> Self {
        UtteranceRecord {
            id: id.into(),
            speaker_id: String::new(),
            reference: reference.into(),
            hypotheses: BTreeMap::new(),
            grade: None,
            gender: None,
            snr_db: None,
            gop: None,
            word_count: None,
            vocab_difficulty: None,
            scores: BTreeMap::new(),
        }
    }

    pub fn with_hypothesis(mut self, model: impl Into<String>, text: impl Into<String>) -> Self {
        self.hypotheses.insert(model.into(), text.into());
        self
    }

    /// Checks the per-record invariants. Uniqueness of ids is checked by the parser.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("field `id` must be non-empty".into());
        }
        if self.hypotheses.is_empty() {
            return Err("field `hypotheses` must have at least one entry".into());
        }
        if self.hypotheses.keys().any(|m| m.trim().is_empty()) {
            return Err("model names in `hypotheses` must be non-empty".into());
        }
        if let Some(gop) = self.gop {
            if !gop.is_finite() || gop > 0.0 {
                return Err(format!("field `gop` must be a finite value <= 0, got {gop}"));
            }
        }
        if let Some(v) = self.vocab_difficulty {
            if !v.is_finite() || v < 0.0 {
                return Err(format!(
                    "field `vocab_difficulty` must be a finite value >= 0, got {v}"
                ));
            }
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(format!("field `snr_db` must be finite, got {snr}"));
            }
        }
        Ok(())
    }
}

/// Parses line-delimited JSON utterance records. Blank lines are skipped.
pub fn parse_utterances<R: BufRead>(reader: R) -> Result<Vec<UtteranceRecord>> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading line {line_no}"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: UtteranceRecord =
            serde_json::from_str(&line).map_err(|e| Error::schema(line_no, e.to_string()))?;
        record.validate().map_err(|m| Error::schema(line_no, m))?;
        if seen.insert(record.id.clone(), line_no).is_some() {
            return Err(Error::DuplicateId {
                id: record.id,
                line: line_no,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn parse_utterances_str(text: &str) -> Result<Vec<UtteranceRecord>> {
    parse_utterances(text.as_bytes())
}

pub fn write_utterances<W: Write>(mut out: W, records: &[UtteranceRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)
            .map_err(|e| Error::io("writing utterance record", e.into()))?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("writing utterance record", e))?;
    }
    Ok(())
}
