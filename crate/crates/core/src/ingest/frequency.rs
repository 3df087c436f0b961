use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Pooled word counts from one or more text corpora.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `word`. Words are lowercased so that the
    /// table lines up with normalized transcript tokens.
    pub fn add(&mut self, word: &str, count: u64) {
        *self.counts.entry(word.to_lowercase()).or_insert(0) += count;
        self.total_tokens += count;
    }

    /// Pools another table into this one by count summation.
    pub fn merge(&mut self, other: &FrequencyTable) {
        for (w, &c) in &other.counts {
            *self.counts.entry(w.clone()).or_insert(0) += c;
        }
        self.total_tokens += other.total_tokens;
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }
}

impl<'a> FromIterator<(&'a str, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (&'a str, u64)>>(iter: I) -> Self {
        let mut t = FrequencyTable::new();
        for (w, c) in iter {
            t.add(w, c);
        }
        t
    }
}

/// Parses a `word,count` table. Repeated words are pooled.
pub fn parse_frequency_table<R: Read>(reader: R) -> Result<FrequencyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::schema(1, e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "word" || &headers[1] != "count" {
        return Err(Error::schema(1, "expected header `word,count`"));
    }
    let mut table = FrequencyTable::new();
    let mut rows = 0usize;
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::schema(line, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::schema(line, "expected two columns"));
        }
        let word = &rec[0];
        if word.is_empty() {
            return Err(Error::schema(line, "empty word"));
        }
        let count: u64 = rec[1].parse().map_err(|_| {
            Error::schema(
                line,
                format!("count `{}` is not a non-negative integer", &rec[1]),
            )
        })?;
        table.add(word, count);
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Empty("frequency table has no rows".into()));
    }
    Ok(table)
}

pub fn write_frequency_table<W: Write>(out: W, table: &FrequencyTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("writing frequency table", e.into());
    wtr.write_record(["word", "count"]).map_err(io)?;
    for (w, c) in table.iter() {
        wtr.write_record([w, &c.to_string()]).map_err(io)?;
    }
    wtr.flush()
        .map_err(|e| Error::io("writing frequency table", e))
}
