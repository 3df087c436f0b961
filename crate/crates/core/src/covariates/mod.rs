//! Inferred covariates: pronunciation quality, vocabulary difficulty,
//! background noise and utterance length.

pub mod gop;
pub mod snr;
pub mod vocab;

use std::collections::BTreeMap;
use std::path::PathBuf;

pub use gop::{
    gop_phone, gop_utterance, GopOptions, GopScore, PhoneInventory, PhoneSegment, PosteriorFrame,
};
pub use snr::estimate_snr;
pub use vocab::{sentence_difficulty, word_rarity};

use crate::alignment::normalize_text;
use crate::error::{Error, Result};
use crate::ingest::{self, FrequencyTable, UtteranceRecord};

/// Number of reference tokens after normalization.
pub fn word_count(reference: &str) -> u64 {
    normalize_text(reference).len() as u64
}

/// Frame posteriors and phone segments keyed by utterance id.
#[derive(Clone, Debug, Default)]
pub struct GopInputs {
    pub inventory: PhoneInventory,
    pub posteriors: BTreeMap<String, Vec<PosteriorFrame>>,
    pub segments: BTreeMap<String, Vec<PhoneSegment>>,
    pub options: GopOptions,
}

#[derive(Clone, Debug)]
pub struct AudioSource {
    /// Directory holding `<id>.wav` or `<id>.raw` (16-bit little-endian mono).
    pub dir: PathBuf,
    /// Sample rate for raw files; WAV headers carry their own.
    pub sample_rate: u32,
}

/// What is available to derive covariates from. Each source is optional.
#[derive(Clone, Debug, Default)]
pub struct CovariateSources {
    pub frequency: Option<FrequencyTable>,
    pub gop: Option<GopInputs>,
    pub audio: Option<AudioSource>,
}

/// Fills the inferred fields of one record.
///
/// Word count is always recomputed. A precomputed `snr_db` is kept. GoP is
/// computed when segments exist for the utterance, otherwise any existing
/// value is kept.
pub fn annotate(record: &mut UtteranceRecord, sources: &CovariateSources) -> Result<()> {
    let tokens = normalize_text(&record.reference);
    record.word_count = Some(tokens.len() as u64);

    if let Some(table) = &sources.frequency {
        if !tokens.is_empty() {
            record.vocab_difficulty = Some(sentence_difficulty(&tokens, table)?);
        }
    }

    if let Some(g) = &sources.gop {
        if let Some(segs) = g.segments.get(&record.id) {
            let empty = Vec::new();
            let frames = g.posteriors.get(&record.id).unwrap_or(&empty);
            let score = gop_utterance(segs, frames, &g.inventory, g.options)?;
            record.gop = Some(score.utterance);
        }
    }

    if record.snr_db.is_none() {
        if let Some(audio) = &sources.audio {
            if let Some(path) = ingest::audio::find_audio(&audio.dir, &record.id) {
                let (samples, sr) = ingest::audio::read_audio(&path, audio.sample_rate)?;
                record.snr_db = Some(estimate_snr(&samples, sr)?);
            }
        }
    }
    Ok(())
}

/// Annotates all records, wrapping failures with the record id.
pub fn annotate_all(records: &mut [UtteranceRecord], sources: &CovariateSources) -> Result<()> {
    for r in records.iter_mut() {
        annotate(r, sources).map_err(|e| e.in_record(&r.id))?;
    }
    Ok(())
}

pub(crate) fn missing(record: &UtteranceRecord, field: &str) -> Error {
    Error::MissingVariable(field.to_string()).in_record(&record.id)
}
