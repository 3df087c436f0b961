//! Audio sample ingestion: 16-bit PCM mono, raw or WAV.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Looks for `<id>.wav`, then `<id>.raw`, under `dir`.
pub fn find_audio(dir: &Path, id: &str) -> Option<PathBuf> {
    ["wav", "raw"]
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
}

/// Reads samples scaled to [-1, 1). Raw files use `raw_sample_rate`.
pub fn read_audio(path: &Path, raw_sample_rate: u32) -> Result<(Vec<f64>, u32)> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
        read_wav(path)
    } else {
        let bytes = std::fs::read(path).map_err(|e| Error::io_path(path, e))?;
        Ok((decode_pcm16(&bytes), raw_sample_rate))
    }
}

pub fn decode_pcm16(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect()
}

pub fn read_wav(path: &Path) -> Result<(Vec<f64>, u32)> {
    let bad = |m: String| Error::schema(0, format!("{}: {m}", path.display()));
    let mut reader = hound::WavReader::open(path).map_err(|e| bad(e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(bad(format!(
            "expected 16-bit integer mono, got {} channel(s) at {} bits",
            spec.channels, spec.bits_per_sample
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| bad(e.to_string()))?;
    Ok((samples, spec.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_and_raw_agree() {
        let dir = tempfile::tempdir().unwrap();
        let values: Vec<i16> = (0..1000).map(|i| ((i * 37) % 2000 - 1000) as i16).collect();
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let wav = dir.path().join("u1.wav");
        let mut w = hound::WavWriter::create(&wav, spec).unwrap();
        for v in &values {
            w.write_sample(*v).unwrap();
        }
        w.finalize().unwrap();
        let raw = dir.path().join("u2.raw");
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(&raw, bytes).unwrap();

        assert_eq!(find_audio(dir.path(), "u1"), Some(wav.clone()));
        assert_eq!(find_audio(dir.path(), "u3"), None);
        let (a, sr_a) = read_audio(&wav, 16000).unwrap();
        let (b, sr_b) = read_audio(&raw, 8000).unwrap();
        assert_eq!(a, b);
        assert_eq!((sr_a, sr_b), (8000, 8000));
    }
}
