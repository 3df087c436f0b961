//! Frame-energy SNR estimate.
//!
//! Power is the mean square over 25 ms frames with a 10 ms hop. Noise power
//! is the mean of the quietest 10% of frames, signal power the mean of the
//! frames louder than the median. The ratio is reported in dB and clipped
//! to [-10, 60].

use crate::error::{Error, Result};

pub const MIN_DURATION_MS: u32 = 100;
pub const FRAME_MS: f64 = 25.0;
pub const HOP_MS: f64 = 10.0;
pub const SNR_FLOOR_DB: f64 = -10.0;
pub const SNR_CEIL_DB: f64 = 60.0;

pub fn frame_powers(samples: &[f64], sample_rate: u32) -> Vec<f64> {
    let len = ((FRAME_MS / 1000.0) * sample_rate as f64).round().max(1.0) as usize;
    let hop = ((HOP_MS / 1000.0) * sample_rate as f64).round().max(1.0) as usize;
    let mut out = Vec::new();
    let mut start = 0;
    while start + len <= samples.len() {
        let frame = &samples[start..start + len];
        out.push(frame.iter().map(|x| x * x).sum::<f64>() / len as f64);
        start += hop;
    }
    out
}

pub fn estimate_snr(samples: &[f64], sample_rate: u32) -> Result<f64> {
    let got_ms = samples.len() as f64 * 1000.0 / sample_rate.max(1) as f64;
    if sample_rate == 0 || got_ms < MIN_DURATION_MS as f64 {
        return Err(Error::TooShort {
            got_ms,
            needed_ms: MIN_DURATION_MS,
        });
    }
    if samples.iter().all(|&x| x == 0.0) {
        return Err(Error::Silent);
    }
    let mut powers = frame_powers(samples, sample_rate);
    powers.sort_by(f64::total_cmp);
    let n = powers.len();

    let decile = n.div_ceil(10).max(1);
    let noise = powers[..decile].iter().sum::<f64>() / decile as f64;

    let median = if n % 2 == 1 {
        powers[n / 2]
    } else {
        0.5 * (powers[n / 2 - 1] + powers[n / 2])
    };
    let mut loud: Vec<f64> = powers.iter().copied().filter(|&p| p > median).collect();
    if loud.is_empty() {
        loud = powers.iter().copied().filter(|&p| p >= median).collect();
    }
    let signal = loud.iter().sum::<f64>() / loud.len() as f64;

    if noise <= 0.0 {
        return Ok(SNR_CEIL_DB);
    }
    Ok((10.0 * (signal / noise).log10()).clamp(SNR_FLOOR_DB, SNR_CEIL_DB))
}
