//! Goodness of pronunciation from frame-level phone-state posteriors.
//!
//! For a segment `[t_s, t_e)` aligned to target phone `p`, each phone `q` in
//! the inventory gets an averaged log-posterior
//!
//! ```text
//! logL(q) = 1/(t_e - t_s) * sum_{t in [t_s, t_e)} ln( sum_{s in states(q)} P(s | o_t) )
//! ```
//!
//! and `GOP(p) = logL(p) - max_q logL(q)`. Natural log throughout. Since `p`
//! is itself in the inventory the score is never positive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Posterior distribution over phone states at one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorFrame {
    pub t: usize,
    pub probs: BTreeMap<String, f64>,
}

/// Phone label to its context-dependent state labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhoneInventory {
    states: BTreeMap<String, Vec<String>>,
}

impl PhoneInventory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<S: Into<String>>(
        &mut self,
        phone: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        self.states
            .insert(phone.into(), states.into_iter().map(Into::into).collect());
        self
    }

    pub fn states(&self, phone: &str) -> Option<&[String]> {
        self.states.get(phone).map(Vec::as_slice)
    }

    pub fn phones(&self) -> impl Iterator<Item = &str> {
        self.states.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// A target phone aligned to frames `start..end` (end exclusive).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhoneSegment {
    pub phone: String,
    #[serde(rename = "t_s")]
    pub start: usize,
    #[serde(rename = "t_e")]
    pub end: usize,
}

impl PhoneSegment {
    pub fn new(phone: impl Into<String>, start: usize, end: usize) -> Self {
        PhoneSegment {
            phone: phone.into(),
            start,
            end,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GopOptions {
    /// Lower bound applied to per-frame phone mass before taking the log.
    /// `None` makes a zero mass an error.
    pub floor: Option<f64>,
}

impl GopOptions {
    pub const DEFAULT_FLOOR: f64 = 1e-10;

    pub fn with_floor() -> Self {
        GopOptions {
            floor: Some(Self::DEFAULT_FLOOR),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GopScore {
    pub phones: Vec<(String, f64)>,
    /// Arithmetic mean of the per-phone scores.
    pub utterance: f64,
}

fn frame_at(frames: &[PosteriorFrame], t: usize) -> Result<&PosteriorFrame> {
    // frames are usually dense and sorted; fall back to a scan otherwise
    if let Some(f) = frames.get(t).filter(|f| f.t == t) {
        return Ok(f);
    }
    match frames.binary_search_by_key(&t, |f| f.t) {
        Ok(i) => Ok(&frames[i]),
        Err(_) => frames
            .iter()
            .find(|f| f.t == t)
            .ok_or(Error::MissingFrame(t)),
    }
}

fn averaged_log_posterior(
    phone: &str,
    states: &[String],
    segment: &PhoneSegment,
    frames: &[PosteriorFrame],
    opts: GopOptions,
) -> Result<f64> {
    let mut sum = 0.0;
    for t in segment.start..segment.end {
        let frame = frame_at(frames, t)?;
        let mass: f64 = states
            .iter()
            .map(|s| frame.probs.get(s).copied().unwrap_or(0.0))
            .sum();
        let mass = match opts.floor {
            Some(eps) => mass.max(eps),
            None if mass <= 0.0 => {
                return Err(Error::ZeroPosterior {
                    phone: phone.to_string(),
                    frame: t,
                })
            }
            None => mass,
        };
        sum += mass.ln();
    }
    Ok(sum / (segment.end - segment.start) as f64)
}

/// GoP of one aligned phone segment.
pub fn gop_phone(
    segment: &PhoneSegment,
    frames: &[PosteriorFrame],
    inventory: &PhoneInventory,
    opts: GopOptions,
) -> Result<f64> {
    if segment.end <= segment.start {
        return Err(Error::InvalidSegment(format!(
            "`{}` has t_e = {} <= t_s = {}",
            segment.phone, segment.end, segment.start
        )));
    }
    let target_states = inventory
        .states(&segment.phone)
        .ok_or_else(|| Error::UnknownPhone(segment.phone.clone()))?;
    let mut target = None;
    let mut best = f64::NEG_INFINITY;
    for phone in inventory.phones() {
        let states = inventory.states(phone).unwrap_or_default();
        if states.is_empty() {
            return Err(Error::InvalidSegment(format!(
                "phone `{phone}` has no states"
            )));
        }
        let ll = averaged_log_posterior(phone, states, segment, frames, opts)?;
        if phone == segment.phone {
            target = Some(ll);
        }
        best = best.max(ll);
    }
    let target = match target {
        Some(t) => t,
        None => averaged_log_posterior(&segment.phone, target_states, segment, frames, opts)?,
    };
    Ok(target - best)
}

/// Per-phone GoP plus the utterance mean.
pub fn gop_utterance(
    segments: &[PhoneSegment],
    frames: &[PosteriorFrame],
    inventory: &PhoneInventory,
    opts: GopOptions,
) -> Result<GopScore> {
    if segments.is_empty() {
        return Err(Error::Empty("no phone segments".into()));
    }
    let phones = segments
        .iter()
        .enumerate()
        .map(|(index, seg)| {
            gop_phone(seg, frames, inventory, opts)
                .map(|g| (seg.phone.clone(), g))
                .map_err(|e| Error::Segment {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let utterance = phones.iter().map(|(_, g)| g).sum::<f64>() / phones.len() as f64;
    Ok(GopScore { phones, utterance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_phone_inventory() -> PhoneInventory {
        let mut inv = PhoneInventory::new();
        inv.insert("p", ["p1", "p2"]).insert("q", ["q1"]);
        inv
    }

    /// Frames where phone p gets `p_mass[t]` split over its two states.
    fn frames(p_mass: &[f64]) -> Vec<PosteriorFrame> {
        p_mass
            .iter()
            .enumerate()
            .map(|(t, &m)| PosteriorFrame {
                t,
                probs: [
                    ("p1".to_string(), m / 2.0),
                    ("p2".to_string(), m / 2.0),
                    ("q1".to_string(), 1.0 - m),
                ]
                .into_iter()
                .collect(),
            })
            .collect()
    }

    #[test]
    fn target_is_maximal() {
        let g = gop_phone(
            &PhoneSegment::new("p", 0, 2),
            &frames(&[0.8, 0.8]),
            &two_phone_inventory(),
            GopOptions::default(),
        )
        .unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn target_dominated() {
        let g = gop_phone(
            &PhoneSegment::new("p", 0, 2),
            &frames(&[0.2, 0.2]),
            &two_phone_inventory(),
            GopOptions::default(),
        )
        .unwrap();
        assert!((g - 0.25f64.ln()).abs() < 1e-12);
        assert!((g + 1.386294).abs() < 1e-6);
    }

    #[test]
    fn equal_averages_give_zero() {
        let g = gop_phone(
            &PhoneSegment::new("p", 0, 2),
            &frames(&[0.8, 0.2]),
            &two_phone_inventory(),
            GopOptions::default(),
        )
        .unwrap();
        assert!(g.abs() < 1e-15);
    }

    #[test]
    fn segment_window_only() {
        // frames outside [1, 3) are ignored
        let g = gop_phone(
            &PhoneSegment::new("p", 1, 3),
            &frames(&[0.01, 0.2, 0.2, 0.99]),
            &two_phone_inventory(),
            GopOptions::default(),
        )
        .unwrap();
        assert!((g - 0.25f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_needs_floor() {
        let seg = PhoneSegment::new("p", 0, 1);
        let fr = frames(&[1.0]);
        let err = gop_phone(&seg, &fr, &two_phone_inventory(), GopOptions::default()).unwrap_err();
        assert_eq!(err.code(), "E_ZERO_POSTERIOR");
        let g = gop_phone(&seg, &fr, &two_phone_inventory(), GopOptions::with_floor()).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn segment_errors() {
        let inv = two_phone_inventory();
        let fr = frames(&[0.5]);
        assert_eq!(
            gop_phone(&PhoneSegment::new("p", 1, 1), &fr, &inv, GopOptions::default())
                .unwrap_err()
                .code(),
            "E_INVALID_SEGMENT"
        );
        assert_eq!(
            gop_phone(&PhoneSegment::new("zh", 0, 1), &fr, &inv, GopOptions::default())
                .unwrap_err()
                .code(),
            "E_UNKNOWN_PHONE"
        );
        assert_eq!(
            gop_phone(&PhoneSegment::new("p", 0, 2), &fr, &inv, GopOptions::default())
                .unwrap_err()
                .code(),
            "E_MISSING_FRAME"
        );
    }

    #[test]
    fn utterance_mean() {
        let inv = two_phone_inventory();
        let fr = frames(&[0.8, 0.8, 0.2, 0.2]);
        let s = gop_utterance(
            &[PhoneSegment::new("p", 0, 2), PhoneSegment::new("p", 2, 4)],
            &fr,
            &inv,
            GopOptions::default(),
        )
        .unwrap();
        assert_eq!(s.phones.len(), 2);
        assert_eq!(s.phones[0].1, 0.0);
        assert!((s.utterance + std::f64::consts::LN_2).abs() < 1e-12);

        let one = gop_utterance(&[PhoneSegment::new("p", 0, 2)], &fr, &inv, GopOptions::default())
            .unwrap();
        assert_eq!(one.utterance, 0.0);

        let err = gop_utterance(&[], &fr, &inv, GopOptions::default()).unwrap_err();
        assert_eq!(err.code(), "E_EMPTY");
    }

    #[test]
    fn segment_index_propagated() {
        let inv = two_phone_inventory();
        let fr = frames(&[0.5, 1.0]);
        let err = gop_utterance(
            &[PhoneSegment::new("p", 0, 1), PhoneSegment::new("p", 1, 2)],
            &fr,
            &inv,
            GopOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err.code(), "E_ZERO_POSTERIOR");
        assert!(matches!(err, Error::Segment { index: 1, .. }));
    }

    proptest! {
        #[test]
        fn invariant_to_uniform_scaling(
            raw in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 1..6),
            scale in 0.01f64..100.0,
        ) {
            let mut inv = PhoneInventory::new();
            inv.insert("a", ["a"]).insert("b", ["b"]).insert("c", ["c"]);
            let build = |k: f64| -> Vec<PosteriorFrame> {
                raw.iter().enumerate().map(|(t, row)| {
                    let z: f64 = row.iter().sum();
                    PosteriorFrame {
                        t,
                        probs: ["a", "b", "c"].iter().zip(row)
                            .map(|(s, p)| (s.to_string(), k * p / z))
                            .collect(),
                    }
                }).collect()
            };
            let seg = PhoneSegment::new("b", 0, raw.len());
            let g1 = gop_phone(&seg, &build(1.0), &inv, GopOptions::default()).unwrap();
            let g2 = gop_phone(&seg, &build(scale), &inv, GopOptions::default()).unwrap();
            prop_assert!(g1 <= 0.0);
            prop_assert!((g1 - g2).abs() < 1e-9);
        }
    }
}
