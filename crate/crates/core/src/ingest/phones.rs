//! Frame-posterior, phone-segment and phone-inventory files.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::covariates::{PhoneInventory, PhoneSegment, PosteriorFrame};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PosteriorLine {
    utterance_id: String,
    t: usize,
    probs: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentLine {
    utterance_id: String,
    phone: String,
    t_s: usize,
    t_e: usize,
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        Ok(s) => Some(Ok((i + 1, s))),
        Err(e) => Some(Err(Error::io(format!("reading line {}", i + 1), e))),
    })
}

/// Reads `{utterance_id, t, probs}` lines, grouped per utterance and sorted by `t`.
pub fn parse_posteriors<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<PosteriorFrame>>> {
    let mut out: BTreeMap<String, Vec<(usize, PosteriorFrame)>> = BTreeMap::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let p: PosteriorLine =
            serde_json::from_str(&text).map_err(|e| Error::schema(line, e.to_string()))?;
        if let Some((s, v)) = p.probs.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::schema(line, format!("probability of `{s}` is {v}")));
        }
        let sum: f64 = p.probs.values().sum();
        if (sum - 1.0).abs() >= SUM_TOLERANCE {
            return Err(Error::schema(line, format!("posteriors sum to {sum}")));
        }
        out.entry(p.utterance_id).or_default().push((
            line,
            PosteriorFrame {
                t: p.t,
                probs: p.probs,
            },
        ));
    }
    out.into_iter()
        .map(|(id, mut frames)| {
            frames.sort_by_key(|(_, f)| f.t);
            if let Some(w) = frames.windows(2).find(|w| w[0].1.t == w[1].1.t) {
                return Err(Error::schema(
                    w[1].0,
                    format!("duplicate frame t = {} for `{id}`", w[1].1.t),
                ));
            }
            Ok((id, frames.into_iter().map(|(_, f)| f).collect()))
        })
        .collect()
}

/// Reads `{utterance_id, phone, t_s, t_e}` lines, grouped per utterance in file order.
pub fn parse_segments<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<PhoneSegment>>> {
    let mut out: BTreeMap<String, Vec<PhoneSegment>> = BTreeMap::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let s: SegmentLine =
            serde_json::from_str(&text).map_err(|e| Error::schema(line, e.to_string()))?;
        if s.t_e <= s.t_s {
            return Err(Error::schema(line, "t_e must exceed t_s"));
        }
        out.entry(s.utterance_id)
            .or_default()
            .push(PhoneSegment::new(s.phone, s.t_s, s.t_e));
    }
    Ok(out)
}

/// Reads a `{phone: [state, ...]}` document.
pub fn parse_inventory(text: &str) -> Result<PhoneInventory> {
    let inv: PhoneInventory =
        serde_json::from_str(text).map_err(|e| Error::schema(e.line(), e.to_string()))?;
    if inv.is_empty() {
        return Err(Error::Empty("phone inventory".into()));
    }
    if let Some(p) = inv.phones().find(|p| inv.states(p).is_some_and(|s| s.is_empty())) {
        return Err(Error::schema(0, format!("phone `{p}` has no states")));
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn posteriors_grouped_and_sorted() {
        let text = concat!(
            r#"{"utterance_id":"u","t":1,"probs":{"a":0.5,"b":0.5}}"#,
            "\n",
            r#"{"utterance_id":"u","t":0,"probs":{"a":1.0}}"#,
            "\n",
        );
        let p = parse_posteriors(text.as_bytes()).unwrap();
        assert_eq!(p["u"].iter().map(|f| f.t).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn posterior_validation() {
        for bad in [
            r#"{"utterance_id":"u","t":0,"probs":{"a":0.5}}"#,
            r#"{"utterance_id":"u","t":0,"probs":{"a":1.5,"b":-0.5}}"#,
            r#"{"utterance_id":"u","probs":{"a":1.0}}"#,
        ] {
            assert_eq!(parse_posteriors(bad.as_bytes()).unwrap_err().code(), "E_SCHEMA");
        }
        let dup = concat!(
            r#"{"utterance_id":"u","t":0,"probs":{"a":1.0}}"#,
            "\n",
            r#"{"utterance_id":"u","t":0,"probs":{"a":1.0}}"#,
        );
        assert!(matches!(
            parse_posteriors(dup.as_bytes()).unwrap_err(),
            Error::Schema { line: 2, .. }
        ));
    }

    #[test]
    fn segments_and_inventory() {
        let s = parse_segments(
            r#"{"utterance_id":"u","phone":"k","t_s":0,"t_e":3}"#.as_bytes(),
        )
        .unwrap();
        assert_eq!(s["u"][0], PhoneSegment::new("k", 0, 3));
        assert_eq!(
            parse_segments(r#"{"utterance_id":"u","phone":"k","t_s":3,"t_e":3}"#.as_bytes())
                .unwrap_err()
                .code(),
            "E_SCHEMA"
        );
        let inv = parse_inventory(r#"{"k":["k_b","k_e"],"ae":["ae"]}"#).unwrap();
        assert_eq!(inv.states("k").unwrap().len(), 2);
        assert!(parse_inventory(r#"{"k":[]}"#).is_err());
    }
}
