use crate::error::{Error, Result};
use crate::ingest::FrequencyTable;

/// Add-one smoothed negative log relative frequency:
/// `-ln((count + 1) / (total_tokens + vocab_size))`.
///
/// Unseen words get the largest score the table can produce.
pub fn word_rarity(word: &str, table: &FrequencyTable) -> f64 {
    let denom = (table.total_tokens() + table.vocab_size() as u64).max(1) as f64;
    let num = (table.count(word) + 1) as f64;
    (denom / num).ln().max(0.0)
}

/// Mean rarity of the tokens of a sentence.
pub fn sentence_difficulty<S: AsRef<str>>(tokens: &[S], table: &FrequencyTable) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::Empty("sentence has no tokens".into()));
    }
    let total: f64 = tokens.iter().map(|t| word_rarity(t.as_ref(), table)).sum();
    Ok(total / tokens.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> FrequencyTable {
        [("the", 50), ("cat", 10)].into_iter().collect()
    }

    // expected values from direct evaluation of -ln(k/62)
    const RARITY_UNSEEN: f64 = 4.127134385045092;
    const RARITY_THE: f64 = 0.19530875232076572;
    const RARITY_CAT: f64 = 1.729239112246721;

    #[test]
    fn rarity_values() {
        let t = table();
        assert!((word_rarity("zyzzyva", &t) - RARITY_UNSEEN).abs() < 1e-12);
        assert!((word_rarity("the", &t) - RARITY_THE).abs() < 1e-12);
        assert!((word_rarity("cat", &t) - RARITY_CAT).abs() < 1e-12);
        assert!(word_rarity("the", &t) < word_rarity("cat", &t));
        assert!(word_rarity("cat", &t) < word_rarity("zyzzyva", &t));
    }

    #[test]
    fn sentence_mean() {
        let t = table();
        assert_eq!(
            sentence_difficulty(&["cat"], &t).unwrap(),
            word_rarity("cat", &t)
        );
        let d = sentence_difficulty(&["the", "cat"], &t).unwrap();
        assert!((d - (RARITY_THE + RARITY_CAT) / 2.0).abs() < 1e-12);
        assert!((d - 0.962274).abs() < 1e-6);
        assert_eq!(
            sentence_difficulty::<&str>(&[], &t).unwrap_err().code(),
            "E_EMPTY"
        );
    }

    proptest! {
        #[test]
        fn rarity_strictly_decreasing_in_count(base in 0u64..1000, others in 0u64..1000) {
            let lo: FrequencyTable = [("w", base), ("x", others)].into_iter().collect();
            let hi: FrequencyTable = [("w", base + 1), ("x", others)].into_iter().collect();
            // adding one occurrence changes the total too; rarity must still drop
            prop_assert!(word_rarity("w", &hi) < word_rarity("w", &lo));
        }

        #[test]
        fn sentence_within_word_range(words in prop::collection::vec("[a-d]", 1..8)) {
            let t: FrequencyTable = [("a", 40), ("b", 5), ("c", 1)].into_iter().collect();
            let r: Vec<f64> = words.iter().map(|w| word_rarity(w, &t)).collect();
            let d = sentence_difficulty(&words, &t).unwrap();
            let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(d >= lo - 1e-12 && d <= hi + 1e-12);
        }
    }
}
