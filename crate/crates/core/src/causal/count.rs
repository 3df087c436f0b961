use rayon::prelude::*;

use super::dataset::DiscreteDataset;

const CHUNK: usize = 8192;

/// Mixed-radix index of a configuration, first component most significant.
pub(crate) fn config_index(values: &[usize], cards: &[usize]) -> usize {
    values
        .iter()
        .zip(cards)
        .fold(0, |acc, (&v, &k)| acc * k + v)
}

/// Counts rows per joint configuration of `columns`. Each column is paired
/// with a map from its stored codes to the target category index and the
/// target cardinality. Integer counts make the parallel reduction exact.
pub(crate) fn count_mapped(
    n_rows: usize,
    columns: &[(&[u16], &[u16], usize)],
) -> Vec<u64> {
    let size: usize = columns.iter().map(|c| c.2).product();
    let tally = |range: std::ops::Range<usize>| {
        let mut acc = vec![0u64; size];
        for r in range {
            let mut idx = 0usize;
            for &(col, map, k) in columns {
                idx = idx * k + map[col[r] as usize] as usize;
            }
            acc[idx] += 1;
        }
        acc
    };
    let starts: Vec<usize> = (0..n_rows).step_by(CHUNK).collect();
    starts
        .into_par_iter()
        .map(|s| tally(s..(s + CHUNK).min(n_rows)))
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Counts over the dataset's own category indices of `vars`.
pub(crate) fn count_configs(data: &DiscreteDataset, vars: &[usize]) -> Vec<u64> {
    let identity: Vec<Vec<u16>> = vars
        .iter()
        .map(|&v| (0..data.cardinality(v) as u16).collect())
        .collect();
    let columns: Vec<(&[u16], &[u16], usize)> = vars
        .iter()
        .zip(&identity)
        .map(|(&v, id)| (data.column(v), id.as_slice(), data.cardinality(v)))
        .collect();
    count_mapped(data.len(), &columns)
}

/// Calls `f` on every assignment of a mixed-radix space, last digit fastest.
pub(crate) fn for_each_assignment(cards: &[usize], mut f: impl FnMut(&[usize])) {
    if cards.contains(&0) {
        return;
    }
    let mut digits = vec![0usize; cards.len()];
    loop {
        f(&digits);
        let mut i = cards.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < cards[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}
