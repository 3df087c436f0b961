//! Entropy, conditional entropy, mutual information (nats) and the plug-in
//! conditional mutual information estimator.

use super::count::count_configs;
use super::dataset::DiscreteDataset;
use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-9;

fn check_normalized<'a>(probs: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::NotNormalized(p));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `-sum p ln p`, with `0 ln 0 = 0`.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    check_normalized(dist.iter())?;
    Ok(-dist.iter().map(|&p| plogp(p)).sum::<f64>())
}

fn check_joint(joint: &[Vec<f64>]) -> Result<()> {
    if let Some(first) = joint.first() {
        if joint.iter().any(|r| r.len() != first.len()) {
            return Err(Error::InvalidSpec("ragged joint table".into()));
        }
    }
    check_normalized(joint.iter().flatten())
}

fn column_marginal(joint: &[Vec<f64>]) -> Vec<f64> {
    let cols = joint.first().map_or(0, Vec::len);
    (0..cols).map(|y| joint.iter().map(|r| r[y]).sum()).collect()
}

/// `H(X | Y)` for a joint table indexed `joint[x][y]`.
pub fn conditional_entropy(joint: &[Vec<f64>]) -> Result<f64> {
    check_joint(joint)?;
    let py = column_marginal(joint);
    let mut h = 0.0;
    for row in joint {
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                h -= p * (p / py[y]).ln();
            }
        }
    }
    Ok(h.max(0.0))
}

/// `I(X; Y) = sum p(x,y) ln[p(x,y) / (p(x) p(y))]`, clamped at zero.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    check_joint(joint)?;
    Ok(mutual_information_unchecked(joint))
}

pub(crate) fn mutual_information_unchecked(joint: &[Vec<f64>]) -> f64 {
    let py = column_marginal(joint);
    let mut mi = 0.0;
    for row in joint {
        let px: f64 = row.iter().sum();
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (px * py[y])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Plug-in `I(X; Y | Z)` from the additively smoothed empirical joint.
///
/// Every cell of the `(z, x, y)` table receives `alpha` pseudo-counts, so
/// `p(x, y | z) = (n_xyz + alpha) / (n_z + alpha * |X| * |Y|)` and
/// `p(z) = (n_z + alpha * |X| * |Y|) / (N + alpha * |X| * |Y| * |Z|)`.
/// With an empty conditioning set this is exactly the mutual information of
/// the smoothed `(x, y)` table.
pub fn conditional_mutual_information(
    data: &DiscreteDataset,
    x: &str,
    y: &str,
    z: &[&str],
    alpha: f64,
) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidSpec(format!("smoothing alpha {alpha} must be >= 0")));
    }
    if x == y || z.contains(&x) || z.contains(&y) {
        return Err(Error::InvalidSpec(format!(
            "x (`{x}`), y (`{y}`) and the conditioning set must be disjoint"
        )));
    }
    let xi = data.require(x)?;
    let yi = data.require(y)?;
    let zi = z
        .iter()
        .map(|n| data.require(n))
        .collect::<Result<Vec<_>>>()?;
    let (kx, ky) = (data.cardinality(xi), data.cardinality(yi));
    let kz: usize = zi.iter().map(|&v| data.cardinality(v)).product();

    let mut vars = zi.clone();
    vars.push(xi);
    vars.push(yi);
    let counts = count_configs(data, &vars);
    let block = kx * ky;
    let n = data.len() as f64;
    let denom = n + alpha * (block * kz) as f64;
    if denom <= 0.0 {
        return Err(Error::Empty("no rows and no smoothing".into()));
    }

    let mut cmi = 0.0;
    let mut table = vec![vec![0.0; ky]; kx];
    for cells in counts.chunks(block) {
        let nz: u64 = cells.iter().sum();
        let mass = nz as f64 + alpha * block as f64;
        if mass <= 0.0 {
            continue;
        }
        for (i, row) in table.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                *p = (cells[i * ky + j] as f64 + alpha) / mass;
            }
        }
        cmi += (mass / denom) * mutual_information_unchecked(&table);
    }
    Ok(cmi.max(0.0))
}
