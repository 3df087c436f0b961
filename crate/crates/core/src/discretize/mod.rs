//! Continuous covariates to ordinal categories.
//!
//! Three fitting methods: mean ± one standard deviation, valleys of a
//! Gaussian kernel density estimate, and equal-mass quantiles (also the
//! fallback when the density has too few valleys).

mod kde;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kde::{fit_kde_bins, silverman_bandwidth, KdeGrid, GRID_POINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinMethod {
    Sigma,
    Kde,
    Quantile,
}

impl fmt::Display for BinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinMethod::Sigma => "sigma",
            BinMethod::Kde => "kde",
            BinMethod::Quantile => "quantile",
        })
    }
}

/// Fitted boundaries and labels for one variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinningScheme {
    pub variable: String,
    pub method: BinMethod,
    pub boundaries: Vec<f64>,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    /// Set when this scheme replaced a requested method that could not be fitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_from: Option<BinMethod>,
}

/// Labels for `k` ordered bins. Three bins read Low/Average/High; fewer bins
/// keep a subset of those names so they still match three-level graph nodes.
pub fn ordinal_labels(k: usize) -> Vec<String> {
    let names: &[&str] = match k {
        1 => &["Average"],
        2 => &["Low", "High"],
        3 => &["Low", "Average", "High"],
        _ => return (1..=k).map(|i| format!("L{i}")).collect(),
    };
    names.iter().map(|s| s.to_string()).collect()
}

impl BinningScheme {
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.boundaries.len() + 1 {
            return Err(Error::InvalidSpec(format!(
                "scheme `{}` has {} labels for {} boundaries",
                self.variable,
                self.labels.len(),
                self.boundaries.len()
            )));
        }
        if self.boundaries.iter().any(|b| !b.is_finite())
            || self.boundaries.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidSpec(format!(
                "scheme `{}` boundaries are not strictly increasing",
                self.variable
            )));
        }
        if self.method == BinMethod::Sigma && !matches!(self.boundaries.len(), 0 | 2) {
            return Err(Error::InvalidSpec(format!(
                "sigma scheme `{}` needs zero or two boundaries",
                self.variable
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.labels.len()
    }

    /// Bin index of `x`. Generic schemes are half-open (`x >= b_i` moves up);
    /// the sigma scheme treats `[mean - std, mean + std]` as closed.
    pub fn apply_index(&self, x: f64) -> usize {
        match (self.method, self.boundaries.as_slice()) {
            (BinMethod::Sigma, &[lo, hi]) => {
                if x < lo {
                    0
                } else if x > hi {
                    2
                } else {
                    1
                }
            }
            (_, bounds) => bounds.partition_point(|&b| b <= x),
        }
    }

    pub fn apply(&self, x: f64) -> &str {
        &self.labels[self.apply_index(x)]
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidSpec(format!("cannot bin non-finite value {v}"))),
        None => Ok(()),
    }
}

pub(crate) fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Low / Average / High around the mean, using the population standard deviation.
pub fn fit_sigma_bins(variable: &str, values: &[f64]) -> Result<BinningScheme> {
    if values.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: values.len(),
        });
    }
    check_finite(values)?;
    let (mean, std) = mean_and_population_std(values);
    let (lo, hi) = (mean - std, mean + std);
    let (boundaries, labels) = if std > 0.0 && lo < hi {
        (vec![lo, hi], ordinal_labels(3))
    } else {
        (Vec::new(), ordinal_labels(1))
    };
    Ok(BinningScheme {
        variable: variable.to_string(),
        method: BinMethod::Sigma,
        boundaries,
        labels,
        mean: Some(mean),
        std: Some(std),
        bandwidth: None,
        fallback_from: None,
    })
}

/// Equal-mass bins. On distinct values each bin gets `n / bins` points, ±1.
/// Boundaries are midpoints between neighbouring order statistics; repeated
/// values can merge bins.
pub fn fit_quantile_bins(variable: &str, values: &[f64], bins: usize) -> Result<BinningScheme> {
    let bins = bins.max(1);
    if values.len() < bins {
        return Err(Error::TooFew {
            needed: bins,
            got: values.len(),
        });
    }
    check_finite(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut boundaries: Vec<f64> = Vec::with_capacity(bins - 1);
    for i in 1..bins {
        let idx = i * n / bins;
        let b = 0.5 * (sorted[idx - 1] + sorted[idx]);
        if boundaries.last().is_none_or(|&last| b > last) && b > sorted[0] {
            boundaries.push(b);
        }
    }
    let (mean, std) = mean_and_population_std(&sorted);
    Ok(BinningScheme {
        variable: variable.to_string(),
        method: BinMethod::Quantile,
        labels: ordinal_labels(boundaries.len() + 1),
        boundaries,
        mean: Some(mean),
        std: Some(std),
        bandwidth: None,
        fallback_from: None,
    })
}

/// Fits a scheme with the requested method.
pub fn fit(method: BinMethod, variable: &str, values: &[f64], bins: usize) -> Result<BinningScheme> {
    match method {
        BinMethod::Sigma => fit_sigma_bins(variable, values),
        BinMethod::Kde => fit_kde_bins(variable, values, bins),
        BinMethod::Quantile => fit_quantile_bins(variable, values, bins),
    }
}
