use super::{check_finite, fit_quantile_bins, ordinal_labels, BinMethod, BinningScheme};
use crate::error::{Error, Result};

pub const GRID_POINTS: usize = 512;
const MIN_VALUES: usize = 10;

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule, `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`, with the sample
/// standard deviation. When the IQR is zero the standard deviation is used alone.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian KDE evaluated on an evenly spaced grid.
#[derive(Clone, Debug)]
pub struct KdeGrid {
    pub bandwidth: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

impl KdeGrid {
    /// Grid over `[min - 3h, max + 3h]`. `sorted` must be ascending.
    pub fn new(sorted: &[f64], bandwidth: f64) -> Self {
        let n = sorted.len() as f64;
        let lo = sorted[0] - 3.0 * bandwidth;
        let hi = sorted[sorted.len() - 1] + 3.0 * bandwidth;
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let norm = 1.0 / (n * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
        let x: Vec<f64> = (0..GRID_POINTS).map(|i| lo + i as f64 * step).collect();
        let density = x
            .iter()
            .map(|&g| {
                sorted
                    .iter()
                    .map(|&v| {
                        let z = (g - v) / bandwidth;
                        (-0.5 * z * z).exp()
                    })
                    .sum::<f64>()
                    * norm
            })
            .collect();
        KdeGrid {
            bandwidth,
            x,
            density,
        }
    }

    /// Interior local minima as `(position, density)`. A flat run of equal
    /// densities bounded by higher values on both sides counts once, at its centre.
    pub fn local_minima(&self) -> Vec<(f64, f64)> {
        let d = &self.density;
        let mut out = Vec::new();
        let mut i = 1;
        while i + 1 < d.len() {
            let mut j = i;
            while j + 1 < d.len() && d[j + 1] == d[i] {
                j += 1;
            }
            if j + 1 < d.len() && d[i - 1] > d[i] && d[j + 1] > d[j] {
                out.push((0.5 * (self.x[i] + self.x[j]), d[i]));
            }
            i = j + 1;
        }
        out
    }
}

/// Places boundaries at the lowest density valleys. With fewer than
/// `bins - 1` valleys the fit falls back to equal-mass quantiles and the
/// scheme is marked `method = quantile`.
pub fn fit_kde_bins(variable: &str, values: &[f64], bins: usize) -> Result<BinningScheme> {
    if values.len() < MIN_VALUES {
        return Err(Error::TooFew {
            needed: MIN_VALUES,
            got: values.len(),
        });
    }
    if bins < 2 {
        return Err(Error::InvalidSpec("kde binning needs at least two bins".into()));
    }
    check_finite(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let h = silverman_bandwidth(&sorted);
    let fallback = |h: Option<f64>| -> Result<BinningScheme> {
        let mut s = fit_quantile_bins(variable, &sorted, bins)?;
        s.bandwidth = h;
        s.fallback_from = Some(BinMethod::Kde);
        Ok(s)
    };
    if !(h > 0.0 && h.is_finite()) {
        return fallback(None);
    }
    let grid = KdeGrid::new(&sorted, h);
    let mut minima = grid.local_minima();
    if minima.len() < bins - 1 {
        return fallback(Some(h));
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    minima.truncate(bins - 1);
    let mut boundaries: Vec<f64> = minima.into_iter().map(|(x, _)| x).collect();
    boundaries.sort_by(f64::total_cmp);

    let (mean, std) = super::mean_and_population_std(&sorted);
    Ok(BinningScheme {
        variable: variable.to_string(),
        method: BinMethod::Kde,
        labels: ordinal_labels(boundaries.len() + 1),
        boundaries,
        mean: Some(mean),
        std: Some(std),
        bandwidth: Some(h),
        fallback_from: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn mixture(centres: &[f64], sd: f64, per: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        centres
            .iter()
            .flat_map(|&c| {
                let d = Normal::new(c, sd).unwrap();
                (0..per).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn silverman_matches_hand_value() {
        // 1..=10: sd = 3.02765, IQR = 4.5 -> min(3.02765, 3.35821) = sd
        let v: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let expected = 0.9 * 3.0276503540974917 * 10f64.powf(-0.2);
        assert!((silverman_bandwidth(&v) - expected).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        let v = mixture(&[0.0], 1.0, 500, 3);
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let g = KdeGrid::new(&s, silverman_bandwidth(&s));
        let step = g.x[1] - g.x[0];
        let area: f64 = g.density.iter().sum::<f64>() * step;
        assert!((area - 1.0).abs() < 0.01, "{area}");
    }

    #[test]
    fn bimodal_valley_near_zero() {
        let v = mixture(&[-3.0, 3.0], 0.5, 5000, 42);
        let s = fit_kde_bins("v", &v, 2).unwrap();
        assert_eq!(s.method, BinMethod::Kde);
        assert_eq!(s.boundaries.len(), 1);
        assert!(s.boundaries[0].abs() <= 0.3, "{:?}", s.boundaries);
    }

    #[test]
    fn trimodal_three_bins() {
        let v = mixture(&[-6.0, 0.0, 6.0], 0.5, 3000, 7);
        let s = fit_kde_bins("v", &v, 3).unwrap();
        assert_eq!(s.method, BinMethod::Kde);
        assert_eq!(s.labels, vec!["Low", "Average", "High"]);
        assert!((s.boundaries[0] + 3.0).abs() < 0.5);
        assert!((s.boundaries[1] - 3.0).abs() < 0.5);
    }

    #[test]
    fn unimodal_falls_back_to_tertiles() {
        let v = mixture(&[0.0], 1.0, 3000, 1);
        let s = fit_kde_bins("v", &v, 3).unwrap();
        assert_eq!(s.method, BinMethod::Quantile);
        assert_eq!(s.fallback_from, Some(BinMethod::Kde));
        assert_eq!(s.boundaries.len(), 2);
        let mut counts = [0usize; 3];
        for &x in &v {
            counts[s.apply_index(x)] += 1;
        }
        assert_eq!(counts, [1000, 1000, 1000]);
    }

    #[test]
    fn more_minima_than_needed_keeps_deepest() {
        // four modes, three valleys; the middle valley is the shallowest
        let mut v = mixture(&[-9.0, -3.0], 0.5, 2000, 5);
        v.extend(mixture(&[-1.5, 6.0], 0.5, 2000, 6));
        let s = fit_kde_bins("v", &v, 3).unwrap();
        assert_eq!(s.boundaries.len(), 2);
        assert!((s.boundaries[0] + 6.0).abs() < 0.6, "{:?}", s.boundaries);
        assert!((s.boundaries[1] - 2.25).abs() < 0.8, "{:?}", s.boundaries);
    }

    #[test]
    fn plateau_counts_once() {
        let g = KdeGrid {
            bandwidth: 1.0,
            x: (0..7).map(|i| i as f64).collect(),
            density: vec![3.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0],
        };
        assert_eq!(g.local_minima(), vec![(3.0, 0.0)]);
    }

    #[test]
    fn too_few() {
        assert_eq!(
            fit_kde_bins("v", &[1.0; 9], 3).unwrap_err().code(),
            "E_TOO_FEW"
        );
        let s = fit_kde_bins("v", &[1.0; 20], 3).unwrap();
        assert_eq!(s.method, BinMethod::Quantile);
        assert_eq!(s.bins(), 1);
    }
}
