//! Level statistics of the complex spectrum.
//!
//! Levels are ordered by their energy shift `E = Im λ`. A neighbouring pair is
//! usable when its mean resonance width is less than half of its spacing,
//! `(-Re[λ_n + λ_{n+1}]/2) / Im[λ_{n+1} - λ_n] < 1/2`. Maximal runs of usable
//! pairs form sectors, and gap ratios are only formed inside a sector so that
//! no ratio straddles an overlapping resonance.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::evolve::Eigensystem;

/// Resonance-width to spacing ratio below which a pair of levels is kept.
pub const RESONANCE_RATIO_LIMIT: f64 = 0.5;
/// Default minimum eigenvector weight in the selected zone.
pub const DEFAULT_WEIGHT_THRESHOLD: f64 = 0.25;

/// Sorted spectrum of one disorder realization.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors as unit-norm columns, in the same order.
    pub eigenvectors: Mat<Complex64>,
    pub disorder_seed: u64,
}

impl SpectralSample {
    pub fn from_eigensystem(eigen: Eigensystem, disorder_seed: u64) -> Self {
        Self { eigenvalues: eigen.eigenvalues, eigenvectors: eigen.eigenvectors, disorder_seed }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Σ_{μ ∈ zone} |v_n[μ]|²`.
    pub fn zone_weight(&self, level: usize, zone: &[bool]) -> f64 {
        zone.iter()
            .enumerate()
            .filter(|(_, &inside)| inside)
            .map(|(mu, _)| self.eigenvectors[(mu, level)].norm_sqr())
            .sum()
    }

    pub fn energies(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.eigenvalues[i].im).collect()
    }
}

/// Retained levels grouped into sectors; each sector is an ascending list of
/// level indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelSelection {
    pub sectors: Vec<Vec<usize>>,
    pub total_levels: usize,
}

impl LevelSelection {
    pub fn retained(&self) -> usize {
        self.sectors.iter().map(Vec::len).sum()
    }

    pub fn retained_fraction(&self) -> f64 {
        if self.total_levels == 0 { 0.0 } else { self.retained() as f64 / self.total_levels as f64 }
    }

    pub fn contains(&self, level: usize) -> bool {
        self.sectors.iter().any(|s| s.binary_search(&level).is_ok())
    }

    /// Gap ratios pooled over every sector with at least three levels.
    pub fn pooled_ratios(&self, sample: &SpectralSample) -> Vec<f64> {
        self.sectors
            .iter()
            .filter(|s| s.len() >= 3)
            .flat_map(|s| gap_ratios(&sample.energies(s)).unwrap_or_default())
            .collect()
    }

    pub fn ratio_sample(&self, sample: &SpectralSample) -> RatioSample {
        RatioSample {
            ratios: self.pooled_ratios(sample),
            retained_levels: self.retained(),
            total_levels: self.total_levels,
        }
    }
}

/// Whether a sorted neighbouring pair passes the resonance-width criterion.
pub fn pair_is_resolved(lower: Complex64, upper: Complex64) -> bool {
    let spacing = upper.im - lower.im;
    if !(spacing > 0.0) {
        return false;
    }
    let width = -(lower.re + upper.re) / 2.0;
    width / spacing < RESONANCE_RATIO_LIMIT
}

/// Splits the sorted spectrum into maximal runs of resolved neighbouring
/// pairs. Every retained level belongs to at least one resolved pair.
pub fn filter_levels(sample: &SpectralSample) -> LevelSelection {
    let lambda = &sample.eigenvalues;
    let mut sectors = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for n in 0..lambda.len().saturating_sub(1) {
        if pair_is_resolved(lambda[n], lambda[n + 1]) {
            if current.is_empty() {
                current.push(n);
            }
            current.push(n + 1);
        } else if !current.is_empty() {
            sectors.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sectors.push(current);
    }
    LevelSelection { sectors, total_levels: lambda.len() }
}

/// [`filter_levels`] intersected with levels whose eigenvector weight in the
/// zone strictly exceeds `threshold`. Sectors keep their boundaries; the
/// surviving levels of one sector stay together.
pub fn weight_constrained_filter(sample: &SpectralSample, zone: &[bool], threshold: f64) -> LevelSelection {
    let base = filter_levels(sample);
    let sectors = base
        .sectors
        .into_iter()
        .map(|s| s.into_iter().filter(|&n| sample.zone_weight(n, zone) > threshold).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    LevelSelection { sectors, total_levels: base.total_levels }
}

/// `r_j = min(δ_j, δ_{j-1}) / max(δ_j, δ_{j-1})` for every interior level.
pub fn gap_ratios(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 3 {
        return Err(Error::TooFewLevels(levels.len()));
    }
    if levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonIncreasingLevels);
    }
    Ok(levels
        .windows(3)
        .map(|w| {
            let (lo, hi) = (w[1] - w[0], w[2] - w[1]);
            lo.min(hi) / lo.max(hi)
        })
        .collect())
}

/// Gap ratios of one realization plus its level bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatioSample {
    pub ratios: Vec<f64>,
    pub retained_levels: usize,
    pub total_levels: usize,
}

impl From<Vec<f64>> for RatioSample {
    fn from(ratios: Vec<f64>) -> Self {
        let levels = ratios.len() + 2;
        Self { ratios, retained_levels: levels, total_levels: levels }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStatistics {
    /// Ensemble mean of the per-realization mean gap ratio.
    pub mean_gap_ratio: f64,
    pub mean_gap_ratio_stderr: f64,
    /// Ensemble mean of the per-realization sample variance of the gap ratios.
    pub intrasample_variance: f64,
    pub retained_fraction: f64,
    /// Realizations that contributed at least one gap ratio.
    pub n_realizations: usize,
}

pub fn aggregate_statistics(samples: &[RatioSample]) -> Result<GapStatistics> {
    let mut means = Vec::new();
    let mut variances = Vec::new();
    let (mut retained, mut total) = (0usize, 0usize);
    for s in samples {
        retained += s.retained_levels;
        total += s.total_levels;
        let k = s.ratios.len();
        if k == 0 {
            continue;
        }
        let mean = s.ratios.iter().sum::<f64>() / k as f64;
        let var = if k > 1 {
            s.ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1) as f64
        } else {
            0.0
        };
        means.push(mean);
        variances.push(var);
    }
    if means.is_empty() {
        return Err(Error::NoValidRealizations);
    }
    let m = means.len() as f64;
    let mean_gap_ratio = means.iter().sum::<f64>() / m;
    let mean_gap_ratio_stderr = if means.len() > 1 {
        let var = means.iter().map(|x| (x - mean_gap_ratio).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(GapStatistics {
        mean_gap_ratio,
        mean_gap_ratio_stderr,
        intrasample_variance: variances.iter().sum::<f64>() / m,
        retained_fraction: if total == 0 { 0.0 } else { retained as f64 / total as f64 },
        n_realizations: means.len(),
    })
}

/// Reference samplers for calibrating the gap-ratio pipeline.
pub mod calibration {
    use super::*;

    /// `2 ln 2 - 1`: mean gap ratio of uncorrelated levels.
    pub const POISSON_MEAN_RATIO: f64 = 0.386_294_361_119_890_6;
    /// `4 - 2√3`: mean of the 3×3 orthogonal-ensemble surmise.
    pub const GOE_SURMISE_MEAN_RATIO: f64 = 0.535_898_384_862_245_4;

    /// `count` sorted i.i.d. uniform levels on `[0, 1)`.
    pub fn poisson_levels<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
        let mut levels: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
        levels.sort_by(f64::total_cmp);
        levels
    }

    /// Density of `r̃ = min(r, 1/r)` under the orthogonal surmise,
    /// `(27/4) (r + r²) / (1 + r + r²)^{5/2}` on `[0, 1]`.
    pub fn goe_surmise_density(r: f64) -> f64 {
        6.75 * (r + r * r) / (1.0 + r + r * r).powf(2.5)
    }

    /// One gap ratio drawn from the orthogonal surmise by rejection sampling.
    pub fn goe_surmise_ratio<R: Rng>(rng: &mut R) -> f64 {
        // the density peaks near 0.45 at about 1.255
        const ENVELOPE: f64 = 1.3;
        loop {
            let r = rng.random::<f64>();
            if rng.random::<f64>() * ENVELOPE <= goe_surmise_density(r) {
                return r;
            }
        }
    }
}
