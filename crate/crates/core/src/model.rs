//! System parameters, onsite phase disorder and the single-excitation generator.
//!
//! Sites are indexed from 0. The clean zone occupies `0..n_clean` and the
//! disordered zone `n_clean..n_total`, so the interface sits between sites
//! `n_clean - 1` and `n_clean`.
//!
//! The generator `M` acts as `da/dt = M a` with
//!
//! ```text
//! M[μ][μ] = -γ/2
//! M[μ][ν] = -γ_R exp(i[ξ(μ-ν) + W_μ - W_ν])   for ν < μ
//! M[μ][ν] = -γ_L exp(i[ξ(ν-μ) + W_ν - W_μ])   for ν > μ
//! ```
//!
//! Its Hermitian part is `-(γ_R u u† + γ_L w w†)/2` with `u_μ = exp(iφ_μ)`,
//! `w_μ = exp(-iφ_μ)` and `φ_μ = ξμ + W_μ`, which makes the dynamics
//! dissipative for every parameter choice.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and zone-layout parameters of one emitter chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_total: usize,
    pub n_clean: usize,
    pub n_disordered: usize,
    /// Interatomic phase `k_s d`, radians.
    pub xi: f64,
    /// `(γ_R - γ_L) / (γ_R + γ_L)`.
    pub directionality: f64,
    /// `γ_R + γ_L`; the unit of inverse time.
    pub gamma_total: f64,
    /// Half-width of the phase-disorder distribution in units of π.
    pub disorder_strength: f64,
}

impl SystemConfig {
    /// Chain with equal clean and disordered halves and `γ = 1`.
    pub fn half_and_half(n_total: usize, xi: f64, directionality: f64, disorder_strength: f64) -> Self {
        let n_clean = n_total / 2;
        Self {
            n_total,
            n_clean,
            n_disordered: n_total - n_clean,
            xi,
            directionality,
            gamma_total: 1.0,
            disorder_strength,
        }
    }

    /// A chain in which every site is disordered.
    pub fn fully_disordered(n_total: usize, xi: f64, directionality: f64, disorder_strength: f64) -> Self {
        Self {
            n_total,
            n_clean: 0,
            n_disordered: n_total,
            xi,
            directionality,
            gamma_total: 1.0,
            disorder_strength,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::InvalidConfig("n_total must be positive".into()));
        }
        if self.n_clean + self.n_disordered != self.n_total {
            return Err(Error::InvalidConfig(format!(
                "n_clean + n_disordered = {} but n_total = {}",
                self.n_clean + self.n_disordered,
                self.n_total
            )));
        }
        if !self.xi.is_finite() {
            return Err(Error::InvalidConfig("xi must be finite".into()));
        }
        if !(self.gamma_total.is_finite() && self.gamma_total > 0.0) {
            return Err(Error::InvalidConfig("gamma_total must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&self.directionality) {
            return Err(Error::InvalidConfig("directionality must lie in [-1, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.disorder_strength) {
            return Err(Error::InvalidConfig("disorder_strength must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn gamma_right(&self) -> f64 {
        0.5 * self.gamma_total * (1.0 + self.directionality)
    }

    pub fn gamma_left(&self) -> f64 {
        0.5 * self.gamma_total * (1.0 - self.directionality)
    }

    pub fn clean_sites(&self) -> std::ops::Range<usize> {
        0..self.n_clean
    }

    pub fn disordered_sites(&self) -> std::ops::Range<usize> {
        self.n_clean..self.n_total
    }

    /// Default half-chain cut: sites `0..cut` form the left half.
    pub fn half_cut(&self) -> usize {
        self.n_total / 2
    }
}

/// One sampled vector of onsite phases `W_μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub phases: Vec<f64>,
    pub seed: u64,
}

impl DisorderRealization {
    /// The disorder-free realization.
    pub fn clean(n_total: usize) -> Self {
        Self { phases: vec![0.0; n_total], seed: 0 }
    }

    /// Site order reversed and phases negated: the disorder seen by the
    /// mirror-image chain.
    pub fn mirrored(&self) -> Self {
        Self {
            phases: self.phases.iter().rev().map(|w| -w).collect(),
            seed: self.seed,
        }
    }
}

/// Samples `W_μ ~ Uniform[-π w̄, π w̄]` on the disordered zone and zero
/// elsewhere.
pub fn sample_disorder(config: &SystemConfig, seed: u64) -> DisorderRealization {
    let mut phases = vec![0.0; config.n_total];
    let half_width = PI * config.disorder_strength;
    if half_width > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut phases[config.disordered_sites()] {
            *w = rng.random_range(-half_width..=half_width);
        }
    }
    DisorderRealization { phases, seed }
}

/// Dense `N × N` generator of the amplitude dynamics, in units of `γ`.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    entries: Mat<Complex64>,
}

impl CouplingMatrix {
    pub fn from_entries(entries: Mat<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `M a`.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for col in 0..n {
            let a = amplitudes[col];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (row, o) in out.iter_mut().enumerate() {
                *o += self.entries[(row, col)] * a;
            }
        }
        out
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Mat<Complex64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| 0.5 * (self.entries[(i, j)] + self.entries[(j, i)].conj()))
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.entries[(i, j)].norm());
            }
        }
        m
    }

    /// Entries with the site order reversed on both axes.
    pub fn reversed(&self) -> Self {
        let n = self.dim();
        Self { entries: Mat::from_fn(n, n, |i, j| self.entries[(n - 1 - i, n - 1 - j)]) }
    }
}

pub fn build_coupling_matrix(config: &SystemConfig, disorder: &DisorderRealization) -> Result<CouplingMatrix> {
    let n = config.n_total;
    if disorder.phases.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: disorder.phases.len() });
    }
    let gamma_r = config.gamma_right();
    let gamma_l = config.gamma_left();
    let w = &disorder.phases;
    let entries = Mat::from_fn(n, n, |mu, nu| {
        if mu == nu {
            Complex64::new(-0.5 * config.gamma_total, 0.0)
        } else if nu < mu {
            let phase = config.xi * (mu - nu) as f64 + (w[mu] - w[nu]);
            -gamma_r * Complex64::cis(phase)
        } else {
            let phase = config.xi * (nu - mu) as f64 + (w[nu] - w[mu]);
            -gamma_l * Complex64::cis(phase)
        }
    });
    Ok(CouplingMatrix { entries })
}

/// Complex amplitudes `a_μ` of the single-excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    amplitudes: Vec<Complex64>,
    norm_sq: f64,
}

impl AmplitudeState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        let norm_sq = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Self { amplitudes, norm_sq }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn populations(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|a| a.norm_sqr())
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.amplitudes.iter().rev().copied().collect())
    }
}

/// Site set on which an initial Dicke state is prepared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Disordered,
    Clean,
    RightHalf,
    LeftHalf,
    Sites(Vec<usize>),
}

impl Zone {
    /// Sorted, deduplicated site indices of the zone.
    pub fn sites(&self, config: &SystemConfig) -> Result<Vec<usize>> {
        let n = config.n_total;
        let sites: Vec<usize> = match self {
            Zone::Disordered => config.disordered_sites().collect(),
            Zone::Clean => config.clean_sites().collect(),
            Zone::RightHalf => (config.half_cut()..n).collect(),
            Zone::LeftHalf => (0..config.half_cut()).collect(),
            Zone::Sites(s) => {
                let mut s = s.clone();
                s.sort_unstable();
                s.dedup();
                if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                    return Err(Error::InvalidConfig(format!("site {bad} outside chain of {n}")));
                }
                s
            }
        };
        Ok(sites)
    }

    /// Membership mask over the chain.
    pub fn mask(&self, config: &SystemConfig) -> Result<Vec<bool>> {
        let mut mask = vec![false; config.n_total];
        for i in self.sites(config)? {
            mask[i] = true;
        }
        Ok(mask)
    }
}

/// Symmetric Dicke state: `1/√|zone|` on the zone, zero elsewhere.
pub fn dicke_initial_state(config: &SystemConfig, zone: &Zone) -> Result<AmplitudeState> {
    let sites = zone.sites(config)?;
    if sites.is_empty() {
        return Err(Error::EmptyZone);
    }
    let amp = Complex64::new(1.0 / (sites.len() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); config.n_total];
    for i in sites {
        amplitudes[i] = amp;
    }
    Ok(AmplitudeState::new(amplitudes))
}
