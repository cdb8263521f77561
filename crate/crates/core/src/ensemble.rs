//! Disorder ensembles and parameter sweeps.
//!
//! Every realization is an independent work unit keyed by its index. Workers
//! return per-realization records which are reduced in index order with
//! compensated sums, so results do not depend on the number of workers.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{eigensystem, Propagator, TimeGrid};
use crate::model::{build_coupling_matrix, dicke_initial_state, sample_disorder, SystemConfig, Zone};
use crate::observables::{
    cumulative_emission, excess_profile, half_chain_entropy, imbalance, participation_ratio_from_excess, photon_flux,
    zone_population, Direction, ObservableKind, ObservableSeries,
};
use crate::spectral::{
    aggregate_statistics, filter_levels, weight_constrained_filter, GapStatistics, LevelSelection, RatioSample,
    SpectralSample, DEFAULT_WEIGHT_THRESHOLD,
};
use crate::stats::{compensated_sum, jackknife_stderr, mean_and_stderr, CompensatedSum};

/// Default realization count for time-series observables.
pub const DEFAULT_REALIZATIONS: usize = 200;
/// Default realization count for level statistics.
pub const DEFAULT_SPECTRAL_REALIZATIONS: usize = 500;
/// Default readout time for sweep summaries, in units of `1/γ`.
pub const DEFAULT_READOUT_TIME: f64 = 4000.0;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of realization `index`. The map is injective in `index` for a fixed
/// master seed: an odd-stride counter followed by a bijective mixer.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `job` for every index on a pool of `workers` threads (`0` picks the
/// machine default) and returns the results in index order. The first error
/// by index wins.
pub fn run_indexed<T, F>(count: usize, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| (0..count).into_par_iter().map(&job).collect());
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub base_config: SystemConfig,
    pub initial_zone: Zone,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub observables: BTreeSet<ObservableKind>,
    pub grid: TimeGrid,
}

impl EnsembleSpec {
    pub fn new(base_config: SystemConfig, initial_zone: Zone, n_realizations: usize, master_seed: u64) -> Self {
        Self {
            base_config,
            initial_zone,
            n_realizations,
            master_seed,
            observables: ObservableKind::ALL.into_iter().collect(),
            grid: TimeGrid::default_log(),
        }
    }

    pub fn with_observables<I: IntoIterator<Item = ObservableKind>>(mut self, kinds: I) -> Self {
        self.observables = kinds.into_iter().collect();
        self
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base_config.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::InvalidConfig("n_realizations must be positive".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if self.initial_zone.sites(&self.base_config)?.is_empty() {
            return Err(Error::EmptyZone);
        }
        Ok(())
    }

    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }
}

/// Ensemble-averaged series plus the final-time population profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub series: BTreeMap<ObservableKind, ObservableSeries>,
    /// Mean `|a_μ|²` per site at the last grid point.
    pub mean_final_populations: Vec<f64>,
    /// Mean surviving norm at the last grid point.
    pub mean_final_norm: f64,
    pub n_realizations: usize,
    /// Realizations propagated by the matrix-exponential fallback.
    pub fallback_realizations: usize,
}

impl EnsembleResult {
    pub fn get(&self, kind: ObservableKind) -> Option<&ObservableSeries> {
        self.series.get(&kind)
    }
}

#[derive(Debug, Default)]
struct TimeRecord {
    imbalance: Vec<Option<f64>>,
    right_population: Vec<f64>,
    entropy: Vec<f64>,
    flux_left: Vec<f64>,
    flux_right: Vec<f64>,
    excess: Vec<Option<Vec<f64>>>,
    emitted_left: Vec<f64>,
    emitted_right: Vec<f64>,
    final_populations: Vec<f64>,
    final_norm: f64,
    spectral: bool,
}

#[derive(Debug, Clone, Copy)]
struct SpectralRequest<'a> {
    zone: Option<&'a [bool]>,
    threshold: f64,
}

#[derive(Debug, Default)]
struct RealizationRecord {
    time: Option<TimeRecord>,
    ratios: Option<RatioSample>,
}

fn select_levels(sample: &SpectralSample, request: SpectralRequest<'_>) -> LevelSelection {
    match request.zone {
        Some(zone) => weight_constrained_filter(sample, zone, request.threshold),
        None => filter_levels(sample),
    }
}

fn simulate(
    config: &SystemConfig,
    zone: &Zone,
    seed: u64,
    time: Option<(&TimeGrid, &BTreeSet<ObservableKind>)>,
    spectral: Option<SpectralRequest<'_>>,
) -> Result<RealizationRecord> {
    let disorder = sample_disorder(config, seed);
    let matrix = build_coupling_matrix(config, &disorder)?;
    let mut record = RealizationRecord::default();

    let Some((grid, kinds)) = time else {
        if let Some(request) = spectral {
            let sample = SpectralSample::from_eigensystem(eigensystem(&matrix)?, seed);
            record.ratios = Some(select_levels(&sample, request).ratio_sample(&sample));
        }
        return Ok(record);
    };

    let propagator = Propagator::new(&matrix)?;
    if let Some(request) = spectral {
        let sample = match propagator.diagonalization() {
            Some(d) => SpectralSample::from_eigensystem(d.eigen.clone(), seed),
            None => SpectralSample::from_eigensystem(eigensystem(&matrix)?, seed),
        };
        record.ratios = Some(select_levels(&sample, request).ratio_sample(&sample));
    }

    let initial = dicke_initial_state(config, zone)?;
    let states = propagator.states(&initial, grid)?;
    let cut = config.half_cut();
    let right_half: Vec<usize> = (cut..config.n_total).collect();
    let wants = |k: ObservableKind| kinds.contains(&k);

    let mut t = TimeRecord { spectral: propagator.is_spectral(), ..Default::default() };
    if wants(ObservableKind::Imbalance) {
        t.imbalance = states.iter().map(|s| imbalance(s, cut).ok()).collect();
    }
    if wants(ObservableKind::RightPopulation) {
        t.right_population = states.iter().map(|s| zone_population(s, &right_half)).collect();
    }
    if wants(ObservableKind::Entropy) {
        t.entropy = states.iter().map(|s| half_chain_entropy(s, cut)).collect::<Result<_>>()?;
    }
    if wants(ObservableKind::Pr) {
        t.excess = states.iter().map(|s| excess_profile(s).ok()).collect();
    }
    if wants(ObservableKind::FluxLeft) {
        t.flux_left = states
            .iter()
            .map(|s| photon_flux(s, config, &disorder, Direction::Left))
            .collect::<Result<_>>()?;
    }
    if wants(ObservableKind::FluxRight) {
        t.flux_right = states
            .iter()
            .map(|s| photon_flux(s, config, &disorder, Direction::Right))
            .collect::<Result<_>>()?;
    }
    if wants(ObservableKind::Dplr) {
        let (left, right) = cumulative_emission(&propagator, config, &disorder, &initial, grid)?;
        t.emitted_left = left;
        t.emitted_right = right;
    }
    let last = states.last().expect("grid is non-empty");
    t.final_populations = last.populations().collect();
    t.final_norm = last.norm_sq();
    record.time = Some(t);
    Ok(record)
}

fn mean_series(kind: ObservableKind, grid: &TimeGrid, n: usize, column: impl Fn(usize) -> Vec<f64>) -> ObservableSeries {
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    let mut counts = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let samples = column(k);
        let estimate = mean_and_stderr(&samples);
        values.push(estimate.map(|e| e.mean));
        stderr.push(estimate.map(|e| e.stderr));
        counts.push(samples.len());
    }
    ObservableSeries { kind, grid: grid.clone(), values, stderr: Some(stderr), counts, ensemble_size: n }
}

fn pr_series(grid: &TimeGrid, records: &[&TimeRecord], n: usize) -> ObservableSeries {
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    let mut counts = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let rows: Vec<&[f64]> = records.iter().filter_map(|r| r.excess[k].as_deref()).collect();
        counts.push(rows.len());
        if rows.is_empty() {
            values.push(None);
            stderr.push(None);
            continue;
        }
        let dim = rows[0].len();
        let mean: Vec<f64> = (0..dim)
            .map(|mu| compensated_sum(rows.iter().map(|r| r[mu])) / rows.len() as f64)
            .collect();
        values.push(Some(participation_ratio_from_excess(&mean).value));
        stderr.push(jackknife_stderr(&rows, |m| Some(participation_ratio_from_excess(m).value)));
    }
    ObservableSeries { kind: ObservableKind::Pr, grid: grid.clone(), values, stderr: Some(stderr), counts, ensemble_size: n }
}

fn emission_ratio_of_means(m: &[f64]) -> Option<f64> {
    (m[1] > 0.0).then(|| m[0] / m[1])
}

fn dplr_series(grid: &TimeGrid, records: &[&TimeRecord], n: usize) -> ObservableSeries {
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let rows: Vec<[f64; 2]> = records.iter().map(|r| [r.emitted_right[k], r.emitted_left[k]]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
        let right = compensated_sum(rows.iter().map(|r| r[0])) / n as f64;
        let left = compensated_sum(rows.iter().map(|r| r[1])) / n as f64;
        let value = emission_ratio_of_means(&[right, left]);
        values.push(value);
        stderr.push(value.and_then(|_| jackknife_stderr(&refs, emission_ratio_of_means)));
    }
    ObservableSeries {
        kind: ObservableKind::Dplr,
        grid: grid.clone(),
        values,
        stderr: Some(stderr),
        counts: vec![n; grid.len()],
        ensemble_size: n,
    }
}

fn reduce_time(grid: &TimeGrid, kinds: &BTreeSet<ObservableKind>, records: &[&TimeRecord]) -> EnsembleResult {
    let n = records.len();
    let mut series = BTreeMap::new();
    for &kind in kinds {
        let s = match kind {
            ObservableKind::Imbalance => mean_series(kind, grid, n, |k| records.iter().filter_map(|r| r.imbalance[k]).collect()),
            ObservableKind::RightPopulation => {
                mean_series(kind, grid, n, |k| records.iter().map(|r| r.right_population[k]).collect())
            }
            ObservableKind::Entropy => mean_series(kind, grid, n, |k| records.iter().map(|r| r.entropy[k]).collect()),
            ObservableKind::FluxLeft => mean_series(kind, grid, n, |k| records.iter().map(|r| r.flux_left[k]).collect()),
            ObservableKind::FluxRight => mean_series(kind, grid, n, |k| records.iter().map(|r| r.flux_right[k]).collect()),
            ObservableKind::Pr => pr_series(grid, records, n),
            ObservableKind::Dplr => dplr_series(grid, records, n),
        };
        series.insert(kind, s);
    }
    let dim = records.first().map_or(0, |r| r.final_populations.len());
    let mean_final_populations = (0..dim)
        .map(|mu| compensated_sum(records.iter().map(|r| r.final_populations[mu])) / n as f64)
        .collect();
    let mut norm = CompensatedSum::default();
    for r in records {
        norm.add(r.final_norm);
    }
    EnsembleResult {
        series,
        mean_final_populations,
        mean_final_norm: norm.value() / n as f64,
        n_realizations: n,
        fallback_realizations: records.iter().filter(|r| !r.spectral).count(),
    }
}

/// Mean and standard error of every requested observable over the ensemble.
///
/// Imbalance, right-half population, entropy and fluxes are means of
/// per-realization values. The participation ratio and the emission ratio
/// are formed from ensemble-mean excess profiles and ensemble-mean emitted
/// photon numbers, with jackknife errors.
pub fn run_ensemble(spec: &EnsembleSpec, workers: usize) -> Result<EnsembleResult> {
    spec.validate()?;
    let records = run_indexed(spec.n_realizations, workers, |i| {
        simulate(&spec.base_config, &spec.initial_zone, spec.seed(i), Some((&spec.grid, &spec.observables)), None)
    })?;
    let time: Vec<&TimeRecord> = records.iter().filter_map(|r| r.time.as_ref()).collect();
    Ok(reduce_time(&spec.grid, &spec.observables, &time))
}

/// Level statistics over disorder realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub base_config: SystemConfig,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Zone for the eigenvector-weight constraint; `None` disables it.
    pub weight_zone: Option<Zone>,
    pub weight_threshold: f64,
}

impl SpectrumSpec {
    pub fn new(base_config: SystemConfig, n_realizations: usize, master_seed: u64) -> Self {
        Self { base_config, n_realizations, master_seed, weight_zone: None, weight_threshold: DEFAULT_WEIGHT_THRESHOLD }
    }
}

/// Spectrum of one realization without its eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub seed: u64,
    pub eigenvalues: Vec<num_complex::Complex64>,
    /// Eigenvector weight in the constraint zone, when one is set.
    pub zone_weights: Option<Vec<f64>>,
    pub retained: Vec<bool>,
    pub ratios: RatioSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub records: Vec<SpectrumRecord>,
    pub statistics: Result<GapStatistics>,
}

pub fn run_spectrum(spec: &SpectrumSpec, workers: usize) -> Result<SpectrumResult> {
    spec.base_config.validate()?;
    if spec.n_realizations == 0 {
        return Err(Error::InvalidConfig("n_realizations must be positive".into()));
    }
    let mask = spec.weight_zone.as_ref().map(|z| z.mask(&spec.base_config)).transpose()?;
    let request = SpectralRequest { zone: mask.as_deref(), threshold: spec.weight_threshold };
    let records = run_indexed(spec.n_realizations, workers, |i| {
        let seed = derive_seed(spec.master_seed, i as u64);
        let disorder = sample_disorder(&spec.base_config, seed);
        let matrix = build_coupling_matrix(&spec.base_config, &disorder)?;
        let sample = SpectralSample::from_eigensystem(eigensystem(&matrix)?, seed);
        let selection = select_levels(&sample, request);
        let zone_weights = mask.as_ref().map(|m| (0..sample.len()).map(|n| sample.zone_weight(n, m)).collect());
        Ok(SpectrumRecord {
            seed,
            retained: (0..sample.len()).map(|n| selection.contains(n)).collect(),
            ratios: selection.ratio_sample(&sample),
            eigenvalues: sample.eigenvalues,
            zone_weights,
        })
    })?;
    let samples: Vec<RatioSample> = records.iter().map(|r| r.ratios.clone()).collect();
    Ok(SpectrumResult { statistics: aggregate_statistics(&samples), records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    DisorderStrength,
    NTotal,
    NClean,
    NDisordered,
    Xi,
    Directionality,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        Self::DisorderStrength,
        Self::NTotal,
        Self::NClean,
        Self::NDisordered,
        Self::Xi,
        Self::Directionality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DisorderStrength => "disorder_strength",
            Self::NTotal => "n_total",
            Self::NClean => "n_clean",
            Self::NDisordered => "n_disordered",
            Self::Xi => "xi",
            Self::Directionality => "directionality",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn apply(self, config: &mut SystemConfig, value: f64) -> Result<()> {
        let count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value < u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{} must be a non-negative integer, got {value}", self.name())))
            }
        };
        match self {
            Self::DisorderStrength => config.disorder_strength = value,
            Self::NTotal => config.n_total = count()?,
            Self::NClean => config.n_clean = count()?,
            Self::NDisordered => config.n_disordered = count()?,
            Self::Xi => config.xi = value,
            Self::Directionality => config.directionality = value,
        }
        Ok(())
    }

    pub fn read(self, config: &SystemConfig) -> f64 {
        match self {
            Self::DisorderStrength => config.disorder_strength,
            Self::NTotal => config.n_total as f64,
            Self::NClean => config.n_clean as f64,
            Self::NDisordered => config.n_disordered as f64,
            Self::Xi => config.xi,
            Self::Directionality => config.directionality,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Zone sizes derived from the swept ones, applied after the axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// `n_clean = n_total - n_disordered`
    CleanFromTotal,
    /// `n_disordered = n_total - n_clean`
    DisorderedFromTotal,
    /// `n_total = n_clean + n_disordered`
    TotalFromZones,
    /// `n_clean = n_total / 2`, `n_disordered = n_total - n_clean`
    EqualHalves,
}

impl Link {
    pub fn apply(self, config: &mut SystemConfig) -> Result<()> {
        let short = |a: usize, b: usize| {
            Error::InvalidConfig(format!("linked zone size would be negative ({a} - {b})"))
        };
        match self {
            Self::CleanFromTotal => {
                config.n_clean =
                    config.n_total.checked_sub(config.n_disordered).ok_or(short(config.n_total, config.n_disordered))?
            }
            Self::DisorderedFromTotal => {
                config.n_disordered =
                    config.n_total.checked_sub(config.n_clean).ok_or(short(config.n_total, config.n_clean))?
            }
            Self::TotalFromZones => config.n_total = config.n_clean + config.n_disordered,
            Self::EqualHalves => {
                config.n_clean = config.n_total / 2;
                config.n_disordered = config.n_total - config.n_clean;
            }
        }
        Ok(())
    }
}

/// Scalar summaries available per sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summary {
    GapRatio,
    Pr,
    Dplr,
    Imbalance,
}

impl Summary {
    pub const ALL: [Summary; 4] = [Self::GapRatio, Self::Pr, Self::Dplr, Self::Imbalance];

    pub fn name(self) -> &'static str {
        match self {
            Self::GapRatio => "gap_ratio",
            Self::Pr => "pr",
            Self::Dplr => "dplr",
            Self::Imbalance => "imbalance",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    fn observable(self) -> Option<ObservableKind> {
        match self {
            Self::GapRatio => None,
            Self::Pr => Some(ObservableKind::Pr),
            Self::Dplr => Some(ObservableKind::Dplr),
            Self::Imbalance => Some(ObservableKind::Imbalance),
        }
    }
}

/// Cartesian product of axes over a base configuration. Every point reuses
/// the same realization seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_config: SystemConfig,
    pub initial_zone: Zone,
    pub axes: Vec<SweepAxis>,
    pub links: Vec<Link>,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub summaries: BTreeSet<Summary>,
    pub readout_time: f64,
    /// Zone for the eigenvector-weight constraint of the gap statistics.
    pub weight_zone: Option<Zone>,
    pub weight_threshold: f64,
}

impl SweepSpec {
    pub fn new(base_config: SystemConfig, initial_zone: Zone, axes: Vec<SweepAxis>) -> Self {
        Self {
            base_config,
            initial_zone,
            axes,
            links: Vec::new(),
            n_realizations: DEFAULT_REALIZATIONS,
            master_seed: 0,
            summaries: [Summary::Pr, Summary::Dplr, Summary::Imbalance].into_iter().collect(),
            readout_time: DEFAULT_READOUT_TIME,
            weight_zone: None,
            weight_threshold: DEFAULT_WEIGHT_THRESHOLD,
        }
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis values of point `index`; the first axis varies slowest.
    pub fn point(&self, index: usize) -> Vec<(SweepParameter, f64)> {
        let mut rest = index;
        let mut out = vec![(SweepParameter::Xi, 0.0); self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = (axis.parameter, axis.values[rest % axis.values.len()]);
            rest /= axis.values.len();
        }
        out
    }

    pub fn config_at(&self, index: usize) -> Result<SystemConfig> {
        let mut config = self.base_config.clone();
        for (p, v) in self.point(index) {
            p.apply(&mut config, v)?;
        }
        for link in &self.links {
            link.apply(&mut config)?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: Option<f64>,
}

impl Estimate {
    fn from_series(series: Option<&ObservableSeries>) -> Option<Self> {
        let s = series?;
        Some(Self { value: s.final_value()?, stderr: s.final_stderr() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub n_realizations: usize,
    pub fallback_realizations: usize,
    pub gap: Option<GapStatistics>,
    pub pr: Option<Estimate>,
    pub dplr: Option<Estimate>,
    pub imbalance: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub parameters: Vec<(SweepParameter, f64)>,
    pub config: Option<SystemConfig>,
    pub summary: Option<PointSummary>,
    /// Failure at this point. Summaries that could still be computed are kept.
    pub error: Option<Error>,
}

impl SweepRow {
    pub fn pr_over_n(&self) -> Option<f64> {
        Some(self.summary.as_ref()?.pr?.value / self.config.as_ref()?.n_total as f64)
    }

    pub fn pr_over_nd(&self) -> Option<f64> {
        let nd = self.config.as_ref()?.n_disordered;
        (nd > 0).then(|| Some(self.summary.as_ref()?.pr?.value / nd as f64)).flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub readout_time: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn run_point(spec: &SweepSpec, config: &SystemConfig, workers: usize) -> Result<(PointSummary, Option<Error>)> {
    let kinds: BTreeSet<ObservableKind> = spec.summaries.iter().filter_map(|s| s.observable()).collect();
    let grid = TimeGrid::from_points(vec![0.0, spec.readout_time])?;
    let mask = spec.weight_zone.as_ref().map(|z| z.mask(config)).transpose()?;
    let spectral = spec
        .summaries
        .contains(&Summary::GapRatio)
        .then_some(SpectralRequest { zone: mask.as_deref(), threshold: spec.weight_threshold });
    let time = (!kinds.is_empty()).then_some((&grid, &kinds));
    if time.is_some() {
        dicke_initial_state(config, &spec.initial_zone)?;
    }
    if spec.n_realizations == 0 {
        return Err(Error::InvalidConfig("n_realizations must be positive".into()));
    }
    let records = run_indexed(spec.n_realizations, workers, |i| {
        simulate(config, &spec.initial_zone, derive_seed(spec.master_seed, i as u64), time, spectral)
    })?;

    let mut summary = PointSummary {
        n_realizations: records.len(),
        fallback_realizations: 0,
        gap: None,
        pr: None,
        dplr: None,
        imbalance: None,
    };
    let mut error = None;
    if spectral.is_some() {
        let samples: Vec<RatioSample> = records.iter().filter_map(|r| r.ratios.clone()).collect();
        match aggregate_statistics(&samples) {
            Ok(g) => summary.gap = Some(g),
            Err(e) => error = Some(e),
        }
    }
    if !kinds.is_empty() {
        let time: Vec<&TimeRecord> = records.iter().filter_map(|r| r.time.as_ref()).collect();
        let result = reduce_time(&grid, &kinds, &time);
        summary.fallback_realizations = result.fallback_realizations;
        summary.pr = Estimate::from_series(result.get(ObservableKind::Pr));
        summary.dplr = Estimate::from_series(result.get(ObservableKind::Dplr));
        summary.imbalance = Estimate::from_series(result.get(ObservableKind::Imbalance));
    }
    Ok((summary, error))
}

/// Evaluates every sweep point in order. Failures are recorded in the row
/// and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepTable> {
    if !(spec.readout_time.is_finite() && spec.readout_time > 0.0) {
        return Err(Error::InvalidGrid(format!("readout time must be positive, got {}", spec.readout_time)));
    }
    if spec.axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::InvalidConfig("sweep axis without values".into()));
    }
    let mut rows = Vec::with_capacity(spec.point_count());
    for index in 0..spec.point_count() {
        let parameters = spec.point(index);
        let mut row = SweepRow { index, parameters, config: None, summary: None, error: None };
        match spec.config_at(index) {
            Err(e) => row.error = Some(e),
            Ok(config) => {
                match run_point(spec, &config, workers) {
                    Ok((summary, error)) => {
                        row.summary = Some(summary);
                        row.error = error;
                    }
                    Err(e) => row.error = Some(e),
                }
                row.config = Some(config);
            }
        }
        rows.push(row);
    }
    Ok(SweepTable { readout_time: spec.readout_time, rows })
}
