//! Per-state and per-trajectory diagnostics.
//!
//! Directional output fluxes use the same site phases `φ_μ = ξμ + W_μ` as the
//! generator, so that `flux_L + flux_R = -d‖a‖²/dt` holds exactly:
//!
//! ```text
//! flux_R = γ_R |Σ_μ e^{-iφ_μ} a_μ|²
//! flux_L = γ_L |Σ_μ e^{+iφ_μ} a_μ|²
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{AmplitudeTrajectory, Diagonalization, Propagator, TimeGrid};
use crate::model::{AmplitudeState, DisorderRealization, SystemConfig};

/// Norms below this make normalized observables undefined.
pub const VANISHED_NORM: f64 = 1e-14;
/// Excess weights at or below this count as zero in the participation ratio.
pub const DEGENERATE_EXCESS: f64 = 1e-14;
/// Slack allowed on the left-half weight before a state counts as corrupt.
pub const WEIGHT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Imbalance,
    RightPopulation,
    Entropy,
    Pr,
    FluxLeft,
    FluxRight,
    Dplr,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 7] = [
        Self::Imbalance,
        Self::RightPopulation,
        Self::Entropy,
        Self::Pr,
        Self::FluxLeft,
        Self::FluxRight,
        Self::Dplr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Imbalance => "imbalance",
            Self::RightPopulation => "right_population",
            Self::Entropy => "entropy",
            Self::Pr => "pr",
            Self::FluxLeft => "flux_left",
            Self::FluxRight => "flux_right",
            Self::Dplr => "dplr",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// One observable on a time grid. Absent values are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub kind: ObservableKind,
    pub grid: TimeGrid,
    pub values: Vec<Option<f64>>,
    pub stderr: Option<Vec<Option<f64>>>,
    /// Realizations contributing at each grid point.
    pub counts: Vec<usize>,
    pub ensemble_size: usize,
}

impl ObservableSeries {
    pub fn value_at(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied().flatten()
    }

    pub fn stderr_at(&self, index: usize) -> Option<f64> {
        self.stderr.as_ref().and_then(|s| s.get(index).copied().flatten())
    }

    pub fn final_value(&self) -> Option<f64> {
        self.values.last().copied().flatten()
    }

    pub fn final_stderr(&self) -> Option<f64> {
        self.stderr_at(self.values.len().saturating_sub(1))
    }
}

fn left_weight(state: &AmplitudeState, cut: usize) -> f64 {
    state.populations().take(cut).sum()
}

/// `(P_right - P_left) / P_total` with the left half being sites `0..cut`.
pub fn imbalance(state: &AmplitudeState, cut: usize) -> Result<f64> {
    let total = state.norm_sq();
    if !(total > VANISHED_NORM) {
        return Err(Error::VanishedNorm(total));
    }
    let left = left_weight(state, cut);
    let right: f64 = state.populations().skip(cut).sum();
    Ok(((right - left) / total).clamp(-1.0, 1.0))
}

pub fn zone_population(state: &AmplitudeState, sites: &[usize]) -> f64 {
    let a = state.amplitudes();
    sites.iter().map(|&i| a[i].norm_sqr()).sum()
}

/// Von Neumann entropy of the left half, sites `0..cut`.
///
/// Tracing the right half out of the single-excitation state plus its decayed
/// vacuum component leaves a reduced density matrix with eigenvalues `x` and
/// `1 - x`, where `x` is the left-half weight.
pub fn half_chain_entropy(state: &AmplitudeState, cut: usize) -> Result<f64> {
    let x = left_weight(state, cut);
    if !(x >= 0.0 && x <= 1.0 + WEIGHT_SLACK) || state.norm_sq() > 1.0 + WEIGHT_SLACK {
        return Err(Error::CorruptState(x));
    }
    Ok(binary_entropy(x.clamp(0.0, 1.0)))
}

/// `-x ln x - (1-x) ln(1-x)` with `0 ln 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Above-uniform excess `ΔP̃_μ = (P̃_μ - 1/N) Θ(P̃_μ - 1/N)` of the normalized
/// site probabilities.
pub fn excess_profile(state: &AmplitudeState) -> Result<Vec<f64>> {
    let total = state.norm_sq();
    if !(total > VANISHED_NORM) {
        return Err(Error::VanishedNorm(total));
    }
    let uniform = 1.0 / state.len() as f64;
    Ok(state.populations().map(|p| (p / total - uniform).max(0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipationRatio {
    pub value: f64,
    /// Set when every excess weight vanishes (exactly uniform occupation).
    pub degenerate: bool,
}

/// `(Σ ΔP̃)² / Σ ΔP̃²` from an excess profile, which may itself be an
/// ensemble average.
pub fn participation_ratio_from_excess(excess: &[f64]) -> ParticipationRatio {
    if excess.iter().all(|&d| d <= DEGENERATE_EXCESS) {
        return ParticipationRatio { value: 0.0, degenerate: true };
    }
    let sum: f64 = excess.iter().sum();
    let sum_sq: f64 = excess.iter().map(|d| d * d).sum();
    ParticipationRatio { value: sum * sum / sum_sq, degenerate: false }
}

pub fn participation_ratio(state: &AmplitudeState) -> Result<ParticipationRatio> {
    Ok(participation_ratio_from_excess(&excess_profile(state)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
}

/// Per-site projection weights `e^{∓iφ_μ}` of the output field in `direction`.
pub fn emission_phases(config: &SystemConfig, disorder: &DisorderRealization, direction: Direction) -> Vec<Complex64> {
    let sign = match direction {
        Direction::Right => -1.0,
        Direction::Left => 1.0,
    };
    disorder
        .phases
        .iter()
        .enumerate()
        .map(|(mu, w)| Complex64::cis(sign * (config.xi * mu as f64 + w)))
        .collect()
}

fn direction_rate(config: &SystemConfig, direction: Direction) -> f64 {
    match direction {
        Direction::Right => config.gamma_right(),
        Direction::Left => config.gamma_left(),
    }
}

fn check_dims(state: &AmplitudeState, config: &SystemConfig, disorder: &DisorderRealization) -> Result<()> {
    if disorder.phases.len() != config.n_total {
        return Err(Error::DimensionMismatch { expected: config.n_total, found: disorder.phases.len() });
    }
    if state.len() != config.n_total {
        return Err(Error::DimensionMismatch { expected: config.n_total, found: state.len() });
    }
    Ok(())
}

/// Output photon flux `⟨a†_out,d a_out,d⟩` for a single-excitation state.
pub fn photon_flux(
    state: &AmplitudeState,
    config: &SystemConfig,
    disorder: &DisorderRealization,
    direction: Direction,
) -> Result<f64> {
    check_dims(state, config, disorder)?;
    let phases = emission_phases(config, disorder, direction);
    Ok(flux_with_phases(state, &phases, direction_rate(config, direction)))
}

fn flux_with_phases(state: &AmplitudeState, phases: &[Complex64], rate: f64) -> f64 {
    let field: Complex64 = phases.iter().zip(state.amplitudes()).map(|(p, a)| p * a).sum();
    rate * field.norm_sqr()
}

/// Both directional fluxes at every point of a trajectory.
pub fn flux_series(
    trajectory: &AmplitudeTrajectory,
    config: &SystemConfig,
    disorder: &DisorderRealization,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let left_phases = emission_phases(config, disorder, Direction::Left);
    let right_phases = emission_phases(config, disorder, Direction::Right);
    let mut left = Vec::with_capacity(trajectory.states.len());
    let mut right = Vec::with_capacity(trajectory.states.len());
    for s in &trajectory.states {
        check_dims(s, config, disorder)?;
        left.push(flux_with_phases(s, &left_phases, config.gamma_left()));
        right.push(flux_with_phases(s, &right_phases, config.gamma_right()));
    }
    Ok((left, right))
}

/// Running trapezoid integral, starting at 0 on the first grid point.
pub fn cumulative_trapezoid(points: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for k in 0..values.len() {
        if k > 0 {
            acc += 0.5 * (points[k] - points[k - 1]) * (values[k] + values[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Ratio of cumulative right to left emission; `None` where the left
/// emission is still zero.
pub fn emission_ratio(right: &[f64], left: &[f64]) -> Vec<Option<f64>> {
    right
        .iter()
        .zip(left)
        .map(|(&r, &l)| if l > 0.0 && l.is_finite() { Some(r / l) } else { None })
        .collect()
}

/// Directional photon loss ratio by cumulative trapezoid on the trajectory
/// grid.
pub fn dplr(
    trajectory: &AmplitudeTrajectory,
    config: &SystemConfig,
    disorder: &DisorderRealization,
) -> Result<ObservableSeries> {
    if trajectory.states.is_empty() {
        return Err(Error::InvalidGrid("trajectory is empty".into()));
    }
    let (left, right) = flux_series(trajectory, config, disorder)?;
    let t = trajectory.grid.points();
    let cum_l = cumulative_trapezoid(t, &left);
    let cum_r = cumulative_trapezoid(t, &right);
    let values = emission_ratio(&cum_r, &cum_l);
    let counts = values.iter().map(|v| v.is_some() as usize).collect();
    Ok(ObservableSeries {
        kind: ObservableKind::Dplr,
        grid: trajectory.grid.clone(),
        values,
        stderr: None,
        counts,
        ensemble_size: 1,
    })
}

/// Exact time integrals of the directional fluxes for a diagonalized
/// generator.
///
/// With `a(t) = Σ_n V_n c_n e^{λ_n t}` the flux is a double sum over mode
/// pairs, and `∫₀ᵀ e^{(λ̄_n + λ_m)t} dt` is available in closed form.
#[derive(Debug, Clone)]
pub struct EmissionIntegrator {
    eigenvalues: Vec<Complex64>,
    /// Mode amplitudes of the left and right output fields, with the rate folded in.
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl EmissionIntegrator {
    pub fn new(
        diag: &Diagonalization,
        config: &SystemConfig,
        disorder: &DisorderRealization,
        initial: &AmplitudeState,
    ) -> Result<Self> {
        check_dims(initial, config, disorder)?;
        let n = config.n_total;
        let coeffs = diag.modal_coefficients(initial.amplitudes());
        let v = diag.eigenvectors();
        let project = |direction: Direction| -> Vec<Complex64> {
            let phases = emission_phases(config, disorder, direction);
            let scale = direction_rate(config, direction).sqrt();
            (0..n)
                .map(|k| {
                    let overlap: Complex64 = (0..n).map(|mu| phases[mu] * v[(mu, k)]).sum();
                    overlap * coeffs[k] * scale
                })
                .collect()
        };
        Ok(Self {
            eigenvalues: diag.eigenvalues().to_vec(),
            left: project(Direction::Left),
            right: project(Direction::Right),
        })
    }

    /// `(∫₀ᵀ flux_L, ∫₀ᵀ flux_R)` at every grid point.
    pub fn cumulative(&self, grid: &TimeGrid) -> (Vec<f64>, Vec<f64>) {
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        for &t in grid.points() {
            let (l, r) = self.integrate_to(t);
            left.push(l);
            right.push(r);
        }
        (left, right)
    }

    pub fn integrate_to(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        let n = self.eigenvalues.len();
        let growth: Vec<Complex64> = self.eigenvalues.iter().map(|l| (l * t).exp()).collect();
        let mut left = 0.0;
        let mut right = 0.0;
        for a in 0..n {
            let la = self.eigenvalues[a].conj();
            let ga = growth[a].conj();
            let (bl, br) = (self.left[a].conj(), self.right[a].conj());
            for b in 0..n {
                let s = la + self.eigenvalues[b];
                let st = s * t;
                let kernel = if st.norm() < 1e-3 {
                    t * (1.0 + st * (0.5 + st * (1.0 / 6.0 + st / 24.0)))
                } else {
                    (ga * growth[b] - 1.0) / s
                };
                left += (bl * self.left[b] * kernel).re;
                right += (br * self.right[b] * kernel).re;
            }
        }
        (left.max(0.0), right.max(0.0))
    }
}

/// Points per decade of the internal grid used to integrate fluxes when the
/// generator could not be diagonalized.
const FALLBACK_POINTS_PER_DECADE: f64 = 250.0;

/// Cumulative left and right emission at every grid point.
///
/// Diagonalized generators are integrated exactly. The matrix-exponential
/// fallback integrates by trapezoid on a refined logarithmic grid that
/// contains every requested point.
pub fn cumulative_emission(
    propagator: &Propagator,
    config: &SystemConfig,
    disorder: &DisorderRealization,
    initial: &AmplitudeState,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match propagator.diagonalization() {
        Some(diag) => Ok(EmissionIntegrator::new(diag, config, disorder, initial)?.cumulative(grid)),
        None => {
            check_dims(initial, config, disorder)?;
            let t_max = grid.last();
            if t_max <= 0.0 {
                return Ok((vec![0.0; grid.len()], vec![0.0; grid.len()]));
            }
            let t_min = (t_max * 1e-7).min(1e-3);
            let decades = (t_max / t_min).log10();
            let count = (decades * FALLBACK_POINTS_PER_DECADE).ceil() as usize + 1;
            let mut points: Vec<f64> = TimeGrid::logarithmic(t_min, t_max, count.max(2), true)?.points().to_vec();
            points.extend_from_slice(grid.points());
            points.sort_by(f64::total_cmp);
            points.dedup();
            let fine = TimeGrid::from_points(points)?;
            let states = propagator.states(initial, &fine)?;
            let lp = emission_phases(config, disorder, Direction::Left);
            let rp = emission_phases(config, disorder, Direction::Right);
            let left: Vec<f64> = states.iter().map(|s| flux_with_phases(s, &lp, config.gamma_left())).collect();
            let right: Vec<f64> = states.iter().map(|s| flux_with_phases(s, &rp, config.gamma_right())).collect();
            let cum_l = cumulative_trapezoid(fine.points(), &left);
            let cum_r = cumulative_trapezoid(fine.points(), &right);
            let pick = |cum: &[f64]| -> Vec<f64> {
                grid.points()
                    .iter()
                    .map(|t| {
                        let k = fine.points().partition_point(|p| p < t);
                        cum[k]
                    })
                    .collect()
            };
            Ok((pick(&cum_l), pick(&cum_r)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{propagate, Propagator};
    use crate::model::{build_coupling_matrix, dicke_initial_state, sample_disorder, Zone};
    use std::f64::consts::{LN_2, PI};

    fn real_state(v: &[f64]) -> AmplitudeState {
        AmplitudeState::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    #[test]
    fn imbalance_examples() {
        let mut v = vec![0.0; 10];
        v[9] = 1.0;
        assert_eq!(imbalance(&real_state(&v), 5).unwrap(), 1.0);
        let uniform = vec![1.0 / 10f64.sqrt(); 10];
        assert!(imbalance(&real_state(&uniform), 5).unwrap().abs() < 1e-15);
        let split = real_state(&[0.5, 0.0, 0.75f64.sqrt(), 0.0]);
        assert!((imbalance(&split, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(imbalance(&real_state(&[0.0, 0.0]), 1), Err(Error::VanishedNorm(_))));
    }

    #[test]
    fn zone_population_examples() {
        let c = SystemConfig::half_and_half(6, 0.0, 0.0, 0.0);
        let s = dicke_initial_state(&c, &Zone::Disordered).unwrap();
        assert!((zone_population(&s, &[3, 4, 5]) - 1.0).abs() < 1e-15);
        assert_eq!(zone_population(&s, &[0, 1]), 0.0);
    }

    #[test]
    fn superradiant_left_site_population() {
        let c = SystemConfig::fully_disordered(2, 0.0, 0.0, 0.0);
        let m = build_coupling_matrix(&c, &DisorderRealization::clean(2)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let grid = TimeGrid::from_points(vec![0.0, 1.0]).unwrap();
        let traj = propagate(&m, &real_state(&[s, s]), &grid).unwrap();
        let p = zone_population(traj.final_state(), &[0]);
        assert!((p - (-2.0f64).exp() / 2.0).abs() < 1e-12);
        assert!((p - 0.06767).abs() < 1e-5);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(half_chain_entropy(&real_state(&[0.0, 0.0, 1.0, 0.0]), 2).unwrap(), 0.0);
        let s = 0.5f64.sqrt();
        let half = half_chain_entropy(&real_state(&[s, 0.0, s, 0.0]), 2).unwrap();
        assert!((half - LN_2).abs() < 1e-15);
        assert!((half - 0.69315).abs() < 1e-5);
        assert!(matches!(half_chain_entropy(&real_state(&[1.1, 0.0]), 1), Err(Error::CorruptState(_))));
    }

    #[test]
    fn participation_ratio_examples() {
        let mut v = vec![0.0; 20];
        v[3] = 1.0;
        assert!((participation_ratio(&real_state(&v)).unwrap().value - 1.0).abs() < 1e-12);

        let mut v = vec![0.0; 100];
        for x in &mut v[50..] {
            *x = 1.0 / 50f64.sqrt();
        }
        assert!((participation_ratio(&real_state(&v)).unwrap().value - 50.0).abs() < 1e-9);

        let uniform = vec![0.1; 100];
        let pr = participation_ratio(&real_state(&uniform)).unwrap();
        assert!(pr.degenerate);
        assert_eq!(pr.value, 0.0);
    }

    #[test]
    fn flux_examples() {
        let c = SystemConfig::fully_disordered(1, 0.0, 0.2, 0.0);
        let d = DisorderRealization::clean(1);
        let s = real_state(&[1.0]);
        let r = photon_flux(&s, &c, &d, Direction::Right).unwrap();
        let l = photon_flux(&s, &c, &d, Direction::Left).unwrap();
        assert!((r / l - 1.5).abs() < 1e-14);

        let h = 1.0 / 2f64.sqrt();
        let pair = real_state(&[h, h]);
        let dark = SystemConfig::fully_disordered(2, PI, 0.0, 0.0);
        let d2 = DisorderRealization::clean(2);
        assert!(photon_flux(&pair, &dark, &d2, Direction::Left).unwrap() < 1e-30);
        assert!(photon_flux(&pair, &dark, &d2, Direction::Right).unwrap() < 1e-30);

        let bright = SystemConfig::fully_disordered(2, 0.0, 0.0, 0.0);
        let total = photon_flux(&pair, &bright, &d2, Direction::Left).unwrap()
            + photon_flux(&pair, &bright, &d2, Direction::Right).unwrap();
        assert!((total - 2.0 * pair.norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn single_emitter_dplr_is_rate_ratio() {
        let c = SystemConfig::fully_disordered(1, 0.0, 0.2, 0.0);
        let d = DisorderRealization::clean(1);
        let m = build_coupling_matrix(&c, &d).unwrap();
        let traj = propagate(&m, &real_state(&[1.0]), &TimeGrid::default_log()).unwrap();
        let series = dplr(&traj, &c, &d).unwrap();
        assert!(series.values[0].is_none());
        for v in series.values.iter().skip(1) {
            assert!((v.unwrap() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_emission_matches_norm_loss() {
        let c = SystemConfig::half_and_half(12, 0.3 * PI, 0.2, 0.4);
        let d = sample_disorder(&c, 5);
        let m = build_coupling_matrix(&c, &d).unwrap();
        let init = dicke_initial_state(&c, &Zone::Disordered).unwrap();
        let Propagator::Spectral(diag) = Propagator::new(&m).unwrap() else { panic!("defective") };
        let grid = TimeGrid::logarithmic(1e-2, 1e3, 40, true).unwrap();
        let integ = EmissionIntegrator::new(&diag, &c, &d, &init).unwrap();
        let (l, r) = integ.cumulative(&grid);
        let traj = propagate(&m, &init, &grid).unwrap();
        for (k, s) in traj.states.iter().enumerate() {
            let lost = 1.0 - s.norm_sq();
            assert!((l[k] + r[k] - lost).abs() < 1e-10, "{k}: {} vs {lost}", l[k] + r[k]);
        }
    }
}
