//! Time propagation of amplitude states under a fixed generator.
//!
//! The default route diagonalizes the generator once, `M = V Λ V⁻¹`, after
//! which every output time costs `O(N²)`. Generators whose eigenvector basis
//! is ill-conditioned (the cascaded limit `|D| = 1` is exactly defective)
//! fall back to stepping the state with dense matrix exponentials across the
//! grid gaps.

mod expm;

use std::cmp::Ordering;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use expm::expm;

use crate::error::{Error, Result};
use crate::model::{AmplitudeState, CouplingMatrix};

/// Eigenvector conditioning above which the matrix is treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e12;
/// Relative max-norm reconstruction residual accepted from the eigensolver.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Logarithmic,
    Linear,
    Custom,
}

/// Ascending output times in units of `1/γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    /// `count` log-spaced points on `[t_min, t_max]`, optionally preceded by `t = 0`.
    pub fn logarithmic(t_min: f64, t_max: f64, count: usize, include_zero: bool) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid("a logarithmic grid needs at least 2 points".into()));
        }
        let (lo, hi) = (t_min.log10(), t_max.log10());
        let step = (hi - lo) / (count - 1) as f64;
        let mut points = Vec::with_capacity(count + 1);
        if include_zero {
            points.push(0.0);
        }
        for k in 0..count {
            points.push(match k {
                0 => t_min,
                k if k == count - 1 => t_max,
                k => 10f64.powf(lo + step * k as f64),
            });
        }
        Ok(Self { points, spacing: Spacing::Logarithmic })
    }

    /// `count` evenly spaced points on `[0, t_max]`.
    pub fn linear(t_max: f64, count: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) || count < 2 {
            return Err(Error::InvalidGrid("a linear grid needs t_max > 0 and at least 2 points".into()));
        }
        let points = (0..count).map(|k| t_max * k as f64 / (count - 1) as f64).collect();
        Ok(Self { points, spacing: Spacing::Linear })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if !(points[0] >= 0.0) || points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid points must be finite and non-negative".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid points must be strictly increasing".into()));
        }
        Ok(Self { points, spacing: Spacing::Custom })
    }

    /// 200 log-spaced points on `γt ∈ [1e-2, 1e4]` plus `t = 0`.
    pub fn default_log() -> Self {
        Self::logarithmic(1e-2, 1e4, 200, true).expect("static grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.points.last().expect("grids are non-empty")
    }

    /// Index of the grid point closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &p) in self.points.iter().enumerate() {
            if (p - t).abs() < (self.points[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

/// Pins faer to sequential kernels so results do not depend on thread count.
pub(crate) fn sequential_linalg() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Sorted eigenpairs of a generator. Eigenvector columns have unit norm.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Mat<Complex64>,
}

fn level_order(a: Complex64, b: Complex64) -> Ordering {
    a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
}

/// Eigenpairs sorted by imaginary part, then real part, then original index.
/// No conditioning check is performed.
pub fn eigensystem(matrix: &CouplingMatrix) -> Result<Eigensystem> {
    sequential_linalg();
    let n = matrix.dim();
    let evd = matrix
        .entries()
        .eigen()
        .map_err(|e| Error::NonConverged(format!("eigensolver failed: {e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the original index as the final tie breaker
    order.sort_by(|&i, &j| level_order(values[i], values[j]));

    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let norms: Vec<f64> = order
        .iter()
        .map(|&k| (0..n).map(|i| vectors[(i, k)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| {
        let norm = norms[j];
        let v = vectors[(i, order[j])];
        if norm > 0.0 { v / norm } else { v }
    });
    Ok(Eigensystem { eigenvalues, eigenvectors })
}

/// A verified diagonalization `M = V Λ V⁻¹`.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub eigen: Eigensystem,
    pub inverse: Mat<Complex64>,
    /// `‖V‖₁ ‖V⁻¹‖₁`.
    pub condition: f64,
    /// `max |M - V Λ V⁻¹|`.
    pub residual: f64,
}

impl Diagonalization {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigen.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<Complex64> {
        &self.eigen.eigenvectors
    }

    /// Mode coefficients `c = V⁻¹ a`.
    pub fn modal_coefficients(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        mat_vec(&self.inverse, amplitudes)
    }

    /// `V (e^{Λt} ∘ c)`.
    pub fn synthesize(&self, coefficients: &[Complex64], t: f64) -> Vec<Complex64> {
        let weighted: Vec<Complex64> = coefficients
            .iter()
            .zip(self.eigenvalues())
            .map(|(c, l)| c * (l * t).exp())
            .collect();
        mat_vec(self.eigenvectors(), &weighted)
    }
}

fn mat_vec(m: &Mat<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * xj;
        }
    }
    out
}

fn is_finite(m: &Mat<Complex64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

/// Diagonalizes the generator, signalling [`Error::Defective`] when the
/// eigenvector basis is too ill-conditioned to propagate with.
pub fn eigendecompose(matrix: &CouplingMatrix) -> Result<Diagonalization> {
    let n = matrix.dim();
    let eigen = eigensystem(matrix)?;
    let v = &eigen.eigenvectors;
    if !is_finite(v) {
        return Err(Error::Defective { condition: f64::INFINITY });
    }
    let inverse = v.partial_piv_lu().inverse();
    if !is_finite(&inverse) {
        return Err(Error::Defective { condition: f64::INFINITY });
    }
    let condition = expm::one_norm(v) * expm::one_norm(&inverse);
    if !(condition <= DEFECTIVE_CONDITION) {
        return Err(Error::Defective { condition });
    }
    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * eigen.eigenvalues[j]);
    let rebuilt = &scaled * &inverse;
    let mut residual = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            residual = residual.max((rebuilt[(i, j)] - matrix.get(i, j)).norm());
        }
    }
    if !(residual <= RECONSTRUCTION_TOLERANCE * matrix.max_norm()) {
        return Err(Error::Defective { condition });
    }
    Ok(Diagonalization { eigen, inverse, condition, residual })
}

/// How a generator is propagated.
#[derive(Debug, Clone)]
pub enum Propagator {
    Spectral(Diagonalization),
    /// Fallback for defective generators: `exp(M Δt)` per grid gap.
    Exponential(CouplingMatrix),
}

impl Propagator {
    /// Diagonalizes when possible, falling back to matrix exponentials on
    /// [`Error::Defective`].
    pub fn new(matrix: &CouplingMatrix) -> Result<Self> {
        match eigendecompose(matrix) {
            Ok(d) => Ok(Self::Spectral(d)),
            Err(Error::Defective { .. }) => Ok(Self::Exponential(matrix.clone())),
            Err(e) => Err(e),
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self, Self::Spectral(_))
    }

    pub fn diagonalization(&self) -> Option<&Diagonalization> {
        match self {
            Self::Spectral(d) => Some(d),
            Self::Exponential(_) => None,
        }
    }

    /// States at every grid point, starting from `initial` at `t = 0`.
    pub fn states(&self, initial: &AmplitudeState, grid: &TimeGrid) -> Result<Vec<AmplitudeState>> {
        sequential_linalg();
        match self {
            Self::Spectral(d) => {
                let c = d.modal_coefficients(initial.amplitudes());
                Ok(grid.points().iter().map(|&t| AmplitudeState::new(d.synthesize(&c, t))).collect())
            }
            Self::Exponential(m) => {
                let n = m.dim();
                let mut out = Vec::with_capacity(grid.len());
                let mut current = initial.amplitudes().to_vec();
                let mut t_prev = 0.0;
                for &t in grid.points() {
                    let dt = t - t_prev;
                    if dt > 0.0 {
                        let step = Mat::from_fn(n, n, |i, j| m.get(i, j) * dt);
                        current = mat_vec(&expm(&step)?, &current);
                    }
                    out.push(AmplitudeState::new(current.clone()));
                    t_prev = t;
                }
                Ok(out)
            }
        }
    }
}

/// Amplitudes on a time grid.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<AmplitudeState>,
    /// SHA-256 of the generator entries; fixed by the (config, disorder) pair.
    pub config_digest: String,
}

impl AmplitudeTrajectory {
    pub fn final_state(&self) -> &AmplitudeState {
        self.states.last().expect("trajectories are non-empty")
    }
}

pub fn matrix_digest(matrix: &CouplingMatrix) -> String {
    let mut hasher = Sha256::new();
    let n = matrix.dim();
    hasher.update((n as u64).to_le_bytes());
    for j in 0..n {
        for i in 0..n {
            let z = matrix.get(i, j);
            hasher.update(z.re.to_bits().to_le_bytes());
            hasher.update(z.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

/// `a(t_k)` for every grid point.
pub fn propagate(matrix: &CouplingMatrix, initial: &AmplitudeState, grid: &TimeGrid) -> Result<AmplitudeTrajectory> {
    if initial.len() != matrix.dim() {
        return Err(Error::DimensionMismatch { expected: matrix.dim(), found: initial.len() });
    }
    let propagator = Propagator::new(matrix)?;
    propagate_with(&propagator, matrix, initial, grid)
}

/// As [`propagate`], reusing an existing propagator.
pub fn propagate_with(
    propagator: &Propagator,
    matrix: &CouplingMatrix,
    initial: &AmplitudeState,
    grid: &TimeGrid,
) -> Result<AmplitudeTrajectory> {
    let states = propagator.states(initial, grid)?;
    Ok(AmplitudeTrajectory { grid: grid.clone(), states, config_digest: matrix_digest(matrix) })
}
