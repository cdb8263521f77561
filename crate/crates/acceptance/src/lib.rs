//! Independent reference implementations for the acceptance suite in
//! `tests/acceptance.rs`. None of these route through the library's
//! propagator or observables.

use std::f64::consts::PI;

use chiral_array::model::{CouplingMatrix, DisorderRealization, SystemConfig};
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;

/// Dense copy of the generator as nested vectors.
pub fn dense(matrix: &CouplingMatrix) -> Vec<Vec<Complex64>> {
    let n = matrix.dim();
    (0..n).map(|i| (0..n).map(|j| matrix.get(i, j)).collect()).collect()
}

fn mat_vec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn axpy(y: &[Complex64], h: f64, k: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

/// Classical fixed-step fourth-order Runge-Kutta for `da/dt = M a`.
pub fn rk4(matrix: &CouplingMatrix, initial: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let m = dense(matrix);
    let h = t / steps as f64;
    let mut a = initial.to_vec();
    for _ in 0..steps {
        let k1 = mat_vec(&m, &a);
        let k2 = mat_vec(&m, &axpy(&a, h / 2.0, &k1));
        let k3 = mat_vec(&m, &axpy(&a, h / 2.0, &k2));
        let k4 = mat_vec(&m, &axpy(&a, h, &k3));
        for i in 0..a.len() {
            a[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
    }
    a
}

/// `(flux_L, flux_R)` from the input-output relation with per-site phase
/// `φ_μ = ξμ + W_μ`.
pub fn reference_fluxes(config: &SystemConfig, disorder: &DisorderRealization, a: &[Complex64]) -> (f64, f64) {
    let gamma = config.gamma_total;
    let gamma_r = 0.5 * gamma * (1.0 + config.directionality);
    let gamma_l = 0.5 * gamma * (1.0 - config.directionality);
    let mut right = Complex64::new(0.0, 0.0);
    let mut left = Complex64::new(0.0, 0.0);
    for (mu, amp) in a.iter().enumerate() {
        let phi = config.xi * mu as f64 + disorder.phases[mu];
        right += Complex64::from_polar(1.0, -phi) * amp;
        left += Complex64::from_polar(1.0, phi) * amp;
    }
    (gamma_l * left.norm_sqr(), gamma_r * right.norm_sqr())
}

/// Nodes and weights of composite 5-point Gauss-Legendre quadrature on
/// `[0, t]`, sorted by node. `[0, 1]` is split into `early` geometric panels
/// starting at `1e-6` to resolve fast transients; the rest uses uniform
/// panels no wider than `width` so late oscillations are resolved too.
pub fn gauss_legendre_rule(t: f64, early: usize, width: f64) -> Vec<(f64, f64)> {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let knee = t.min(1.0);
    let t0 = 1e-6 * knee;
    let mut edges = vec![0.0];
    for k in 0..early {
        edges.push(t0 * (knee / t0).powf(k as f64 / (early - 1) as f64));
    }
    let late = ((t - knee) / width).ceil() as usize;
    for k in 1..=late {
        edges.push(knee + (t - knee) * k as f64 / late as f64);
    }
    let mut rule = Vec::with_capacity(5 * edges.len());
    for pair in edges.windows(2) {
        let (mid, half) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
        rule.extend(X.iter().zip(W).map(|(x, w)| (mid + half * x, w * half)));
    }
    rule
}

/// Von Neumann entropy of sites `0..cut` from the explicit `2^N`-dimensional
/// density matrix `|a⟩⟨a| + (1 - ‖a‖²)|vac⟩⟨vac|`.
pub fn density_matrix_entropy(a: &[Complex64], cut: usize) -> f64 {
    let n = a.len();
    let dim = 1usize << n;
    let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    // basis index bit μ set = emitter μ excited
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for (mu, amp) in a.iter().enumerate() {
        psi[1 << mu] = *amp;
    }
    let rho = |i: usize, j: usize| {
        let mut v = psi[i] * psi[j].conj();
        if i == 0 && j == 0 {
            v += 1.0 - norm;
        }
        v
    };
    let left_dim = 1usize << cut;
    let right_dim = dim >> cut;
    let reduced = Mat::from_fn(left_dim, left_dim, |i, j| {
        let mut s = Complex64::new(0.0, 0.0);
        for r in 0..right_dim {
            s += rho(i | (r << cut), j | (r << cut));
        }
        s
    });
    let p = reduced.self_adjoint_eigenvalues(Side::Lower).expect("hermitian eigensolver");
    p.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.ln()).sum()
}

/// Random amplitudes with total weight in `(0, 1]`.
pub fn random_amplitudes<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()))
        .collect();
    let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = rng.random_range(0.05..=1.0f64).sqrt() / norm;
    raw.into_iter().map(|z| z * scale).collect()
}

/// `‖a - b‖ / ‖b‖`.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    diff / scale.max(1e-300)
}
