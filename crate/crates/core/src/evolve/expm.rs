//! Dense complex matrix exponential by scaling and squaring with a
//! degree-13 Padé approximant.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Squarings beyond this are treated as a failed step control.
const MAX_SQUARINGS: i32 = 64;

pub(crate) fn one_norm(a: &Mat<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_sum(terms: &[(&Mat<Complex64>, f64)], identity_coeff: f64, n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |i, j| {
        let mut acc = Complex64::new(if i == j { identity_coeff } else { 0.0 }, 0.0);
        for (m, c) in terms {
            acc += m[(i, j)] * *c;
        }
        acc
    })
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &Mat<Complex64>) -> Result<Mat<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::NonConverged("non-finite matrix entries".into()));
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if squarings > MAX_SQUARINGS {
        return Err(Error::NonConverged(format!("norm {norm:.3e} needs {squarings} squarings")));
    }
    let scale = 0.5f64.powi(squarings);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);

    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * scaled_sum(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])], 0.0, n);
    let u_poly = scaled_sum(&[(&u_inner, 1.0), (&a6, b[7]), (&a4, b[5]), (&a2, b[3])], b[1], n);
    let u = &a * &u_poly;
    let v_inner = &a6 * scaled_sum(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])], 0.0, n);
    let v = scaled_sum(&[(&v_inner, 1.0), (&a6, b[6]), (&a4, b[4]), (&a2, b[2])], b[0], n);

    let denom = Mat::from_fn(n, n, |i, j| v[(i, j)] - u[(i, j)]);
    let numer = Mat::from_fn(n, n, |i, j| v[(i, j)] + u[(i, j)]);
    let mut r = denom.partial_piv_lu().solve(&numer);
    for _ in 0..squarings {
        r = &r * &r;
    }
    let finite = (0..n).all(|j| (0..n).all(|i| r[(i, j)].re.is_finite() && r[(i, j)].im.is_finite()));
    if !finite {
        return Err(Error::NonConverged("matrix exponential produced non-finite entries".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_exponential() {
        let a = Mat::from_fn(1, 1, |_, _| c(-0.5, 2.0));
        let e = expm(&a).unwrap();
        let expected = c(-0.5, 2.0).exp();
        assert!((e[(0, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn jordan_block() {
        // exp(t [[a, 0], [b, a]]) = e^{at} [[1, 0], [bt, 1]]
        let (a, b, t) = (c(-0.5, 0.0), c(-0.8, 0.3), 37.0);
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => a * t,
            (1, 0) => b * t,
            _ => c(0.0, 0.0),
        });
        let e = expm(&m).unwrap();
        let s = (a * t).exp();
        assert!((e[(0, 0)] - s).norm() < 1e-12 * s.norm());
        assert!((e[(1, 1)] - s).norm() < 1e-12 * s.norm());
        assert!(e[(0, 1)].norm() < 1e-14 * s.norm());
        assert!((e[(1, 0)] - s * b * t).norm() < 1e-11 * (s * b * t).norm());
    }

    #[test]
    fn diagonal_with_large_norm() {
        let d = [c(-3.0, 40.0), c(-0.01, -5.0), c(0.0, 100.0)];
        let m = Mat::from_fn(3, 3, |i, j| if i == j { d[i] } else { c(0.0, 0.0) });
        let e = expm(&m).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - d[i].exp()).norm() < 1e-11, "{i}: {:?} vs {:?}", e[(i, i)], d[i].exp());
        }
    }

    #[test]
    fn non_finite_input_fails() {
        let m = Mat::from_fn(2, 2, |_, _| c(f64::NAN, 0.0));
        assert!(matches!(expm(&m), Err(Error::NonConverged(_))));
    }
}
