//! Largest eigenvalue of small symmetric matrices.

use crate::scalar::Scalar;

/// Default off-diagonal tolerance of the Jacobi sweeps, relative to the
/// Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-13;

/// Largest eigenvalue of the symmetric `n x n` row-major matrix `m`.
/// `n = 2` uses the closed form, larger sizes cyclic Jacobi rotations.
pub fn lambda_max<F: Scalar>(n: usize, m: &[F]) -> F {
    debug_assert_eq!(m.len(), n * n);
    match n {
        1 => m[0],
        2 => {
            let (a, b, d) = (m[0], F::of(0.5) * (m[1] + m[2]), m[3]);
            let half = F::of(0.5);
            half * (a + d) + (half * (a - d)).hypot(b)
        }
        _ => jacobi_eigenvalues(n, m, F::of(JACOBI_TOL), 100)
            .into_iter()
            .fold(F::neg_infinity(), F::max),
    }
}

/// All eigenvalues (unsorted) by cyclic Jacobi rotations. Stops once the
/// off-diagonal norm drops below `tol` times the Frobenius norm or after
/// `max_sweeps` sweeps.
pub fn jacobi_eigenvalues<F: Scalar>(n: usize, m: &[F], tol: F, max_sweeps: usize) -> Vec<F> {
    let mut a = m.to_vec();
    for r in 0..n {
        for c in r + 1..n {
            let s = F::of(0.5) * (a[r * n + c] + a[c * n + r]);
            a[r * n + c] = s;
            a[c * n + r] = s;
        }
    }
    let frob = a.iter().fold(F::zero(), |s, v| s + *v * *v).sqrt();
    for _ in 0..max_sweeps {
        let mut off = F::zero();
        for r in 0..n {
            for c in r + 1..n {
                off += a[r * n + c] * a[r * n + c];
            }
        }
        if off.sqrt() <= tol * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (F::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn two_by_two_against_quadratic() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b, d): (f64, f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            // roots of x^2 - (a + d) x + (ad - b^2)
            let tr = a + d;
            let det = a * d - b * b;
            let root = (tr + (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0;
            assert!(rel(lambda_max(2, &[a, b, b, d]), root) < 1e-10);
        }
    }

    #[test]
    fn three_by_three_against_trigonometric_cubic() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let m = [v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5]];
            let q = (m[0] + m[4] + m[8]) / 3.0;
            let p1 = m[1] * m[1] + m[2] * m[2] + m[5] * m[5];
            let p2 = (m[0] - q).powi(2) + (m[4] - q).powi(2) + (m[8] - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let b: Vec<f64> = (0..9).map(|i| (m[i] - if i % 4 == 0 { q } else { 0.0 }) / p).collect();
            let detb = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6])
                + b[2] * (b[3] * b[7] - b[4] * b[6]);
            let phi = (detb / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
            let oracle = q + 2.0 * p * phi.cos();
            assert!(rel(lambda_max(3, &m), oracle) < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn diagonal_and_f32() {
        assert_eq!(lambda_max(3, &[1.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, -2.0]), 4.0);
        let e2 = std::f32::consts::E * std::f32::consts::E;
        assert!((lambda_max(2, &[e2, 0.0, 0.0, 1.0 / e2]) - e2).abs() < 1e-5);
    }
}
