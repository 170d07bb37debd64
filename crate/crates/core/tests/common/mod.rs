//! Independent reference implementations used by the integration tests.
//! Nothing here shares code with the library's solvers.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of eigenvalues strictly below `x`, from the Sturm sequence of
/// the LDL^T pivots.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let scale = diag.iter().chain(off).fold(1.0f64, |m, v| m.max(v.abs()));
    let tiny = f64::EPSILON * scale * 1e-3;
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        }
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Ascending eigenvalues by bisection on the Sturm count.
pub fn bisection_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    lo -= 1e-9;
    hi += 1e-9;
    (0..n)
        .map(|k| {
            // smallest x with count(x) > k
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Random symmetric tridiagonal `(diag, off)` with `1 <= n <= max_n`.
pub fn random_tridiagonal(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=max_n);
    let diag = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let off = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
    (diag, off)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn apply_h(diag: &[f64], off: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = psi[i] * diag[i];
            if i > 0 {
                v += psi[i - 1] * off[i - 1];
            }
            if i + 1 < n {
                v += psi[i + 1] * off[i];
            }
            v
        })
        .collect()
}

/// Classic fourth-order Runge-Kutta for `i dpsi/dt = H psi`, returning the
/// state at each requested time (ascending).
pub fn rk4_evolve(diag: &[f64], off: &[f64], psi0: &[Complex64], times: &[f64], dt: f64) -> Vec<Vec<Complex64>> {
    let minus_i = Complex64::new(0.0, -1.0);
    let deriv = |psi: &[Complex64]| -> Vec<Complex64> {
        apply_h(diag, off, psi).into_iter().map(|v| v * minus_i).collect()
    };
    let axpy = |psi: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
        psi.iter().zip(k).map(|(p, k)| p + k * h).collect()
    };

    let mut psi = psi0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target - 1e-12 {
            let h = dt.min(target - t);
            let k1 = deriv(&psi);
            let k2 = deriv(&axpy(&psi, &k1, h / 2.0));
            let k3 = deriv(&axpy(&psi, &k2, h / 2.0));
            let k4 = deriv(&axpy(&psi, &k3, h));
            for i in 0..psi.len() {
                psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
            t += h;
        }
        out.push(psi.clone());
    }
    out
}
