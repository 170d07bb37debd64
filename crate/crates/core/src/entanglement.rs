//! Pairwise concurrence in the single-excitation sector.
//!
//! For `|psi> = sum_i d_i |i>` the reduced state of spins `i, j` has
//! concurrence `2 |d_i d_j*|`. The two effective regimes give closed forms:
//! `2 / sqrt((D/J')^2 + 4)` for the two-level eigenstates and
//! `2 |eta| / (1 + eta^2)` for the three-level zero mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on `| ||psi|| - 1 |` for states passed to [`concurrence_pair`].
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// `|site>` in a basis of size `dim`.
    pub fn basis(dim: usize, site: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }
}

pub fn concurrence_pair(state: &PureState, i: usize, j: usize) -> Result<f64> {
    state.check_normalized()?;
    if i == j {
        return Err(invalid("j", "concurrence needs two distinct sites"));
    }
    let n = state.dim();
    if i >= n || j >= n {
        return Err(invalid("i", format!("site index out of range for dimension {n}")));
    }
    Ok((2.0 * (state.amplitudes[i] * state.amplitudes[j].conj()).norm()).min(1.0))
}

/// Result of [`concurrence_two_level`]. `decoupled` marks `J' = 0`, where the
/// concurrence is reported as its limiting value 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelConcurrence {
    pub value: f64,
    pub decoupled: bool,
}

pub fn concurrence_two_level(delta: f64, j_eff: f64) -> TwoLevelConcurrence {
    if j_eff == 0.0 {
        return TwoLevelConcurrence {
            value: 0.0,
            decoupled: true,
        };
    }
    let ratio = delta / j_eff;
    let value = if ratio.is_finite() {
        2.0 / (ratio * ratio + 4.0).sqrt()
    } else {
        0.0
    };
    TwoLevelConcurrence {
        value,
        decoupled: false,
    }
}

pub fn concurrence_three_level(eta: f64) -> f64 {
    if eta.is_infinite() {
        return 0.0;
    }
    // 2|eta|/(1+eta^2) written to stay finite for huge |eta|
    let a = eta.abs();
    if a > 1.0 {
        2.0 / (a + a.recip())
    } else {
        2.0 * a / (1.0 + a * a)
    }
}

/// The two-level eigenstate `(2J'|s> + (D +/- W)|r>) / norm` as `(d_s, d_r)`.
pub fn two_level_eigenstate(delta: f64, j_eff: f64, upper: bool) -> (f64, f64) {
    let rabi = (delta * delta + 4.0 * j_eff * j_eff).sqrt();
    let b = if upper { delta + rabi } else { delta - rabi };
    let a = 2.0 * j_eff;
    let norm = (a * a + b * b).sqrt();
    (a / norm, b / norm)
}

/// The three-level zero mode `(|s> - eta|r>) / sqrt(1 + eta^2)` as `(d_s, d_r)`.
pub fn three_level_zero_mode(eta: f64) -> (f64, f64) {
    let norm = (1.0 + eta * eta).sqrt();
    (1.0 / norm, -eta / norm)
}
