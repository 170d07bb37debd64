//! Second-order effective couplings between the outer spins.
//!
//! Off resonance, eliminating the channel leaves a two-level problem
//!
//! ```text
//! h_v = w_v - g_v^2 sum_k a_vk^2 / (E_k - w_v)
//! J'  = (g_s g_r / 2) sum_k a_sk a_rk [1/(E_k - w_s) + 1/(E_k - w_r)]
//! ```
//!
//! with detuning `D = h_s - h_r` and Rabi frequency `W = sqrt(D^2 + 4 J'^2)`.
//! When both outer spins sit on a channel mode `E_k'`, the zero-energy state
//! of the resulting three-level problem mixes `|s>` and `|r>` with weight
//! `eta = g_s a_sk' / (g_r a_rk')`.

use serde::{Deserialize, Serialize};

use crate::eigensolve::ModeOverlaps;
use crate::error::{invalid, Error, Result};

/// Gaps `|E_k - w_v|` below this are exact resonances.
pub const RESONANCE_TOL: f64 = 1e-14;

/// Smallest `|a_rk'|` accepted by [`three_level`].
pub const DECOUPLING_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelEffective {
    pub h_s: f64,
    pub h_r: f64,
    pub j_eff: f64,
    pub delta: f64,
    pub rabi: f64,
    /// `min_{k, v} |E_k - w_v|`.
    pub min_gap: f64,
}

impl TwoLevelEffective {
    fn from_parts(h_s: f64, h_r: f64, j_eff: f64, min_gap: f64) -> Self {
        let delta = h_s - h_r;
        Self {
            h_s,
            h_r,
            j_eff,
            delta,
            rabi: (delta * delta + 4.0 * j_eff * j_eff).sqrt(),
            min_gap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelEffective {
    pub mode_index: usize,
    pub mode_energy: f64,
    pub eta: f64,
    /// `(g_s a_sk', g_r a_rk')`.
    pub couplings: (f64, f64),
}

fn check_couplings(g_s: f64, g_r: f64) -> Result<()> {
    if !(g_s.is_finite() && g_s > 0.0) {
        return Err(invalid("g_s", "must be positive"));
    }
    if !(g_r.is_finite() && g_r > 0.0) {
        return Err(invalid("g_r", "must be positive"));
    }
    Ok(())
}

pub fn two_level<S: ModeOverlaps + ?Sized>(
    spectrum: &S,
    omega_s: f64,
    omega_r: f64,
    g_s: f64,
    g_r: f64,
) -> Result<TwoLevelEffective> {
    check_couplings(g_s, g_r)?;
    let energies = spectrum.energies();
    let a_s = spectrum.overlaps_s();
    let a_r = spectrum.overlaps_r();

    let mut min_gap = f64::INFINITY;
    for (k, &e) in energies.iter().enumerate() {
        let gap = (e - omega_s).abs().min((e - omega_r).abs());
        if gap < RESONANCE_TOL {
            return Err(Error::ResonantMode { mode: k, gap });
        }
        min_gap = min_gap.min(gap);
    }

    let (mut sum_s, mut sum_r, mut sum_j) = (0.0, 0.0, 0.0);
    for k in 0..energies.len() {
        let inv_s = (energies[k] - omega_s).recip();
        let inv_r = (energies[k] - omega_r).recip();
        sum_s += a_s[k] * a_s[k] * inv_s;
        sum_r += a_r[k] * a_r[k] * inv_r;
        sum_j += a_s[k] * a_r[k] * (inv_s + inv_r);
    }

    let h_s = omega_s - g_s * g_s * sum_s;
    let h_r = omega_r - g_r * g_r * sum_r;
    let j_eff = 0.5 * g_s * g_r * sum_j;
    Ok(TwoLevelEffective::from_parts(h_s, h_r, j_eff, min_gap))
}

/// Resonant regime on mode `mode_index` (0-based). The caller is
/// responsible for tuning `w_s = w_r = E_k'`.
pub fn three_level<S: ModeOverlaps + ?Sized>(
    spectrum: &S,
    mode_index: usize,
    g_s: f64,
    g_r: f64,
) -> Result<ThreeLevelEffective> {
    check_couplings(g_s, g_r)?;
    if mode_index >= spectrum.len() {
        return Err(invalid(
            "mode_index",
            format!("{mode_index} out of range for {} modes", spectrum.len()),
        ));
    }
    let a_s = spectrum.overlaps_s()[mode_index];
    let a_r = spectrum.overlaps_r()[mode_index];
    if a_r.abs() <= DECOUPLING_TOL {
        return Err(Error::ReceiverDecoupled {
            mode: mode_index,
            overlap: a_r,
        });
    }
    let couplings = (g_s * a_s, g_r * a_r);
    Ok(ThreeLevelEffective {
        mode_index,
        mode_energy: spectrum.energies()[mode_index],
        eta: couplings.0 / couplings.1,
        couplings,
    })
}
