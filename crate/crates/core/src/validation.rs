//! Agreement checks between the effective two-level theory and exact
//! dynamics of the full system.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::disorder::{DisorderKind, DEFAULT_COUPLING_SHIFT};
use crate::dynamics::{dominant_frequency, evolve, linspace_times, max_transfer};
use crate::effective::{two_level, TwoLevelEffective};
use crate::eigensolve::diagonalize;
use crate::entanglement::{concurrence_two_level, two_level_eigenstate, PureState};
use crate::error::Result;
use crate::lattice::{ChannelSpec, SystemSpec};

/// Relative tolerance for effective-vs-exact comparisons.
pub const RELATIVE_TOL: f64 = 0.05;
/// Largest population allowed outside the sender/receiver pair.
pub const MAX_LEAK: f64 = 0.05;
/// Allowed deviation of the evolved norm from 1.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Exact-vs-effective numbers for a system started in `|s>`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RabiComparison {
    pub effective: TwoLevelEffective,
    /// `2 |J'| / W`.
    pub predicted_concurrence: f64,
    /// Peak of `2 |d_s d_r|` over roughly 1.5 Rabi periods.
    pub peak_concurrence: f64,
    /// Dominant angular frequency of `|d_r(t)|^2` over four Rabi periods.
    pub frequency: f64,
    pub max_leak: f64,
    pub max_norm_error: f64,
}

impl RabiComparison {
    pub fn concurrence_error(&self) -> f64 {
        rel_err(self.peak_concurrence, self.predicted_concurrence)
    }

    pub fn frequency_error(&self) -> f64 {
        rel_err(self.frequency, self.effective.rabi)
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

/// Evolves `|s>` exactly and extracts the peak concurrence and oscillation
/// frequency to compare with the effective two-level prediction.
pub fn rabi_comparison(spec: &SystemSpec, samples: usize) -> Result<RabiComparison> {
    let channel = diagonalize(&spec.channel.matrix())?;
    let effective = two_level(&channel, spec.omega_s, spec.omega_r, spec.g_s, spec.g_r)?;
    let period = TAU / effective.rabi;
    let initial = PureState::basis(spec.dim(), spec.sender_index());

    let peak_trace = evolve(spec, &initial, &linspace_times(1.5 * period, samples))?;
    let peak = max_transfer(&peak_trace).expect("non-empty trace");

    let freq_trace = evolve(spec, &initial, &linspace_times(4.0 * period, samples))?;
    // stay below every channel frequency measured from the outer-spin fields
    let max_omega = 0.5 * effective.min_gap;
    let frequency = dominant_frequency(&freq_trace.times, &freq_trace.receiver_population(), max_omega)
        .unwrap_or(f64::NAN);

    Ok(RabiComparison {
        effective,
        predicted_concurrence: concurrence_two_level(effective.delta, effective.j_eff).value,
        peak_concurrence: peak.peak_concurrence,
        frequency,
        max_leak: peak_trace.max_leak().max(freq_trace.max_leak()),
        max_norm_error: peak_trace.max_norm_error().max(freq_trace.max_norm_error()),
    })
}

/// Starts in the effective upper eigenstate `|psi+>` and reports the
/// concurrence range over one Rabi period alongside `2 |J'| / W`.
pub fn eigenstate_persistence(spec: &SystemSpec, samples: usize) -> Result<(f64, f64, f64)> {
    let channel = diagonalize(&spec.channel.matrix())?;
    let eff = two_level(&channel, spec.omega_s, spec.omega_r, spec.g_s, spec.g_r)?;
    let (ds, dr) = two_level_eigenstate(eff.delta, eff.j_eff, true);
    let mut amps = vec![Complex64::new(0.0, 0.0); spec.dim()];
    amps[spec.sender_index()] = Complex64::new(ds, 0.0);
    amps[spec.receiver_index()] = Complex64::new(dr, 0.0);
    let trace = evolve(spec, &PureState::new(amps), &linspace_times(TAU / eff.rabi, samples))?;
    let lo = trace.concurrence_sr.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = trace.concurrence_sr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((concurrence_two_level(eff.delta, eff.j_eff).value, lo, hi))
}

fn rabi_checks(label: &str, spec: &SystemSpec, samples: usize) -> Vec<Check> {
    match rabi_comparison(spec, samples) {
        Err(e) => vec![Check::new(label, false, e.to_string())],
        Ok(cmp) => vec![
            Check::new(
                format!("{label}: peak concurrence"),
                cmp.concurrence_error() <= RELATIVE_TOL,
                format!(
                    "exact {:.6} vs 2|J'|/W {:.6} (rel err {:.2e})",
                    cmp.peak_concurrence,
                    cmp.predicted_concurrence,
                    cmp.concurrence_error()
                ),
            ),
            Check::new(
                format!("{label}: oscillation frequency"),
                cmp.frequency_error() <= RELATIVE_TOL,
                format!(
                    "exact {:.6e} vs W {:.6e} (rel err {:.2e})",
                    cmp.frequency,
                    cmp.effective.rabi,
                    cmp.frequency_error()
                ),
            ),
            Check::new(
                format!("{label}: leakage"),
                cmp.max_leak < MAX_LEAK,
                format!("max leak {:.3e} (limit {MAX_LEAK})", cmp.max_leak),
            ),
            Check::new(
                format!("{label}: norm"),
                cmp.max_norm_error <= NORM_TOL,
                format!("max |norm - 1| {:.2e}", cmp.max_norm_error),
            ),
        ],
    }
}

/// Uniform `N = 8` channel, `g = 0.02`, outer spins at zero field.
pub fn uniform_reference_system() -> SystemSpec {
    SystemSpec::new(ChannelSpec::uniform(8, 0.0, 1.0).expect("valid"), 0.0, 0.0, 0.02, 0.02)
        .expect("valid")
}

/// Oracle-agreement suite. The quick variant covers the clean `N = 8`
/// reference system only; the full variant adds disordered channels with
/// finite detuning.
pub fn oracle_checks(quick: bool) -> Vec<Check> {
    let mut checks = rabi_checks("uniform N=8 g=0.02", &uniform_reference_system(), 6000);
    if quick {
        return checks;
    }

    let g = 0.01;
    for (kind, alpha, seed) in [
        (DisorderKind::OnSite, 2.0, 1u64),
        (DisorderKind::OnSite, 0.0, 2),
        (DisorderKind::Coupling, 1.0, 3),
    ] {
        let label = format!("{kind} alpha={alpha} seed={seed} N=10");
        let spec = ChannelSpec::disordered(kind, alpha, 10, seed, DEFAULT_COUPLING_SHIFT)
            .and_then(|ch| {
                let g = g * ch.min_abs_coupling().unwrap_or(1.0).min(1.0);
                SystemSpec::new(ch, 0.0, 0.0, g, g)
            });
        let spec = match spec {
            Ok(s) => s,
            Err(e) => {
                checks.push(Check::new(label, false, e.to_string()));
                continue;
            }
        };
        match eigenstate_persistence(&spec, 4000) {
            Ok((predicted, lo, hi)) => {
                let worst = rel_err(lo, predicted).max(rel_err(hi, predicted));
                checks.push(Check::new(
                    format!("{label}: eigenstate concurrence"),
                    worst <= RELATIVE_TOL,
                    format!("exact range [{lo:.6}, {hi:.6}] vs 2|J'|/W {predicted:.6}"),
                ));
            }
            Err(e) => checks.push(Check::new(label.clone(), false, e.to_string())),
        }
        if let Ok(cmp) = rabi_comparison(&spec, 6000) {
            checks.push(Check::new(
                format!("{label}: oscillation frequency"),
                cmp.frequency_error() <= RELATIVE_TOL,
                format!(
                    "exact {:.6e} vs W {:.6e} (rel err {:.2e})",
                    cmp.frequency,
                    cmp.effective.rabi,
                    cmp.frequency_error()
                ),
            ));
        }
    }
    checks
}
