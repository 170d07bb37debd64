//! Exact single-excitation dynamics of the full sender/channel/receiver
//! system.
//!
//! The Hamiltonian is time independent, so states are propagated through its
//! spectral decomposition, `psi(t) = sum_k exp(-i E_k t) |E_k><E_k|psi(0)>`.
//! This is the reference the effective theories are checked against.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{diagonalize, Spectrum, SymTridiagonal};
use crate::entanglement::PureState;
use crate::error::{invalid, Result};
use crate::lattice::SystemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    pub times: Vec<f64>,
    pub amp_s: Vec<Complex64>,
    pub amp_r: Vec<Complex64>,
    pub concurrence_sr: Vec<f64>,
    /// `1 - |d_s|^2 - |d_r|^2`.
    pub population_leak: Vec<f64>,
    /// Norm of the full evolved state at each sample.
    pub norm: Vec<f64>,
}

impl DynamicsTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn receiver_population(&self) -> Vec<f64> {
        self.amp_r.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn max_norm_error(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_leak(&self) -> f64 {
        self.population_leak.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferPeak {
    pub t_peak: f64,
    pub peak_concurrence: f64,
    /// Largest receiver population `|d_r|^2` on the trace.
    pub peak_population: f64,
    pub t_peak_population: f64,
}

/// Spectral propagator for a fixed Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(matrix: &SymTridiagonal) -> Result<Self> {
        Ok(Self {
            spectrum: diagonalize(matrix)?,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `<E_k|psi>` for every mode.
    pub fn project(&self, state: &PureState) -> Vec<Complex64> {
        self.spectrum
            .eigenvectors
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&state.amplitudes)
                    .map(|(&vk, &a)| a * vk)
                    .sum()
            })
            .collect()
    }

    pub fn evolve_projected(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.spectrum.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for ((&e, v), &c) in self.spectrum.eigenvalues.iter().zip(&self.spectrum.eigenvectors).zip(coeffs) {
            let phase = c * Complex64::from_polar(1.0, -e * t);
            for (o, &vk) in out.iter_mut().zip(v) {
                *o += phase * vk;
            }
        }
        out
    }

    pub fn evolve_state(&self, state: &PureState, t: f64) -> PureState {
        PureState::new(self.evolve_projected(&self.project(state), t))
    }
}

fn check_inputs(dim: usize, initial: &PureState, times: &[f64]) -> Result<()> {
    if initial.dim() != dim {
        return Err(invalid(
            "initial",
            format!("state has dimension {}, system has {dim}", initial.dim()),
        ));
    }
    initial.check_normalized()?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("times", "must be finite"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be sorted ascending"));
    }
    Ok(())
}

/// Evolves `initial` (site basis `(s, 1..N, r)`) under the full system
/// Hamiltonian and samples the sender/receiver amplitudes.
pub fn evolve(spec: &SystemSpec, initial: &PureState, times: &[f64]) -> Result<DynamicsTrace> {
    spec.validate()?;
    evolve_matrix(&spec.matrix(), spec.sender_index(), spec.receiver_index(), initial, times)
}

/// Same as [`evolve`] for an arbitrary tridiagonal Hamiltonian with explicit
/// sender and receiver sites.
pub fn evolve_matrix(
    matrix: &SymTridiagonal,
    sender: usize,
    receiver: usize,
    initial: &PureState,
    times: &[f64],
) -> Result<DynamicsTrace> {
    let dim = matrix.dim();
    check_inputs(dim, initial, times)?;
    if sender >= dim || receiver >= dim || sender == receiver {
        return Err(invalid("sender", "sender and receiver must be distinct sites"));
    }
    let prop = Propagator::new(matrix)?;
    let coeffs = prop.project(initial);

    let mut trace = DynamicsTrace {
        times: times.to_vec(),
        amp_s: Vec::with_capacity(times.len()),
        amp_r: Vec::with_capacity(times.len()),
        concurrence_sr: Vec::with_capacity(times.len()),
        population_leak: Vec::with_capacity(times.len()),
        norm: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let psi = prop.evolve_projected(&coeffs, t);
        let (ds, dr) = (psi[sender], psi[receiver]);
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        trace.amp_s.push(ds);
        trace.amp_r.push(dr);
        trace.concurrence_sr.push(2.0 * (ds * dr.conj()).norm());
        trace.population_leak.push(1.0 - ds.norm_sqr() - dr.norm_sqr());
        trace.norm.push(norm);
    }
    Ok(trace)
}

/// Locates the concurrence maximum (earliest on ties) and the receiver
/// population maximum. `None` for an empty trace.
pub fn max_transfer(trace: &DynamicsTrace) -> Option<TransferPeak> {
    if trace.is_empty() {
        return None;
    }
    let argmax = |values: &mut dyn Iterator<Item = f64>| {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, v) in values.enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    };
    let (ic, c) = argmax(&mut trace.concurrence_sr.iter().copied());
    let (ip, p) = argmax(&mut trace.amp_r.iter().map(|a| a.norm_sqr()));
    Some(TransferPeak {
        t_peak: trace.times[ic],
        peak_concurrence: c,
        peak_population: p,
        t_peak_population: trace.times[ip],
    })
}

/// Uniformly spaced sample times `t_j = j * tmax / (samples - 1)`.
pub fn linspace_times(tmax: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..samples)
            .map(|j| tmax * j as f64 / (samples - 1) as f64)
            .collect(),
    }
}

fn spectral_power(times: &[f64], centered: &[f64], omega: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (&t, &x) in times.iter().zip(centered) {
        let (s, c) = (omega * t).sin_cos();
        re += x * c;
        im += x * s;
    }
    re * re + im * im
}

/// Angular frequency in `(0, max_omega]` carrying the most power in `signal`
/// (mean removed). Coarse scan at half the Fourier resolution `pi / T`, then
/// golden-section refinement around the best bin. The scan never goes past
/// the Nyquist frequency of the mean sample spacing, where aliases of slow
/// components would otherwise win.
pub fn dominant_frequency(times: &[f64], signal: &[f64], max_omega: f64) -> Option<f64> {
    let span = times.last()? - times.first()?;
    if span <= 0.0 || times.len() != signal.len() || max_omega <= 0.0 {
        return None;
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let centered: Vec<f64> = signal.iter().map(|x| x - mean).collect();
    let nyquist = PI * (times.len() - 1) as f64 / span;
    let max_omega = max_omega.min(nyquist);

    let step = PI / (2.0 * span);
    let n_steps = (max_omega / step).ceil() as usize;
    let (mut best_w, mut best_p) = (step, f64::NEG_INFINITY);
    for i in 1..=n_steps {
        let w = (i as f64 * step).min(max_omega);
        let p = spectral_power(times, &centered, w);
        if p > best_p {
            best_p = p;
            best_w = w;
        }
    }

    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best_w - step).max(step * 0.25), (best_w + step).min(max_omega));
    for _ in 0..60 {
        let a = hi - golden * (hi - lo);
        let b = lo + golden * (hi - lo);
        if spectral_power(times, &centered, a) >= spectral_power(times, &centered, b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    Some(0.5 * (lo + hi))
}
