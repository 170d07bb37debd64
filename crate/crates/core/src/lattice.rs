//! Channel and full-system specifications and their single-excitation
//! Hamiltonians.
//!
//! In the one-flipped-spin basis the XY chain
//! `H = sum_i w_i/2 (1 - Z_i) - sum_i J_i/2 (X_i X_{i+1} + Y_i Y_{i+1})`
//! becomes a hopping matrix with `w_i` on the diagonal and `-J_i` between
//! neighbours. Energies are in units of the clean channel coupling.

use serde::{Deserialize, Serialize};

use crate::disorder::{generate_sequence, DisorderKind, DisorderParams};
use crate::eigensolve::SymTridiagonal;
use crate::error::{invalid, Result};

/// The `N` inner spins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub n_sites: usize,
    /// Local fields, length `N`.
    pub onsite: Vec<f64>,
    /// Nearest-neighbour couplings, length `N - 1`.
    pub couplings: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(onsite: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        let spec = Self {
            n_sites: onsite.len(),
            onsite,
            couplings,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n_sites: usize, field: f64, coupling: f64) -> Result<Self> {
        Self::new(
            vec![field; n_sites],
            vec![coupling; n_sites.saturating_sub(1)],
        )
    }

    /// A channel whose fields (`OnSite`) or couplings (`Coupling`) are drawn
    /// from the correlated generator; the other set is clean (`J = 1` or
    /// `w = 0`). Coupling series are generated with length `N - 1` directly.
    pub fn disordered(
        kind: DisorderKind,
        alpha: f64,
        n_sites: usize,
        seed: u64,
        coupling_shift: f64,
    ) -> Result<Self> {
        match kind {
            DisorderKind::OnSite => {
                let seq = generate_sequence(&DisorderParams::new(alpha, n_sites, seed, kind))?;
                Self::new(seq.values, vec![1.0; n_sites.saturating_sub(1)])
            }
            DisorderKind::Coupling => {
                if n_sites < 3 {
                    return Err(invalid("n_sites", "coupling disorder needs at least 3 sites"));
                }
                let params =
                    DisorderParams::new(alpha, n_sites - 1, seed, kind).with_shift(coupling_shift);
                let seq = generate_sequence(&params)?;
                Self::new(vec![0.0; n_sites], seq.values)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(invalid("n_sites", "channel must have at least one site"));
        }
        if self.onsite.len() != self.n_sites {
            return Err(invalid(
                "onsite",
                format!("expected {} entries, got {}", self.n_sites, self.onsite.len()),
            ));
        }
        if self.couplings.len() != self.n_sites - 1 {
            return Err(invalid(
                "couplings",
                format!("expected {} entries, got {}", self.n_sites - 1, self.couplings.len()),
            ));
        }
        if let Some(i) = self.couplings.iter().position(|&j| j == 0.0 || !j.is_finite()) {
            return Err(invalid("couplings", format!("coupling {i} must be finite and nonzero")));
        }
        if self.onsite.iter().any(|w| !w.is_finite()) {
            return Err(invalid("onsite", "fields must be finite"));
        }
        Ok(())
    }

    /// `N x N` matrix: diagonal `w_n`, off-diagonal `-J_n`.
    pub fn matrix(&self) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.onsite.clone(),
            off: self.couplings.iter().map(|j| -j).collect(),
        }
    }

    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let pal = |v: &[f64]| v.iter().zip(v.iter().rev()).all(|(a, b)| (a - b).abs() <= tol);
        pal(&self.onsite) && pal(&self.couplings)
    }

    pub fn min_abs_coupling(&self) -> Option<f64> {
        self.couplings.iter().map(|j| j.abs()).reduce(f64::min)
    }
}

/// Sender, channel and receiver. Site order in the full matrix is
/// `(s, 1..N, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(flatten)]
    pub channel: ChannelSpec,
    pub omega_s: f64,
    pub omega_r: f64,
    pub g_s: f64,
    pub g_r: f64,
}

impl SystemSpec {
    pub fn new(channel: ChannelSpec, omega_s: f64, omega_r: f64, g_s: f64, g_r: f64) -> Result<Self> {
        let spec = Self {
            channel,
            omega_s,
            omega_r,
            g_s,
            g_r,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if !(self.g_s.is_finite() && self.g_s > 0.0) {
            return Err(invalid("g_s", "must be positive"));
        }
        if !(self.g_r.is_finite() && self.g_r > 0.0) {
            return Err(invalid("g_r", "must be positive"));
        }
        if !(self.omega_s.is_finite() && self.omega_r.is_finite()) {
            return Err(invalid("omega_s", "sender and receiver fields must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.channel.n_sites + 2
    }

    pub fn sender_index(&self) -> usize {
        0
    }

    pub fn receiver_index(&self) -> usize {
        self.channel.n_sites + 1
    }

    /// `(N+2) x (N+2)` matrix with end couplings `-g_s`, `-g_r`.
    pub fn matrix(&self) -> SymTridiagonal {
        let ch = &self.channel;
        let mut diag = Vec::with_capacity(ch.n_sites + 2);
        diag.push(self.omega_s);
        diag.extend_from_slice(&ch.onsite);
        diag.push(self.omega_r);

        let mut off = Vec::with_capacity(ch.n_sites + 1);
        off.push(-self.g_s);
        off.extend(ch.couplings.iter().map(|j| -j));
        off.push(-self.g_r);
        SymTridiagonal { diag, off }
    }

    /// `max(g_s, g_r) / min |J_n|`; small values mean the perturbative
    /// treatment is trustworthy. `None` for a single-site channel.
    pub fn perturbative_ratio(&self) -> Option<f64> {
        self.channel
            .min_abs_coupling()
            .map(|j| self.g_s.max(self.g_r) / j)
    }
}

pub fn channel_matrix(spec: &ChannelSpec) -> SymTridiagonal {
    spec.matrix()
}

pub fn full_matrix(spec: &SystemSpec) -> SymTridiagonal {
    spec.matrix()
}
