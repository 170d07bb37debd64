//! Seeded Monte Carlo averages of the sender/receiver concurrence over
//! disorder realizations.
//!
//! Every realization gets its own seed, derived from the base seed and its
//! position in the grid, so results do not depend on how work is split
//! across threads. Outcomes are written into fixed slots and reduced in
//! index order; a sweep produces bit-identical statistics for any worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderKind, DEFAULT_COUPLING_SHIFT};
use crate::effective::{three_level, two_level};
use crate::eigensolve::{diagonalize_edges, select_mode};
use crate::entanglement::{concurrence_three_level, concurrence_two_level};
use crate::error::{invalid, Error, Result};
use crate::lattice::ChannelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Outer spins off resonance; concurrence from `D / J'`.
    #[serde(alias = "twolevel", alias = "two-level")]
    TwoLevel,
    /// Outer spins on the channel mode nearest `target_energy`; concurrence
    /// from `eta`.
    #[serde(alias = "threelevel", alias = "three-level")]
    ThreeLevel,
}

/// What a sweep does when a coupling series dips to or below zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonPositivePolicy {
    /// Redraw the realization from `derive_seed(seed, &[attempt])`, up to
    /// [`MAX_REDRAWS`] times.
    #[default]
    Redraw,
    /// Fail the whole sweep, reporting the seed.
    Abort,
}

pub const MAX_REDRAWS: u64 = 16;

fn default_realizations() -> usize {
    500
}
fn default_g() -> f64 {
    0.01
}
fn default_shift() -> f64 {
    DEFAULT_COUPLING_SHIFT
}
fn default_alphas() -> Vec<f64> {
    (0..=16).map(|i| 0.25 * i as f64).collect()
}
fn default_omegas() -> Vec<f64> {
    (-20..=20).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub disorder_kind: DisorderKind,
    pub regime: Regime,
    pub n_sites: Vec<usize>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Outer-spin fields `w_s = w_r` for the frequency grid.
    #[serde(default = "default_omegas")]
    pub omegas: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_g")]
    pub g_s: f64,
    #[serde(default = "default_g")]
    pub g_r: f64,
    #[serde(default)]
    pub omega_s: f64,
    #[serde(default)]
    pub omega_r: f64,
    /// Mode-selection target for the three-level regime.
    #[serde(default)]
    pub target_energy: f64,
    #[serde(default = "default_shift")]
    pub coupling_shift: f64,
    /// `min_gap` below this counts toward `resonance_fraction`. Defaults to
    /// `10 max(g_s, g_r)^2`.
    #[serde(default)]
    pub resonance_threshold: Option<f64>,
    #[serde(default)]
    pub nonpositive_policy: NonPositivePolicy,
}

impl SweepConfig {
    pub fn new(disorder_kind: DisorderKind, regime: Regime, n_sites: Vec<usize>) -> Self {
        Self {
            disorder_kind,
            regime,
            n_sites,
            alphas: default_alphas(),
            omegas: default_omegas(),
            realizations: default_realizations(),
            base_seed: 0,
            g_s: default_g(),
            g_r: default_g(),
            omega_s: 0.0,
            omega_r: 0.0,
            target_energy: 0.0,
            coupling_shift: DEFAULT_COUPLING_SHIFT,
            resonance_threshold: None,
            nonpositive_policy: NonPositivePolicy::Redraw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be >= 1"));
        }
        if self.n_sites.is_empty() {
            return Err(invalid("n_sites", "at least one channel size required"));
        }
        let min_sites = match self.disorder_kind {
            DisorderKind::OnSite => 2,
            DisorderKind::Coupling => 3,
        };
        if let Some(&n) = self.n_sites.iter().find(|&&n| n < min_sites) {
            return Err(invalid("n_sites", format!("{n} is below the minimum of {min_sites}")));
        }
        if self.alphas.is_empty() {
            return Err(invalid("alphas", "at least one exponent required"));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid("alphas", "exponents must be finite and >= 0"));
        }
        if !(self.g_s.is_finite() && self.g_s > 0.0) {
            return Err(invalid("g_s", "must be positive"));
        }
        if !(self.g_r.is_finite() && self.g_r > 0.0) {
            return Err(invalid("g_r", "must be positive"));
        }
        if self.omegas.iter().chain([&self.omega_s, &self.omega_r, &self.target_energy]).any(|w| !w.is_finite()) {
            return Err(invalid("omegas", "frequencies must be finite"));
        }
        if !self.coupling_shift.is_finite() {
            return Err(invalid("coupling_shift", "must be finite"));
        }
        if let Some(t) = self.resonance_threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("resonance_threshold", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn resonance_threshold(&self) -> f64 {
        self.resonance_threshold
            .unwrap_or_else(|| 10.0 * self.g_s.max(self.g_r).powi(2))
    }
}

/// Statistics of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub mean_c: f64,
    /// Sample standard deviation (`n - 1` denominator; 0 when `n = 1`).
    pub std_c: f64,
    pub stderr_c: f64,
    pub n: usize,
    pub resonance_fraction: f64,
    pub degenerate_fraction: f64,
    /// Share of realizations whose first coupling draw was rejected.
    pub redrawn_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n_sites: usize,
    pub alpha: f64,
    pub omega_s: f64,
    pub omega_r: f64,
    pub stats: PointStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub points: Vec<GridPoint>,
}

impl EnsembleStats {
    pub fn find(&self, n_sites: usize, alpha: f64) -> Option<&GridPoint> {
        self.points
            .iter()
            .find(|p| p.n_sites == n_sites && p.alpha == alpha)
    }

    pub fn find_omega(&self, alpha: f64, omega: f64) -> Option<&GridPoint> {
        self.points
            .iter()
            .find(|p| p.alpha == alpha && p.omega_s == omega)
    }

    /// CSV with header `n_sites,alpha,mean_c,std_c,stderr_c,n,resonance_fraction`.
    pub fn alpha_sweep_csv(&self) -> String {
        let mut out = String::from("n_sites,alpha,mean_c,std_c,stderr_c,n,resonance_fraction\n");
        for p in &self.points {
            let s = &p.stats;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.n_sites, p.alpha, s.mean_c, s.std_c, s.stderr_c, s.n, s.resonance_fraction
            ));
        }
        out
    }

    /// CSV with header `alpha,omega,mean_c,stderr_c,n`.
    pub fn omega_grid_csv(&self) -> String {
        let mut out = String::from("alpha,omega,mean_c,stderr_c,n\n");
        for p in &self.points {
            let s = &p.stats;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.alpha, p.omega_s, s.mean_c, s.stderr_c, s.n
            ));
        }
        out
    }
}

/// One step of the splitmix64 generator.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `words` into `base` with splitmix64:
/// `h_0 = splitmix64(base)`, `h_{i+1} = splitmix64(h_i ^ words[i])`.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(base), |h, &w| splitmix64(h ^ w))
}

/// Seed of realization `r` at `(n_sites, alpha_index)` in an alpha sweep.
pub fn alpha_sweep_seed(base: u64, n_sites: usize, alpha_index: usize, r: usize) -> u64 {
    derive_seed(base, &[n_sites as u64, alpha_index as u64, r as u64])
}

/// Seed of realization `r` at `(alpha_index, omega_index)` of a frequency
/// grid on an `n_sites` channel.
pub fn omega_grid_seed(base: u64, n_sites: usize, alpha_index: usize, omega_index: usize, r: usize) -> u64 {
    derive_seed(
        base,
        &[n_sites as u64, alpha_index as u64, omega_index as u64, r as u64],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub concurrence: f64,
    /// `None` in the three-level regime.
    pub min_gap: Option<f64>,
    pub near_degenerate: bool,
    /// Rejected coupling draws before this realization.
    pub redraws: u64,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    point: usize,
    seed: u64,
}

/// Runs the concurrence pipeline for a single disorder realization.
pub fn realization(
    config: &SweepConfig,
    n_sites: usize,
    alpha: f64,
    omega_s: f64,
    omega_r: f64,
    seed: u64,
) -> Result<Outcome> {
    let mut redraws = 0;
    let channel = loop {
        let draw_seed = if redraws == 0 { seed } else { derive_seed(seed, &[redraws]) };
        match ChannelSpec::disordered(config.disorder_kind, alpha, n_sites, draw_seed, config.coupling_shift) {
            Err(Error::NonPositiveCoupling { .. })
                if config.nonpositive_policy == NonPositivePolicy::Redraw && redraws < MAX_REDRAWS =>
            {
                redraws += 1;
            }
            other => break other?,
        }
    };
    let spectrum = diagonalize_edges(&channel.matrix())?;
    match config.regime {
        Regime::TwoLevel => {
            let eff = two_level(&spectrum, omega_s, omega_r, config.g_s, config.g_r)?;
            Ok(Outcome {
                concurrence: concurrence_two_level(eff.delta, eff.j_eff).value,
                min_gap: Some(eff.min_gap),
                near_degenerate: spectrum.near_degenerate,
                redraws,
            })
        }
        Regime::ThreeLevel => {
            let mode = select_mode(&spectrum, config.target_energy)
                .ok_or_else(|| invalid("n_sites", "empty spectrum"))?;
            let eff = three_level(&spectrum, mode, config.g_s, config.g_r)?;
            Ok(Outcome {
                concurrence: concurrence_three_level(eff.eta),
                min_gap: None,
                near_degenerate: spectrum.near_degenerate,
                redraws,
            })
        }
    }
}

pub fn summarize(outcomes: &[Outcome], resonance_threshold: f64) -> PointStats {
    let n = outcomes.len();
    let nf = n as f64;
    let mean_c = outcomes.iter().map(|o| o.concurrence).sum::<f64>() / nf;
    let var = if n > 1 {
        outcomes
            .iter()
            .map(|o| (o.concurrence - mean_c).powi(2))
            .sum::<f64>()
            / (nf - 1.0)
    } else {
        0.0
    };
    let std_c = var.sqrt();
    let resonant = outcomes
        .iter()
        .filter(|o| o.min_gap.is_some_and(|g| g < resonance_threshold))
        .count();
    let degenerate = outcomes.iter().filter(|o| o.near_degenerate).count();
    let redrawn = outcomes.iter().filter(|o| o.redraws > 0).count();
    PointStats {
        mean_c,
        std_c,
        stderr_c: std_c / nf.sqrt(),
        n,
        resonance_fraction: resonant as f64 / nf,
        degenerate_fraction: degenerate as f64 / nf,
        redrawn_fraction: redrawn as f64 / nf,
    }
}

fn run_points(config: &SweepConfig, points: Vec<GridPoint>, tasks: Vec<Task>) -> Result<EnsembleStats> {
    let outcomes: Vec<Result<Outcome>> = tasks
        .par_iter()
        .map(|task| {
            let p = &points[task.point];
            realization(config, p.n_sites, p.alpha, p.omega_s, p.omega_r, task.seed).map_err(|e| {
                Error::Realization {
                    seed: task.seed,
                    source: Box::new(e),
                }
            })
        })
        .collect();

    let mut slots = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        slots.push(o?);
    }
    let threshold = config.resonance_threshold();
    let per_point = config.realizations;
    let points = points
        .into_iter()
        .zip(slots.chunks(per_point))
        .map(|(p, chunk)| GridPoint {
            stats: summarize(chunk, threshold),
            ..p
        })
        .collect();
    Ok(EnsembleStats { points })
}

const EMPTY_STATS: PointStats = PointStats {
    mean_c: 0.0,
    std_c: 0.0,
    stderr_c: 0.0,
    n: 0,
    resonance_fraction: 0.0,
    degenerate_fraction: 0.0,
    redrawn_fraction: 0.0,
};

/// Averages over `n_sites x alphas` with `w_s`, `w_r` from the config.
/// Points are ordered by channel size, then exponent.
pub fn run_alpha_sweep(config: &SweepConfig) -> Result<EnsembleStats> {
    config.validate()?;
    let mut points = Vec::new();
    let mut tasks = Vec::new();
    for &n in &config.n_sites {
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            let point = points.len();
            points.push(GridPoint {
                n_sites: n,
                alpha,
                omega_s: config.omega_s,
                omega_r: config.omega_r,
                stats: EMPTY_STATS,
            });
            tasks.extend((0..config.realizations).map(|r| Task {
                point,
                seed: alpha_sweep_seed(config.base_seed, n, ai, r),
            }));
        }
    }
    run_points(config, points, tasks)
}

/// Averages over `alphas x omegas` with `w_s = w_r = w` on the first channel
/// size of the config. Points are ordered by exponent, then frequency.
pub fn run_omega_alpha_grid(config: &SweepConfig) -> Result<EnsembleStats> {
    config.validate()?;
    if config.regime != Regime::TwoLevel {
        return Err(invalid("regime", "the frequency grid uses the two-level regime"));
    }
    if config.omegas.is_empty() {
        return Err(invalid("omegas", "at least one frequency required"));
    }
    let n = config.n_sites[0];
    let mut points = Vec::new();
    let mut tasks = Vec::new();
    for (ai, &alpha) in config.alphas.iter().enumerate() {
        for (oi, &omega) in config.omegas.iter().enumerate() {
            let point = points.len();
            points.push(GridPoint {
                n_sites: n,
                alpha,
                omega_s: omega,
                omega_r: omega,
                stats: EMPTY_STATS,
            });
            tasks.extend((0..config.realizations).map(|r| Task {
                point,
                seed: omega_grid_seed(config.base_seed, n, ai, oi, r),
            }));
        }
    }
    run_points(config, points, tasks)
}

/// Runs `f` on a dedicated pool of `threads` workers (`None` uses the
/// global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("threads", "must be >= 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| invalid("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
