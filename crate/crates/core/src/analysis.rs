//! Localization diagnostics for channel eigenstates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderKind, DEFAULT_COUPLING_SHIFT};
use crate::eigensolve::{diagonalize, select_mode};
use crate::ensemble::derive_seed;
use crate::error::{invalid, Error, Result};
use crate::lattice::ChannelSpec;

const NORM_TOL: f64 = 1e-10;

/// Squared amplitudes `|<n|E_k'>|^2` of one channel mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionProfile {
    pub probabilities: Vec<f64>,
    /// 0-based.
    pub mode_index: usize,
    pub mode_energy: f64,
    pub alpha: Option<f64>,
    pub disorder_kind: Option<DisorderKind>,
    pub seed: Option<u64>,
}

impl WavefunctionProfile {
    pub fn participation_ratio(&self) -> Result<f64> {
        participation_ratio(&self.probabilities)
    }
}

/// Profile of the channel mode closest to `target`.
pub fn wavefunction_profile(spec: &ChannelSpec, target: f64) -> Result<WavefunctionProfile> {
    spec.validate()?;
    let spectrum = diagonalize(&spec.matrix())?;
    let k = select_mode(&spectrum, target).expect("validated channel has at least one mode");
    Ok(WavefunctionProfile {
        probabilities: spectrum.eigenvectors[k].iter().map(|a| a * a).collect(),
        mode_index: k,
        mode_energy: spectrum.eigenvalues[k],
        alpha: None,
        disorder_kind: None,
        seed: None,
    })
}

/// Profile for a freshly generated disordered channel, tagged with its
/// generation parameters.
pub fn disordered_profile(
    kind: DisorderKind,
    alpha: f64,
    n_sites: usize,
    seed: u64,
    target: f64,
) -> Result<WavefunctionProfile> {
    let channel = ChannelSpec::disordered(kind, alpha, n_sites, seed, DEFAULT_COUPLING_SHIFT)?;
    let mut profile = wavefunction_profile(&channel, target)?;
    profile.alpha = Some(alpha);
    profile.disorder_kind = Some(kind);
    profile.seed = Some(seed);
    Ok(profile)
}

/// `1 / sum_n p_n^2`, the number of effectively occupied sites.
pub fn participation_ratio(probabilities: &[f64]) -> Result<f64> {
    let total: f64 = probabilities.iter().sum();
    if probabilities.is_empty() || (total - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: total });
    }
    if probabilities.iter().any(|&p| p < 0.0) {
        return Err(invalid("probabilities", "must be non-negative"));
    }
    let ipr: f64 = probabilities.iter().map(|p| p * p).sum();
    Ok(ipr.recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticipationStats {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Seed of realization `r` in [`mean_participation`].
pub fn participation_seed(base: u64, kind: DisorderKind, n_sites: usize, alpha: f64, r: usize) -> u64 {
    let tag = match kind {
        DisorderKind::OnSite => 0,
        DisorderKind::Coupling => 1,
    };
    derive_seed(base, &[tag, n_sites as u64, alpha.to_bits(), r as u64])
}

/// Ensemble mean participation ratio of the mode nearest `target`.
pub fn mean_participation(
    kind: DisorderKind,
    alpha: f64,
    n_sites: usize,
    realizations: usize,
    base_seed: u64,
    target: f64,
) -> Result<ParticipationStats> {
    if realizations == 0 {
        return Err(invalid("realizations", "must be >= 1"));
    }
    let values: Vec<Result<f64>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let seed = participation_seed(base_seed, kind, n_sites, alpha, r);
            disordered_profile(kind, alpha, n_sites, seed, target)
                .and_then(|p| p.participation_ratio())
                .map_err(|e| Error::Realization {
                    seed,
                    source: Box::new(e),
                })
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ParticipationStats {
        mean,
        stderr: (var / n).sqrt(),
        n: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_three_site_central_mode() {
        let p = wavefunction_profile(&ChannelSpec::uniform(3, 0.0, 1.0).unwrap(), 0.0).unwrap();
        assert_eq!(p.mode_index, 1);
        assert_abs_diff_eq!(p.probabilities[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.probabilities[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.probabilities[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.participation_ratio().unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn ratio_examples() {
        assert_abs_diff_eq!(participation_ratio(&[0.25; 4]).unwrap(), 4.0, epsilon = 1e-12);
        assert_eq!(participation_ratio(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(participation_ratio(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn ratio_rejects_bad_input() {
        assert!(matches!(participation_ratio(&[0.5, 0.4]), Err(Error::NotNormalized { .. })));
        assert!(participation_ratio(&[]).is_err());
        assert!(participation_ratio(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn profiles_are_normalized() {
        for kind in [DisorderKind::OnSite, DisorderKind::Coupling] {
            let p = disordered_profile(kind, 1.0, 101, 5, 0.0).unwrap();
            assert_abs_diff_eq!(p.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            assert_eq!(p.seed, Some(5));
            let pr = p.participation_ratio().unwrap();
            assert!((1.0..=101.0).contains(&pr));
        }
    }

    #[test]
    fn correlated_couplings_delocalize_central_mode() {
        // averaged over a handful of seeds to keep the unit test robust
        let avg = |alpha| mean_participation(DisorderKind::Coupling, alpha, 201, 16, 3, 0.0).unwrap().mean;
        assert!(avg(3.0) > avg(0.0));
    }

    proptest! {
        #[test]
        fn ratio_between_one_and_len(raw in proptest::collection::vec(0.0f64..1.0, 1..60)) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let pr = participation_ratio(&p).unwrap();
            prop_assert!(pr >= 1.0 - 1e-12 && pr <= p.len() as f64 + 1e-9);
        }
    }
}
