//! Eigendecomposition of real symmetric tridiagonal matrices by the
//! implicitly shifted QL algorithm.
//!
//! Rotations are accumulated only into the rows of the eigenvector matrix
//! that are requested, so the sender/receiver overlaps `<1|E_k>` and
//! `<N|E_k>` cost `O(N^2)` instead of the `O(N^3)` needed for the full
//! eigenvector matrix.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

/// Adjacent eigenvalues closer than this are flagged as near-degenerate.
pub const DEGENERACY_GAP: f64 = 1e-12;

const SIGN_THRESHOLD: f64 = 1e-12;

/// Largest accepted entry magnitude; keeps `f^2 + g^2` in the QL rotations
/// away from overflow.
pub const MAX_ENTRY: f64 = 1e150;

/// Symmetric tridiagonal matrix. `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("diag", "matrix must have dimension >= 1"));
        }
        if off.len() + 1 != diag.len() {
            return Err(invalid(
                "off",
                format!("expected {} off-diagonal entries, got {}", diag.len() - 1, off.len()),
            ));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (i, &d) in self.diag.iter().enumerate() {
            m[i][i] = d;
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[i][i + 1] = e;
            m[i + 1][i] = e;
        }
        m
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

/// Energies and the overlaps of each mode with the two chain ends.
pub trait ModeOverlaps {
    fn energies(&self) -> &[f64];
    /// `a_sk = <1|E_k>`, overlap with the first site.
    fn overlaps_s(&self) -> &[f64];
    /// `a_rk = <N|E_k>`, overlap with the last site.
    fn overlaps_r(&self) -> &[f64];

    fn len(&self) -> usize {
        self.energies().len()
    }

    fn is_empty(&self) -> bool {
        self.energies().is_empty()
    }
}

/// Full eigendecomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is `|E_k>` in the site basis. The first component
    /// with magnitude above `1e-12` is positive.
    pub eigenvectors: Vec<Vec<f64>>,
    pub edge_overlaps_s: Vec<f64>,
    pub edge_overlaps_r: Vec<f64>,
    /// Some adjacent gap is below [`DEGENERACY_GAP`].
    pub near_degenerate: bool,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    /// Largest `|<E_j|E_k> - delta_jk|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                let dot: f64 = self.eigenvectors[j]
                    .iter()
                    .zip(&self.eigenvectors[k])
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Largest `||H v_k - E_k v_k|| / max(1, |E_k|)`.
    pub fn max_relative_residual(&self, matrix: &SymTridiagonal) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&e, v)| {
                let hv = matrix.apply(v);
                let r: f64 = hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum();
                r.sqrt() / e.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

impl ModeOverlaps for Spectrum {
    fn energies(&self) -> &[f64] {
        &self.eigenvalues
    }
    fn overlaps_s(&self) -> &[f64] {
        &self.edge_overlaps_s
    }
    fn overlaps_r(&self) -> &[f64] {
        &self.edge_overlaps_r
    }
}

/// Eigenvalues plus edge overlaps only. Each mode's sign is fixed so that
/// `a_sk > 0` (or `a_rk > 0` when `a_sk` vanishes); products `a_sk a_rk`
/// and squares match [`Spectrum`] exactly up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpectrum {
    pub eigenvalues: Vec<f64>,
    pub edge_overlaps_s: Vec<f64>,
    pub edge_overlaps_r: Vec<f64>,
    pub near_degenerate: bool,
}

impl ModeOverlaps for EdgeSpectrum {
    fn energies(&self) -> &[f64] {
        &self.eigenvalues
    }
    fn overlaps_s(&self) -> &[f64] {
        &self.edge_overlaps_s
    }
    fn overlaps_r(&self) -> &[f64] {
        &self.edge_overlaps_r
    }
}

/// Runs implicit QL on `(d, e)` in place, rotating the supplied rows of the
/// eigenvector matrix. On return `d` holds the (unsorted) eigenvalues and
/// `rows[i][k]` the component of eigenvector `k` on the site that row `i`
/// started as.
fn implicit_ql(d: &mut [f64], off: &[f64], rows: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    index: l,
                    residual: e[l].abs(),
                });
            }

            // Wilkinson-type shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                // unscaled norm: safe because entries are capped at MAX_ENTRY
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn unit_row(n: usize, site: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    row[site] = 1.0;
    row
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn has_small_gap(sorted: &[f64]) -> bool {
    sorted.windows(2).any(|w| w[1] - w[0] < DEGENERACY_GAP)
}

fn check_finite(matrix: &SymTridiagonal) -> Result<()> {
    if matrix.diag.is_empty() || matrix.off.len() + 1 != matrix.diag.len() {
        return Err(invalid("matrix", "inconsistent tridiagonal dimensions"));
    }
    // negated so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if matrix.diag.iter().chain(&matrix.off).any(|x| !(x.abs() <= MAX_ENTRY)) {
        return Err(invalid("matrix", "entries must be finite and at most 1e150 in magnitude"));
    }
    Ok(())
}

/// Full eigendecomposition with ascending eigenvalues and orthonormal,
/// sign-fixed eigenvectors.
pub fn diagonalize(matrix: &SymTridiagonal) -> Result<Spectrum> {
    check_finite(matrix)?;
    let n = matrix.dim();
    let mut d = matrix.diag.clone();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| unit_row(n, i)).collect();
    implicit_ql(&mut d, &matrix.off, &mut rows)?;

    let order = ascending_order(&d);
    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = rows.iter().map(|row| row[k]).collect();
            if let Some(&lead) = v.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
                if lead < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            v
        })
        .collect();
    let edge_overlaps_s = eigenvectors.iter().map(|v| v[0]).collect();
    let edge_overlaps_r = eigenvectors.iter().map(|v| v[n - 1]).collect();
    let near_degenerate = has_small_gap(&eigenvalues);

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        edge_overlaps_s,
        edge_overlaps_r,
        near_degenerate,
    })
}

/// Eigenvalues and first/last eigenvector components only.
pub fn diagonalize_edges(matrix: &SymTridiagonal) -> Result<EdgeSpectrum> {
    check_finite(matrix)?;
    let n = matrix.dim();
    let mut d = matrix.diag.clone();
    let mut rows = if n == 1 {
        vec![unit_row(1, 0)]
    } else {
        vec![unit_row(n, 0), unit_row(n, n - 1)]
    };
    implicit_ql(&mut d, &matrix.off, &mut rows)?;
    let last = rows.len() - 1;

    let order = ascending_order(&d);
    let mut edge_overlaps_s = Vec::with_capacity(n);
    let mut edge_overlaps_r = Vec::with_capacity(n);
    for &k in &order {
        let (mut a_s, mut a_r) = (rows[0][k], rows[last][k]);
        let lead = if a_s.abs() > SIGN_THRESHOLD { a_s } else { a_r };
        if lead < 0.0 {
            a_s = -a_s;
            a_r = -a_r;
        }
        edge_overlaps_s.push(a_s);
        edge_overlaps_r.push(a_r);
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let near_degenerate = has_small_gap(&eigenvalues);
    Ok(EdgeSpectrum {
        eigenvalues,
        edge_overlaps_s,
        edge_overlaps_r,
        near_degenerate,
    })
}

/// Eigenvalues only.
pub fn eigenvalues(matrix: &SymTridiagonal) -> Result<Vec<f64>> {
    check_finite(matrix)?;
    let mut d = matrix.diag.clone();
    implicit_ql(&mut d, &matrix.off, &mut [])?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleHoleReport {
    /// `max_k |E_k + E_{N-1-k}|` over the ascending spectrum.
    pub max_pairing_error: f64,
    /// `min_k |E_k|`.
    pub zero_mode_gap: f64,
}

/// Checks the `E -> -E` pairing of a spectrum. Only meaningful for channels
/// with vanishing local fields, where the bipartite lattice makes the
/// spectrum symmetric about zero.
pub fn particle_hole_check<S: ModeOverlaps + ?Sized>(spectrum: &S) -> ParticleHoleReport {
    let e = spectrum.energies();
    let max_pairing_error = e
        .iter()
        .zip(e.iter().rev())
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);
    let zero_mode_gap = e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    ParticleHoleReport {
        max_pairing_error,
        zero_mode_gap,
    }
}

/// 0-based index of the mode closest to `target`; ties go to the lower index.
/// Returns `None` only for an empty spectrum.
pub fn select_mode<S: ModeOverlaps + ?Sized>(spectrum: &S, target: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &e) in spectrum.energies().iter().enumerate() {
        let dist = (e - target).abs();
        match best {
            Some((_, d)) if d <= dist => {}
            _ => best = Some((k, dist)),
        }
    }
    best.map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderKind;
    use crate::lattice::ChannelSpec;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn assert_invariants(m: &SymTridiagonal, s: &Spectrum) {
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.orthonormality_error() <= 1e-10, "orth {}", s.orthonormality_error());
        assert!(s.max_relative_residual(m) <= 1e-10, "resid {}", s.max_relative_residual(m));
        for v in &s.eigenvectors {
            let lead = v.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn open_chain_analytic_spectrum() {
        for n in [2usize, 3, 7, 20, 64] {
            let m = ChannelSpec::uniform(n, 0.0, 1.0).unwrap().matrix();
            let s = diagonalize(&m).unwrap();
            let mut exact: Vec<f64> = (1..=n)
                .map(|k| -2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos())
                .collect();
            exact.sort_by(f64::total_cmp);
            for (a, b) in s.eigenvalues.iter().zip(&exact) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
            assert_invariants(&m, &s);
        }
    }

    #[test]
    fn three_site_values() {
        let m = ChannelSpec::uniform(3, 0.0, 1.0).unwrap().matrix();
        let s = diagonalize(&m).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[2], std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn one_by_one() {
        let m = SymTridiagonal::new(vec![2.5], vec![]).unwrap();
        let s = diagonalize(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![2.5]);
        assert_eq!(s.eigenvectors, vec![vec![1.0]]);
        assert_eq!(s.edge_overlaps_s, vec![1.0]);
        assert_eq!(s.edge_overlaps_r, vec![1.0]);
    }

    #[test]
    fn mirror_symmetric_edges_match() {
        let onsite = vec![0.3, -1.2, 0.7, 2.0, 0.7, -1.2, 0.3];
        let couplings = vec![1.1, 0.8, 1.5, 1.5, 0.8, 1.1];
        let ch = ChannelSpec::new(onsite, couplings).unwrap();
        assert!(ch.is_mirror_symmetric(0.0));
        let s = diagonalize(&ch.matrix()).unwrap();
        for (a, b) in s.edge_overlaps_s.iter().zip(&s.edge_overlaps_r) {
            assert_abs_diff_eq!(a.abs(), b.abs(), epsilon = 1e-10);
        }
    }

    #[test]
    fn disordered_large_instances() {
        for (kind, n) in [(DisorderKind::OnSite, 201), (DisorderKind::Coupling, 201), (DisorderKind::OnSite, 150)] {
            for seed in 0..3 {
                let m = ChannelSpec::disordered(kind, 1.5, n, seed, 4.5).unwrap().matrix();
                let s = diagonalize(&m).unwrap();
                assert_invariants(&m, &s);
                assert_abs_diff_eq!(s.eigenvalues.iter().sum::<f64>(), m.trace(), epsilon = 1e-9 * n as f64);
            }
        }
    }

    #[test]
    fn edge_solver_matches_full() {
        let m = ChannelSpec::disordered(DisorderKind::OnSite, 0.5, 60, 9, 4.5).unwrap().matrix();
        let full = diagonalize(&m).unwrap();
        let edge = diagonalize_edges(&m).unwrap();
        for k in 0..60 {
            assert_abs_diff_eq!(full.eigenvalues[k], edge.eigenvalues[k], epsilon = 1e-12);
            assert_abs_diff_eq!(
                full.edge_overlaps_s[k] * full.edge_overlaps_r[k],
                edge.edge_overlaps_s[k] * edge.edge_overlaps_r[k],
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(full.edge_overlaps_s[k].abs(), edge.edge_overlaps_s[k].abs(), epsilon = 1e-12);
        }
        assert_eq!(eigenvalues(&m).unwrap().len(), 60);
    }

    #[test]
    fn already_diagonal_and_degenerate_input() {
        let m = SymTridiagonal::new(vec![1.0, 1.0, -3.0], vec![0.0, 0.0]).unwrap();
        let s = diagonalize(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![-3.0, 1.0, 1.0]);
        assert!(s.near_degenerate);
        assert_invariants(&m, &s);
    }

    #[test]
    fn non_finite_rejected() {
        let m = SymTridiagonal { diag: vec![f64::NAN, 0.0], off: vec![1.0] };
        assert!(diagonalize(&m).is_err());
        assert!(SymTridiagonal::new(vec![0.0; 3], vec![1.0]).is_err());
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
    }

    #[test]
    fn particle_hole_uniform_and_zero_mode() {
        let s = diagonalize(&ChannelSpec::uniform(4, 0.0, 1.0).unwrap().matrix()).unwrap();
        assert!(particle_hole_check(&s).max_pairing_error <= 1e-10);

        let ch = ChannelSpec::disordered(DisorderKind::Coupling, 0.0, 51, 17, 4.5).unwrap();
        let s = diagonalize(&ch.matrix()).unwrap();
        let rep = particle_hole_check(&s);
        assert!(rep.zero_mode_gap <= 1e-10, "gap {}", rep.zero_mode_gap);
        assert!(rep.max_pairing_error <= 1e-10);
        let k = select_mode(&s, 0.0).unwrap();
        assert!(s.eigenvalues[k].abs() <= 1e-10);
        assert_eq!(k, 25);
    }

    #[test]
    fn select_mode_rules() {
        let s = diagonalize(&ChannelSpec::uniform(3, 0.0, 1.0).unwrap().matrix()).unwrap();
        assert_eq!(select_mode(&s, 0.0), Some(1));
        assert_eq!(select_mode(&s, -10.0), Some(0));
        assert_eq!(select_mode(&s, 10.0), Some(2));
        // equidistant between E = 0 and E = sqrt 2: lower index wins
        let mid = s.eigenvalues[2] / 2.0;
        let tie = EdgeSpectrum {
            eigenvalues: vec![0.0, 2.0 * mid],
            edge_overlaps_s: vec![1.0, 0.0],
            edge_overlaps_r: vec![0.0, 1.0],
            near_degenerate: false,
        };
        assert_eq!(select_mode(&tie, mid), Some(0));
    }
}
