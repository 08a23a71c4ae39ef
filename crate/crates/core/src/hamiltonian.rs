//! Hermitian generators: Förster chains, rotating-frame laser drives and
//! biexcitonic blocking shifts.
//!
//! Laser driving is always expressed in the rotating-wave frame, where the
//! optical carrier has been removed and a drive contributes a per-site
//! detuning on occupied sites plus `Ω · (raise + lower)`. Under that
//! convention a resonant π pulse on a single dot takes `πħ / (2Ω)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix};
use crate::model::{BasisIndex, ChainSpec, Sector};

/// Pulse envelope; `Gaussian` is centred on the pulse window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Rect,
    Gaussian { sigma_ps: f64 },
}

impl Envelope {
    fn value(&self, t: f64, start: f64, duration: f64) -> f64 {
        match *self {
            Envelope::Rect => 1.0,
            Envelope::Gaussian { sigma_ps } => {
                let centre = start + duration / 2.0;
                let x = (t - centre) / sigma_ps;
                (-0.5 * x * x).exp()
            }
        }
    }
}

/// A laser pulse on a set of sites: Rabi coupling Ω, per-site detuning and a
/// time window. The drive vanishes outside `[start, start + duration]`.
#[derive(Debug, Clone)]
pub struct DriveSpec {
    pub target_sites: Vec<usize>,
    pub rabi_mev: f64,
    pub detuning_mev: Vec<f64>,
    pub envelope: Envelope,
    pub start_ps: f64,
    pub duration_ps: f64,
}

impl DriveSpec {
    pub fn new(
        target_sites: Vec<usize>,
        rabi_mev: f64,
        detuning_mev: Vec<f64>,
        envelope: Envelope,
        start_ps: f64,
        duration_ps: f64,
    ) -> Result<Self> {
        if rabi_mev < 0.0 {
            return Err(Error::InvalidInput(format!(
                "negative Rabi coupling {rabi_mev}"
            )));
        }
        if duration_ps <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "pulse duration {duration_ps} <= 0"
            )));
        }
        if detuning_mev.len() != target_sites.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} detunings for {} target sites",
                detuning_mev.len(),
                target_sites.len()
            )));
        }
        Ok(Self {
            target_sites,
            rabi_mev,
            detuning_mev,
            envelope,
            start_ps,
            duration_ps,
        })
    }

    /// Resonant rectangular pulse on every listed site.
    pub fn resonant_rect(
        sites: Vec<usize>,
        rabi_mev: f64,
        start_ps: f64,
        duration_ps: f64,
    ) -> Result<Self> {
        let n = sites.len();
        Self::new(
            sites,
            rabi_mev,
            vec![0.0; n],
            Envelope::Rect,
            start_ps,
            duration_ps,
        )
    }

    /// Half-open activity window, so abutting pulses never overlap at the
    /// shared edge.
    pub fn active_at(&self, t: f64) -> bool {
        t >= self.start_ps && t < self.start_ps + self.duration_ps
    }

    pub fn end_ps(&self) -> f64 {
        self.start_ps + self.duration_ps
    }
}

/// A biexcitonic shift applied to a set of sites while control excitons are
/// present: each occupied blocked site gains `ΔE_XX` of transition energy.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub blocked_sites: Vec<usize>,
    pub shift_mev: f64,
}

impl BlockSpec {
    pub fn new(blocked_sites: Vec<usize>, shift_mev: f64) -> Self {
        Self {
            blocked_sites,
            shift_mev,
        }
    }

    /// The configuration used on buses: every site except the two end dots.
    pub fn interior(n_sites: usize, shift_mev: f64) -> Self {
        let blocked = if n_sites > 2 {
            (1..n_sites - 1).collect()
        } else {
            Vec::new()
        };
        Self::new(blocked, shift_mev)
    }
}

fn check_sites(sites: &[usize], n_dots: usize) -> Result<()> {
    if let Some(&bad) = sites.iter().find(|&&s| s >= n_dots) {
        return Err(Error::InvalidInput(format!(
            "site {bad} outside the {n_dots}-dot register"
        )));
    }
    Ok(())
}

/// The chain generator: site energies on the diagonal and Förster hops
/// between adjacent sites. Commutes with the total exciton number.
pub fn chain_hamiltonian(chain: &ChainSpec, basis: &Arc<BasisIndex>) -> Result<HermitianMatrix> {
    if chain.len() != basis.n_dots() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dot chain over a {}-dot basis",
            chain.len(),
            basis.n_dots()
        )));
    }
    let dim = basis.dim();
    let mut m = CMatrix::zeros((dim, dim));
    for (idx, word) in basis.words().enumerate() {
        let mut diag = 0.0;
        for (site, dot) in chain.dots().iter().enumerate() {
            if word & (1 << site) != 0 {
                diag += dot.exciton_energy_mev;
            }
        }
        m[[idx, idx]] = Complex64::new(diag, 0.0);

        for (bond, &v) in chain.couplings().iter().enumerate() {
            let here = 1u64 << bond;
            let next = 1u64 << (bond + 1);
            // Hop from `bond` to `bond + 1`; the reverse element comes from
            // conjugate symmetry.
            if word & here != 0 && word & next == 0 {
                let hopped = (word & !here) | next;
                if let Some(jdx) = basis.index_of(hopped) {
                    m[[jdx, idx]] += Complex64::new(v, 0.0);
                    m[[idx, jdx]] += Complex64::new(v, 0.0);
                }
            }
        }
    }
    Ok(HermitianMatrix::new_unchecked(m))
}

/// Adds the biexcitonic shift for every occupied blocked site to the
/// diagonal, leaving couplings untouched.
pub fn apply_block(
    h: &HermitianMatrix,
    basis: &Arc<BasisIndex>,
    block: &BlockSpec,
) -> Result<HermitianMatrix> {
    if h.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dim matrix over a {}-state basis",
            h.dim(),
            basis.dim()
        )));
    }
    check_sites(&block.blocked_sites, basis.n_dots())?;
    let mut m = h.array().clone();
    for (idx, word) in basis.words().enumerate() {
        let occupied = block
            .blocked_sites
            .iter()
            .filter(|&&s| word & (1 << s) != 0)
            .count();
        if occupied > 0 {
            m[[idx, idx]] += Complex64::new(occupied as f64 * block.shift_mev, 0.0);
        }
    }
    Ok(HermitianMatrix::new_unchecked(m))
}

/// Rotating-frame drive generator at time `t`: detuning on occupied target
/// sites plus `envelope(t) · Ω · (raise + lower)` per site. Returns the zero
/// matrix outside the pulse window.
///
/// The raise/lower terms change the exciton number, so the basis must close
/// under them: `Exactly(k)` sectors are rejected.
pub fn drive_hamiltonian(
    drive: &DriveSpec,
    basis: &Arc<BasisIndex>,
    t: f64,
) -> Result<HermitianMatrix> {
    let (coupling, detune) = drive_parts(drive, basis)?;
    let mut m = CMatrix::zeros((basis.dim(), basis.dim()));
    accumulate_drive(&mut m, drive, &coupling, &detune, t);
    Ok(HermitianMatrix::new_unchecked(m))
}

/// Time-independent pieces of a drive: the `Ω · (raise + lower)` coupling and
/// the occupied-site detuning diagonal.
fn drive_parts(drive: &DriveSpec, basis: &Arc<BasisIndex>) -> Result<(CMatrix, CMatrix)> {
    if matches!(basis.sector(), Sector::Exactly(_)) {
        return Err(Error::SectorViolation(
            "a drive changes the exciton number; use an All or AtMost basis".into(),
        ));
    }
    check_sites(&drive.target_sites, basis.n_dots())?;
    let dim = basis.dim();
    let mut coupling = CMatrix::zeros((dim, dim));
    let mut detune = CMatrix::zeros((dim, dim));
    for (idx, word) in basis.words().enumerate() {
        for (&site, &delta) in drive.target_sites.iter().zip(&drive.detuning_mev) {
            let bit = 1u64 << site;
            if word & bit != 0 {
                detune[[idx, idx]] += Complex64::new(delta, 0.0);
            } else if let Some(jdx) = basis.index_of(word | bit) {
                // Raise on `site`; the lowering element is the mirror image.
                coupling[[jdx, idx]] += Complex64::new(drive.rabi_mev, 0.0);
                coupling[[idx, jdx]] += Complex64::new(drive.rabi_mev, 0.0);
            }
        }
    }
    Ok((coupling, detune))
}

fn accumulate_drive(
    m: &mut CMatrix,
    drive: &DriveSpec,
    coupling: &CMatrix,
    detune: &CMatrix,
    t: f64,
) {
    if !drive.active_at(t) {
        return;
    }
    let env = drive.envelope.value(t, drive.start_ps, drive.duration_ps);
    m.zip_mut_with(detune, |a, &b| *a += b);
    m.zip_mut_with(coupling, |a, &b| *a += b * env);
}

/// A static chain plus any number of laser pulses, evaluated as one
/// generator `H(t)`. Drive matrices are assembled once at construction.
pub struct DrivenChain {
    basis: Arc<BasisIndex>,
    static_part: HermitianMatrix,
    drives: Vec<(DriveSpec, CMatrix, CMatrix)>,
}

impl DrivenChain {
    pub fn new(static_part: HermitianMatrix, basis: &Arc<BasisIndex>) -> Result<Self> {
        if static_part.dim() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dim static part over a {}-state basis",
                static_part.dim(),
                basis.dim()
            )));
        }
        Ok(Self {
            basis: Arc::clone(basis),
            static_part,
            drives: Vec::new(),
        })
    }

    pub fn with_drive(mut self, drive: DriveSpec) -> Result<Self> {
        let (coupling, detune) = drive_parts(&drive, &self.basis)?;
        self.drives.push((drive, coupling, detune));
        Ok(self)
    }

    pub fn basis(&self) -> &Arc<BasisIndex> {
        &self.basis
    }

    /// Latest pulse end, the natural end of the driven evolution.
    pub fn last_pulse_end(&self) -> f64 {
        self.drives
            .iter()
            .map(|(d, _, _)| d.end_ps())
            .fold(0.0, f64::max)
    }

    /// First pulse edge (start or end) strictly after `t`; integrator
    /// substeps snap to these so a rectangular switch never lands inside a
    /// step.
    pub fn next_edge_after(&self, t: f64) -> Option<f64> {
        self.drives
            .iter()
            .flat_map(|(d, _, _)| [d.start_ps, d.end_ps()])
            .filter(|&edge| edge > t + 1e-12)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn at(&self, t: f64) -> HermitianMatrix {
        let mut m = self.static_part.array().clone();
        for (drive, coupling, detune) in &self.drives {
            accumulate_drive(&mut m, drive, coupling, detune, t);
        }
        HermitianMatrix::new_unchecked(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermiticity_deviation;
    use crate::model::Sector;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn two_site_single_excitation_matrix() {
        let chain = ChainSpec::uniform(2, 0.2).unwrap();
        let basis = BasisIndex::build(2, Sector::Exactly(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let m = h.array();
        assert_eq!(m[[0, 0]], re(0.0));
        assert_eq!(m[[0, 1]], re(0.2));
        assert_eq!(m[[1, 0]], re(0.2));
        assert_eq!(m[[1, 1]], re(0.0));
    }

    #[test]
    fn three_site_eigenvalues() {
        // Closed form for the 3x3 tridiagonal chain: {-sqrt(2) V, 0, sqrt(2) V}.
        let v = 0.2;
        let chain = ChainSpec::uniform(3, v).unwrap();
        let basis = BasisIndex::build(3, Sector::Exactly(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let (vals, _) = h.eigh().unwrap();
        let expect = [-(2.0_f64).sqrt() * v, 0.0, (2.0_f64).sqrt() * v];
        for (got, want) in vals.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn chain_commutes_with_excitation_number() {
        // Brute force: every nonzero element of H connects words with equal
        // exciton number, which is [H, N] = 0 elementwise.
        let chain = ChainSpec::uniform(5, 0.2).unwrap();
        let basis = BasisIndex::build(5, Sector::All).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let m = h.array();
        for (i, wi) in basis.words().enumerate() {
            for (j, wj) in basis.words().enumerate() {
                if m[[i, j]].norm() > 0.0 {
                    assert_eq!(wi.count_ones(), wj.count_ones(), "({i},{j}) mixes sectors");
                }
            }
        }
    }

    #[test]
    fn block_shifts_interior_diagonal() {
        let chain = ChainSpec::uniform(5, 0.2).unwrap();
        let basis = BasisIndex::build(5, Sector::Exactly(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let blocked = apply_block(&h, &basis, &BlockSpec::interior(5, 4.0)).unwrap();
        let m = blocked.array();
        let diag: Vec<f64> = (0..5).map(|i| m[[i, i]].re).collect();
        assert_eq!(diag, vec![0.0, 4.0, 4.0, 4.0, 0.0]);
        // Couplings untouched.
        assert_eq!(m[[0, 1]], re(0.2));
        assert_eq!(m[[3, 4]], re(0.2));
    }

    #[test]
    fn zero_shift_is_identity() {
        let chain = ChainSpec::uniform(4, 0.3).unwrap();
        let basis = BasisIndex::build(4, Sector::AtMost(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let same = apply_block(&h, &basis, &BlockSpec::interior(4, 0.0)).unwrap();
        assert_eq!(h.array(), same.array());
    }

    #[test]
    fn single_end_site_block() {
        let chain = ChainSpec::uniform(3, 0.2).unwrap();
        let basis = BasisIndex::build(3, Sector::Exactly(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let blocked = apply_block(&h, &basis, &BlockSpec::new(vec![2], 1.5)).unwrap();
        let m = blocked.array();
        assert_eq!(m[[0, 0]], re(0.0));
        assert_eq!(m[[1, 1]], re(0.0));
        assert_eq!(m[[2, 2]], re(1.5));
    }

    #[test]
    fn single_dot_drive_matrix() {
        let basis = BasisIndex::build(1, Sector::All).unwrap();
        let drive = DriveSpec::resonant_rect(vec![0], 2.0, 0.0, 1.0).unwrap();
        let h = drive_hamiltonian(&drive, &basis, 0.5).unwrap();
        let m = h.array();
        assert_eq!(m[[0, 0]], re(0.0));
        assert_eq!(m[[0, 1]], re(2.0));
        assert_eq!(m[[1, 0]], re(2.0));
        assert_eq!(m[[1, 1]], re(0.0));
        // Outside the window the drive vanishes.
        let off = drive_hamiltonian(&drive, &basis, 1.5).unwrap();
        assert!(off.array().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn drive_is_linear_in_rabi() {
        let basis = BasisIndex::build(3, Sector::All).unwrap();
        let d1 = DriveSpec::resonant_rect(vec![0, 1, 2], 1.0, 0.0, 1.0).unwrap();
        let d3 = DriveSpec::resonant_rect(vec![0, 1, 2], 3.0, 0.0, 1.0).unwrap();
        let h1 = drive_hamiltonian(&d1, &basis, 0.5).unwrap();
        let h3 = drive_hamiltonian(&d3, &basis, 0.5).unwrap();
        let scaled = h1.scaled(3.0);
        let err = (h3.array() - scaled.array())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-14);
    }

    #[test]
    fn drive_rejects_fixed_number_sector() {
        let basis = BasisIndex::build(3, Sector::Exactly(1)).unwrap();
        let drive = DriveSpec::resonant_rect(vec![0], 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            drive_hamiltonian(&drive, &basis, 0.5),
            Err(Error::SectorViolation(_))
        ));
    }

    #[test]
    fn constructed_matrices_are_hermitian() {
        let chain = ChainSpec::uniform(4, 0.2).unwrap();
        let basis = BasisIndex::build(4, Sector::All).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        assert!(hermiticity_deviation(h.array()) <= 1e-12);
        let drive = DriveSpec::new(
            vec![0, 2],
            0.7,
            vec![0.1, -0.4],
            Envelope::Gaussian { sigma_ps: 0.3 },
            0.0,
            2.0,
        )
        .unwrap();
        let hd = drive_hamiltonian(&drive, &basis, 0.9).unwrap();
        assert!(hermiticity_deviation(hd.array()) <= 1e-12);
        let blocked = apply_block(&h, &basis, &BlockSpec::interior(4, 4.0)).unwrap();
        assert!(hermiticity_deviation(blocked.array()) <= 1e-12);
    }

    #[test]
    fn gaussian_envelope_peaks_at_centre() {
        let env = Envelope::Gaussian { sigma_ps: 0.5 };
        assert!((env.value(1.0, 0.0, 2.0) - 1.0).abs() < 1e-15);
        assert!(env.value(0.2, 0.0, 2.0) < 1.0);
    }
}
