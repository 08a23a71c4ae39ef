//! Unit conventions and the domain types shared by every other module.
//!
//! Energies are in meV, times in ps, rates in ps⁻¹ throughout the crate, so
//! experimental dot parameters can be used verbatim. The occupation qubit of
//! dot `i` is bit `i` of a basis word, with dot 0 as the least significant
//! bit; that ordering is fixed here and enforced by tests.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reduced Planck constant in meV·ps.
pub const HBAR: f64 = 0.6582119569;

/// Dense bases are capped at 2^20 states.
pub const MAX_BASIS_DIM: u128 = 1 << 20;

/// A single self-assembled dot: exciton transition energy and recombination
/// rate (Γ = 1/T₁, zero for an ideal dot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotSpec {
    pub exciton_energy_mev: f64,
    pub decay_rate_per_ps: f64,
}

impl DotSpec {
    pub fn new(exciton_energy_mev: f64, decay_rate_per_ps: f64) -> Result<Self> {
        if decay_rate_per_ps < 0.0 {
            return Err(Error::NegativeRate(decay_rate_per_ps));
        }
        Ok(Self {
            exciton_energy_mev,
            decay_rate_per_ps,
        })
    }
}

impl Default for DotSpec {
    fn default() -> Self {
        Self {
            exciton_energy_mev: 0.0,
            decay_rate_per_ps: 0.0,
        }
    }
}

/// An ordered chain of dots with nearest-neighbour Förster couplings.
///
/// `couplings[i]` couples dots `i` and `i + 1`, so its length is one less
/// than the number of dots.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    dots: Vec<DotSpec>,
    couplings_mev: Vec<f64>,
}

impl ChainSpec {
    pub fn new(dots: Vec<DotSpec>, couplings_mev: Vec<f64>) -> Result<Self> {
        if dots.is_empty() {
            return Err(Error::InvalidInput("a chain needs at least one dot".into()));
        }
        if couplings_mev.len() + 1 != dots.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dots require {} couplings, got {}",
                dots.len(),
                dots.len() - 1,
                couplings_mev.len()
            )));
        }
        Ok(Self {
            dots,
            couplings_mev,
        })
    }

    /// A chain of `n` identical dots (site energy 0 in the interaction
    /// picture) with equal couplings; the configuration used for buses.
    pub fn uniform(n: usize, coupling_mev: f64) -> Result<Self> {
        Self::new(
            vec![DotSpec::default(); n],
            vec![coupling_mev; n.saturating_sub(1)],
        )
    }

    /// Uniform chain with a common recombination rate on every dot.
    pub fn uniform_decaying(n: usize, coupling_mev: f64, gamma_per_ps: f64) -> Result<Self> {
        let dot = DotSpec::new(0.0, gamma_per_ps)?;
        Self::new(vec![dot; n], vec![coupling_mev; n.saturating_sub(1)])
    }

    pub fn len(&self) -> usize {
        self.dots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dots.is_empty()
    }

    pub fn dots(&self) -> &[DotSpec] {
        &self.dots
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings_mev
    }

    pub fn decay_rates(&self) -> Vec<f64> {
        self.dots.iter().map(|d| d.decay_rate_per_ps).collect()
    }
}

/// Restriction of the occupation basis to a total-exciton-number sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// All 2^n occupation states.
    All,
    /// States with exactly `k` excitons.
    Exactly(u32),
    /// States with at most `k` excitons.
    AtMost(u32),
}

impl Sector {
    fn admits(&self, word: u64) -> bool {
        match *self {
            Sector::All => true,
            Sector::Exactly(k) => word.count_ones() == k,
            Sector::AtMost(k) => word.count_ones() <= k,
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

enum IndexMap {
    /// `All` sector: index and word coincide.
    Full,
    /// Restricted sector: words in ascending order plus reverse lookup.
    Listed {
        words: Vec<u64>,
        lookup: HashMap<u64, usize>,
    },
}

/// Bijection between occupation words of a sector and dense vector indices.
///
/// Words are ordered by ascending numeric value, which is lexicographic in
/// the bit string read with dot 0 as the least significant bit. In the
/// `Exactly(1)` sector this puts the exciton-on-dot-`i` state at index `i`.
pub struct BasisIndex {
    n_dots: usize,
    sector: Sector,
    map: IndexMap,
    dim: usize,
}

impl BasisIndex {
    pub fn build(n_dots: usize, sector: Sector) -> Result<Arc<Self>> {
        if n_dots == 0 || n_dots > 64 {
            return Err(Error::InvalidInput(format!(
                "n_dots = {n_dots} outside the supported 1..=64 range"
            )));
        }
        let dim: u128 = match sector {
            Sector::All => 1u128 << n_dots,
            Sector::Exactly(k) => binomial(n_dots as u64, k as u64),
            Sector::AtMost(k) => (0..=k.min(n_dots as u32))
                .map(|j| binomial(n_dots as u64, j as u64))
                .sum(),
        };
        if dim > MAX_BASIS_DIM {
            return Err(Error::DimensionOverflow { dim });
        }
        if dim == 0 {
            return Err(Error::SectorViolation(format!(
                "sector {sector:?} is empty for {n_dots} dots"
            )));
        }
        let dim = dim as usize;
        let map = match sector {
            Sector::All => IndexMap::Full,
            _ => {
                let mut words = Vec::with_capacity(dim);
                // n_dots > 20 only ever reaches here with tiny sectors, where
                // enumerating bit patterns directly would be infeasible; walk
                // the sector words in ascending order instead.
                if n_dots <= 20 {
                    for w in 0..(1u64 << n_dots) {
                        if sector.admits(w) {
                            words.push(w);
                        }
                    }
                } else {
                    let max_k = match sector {
                        Sector::Exactly(k) | Sector::AtMost(k) => k,
                        Sector::All => unreachable!(),
                    };
                    words = enumerate_words(n_dots, max_k, sector);
                }
                let lookup = words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
                IndexMap::Listed { words, lookup }
            }
        };
        Ok(Arc::new(Self {
            n_dots,
            sector,
            map,
            dim,
        }))
    }

    pub fn n_dots(&self) -> usize {
        self.n_dots
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation word at a dense index.
    pub fn word(&self, index: usize) -> u64 {
        match &self.map {
            IndexMap::Full => index as u64,
            IndexMap::Listed { words, .. } => words[index],
        }
    }

    /// Dense index of an occupation word, if the word is in the sector.
    pub fn index_of(&self, word: u64) -> Option<usize> {
        match &self.map {
            IndexMap::Full => (word < self.dim as u64).then_some(word as usize),
            IndexMap::Listed { lookup, .. } => lookup.get(&word).copied(),
        }
    }

    pub fn contains(&self, word: u64) -> bool {
        self.index_of(word).is_some()
    }

    pub fn words(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.dim).map(|i| self.word(i))
    }
}

/// Ascending enumeration of words with up to `max_k` bits set among `n` bits,
/// filtered by the sector. Used only for wide registers with small sectors.
fn enumerate_words(n: usize, max_k: u32, sector: Sector) -> Vec<u64> {
    let mut words = Vec::new();
    let mut level: Vec<u64> = vec![0];
    if sector.admits(0) {
        words.push(0);
    }
    for _ in 0..max_k {
        let mut next = Vec::new();
        for &w in &level {
            let lowest_free = if w == 0 {
                0
            } else {
                63 - w.leading_zeros() + 1
            };
            for b in lowest_free..n as u32 {
                next.push(w | (1 << b));
            }
        }
        for &w in &next {
            if sector.admits(w) {
                words.push(w);
            }
        }
        level = next;
    }
    words.sort_unstable();
    words
}

/// Complex amplitudes over a [`BasisIndex`].
///
/// The norm may drop below one only under decaying evolution; Hermitian
/// propagation preserves it to 1e-9.
#[derive(Clone)]
pub struct StateVector {
    basis: Arc<BasisIndex>,
    amplitudes: Array1<Complex64>,
}

impl StateVector {
    /// Unit vector on one occupation word.
    pub fn basis_state(basis: &Arc<BasisIndex>, occupation: u64) -> Result<Self> {
        let idx = basis.index_of(occupation).ok_or_else(|| {
            Error::SectorViolation(format!(
                "occupation {occupation:#b} not in sector {:?}",
                basis.sector()
            ))
        })?;
        let mut amplitudes = Array1::zeros(basis.dim());
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            basis: Arc::clone(basis),
            amplitudes,
        })
    }

    /// State from raw amplitudes; the norm may not exceed 1 + 1e-9.
    pub fn from_amplitudes(basis: &Arc<BasisIndex>, amplitudes: Array1<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes over a dimension-{} basis",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-9 {
            return Err(Error::InvalidInput(format!("state norm {norm} exceeds 1")));
        }
        Ok(Self {
            basis: Arc::clone(basis),
            amplitudes,
        })
    }

    pub(crate) fn from_amplitudes_unchecked(
        basis: &Arc<BasisIndex>,
        amplitudes: Array1<Complex64>,
    ) -> Self {
        Self {
            basis: Arc::clone(basis),
            amplitudes,
        }
    }

    pub fn basis(&self) -> &Arc<BasisIndex> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude on one occupation word (zero if outside the sector).
    pub fn amplitude(&self, occupation: u64) -> Complex64 {
        self.basis
            .index_of(occupation)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    /// Probability of one occupation word.
    pub fn population(&self, occupation: u64) -> f64 {
        self.amplitude(occupation).norm_sqr()
    }

    /// Probability that dot `site` holds an exciton.
    pub fn site_population(&self, site: usize) -> f64 {
        let bit = 1u64 << site;
        self.basis
            .words()
            .zip(self.amplitudes.iter())
            .filter(|(w, _)| w & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|², the phase-free overlap.
    pub fn overlap_sqr(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}

impl std::fmt::Debug for StateVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateVector")
            .field("n_dots", &self.basis.n_dots())
            .field("sector", &self.basis.sector())
            .field("dim", &self.dim())
            .finish()
    }
}
