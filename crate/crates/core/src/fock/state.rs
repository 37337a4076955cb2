use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{FockEngine, ModeIndex, StatisticsKind};

/// Occupied modes as a sorted multiset of linear indices. Fermionic states
/// never repeat an index.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<u16>);

impl Occupation {
    pub fn vacuum() -> Self {
        Occupation(Vec::new())
    }

    /// From any list of mode indices; the list is sorted.
    pub fn from_modes(mut modes: Vec<u16>) -> Self {
        modes.sort_unstable();
        Occupation(modes)
    }

    pub fn modes(&self) -> &[u16] {
        &self.0
    }

    pub fn particles(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self, mode: u16) -> usize {
        let lo = self.0.partition_point(|&m| m < mode);
        let hi = self.0.partition_point(|&m| m <= mode);
        hi - lo
    }
}

/// Sparse superposition of occupation-number kets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FockState {
    amplitudes: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    pub fn zero() -> Self {
        FockState::default()
    }

    pub fn vacuum() -> Self {
        FockState::basis(Occupation::vacuum())
    }

    pub fn basis(occupation: Occupation) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(occupation, Complex64::new(1.0, 0.0));
        FockState { amplitudes }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, occupation: &Occupation) -> Complex64 {
        self.amplitudes
            .get(occupation)
            .copied()
            .unwrap_or_default()
    }

    /// Adds `amplitude` to the ket `occupation`.
    pub fn accumulate(&mut self, occupation: Occupation, amplitude: Complex64) {
        *self.amplitudes.entry(occupation).or_default() += amplitude;
    }

    /// `<self | other>`.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        // iterate the smaller map, look up in the larger
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .amplitudes
            .iter()
            .filter_map(|(occ, a)| large.amplitudes.get(occ).map(|b| (a, b)))
            .map(|(a, b)| if conj_small { a.conj() * b } else { b.conj() * a })
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> FockState {
        FockState {
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        for (occ, a) in &other.amplitudes {
            out.accumulate(occ.clone(), *a);
        }
        out
    }

    /// Drops kets whose amplitude is below `tol` in modulus.
    pub fn pruned(mut self, tol: f64) -> FockState {
        self.amplitudes.retain(|_, a| a.norm() > tol);
        self
    }

    /// Unit-norm copy; the zero state stays zero.
    pub fn normalized(&self) -> FockState {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return FockState::zero();
        }
        self.scaled(Complex64::new(1.0 / norm, 0.0))
    }

    /// True when every ket holds exactly `n` particles.
    pub fn has_particle_number(&self, n: usize) -> bool {
        self.amplitudes.keys().all(|k| k.particles() == n)
    }
}

impl FockEngine {
    fn fermion_sign(&self, below: usize) -> f64 {
        if self.drop_exchange_sign || below.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `a^dagger_mode |state>`.
    pub fn create(&self, state: &FockState, mode: ModeIndex) -> FockState {
        self.create_linear(state, self.linear_index(mode))
    }

    /// `a_mode |state>`.
    pub fn annihilate(&self, state: &FockState, mode: ModeIndex) -> FockState {
        self.annihilate_linear(state, self.linear_index(mode))
    }

    pub fn create_linear(&self, state: &FockState, mode: u16) -> FockState {
        let mut out = FockState::zero();
        for (occ, amp) in state.iter() {
            let below = occ.0.partition_point(|&m| m < mode);
            let n = occ.count(mode);
            let factor = match self.kind {
                StatisticsKind::Fermion => {
                    if n > 0 {
                        continue;
                    }
                    self.fermion_sign(below)
                }
                StatisticsKind::Boson => ((n + 1) as f64).sqrt(),
            };
            let mut modes = occ.0.clone();
            modes.insert(below, mode);
            out.accumulate(Occupation(modes), amp * factor);
        }
        out
    }

    pub fn annihilate_linear(&self, state: &FockState, mode: u16) -> FockState {
        let mut out = FockState::zero();
        for (occ, amp) in state.iter() {
            let below = occ.0.partition_point(|&m| m < mode);
            let n = occ.count(mode);
            if n == 0 {
                continue;
            }
            let factor = match self.kind {
                StatisticsKind::Fermion => self.fermion_sign(below),
                StatisticsKind::Boson => (n as f64).sqrt(),
            };
            let mut modes = occ.0.clone();
            modes.remove(below);
            out.accumulate(Occupation(modes), amp * factor);
        }
        out
    }
}
