use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::Occupation;
use super::{Envelope, FockEngine, FockState, ModeIndex, Source, Spin, StatisticsKind};
use crate::closed_form::SourceStatistics;
use crate::error::{Error, Result};

/// How the double-emission spin sum of a tip's density operator is counted.
///
/// For identical pair envelopes the kets with spins `(up, down)` and
/// `(down, up)` differ only by an exchange sign, so they describe one
/// physical state. `Unordered` keeps one branch per spin pair
/// `{up, up}`, `{up, down}`, `{down, down}`; `Ordered` keeps all four
/// ordered pairs, which doubles the weight of the opposite-spin pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCounting {
    #[default]
    Unordered,
    Ordered,
}

impl PairCounting {
    fn spin_pairs(self) -> &'static [(Spin, Spin)] {
        match self {
            PairCounting::Unordered => &[
                (Spin::Up, Spin::Up),
                (Spin::Up, Spin::Down),
                (Spin::Down, Spin::Down),
            ],
            PairCounting::Ordered => &[
                (Spin::Up, Spin::Up),
                (Spin::Up, Spin::Down),
                (Spin::Down, Spin::Up),
                (Spin::Down, Spin::Down),
            ],
        }
    }
}

/// One pure component of a mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub state: FockState,
    /// Particle number the branch was built with; kept even when Pauli
    /// exclusion has reduced `state` to zero.
    pub particles: usize,
}

/// Incoherent mixture of number states over a set of tips.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    sources: u8,
    branches: Vec<Branch>,
}

impl Ensemble {
    /// Vacuum over the given tips, with probability one.
    pub fn vacuum(sources: &[Source]) -> Self {
        Ensemble {
            sources: sources.iter().fold(0, |acc, s| acc | s.bit()),
            branches: vec![Branch {
                probability: 1.0,
                state: FockState::vacuum(),
                particles: 0,
            }],
        }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn covers(&self, source: Source) -> bool {
        self.sources & source.bit() != 0
    }

    /// Keeps only branches with exactly `n` particles in total.
    pub fn with_particle_number(&self, n: usize) -> Ensemble {
        Ensemble {
            sources: self.sources,
            branches: self
                .branches
                .iter()
                .filter(|b| b.particles == n)
                .cloned()
                .collect(),
        }
    }

    /// Keeps only branches satisfying `keep`.
    pub fn filtered(&self, keep: impl Fn(&Branch) -> bool) -> Ensemble {
        Ensemble {
            sources: self.sources,
            branches: self.branches.iter().filter(|b| keep(b)).cloned().collect(),
        }
    }
}

impl FockEngine {
    /// `sum_m C_m a^dagger_{source, spin, m} |vac>` with the grid's envelope.
    pub fn single_emission(&self, source: Source, spin: Spin) -> FockState {
        self.single_emission_with(source, spin, self.grid().envelope())
            .expect("grid envelope matches grid")
    }

    pub fn single_emission_with(
        &self,
        source: Source,
        spin: Spin,
        envelope: &Envelope,
    ) -> Result<FockState> {
        self.check_envelope(envelope)?;
        let vac = FockState::vacuum();
        let mut out = FockState::zero();
        for (bin, c) in envelope.amplitudes().iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let ket = self.create(&vac, ModeIndex::new(source, spin, bin));
            out = out.add(&ket.scaled(*c));
        }
        Ok(out)
    }

    /// Two electrons from one tip,
    /// `sum C_A(m1) C_B(m2) a^dagger_{l,s,m1} a^dagger_{l,s',m2} |vac>`,
    /// normalised unless it vanishes (equal fermion spins in one mode).
    pub fn double_emission(
        &self,
        source: Source,
        spins: (Spin, Spin),
        envelopes: (&Envelope, &Envelope),
    ) -> Result<FockState> {
        self.check_envelope(envelopes.0)?;
        self.check_envelope(envelopes.1)?;
        let vac = FockState::vacuum();
        let mut out = FockState::zero();
        for (m1, c1) in envelopes.0.amplitudes().iter().enumerate() {
            for (m2, c2) in envelopes.1.amplitudes().iter().enumerate() {
                let c = c1 * c2;
                if c == Complex64::default() {
                    continue;
                }
                // rightmost operator acts first
                let inner = self.create(&vac, ModeIndex::new(source, spins.1, m2));
                let ket = self.create(&inner, ModeIndex::new(source, spins.0, m1));
                out = out.add(&ket.scaled(c));
            }
        }
        let out = out.pruned(1e-14);
        Ok(out.normalized())
    }

    /// Mixture `p0 |0><0| + p1 sum_s |1_s><1_s| + p2 sum_pairs |2><2|` for one
    /// tip, with every emission in the grid envelope. Zero-probability
    /// branches are omitted.
    pub fn source_ensemble(
        &self,
        source: Source,
        stats: &SourceStatistics,
        counting: PairCounting,
    ) -> Result<Ensemble> {
        let envelope = self.grid().envelope().clone();
        self.source_ensemble_with(source, stats, counting, (&envelope, &envelope))
    }

    /// As [`FockEngine::source_ensemble`], with separate envelopes for the
    /// first and second electron of a pair.
    pub fn source_ensemble_with(
        &self,
        source: Source,
        stats: &SourceStatistics,
        counting: PairCounting,
        pair_envelopes: (&Envelope, &Envelope),
    ) -> Result<Ensemble> {
        let mut branches = Vec::new();
        if stats.p0() > 0.0 {
            branches.push(Branch {
                probability: stats.p0(),
                state: FockState::vacuum(),
                particles: 0,
            });
        }
        if stats.p1() > 0.0 {
            for spin in Spin::BOTH {
                branches.push(Branch {
                    probability: stats.p1(),
                    state: self.single_emission(source, spin),
                    particles: 1,
                });
            }
        }
        if stats.p2() > 0.0 {
            for &(s1, s2) in counting.spin_pairs() {
                branches.push(Branch {
                    probability: stats.p2(),
                    state: self.double_emission(source, (s1, s2), pair_envelopes)?,
                    particles: 2,
                });
            }
        }
        Ok(Ensemble {
            sources: source.bit(),
            branches,
        })
    }

    /// `rho_1 (x) rho_2` for ensembles over disjoint tips. Kets are merged
    /// into canonical mode order, with the fermionic reordering sign.
    pub fn tensor_product(&self, first: &Ensemble, second: &Ensemble) -> Result<Ensemble> {
        let overlap = first.sources & second.sources;
        if overlap != 0 {
            return Err(Error::OverlappingSources(overlap.trailing_zeros() as u8 + 1));
        }
        let mut branches = Vec::with_capacity(first.len() * second.len());
        for a in &first.branches {
            for b in &second.branches {
                branches.push(Branch {
                    probability: a.probability * b.probability,
                    state: self.merge(&a.state, &b.state),
                    particles: a.particles + b.particles,
                });
            }
        }
        Ok(Ensemble {
            sources: first.sources | second.sources,
            branches,
        })
    }

    /// Both tips with identical statistics, `rho_1 (x) rho_2`.
    pub fn two_source_ensemble(
        &self,
        stats: &SourceStatistics,
        counting: PairCounting,
    ) -> Result<Ensemble> {
        let first = self.source_ensemble(Source::Tip1, stats, counting)?;
        let second = self.source_ensemble(Source::Tip2, stats, counting)?;
        self.tensor_product(&first, &second)
    }

    /// `P_a(a^dagger) P_b(a^dagger) |vac>` for states on disjoint modes.
    fn merge(&self, a: &FockState, b: &FockState) -> FockState {
        let mut out = FockState::zero();
        for (occ_a, amp_a) in a.iter() {
            for (occ_b, amp_b) in b.iter() {
                let sign = match self.kind() {
                    StatisticsKind::Fermion if !self.drop_exchange_sign => {
                        let inversions: usize = occ_a
                            .modes()
                            .iter()
                            .map(|&x| occ_b.modes().iter().filter(|&&y| y < x).count())
                            .sum();
                        if inversions.is_multiple_of(2) {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    _ => 1.0,
                };
                let mut modes = occ_a.modes().to_vec();
                modes.extend_from_slice(occ_b.modes());
                out.accumulate(Occupation::from_modes(modes), amp_a * amp_b * sign);
            }
        }
        out
    }

    fn check_envelope(&self, envelope: &Envelope) -> Result<()> {
        if envelope.len() != self.bins() {
            return Err(Error::InvalidGrid(format!(
                "envelope has {} amplitudes, grid has {} bins",
                envelope.len(),
                self.bins()
            )));
        }
        Ok(())
    }
}
