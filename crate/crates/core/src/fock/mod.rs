//! Brute-force second quantization over discrete emission directions.
//!
//! Each tip emits into `M` direction bins, for two spin states, giving
//! `4 M` single-particle modes. Modes are ordered lexicographically by
//! `(source, spin, bin)`:
//!
//! ```text
//! linear = (2 * source + spin) * M + bin      (source, spin in {0, 1})
//! ```
//!
//! Every fermionic sign derives from this order: an operator acting on mode
//! `i` picks up `(-1)^n`, where `n` counts occupied modes with index below `i`.
//!
//! States are sparse maps from occupation multisets to complex amplitudes,
//! so the same machinery serves the bosonic comparison (where the sign is
//! replaced by the usual `sqrt(n + 1)` and `sqrt(n)` factors).

mod correlator;
mod ensemble;
mod grid;
mod state;

pub use correlator::{ModeCombination, PathTerms};
pub use ensemble::{Branch, Ensemble, PairCounting};
pub use grid::{DirectionGrid, Envelope};
pub use state::{FockState, Occupation};

use serde::{Deserialize, Serialize};

use crate::physics::Geometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    Tip1,
    Tip2,
}

impl Source {
    pub const BOTH: [Source; 2] = [Source::Tip1, Source::Tip2];

    fn index(self) -> usize {
        match self {
            Source::Tip1 => 0,
            Source::Tip2 => 1,
        }
    }

    fn bit(self) -> u8 {
        1 << self.index()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// One single-particle mode `a_{source, spin, bin}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub source: Source,
    pub spin: Spin,
    pub bin: usize,
}

impl ModeIndex {
    pub fn new(source: Source, spin: Spin, bin: usize) -> Self {
        ModeIndex { source, spin, bin }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsKind {
    Fermion,
    Boson,
}

/// Operator algebra and correlators for one particle species on one grid.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct FockEngine {
    kind: StatisticsKind,
    geometry: Geometry,
    grid: DirectionGrid,
    drop_exchange_sign: bool,
}

impl FockEngine {
    pub fn new(kind: StatisticsKind, geometry: Geometry, grid: DirectionGrid) -> Self {
        FockEngine {
            kind,
            geometry,
            grid,
            drop_exchange_sign: false,
        }
    }

    /// Mutation hook for smoke-testing the verification suite: fermionic
    /// operators lose their ordering sign.
    #[doc(hidden)]
    pub fn with_exchange_sign_dropped(mut self) -> Self {
        self.drop_exchange_sign = true;
        self
    }

    pub fn kind(&self) -> StatisticsKind {
        self.kind
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    pub fn bins(&self) -> usize {
        self.grid.len()
    }

    pub fn mode_count(&self) -> usize {
        4 * self.bins()
    }

    /// Position of `mode` in the canonical order.
    pub fn linear_index(&self, mode: ModeIndex) -> u16 {
        assert!(mode.bin < self.bins(), "bin {} out of range", mode.bin);
        ((2 * mode.source.index() + mode.spin.index()) * self.bins() + mode.bin) as u16
    }

    pub fn mode_at(&self, linear: u16) -> ModeIndex {
        let m = self.bins();
        let linear = linear as usize;
        let block = linear / m;
        let source = if block / 2 == 0 { Source::Tip1 } else { Source::Tip2 };
        let spin = if block.is_multiple_of(2) { Spin::Up } else { Spin::Down };
        ModeIndex::new(source, spin, linear % m)
    }
}
