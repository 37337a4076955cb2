//! Analytic second-order correlation of two independent electron sources.
//!
//! All results are far-field, nearly monochromatic, and truncated at order
//! `p1^2` and `p0 p2`. With the envelope weights written `w = |C(k1)|^2 |C(k2)|^2`:
//!
//! ```text
//! equal spins,   one electron per tip : 4 p1^2 w (1 - cos delta)
//! unequal spins, one electron per tip : 4 p1^2 w
//! unequal spins, both from one tip    : 4 p0 p2 w
//! total                               : 4 p1^2 w (2 + p0 p2 / p1^2 - cos delta)
//! ```
//!
//! `p1` and `p2` are per-branch probabilities: each spin state of a single
//! emission carries `p1`, each spin pair of a double emission carries `p2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on the branch-probability normalisation.
pub const NORMALIZATION_SLACK: f64 = 1e-9;

/// Emission-number probabilities of one tip per pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceStatistics {
    p0: f64,
    p1: f64,
    p2: f64,
}

impl SourceStatistics {
    pub fn new(p0: f64, p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p0", p0), ("p1", p1), ("p2", p2)] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidStatistics(format!(
                    "{name} must be a non-negative probability, got {p}"
                )));
            }
        }
        let total = p0 + 2.0 * p1 + 4.0 * p2;
        if total > 1.0 + NORMALIZATION_SLACK {
            return Err(Error::InvalidStatistics(format!(
                "p0 + 2 p1 + 4 p2 = {total} exceeds 1"
            )));
        }
        Ok(SourceStatistics { p0, p1, p2 })
    }

    /// Single-fermion emitter: never two electrons per pulse.
    pub fn single_emitter(p1: f64) -> Result<Self> {
        SourceStatistics::new(1.0 - 2.0 * p1, p1, 0.0)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// `p0 p2 / p1^2`, the offset ratio entering the visibility.
    pub fn offset_ratio(&self) -> Option<f64> {
        (self.p1 > 0.0).then(|| self.p0 * self.p2 / (self.p1 * self.p1))
    }
}

/// Poissonian emission with mean `mu` electrons per pulse, split evenly over
/// spin branches: `p1 = mu e^-mu / 2`, `p2 = mu^2 e^-mu / 8`.
pub fn poissonian_stats(mu: f64) -> Result<SourceStatistics> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidStatistics(format!(
            "mean electron number must be non-negative, got {mu}"
        )));
    }
    let p0 = (-mu).exp();
    SourceStatistics::new(p0, mu * p0 / 2.0, mu * mu * p0 / 8.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinMode {
    /// Only equal-spin blocks: perfectly polarized sources.
    PolarizedEqual,
    /// All four spin blocks.
    Unpolarized,
    /// Only the unequal-spin blocks.
    OrthogonalOnly,
}

impl SpinMode {
    pub const ALL: [SpinMode; 3] = [
        SpinMode::PolarizedEqual,
        SpinMode::Unpolarized,
        SpinMode::OrthogonalOnly,
    ];

    pub fn includes(&self, equal_spins: bool) -> bool {
        match self {
            SpinMode::PolarizedEqual => equal_spins,
            SpinMode::Unpolarized => true,
            SpinMode::OrthogonalOnly => !equal_spins,
        }
    }
}

/// `|C(k1)|^2` and `|C(k2)|^2` at the two detectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeWeights {
    c1sq: f64,
    c2sq: f64,
}

impl EnvelopeWeights {
    pub fn new(c1sq: f64, c2sq: f64) -> Result<Self> {
        if !(c1sq.is_finite() && c2sq.is_finite() && c1sq >= 0.0 && c2sq >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "envelope weights must be non-negative, got ({c1sq}, {c2sq})"
            )));
        }
        Ok(EnvelopeWeights { c1sq, c2sq })
    }

    /// Weights chosen so that `4 p1^2 c1sq c2sq = 2`, the plotting
    /// normalisation used for all pattern outputs.
    pub fn plot_normalized(stats: &SourceStatistics) -> Result<Self> {
        if stats.p1() <= 0.0 {
            return Err(Error::InvalidStatistics(
                "plot normalisation needs p1 > 0".into(),
            ));
        }
        let c = 1.0 / (2.0_f64.sqrt() * stats.p1());
        EnvelopeWeights::new(c, c)
    }

    pub fn c1sq(&self) -> f64 {
        self.c1sq
    }

    pub fn c2sq(&self) -> f64 {
        self.c2sq
    }

    fn product(&self) -> f64 {
        self.c1sq * self.c2sq
    }
}

pub fn g2_equal_spin_p1sq(delta: f64, stats: &SourceStatistics, env: &EnvelopeWeights) -> f64 {
    4.0 * stats.p1().powi(2) * env.product() * (1.0 - delta.cos())
}

pub fn g2_unequal_spin_p1sq(_delta: f64, stats: &SourceStatistics, env: &EnvelopeWeights) -> f64 {
    4.0 * stats.p1().powi(2) * env.product()
}

/// Emission modes of the two electrons in a same-tip pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairEnvelopes {
    /// `C_A = C_B`; the weights come from [`EnvelopeWeights`].
    Identical,
    /// Distinct normalised modes, given by their amplitudes at the two
    /// detectors and their overlap `<C_A, C_B>`. Spin 1 occupies `C_A`
    /// when the spins differ.
    Distinct {
        a: [Complex64; 2],
        b: [Complex64; 2],
        overlap: Complex64,
    },
}

/// Two electrons from the same tip, summed over both tips.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SameSource {
    pub equal_spin: f64,
    pub unequal_spin: f64,
}

/// Same-tip pair contribution.
///
/// For equal spins the pair is a Slater determinant; its detection amplitude
/// `C_A(k1) C_B(k2) - C_A(k2) C_B(k1)` vanishes identically for identical
/// modes. `Distinct` ignores `env` and uses the supplied amplitudes.
pub fn g2_same_source(
    _delta: f64,
    stats: &SourceStatistics,
    env: &EnvelopeWeights,
    pair: &PairEnvelopes,
) -> SameSource {
    let p0p2 = stats.p0() * stats.p2();
    match pair {
        PairEnvelopes::Identical => SameSource {
            equal_spin: 0.0,
            unequal_spin: 4.0 * p0p2 * env.product(),
        },
        PairEnvelopes::Distinct { a, b, overlap } => {
            let slater = (a[0] * b[1] - a[1] * b[0]).norm_sqr();
            let norm = 1.0 - overlap.norm_sqr();
            let equal_spin = if norm > 0.0 && p0p2 > 0.0 {
                4.0 * p0p2 * slater / norm
            } else {
                0.0
            };
            let unequal_spin =
                2.0 * p0p2 * (a[0].norm_sqr() * b[1].norm_sqr() + b[0].norm_sqr() * a[1].norm_sqr());
            SameSource {
                equal_spin,
                unequal_spin,
            }
        }
    }
}

/// Total correlation for the chosen spin configuration.
///
/// The unpolarized form is evaluated as `4 w (2 p1^2 + p0 p2 - p1^2 cos delta)`,
/// which is the `p1 -> 0` limit-safe version of the ratio form.
pub fn g2_total(
    delta: f64,
    stats: &SourceStatistics,
    env: &EnvelopeWeights,
    mode: SpinMode,
) -> f64 {
    let equal = g2_equal_spin_p1sq(delta, stats, env);
    let unequal = g2_unequal_spin_p1sq(delta, stats, env)
        + g2_same_source(delta, stats, env, &PairEnvelopes::Identical).unequal_spin;
    match mode {
        SpinMode::PolarizedEqual => equal,
        SpinMode::OrthogonalOnly => unequal,
        SpinMode::Unpolarized => equal + unequal,
    }
}

/// Fringe contrast `(max - min) / (max + min)` of [`g2_total`] over delta.
pub fn visibility(stats: &SourceStatistics, mode: SpinMode) -> Result<f64> {
    match mode {
        SpinMode::PolarizedEqual => Ok(1.0),
        SpinMode::OrthogonalOnly | SpinMode::Unpolarized if stats.p1() <= 0.0 => {
            Err(Error::InvalidStatistics(format!(
                "visibility in {mode:?} mode needs p1 > 0"
            )))
        }
        SpinMode::OrthogonalOnly => Ok(0.0),
        SpinMode::Unpolarized => {
            let ratio = stats.offset_ratio().unwrap_or(0.0);
            Ok(1.0 / (2.0 + ratio))
        }
    }
}

/// Two single bosons in the same internal state: `prefactor (1 + cos delta)`.
pub fn g2_bosonic_reference(delta: f64, env_prefactor: f64) -> f64 {
    env_prefactor * (1.0 + delta.cos())
}
