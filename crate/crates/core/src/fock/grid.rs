use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `sum |C_m|^2 = 1`.
const NORM_TOL: f64 = 1e-12;

/// Normalised emission amplitudes over the direction bins.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope(Vec<Complex64>);

impl Envelope {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidGrid(format!(
                "envelope must satisfy sum |C|^2 = 1, got {norm}"
            )));
        }
        Ok(Envelope(amplitudes))
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidGrid("envelope has zero norm".into()));
        }
        Envelope::new(amplitudes.into_iter().map(|c| c / norm).collect())
    }

    pub fn flat(bins: usize) -> Self {
        let c = Complex64::new(1.0 / (bins as f64).sqrt(), 0.0);
        Envelope(vec![c; bins])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitude(&self, bin: usize) -> Complex64 {
        self.0[bin]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    /// `<self, other> = sum_m conj(C_m) C'_m`.
    pub fn overlap(&self, other: &Envelope) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Discrete emission directions with the default emission envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGrid {
    thetas: Vec<f64>,
    envelope: Envelope,
}

impl DirectionGrid {
    /// `thetas` must be strictly increasing, with at least two bins.
    pub fn new(thetas: Vec<f64>, envelope: Envelope) -> Result<Self> {
        if thetas.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two direction bins, got {}",
                thetas.len()
            )));
        }
        if thetas.len() != envelope.len() {
            return Err(Error::InvalidGrid(format!(
                "{} bins but {} envelope amplitudes",
                thetas.len(),
                envelope.len()
            )));
        }
        if thetas.len() > (u16::MAX as usize) / 4 {
            return Err(Error::InvalidGrid("too many bins".into()));
        }
        let monotone = thetas.windows(2).all(|w| w[0] < w[1]);
        let bounded = thetas
            .iter()
            .all(|t| t.is_finite() && t.abs() < std::f64::consts::FRAC_PI_2);
        if !(monotone && bounded) {
            return Err(Error::InvalidGrid(
                "bin angles must be strictly increasing within (-pi/2, pi/2)".into(),
            ));
        }
        Ok(DirectionGrid { thetas, envelope })
    }

    /// Grid with the flat envelope `C_m = 1 / sqrt(M)`.
    pub fn flat(thetas: Vec<f64>) -> Result<Self> {
        let m = thetas.len();
        DirectionGrid::new(thetas, Envelope::flat(m))
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Nearest bin to `theta`, the distance to it, and that bin's half width
    /// (half the gap to its closest neighbour).
    pub fn snap(&self, theta: f64) -> (usize, f64, f64) {
        let bin = match self
            .thetas
            .binary_search_by(|t| t.partial_cmp(&theta).expect("finite angles"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.thetas.len() => i - 1,
            Err(i) => {
                if theta - self.thetas[i - 1] <= self.thetas[i] - theta {
                    i - 1
                } else {
                    i
                }
            }
        };
        let left = bin.checked_sub(1).map(|j| self.thetas[bin] - self.thetas[j]);
        let right = self.thetas.get(bin + 1).map(|t| t - self.thetas[bin]);
        let gap = match (left, right) {
            (Some(l), Some(r)) => l.min(r),
            (Some(g), None) | (None, Some(g)) => g,
            (None, None) => unreachable!("grid has at least two bins"),
        };
        (bin, (theta - self.thetas[bin]).abs(), 0.5 * gap)
    }
}
