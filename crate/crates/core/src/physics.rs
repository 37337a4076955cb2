//! Physical constants, experiment geometry and phase bookkeeping.
//!
//! Two needle tips sit a distance `d` apart; detectors lie on a screen a
//! distance `D` away. Detector 1 is pinned on the optical axis, so the only
//! free phase is the one picked up at detector 2:
//!
//! ```text
//! delta = k * d * sin(theta),   sin(theta) = x / sqrt(x^2 + D^2)
//! ```
//!
//! The exact `sin(theta)` is used everywhere. The small-angle form
//! `delta ~ k d x / D` is only a reference for tests.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// CODATA 2018 values in SI units.
///
/// Fields are private; the only instance is [`PhysicalConstants::CODATA_2018`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    e: f64,
    eps0: f64,
    hbar: f64,
    m_e: f64,
    c: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        // exact since the 2019 SI redefinition
        e: 1.602_176_634e-19,
        eps0: 8.854_187_812_8e-12,
        hbar: 1.054_571_817e-34,
        m_e: 9.109_383_701_5e-31,
        c: 299_792_458.0,
    };

    /// Elementary charge [C].
    pub const fn elementary_charge(&self) -> f64 {
        self.e
    }

    /// Vacuum permittivity [F/m].
    pub const fn vacuum_permittivity(&self) -> f64 {
        self.eps0
    }

    /// Reduced Planck constant [J s].
    pub const fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck constant h = 2 pi hbar [J s].
    pub fn planck(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    /// Electron mass [kg].
    pub const fn electron_mass(&self) -> f64 {
        self.m_e
    }

    /// Speed of light [m/s].
    pub const fn speed_of_light(&self) -> f64 {
        self.c
    }

    /// Coulomb constant times e^2, i.e. e^2 / (4 pi eps0) [N m^2].
    pub fn coulomb_coupling(&self) -> f64 {
        self.e * self.e / (4.0 * PI * self.eps0)
    }
}

/// Shorthand for the compiled-in constants.
pub const CODATA: PhysicalConstants = PhysicalConstants::CODATA_2018;

/// Smallest accepted screen-distance to tip-separation ratio.
pub const MIN_FAR_FIELD_RATIO: f64 = 1.0e4;

/// Centre-of-mass speed must stay below this fraction of c.
pub const MAX_BETA: f64 = 0.1;

/// Tip separation, screen distance and electron wave number.
///
/// `k` is the canonical spectral parameter; the de Broglie wavelength is
/// always derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    tip_separation: f64,
    screen_distance: f64,
    wave_number: f64,
}

impl Geometry {
    /// `d` and `screen_distance` in metres, `k` in 1/m.
    pub fn new(d: f64, screen_distance: f64, k: f64) -> Result<Self> {
        for (name, v) in [("d", d), ("D", screen_distance), ("k", k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if screen_distance / d < MIN_FAR_FIELD_RATIO {
            return Err(Error::InvalidGeometry(format!(
                "far field requires D/d >= {MIN_FAR_FIELD_RATIO:e}, got {:e}",
                screen_distance / d
            )));
        }
        let geom = Geometry {
            tip_separation: d,
            screen_distance,
            wave_number: k,
        };
        let beta = geom.center_of_mass_speed() / CODATA.speed_of_light();
        if beta >= MAX_BETA {
            return Err(Error::InvalidGeometry(format!(
                "v_cms = {beta:.3} c is outside the non-relativistic regime (< {MAX_BETA} c)"
            )));
        }
        Ok(geom)
    }

    pub fn tip_separation(&self) -> f64 {
        self.tip_separation
    }

    pub fn screen_distance(&self) -> f64 {
        self.screen_distance
    }

    pub fn wave_number(&self) -> f64 {
        self.wave_number
    }

    /// de Broglie wavelength 2 pi / k.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wave_number
    }

    /// v_cms = hbar k / m_e.
    pub fn center_of_mass_speed(&self) -> f64 {
        CODATA.hbar() * self.wave_number / CODATA.electron_mass()
    }

    /// t_f = D / v_cms.
    pub fn time_of_flight(&self) -> f64 {
        self.screen_distance / self.center_of_mass_speed()
    }

    pub fn with_tip_separation(&self, d: f64) -> Result<Self> {
        Geometry::new(d, self.screen_distance, self.wave_number)
    }

    pub fn with_screen_distance(&self, screen_distance: f64) -> Result<Self> {
        Geometry::new(self.tip_separation, screen_distance, self.wave_number)
    }

    pub fn with_wave_number(&self, k: f64) -> Result<Self> {
        Geometry::new(self.tip_separation, self.screen_distance, k)
    }
}

/// A detector direction, stored both as polar angle and screen coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorPosition {
    theta: f64,
    x: f64,
}

impl DetectorPosition {
    /// Detector on the optical axis.
    pub const ON_AXIS: DetectorPosition = DetectorPosition { theta: 0.0, x: 0.0 };

    pub fn from_screen(geom: &Geometry, x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "screen coordinate must be finite, got {x}"
            )));
        }
        let d = geom.screen_distance();
        Ok(DetectorPosition {
            theta: (x / d).atan(),
            x,
        })
    }

    pub fn from_angle(geom: &Geometry, theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta.abs() < PI / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "detector angle must satisfy |theta| < pi/2, got {theta}"
            )));
        }
        Ok(DetectorPosition {
            theta,
            x: geom.screen_distance() * theta.tan(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// sin(theta), computed from the screen coordinate when one is available
    /// so that both constructors agree with [`screen_to_phase`].
    fn sin_theta(&self, geom: &Geometry) -> f64 {
        if self.x == 0.0 {
            return self.theta.sin();
        }
        let d = geom.screen_distance();
        self.x / self.x.hypot(d)
    }
}

/// Phase difference at a detector between paths from tip 2 and tip 1.
pub fn phase_delta(geom: &Geometry, det: &DetectorPosition) -> f64 {
    geom.wave_number() * geom.tip_separation() * det.sin_theta(geom)
}

/// Phase difference for a detector at screen coordinate `x`.
pub fn screen_to_phase(geom: &Geometry, x: f64) -> f64 {
    let sin_theta = x / x.hypot(geom.screen_distance());
    geom.wave_number() * geom.tip_separation() * sin_theta
}

/// Inverse of [`screen_to_phase`]; `None` when |delta| >= k d has no
/// detector direction.
pub fn phase_to_screen(geom: &Geometry, delta: f64) -> Option<f64> {
    let sin_theta = delta / (geom.wave_number() * geom.tip_separation());
    if !sin_theta.is_finite() || sin_theta.abs() >= 1.0 {
        return None;
    }
    Some(geom.screen_distance() * sin_theta / (1.0 - sin_theta * sin_theta).sqrt())
}
