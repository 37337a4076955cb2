//! Interference pattern on the screen, optionally modulated by the Coulomb dip.
//!
//! Detector 1 sits on the optical axis; `x` is detector 2's screen
//! coordinate and also the detector separation the dip envelope sees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{g2_total, visibility, EnvelopeWeights, SourceStatistics, SpinMode};
use crate::coulomb::{dip_width, fringe_count, sample_dip_widths};
use crate::error::{Error, Result};
use crate::physics::{screen_to_phase, DetectorPosition, Geometry};

/// Fringe period on the screen, `2 pi D / (k d)` [m].
pub fn spatial_wavelength(geom: &Geometry) -> f64 {
    2.0 * std::f64::consts::PI * geom.screen_distance() / (geom.wave_number() * geom.tip_separation())
}

/// Gaussian width whose FWHM is `z_dip`.
pub fn fwhm_sigma(z_dip: f64) -> f64 {
    z_dip / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// `1 - depth exp(-x^2 / 2 sigma^2)` with FWHM `z_dip`.
pub fn dip_envelope(x_rel: f64, z_dip: f64, depth: f64) -> Result<f64> {
    if !(z_dip.is_finite() && z_dip > 0.0) {
        return Err(Error::InvalidParameter(format!("dip width must be positive, got {z_dip}")));
    }
    check_depth(depth)?;
    let s = fwhm_sigma(z_dip);
    Ok(1.0 - depth * (-x_rel * x_rel / (2.0 * s * s)).exp())
}

fn check_depth(depth: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&depth) {
        return Err(Error::InvalidParameter(format!("dip depth must lie in [0, 1], got {depth}")));
    }
    Ok(())
}

/// Uniformly spaced screen coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl ScreenGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter(format!(
                "screen range needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "screen grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(ScreenGrid { x_min, x_max, n_points })
    }

    /// `[-half_width, half_width]` with an odd point count, so `x = 0` is on
    /// the grid.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        let n = if n_points.is_multiple_of(2) { n_points + 1 } else { n_points };
        ScreenGrid::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Point `i`, computed as `mid + half (2i - n) / n` so that symmetric
    /// grids are exactly symmetric. Endpoints are returned verbatim.
    pub fn point(&self, i: usize) -> f64 {
        let n = self.n_points - 1;
        if i == 0 {
            return self.x_min;
        }
        if i == n {
            return self.x_max;
        }
        let mid = 0.5 * (self.x_min + self.x_max);
        let half = 0.5 * (self.x_max - self.x_min);
        mid + half * ((2 * i) as f64 - n as f64) / n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }
}

/// How the Coulomb dip enters the pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DipModel {
    Off,
    /// Envelope at the central dip width.
    Central { depth: f64 },
    /// Envelope averaged over dip widths drawn from a normal spread of `k`.
    SpreadAveraged {
        depth: f64,
        sigma_k_rel: f64,
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternPoint {
    pub x: f64,
    pub theta: f64,
    pub delta: f64,
    pub g2_fermi: f64,
    pub envelope: f64,
    pub g2_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternMetadata {
    pub d: f64,
    pub screen_distance: f64,
    pub k: f64,
    pub stats: SourceStatistics,
    pub spin_mode: SpinMode,
    pub dip: DipModel,
    pub z_dip: f64,
    pub lambda_sp: f64,
    pub fringe_count: f64,
    /// `None` when the spin mode needs `p1 > 0` and it is zero.
    pub visibility: Option<f64>,
    pub v_cms: f64,
    pub t_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSeries {
    pub points: Vec<PatternPoint>,
    pub metadata: PatternMetadata,
}

impl PatternSeries {
    /// Strict local maxima of `g2_total` with `|x| < half_width`.
    pub fn local_maxima_within(&self, half_width: f64) -> Vec<f64> {
        self.points
            .windows(3)
            .filter(|w| w[1].x.abs() < half_width && w[1].g2_total > w[0].g2_total && w[1].g2_total > w[2].g2_total)
            .map(|w| w[1].x)
            .collect()
    }

    /// Local maxima inside the dip FWHM.
    pub fn maxima_in_dip(&self) -> usize {
        self.local_maxima_within(0.5 * self.metadata.z_dip).len()
    }

    /// `(max - min) / (max + min)` of `g2_total` over the series.
    pub fn contrast(&self) -> f64 {
        let (lo, hi) = self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.g2_total), hi.max(p.g2_total))
        });
        (hi - lo) / (hi + lo)
    }
}

/// Fermionic pattern times the dip envelope, in the plotting normalisation
/// `4 p1^2 |C|^2 |C|^2 = 2`.
pub fn compose_pattern(
    geom: &Geometry,
    stats: &SourceStatistics,
    spin_mode: SpinMode,
    grid: &ScreenGrid,
    dip: DipModel,
) -> Result<PatternSeries> {
    let weights = EnvelopeWeights::plot_normalized(stats)?;
    let z_dip = dip_width(geom);
    let spread = match dip {
        DipModel::Off => None,
        DipModel::Central { depth } => {
            check_depth(depth)?;
            None
        }
        DipModel::SpreadAveraged {
            depth,
            sigma_k_rel,
            samples,
            seed,
        } => {
            check_depth(depth)?;
            Some(sample_dip_widths(geom, sigma_k_rel, samples, seed)?)
        }
    };

    let points = (0..grid.n_points())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let delta = screen_to_phase(geom, x);
            let theta = DetectorPosition::from_screen(geom, x)?.theta();
            let g2_fermi = g2_total(delta, stats, &weights, spin_mode);
            let envelope = match (dip, &spread) {
                (DipModel::Off, _) => 1.0,
                (DipModel::Central { depth }, _) => dip_envelope(x, z_dip, depth)?,
                (DipModel::SpreadAveraged { depth, .. }, Some(widths)) => {
                    let mut sum = 0.0;
                    for &z in widths {
                        sum += dip_envelope(x, z, depth)?;
                    }
                    sum / widths.len() as f64
                }
                (DipModel::SpreadAveraged { .. }, None) => unreachable!("samples drawn above"),
            };
            Ok(PatternPoint {
                x,
                theta,
                delta,
                g2_fermi,
                envelope,
                g2_total: g2_fermi * envelope,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PatternSeries {
        points,
        metadata: PatternMetadata {
            d: geom.tip_separation(),
            screen_distance: geom.screen_distance(),
            k: geom.wave_number(),
            stats: *stats,
            spin_mode,
            dip,
            z_dip,
            lambda_sp: spatial_wavelength(geom),
            fringe_count: fringe_count(geom.tip_separation())?,
            visibility: visibility(stats, spin_mode).ok(),
            v_cms: geom.center_of_mass_speed(),
            t_f: geom.time_of_flight(),
        },
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::closed_form::poissonian_stats;
    use crate::physics::phase_to_screen;

    fn fig4b() -> Geometry {
        Geometry::new(10e-9, 1.0, 1e11).unwrap()
    }

    fn fig4a() -> Geometry {
        Geometry::new(0.01e-9, 1.0, 1e11).unwrap()
    }

    fn sfe() -> SourceStatistics {
        SourceStatistics::single_emitter(0.1).unwrap()
    }

    #[test]
    fn wavelength_values() {
        assert_relative_eq!(spatial_wavelength(&fig4b()), 6.283_185_307_179_587e-3, max_relative = 1e-14);
        assert_relative_eq!(spatial_wavelength(&fig4a()), 6.283_185_307_179_587, max_relative = 1e-14);
        let g2 = fig4b().with_tip_separation(20e-9).unwrap();
        assert_relative_eq!(spatial_wavelength(&g2), 0.5 * spatial_wavelength(&fig4b()), max_relative = 1e-15);
        let g = fig4b();
        let l = spatial_wavelength(&g);
        let step = screen_to_phase(&g, 1e-3 + l) - screen_to_phase(&g, 1e-3);
        assert!((step / (2.0 * PI) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn envelope_values() {
        assert_eq!(dip_envelope(0.0, 0.02, 1.0).unwrap(), 0.0);
        assert_relative_eq!(dip_envelope(0.01, 0.02, 1.0).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(dip_envelope(-0.01, 0.02, 1.0).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(dip_envelope(10.0, 0.02, 1.0).unwrap(), 1.0);
        assert!(dip_envelope(0.0, 0.0, 1.0).is_err());
        assert!(dip_envelope(0.0, 0.02, 1.5).is_err());
    }

    #[test]
    fn grid_validation_and_symmetry() {
        assert!(ScreenGrid::new(1.0, 0.0, 10).is_err());
        assert!(ScreenGrid::new(0.0, 1.0, 1).is_err());
        let g = ScreenGrid::symmetric(0.04, 8000).unwrap();
        assert_eq!(g.n_points(), 8001);
        let pts = g.points();
        assert_eq!(pts[4000], 0.0);
        for i in 0..pts.len() {
            assert_eq!(pts[i], -pts[pts.len() - 1 - i]);
        }
    }

    #[test]
    fn coulomb_off_matches_closed_form() {
        let geom = fig4b();
        let grid = ScreenGrid::symmetric(0.02, 401).unwrap();
        let s = compose_pattern(&geom, &sfe(), SpinMode::PolarizedEqual, &grid, DipModel::Off).unwrap();
        let w = EnvelopeWeights::plot_normalized(&sfe()).unwrap();
        for p in &s.points {
            assert_eq!(p.envelope, 1.0);
            assert_eq!(p.g2_total, g2_total(p.delta, &sfe(), &w, SpinMode::PolarizedEqual));
        }
        assert_eq!(s.points[200].g2_total, 0.0);
    }

    #[test]
    fn contrast_equals_visibility_without_dip() {
        let geom = fig4b();
        let x_pi = phase_to_screen(&geom, PI).unwrap();
        let grid = ScreenGrid::symmetric(x_pi, 201).unwrap();
        for stats in [sfe(), poissonian_stats(0.2).unwrap()] {
            for mode in SpinMode::ALL {
                let s = compose_pattern(&geom, &stats, mode, &grid, DipModel::Off).unwrap();
                assert!((s.contrast() - visibility(&stats, mode).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fringe_counts_in_dip() {
        let grid = ScreenGrid::symmetric(0.04, 8001).unwrap();
        let s = compose_pattern(&fig4b(), &sfe(), SpinMode::PolarizedEqual, &grid, DipModel::Central { depth: 1.0 }).unwrap();
        assert_eq!(s.maxima_in_dip(), 4);
        assert_relative_eq!(s.metadata.fringe_count, 4.375_720_374_297_795, max_relative = 1e-12);

        let grid = ScreenGrid::symmetric(1.5, 3001).unwrap();
        let s = compose_pattern(&fig4a(), &sfe(), SpinMode::PolarizedEqual, &grid, DipModel::Central { depth: 1.0 }).unwrap();
        assert_eq!(s.maxima_in_dip(), 0);
    }

    #[test]
    fn spread_averaged_dip_is_shallower_at_edges_only() {
        let geom = fig4b();
        let grid = ScreenGrid::symmetric(0.04, 801).unwrap();
        let central = compose_pattern(&geom, &sfe(), SpinMode::PolarizedEqual, &grid, DipModel::Central { depth: 1.0 }).unwrap();
        let model = DipModel::SpreadAveraged {
            depth: 1.0,
            sigma_k_rel: 0.005,
            samples: 500,
            seed: 3,
        };
        let spread = compose_pattern(&geom, &sfe(), SpinMode::PolarizedEqual, &grid, model).unwrap();
        assert_eq!(spread.points[400].envelope, 0.0);
        for (a, b) in central.points.iter().zip(&spread.points) {
            assert!((a.envelope - b.envelope).abs() < 0.01);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn series_invariants(
            d in 1e-11f64..5e-8,
            depth in 0.0f64..=1.0,
            p1 in 0.01f64..0.2,
            mode_index in 0usize..3,
        ) {
            let geom = Geometry::new(d, 1.0, 1e11).unwrap();
            let stats = SourceStatistics::single_emitter(p1).unwrap();
            let mode = SpinMode::ALL[mode_index];
            let grid = ScreenGrid::symmetric(0.05, 101).unwrap();
            let s = compose_pattern(&geom, &stats, mode, &grid, DipModel::Central { depth }).unwrap();
            let n = s.points.len();
            for (i, p) in s.points.iter().enumerate() {
                prop_assert!(p.g2_total >= 0.0);
                prop_assert!(p.g2_total <= p.g2_fermi);
                prop_assert!(p.envelope >= 1.0 - depth - 1e-15 && p.envelope <= 1.0);
                prop_assert_eq!(p.g2_total, p.g2_fermi * p.envelope);
                let q = &s.points[n - 1 - i];
                prop_assert!((p.g2_total - q.g2_total).abs() <= 1e-12 * p.g2_total.abs().max(1e-300));
            }
        }
    }
}
