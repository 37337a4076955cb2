use num_complex::Complex64;

use super::{DirectionGrid, Ensemble, FockEngine, FockState, ModeIndex, Source, Spin, StatisticsKind};
use crate::closed_form::SpinMode;
use crate::error::{Error, Result};
use crate::physics::{phase_delta, DetectorPosition, Geometry};

/// Imaginary residue tolerated in a Hermitian expectation value, relative to
/// `max(1, |real|)`.
const HERMITIAN_TOL: f64 = 1e-12;

/// `sum_l c_l a_{l, spin, bin}`, one term per tip, all on the same bin.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCombination {
    pub terms: Vec<(ModeIndex, Complex64)>,
    /// Angular distance between the detector and the bin it was snapped to.
    pub snap: f64,
}

impl ModeCombination {
    pub fn coefficient(&self, source: Source) -> Complex64 {
        self.terms
            .iter()
            .find(|(m, _)| m.source == source)
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }
}

/// The six contributions to one spin block, ordered as
/// `[tip1 pair, tip2 pair, 1 -> det1 & 2 -> det2, 2 -> det1 & 1 -> det2,
///   exchange, exchange conjugate]`, each including its phase factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathTerms(pub [Complex64; 6]);

impl PathTerms {
    pub fn sum(&self) -> Complex64 {
        self.0.iter().sum()
    }

    pub fn same_source(&self) -> [Complex64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn direct(&self) -> [Complex64; 2] {
        [self.0[2], self.0[3]]
    }

    pub fn interference(&self) -> [Complex64; 2] {
        [self.0[4], self.0[5]]
    }
}

impl FockEngine {
    /// Field operator `Psi_spin(r)` for a detector, snapped to the nearest
    /// direction bin. Tip 1 carries no phase, tip 2 carries
    /// `phase_delta(geometry, det)`.
    pub fn detector_operator(&self, det: &DetectorPosition, spin: Spin) -> Result<ModeCombination> {
        let (bin, snap, half_width) = self.grid().snap(det.theta());
        if snap > half_width {
            return Err(Error::GridTooCoarse {
                theta: det.theta(),
                snap,
                half_width,
            });
        }
        let delta = phase_delta(self.geometry(), det);
        Ok(ModeCombination {
            terms: vec![
                (ModeIndex::new(Source::Tip1, spin, bin), Complex64::new(1.0, 0.0)),
                (ModeIndex::new(Source::Tip2, spin, bin), Complex64::from_polar(1.0, delta)),
            ],
            snap,
        })
    }

    fn apply_annihilator(&self, op: &ModeCombination, state: &FockState) -> FockState {
        op.terms.iter().fold(FockState::zero(), |acc, (mode, c)| {
            acc.add(&self.annihilate(state, *mode).scaled(*c))
        })
    }

    fn apply_creator(&self, op: &ModeCombination, state: &FockState) -> FockState {
        op.terms.iter().fold(FockState::zero(), |acc, (mode, c)| {
            acc.add(&self.create(state, *mode).scaled(c.conj()))
        })
    }

    /// `<Psi+_s(r1) Psi+_s'(r2) Psi_s'(r2) Psi_s(r1)>` over the mixture.
    pub fn g2_block(
        &self,
        rho: &Ensemble,
        det1: &DetectorPosition,
        det2: &DetectorPosition,
        spins: (Spin, Spin),
    ) -> Result<f64> {
        let psi1 = self.detector_operator(det1, spins.0)?;
        let psi2 = self.detector_operator(det2, spins.1)?;
        let mut total = Complex64::default();
        for branch in rho.branches() {
            if branch.state.is_empty() || branch.probability == 0.0 {
                continue;
            }
            let lowered = self.apply_annihilator(&psi2, &self.apply_annihilator(&psi1, &branch.state));
            let raised = self.apply_creator(&psi1, &self.apply_creator(&psi2, &lowered));
            total += branch.state.inner(&raised) * branch.probability;
        }
        hermitian_value(total)
    }

    /// Second-order correlation summed over the spin blocks selected by `mode`.
    pub fn g2_numeric(
        &self,
        rho: &Ensemble,
        det1: &DetectorPosition,
        det2: &DetectorPosition,
        mode: SpinMode,
    ) -> Result<f64> {
        let mut sum = 0.0;
        for s in Spin::BOTH {
            for s2 in Spin::BOTH {
                if mode.includes(s == s2) {
                    sum += self.g2_block(rho, det1, det2, (s, s2))?;
                }
            }
        }
        Ok(sum.max(0.0))
    }

    /// The six source-resolved terms of one spin block. Phase factors come
    /// from the detector coefficients, so with detector 1 on axis the first
    /// exchange term carries `e^{+i delta}` and the second `e^{-i delta}`.
    pub fn g2_term_decomposition(
        &self,
        rho: &Ensemble,
        det1: &DetectorPosition,
        det2: &DetectorPosition,
        spins: (Spin, Spin),
    ) -> Result<PathTerms> {
        use Source::{Tip1 as T1, Tip2 as T2};
        let psi1 = self.detector_operator(det1, spins.0)?;
        let psi2 = self.detector_operator(det2, spins.1)?;
        let b1 = psi1.terms[0].0.bin;
        let b2 = psi2.terms[0].0.bin;
        // (l1, l2, l3, l4) in a+_{l1,s,n1} a+_{l2,s',n2} a_{l3,s',n2} a_{l4,s,n1}
        let labels = [
            (T1, T1, T1, T1),
            (T2, T2, T2, T2),
            (T1, T2, T2, T1),
            (T2, T1, T1, T2),
            (T2, T1, T2, T1),
            (T1, T2, T1, T2),
        ];
        let mut terms = [Complex64::default(); 6];
        for (term, &(l1, l2, l3, l4)) in terms.iter_mut().zip(&labels) {
            let coeff = psi1.coefficient(l1).conj()
                * psi2.coefficient(l2).conj()
                * psi2.coefficient(l3)
                * psi1.coefficient(l4);
            let m1 = ModeIndex::new(l1, spins.0, b1);
            let m2 = ModeIndex::new(l2, spins.1, b2);
            let m3 = ModeIndex::new(l3, spins.1, b2);
            let m4 = ModeIndex::new(l4, spins.0, b1);
            let mut value = Complex64::default();
            for branch in rho.branches() {
                if branch.state.is_empty() || branch.probability == 0.0 {
                    continue;
                }
                // <psi| A+ B+ C D |psi> = <B A psi | C D psi>
                let bra = self.annihilate(&self.annihilate(&branch.state, m1), m2);
                if bra.is_empty() {
                    continue;
                }
                let ket = self.annihilate(&self.annihilate(&branch.state, m4), m3);
                value += bra.inner(&ket) * branch.probability;
            }
            *term = coeff * value;
        }
        Ok(PathTerms(terms))
    }
}

impl FockEngine {
    /// Smallest engine that resolves a detector pair: detector 1 on axis,
    /// detector 2 at phase `delta`, each on its own bin of a flat two-bin grid.
    pub fn two_detector(
        kind: StatisticsKind,
        geometry: Geometry,
        delta: f64,
    ) -> Result<(FockEngine, DetectorPosition, DetectorPosition)> {
        let sin_theta = delta / (geometry.wave_number() * geometry.tip_separation());
        if !(sin_theta.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "phase {delta} exceeds k d = {}",
                geometry.wave_number() * geometry.tip_separation()
            )));
        }
        let theta = sin_theta.asin();
        let thetas = if theta > 0.0 {
            vec![0.0, theta]
        } else if theta < 0.0 {
            vec![theta, 0.0]
        } else {
            vec![0.0, 1e-3]
        };
        let det2 = DetectorPosition::from_angle(&geometry, theta)?;
        let engine = FockEngine::new(kind, geometry, DirectionGrid::flat(thetas)?);
        Ok((engine, DetectorPosition::ON_AXIS, det2))
    }
}

fn hermitian_value(z: Complex64) -> Result<f64> {
    if z.im.abs() > HERMITIAN_TOL * z.re.abs().max(1.0) {
        return Err(Error::NonHermitian { real: z.re, imag: z.im });
    }
    Ok(z.re.max(0.0))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::super::{Envelope, PairCounting};
    use super::*;
    use crate::closed_form::{g2_total, EnvelopeWeights, SourceStatistics};

    fn geometry() -> Geometry {
        Geometry::new(1e-8, 1.0, 1e11).unwrap()
    }

    fn setup(kind: StatisticsKind, delta: f64) -> (FockEngine, DetectorPosition, DetectorPosition) {
        FockEngine::two_detector(kind, geometry(), delta).unwrap()
    }

    fn two_particle(engine: &FockEngine, stats: &SourceStatistics) -> Ensemble {
        engine
            .two_source_ensemble(stats, PairCounting::Unordered)
            .unwrap()
            .with_particle_number(2)
    }

    #[test]
    fn detector_coefficients() {
        let (e, d1, _) = setup(StatisticsKind::Fermion, PI);
        let op = e.detector_operator(&d1, Spin::Up).unwrap();
        assert_eq!(op.coefficient(Source::Tip1), Complex64::new(1.0, 0.0));
        assert_eq!(op.coefficient(Source::Tip2), Complex64::new(1.0, 0.0));
        let (e, _, d2) = setup(StatisticsKind::Fermion, PI);
        let op = e.detector_operator(&d2, Spin::Down).unwrap();
        assert!((op.coefficient(Source::Tip2) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        for (_, c) in &op.terms {
            assert!((c.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = geometry();
        let e = FockEngine::new(StatisticsKind::Fermion, g, DirectionGrid::flat(vec![0.0, 1e-3]).unwrap());
        let far = DetectorPosition::from_angle(&g, 0.01).unwrap();
        assert!(matches!(
            e.detector_operator(&far, Spin::Up),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn pauli_zero_at_coincidence() {
        let (e, d1, d2) = setup(StatisticsKind::Fermion, 0.0);
        let sfe = SourceStatistics::single_emitter(0.1).unwrap();
        let rho = e.two_source_ensemble(&sfe, PairCounting::Unordered).unwrap();
        let g = e.g2_numeric(&rho, &d1, &d2, SpinMode::PolarizedEqual).unwrap();
        assert!(g.abs() < 1e-15);
    }

    #[test]
    fn matches_closed_form_on_a_probability_grid() {
        for &delta in &[0.0, 0.4, PI / 2.0, 2.0, PI, -1.1] {
            let (e, d1, d2) = setup(StatisticsKind::Fermion, delta);
            let w = EnvelopeWeights::new(0.5, 0.5).unwrap();
            for &(p1, p2) in &[(0.1, 0.0), (0.05, 1e-3), (0.01, 5e-4), (0.2, 1e-4)] {
                let stats = SourceStatistics::new(1.0 - 2.0 * p1 - 4.0 * p2, p1, p2).unwrap();
                let rho = two_particle(&e, &stats);
                for mode in SpinMode::ALL {
                    let numeric = e.g2_numeric(&rho, &d1, &d2, mode).unwrap();
                    let analytic = g2_total(delta, &stats, &w, mode);
                    assert_relative_eq!(numeric, analytic, max_relative = 1e-10, epsilon = 1e-16);
                }
            }
        }
    }

    #[test]
    fn ordered_pair_counting_doubles_the_offset() {
        let (e, d1, d2) = setup(StatisticsKind::Fermion, 0.3);
        let stats = SourceStatistics::new(0.9, 0.0, 0.02).unwrap();
        let unordered = e.two_source_ensemble(&stats, PairCounting::Unordered).unwrap().with_particle_number(2);
        let ordered = e.two_source_ensemble(&stats, PairCounting::Ordered).unwrap().with_particle_number(2);
        let gu = e.g2_numeric(&unordered, &d1, &d2, SpinMode::Unpolarized).unwrap();
        let go = e.g2_numeric(&ordered, &d1, &d2, SpinMode::Unpolarized).unwrap();
        assert_relative_eq!(gu, 4.0 * 0.9 * 0.02 * 0.25, max_relative = 1e-12);
        assert_relative_eq!(go, 2.0 * gu, max_relative = 1e-12);
    }

    #[test]
    fn detector_exchange_symmetry() {
        let (e, d1, d2) = setup(StatisticsKind::Fermion, 1.3);
        let stats = SourceStatistics::new(0.8, 0.08, 0.01).unwrap();
        let rho = e.two_source_ensemble(&stats, PairCounting::Unordered).unwrap();
        for mode in SpinMode::ALL {
            let a = e.g2_numeric(&rho, &d1, &d2, mode).unwrap();
            let b = e.g2_numeric(&rho, &d2, &d1, mode).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn decomposition_sums_to_block() {
        let (e, d1, d2) = setup(StatisticsKind::Fermion, 0.9);
        let stats = SourceStatistics::new(0.8, 0.08, 0.01).unwrap();
        let rho = e.two_source_ensemble(&stats, PairCounting::Unordered).unwrap();
        for s in Spin::BOTH {
            for s2 in Spin::BOTH {
                let terms = e.g2_term_decomposition(&rho, &d1, &d2, (s, s2)).unwrap();
                let block = e.g2_block(&rho, &d1, &d2, (s, s2)).unwrap();
                assert!((terms.sum() - Complex64::new(block, 0.0)).norm() < 1e-10 * block.max(1.0));
                let [t5, t6] = terms.interference();
                assert!((t5 - t6.conj()).norm() < 1e-15);
                if s != s2 {
                    assert_eq!(t5, Complex64::default());
                    assert_eq!(t6, Complex64::default());
                }
            }
        }
    }

    #[test]
    fn single_emitters_have_no_same_source_terms() {
        let (e, d1, d2) = setup(StatisticsKind::Fermion, 2.2);
        let rho = e
            .two_source_ensemble(&SourceStatistics::single_emitter(0.1).unwrap(), PairCounting::Unordered)
            .unwrap();
        let terms = e.g2_term_decomposition(&rho, &d1, &d2, (Spin::Up, Spin::Up)).unwrap();
        assert_eq!(terms.same_source(), [Complex64::default(); 2]);
        // exchange term phase follows the detector coefficients
        let direct = terms.direct()[0].re;
        let expected = -direct * Complex64::from_polar(1.0, 2.2);
        assert!((terms.interference()[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn boson_bunches() {
        let stats = SourceStatistics::single_emitter(0.1).unwrap();
        let mut values = Vec::new();
        for &delta in &[0.0, PI / 2.0, PI] {
            let (e, d1, d2) = setup(StatisticsKind::Boson, delta);
            let rho = e.two_source_ensemble(&stats, PairCounting::Unordered).unwrap();
            values.push(e.g2_numeric(&rho, &d1, &d2, SpinMode::PolarizedEqual).unwrap());
        }
        assert!(values[0] > values[1] && values[1] > values[2]);
        assert!(values[2].abs() < 1e-15);
    }

    #[test]
    fn same_source_equal_spin_needs_distinct_envelopes() {
        let g = geometry();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let grid = DirectionGrid::flat(vec![0.0, 1e-3]).unwrap();
        let e = FockEngine::new(StatisticsKind::Fermion, g, grid);
        let stats = SourceStatistics::new(0.9, 0.0, 0.02).unwrap();
        let d1 = DetectorPosition::ON_AXIS;
        let d2 = DetectorPosition::from_angle(&g, 1e-3).unwrap();

        let flat = e.grid().envelope().clone();
        let same = e.source_ensemble_with(Source::Tip1, &stats, PairCounting::Unordered, (&flat, &flat)).unwrap();
        let rho = e.tensor_product(&same, &Ensemble::vacuum(&[Source::Tip2])).unwrap();
        assert!(e.g2_block(&rho, &d1, &d2, (Spin::Up, Spin::Up)).unwrap().abs() < 1e-15);

        let a = Envelope::new(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let b = Envelope::new(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]).unwrap();
        let orth = e.source_ensemble_with(Source::Tip1, &stats, PairCounting::Unordered, (&a, &b)).unwrap();
        let rho = e.tensor_product(&orth, &Ensemble::vacuum(&[Source::Tip2])).unwrap();
        let g2 = e.g2_block(&rho, &d1, &d2, (Spin::Up, Spin::Up)).unwrap();
        // tip 2 is pure vacuum; |a0 b1 - a1 b0|^2 = 1 for this pair
        assert_relative_eq!(g2, 0.02, max_relative = 1e-12);
    }

    #[test]
    fn dropped_sign_turns_fermions_into_bunching() {
        let (e, d1, d2) = setup(StatisticsKind::Fermion, 0.0);
        let e = e.with_exchange_sign_dropped();
        let rho = e
            .two_source_ensemble(&SourceStatistics::single_emitter(0.1).unwrap(), PairCounting::Unordered)
            .unwrap();
        assert!(e.g2_numeric(&rho, &d1, &d2, SpinMode::PolarizedEqual).unwrap() > 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn g2_is_non_negative(delta in -3.0f64..3.0, p1 in 0.0f64..0.2, p2 in 0.0f64..0.04) {
            let (e, d1, d2) = setup(StatisticsKind::Fermion, delta);
            let stats = SourceStatistics::new(1.0 - 2.0 * p1 - 4.0 * p2, p1, p2).unwrap();
            let rho = e.two_source_ensemble(&stats, PairCounting::Unordered).unwrap();
            for mode in SpinMode::ALL {
                prop_assert!(e.g2_numeric(&rho, &d1, &d2, mode).unwrap() >= 0.0);
            }
        }
    }
}
