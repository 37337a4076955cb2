//! Property and oracle-equivalence suites behind `hbt verify`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use super::commands::{relative_gap, ORACLE_TOL};
use super::manifest::write_json;
use super::{VerifyArgs, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::closed_form::{
    g2_bosonic_reference, g2_equal_spin_p1sq, g2_same_source, g2_total, g2_unequal_spin_p1sq, poissonian_stats,
    visibility, EnvelopeWeights, PairEnvelopes, SourceStatistics, SpinMode,
};
use crate::coulomb::{
    convergence_study, dip_width, dip_width_numeric, end_velocity_closed_form, fringe_count, integrate_relative,
    log_slope, sample_dip_widths, IntegratorConfig, SampleSummary,
};
use crate::error::Result;
use crate::fock::{
    DirectionGrid, Ensemble, Envelope, FockEngine, FockState, Occupation, PairCounting, Source, Spin, StatisticsKind,
};
use crate::pattern::spatial_wavelength;
use crate::physics::{DetectorPosition, Geometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fock,
    ClosedForm,
    Coulomb,
    All,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub sign_flip_injected: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run(args: &VerifyArgs) -> Result<i32> {
    let report = run_suite(args.suite, args.inject_sign_flip)?;
    for c in &report.checks {
        println!(
            "[{}] {:<12} {:<34} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.detail
        );
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", report.checks.len(), failed);
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn run_suite(suite: Suite, inject_sign_flip: bool) -> Result<Report> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Fock | Suite::All) {
        checks.extend(fock_suite(inject_sign_flip)?);
    }
    if matches!(suite, Suite::ClosedForm | Suite::All) {
        checks.extend(closed_form_suite()?);
    }
    if matches!(suite, Suite::Coulomb | Suite::All) {
        checks.extend(coulomb_suite()?);
    }
    Ok(Report {
        suite,
        sign_flip_injected: inject_sign_flip,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn check(suite: &'static str, name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        suite,
        name,
        passed,
        detail,
    }
}

fn reference_geometry() -> Geometry {
    Geometry::new(1e-8, 1.0, 1e11).expect("reference geometry is valid")
}

/// Evenly spaced phases in `[lo, hi)`.
fn phases(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Probability triples with `p2 <= 1e-3`, including single emitters and a
/// pure pair source.
pub fn probability_grid() -> Vec<SourceStatistics> {
    let mut out = Vec::new();
    for &p1 in &[0.0, 0.01, 0.05, 0.1, 0.2] {
        for &p2 in &[0.0, 1e-4, 3e-4, 6e-4, 1e-3] {
            if p1 == 0.0 && p2 == 0.0 {
                // vacuum-only source: stand in a tiny single-emission rate
                out.push(SourceStatistics::new(1.0 - 2e-3, 1e-3, 0.0).expect("valid"));
                continue;
            }
            out.push(SourceStatistics::new(1.0 - 2.0 * p1 - 4.0 * p2, p1, p2).expect("valid"));
        }
    }
    out
}

/// Max residual of `values` against the best multiple of `shape`, relative
/// to the largest value.
pub fn shape_fit_residual(deltas: &[f64], values: &[f64], shape: impl Fn(f64) -> f64) -> f64 {
    let basis: Vec<f64> = deltas.iter().map(|&d| shape(d)).collect();
    let num: f64 = basis.iter().zip(values).map(|(b, v)| b * v).sum();
    let den: f64 = basis.iter().map(|b| b * b).sum();
    let a = num / den;
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    basis
        .iter()
        .zip(values)
        .map(|(b, v)| (v - a * b).abs())
        .fold(0.0, f64::max)
        / peak
}

fn fock_suite(flip: bool) -> Result<Vec<Check>> {
    const S: &str = "fock";
    let geom = reference_geometry();
    let engine = |kind, delta| -> Result<(FockEngine, DetectorPosition, DetectorPosition)> {
        let (e, d1, d2) = FockEngine::two_detector(kind, geom, delta)?;
        let e = if flip && kind == StatisticsKind::Fermion {
            e.with_exchange_sign_dropped()
        } else {
            e
        };
        Ok((e, d1, d2))
    };
    let mut out = Vec::new();

    // anticommutators on every basis ket of an 8-mode space
    {
        let (e, _, _) = engine(StatisticsKind::Fermion, 1.0)?;
        let modes = e.mode_count() as u16;
        let mut worst = 0.0f64;
        for bits in 0u32..1 << modes {
            let ket = FockState::basis(Occupation::from_modes((0..modes).filter(|i| bits >> i & 1 == 1).collect()));
            for i in 0..modes {
                for j in 0..modes {
                    let aa = e
                        .annihilate_linear(&e.annihilate_linear(&ket, j), i)
                        .add(&e.annihilate_linear(&e.annihilate_linear(&ket, i), j));
                    worst = worst.max(aa.norm_sqr());
                    let mut mixed = e
                        .annihilate_linear(&e.create_linear(&ket, j), i)
                        .add(&e.create_linear(&e.annihilate_linear(&ket, i), j));
                    if i == j {
                        mixed = mixed.add(&ket.scaled(Complex64::new(-1.0, 0.0)));
                    }
                    worst = worst.max(mixed.norm_sqr());
                }
            }
        }
        out.push(check(
            S,
            "anticommutation",
            worst < 1e-24,
            format!("{} modes, max residual norm^2 {worst:.1e}", modes),
        ));
    }

    // Fock-space correlator against the closed form
    {
        let stats_grid = probability_grid();
        let deltas = phases(-PI, PI, 16);
        let w = EnvelopeWeights::new(0.5, 0.5)?;
        let mut worst = 0.0f64;
        for &delta in &deltas {
            let (e, d1, d2) = engine(StatisticsKind::Fermion, delta)?;
            for stats in &stats_grid {
                let rho = e.two_source_ensemble(stats, PairCounting::Unordered)?.with_particle_number(2);
                let floor = 1e-12 * (stats.p1().powi(2)).max(stats.p0() * stats.p2());
                for mode in SpinMode::ALL {
                    let numeric = e.g2_numeric(&rho, &d1, &d2, mode)?;
                    worst = worst.max(relative_gap(numeric, g2_total(delta, stats, &w, mode), floor));
                }
            }
        }
        out.push(check(
            S,
            "oracle_equivalence",
            worst < ORACLE_TOL,
            format!("{} phases x {} triples, max relative gap {worst:.2e}", deltas.len(), stats_grid.len()),
        ));
    }

    // six-term decomposition
    {
        let stats = SourceStatistics::new(0.8, 0.08, 1e-3)?;
        let sfe = SourceStatistics::single_emitter(0.1)?;
        let mut sum_gap = 0.0f64;
        let mut same_source = 0.0f64;
        let mut cross_spin = 0.0f64;
        for &delta in &phases(-PI, PI, 8) {
            let (e, d1, d2) = engine(StatisticsKind::Fermion, delta)?;
            let rho = e.two_source_ensemble(&stats, PairCounting::Unordered)?;
            let rho_sfe = e.two_source_ensemble(&sfe, PairCounting::Unordered)?;
            for s in Spin::BOTH {
                for s2 in Spin::BOTH {
                    let terms = e.g2_term_decomposition(&rho, &d1, &d2, (s, s2))?;
                    let block = e.g2_block(&rho, &d1, &d2, (s, s2))?;
                    sum_gap = sum_gap.max((terms.sum() - Complex64::new(block, 0.0)).norm());
                    let t_sfe = e.g2_term_decomposition(&rho_sfe, &d1, &d2, (s, s2))?;
                    same_source = same_source.max(t_sfe.same_source().iter().map(|t| t.norm()).fold(0.0, f64::max));
                    if s != s2 {
                        cross_spin = cross_spin.max(terms.interference().iter().map(|t| t.norm()).fold(0.0, f64::max));
                    }
                }
            }
        }
        out.push(check(
            S,
            "path_decomposition",
            sum_gap < 1e-10 && same_source == 0.0 && cross_spin == 0.0,
            format!("sum gap {sum_gap:.1e}, single-emitter pair terms {same_source:.1e}, cross-spin exchange {cross_spin:.1e}"),
        ));
    }

    // fermions antibunch, bosons bunch
    {
        let sfe = SourceStatistics::single_emitter(0.1)?;
        let deltas = phases(-PI, PI, 64);
        let mut fermi = Vec::new();
        let mut bose = Vec::new();
        for &delta in &deltas {
            for (kind, sink) in [(StatisticsKind::Fermion, &mut fermi), (StatisticsKind::Boson, &mut bose)] {
                let (e, d1, d2) = engine(kind, delta)?;
                let rho = e.two_source_ensemble(&sfe, PairCounting::Unordered)?;
                sink.push(e.g2_numeric(&rho, &d1, &d2, SpinMode::PolarizedEqual)?);
            }
        }
        let rf = shape_fit_residual(&deltas, &fermi, |d| 1.0 - d.cos());
        let rb = shape_fit_residual(&deltas, &bose, |d| 1.0 + d.cos());
        out.push(check(
            S,
            "fermion_boson_duality",
            rf < 1e-10 && rb < 1e-10,
            format!("fit residuals: fermion {rf:.1e} on 1 - cos, boson {rb:.1e} on 1 + cos"),
        ));
    }

    // same-tip equal-spin pairs
    {
        let grid = DirectionGrid::flat(vec![0.0, 1e-3])?;
        let e = FockEngine::new(StatisticsKind::Fermion, geom, grid);
        let e = if flip { e.with_exchange_sign_dropped() } else { e };
        let stats = SourceStatistics::new(0.9, 0.0, 0.02)?;
        let d1 = DetectorPosition::ON_AXIS;
        let d2 = DetectorPosition::from_angle(&geom, 1e-3)?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let flat = e.grid().envelope().clone();
        let a = Envelope::new(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)])?;
        let b = Envelope::new(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)])?;
        let block = |pair: (&Envelope, &Envelope)| -> Result<f64> {
            let one = e.source_ensemble_with(Source::Tip1, &stats, PairCounting::Unordered, pair)?;
            let rho = e.tensor_product(&one, &Ensemble::vacuum(&[Source::Tip2]))?;
            e.g2_block(&rho, &d1, &d2, (Spin::Up, Spin::Up))
        };
        let equal = block((&flat, &flat))?;
        let orthogonal = block((&a, &b))?;
        out.push(check(
            S,
            "same_source_suppression",
            equal.abs() < 1e-12 && orthogonal > 0.0,
            format!("identical envelopes {equal:.1e}, orthogonal envelopes {orthogonal:.3e}"),
        ));
    }

    // detector exchange
    {
        let stats = SourceStatistics::new(0.8, 0.08, 0.01)?;
        let mut worst = 0.0f64;
        for &delta in &phases(-PI, PI, 8) {
            let (e, d1, d2) = engine(StatisticsKind::Fermion, delta)?;
            let rho = e.two_source_ensemble(&stats, PairCounting::Unordered)?;
            for mode in SpinMode::ALL {
                let a = e.g2_numeric(&rho, &d1, &d2, mode)?;
                let b = e.g2_numeric(&rho, &d2, &d1, mode)?;
                worst = worst.max((a - b).abs() / a.abs().max(1e-300));
            }
        }
        out.push(check(S, "detector_exchange", worst < 1e-12, format!("max relative asymmetry {worst:.1e}")));
    }
    Ok(out)
}

fn closed_form_suite() -> Result<Vec<Check>> {
    const S: &str = "closed-form";
    let mut out = Vec::new();
    let sfe = SourceStatistics::single_emitter(0.1)?;
    let poisson = poissonian_stats(0.2)?;

    let v = [
        visibility(&sfe, SpinMode::PolarizedEqual)?,
        visibility(&sfe, SpinMode::Unpolarized)?,
        visibility(&poisson, SpinMode::Unpolarized)?,
    ];
    let ok = (v[0] - 1.0).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12 && (v[2] - 0.4).abs() < 1e-12;
    out.push(check(S, "visibility_triple", ok, format!("{:.15} {:.15} {:.15}", v[0], v[1], v[2])));

    let mut worst_contrast = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut negative = 0usize;
    for stats in probability_grid() {
        if stats.p1() == 0.0 {
            continue;
        }
        let w = EnvelopeWeights::plot_normalized(&stats)?;
        for mode in SpinMode::ALL {
            let max = g2_total(PI, &stats, &w, mode);
            let min = g2_total(0.0, &stats, &w, mode);
            worst_contrast = worst_contrast.max(((max - min) / (max + min) - visibility(&stats, mode)?).abs());
        }
        for delta in phases(-2.0 * PI, 2.0 * PI, 33) {
            let parts = g2_equal_spin_p1sq(delta, &stats, &w)
                + g2_unequal_spin_p1sq(delta, &stats, &w)
                + g2_same_source(delta, &stats, &w, &PairEnvelopes::Identical).unequal_spin;
            let total = g2_total(delta, &stats, &w, SpinMode::Unpolarized);
            worst_identity = worst_identity.max((parts - total).abs() / total.abs().max(1e-300));
            negative += SpinMode::ALL.iter().filter(|&&m| g2_total(delta, &stats, &w, m) < 0.0).count();
        }
    }
    out.push(check(S, "contrast_equals_visibility", worst_contrast < 1e-12, format!("max gap {worst_contrast:.1e}")));
    out.push(check(S, "decomposition_identity", worst_identity < 1e-14, format!("max relative gap {worst_identity:.1e}")));
    out.push(check(S, "non_negative", negative == 0, format!("{negative} negative values")));

    let w = EnvelopeWeights::plot_normalized(&sfe)?;
    let shift = phases(-2.0 * PI, 2.0 * PI, 64)
        .into_iter()
        .map(|d| (g2_bosonic_reference(d, 2.0) - g2_total(d + PI, &sfe, &w, SpinMode::PolarizedEqual)).abs())
        .fold(0.0, f64::max);
    out.push(check(S, "boson_pi_shift", shift < 1e-12, format!("max gap {shift:.1e}")));

    let ratio = [0.01, 0.1, 0.2, 0.5, 1.0, 2.0]
        .iter()
        .map(|&mu| Ok((poissonian_stats(mu)?.offset_ratio().unwrap_or(f64::NAN) - 0.5).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(check(S, "poisson_offset_ratio", ratio < 1e-12, format!("max |p0 p2 / p1^2 - 1/2| = {ratio:.1e}")));
    Ok(out)
}

fn coulomb_suite() -> Result<Vec<Check>> {
    const S: &str = "coulomb";
    let mut out = Vec::new();
    let start = Instant::now();

    let mut worst_v = 0.0f64;
    let mut worst_drift = 0.0f64;
    for d0 in [1e-9, 10e-9, 100e-9] {
        let traj = integrate_relative(d0, &IntegratorConfig::for_separation(d0)?)?;
        let v = end_velocity_closed_form(d0)?;
        worst_v = worst_v.max((traj.asymptotic_velocity() - v).abs() / v);
        worst_drift = worst_drift.max(traj.max_energy_drift);
    }
    out.push(check(S, "end_velocity", worst_v < 1e-3, format!("max relative error {worst_v:.2e} for d = 1, 10, 100 nm")));
    out.push(check(S, "energy_drift", worst_drift < 1e-6, format!("max relative drift {worst_drift:.2e}")));

    let study = convergence_study(10e-9, &[50.0, 100.0, 200.0, 400.0])?;
    out.push(check(
        S,
        "convergence_order",
        (1.9..=2.1).contains(&study.order),
        format!("slope {:.4} over dt = tau/50 .. tau/400", study.order),
    ));

    let g = reference_geometry();
    let (dip, _) = dip_width_numeric(&g, &IntegratorConfig::for_separation(g.tip_separation())?)?;
    out.push(check(
        S,
        "dip_width",
        dip.relative_difference.abs() < 1e-2 && dip.quick_acceleration(),
        format!(
            "z_dip {:.6e} m vs {:.6e} m, t_99 / t_f = {:.2e}",
            dip.z_dip,
            dip.z_dip_analytic,
            dip.t_99 / dip.t_f
        ),
    ));

    let ds: Vec<f64> = (0..=8).map(|i| 1e-11 * 10f64.powf(i as f64 / 2.0)).collect();
    let xs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let closed: Vec<f64> = ds.iter().map(|&d| Ok(fringe_count(d)?.ln())).collect::<Result<_>>()?;
    let numeric: Vec<f64> = ds
        .iter()
        .map(|&d| {
            let g = g.with_tip_separation(d)?;
            let (dip, _) = dip_width_numeric(&g, &IntegratorConfig::for_separation(d)?)?;
            Ok((dip.z_dip / spatial_wavelength(&g)).ln())
        })
        .collect::<Result<_>>()?;
    let (sc, sn) = (log_slope(&xs, &closed), log_slope(&xs, &numeric));
    out.push(check(
        S,
        "fringe_scaling",
        (sc - 0.5).abs() < 1e-12 && (sn - 0.5).abs() < 1e-3,
        format!("slope closed {sc:.12}, numeric {sn:.6}"),
    ));

    let mut spread = 0.0f64;
    let n0 = fringe_count(g.tip_separation())?;
    for k in [5e10, 1e11, 2e11] {
        for screen in [0.5, 1.0, 2.0] {
            let gk = Geometry::new(g.tip_separation(), screen, k)?;
            spread = spread.max((dip_width(&gk) / spatial_wavelength(&gk) / n0 - 1.0).abs());
        }
    }
    out.push(check(S, "fringe_invariance", spread < 1e-12, format!("max relative change over k x D grid {spread:.1e}")));

    let samples = sample_dip_widths(&g, 0.005, 10_000, 7)?;
    let s = SampleSummary::of(&samples);
    let z = dip_width(&g);
    let z_score = (s.mean - z) / s.std_error;
    let rel_std = s.std_dev / s.mean / 0.005;
    out.push(check(
        S,
        "momentum_spread",
        z_score.abs() < 3.0 && (rel_std - 1.0).abs() < 0.1,
        format!("mean offset {z_score:.2} standard errors, relative std / sigma_k_rel = {rel_std:.4}"),
    ));

    let elapsed = start.elapsed().as_secs_f64();
    out.push(check(S, "runtime", elapsed < 60.0, format!("{elapsed:.2} s")));
    Ok(out)
}
