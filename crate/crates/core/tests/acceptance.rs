//! One PASS/FAIL line per acceptance criterion, with runtime.
//!
//! cargo test --release --test acceptance

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use hbt_sim::cli::config::RunConfig;
use hbt_sim::closed_form::{
    g2_bosonic_reference, g2_total, poissonian_stats, visibility, EnvelopeWeights, SourceStatistics, SpinMode,
};
use hbt_sim::coulomb::{
    convergence_study, dip_width, dip_width_numeric, end_velocity_closed_form, fringe_count, integrate_relative,
    log_slope, sample_dip_widths, IntegratorConfig, SampleSummary,
};
use hbt_sim::fock::{DirectionGrid, Ensemble, Envelope, FockEngine, PairCounting, Source, Spin, StatisticsKind};
use hbt_sim::pattern::{compose_pattern, spatial_wavelength, DipModel, ScreenGrid};
use hbt_sim::physics::{phase_to_screen, DetectorPosition, Geometry};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: hbt_sim::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn geometry(d: f64) -> Geometry {
    Geometry::new(d, 1.0, 1e11).unwrap()
}

fn phases(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn triples() -> Vec<SourceStatistics> {
    let mut out = Vec::new();
    for &p1 in &[0.002, 0.01, 0.05, 0.1, 0.2] {
        for &p2 in &[0.0, 1e-4, 3e-4, 6e-4, 1e-3] {
            out.push(SourceStatistics::new(1.0 - 2.0 * p1 - 4.0 * p2, p1, p2).unwrap());
        }
    }
    out
}

fn visibility_triple() -> Outcome {
    let sfe = lib(SourceStatistics::single_emitter(0.1))?;
    let mfe = lib(poissonian_stats(0.2))?;
    let v = [
        lib(visibility(&sfe, SpinMode::PolarizedEqual))?,
        lib(visibility(&sfe, SpinMode::Unpolarized))?,
        lib(visibility(&mfe, SpinMode::Unpolarized))?,
    ];
    let gap = (v[0] - 1.0).abs().max((v[1] - 0.5).abs()).max((v[2] - 0.4).abs());
    ensure(gap <= 1e-12, format!("{:.15} {:.15} {:.15}, max gap {gap:.1e}", v[0], v[1], v[2]))
}

fn oracle_equivalence() -> Outcome {
    let geom = geometry(1e-8);
    let w = lib(EnvelopeWeights::new(0.5, 0.5))?;
    let deltas = phases(-PI, PI, 16);
    let stats = triples();
    let mut worst = 0.0f64;
    for &delta in &deltas {
        let (e, d1, d2) = lib(FockEngine::two_detector(StatisticsKind::Fermion, geom, delta))?;
        for s in &stats {
            let rho = lib(e.two_source_ensemble(s, PairCounting::Unordered))?.with_particle_number(2);
            for mode in SpinMode::ALL {
                let numeric = lib(e.g2_numeric(&rho, &d1, &d2, mode))?;
                let closed = g2_total(delta, s, &w, mode);
                let scale = closed.abs().max(1e-12 * s.p1() * s.p1());
                worst = worst.max((numeric - closed).abs() / scale);
            }
        }
    }
    ensure(
        worst <= 1e-10,
        format!("{} phases x {} triples x 3 spin modes, max relative gap {worst:.2e}", deltas.len(), stats.len()),
    )
}

fn path_decomposition() -> Outcome {
    let geom = geometry(1e-8);
    let pairs = lib(SourceStatistics::new(0.8, 0.08, 1e-3))?;
    let sfe = lib(SourceStatistics::single_emitter(0.1))?;
    let (mut sum_gap, mut same, mut cross) = (0.0f64, 0.0f64, 0.0f64);
    for &delta in &phases(-PI, PI, 8) {
        let (e, d1, d2) = lib(FockEngine::two_detector(StatisticsKind::Fermion, geom, delta))?;
        let rho = lib(e.two_source_ensemble(&pairs, PairCounting::Unordered))?;
        let rho_sfe = lib(e.two_source_ensemble(&sfe, PairCounting::Unordered))?;
        for s in Spin::BOTH {
            for s2 in Spin::BOTH {
                let terms = lib(e.g2_term_decomposition(&rho, &d1, &d2, (s, s2)))?;
                let block = lib(e.g2_block(&rho, &d1, &d2, (s, s2)))?;
                sum_gap = sum_gap.max((terms.sum() - Complex64::new(block, 0.0)).norm() / block.abs().max(1e-300));
                let t = lib(e.g2_term_decomposition(&rho_sfe, &d1, &d2, (s, s2)))?;
                same = same.max(t.same_source().iter().map(|c| c.norm()).fold(0.0, f64::max));
                if s != s2 {
                    cross = cross.max(terms.interference().iter().map(|c| c.norm()).fold(0.0, f64::max));
                }
            }
        }
    }
    ensure(
        sum_gap <= 1e-10 && same == 0.0 && cross == 0.0,
        format!("sum gap {sum_gap:.1e}, single-emitter same-tip {same:.1e}, orthogonal-spin exchange {cross:.1e}"),
    )
}

fn fit_residual(deltas: &[f64], values: &[f64], shape: impl Fn(f64) -> f64) -> f64 {
    let basis: Vec<f64> = deltas.iter().map(|&d| shape(d)).collect();
    let a = basis.iter().zip(values).map(|(b, v)| b * v).sum::<f64>() / basis.iter().map(|b| b * b).sum::<f64>();
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    basis.iter().zip(values).map(|(b, v)| (v - a * b).abs()).fold(0.0, f64::max) / peak
}

fn fermion_boson_duality() -> Outcome {
    let geom = geometry(1e-8);
    let sfe = lib(SourceStatistics::single_emitter(0.1))?;
    let deltas = phases(-PI, PI, 64);
    let (mut fermi, mut bose) = (Vec::new(), Vec::new());
    for &delta in &deltas {
        for (kind, out) in [(StatisticsKind::Fermion, &mut fermi), (StatisticsKind::Boson, &mut bose)] {
            let (e, d1, d2) = lib(FockEngine::two_detector(kind, geom, delta))?;
            let rho = lib(e.two_source_ensemble(&sfe, PairCounting::Unordered))?;
            out.push(lib(e.g2_numeric(&rho, &d1, &d2, SpinMode::PolarizedEqual))?);
        }
    }
    let rf = fit_residual(&deltas, &fermi, |d| 1.0 - d.cos());
    let rb = fit_residual(&deltas, &bose, |d| 1.0 + d.cos());
    let w = lib(EnvelopeWeights::plot_normalized(&sfe))?;
    let shift = phases(-2.0 * PI, 2.0 * PI, 65)
        .into_iter()
        .map(|d| (g2_bosonic_reference(d, 2.0) - g2_total(d + PI, &sfe, &w, SpinMode::PolarizedEqual)).abs())
        .fold(0.0, f64::max);
    ensure(
        rf < 1e-10 && rb < 1e-10 && shift < 1e-10,
        format!("residual fermion {rf:.1e}, boson {rb:.1e}; pi-shift gap {shift:.1e}"),
    )
}

fn same_source_suppression() -> Outcome {
    let geom = geometry(1e-8);
    let grid = lib(DirectionGrid::flat(vec![0.0, 1e-3]))?;
    let e = FockEngine::new(StatisticsKind::Fermion, geom, grid);
    let stats = lib(SourceStatistics::new(0.9, 0.0, 0.02))?;
    let d1 = DetectorPosition::ON_AXIS;
    let d2 = lib(DetectorPosition::from_angle(&geom, 1e-3))?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let flat = e.grid().envelope().clone();
    let a = lib(Envelope::new(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]))?;
    let b = lib(Envelope::new(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]))?;
    let block = |pair: (&Envelope, &Envelope)| -> Result<f64, String> {
        let one = lib(e.source_ensemble_with(Source::Tip1, &stats, PairCounting::Unordered, pair))?;
        let rho = lib(e.tensor_product(&one, &Ensemble::vacuum(&[Source::Tip2])))?;
        lib(e.g2_block(&rho, &d1, &d2, (Spin::Up, Spin::Up)))
    };
    let equal = block((&flat, &flat))?;
    let orthogonal = block((&a, &b))?;
    ensure(
        equal.abs() <= 1e-12 && orthogonal > 0.0,
        format!("identical envelopes {equal:.1e}, orthogonal envelopes {orthogonal:.3e}"),
    )
}

fn coulomb_numerics() -> Outcome {
    let (mut worst_v, mut worst_drift) = (0.0f64, 0.0f64);
    for d0 in [1e-9, 10e-9, 100e-9] {
        let traj = lib(integrate_relative(d0, &lib(IntegratorConfig::for_separation(d0))?))?;
        let v = lib(end_velocity_closed_form(d0))?;
        worst_v = worst_v.max((traj.asymptotic_velocity() - v).abs() / v);
        worst_drift = worst_drift.max(traj.max_energy_drift);
    }
    let order = lib(convergence_study(10e-9, &[50.0, 100.0, 200.0, 400.0]))?.order;
    ensure(
        worst_v < 1e-3 && worst_drift < 1e-6 && (1.9..=2.1).contains(&order),
        format!("v_end error {worst_v:.2e}, energy drift {worst_drift:.2e}, order {order:.4}"),
    )
}

fn dip_and_fringe_numbers() -> Outcome {
    let g = geometry(1e-8);
    let (dip, _) = lib(dip_width_numeric(&g, &lib(IntegratorConfig::for_separation(1e-8))?))?;
    let lambda = spatial_wavelength(&g);
    let n_closed = lib(fringe_count(1e-8))?;
    let n_numeric = dip.z_dip / lambda;

    let ga = geometry(1e-11);
    let (dip_a, _) = lib(dip_width_numeric(&ga, &lib(IntegratorConfig::for_separation(1e-11))?))?;
    let na_closed = lib(fringe_count(1e-11))?;
    let na_numeric = dip_a.z_dip / spatial_wavelength(&ga);

    let rel = |x: f64, target: f64| (x / target - 1.0).abs();
    let worst = [
        rel(dip_width(&g), 0.0275),
        rel(dip.z_dip, 0.0275),
        rel(n_closed, 4.37),
        rel(n_numeric, 4.37),
        rel(na_closed, 0.138),
        rel(na_numeric, 0.138),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ensure(
        worst < 1e-2,
        format!(
            "z_dip {:.5e} / {:.5e} m, N {n_closed:.5} / {n_numeric:.5}, N(0.01 nm) {na_closed:.5} / {na_numeric:.5}",
            dip_width(&g),
            dip.z_dip
        ),
    )
}

fn scaling_laws() -> Outcome {
    let ds: Vec<f64> = (0..=8).map(|i| 1e-11 * 10f64.powf(i as f64 / 2.0)).collect();
    let xs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let mut closed = Vec::new();
    let mut numeric = Vec::new();
    for &d in &ds {
        let g = geometry(d);
        let (dip, _) = lib(dip_width_numeric(&g, &lib(IntegratorConfig::for_separation(d))?))?;
        closed.push(lib(fringe_count(d))?.ln());
        numeric.push((dip.z_dip / spatial_wavelength(&g)).ln());
    }
    let (sc, sn) = (log_slope(&xs, &closed), log_slope(&xs, &numeric));
    let n0 = lib(fringe_count(1e-8))?;
    let mut spread = 0.0f64;
    for k in [5e10, 1e11, 2e11] {
        for screen in [0.5, 1.0, 2.0] {
            let g = lib(Geometry::new(1e-8, screen, k))?;
            spread = spread.max((dip_width(&g) / spatial_wavelength(&g) / n0 - 1.0).abs());
        }
    }
    ensure(
        (sc - 0.5).abs() < 1e-12 && (sn - 0.5).abs() <= 1e-3 && spread < 1e-12,
        format!("slope closed {sc:.12}, numeric {sn:.6}; k x D spread {spread:.1e}"),
    )
}

fn pattern_composition() -> Outcome {
    let run = |name: &str| -> Result<(usize, f64), String> {
        let r = lib(lib(RunConfig::shipped(name))?.resolve())?;
        let s = lib(compose_pattern(&r.geometry, &r.stats, r.spin_mode, &r.screen, r.dip))?;
        Ok((s.maxima_in_dip(), s.metadata.fringe_count))
    };
    let (maxima_b, n_b) = run("fig4b")?;
    let (maxima_a, _) = run("fig4a")?;
    let floor_n = n_b.floor() as i64;

    let g = geometry(1e-8);
    let x_pi = phase_to_screen(&g, PI).ok_or("no screen position for pi")?;
    let grid = lib(ScreenGrid::symmetric(x_pi, 201))?;
    let sfe = lib(SourceStatistics::single_emitter(0.1))?;
    let mfe = lib(poissonian_stats(0.2))?;
    let mut worst = 0.0f64;
    for (stats, mode) in [
        (sfe, SpinMode::PolarizedEqual),
        (sfe, SpinMode::Unpolarized),
        (mfe, SpinMode::Unpolarized),
    ] {
        let s = lib(compose_pattern(&g, &stats, mode, &grid, DipModel::Off))?;
        worst = worst.max((s.contrast() - lib(visibility(&stats, mode))?).abs());
    }
    ensure(
        (maxima_b as i64 - floor_n).abs() <= 1 && maxima_a == 0 && worst <= 1e-9,
        format!("fig4b {maxima_b} maxima (N = {n_b:.3}), fig4a {maxima_a} maxima, contrast gap {worst:.1e}"),
    )
}

fn monte_carlo_spread() -> Outcome {
    let g = geometry(1e-8);
    let samples = lib(sample_dip_widths(&g, 0.005, 10_000, 7))?;
    let s = SampleSummary::of(&samples);
    let z_score = (s.mean - dip_width(&g)) / s.std_error;
    let rel = s.std_dev / s.mean / 0.005;
    ensure(
        z_score.abs() < 3.0 && (rel - 1.0).abs() < 0.1,
        format!("mean offset {z_score:+.2} standard errors, relative std / sigma_k_rel = {rel:.4}"),
    )
}

fn compose_with_threads(dir: &Path, threads: usize) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = dir.join("fig4b.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_hbt"))
        .args(["compose", "--config", "fig4b", "--seed", "7", "--threads", &threads.to_string(), "--out"])
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("hbt exited with {status}"));
    }
    let csv = std::fs::read(&out).map_err(|e| e.to_string())?;
    let manifest = std::fs::read(dir.join("fig4b.manifest.json")).map_err(|e| e.to_string())?;
    Ok((csv, manifest))
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let one = compose_with_threads(a.path(), 1)?;
    let eight = compose_with_threads(b.path(), 8)?;
    ensure(
        one == eight,
        format!("csv {} bytes, manifest {} bytes, identical: {}", one.0.len(), one.1.len(), one == eight),
    )
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "visibility triple", budget: Duration::from_secs(1), run: visibility_triple },
        Criterion { id: 2, name: "oracle equivalence", budget: Duration::from_secs(10), run: oracle_equivalence },
        Criterion { id: 3, name: "path decomposition", budget: Duration::from_secs(5), run: path_decomposition },
        Criterion { id: 4, name: "fermion/boson duality", budget: Duration::from_secs(5), run: fermion_boson_duality },
        Criterion { id: 5, name: "same-source suppression", budget: Duration::from_secs(1), run: same_source_suppression },
        Criterion { id: 6, name: "coulomb numerics", budget: Duration::from_secs(60), run: coulomb_numerics },
        Criterion { id: 7, name: "dip width and fringe count", budget: Duration::from_secs(60), run: dip_and_fringe_numbers },
        Criterion { id: 8, name: "scaling laws", budget: Duration::from_secs(120), run: scaling_laws },
        Criterion { id: 9, name: "pattern composition", budget: Duration::from_secs(10), run: pattern_composition },
        Criterion { id: 10, name: "monte carlo spread", budget: Duration::from_secs(30), run: monte_carlo_spread },
        Criterion { id: 11, name: "determinism", budget: Duration::from_secs(60), run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= c.budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {:<27} {:>7.2} s / {:>3} s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
