use std::path::Path;

use rayon::prelude::*;

use super::config::{Resolved, RunConfig, SweepParameter};
use super::manifest::{file_name, fmt_f64, sibling, write_csv, write_json, Derived, RunManifest};
use super::{RunArgs, SweepArgs, EXIT_NON_CONVERGENCE, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::closed_form::{
    g2_bosonic_reference, g2_total, visibility, EnvelopeWeights, SourceStatistics, SpinMode,
};
use crate::coulomb::{dip_width, dip_width_numeric, fringe_count, log_slope};
use crate::error::{Error, Result};
use crate::fock::{FockEngine, PairCounting, StatisticsKind};
use crate::pattern::{compose_pattern, spatial_wavelength};
use crate::physics::{screen_to_phase, Geometry};

fn load(args: &RunArgs) -> Result<(RunConfig, Resolved)> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let resolved = cfg.resolve()?;
    Ok((cfg, resolved))
}

fn derived(r: &Resolved, delta_range: (f64, f64)) -> Result<Derived> {
    let g = &r.geometry;
    Ok(Derived {
        delta_min: delta_range.0,
        delta_max: delta_range.1,
        lambda_sp_m: spatial_wavelength(g),
        z_dip_m: dip_width(g),
        fringe_count: fringe_count(g.tip_separation())?,
        visibility: visibility(&r.stats, r.spin_mode).ok(),
        v_cms_m_per_s: g.center_of_mass_speed(),
        t_f_s: g.time_of_flight(),
        extra: Default::default(),
    })
}

fn screen_delta_range(r: &Resolved) -> (f64, f64) {
    (
        screen_to_phase(&r.geometry, r.screen.x_min()),
        screen_to_phase(&r.geometry, r.screen.x_max()),
    )
}

fn phase_range(r: &Resolved) -> (f64, f64) {
    (r.phases[0], *r.phases.last().expect("phase grid is non-empty"))
}

/// Writes the manifest next to `out`, listing `outputs` plus the CSV itself.
fn finish(out: Option<&Path>, mut manifest: RunManifest, extra_outputs: &[&Path]) -> Result<()> {
    if let Some(out) = out {
        manifest.outputs.push(file_name(out));
        manifest.outputs.extend(extra_outputs.iter().map(|p| file_name(p)));
        write_json(&sibling(out, "manifest.json"), &manifest)?;
    }
    Ok(())
}

fn contrast(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (hi - lo) / (hi + lo)
}

pub fn closed_form(args: &RunArgs) -> Result<i32> {
    let (cfg, r) = load(args)?;
    let sfe = SourceStatistics::single_emitter(r.stats.p1())?;
    let w_sfe = EnvelopeWeights::plot_normalized(&sfe)?;
    let w_mfe = EnvelopeWeights::plot_normalized(&r.stats)?;
    let columns: Vec<[f64; 5]> = r
        .phases
        .iter()
        .map(|&delta| {
            [
                delta,
                g2_total(delta, &sfe, &w_sfe, SpinMode::PolarizedEqual),
                g2_total(delta, &sfe, &w_sfe, SpinMode::Unpolarized),
                g2_total(delta, &r.stats, &w_mfe, SpinMode::Unpolarized),
                g2_bosonic_reference(delta, 2.0),
            ]
        })
        .collect();
    let rows: Vec<Vec<String>> = columns.iter().map(|c| c.iter().map(|&x| fmt_f64(x)).collect()).collect();
    write_csv(
        args.out.as_deref(),
        &[
            "delta_rad",
            "g2_fermi_polarized",
            "g2_fermi_unpolarized_sfe",
            "g2_fermi_unpolarized_mfe",
            "g2_boson_reference",
        ],
        &rows,
    )?;

    let mut d = derived(&r, phase_range(&r))?;
    let names = ["polarized", "unpolarized_sfe", "unpolarized_mfe", "boson"];
    for (i, name) in names.iter().enumerate() {
        let col: Vec<f64> = columns.iter().map(|c| c[i + 1]).collect();
        d.extra.insert(format!("contrast_{name}"), contrast(&col));
    }
    d.extra.insert("visibility_polarized".into(), visibility(&sfe, SpinMode::PolarizedEqual)?);
    d.extra.insert("visibility_unpolarized_sfe".into(), visibility(&sfe, SpinMode::Unpolarized)?);
    d.extra.insert("visibility_unpolarized_mfe".into(), visibility(&r.stats, SpinMode::Unpolarized)?);
    finish(args.out.as_deref(), RunManifest::new("closed-form", &cfg, d, args.stamp), &[])?;
    Ok(EXIT_OK)
}

pub fn coulomb(args: &RunArgs) -> Result<i32> {
    let (cfg, r) = load(args)?;
    let mut d = derived(&r, screen_delta_range(&r))?;
    let dip_path = args.out.as_deref().map(|p| sibling(p, "dip.json"));
    match dip_width_numeric(&r.geometry, &r.integrator) {
        Ok((dip, traj)) => {
            let rows: Vec<Vec<String>> = (0..traj.times.len())
                .map(|i| {
                    vec![
                        fmt_f64(traj.times[i]),
                        fmt_f64(traj.separations[i]),
                        fmt_f64(traj.velocities[i]),
                        fmt_f64(traj.energy_drift[i]),
                    ]
                })
                .collect();
            write_csv(args.out.as_deref(), &["t_s", "z_m", "zdot_m_per_s", "energy_drift"], &rows)?;
            let report = serde_json::json!({
                "converged": true,
                "dip": dip,
                "t99_below_one_percent_of_tf": dip.quick_acceleration(),
                "energy_drift_below_1e-6": dip.max_energy_drift < 1e-6,
            });
            match &dip_path {
                Some(p) => write_json(p, &report)?,
                None => eprintln!("{}", serde_json::to_string_pretty(&report)?),
            }
            d.extra.insert("z_dip_numeric_m".into(), dip.z_dip);
            d.extra.insert("relative_difference".into(), dip.relative_difference);
            d.extra.insert("t_99_s".into(), dip.t_99);
            let extra: Vec<&Path> = dip_path.iter().map(|p| p.as_path()).collect();
            finish(args.out.as_deref(), RunManifest::new("coulomb", &cfg, d, args.stamp), &extra)?;
            Ok(EXIT_OK)
        }
        Err(err @ Error::NonConvergence { .. }) => {
            let report = serde_json::json!({
                "converged": false,
                "error": err.to_string(),
            });
            if let Some(p) = &dip_path {
                write_json(p, &report)?;
                finish(args.out.as_deref(), RunManifest::new("coulomb", &cfg, d, args.stamp), &[p.as_path()])?;
            }
            eprintln!("error: {err}");
            Ok(EXIT_NON_CONVERGENCE)
        }
        Err(e) => Err(e),
    }
}

pub fn compose(args: &RunArgs) -> Result<i32> {
    let (cfg, r) = load(args)?;
    let series = compose_pattern(&r.geometry, &r.stats, r.spin_mode, &r.screen, r.dip)?;
    let rows: Vec<Vec<String>> = series
        .points
        .iter()
        .map(|p| {
            [p.x, p.theta, p.delta, p.g2_fermi, p.envelope, p.g2_total]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect()
        })
        .collect();
    write_csv(
        args.out.as_deref(),
        &["x_m", "theta_rad", "delta_rad", "g2_fermi", "envelope", "g2_total"],
        &rows,
    )?;
    let mut d = derived(&r, screen_delta_range(&r))?;
    d.extra.insert("maxima_in_dip".into(), series.maxima_in_dip() as f64);
    d.extra.insert("contrast".into(), series.contrast());
    finish(args.out.as_deref(), RunManifest::new("compose", &cfg, d, args.stamp), &[])?;
    Ok(EXIT_OK)
}

struct SweepRow {
    value: f64,
    lambda_sp: f64,
    z_dip: f64,
    n: f64,
    z_dip_numeric: f64,
    n_numeric: f64,
    visibility: Option<f64>,
}

fn sweep_row(base: &RunConfig, parameter: SweepParameter, value: f64) -> Result<SweepRow> {
    let cfg = base.with_parameter(parameter, value);
    let r = cfg.resolve()?;
    let g: &Geometry = &r.geometry;
    let lambda_sp = spatial_wavelength(g);
    let (dip, _) = dip_width_numeric(g, &r.integrator)?;
    Ok(SweepRow {
        value,
        lambda_sp,
        z_dip: dip_width(g),
        n: fringe_count(g.tip_separation())?,
        z_dip_numeric: dip.z_dip,
        n_numeric: dip.z_dip / lambda_sp,
        visibility: visibility(&r.stats, r.spin_mode).ok(),
    })
}

pub fn sweep(args: &SweepArgs) -> Result<i32> {
    let (cfg, r) = load(&args.run)?;
    let from_config = cfg.sweep.clone();
    let parameter = args
        .parameter
        .or(from_config.as_ref().map(|s| s.parameter))
        .ok_or_else(|| Error::Config("no sweep parameter given (use --parameter or [sweep])".into()))?;
    let values = args
        .values
        .clone()
        .or(from_config.map(|s| s.values))
        .unwrap_or_default();
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let rows = values
        .par_iter()
        .map(|&v| sweep_row(&cfg, parameter, v))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                fmt_f64(row.value),
                fmt_f64(row.lambda_sp),
                fmt_f64(row.z_dip),
                fmt_f64(row.n),
                fmt_f64(row.z_dip_numeric),
                fmt_f64(row.n_numeric),
                row.visibility.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    let value_col = format!("{}_value", parameter.name());
    write_csv(
        args.run.out.as_deref(),
        &[
            value_col.as_str(),
            "lambda_sp_m",
            "z_dip_m",
            "fringe_count",
            "z_dip_numeric_m",
            "fringe_count_numeric",
            "visibility",
        ],
        &cells,
    )?;

    let mut d = derived(&r, screen_delta_range(&r))?;
    if parameter == SweepParameter::TipSeparation && rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
        let closed: Vec<f64> = rows.iter().map(|r| r.n.ln()).collect();
        let numeric: Vec<f64> = rows.iter().map(|r| r.n_numeric.ln()).collect();
        d.extra.insert("slope_log_n_log_d".into(), log_slope(&xs, &closed));
        d.extra.insert("slope_log_n_log_d_numeric".into(), log_slope(&xs, &numeric));
    }
    let spread = |f: fn(&SweepRow) -> f64| {
        let hi = rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let lo = rows.iter().map(f).fold(f64::INFINITY, f64::min);
        (hi - lo) / lo
    };
    d.extra.insert("fringe_count_relative_spread".into(), spread(|r| r.n));
    if rows.iter().all(|r| r.visibility.is_some()) {
        d.extra.insert("visibility_relative_spread".into(), spread(|r| r.visibility.unwrap_or(0.0)));
    }
    let mut manifest = RunManifest::new("sweep", &cfg, d, args.run.stamp);
    manifest.command = format!("sweep {}", parameter.name());
    finish(args.run.out.as_deref(), manifest, &[])?;
    Ok(EXIT_OK)
}

/// Agreement tolerance between the Fock-space and closed-form correlators.
pub const ORACLE_TOL: f64 = 1e-10;

/// `|a - b|` relative to `|b|`, floored at `scale` so that exact zeros of
/// the pattern compare on an absolute footing.
pub fn relative_gap(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / b.abs().max(scale)
}

pub fn oracle(args: &RunArgs) -> Result<i32> {
    let (cfg, r) = load(args)?;
    let raw_weights = EnvelopeWeights::new(0.5, 0.5)?;
    let p1 = r.stats.p1();
    let scale = if p1 > 0.0 { 2.0 / (4.0 * p1 * p1 * 0.25) } else { 1.0 };
    let floor = 1e-12 * (p1 * p1).max(r.stats.p0() * r.stats.p2());
    let rows = r
        .phases
        .par_iter()
        .map(|&delta| {
            let (engine, d1, d2) = FockEngine::two_detector(StatisticsKind::Fermion, r.geometry, delta)?;
            let rho = engine
                .two_source_ensemble(&r.stats, PairCounting::Unordered)?
                .with_particle_number(2);
            let mut row = vec![delta];
            let mut worst: f64 = 0.0;
            for mode in SpinMode::ALL {
                let numeric = engine.g2_numeric(&rho, &d1, &d2, mode)?;
                let closed = g2_total(delta, &r.stats, &raw_weights, mode);
                worst = worst.max(relative_gap(numeric, closed, floor));
                row.push(scale * numeric);
                row.push(scale * closed);
            }
            row.push(worst);
            Ok(row)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect()).collect();
    write_csv(
        args.out.as_deref(),
        &[
            "delta_rad",
            "numeric_polarized",
            "closed_polarized",
            "numeric_unpolarized",
            "closed_unpolarized",
            "numeric_orthogonal",
            "closed_orthogonal",
            "max_relative_gap",
        ],
        &cells,
    )?;
    let worst = rows.iter().map(|r| r[7]).fold(0.0, f64::max);
    let mut d = derived(&r, phase_range(&r))?;
    d.extra.insert("max_relative_gap".into(), worst);
    finish(args.out.as_deref(), RunManifest::new("oracle", &cfg, d, args.stamp), &[])?;
    if worst > ORACLE_TOL {
        eprintln!("oracle mismatch: max relative gap {worst:e} exceeds {ORACLE_TOL:e}");
        return Ok(EXIT_VERIFY_FAILED);
    }
    Ok(EXIT_OK)
}
