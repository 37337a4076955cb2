//! Semiclassical Coulomb repulsion between the two detected electrons.
//!
//! Both electrons leave their tips with the same momentum `hbar k`, so the
//! relative motion starts from rest at separation `d0`. With the reduced mass
//! `m_e / 2` the relative coordinate obeys
//!
//! ```text
//! z'' = e^2 / (2 pi eps0 m_e z^2)
//! ```
//!
//! and energy conservation, `(m_e / 4) v_end^2 = e^2 / (4 pi eps0 d0)`, gives
//! the asymptotic speed `v_end = sqrt(e^2 / (pi eps0 m_e d0))`. Using the
//! full `m_e` instead would shrink `v_end` and the dip by a factor `sqrt 2`. The centre of mass flies to the
//! screen in `t_f = D m_e / (hbar k)`; since the acceleration is over long
//! before that, the dip width on the screen is `z_dip = v_end t_f`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{Geometry, CODATA};

/// Pairwise repulsion on particle 1 at `r1` from particle 2 at `r2` [N].
pub fn coulomb_force(r1: [f64; 3], r2: [f64; 3]) -> Result<[f64; 3]> {
    let d = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let r2sum = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if r2sum == 0.0 || !r2sum.is_finite() {
        return Err(Error::CoincidentPositions);
    }
    let scale = CODATA.coulomb_coupling() / (r2sum * r2sum.sqrt());
    Ok([scale * d[0], scale * d[1], scale * d[2]])
}

fn reduced_mass() -> f64 {
    0.5 * CODATA.electron_mass()
}

/// `z'' = accel_coefficient / z^2` [m^3/s^2].
fn accel_coefficient() -> f64 {
    CODATA.coulomb_coupling() / reduced_mass()
}

/// Relative energy `mu v^2 / 2 + e^2 / (4 pi eps0 z)` [J].
pub fn relative_energy(z: f64, v: f64) -> f64 {
    0.5 * reduced_mass() * v * v + CODATA.coulomb_coupling() / z
}

fn check_separation(d0: f64) -> Result<()> {
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial separation must be positive, got {d0}"
        )));
    }
    Ok(())
}

/// Asymptotic relative speed from rest at `d0` [m/s].
pub fn end_velocity_closed_form(d0: f64) -> Result<f64> {
    check_separation(d0)?;
    let c = CODATA;
    let e2 = c.elementary_charge().powi(2);
    Ok((e2 / (std::f64::consts::PI * c.vacuum_permittivity() * c.electron_mass() * d0)).sqrt())
}

/// Analytic dip width on the screen [m].
pub fn dip_width(geom: &Geometry) -> f64 {
    end_velocity_closed_form(geom.tip_separation()).expect("geometry has d > 0")
        * geom.time_of_flight()
}

/// Fringes inside the dip, `sqrt(e^2 m_e / (pi eps0 h^2)) sqrt(d)`.
pub fn fringe_count(d: f64) -> Result<f64> {
    check_separation(d)?;
    let c = CODATA;
    let coeff = c.elementary_charge().powi(2) * c.electron_mass()
        / (std::f64::consts::PI * c.vacuum_permittivity() * c.planck().powi(2));
    Ok(coeff.sqrt() * d.sqrt())
}

/// Velocity-Verlet driver settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Time step [s].
    pub dt: f64,
    /// Hard cap on integration time [s].
    pub t_max: f64,
    /// Relative velocity change over `window` steps that counts as converged.
    pub v_tol: f64,
    /// Separation beyond which integration stops regardless [m].
    pub z_stop: f64,
    pub window: usize,
    /// Record every `sample_stride`-th step in the trajectory.
    pub sample_stride: usize,
}

impl IntegratorConfig {
    pub const DEFAULT_STEPS_PER_TAU: f64 = 1e4;
    pub const DEFAULT_V_TOL: f64 = 1e-6;
    pub const DEFAULT_WINDOW: usize = 1000;
    /// Convergence additionally requires `z > MIN_SEPARATION_RATIO * d0`.
    pub const MIN_SEPARATION_RATIO: f64 = 100.0;

    /// Defaults for a start at `d0`: `dt = tau / 1e4` with
    /// `tau = d0 / v_end`, and generous time and distance caps.
    pub fn for_separation(d0: f64) -> Result<Self> {
        let tau = d0 / end_velocity_closed_form(d0)?;
        Ok(IntegratorConfig {
            dt: tau / Self::DEFAULT_STEPS_PER_TAU,
            t_max: 1e6 * tau,
            v_tol: Self::DEFAULT_V_TOL,
            z_stop: 1e6 * d0,
            window: Self::DEFAULT_WINDOW,
            sample_stride: 100,
        })
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self, d0: f64) -> Result<()> {
        check_separation(d0)?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max > self.dt) {
            return bad(format!("t_max must exceed dt, got {}", self.t_max));
        }
        if !(self.v_tol > 0.0 && self.v_tol < 1.0) {
            return bad(format!("v_tol must lie in (0, 1), got {}", self.v_tol));
        }
        if !(self.z_stop > d0) {
            return bad(format!("z_stop {} must exceed d0 {d0}", self.z_stop));
        }
        if self.window == 0 || self.sample_stride == 0 {
            return bad("window and sample_stride must be positive".into());
        }
        Ok(())
    }
}

/// Sampled relative-coordinate solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub d0: f64,
    pub times: Vec<f64>,
    pub separations: Vec<f64>,
    pub velocities: Vec<f64>,
    /// `(E(t) - E(0)) / E(0)` at each sample.
    pub energy_drift: Vec<f64>,
    /// Largest `|E(t) - E(0)| / E(0)` over every step, not just samples.
    pub max_energy_drift: f64,
    pub steps: u64,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has samples")
    }

    pub fn final_separation(&self) -> f64 {
        *self.separations.last().expect("trajectory has samples")
    }

    /// Raw relative speed at the last step.
    pub fn final_velocity(&self) -> f64 {
        *self.velocities.last().expect("trajectory has samples")
    }

    /// Speed at infinity implied by the last state,
    /// `sqrt(v^2 + 2 e^2 / (4 pi eps0 mu z))`.
    pub fn asymptotic_velocity(&self) -> f64 {
        let v = self.final_velocity();
        let z = self.final_separation();
        (v * v + 2.0 * accel_coefficient() / z).sqrt()
    }

    /// First time the speed reaches `fraction` of `target`, linearly
    /// interpolated between samples.
    pub fn time_to_reach(&self, fraction: f64, target: f64) -> Option<f64> {
        let goal = fraction * target;
        let i = self.velocities.iter().position(|&v| v >= goal)?;
        if i == 0 {
            return Some(self.times[0]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.velocities[i - 1], self.velocities[i]);
        Some(t0 + (goal - v0) / (v1 - v0) * (t1 - t0))
    }
}

/// Velocity-Verlet solution from rest at `d0`, run until the speed settles
/// (trailing-window change below `v_tol` with `z > 100 d0`) or `z > z_stop`.
pub fn integrate_relative(d0: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate(d0)?;
    let a_coef = accel_coefficient();
    let dt = cfg.dt;
    let e0 = relative_energy(d0, 0.0);

    let (mut t, mut z, mut v) = (0.0f64, d0, 0.0f64);
    let mut a = a_coef / (z * z);
    let mut traj = Trajectory {
        d0,
        times: vec![t],
        separations: vec![z],
        velocities: vec![v],
        energy_drift: vec![0.0],
        max_energy_drift: 0.0,
        steps: 0,
    };
    let mut history = vec![0.0f64; cfg.window];
    let mut step: u64 = 0;

    loop {
        z += v * dt + 0.5 * a * dt * dt;
        let a_new = a_coef / (z * z);
        v += 0.5 * (a + a_new) * dt;
        a = a_new;
        step += 1;
        t = step as f64 * dt;

        let drift = (relative_energy(z, v) - e0) / e0;
        traj.max_energy_drift = traj.max_energy_drift.max(drift.abs());

        let slot = (step % cfg.window as u64) as usize;
        let v_old = history[slot];
        history[slot] = v;
        let settled = step >= cfg.window as u64
            && (v - v_old).abs() < cfg.v_tol * v
            && z > IntegratorConfig::MIN_SEPARATION_RATIO * d0;
        let done = settled || z > cfg.z_stop;

        if done || step.is_multiple_of(cfg.sample_stride as u64) {
            traj.times.push(t);
            traj.separations.push(z);
            traj.velocities.push(v);
            traj.energy_drift.push(drift);
        }
        if done {
            traj.steps = step;
            return Ok(traj);
        }
        if t > cfg.t_max {
            return Err(Error::NonConvergence {
                t_max: cfg.t_max,
                z,
                v,
                steps: step,
            });
        }
    }
}

/// Numeric dip width together with its analytic counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipResult {
    /// Asymptotic relative speed from the integrated trajectory [m/s].
    pub v_rel_end: f64,
    /// Raw relative speed at the last step [m/s].
    pub v_rel_final_step: f64,
    pub v_rel_end_analytic: f64,
    pub t_f: f64,
    pub v_cms: f64,
    /// Time to reach 99% of `v_rel_end` [s].
    pub t_99: f64,
    pub z_dip: f64,
    pub z_dip_analytic: f64,
    pub relative_difference: f64,
    pub max_energy_drift: f64,
    pub steps: u64,
}

impl DipResult {
    pub fn quick_acceleration(&self) -> bool {
        self.t_99 < 1e-2 * self.t_f
    }
}

pub fn dip_width_numeric(geom: &Geometry, cfg: &IntegratorConfig) -> Result<(DipResult, Trajectory)> {
    let d0 = geom.tip_separation();
    let traj = integrate_relative(d0, cfg)?;
    let v_end = traj.asymptotic_velocity();
    let t_f = geom.time_of_flight();
    let z_dip = v_end * t_f;
    let z_dip_analytic = dip_width(geom);
    let t_99 = traj
        .time_to_reach(0.99, v_end)
        .expect("trajectory settles above 99% of its asymptote");
    Ok((
        DipResult {
            v_rel_end: v_end,
            v_rel_final_step: traj.final_velocity(),
            v_rel_end_analytic: end_velocity_closed_form(d0)?,
            t_f,
            v_cms: geom.center_of_mass_speed(),
            t_99,
            z_dip,
            z_dip_analytic,
            relative_difference: (z_dip - z_dip_analytic) / z_dip_analytic,
            max_energy_drift: traj.max_energy_drift,
            steps: traj.steps,
        },
        traj,
    ))
}

/// End-velocity error against the closed form for a ladder of step sizes
/// `dt = tau / s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub d0: f64,
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log dt`.
    pub order: f64,
}

pub fn convergence_study(d0: f64, steps_per_tau: &[f64]) -> Result<ConvergenceStudy> {
    if steps_per_tau.len() < 3 {
        return Err(Error::InvalidParameter(
            "convergence study needs at least three step sizes".into(),
        ));
    }
    let v_ref = end_velocity_closed_form(d0)?;
    let tau = d0 / v_ref;
    let base = IntegratorConfig::for_separation(d0)?;
    let runs: Vec<Result<(f64, f64)>> = steps_per_tau
        .par_iter()
        .map(|&s| {
            let dt = tau / s;
            let traj = integrate_relative(d0, &base.with_dt(dt))?;
            Ok((dt, (traj.asymptotic_velocity() - v_ref).abs() / v_ref))
        })
        .collect();
    let (dts, errors): (Vec<f64>, Vec<f64>) = runs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let xs: Vec<f64> = dts.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|y| y.ln()).collect();
    Ok(ConvergenceStudy {
        d0,
        dts,
        errors,
        order: log_slope(&xs, &ys),
    })
}

/// Ordinary least-squares slope.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Smallest accepted sample count for [`sample_dip_widths`].
pub const MIN_SPREAD_SAMPLES: usize = 100;

/// Analytic dip widths for `n` wave numbers drawn from
/// `Normal(k0, sigma_k_rel k0)`, rejecting `k <= 0`. Sample `i` uses its own
/// ChaCha stream, so the result does not depend on thread scheduling.
pub fn sample_dip_widths(geom: &Geometry, sigma_k_rel: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(sigma_k_rel > 0.0 && sigma_k_rel < 0.2) {
        return Err(Error::InvalidParameter(format!(
            "sigma_k_rel must lie in (0, 0.2), got {sigma_k_rel}"
        )));
    }
    if n < MIN_SPREAD_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SPREAD_SAMPLES} samples, got {n}"
        )));
    }
    let k0 = geom.wave_number();
    let normal = Normal::new(k0, sigma_k_rel * k0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let v_end = end_velocity_closed_form(geom.tip_separation())?;
    let scale = v_end * geom.screen_distance() * CODATA.electron_mass() / CODATA.hbar();
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let k = loop {
                let k = normal.sample(&mut rng);
                if k > 0.0 {
                    break k;
                }
            };
            scale / k
        })
        .collect())
}

/// Mean, standard deviation and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
}

impl SampleSummary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let std_dev = var.sqrt();
        SampleSummary {
            n,
            mean,
            std_dev,
            std_error: std_dev / (n as f64).sqrt(),
        }
    }
}
