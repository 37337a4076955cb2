//! Integrates the relative Coulomb motion of two electrons released at rest
//! and turns the end velocity into a dip width on the screen.
//!
//! cargo run --release --example coulomb_dip [d_in_metres]

use hbt_sim::coulomb::{convergence_study, dip_width_numeric, end_velocity_closed_form, IntegratorConfig};
use hbt_sim::physics::Geometry;

fn main() -> hbt_sim::Result<()> {
    let d: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1e-8);
    let geom = Geometry::new(d, 1.0, 1e11)?;
    let cfg = IntegratorConfig::for_separation(d)?;
    let (dip, traj) = dip_width_numeric(&geom, &cfg)?;

    println!("d                 {d:.3e} m");
    println!("steps             {}", dip.steps);
    println!("final separation  {:.3e} m", traj.final_separation());
    println!("v_end numeric     {:.10e} m/s", dip.v_rel_end);
    println!("v_end last step   {:.10e} m/s", dip.v_rel_final_step);
    println!("v_end closed form {:.10e} m/s", end_velocity_closed_form(d)?);
    println!("max energy drift  {:.2e}", dip.max_energy_drift);
    println!("t_99 / t_f        {:.2e}", dip.t_99 / dip.t_f);
    println!("z_dip numeric     {:.6e} m", dip.z_dip);
    println!("z_dip closed form {:.6e} m", dip.z_dip_analytic);

    let study = convergence_study(d, &[50.0, 100.0, 200.0, 400.0])?;
    println!();
    println!("dt            relative error");
    for (dt, err) in study.dts.iter().zip(&study.errors) {
        println!("{dt:.3e}  {err:.3e}");
    }
    println!("order {:.3}", study.order);
    Ok(())
}
