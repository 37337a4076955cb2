//! Number of fringes inside the dip as the tip separation changes, from the
//! closed form and from the integrator.
//!
//! cargo run --release --example scaling_sweep

use hbt_sim::coulomb::{dip_width_numeric, fringe_count, log_slope, IntegratorConfig};
use hbt_sim::pattern::spatial_wavelength;
use hbt_sim::physics::Geometry;

fn main() -> hbt_sim::Result<()> {
    let base = Geometry::new(1e-8, 1.0, 1e11)?;
    let ds: Vec<f64> = (0..=8).map(|i| 1e-11 * 10f64.powf(i as f64 / 2.0)).collect();
    let mut closed = Vec::new();
    let mut numeric = Vec::new();

    println!("{:>10} {:>12} {:>12}", "d [m]", "N closed", "N numeric");
    for &d in &ds {
        let geom = base.with_tip_separation(d)?;
        let (dip, _) = dip_width_numeric(&geom, &IntegratorConfig::for_separation(d)?)?;
        let n_num = dip.z_dip / spatial_wavelength(&geom);
        let n = fringe_count(d)?;
        println!("{d:>10.3e} {n:>12.6} {n_num:>12.6}");
        closed.push(n.ln());
        numeric.push(n_num.ln());
    }
    let xs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    println!();
    println!("d log N / d log d: closed {:.6}, numeric {:.6}", log_slope(&xs, &closed), log_slope(&xs, &numeric));

    println!();
    println!("N at d = 10 nm for other k and D:");
    for k in [5e10, 1e11, 2e11] {
        for screen in [0.5, 1.0, 2.0] {
            let g = Geometry::new(1e-8, screen, k)?;
            let n = hbt_sim::coulomb::dip_width(&g) / spatial_wavelength(&g);
            println!("  k = {k:.0e} 1/m, D = {screen} m: N = {n:.12}");
        }
    }
    Ok(())
}
