//! Spread of the dip width when the wave number is drawn from a narrow
//! normal distribution, and the pattern averaged over that spread.
//!
//! cargo run --release --example momentum_spread [sigma_k_rel]

use hbt_sim::closed_form::{SourceStatistics, SpinMode};
use hbt_sim::coulomb::{dip_width, sample_dip_widths, SampleSummary};
use hbt_sim::pattern::{compose_pattern, DipModel, ScreenGrid};
use hbt_sim::physics::Geometry;

fn main() -> hbt_sim::Result<()> {
    let sigma: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.005);
    let geom = Geometry::new(1e-8, 1.0, 1e11)?;

    let samples = sample_dip_widths(&geom, sigma, 10_000, 7)?;
    let s = SampleSummary::of(&samples);
    let z = dip_width(&geom);
    println!("central z_dip       {z:.6e} m");
    println!("mean z_dip          {:.6e} m (+- {:.1e})", s.mean, s.std_error);
    println!("relative std        {:.5}", s.std_dev / s.mean);
    println!("sigma_k / k         {sigma:.5}");

    let stats = SourceStatistics::single_emitter(0.1)?;
    let grid = ScreenGrid::symmetric(0.04, 801)?;
    let central = compose_pattern(&geom, &stats, SpinMode::PolarizedEqual, &grid, DipModel::Central { depth: 1.0 })?;
    let averaged = compose_pattern(
        &geom,
        &stats,
        SpinMode::PolarizedEqual,
        &grid,
        DipModel::SpreadAveraged {
            depth: 1.0,
            sigma_k_rel: sigma,
            samples: 1000,
            seed: 7,
        },
    )?;
    let worst = central
        .points
        .iter()
        .zip(&averaged.points)
        .map(|(a, b)| (a.envelope - b.envelope).abs())
        .fold(0.0, f64::max);
    println!("max envelope change {worst:.3e}");
    Ok(())
}
