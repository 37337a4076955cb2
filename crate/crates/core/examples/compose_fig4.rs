//! Screen pattern with the Coulomb dip imposed, for a tip separation where
//! the dip covers several fringes and one where it covers less than one.
//!
//! cargo run --release --example compose_fig4

use hbt_sim::closed_form::{SourceStatistics, SpinMode};
use hbt_sim::pattern::{compose_pattern, DipModel, ScreenGrid};
use hbt_sim::physics::Geometry;

fn main() -> hbt_sim::Result<()> {
    let stats = SourceStatistics::single_emitter(0.1)?;
    for (d, half_width, n) in [(1e-8, 0.04, 8001), (1e-11, 1.5, 3001)] {
        let geom = Geometry::new(d, 1.0, 1e11)?;
        let grid = ScreenGrid::symmetric(half_width, n)?;
        let series = compose_pattern(&geom, &stats, SpinMode::PolarizedEqual, &grid, DipModel::Central { depth: 1.0 })?;
        let m = &series.metadata;
        println!("d = {d:.0e} m");
        println!("  fringe spacing {:.4e} m", m.lambda_sp);
        println!("  dip width      {:.4e} m", m.z_dip);
        println!("  fringes in dip {:.4}", m.fringe_count);
        println!("  maxima in dip  {}", series.maxima_in_dip());
        println!("  contrast       {:.4}", series.contrast());

        // coarse ASCII plot of the composed pattern
        let rows = 41;
        let step = (n - 1) / (rows - 1);
        for p in series.points.iter().step_by(step) {
            let bar = (p.g2_total / 4.0 * 60.0).round() as usize;
            println!("  {:>+10.3e} |{}", p.x, "#".repeat(bar));
        }
        println!();
    }
    Ok(())
}
