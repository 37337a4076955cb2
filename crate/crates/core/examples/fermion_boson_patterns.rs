//! Fermionic antibunching next to bosonic bunching, for a single-electron
//! source and for a Poissonian source.
//!
//! cargo run --example fermion_boson_patterns

use std::f64::consts::PI;

use hbt_sim::closed_form::{
    g2_bosonic_reference, g2_total, poissonian_stats, visibility, EnvelopeWeights, SourceStatistics, SpinMode,
};

fn main() -> hbt_sim::Result<()> {
    let sfe = SourceStatistics::single_emitter(0.1)?;
    let mfe = poissonian_stats(0.2)?;
    let w_sfe = EnvelopeWeights::plot_normalized(&sfe)?;
    let w_mfe = EnvelopeWeights::plot_normalized(&mfe)?;

    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "delta/pi", "polarized", "unpol", "poisson", "boson");
    for i in 0..=16 {
        let delta = -2.0 * PI + i as f64 * PI / 4.0;
        println!(
            "{:>8.2} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            delta / PI,
            g2_total(delta, &sfe, &w_sfe, SpinMode::PolarizedEqual),
            g2_total(delta, &sfe, &w_sfe, SpinMode::Unpolarized),
            g2_total(delta, &mfe, &w_mfe, SpinMode::Unpolarized),
            g2_bosonic_reference(delta, 2.0),
        );
    }

    println!();
    println!("visibility polarized        {:.4}", visibility(&sfe, SpinMode::PolarizedEqual)?);
    println!("visibility unpolarized      {:.4}", visibility(&sfe, SpinMode::Unpolarized)?);
    println!(
        "visibility poisson mu = 0.2 {:.4}  (p0 p2 / p1^2 = {:.4})",
        visibility(&mfe, SpinMode::Unpolarized)?,
        mfe.offset_ratio().unwrap_or(f64::NAN)
    );
    Ok(())
}
