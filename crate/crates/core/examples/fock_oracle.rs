//! Builds the two-tip state in Fock space, evaluates the normally ordered
//! correlator at two detectors, and compares it with the closed form. Then
//! drops the exchange sign to show what breaks.
//!
//! cargo run --release --example fock_oracle

use std::f64::consts::PI;

use hbt_sim::closed_form::{g2_total, EnvelopeWeights, SourceStatistics, SpinMode};
use hbt_sim::fock::{FockEngine, PairCounting, Spin, StatisticsKind};
use hbt_sim::physics::Geometry;

fn main() -> hbt_sim::Result<()> {
    let geom = Geometry::new(1e-8, 1.0, 1e11)?;
    let stats = SourceStatistics::new(0.78, 0.1, 0.005)?;
    let w = EnvelopeWeights::new(0.5, 0.5)?;

    println!("{:>8} {:>14} {:>14} {:>14} {:>10}", "delta/pi", "fock", "closed", "no sign", "gap");
    for i in 0..=8 {
        let delta = -PI + i as f64 * PI / 4.0;
        let (engine, d1, d2) = FockEngine::two_detector(StatisticsKind::Fermion, geom, delta)?;
        // the closed form keeps only two-electron branches
        let rho = engine.two_source_ensemble(&stats, PairCounting::Unordered)?.with_particle_number(2);
        let numeric = engine.g2_numeric(&rho, &d1, &d2, SpinMode::Unpolarized)?;
        let closed = g2_total(delta, &stats, &w, SpinMode::Unpolarized);

        let broken = engine.clone().with_exchange_sign_dropped();
        let rho_b = broken.two_source_ensemble(&stats, PairCounting::Unordered)?.with_particle_number(2);
        let no_sign = broken.g2_numeric(&rho_b, &d1, &d2, SpinMode::Unpolarized)?;

        println!(
            "{:>8.2} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.1e}",
            delta / PI,
            numeric,
            closed,
            no_sign,
            (numeric - closed).abs() / closed.abs().max(1e-300)
        );
    }

    let delta = PI / 3.0;
    let (engine, d1, d2) = FockEngine::two_detector(StatisticsKind::Fermion, geom, delta)?;
    let rho = engine.two_source_ensemble(&stats, PairCounting::Unordered)?;
    let terms = engine.g2_term_decomposition(&rho, &d1, &d2, (Spin::Up, Spin::Up))?;
    println!();
    println!("up-up paths at delta = pi/3:");
    for (name, t) in ["same tip 1", "same tip 2", "direct 1", "direct 2", "exchange 1", "exchange 2"]
        .iter()
        .zip(terms.0)
    {
        println!("  {name:<11} {:+.6e} {:+.6e}i", t.re, t.im);
    }
    Ok(())
}
