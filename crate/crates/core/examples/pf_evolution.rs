//! Number evolution of a driven order-2 para-Fermi oscillator, exact against
//! sampled.
//!
//! `cargo run --release --example pf_evolution`

use paraosc::experiments::{default_times, run_pf_evolution, RunOptions, Source, DEFAULT_G};

fn main() -> paraosc::error::Result<()> {
    let opts = RunOptions { seed: 7, ..RunOptions::default() };
    let points = run_pf_evolution(2, DEFAULT_G, &default_times(DEFAULT_G), &opts)?;
    println!("{:>8} {:>9} {:>9} {:>8}", "g t", "exact", "shots", "stderr");
    for pt in &points {
        let exact = pt.get(Source::Exact).unwrap();
        let shots = pt.get(Source::ShotsRaw).unwrap();
        println!("{:>8.4} {:>9.5} {:>9.5} {:>8.5}", pt.x, exact.mean_n, shots.mean_n, shots.stderr_mean);
    }
    Ok(())
}
