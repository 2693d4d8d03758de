//! Mandel Q of displaced para-Bose vacua as the order grows.
//!
//! `cargo run --release --example pb_mandel -- 0.3`

use paraosc::experiments::{run_pb_mandel_sweep, RunOptions, Source};

fn main() -> paraosc::error::Result<()> {
    let alpha = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let opts = RunOptions { seed: 11, ..RunOptions::default() };
    let points = run_pb_mandel_sweep(alpha, &[1, 2, 3, 4, 5, 6, 7], 2, &opts)?;
    println!("{:>3} {:>10} {:>10} {:>8}", "p", "exact Q", "shots Q", "stderr");
    for pt in &points {
        let exact = pt.get(Source::Exact).unwrap();
        let shots = pt.get(Source::ShotsRaw).unwrap();
        let fmt = |v: Option<f64>| v.map_or("undef".to_string(), |q| format!("{q:.5}"));
        println!("{:>3} {:>10} {:>10} {:>8}", pt.x, fmt(exact.mandel_q), fmt(shots.mandel_q), fmt(shots.stderr_q));
    }
    Ok(())
}
