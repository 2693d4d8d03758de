//! How the truncation cutoff moves the exact Mandel Q, written as CSV and SVG
//! into the working directory.
//!
//! `cargo run --example cutoff_study`

use paraosc::experiments::{cutoff_study, to_csv, Statistic};
use paraosc::plot::render_svg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = cutoff_study(0.3, &[1, 2, 3, 4, 5, 6, 7], &[1, 2, 3, 4, 5])?;
    let csv = to_csv(&points, &["cutoff example, alpha=0.3".to_string()]);
    std::fs::write("cutoff.csv", &csv)?;
    std::fs::write("cutoff.svg", render_svg(&points, Statistic::MandelQ, "p"))?;
    print!("{csv}");
    Ok(())
}
