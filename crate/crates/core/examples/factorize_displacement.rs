//! Factorizes a displacement into two-body exponentials and prints the
//! angle document.
//!
//! `cargo run --example factorize_displacement -- pb 3 2 0.5`

use paraosc::algebra::{ParaKind, ParaSpec};
use paraosc::factor::{factorize, GammaDocument};

fn main() -> paraosc::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind = if args.first().map(String::as_str) == Some("pf") { ParaKind::ParaFermi } else { ParaKind::ParaBose };
    let p = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let np = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let alpha = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let spec = ParaSpec::new(kind, p, (kind == ParaKind::ParaBose).then_some(np))?;
    let (problem, gv, method) = factorize(&spec, alpha, 1e-9, 0)?;
    eprintln!("{spec}: {method:?}, one-hot residual {:.2e}", gv.residual);
    println!("{}", GammaDocument::new(&problem, &gv, method).to_json());
    Ok(())
}
