//! Prints the commutator table of the two-body generators on a register.
//!
//! `cargo run --example commutator_table -- 5`

use paraosc::qubit_map::{commutator_table, generator_family};

fn main() -> paraosc::error::Result<()> {
    let q: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let basis = generator_family(q)?;
    let table = commutator_table(&basis)?;
    let labels = basis.labels();
    print!("{:>4}", "");
    for l in &labels {
        print!("{l:>8}");
    }
    println!();
    for r in &labels {
        print!("{r:>4}");
        for l in &labels {
            print!("{:>8}", table.render(table.get(r, l).unwrap()));
        }
        println!();
    }
    for g in basis.generators() {
        let terms: Vec<String> = g.sum.terms().iter().map(ToString::to_string).collect();
        println!("{:<3} = {}", g.label, terms.join(" + "));
    }
    Ok(())
}
