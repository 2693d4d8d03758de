//! Checks the truncated commutator identities for a few parastatistics orders.
//!
//! `cargo run --example algebra_identities`

use paraosc::algebra::{beta_constant, verify_truncation_identity, ParaSpec};

fn main() -> paraosc::error::Result<()> {
    for p in [2, 4, 6] {
        let spec = ParaSpec::para_fermi(p)?;
        let r = verify_truncation_identity(&spec, 1e-12);
        println!("{spec:<16} residual {:.2e}  {}", r.residual_norm, if r.passes { "ok" } else { "FAIL" });
    }
    for (p, np) in [(1, 3), (2, 2), (3, 1), (4, 5)] {
        let spec = ParaSpec::para_bose(p, np)?;
        let r = verify_truncation_identity(&spec, 1e-12);
        println!(
            "{spec:<16} beta {:.6}  residual {:.2e}  {}",
            beta_constant(np, p),
            r.residual_norm,
            if r.passes { "ok" } else { "FAIL" }
        );
    }
    Ok(())
}
