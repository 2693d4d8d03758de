//! Compiles a factorized displacement to native gates and checks the
//! circuit against the exponential product.
//!
//! `cargo run --example compile_circuit`

use paraosc::algebra::ParaSpec;
use paraosc::compile::{circuit_unitary, compile_displacement, compile_displacement_fixed_depth, gate_counts};
use paraosc::factor::{factorize, product_unitary, Space};
use paraosc::linalg::phase_distance;

fn main() -> paraosc::error::Result<()> {
    let spec = ParaSpec::para_fermi(4)?;
    let (problem, gv, _) = factorize(&spec, 0.5, 1e-9, 0)?;
    let circuit = compile_displacement(&gv, &problem.basis)?;
    let fixed = compile_displacement_fixed_depth(&gv, &problem.basis)?;
    let target = product_unitary(&gv, &problem.basis, Space::Full)?;
    for (name, c) in [("optimized", &circuit), ("fixed depth", &fixed)] {
        let n = gate_counts(c);
        let d = phase_distance(&circuit_unitary(c)?, &target);
        println!("{name:<12} {:>3} one-qubit {:>3} XX  distance {d:.2e}", n.one_qubit, n.two_qubit);
    }
    print!("{}", circuit.to_text());
    Ok(())
}
