//! Samples a compiled circuit under readout and gate noise, then applies
//! readout correction and one-hot post-selection.
//!
//! `cargo run --example noisy_sampling`

use paraosc::algebra::ParaSpec;
use paraosc::compile::compile_displacement;
use paraosc::experiments::{number_stats, stats_from_marginals, Source};
use paraosc::factor::factorize;
use paraosc::sim::{postselect, run_shots, spam_correct, Marginals, NoiseModel, SamplingMode};

fn main() -> paraosc::error::Result<()> {
    let spec = ParaSpec::para_bose(3, 2)?;
    let (problem, gv, _) = factorize(&spec, 0.4, 1e-9, 0)?;
    let circuit = compile_displacement(&gv, &problem.basis)?;
    let noise = NoiseModel {
        eps01: 0.02,
        eps10: 0.05,
        p_depol_1q: 0.001,
        p_depol_2q: 0.01,
        ..NoiseModel::ideal()
    };
    let shots = run_shots(&circuit, 5000, Some(&noise), 3, SamplingMode::default())?;
    print!("{}", shots.to_text(Some(&noise)));

    let raw = number_stats(&shots)?;
    let kept = postselect(&shots);
    let corrected = stats_from_marginals(Source::ShotsSpam, &spam_correct(&shots, &noise)?);
    println!("raw          <N> = {:.4}", raw.mean_n);
    println!("spam         <N> = {:.4}", corrected.mean_n);
    if !kept.is_empty() {
        let m = Marginals::from_shots(&kept)?;
        let n = stats_from_marginals(Source::ShotsPostselected, &m).mean_n;
        println!("postselected <N> = {n:.4} (kept {:.3})", kept.retained_fraction);
    }
    Ok(())
}
