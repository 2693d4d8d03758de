//! Finite matrix representations of para-particle ladder, number and parity
//! operators.
//!
//! Levels are 0-based. The ladder amplitude `λ_n` is pinned by
//! `A† |n−1⟩ = λ_n |n⟩` for `n = 1..dim−1`, so the creation operator has
//! `λ_n` at row `n`, column `n − 1`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, expm_i_hermitian, max_abs, CVector, DenseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParaKind {
    ParaFermi,
    ParaBose,
}

impl ParaKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ParaKind::ParaFermi => "pf",
            ParaKind::ParaBose => "pb",
        }
    }
}

/// Para-particle family, order `p` and particle cutoff `np`.
///
/// Para-fermions exist only for even `p` and carry `np = p / 2`; their
/// representation has `p + 1` levels. Para-bosons are truncated to the
/// `np + 1` levels `|p;0⟩ … |p;np⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParaSpec {
    kind: ParaKind,
    p: u32,
    np: u32,
}

impl ParaSpec {
    pub fn para_fermi(p: u32) -> Result<Self> {
        if p == 0 || !p.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "para-Fermi order must be even and positive, got p = {p}"
            )));
        }
        Ok(Self {
            kind: ParaKind::ParaFermi,
            p,
            np: p / 2,
        })
    }

    pub fn para_bose(p: u32, np: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidSpec("para-Bose order must be >= 1".into()));
        }
        if np == 0 {
            return Err(Error::InvalidSpec("para-Bose cutoff must be >= 1".into()));
        }
        Ok(Self {
            kind: ParaKind::ParaBose,
            p,
            np,
        })
    }

    /// Generic constructor; `np` is ignored (and derived) for para-fermions
    /// unless it disagrees with `p / 2`.
    pub fn new(kind: ParaKind, p: u32, np: Option<u32>) -> Result<Self> {
        match kind {
            ParaKind::ParaFermi => {
                let spec = Self::para_fermi(p)?;
                match np {
                    Some(n) if n != spec.np => Err(Error::InvalidSpec(format!(
                        "para-Fermi cutoff is fixed to p/2 = {}, got np = {n}",
                        spec.np
                    ))),
                    _ => Ok(spec),
                }
            }
            ParaKind::ParaBose => Self::para_bose(
                p,
                np.ok_or_else(|| Error::InvalidSpec("para-Bose spec needs np".into()))?,
            ),
        }
    }

    pub fn kind(&self) -> ParaKind {
        self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn np(&self) -> u32 {
        self.np
    }

    /// Number of Fock levels, which is also the register width.
    pub fn dim(&self) -> usize {
        match self.kind {
            ParaKind::ParaFermi => self.p as usize + 1,
            ParaKind::ParaBose => self.np as usize + 1,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.dim()
    }
}

impl std::fmt::Display for ParaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} p={} np={}", self.kind.short_name(), self.p, self.np)
    }
}

fn sign(n: u64) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Squared para-Fermi weight `φ(p,n)²`, the cumulative sum of the diagonal of
/// `[A, A†] = 2(p/2 − N)R`.
pub fn para_fermi_weight_sq(p: u32, n: u32) -> f64 {
    let (p, n) = (p as f64, n as u64);
    0.5 * (p + 1.0) + 0.5 * (2.0 * n as f64 - p - 1.0) * sign(n)
}

/// Squared para-Bose weight `ζ(p,m)²`, coupling `|p;m⟩ → |p;m+1⟩`.
pub fn para_bose_weight_sq(p: u32, m: u32) -> f64 {
    let (p, mf) = (p as f64, m as f64);
    mf + 0.5 * (1.0 + p) - 0.5 * sign(m as u64) * (1.0 - p)
}

/// Amplitude `λ_n` of `A† |n−1⟩ = λ_n |n⟩`.
pub fn ladder_amplitude(spec: &ParaSpec, n: usize) -> Result<f64> {
    let max = spec.dim() - 1;
    if n == 0 || n > max {
        return Err(Error::LevelOutOfRange { n, max });
    }
    let sq = match spec.kind {
        ParaKind::ParaFermi => para_fermi_weight_sq(spec.p, n as u32),
        ParaKind::ParaBose => para_bose_weight_sq(spec.p, n as u32 - 1),
    };
    Ok(sq.max(0.0).sqrt())
}

/// Annihilation, creation, number and parity operators of one spec.
#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub a: DenseOperator,
    pub adag: DenseOperator,
    pub num: DenseOperator,
    pub parity: DenseOperator,
}

impl FockOperatorSet {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `A + A†`, the generator of the displacement.
    pub fn quadrature(&self) -> DenseOperator {
        &self.a + &self.adag
    }
}

pub fn build_fock_ops(spec: &ParaSpec) -> FockOperatorSet {
    let d = spec.dim();
    let mut adag = DenseOperator::zeros(d, d);
    for n in 1..d {
        adag[(n, n - 1)] = c(ladder_amplitude(spec, n).expect("n within 1..dim"));
    }
    let a = adag.adjoint();
    let num = DenseOperator::from_diagonal(&DVector::from_iterator(d, (0..d).map(|n| c(n as f64))));
    let parity =
        DenseOperator::from_diagonal(&DVector::from_iterator(d, (0..d).map(|n| c(sign(n as u64)))));
    FockOperatorSet {
        a,
        adag,
        num,
        parity,
    }
}

/// Double factorial with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Coefficient `β` of the cutoff term in the truncated para-Bose commutator.
pub fn beta_constant(np: u32, p: u32) -> f64 {
    let (np, p) = (np as i64, p as i64);
    if np % 2 == 1 {
        (np + 1) as f64 / double_factorial(np - 1) * double_factorial(p - 2)
            / double_factorial(np + p - 1)
    } else {
        (np + p) as f64 / double_factorial(np) * double_factorial(p - 2)
            / double_factorial(np + p - 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    pub beta: f64,
    pub residual_norm: f64,
    pub passes: bool,
}

/// Checks the defining commutator of the finite representation.
///
/// Para-Bose: `[A,A†] = 1 + (p−1)R − β A†^np A^np`. Para-Fermi:
/// `[A,A†] = 2(p/2 − N)R`, with `β` reported as 0.
pub fn verify_truncation_identity(spec: &ParaSpec, tol: f64) -> TruncationReport {
    let ops = build_fock_ops(spec);
    let d = spec.dim();
    let id = DenseOperator::identity(d, d);
    let comm = commutator(&ops.a, &ops.adag);
    let (beta, expected) = match spec.kind {
        ParaKind::ParaFermi => {
            let half_p = c(spec.p as f64 / 2.0);
            (0.0, (&id * half_p - &ops.num) * &ops.parity * c(2.0))
        }
        ParaKind::ParaBose => {
            let beta = beta_constant(spec.np, spec.p);
            let k = spec.np as usize;
            let tail = ops.adag.pow(k as u32) * ops.a.pow(k as u32);
            (
                beta,
                &id + &ops.parity * c(spec.p as f64 - 1.0) - tail * c(beta),
            )
        }
    };
    let residual_norm = max_abs(&(comm - expected));
    TruncationReport {
        beta,
        residual_norm,
        passes: residual_norm <= tol,
    }
}

/// `exp(iα(A + A†)) |p;0⟩` by Hermitian eigendecomposition.
pub fn displaced_vacuum_exact(spec: &ParaSpec, alpha: f64) -> CVector {
    let ops = build_fock_ops(spec);
    let u = expm_i_hermitian(&ops.quadrature(), alpha);
    u.column(0).into_owned()
}

/// Level populations `|⟨n|ψ⟩|²`.
pub fn level_populations(state: &CVector) -> Vec<f64> {
    state.iter().map(|z| z.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::anticommutator;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    /// Recurrence oracle: `φ(n)² − φ(n−1)² = (p − 2(n−1))(−1)^(n−1)`, `φ(0) = 0`.
    fn pf_weight_sq_by_recurrence(p: u32, n: u32) -> f64 {
        (0..n)
            .map(|k| (p as f64 - 2.0 * k as f64) * if k % 2 == 0 { 1.0 } else { -1.0 })
            .sum()
    }

    #[test]
    fn para_bose_amplitudes() {
        let s = ParaSpec::para_bose(3, 3).unwrap();
        assert!((ladder_amplitude(&s, 1).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        let boson = ParaSpec::para_bose(1, 2).unwrap();
        assert!((ladder_amplitude(&boson, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((ladder_amplitude(&boson, 2).unwrap() - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn para_fermi_amplitudes_match_recurrence() {
        let s2 = ParaSpec::para_fermi(2).unwrap();
        for n in 1..=2 {
            assert!((ladder_amplitude(&s2, n).unwrap() - SQRT_2).abs() < 1e-15);
        }
        let s4 = ParaSpec::para_fermi(4).unwrap();
        let expected = [2.0, SQRT_2, SQRT_2, 2.0];
        for (n, e) in (1..=4).zip(expected) {
            assert!((ladder_amplitude(&s4, n).unwrap() - e).abs() < 1e-15);
        }
        for p in (2..=12).step_by(2) {
            for n in 0..=p + 1 {
                assert_eq!(para_fermi_weight_sq(p, n), pf_weight_sq_by_recurrence(p, n));
            }
            // closes naturally: one level past the top has zero weight
            assert_eq!(para_fermi_weight_sq(p, p + 1), 0.0);
        }
    }

    #[test]
    fn printed_weight_formula_breaks_the_commutator() {
        // The alternative weight with n in place of 2n gives φ(2,1)² = 2.5,
        // which cannot satisfy [A,A†]|0⟩ = p|0⟩.
        let printed = |p: f64, n: f64| 0.5 * (p + 1.0) + 0.5 * (n - p - 1.0) * (-1f64).powi((p + n) as i32);
        assert_eq!(printed(2.0, 1.0), 2.5);
        assert_eq!(para_fermi_weight_sq(2, 1), 2.0);
        let report = verify_truncation_identity(&ParaSpec::para_fermi(2).unwrap(), 1e-12);
        assert!(report.passes);
    }

    #[test]
    fn amplitude_errors() {
        let s = ParaSpec::para_fermi(2).unwrap();
        assert!(matches!(
            ladder_amplitude(&s, 0),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(ladder_amplitude(&s, 3).is_err());
        assert!(ParaSpec::para_fermi(3).is_err());
        assert!(ParaSpec::para_bose(0, 2).is_err());
        assert!(ParaSpec::para_bose(1, 0).is_err());
        assert!(ParaSpec::new(ParaKind::ParaFermi, 4, Some(3)).is_err());
    }

    #[test]
    fn fock_ops_examples() {
        let pf = build_fock_ops(&ParaSpec::para_fermi(2).unwrap());
        let comm = commutator(&pf.a, &pf.adag);
        for (i, e) in [2.0, 0.0, -2.0].into_iter().enumerate() {
            assert!((comm[(i, i)].re - e).abs() < 1e-14);
        }

        let boson = build_fock_ops(&ParaSpec::para_bose(1, 2).unwrap());
        assert_eq!(boson.a[(0, 1)].re, 1.0);
        assert!((boson.a[(1, 2)].re - SQRT_2).abs() < 1e-15);
        let par: Vec<f64> = (0..3).map(|i| boson.parity[(i, i)].re).collect();
        assert_eq!(par, vec![1.0, -1.0, 1.0]);

        // couplings √2, √2: the commutator's top entry is −2 and the
        // truncation residual [A,A†] − 1 − (p−1)R there is −4 = −β·4
        let pb2 = build_fock_ops(&ParaSpec::para_bose(2, 2).unwrap());
        let comm = commutator(&pb2.a, &pb2.adag);
        let residual = &comm - DenseOperator::identity(3, 3) - &pb2.parity;
        for (i, (e, r)) in [(2.0, 0.0), (0.0, 0.0), (-2.0, -4.0)].into_iter().enumerate() {
            assert!((comm[(i, i)].re - e).abs() < 1e-14);
            assert!((residual[(i, i)].re - r).abs() < 1e-14);
        }
    }

    #[test]
    fn beta_spot_values() {
        assert!((beta_constant(2, 2) - 1.0).abs() < 1e-15);
        assert!((beta_constant(3, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((beta_constant(1, 4) - 0.5).abs() < 1e-15);
        // vanishes as the cutoff grows
        let mut last = f64::INFINITY;
        for np in [2, 4, 8, 16, 32, 64] {
            let b = beta_constant(np, 3);
            assert!(b < last);
            last = b;
        }
        assert!(last < 1e-15);
    }

    #[test]
    fn truncation_identity_examples() {
        let r = verify_truncation_identity(&ParaSpec::para_bose(2, 2).unwrap(), 1e-12);
        assert!(r.passes && r.residual_norm < 1e-14 && r.beta == 1.0);
        let r = verify_truncation_identity(&ParaSpec::para_fermi(2).unwrap(), 1e-12);
        assert!(r.passes);
        let r = verify_truncation_identity(&ParaSpec::para_bose(1, 3).unwrap(), 1e-12);
        assert!(r.passes);
        assert!((r.beta - 2.0 / 3.0).abs() < 1e-15);
        // failure is reported, not thrown
        let r = verify_truncation_identity(&ParaSpec::para_bose(3, 4).unwrap(), -1.0);
        assert!(!r.passes);
    }

    #[test]
    fn displaced_vacuum_examples() {
        let s = ParaSpec::para_fermi(2).unwrap();
        let psi = displaced_vacuum_exact(&s, 0.0);
        assert!((psi[0].re - 1.0).abs() < 1e-15 && psi[1].norm() < 1e-15);
        for (alpha, n_expected) in [(FRAC_PI_4, 1.0), (FRAC_PI_2, 2.0)] {
            let pops = level_populations(&displaced_vacuum_exact(&s, alpha));
            let mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            assert!((mean - n_expected).abs() < 1e-12, "{mean}");
        }
    }

    proptest! {
        #[test]
        fn representation_invariants(pb in any::<bool>(), p in 1u32..9, np in 1u32..9) {
            let spec = if pb {
                ParaSpec::para_bose(p, np).unwrap()
            } else {
                ParaSpec::para_fermi(2 * (p % 4 + 1)).unwrap()
            };
            let ops = build_fock_ops(&spec);
            let d = spec.dim();
            let id = DenseOperator::identity(d, d);
            prop_assert_eq!(max_abs(&anticommutator(&ops.parity, &ops.a)), 0.0);
            prop_assert_eq!(max_abs(&anticommutator(&ops.parity, &ops.adag)), 0.0);
            prop_assert_eq!(max_abs(&(&ops.parity * &ops.parity - &id)), 0.0);
            prop_assert_eq!(max_abs(&commutator(&ops.num, &ops.parity)), 0.0);
            prop_assert_eq!(max_abs(&(ops.a.adjoint() - &ops.adag)), 0.0);
            prop_assert_eq!(ops.a.column(0).iter().map(|z| z.norm()).sum::<f64>(), 0.0);
        }

        #[test]
        fn para_bose_actions(p in 1u32..9, np in 1u32..9) {
            // A†|2k⟩ = √(2k+p)|2k+1⟩ and A†|2k+1⟩ = √(2k+2)|2k+2⟩
            let spec = ParaSpec::para_bose(p, np).unwrap();
            for n in 1..spec.dim() {
                let from = n - 1;
                let expected = if from % 2 == 0 {
                    (from as f64 + p as f64).sqrt()
                } else {
                    (from as f64 + 1.0).sqrt()
                };
                prop_assert!((ladder_amplitude(&spec, n).unwrap() - expected).abs() < 1e-14);
            }
        }

        #[test]
        fn beta_residual_identity(p in 1u32..7, np in 1u32..7) {
            let r = verify_truncation_identity(&ParaSpec::para_bose(p, np).unwrap(), 1e-12);
            prop_assert!(r.passes, "residual {}", r.residual_norm);
        }

        #[test]
        fn displaced_state_is_normalized(p in 1u32..7, np in 1u32..7, alpha in -3.0f64..3.0) {
            let psi = displaced_vacuum_exact(&ParaSpec::para_bose(p, np).unwrap(), alpha);
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
    }
}
