//! Lowering of factorized displacements to single-qubit rotations and XX
//! entanglers.
//!
//! Conventions: `RX(θ) = exp(−iθX/2)` (likewise RY, RZ) and
//! `XX(χ) = exp(−iχ X⊗X/2)`. Angles are radians.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::GammaVector;
use crate::linalg::{c, DenseOperator, I};
use crate::qubit_map::{GeneratorBasis, Pauli, PauliString, DEFAULT_MAX_QUBITS};

const ZERO_ANGLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Gate {
    Rx { q: usize, theta: f64 },
    Ry { q: usize, theta: f64 },
    Rz { q: usize, theta: f64 },
    X { q: usize },
    Xx { q1: usize, q2: usize, chi: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { q, .. } | Gate::Ry { q, .. } | Gate::Rz { q, .. } | Gate::X { q } => vec![q],
            Gate::Xx { q1, q2, .. } => vec![q1, q2],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Xx { .. })
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rz { theta, .. } => Some(theta),
            Gate::Xx { chi, .. } => Some(chi),
            Gate::X { .. } => None,
        }
    }

    fn with_angle(&self, a: f64) -> Gate {
        match *self {
            Gate::Rx { q, .. } => Gate::Rx { q, theta: a },
            Gate::Ry { q, .. } => Gate::Ry { q, theta: a },
            Gate::Rz { q, .. } => Gate::Rz { q, theta: a },
            Gate::Xx { q1, q2, .. } => Gate::Xx { q1, q2, chi: a },
            g @ Gate::X { .. } => g,
        }
    }

    /// Same rotation axis on the same wires, so angles add.
    fn mergeable_with(&self, other: &Gate) -> bool {
        match (self, other) {
            (Gate::Rx { q: a, .. }, Gate::Rx { q: b, .. })
            | (Gate::Ry { q: a, .. }, Gate::Ry { q: b, .. })
            | (Gate::Rz { q: a, .. }, Gate::Rz { q: b, .. })
            | (Gate::X { q: a }, Gate::X { q: b }) => a == b,
            (Gate::Xx { q1: a1, q2: a2, .. }, Gate::Xx { q1: b1, q2: b2, .. }) => {
                (a1, a2) == (b1, b2) || (a1, a2) == (b2, b1)
            }
            _ => false,
        }
    }

    /// 2×2 kernel of a single-qubit gate.
    fn single_qubit_kernel(&self) -> [[Complex64; 2]; 2] {
        match *self {
            Gate::Rx { theta, .. } => {
                let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                [[c(co), -I * si], [-I * si, c(co)]]
            }
            Gate::Ry { theta, .. } => {
                let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                [[c(co), c(-si)], [c(si), c(co)]]
            }
            Gate::Rz { theta, .. } => {
                let ph = (-I * theta / 2.0).exp();
                [[ph, c(0.0)], [c(0.0), ph.conj()]]
            }
            Gate::X { .. } => [[c(0.0), c(1.0)], [c(1.0), c(0.0)]],
            Gate::Xx { .. } => unreachable!("two-qubit gate"),
        }
    }

    /// Applies the gate in place to a `2^Q` amplitude vector (qubit 0 most
    /// significant).
    pub fn apply(&self, amps: &mut [Complex64], num_qubits: usize) {
        match *self {
            Gate::Xx { q1, q2, chi } => {
                let m1 = 1usize << (num_qubits - 1 - q1);
                let m2 = 1usize << (num_qubits - 1 - q2);
                let flip = m1 | m2;
                let (co, si) = (c((chi / 2.0).cos()), -I * (chi / 2.0).sin());
                for idx in 0..amps.len() {
                    let partner = idx ^ flip;
                    if idx < partner {
                        let (a, b) = (amps[idx], amps[partner]);
                        amps[idx] = co * a + si * b;
                        amps[partner] = co * b + si * a;
                    }
                }
            }
            _ => {
                let q = self.qubits()[0];
                let mask = 1usize << (num_qubits - 1 - q);
                let k = self.single_qubit_kernel();
                for idx in 0..amps.len() {
                    if idx & mask == 0 {
                        let j = idx | mask;
                        let (a0, a1) = (amps[idx], amps[j]);
                        amps[idx] = k[0][0] * a0 + k[0][1] * a1;
                        amps[j] = k[1][0] * a0 + k[1][1] * a1;
                    }
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rx { q, theta } => write!(f, "RX {q} {theta:.16e}"),
            Gate::Ry { q, theta } => write!(f, "RY {q} {theta:.16e}"),
            Gate::Rz { q, theta } => write!(f, "RZ {q} {theta:.16e}"),
            Gate::X { q } => write!(f, "X {q}"),
            Gate::Xx { q1, q2, chi } => write!(f, "XX {q1} {q2} {chi:.16e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    width: self.num_qubits,
                });
            }
        }
        if let Gate::Xx { q1, q2, .. } = gate {
            if q1 == q2 {
                return Err(Error::Parse(format!("XX gate needs distinct qubits, got {q1} twice")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `qubits Q` followed by one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit text".into()))?;
        let num_qubits = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["qubits", n] => n.parse().map_err(|_| Error::Parse(format!("bad header {header:?}")))?,
            _ => return Err(Error::Parse(format!("bad header {header:?}"))),
        };
        let mut circuit = Circuit::new(num_qubits);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("bad gate line {line:?}"));
            let qubit = |s: &str| s.parse::<usize>().map_err(|_| bad());
            let angle = |s: &str| s.parse::<f64>().map_err(|_| bad());
            let gate = match fields[..] {
                ["RX", q, t] => Gate::Rx { q: qubit(q)?, theta: angle(t)? },
                ["RY", q, t] => Gate::Ry { q: qubit(q)?, theta: angle(t)? },
                ["RZ", q, t] => Gate::Rz { q: qubit(q)?, theta: angle(t)? },
                ["X", q] => Gate::X { q: qubit(q)? },
                ["XX", a, b, x] => Gate::Xx { q1: qubit(a)?, q2: qubit(b)?, chi: angle(x)? },
                _ => return Err(bad()),
            };
            circuit.push(gate)?;
        }
        Ok(circuit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub one_qubit: usize,
    pub two_qubit: usize,
}

pub fn gate_counts(c: &Circuit) -> GateCounts {
    let two_qubit = c.gates.iter().filter(|g| g.is_two_qubit()).count();
    GateCounts {
        one_qubit: c.gates.len() - two_qubit,
        two_qubit,
    }
}

/// Dense unitary of the whole circuit.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DenseOperator> {
    let q = circuit.num_qubits;
    if q > DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: q,
            limit: DEFAULT_MAX_QUBITS,
        });
    }
    let dim = 1usize << q;
    let mut u = DenseOperator::identity(dim, dim);
    for col in 0..dim {
        let mut amps: Vec<Complex64> = u.column(col).iter().copied().collect();
        for g in &circuit.gates {
            g.apply(&mut amps, q);
        }
        u.set_column(col, &nalgebra::DVector::from_vec(amps));
    }
    Ok(u)
}

/// CNOT built from one XX entangler and single-qubit rotations (equal to
/// CNOT up to a global phase).
pub fn cnot(control: usize, target: usize) -> [Gate; 5] {
    [
        Gate::Ry { q: control, theta: FRAC_PI_2 },
        Gate::Xx { q1: control, q2: target, chi: -FRAC_PI_2 },
        Gate::Ry { q: control, theta: -FRAC_PI_2 },
        Gate::Rz { q: control, theta: FRAC_PI_2 },
        Gate::Rx { q: target, theta: FRAC_PI_2 },
    ]
}

/// Rotation `W` with `W P W† = X`, applied before the entangler.
fn to_x_basis(letter: Pauli, q: usize) -> Option<Gate> {
    match letter {
        Pauli::X | Pauli::I => None,
        Pauli::Y => Some(Gate::Rz { q, theta: -FRAC_PI_2 }),
        Pauli::Z => Some(Gate::Ry { q, theta: FRAC_PI_2 }),
    }
}

/// Rotation `W` with `W P W† = Z`.
fn to_z_basis(letter: Pauli, q: usize) -> Option<Gate> {
    match letter {
        Pauli::Z | Pauli::I => None,
        Pauli::X => Some(Gate::Ry { q, theta: -FRAC_PI_2 }),
        Pauli::Y => Some(Gate::Rx { q, theta: FRAC_PI_2 }),
    }
}

fn inverse(g: Gate) -> Gate {
    match g {
        Gate::X { .. } => g,
        _ => g.with_angle(-g.angle().expect("rotation")),
    }
}

/// Circuit for `exp(iγ·s·P)` where `s` is the string's coefficient.
///
/// Two-letter strings map onto one XX entangler. Longer strings are rotated
/// into `Z…Z`, their parity is accumulated on the last support qubit by a
/// ladder of XX-built CNOTs, rotated by `RZ(−2γs)`, and uncomputed.
pub fn compile_pauli_exp(gamma: f64, string: &PauliString) -> Result<Circuit> {
    let q = string.num_qubits();
    let support = string.support();
    if support.len() < 2 {
        return Err(Error::UnsupportedString(format!(
            "{} has fewer than two non-identity letters",
            string.label()
        )));
    }
    let theta = gamma * string.coeff;
    let mut circuit = Circuit::new(q);

    if support.len() == 2 {
        let basis: Vec<Gate> = support
            .iter()
            .filter_map(|&s| to_x_basis(string.letters[s], s))
            .collect();
        for g in &basis {
            circuit.push(*g)?;
        }
        circuit.push(Gate::Xx { q1: support[0], q2: support[1], chi: -2.0 * theta })?;
        for g in &basis {
            circuit.push(inverse(*g))?;
        }
        return Ok(circuit);
    }

    let (first, last) = (support[0], *support.last().unwrap());
    let contiguous = support.len() == last - first + 1;
    let interior_z = support[1..support.len() - 1]
        .iter()
        .all(|&s| string.letters[s] == Pauli::Z);
    if !contiguous || !interior_z {
        return Err(Error::UnsupportedString(format!(
            "{} is not of the form P Z…Z P on a contiguous support",
            string.label()
        )));
    }
    let basis: Vec<Gate> = support
        .iter()
        .filter_map(|&s| to_z_basis(string.letters[s], s))
        .collect();
    let ladder: Vec<Gate> = support.windows(2).flat_map(|w| cnot(w[0], w[1])).collect();
    for g in basis.iter().chain(&ladder) {
        circuit.push(*g)?;
    }
    circuit.push(Gate::Rz { q: last, theta: -2.0 * theta })?;
    for g in ladder.iter().rev().chain(basis.iter()).map(|g| inverse(*g)) {
        circuit.push(g)?;
    }
    Ok(circuit)
}

/// Single-string exponentials `(γ, string)` of a factorized product,
/// leftmost factor first.
pub fn exponential_factors(gv: &GammaVector, basis: &GeneratorBasis) -> Vec<(f64, PauliString)> {
    gv.ordering
        .iter()
        .zip(&gv.gammas)
        .flat_map(|(&i, &gamma)| {
            basis.generators()[i]
                .sum
                .terms()
                .iter()
                .map(move |t| (gamma, t.clone()))
        })
        .collect()
}

/// Lowers a product of generator exponentials, then cancels gates. The
/// rightmost factor acts first, so it is emitted first.
pub fn compile_displacement(gv: &GammaVector, basis: &GeneratorBasis) -> Result<Circuit> {
    compile_displacement_raw(gv, basis).map(|c| optimize_cancel(&c))
}

/// [`compile_displacement`] without the cancellation pass.
pub fn compile_displacement_raw(gv: &GammaVector, basis: &GeneratorBasis) -> Result<Circuit> {
    if !gv.converged {
        return Err(Error::NotConverged {
            best_residual: gv.residual,
            tol: f64::NAN,
        });
    }
    let mut circuit = Circuit::new(basis.num_qubits());
    for (gamma, string) in exponential_factors(gv, basis).iter().rev() {
        circuit.extend(&compile_pauli_exp(*gamma, string)?)?;
    }
    Ok(circuit)
}

/// [`compile_displacement`] with [`optimize_merge`]: the gate list has the
/// same shape for every value of the angles.
pub fn compile_displacement_fixed_depth(gv: &GammaVector, basis: &GeneratorBasis) -> Result<Circuit> {
    compile_displacement_raw(gv, basis).map(|c| optimize_merge(&c))
}

fn reduce_angle(a: f64) -> f64 {
    // 2π shifts only flip the global sign of RX/RY/RZ/XX
    let mut t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn cancel_pass(input: &[Gate], drop_zero: bool) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(input.len());
    for &gate in input {
        let gate = match gate.angle() {
            Some(a) => gate.with_angle(reduce_angle(a)),
            None => gate,
        };
        if drop_zero && gate.angle().is_some_and(|a| a.abs() < ZERO_ANGLE) {
            continue;
        }
        let wires = gate.qubits();
        let previous = out
            .iter()
            .rposition(|g| g.qubits().iter().any(|q| wires.contains(q)));
        if let Some(k) = previous {
            if out[k].mergeable_with(&gate) {
                match (out[k].angle(), gate.angle()) {
                    (Some(a), Some(b)) => {
                        let merged = reduce_angle(a + b);
                        if drop_zero && merged.abs() < ZERO_ANGLE {
                            out.remove(k);
                        } else {
                            out[k] = out[k].with_angle(merged);
                        }
                    }
                    _ => {
                        out.remove(k);
                    }
                }
                continue;
            }
        }
        out.push(gate);
    }
    out
}

/// Merges same-axis rotations that meet on a wire, drops zero-angle gates
/// and cancels adjacent X pairs, repeating to a fixed point.
pub fn optimize_cancel(circuit: &Circuit) -> Circuit {
    fixed_point(circuit, true)
}

/// Like [`optimize_cancel`] but never removes a rotation because of its
/// angle, so the output shape depends only on the input shape.
pub fn optimize_merge(circuit: &Circuit) -> Circuit {
    fixed_point(circuit, false)
}

fn fixed_point(circuit: &Circuit, drop_zero: bool) -> Circuit {
    let mut gates = circuit.gates.clone();
    loop {
        let next = cancel_pass(&gates, drop_zero);
        if next == gates {
            break;
        }
        gates = next;
    }
    Circuit {
        num_qubits: circuit.num_qubits,
        gates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ParaSpec;
    use crate::factor::{factorize, product_unitary, Space};
    use crate::linalg::{expm_i_hermitian, max_abs, phase_distance, unitarity_defect};
    use crate::qubit_map::generator_family;
    use proptest::prelude::*;

    fn exp_string(gamma: f64, s: &PauliString) -> DenseOperator {
        let unit = PauliString::new(1.0, s.letters.clone());
        expm_i_hermitian(&unit.to_matrix().unwrap(), gamma * s.coeff)
    }

    #[test]
    fn xx_string_is_one_native_gate() {
        let c = compile_pauli_exp(0.3, &PauliString::parse(1.0, "XX").unwrap()).unwrap();
        assert_eq!(c.gates(), &[Gate::Xx { q1: 0, q2: 1, chi: -0.6 }]);
    }

    #[test]
    fn yy_string_uses_four_rotations() {
        let s = PauliString::parse(1.0, "YY").unwrap();
        let c = compile_pauli_exp(0.41, &s).unwrap();
        assert_eq!(gate_counts(&c), GateCounts { one_qubit: 4, two_qubit: 1 });
        assert!(phase_distance(&circuit_unitary(&c).unwrap(), &exp_string(0.41, &s)) < 1e-10);
    }

    #[test]
    fn three_letter_strings_match_dense_exponential() {
        for label in ["XZY", "YZX", "XZX", "YZY", "ZZZ"] {
            for coeff in [1.0, -1.0] {
                let s = PauliString::parse(coeff, label).unwrap();
                let c = compile_pauli_exp(0.77, &s).unwrap();
                let d = phase_distance(&circuit_unitary(&c).unwrap(), &exp_string(0.77, &s));
                assert!(d < 1e-10, "{label}: {d}");
            }
        }
    }

    #[test]
    fn unsupported_shapes() {
        assert!(compile_pauli_exp(0.1, &PauliString::parse(1.0, "XII").unwrap()).is_err());
        assert!(compile_pauli_exp(0.1, &PauliString::parse(1.0, "XIZY").unwrap()).is_err());
        assert!(compile_pauli_exp(0.1, &PauliString::parse(1.0, "XIY").unwrap()).is_ok());
        assert!(compile_pauli_exp(0.1, &PauliString::parse(1.0, "XXY").unwrap()).is_err());
    }

    #[test]
    fn cnot_macro_is_cnot() {
        let circuit = Circuit::from_gates(2, cnot(0, 1).to_vec()).unwrap();
        let mut expect = DenseOperator::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            expect[(r, col)] = c(1.0);
        }
        assert!(phase_distance(&circuit_unitary(&circuit).unwrap(), &expect) < 1e-12);
    }

    #[test]
    fn unitary_examples() {
        let empty = Circuit::new(2);
        assert_eq!(circuit_unitary(&empty).unwrap(), DenseOperator::identity(4, 4));
        let x = Circuit::from_gates(1, vec![Gate::X { q: 0 }]).unwrap();
        let u = circuit_unitary(&x).unwrap();
        assert_eq!(u[(0, 1)], c(1.0));
        assert_eq!(u[(1, 0)], c(1.0));
        assert_eq!(u[(0, 0)], c(0.0));
        let xx = Circuit::from_gates(2, vec![Gate::Xx { q1: 0, q2: 1, chi: PI }]).unwrap();
        let xx_mat = PauliString::parse(1.0, "XX").unwrap().to_matrix().unwrap();
        assert!(phase_distance(&circuit_unitary(&xx).unwrap(), &xx_mat) < 1e-12);
        assert!(circuit_unitary(&Circuit::new(13)).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(gate_counts(&Circuit::new(1)), GateCounts { one_qubit: 0, two_qubit: 0 });
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::Rx { q: 0, theta: 0.1 },
                Gate::Xx { q1: 0, q2: 1, chi: 0.2 },
                Gate::Rx { q: 1, theta: 0.3 },
            ],
        )
        .unwrap();
        assert_eq!(gate_counts(&c), GateCounts { one_qubit: 2, two_qubit: 1 });
    }

    #[test]
    fn cancellation_examples() {
        let c = Circuit::from_gates(1, vec![Gate::Rx { q: 0, theta: 0.4 }, Gate::Rx { q: 0, theta: -0.4 }]).unwrap();
        assert!(optimize_cancel(&c).is_empty());
        let c = Circuit::from_gates(2, vec![Gate::Rz { q: 1, theta: 0.2 }, Gate::Rz { q: 1, theta: 0.5 }]).unwrap();
        let out = optimize_cancel(&c);
        assert_eq!(out.len(), 1);
        assert!(matches!(out.gates()[0], Gate::Rz { q: 1, theta } if (theta - 0.7).abs() < 1e-15));
        // a gate on another wire does not block the merge
        let c = Circuit::from_gates(
            2,
            vec![Gate::X { q: 0 }, Gate::Ry { q: 1, theta: 0.1 }, Gate::X { q: 0 }],
        )
        .unwrap();
        assert_eq!(optimize_cancel(&c).gates(), &[Gate::Ry { q: 1, theta: 0.1 }]);
        // but a gate on the same wire does
        let c = Circuit::from_gates(
            2,
            vec![Gate::Rx { q: 0, theta: 0.1 }, Gate::Xx { q1: 0, q2: 1, chi: 0.3 }, Gate::Rx { q: 0, theta: 0.1 }],
        )
        .unwrap();
        assert_eq!(optimize_cancel(&c).len(), 3);
    }

    #[test]
    fn three_qubit_displacement_circuit() {
        let spec = ParaSpec::para_fermi(2).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.5, 1e-9, 0).unwrap();
        let raw = compile_displacement_raw(&gv, &problem.basis).unwrap();
        let opt = compile_displacement(&gv, &problem.basis).unwrap();
        assert!(opt.len() <= raw.len());
        let product = product_unitary(&gv, &problem.basis, Space::Full).unwrap();
        // six-factor commuting split, built independently from dense exponentials
        let six: DenseOperator = exponential_factors(&gv, &problem.basis)
            .iter()
            .fold(DenseOperator::identity(8, 8), |acc, (g, s)| acc * exp_string(*g, s));
        assert!(phase_distance(&six, &product) < 1e-10);
        let u_raw = circuit_unitary(&raw).unwrap();
        let u_opt = circuit_unitary(&opt).unwrap();
        assert!(phase_distance(&u_opt, &six) < 1e-9);
        assert!(phase_distance(&u_opt, &u_raw) < 1e-12);
        assert!(unitarity_defect(&u_opt) < 1e-12);
        assert!(gate_counts(&opt).two_qubit <= 12);
        assert_eq!(optimize_cancel(&opt), opt);
    }

    #[test]
    fn fixed_depth_shape_ignores_angles() {
        let spec = ParaSpec::para_fermi(2).unwrap();
        let shapes: Vec<GateCounts> = [0.0, 0.3, FRAC_PI_2, PI]
            .iter()
            .map(|&a| {
                let (problem, gv, _) = factorize(&spec, a, 1e-9, 0).unwrap();
                let c = compile_displacement_fixed_depth(&gv, &problem.basis).unwrap();
                let product = product_unitary(&gv, &problem.basis, Space::Full).unwrap();
                assert!(phase_distance(&circuit_unitary(&c).unwrap(), &product) < 1e-9);
                gate_counts(&c)
            })
            .collect();
        assert!(shapes.windows(2).all(|w| w[0] == w[1]));
        assert!(shapes[0].two_qubit > 0);
    }

    #[test]
    fn zero_gammas_compile_to_nothing() {
        let basis = generator_family(3).unwrap();
        let gv = GammaVector {
            gammas: vec![0.0; 3],
            ordering: vec![0, 1, 2],
            residual: 0.0,
            full_residual: None,
            converged: true,
        };
        assert!(compile_displacement(&gv, &basis).unwrap().is_empty());
        assert!(compile_displacement(&GammaVector { converged: false, ..gv }, &basis).is_err());
    }

    #[test]
    fn five_qubit_factor_count() {
        let spec = ParaSpec::para_fermi(4).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.5, 1e-9, 0).unwrap();
        assert_eq!(exponential_factors(&gv, &problem.basis).len(), 20);
        let circuit = compile_displacement(&gv, &problem.basis).unwrap();
        let product = product_unitary(&gv, &problem.basis, Space::Full).unwrap();
        assert!(phase_distance(&circuit_unitary(&circuit).unwrap(), &product) < 1e-9);
    }

    #[test]
    fn text_format_round_trip() {
        let spec = ParaSpec::para_bose(3, 2).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.3, 1e-9, 0).unwrap();
        let circuit = compile_displacement(&gv, &problem.basis).unwrap();
        let text = circuit.to_text();
        assert!(text.starts_with("qubits 3\n"));
        let back: Circuit = text.parse().unwrap();
        assert_eq!(back, circuit);
        assert!("qubits 2\nXX 0 0 0.1\n".parse::<Circuit>().is_err());
        assert!("qubits 2\nRX 5 0.1\n".parse::<Circuit>().is_err());
        assert!("RX 0 0.1\n".parse::<Circuit>().is_err());
    }

    fn arb_gate(q: usize) -> impl Strategy<Value = Gate> {
        let angles = prop_oneof![Just(0.0), Just(PI), Just(-FRAC_PI_2), -7.0f64..7.0];
        (0..5u8, 0..q, 0..q, angles).prop_filter_map("distinct", move |(kind, a, b, t)| {
            Some(match kind {
                0 => Gate::Rx { q: a, theta: t },
                1 => Gate::Ry { q: a, theta: t },
                2 => Gate::Rz { q: a, theta: t },
                3 => Gate::X { q: a },
                _ if a != b => Gate::Xx { q1: a, q2: b, chi: t },
                _ => return None,
            })
        })
    }

    proptest! {
        #[test]
        fn cancellation_preserves_unitary(gates in proptest::collection::vec(arb_gate(3), 0..30)) {
            let c = Circuit::from_gates(3, gates).unwrap();
            let once = optimize_cancel(&c);
            prop_assert!(once.len() <= c.len());
            prop_assert_eq!(optimize_cancel(&once), once.clone());
            let d = phase_distance(&circuit_unitary(&once).unwrap(), &circuit_unitary(&c).unwrap());
            prop_assert!(d < 1e-12, "distance {}", d);
        }

        #[test]
        fn text_round_trip(gates in proptest::collection::vec(arb_gate(4), 0..20)) {
            let c = Circuit::from_gates(4, gates).unwrap();
            prop_assert_eq!(c.to_text().parse::<Circuit>().unwrap(), c);
        }
    }

    #[test]
    fn compiled_circuits_do_not_leak() {
        let spec = ParaSpec::para_bose(5, 3).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.4, 1e-9, 0).unwrap();
        let u = circuit_unitary(&compile_displacement(&gv, &problem.basis).unwrap()).unwrap();
        for n in 0..4 {
            let col = u.column(crate::qubit_map::onehot_index(n, 4));
            let leak: f64 = col
                .iter()
                .enumerate()
                .filter(|(i, _)| (*i as u32).count_ones() != 1)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            assert!(leak <= 1e-10);
        }
        assert!(max_abs(&u) <= 1.0 + 1e-12);
    }
}
