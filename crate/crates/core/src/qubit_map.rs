//! One-hot qubit encoding of Fock levels, the XY-chain Hamiltonian and the
//! multi-qubit generator family used to factor the displacement.
//!
//! Qubit 0 is the leftmost character of a bitstring and the most significant
//! bit of a basis index. `Z|0⟩ = +|0⟩`; a qubit "reads 1" when it is excited,
//! so the number operator is `Σ_m m (1 − Z_m)/2`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{ladder_amplitude, ParaSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, commutator, max_abs, DenseOperator, I};

/// Largest register for which dense `2^Q` matrices are built.
pub const DEFAULT_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Image of basis bit `b`: returns (flipped bit, phase).
    fn act(self, b: usize) -> (usize, Complex64) {
        match self {
            Pauli::I => (b, c(1.0)),
            Pauli::X => (b ^ 1, c(1.0)),
            Pauli::Y => (b ^ 1, if b == 0 { I } else { -I }),
            Pauli::Z => (b, if b == 0 { c(1.0) } else { c(-1.0) }),
        }
    }
}

/// Real-weighted tensor product of Pauli letters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliString {
    pub coeff: f64,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coeff: f64, letters: Vec<Pauli>) -> Self {
        Self { coeff, letters }
    }

    /// Parses letters such as `"XZY"`.
    pub fn parse(coeff: f64, s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| Pauli::from_char(ch).ok_or_else(|| Error::Parse(format!("bad Pauli letter {ch:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(Self { coeff, letters })
    }

    /// String placing `ops` on consecutive qubits starting at `start`.
    pub fn on_sites(coeff: f64, num_qubits: usize, start: usize, ops: &[Pauli]) -> Self {
        let mut letters = vec![Pauli::I; num_qubits];
        letters[start..start + ops.len()].copy_from_slice(ops);
        Self { coeff, letters }
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Indices of non-identity letters.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|l| l.as_char()).collect()
    }

    /// Sparse action on basis index `col`: (row, amplitude) without the coefficient.
    fn column_image(&self, col: usize) -> (usize, Complex64) {
        let q_count = self.letters.len();
        let mut row = 0usize;
        let mut phase = c(1.0);
        for (q, letter) in self.letters.iter().enumerate() {
            let shift = q_count - 1 - q;
            let (bit, ph) = letter.act((col >> shift) & 1);
            row |= bit << shift;
            phase *= ph;
        }
        (row, phase)
    }

    /// Whether two strings commute (even number of anticommuting positions).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        clashes % 2 == 0
    }

    pub fn to_matrix(&self) -> Result<DenseOperator> {
        PauliSum::from_terms(vec![self.clone()])?.to_matrix()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.coeff, self.label())
    }
}

/// Sum of Pauli strings over a common register.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(terms: Vec<PauliString>) -> Result<Self> {
        let num_qubits = terms
            .first()
            .map(|t| t.num_qubits())
            .ok_or_else(|| Error::Parse("PauliSum needs at least one term".into()))?;
        if num_qubits == 0 {
            return Err(Error::Parse("Pauli strings need at least one qubit".into()));
        }
        for t in &terms {
            if t.num_qubits() != num_qubits {
                return Err(Error::DimensionMismatch {
                    expected: num_qubits,
                    found: t.num_qubits(),
                });
            }
            if !t.coeff.is_finite() {
                return Err(Error::Parse(format!("non-finite coefficient in {t}")));
            }
        }
        Ok(Self { num_qubits, terms })
    }

    pub fn push(&mut self, term: PauliString) {
        assert_eq!(term.num_qubits(), self.num_qubits, "register width mismatch");
        self.terms.push(term);
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn to_matrix(&self) -> Result<DenseOperator> {
        pauli_sum_to_matrix(self, DEFAULT_MAX_QUBITS)
    }
}

/// Dense `2^Q × 2^Q` matrix of a Pauli sum.
pub fn pauli_sum_to_matrix(h: &PauliSum, max_qubits: usize) -> Result<DenseOperator> {
    let q = h.num_qubits;
    if q > max_qubits {
        return Err(Error::TooManyQubits {
            qubits: q,
            limit: max_qubits,
        });
    }
    let dim = 1usize << q;
    let mut m = DenseOperator::zeros(dim, dim);
    for term in &h.terms {
        for col in 0..dim {
            let (row, phase) = term.column_image(col);
            m[(row, col)] += phase * term.coeff;
        }
    }
    Ok(m)
}

/// Basis index of the one-hot state with qubit `n` excited.
pub fn onehot_index(n: usize, num_qubits: usize) -> usize {
    1usize << (num_qubits - 1 - n)
}

/// Bitstring of Fock level `n` on a `num_qubits` register.
pub fn encode_fock(n: usize, num_qubits: usize) -> Result<String> {
    if n >= num_qubits {
        return Err(Error::QubitOutOfRange {
            index: n,
            width: num_qubits,
        });
    }
    Ok((0..num_qubits)
        .map(|q| if q == n { '1' } else { '0' })
        .collect())
}

/// Level of a one-hot bitstring, `None` for anything else.
pub fn decode_onehot(bits: &str) -> Option<usize> {
    let mut level = None;
    for (q, ch) in bits.chars().enumerate() {
        match ch {
            '1' if level.is_none() => level = Some(q),
            '1' => return None,
            '0' => {}
            _ => return None,
        }
    }
    level
}

/// Bitstring of basis index `idx`, qubit 0 leftmost.
pub fn index_to_bits(idx: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| {
            if (idx >> (num_qubits - 1 - q)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

pub fn bits_to_index(bits: &str) -> Result<usize> {
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Parse(format!("bad bitstring {bits:?}"))),
    })
}

/// `H = g Σ_m λ_{m+1}/2 (X_m X_{m+1} + Y_m Y_{m+1})`, whose one-hot block is
/// `g (A + A†)`.
pub fn build_xy_hamiltonian(spec: &ParaSpec, g: f64) -> PauliSum {
    let q = spec.num_qubits();
    let mut h = PauliSum::new(q);
    for m in 0..q - 1 {
        let w = g * ladder_amplitude(spec, m + 1).expect("bond within range") / 2.0;
        h.push(PauliString::on_sites(w, q, m, &[Pauli::X, Pauli::X]));
        h.push(PauliString::on_sites(w, q, m, &[Pauli::Y, Pauli::Y]));
    }
    h
}

/// `Σ_m m (1 − Z_m)/2`.
pub fn number_operator(num_qubits: usize) -> PauliSum {
    let mut n = PauliSum::new(num_qubits);
    for m in 1..num_qubits {
        let half = m as f64 / 2.0;
        n.push(PauliString::new(half, vec![Pauli::I; num_qubits]));
        n.push(PauliString::on_sites(-half, num_qubits, m, &[Pauli::Z]));
    }
    if n.terms.is_empty() {
        n.push(PauliString::new(0.0, vec![Pauli::I; num_qubits]));
    }
    n
}

/// The `Q × Q` block `⟨onehot(i)| op |onehot(j)⟩`.
pub fn restrict_to_onehot(op: &DenseOperator, num_qubits: usize) -> Result<DenseOperator> {
    let dim = 1usize << num_qubits;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.nrows(),
        });
    }
    Ok(DenseOperator::from_fn(num_qubits, num_qubits, |i, j| {
        op[(onehot_index(i, num_qubits), onehot_index(j, num_qubits))]
    }))
}

/// A two-string hopping generator between sites `anchor` and `anchor + span − 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub label: String,
    pub anchor: usize,
    pub span: usize,
    pub sum: PauliSum,
}

impl Generator {
    /// Even span: `XZ…ZX + YZ…ZY`. Odd span: `XZ…ZY − YZ…ZX`.
    pub fn new(num_qubits: usize, anchor: usize, span: usize) -> Self {
        let interior = vec![Pauli::Z; span - 2];
        let build = |first: Pauli, last: Pauli, coeff: f64| {
            let mut ops = vec![first];
            ops.extend_from_slice(&interior);
            ops.push(last);
            PauliString::on_sites(coeff, num_qubits, anchor, &ops)
        };
        let terms = if span.is_multiple_of(2) {
            vec![build(Pauli::X, Pauli::X, 1.0), build(Pauli::Y, Pauli::Y, 1.0)]
        } else {
            vec![build(Pauli::X, Pauli::Y, 1.0), build(Pauli::Y, Pauli::X, -1.0)]
        };
        Self {
            label: generator_label(span, anchor),
            anchor,
            span,
            sum: PauliSum {
                num_qubits,
                terms,
            },
        }
    }

    /// The two one-hot levels this generator couples.
    pub fn levels(&self) -> (usize, usize) {
        (self.anchor, self.anchor + self.span - 1)
    }

    /// One-hot block: `2(E_ab + E_ba)` for even span, `2i(E_ba − E_ab)`
    /// for odd span, with `a < b` the coupled levels.
    pub fn restricted(&self) -> DenseOperator {
        let q = self.sum.num_qubits();
        let (a, b) = self.levels();
        let mut m = DenseOperator::zeros(q, q);
        if self.span.is_multiple_of(2) {
            m[(a, b)] = c(2.0);
            m[(b, a)] = c(2.0);
        } else {
            m[(b, a)] = I * 2.0;
            m[(a, b)] = -I * 2.0;
        }
        m
    }
}

fn generator_label(span: usize, anchor: usize) -> String {
    match span {
        2 => format!("u{anchor}"),
        3 => format!("v{anchor}"),
        4 => format!("w{anchor}"),
        5 => format!("a{anchor}"),
        k => format!("s{k}_{anchor}"),
    }
}

/// Ordered generator family for a `Q`-qubit register.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorBasis {
    num_qubits: usize,
    generators: Vec<Generator>,
}

impl GeneratorBasis {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.label == label)
    }

    /// Number of single-string exponentials after splitting each generator
    /// into its two commuting strings.
    pub fn factor_count(&self) -> usize {
        self.generators.iter().map(|g| g.sum.terms().len()).sum()
    }

    pub fn full_matrices(&self) -> Result<Vec<DenseOperator>> {
        self.generators.iter().map(|g| g.sum.to_matrix()).collect()
    }
}

/// All span-`k` generators, ordered by last site and then by decreasing anchor:
/// `u0, u1, v0, u2, v1, w0, u3, v2, w1, a0, …`.
pub fn generator_family(num_qubits: usize) -> Result<GeneratorBasis> {
    if num_qubits < 2 {
        return Err(Error::InvalidSpec(format!(
            "generator family needs at least 2 qubits, got {num_qubits}"
        )));
    }
    let mut generators = Vec::with_capacity(num_qubits * (num_qubits - 1) / 2);
    for last in 1..num_qubits {
        for anchor in (0..last).rev() {
            generators.push(Generator::new(num_qubits, anchor, last - anchor + 1));
        }
    }
    Ok(GeneratorBasis {
        num_qubits,
        generators,
    })
}

/// One commutator `[G_i, G_j]` expressed in the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommutatorEntry {
    Zero,
    /// `sign · 2i · G_index`
    Term { sign: i8, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorTable {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<CommutatorEntry>>,
}

impl CommutatorTable {
    pub fn get(&self, left: &str, right: &str) -> Option<CommutatorEntry> {
        let i = self.labels.iter().position(|l| l == left)?;
        let j = self.labels.iter().position(|l| l == right)?;
        Some(self.entries[i][j])
    }

    /// Renders an entry as `0`, `2i·v0` or `-2i·u1`.
    pub fn render(&self, entry: CommutatorEntry) -> String {
        match entry {
            CommutatorEntry::Zero => "0".into(),
            CommutatorEntry::Term { sign, index } => {
                let s = if sign > 0 { "" } else { "-" };
                format!("{s}2i·{}", self.labels[index])
            }
        }
    }
}

impl fmt::Display for CommutatorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6}", "[.,.]")?;
        for l in &self.labels {
            write!(f, " {l:>8}")?;
        }
        writeln!(f)?;
        for (i, row) in self.entries.iter().enumerate() {
            write!(f, "{:>6}", self.labels[i])?;
            for e in row {
                write!(f, " {:>8}", self.render(*e))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

const SPAN_TOL: f64 = 1e-12;

pub fn commutator_table(basis: &GeneratorBasis) -> Result<CommutatorTable> {
    let mats = basis.full_matrices()?;
    let labels = basis.labels();
    let n = mats.len();
    let mut entries = vec![vec![CommutatorEntry::Zero; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let comm = commutator(&mats[i], &mats[j]);
            if max_abs(&comm) <= SPAN_TOL {
                continue;
            }
            let found = mats.iter().enumerate().find_map(|(k, g)| {
                [1i8, -1].into_iter().find_map(|sign| {
                    let target = g * (I * 2.0 * sign as f64);
                    (max_abs(&(&comm - target)) <= SPAN_TOL)
                        .then_some(CommutatorEntry::Term { sign, index: k })
                })
            });
            entries[i][j] = found.ok_or_else(|| Error::NotInSpan {
                left: labels[i].clone(),
                right: labels[j].clone(),
            })?;
        }
    }
    Ok(CommutatorTable { labels, entries })
}

/// Largest Jacobi-identity residual over all triples of distinct generators.
pub fn jacobi_residual(basis: &GeneratorBasis) -> Result<f64> {
    let mats = basis.full_matrices()?;
    let n = mats.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, cm) = (&mats[i], &mats[j], &mats[k]);
                let sum = commutator(a, &commutator(b, cm))
                    + commutator(b, &commutator(cm, a))
                    + commutator(cm, &commutator(a, b));
                worst = worst.max(max_abs(&sum));
            }
        }
    }
    Ok(worst)
}

pub fn check_jacobi(basis: &GeneratorBasis) -> bool {
    jacobi_residual(basis).map(|r| r <= 1e-12).unwrap_or(false)
}
