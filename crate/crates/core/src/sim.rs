//! State-vector execution of compiled circuits with trajectory noise,
//! seeded shot sampling, readout correction and one-hot post-selection.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compile::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{c, I};
use crate::qubit_map::{decode_onehot, index_to_bits, Pauli};

/// Largest register the simulator will allocate.
pub const MAX_SIM_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidSpec("a register needs at least one qubit".into()));
        }
        if num_qubits > MAX_SIM_QUBITS {
            return Err(Error::TooManyQubits {
                qubits: num_qubits,
                limit: MAX_SIM_QUBITS,
            });
        }
        let mut amps = vec![c(0.0); 1 << num_qubits];
        amps[0] = c(1.0);
        Ok(Self { num_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: n.next_power_of_two().max(2),
                found: n,
            });
        }
        let num_qubits = n.trailing_zeros() as usize;
        if num_qubits > MAX_SIM_QUBITS {
            return Err(Error::TooManyQubits {
                qubits: num_qubits,
                limit: MAX_SIM_QUBITS,
            });
        }
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        gate.apply(&mut self.amps, self.num_qubits);
    }

    pub fn apply_pauli(&mut self, q: usize, pauli: Pauli) {
        let mask = 1usize << (self.num_qubits - 1 - q);
        for idx in 0..self.amps.len() {
            if idx & mask != 0 {
                continue;
            }
            let j = idx | mask;
            let (a0, a1) = (self.amps[idx], self.amps[j]);
            match pauli {
                Pauli::I => {}
                Pauli::X => {
                    self.amps[idx] = a1;
                    self.amps[j] = a0;
                }
                Pauli::Y => {
                    self.amps[idx] = -I * a1;
                    self.amps[j] = I * a0;
                }
                Pauli::Z => self.amps[j] = -a1,
            }
        }
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for z in &mut self.amps {
                *z /= n;
            }
        }
    }

    /// Probability mass on bitstrings with exactly one set bit.
    pub fn onehot_weight(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() == 1)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}

/// Uniform per-qubit SPAM and per-gate depolarizing probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_prep_flip: f64,
    /// P(read 1 | true 0).
    pub eps01: f64,
    /// P(read 0 | true 1).
    pub eps10: f64,
    pub p_depol_1q: f64,
    pub p_depol_2q: f64,
}

impl NoiseModel {
    pub const KEYS: [&'static str; 5] = ["p_prep_flip", "eps01", "eps10", "p_depol_1q", "p_depol_2q"];

    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn readout(eps01: f64, eps10: f64) -> Self {
        Self {
            eps01,
            eps10,
            ..Self::default()
        }
    }

    pub fn depolarizing(p_1q: f64, p_2q: f64) -> Self {
        Self {
            p_depol_1q: p_1q,
            p_depol_2q: p_2q,
            ..Self::default()
        }
    }

    fn fields(&self) -> [f64; 5] {
        [self.p_prep_flip, self.eps01, self.eps10, self.p_depol_1q, self.p_depol_2q]
    }

    /// Every probability must lie in `[0, 1]`. Certain events are allowed
    /// for simulation; correction separately requires an invertible
    /// confusion matrix.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in Self::KEYS.iter().zip(self.fields()) {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidNoise {
                    name: name.to_string(),
                    value,
                });
            }
        }
        Ok(())
    }

    /// Needs a fresh trajectory per shot.
    pub fn is_stochastic_evolution(&self) -> bool {
        self.p_prep_flip > 0.0 || self.p_depol_1q > 0.0 || self.p_depol_2q > 0.0
    }

    pub fn is_ideal(&self) -> bool {
        self.fields().iter().all(|&v| v == 0.0)
    }

    /// Inverse of `[[1−eps01, eps10], [eps01, 1−eps10]]` (columns are the
    /// true value, rows the read value). Requires `eps01 + eps10 < 1`.
    pub fn inverse_confusion(&self) -> Result<[[f64; 2]; 2]> {
        let det = 1.0 - self.eps01 - self.eps10;
        if det < 1e-12 {
            return Err(Error::SingularConfusion { qubit: 0 });
        }
        Ok([
            [(1.0 - self.eps10) / det, -self.eps10 / det],
            [-self.eps01 / det, (1.0 - self.eps01) / det],
        ])
    }

    pub fn to_text(&self) -> String {
        Self::KEYS
            .iter()
            .zip(self.fields())
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// `key=value` lines; `#` starts a comment; missing keys default to 0.
    fn from_str(text: &str) -> Result<Self> {
        let mut model = NoiseModel::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let v: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {value:?} for {key}")))?;
            match key {
                "p_prep_flip" => model.p_prep_flip = v,
                "eps01" => model.eps01 = v,
                "eps10" => model.eps10 = v,
                "p_depol_1q" => model.p_depol_1q = v,
                "p_depol_2q" => model.p_depol_2q = v,
                _ => return Err(Error::Parse(format!("unknown noise key {key:?}"))),
            }
        }
        model.validate()?;
        Ok(model)
    }
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// The register state `|10…0⟩` (level 0), with optional preparation flips
/// drawn before the X on qubit 0.
pub fn prepare_initial<R: Rng>(num_qubits: usize, noise: Option<&NoiseModel>, rng: &mut R) -> Result<StateVector> {
    let mut state = StateVector::zero(num_qubits)?;
    if let Some(n) = noise.filter(|n| n.p_prep_flip > 0.0) {
        for q in 0..num_qubits {
            if rng.random::<f64>() < n.p_prep_flip {
                state.apply_pauli(q, Pauli::X);
            }
        }
    }
    state.apply_pauli(0, Pauli::X);
    Ok(state)
}

/// Runs the circuit gate by gate. With gate noise, each gate is followed
/// with its depolarizing probability by a uniformly chosen non-identity
/// Pauli on its support.
pub fn apply_circuit<R: Rng>(
    mut state: StateVector,
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<StateVector> {
    if circuit.num_qubits() != state.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: state.num_qubits,
            found: circuit.num_qubits(),
        });
    }
    let noise = noise.filter(|n| n.p_depol_1q > 0.0 || n.p_depol_2q > 0.0);
    for gate in circuit.gates() {
        state.apply_gate(gate);
        let Some(n) = noise else { continue };
        let wires = gate.qubits();
        let p = if wires.len() == 2 { n.p_depol_2q } else { n.p_depol_1q };
        if rng.random::<f64>() < p {
            let choices = 4usize.pow(wires.len() as u32);
            let pick = rng.random_range(1..choices);
            for (k, &q) in wires.iter().enumerate() {
                let digit = (pick >> (2 * (wires.len() - 1 - k))) & 3;
                state.apply_pauli(q, PAULIS[digit]);
            }
            state.renormalize();
        }
    }
    Ok(state)
}

fn flip_readout<R: Rng>(mut idx: usize, num_qubits: usize, noise: Option<&NoiseModel>, rng: &mut R) -> usize {
    let Some(n) = noise.filter(|n| n.eps01 > 0.0 || n.eps10 > 0.0) else {
        return idx;
    };
    for q in 0..num_qubits {
        let mask = 1usize << (num_qubits - 1 - q);
        let p = if idx & mask == 0 { n.eps01 } else { n.eps10 };
        if rng.random::<f64>() < p {
            idx ^= mask;
        }
    }
    idx
}

fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

fn tally(num_qubits: usize, outcomes: impl IntoIterator<Item = usize>) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for idx in outcomes {
        *counts.entry(index_to_bits(idx, num_qubits)).or_insert(0) += 1;
    }
    counts
}

/// Measures `state` in the computational basis `shots` times. Shot `i`
/// draws from a generator seeded with `seed + i`.
pub fn sample_shots(state: &StateVector, shots: u64, noise: Option<&NoiseModel>, seed: u64) -> Result<ShotSet> {
    if shots == 0 {
        return Err(Error::Insufficient {
            what: "shots",
            needed: 1,
            got: 0,
        });
    }
    let q = state.num_qubits;
    let dist = WeightedIndex::new(state.probabilities()).map_err(|e| Error::Parse(e.to_string()))?;
    let outcomes: Vec<usize> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = shot_rng(seed, i);
            let idx = dist.sample(&mut rng);
            flip_readout(idx, q, noise, &mut rng)
        })
        .collect();
    Ok(ShotSet::new(q, tally(q, outcomes), seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Every shot runs its own noisy trajectory.
    #[default]
    ResampleTrajectory,
    /// One trajectory, sampled repeatedly.
    FixedState,
}

/// Prepares level 0, runs `circuit` and measures, `shots` times.
pub fn run_shots(
    circuit: &Circuit,
    shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
    mode: SamplingMode,
) -> Result<ShotSet> {
    if let Some(n) = noise {
        n.validate()?;
    }
    let q = circuit.num_qubits();
    let per_shot = mode == SamplingMode::ResampleTrajectory && noise.is_some_and(|n| n.is_stochastic_evolution());
    if !per_shot {
        let mut rng = shot_rng(seed, u64::MAX);
        let state = prepare_initial(q, noise, &mut rng)?;
        let state = apply_circuit(state, circuit, noise, &mut rng)?;
        return sample_shots(&state, shots, noise, seed);
    }
    if shots == 0 {
        return Err(Error::Insufficient {
            what: "shots",
            needed: 1,
            got: 0,
        });
    }
    let outcomes: Result<Vec<usize>> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = shot_rng(seed, i);
            let state = prepare_initial(q, noise, &mut rng)?;
            let state = apply_circuit(state, circuit, noise, &mut rng)?;
            let dist = WeightedIndex::new(state.probabilities()).map_err(|e| Error::Parse(e.to_string()))?;
            let idx = dist.sample(&mut rng);
            Ok(flip_readout(idx, q, noise, &mut rng))
        })
        .collect();
    Ok(ShotSet::new(q, tally(q, outcomes?), seed))
}

/// Histogram of measured bitstrings (qubit 0 leftmost).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotSet {
    pub num_qubits: usize,
    pub counts: BTreeMap<String, u64>,
    /// Shots drawn, before any post-selection.
    pub shots: u64,
    pub seed: u64,
    pub retained_fraction: f64,
}

impl ShotSet {
    pub fn new(num_qubits: usize, counts: BTreeMap<String, u64>, seed: u64) -> Self {
        let shots = counts.values().sum();
        Self {
            num_qubits,
            counts,
            shots,
            seed,
            retained_fraction: 1.0,
        }
    }

    /// Shots currently in the histogram.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// True when post-selection kept nothing.
    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn to_text(&self, noise: Option<&NoiseModel>) -> String {
        let mut out = format!(
            "# shots={}\n# seed={}\n# retained_fraction={}\n",
            self.shots, self.seed, self.retained_fraction
        );
        if let Some(n) = noise {
            for line in n.to_text().lines() {
                out.push_str(&format!("# noise {line}\n"));
            }
        }
        out.push_str(&format!("qubits {}\n", self.num_qubits));
        for (bits, n) in &self.counts {
            out.push_str(&format!("{bits} {n}\n"));
        }
        out
    }
}

impl FromStr for ShotSet {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut num_qubits = None;
        let mut counts = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let bad = || Error::Parse(format!("bad shot line {line:?}"));
            let (a, b) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
            let b = b.trim();
            if a == "qubits" {
                num_qubits = Some(b.parse::<usize>().map_err(|_| bad())?);
                continue;
            }
            let q = num_qubits.ok_or_else(|| Error::Parse("missing qubits header".into()))?;
            if a.len() != q || !a.chars().all(|ch| ch == '0' || ch == '1') {
                return Err(bad());
            }
            counts.insert(a.to_string(), b.parse::<u64>().map_err(|_| bad())?);
        }
        let num_qubits = num_qubits.ok_or_else(|| Error::Parse("missing qubits header".into()))?;
        let get = |k: &str| meta.get(k).ok_or_else(|| Error::Parse(format!("missing {k}")));
        let mut set = ShotSet::new(num_qubits, counts, get("seed")?.parse().map_err(|_| Error::Parse("seed".into()))?);
        set.shots = get("shots")?.parse().map_err(|_| Error::Parse("shots".into()))?;
        set.retained_fraction = get("retained_fraction")?
            .parse()
            .map_err(|_| Error::Parse("retained_fraction".into()))?;
        Ok(set)
    }
}

/// Per-qubit `P(read 1)` plus the (quasi-)probability histogram behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    pub num_qubits: usize,
    pub p_one: Vec<f64>,
    /// Weights sum to 1; may be negative after readout correction.
    pub histogram: BTreeMap<String, f64>,
    pub shots: u64,
    pub retained_fraction: f64,
    /// Some weight or marginal left `[0, 1]`.
    pub out_of_range: bool,
}

impl Marginals {
    fn from_histogram(num_qubits: usize, histogram: BTreeMap<String, f64>, shots: u64, retained_fraction: f64) -> Self {
        let mut p_one = vec![0.0; num_qubits];
        for (bits, w) in &histogram {
            for (q, ch) in bits.chars().enumerate() {
                if ch == '1' {
                    p_one[q] += w;
                }
            }
        }
        let outside = |v: &f64| !(0.0..=1.0).contains(v);
        let out_of_range = histogram.values().any(outside) || p_one.iter().any(outside);
        Self {
            num_qubits,
            p_one,
            histogram,
            shots,
            retained_fraction,
            out_of_range,
        }
    }

    pub fn from_shots(s: &ShotSet) -> Result<Self> {
        let total = s.total();
        if total == 0 {
            return Err(Error::EmptyShotSet);
        }
        let hist = s
            .counts
            .iter()
            .map(|(b, &n)| (b.clone(), n as f64 / total as f64))
            .collect();
        Ok(Self::from_histogram(s.num_qubits, hist, total, s.retained_fraction))
    }

    /// Exact measurement distribution of a state.
    pub fn from_state(state: &StateVector) -> Self {
        let hist = state
            .probabilities()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .map(|(i, p)| (index_to_bits(i, state.num_qubits), p))
            .collect();
        Self::from_histogram(state.num_qubits, hist, 0, 1.0)
    }
}

/// Applies the tensor-product inverse of the per-qubit confusion matrix to
/// the empirical distribution. Results are flagged, never clamped.
pub fn spam_correct(s: &ShotSet, noise: &NoiseModel) -> Result<Marginals> {
    let inv = noise.inverse_confusion()?;
    let q = s.num_qubits;
    let total = s.total();
    if total == 0 {
        return Err(Error::EmptyShotSet);
    }
    let mut probs = vec![0.0; 1 << q];
    for (bits, &n) in &s.counts {
        probs[crate::qubit_map::bits_to_index(bits)?] = n as f64 / total as f64;
    }
    for qubit in 0..q {
        let mask = 1usize << (q - 1 - qubit);
        for idx in 0..probs.len() {
            if idx & mask == 0 {
                let (r0, r1) = (probs[idx], probs[idx | mask]);
                probs[idx] = inv[0][0] * r0 + inv[0][1] * r1;
                probs[idx | mask] = inv[1][0] * r0 + inv[1][1] * r1;
            }
        }
    }
    let hist = probs
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w != 0.0)
        .map(|(i, w)| (index_to_bits(i, q), w))
        .collect();
    Ok(Marginals::from_histogram(q, hist, total, s.retained_fraction))
}

/// Keeps exactly the one-hot bitstrings; counts stay raw.
pub fn postselect(s: &ShotSet) -> ShotSet {
    let counts: BTreeMap<String, u64> = s
        .counts
        .iter()
        .filter(|(b, _)| decode_onehot(b).is_some())
        .map(|(b, &n)| (b.clone(), n))
        .collect();
    let kept: u64 = counts.values().sum();
    let before = s.total();
    ShotSet {
        num_qubits: s.num_qubits,
        counts,
        shots: s.shots,
        seed: s.seed,
        retained_fraction: if before == 0 {
            0.0
        } else {
            s.retained_fraction * kept as f64 / before as f64
        },
    }
}

/// One-hot restriction of a corrected histogram, renormalized by the kept
/// quasi-weight.
pub fn postselect_marginals(m: &Marginals) -> Result<Marginals> {
    let kept: BTreeMap<String, f64> = m
        .histogram
        .iter()
        .filter(|(b, _)| decode_onehot(b).is_some())
        .map(|(b, &w)| (b.clone(), w))
        .collect();
    let weight: f64 = kept.values().sum();
    if weight <= 0.0 {
        return Err(Error::EmptyShotSet);
    }
    let kept = kept.into_iter().map(|(b, w)| (b, w / weight)).collect();
    Ok(Marginals::from_histogram(m.num_qubits, kept, m.shots, m.retained_fraction * weight))
}

impl fmt::Display for Marginals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, p) in self.p_one.iter().enumerate() {
            writeln!(f, "qubit {q}: P(1) = {p:.6}")?;
        }
        if self.out_of_range {
            writeln!(f, "warning: quasi-probabilities outside [0, 1]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{displaced_vacuum_exact, ParaSpec};
    use crate::compile::compile_displacement;
    use crate::factor::factorize;
    use crate::qubit_map::onehot_index;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    fn basis_state(q: usize, bits: &str) -> StateVector {
        let mut amps = vec![c(0.0); 1 << q];
        amps[crate::qubit_map::bits_to_index(bits).unwrap()] = c(1.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn initial_state() {
        let s = prepare_initial(3, None, &mut rng()).unwrap();
        assert_eq!(s.amplitudes()[0b100], c(1.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(prepare_initial(1, None, &mut rng()).unwrap().amplitudes()[1], c(1.0));
        let noise = NoiseModel {
            p_prep_flip: 1.0,
            ..NoiseModel::default()
        };
        let flipped = prepare_initial(3, Some(&noise), &mut rng()).unwrap();
        assert_eq!(flipped.amplitudes()[0b011], c(1.0));
        assert!(prepare_initial(0, None, &mut rng()).is_err());
    }

    #[test]
    fn pauli_action() {
        let mut s = basis_state(1, "0");
        s.apply_pauli(0, Pauli::Y);
        assert_eq!(s.amplitudes(), &[c(0.0), I]);
        s.apply_pauli(0, Pauli::Z);
        assert_eq!(s.amplitudes(), &[c(0.0), -I]);
    }

    #[test]
    fn identity_circuit_leaves_state() {
        let s = prepare_initial(3, None, &mut rng()).unwrap();
        let out = apply_circuit(s.clone(), &Circuit::new(3), None, &mut rng()).unwrap();
        assert_eq!(out, s);
        assert!(apply_circuit(s, &Circuit::new(2), None, &mut rng()).is_err());
    }

    #[test]
    fn compiled_displacement_reproduces_exact_state() {
        let spec = ParaSpec::para_fermi(2).unwrap();
        let (problem, gv, _) = factorize(&spec, FRAC_PI_4, 1e-9, 0).unwrap();
        let circuit = compile_displacement(&gv, &problem.basis).unwrap();
        let s = prepare_initial(3, None, &mut rng()).unwrap();
        let out = apply_circuit(s, &circuit, None, &mut rng()).unwrap();
        let exact = displaced_vacuum_exact(&spec, FRAC_PI_4);
        let onehot: Vec<Complex64> = (0..3).map(|n| out.amplitudes()[onehot_index(n, 3)]).collect();
        let overlap: Complex64 = onehot.iter().zip(exact.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
        let phase = overlap / overlap.norm();
        for (a, b) in onehot.iter().zip(exact.iter()) {
            assert!((a * phase - b).norm() < 1e-9);
        }
        assert!(1.0 - out.onehot_weight() <= 1e-9);
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn depolarizing_picks_uniform_two_qubit_paulis() {
        let xx = Gate::Xx { q1: 0, q2: 1, chi: 0.7 };
        let circuit = Circuit::from_gates(2, vec![xx]).unwrap();
        let noise = NoiseModel::depolarizing(0.0, 1.0);
        let mut ideal = StateVector::zero(2).unwrap();
        ideal.apply_gate(&xx);
        let candidates: Vec<StateVector> = (1..16)
            .map(|k| {
                let mut s = ideal.clone();
                s.apply_pauli(0, PAULIS[k / 4]);
                s.apply_pauli(1, PAULIS[k % 4]);
                s
            })
            .collect();
        let mut hits = [0usize; 15];
        for seed in 0..3000 {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let out = apply_circuit(StateVector::zero(2).unwrap(), &circuit, Some(&noise), &mut r).unwrap();
            let matched: Vec<usize> = candidates
                .iter()
                .enumerate()
                .filter(|(_, cand)| {
                    let ov: Complex64 = cand.amps.iter().zip(&out.amps).map(|(a, b)| a.conj() * b).sum();
                    (ov.norm() - 1.0).abs() < 1e-12
                })
                .map(|(k, _)| k)
                .collect();
            // each trajectory equals P·ideal for some non-identity Pauli P
            assert!(!matched.is_empty());
            hits[matched[0]] += 1;
        }
        // ZZ fixes this state, so P and P·ZZ coincide: 8 classes, the ZZ
        // class with weight 1/15 and the others 2/15
        assert_eq!(hits.iter().filter(|&&h| h > 0).count(), 8);
        let zz = hits[14];
        assert!((zz as f64 - 200.0).abs() < 4.0 * (3000.0f64 * (1.0 / 15.0) * (14.0 / 15.0)).sqrt());
    }

    #[test]
    fn sampling_examples() {
        let s = basis_state(3, "100");
        let shots = sample_shots(&s, 5000, None, 1).unwrap();
        assert_eq!(shots.counts.len(), 1);
        assert_eq!(shots.count("100"), 5000);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0); 8];
        amps[0b100] = c(h);
        amps[0b010] = c(h);
        let sup = StateVector::from_amplitudes(amps).unwrap();
        let shots = sample_shots(&sup, 5000, None, 2).unwrap();
        let sigma = (5000.0f64 * 0.25).sqrt();
        assert!((shots.count("100") as f64 - 2500.0).abs() < 3.0 * sigma);
        assert_eq!(shots.count("100") + shots.count("010"), 5000);

        let zero = StateVector::zero(3).unwrap();
        let all_flip = NoiseModel::readout(1.0, 0.0);
        assert_eq!(sample_shots(&zero, 100, Some(&all_flip), 3).unwrap().count("111"), 100);
        assert!(sample_shots(&zero, 0, None, 3).is_err());
    }

    #[test]
    fn seed_determinism() {
        let spec = ParaSpec::para_bose(2, 2).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.8, 1e-9, 0).unwrap();
        let circuit = compile_displacement(&gv, &problem.basis).unwrap();
        let noise = NoiseModel {
            p_prep_flip: 0.01,
            eps01: 0.02,
            eps10: 0.03,
            p_depol_1q: 0.01,
            p_depol_2q: 0.05,
        };
        let a = run_shots(&circuit, 800, Some(&noise), 11, SamplingMode::ResampleTrajectory).unwrap();
        let b = run_shots(&circuit, 800, Some(&noise), 11, SamplingMode::ResampleTrajectory).unwrap();
        let other = run_shots(&circuit, 800, Some(&noise), 12, SamplingMode::ResampleTrajectory).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert_eq!(a.total(), 800);
        let f1 = run_shots(&circuit, 300, Some(&noise), 5, SamplingMode::FixedState).unwrap();
        assert_eq!(f1, run_shots(&circuit, 300, Some(&noise), 5, SamplingMode::FixedState).unwrap());
    }

    #[test]
    fn ideal_sampling_stays_onehot() {
        let spec = ParaSpec::para_bose(4, 3).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.6, 1e-9, 0).unwrap();
        let circuit = compile_displacement(&gv, &problem.basis).unwrap();
        let set = run_shots(&circuit, 2000, None, 0, SamplingMode::default()).unwrap();
        assert_eq!(postselect(&set).total(), 2000);
    }

    #[test]
    fn spam_examples() {
        let mut counts = BTreeMap::new();
        counts.insert("0".to_string(), 50u64);
        counts.insert("1".to_string(), 50u64);
        let half = ShotSet::new(1, counts, 0);
        let m = spam_correct(&half, &NoiseModel::readout(0.05, 0.05)).unwrap();
        assert!((m.p_one[0] - 0.5).abs() < 1e-15);
        let unchanged = spam_correct(&half, &NoiseModel::ideal()).unwrap();
        assert_eq!(unchanged, Marginals::from_shots(&half).unwrap());

        let mut counts = BTreeMap::new();
        counts.insert("0".to_string(), 5u64);
        counts.insert("1".to_string(), 95u64);
        let high = ShotSet::new(1, counts, 0);
        let m = spam_correct(&high, &NoiseModel::readout(0.05, 0.05)).unwrap();
        assert!((m.p_one[0] - 1.0).abs() < 1e-12);

        let mut counts = BTreeMap::new();
        counts.insert("1".to_string(), 100u64);
        let m = spam_correct(&ShotSet::new(1, counts, 0), &NoiseModel::readout(0.05, 0.05)).unwrap();
        assert!(m.p_one[0] > 1.0);
        assert!(m.out_of_range);

        assert_eq!(
            spam_correct(&half, &NoiseModel::readout(0.5, 0.5)),
            Err(Error::SingularConfusion { qubit: 0 })
        );
    }

    #[test]
    fn spam_correction_inverts_readout_noise() {
        let spec = ParaSpec::para_fermi(2).unwrap();
        let (problem, gv, _) = factorize(&spec, 0.6, 1e-9, 0).unwrap();
        let circuit = compile_displacement(&gv, &problem.basis).unwrap();
        let ideal_state = apply_circuit(prepare_initial(3, None, &mut rng()).unwrap(), &circuit, None, &mut rng()).unwrap();
        let ideal = Marginals::from_state(&ideal_state);
        let noise = NoiseModel::readout(0.04, 0.08);
        let shots = run_shots(&circuit, 5000, Some(&noise), 9, SamplingMode::default()).unwrap();
        let corrected = spam_correct(&shots, &noise).unwrap();
        let det = 1.0 - noise.eps01 - noise.eps10;
        for (p_true, p_hat) in ideal.p_one.iter().zip(&corrected.p_one) {
            let p_read = noise.eps01 + det * p_true;
            let sigma = (p_read * (1.0 - p_read) / 5000.0).sqrt() / det;
            assert!((p_hat - p_true).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn postselect_examples() {
        let mut counts = BTreeMap::new();
        counts.insert("100".to_string(), 4900u64);
        counts.insert("110".to_string(), 100u64);
        let ps = postselect(&ShotSet::new(3, counts, 0));
        assert_eq!(ps.counts.len(), 1);
        assert_eq!(ps.count("100"), 4900);
        assert!((ps.retained_fraction - 0.98).abs() < 1e-15);
        assert_eq!(ps.shots, 5000);

        let mut counts = BTreeMap::new();
        counts.insert("010".to_string(), 7u64);
        let all = ShotSet::new(3, counts, 0);
        assert_eq!(postselect(&all), all);

        let mut counts = BTreeMap::new();
        counts.insert("000".to_string(), 10u64);
        let none = postselect(&ShotSet::new(3, counts, 0));
        assert!(none.is_empty());
        assert_eq!(none.retained_fraction, 0.0);
        assert_eq!(Marginals::from_shots(&none), Err(Error::EmptyShotSet));
    }

    #[test]
    fn postselect_after_correction() {
        let mut counts = BTreeMap::new();
        counts.insert("10".to_string(), 60u64);
        counts.insert("01".to_string(), 30u64);
        counts.insert("11".to_string(), 10u64);
        let m = spam_correct(&ShotSet::new(2, counts, 0), &NoiseModel::readout(0.02, 0.02)).unwrap();
        let ps = postselect_marginals(&m).unwrap();
        let w: f64 = ps.histogram.values().sum();
        assert!((w - 1.0).abs() < 1e-12);
        assert!(ps.retained_fraction < 1.0);
        assert!(ps.histogram.keys().all(|b| decode_onehot(b).is_some()));
    }

    #[test]
    fn noise_file_parsing() {
        let n: NoiseModel = "# gates\np_depol_1q = 0.001\np_depol_2q=0.01\n\neps01=0.02 # readout\n".parse().unwrap();
        assert_eq!(n.p_depol_1q, 0.001);
        assert_eq!(n.eps01, 0.02);
        assert_eq!(n.eps10, 0.0);
        assert_eq!(n.to_text().parse::<NoiseModel>().unwrap(), n);
        assert!("eps01=1.5".parse::<NoiseModel>().is_err());
        assert!("eps01=-0.1".parse::<NoiseModel>().is_err());
        assert!("bogus=0.1".parse::<NoiseModel>().is_err());
        assert!("eps01 0.1".parse::<NoiseModel>().is_err());
    }

    #[test]
    fn shot_text_round_trip() {
        let mut counts = BTreeMap::new();
        counts.insert("100".to_string(), 4900u64);
        counts.insert("110".to_string(), 100u64);
        let set = postselect(&ShotSet::new(3, counts, 42));
        let noise = NoiseModel::readout(0.01, 0.02);
        let back: ShotSet = set.to_text(Some(&noise)).parse().unwrap();
        assert_eq!(back, set);
        assert!("qubits 2\n101 3\n".parse::<ShotSet>().is_err());
    }

    proptest! {
        #[test]
        fn ideal_evolution_preserves_norm(
            angles in proptest::collection::vec(-7.0f64..7.0, 1..25),
            wires in proptest::collection::vec((0usize..4, 0usize..4, 0u8..4), 1..25),
        ) {
            let gates: Vec<Gate> = angles.iter().zip(&wires).map(|(&t, &(a, b, k))| match k {
                0 => Gate::Rx { q: a, theta: t },
                1 => Gate::Ry { q: a, theta: t },
                2 => Gate::Rz { q: a, theta: t },
                _ if a != b => Gate::Xx { q1: a, q2: b, chi: t },
                _ => Gate::X { q: a },
            }).collect();
            let circuit = Circuit::from_gates(4, gates).unwrap();
            let s = prepare_initial(4, None, &mut rng()).unwrap();
            let out = apply_circuit(s, &circuit, None, &mut rng()).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn single_qubit_spam_round_trip(e01 in 0.0f64..0.3, e10 in 0.0f64..0.3, p in 0.0f64..1.0) {
            // the correction inverts the exact confusion in expectation
            let noise = NoiseModel::readout(e01, e10);
            let p_read = e01 * (1.0 - p) + (1.0 - e10) * p;
            let inv = noise.inverse_confusion().unwrap();
            let back = inv[1][0] * (1.0 - p_read) + inv[1][1] * p_read;
            prop_assert!((back - p).abs() < 1e-12);
        }
    }
}
