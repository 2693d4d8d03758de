//! Exact factorization of the displacement propagator `exp(iα(A + A†))`
//! into an ordered product of single-generator exponentials
//! `Π_j exp(iγ_j G_j)`.
//!
//! Every generator `G` used here satisfies `(G/s)³ = G/s` for a scale `s`
//! (`s = 2` for the hopping generators, `s = 1` for Pauli matrices), so each
//! factor has the closed form `1 + i sin(sγ) H + (cos(sγ) − 1) H²` with
//! `H = G/s`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{build_fock_ops, ladder_amplitude, ParaKind, ParaSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, expm_i_hermitian, frobenius, DenseOperator, I};
use crate::qubit_map::{build_xy_hamiltonian, generator_family, GeneratorBasis};

/// Default tolerance on the one-hot Frobenius residual.
pub const DEFAULT_TOL: f64 = 1e-9;
const MAX_RESTARTS: usize = 8;
const MAX_ITERATIONS: usize = 400;

/// Per-bond coefficients `c(m) = α λ_{m+1}`; the target exponent is
/// `i Σ_m c(m)/2 (X_m X_{m+1} + Y_m Y_{m+1}) = i Σ_m c(m)/2 u_m`.
pub fn target_coefficients(spec: &ParaSpec, alpha: f64) -> Vec<f64> {
    (1..spec.dim())
        .map(|n| alpha * ladder_amplitude(spec, n).expect("bond within range"))
        .collect()
}

/// `exp(iα(A + A†))` on the Fock (one-hot) block.
pub fn target_onehot(spec: &ParaSpec, alpha: f64) -> DenseOperator {
    expm_i_hermitian(&build_fock_ops(spec).quadrature(), alpha)
}

/// The same propagator on the full `2^Q` register.
pub fn target_full(spec: &ParaSpec, alpha: f64) -> Result<DenseOperator> {
    let h = build_xy_hamiltonian(spec, alpha).to_matrix()?;
    Ok(expm_i_hermitian(&h, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Onehot,
    Full,
}

#[derive(Debug, Clone)]
pub struct FactorizationProblem {
    pub spec: ParaSpec,
    pub alpha: f64,
    pub basis: GeneratorBasis,
    /// Basis indices, leftmost factor first.
    pub ordering: Vec<usize>,
}

impl FactorizationProblem {
    /// Problem with the generator-family ordering.
    pub fn new(spec: ParaSpec, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidSpec(format!("alpha must be finite, got {alpha}")));
        }
        let basis = generator_family(spec.num_qubits())?;
        let ordering = (0..basis.len()).collect();
        Ok(Self {
            spec,
            alpha,
            basis,
            ordering,
        })
    }

    pub fn with_ordering(mut self, ordering: Vec<usize>) -> Result<Self> {
        let mut sorted = ordering.clone();
        sorted.sort_unstable();
        if sorted != (0..self.basis.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidSpec(
                "ordering must be a permutation of the basis indices".into(),
            ));
        }
        self.ordering = ordering;
        Ok(self)
    }

    pub fn ordering_labels(&self) -> Vec<String> {
        let labels = self.basis.labels();
        self.ordering.iter().map(|&i| labels[i].clone()).collect()
    }

    /// `γ_j = c(m)/2` on each nearest-neighbour generator `u_m`, zero elsewhere.
    pub fn initial_guess(&self) -> Vec<f64> {
        let coeffs = target_coefficients(&self.spec, self.alpha);
        self.ordering
            .iter()
            .map(|&i| {
                let g = &self.basis.generators()[i];
                if g.span == 2 {
                    coeffs[g.anchor] / 2.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Factorization angles, one per product factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaVector {
    pub gammas: Vec<f64>,
    /// Basis indices of each factor, leftmost first.
    pub ordering: Vec<usize>,
    /// Frobenius residual on the one-hot block (2×2 surrogate for the
    /// analytic solve).
    pub residual: f64,
    /// Diagnostic residual on the full register, when computed.
    pub full_residual: Option<f64>,
    pub converged: bool,
}

impl GammaVector {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.gammas.iter().all(|g| *g == 0.0)
    }
}

/// Reduces an angle into `(−π, π]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Generator with `(G/scale)³ = G/scale`.
#[derive(Debug, Clone)]
struct Factor {
    h: DenseOperator,
    h2: DenseOperator,
    scale: f64,
}

impl Factor {
    fn new(g: &DenseOperator, scale: f64) -> Self {
        let h = g * c(1.0 / scale);
        let h2 = &h * &h;
        Self { h, h2, scale }
    }

    fn exp(&self, gamma: f64) -> DenseOperator {
        let n = self.h.nrows();
        let theta = self.scale * gamma;
        DenseOperator::identity(n, n) + &self.h * (I * theta.sin()) + &self.h2 * c(theta.cos() - 1.0)
    }

    /// `d/dγ exp(iγG) = iG exp(iγG)`.
    fn derivative(&self, gamma: f64) -> DenseOperator {
        &self.h * (I * self.scale) * self.exp(gamma)
    }
}

fn ordered_product(factors: &[Factor], gammas: &[f64]) -> DenseOperator {
    let n = factors[0].h.nrows();
    factors
        .iter()
        .zip(gammas)
        .fold(DenseOperator::identity(n, n), |acc, (f, &g)| acc * f.exp(g))
}

/// Levenberg–Marquardt on `‖Π_j exp(iγ_j G_j) − T‖_F²` with the Jacobian
/// from the product rule. Returns the best point and its residual.
fn levenberg_marquardt(
    factors: &[Factor],
    target: &DenseOperator,
    start: &[f64],
    stop_at: f64,
) -> (Vec<f64>, f64) {
    let m = factors.len();
    let n = target.nrows();
    let residual_of = |g: &[f64]| frobenius(&(ordered_product(factors, g) - target));

    let mut gammas = start.to_vec();
    let mut cost = residual_of(&gammas);
    let mut lambda = 1e-3;
    let mut stalls = 0;
    for _ in 0..MAX_ITERATIONS {
        if cost <= stop_at {
            break;
        }
        let exps: Vec<DenseOperator> = factors.iter().zip(&gammas).map(|(f, &g)| f.exp(g)).collect();
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(DenseOperator::identity(n, n));
        for e in &exps {
            let next = prefix.last().unwrap() * e;
            prefix.push(next);
        }
        let mut suffix = vec![DenseOperator::identity(n, n); m + 1];
        for j in (0..m).rev() {
            suffix[j] = &exps[j] * &suffix[j + 1];
        }
        let diff = &prefix[m] - target;
        let rows = 2 * n * n;
        let r = DVector::from_iterator(rows, diff.iter().map(|z| z.re).chain(diff.iter().map(|z| z.im)));
        let mut jac = DMatrix::<f64>::zeros(rows, m);
        for j in 0..m {
            let d = &prefix[j] * factors[j].derivative(gammas[j]) * &suffix[j + 1];
            for (k, z) in d.iter().enumerate() {
                jac[(k, j)] = z.re;
                jac[(k + n * n, j)] = z.im;
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;

        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..m {
                a[(i, i)] += lambda * (jtj[(i, i)] + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = gammas.iter().zip(step.iter()).map(|(g, s)| g + s).collect();
            let trial_cost = residual_of(&trial);
            if trial_cost < cost {
                let gain = cost - trial_cost;
                gammas = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                stalls = if gain < 1e-16 { stalls + 1 } else { 0 };
                break;
            }
            lambda *= 4.0;
        }
        if !improved || stalls > 5 {
            break;
        }
    }
    (gammas, cost)
}

fn su2_generators() -> [DenseOperator; 3] {
    let x = DenseOperator::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let y = DenseOperator::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)]);
    let z = DenseOperator::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    [x, y, z]
}

/// Solves `exp(i(aσx + bσy)) = exp(iγ0σx) exp(iγ1σy) exp(iγ2σz)`.
///
/// Through `u0 ↦ σx, u1 ↦ σy, v0 ↦ σz` this gives the three-qubit
/// factorization `exp(i(a u0 + b u1)) = e^{iγ0 u0} e^{iγ1 u1} e^{iγ2 v0}`.
pub fn solve_three_qubit_analytic(a_coef: f64, b_coef: f64) -> GammaVector {
    let [x, y, z] = su2_generators();
    let exponent = &x * c(a_coef) + &y * c(b_coef);
    let target = expm_i_hermitian(&exponent, 1.0);
    let factors: Vec<Factor> = [&x, &y, &z].iter().map(|g| Factor::new(g, 1.0)).collect();

    let r = a_coef.hypot(b_coef);
    let mut gammas = if r == 0.0 {
        vec![0.0; 3]
    } else {
        // quaternion (w, x, y, z) of the target, then XYZ Euler half-angles
        let (qw, qx, qy) = (r.cos(), r.sin() * a_coef / r, r.sin() * b_coef / r);
        let qz = 0.0;
        let roll = (2.0 * (qw * qx + qy * qz)).atan2(1.0 - 2.0 * (qx * qx + qy * qy));
        let pitch = (2.0 * (qw * qy - qz * qx)).clamp(-1.0, 1.0).asin();
        let yaw = (2.0 * (qw * qz + qx * qy)).atan2(1.0 - 2.0 * (qy * qy + qz * qz));
        vec![roll / 2.0, pitch / 2.0, yaw / 2.0]
    };
    // q and −q give the same rotation; fix the SU(2) sign
    let prod = ordered_product(&factors, &gammas);
    if frobenius(&(&prod + &target)) < frobenius(&(&prod - &target)) {
        gammas[0] += PI;
    }
    let mut residual = frobenius(&(ordered_product(&factors, &gammas) - &target));
    if residual > 1e-12 {
        // near gimbal lock the closed form loses digits; polish in SU(2)
        let (polished, res) = levenberg_marquardt(&factors, &target, &gammas, 1e-15);
        if res < residual {
            gammas = polished;
            residual = res;
        }
    }
    let gammas: Vec<f64> = gammas.into_iter().map(canonical_angle).collect();
    GammaVector {
        gammas,
        ordering: vec![0, 1, 2],
        residual,
        full_residual: None,
        converged: residual <= 1e-10,
    }
}

fn restricted_factors(problem: &FactorizationProblem) -> Vec<Factor> {
    problem
        .ordering
        .iter()
        .map(|&i| Factor::new(&problem.basis.generators()[i].restricted(), 2.0))
        .collect()
}

fn full_factors(basis: &GeneratorBasis, ordering: &[usize]) -> Result<Vec<Factor>> {
    ordering
        .iter()
        .map(|&i| Ok(Factor::new(&basis.generators()[i].sum.to_matrix()?, 2.0)))
        .collect()
}

/// Numerical factorization on the one-hot block.
///
/// Deterministic given `seed`: the first attempt starts from
/// [`FactorizationProblem::initial_guess`]; up to eight restarts draw
/// uniform angles in `(−π/2, π/2)` from a seeded ChaCha stream.
pub fn solve_numeric(problem: &FactorizationProblem, tol: f64, seed: u64) -> Result<GammaVector> {
    let factors = restricted_factors(problem);
    let target = target_onehot(&problem.spec, problem.alpha);
    let stop_at = (tol * 1e-4).max(1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (problem.initial_guess(), f64::INFINITY);
    for attempt in 0..=MAX_RESTARTS {
        let start = if attempt == 0 {
            problem.initial_guess()
        } else {
            (0..factors.len()).map(|_| rng.random_range(-PI / 2.0..PI / 2.0)).collect()
        };
        let (gammas, res) = levenberg_marquardt(&factors, &target, &start, stop_at);
        if res < best.1 {
            best = (gammas, res);
        }
        if best.1 <= tol {
            break;
        }
    }
    let (gammas, residual) = best;
    if residual > tol {
        return Err(Error::NotConverged {
            best_residual: residual,
            tol,
        });
    }
    let gammas: Vec<f64> = gammas.into_iter().map(canonical_angle).collect();
    let mut gv = GammaVector {
        gammas,
        ordering: problem.ordering.clone(),
        residual,
        full_residual: None,
        converged: true,
    };
    if problem.spec.num_qubits() <= 10 {
        let full = product_unitary(&gv, &problem.basis, Space::Full)?;
        gv.full_residual = Some(frobenius(&(full - target_full(&problem.spec, problem.alpha)?)));
    }
    Ok(gv)
}

/// Ordered product `Π_j exp(iγ_j G_j)` on the requested space.
pub fn product_unitary(gv: &GammaVector, basis: &GeneratorBasis, space: Space) -> Result<DenseOperator> {
    if gv.gammas.len() != gv.ordering.len() {
        return Err(Error::DimensionMismatch {
            expected: gv.ordering.len(),
            found: gv.gammas.len(),
        });
    }
    if let Some(&bad) = gv.ordering.iter().find(|&&i| i >= basis.len()) {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: bad + 1,
        });
    }
    let factors = match space {
        Space::Onehot => gv
            .ordering
            .iter()
            .map(|&i| Factor::new(&basis.generators()[i].restricted(), 2.0))
            .collect(),
        Space::Full => full_factors(basis, &gv.ordering)?,
    };
    if factors.is_empty() {
        let d = match space {
            Space::Onehot => basis.num_qubits(),
            Space::Full => 1 << basis.num_qubits(),
        };
        return Ok(DenseOperator::identity(d, d));
    }
    Ok(ordered_product(&factors, &gv.gammas))
}

/// How a factorization was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Numeric,
}

/// Factorizes `exp(iα(A + A†))` for `spec`: closed form on two and three
/// qubits, numerical otherwise. The one-hot residual is recomputed in the
/// register representation for every method.
pub fn factorize(spec: &ParaSpec, alpha: f64, tol: f64, seed: u64) -> Result<(FactorizationProblem, GammaVector, Method)> {
    let problem = FactorizationProblem::new(*spec, alpha)?;
    let coeffs = target_coefficients(spec, alpha);
    let (mut gv, method) = match spec.num_qubits() {
        2 => (
            GammaVector {
                gammas: vec![canonical_angle(coeffs[0] / 2.0)],
                ordering: vec![0],
                residual: 0.0,
                full_residual: None,
                converged: true,
            },
            Method::Analytic,
        ),
        3 => (solve_three_qubit_analytic(coeffs[0] / 2.0, coeffs[1] / 2.0), Method::Analytic),
        _ => return Ok((problem.clone(), solve_numeric(&problem, tol, seed)?, Method::Numeric)),
    };
    let onehot = product_unitary(&gv, &problem.basis, Space::Onehot)?;
    gv.residual = frobenius(&(onehot - target_onehot(spec, alpha)));
    let full = product_unitary(&gv, &problem.basis, Space::Full)?;
    gv.full_residual = Some(frobenius(&(full - target_full(spec, alpha)?)));
    gv.converged = gv.residual <= tol;
    if !gv.converged {
        return Err(Error::NotConverged {
            best_residual: gv.residual,
            tol,
        });
    }
    Ok((problem, gv, method))
}

/// Structured-text record of one factorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDocument {
    pub kind: ParaKind,
    pub p: u32,
    pub np: u32,
    pub alpha: f64,
    pub num_qubits: usize,
    pub method: Method,
    /// Generator labels in product order, leftmost first.
    pub ordering: Vec<String>,
    pub gammas: Vec<f64>,
    /// Single-string exponentials after the commuting split.
    pub factor_count: usize,
    pub residual_onehot: f64,
    pub residual_full: Option<f64>,
    pub converged: bool,
    pub ordering_note: String,
}

impl GammaDocument {
    pub fn new(problem: &FactorizationProblem, gv: &GammaVector, method: Method) -> Self {
        let labels = problem.basis.labels();
        Self {
            kind: problem.spec.kind(),
            p: problem.spec.p(),
            np: problem.spec.np(),
            alpha: problem.alpha,
            num_qubits: problem.spec.num_qubits(),
            method,
            ordering: gv.ordering.iter().map(|&i| labels[i].clone()).collect(),
            gammas: gv.gammas.clone(),
            factor_count: gv
                .ordering
                .iter()
                .map(|&i| problem.basis.generators()[i].sum.terms().len())
                .sum(),
            residual_onehot: gv.residual,
            residual_full: gv.full_residual,
            converged: gv.converged,
            ordering_note: if problem.spec.num_qubits() > 3 {
                "generator-family order (by last site, then decreasing anchor); chosen, not unique".into()
            } else {
                "u0, u1, v0 (su(2) closure)".into()
            },
        }
    }

    pub fn spec(&self) -> Result<ParaSpec> {
        ParaSpec::new(self.kind, self.p, Some(self.np))
    }

    /// Rebuilds the basis and gamma vector for compilation.
    pub fn to_gamma_vector(&self) -> Result<(GeneratorBasis, GammaVector)> {
        let basis = generator_family(self.num_qubits)?;
        let ordering = self
            .ordering
            .iter()
            .map(|l| basis.index_of(l).ok_or_else(|| Error::Parse(format!("unknown generator label {l}"))))
            .collect::<Result<Vec<_>>>()?;
        if ordering.len() != self.gammas.len() {
            return Err(Error::DimensionMismatch {
                expected: ordering.len(),
                found: self.gammas.len(),
            });
        }
        Ok((
            basis,
            GammaVector {
                gammas: self.gammas.clone(),
                ordering,
                residual: self.residual_onehot,
                full_residual: self.residual_full,
                converged: self.converged,
            },
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
