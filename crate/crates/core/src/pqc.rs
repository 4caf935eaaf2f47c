//! Statevector simulation of small parameterized circuits and least-squares
//! verification that the model `f(x) = ⟨0|U(x)† O U(x)|0⟩` is a trigonometric
//! polynomial over the lattice induced by its data-encoding gates.
//!
//! Qubit 0 is the most significant bit of a basis-state index, and the same
//! convention applies within the local index of a multi-qubit gate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ENUMERATION_CAP;
use crate::lattice::{FrequencyAxis, FrequencyLattice, MultiIndex};
use crate::linalg::{cholesky_with_jitter, pivot_ratio};

pub const MAX_QUBITS: usize = 10;
/// Tolerance for unitarity and hermiticity checks.
pub const MATRIX_TOL: f64 = 1e-10;
/// Largest pivot ratio treated as rank deficient in [`fourier_fit`].
pub const RANK_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> [Complex64; 4] {
        match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        }
    }
}

/// Hermitian generator `H` of a gate `exp(-i t H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generator {
    /// `scale · P` on a single qubit.
    Pauli { pauli: Pauli, scale: f64 },
    /// Diagonal in the computational basis of the gate's qubits.
    Diagonal { diagonal: Vec<f64> },
}

impl Generator {
    fn eigenvalues(&self) -> Vec<f64> {
        match self {
            Generator::Pauli { pauli: Pauli::I, scale } => vec![*scale],
            Generator::Pauli { scale, .. } => vec![-scale, *scale],
            Generator::Diagonal { diagonal } => diagonal.clone(),
        }
    }

    fn validate(&self, n_targets: usize) -> Result<()> {
        match self {
            Generator::Pauli { scale, .. } => {
                if n_targets != 1 {
                    return Err(Error::InvalidCircuit("Pauli generators act on one qubit".into()));
                }
                if !scale.is_finite() {
                    return Err(Error::NonFinite("generator scale".into()));
                }
            }
            Generator::Diagonal { diagonal } => {
                if diagonal.len() != 1 << n_targets {
                    return Err(Error::InvalidCircuit(format!(
                        "diagonal generator has {} entries for {n_targets} qubits",
                        diagonal.len()
                    )));
                }
                if diagonal.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("generator eigenvalue".into()));
                }
            }
        }
        Ok(())
    }

    /// The unitary `exp(-i t H)` as a row-major local matrix.
    fn unitary(&self, t: f64) -> LocalOp {
        match self {
            Generator::Pauli { pauli, scale } => {
                let (s, c) = (scale * t).sin_cos();
                let p = pauli.matrix();
                let id = Pauli::I.matrix();
                LocalOp::Dense((0..4).map(|e| id[e] * c - I * s * p[e]).collect())
            }
            Generator::Diagonal { diagonal } => {
                LocalOp::Diagonal(diagonal.iter().map(|l| Complex64::from_polar(1.0, -l * t)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedGate {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Cnot,
    Cz,
}

/// A fixed unitary, named or as an explicit `[re, im]` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Named { named: NamedGate },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

impl UnitarySpec {
    fn local(&self) -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        match self {
            UnitarySpec::Named { named } => match named {
                NamedGate::H => vec![c(h), c(h), c(h), c(-h)],
                NamedGate::X => Pauli::X.matrix().to_vec(),
                NamedGate::Y => Pauli::Y.matrix().to_vec(),
                NamedGate::Z => Pauli::Z.matrix().to_vec(),
                NamedGate::S => vec![ONE, ZERO, ZERO, I],
                NamedGate::T => vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
                NamedGate::Cnot => {
                    let mut m = vec![ZERO; 16];
                    for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                        m[r * 4 + col] = ONE;
                    }
                    m
                }
                NamedGate::Cz => {
                    let mut m = vec![ZERO; 16];
                    for r in 0..4 {
                        m[r * 5] = if r == 3 { -ONE } else { ONE };
                    }
                    m
                }
            },
            UnitarySpec::Matrix { matrix } => matrix
                .iter()
                .flat_map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)))
                .collect(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            UnitarySpec::Named { named } => match named {
                NamedGate::Cnot | NamedGate::Cz => 4,
                _ => 2,
            },
            UnitarySpec::Matrix { matrix } => matrix.len(),
        }
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        UnitarySpec::Matrix {
            matrix: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Gate {
    /// `exp(-i x_axis H)`.
    Data {
        axis: usize,
        qubits: Vec<usize>,
        generator: Generator,
    },
    Fixed {
        qubits: Vec<usize>,
        unitary: UnitarySpec,
    },
    /// `exp(-i θ_param H)`.
    Rotation {
        qubits: Vec<usize>,
        generator: Generator,
        param: usize,
    },
}

impl Gate {
    fn qubits(&self) -> &[usize] {
        match self {
            Gate::Data { qubits, .. } | Gate::Fixed { qubits, .. } | Gate::Rotation { qubits, .. } => qubits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFactor {
    pub qubit: usize,
    pub op: Pauli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observable {
    /// Tensor product of Paulis on a subset of qubits, identity elsewhere.
    Pauli { pauli: Vec<PauliFactor> },
    /// Dense Hermitian matrix of dimension `2^q`, entries `[re, im]`.
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

impl Observable {
    fn dense(matrix: &[Vec<[f64; 2]>]) -> DMatrix<Complex64> {
        let n = matrix.len();
        DMatrix::from_fn(n, n, |r, c| {
            let [re, im] = matrix[r].get(c).copied().unwrap_or([f64::NAN, f64::NAN]);
            Complex64::new(re, im)
        })
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        match UnitarySpec::from_matrix(m) {
            UnitarySpec::Matrix { matrix } => Observable::Matrix { matrix },
            UnitarySpec::Named { .. } => unreachable!(),
        }
    }
}

/// A toy parameterized circuit acting on `|0…0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    /// Data dimension `d`; data-gate axes are `0..d`.
    pub input_dim: usize,
    pub gates: Vec<Gate>,
    pub observable: Observable,
    #[serde(default)]
    pub params: Vec<f64>,
}

enum LocalOp {
    Dense(Vec<Complex64>),
    Diagonal(Vec<Complex64>),
}

impl CircuitSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::InvalidCircuit(format!(
                "qubit count {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.input_dim == 0 {
            return Err(Error::InvalidCircuit("input dimension must be >= 1".into()));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("circuit parameter".into()));
        }
        for (g, gate) in self.gates.iter().enumerate() {
            let qs = gate.qubits();
            if qs.is_empty() {
                return Err(Error::InvalidCircuit(format!("gate {g} has no qubits")));
            }
            for (i, &q) in qs.iter().enumerate() {
                if q >= self.n_qubits || qs[..i].contains(&q) {
                    return Err(Error::InvalidCircuit(format!("gate {g}: bad qubit list {qs:?}")));
                }
            }
            match gate {
                Gate::Data { axis, generator, .. } => {
                    if *axis >= self.input_dim {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: axis {axis} outside 0..{}",
                            self.input_dim
                        )));
                    }
                    generator.validate(qs.len())?;
                }
                Gate::Rotation { generator, param, .. } => {
                    if *param >= self.params.len() {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: parameter slot {param} but only {} parameters",
                            self.params.len()
                        )));
                    }
                    generator.validate(qs.len())?;
                }
                Gate::Fixed { unitary, .. } => {
                    let n = 1 << qs.len();
                    if unitary.dim() != n {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: unitary of dimension {} on {} qubits",
                            unitary.dim(),
                            qs.len()
                        )));
                    }
                    if let UnitarySpec::Matrix { matrix } = unitary {
                        if matrix.iter().any(|r| r.len() != n) {
                            return Err(Error::InvalidCircuit(format!("gate {g}: ragged matrix")));
                        }
                    }
                    let u = DMatrix::from_row_slice(n, n, &unitary.local());
                    let dev = (u.adjoint() * &u - DMatrix::identity(n, n)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
                    if dev.is_nan() || dev > MATRIX_TOL {
                        return Err(Error::InvalidCircuit(format!("gate {g}: not unitary (deviation {dev:e})")));
                    }
                }
            }
        }
        match &self.observable {
            Observable::Pauli { pauli } => {
                for (i, f) in pauli.iter().enumerate() {
                    if f.qubit >= self.n_qubits || pauli[..i].iter().any(|o| o.qubit == f.qubit) {
                        return Err(Error::InvalidCircuit(format!("bad Pauli observable qubit {}", f.qubit)));
                    }
                }
            }
            Observable::Matrix { matrix } => {
                if matrix.len() != self.dim() || matrix.iter().any(|r| r.len() != self.dim()) {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim(),
                        got: matrix.len(),
                    });
                }
                let o = Observable::dense(matrix);
                let dev = (o.adjoint() - &o).iter().fold(0.0f64, |m, z| m.max(z.norm()));
                if dev.is_nan() || dev > MATRIX_TOL {
                    return Err(Error::NonHermitian(dev));
                }
            }
        }
        Ok(())
    }

    /// Spectral norm of the observable.
    pub fn observable_norm(&self) -> f64 {
        match &self.observable {
            Observable::Pauli { .. } => 1.0,
            Observable::Matrix { matrix } => SymmetricEigen::new(Observable::dense(matrix))
                .eigenvalues
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// `U(x, θ)|0…0⟩`. Calls `on_gate` with the state after every gate.
    pub fn simulate_state_with(&self, x: &[f64], mut on_gate: impl FnMut(&[Complex64])) -> Result<Vec<Complex64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut state = vec![ZERO; self.dim()];
        state[0] = ONE;
        for gate in &self.gates {
            let op = match gate {
                Gate::Data { axis, generator, .. } => generator.unitary(x[*axis]),
                Gate::Rotation { generator, param, .. } => generator.unitary(self.params[*param]),
                Gate::Fixed { unitary, .. } => LocalOp::Dense(unitary.local()),
            };
            apply(&mut state, self.n_qubits, gate.qubits(), &op);
            on_gate(&state);
        }
        Ok(state)
    }

    pub fn simulate_state(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.simulate_state_with(x, |_| {})
    }

    /// `⟨ψ|O|ψ⟩` as a complex number, before the reality check.
    fn expectation(&self, state: &[Complex64]) -> Complex64 {
        match &self.observable {
            Observable::Pauli { pauli } => {
                let mut phi = state.to_vec();
                for f in pauli {
                    apply(&mut phi, self.n_qubits, &[f.qubit], &LocalOp::Dense(f.op.matrix().to_vec()));
                }
                state.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum()
            }
            Observable::Matrix { matrix } => {
                let o = Observable::dense(matrix);
                let psi = DVector::from_column_slice(state);
                (psi.adjoint() * (o * &psi))[(0, 0)]
            }
        }
    }

    /// `f(x) = ⟨0|U† O U|0⟩`.
    pub fn simulate_f(&self, x: &[f64]) -> Result<f64> {
        let state = self.simulate_state(x)?;
        let e = self.expectation(&state);
        if e.im.abs() > MATRIX_TOL {
            return Err(Error::ImaginaryResidue(e.im.abs()));
        }
        Ok(e.re)
    }

    /// Per-axis frequencies from the spectra of the data-encoding gates.
    /// Axes without data gates get the single frequency 0.
    pub fn induced_lattice(&self) -> Result<FrequencyLattice> {
        let axes = (0..self.input_dim)
            .map(|j| {
                let spectra: Vec<Vec<f64>> = self
                    .gates
                    .iter()
                    .filter_map(|g| match g {
                        Gate::Data { axis, generator, .. } if *axis == j => Some(generator.eigenvalues()),
                        _ => None,
                    })
                    .collect();
                if spectra.is_empty() {
                    Ok(FrequencyAxis::integer(0))
                } else {
                    FrequencyAxis::from_spectra(&spectra)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FrequencyLattice::new(axes)
    }
}

fn apply(state: &mut [Complex64], n: usize, qubits: &[usize], op: &LocalOp) {
    let k = qubits.len();
    let dim = 1usize << k;
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let all: usize = masks.iter().fold(0, |a, m| a | m);
    let offsets: Vec<usize> = (0..dim)
        .map(|local| {
            (0..k)
                .filter(|t| (local >> (k - 1 - t)) & 1 == 1)
                .fold(0, |a, t| a | masks[t])
        })
        .collect();
    let mut amps = vec![ZERO; dim];
    for base in (0..state.len()).filter(|b| b & all == 0) {
        match op {
            LocalOp::Diagonal(phases) => {
                for (off, ph) in offsets.iter().zip(phases) {
                    state[base | off] *= ph;
                }
            }
            LocalOp::Dense(u) => {
                for (a, off) in amps.iter_mut().zip(&offsets) {
                    *a = state[base | off];
                }
                for (i, off) in offsets.iter().enumerate() {
                    state[base | off] = u[i * dim..(i + 1) * dim].iter().zip(&amps).map(|(u, a)| u * a).sum();
                }
            }
        }
    }
}

pub fn simulate_f(circuit: &CircuitSpec, x: &[f64]) -> Result<f64> {
    circuit.simulate_f(x)
}

pub fn induced_lattice(circuit: &CircuitSpec) -> Result<FrequencyLattice> {
    circuit.induced_lattice()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficient {
    pub index: MultiIndex,
    pub frequency: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

impl FourierCoefficient {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Least-squares Fourier coefficients over a full lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierFit {
    /// In [`FrequencyLattice::iter`] order.
    pub coefficients: Vec<FourierCoefficient>,
    /// Root-mean-square residual over the sample points.
    pub residual: f64,
    pub sample_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FourierFit {
    pub fn coefficient(&self, idx: &MultiIndex) -> Option<Complex64> {
        self.coefficients.iter().find(|c| &c.index == idx).map(FourierCoefficient::value)
    }

    /// `max_ω |c_{-ω} - conj(c_ω)|`.
    pub fn conjugacy_error(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| {
                let mirror = self.coefficient(&c.index.neg()).unwrap_or(ZERO);
                (mirror - c.value().conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `a_ω = c_ω + c_{-ω}` and `b_ω = i(c_ω - c_{-ω})`, both real for a real
    /// model.
    pub fn cos_sin(&self, idx: &MultiIndex) -> Option<(Complex64, Complex64)> {
        let c = self.coefficient(idx)?;
        let m = self.coefficient(&idx.neg())?;
        Some((c + m, I * (c - m)))
    }
}

/// `max(4·|lattice|, 64)`.
pub fn default_sample_count(lattice: &FrequencyLattice) -> usize {
    let n = lattice.size().min(usize::MAX as u128 / 4) as usize;
    (4 * n).max(64)
}

/// Fits `f` at `sample_count` uniform points of `[0, 2π)^d` against the
/// features `e^{i⟨ω,x⟩}` for every `ω` of `lattice`, through the normal
/// equations.
pub fn fourier_fit(circuit: &CircuitSpec, lattice: &FrequencyLattice, sample_count: usize, seed: u64) -> Result<FourierFit> {
    lattice.check_enumerable(ENUMERATION_CAP)?;
    if lattice.dim() != circuit.input_dim {
        return Err(Error::DimensionMismatch {
            expected: circuit.input_dim,
            got: lattice.dim(),
        });
    }
    let n_freq = lattice.size() as usize;
    if sample_count < 2 * n_freq {
        return Err(Error::InvalidArgument(format!(
            "sample count {sample_count} below twice the lattice size {n_freq}"
        )));
    }
    let mut warnings = Vec::new();
    if !lattice.axes().iter().all(FrequencyAxis::is_integer) {
        warnings.push(
            "non-integer frequencies: the model is not 2π-periodic, so uniform samples on [0, 2π) \
             do not give an orthogonal design"
                .to_string(),
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = 2.0 * std::f64::consts::PI;
    let xs: Vec<Vec<f64>> = (0..sample_count)
        .map(|_| (0..lattice.dim()).map(|_| rng.random::<f64>() * tau).collect())
        .collect();
    let ys: Vec<f64> = xs
        .par_iter()
        .map(|x| circuit.simulate_f(x))
        .collect::<Result<_>>()?;

    let indices: Vec<MultiIndex> = lattice.iter().collect();
    let freqs: Vec<Vec<f64>> = indices.iter().map(|i| lattice.frequency_of(i)).collect::<Result<_>>()?;
    let a = DMatrix::from_fn(sample_count, n_freq, |s, f| {
        let phase: f64 = freqs[f].iter().zip(&xs[s]).map(|(w, x)| w * x).sum();
        Complex64::from_polar(1.0, phase)
    });
    let y = DVector::from_iterator(sample_count, ys.iter().map(|&v| Complex64::new(v, 0.0)));
    let ah = a.adjoint();
    let normal = &ah * &a;
    let rhs = &ah * &y;
    let factor = cholesky_with_jitter(&normal).map_err(|e| match e {
        Error::Factorization(_) => Error::RankDeficient(0.0),
        other => other,
    })?;
    let ratio = pivot_ratio(&factor);
    if ratio < RANK_TOL {
        return Err(Error::RankDeficient(ratio));
    }
    let mut c = factor.chol.solve(&rhs);
    for _ in 0..2 {
        let r = &rhs - &normal * &c;
        c += factor.chol.solve(&r);
    }
    let resid = &y - &a * &c;
    let residual = (resid.iter().map(|z| z.norm_sqr()).sum::<f64>() / sample_count as f64).sqrt();

    let coefficients = indices
        .into_iter()
        .zip(freqs)
        .zip(c.iter())
        .map(|((index, frequency), z)| FourierCoefficient {
            index,
            frequency,
            re: z.re,
            im: z.im,
        })
        .collect();
    Ok(FourierFit {
        coefficients,
        residual,
        sample_count,
        warnings,
    })
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random Hermitian matrix with entries of unit scale.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Two-qubit, two-input circuit: `uploads` rounds of
/// `W · (e^{-i x_1 Z/2} ⊗ e^{-i x_2 Z/2})` followed by a final `W`, each `W`
/// a fresh random two-qubit unitary, measured with a random Hermitian
/// observable. Its lattice is `{-uploads, …, uploads}²`.
pub fn random_encoding_circuit(seed: u64, uploads: usize) -> CircuitSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    let z_half = Generator::Pauli {
        pauli: Pauli::Z,
        scale: 0.5,
    };
    for _ in 0..uploads {
        gates.push(Gate::Fixed {
            qubits: vec![0, 1],
            unitary: UnitarySpec::from_matrix(&random_unitary(4, &mut rng)),
        });
        for q in 0..2 {
            gates.push(Gate::Data {
                axis: q,
                qubits: vec![q],
                generator: z_half.clone(),
            });
        }
    }
    gates.push(Gate::Fixed {
        qubits: vec![0, 1],
        unitary: UnitarySpec::from_matrix(&random_unitary(4, &mut rng)),
    });
    CircuitSpec {
        n_qubits: 2,
        input_dim: 2,
        gates,
        observable: Observable::from_matrix(&random_hermitian(4, &mut rng)),
        params: Vec::new(),
    }
}
