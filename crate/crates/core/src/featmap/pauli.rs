//! Dense statevector simulation of Pauli-expectation features.
//!
//! Qubit `j` of an `n`-qubit register is bit `n - 1 - j` of a basis index,
//! so qubit 0 is the most significant and Pauli strings read left to right
//! from qubit 0. Pauli strings are unnormalized (eigenvalues `+-1`), which
//! puts every feature in `[-1, 1]` and makes the squared features of a pure
//! state sum to `2^n`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axiscore::{FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};

/// Largest register `encode_state` will simulate.
pub const MAX_STATE_QUBITS: usize = 12;
/// Largest register for which all `4^n` features are materialized.
pub const MAX_FEATURE_QUBITS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn from_digit(d: usize) -> Self {
        match d {
            0 => PauliLetter::I,
            1 => PauliLetter::X,
            2 => PauliLetter::Y,
            _ => PauliLetter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub index: usize,
    pub letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn qubit_count(&self) -> usize {
        self.letters.len()
    }

    /// Bit masks `(flip, phase, y_count)`: `flip` marks X/Y qubits, `phase`
    /// marks Y/Z qubits.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.letters.len();
        let (mut flip, mut phase, mut ys) = (0usize, 0usize, 0u32);
        for (j, letter) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - j);
            match letter {
                PauliLetter::I => {}
                PauliLetter::X => flip |= bit,
                PauliLetter::Y => {
                    flip |= bit;
                    phase |= bit;
                    ys += 1;
                }
                PauliLetter::Z => phase |= bit,
            }
        }
        (flip, phase, ys)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

/// Base-4 decode of `index` (0=I, 1=X, 2=Y, 3=Z), most significant digit on
/// qubit 0.
pub fn pauli_string(index: usize, n: usize) -> Result<PauliString> {
    let total = 4usize.checked_pow(n as u32).ok_or(Error::PauliIndexOutOfRange { index, qubits: n })?;
    if n == 0 || index >= total {
        return Err(Error::PauliIndexOutOfRange { index, qubits: n });
    }
    let mut letters = vec![PauliLetter::I; n];
    let mut rest = index;
    for j in (0..n).rev() {
        letters[j] = PauliLetter::from_digit(rest % 4);
        rest /= 4;
    }
    Ok(PauliString { index, letters })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    RingCz,
    None,
}

/// Angle-encoding circuit: `layers` repetitions of `RY(scale * x_{j mod m})`
/// on every qubit `j` followed by the entangler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingCircuitSpec {
    pub qubit_count: usize,
    pub layers: usize,
    pub entangler: Entangler,
    pub rotation_scale: f64,
}

impl EncodingCircuitSpec {
    pub fn new(qubit_count: usize) -> Self {
        Self { qubit_count, layers: 2, entangler: Entangler::RingCz, rotation_scale: 1.0 }
    }
}

fn apply_ry(state: &mut [Complex64], n: usize, qubit: usize, angle: f64) {
    let (s, c) = (angle / 2.0).sin_cos();
    let mask = 1usize << (n - 1 - qubit);
    for b in 0..state.len() {
        if b & mask == 0 {
            let (a0, a1) = (state[b], state[b | mask]);
            state[b] = a0 * c - a1 * s;
            state[b | mask] = a0 * s + a1 * c;
        }
    }
}

/// CZ edges of the ring; a 2-qubit ring has a single edge.
fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|j| (j, (j + 1) % n)).collect(),
    }
}

fn apply_ring_cz(state: &mut [Complex64], n: usize) {
    let masks: Vec<usize> = ring_edges(n)
        .into_iter()
        .map(|(a, b)| (1usize << (n - 1 - a)) | (1usize << (n - 1 - b)))
        .collect();
    for (b, amp) in state.iter_mut().enumerate() {
        let flips = masks.iter().filter(|&&m| b & m == m).count();
        if flips % 2 == 1 {
            *amp = -*amp;
        }
    }
}

/// Prepares `|psi(x)>` from `|0...0>`.
pub fn encode_state(x: &[f64], spec: &EncodingCircuitSpec) -> Result<Vec<Complex64>> {
    let n = spec.qubit_count;
    if n > MAX_STATE_QUBITS {
        return Err(Error::DenseSimulationLimit { qubits: n, limit: MAX_STATE_QUBITS });
    }
    if n == 0 || spec.layers == 0 {
        return Err(Error::InvalidParameter("qubit_count and layers must be at least 1".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
    state[0] = Complex64::new(1.0, 0.0);
    for _ in 0..spec.layers {
        for j in 0..n {
            apply_ry(&mut state, n, j, spec.rotation_scale * x[j % x.len()]);
        }
        if spec.entangler == Entangler::RingCz {
            apply_ring_cz(&mut state, n);
        }
    }
    Ok(state)
}

/// `<psi| sigma |psi>` by applying the string's bit flip and phase to each
/// amplitude; no `2^n x 2^n` matrix is formed. Clamped to `[-1, 1]`.
pub fn pauli_expectation(state: &[Complex64], sigma: &PauliString) -> Result<f64> {
    let dim = 1usize << sigma.qubit_count();
    if state.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: state.len() });
    }
    let (flip, phase, ys) = sigma.masks();
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, amp) in state.iter().enumerate() {
        let term = state[b ^ flip].conj() * amp;
        if (b & phase).count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    // global factor i^{#Y}
    let value = match ys % 4 {
        0 => acc.re,
        1 => -acc.im,
        2 => -acc.re,
        _ => acc.im,
    };
    Ok(value.clamp(-1.0, 1.0))
}

/// Row `k` holds `a_i(x_k)` for every Pauli string `i` in index order.
pub fn pauli_feature_matrix(dataset: &LabeledDataset, spec: &EncodingCircuitSpec) -> Result<FeatureMatrix> {
    let n = spec.qubit_count;
    if n > MAX_FEATURE_QUBITS {
        return Err(Error::DenseSimulationLimit { qubits: n, limit: MAX_FEATURE_QUBITS });
    }
    let d = 1usize << (2 * n);
    let strings: Vec<PauliString> = (0..d).map(|i| pauli_string(i, n)).collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = dataset
        .inputs()
        .par_iter()
        .map(|x| {
            let state = encode_state(x, spec)?;
            strings.iter().map(|s| pauli_expectation(&state, s)).collect()
        })
        .collect::<Result<_>>()?;
    FeatureMatrix::from_rows(&rows)
}

/// `(|00> + |11>) / sqrt(2)`.
pub fn bell_state() -> Vec<Complex64> {
    let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    vec![a, z, z, a]
}
