//! Pauli-twirled error rates of a gate channel relative to its ideal unitary.
//!
//! N-qubit Pauli strings are indexed base 4, little endian: digit n (0 = I,
//! 1 = X, 2 = Y, 3 = Z) acts on qubit n. Labels are written with the highest
//! qubit first, so "IZ" on two qubits is Z on qubit 0.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gate::{CMatrix, Channel};

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Dense matrix of the Pauli string with base-4 index `index`.
pub fn pauli_matrix(index: usize, n_qubits: usize) -> CMatrix {
    let d = 1usize << n_qubits;
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let (row, phase) = pauli_action(index, n_qubits, col);
        m[(row, col)] = phase;
    }
    m
}

/// σ|col⟩ = phase |row⟩.
fn pauli_action(index: usize, n_qubits: usize, col: usize) -> (usize, C64) {
    let mut row = col;
    let mut phase = C64::new(1.0, 0.0);
    for q in 0..n_qubits {
        let bit = col >> q & 1;
        match index / 4usize.pow(q as u32) % 4 {
            1 => row ^= 1 << q,
            2 => {
                row ^= 1 << q;
                phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
            }
            3 if bit == 1 => phase = -phase,
            _ => {}
        }
    }
    (row, phase)
}

/// Label such as "IZ" (qubit N−1 first).
pub fn pauli_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| LETTERS[index / 4usize.pow(q as u32) % 4])
        .collect()
}

fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

/// (R_Λ)_ii = Tr[σ_i Λ(σ_i)]/2^N for Λ(ρ) = U† ε(ρ) U.
pub fn pauli_transfer_diagonal(channel: &dyn Channel, u: &CMatrix) -> Result<Vec<f64>> {
    let n = channel.num_qubits();
    let d = channel.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    let diag_u = is_diagonal(u);
    if let (Some(k), true) = (channel.schur_kernel(), diag_u) {
        return Ok(schur_transfer_diagonal(k, u, n));
    }
    let ud = u.adjoint();
    let entry = |i: usize| -> f64 {
        let sigma = pauli_matrix(i, n);
        let out = channel.apply(&sigma);
        let adjusted = if diag_u {
            CMatrix::from_fn(d, d, |a, b| u[(a, a)].conj() * out[(a, b)] * u[(b, b)])
        } else {
            &ud * out * u
        };
        // Tr(σ M) = Σ_col phase(col) M[col, row(col)] for σ|col⟩ = phase|row⟩.
        let mut tr = C64::new(0.0, 0.0);
        for col in 0..d {
            let (row, phase) = pauli_action(i, n, col);
            tr += phase * adjusted[(col, row)];
        }
        tr.re / d as f64
    };
    let len = 1usize << (2 * n);
    Ok(if n >= 3 {
        (0..len).into_par_iter().map(entry).collect()
    } else {
        (0..len).map(entry).collect()
    })
}

/// For ε(ρ) = ρ∘K and diagonal U the entry depends only on which qubits the
/// string flips: R = Σ_c K[c⊕x, c] ū_{c⊕x} u_c / 2^N with x the X/Y mask.
fn schur_transfer_diagonal(k: &CMatrix, u: &CMatrix, n_qubits: usize) -> Vec<f64> {
    let d = 1usize << n_qubits;
    let by_mask: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|x| {
            (0..d)
                .map(|c| (k[(c ^ x, c)] * u[(c ^ x, c ^ x)].conj() * u[(c, c)]).re)
                .sum::<f64>()
                / d as f64
        })
        .collect();
    (0..1usize << (2 * n_qubits))
        .map(|idx| {
            let mask = (0..n_qubits)
                .filter(|&q| matches!(idx / 4usize.pow(q as u32) % 4, 1 | 2))
                .fold(0, |m, q| m | 1 << q);
            by_mask[mask]
        })
        .collect()
}

/// Pauli error rates of a twirled channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliChannel {
    pub n_qubits: usize,
    /// Rates over all N-qubit Pauli strings.
    pub rates: Vec<f64>,
    /// The two qubits kept by the marginal, lower index first.
    pub pair: (usize, usize),
    /// Marginal rates over the pair, indexed digit(lower) + 4·digit(upper).
    pub marginal: [f64; 16],
    pub success_probability: f64,
    pub bias: f64,
}

impl PauliChannel {
    /// Marginal rate by two-letter label, upper qubit first (e.g. "IZ").
    pub fn marginal_rate(&self, label: &str) -> Option<f64> {
        let digits: Vec<usize> = label
            .chars()
            .map(|ch| LETTERS.iter().position(|&c| c == ch))
            .collect::<Option<_>>()?;
        match digits[..] {
            [upper, lower] => Some(self.marginal[lower + 4 * upper]),
            _ => None,
        }
    }

    /// Sum of all non-identity, non-dephasing marginal rates.
    pub fn non_dephasing(&self) -> f64 {
        non_dephasing(&self.marginal)
    }
}

pub fn marginal_label(index: usize) -> String {
    pauli_label(index, 2)
}

/// Applies A₁^{⊗N}/4^N to a PTM diagonal, one qubit at a time.
fn invert_ptm(diagonal: &[f64], n_qubits: usize) -> Vec<f64> {
    const A1: [[f64; 4]; 4] = [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ];
    let mut v = diagonal.to_vec();
    for q in 0..n_qubits {
        let stride = 4usize.pow(q as u32);
        let mut next = vec![0.0; v.len()];
        for (idx, slot) in next.iter_mut().enumerate() {
            let digit = idx / stride % 4;
            let base = idx - digit * stride;
            *slot = (0..4).map(|k| A1[digit][k] * v[base + k * stride]).sum::<f64>() / 4.0;
        }
        v = next;
    }
    v
}

/// Rates from a PTM diagonal, marginalized onto the qubits `control` and
/// `target`.
pub fn error_rates(diagonal: &[f64], control: usize, target: usize) -> Result<PauliChannel> {
    let len = diagonal.len();
    let n = (len.trailing_zeros() / 2) as usize;
    if len == 0 || 1usize << (2 * n) != len {
        return Err(Error::Precondition(format!(
            "PTM diagonal length {len} is not a power of 4"
        )));
    }
    if control == target || control >= n || target >= n {
        return Err(Error::Precondition(format!(
            "invalid qubit pair ({control}, {target}) for {n} qubits"
        )));
    }
    let rates = invert_ptm(diagonal, n);
    let (lo, hi) = (control.min(target), control.max(target));
    let mut marginal = [0.0; 16];
    for (idx, p) in rates.iter().enumerate() {
        let dl = idx / 4usize.pow(lo as u32) % 4;
        let dh = idx / 4usize.pow(hi as u32) % 4;
        marginal[dl + 4 * dh] += p;
    }
    let success_probability = rates.iter().sum();
    Ok(PauliChannel {
        n_qubits: n,
        rates,
        pair: (lo, hi),
        bias: noise_bias(&marginal),
        marginal,
        success_probability,
    })
}

/// Twirled rates of `channel` relative to `u`.
pub fn pauli_channel(
    channel: &dyn Channel,
    u: &CMatrix,
    control: usize,
    target: usize,
) -> Result<PauliChannel> {
    error_rates(&pauli_transfer_diagonal(channel, u)?, control, target)
}

const DEPHASING: [usize; 3] = [3, 12, 15]; // IZ, ZI, ZZ

fn non_dephasing(marginal: &[f64; 16]) -> f64 {
    (1..16).filter(|i| !DEPHASING.contains(i)).map(|i| marginal[i]).sum()
}

/// η = (p_IZ + p_ZI + p_ZZ) / Σ non-dephasing rates; +∞ when the denominator
/// is below 1e-12.
pub fn noise_bias(marginal: &[f64; 16]) -> f64 {
    let nd = non_dephasing(marginal);
    if nd < 1e-12 {
        return f64::INFINITY;
    }
    DEPHASING.iter().map(|&i| marginal[i]).sum::<f64>() / nd
}
