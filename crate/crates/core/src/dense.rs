//! Dense reference matrices built from Kronecker products.
//!
//! These are deliberately naive and only meant for small systems: they are the
//! yardstick the symplectic and one-hot code paths are checked against.
//! Qubit `k` is bit `k` of the basis index, so the Kronecker order is
//! `q_{n-1} ⊗ … ⊗ q_0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::{Pauli, PauliString};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 matrix of a single-qubit Pauli.
pub fn single_qubit(p: Pauli) -> DMatrix<Complex64> {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// Kronecker product of per-qubit factors given in qubit order `0..n`.
pub fn kron_qubits(factors: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for f in factors {
        out = f.kronecker(&out);
    }
    out
}

/// Dense `2^n × 2^n` matrix of a Pauli string.
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let factors: Vec<_> = (0..p.n_qubits()).map(|q| single_qubit(p.get(q))).collect();
    kron_qubits(&factors)
}

/// Dense matrix of `constant·I + Σ h_i P_i`.
pub fn pauli_sum_matrix(sum: &crate::pauli::PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << sum.n_qubits();
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * c(sum.constant(), 0.0);
    for (p, h) in sum.terms() {
        m += pauli_matrix(p) * c(*h, 0.0);
    }
    m
}

/// Dense matrix of a real linear combination of Pauli strings.
pub fn pauli_combination_matrix(
    n_qubits: usize,
    terms: &[(PauliString, f64)],
) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (p, h) in terms {
        m += pauli_matrix(p) * c(*h, 0.0);
    }
    m
}

/// Single-qubit raising operator `σ⁺ = |1⟩⟨0|` (`|1⟩` is occupied).
pub fn sigma_plus() -> DMatrix<Complex64> {
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[o, o, l, o])
}

/// Single-qubit lowering operator `σ⁻ = |0⟩⟨1|`.
pub fn sigma_minus() -> DMatrix<Complex64> {
    sigma_plus().transpose()
}

/// Operator `op` acting on `qubit` of an `n`-qubit register.
pub fn embed(n_qubits: usize, qubit: usize, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let factors: Vec<_> = (0..n_qubits)
        .map(|q| {
            if q == qubit {
                op.clone()
            } else {
                single_qubit(Pauli::I)
            }
        })
        .collect();
    kron_qubits(&factors)
}

/// Dense product that skips zero entries of `a`; exact for any matrices and
/// fast for the generalized permutation matrices of Pauli strings.
pub fn product_skipping_zeros(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let aik = a[(i, k)];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            for j in 0..b.ncols() {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

/// True iff `[a, b]` is exactly the zero matrix.
pub fn commutator_vanishes(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
    let ab = product_skipping_zeros(a, b);
    let ba = product_skipping_zeros(b, a);
    ab.iter().zip(ba.iter()).all(|(x, y)| x == y)
}

/// Largest elementwise modulus of `a − b`.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_basis() {
        // X on qubit 0 flips bit 0: |00> (index 0) -> |01> (index 1)
        let m = pauli_matrix(&"XI".parse().unwrap());
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        let m = pauli_matrix(&"IX".parse().unwrap());
        assert_eq!(m[(2, 0)], c(1.0, 0.0));
    }

    #[test]
    fn sigma_plus_is_x_minus_iy_over_two() {
        let x = single_qubit(Pauli::X);
        let y = single_qubit(Pauli::Y);
        let expected = (x - y * c(0.0, 1.0)) * c(0.5, 0.0);
        assert_eq!(sigma_plus(), expected);
    }
}
