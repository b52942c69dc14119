//! Dense statevector engine.
//!
//! Basis index bit `k` is qubit `k`. The FVCI ground state is computed in
//! configuration space and embedded into the one-hot subspace of the qubit
//! register.

use std::collections::HashMap;
use std::io::{Read, Write};

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::QubitLayout;
use crate::error::{invalid, Error, Result};
use crate::group::MeasurementGroup;
use crate::pauli::PauliString;
use crate::sopham::ExpandedHamiltonian;

/// Cap on the configuration-space dimension for dense diagonalization.
pub const MAX_FVCI_DIM: usize = 1 << 14;

/// Cap on statevector width.
pub const MAX_STATE_QUBITS: usize = 30;

pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest tolerated `|H_ij − H_ji|` of the configuration-space matrix.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-10;

/// Magic bytes opening a binary state file.
pub const STATE_MAGIC: &[u8; 8] = b"VIBSTATE";

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes; the vector must have length `2^n_qubits` and unit norm.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits > MAX_STATE_QUBITS {
            return Err(Error::ResourceCap {
                what: "statevector qubits",
                value: n_qubits as u128,
                limit: MAX_STATE_QUBITS as u128,
            });
        }
        if amplitudes.len() != 1usize << n_qubits {
            return Err(invalid(format!(
                "{} amplitudes given for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let s = StateVector {
            n_qubits,
            amplitudes,
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(s)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        *amps
            .get_mut(index)
            .ok_or_else(|| invalid(format!("basis index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Self::new(n_qubits, amps)
    }

    /// Embeds a configuration-space vector into the one-hot subspace.
    pub fn from_configuration(layout: &QubitLayout, coeffs: &DVector<f64>) -> Result<Self> {
        if coeffs.len() != layout.basis().dimension() {
            return Err(invalid("configuration vector has the wrong dimension"));
        }
        let n = layout.n_qubits();
        if n > MAX_STATE_QUBITS {
            return Err(Error::ResourceCap {
                what: "statevector qubits",
                value: n as u128,
                limit: MAX_STATE_QUBITS as u128,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        for (config, idx) in layout.one_hot_indices().into_iter().enumerate() {
            amps[idx] = Complex64::new(coeffs[config], 0.0);
        }
        Self::new(n, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn check(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: p.n_qubits(),
            });
        }
        Ok(())
    }

    /// Binary state file: magic header then little-endian `(re, im)` doubles.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(STATE_MAGIC)?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let body = bytes
            .strip_prefix(STATE_MAGIC.as_slice())
            .ok_or_else(|| invalid("missing VIBSTATE header"))?;
        if body.len() % 16 != 0 || !(body.len() / 16).is_power_of_two() {
            return Err(invalid("state body is not 2^n complex doubles"));
        }
        let amps: Vec<Complex64> = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        let n = amps.len().trailing_zeros() as usize;
        Self::new(n, amps)
    }
}

/// JSON sidecar written next to a binary state file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub n_qubits: usize,
    pub seed: Option<u64>,
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// Ascending configuration-space eigenvalues.
    pub energies: Vec<f64>,
    /// Ground state in configuration space.
    pub configuration_vector: DVector<f64>,
    pub ground_state: StateVector,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }
}

/// Exact diagonalization in configuration space.
///
/// The ground vector's sign is fixed so that its largest component is
/// positive.
pub fn fvci_ground_state(
    ham: &ExpandedHamiltonian,
    layout: &QubitLayout,
) -> Result<SpectrumResult> {
    let dim = ham.basis().dimension();
    if dim > MAX_FVCI_DIM {
        return Err(Error::ResourceCap {
            what: "FVCI dimension",
            value: dim as u128,
            limit: MAX_FVCI_DIM as u128,
        });
    }
    if layout.basis() != ham.basis() {
        return Err(invalid(
            "layout does not match the Hamiltonian's modal basis",
        ));
    }
    let h = ham.config_matrix();
    let asym = (&h - h.transpose()).amax();
    if asym > ASYMMETRY_TOLERANCE {
        return Err(invalid(format!(
            "configuration matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut v: DVector<f64> = eig.eigenvectors.column(order[0]).into_owned();
    let pivot = v.iamax();
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
    v /= v.norm();
    let residual = (&h * &v - &v * energies[0]).norm();
    let scale = h.amax().max(f64::MIN_POSITIVE);
    if residual > 1e-9 * scale {
        return Err(Error::Invariant(format!(
            "ground-state residual {residual:e} exceeds 1e-9·‖H‖_max"
        )));
    }
    let ground_state = StateVector::from_configuration(layout, &v)?;
    Ok(SpectrumResult {
        energies,
        configuration_vector: v,
        ground_state,
    })
}

/// `P|ψ⟩` for a Pauli string on at most 64 qubits.
pub fn apply_pauli(state: &StateVector, p: &PauliString) -> Result<Vec<Complex64>> {
    state.check(p)?;
    Ok(apply_raw(&state.amplitudes, p))
}

fn y_phase(p: &PauliString) -> Complex64 {
    crate::pauli::Phase::from_power(p.y_count() as i64).to_complex()
}

// P = i^{#Y} X^x Z^z, so P|b⟩ = i^{#Y} (−1)^{|z∧b|} |b ⊕ x⟩.
fn apply_raw(amps: &[Complex64], p: &PauliString) -> Vec<Complex64> {
    let (x, z) = p.masks();
    let phase = y_phase(p);
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (b, a) in amps.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let sign = if ((b as u64) & z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        out[b ^ x as usize] = a * phase * sign;
    }
    out
}

fn expectation_raw(amps: &[Complex64], p: &PauliString) -> Complex64 {
    let (x, z) = p.masks();
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, a) in amps.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let target = amps[b ^ x as usize];
        let term = target.conj() * a;
        if ((b as u64) & z).count_ones().is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc * y_phase(p)
}

/// `⟨ψ|P|ψ⟩`.
pub fn expectation(state: &StateVector, p: &PauliString) -> Result<f64> {
    state.check(p)?;
    Ok(expectation_raw(&state.amplitudes, p).re)
}

/// `⟨H_α²⟩ − ⟨H_α⟩²` from pairwise products `P_i P_j`, clamped at zero.
pub fn group_variance(state: &StateVector, g: &MeasurementGroup) -> Result<f64> {
    for (p, _) in &g.members {
        state.check(p)?;
    }
    let mut cache: HashMap<PauliString, f64> = HashMap::new();
    let mut expect = |q: &PauliString| -> f64 {
        if q.is_identity() {
            return 1.0;
        }
        *cache
            .entry(q.clone())
            .or_insert_with(|| expectation_raw(&state.amplitudes, q).re)
    };
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, (pi, hi)) in g.members.iter().enumerate() {
        mean += hi * expect(pi);
        second += hi * hi;
        for (pj, hj) in &g.members[i + 1..] {
            let (q, phase) = pi.multiply(pj)?;
            // P_i P_j + P_j P_i = 2 Re(φ) Q
            let re = phase.to_complex().re;
            if re != 0.0 {
                second += 2.0 * hi * hj * re * expect(&q);
            }
        }
    }
    let var = second - mean * mean;
    if var < -1e-10 * second.abs().max(1.0) {
        return Err(Error::Invariant(format!("negative group variance {var:e}")));
    }
    Ok(var.max(0.0))
}

/// Simulates `shots` simultaneous measurements of a commuting group by
/// sequential projection, returning `Σ_i h_i λ_i` per shot.
///
/// Shot `k` draws from a ChaCha stream keyed by `(seed, k)`, so the samples
/// do not depend on how shots are scheduled across threads.
pub fn sample_group(
    state: &StateVector,
    g: &MeasurementGroup,
    shots: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(invalid("shot count must be positive"));
    }
    for (p, _) in &g.members {
        state.check(p)?;
    }
    (0..shots)
        .into_par_iter()
        .map(|shot| sample_once(&state.amplitudes, &g.members, seed, shot))
        .collect()
}

fn sample_once(
    amps: &[Complex64],
    members: &[(PauliString, f64)],
    seed: u64,
    shot: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    let mut psi = amps.to_vec();
    let mut energy = 0.0;
    for (p, h) in members {
        let mean = expectation_raw(&psi, p).re;
        let prob_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let outcome = if rng.random::<f64>() < prob_plus {
            1.0
        } else {
            -1.0
        };
        if project(&mut psi, p, outcome) == 0.0 {
            return Err(Error::Invariant(format!(
                "projection onto {p} annihilated the state"
            )));
        }
        energy += h * outcome;
    }
    Ok(energy)
}

// Applies (1 + λP)/2, renormalizes, and returns the norm before
// renormalization (the square root of the outcome probability).
fn project(psi: &mut [Complex64], p: &PauliString, outcome: f64) -> f64 {
    let flipped = apply_raw(psi, p);
    for (a, f) in psi.iter_mut().zip(&flipped) {
        *a = (*a + f * outcome) * 0.5;
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        psi.iter_mut().for_each(|a| *a /= norm);
    }
    norm
}
