//! Direct (one-hot) mapping of expanded vibrational Hamiltonians to qubits.
//!
//! Modal `i` of mode `m` is qubit `offset(m) + i`. A qubit in `|1⟩` is
//! occupied (`Z|1⟩ = −|1⟩`), so `a†_p a_p ↦ (I − Z_p)/2` and
//! `a†_p a_q ↦ σ⁺_p σ⁻_q` with `σ^± = (X ∓ iY)/2`.

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::format::to_json_string;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::sopham::{ExpandedHamiltonian, ExpandedString, ModeBasis};

/// Default cap on `Σ N_m` for [`encode`].
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Combined Pauli coefficients below this fraction of the largest string
/// coefficient are treated as cancellation residue and dropped.
pub const RESIDUE_RELATIVE: f64 = 1e-14;

/// CNOT gates needed for one Trotterized double excitation.
pub const CNOTS_PER_DOUBLE_EXCITATION: u64 = 48;

const CHUNK: usize = 1024;

/// Placement of modals on qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitLayout {
    basis: ModeBasis,
    offsets: Vec<usize>,
    n_qubits: usize,
}

impl QubitLayout {
    pub fn new(basis: &ModeBasis) -> Self {
        let mut offsets = Vec::with_capacity(basis.mode_count());
        let mut acc = 0;
        for &n in basis.modals() {
            offsets.push(acc);
            acc += n;
        }
        QubitLayout {
            basis: basis.clone(),
            offsets,
            n_qubits: acc,
        }
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn qubit(&self, mode: usize, modal: usize) -> usize {
        debug_assert!(modal < self.basis.modals()[mode]);
        self.offsets[mode] + modal
    }

    pub fn block(&self, mode: usize) -> Range<usize> {
        self.offsets[mode]..self.offsets[mode] + self.basis.modals()[mode]
    }

    pub fn mode_of_qubit(&self, qubit: usize) -> usize {
        assert!(qubit < self.n_qubits, "qubit out of range");
        self.offsets.partition_point(|&o| o <= qubit) - 1
    }

    /// Modes whose qubit block the string touches, ascending.
    pub fn mode_support(&self, p: &PauliString) -> Vec<usize> {
        let mut modes: Vec<usize> = p
            .support()
            .into_iter()
            .map(|q| self.mode_of_qubit(q))
            .collect();
        modes.dedup();
        modes
    }

    /// Statevector index of the one-hot state for configuration `config`
    /// (configuration index convention of [`ModeBasis`]).
    pub fn one_hot_index(&self, config: usize) -> usize {
        (0..self.basis.mode_count())
            .map(|m| 1usize << self.qubit(m, self.basis.modal_of(config, m)))
            .sum()
    }

    /// One-hot statevector indices for every configuration, in configuration order.
    pub fn one_hot_indices(&self) -> Vec<usize> {
        (0..self.basis.dimension())
            .map(|c| self.one_hot_index(c))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(&LayoutFile {
            modals: self.basis.modals().to_vec(),
            offsets: self.offsets.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(text)?;
        let layout = QubitLayout::new(&ModeBasis::new(file.modals)?);
        if layout.offsets != file.offsets {
            return Err(invalid(format!(
                "layout offsets {:?} do not match modal counts (expected {:?})",
                file.offsets, layout.offsets
            )));
        }
        Ok(layout)
    }
}

#[derive(Serialize, Deserialize)]
struct LayoutFile {
    modals: Vec<usize>,
    offsets: Vec<usize>,
}

type SparseTerm = (Vec<(usize, Pauli)>, Complex64);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli expansion of `a†_p a_q` on qubits `p`, `q`.
fn excitation_paulis(p: usize, q: usize) -> Vec<SparseTerm> {
    if p == q {
        vec![(vec![], c(0.5, 0.0)), (vec![(p, Pauli::Z)], c(-0.5, 0.0))]
    } else {
        // (X_p − iY_p)(X_q + iY_q) / 4
        vec![
            (vec![(p, Pauli::X), (q, Pauli::X)], c(0.25, 0.0)),
            (vec![(p, Pauli::X), (q, Pauli::Y)], c(0.0, 0.25)),
            (vec![(p, Pauli::Y), (q, Pauli::X)], c(0.0, -0.25)),
            (vec![(p, Pauli::Y), (q, Pauli::Y)], c(0.25, 0.0)),
        ]
    }
}

/// Multiplies out per-qubit-disjoint factor expansions.
fn tensor_expand(
    n_qubits: usize,
    factors: &[Vec<SparseTerm>],
    scale: Complex64,
) -> Vec<(PauliString, Complex64)> {
    let mut acc: Vec<SparseTerm> = vec![(Vec::new(), scale)];
    for f in factors {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for (ops, coeff) in &acc {
            for (fops, fc) in f {
                let mut o = ops.clone();
                o.extend_from_slice(fops);
                next.push((o, coeff * fc));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(ops, coeff)| {
            let p = PauliString::from_sparse(n_qubits, &ops).expect("qubits within layout");
            (p, coeff)
        })
        .collect()
}

fn encode_string(layout: &QubitLayout, s: &ExpandedString) -> Vec<(PauliString, Complex64)> {
    let factors: Vec<Vec<SparseTerm>> = s
        .modes
        .iter()
        .zip(&s.pq)
        .map(|(&m, &(p, q))| excitation_paulis(layout.qubit(m, p), layout.qubit(m, q)))
        .collect();
    tensor_expand(layout.n_qubits, &factors, c(s.coeff, 0.0))
}

/// Encodes with the default qubit cap.
pub fn encode(ham: &ExpandedHamiltonian) -> Result<(PauliSum, QubitLayout)> {
    encode_with_cap(ham, DEFAULT_MAX_QUBITS)
}

/// Maps every string to Pauli operators and combines like strings.
///
/// Strings are processed in fixed-size chunks whose partial sums are merged
/// in chunk order, so the output does not depend on the worker count.
pub fn encode_with_cap(
    ham: &ExpandedHamiltonian,
    max_qubits: usize,
) -> Result<(PauliSum, QubitLayout)> {
    let layout = QubitLayout::new(ham.basis());
    if layout.n_qubits > max_qubits {
        return Err(Error::ResourceCap {
            what: "qubit count",
            value: layout.n_qubits as u128,
            limit: max_qubits as u128,
        });
    }
    let partials: Vec<BTreeMap<PauliString, Complex64>> = ham
        .strings()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
            for s in chunk {
                for (p, coeff) in encode_string(&layout, s) {
                    *acc.entry(p).or_default() += coeff;
                }
            }
            acc
        })
        .collect();
    let mut total: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    for part in partials {
        for (p, coeff) in part {
            *total.entry(p).or_default() += coeff;
        }
    }
    let scale = ham
        .strings()
        .iter()
        .map(|s| s.coeff.abs())
        .fold(0.0, f64::max);
    let sum = PauliSum::from_complex(
        layout.n_qubits,
        total,
        ham.constant(),
        RESIDUE_RELATIVE * scale,
    )?;
    Ok((sum, layout))
}

/// Hermitian Pauli form of `amplitude · i(σ⁺_i σ⁻_j σ⁺_m σ⁻_n − h.c.)`.
///
/// Returns the eight strings with an odd number of `Y` factors on the four
/// qubits, each with coefficient `±amplitude/8`, sorted by rendered string.
pub fn expand_double_excitation(
    qubits: [usize; 4],
    amplitude: f64,
    n_qubits: usize,
) -> Result<Vec<(PauliString, f64)>> {
    for (k, &a) in qubits.iter().enumerate() {
        if a >= n_qubits {
            return Err(invalid(format!(
                "qubit {a} out of range for {n_qubits} qubits"
            )));
        }
        if qubits[..k].contains(&a) {
            return Err(invalid(format!("repeated qubit index {a}")));
        }
    }
    let raise = |q: usize| {
        vec![
            (vec![(q, Pauli::X)], c(0.5, 0.0)),
            (vec![(q, Pauli::Y)], c(0.0, -0.5)),
        ]
    };
    let lower = |q: usize| {
        vec![
            (vec![(q, Pauli::X)], c(0.5, 0.0)),
            (vec![(q, Pauli::Y)], c(0.0, 0.5)),
        ]
    };
    let factors = [
        raise(qubits[0]),
        lower(qubits[1]),
        raise(qubits[2]),
        lower(qubits[3]),
    ];
    let mut out: Vec<(PauliString, f64)> = tensor_expand(n_qubits, &factors, c(1.0, 0.0))
        .into_iter()
        .filter(|(_, a)| a.im != 0.0)
        // i(a − ā) = −2·Im(a)
        .map(|(p, a)| (p, -2.0 * a.im * amplitude))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// CNOT count of the UVCCSD double excitations, `48 · C(M,2) · n²`, for `M`
/// modes with `n` virtual modals each. Zero when `M < 2` or `n = 0`.
pub fn cnot_count_uvccsd(modes: u64, virtuals: u64) -> Result<u64> {
    let pairs = if modes < 2 {
        0
    } else {
        modes
            .checked_mul(modes - 1)
            .ok_or(Error::Overflow("mode pairs"))?
            / 2
    };
    pairs
        .checked_mul(
            virtuals
                .checked_mul(virtuals)
                .ok_or(Error::Overflow("virtuals squared"))?,
        )
        .and_then(|d| d.checked_mul(CNOTS_PER_DOUBLE_EXCITATION))
        .ok_or(Error::Overflow("CNOT count"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{self, embed, max_abs_diff, pauli_matrix, pauli_sum_matrix};
    use crate::sopham::{expand, OneModeFactor, SopHamiltonian, SopTerm};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn one_mode(strings: Vec<((usize, usize), f64)>) -> ExpandedHamiltonian {
        ExpandedHamiltonian::new(
            ModeBasis::new(vec![2]).unwrap(),
            0.0,
            strings
                .into_iter()
                .map(|(pq, coeff)| ExpandedString {
                    modes: vec![0],
                    pq: vec![pq],
                    coeff,
                })
                .collect(),
        )
        .unwrap()
    }

    fn random_expanded(seed: u64, modals: Vec<usize>) -> ExpandedHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = modals.len();
        let mut terms = Vec::new();
        let mut combos = Vec::new();
        for a in 0..m {
            combos.push(vec![a]);
            for b in a + 1..m {
                combos.push(vec![a, b]);
                for cc in b + 1..m {
                    combos.push(vec![a, b, cc]);
                }
            }
        }
        for combo in combos {
            terms.push(SopTerm {
                coeff: rng.random_range(-1.0..1.0),
                factors: combo
                    .iter()
                    .map(|&mode| {
                        let n = modals[mode];
                        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                        OneModeFactor {
                            mode,
                            matrix: (&a + a.transpose()) * 0.5,
                        }
                    })
                    .collect(),
            });
        }
        let sop = SopHamiltonian::new(ModeBasis::new(modals).unwrap(), 0.3, terms).unwrap();
        expand(&sop, 0.0).unwrap()
    }

    fn restricted(sum: &PauliSum, layout: &QubitLayout) -> DMatrix<Complex64> {
        let full = pauli_sum_matrix(sum);
        let idx = layout.one_hot_indices();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| full[(idx[i], idx[j])])
    }

    #[test]
    fn number_operator() {
        let (sum, layout) = encode(&one_mode(vec![((0, 0), 1.0)])).unwrap();
        assert_eq!(layout.n_qubits(), 2);
        assert_eq!(sum.constant(), 0.5);
        assert_eq!(sum.terms(), &[(p("ZI"), -0.5)]);
    }

    #[test]
    fn hopping_pair() {
        let (sum, _) = encode(&one_mode(vec![((0, 1), 1.0), ((1, 0), 1.0)])).unwrap();
        assert_eq!(sum.constant(), 0.0);
        assert_eq!(sum.terms(), &[(p("XX"), 0.5), (p("YY"), 0.5)]);
        // dense check of σ⁺σ⁻ + σ⁻σ⁺
        let sp0 = embed(2, 0, &dense::sigma_plus());
        let sm1 = embed(2, 1, &dense::sigma_minus());
        let op = &sp0 * &sm1 + (&sp0 * &sm1).adjoint();
        assert!(max_abs_diff(&op, &pauli_sum_matrix(&sum)) < 1e-15);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let r = encode(&one_mode(vec![((0, 1), 1.0)]));
        assert!(matches!(r, Err(Error::Hermiticity(_))));
    }

    #[test]
    fn restriction_matches_configuration_matrix() {
        for seed in 0..10 {
            let ham = random_expanded(seed, vec![2, 2]);
            let (sum, layout) = encode(&ham).unwrap();
            let cfg = ham.config_matrix().map(|x| Complex64::new(x, 0.0));
            assert!(max_abs_diff(&restricted(&sum, &layout), &cfg) < 1e-12);
        }
        let ham = random_expanded(99, vec![3, 2, 2]);
        let (sum, layout) = encode(&ham).unwrap();
        let cfg = ham.config_matrix().map(|x| Complex64::new(x, 0.0));
        assert!(max_abs_diff(&restricted(&sum, &layout), &cfg) < 1e-12);
    }

    #[test]
    fn encoded_terms_stay_in_their_blocks() {
        let ham = random_expanded(5, vec![2, 3, 2]);
        let (sum, layout) = encode(&ham).unwrap();
        let mcr = crate::sopham::mode_combinations(&ham);
        for (s, _) in sum.terms() {
            let support = layout.mode_support(s);
            assert!(mcr.iter().any(|mc| support.iter().all(|m| mc.contains(m))));
        }
    }

    #[test]
    fn mode_permutation_preserves_spectrum() {
        let ham = random_expanded(17, vec![2, 3]);
        // swap modes 0 and 1
        let swapped = ExpandedHamiltonian::new(
            ModeBasis::new(vec![3, 2]).unwrap(),
            ham.constant(),
            ham.strings()
                .iter()
                .map(|s| {
                    let mut pairs: Vec<(usize, (usize, usize))> = s
                        .modes
                        .iter()
                        .map(|&m| 1 - m)
                        .zip(s.pq.iter().copied())
                        .collect();
                    pairs.sort();
                    ExpandedString {
                        modes: pairs.iter().map(|x| x.0).collect(),
                        pq: pairs.iter().map(|x| x.1).collect(),
                        coeff: s.coeff,
                    }
                })
                .collect(),
        )
        .unwrap();
        let eig = |h: &ExpandedHamiltonian| {
            let (sum, layout) = encode(h).unwrap();
            let m = restricted(&sum, &layout).map(|z| z.re);
            let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            e.sort_by(f64::total_cmp);
            e
        };
        for (a, b) in eig(&ham).iter().zip(eig(&swapped)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_cap_enforced() {
        let ham =
            ExpandedHamiltonian::new(ModeBasis::new(vec![4, 4]).unwrap(), 0.0, vec![]).unwrap();
        assert!(matches!(
            encode_with_cap(&ham, 7),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn double_excitation_matches_dense_oracle() {
        let terms = expand_double_excitation([0, 1, 2, 3], 1.0, 4).unwrap();
        assert_eq!(terms.len(), 8);
        assert!(terms.iter().all(|(_, c)| (c.abs() - 0.125).abs() < 1e-15));
        let a = embed(4, 0, &dense::sigma_plus())
            * embed(4, 1, &dense::sigma_minus())
            * embed(4, 2, &dense::sigma_plus())
            * embed(4, 3, &dense::sigma_minus());
        let target = (&a - a.adjoint()) * Complex64::new(0.0, 1.0);
        let got = dense::pauli_combination_matrix(4, &terms);
        assert!(max_abs_diff(&got, &target) < 1e-12);
        for (s, _) in &terms {
            assert_eq!(s.weight(), 4);
            assert!(s.to_string().chars().all(|ch| ch == 'X' || ch == 'Y'));
            assert_eq!(s.y_count() % 2, 1);
        }
        let zero = expand_double_excitation([5, 1, 3, 0], 0.0, 6).unwrap();
        assert_eq!(zero.len(), 8);
        assert!(zero.iter().all(|(_, c)| *c == 0.0));
        assert!(expand_double_excitation([0, 1, 1, 2], 1.0, 4).is_err());
        let _ = pauli_matrix(&terms[0].0);
    }

    #[test]
    fn cnot_counts() {
        assert_eq!(cnot_count_uvccsd(3, 3).unwrap(), 1296);
        assert_eq!(cnot_count_uvccsd(2, 1).unwrap(), 48);
        assert_eq!(cnot_count_uvccsd(6, 1).unwrap(), 720);
        assert_eq!(cnot_count_uvccsd(1, 5).unwrap(), 0);
        assert!(cnot_count_uvccsd(u64::MAX, 2).is_err());
    }

    #[test]
    fn layout_json_round_trip() {
        let layout = QubitLayout::new(&ModeBasis::new(vec![2, 3, 1]).unwrap());
        assert_eq!(layout.offsets(), &[0, 2, 5]);
        assert_eq!(layout.mode_of_qubit(4), 1);
        assert_eq!(
            QubitLayout::from_json(&layout.to_json().unwrap()).unwrap(),
            layout
        );
        assert!(QubitLayout::from_json(r#"{"modals":[2,2],"offsets":[0,1]}"#).is_err());
    }
}
