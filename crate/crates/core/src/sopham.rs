//! Sum-of-products vibrational Hamiltonians and their expansion into flat
//! second-quantized strings.
//!
//! A SOP Hamiltonian is `constant + Σ_t c_t Π_{m ∈ modes(t)} h^{m,t}` where each
//! one-mode operator is a real symmetric `N_m × N_m` matrix in the modal basis,
//! `h = Σ_pq h_pq a†_p a_q`. Expansion multiplies the products out and
//! aggregates every `(mode combination, index tuple)` key over all SOP terms,
//! so its size depends only on the mode combinations present.
//!
//! Configuration-space index convention: configuration `(i_0, …, i_{M-1})`
//! maps to `Σ_m i_m · stride_m` with `stride_0 = 1` (mode 0 varies fastest).

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::format::to_json_string;

/// Hard cap on the configuration-space dimension `Π N_m`.
pub const MAX_CONFIG_DIM: usize = 1 << 20;

/// Tolerance on `|h_pq − h_qp|` (relative to the largest entry) when
/// validating one-mode matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Cap on the number of second-quantized strings `expand` may enumerate.
pub const MAX_EXPANDED_STRINGS: u128 = 1 << 26;

/// Number of modes and modals per mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeBasis {
    modals: Vec<usize>,
}

impl ModeBasis {
    pub fn new(modals: Vec<usize>) -> Result<Self> {
        if modals.is_empty() {
            return Err(invalid("mode count must be at least 1"));
        }
        if let Some(m) = modals.iter().position(|&n| n == 0) {
            return Err(invalid(format!("mode {m} has zero modals")));
        }
        let mut dim: u128 = 1;
        for &n in &modals {
            dim *= n as u128;
            if dim > MAX_CONFIG_DIM as u128 {
                return Err(Error::ResourceCap {
                    what: "configuration-space dimension",
                    value: dim,
                    limit: MAX_CONFIG_DIM as u128,
                });
            }
        }
        Ok(ModeBasis { modals })
    }

    pub fn uniform(modes: usize, modals: usize) -> Result<Self> {
        Self::new(vec![modals; modes])
    }

    pub fn mode_count(&self) -> usize {
        self.modals.len()
    }

    pub fn modals(&self) -> &[usize] {
        &self.modals
    }

    /// Configuration-space dimension `D = Π N_m`.
    pub fn dimension(&self) -> usize {
        self.modals.iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.modals.len());
        let mut acc = 1;
        for &n in &self.modals {
            s.push(acc);
            acc *= n;
        }
        s
    }

    /// Modal occupied by `mode` in configuration `config`.
    pub fn modal_of(&self, config: usize, mode: usize) -> usize {
        (config / self.strides()[mode]) % self.modals[mode]
    }
}

/// One-mode operator factor `h^{m,t}` of a SOP term.
#[derive(Clone, Debug, PartialEq)]
pub struct OneModeFactor {
    pub mode: usize,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SopTerm {
    pub coeff: f64,
    pub factors: Vec<OneModeFactor>,
}

impl SopTerm {
    pub fn modes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.mode).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SopHamiltonian {
    basis: ModeBasis,
    constant: f64,
    terms: Vec<SopTerm>,
}

fn validate_term(basis: &ModeBasis, t: usize, term: &SopTerm) -> Result<()> {
    if !term.coeff.is_finite() {
        return Err(invalid(format!("term {t}: non-finite coefficient")));
    }
    let mut prev: Option<usize> = None;
    for f in &term.factors {
        if f.mode >= basis.mode_count() {
            return Err(invalid(format!(
                "term {t}: mode {} out of range for {} modes",
                f.mode,
                basis.mode_count()
            )));
        }
        if prev.is_some_and(|p| f.mode <= p) {
            return Err(invalid(format!(
                "term {t}: factor modes must be strictly increasing"
            )));
        }
        prev = Some(f.mode);
        let n = basis.modals()[f.mode];
        if f.matrix.nrows() != n || f.matrix.ncols() != n {
            return Err(invalid(format!(
                "term {t}: matrix for mode {} is {}x{}, expected {n}x{n}",
                f.mode,
                f.matrix.nrows(),
                f.matrix.ncols()
            )));
        }
        if f.matrix.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("term {t}: non-finite matrix entry")));
        }
        let scale = f.matrix.amax().max(1.0);
        for p in 0..n {
            for q in p + 1..n {
                if (f.matrix[(p, q)] - f.matrix[(q, p)]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(invalid(format!(
                        "term {t}: matrix for mode {} is not symmetric at ({p},{q})",
                        f.mode
                    )));
                }
            }
        }
        if f.matrix == DMatrix::identity(n, n) {
            return Err(invalid(format!(
                "term {t}: explicit identity factor on mode {}; absorb it into the term",
                f.mode
            )));
        }
    }
    Ok(())
}

impl SopHamiltonian {
    pub fn new(basis: ModeBasis, constant: f64, terms: Vec<SopTerm>) -> Result<Self> {
        if !constant.is_finite() {
            return Err(invalid("non-finite constant"));
        }
        for (t, term) in terms.iter().enumerate() {
            validate_term(&basis, t, term)?;
        }
        Ok(SopHamiltonian {
            basis,
            constant,
            terms,
        })
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[SopTerm] {
        &self.terms
    }

    /// Dense configuration-space matrix assembled from Kronecker products of
    /// the one-mode factors (identity on spectator modes).
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let dim = self.basis.dimension();
        let mut out = DMatrix::identity(dim, dim) * self.constant;
        for term in &self.terms {
            let mut m = DMatrix::from_element(1, 1, term.coeff);
            for mode in 0..self.basis.mode_count() {
                let n = self.basis.modals()[mode];
                let factor = term
                    .factors
                    .iter()
                    .find(|f| f.mode == mode)
                    .map(|f| f.matrix.clone())
                    .unwrap_or_else(|| DMatrix::identity(n, n));
                m = factor.kronecker(&m);
            }
            out += m;
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SopFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(&SopFile::from(self))
    }
}

/// One aggregated second-quantized string `H^𝔪_{(p q)…} Π_m a†_{p^m} a_{q^m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedString {
    pub modes: Vec<usize>,
    pub pq: Vec<(usize, usize)>,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedHamiltonian {
    basis: ModeBasis,
    constant: f64,
    strings: Vec<ExpandedString>,
}

impl ExpandedHamiltonian {
    /// Validates and sorts strings into `(modes, pq)` lexicographic order.
    /// A repeated key is an error: aggregation must already be complete.
    pub fn new(basis: ModeBasis, constant: f64, mut strings: Vec<ExpandedString>) -> Result<Self> {
        if !constant.is_finite() {
            return Err(invalid("non-finite constant"));
        }
        for (k, s) in strings.iter().enumerate() {
            if s.modes.is_empty() {
                return Err(invalid(format!("string {k}: empty mode combination")));
            }
            if s.modes.len() != s.pq.len() {
                return Err(invalid(format!(
                    "string {k}: {} modes but {} index pairs",
                    s.modes.len(),
                    s.pq.len()
                )));
            }
            if s.modes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!(
                    "string {k}: modes must be strictly increasing"
                )));
            }
            for (&m, &(p, q)) in s.modes.iter().zip(&s.pq) {
                let n = *basis
                    .modals()
                    .get(m)
                    .ok_or_else(|| invalid(format!("string {k}: mode {m} out of range")))?;
                if p >= n || q >= n {
                    return Err(invalid(format!(
                        "string {k}: index pair ({p},{q}) out of range for mode {m} with {n} modals"
                    )));
                }
            }
            if !s.coeff.is_finite() {
                return Err(invalid(format!("string {k}: non-finite coefficient")));
            }
        }
        strings.sort_by(|a, b| (&a.modes, &a.pq).cmp(&(&b.modes, &b.pq)));
        if let Some(w) = strings
            .windows(2)
            .find(|w| w[0].modes == w[1].modes && w[0].pq == w[1].pq)
        {
            return Err(invalid(format!(
                "duplicate string for modes {:?} indices {:?}",
                w[0].modes, w[0].pq
            )));
        }
        Ok(ExpandedHamiltonian {
            basis,
            constant,
            strings,
        })
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn strings(&self) -> &[ExpandedString] {
        &self.strings
    }

    /// Checks that every string has its transposed partner with an equal
    /// coefficient (within `tol`).
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let index: BTreeMap<_, f64> = self
            .strings
            .iter()
            .map(|s| ((s.modes.as_slice(), s.pq.clone()), s.coeff))
            .collect();
        for s in &self.strings {
            let t: Vec<_> = s.pq.iter().map(|&(p, q)| (q, p)).collect();
            let partner = index.get(&(s.modes.as_slice(), t)).copied().unwrap_or(0.0);
            if (partner - s.coeff).abs() > tol {
                return Err(Error::Hermiticity(format!(
                    "string {:?}{:?} = {} has transposed partner {}",
                    s.modes, s.pq, s.coeff, partner
                )));
            }
        }
        Ok(())
    }

    /// Dense configuration-space matrix assembled string by string.
    pub fn config_matrix(&self) -> DMatrix<f64> {
        let dim = self.basis.dimension();
        let strides = self.basis.strides();
        let mut out = DMatrix::identity(dim, dim) * self.constant;
        // Configurations with every active mode in modal 0, per mode combination.
        let mut spectators: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
        for s in &self.strings {
            let base = spectators.entry(s.modes.as_slice()).or_insert_with(|| {
                (0..dim)
                    .filter(|&c| {
                        s.modes
                            .iter()
                            .all(|&m| (c / strides[m]).is_multiple_of(self.basis.modals[m]))
                    })
                    .collect()
            });
            let (mut bra_off, mut ket_off) = (0usize, 0usize);
            for (&m, &(p, q)) in s.modes.iter().zip(&s.pq) {
                bra_off += p * strides[m];
                ket_off += q * strides[m];
            }
            for &config in base.iter() {
                out[(config + bra_off, config + ket_off)] += s.coeff;
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ExpandedFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(&ExpandedFile::from(self))
    }
}

/// Expands a SOP Hamiltonian into aggregated second-quantized strings,
/// dropping any whose `|coeff| ≤ drop_threshold`.
///
/// Terms are grouped by mode combination and each group is summed in input
/// order, so the result is bit-identical for any worker count.
pub fn expand(sop: &SopHamiltonian, drop_threshold: f64) -> Result<ExpandedHamiltonian> {
    if drop_threshold.is_nan() || drop_threshold < 0.0 {
        return Err(invalid("drop threshold must be non-negative"));
    }
    for (t, term) in sop.terms.iter().enumerate() {
        validate_term(&sop.basis, t, term)?;
    }
    let mut constant = sop.constant;
    let mut by_mc: BTreeMap<Vec<usize>, Vec<&SopTerm>> = BTreeMap::new();
    for term in &sop.terms {
        if term.factors.is_empty() {
            constant += term.coeff;
        } else {
            by_mc.entry(term.modes()).or_default().push(term);
        }
    }
    let basis = &sop.basis;
    let enumerated: u128 = by_mc
        .keys()
        .map(|modes| {
            modes
                .iter()
                .map(|&m| (basis.modals()[m] as u128).pow(2))
                .product::<u128>()
        })
        .sum();
    if enumerated > MAX_EXPANDED_STRINGS {
        return Err(Error::ResourceCap {
            what: "expanded strings",
            value: enumerated,
            limit: MAX_EXPANDED_STRINGS,
        });
    }
    let groups: Vec<(Vec<usize>, Vec<&SopTerm>)> = by_mc.into_iter().collect();
    let per_mc: Vec<Vec<ExpandedString>> = groups
        .par_iter()
        .map(|(modes, terms)| aggregate_combination(basis, modes, terms, drop_threshold))
        .collect();
    let strings = per_mc.into_iter().flatten().collect();
    Ok(ExpandedHamiltonian {
        basis: sop.basis.clone(),
        constant,
        strings,
    })
}

fn aggregate_combination(
    basis: &ModeBasis,
    modes: &[usize],
    terms: &[&SopTerm],
    drop_threshold: f64,
) -> Vec<ExpandedString> {
    let dims: Vec<usize> = modes.iter().map(|&m| basis.modals()[m]).collect();
    // Mixed radix over (p_0, q_0, p_1, q_1, …) with the first pair most significant.
    let radices: Vec<usize> = dims.iter().flat_map(|&n| [n, n]).collect();
    let size: usize = radices.iter().product();
    let mut acc = vec![0.0f64; size];
    let mut digits = vec![0usize; radices.len()];
    for term in terms {
        digits.iter_mut().for_each(|d| *d = 0);
        for slot in acc.iter_mut() {
            let mut v = term.coeff;
            for (k, f) in term.factors.iter().enumerate() {
                v *= f.matrix[(digits[2 * k], digits[2 * k + 1])];
            }
            *slot += v;
            increment(&mut digits, &radices);
        }
    }
    let mut out = Vec::new();
    digits.iter_mut().for_each(|d| *d = 0);
    for &coeff in &acc {
        if coeff.abs() > drop_threshold {
            out.push(ExpandedString {
                modes: modes.to_vec(),
                pq: digits.chunks(2).map(|c| (c[0], c[1])).collect(),
                coeff,
            });
        }
        increment(&mut digits, &radices);
    }
    out
}

fn increment(digits: &mut [usize], radices: &[usize]) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radices[k] {
            return;
        }
        digits[k] = 0;
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// `Σ_{k=1}^{max_coupling} C(M,k) · N^{2k}`: number of second-quantized
/// strings of a Hamiltonian with all couplings up to `max_coupling` modes.
pub fn count_terms(modes: u64, modals: u64, max_coupling: u32) -> Result<u64> {
    if modes == 0 || modals == 0 {
        return Err(invalid("mode and modal counts must be at least 1"));
    }
    if !(1..=3).contains(&max_coupling) {
        return Err(invalid("max coupling must be between 1 and 3"));
    }
    let mut total: u64 = 0;
    for k in 1..=max_coupling {
        let c = binomial(modes, k as u64).ok_or(Error::Overflow("binomial coefficient"))?;
        let pow = modals
            .checked_pow(2 * k)
            .ok_or(Error::Overflow("modal power"))?;
        total = c
            .checked_mul(pow)
            .and_then(|x| total.checked_add(x))
            .ok_or(Error::Overflow("term count"))?;
    }
    Ok(total)
}

/// The mode-combination register: every mode tuple with at least one string.
pub fn mode_combinations(ham: &ExpandedHamiltonian) -> BTreeSet<Vec<usize>> {
    ham.strings.iter().map(|s| s.modes.clone()).collect()
}

// ---- file formats ----

#[derive(Serialize, Deserialize)]
struct FactorFile {
    mode: usize,
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    coeff: f64,
    factors: Vec<FactorFile>,
}

#[derive(Serialize, Deserialize)]
struct SopFile {
    modes: usize,
    modals: Vec<usize>,
    constant: f64,
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct StringFile {
    modes: Vec<usize>,
    pq: Vec<[usize; 2]>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpandedFile {
    modes: usize,
    modals: Vec<usize>,
    constant: f64,
    strings: Vec<StringFile>,
}

fn checked_basis(modes: usize, modals: Vec<usize>) -> Result<ModeBasis> {
    if modes != modals.len() {
        return Err(invalid(format!(
            "\"modes\" is {modes} but \"modals\" lists {} entries",
            modals.len()
        )));
    }
    ModeBasis::new(modals)
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(invalid("one-mode matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl TryFrom<SopFile> for SopHamiltonian {
    type Error = Error;
    fn try_from(f: SopFile) -> Result<Self> {
        let basis = checked_basis(f.modes, f.modals)?;
        let terms = f
            .terms
            .into_iter()
            .map(|t| {
                let factors = t
                    .factors
                    .into_iter()
                    .map(|fa| {
                        Ok(OneModeFactor {
                            mode: fa.mode,
                            matrix: matrix_from_rows(&fa.matrix)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SopTerm {
                    coeff: t.coeff,
                    factors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SopHamiltonian::new(basis, f.constant, terms)
    }
}

impl From<&SopHamiltonian> for SopFile {
    fn from(h: &SopHamiltonian) -> Self {
        SopFile {
            modes: h.basis.mode_count(),
            modals: h.basis.modals.clone(),
            constant: h.constant,
            terms: h
                .terms
                .iter()
                .map(|t| TermFile {
                    coeff: t.coeff,
                    factors: t
                        .factors
                        .iter()
                        .map(|f| FactorFile {
                            mode: f.mode,
                            matrix: f
                                .matrix
                                .row_iter()
                                .map(|r| r.iter().copied().collect())
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ExpandedFile> for ExpandedHamiltonian {
    type Error = Error;
    fn try_from(f: ExpandedFile) -> Result<Self> {
        let basis = checked_basis(f.modes, f.modals)?;
        let strings = f
            .strings
            .into_iter()
            .map(|s| ExpandedString {
                modes: s.modes,
                pq: s.pq.into_iter().map(|[p, q]| (p, q)).collect(),
                coeff: s.coeff,
            })
            .collect();
        ExpandedHamiltonian::new(basis, f.constant, strings)
    }
}

impl From<&ExpandedHamiltonian> for ExpandedFile {
    fn from(h: &ExpandedHamiltonian) -> Self {
        ExpandedFile {
            modes: h.basis.mode_count(),
            modals: h.basis.modals.clone(),
            constant: h.constant,
            strings: h
                .strings
                .iter()
                .map(|s| StringFile {
                    modes: s.modes.clone(),
                    pq: s.pq.iter().map(|&(p, q)| [p, q]).collect(),
                    coeff: s.coeff,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    /// Random SOP with every coupling up to three modes present.
    fn random_sop(seed: u64, modals: Vec<usize>, terms_per_mc: usize) -> SopHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = ModeBasis::new(modals.clone()).unwrap();
        let m = modals.len();
        let mut combos: Vec<Vec<usize>> = Vec::new();
        for a in 0..m {
            combos.push(vec![a]);
            for b in a + 1..m {
                combos.push(vec![a, b]);
                for c in b + 1..m {
                    combos.push(vec![a, b, c]);
                }
            }
        }
        let mut terms = Vec::new();
        for combo in &combos {
            for _ in 0..terms_per_mc {
                terms.push(SopTerm {
                    coeff: rng.random_range(-1.0..1.0),
                    factors: combo
                        .iter()
                        .map(|&mode| OneModeFactor {
                            mode,
                            matrix: sym(&mut rng, modals[mode]),
                        })
                        .collect(),
                });
            }
        }
        SopHamiltonian::new(basis, rng.random_range(-1.0..1.0), terms).unwrap()
    }

    #[test]
    fn expansion_size_is_capped() {
        let basis = ModeBasis::new(vec![100, 100, 100]).unwrap();
        let factor = |mode| OneModeFactor {
            mode,
            matrix: DMatrix::from_diagonal_element(100, 100, 2.0),
        };
        let sop = SopHamiltonian::new(
            basis,
            0.0,
            vec![SopTerm {
                coeff: 1.0,
                factors: vec![factor(0), factor(1), factor(2)],
            }],
        )
        .unwrap();
        assert!(matches!(expand(&sop, 0.0), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn single_term_read_off() {
        let basis = ModeBasis::new(vec![2]).unwrap();
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let sop = SopHamiltonian::new(
            basis,
            0.0,
            vec![SopTerm {
                coeff: 2.0,
                factors: vec![OneModeFactor { mode: 0, matrix: h }],
            }],
        )
        .unwrap();
        let ex = expand(&sop, 0.0).unwrap();
        let got: Vec<_> = ex
            .strings()
            .iter()
            .map(|s| (s.modes.clone(), s.pq.clone(), s.coeff))
            .collect();
        assert_eq!(
            got,
            vec![(vec![0], vec![(0, 1)], 2.0), (vec![0], vec![(1, 0)], 2.0)]
        );
    }

    #[test]
    fn exact_cancellation_gives_no_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = (sym(&mut rng, 3), sym(&mut rng, 2));
        let factors = vec![
            OneModeFactor { mode: 0, matrix: a },
            OneModeFactor { mode: 1, matrix: b },
        ];
        let sop = SopHamiltonian::new(
            ModeBasis::new(vec![3, 2]).unwrap(),
            0.0,
            vec![
                SopTerm {
                    coeff: 0.75,
                    factors: factors.clone(),
                },
                SopTerm {
                    coeff: -0.75,
                    factors,
                },
            ],
        )
        .unwrap();
        assert!(expand(&sop, 0.0).unwrap().strings().is_empty());
    }

    #[test]
    fn expanded_matrix_matches_kronecker_oracle() {
        for seed in 0..20 {
            let sop = random_sop(seed, vec![2, 2], 3);
            let ex = expand(&sop, 0.0).unwrap();
            let diff = (ex.config_matrix() - sop.dense_matrix()).amax();
            assert!(diff < 1e-12, "seed {seed}: {diff}");
        }
        for seed in 0..5 {
            let sop = random_sop(100 + seed, vec![3, 2, 4], 2);
            let ex = expand(&sop, 0.0).unwrap();
            assert!((ex.config_matrix() - sop.dense_matrix()).amax() < 1e-12);
            ex.check_hermitian(1e-12).unwrap();
        }
    }

    #[test]
    fn expansion_is_linear() {
        let a = random_sop(7, vec![2, 3, 2], 2);
        let b = random_sop(8, vec![2, 3, 2], 1);
        let mut terms = a.terms().to_vec();
        terms.extend(b.terms().iter().cloned());
        let ab =
            SopHamiltonian::new(a.basis().clone(), a.constant() + b.constant(), terms).unwrap();
        let (ea, eb, eab) = (
            expand(&a, 0.0).unwrap(),
            expand(&b, 0.0).unwrap(),
            expand(&ab, 0.0).unwrap(),
        );
        let mut sum = BTreeMap::<_, f64>::new();
        for s in ea.strings().iter().chain(eb.strings()) {
            *sum.entry((s.modes.clone(), s.pq.clone())).or_default() += s.coeff;
        }
        assert_eq!(sum.len(), eab.strings().len());
        for s in eab.strings() {
            let v = sum[&(s.modes.clone(), s.pq.clone())];
            assert!((v - s.coeff).abs() < 1e-12);
        }
    }

    #[test]
    fn count_terms_matches_full_expansion() {
        for (m, n) in [(3usize, 2usize), (3, 3), (4, 2), (2, 3), (1, 4)] {
            let sop = random_sop(m as u64 * 10 + n as u64, vec![n; m], 1);
            let ex = expand(&sop, 0.0).unwrap();
            assert_eq!(
                ex.strings().len() as u64,
                count_terms(m as u64, n as u64, 3).unwrap()
            );
        }
    }

    #[test]
    fn count_terms_values() {
        assert_eq!(count_terms(3, 4, 3).unwrap(), 4912);
        assert_eq!(count_terms(6, 2, 3).unwrap(), 1544);
        assert_eq!(count_terms(1, 1, 3).unwrap(), 1);
        assert_eq!(count_terms(5, 3, 1).unwrap(), 45);
        assert!(matches!(
            count_terms(u64::MAX, 1 << 20, 3),
            Err(Error::Overflow(_))
        ));
        assert!(count_terms(3, 4, 4).is_err());
    }

    #[test]
    fn mode_combination_register() {
        let full = expand(&random_sop(1, vec![2, 2, 2], 1), 0.0).unwrap();
        let mcr: Vec<Vec<usize>> = mode_combinations(&full).into_iter().collect();
        assert_eq!(
            mcr,
            vec![
                vec![0],
                vec![0, 1],
                vec![0, 1, 2],
                vec![0, 2],
                vec![1],
                vec![1, 2],
                vec![2]
            ]
        );
        let empty =
            ExpandedHamiltonian::new(ModeBasis::new(vec![2]).unwrap(), 0.0, vec![]).unwrap();
        assert!(mode_combinations(&empty).is_empty());
    }

    #[test]
    fn drop_threshold_removes_small_strings() {
        let sop = random_sop(11, vec![3, 3], 1);
        let full = expand(&sop, 0.0).unwrap();
        let cut = expand(&sop, 0.3).unwrap();
        assert!(cut.strings().len() < full.strings().len());
        assert!(cut.strings().iter().all(|s| s.coeff.abs() > 0.3));
        assert!(expand(&sop, -1.0).is_err());
    }

    #[test]
    fn validation_errors() {
        let basis = ModeBasis::new(vec![2, 2]).unwrap();
        let f = |mode, m: DMatrix<f64>| OneModeFactor { mode, matrix: m };
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let bad_dim = SopTerm {
            coeff: 1.0,
            factors: vec![f(0, DMatrix::zeros(3, 3))],
        };
        assert!(SopHamiltonian::new(basis.clone(), 0.0, vec![bad_dim]).is_err());
        let unsorted = SopTerm {
            coeff: 1.0,
            factors: vec![f(1, z.clone()), f(0, z.clone())],
        };
        assert!(SopHamiltonian::new(basis.clone(), 0.0, vec![unsorted]).is_err());
        let ident = SopTerm {
            coeff: 1.0,
            factors: vec![f(0, DMatrix::identity(2, 2))],
        };
        assert!(SopHamiltonian::new(basis.clone(), 0.0, vec![ident]).is_err());
        let asym = SopTerm {
            coeff: 1.0,
            factors: vec![f(0, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]))],
        };
        assert!(SopHamiltonian::new(basis.clone(), 0.0, vec![asym]).is_err());
        let out_of_range = SopTerm {
            coeff: 1.0,
            factors: vec![f(2, z)],
        };
        assert!(SopHamiltonian::new(basis, 0.0, vec![out_of_range]).is_err());
        assert!(ModeBasis::new(vec![]).is_err());
        assert!(ModeBasis::new(vec![2, 0]).is_err());
        assert!(matches!(
            ModeBasis::new(vec![1 << 11, 1 << 10]),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn json_round_trips() {
        let sop = random_sop(5, vec![2, 3], 1);
        let back = SopHamiltonian::from_json(&sop.to_json().unwrap()).unwrap();
        assert_eq!(back, sop);
        let ex = expand(&sop, 0.0).unwrap();
        let back = ExpandedHamiltonian::from_json(&ex.to_json().unwrap()).unwrap();
        assert_eq!(back, ex);
        assert!(
            SopHamiltonian::from_json(r#"{"modes":2,"modals":[2],"constant":0,"terms":[]}"#)
                .is_err()
        );
    }

    #[test]
    fn duplicate_expanded_strings_rejected() {
        let s = ExpandedString {
            modes: vec![0],
            pq: vec![(0, 1)],
            coeff: 1.0,
        };
        let r = ExpandedHamiltonian::new(ModeBasis::new(vec![2]).unwrap(), 0.0, vec![s.clone(), s]);
        assert!(r.is_err());
    }
}
