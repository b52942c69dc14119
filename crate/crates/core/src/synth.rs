//! Synthetic vibrational Hamiltonians.
//!
//! Coordinates are dimensionless and mass-weighted with ħ = 1. The potential is
//! `V(q) = Σ_m ½ ω_m² q_m² + Σ c · Π_m q_m^{e_m}` with couplings over at most
//! three modes, and each mode is represented in the harmonic-oscillator
//! eigenbasis of its own frequency.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sopham::{ModeBasis, OneModeFactor, SopHamiltonian, SopTerm};

pub const MAX_POWER: u32 = 8;
pub const MAX_COUPLED_MODES: usize = 3;
pub const DEFAULT_MAX_DEGREE: u32 = 4;
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Coefficients below this fraction of the largest one are dropped after a
/// rotation.
pub const ROTATION_DROP_RELATIVE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// `q^k`
    PositionPower(u32),
    /// `−½ d²/dq²`
    Kinetic,
}

/// Matrix elements in the first `n` eigenstates of the oscillator with
/// frequency `omega`, where `q = (a + a†)/√(2ω)`.
///
/// `q^k` is formed in an `(n + k)`-state basis and projected, so every
/// returned element is exact.
pub fn ho_matrix_elements(kind: MatrixKind, n: usize, omega: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(invalid("basis size must be at least 1"));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid(format!("frequency must be positive, got {omega}")));
    }
    match kind {
        MatrixKind::PositionPower(k) if k > MAX_POWER => Err(invalid(format!(
            "position power {k} exceeds the maximum of {MAX_POWER}"
        ))),
        MatrixKind::PositionPower(k) => {
            let big = n + k as usize;
            let q = position_matrix(big, omega);
            let mut acc = DMatrix::<f64>::identity(big, big);
            for _ in 0..k {
                acc = &acc * &q;
            }
            Ok(acc.view((0, 0), (n, n)).into_owned())
        }
        MatrixKind::Kinetic => {
            let mut t = DMatrix::zeros(n, n);
            for i in 0..n {
                t[(i, i)] = 0.5 * omega * (i as f64 + 0.5);
                if i + 2 < n {
                    let v = -0.25 * omega * (((i + 1) * (i + 2)) as f64).sqrt();
                    t[(i + 2, i)] = v;
                    t[(i, i + 2)] = v;
                }
            }
            Ok(t)
        }
    }
}

fn position_matrix(n: usize, omega: f64) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        let v = ((i + 1) as f64 / (2.0 * omega)).sqrt();
        q[(i, i + 1)] = v;
        q[(i + 1, i)] = v;
    }
    q
}

/// A monomial `Π q_m^{e_m}` as `(mode, exponent)` pairs with increasing modes.
pub type Monomial = Vec<(usize, u32)>;

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorPes {
    pub frequencies: Vec<f64>,
    pub couplings: BTreeMap<Monomial, f64>,
    pub max_degree: u32,
}

impl TaylorPes {
    pub fn harmonic(frequencies: Vec<f64>) -> Result<Self> {
        Self::new(frequencies, BTreeMap::new(), DEFAULT_MAX_DEGREE)
    }

    pub fn new(
        frequencies: Vec<f64>,
        couplings: BTreeMap<Monomial, f64>,
        max_degree: u32,
    ) -> Result<Self> {
        let pes = TaylorPes {
            frequencies,
            couplings,
            max_degree,
        };
        pes.validate()?;
        Ok(pes)
    }

    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(invalid("frequencies: at least one mode is required"));
        }
        if let Some((m, w)) = self
            .frequencies
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(invalid(format!(
                "frequencies[{m}] must be positive, got {w}"
            )));
        }
        if self.max_degree > MAX_POWER {
            return Err(invalid(format!("max_degree exceeds {MAX_POWER}")));
        }
        for (mono, c) in &self.couplings {
            if mono.is_empty() || mono.len() > MAX_COUPLED_MODES {
                return Err(invalid(format!(
                    "couplings: {mono:?} must involve 1 to 3 modes"
                )));
            }
            if mono.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(invalid(format!(
                    "couplings: modes of {mono:?} must be strictly increasing"
                )));
            }
            if mono.iter().any(|&(m, e)| m >= self.mode_count() || e == 0) {
                return Err(invalid(format!(
                    "couplings: {mono:?} has an invalid mode or zero exponent"
                )));
            }
            let degree: u32 = mono.iter().map(|&(_, e)| e).sum();
            if degree > self.max_degree {
                return Err(invalid(format!(
                    "couplings: degree {degree} of {mono:?} exceeds max_degree {}",
                    self.max_degree
                )));
            }
            if !c.is_finite() {
                return Err(invalid(format!(
                    "couplings: non-finite force constant for {mono:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        crate::format::to_json_string(&PesFile::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PesFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// Generator configuration as stored on disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PesFile {
    pub frequencies: Vec<f64>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
    #[serde(default = "default_max_degree")]
    pub max_degree: u32,
}

fn default_max_degree() -> u32 {
    DEFAULT_MAX_DEGREE
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub modes: Vec<usize>,
    pub exponents: Vec<u32>,
    pub value: f64,
}

impl From<&TaylorPes> for PesFile {
    fn from(p: &TaylorPes) -> Self {
        PesFile {
            frequencies: p.frequencies.clone(),
            couplings: p
                .couplings
                .iter()
                .map(|(mono, &value)| CouplingEntry {
                    modes: mono.iter().map(|&(m, _)| m).collect(),
                    exponents: mono.iter().map(|&(_, e)| e).collect(),
                    value,
                })
                .collect(),
            max_degree: p.max_degree,
        }
    }
}

impl TryFrom<PesFile> for TaylorPes {
    type Error = crate::error::Error;

    fn try_from(f: PesFile) -> Result<Self> {
        let mut couplings = BTreeMap::new();
        for c in f.couplings {
            if c.modes.len() != c.exponents.len() {
                return Err(invalid("couplings: modes and exponents differ in length"));
            }
            let mono: Monomial = c.modes.into_iter().zip(c.exponents).collect();
            if couplings.insert(mono.clone(), c.value).is_some() {
                return Err(invalid(format!("couplings: duplicate entry {mono:?}")));
            }
        }
        TaylorPes::new(f.frequencies, couplings, f.max_degree)
    }
}

/// Assembles the SOP Hamiltonian with `modals[m]` oscillator states per mode.
pub fn build_sop(pes: &TaylorPes, modals: &[usize]) -> Result<SopHamiltonian> {
    pes.validate()?;
    if modals.len() != pes.mode_count() {
        return Err(invalid(format!(
            "modals: {} entries given for {} modes",
            modals.len(),
            pes.mode_count()
        )));
    }
    let basis = ModeBasis::new(modals.to_vec())?;
    let mut terms = Vec::new();
    for (m, (&w, &n)) in pes.frequencies.iter().zip(modals).enumerate() {
        let kinetic = ho_matrix_elements(MatrixKind::Kinetic, n, w)?;
        let q2 = ho_matrix_elements(MatrixKind::PositionPower(2), n, w)?;
        terms.push(SopTerm {
            coeff: 1.0,
            factors: vec![OneModeFactor {
                mode: m,
                matrix: kinetic + q2 * (0.5 * w * w),
            }],
        });
    }
    for (mono, &c) in &pes.couplings {
        let factors = mono
            .iter()
            .map(|&(m, e)| {
                Ok(OneModeFactor {
                    mode: m,
                    matrix: ho_matrix_elements(
                        MatrixKind::PositionPower(e),
                        modals[m],
                        pes.frequencies[m],
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        terms.push(SopTerm { coeff: c, factors });
    }
    SopHamiltonian::new(basis, 0.0, terms)
}

/// Givens rotation by `theta` radians in the `(i, j)` plane of `m` modes.
pub fn givens(m: usize, i: usize, j: usize, theta: f64) -> Result<DMatrix<f64>> {
    if i >= m || j >= m || i == j {
        return Err(invalid(format!(
            "rotation plane ({i}, {j}) is invalid for {m} modes"
        )));
    }
    let (s, c) = theta.sin_cos();
    let mut r = DMatrix::identity(m, m);
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = -s;
    r[(j, i)] = s;
    Ok(r)
}

// Dense exponent vector -> coefficient.
type Poly = BTreeMap<Vec<u32>, f64>;

fn poly_mul_linear(p: &Poly, row: &[f64]) -> Poly {
    let mut out = Poly::new();
    for (exps, c) in p {
        for (j, &r) in row.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            let mut e = exps.clone();
            e[j] += 1;
            *out.entry(e).or_insert(0.0) += c * r;
        }
    }
    out
}

/// Re-expresses the PES in rotated coordinates `q = R q'`.
///
/// The kinetic operator is invariant. The transformed Hessian supplies the new
/// frequencies and quadratic cross couplings; monomials coupling more than
/// three modes are discarded with a warning.
pub fn rotate_coordinates(pes: &TaylorPes, rotation: &DMatrix<f64>) -> Result<TaylorPes> {
    pes.validate()?;
    let m = pes.mode_count();
    if rotation.nrows() != m || rotation.ncols() != m {
        return Err(invalid(format!("rotation must be {m}×{m}")));
    }
    let defect = (rotation.transpose() * rotation - DMatrix::<f64>::identity(m, m)).amax();
    if defect > ORTHOGONALITY_TOLERANCE || !defect.is_finite() {
        return Err(invalid(format!(
            "rotation is not orthogonal (‖RᵀR − I‖ = {defect:e})"
        )));
    }

    let hessian = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        pes.frequencies.iter().map(|w| w * w),
    ));
    let rotated = rotation.transpose() * hessian * rotation;
    let mut frequencies = Vec::with_capacity(m);
    for k in 0..m {
        let h = rotated[(k, k)];
        if h <= 0.0 {
            return Err(invalid(format!(
                "rotated Hessian has a non-positive diagonal at mode {k}"
            )));
        }
        frequencies.push(h.sqrt());
    }

    let mut poly = Poly::new();
    for a in 0..m {
        for b in a + 1..m {
            let mut e = vec![0u32; m];
            e[a] = 1;
            e[b] = 1;
            poly.insert(e, rotated[(a, b)]);
        }
    }
    for (mono, &c) in &pes.couplings {
        let mut term = Poly::from([(vec![0u32; m], c)]);
        for &(mode, e) in mono {
            let row: Vec<f64> = (0..m).map(|j| rotation[(mode, j)]).collect();
            for _ in 0..e {
                term = poly_mul_linear(&term, &row);
            }
        }
        for (e, v) in term {
            *poly.entry(e).or_insert(0.0) += v;
        }
    }

    let scale = poly
        .values()
        .fold(0.5 * rotated.diagonal().amax(), |a, v| a.max(v.abs()));
    let cutoff = ROTATION_DROP_RELATIVE * scale;
    let mut couplings = BTreeMap::new();
    let mut discarded = 0usize;
    for (exps, c) in poly {
        if c.abs() <= cutoff {
            continue;
        }
        let mono: Monomial = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(mode, &e)| (mode, e))
            .collect();
        if mono.len() > MAX_COUPLED_MODES {
            discarded += 1;
            continue;
        }
        couplings.insert(mono, c);
    }
    if discarded > 0 {
        log::warn!("rotation produced {discarded} monomials coupling more than {MAX_COUPLED_MODES} modes; they were discarded");
    }
    TaylorPes::new(frequencies, couplings, pes.max_degree)
}

/// Settings for a seeded family of anharmonic potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPesConfig {
    pub modes: usize,
    pub seed: u64,
    pub frequency_range: (f64, f64),
    pub cubic_scale: f64,
    pub quartic_scale: f64,
}

impl Default for RandomPesConfig {
    fn default() -> Self {
        RandomPesConfig {
            modes: 3,
            seed: 0,
            frequency_range: (1.0, 1.2),
            cubic_scale: 0.02,
            quartic_scale: 0.005,
        }
    }
}

/// Draws cubic and quartic force constants over every combination of up to
/// three modes. Diagonal quartic constants are positive.
pub fn random_quartic_pes(config: &RandomPesConfig) -> Result<TaylorPes> {
    let (lo, hi) = config.frequency_range;
    if config.modes == 0 || !(lo > 0.0 && hi >= lo) {
        return Err(invalid(
            "random PES needs at least one mode and 0 < low ≤ high frequencies",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let frequencies: Vec<f64> = (0..config.modes)
        .map(|_| {
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        })
        .collect();
    let mut couplings = BTreeMap::new();
    for degree in 3..=4u32 {
        let scale = if degree == 3 {
            config.cubic_scale
        } else {
            config.quartic_scale
        };
        for exps in exponent_vectors(config.modes, degree) {
            let mono: Monomial = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(m, &e)| (m, e))
                .collect();
            if mono.len() > MAX_COUPLED_MODES {
                continue;
            }
            let value = if degree == 4 && mono.len() == 1 {
                scale * rng.random_range(0.5..1.0)
            } else {
                scale * rng.random_range(-1.0..1.0)
            };
            couplings.insert(mono, value);
        }
    }
    TaylorPes::new(frequencies, couplings, DEFAULT_MAX_DEGREE)
}

// All exponent vectors of length `m` summing to `degree`, in lexicographic order.
fn exponent_vectors(m: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(m: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == m {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(m, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, degree, &mut Vec::new(), &mut out);
    out
}
