//! Pauli strings in symplectic (binary) form.
//!
//! A string on `n` qubits is stored as two bitsets `x` and `z` packed into
//! 64-bit words. Qubit `k` carries `X` if only its x bit is set, `Z` if only
//! its z bit is set, `Y` if both are set and `I` otherwise. Products track the
//! global phase modulo 4 as a power of `i`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::format::fmt_f64;

const WORD: usize = 64;

/// Imaginary residue above which a combined coefficient is rejected.
pub const IMAG_TOLERANCE: f64 = 1e-10;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A power of `i`, stored modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-qubit Paulis on a fixed number of qubits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = words_for(n_qubits);
        PauliString {
            n_qubits,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    /// Builds a string that is identity except for the listed `(qubit, letter)` pairs.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n_qubits);
        for &(q, letter) in ops {
            if q >= n_qubits {
                return Err(invalid(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            p.set(q, letter);
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n_qubits, "qubit index out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, letter: Pauli) {
        assert!(qubit < self.n_qubits, "qubit index out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (xb, zb) = letter.bits();
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | if xb { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if zb { mask } else { 0 };
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Qubits on which the string acts non-trivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.get(q) != Pauli::I)
            .collect()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Product `self · other = phase · result`.
    pub fn multiply(&self, other: &PauliString) -> Result<(PauliString, Phase)> {
        self.check_len(other)?;
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut out = PauliString::identity(self.n_qubits);
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (ax, ay, az) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (bx, by, bz) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and their reverses carry -i
            plus += ((ax & by) | (ay & bz) | (az & bx)).count_ones();
            minus += ((ay & bx) | (az & by) | (ax & bz)).count_ones();
            out.x[w] = x1 ^ x2;
            out.z[w] = z1 ^ z2;
        }
        Ok((out, Phase::from_power(plus as i64 - minus as i64)))
    }

    /// True iff on every qubit the factors are equal or one of them is `I`.
    pub fn qubit_wise_commute(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.qwc_unchecked(other))
    }

    pub(crate) fn qwc_unchecked(&self, other: &PauliString) -> bool {
        (0..self.x.len()).all(|w| {
            let both = (self.x[w] | self.z[w]) & (other.x[w] | other.z[w]);
            let differ = (self.x[w] ^ other.x[w]) | (self.z[w] ^ other.z[w]);
            both & differ == 0
        })
    }

    /// True iff the symplectic inner product vanishes mod 2.
    pub fn fully_commute(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.fc_unchecked(other))
    }

    pub(crate) fn fc_unchecked(&self, other: &PauliString) -> bool {
        let odd: u32 = (0..self.x.len())
            .map(|w| ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones())
            .sum();
        odd.is_multiple_of(2)
    }

    /// Bit masks for strings of at most 64 qubits, used by the statevector engine.
    pub(crate) fn masks(&self) -> (u64, u64) {
        debug_assert!(self.n_qubits <= WORD);
        (
            self.x.first().copied().unwrap_or(0),
            self.z.first().copied().unwrap_or(0),
        )
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(invalid("empty Pauli string"));
        }
        let n = s.chars().count();
        let mut p = PauliString::identity(n);
        for (q, c) in s.chars().enumerate() {
            let letter = Pauli::from_char(c)
                .ok_or_else(|| invalid(format!("unexpected character {c:?} in Pauli string")))?;
            p.set(q, letter);
        }
        Ok(p)
    }
}

/// Lexicographic order of the rendered string (`I < X < Y < Z`, qubit 0 first).
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.n_qubits.min(other.n_qubits);
        for q in 0..n {
            match self.get(q).cmp(&other.get(q)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.n_qubits.cmp(&other.n_qubits)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical term order: descending `|coeff|`, ties by rendered string.
pub fn canonical_order(a: &(PauliString, f64), b: &(PauliString, f64)) -> Ordering {
    b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0))
}

/// Real linear combination `constant · I + Σ h_i P_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(PauliString, f64)>,
    constant: f64,
}

impl PauliSum {
    pub fn empty(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
            constant: 0.0,
        }
    }

    /// Builds a sum from real terms. Duplicate strings are rejected; identity
    /// strings are folded into the constant.
    pub fn new(n_qubits: usize, terms: Vec<(PauliString, f64)>, constant: f64) -> Result<Self> {
        let mut constant = constant;
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::with_capacity(terms.len());
        for (p, c) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::LengthMismatch {
                    left: n_qubits,
                    right: p.n_qubits(),
                });
            }
            if !c.is_finite() {
                return Err(invalid(format!("non-finite coefficient for {p}")));
            }
            if p.is_identity() {
                constant += c;
                continue;
            }
            if !seen.insert(p.clone()) {
                return Err(invalid(format!("duplicate Pauli string {p}")));
            }
            kept.push((p, c));
        }
        kept.sort_by(canonical_order);
        Ok(PauliSum {
            n_qubits,
            terms: kept,
            constant,
        })
    }

    /// Combines complex contributions string by string. Each combined
    /// coefficient must be real to within [`IMAG_TOLERANCE`]; real parts with
    /// magnitude at or below `drop_below` are discarded.
    pub fn from_complex<I>(
        n_qubits: usize,
        contributions: I,
        constant: f64,
        drop_below: f64,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (p, c) in contributions {
            if p.n_qubits() != n_qubits {
                return Err(Error::LengthMismatch {
                    left: n_qubits,
                    right: p.n_qubits(),
                });
            }
            *acc.entry(p).or_default() += c;
        }
        let mut constant = Complex64::new(constant, 0.0);
        let mut terms = Vec::with_capacity(acc.len());
        for (p, c) in acc {
            if c.im.abs() >= IMAG_TOLERANCE {
                return Err(Error::Hermiticity(format!(
                    "coefficient of {p} has imaginary part {:e}",
                    c.im
                )));
            }
            if p.is_identity() {
                constant += c;
            } else if c.re.abs() > drop_below {
                terms.push((p, c.re));
            }
        }
        terms.sort_by(canonical_order);
        Ok(PauliSum {
            n_qubits,
            terms,
            constant: constant.re,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Non-identity terms in canonical order.
    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Renders the text format: one `<coeff> <string>` line per term, the
    /// constant as the all-identity line first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} qubits, {} terms\n",
            self.n_qubits,
            self.terms.len()
        ));
        let ident = PauliString::identity(self.n_qubits);
        out.push_str(&format!("{} {}\n", fmt_f64(self.constant), ident));
        for (p, c) in &self.terms {
            out.push_str(&format!("{} {}\n", fmt_f64(*c), p));
        }
        out
    }

    /// Parses the text format. Blank lines and `#` comments are skipped;
    /// repeated strings are summed.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut acc: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(c), Some(s), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(invalid(format!(
                    "line {}: expected `<coeff> <string>`",
                    lineno + 1
                )));
            };
            let c: f64 = c
                .parse()
                .map_err(|_| invalid(format!("line {}: bad coefficient {c:?}", lineno + 1)))?;
            let p: PauliString = s.parse()?;
            match n_qubits {
                None => n_qubits = Some(p.n_qubits()),
                Some(n) if n != p.n_qubits() => {
                    return Err(invalid(format!(
                        "line {}: string has {} qubits, expected {n}",
                        lineno + 1,
                        p.n_qubits()
                    )))
                }
                _ => {}
            }
            *acc.entry(p).or_default() += c;
        }
        let n = n_qubits.ok_or_else(|| invalid("Pauli file contains no terms"))?;
        PauliSum::new(n, acc.into_iter().collect(), 0.0)
    }
}
