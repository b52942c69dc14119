//! Partitioning of a Pauli Hamiltonian into simultaneously measurable groups.
//!
//! Two families are provided:
//!
//! * Sorted Insertion (SI): terms are sorted once by descending `|coeff|`
//!   (ties by rendered string). Each round seeds a new group with the largest
//!   remaining term and sweeps the rest in order, moving in every term that
//!   commutes with all current members.
//! * MCR grouping: terms are first routed to their mode combination, disjoint
//!   mode combinations are packed into combined sets, and SI then runs inside
//!   each set independently.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::QubitLayout;
use crate::error::{invalid, Error, Result};
use crate::format::to_json_string;
use crate::pauli::{PauliString, PauliSum};

/// Commutation predicate used inside a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Commutation {
    /// Qubit-wise commutativity.
    Qwc,
    /// Full commutativity of the tensor products.
    Fc,
}

impl Commutation {
    pub fn commute(self, a: &PauliString, b: &PauliString) -> bool {
        match self {
            Commutation::Qwc => a.qwc_unchecked(b),
            Commutation::Fc => a.fc_unchecked(b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupingScheme {
    Qwc,
    Fc,
    QwcMcr,
    FcMcr,
}

impl GroupingScheme {
    pub const ALL: [GroupingScheme; 4] = [
        GroupingScheme::Qwc,
        GroupingScheme::Fc,
        GroupingScheme::QwcMcr,
        GroupingScheme::FcMcr,
    ];

    pub fn commutation(self) -> Commutation {
        match self {
            GroupingScheme::Qwc | GroupingScheme::QwcMcr => Commutation::Qwc,
            GroupingScheme::Fc | GroupingScheme::FcMcr => Commutation::Fc,
        }
    }

    pub fn uses_mcr(self) -> bool {
        matches!(self, GroupingScheme::QwcMcr | GroupingScheme::FcMcr)
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupingScheme::Qwc => "qwc",
            GroupingScheme::Fc => "fc",
            GroupingScheme::QwcMcr => "qwc-mcr",
            GroupingScheme::FcMcr => "fc-mcr",
        }
    }
}

impl fmt::Display for GroupingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('/', "-");
        GroupingScheme::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown grouping scheme {s:?} (expected qwc, fc, qwc-mcr or fc-mcr)"
                ))
            })
    }
}

/// A set of mutually commuting terms, in SI insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementGroup {
    pub members: Vec<(PauliString, f64)>,
    pub commutation: Commutation,
    pub tag: Option<String>,
}

impl MeasurementGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Checks every member pair against the group's commutation predicate.
    pub fn is_mutually_commuting(&self) -> bool {
        self.members.iter().enumerate().all(|(i, (a, _))| {
            self.members[i + 1..]
                .iter()
                .all(|(b, _)| self.commutation.commute(a, b))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupingResult {
    pub groups: Vec<MeasurementGroup>,
    pub scheme: GroupingScheme,
    pub covered_terms: usize,
}

impl GroupingResult {
    /// Checks that the groups partition `ham`'s terms exactly and that every
    /// group is mutually commuting.
    pub fn verify(&self, ham: &PauliSum) -> Result<()> {
        let mut expected: BTreeMap<&PauliString, f64> =
            ham.terms().iter().map(|(p, c)| (p, *c)).collect();
        let mut seen = 0usize;
        for (g_idx, g) in self.groups.iter().enumerate() {
            if !g.is_mutually_commuting() {
                return Err(Error::Invariant(format!(
                    "group {g_idx} is not mutually commuting"
                )));
            }
            for (p, c) in &g.members {
                match expected.remove(p) {
                    Some(e) if e == *c => seen += 1,
                    Some(e) => {
                        return Err(Error::Invariant(format!(
                            "coefficient of {p} changed from {e} to {c}"
                        )))
                    }
                    None => {
                        return Err(Error::Invariant(format!(
                            "term {p} is duplicated or not part of the Hamiltonian"
                        )))
                    }
                }
            }
        }
        if let Some((p, _)) = expected.into_iter().next() {
            return Err(Error::Invariant(format!(
                "term {p} is not covered by any group"
            )));
        }
        if seen != self.covered_terms {
            return Err(Error::Invariant("covered term count mismatch".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(&GroupingFile {
            scheme: self.scheme.name().to_string(),
            groups: self
                .groups
                .iter()
                .map(|g| GroupFile {
                    tag: g.tag.clone(),
                    terms: g
                        .members
                        .iter()
                        .map(|(p, c)| TermFile {
                            coeff: *c,
                            pauli: p.to_string(),
                        })
                        .collect(),
                })
                .collect(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupingFile = serde_json::from_str(text)?;
        let scheme: GroupingScheme = file.scheme.parse()?;
        let mut covered = 0;
        let groups = file
            .groups
            .into_iter()
            .map(|g| {
                let members = g
                    .terms
                    .into_iter()
                    .map(|t| Ok((t.pauli.parse::<PauliString>()?, t.coeff)))
                    .collect::<Result<Vec<_>>>()?;
                covered += members.len();
                Ok(MeasurementGroup {
                    members,
                    commutation: scheme.commutation(),
                    tag: g.tag,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupingResult {
            groups,
            scheme,
            covered_terms: covered,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    coeff: f64,
    pauli: String,
}

#[derive(Serialize, Deserialize)]
struct GroupFile {
    tag: Option<String>,
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct GroupingFile {
    scheme: String,
    groups: Vec<GroupFile>,
}

/// Greedy SI sweep over terms already in canonical order.
fn si_groups(
    terms: &[(PauliString, f64)],
    commutation: Commutation,
) -> Vec<Vec<(PauliString, f64)>> {
    let mut taken = vec![false; terms.len()];
    let mut groups = Vec::new();
    let mut first = 0;
    loop {
        while first < terms.len() && taken[first] {
            first += 1;
        }
        if first == terms.len() {
            break;
        }
        taken[first] = true;
        let mut members = vec![terms[first].clone()];
        // For QWC the members agree letter-wise wherever they overlap, so the
        // union of their letters stands in for the whole group.
        let mut union = terms[first].0.clone();
        for k in first + 1..terms.len() {
            if taken[k] {
                continue;
            }
            let cand = &terms[k].0;
            let fits = match commutation {
                Commutation::Qwc => union.qwc_unchecked(cand),
                Commutation::Fc => members.iter().all(|(m, _)| m.fc_unchecked(cand)),
            };
            if fits {
                taken[k] = true;
                if commutation == Commutation::Qwc {
                    for q in cand.support() {
                        union.set(q, cand.get(q));
                    }
                }
                members.push(terms[k].clone());
            }
        }
        groups.push(members);
    }
    groups
}

fn plain_scheme(commutation: Commutation) -> GroupingScheme {
    match commutation {
        Commutation::Qwc => GroupingScheme::Qwc,
        Commutation::Fc => GroupingScheme::Fc,
    }
}

/// Sorted Insertion over all non-identity terms of `ham`.
pub fn sorted_insertion(ham: &PauliSum, commutation: Commutation) -> GroupingResult {
    let groups: Vec<MeasurementGroup> = si_groups(ham.terms(), commutation)
        .into_iter()
        .map(|members| MeasurementGroup {
            members,
            commutation,
            tag: None,
        })
        .collect();
    GroupingResult {
        covered_terms: ham.len(),
        groups,
        scheme: plain_scheme(commutation),
    }
}

/// A combined set of pairwise-disjoint mode combinations and the terms routed to it.
#[derive(Clone, Debug, PartialEq)]
pub struct McrSet {
    pub combinations: Vec<Vec<usize>>,
    pub terms: PauliSum,
}

impl McrSet {
    /// Label such as `(0,1,2)+(3,4)`.
    pub fn label(&self) -> String {
        self.combinations
            .iter()
            .map(|mc| {
                let inner: Vec<String> = mc.iter().map(|m| m.to_string()).collect();
                format!("({})", inner.join(","))
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Mode combination a term is routed to: its own mode support if registered,
/// otherwise the smallest registered combination containing it.
fn attribute<'a>(support: &[usize], mcr: &'a BTreeSet<Vec<usize>>) -> Option<&'a Vec<usize>> {
    if let Some(mc) = mcr.get(support) {
        return Some(mc);
    }
    mcr.iter()
        .filter(|mc| support.iter().all(|m| mc.contains(m)))
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|m| !b.contains(m))
}

/// Packs the mode-combination register into combined measurement sets.
///
/// Multi-mode combinations are visited by descending coupling order, then
/// descending total `|coeff|`, then lexicographically. Each unassigned
/// combination seeds a set and the remaining ones are swept in the same order,
/// joining when disjoint from everything already in the set. All one-mode
/// combinations form a single final set.
pub fn mcr_partition(
    ham: &PauliSum,
    layout: &QubitLayout,
    mcr: &BTreeSet<Vec<usize>>,
) -> Result<Vec<McrSet>> {
    if layout.n_qubits() != ham.n_qubits() {
        return Err(Error::LengthMismatch {
            left: layout.n_qubits(),
            right: ham.n_qubits(),
        });
    }
    if let Some(bad) = mcr.iter().find(|mc| {
        mc.is_empty()
            || mc.windows(2).any(|w| w[0] >= w[1])
            || mc.iter().any(|&m| m >= layout.basis().mode_count())
    }) {
        return Err(invalid(format!("invalid mode combination {bad:?}")));
    }
    let mut routed: BTreeMap<&Vec<usize>, Vec<(PauliString, f64)>> = BTreeMap::new();
    for (p, c) in ham.terms() {
        let support = layout.mode_support(p);
        let mc = attribute(&support, mcr).ok_or_else(|| {
            invalid(format!(
                "term {p} acts on modes {support:?}, which no registered mode combination covers"
            ))
        })?;
        routed.entry(mc).or_default().push((p.clone(), *c));
    }
    let weight = |mc: &Vec<usize>| -> f64 {
        routed
            .get(mc)
            .map_or(0.0, |ts| ts.iter().map(|(_, c)| c.abs()).sum())
    };

    let mut multi: Vec<(&Vec<usize>, f64)> = mcr
        .iter()
        .filter(|mc| mc.len() > 1)
        .map(|mc| (mc, weight(mc)))
        .collect();
    multi.sort_by(|a, b| {
        b.0.len()
            .cmp(&a.0.len())
            .then_with(|| b.1.total_cmp(&a.1))
            .then_with(|| a.0.cmp(b.0))
    });

    let mut assigned = vec![false; multi.len()];
    let mut packs: Vec<Vec<&Vec<usize>>> = Vec::new();
    for seed in 0..multi.len() {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let mut pack = vec![multi[seed].0];
        for k in seed + 1..multi.len() {
            if !assigned[k] && pack.iter().all(|mc| disjoint(mc, multi[k].0)) {
                assigned[k] = true;
                pack.push(multi[k].0);
            }
        }
        packs.push(pack);
    }
    let singles: Vec<&Vec<usize>> = mcr.iter().filter(|mc| mc.len() == 1).collect();
    if !singles.is_empty() {
        packs.push(singles);
    }

    packs
        .into_iter()
        .map(|pack| {
            let terms: Vec<(PauliString, f64)> = pack
                .iter()
                .flat_map(|mc| routed.get(mc).cloned().unwrap_or_default())
                .collect();
            let mut combinations: Vec<Vec<usize>> = pack.into_iter().cloned().collect();
            combinations.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            Ok(McrSet {
                combinations,
                terms: PauliSum::new(ham.n_qubits(), terms, 0.0)?,
            })
        })
        .collect()
}

/// Mode combinations touched by the terms of `ham`.
pub fn term_mode_combinations(ham: &PauliSum, layout: &QubitLayout) -> BTreeSet<Vec<usize>> {
    ham.terms()
        .iter()
        .map(|(p, _)| layout.mode_support(p))
        .collect()
}

/// MCR partition followed by SI inside each set. Sets are grouped in
/// parallel and concatenated in partition order.
pub fn mcr_sorted_insertion(
    ham: &PauliSum,
    layout: &QubitLayout,
    commutation: Commutation,
) -> Result<GroupingResult> {
    let mcr = term_mode_combinations(ham, layout);
    let sets = mcr_partition(ham, layout, &mcr)?;
    let per_set: Vec<Vec<MeasurementGroup>> = sets
        .par_iter()
        .map(|set| {
            let tag = set.label();
            si_groups(set.terms.terms(), commutation)
                .into_iter()
                .map(|members| MeasurementGroup {
                    members,
                    commutation,
                    tag: Some(tag.clone()),
                })
                .collect()
        })
        .collect();
    Ok(GroupingResult {
        groups: per_set.into_iter().flatten().collect(),
        scheme: match commutation {
            Commutation::Qwc => GroupingScheme::QwcMcr,
            Commutation::Fc => GroupingScheme::FcMcr,
        },
        covered_terms: ham.len(),
    })
}

/// Dispatches on the grouping scheme.
pub fn group(
    ham: &PauliSum,
    layout: &QubitLayout,
    scheme: GroupingScheme,
) -> Result<GroupingResult> {
    if scheme.uses_mcr() {
        mcr_sorted_insertion(ham, layout, scheme.commutation())
    } else {
        Ok(sorted_insertion(ham, scheme.commutation()))
    }
}

/// Set of sets of mode combinations, for order-free comparisons.
pub fn partition_signature(sets: &[McrSet]) -> BTreeSet<BTreeSet<Vec<usize>>> {
    sets.iter()
        .map(|s| s.combinations.iter().cloned().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{commutator_vanishes, pauli_matrix};
    use crate::encode::encode;
    use crate::pauli::Pauli;
    use crate::sopham::{expand, ModeBasis, OneModeFactor, SopHamiltonian, SopTerm};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn rendered(r: &GroupingResult) -> Vec<Vec<String>> {
        r.groups
            .iter()
            .map(|g| g.members.iter().map(|(p, _)| p.to_string()).collect())
            .collect()
    }

    fn combos(m: usize, max_order: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << m) {
            let mc: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).collect();
            if mc.len() <= max_order {
                out.push(mc);
            }
        }
        out
    }

    fn sop_on(modals: Vec<usize>, mcs: &[Vec<usize>], seed: u64) -> SopHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = mcs
            .iter()
            .map(|mc| SopTerm {
                coeff: rng.random_range(0.5..1.5),
                factors: mc
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
            })
            .collect();
        SopHamiltonian::new(ModeBasis::new(modals).unwrap(), 0.0, terms).unwrap()
    }

    #[test]
    fn si_hand_trace() {
        let ham =
            PauliSum::new(2, vec![(p("ZI"), 2.0), (p("XI"), 1.0), (p("ZZ"), 0.5)], 0.0).unwrap();
        let r = sorted_insertion(&ham, Commutation::Qwc);
        assert_eq!(rendered(&r), vec![vec!["ZI", "ZZ"], vec!["XI"]]);
        r.verify(&ham).unwrap();
    }

    #[test]
    fn si_degenerate_inputs() {
        let ham = PauliSum::new(
            3,
            vec![(p("ZII"), 1.0), (p("IZI"), 0.5), (p("ZIZ"), 0.25)],
            0.0,
        )
        .unwrap();
        assert_eq!(sorted_insertion(&ham, Commutation::Qwc).groups.len(), 1);
        let empty = PauliSum::empty(3);
        assert!(sorted_insertion(&empty, Commutation::Fc).groups.is_empty());
    }

    #[test]
    fn fc_merges_what_qwc_cannot() {
        let ham =
            PauliSum::new(2, vec![(p("XX"), 1.0), (p("YY"), 1.0), (p("ZZ"), 1.0)], 0.0).unwrap();
        assert_eq!(sorted_insertion(&ham, Commutation::Fc).groups.len(), 1);
        assert_eq!(sorted_insertion(&ham, Commutation::Qwc).groups.len(), 3);
    }

    #[test]
    fn ties_broken_lexicographically() {
        let ham = PauliSum::new(1, vec![(p("Z"), 1.0), (p("X"), -1.0)], 0.0).unwrap();
        let r = sorted_insertion(&ham, Commutation::Qwc);
        assert_eq!(rendered(&r), vec![vec!["X"], vec!["Z"]]);
    }

    #[test]
    fn five_mode_greedy_packing() {
        let layout_basis = vec![2; 5];
        let sop = sop_on(layout_basis, &combos(5, 3), 1);
        let (ham, layout) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
        let mcr: BTreeSet<Vec<usize>> = combos(5, 3).into_iter().collect();
        let sets = mcr_partition(&ham, &layout, &mcr).unwrap();
        assert_eq!(sets.len(), 11);
        for s in &sets {
            let modes: Vec<usize> = s.combinations.iter().flatten().copied().collect();
            if s.combinations[0].len() == 3 {
                assert_eq!(s.combinations.len(), 2);
                let mut all = modes.clone();
                all.sort();
                assert_eq!(all, vec![0, 1, 2, 3, 4]);
            } else {
                assert_eq!(s.combinations.len(), 5);
            }
        }
        let total: usize = sets.iter().map(|s| s.terms.len()).sum();
        assert_eq!(total, ham.len());
    }

    #[test]
    fn three_mode_full_coupling_has_no_partners() {
        let sop = sop_on(vec![2; 3], &combos(3, 3), 2);
        let (ham, layout) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
        let mcr = term_mode_combinations(&ham, &layout);
        let sig = partition_signature(&mcr_partition(&ham, &layout, &mcr).unwrap());
        let expected: BTreeSet<BTreeSet<Vec<usize>>> = [
            vec![vec![0, 1, 2]],
            vec![vec![0, 1]],
            vec![vec![0, 2]],
            vec![vec![1, 2]],
            vec![vec![0], vec![1], vec![2]],
        ]
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();
        assert_eq!(sig, expected);
    }

    #[test]
    fn one_mode_only_is_a_single_set() {
        let sop = sop_on(vec![3, 2], &[vec![0], vec![1]], 3);
        let (ham, layout) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
        let sets = mcr_partition(&ham, &layout, &term_mode_combinations(&ham, &layout)).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].label(), "(0)+(1)");
    }

    #[test]
    fn unattributable_term_is_an_error() {
        let layout = QubitLayout::new(&ModeBasis::new(vec![2, 2]).unwrap());
        let ham = PauliSum::new(4, vec![(p("ZIZI"), 1.0)], 0.0).unwrap();
        let mcr: BTreeSet<Vec<usize>> = [vec![0], vec![1]].into_iter().collect();
        assert!(mcr_partition(&ham, &layout, &mcr).is_err());
        // covered by a registered superset
        let mcr: BTreeSet<Vec<usize>> = [vec![0, 1]].into_iter().collect();
        assert_eq!(mcr_partition(&ham, &layout, &mcr).unwrap().len(), 1);
    }

    #[test]
    fn single_combination_matches_plain_si() {
        // every term acts on all three modes
        let layout = QubitLayout::new(&ModeBasis::new(vec![2, 2, 2]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        let mut terms = BTreeMap::new();
        for _ in 0..40 {
            let mut s = PauliString::identity(6);
            for mode in 0..3 {
                let q = 2 * mode + rng.random_range(0..2);
                s.set(q, letters[rng.random_range(0..3)]);
            }
            terms.insert(s, rng.random_range(-1.0..1.0));
        }
        let ham = PauliSum::new(6, terms.into_iter().collect(), 0.0).unwrap();
        for comm in [Commutation::Qwc, Commutation::Fc] {
            let plain = sorted_insertion(&ham, comm);
            let mcr = mcr_sorted_insertion(&ham, &layout, comm).unwrap();
            assert_eq!(rendered(&plain), rendered(&mcr));
            assert!(mcr
                .groups
                .iter()
                .all(|g| g.tag.as_deref() == Some("(0,1,2)")));
        }
    }

    #[test]
    fn mcr_groups_stay_in_their_set_blocks() {
        let sop = sop_on(vec![2; 5], &combos(5, 3), 5);
        let (ham, layout) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
        for comm in [Commutation::Qwc, Commutation::Fc] {
            let r = mcr_sorted_insertion(&ham, &layout, comm).unwrap();
            r.verify(&ham).unwrap();
            for g in &r.groups {
                let tag = g.tag.as_ref().unwrap();
                for (s, _) in &g.members {
                    for m in layout.mode_support(s) {
                        assert!(tag.contains(&m.to_string()), "{s} outside {tag}");
                    }
                }
            }
        }
    }

    #[test]
    fn groups_commute_densely_on_small_systems() {
        for seed in 0..4 {
            let sop = sop_on(vec![2, 3, 2], &combos(3, 3), 10 + seed);
            let (ham, layout) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
            for scheme in GroupingScheme::ALL {
                let r = group(&ham, &layout, scheme).unwrap();
                r.verify(&ham).unwrap();
                for g in &r.groups {
                    let mats: Vec<_> = g.members.iter().map(|(s, _)| pauli_matrix(s)).collect();
                    for a in 0..mats.len() {
                        for b in a + 1..mats.len() {
                            assert!(commutator_vanishes(&mats[a], &mats[b]));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn members_in_descending_magnitude() {
        let sop = sop_on(vec![3, 3], &combos(2, 2), 8);
        let (ham, _) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
        let r = sorted_insertion(&ham, Commutation::Fc);
        for g in &r.groups {
            assert!(g.members.windows(2).all(|w| w[0].1.abs() >= w[1].1.abs()));
        }
    }

    #[test]
    fn grouping_json_round_trip() {
        let sop = sop_on(vec![2, 2], &combos(2, 2), 9);
        let (ham, layout) = encode(&expand(&sop, 0.0).unwrap()).unwrap();
        let r = group(&ham, &layout, GroupingScheme::FcMcr).unwrap();
        let back = GroupingResult::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(
            "QWC/MCR".parse::<GroupingScheme>().unwrap(),
            GroupingScheme::QwcMcr
        );
        assert!("greedy".parse::<GroupingScheme>().is_err());
    }
}
