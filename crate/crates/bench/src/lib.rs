//! Shared fixtures for the benchmarks.

use vibrometer_core::{
    build_sop, encode, expand, fvci_ground_state, random_quartic_pes, ExpandedHamiltonian,
    PauliSum, QubitLayout, RandomPesConfig, StateVector,
};

pub struct Fixture {
    pub expanded: ExpandedHamiltonian,
    pub pauli: PauliSum,
    pub layout: QubitLayout,
}

/// Random quartic potential on `modes` modes with `modals` modals each.
pub fn fixture(modes: usize, modals: usize, seed: u64) -> Fixture {
    let pes = random_quartic_pes(&RandomPesConfig {
        modes,
        seed,
        ..Default::default()
    })
    .expect("valid config");
    let sop = build_sop(&pes, &vec![modals; modes]).expect("valid basis");
    let expanded = expand(&sop, 0.0).expect("expansion fits");
    let (pauli, layout) = encode(&expanded).expect("encoding fits");
    Fixture {
        expanded,
        pauli,
        layout,
    }
}

pub fn ground_state(f: &Fixture) -> StateVector {
    fvci_ground_state(&f.expanded, &f.layout)
        .expect("dimension within cap")
        .ground_state
}
