//! Measurement-cost analysis for vibrational Hamiltonians on qubits.
//!
//! The pipeline runs SOP Hamiltonian → expanded second-quantized strings →
//! one-hot Pauli encoding → commuting measurement groups → ground-state group
//! variances → optimal shot allocation → circuit runtime estimates.

pub mod dense;
pub mod encode;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod format;
pub mod group;
pub mod pauli;
pub mod sopham;
pub mod synth;

pub use encode::{cnot_count_uvccsd, encode, expand_double_excitation, QubitLayout};
pub use engine::{
    apply_pauli, expectation, fvci_ground_state, group_variance, sample_group, SpectrumResult,
    StateSidecar, StateVector,
};
pub use error::{Error, Result};
pub use estimator::{
    allocate, reduction_report, runtime, MeasurementPlan, ReductionReport, ReportRow,
    RuntimeReport, ShotAllocation,
};
pub use group::{
    group, mcr_partition, mcr_sorted_insertion, sorted_insertion, Commutation, GroupingResult,
    GroupingScheme, McrSet, MeasurementGroup,
};
pub use pauli::{Pauli, PauliString, PauliSum, Phase};
pub use sopham::{
    count_terms, expand, mode_combinations, ExpandedHamiltonian, ExpandedString, ModeBasis,
    OneModeFactor, SopHamiltonian, SopTerm,
};
pub use synth::{
    build_sop, givens, ho_matrix_elements, random_quartic_pes, rotate_coordinates, MatrixKind,
    RandomPesConfig, TaylorPes,
};
