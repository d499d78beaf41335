//! # enlab-core
//!
//! Energy-landscape models of threshold neurons and of self-organizing
//! structure formation.
//!
//! ## Modules
//!
//! - [`entropy`]: Shannon, Boltzmann, Gibbs and von Neumann entropies, mutual
//!   information, Landauer's bound
//! - [`mcp`]: exact microstate census and entropy accounting for a
//!   McCulloch-Pitts neuron, plus a perceptron trainer
//! - [`hopfield_ising`]: Hebbian Hopfield memory and a Metropolis Ising model
//! - [`landscape`]: units, bonds and their thresholds; Langevin descent
//! - [`reduction`]: measurement scales, the reduction operators and the
//!   structure-energy ledger
//! - [`concept`]: concepts trained from reduced structures, interpretation,
//!   readout, winner-take-all and graph edit distance
//! - [`dataset`]: record and segmentation formats, synthetic strokes
//! - [`rng`]: named deterministic random sub-streams

pub mod concept;
pub mod dataset;
pub mod entropy;
pub mod hopfield_ising;
pub mod landscape;
pub mod mcp;
pub mod reduction;
pub mod rng;

pub use concept::{
    classify, diversity, interpret, readout, train_concept, wta, Classification, ConceptError,
    ConceptGraph, ConceptStore, InterpretationResult, Readout, Verdict,
};
pub use entropy::{
    boltzmann_entropy, gibbs_entropy, landauer_energy, mutual_information, shannon_entropy,
    von_neumann_entropy, EntropyError, JointDistribution, LogBase, PhysicalConstants,
    ProbabilityVector,
};
pub use hopfield_ising::{
    energy_floor, hebbian_weights, hopfield_energy, ising_energy, metropolis_accept,
    metropolis_run, recall, HopfieldError, HopfieldNet, IsingModel, RecallTrace, SpinState,
    UpdateOrder,
};
pub use landscape::{EnergyLandscape, LandscapeBond, LandscapeError, LandscapeUnit};
pub use mcp::{McpError, McpNeuron, MicrostateCensus};
pub use reduction::{
    composite_reduce, sp_reduce, structure_energy, EnergyLedger, OrderedStructure,
    ReducedStructure, ReductionConfig, ReductionError, Scale, ScaleTable, Segmentation,
    SignificanceStats,
};

/// Coarse classification of failures, shared by every module so callers
/// (the CLI in particular) can map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-range input.
    Validation,
    /// Input exceeds an exhaustive-enumeration bound.
    Capacity,
    /// A value outside the mathematical domain of an operation.
    Domain,
    /// Non-finite intermediate result.
    Numeric,
    /// An internal invariant was observed to fail on real data.
    Invariant,
}
