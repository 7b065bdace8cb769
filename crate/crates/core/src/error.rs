use thiserror::Error;

use crate::chains::{BackwardWitness, ChainViolation};
use crate::decomposition::ConsistencyWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("machine has no states")]
    NoStates,
    #[error("machine has no symbols")]
    NoSymbols,
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol index {index} out of range for an alphabet of size {size}")]
    SymbolIndex { index: usize, size: usize },
    #[error("state index {index} out of range for a state space of size {size}")]
    StateIndex { index: usize, size: usize },
    #[error("duplicate transition ({0}, {1}, {2})")]
    DuplicateTransition(String, String, String),

    #[error("aggregation map is not total: symbol index {0} has no label")]
    PartialMap(usize),
    #[error("label `{0}` has an empty preimage")]
    UnusedLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("aggregation maps disagree on the alphabet: expected {expected} symbols, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },
    #[error("a decomposition needs at least one aggregation map")]
    EmptyDecomposition,
    #[error("inconsistent decomposition: {0}")]
    Inconsistent(ConsistencyWitness),
    #[error("materializing {requested} traces exceeds the cap of {cap}")]
    Overflow { requested: u128, cap: usize },

    #[error("not chain-decomposable: {0}")]
    NotChainDecomposable(BackwardWitness),
    #[error("not a non-deterministic chain: {0}")]
    NotAChain(ChainViolation),
    #[error("invalid chain partition: {0}")]
    InvalidPartition(String),
    #[error("not an I/S/- machine: {0}")]
    NotIsMachine(String),

    #[error("invalid state partition: {0}")]
    InvalidQuotient(String),
    #[error("quotient is still not chain-decomposable after {iterations} refinements: {witness}")]
    QuotientDidNotConverge { iterations: usize, witness: BackwardWitness },

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("generator configuration unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("{0}")]
    Abstraction(#[from] crate::abstraction::AbstractionError),
}
