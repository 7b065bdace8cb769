//! Set-valued state estimation on symbolic state machines, and a
//! decentralized scheme that runs one estimator per aggregated view of the
//! alphabet and intersects their answers.
//!
//! The scheme always overapproximates the monolithic estimate. It is exact
//! when the aggregation follows a chain decomposition of the machine
//! ([`chains`]), or of a quotient of it ([`quotient`]).

pub mod abstraction;
pub mod chains;
pub mod decomposition;
pub mod distributed;
pub mod error;
pub mod estimator;
pub mod machine;
pub mod quotient;
pub mod verify;

pub use chains::{
    backward_witness, build_decomposition, check_chain_decomposable, decompose_chain, is_chain, iso_partition,
    partition_chains, ChainPartition, IsMachineView,
};
pub use decomposition::{check_consistency, AggregationMap, Decomposition, ProductSet, RestrictionDomain};
pub use distributed::{derive_distributed, DecentralizedEstimator, DistributedFamily};
pub use error::{Error, Result};
pub use estimator::{estimate, estimate_and_predict, oracle_estimate, oracle_predict, predict, Estimator};
pub use machine::{Machine, StateSet, Trace};
pub use quotient::{build_quotient, lemma1_relation, theorem2_decomposition, QuotientMachine, QuotientMap};
