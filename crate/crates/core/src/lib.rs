//! Hidden-correlation representation of compound quantum systems.
//!
//! A pure state of a compound system is split into individual entities, each
//! carrying a density-matrix proper state. Measuring the entities one after
//! another updates the proper states of those still unmeasured through a
//! deterministic map of the obtained outcome state. The [`oracle`] module
//! computes the same joint probabilities directly from the Born rule.

pub mod correlations;
pub mod error;
pub mod hidden;
pub mod hilbert;
pub mod oracle;
pub mod random;

pub use correlations::{
    advance, cascade_distribution, cascade_distribution_with, conditional_remainder,
    conditional_remainder_with, hidden_correlation_map, measure_step, outcome_probabilities,
    outcome_probability, proper_state, proper_state_with, remainder_from_decomposition,
    CascadeState, Decomposer, MeasuredOutcome, MeasurementBasis, OutcomeDistribution, ProperState,
};
pub use error::{Error, Result};
pub use hidden::{
    classical_observable, combined_hidden_measurement, lambda_boxes, monte_carlo_distribution,
    pushforward_distribution, HiddenMeasurementRep, LambdaBox, LambdaCell, LambdaVector,
};
pub use hilbert::{
    biorthogonal_decompose, bipartition_matrix, partial_trace, tensor_product,
    BiorthogonalDecomposition, CMatrix, CVector, DensityMatrix, Factorization, StateVector, C64,
};
pub use oracle::{
    born_joint_probability, compare_distributions, oracle_distribution, project_entity,
    ComparisonReport,
};
