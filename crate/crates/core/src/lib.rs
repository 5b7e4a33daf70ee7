//! Inner-product tracing attacks against top-k selection.
//!
//! The crate simulates the attack that decides whether a target row took
//! part in a dataset by thresholding `<y, t>`, where `t` is a released
//! top-k column indicator, and provides:
//!
//! * [`dataset`]: uniform ±1 datasets, exact marginals and exact top-k.
//! * [`mechanisms`]: exact, exponential-mechanism peeling and adversarial
//!   releases.
//! * [`attack`]: the threshold test and whole-dataset trace reports.
//! * [`bounds`]: tail bounds, regime checks, noisy-regime constants and the
//!   DP-violation witness.
//! * [`harness`]: reproducible parallel Monte Carlo experiments and reports.

pub mod attack;
pub mod bounds;
pub mod dataset;
mod error;
pub mod exact;
pub mod harness;
pub mod mechanisms;
pub mod rng;

pub use attack::{decide, threshold, trace_dataset, AttackParams, Decision, TraceReport};
pub use bounds::{
    anticonc_lower, chernoff_bounds, dp_witness, exact_regime_check, hoeffding_tail, noisy_constants, DpWitness,
    EpsilonMax, ExactRegime, NoisyRegimeConstants,
};
pub use dataset::{
    count_above, exact_top_k, generate_fixed_sum_column, marginals, validate_alpha_accurate, DatasetMatrix,
    FixedSumColumn, MarginalVector, SignVector, TopKVector,
};
pub use error::{Error, Result};
pub use harness::{
    run_experiment, summarize, write_report, ExperimentConfig, ExperimentKind, ReportFormat, Summary, TrialResult,
};
pub use mechanisms::{
    adversarial_topk, exp_mech_peeling, release, release_error, Budget, Mechanism, MechanismConfig, MechanismKind,
    ReleaseOutcome,
};
