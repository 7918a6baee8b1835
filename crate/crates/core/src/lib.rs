//! Bayesian causal induction over probability trees.
//!
//! A [`ProbabilityTree`] holds competing causal hypotheses in its branch
//! structure: a hypothesis variable near the root selects the order in which
//! the mechanisms below it resolve. Interventions rewrite mechanisms,
//! conditioning reweights paths, and posteriors over the hypothesis follow
//! from exact rational arithmetic throughout.

pub mod dsl;
pub mod error;
pub mod event;
pub mod extrapolation;
pub mod fixtures;
pub mod inference;
pub mod intervention;
pub mod query;
pub mod rational;
pub mod simulator;
pub mod tree;

pub use error::{Error, Result};
pub use event::Event;
pub use extrapolation::{
    build_two_device_tree, build_unconstrained_device_tree, DeviceParams, GraftSpec,
};
pub use inference::{
    posterior, replicated_tree_posterior, sequential_posterior, Posterior, TrialRecord,
};
pub use intervention::InterventionSpec;
pub use query::ConditionalQuery;
pub use rational::Rational;
pub use simulator::{run_experiment, sample, ExperimentOutcome, ExperimentPlan, Realization};
pub use tree::{Branch, LeafPath, Node, ProbabilityTree, Registry, ValueId, VariableId, Violation};
