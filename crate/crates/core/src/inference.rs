//! Posteriors over a hypothesis variable.
//!
//! The hypothesis variable sits at the top of the tree and selects which
//! causal ordering the mechanisms below it follow. A trial applies some
//! interventions and then observes an event; the posterior is the
//! distribution of the hypothesis given that observation in the intervened
//! tree.
//!
//! [`sequential_posterior`] treats trials as independent repetitions and
//! multiplies per-trial likelihoods. [`replicated_tree_posterior`] reaches the
//! same answer by brute force: it builds one tree holding every trial as a
//! renamed copy of the template and conditions on all observations at once.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num::{BigUint, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::intervention::InterventionSpec;
use crate::query::ConditionalQuery;
use crate::rational::{format_rational, Rational};
use crate::tree::{display_path, Branch, Node, ProbabilityTree, Step, ValueId, VariableId};

/// Upper bound on the number of leaves [`replicated_tree_posterior`] builds.
pub const REPLICATION_LEAF_LIMIT: u64 = 1_000_000;

/// Exact distribution over the values of a hypothesis variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Posterior {
    hypothesis: VariableId,
    weights: Vec<(ValueId, Rational)>,
}

impl Posterior {
    /// Weights must be non-negative, name distinct values and sum to one.
    pub fn new(
        hypothesis: impl Into<VariableId>,
        weights: Vec<(ValueId, Rational)>,
    ) -> Result<Self> {
        let mut total = Rational::zero();
        for (i, (value, w)) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::InvalidPosterior(format!(
                    "negative weight on {value}"
                )));
            }
            if weights[..i].iter().any(|(v, _)| v == value) {
                return Err(Error::InvalidPosterior(format!(
                    "value {value} listed twice"
                )));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidPosterior(format!(
                "weights sum to {}",
                format_rational(&total)
            )));
        }
        Ok(Self {
            hypothesis: hypothesis.into(),
            weights,
        })
    }

    /// Equal weight on every value in the hypothesis domain.
    pub fn uniform(tree: &ProbabilityTree, hypothesis: &VariableId) -> Result<Self> {
        let domain = tree.registry().domain(hypothesis)?;
        let w = Rational::new(1.into(), domain.len().into());
        Ok(Self {
            hypothesis: hypothesis.clone(),
            weights: domain.iter().map(|v| (v.clone(), w.clone())).collect(),
        })
    }

    /// The tree's own marginal over the hypothesis.
    pub fn marginal(tree: &ProbabilityTree, hypothesis: &VariableId) -> Result<Self> {
        let weights = tree
            .registry()
            .domain(hypothesis)?
            .iter()
            .map(|v| {
                Ok((
                    v.clone(),
                    tree.event_probability(&Event::of(hypothesis.clone(), v.clone()))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(hypothesis.clone(), weights)
    }

    pub fn hypothesis(&self) -> &VariableId {
        &self.hypothesis
    }

    pub fn weights(&self) -> &[(ValueId, Rational)] {
        &self.weights
    }

    pub fn weight(&self, value: &ValueId) -> Option<&Rational> {
        self.weights
            .iter()
            .find(|(v, _)| v == value)
            .map(|(_, w)| w)
    }

    /// Total weight on a set of hypothesis values.
    pub fn mass_of<'a>(&self, values: impl IntoIterator<Item = &'a ValueId>) -> Rational {
        values.into_iter().filter_map(|v| self.weight(v)).sum()
    }
}

impl fmt::Display for Posterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self
            .weights
            .iter()
            .map(|(v, w)| format!("{v}: {}", format_rational(w)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// One experimental round: forced settings, then an observation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TrialRecord {
    pub interventions: Vec<InterventionSpec>,
    pub observation: Event,
}

impl TrialRecord {
    pub fn new(interventions: Vec<InterventionSpec>, observation: Event) -> Self {
        Self {
            interventions,
            observation,
        }
    }

    /// Passive trial: observe without intervening.
    pub fn observe(observation: Event) -> Self {
        Self::new(Vec::new(), observation)
    }

    fn check(&self, hypothesis: &VariableId) -> Result<()> {
        if self.observation.contains(hypothesis) {
            return Err(Error::OverlappingVariables(hypothesis.clone()));
        }
        for (i, spec) in self.interventions.iter().enumerate() {
            if &spec.variable == hypothesis || self.observation.contains(&spec.variable) {
                return Err(Error::OverlappingVariables(spec.variable.clone()));
            }
            if self.interventions[..i]
                .iter()
                .any(|o| o.variable == spec.variable)
            {
                return Err(Error::DuplicateVariable(spec.variable.clone()));
            }
        }
        Ok(())
    }

    fn touched(&self) -> impl Iterator<Item = &VariableId> {
        self.interventions
            .iter()
            .map(|s| &s.variable)
            .chain(self.observation.variables())
    }
}

/// Every path must resolve the hypothesis, and before any watched variable.
fn check_hypothesis_first(
    tree: &ProbabilityTree,
    hypothesis: &VariableId,
    watched: &BTreeSet<&VariableId>,
) -> Result<()> {
    fn go(
        node: &Node,
        hypothesis: &VariableId,
        watched: &BTreeSet<&VariableId>,
        path: &mut Vec<Step>,
    ) -> Result<()> {
        let fail = |path: &[Step]| Error::HypothesisNotFirst {
            hypothesis: hypothesis.clone(),
            path: display_path(path),
        };
        match node {
            Node::Leaf => Err(fail(path)),
            Node::Internal { variable, .. } if variable == hypothesis => Ok(()),
            Node::Internal { variable, branches } => {
                if watched.contains(variable) {
                    return Err(fail(path));
                }
                for b in branches {
                    path.push((variable.clone(), b.value.clone()));
                    go(&b.child, hypothesis, watched, path)?;
                    path.pop();
                }
                Ok(())
            }
        }
    }
    if !tree.registry().contains(hypothesis) {
        return Err(Error::UnknownVariable(hypothesis.clone()));
    }
    go(tree.root(), hypothesis, watched, &mut Vec::new())
}

/// Posterior over `hypothesis` after one trial.
pub fn posterior(
    tree: &ProbabilityTree,
    hypothesis: &VariableId,
    trial: &TrialRecord,
) -> Result<Posterior> {
    trial.check(hypothesis)?;
    check_hypothesis_first(tree, hypothesis, &trial.touched().collect())?;
    let world = tree.intervene_many(&trial.interventions)?;
    conditioned_posterior(&world, hypothesis, &trial.observation)
}

fn conditioned_posterior(
    tree: &ProbabilityTree,
    hypothesis: &VariableId,
    observation: &Event,
) -> Result<Posterior> {
    if tree.event_probability(observation)?.is_zero() {
        return Err(Error::ZeroProbabilityObservation);
    }
    let weights = tree
        .registry()
        .domain(hypothesis)?
        .iter()
        .map(|v| {
            let q = ConditionalQuery::new(
                Event::of(hypothesis.clone(), v.clone()),
                observation.clone(),
            )?;
            Ok((v.clone(), tree.conditional_probability(&q)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Posterior::new(hypothesis.clone(), weights)
}

/// `P(observation | hypothesis = value, do(interventions))`: condition on the
/// hypothesis, then intervene, then evaluate the observation.
pub fn likelihood(
    template: &ProbabilityTree,
    hypothesis: &VariableId,
    value: &ValueId,
    trial: &TrialRecord,
) -> Result<Rational> {
    template
        .condition(&Event::of(hypothesis.clone(), value.clone()))?
        .intervene_many(&trial.interventions)?
        .event_probability(&trial.observation)
}

/// Posterior trajectory over independent repetitions of the template
/// experiment. Entry 0 is `prior`; entry `t` follows trial `t`.
pub fn sequential_posterior(
    template: &ProbabilityTree,
    hypothesis: &VariableId,
    trials: &[TrialRecord],
    prior: &Posterior,
) -> Result<Vec<Posterior>> {
    if prior.hypothesis() != hypothesis {
        return Err(Error::InvalidPosterior(format!(
            "prior is over {}, not {hypothesis}",
            prior.hypothesis()
        )));
    }
    let domain = template.registry().domain(hypothesis)?;
    for (v, _) in prior.weights() {
        template.registry().check(hypothesis, v)?;
    }
    let mut watched = BTreeSet::new();
    for trial in trials {
        trial.check(hypothesis)?;
        watched.extend(trial.touched());
    }
    check_hypothesis_first(template, hypothesis, &watched)?;

    // Domain order, with values the prior omits at weight zero.
    let mut current: Vec<(ValueId, Rational)> = domain
        .iter()
        .map(|v| {
            (
                v.clone(),
                prior.weight(v).cloned().unwrap_or_else(Rational::zero),
            )
        })
        .collect();
    let mut cache: HashMap<(&TrialRecord, &ValueId), Rational> = HashMap::new();
    let mut trajectory = vec![Posterior::new(hypothesis.clone(), current.clone())?];
    for (t, trial) in trials.iter().enumerate() {
        let mut updated = Vec::with_capacity(current.len());
        for (value, w) in &current {
            let next = if w.is_zero() {
                Rational::zero()
            } else {
                let key = (trial, domain.iter().find(|d| *d == value).unwrap());
                let l = match cache.get(&key) {
                    Some(l) => l.clone(),
                    None => {
                        let l = likelihood(template, hypothesis, value, trial)?;
                        cache.insert(key, l.clone());
                        l
                    }
                };
                w * l
            };
            updated.push((value.clone(), next));
        }
        let total: Rational = updated.iter().map(|(_, w)| w).sum();
        if total.is_zero() {
            return Err(Error::ZeroTotalMass { trial: t + 1 });
        }
        current = updated.into_iter().map(|(v, w)| (v, w / &total)).collect();
        trajectory.push(Posterior::new(hypothesis.clone(), current.clone())?);
    }
    Ok(trajectory)
}

fn trial_suffix(t: usize) -> String {
    format!("#{t}")
}

fn rename(node: &Node, suffix: &str, tail: &Node) -> Node {
    match node {
        Node::Leaf => tail.clone(),
        Node::Internal { variable, branches } => Node::internal(
            VariableId::new(format!("{variable}{suffix}")),
            branches
                .iter()
                .map(|b| {
                    Branch::new(
                        b.value.clone(),
                        b.prob.clone(),
                        rename(&b.child, suffix, tail),
                    )
                })
                .collect(),
        ),
    }
}

/// Brute-force posterior: one tree with the hypothesis at the root and, under
/// each hypothesis value, `trials.len()` renamed copies of that value's
/// subtree chained leaf to root. Variables of copy `t` carry the suffix `#t`.
pub fn replicated_tree_posterior(
    template: &ProbabilityTree,
    hypothesis: &VariableId,
    trials: &[TrialRecord],
) -> Result<Posterior> {
    let Node::Internal { variable, branches } = template.root() else {
        return Err(Error::HypothesisNotAtRoot(hypothesis.clone()));
    };
    if variable != hypothesis {
        return Err(Error::HypothesisNotAtRoot(hypothesis.clone()));
    }
    for trial in trials {
        trial.check(hypothesis)?;
    }
    let n = trials.len() as u32;
    let leaves: BigUint = branches
        .iter()
        .map(|b| BigUint::from(b.child.leaf_count()).pow(n))
        .sum();
    if leaves > BigUint::from(REPLICATION_LEAF_LIMIT) {
        return Err(Error::SizeGuardExceeded {
            leaves: leaves.to_string(),
            limit: REPLICATION_LEAF_LIMIT,
        });
    }

    let root = Node::internal(
        hypothesis.clone(),
        branches
            .iter()
            .map(|b| {
                let chain = (1..=trials.len()).rev().fold(Node::Leaf, |tail, t| {
                    rename(&b.child, &trial_suffix(t), &tail)
                });
                Branch::new(b.value.clone(), b.prob.clone(), chain)
            })
            .collect(),
    );
    let big = ProbabilityTree::unchecked(root);

    let mut forced = Vec::new();
    let mut observed = Event::sure();
    for (i, trial) in trials.iter().enumerate() {
        let suffix = trial_suffix(i + 1);
        forced.extend(
            trial
                .interventions
                .iter()
                .map(|s| InterventionSpec::new(format!("{}{suffix}", s.variable), s.value.clone())),
        );
        observed = observed.conjoin(&trial.observation.suffixed(&suffix))?;
    }
    let world = big.intervene_many(&forced)?;
    conditioned_posterior(&world, hypothesis, &observed)
}
