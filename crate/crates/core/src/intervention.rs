//! Interventions as mechanism rewrites.
//!
//! Forcing `X = x` replaces every mechanism that resolves `X` with a point mass
//! on `x`. The tree keeps its shape: sibling branches stay in place with
//! probability zero, and no other node changes.

use std::fmt;
use std::str::FromStr;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::event::parse_literal;
use crate::rational::Rational;
use crate::tree::{Branch, Node, ProbabilityTree, ValueId, VariableId};

/// A forced setting `variable := value`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InterventionSpec {
    pub variable: VariableId,
    pub value: ValueId,
}

impl InterventionSpec {
    pub fn new(variable: impl Into<VariableId>, value: impl Into<ValueId>) -> Self {
        Self {
            variable: variable.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for InterventionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.variable, self.value)
    }
}

impl FromStr for InterventionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (variable, value) = parse_literal(s)?;
        Ok(Self { variable, value })
    }
}

/// Replaces the distribution of every node resolving `var` with `dist`.
/// Values missing from `dist` get probability zero.
fn replace_mechanism(node: &Node, var: &VariableId, dist: &[(ValueId, Rational)]) -> Node {
    match node {
        Node::Leaf => Node::Leaf,
        Node::Internal { variable, branches } => {
            let rewrite = variable == var;
            let branches = branches
                .iter()
                .map(|b| {
                    let prob = if rewrite {
                        dist.iter()
                            .find(|(v, _)| v == &b.value)
                            .map(|(_, p)| p.clone())
                            .unwrap_or_else(Rational::zero)
                    } else {
                        b.prob.clone()
                    };
                    Branch::new(
                        b.value.clone(),
                        prob,
                        replace_mechanism(&b.child, var, dist),
                    )
                })
                .collect();
            Node::internal(variable.clone(), branches)
        }
    }
}

impl ProbabilityTree {
    /// Forces `spec.variable` to `spec.value` at every node resolving it.
    pub fn intervene(&self, spec: &InterventionSpec) -> Result<ProbabilityTree> {
        if !self.resolves(&spec.variable) {
            return Err(Error::VariableNotInTree(spec.variable.clone()));
        }
        self.registry().check(&spec.variable, &spec.value)?;
        let point = [(spec.value.clone(), Rational::one())];
        Ok(ProbabilityTree::with_registry(
            self.registry().clone(),
            replace_mechanism(self.root(), &spec.variable, &point),
        ))
    }

    /// Applies several interventions on distinct variables.
    pub fn intervene_many(&self, specs: &[InterventionSpec]) -> Result<ProbabilityTree> {
        for (i, s) in specs.iter().enumerate() {
            if specs[..i].iter().any(|o| o.variable == s.variable) {
                return Err(Error::DuplicateVariable(s.variable.clone()));
            }
        }
        specs
            .iter()
            .try_fold(self.clone(), |tree, spec| tree.intervene(spec))
    }
}
