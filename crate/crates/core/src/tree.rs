//! Probability trees: mechanism nodes with exact branch probabilities.
//!
//! A tree is an immutable value. Every internal node resolves one variable and
//! lists every value of that variable's domain as a branch, including branches
//! that carry probability zero. Different branches may resolve variables in
//! different orders; along any single root-to-leaf path a variable is resolved
//! at most once.

use std::fmt;
use std::sync::Arc;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, is_probability, Rational};

macro_rules! symbol {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                Self(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(Arc::from(s))
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                &*self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                &*self.0 == *other
            }
        }
    };
}

symbol!(
    /// Name of a random variable, e.g. `H` or `X`.
    VariableId
);
symbol!(
    /// Name of one outcome of a variable, e.g. `x` or `~x`.
    ValueId
);

/// One `(variable, value)` step along a path.
pub type Step = (VariableId, ValueId);

/// Renders a path as `H=h/X=~x`, or `root` when empty.
pub fn display_path(path: &[Step]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    path.iter()
        .map(|(var, val)| format!("{var}={val}"))
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub value: ValueId,
    pub prob: Rational,
    pub child: Node,
}

impl Branch {
    pub fn new(value: impl Into<ValueId>, prob: Rational, child: Node) -> Self {
        Self {
            value: value.into(),
            prob,
            child,
        }
    }

    pub fn leaf(value: impl Into<ValueId>, prob: Rational) -> Self {
        Self::new(value, prob, Node::Leaf)
    }
}

/// A causal mechanism resolving one variable, or the end of a realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf,
    Internal {
        variable: VariableId,
        branches: Vec<Branch>,
    },
}

impl Node {
    pub fn internal(variable: impl Into<VariableId>, branches: Vec<Branch>) -> Self {
        Node::Internal {
            variable: variable.into(),
            branches,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf)
    }

    pub fn variable(&self) -> Option<&VariableId> {
        match self {
            Node::Leaf => None,
            Node::Internal { variable, .. } => Some(variable),
        }
    }

    pub fn branches(&self) -> &[Branch] {
        match self {
            Node::Leaf => &[],
            Node::Internal { branches, .. } => branches,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .branches()
            .iter()
            .map(|b| b.child.node_count())
            .sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf => 1,
            Node::Internal { branches, .. } => branches.iter().map(|b| b.child.leaf_count()).sum(),
        }
    }

    /// Visits every internal node in depth-first, branch order, with the path
    /// leading to it.
    pub(crate) fn walk<'a>(&'a self, path: &mut Vec<Step>, f: &mut dyn FnMut(&[Step], &'a Node)) {
        f(path, self);
        for b in self.branches() {
            path.push((self.variable().cloned().unwrap(), b.value.clone()));
            b.child.walk(path, f);
            path.pop();
        }
    }

    /// Returns a copy with `f` applied to every leaf, given the path to it.
    pub(crate) fn map_leaves(
        &self,
        path: &mut Vec<Step>,
        f: &mut dyn FnMut(&[Step]) -> Result<Node>,
    ) -> Result<Node> {
        match self {
            Node::Leaf => f(path),
            Node::Internal { variable, branches } => {
                let mut out = Vec::with_capacity(branches.len());
                for b in branches {
                    path.push((variable.clone(), b.value.clone()));
                    let child = b.child.map_leaves(path, f);
                    path.pop();
                    out.push(Branch::new(b.value.clone(), b.prob.clone(), child?));
                }
                Ok(Node::internal(variable.clone(), out))
            }
        }
    }
}

/// A variable and its closed, ordered domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub id: VariableId,
    pub domain: Vec<ValueId>,
}

/// Variables known to a tree, in order of first appearance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    variables: Vec<Variable>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable; repeated declarations extend the domain with any
    /// values not yet present.
    pub fn declare<V: Into<ValueId>>(
        &mut self,
        id: impl Into<VariableId>,
        values: impl IntoIterator<Item = V>,
    ) {
        let id = id.into();
        let idx = match self.variables.iter().position(|v| v.id == id) {
            Some(i) => i,
            None => {
                self.variables.push(Variable {
                    id,
                    domain: Vec::new(),
                });
                self.variables.len() - 1
            }
        };
        let domain = &mut self.variables[idx].domain;
        for v in values {
            let v = v.into();
            if !domain.contains(&v) {
                domain.push(v);
            }
        }
    }

    /// Infers domains as the union of branch values over all nodes resolving
    /// each variable.
    pub fn infer(root: &Node) -> Self {
        let mut reg = Registry::new();
        root.walk(&mut Vec::new(), &mut |_, node| {
            if let Node::Internal { variable, branches } = node {
                reg.declare(variable.clone(), branches.iter().map(|b| b.value.clone()));
            }
        });
        reg
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn get(&self, id: &VariableId) -> Option<&Variable> {
        self.variables.iter().find(|v| &v.id == id)
    }

    pub fn contains(&self, id: &VariableId) -> bool {
        self.get(id).is_some()
    }

    pub fn domain(&self, id: &VariableId) -> Result<&[ValueId]> {
        self.get(id)
            .map(|v| v.domain.as_slice())
            .ok_or_else(|| Error::UnknownVariable(id.clone()))
    }

    /// Errors unless `value` belongs to the domain of `var`.
    pub fn check(&self, var: &VariableId, value: &ValueId) -> Result<()> {
        if self.domain(var)?.contains(value) {
            Ok(())
        } else {
            Err(Error::UnknownValue {
                variable: var.clone(),
                value: value.clone(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Branch probabilities do not sum to one.
    NotNormalized {
        sum: Rational,
    },
    ProbabilityOutOfRange {
        value: ValueId,
        prob: Rational,
    },
    DuplicateBranch {
        value: ValueId,
    },
    /// The node's variable was already resolved higher up on the same path.
    RepeatedVariable,
    UnknownVariable,
    UnknownValue {
        value: ValueId,
    },
    /// A domain value has no branch at this node.
    MissingValue {
        value: ValueId,
    },
    NoBranches,
}

/// A broken structural invariant, located by the path to the offending node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: Vec<Step>,
    pub variable: VariableId,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node resolving {} at {}: ",
            self.variable,
            display_path(&self.path)
        )?;
        match &self.kind {
            ViolationKind::NotNormalized { sum } => {
                write!(
                    f,
                    "branch probabilities sum to {}, not 1",
                    format_rational(sum)
                )
            }
            ViolationKind::ProbabilityOutOfRange { value, prob } => write!(
                f,
                "branch {value} has probability {} outside [0, 1]",
                format_rational(prob)
            ),
            ViolationKind::DuplicateBranch { value } => write!(f, "duplicate branch {value}"),
            ViolationKind::RepeatedVariable => {
                write!(f, "variable already resolved on this path")
            }
            ViolationKind::UnknownVariable => write!(f, "variable not in registry"),
            ViolationKind::UnknownValue { value } => {
                write!(f, "value {value} not in the variable's domain")
            }
            ViolationKind::MissingValue { value } => {
                write!(f, "domain value {value} has no branch")
            }
            ViolationKind::NoBranches => write!(f, "internal node without branches"),
        }
    }
}

/// One root-to-leaf path with its probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafPath {
    pub steps: Vec<Step>,
    pub prob: Rational,
}

impl LeafPath {
    pub fn value_of(&self, var: &VariableId) -> Option<&ValueId> {
        self.steps
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, val)| val)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilityTree {
    registry: Registry,
    root: Node,
}

impl ProbabilityTree {
    /// Builds a tree with inferred domains and rejects it unless it is valid.
    pub fn new(root: Node) -> Result<Self> {
        let tree = Self::unchecked(root);
        tree.ensure_valid()?;
        Ok(tree)
    }

    /// Builds a tree with inferred domains without validating it.
    pub fn unchecked(root: Node) -> Self {
        Self {
            registry: Registry::infer(&root),
            root,
        }
    }

    /// Builds a tree against explicitly declared domains, without validating.
    pub fn with_registry(registry: Registry, root: Node) -> Self {
        Self { registry, root }
    }

    /// The experiment with no variables.
    pub fn leaf() -> Self {
        Self::unchecked(Node::Leaf)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTree(violations))
        }
    }

    /// Lists every structural violation; empty iff the tree is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.root.walk(&mut Vec::new(), &mut |path, node| {
            let Node::Internal { variable, branches } = node else {
                return;
            };
            let mut report = |kind| {
                out.push(Violation {
                    path: path.to_vec(),
                    variable: variable.clone(),
                    kind,
                })
            };
            if path.iter().any(|(v, _)| v == variable) {
                report(ViolationKind::RepeatedVariable);
            }
            if branches.is_empty() {
                report(ViolationKind::NoBranches);
                return;
            }
            let mut sum = Rational::zero();
            for (i, b) in branches.iter().enumerate() {
                if !is_probability(&b.prob) {
                    report(ViolationKind::ProbabilityOutOfRange {
                        value: b.value.clone(),
                        prob: b.prob.clone(),
                    });
                }
                if branches[..i].iter().any(|o| o.value == b.value) {
                    report(ViolationKind::DuplicateBranch {
                        value: b.value.clone(),
                    });
                }
                sum += &b.prob;
            }
            if !sum.is_one() {
                report(ViolationKind::NotNormalized { sum });
            }
            match self.registry.get(variable) {
                None => report(ViolationKind::UnknownVariable),
                Some(decl) => {
                    for b in branches {
                        if !decl.domain.contains(&b.value) {
                            report(ViolationKind::UnknownValue {
                                value: b.value.clone(),
                            });
                        }
                    }
                    for v in &decl.domain {
                        if !branches.iter().any(|b| &b.value == v) {
                            report(ViolationKind::MissingValue { value: v.clone() });
                        }
                    }
                }
            }
        });
        out
    }

    /// Product of branch probabilities along a root-to-leaf path.
    pub fn path_probability(&self, path: &[Step]) -> Result<Rational> {
        let mut node = &self.root;
        let mut prob = Rational::one();
        for (i, (var, val)) in path.iter().enumerate() {
            let branch = match node {
                Node::Internal { variable, branches } if variable == var => {
                    branches.iter().find(|b| &b.value == val)
                }
                _ => None,
            };
            let Some(branch) = branch else {
                return Err(Error::PathNotFound(display_path(&path[..=i])));
            };
            prob *= &branch.prob;
            node = &branch.child;
        }
        if !node.is_leaf() {
            return Err(Error::PathNotFound(format!(
                "{} does not end at a leaf",
                display_path(path)
            )));
        }
        Ok(prob)
    }

    /// Every root-to-leaf path in depth-first branch order.
    pub fn enumerate_leaves(&self) -> Vec<LeafPath> {
        fn go(node: &Node, steps: &mut Vec<Step>, prob: &Rational, out: &mut Vec<LeafPath>) {
            match node {
                Node::Leaf => out.push(LeafPath {
                    steps: steps.clone(),
                    prob: prob.clone(),
                }),
                Node::Internal { variable, branches } => {
                    for b in branches {
                        steps.push((variable.clone(), b.value.clone()));
                        go(&b.child, steps, &(prob * &b.prob), out);
                        steps.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut Vec::new(), &Rational::one(), &mut out);
        out
    }

    /// True if some node in the tree resolves `var`.
    pub fn resolves(&self, var: &VariableId) -> bool {
        let mut found = false;
        self.root.walk(&mut Vec::new(), &mut |_, node| {
            found |= node.variable() == Some(var);
        });
        found
    }
}
