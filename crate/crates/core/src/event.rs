//! Events: partial assignments of variables to values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::{Node, ProbabilityTree, Step, ValueId, VariableId};

/// A conjunction of `variable = value` literals. The empty event is the sure
/// event.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Event {
    literals: BTreeMap<VariableId, ValueId>,
}

impl Event {
    pub fn sure() -> Self {
        Self::default()
    }

    /// Builds an event, rejecting a variable that appears twice.
    pub fn from_pairs<V, W>(pairs: impl IntoIterator<Item = (V, W)>) -> Result<Self>
    where
        V: Into<VariableId>,
        W: Into<ValueId>,
    {
        let mut ev = Event::sure();
        for (var, val) in pairs {
            let var = var.into();
            if ev.literals.contains_key(&var) {
                return Err(Error::DuplicateVariable(var));
            }
            ev.literals.insert(var, val.into());
        }
        Ok(ev)
    }

    /// Single-literal event.
    pub fn of(var: impl Into<VariableId>, val: impl Into<ValueId>) -> Self {
        let mut ev = Event::sure();
        ev.literals.insert(var.into(), val.into());
        ev
    }

    pub fn is_sure(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn get(&self, var: &VariableId) -> Option<&ValueId> {
        self.literals.get(var)
    }

    pub fn contains(&self, var: &VariableId) -> bool {
        self.literals.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VariableId, &ValueId)> {
        self.literals.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.literals.keys()
    }

    /// Adds a literal, replacing any previous value for the variable.
    pub fn with(mut self, var: impl Into<VariableId>, val: impl Into<ValueId>) -> Self {
        self.literals.insert(var.into(), val.into());
        self
    }

    /// Conjunction of two events over disjoint variables.
    pub fn conjoin(&self, other: &Event) -> Result<Event> {
        let mut out = self.clone();
        for (var, val) in other.iter() {
            if out.literals.contains_key(var) {
                return Err(Error::OverlappingVariables(var.clone()));
            }
            out.literals.insert(var.clone(), val.clone());
        }
        Ok(out)
    }

    /// The literals of `self` whose variable is in `keep`.
    pub fn restrict<'a>(&self, keep: impl IntoIterator<Item = &'a VariableId>) -> Event {
        let mut out = Event::sure();
        for var in keep {
            if let Some(val) = self.literals.get(var) {
                out.literals.insert(var.clone(), val.clone());
            }
        }
        out
    }

    /// Renames every variable by appending `suffix`.
    pub(crate) fn suffixed(&self, suffix: &str) -> Event {
        Event {
            literals: self
                .literals
                .iter()
                .map(|(k, v)| (VariableId::new(format!("{k}{suffix}")), v.clone()))
                .collect(),
        }
    }

    /// True if the path assigns every literal of the event.
    pub fn matches(&self, path: &[Step]) -> bool {
        self.literals
            .iter()
            .all(|(var, val)| path.iter().any(|(v, w)| v == var && w == val))
    }

    /// Errors on variables or values the tree does not know.
    pub fn check(&self, tree: &ProbabilityTree) -> Result<()> {
        self.literals
            .iter()
            .try_for_each(|(var, val)| tree.registry().check(var, val))
    }
}

impl fmt::Display for Event {
    /// `X=x,Y=~y`; the sure event renders as the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (var, val) in &self.literals {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{var}={val}")?;
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '~')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '~')
}

/// Parses one `VAR=VAL` literal.
pub(crate) fn parse_literal(text: &str) -> Result<(VariableId, ValueId)> {
    let bad = || Error::InvalidLiteral(text.to_string());
    let (var, val) = text.split_once('=').ok_or_else(bad)?;
    let (var, val) = (var.trim(), val.trim());
    if !is_ident(var) || !is_ident(val) {
        return Err(bad());
    }
    Ok((VariableId::new(var), ValueId::new(val)))
}

impl FromStr for Event {
    type Err = Error;

    /// Comma-separated `VAR=VAL` pairs. Blank text is the sure event.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(Event::sure());
        }
        Event::from_pairs(
            s.split(',')
                .map(parse_literal)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// Probability mass of the paths below `node` that assign every literal of
/// `event`, given that `matched` literals were already assigned above it.
pub(crate) fn mass_below(node: &Node, event: &Event, matched: usize) -> Rational {
    match node {
        Node::Leaf => {
            if matched == event.len() {
                Rational::one()
            } else {
                Rational::zero()
            }
        }
        Node::Internal { variable, branches } => match event.get(variable) {
            Some(wanted) => branches
                .iter()
                .find(|b| &b.value == wanted && !b.prob.is_zero())
                .map(|b| &b.prob * mass_below(&b.child, event, matched + 1))
                .unwrap_or_else(Rational::zero),
            None => branches
                .iter()
                .filter(|b| !b.prob.is_zero())
                .map(|b| &b.prob * mass_below(&b.child, event, matched))
                .sum(),
        },
    }
}

impl ProbabilityTree {
    /// Total probability of the paths assigning every literal of `event`.
    ///
    /// A path that never resolves a variable mentioned by the event does not
    /// match it.
    pub fn event_probability(&self, event: &Event) -> Result<Rational> {
        event.check(self)?;
        Ok(mass_below(self.root(), event, 0))
    }
}
