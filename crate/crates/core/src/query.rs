//! Conditioning and conditional probability.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::rational::Rational;
use crate::tree::{Branch, Node, ProbabilityTree};

/// `P(target | given)` with disjoint variable sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalQuery {
    target: Event,
    given: Event,
}

impl ConditionalQuery {
    pub fn new(target: Event, given: Event) -> Result<Self> {
        if let Some(var) = target.variables().find(|v| given.contains(v)) {
            return Err(Error::OverlappingVariables(var.clone()));
        }
        Ok(Self { target, given })
    }

    pub fn target(&self) -> &Event {
        &self.target
    }

    pub fn given(&self) -> &Event {
        &self.given
    }
}

impl ProbabilityTree {
    pub fn conditional_probability(&self, query: &ConditionalQuery) -> Result<Rational> {
        let given = self.event_probability(&query.given)?;
        if given.is_zero() {
            return Err(Error::ZeroProbabilityConditioning);
        }
        let joint = self.event_probability(&query.target.conjoin(&query.given)?)?;
        Ok(joint / given)
    }

    /// Returns the tree reweighted so that every event's probability equals its
    /// conditional probability given `given`.
    ///
    /// Each node is renormalized by the mass of `given` reachable below each
    /// branch. Branches incompatible with `given` drop to zero; nodes that
    /// become unreachable keep their original distributions.
    pub fn condition(&self, given: &Event) -> Result<ProbabilityTree> {
        given.check(self)?;
        let (mass, root) = condition_node(self.root(), given, 0);
        if mass.is_zero() {
            return Err(Error::ZeroProbabilityConditioning);
        }
        Ok(ProbabilityTree::with_registry(
            self.registry().clone(),
            root,
        ))
    }
}

/// Returns the mass of `given` below `node` and the node reweighted under the
/// assumption that it stays reachable.
fn condition_node(node: &Node, given: &Event, matched: usize) -> (Rational, Node) {
    let Node::Internal { variable, branches } = node else {
        let mass = if matched == given.len() {
            Rational::one()
        } else {
            Rational::zero()
        };
        return (mass, Node::Leaf);
    };
    let wanted = given.get(variable);
    let parts: Vec<(Rational, Node)> = branches
        .iter()
        .map(|b| match wanted {
            Some(w) if w != &b.value => (Rational::zero(), b.child.clone()),
            Some(_) => condition_node(&b.child, given, matched + 1),
            None => condition_node(&b.child, given, matched),
        })
        .collect();
    let mass: Rational = branches
        .iter()
        .zip(&parts)
        .map(|(b, (m, _))| &b.prob * m)
        .sum();
    if mass.is_zero() {
        return (mass, node.clone());
    }
    let out = branches
        .iter()
        .zip(parts)
        .map(|(b, (m, reweighted))| {
            let prob = &b.prob * &m / &mass;
            let child = if prob.is_zero() {
                b.child.clone()
            } else {
                reweighted
            };
            Branch::new(b.value.clone(), prob, child)
        })
        .collect();
    (mass, Node::internal(variable.clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{two_lights_intervened_tree, two_lights_tree};
    use crate::rational::ratio;

    fn q(target: &str, given: &str) -> ConditionalQuery {
        ConditionalQuery::new(target.parse().unwrap(), given.parse().unwrap()).unwrap()
    }

    #[test]
    fn observational_posterior_equals_prior() {
        let t = two_lights_tree();
        assert_eq!(
            t.conditional_probability(&q("H=h", "X=x,Y=y")).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(
            t.conditional_probability(&q("H=h", "")).unwrap(),
            ratio(1, 2)
        );
    }

    #[test]
    fn intervened_tree_favours_h() {
        let t = two_lights_intervened_tree();
        assert_eq!(
            t.conditional_probability(&q("H=h", "Y=y")).unwrap(),
            ratio(3, 5)
        );
    }

    #[test]
    fn query_errors() {
        assert!(matches!(
            ConditionalQuery::new("X=x".parse().unwrap(), "X=~x,Y=y".parse().unwrap()),
            Err(Error::OverlappingVariables(_))
        ));
        let t = two_lights_intervened_tree();
        assert!(matches!(
            t.conditional_probability(&q("H=h", "X=~x")),
            Err(Error::ZeroProbabilityConditioning)
        ));
        assert!(matches!(
            t.condition(&"X=~x".parse().unwrap()),
            Err(Error::ZeroProbabilityConditioning)
        ));
    }

    #[test]
    fn condition_on_root_variable() {
        let t = two_lights_tree();
        let c = t.condition(&Event::of("H", "h")).unwrap();
        let (
            Node::Internal {
                branches: before, ..
            },
            Node::Internal {
                branches: after, ..
            },
        ) = (t.root(), c.root())
        else {
            panic!("expected internal roots");
        };
        assert_eq!(after[0].prob, ratio(1, 1));
        assert_eq!(after[1].prob, ratio(0, 1));
        assert_eq!(after[0].child, before[0].child);
        // the dead branch keeps its original mechanisms
        assert_eq!(after[1].child, before[1].child);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn condition_on_sure_event_is_identity() {
        let t = two_lights_tree();
        assert_eq!(t.condition(&Event::sure()).unwrap(), t);
    }

    #[test]
    fn condition_on_effect_shifts_cause() {
        let t = two_lights_tree();
        let c = t.condition(&Event::of("Y", "y")).unwrap();
        // leaves (h,x,y) and (~h,y,x) give P(x, y) = 3/8
        assert_eq!(
            t.event_probability(&Event::of("Y", "y")).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(
            c.event_probability(&Event::of("X", "x")).unwrap(),
            ratio(3, 4)
        );
        assert!(c.validate().is_empty());
    }
}
