//! Grafting sub-trees under hypothesis branches, and the two-device model.
//!
//! The two-device model puts a lights device (`X`, `Y`) and a spinners device
//! (`U`, `V`) under one hypothesis variable `H`. Under `h` the green element
//! drives the red one on both devices (`X` before `Y`, `U` before `V`); under
//! `~h` the order flips on both. Evidence about the lights therefore moves
//! belief about the spinners.
//!
//! The unconstrained variant gives each device its own ordering, for four
//! hypotheses in total. There, lights evidence leaves the spinner ordering at
//! its prior.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, is_probability, Rational};
use crate::tree::{Branch, Node, ProbabilityTree, Step, ValueId, VariableId};

/// Appends `subtree` at every leaf whose path assigns `selector`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraftSpec {
    pub selector: (VariableId, ValueId),
    pub subtree: Node,
}

impl GraftSpec {
    pub fn new(variable: impl Into<VariableId>, value: impl Into<ValueId>, subtree: Node) -> Self {
        Self {
            selector: (variable.into(), value.into()),
            subtree,
        }
    }
}

fn subtree_variables(node: &Node, out: &mut Vec<VariableId>) {
    if let Node::Internal { variable, branches } = node {
        if !out.contains(variable) {
            out.push(variable.clone());
        }
        for b in branches {
            subtree_variables(&b.child, out);
        }
    }
}

impl ProbabilityTree {
    /// Applies each graft in order. Probabilities of events over the original
    /// variables are unchanged.
    pub fn graft(&self, specs: &[GraftSpec]) -> Result<ProbabilityTree> {
        let mut tree = self.clone();
        for spec in specs {
            tree = tree.graft_one(spec)?;
        }
        Ok(tree)
    }

    fn graft_one(&self, spec: &GraftSpec) -> Result<ProbabilityTree> {
        let (var, val) = &spec.selector;
        self.registry().check(var, val)?;
        ProbabilityTree::unchecked(spec.subtree.clone()).ensure_valid()?;
        let unresolved = self
            .enumerate_leaves()
            .iter()
            .any(|l| !l.prob.is_zero() && l.value_of(var).is_none());
        if unresolved {
            return Err(Error::SelectorUnresolved(var.clone()));
        }
        let mut introduced = Vec::new();
        subtree_variables(&spec.subtree, &mut introduced);

        let root = self
            .root()
            .map_leaves(&mut Vec::new(), &mut |path: &[Step]| {
                if !path.iter().any(|(v, w)| v == var && w == val) {
                    return Ok(Node::Leaf);
                }
                if let Some((v, _)) = path.iter().find(|(v, _)| introduced.contains(v)) {
                    return Err(Error::OverlappingVariables(v.clone()));
                }
                Ok(spec.subtree.clone())
            })?;
        ProbabilityTree::new(root)
    }
}

/// A two-variable mechanism: the cause resolves first, the effect follows.
/// Both variables are binary; probabilities refer to each one's first value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauseEffect {
    /// P(cause = first value).
    pub cause: Rational,
    /// P(effect = first value | cause = first value).
    pub effect_if_first: Rational,
    /// P(effect = first value | cause = second value).
    pub effect_if_second: Rational,
}

impl CauseEffect {
    /// Cause is a fair coin; effect agrees with it with probability `agree`.
    pub fn agreeing(agree: Rational) -> Self {
        Self {
            cause: Rational::new(1.into(), 2.into()),
            effect_if_second: Rational::one() - &agree,
            effect_if_first: agree,
        }
    }

    fn check(&self, what: &str) -> Result<()> {
        for p in [&self.cause, &self.effect_if_first, &self.effect_if_second] {
            if !is_probability(p) {
                return Err(Error::InvalidDistribution(format!(
                    "{what}: {} is not a probability",
                    format_rational(p)
                )));
            }
        }
        Ok(())
    }

    /// `(cause (c1 p (effect ...)) (c2 1-p (effect ...)))`.
    fn build(&self, cause: (&str, [&str; 2]), effect: (&str, [&str; 2])) -> Node {
        let binary = |var: &str, [a, b]: [&str; 2], p: &Rational, child: &dyn Fn(usize) -> Node| {
            Node::internal(
                var,
                vec![
                    Branch::new(a, p.clone(), child(0)),
                    Branch::new(b, Rational::one() - p, child(1)),
                ],
            )
        };
        binary(cause.0, cause.1, &self.cause, &|i| {
            let p = if i == 0 {
                &self.effect_if_first
            } else {
                &self.effect_if_second
            };
            binary(effect.0, effect.1, p, &|_| Node::Leaf)
        })
    }
}

/// Mechanisms under each causal direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedMechanisms {
    /// green drives red: X before Y, U before V.
    pub forward: CauseEffect,
    /// red drives green: Y before X, V before U.
    pub backward: CauseEffect,
}

impl DirectedMechanisms {
    pub fn symmetric(m: CauseEffect) -> Self {
        Self {
            forward: m.clone(),
            backward: m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviceParams {
    /// Prior on `H = h`. The unconstrained variant uses it independently for
    /// each device's direction.
    pub prior: Rational,
    pub lights: DirectedMechanisms,
    pub spinners: DirectedMechanisms,
}

impl Default for DeviceParams {
    /// Fair prior; both devices use a fair cause that the effect copies with
    /// probability 3/4, in either direction.
    fn default() -> Self {
        let m = CauseEffect::agreeing(Rational::new(3.into(), 4.into()));
        Self {
            prior: Rational::new(1.into(), 2.into()),
            lights: DirectedMechanisms::symmetric(m.clone()),
            spinners: DirectedMechanisms::symmetric(m),
        }
    }
}

impl DeviceParams {
    fn check(&self) -> Result<()> {
        if !is_probability(&self.prior) {
            return Err(Error::InvalidDistribution(format!(
                "prior {} is not a probability",
                format_rational(&self.prior)
            )));
        }
        self.lights.forward.check("lights forward")?;
        self.lights.backward.check("lights backward")?;
        self.spinners.forward.check("spinners forward")?;
        self.spinners.backward.check("spinners backward")
    }
}

pub const X_VALUES: [&str; 2] = ["x", "~x"];
pub const Y_VALUES: [&str; 2] = ["y", "~y"];
pub const SPINNER_VALUES: [&str; 2] = ["horizontal", "vertical"];

/// Hypothesis values of the unconstrained tree, named `<lights><spinners>`
/// with `f` for forward and `b` for backward.
pub const UNCONSTRAINED_HYPOTHESES: [&str; 4] = ["ff", "fb", "bf", "bb"];

fn lights(m: &DirectedMechanisms, forward: bool) -> Node {
    if forward {
        m.forward.build(("X", X_VALUES), ("Y", Y_VALUES))
    } else {
        m.backward.build(("Y", Y_VALUES), ("X", X_VALUES))
    }
}

fn spinners(m: &DirectedMechanisms, forward: bool) -> Node {
    if forward {
        m.forward
            .build(("U", SPINNER_VALUES), ("V", SPINNER_VALUES))
    } else {
        m.backward
            .build(("V", SPINNER_VALUES), ("U", SPINNER_VALUES))
    }
}

/// The lights-only tree: `H` at the root, then the lights in the order the
/// hypothesis dictates.
pub fn build_lights_tree(params: &DeviceParams) -> Result<ProbabilityTree> {
    params.check()?;
    ProbabilityTree::new(Node::internal(
        "H",
        vec![
            Branch::new("h", params.prior.clone(), lights(&params.lights, true)),
            Branch::new(
                "~h",
                Rational::one() - &params.prior,
                lights(&params.lights, false),
            ),
        ],
    ))
}

/// Lights tree with spinner sub-trees grafted under each hypothesis: `U`
/// before `V` under `h`, `V` before `U` under `~h`.
pub fn build_two_device_tree(params: &DeviceParams) -> Result<ProbabilityTree> {
    build_lights_tree(params)?.graft(&[
        GraftSpec::new("H", "h", spinners(&params.spinners, true)),
        GraftSpec::new("H", "~h", spinners(&params.spinners, false)),
    ])
}

/// Four hypotheses, one per combination of lights and spinner directions,
/// with independent priors.
pub fn build_unconstrained_device_tree(params: &DeviceParams) -> Result<ProbabilityTree> {
    params.check()?;
    let p = &params.prior;
    let q = Rational::one() - p;
    let combos = [
        (true, true, p * p),
        (true, false, p * &q),
        (false, true, &q * p),
        (false, false, &q * &q),
    ];
    let branches = UNCONSTRAINED_HYPOTHESES
        .iter()
        .zip(combos)
        .map(|(name, (l, s, prior))| {
            let sub = spinners(&params.spinners, s);
            let node = lights(&params.lights, l)
                .map_leaves(&mut Vec::new(), &mut |_| Ok(sub.clone()))
                .expect("infallible");
            Branch::new(*name, prior, node)
        })
        .collect();
    ProbabilityTree::new(Node::internal("H", branches))
}

/// Hypothesis values under which `U` precedes `V` in the unconstrained tree.
pub fn unconstrained_spinner_forward() -> [ValueId; 2] {
    [ValueId::new("ff"), ValueId::new("bf")]
}
