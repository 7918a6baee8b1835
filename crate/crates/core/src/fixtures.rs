//! The two-lights device: a green light `X`, a red light `Y`, and the
//! hypothesis `H` (`h`: green drives red, `~h`: red drives green). The two
//! hypotheses produce the same joint distribution over the lights.

use crate::dsl::parse;
use crate::tree::ProbabilityTree;

pub const TWO_LIGHTS: &str = include_str!("../data/two_lights.ptree");

/// [`TWO_LIGHTS`] with the green light switched on by hand.
pub const TWO_LIGHTS_INTERVENED: &str = include_str!("../data/two_lights_forced_x.ptree");

pub fn two_lights_tree() -> ProbabilityTree {
    parse(TWO_LIGHTS).expect("bundled document is valid")
}

pub fn two_lights_intervened_tree() -> ProbabilityTree {
    parse(TWO_LIGHTS_INTERVENED).expect("bundled document is valid")
}
