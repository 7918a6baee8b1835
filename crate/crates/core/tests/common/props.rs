//! Randomized invariant checks, each driven by a single seed.

use causal_tree::dsl::{parse, serialize};
use causal_tree::{
    ConditionalQuery, Error, Event, GraftSpec, InterventionSpec, ProbabilityTree, Rational,
};
use num::{One, Zero};

use super::{enumerate_event, Gen};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn normalization(seed: u64) -> Check {
    let t = Gen::new(seed).tree();
    let sum: Rational = t.enumerate_leaves().into_iter().map(|l| l.prob).sum();
    ensure!(sum.is_one(), "leaf sum {sum} for\n{}", serialize(&t));
    ensure!(
        t.event_probability(&Event::sure()).unwrap().is_one(),
        "P(sure) != 1"
    );
    Ok(())
}

fn random_spec(
    g: &mut Gen,
    t: &ProbabilityTree,
    skip: Option<&InterventionSpec>,
) -> Option<InterventionSpec> {
    let vars: Vec<_> = t
        .registry()
        .variables()
        .iter()
        .filter(|v| skip.is_none_or(|s| s.variable != v.id))
        .collect();
    if vars.is_empty() {
        return None;
    }
    let var = *g.pick(&vars);
    Some(InterventionSpec::new(
        var.id.clone(),
        g.pick(&var.domain).clone(),
    ))
}

pub fn intervention_algebra(seed: u64) -> Check {
    let mut g = Gen::new(seed);
    let t = g.tree();
    let Some(a) = random_spec(&mut g, &t, None) else {
        return Ok(());
    };
    let once = t.intervene(&a).unwrap();
    ensure!(once.validate().is_empty(), "intervened tree invalid");
    ensure!(
        once.intervene(&a).unwrap() == once,
        "not idempotent for {a}"
    );
    if let Some(b) = random_spec(&mut g, &t, Some(&a)) {
        let ab = once.intervene(&b).unwrap();
        let ba = t.intervene(&b).unwrap().intervene(&a).unwrap();
        ensure!(ab == ba, "{a} and {b} do not commute");
        ensure!(
            t.intervene_many(&[a.clone(), b.clone()]).unwrap() == ab,
            "intervene_many differs from fold"
        );
    }
    Ok(())
}

pub fn graft_invariance(seed: u64) -> Check {
    let mut g = Gen::new(seed);
    let t = g.tree();
    let root_var = t
        .root()
        .variable()
        .expect("generated roots are internal")
        .clone();
    let domain = t.registry().domain(&root_var).unwrap().to_vec();
    let pool = g.pool("W", 3);
    let mut specs = Vec::new();
    for _ in 0..1 + g.below(2) {
        let depth = g.below(4) as usize;
        // a non-empty `used` lets the subtree itself be a leaf
        let sub = g.node(&pool, &mut vec![usize::MAX], depth);
        specs.push(GraftSpec::new(
            root_var.clone(),
            g.pick(&domain).clone(),
            sub,
        ));
    }
    let grafted = match t.graft(&specs) {
        Ok(x) => x,
        // the same W variable grafted twice on one path
        Err(Error::OverlappingVariables(_)) if specs.len() > 1 => return Ok(()),
        Err(e) => return Err(format!("graft failed: {e}")),
    };
    ensure!(grafted.validate().is_empty(), "grafted tree invalid");
    for _ in 0..8 {
        let e = g.event(&t);
        let before = t.event_probability(&e).unwrap();
        let after = grafted.event_probability(&e).unwrap();
        ensure!(before == after, "P({e}) moved from {before} to {after}");
    }
    Ok(())
}

pub fn bayes_identity(seed: u64) -> Check {
    let mut g = Gen::new(seed);
    let t = g.tree();
    let full = g.event(&t);
    let (mut target, mut given) = (Event::sure(), Event::sure());
    for (k, v) in full.iter() {
        if g.chance(1, 2) {
            target = target.with(k.clone(), v.clone());
        } else {
            given = given.with(k.clone(), v.clone());
        }
    }
    let q = ConditionalQuery::new(target.clone(), given.clone()).unwrap();
    let p_given = t.event_probability(&given).unwrap();
    ensure!(
        p_given == enumerate_event(&t, &given),
        "event probability disagrees with enumeration"
    );
    if p_given.is_zero() {
        ensure!(
            matches!(
                t.conditional_probability(&q),
                Err(Error::ZeroProbabilityConditioning)
            ),
            "expected zero-probability conditioning"
        );
        return Ok(());
    }
    let cond = t.conditional_probability(&q).unwrap();
    let joint = t.event_probability(&full).unwrap();
    ensure!(
        &cond * &p_given == joint,
        "P({target}|{given}) * P({given}) != P(joint)"
    );
    let conditioned = t.condition(&given).unwrap();
    ensure!(
        conditioned.validate().is_empty(),
        "conditioned tree invalid"
    );
    ensure!(
        conditioned.event_probability(&target).unwrap() == cond,
        "condition then query differs from conditional probability"
    );
    Ok(())
}

pub fn dsl_round_trip(seed: u64) -> Check {
    let t = Gen::new(seed).tree();
    let text = serialize(&t);
    let back = parse(&text).map_err(|e| format!("{e}\n{text}"))?;
    ensure!(back == t, "round trip changed the tree:\n{text}");
    ensure!(serialize(&back) == text, "serialization not canonical");
    Ok(())
}
