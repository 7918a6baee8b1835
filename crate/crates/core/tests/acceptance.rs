//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use causal_tree::dsl::parse;
use causal_tree::extrapolation::{
    build_two_device_tree, build_unconstrained_device_tree, unconstrained_spinner_forward,
    CauseEffect, DeviceParams, DirectedMechanisms,
};
use causal_tree::fixtures::{two_lights_tree, TWO_LIGHTS, TWO_LIGHTS_INTERVENED};
use causal_tree::inference::{
    posterior, replicated_tree_posterior, sequential_posterior, Posterior, TrialRecord,
};
use causal_tree::rational::{format_rational, parse_rational, ratio, to_f64};
use causal_tree::simulator::{run_experiment, sample, ExperimentPlan};
use causal_tree::{
    ConditionalQuery, Event, InterventionSpec, ProbabilityTree, Rational, ValueId, VariableId,
};
use common::props;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Suite = (&'static str, fn(u64) -> props::Check);

const SEED: u64 = 42;
const GOLDEN: &str = include_str!("golden/convergence_seed42.txt");

fn h() -> VariableId {
    VariableId::new("H")
}

fn ev(s: &str) -> Event {
    s.parse().unwrap()
}

fn do_x_see(y: &str) -> TrialRecord {
    TrialRecord::new(vec![InterventionSpec::new("X", "x")], Event::of("Y", y))
}

fn fractions(ns: &[i64], den: i64) -> Vec<Rational> {
    ns.iter().map(|&n| ratio(n, den)).collect()
}

fn leaf_probs(t: &ProbabilityTree) -> Vec<Rational> {
    t.enumerate_leaves().into_iter().map(|l| l.prob).collect()
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lights_reproduction() -> Outcome {
    let t = parse(TWO_LIGHTS).map_err(|e| e.to_string())?;
    let got = leaf_probs(&t);
    let want = fractions(&[3, 1, 1, 3, 3, 1, 1, 3], 16);
    check(got == want, format!("leaves {got:?}"))?;
    Ok("leaves 3/16 1/16 1/16 3/16 3/16 1/16 1/16 3/16".into())
}

fn observational_null() -> Outcome {
    let t = two_lights_tree();
    let q = ConditionalQuery::new(ev("H=h"), ev("X=x,Y=y")).unwrap();
    let p = t.conditional_probability(&q).unwrap();
    check(p == ratio(1, 2), format!("P(h|x,y) = {p}"))?;
    let prior = Posterior::uniform(&t, &h()).unwrap();
    for x in ["x", "~x"] {
        for y in ["y", "~y"] {
            let obs = Event::of("X", x).with("Y", y);
            let post = posterior(&t, &h(), &TrialRecord::observe(obs.clone())).unwrap();
            check(post == prior, format!("posterior after {obs} is {post}"))?;
        }
    }
    Ok("P(h|x,y) = 1/2; all 4 observations leave the prior".into())
}

fn intervention_transform() -> Outcome {
    let forced = two_lights_tree()
        .intervene(&InterventionSpec::new("X", "x"))
        .unwrap();
    let reference = parse(TWO_LIGHTS_INTERVENED).unwrap();
    check(
        forced == reference,
        "intervened tree differs from the hand-written one",
    )?;
    let got = leaf_probs(&forced);
    let want = fractions(&[3, 1, 0, 0, 2, 0, 2, 0], 8);
    check(got == want, format!("leaves {got:?}"))?;
    Ok("node-for-node equal; leaves 3/8 1/8 0 0 1/4 0 1/4 0".into())
}

fn interventional_posterior() -> Outcome {
    let post = posterior(&two_lights_tree(), &h(), &do_x_see("y")).unwrap();
    let want = Posterior::new(
        "H",
        vec![("h".into(), ratio(3, 5)), ("~h".into(), ratio(2, 5))],
    )
    .unwrap();
    check(post == want, format!("got {post}"))?;
    Ok(format!("{post}"))
}

fn extrapolation_invariance() -> Outcome {
    let det = CauseEffect {
        cause: ratio(1, 1),
        effect_if_first: ratio(1, 1),
        effect_if_second: ratio(0, 1),
    };
    let skewed = DirectedMechanisms {
        forward: CauseEffect {
            cause: ratio(1, 5),
            effect_if_first: ratio(2, 3),
            effect_if_second: ratio(1, 7),
        },
        backward: CauseEffect {
            cause: ratio(9, 10),
            effect_if_first: ratio(0, 1),
            effect_if_second: ratio(1, 2),
        },
    };
    let variants = [
        ("default", DeviceParams::default()),
        (
            "deterministic",
            DeviceParams {
                spinners: DirectedMechanisms::symmetric(det),
                ..DeviceParams::default()
            },
        ),
        (
            "skewed",
            DeviceParams {
                spinners: skewed,
                ..DeviceParams::default()
            },
        ),
    ];
    for (name, params) in &variants {
        let t = build_two_device_tree(params).unwrap();
        let post = posterior(&t, &h(), &do_x_see("y")).unwrap();
        let w = post.weight(&"h".into()).cloned();
        check(
            w == Some(ratio(3, 5)),
            format!("{name}: P(h|do x, y) = {post}"),
        )?;
    }
    Ok(format!(
        "P(h|do x, y) = 3/5 under {} spinner parameterizations",
        variants.len()
    ))
}

fn oracle_equivalence() -> Outcome {
    let t = two_lights_tree();
    let prior = Posterior::uniform(&t, &h()).unwrap();
    let mut kinds = vec![do_x_see("y"), do_x_see("~y")];
    for x in ["x", "~x"] {
        for y in ["y", "~y"] {
            kinds.push(TrialRecord::observe(Event::of("X", x).with("Y", y)));
        }
    }
    // every sequence of length <= 4 over the six trial kinds
    let mut sequences: Vec<Vec<TrialRecord>> = vec![vec![]];
    let mut frontier: Vec<Vec<TrialRecord>> = vec![vec![]];
    for _ in 0..4 {
        frontier = frontier
            .iter()
            .flat_map(|s| {
                kinds.iter().map(move |k| {
                    let mut s = s.clone();
                    s.push(k.clone());
                    s
                })
            })
            .collect();
        sequences.extend(frontier.iter().cloned());
    }
    for s in &sequences {
        let seq = sequential_posterior(&t, &h(), s, &prior).unwrap();
        let oracle = replicated_tree_posterior(&t, &h(), s).unwrap();
        check(seq.last() == Some(&oracle), format!("mismatch on {s:?}"))?;
    }
    Ok(format!("{} sequences, exact agreement", sequences.len()))
}

fn golden_value(key: &str) -> String {
    GOLDEN
        .lines()
        .find_map(|l| {
            l.strip_prefix(key)?
                .trim_start()
                .strip_prefix('=')
                .map(str::trim)
        })
        .unwrap_or_else(|| panic!("golden file lacks {key}"))
        .to_string()
}

fn campaign(tree: ProbabilityTree, true_value: &str) -> ExperimentPlan {
    ExperimentPlan {
        tree,
        hypothesis: h(),
        true_value: true_value.into(),
        policy: vec![InterventionSpec::new("X", "x")],
        observe: vec!["Y".into()],
        trials: 200,
        seed: SEED,
    }
}

fn convergence() -> Outcome {
    let out = run_experiment(&campaign(two_lights_tree(), "h")).unwrap();
    let w = out.final_posterior().weight(&"h".into()).unwrap().clone();
    check(w > ratio(99, 100), format!("final P(h) = {}", to_f64(&w)))?;
    let golden = parse_rational(&golden_value("h")).unwrap();
    check(
        w == golden,
        format!("final P(h) = {} differs from golden", format_rational(&w)),
    )?;
    let ys = out
        .trials
        .iter()
        .filter(|t| t.observation.get(&"Y".into()).is_some_and(|v| v == "y"))
        .count();
    check(
        ys.to_string() == golden_value("y_count"),
        format!("{ys} y observations"),
    )?;
    Ok(format!(
        "seed {SEED}: final P(h) = {:.15} matches golden",
        to_f64(&w)
    ))
}

fn constraint_contrast() -> Outcome {
    let params = DeviceParams::default();
    let constrained =
        run_experiment(&campaign(build_two_device_tree(&params).unwrap(), "h")).unwrap();
    let forward_h = constrained
        .final_posterior()
        .weight(&"h".into())
        .unwrap()
        .clone();
    check(
        forward_h > ratio(99, 100),
        format!("constrained P(U->V) = {}", to_f64(&forward_h)),
    )?;

    let unconstrained = run_experiment(&campaign(
        build_unconstrained_device_tree(&params).unwrap(),
        "ff",
    ))
    .unwrap();
    let forward: [ValueId; 2] = unconstrained_spinner_forward();
    let prior_mass = unconstrained.trajectory[0].mass_of(&forward);
    check(
        prior_mass == ratio(1, 2),
        format!("prior spinner mass {prior_mass}"),
    )?;
    for (t, post) in unconstrained.trajectory.iter().enumerate() {
        let m = post.mass_of(&forward);
        check(
            m == prior_mass,
            format!("spinner ordering moved to {m} after trial {t}"),
        )?;
    }
    let lights_forward = unconstrained
        .final_posterior()
        .mass_of(&[ValueId::new("ff"), ValueId::new("fb")]);
    Ok(format!(
        "constrained P(U->V) = {:.6}; unconstrained stays 1/2 (lights forward {:.6})",
        to_f64(&forward_h),
        to_f64(&lights_forward)
    ))
}

const PROPERTY_CASES: u32 = 1000;

fn property_suites() -> Outcome {
    let suites: [Suite; 5] = [
        ("normalization", props::normalization),
        ("intervention algebra", props::intervention_algebra),
        ("graft invariance", props::graft_invariance),
        ("Bayes identity", props::bayes_identity),
        ("DSL round trip", props::dsl_round_trip),
    ];
    for (name, f) in suites {
        let mut runner = TestRunner::new(Config {
            cases: PROPERTY_CASES,
            failure_persistence: None,
            ..Config::default()
        });
        runner
            .run(&any::<u64>(), |seed| f(seed).map_err(TestCaseError::fail))
            .map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("5 suites x {PROPERTY_CASES} cases"))
}

fn sampler_statistics() -> Outcome {
    const N: usize = 100_000;
    let t = two_lights_tree();
    let draws = sample(&t, SEED, N).unwrap();
    let mut worst = 0.0f64;
    for leaf in t.enumerate_leaves() {
        let count = draws.iter().filter(|r| r.steps == leaf.steps).count();
        let p = to_f64(&leaf.prob);
        let sigma = (p * (1.0 - p) / N as f64).sqrt();
        let z = (count as f64 / N as f64 - p).abs() / sigma;
        worst = worst.max(z);
        check(
            z <= 3.0,
            format!("leaf {:?} off by {z:.2} sigma", leaf.steps),
        )?;
    }
    Ok(format!("{N} draws, worst deviation {worst:.2} sigma"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 two-lights tree reproduction", lights_reproduction),
        ("AC2 observational null result", observational_null),
        ("AC3 intervention transform", intervention_transform),
        ("AC4 interventional posterior", interventional_posterior),
        ("AC5 extrapolation invariance", extrapolation_invariance),
        ("AC6 oracle equivalence", oracle_equivalence),
        ("AC7 convergence at desk scale", convergence),
        ("AC8 constraint contrast", constraint_contrast),
        ("AC9 property suites", property_suites),
        ("AC10 sampler statistics", sampler_statistics),
    ];
    let mut failed = 0;
    for &(name, run) in &criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
