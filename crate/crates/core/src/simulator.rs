//! Seeded sampling and simulated intervention campaigns.
//!
//! # Random stream
//!
//! The generator is xoshiro256++ seeded through `seed_from_u64` (SplitMix64
//! expansion of the 64-bit seed), as implemented by the `rand_xoshiro` crate.
//! Both algorithms are fixed and platform independent.
//!
//! Each visited node consumes exactly one `next_u64()` draw `u`. With branch
//! probabilities `p_1..p_k` and cumulative sums `c_i`, the sampler takes the
//! first branch with `u < ceil(c_i * 2^64)`, computed exactly from the
//! rationals. A zero-probability branch is never chosen, and the last
//! positive branch always is when all earlier ones fail, because `c_k = 1`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use num::{BigInt, ToPrimitive};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::inference::{sequential_posterior, Posterior, TrialRecord};
use crate::intervention::InterventionSpec;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::tree::{Node, ProbabilityTree, Step, ValueId, VariableId};

pub type Rng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// One sampled root-to-leaf path, in resolution order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Realization {
    pub steps: Vec<Step>,
}

impl Realization {
    pub fn value_of(&self, var: &VariableId) -> Option<&ValueId> {
        self.steps
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, val)| val)
    }

    pub fn to_event(&self) -> Event {
        Event::from_pairs(self.steps.iter().cloned()).expect("a path resolves each variable once")
    }
}

enum Compiled {
    Leaf,
    Internal {
        variable: VariableId,
        /// `(value, ceil(cumulative * 2^64), child)`
        branches: Vec<(ValueId, u128, Compiled)>,
    },
}

fn compile(node: &Node) -> Compiled {
    match node {
        Node::Leaf => Compiled::Leaf,
        Node::Internal { variable, branches } => {
            let scale = BigInt::from(1u8) << 64;
            let mut cum = Rational::from_integer(0.into());
            let branches = branches
                .iter()
                .map(|b| {
                    cum += &b.prob;
                    let scaled = cum.numer() * &scale;
                    let threshold: BigInt =
                        (&scaled + cum.denom() - BigInt::from(1u8)) / cum.denom();
                    let threshold = threshold.to_u128().expect("cumulative probability <= 1");
                    (b.value.clone(), threshold, compile(&b.child))
                })
                .collect();
            Compiled::Internal {
                variable: variable.clone(),
                branches,
            }
        }
    }
}

/// Inverse-CDF sampler over a fixed tree.
pub struct Sampler {
    root: Compiled,
}

impl Sampler {
    pub fn new(tree: &ProbabilityTree) -> Result<Self> {
        tree.ensure_valid()?;
        Ok(Self {
            root: compile(tree.root()),
        })
    }

    pub fn draw(&self, rng: &mut impl RngCore) -> Realization {
        let mut steps = Vec::new();
        let mut node = &self.root;
        while let Compiled::Internal { variable, branches } = node {
            let u = rng.next_u64() as u128;
            let (value, _, child) = branches
                .iter()
                .find(|(_, threshold, _)| u < *threshold)
                .expect("last cumulative threshold is 2^64");
            steps.push((variable.clone(), value.clone()));
            node = child;
        }
        Realization { steps }
    }
}

/// `n` independent realizations, deterministic in `seed`.
pub fn sample(tree: &ProbabilityTree, seed: u64, n: usize) -> Result<Vec<Realization>> {
    let sampler = Sampler::new(tree)?;
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

fn csv_text(rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Plan(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// One column per registry variable (empty when the path leaves it
/// unresolved) and a final `order` column with the resolution order.
pub fn realizations_csv(tree: &ProbabilityTree, realizations: &[Realization]) -> Result<String> {
    let vars: Vec<&VariableId> = tree.registry().variables().iter().map(|v| &v.id).collect();
    let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let mut header = names.clone();
    header.push("order".to_string());
    let rows = std::iter::once(header).chain(realizations.iter().map(|r| {
        let mut row: Vec<String> = vars
            .iter()
            .map(|v| r.value_of(v).map(|x| x.to_string()).unwrap_or_default())
            .collect();
        row.push(
            r.steps
                .iter()
                .map(|(v, _)| v.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
        row
    }));
    Ok(format!(
        "# columns {} in registry order; order lists each path's resolution order\n{}",
        names.join(","),
        csv_text(rows)?
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentPlan {
    pub tree: ProbabilityTree,
    pub hypothesis: VariableId,
    /// The hypothesis value that generates the simulated data.
    pub true_value: ValueId,
    /// Interventions applied in every trial; empty for passive observation.
    pub policy: Vec<InterventionSpec>,
    pub observe: Vec<VariableId>,
    pub trials: usize,
    pub seed: u64,
}

const PLAN_KEYS: [&str; 7] = [
    "tree",
    "hypothesis",
    "true_value",
    "policy",
    "observe",
    "trials",
    "seed",
];

impl ExperimentPlan {
    /// Reads a plan file; its `tree` path is relative to the plan's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Plan(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::from_config(&text, |tree| {
            let tree_path = dir.join(tree);
            let doc = fs::read_to_string(&tree_path)
                .map_err(|e| Error::Plan(format!("{}: {e}", tree_path.display())))?;
            Ok(crate::dsl::parse(&doc)?)
        })
    }

    /// Parses flat `key = value` lines. `#` starts a comment line.
    ///
    /// Keys: `tree`, `hypothesis`, `true_value`, `policy` (`none` or
    /// `VAR=VAL,...`; defaults to `none`), `observe` (comma-separated
    /// variables), `trials`, `seed`.
    pub fn from_config(
        text: &str,
        load_tree: impl FnOnce(&str) -> Result<ProbabilityTree>,
    ) -> Result<Self> {
        let mut entries: Vec<(&str, &str)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Plan(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if !PLAN_KEYS.contains(&key) {
                return Err(Error::Plan(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(Error::Plan(format!("line {}: `{key}` given twice", n + 1)));
            }
            entries.push((key, value.trim()));
        }
        let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let need = |key: &str| get(key).ok_or_else(|| Error::Plan(format!("missing `{key}`")));

        let policy = match get("policy") {
            None | Some("none") | Some("") => Vec::new(),
            Some(list) => list
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<InterventionSpec>>>()?,
        };
        let observe = need("observe")?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(VariableId::new)
            .collect();
        let trials = need("trials")?
            .parse()
            .map_err(|e| Error::Plan(format!("trials: {e}")))?;
        let seed = need("seed")?
            .parse()
            .map_err(|e| Error::Plan(format!("seed: {e}")))?;
        let plan = ExperimentPlan {
            tree: load_tree(need("tree")?)?,
            hypothesis: VariableId::new(need("hypothesis")?),
            true_value: ValueId::new(need("true_value")?),
            policy,
            observe,
            trials,
            seed,
        };
        plan.check()?;
        Ok(plan)
    }

    fn check(&self) -> Result<()> {
        let reg = self.tree.registry();
        reg.check(&self.hypothesis, &self.true_value)?;
        for var in &self.observe {
            reg.domain(var)?;
            if var == &self.hypothesis || self.policy.iter().any(|s| &s.variable == var) {
                return Err(Error::OverlappingVariables(var.clone()));
            }
        }
        let distinct: BTreeSet<_> = self.observe.iter().collect();
        if distinct.len() != self.observe.len() {
            return Err(Error::Plan("observed variable listed twice".to_string()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentOutcome {
    /// Entry 0 is the prior; entry `t` follows trial `t`.
    pub trajectory: Vec<Posterior>,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentOutcome {
    pub fn final_posterior(&self) -> &Posterior {
        self.trajectory.last().expect("trajectory holds the prior")
    }

    /// Trial log with columns `trial_index, interventions, observation` and
    /// one `HYP=value` column per hypothesis value holding `num/den` weights.
    /// Row 0 carries the prior.
    pub fn to_csv(&self) -> Result<String> {
        let prior = &self.trajectory[0];
        let mut header = vec![
            "trial_index".to_string(),
            "interventions".to_string(),
            "observation".to_string(),
        ];
        header.extend(
            prior
                .weights()
                .iter()
                .map(|(v, _)| format!("{}={v}", prior.hypothesis())),
        );
        let rows = self.trajectory.iter().enumerate().map(|(i, post)| {
            let (forced, seen) = match i {
                0 => (String::new(), String::new()),
                _ => {
                    let t = &self.trials[i - 1];
                    (
                        t.interventions
                            .iter()
                            .map(|s| s.to_string())
                            .collect::<Vec<_>>()
                            .join(";"),
                        t.observation
                            .iter()
                            .map(|(k, v)| format!("{k}={v}"))
                            .collect::<Vec<_>>()
                            .join(";"),
                    )
                }
            };
            let mut row = vec![i.to_string(), forced, seen];
            row.extend(post.weights().iter().map(|(_, w)| format_rational(w)));
            row
        });
        csv_text(std::iter::once(header).chain(rows))
    }
}

/// Reads a trial log back into trial records and the recorded trajectory.
pub fn parse_trial_log(text: &str) -> Result<(Vec<TrialRecord>, Vec<Posterior>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let bad = |msg: String| Error::Plan(format!("trial log: {msg}"));
    if header.len() < 4 || &header[0] != "trial_index" {
        return Err(bad("unexpected header".to_string()));
    }
    let mut hypothesis = None;
    let mut values = Vec::new();
    for col in header.iter().skip(3) {
        let (h, v) = col
            .split_once('=')
            .ok_or_else(|| bad(format!("column `{col}`")))?;
        hypothesis.get_or_insert_with(|| VariableId::new(h));
        values.push(ValueId::new(v));
    }
    let hypothesis = hypothesis.unwrap();
    let mut trials = Vec::new();
    let mut trajectory = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        if row[0].parse::<usize>().ok() != Some(i) {
            return Err(bad(format!("row {i} has index `{}`", &row[0])));
        }
        let weights = values
            .iter()
            .zip(row.iter().skip(3))
            .map(|(v, w)| {
                Ok((
                    v.clone(),
                    parse_rational(w).map_err(|e| bad(e.to_string()))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        trajectory.push(Posterior::new(hypothesis.clone(), weights)?);
        if i > 0 {
            let interventions = row[1]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<InterventionSpec>>>()?;
            let observation: Event = row[2].replace(';', ",").parse()?;
            trials.push(TrialRecord::new(interventions, observation));
        }
    }
    Ok((trials, trajectory))
}

/// Simulates the plan: each trial samples the true-hypothesis world under the
/// policy, keeps the observed variables, and updates the posterior. The prior
/// is the template's own marginal over the hypothesis.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    plan.check()?;
    let template = &plan.tree;
    let world = template
        .condition(&Event::of(plan.hypothesis.clone(), plan.true_value.clone()))?
        .intervene_many(&plan.policy)?;
    let sampler = Sampler::new(&world)?;
    let mut rng = rng_from_seed(plan.seed);
    let trials: Vec<TrialRecord> = (0..plan.trials)
        .map(|_| {
            let seen = sampler.draw(&mut rng).to_event().restrict(&plan.observe);
            TrialRecord::new(plan.policy.clone(), seen)
        })
        .collect();
    let prior = Posterior::marginal(template, &plan.hypothesis)?;
    let trajectory = sequential_posterior(template, &plan.hypothesis, &trials, &prior)?;
    Ok(ExperimentOutcome { trajectory, trials })
}
