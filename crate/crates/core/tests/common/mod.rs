//! Random trees and events for the property suites.

#![allow(dead_code)]

pub mod props;

use causal_tree::simulator::rng_from_seed;
use causal_tree::tree::Step;
use causal_tree::{Branch, Event, Node, ProbabilityTree, Rational, ValueId, VariableId};
use rand_core::RngCore;

pub struct Gen {
    rng: causal_tree::simulator::Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: rng_from_seed(seed),
        }
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.next_u64() % n
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }

    /// Random distribution with small integer weights; zero weights appear.
    pub fn distribution(&mut self, k: usize) -> Vec<Rational> {
        let mut w: Vec<i64> = (0..k).map(|_| self.below(7) as i64).collect();
        if w.iter().all(|&x| x == 0) {
            let i = self.below(k as u64) as usize;
            w[i] = 1;
        }
        let total: i64 = w.iter().sum();
        w.into_iter()
            .map(|x| Rational::new(x.into(), total.into()))
            .collect()
    }

    /// A variable pool `{prefix}0..{prefix}{n-1}` with binary or ternary
    /// domains.
    pub fn pool(&mut self, prefix: &str, n: usize) -> Vec<(VariableId, Vec<ValueId>)> {
        (0..n)
            .map(|i| {
                let k = 2 + self.below(2) as usize;
                let var = VariableId::new(format!("{prefix}{i}"));
                let values = (0..k)
                    .map(|j| ValueId::new(format!("{}{j}", prefix.to_lowercase())))
                    .collect();
                (var, values)
            })
            .collect()
    }

    /// Random node of depth at most `depth` over variables not in `used`.
    pub fn node(
        &mut self,
        pool: &[(VariableId, Vec<ValueId>)],
        used: &mut Vec<usize>,
        depth: usize,
    ) -> Node {
        let free: Vec<usize> = (0..pool.len()).filter(|i| !used.contains(i)).collect();
        if depth == 0 || free.is_empty() || (!used.is_empty() && self.chance(1, 4)) {
            return Node::Leaf;
        }
        let pick = free[self.below(free.len() as u64) as usize];
        let (var, values) = &pool[pick];
        let probs = self.distribution(values.len());
        used.push(pick);
        let branches = values
            .iter()
            .zip(probs)
            .map(|(v, p)| {
                let child = self.node(pool, used, depth - 1);
                Branch::new(v.clone(), p, child)
            })
            .collect();
        used.pop();
        Node::internal(var.clone(), branches)
    }

    /// Valid random tree: depth <= 6, binary/ternary domains.
    pub fn tree(&mut self) -> ProbabilityTree {
        let pool = self.pool("V", 6);
        let depth = 1 + self.below(6) as usize;
        let root = self.node(&pool, &mut Vec::new(), depth);
        ProbabilityTree::new(root).expect("generated trees are valid")
    }

    /// Random event over the tree's variables.
    pub fn event(&mut self, tree: &ProbabilityTree) -> Event {
        let mut ev = Event::sure();
        for var in tree.registry().variables() {
            if self.chance(1, 3) {
                let v = &var.domain[self.below(var.domain.len() as u64) as usize];
                ev = ev.with(var.id.clone(), v.clone());
            }
        }
        ev
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }
}

/// Brute-force event probability by summing matching leaves.
pub fn enumerate_event(tree: &ProbabilityTree, event: &Event) -> Rational {
    tree.enumerate_leaves()
        .into_iter()
        .filter(|l| event.matches(&l.steps))
        .map(|l| l.prob)
        .sum()
}

pub fn steps(pairs: &[(&str, &str)]) -> Vec<Step> {
    pairs
        .iter()
        .map(|(a, b)| (VariableId::new(a), ValueId::new(b)))
        .collect()
}
