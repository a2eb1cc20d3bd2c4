//! Shared helpers for integration tests: seeded random network, evidence
//! and query generation.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use kappanet::model::{
    assignment_count, Assignment, Calculus, ConditionalTable, Degree, Network, Rank, Variable,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random DAG network with up to `max_nodes` variables of up to
/// `max_values` values each. Probability entries are kept away from zero so
/// random evidence stays feasible; kappa rows are normalized random ranks.
pub fn random_network(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    max_values: usize,
    calc: Calculus,
) -> Network {
    let n = rng.gen_range(2..=max_nodes);
    let variables: Vec<Variable> = (0..n)
        .map(|i| {
            let card = rng.gen_range(2..=max_values);
            Variable {
                name: format!("v{i}"),
                values: (0..card).map(|j| format!("val{j}")).collect(),
            }
        })
        .collect();
    let mut tables = Vec::new();
    for i in 0..n {
        let max_parents = i.min(3);
        let parent_count = if max_parents == 0 {
            0
        } else {
            rng.gen_range(0..=max_parents)
        };
        let mut parents: Vec<usize> = (0..i).collect();
        parents.shuffle(rng);
        parents.truncate(parent_count);
        parents.sort_unstable();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| variables[p].values.len()).collect();
        let card = variables[i].values.len();
        let rows = (0..assignment_count(&parent_cards))
            .map(|_| random_row(rng, card, calc))
            .collect();
        tables.push(ConditionalTable {
            child: variables[i].name.clone(),
            parents: parents
                .iter()
                .map(|&p| variables[p].name.clone())
                .collect(),
            rows,
        });
    }
    let net = Network {
        calculus: calc,
        variables,
        tables,
        epsilon: None,
    };
    assert!(net.validate().is_empty(), "generator produced invalid net");
    net
}

fn random_row(rng: &mut ChaCha8Rng, card: usize, calc: Calculus) -> Vec<Degree> {
    match calc {
        Calculus::Probability => {
            let raw: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|p| Degree::Prob(p / sum)).collect()
        }
        Calculus::Kappa => {
            let mut raw: Vec<u64> = (0..card).map(|_| rng.gen_range(0..=4)).collect();
            let min = *raw.iter().min().unwrap();
            for r in &mut raw {
                *r -= min;
            }
            raw.into_iter()
                .map(|k| Degree::Rank(Rank::Finite(k)))
                .collect()
        }
    }
}

/// Random evidence over a subset of variables plus a target outside it.
pub fn random_query(rng: &mut ChaCha8Rng, net: &Network) -> (Assignment, String) {
    let n = net.variables.len();
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    let target = net.variables[indices[0]].name.clone();
    let evidence_count = rng.gen_range(0..n);
    let mut evidence = Assignment::new();
    for &i in indices.iter().skip(1).take(evidence_count) {
        let var = &net.variables[i];
        let value = var.values.choose(rng).unwrap().clone();
        evidence.set(var.name.clone(), value);
    }
    (evidence, target)
}
