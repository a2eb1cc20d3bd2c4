//! Posterior computation under either calculus.
//!
//! Two routes are provided: a brute-force enumeration over full assignments
//! (the trusted oracle) and a variable-elimination engine. Both must produce
//! identical posteriors; the test suites hold them to that.

use std::collections::BTreeSet;

use crate::model::{
    assignment_count, lex_decode, lex_index, Assignment, Calculus, Degree, Factor, Network, Rank,
};
use crate::{Error, Result};

/// Normalized posterior degrees for one variable, one per domain value.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorVector {
    pub variable: String,
    pub values: Vec<String>,
    pub degrees: Vec<Degree>,
    pub calculus: Calculus,
}

impl PosteriorVector {
    /// Degree of the named value.
    pub fn degree_of(&self, value: &str) -> Option<Degree> {
        self.values
            .iter()
            .position(|v| v == value)
            .map(|i| self.degrees[i])
    }
}

/// A permutation of the variables to eliminate for one query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrder {
    pub order: Vec<String>,
}

/// Belief classification of a binary kappa posterior.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Belief {
    Believed(u64),
    Disbelieved(u64),
    Uncommitted,
}

/// Compiles a (possibly partial) assignment into per-variable value indices,
/// rejecting unknown variables or values.
pub(crate) fn compile_assignment(net: &Network, a: &Assignment) -> Result<Vec<Option<usize>>> {
    let mut out = vec![None; net.variables.len()];
    for (var, val) in a.iter() {
        let vi = net
            .var_index(var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
        let idx = net.variables[vi]
            .value_index(val)
            .ok_or_else(|| Error::UnknownValue {
                var: var.to_string(),
                value: val.to_string(),
            })?;
        out[vi] = Some(idx);
    }
    Ok(out)
}

/// Per-variable table lookup state, resolved once per query.
struct CompiledTable<'a> {
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    rows: &'a [Vec<Degree>],
}

fn compile_tables(net: &Network) -> Vec<CompiledTable<'_>> {
    net.variables
        .iter()
        .map(|var| {
            let table = net.table_for(&var.name).expect("validated network");
            let parents: Vec<usize> = table
                .parents
                .iter()
                .map(|p| net.var_index(p).expect("validated parent"))
                .collect();
            let parent_cards = parents.iter().map(|&p| net.card(p)).collect();
            CompiledTable {
                parents,
                parent_cards,
                rows: &table.rows,
            }
        })
        .collect()
}

fn joint_degree_compiled(
    calc: Calculus,
    tables: &[CompiledTable<'_>],
    values: &[usize],
    scratch: &mut Vec<usize>,
) -> Degree {
    let mut acc = calc.unit();
    for (i, table) in tables.iter().enumerate() {
        scratch.clear();
        scratch.extend(table.parents.iter().map(|&p| values[p]));
        let row = lex_index(&table.parent_cards, scratch);
        acc = calc.combine(acc, table.rows[row][values[i]]);
        if calc.is_zero(acc) {
            break;
        }
    }
    acc
}

fn joint_degree_indexed(net: &Network, values: &[usize]) -> Degree {
    let tables = compile_tables(net);
    let mut scratch = Vec::new();
    joint_degree_compiled(net.calculus, &tables, values, &mut scratch)
}

/// Degree of one full assignment: the combine over all nodes of the table
/// entry for (child value | parent values).
pub fn joint_degree(net: &Network, full: &Assignment) -> Result<Degree> {
    let compiled = compile_assignment(net, full)?;
    let mut values = Vec::with_capacity(compiled.len());
    for (slot, var) in compiled.iter().zip(&net.variables) {
        match slot {
            Some(v) => values.push(*v),
            None => return Err(Error::IncompleteAssignment(var.name.clone())),
        }
    }
    Ok(joint_degree_indexed(net, &values))
}

/// Normalizes a raw degree sequence: probabilities are divided by their sum,
/// kappa ranks are shifted down by their minimum.
pub fn normalize_vector(calc: Calculus, raw: &[Degree]) -> Result<Vec<Degree>> {
    assert!(!raw.is_empty(), "cannot normalize an empty vector");
    match calc {
        Calculus::Probability => {
            let sum: f64 = raw.iter().map(|d| d.prob()).sum();
            if sum == 0.0 {
                return Err(Error::ImpossibleEvidence(
                    "all posterior degrees are zero".into(),
                ));
            }
            Ok(raw.iter().map(|d| Degree::Prob(d.prob() / sum)).collect())
        }
        Calculus::Kappa => {
            let min = raw.iter().map(|d| d.rank()).min().unwrap();
            if min == Rank::Infinity {
                return Err(Error::ImpossibleEvidence(
                    "all posterior ranks are infinite".into(),
                ));
            }
            Ok(raw.iter().map(|d| Degree::Rank(d.rank().sub(min))).collect())
        }
    }
}

/// Brute-force posterior: merges the joint degree over every completion
/// consistent with the evidence, per target value, then normalizes.
///
/// This is the trusted oracle for all equivalence tests.
pub fn enumerate_posterior(
    net: &Network,
    evidence: &Assignment,
    target: &str,
) -> Result<PosteriorVector> {
    let target_idx = net
        .var_index(target)
        .ok_or_else(|| Error::UnknownVariable(target.to_string()))?;
    if evidence.contains(target) {
        return Err(Error::TargetObserved(target.to_string()));
    }
    let fixed = compile_assignment(net, evidence)?;
    let calc = net.calculus;
    let tables = compile_tables(net);
    let cards: Vec<usize> = (0..net.variables.len()).map(|i| net.card(i)).collect();
    let mut raw = vec![calc.zero(); cards[target_idx]];
    let mut values = Vec::new();
    let mut scratch = Vec::new();
    for idx in 0..assignment_count(&cards) {
        lex_decode(&cards, idx, &mut values);
        if fixed
            .iter()
            .zip(&values)
            .any(|(f, v)| matches!(f, Some(fv) if fv != v))
        {
            continue;
        }
        let d = joint_degree_compiled(calc, &tables, &values, &mut scratch);
        let t = values[target_idx];
        raw[t] = calc.merge(raw[t], d);
    }
    let degrees = normalize_vector(calc, &raw)?;
    Ok(PosteriorVector {
        variable: target.to_string(),
        values: net.variables[target_idx].values.clone(),
        degrees,
        calculus: calc,
    })
}

/// Variable-elimination posterior. Produces output identical to
/// [`enumerate_posterior`] for any valid elimination order.
pub fn eliminate_posterior(
    net: &Network,
    evidence: &Assignment,
    target: &str,
    order: &EliminationOrder,
) -> Result<PosteriorVector> {
    let target_idx = net
        .var_index(target)
        .ok_or_else(|| Error::UnknownVariable(target.to_string()))?;
    if evidence.contains(target) {
        return Err(Error::TargetObserved(target.to_string()));
    }
    let fixed = compile_assignment(net, evidence)?;
    let calc = net.calculus;

    // the order must cover exactly the non-target, non-evidence variables
    let eliminable: BTreeSet<&str> = net
        .variables
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx && fixed[i].is_none())
        .map(|(_, v)| v.name.as_str())
        .collect();
    let ordered: BTreeSet<&str> = order.order.iter().map(|s| s.as_str()).collect();
    if ordered != eliminable || ordered.len() != order.order.len() {
        return Err(Error::BadEliminationOrder(format!(
            "expected a permutation of {{{}}}",
            eliminable.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }

    let mut factors: Vec<Factor> = (0..net.variables.len())
        .map(|i| Factor::from_table(net, i))
        .collect();
    // evidence is incorporated by zeroing entries outside the observed value
    for (i, slot) in fixed.iter().enumerate() {
        if let Some(v) = slot {
            for f in &mut factors {
                f.restrict(i, *v, calc);
            }
        }
    }

    for name in &order.order {
        let vi = net.var_index(name).expect("checked above");
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(vi));
        factors = without;
        let product = with
            .into_iter()
            .reduce(|a, b| a.multiply(&b, calc))
            .unwrap_or_else(|| Factor::unit(calc));
        factors.push(product.marginalize(vi, calc));
    }

    let mut result = factors
        .into_iter()
        .reduce(|a, b| a.multiply(&b, calc))
        .unwrap_or_else(|| Factor::unit(calc));
    // merge out the observed variables; only the observed slice is live
    for (i, slot) in fixed.iter().enumerate() {
        if slot.is_some() && result.contains(i) {
            result = result.marginalize(i, calc);
        }
    }
    assert_eq!(result.scope, vec![target_idx], "unexpected residual scope");

    let degrees = normalize_vector(calc, &result.entries)?;
    Ok(PosteriorVector {
        variable: target.to_string(),
        values: net.variables[target_idx].values.clone(),
        degrees,
        calculus: calc,
    })
}

/// Convenience wrapper: eliminate with a min-fill order.
pub fn posterior(net: &Network, evidence: &Assignment, target: &str) -> Result<PosteriorVector> {
    let mut keep: BTreeSet<String> = evidence.iter().map(|(v, _)| v.to_string()).collect();
    keep.insert(target.to_string());
    let order = min_fill_order(net, &keep);
    eliminate_posterior(net, evidence, target, &order)
}

/// Greedy min-fill elimination order over the moral graph, ties broken by
/// declaration order.
pub fn min_fill_order(net: &Network, keep: &BTreeSet<String>) -> EliminationOrder {
    let n = net.variables.len();
    let mut adjacent = vec![vec![false; n]; n];
    for i in 0..n {
        let mut clique = net.parent_indices(i);
        clique.push(i);
        for a in 0..clique.len() {
            for b in (a + 1)..clique.len() {
                adjacent[clique[a]][clique[b]] = true;
                adjacent[clique[b]][clique[a]] = true;
            }
        }
    }
    let mut remaining: Vec<usize> = (0..n)
        .filter(|&i| !keep.contains(&net.variables[i].name))
        .collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let fill_of = |v: usize, adjacent: &Vec<Vec<bool>>, eliminated: &[bool]| {
            let neighbors: Vec<usize> = (0..n)
                .filter(|&u| u != v && !eliminated[u] && adjacent[v][u])
                .collect();
            let mut fill = 0usize;
            for a in 0..neighbors.len() {
                for b in (a + 1)..neighbors.len() {
                    if !adjacent[neighbors[a]][neighbors[b]] {
                        fill += 1;
                    }
                }
            }
            fill
        };
        // declaration order scan; strict < keeps the earliest minimum
        let mut best = remaining[0];
        let mut best_fill = fill_of(best, &adjacent, &eliminated);
        for &v in &remaining[1..] {
            let f = fill_of(v, &adjacent, &eliminated);
            if f < best_fill {
                best = v;
                best_fill = f;
            }
        }
        let neighbors: Vec<usize> = (0..n)
            .filter(|&u| u != best && !eliminated[u] && adjacent[best][u])
            .collect();
        for a in 0..neighbors.len() {
            for b in (a + 1)..neighbors.len() {
                adjacent[neighbors[a]][neighbors[b]] = true;
                adjacent[neighbors[b]][neighbors[a]] = true;
            }
        }
        eliminated[best] = true;
        remaining.retain(|&v| v != best);
        order.push(net.variables[best].name.clone());
    }
    EliminationOrder { order }
}

/// Classifies a normalized binary kappa posterior for the designated
/// positive value.
pub fn classify_belief(post: &PosteriorVector, positive_value: &str) -> Result<Belief> {
    if post.calculus != Calculus::Kappa {
        return Err(Error::Contract(
            "belief classification is defined for kappa posteriors only".into(),
        ));
    }
    if post.values.len() != 2 {
        return Err(Error::Contract(format!(
            "belief classification needs a binary variable, '{}' has {} values",
            post.variable,
            post.values.len()
        )));
    }
    let pos = post
        .degree_of(positive_value)
        .ok_or_else(|| Error::UnknownValue {
            var: post.variable.clone(),
            value: positive_value.to_string(),
        })?
        .rank();
    let neg_value = post
        .values
        .iter()
        .find(|v| *v != positive_value)
        .expect("binary variable");
    let neg = post.degree_of(neg_value).unwrap().rank();
    Ok(match (pos, neg) {
        (Rank::Finite(0), Rank::Finite(0)) => Belief::Uncommitted,
        (Rank::Finite(0), s) => Belief::Believed(match s {
            Rank::Finite(k) => k,
            Rank::Infinity => u64::MAX,
        }),
        (s, _) => Belief::Disbelieved(match s {
            Rank::Finite(k) => k,
            Rank::Infinity => u64::MAX,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{chain_network, ChainSpec};
    use crate::model::{ConditionalTable, Variable};

    fn approx(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-9, "{a} != {b}");
    }

    #[test]
    fn joint_degree_on_default_chain() {
        let spec = ChainSpec::default_with_length(3);
        let net = chain_network(&spec, Calculus::Probability);
        let full = Assignment::of(&[("x1", "pos"), ("x2", "pos"), ("x3", "pos")]);
        approx(joint_degree(&net, &full).unwrap().prob(), 0.5 * 0.8 * 0.8);

        let kappa = chain_network(&spec, Calculus::Kappa);
        let full = Assignment::of(&[("x1", "pos"), ("x2", "pos"), ("x3", "neg")]);
        assert_eq!(
            joint_degree(&kappa, &full).unwrap().rank(),
            Rank::Finite(1)
        );
    }

    #[test]
    fn joint_degree_rejects_partial_assignment() {
        let net = chain_network(&ChainSpec::default_with_length(3), Calculus::Probability);
        let partial = Assignment::of(&[("x1", "pos")]);
        assert!(matches!(
            joint_degree(&net, &partial),
            Err(Error::IncompleteAssignment(_))
        ));
    }

    #[test]
    fn enumerate_chain_posteriors() {
        let ev = Assignment::of(&[("x1", "pos")]);

        let net2 = chain_network(&ChainSpec::default_with_length(2), Calculus::Probability);
        let p = enumerate_posterior(&net2, &ev, "x2").unwrap();
        approx(p.degree_of("pos").unwrap().prob(), 0.8);
        approx(p.degree_of("neg").unwrap().prob(), 0.2);

        let net3 = chain_network(&ChainSpec::default_with_length(3), Calculus::Probability);
        let p = enumerate_posterior(&net3, &ev, "x3").unwrap();
        approx(p.degree_of("pos").unwrap().prob(), 0.68);
        approx(p.degree_of("neg").unwrap().prob(), 0.32);

        let net5 = chain_network(&ChainSpec::default_with_length(5), Calculus::Kappa);
        let p = enumerate_posterior(&net5, &ev, "x5").unwrap();
        assert_eq!(p.degree_of("pos").unwrap().rank(), Rank::Finite(0));
        assert_eq!(p.degree_of("neg").unwrap().rank(), Rank::Finite(1));
    }

    #[test]
    fn eliminate_matches_enumerate_on_chain() {
        let ev = Assignment::of(&[("x1", "pos")]);
        for len in [2usize, 3, 5] {
            for calc in [Calculus::Probability, Calculus::Kappa] {
                let net = chain_network(&ChainSpec::default_with_length(len), calc);
                let target = format!("x{len}");
                let by_enum = enumerate_posterior(&net, &ev, &target).unwrap();
                let by_elim = posterior(&net, &ev, &target).unwrap();
                assert_eq!(by_enum.values, by_elim.values);
                for (a, b) in by_enum.degrees.iter().zip(&by_elim.degrees) {
                    match calc {
                        Calculus::Probability => approx(a.prob(), b.prob()),
                        Calculus::Kappa => assert_eq!(a.rank(), b.rank()),
                    }
                }
            }
        }
    }

    #[test]
    fn empty_evidence_gives_prior() {
        let net = chain_network(&ChainSpec::default_with_length(3), Calculus::Probability);
        let p = posterior(&net, &Assignment::new(), "x1").unwrap();
        approx(p.degree_of("pos").unwrap().prob(), 0.5);
        approx(p.degree_of("neg").unwrap().prob(), 0.5);
    }

    #[test]
    fn impossible_evidence_is_an_error() {
        // a deterministic table makes (a=pos, b=neg) impossible
        let net = Network {
            calculus: Calculus::Probability,
            variables: vec![
                Variable::new("a", &["pos", "neg"]),
                Variable::new("b", &["pos", "neg"]),
            ],
            tables: vec![
                ConditionalTable {
                    child: "a".into(),
                    parents: vec![],
                    rows: vec![vec![Degree::Prob(1.0), Degree::Prob(0.0)]],
                },
                ConditionalTable {
                    child: "b".into(),
                    parents: vec!["a".into()],
                    rows: vec![
                        vec![Degree::Prob(1.0), Degree::Prob(0.0)],
                        vec![Degree::Prob(0.0), Degree::Prob(1.0)],
                    ],
                },
            ],
            epsilon: None,
        };
        let ev = Assignment::of(&[("b", "neg")]);
        assert!(matches!(
            enumerate_posterior(&net, &ev, "a"),
            Err(Error::ImpossibleEvidence(_))
        ));
        assert!(matches!(
            posterior(&net, &ev, "a"),
            Err(Error::ImpossibleEvidence(_))
        ));
    }

    #[test]
    fn normalize_vector_examples() {
        let k = Calculus::Kappa;
        let out = normalize_vector(
            k,
            &[
                Degree::Rank(Rank::Finite(2)),
                Degree::Rank(Rank::Finite(5)),
            ],
        )
        .unwrap();
        assert_eq!(
            out,
            vec![
                Degree::Rank(Rank::Finite(0)),
                Degree::Rank(Rank::Finite(3))
            ]
        );

        let p = Calculus::Probability;
        let out = normalize_vector(p, &[Degree::Prob(0.2), Degree::Prob(0.6)]).unwrap();
        approx(out[0].prob(), 0.25);
        approx(out[1].prob(), 0.75);

        let out = normalize_vector(
            k,
            &[Degree::Rank(Rank::Finite(7)), Degree::Rank(Rank::Infinity)],
        )
        .unwrap();
        assert_eq!(
            out,
            vec![Degree::Rank(Rank::Finite(0)), Degree::Rank(Rank::Infinity)]
        );

        assert!(normalize_vector(p, &[Degree::Prob(0.0), Degree::Prob(0.0)]).is_err());
        assert!(normalize_vector(
            k,
            &[Degree::Rank(Rank::Infinity), Degree::Rank(Rank::Infinity)]
        )
        .is_err());
    }

    #[test]
    fn min_fill_on_chain_and_fork() {
        let net = chain_network(&ChainSpec::default_with_length(4), Calculus::Probability);
        let keep: BTreeSet<String> = ["x1", "x4"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            min_fill_order(&net, &keep).order,
            vec!["x2".to_string(), "x3".to_string()]
        );

        let fork = crate::analytic::fork_network(
            &crate::analytic::ForkSpec::default_with_effects(3),
            Calculus::Probability,
        );
        // variables are y, x1, x2, x3; keep x3
        let keep: BTreeSet<String> = ["x3".to_string()].into_iter().collect();
        assert_eq!(
            min_fill_order(&fork, &keep).order,
            vec!["x1".to_string(), "x2".to_string(), "y".to_string()]
        );

        let keep: BTreeSet<String> = ["x1", "x2", "x3", "x4"].iter().map(|s| s.to_string()).collect();
        let net = chain_network(&ChainSpec::default_with_length(4), Calculus::Probability);
        assert!(min_fill_order(&net, &keep).order.is_empty());
    }

    #[test]
    fn bad_elimination_order_is_rejected() {
        let net = chain_network(&ChainSpec::default_with_length(3), Calculus::Probability);
        let ev = Assignment::of(&[("x1", "pos")]);
        let order = EliminationOrder {
            order: vec!["x1".into()],
        };
        assert!(matches!(
            eliminate_posterior(&net, &ev, "x3", &order),
            Err(Error::BadEliminationOrder(_))
        ));
    }

    #[test]
    fn classify_belief_cases() {
        let make = |pos: Rank, neg: Rank| PosteriorVector {
            variable: "x".into(),
            values: vec!["pos".into(), "neg".into()],
            degrees: vec![Degree::Rank(pos), Degree::Rank(neg)],
            calculus: Calculus::Kappa,
        };
        assert_eq!(
            classify_belief(&make(Rank::Finite(0), Rank::Finite(2)), "pos").unwrap(),
            Belief::Believed(2)
        );
        assert_eq!(
            classify_belief(&make(Rank::Finite(0), Rank::Finite(0)), "pos").unwrap(),
            Belief::Uncommitted
        );
        assert_eq!(
            classify_belief(&make(Rank::Finite(3), Rank::Finite(0)), "pos").unwrap(),
            Belief::Disbelieved(3)
        );

        let prob = PosteriorVector {
            variable: "x".into(),
            values: vec!["pos".into(), "neg".into()],
            degrees: vec![Degree::Prob(0.5), Degree::Prob(0.5)],
            calculus: Calculus::Probability,
        };
        assert!(classify_belief(&prob, "pos").is_err());
    }
}
