//! Closed-form evaluators and data generators for the two canonical
//! structures: a chain of variables (serial propagation) and a fork
//! (common-cause fusion).
//!
//! The closed forms are plain recurrences, implemented independently of the
//! factor engine, so that engine-vs-closed-form agreement is a genuine
//! two-implementation check.

use crate::abstraction::{translate_degree, translate_network, Epsilon};
use crate::infer::PosteriorVector;
use crate::model::{Assignment, Calculus, ConditionalTable, Degree, Network, Rank, Variable};
use crate::{Error, Result};

/// Parameters of the chain x1 -> x2 -> ... -> xn, all variables binary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    pub length: usize,
    /// Pr[x1 = pos].
    pub prior: f64,
    /// Pr[xi = pos | x(i-1) = pos].
    pub persistence: f64,
    /// Pr[xi = pos | x(i-1) = neg].
    pub innovation: f64,
    /// Abstraction parameter for the kappa variant.
    pub epsilon: f64,
}

impl ChainSpec {
    pub fn default_with_length(length: usize) -> Self {
        assert!(length >= 2, "a chain needs at least 2 variables");
        ChainSpec {
            length,
            prior: 0.5,
            persistence: 0.8,
            innovation: 0.2,
            epsilon: 0.2,
        }
    }
}

/// Parameters of the fork y -> {x1, ..., xn}, all variables binary.
///
/// The kappa quantification is set directly (not derived by translation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForkSpec {
    pub effects: usize,
    /// Pr[y = pos].
    pub prior: f64,
    /// Pr[xi = pos | y = pos].
    pub link_pos: f64,
    /// Pr[xi = pos | y = neg].
    pub link_neg: f64,
    /// kappa[y = pos] (kappa[y = neg] is 0).
    pub kappa_prior: u64,
    /// kappa[xi = neg | y = pos].
    pub kappa_miss: u64,
    /// kappa[xi = pos | y = neg].
    pub kappa_false: u64,
}

impl ForkSpec {
    pub fn default_with_effects(effects: usize) -> Self {
        assert!(effects >= 1);
        ForkSpec {
            effects,
            prior: 0.04,
            link_pos: 0.8,
            link_neg: 0.2,
            kappa_prior: 5,
            kappa_miss: 1,
            kappa_false: 1,
        }
    }
}

/// Which fork variable a posterior query targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForkTarget {
    /// The common cause y.
    Root,
    /// The unobserved effect xn.
    LastEffect,
}

fn binary(name: String) -> Variable {
    Variable {
        name,
        values: vec!["pos".into(), "neg".into()],
    }
}

fn prob_row(p: f64) -> Vec<Degree> {
    vec![Degree::Prob(p), Degree::Prob(1.0 - p)]
}

/// Builds the explicit chain network in either calculus. The kappa variant
/// is the translation of the probability variant at `spec.epsilon`.
pub fn chain_network(spec: &ChainSpec, calculus: Calculus) -> Network {
    let mut tables = vec![ConditionalTable {
        child: "x1".into(),
        parents: vec![],
        rows: vec![prob_row(spec.prior)],
    }];
    for i in 2..=spec.length {
        tables.push(ConditionalTable {
            child: format!("x{i}"),
            parents: vec![format!("x{}", i - 1)],
            rows: vec![prob_row(spec.persistence), prob_row(spec.innovation)],
        });
    }
    let net = Network {
        calculus: Calculus::Probability,
        variables: (1..=spec.length).map(|i| binary(format!("x{i}"))).collect(),
        tables,
        epsilon: None,
    };
    match calculus {
        Calculus::Probability => net,
        Calculus::Kappa => {
            translate_network(&net, Epsilon::new(spec.epsilon).expect("spec epsilon"))
        }
    }
}

/// Builds the explicit fork network. The kappa variant uses the spec's
/// direct kappa quantification.
pub fn fork_network(spec: &ForkSpec, calculus: Calculus) -> Network {
    let mut variables = vec![binary("y".into())];
    variables.extend((1..=spec.effects).map(|i| binary(format!("x{i}"))));
    let tables = match calculus {
        Calculus::Probability => {
            let mut tables = vec![ConditionalTable {
                child: "y".into(),
                parents: vec![],
                rows: vec![prob_row(spec.prior)],
            }];
            for i in 1..=spec.effects {
                tables.push(ConditionalTable {
                    child: format!("x{i}"),
                    parents: vec!["y".into()],
                    rows: vec![prob_row(spec.link_pos), prob_row(spec.link_neg)],
                });
            }
            tables
        }
        Calculus::Kappa => {
            let rank_row = |pos: u64, neg: u64| {
                vec![
                    Degree::Rank(Rank::Finite(pos)),
                    Degree::Rank(Rank::Finite(neg)),
                ]
            };
            let mut tables = vec![ConditionalTable {
                child: "y".into(),
                parents: vec![],
                rows: vec![rank_row(spec.kappa_prior, 0)],
            }];
            for i in 1..=spec.effects {
                tables.push(ConditionalTable {
                    child: format!("x{i}"),
                    parents: vec!["y".into()],
                    rows: vec![rank_row(0, spec.kappa_miss), rank_row(spec.kappa_false, 0)],
                });
            }
            tables
        }
    };
    Network {
        calculus,
        variables,
        tables,
        epsilon: None,
    }
}

/// The chain's translated kappa quantification, row-normalized:
/// (rank of pos|pos, rank of neg|pos, rank of pos|neg, rank of neg|neg).
fn chain_kappa_links(spec: &ChainSpec) -> (Rank, Rank, Rank, Rank) {
    let eps = Epsilon::new(spec.epsilon).expect("spec epsilon");
    let norm = |a: Rank, b: Rank| {
        let m = a.min(b);
        (a.sub(m), b.sub(m))
    };
    let (pp, np) = norm(
        translate_degree(spec.persistence, eps),
        translate_degree(1.0 - spec.persistence, eps),
    );
    let (pn, nn) = norm(
        translate_degree(spec.innovation, eps),
        translate_degree(1.0 - spec.innovation, eps),
    );
    (pp, np, pn, nn)
}

/// Closed-form posterior of x_i given x1 = pos, as a normalized vector
/// over (pos, neg).
pub fn chain_posterior_vector(
    spec: &ChainSpec,
    i: usize,
    calculus: Calculus,
) -> Result<PosteriorVector> {
    if !(2..=spec.length).contains(&i) {
        return Err(Error::Contract(format!(
            "chain index {i} outside 2..={}",
            spec.length
        )));
    }
    let degrees = match calculus {
        Calculus::Probability => {
            let mut p = 1.0; // x1 observed positive
            for _ in 2..=i {
                p = p * spec.persistence + (1.0 - p) * spec.innovation;
            }
            vec![Degree::Prob(p), Degree::Prob(1.0 - p)]
        }
        Calculus::Kappa => {
            let (pp, np, pn, nn) = chain_kappa_links(spec);
            let (mut pos, mut neg) = (Rank::ZERO, Rank::Infinity);
            for _ in 2..=i {
                let next_pos = pos.add(pp).min(neg.add(pn));
                let next_neg = pos.add(np).min(neg.add(nn));
                pos = next_pos;
                neg = next_neg;
            }
            let m = pos.min(neg);
            vec![Degree::Rank(pos.sub(m)), Degree::Rank(neg.sub(m))]
        }
    };
    Ok(PosteriorVector {
        variable: format!("x{i}"),
        values: vec!["pos".into(), "neg".into()],
        degrees,
        calculus,
    })
}

/// Closed-form degree that x_i is positive given x1 = pos.
pub fn chain_posterior(spec: &ChainSpec, i: usize, calculus: Calculus) -> Result<Degree> {
    Ok(chain_posterior_vector(spec, i, calculus)?.degrees[0])
}

/// Closed-form posterior for the fork with effects x1..xi observed positive.
pub fn fork_posterior(
    spec: &ForkSpec,
    observed: usize,
    target: ForkTarget,
    calculus: Calculus,
) -> Result<PosteriorVector> {
    let max = match target {
        ForkTarget::Root => spec.effects,
        ForkTarget::LastEffect => spec.effects - 1,
    };
    if observed > max {
        return Err(Error::Contract(format!(
            "cannot observe {observed} effects with target {target:?} in a fork of {}",
            spec.effects
        )));
    }
    let (variable, degrees) = match calculus {
        Calculus::Probability => {
            let w_pos = spec.prior * spec.link_pos.powi(observed as i32);
            let w_neg = (1.0 - spec.prior) * spec.link_neg.powi(observed as i32);
            match target {
                ForkTarget::Root => {
                    let sum = w_pos + w_neg;
                    (
                        "y".to_string(),
                        vec![Degree::Prob(w_pos / sum), Degree::Prob(w_neg / sum)],
                    )
                }
                ForkTarget::LastEffect => {
                    let pos = spec.link_pos * w_pos + spec.link_neg * w_neg;
                    let neg = (1.0 - spec.link_pos) * w_pos + (1.0 - spec.link_neg) * w_neg;
                    let sum = pos + neg;
                    (
                        format!("x{}", spec.effects),
                        vec![Degree::Prob(pos / sum), Degree::Prob(neg / sum)],
                    )
                }
            }
        }
        Calculus::Kappa => {
            let w_pos = Rank::Finite(spec.kappa_prior);
            let w_neg = Rank::Finite(observed as u64 * spec.kappa_false);
            let (name, pos, neg) = match target {
                ForkTarget::Root => ("y".to_string(), w_pos, w_neg),
                ForkTarget::LastEffect => (
                    format!("x{}", spec.effects),
                    w_pos.min(w_neg.add(Rank::Finite(spec.kappa_false))),
                    w_pos.add(Rank::Finite(spec.kappa_miss)).min(w_neg),
                ),
            };
            let m = pos.min(neg);
            (
                name,
                vec![Degree::Rank(pos.sub(m)), Degree::Rank(neg.sub(m))],
            )
        }
    };
    Ok(PosteriorVector {
        variable,
        values: vec!["pos".into(), "neg".into()],
        degrees,
        calculus,
    })
}

/// Evidence assignment observing effects x1..xi positive.
pub fn fork_evidence(observed: usize) -> Assignment {
    let mut ev = Assignment::new();
    for i in 1..=observed {
        ev.set(format!("x{i}"), "pos");
    }
    ev
}

/// A plain numeric table: one header row naming the series, then one row
/// per sweep point. Rendered as tab-separated text.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl FigureTable {
    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Signed belief margin rank(neg) - rank(pos) of a binary kappa vector;
/// `None` marks an infinite ("certain") margin.
pub fn belief_margin(pos: Rank, neg: Rank) -> Option<i64> {
    match (pos, neg) {
        (Rank::Finite(p), Rank::Finite(n)) => Some(n as i64 - p as i64),
        _ => None,
    }
}

fn margin_cell(m: Option<i64>) -> String {
    match m {
        Some(v) => v.to_string(),
        None => "certain".to_string(),
    }
}

/// Belief that x_i is true given x1 = pos, against distance i - 1, in both
/// calculi (probability value and kappa margin).
pub fn chain_figure_data(spec: &ChainSpec, max_distance: usize) -> Result<FigureTable> {
    let mut rows = Vec::new();
    for d in 1..=max_distance {
        let i = d + 1;
        let p = chain_posterior(spec, i, Calculus::Probability)?.prob();
        let kv = chain_posterior_vector(spec, i, Calculus::Kappa)?;
        let margin = belief_margin(kv.degrees[0].rank(), kv.degrees[1].rank());
        rows.push(vec![
            d.to_string(),
            format!("{p:.6}"),
            margin_cell(margin),
        ]);
    }
    Ok(FigureTable {
        columns: vec![
            "distance".into(),
            "probability_pos".into(),
            "kappa_margin".into(),
        ],
        rows,
    })
}

/// Posterior probabilities of y and xn being true against the number of
/// observed effects.
pub fn fork_probability_figure_data(spec: &ForkSpec) -> Result<FigureTable> {
    let mut rows = Vec::new();
    for i in 0..spec.effects {
        let y = fork_posterior(spec, i, ForkTarget::Root, Calculus::Probability)?;
        let x = fork_posterior(spec, i, ForkTarget::LastEffect, Calculus::Probability)?;
        rows.push(vec![
            i.to_string(),
            format!("{:.6}", y.degrees[0].prob()),
            format!("{:.6}", x.degrees[0].prob()),
        ]);
    }
    Ok(FigureTable {
        columns: vec!["observed".into(), "p_root_pos".into(), "p_effect_pos".into()],
        rows,
    })
}

/// Kappa belief margins of y and xn against the number of observed effects.
pub fn fork_kappa_margin_figure_data(spec: &ForkSpec) -> Result<FigureTable> {
    let mut rows = Vec::new();
    for i in 0..spec.effects {
        let y = fork_posterior(spec, i, ForkTarget::Root, Calculus::Kappa)?;
        let x = fork_posterior(spec, i, ForkTarget::LastEffect, Calculus::Kappa)?;
        let my = belief_margin(y.degrees[0].rank(), y.degrees[1].rank());
        let mx = belief_margin(x.degrees[0].rank(), x.degrees[1].rank());
        rows.push(vec![
            i.to_string(),
            margin_cell(my),
            margin_cell(mx),
        ]);
    }
    Ok(FigureTable {
        columns: vec![
            "observed".into(),
            "root_margin".into(),
            "effect_margin".into(),
        ],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::{posterior, Belief};

    fn approx(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-9, "{a} != {b}");
    }

    #[test]
    fn chain_networks_validate() {
        for calc in [Calculus::Probability, Calculus::Kappa] {
            let net = chain_network(&ChainSpec::default_with_length(3), calc);
            assert!(net.validate().is_empty());
        }
    }

    #[test]
    fn default_chain_kappa_tables() {
        let net = chain_network(&ChainSpec::default_with_length(3), Calculus::Kappa);
        let t = net.table_for("x2").unwrap();
        assert_eq!(t.rows[0][1], Degree::Rank(Rank::Finite(1)));
        assert_eq!(t.rows[1][0], Degree::Rank(Rank::Finite(1)));
    }

    #[test]
    fn minimal_chain_prior() {
        let net = chain_network(&ChainSpec::default_with_length(2), Calculus::Probability);
        let p = posterior(&net, &Assignment::new(), "x1").unwrap();
        approx(p.degrees[0].prob(), 0.5);
    }

    #[test]
    fn chain_closed_form_values() {
        let spec = ChainSpec::default_with_length(6);
        approx(
            chain_posterior(&spec, 2, Calculus::Probability).unwrap().prob(),
            0.8,
        );
        approx(
            chain_posterior(&spec, 3, Calculus::Probability).unwrap().prob(),
            0.68,
        );
        approx(
            chain_posterior(&spec, 4, Calculus::Probability).unwrap().prob(),
            0.608,
        );
        for i in 2..=6 {
            let v = chain_posterior_vector(&spec, i, Calculus::Kappa).unwrap();
            assert_eq!(v.degrees[0].rank(), Rank::Finite(0));
            assert_eq!(v.degrees[1].rank(), Rank::Finite(1));
        }
        assert!(chain_posterior(&spec, 7, Calculus::Probability).is_err());
    }

    #[test]
    fn chain_closed_form_matches_engine() {
        let ev = Assignment::of(&[("x1", "pos")]);
        let spec = ChainSpec::default_with_length(8);
        for calc in [Calculus::Probability, Calculus::Kappa] {
            let net = chain_network(&spec, calc);
            for i in 2..=8 {
                let closed = chain_posterior_vector(&spec, i, calc).unwrap();
                let engine = posterior(&net, &ev, &format!("x{i}")).unwrap();
                for (a, b) in closed.degrees.iter().zip(&engine.degrees) {
                    match calc {
                        Calculus::Probability => approx(a.prob(), b.prob()),
                        Calculus::Kappa => assert_eq!(a.rank(), b.rank()),
                    }
                }
            }
        }
    }

    #[test]
    fn fork_closed_form_values() {
        let spec = ForkSpec::default_with_effects(10);
        let x0 = fork_posterior(&spec, 0, ForkTarget::LastEffect, Calculus::Probability).unwrap();
        approx(x0.degrees[0].prob(), 0.224);
        let y1 = fork_posterior(&spec, 1, ForkTarget::Root, Calculus::Probability).unwrap();
        approx(y1.degrees[0].prob(), 0.032 / 0.224);

        // kappa thresholds: disbelieved up to i = 4, uncommitted at i = 5,
        // believed with strength 1 from i = 6 on
        let belief_at = |i: usize| {
            let v = fork_posterior(&spec, i, ForkTarget::LastEffect, Calculus::Kappa).unwrap();
            crate::infer::classify_belief(&v, "pos").unwrap()
        };
        assert_eq!(belief_at(4), Belief::Disbelieved(1));
        assert_eq!(belief_at(5), Belief::Uncommitted);
        for i in 6..=9 {
            assert_eq!(belief_at(i), Belief::Believed(1));
        }
    }

    #[test]
    fn fork_closed_form_matches_engine() {
        let spec = ForkSpec::default_with_effects(10);
        for calc in [Calculus::Probability, Calculus::Kappa] {
            let net = fork_network(&spec, calc);
            assert!(net.validate().is_empty());
            for i in 0..=9 {
                let ev = fork_evidence(i);
                for (target, name) in [(ForkTarget::Root, "y"), (ForkTarget::LastEffect, "x10")] {
                    if target == ForkTarget::LastEffect && i > 9 {
                        continue;
                    }
                    let closed = fork_posterior(&spec, i, target, calc).unwrap();
                    let engine = posterior(&net, &ev, name).unwrap();
                    for (a, b) in closed.degrees.iter().zip(&engine.degrees) {
                        match calc {
                            Calculus::Probability => approx(a.prob(), b.prob()),
                            Calculus::Kappa => assert_eq!(a.rank(), b.rank()),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chain_series_converges_to_half() {
        let spec = ChainSpec::default_with_length(12);
        let mut prev_gap = f64::INFINITY;
        for i in 2..=12 {
            let p = chain_posterior(&spec, i, Calculus::Probability).unwrap().prob();
            let gap = (p - 0.5).abs();
            assert!(gap < prev_gap);
            // contraction ratio per step is persistence - innovation
            approx(gap, 0.5 * 0.6f64.powi(i as i32 - 1));
            prev_gap = gap;
        }
    }

    #[test]
    fn figure_tables_have_expected_shape() {
        let chain = ChainSpec::default_with_length(10);
        let t = chain_figure_data(&chain, 9).unwrap();
        assert_eq!(t.columns.len(), 3);
        assert_eq!(t.rows.len(), 9);
        assert_eq!(t.rows[0][1], "0.800000");
        assert_eq!(t.rows[1][1], "0.680000");
        assert!(t.rows.iter().all(|r| r[2] == "1"));

        let fork = ForkSpec::default_with_effects(10);
        let t5 = fork_probability_figure_data(&fork).unwrap();
        assert_eq!(t5.rows.len(), 10);
        let t6 = fork_kappa_margin_figure_data(&fork).unwrap();
        // effect margin: a step function with a single sign change, capped at +1
        let margins: Vec<i64> = t6
            .rows
            .iter()
            .map(|r| r[2].parse::<i64>().unwrap())
            .collect();
        let mut sign_changes = 0;
        for w in margins.windows(2) {
            assert!(w[1] >= w[0]);
            if w[0] < 0 && w[1] >= 0 || w[0] <= 0 && w[1] > 0 {
                sign_changes += 1;
            }
        }
        assert!(margins.iter().all(|&m| m <= 1));
        assert_eq!(*margins.last().unwrap(), 1);
        assert!(sign_changes >= 1);
    }
}
