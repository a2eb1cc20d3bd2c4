//! Order-of-magnitude abstraction: translating probabilities into kappa
//! ranks for a chosen epsilon, at the value, table and network level, and
//! the two comparison pipelines.
//!
//! The pipelines differ in where the abstraction happens: C1 computes a
//! probabilistic posterior and abstracts the result; C2 abstracts the whole
//! network first and computes the posterior in kappa calculus. They coincide
//! only in the infinitesimal-epsilon limit.

use std::fmt;

use crate::infer::{posterior, PosteriorVector};
use crate::model::{Assignment, Calculus, ConditionalTable, Degree, Network, Rank};
use crate::{Error, Result};

/// Relative slack for the closed boundary p = eps^k under repeated division.
const BOUNDARY_SLACK: f64 = 1e-12;

/// The abstraction parameter, strictly between 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Epsilon(value))
        } else {
            Err(Error::BadEpsilon(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Maps a probability to the unique rank k with eps^(k+1) < p <= eps^k;
/// zero maps to infinity.
///
/// Implemented as the repeated-division loop, with a guard so that the
/// boundary case p = eps^k resolves to k even when floating division lands
/// a hair above 1.
pub fn translate_degree(p: f64, eps: Epsilon) -> Rank {
    assert!(p >= 0.0 && p.is_finite(), "probability out of range: {p}");
    if p == 0.0 {
        return Rank::Infinity;
    }
    // upstream rounding can push a normalized posterior slightly above 1
    let mut q = p.min(1.0);
    let mut k: u64 = 0;
    loop {
        q /= eps.0;
        if q > 1.0 + BOUNDARY_SLACK {
            return Rank::Finite(k);
        }
        if q > 1.0 {
            // within slack of the boundary: treat as q == 1 and keep going
            q = 1.0;
        }
        k += 1;
    }
}

/// Translates every table entry and re-normalizes each row so that the
/// kappa row invariant (minimum 0) holds. The result records `eps`.
pub fn translate_network(net: &Network, eps: Epsilon) -> Network {
    debug_assert_eq!(net.calculus, Calculus::Probability);
    let tables = net
        .tables
        .iter()
        .map(|t| ConditionalTable {
            child: t.child.clone(),
            parents: t.parents.clone(),
            rows: t
                .rows
                .iter()
                .map(|row| {
                    let raw: Vec<Rank> = row
                        .iter()
                        .map(|d| translate_degree(d.prob(), eps))
                        .collect();
                    let min = raw.iter().copied().min().unwrap();
                    // shifting by the row minimum is kappa conditioning on
                    // the parent context
                    raw.into_iter()
                        .map(|k| Degree::Rank(k.sub(min)))
                        .collect()
                })
                .collect(),
        })
        .collect();
    Network {
        calculus: Calculus::Kappa,
        variables: net.variables.clone(),
        tables,
        epsilon: Some(eps.0),
    }
}

/// C1: probabilistic posterior, then abstraction of each entry, then
/// kappa normalization (subtract the minimum).
pub fn c1_pipeline(
    net: &Network,
    evidence: &Assignment,
    target: &str,
    eps: Epsilon,
) -> Result<PosteriorVector> {
    let raw = c1_raw(net, evidence, target, eps)?;
    let min = raw.degrees.iter().map(|d| d.rank()).min().unwrap();
    Ok(PosteriorVector {
        degrees: raw
            .degrees
            .iter()
            .map(|d| Degree::Rank(d.rank().sub(min)))
            .collect(),
        ..raw
    })
}

/// C1 without the final normalization: the direct abstraction of the
/// posterior probabilities.
pub fn c1_raw(
    net: &Network,
    evidence: &Assignment,
    target: &str,
    eps: Epsilon,
) -> Result<PosteriorVector> {
    let post = posterior(net, evidence, target)?;
    Ok(PosteriorVector {
        variable: post.variable,
        values: post.values,
        degrees: post
            .degrees
            .iter()
            .map(|d| Degree::Rank(translate_degree(d.prob(), eps)))
            .collect(),
        calculus: Calculus::Kappa,
    })
}

/// C2: abstract the network, then compute the posterior in kappa calculus.
pub fn c2_pipeline(
    net: &Network,
    evidence: &Assignment,
    target: &str,
    eps: Epsilon,
) -> Result<PosteriorVector> {
    let kappa_net = translate_network(net, eps);
    posterior(&kappa_net, evidence, target)
}

/// Per-value difference between the C1 and C2 ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankDiff {
    Finite(i64),
    /// C1 impossible, C2 finite.
    PlusInfinity,
    /// C1 finite, C2 impossible.
    MinusInfinity,
    BothImpossible,
}

impl RankDiff {
    fn of(c1: Rank, c2: Rank) -> RankDiff {
        match (c1, c2) {
            (Rank::Finite(a), Rank::Finite(b)) => RankDiff::Finite(a as i64 - b as i64),
            (Rank::Infinity, Rank::Finite(_)) => RankDiff::PlusInfinity,
            (Rank::Finite(_), Rank::Infinity) => RankDiff::MinusInfinity,
            (Rank::Infinity, Rank::Infinity) => RankDiff::BothImpossible,
        }
    }

    /// Magnitude of the difference; `None` for the infinite cases (a
    /// both-impossible pair counts as agreement).
    pub fn magnitude(self) -> Option<u64> {
        match self {
            RankDiff::Finite(d) => Some(d.unsigned_abs()),
            RankDiff::BothImpossible => Some(0),
            _ => None,
        }
    }
}

impl fmt::Display for RankDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankDiff::Finite(d) => write!(f, "{d:+}"),
            RankDiff::PlusInfinity => write!(f, "+inf"),
            RankDiff::MinusInfinity => write!(f, "-inf"),
            RankDiff::BothImpossible => write!(f, "both impossible"),
        }
    }
}

/// Side-by-side comparison of the two pipelines for one query.
#[derive(Clone, Debug)]
pub struct DiscrepancyReport {
    pub target: String,
    pub values: Vec<String>,
    /// C1 ranks before the final normalization.
    pub c1_raw: Vec<Rank>,
    pub c1: Vec<Rank>,
    pub c2: Vec<Rank>,
    pub differences: Vec<RankDiff>,
    /// Whether the induced orderings of the target's values agree, ties
    /// being compatible with any strict order.
    pub orderings_agree: bool,
}

/// Runs both pipelines and reports per-value rank differences and the
/// ordering-agreement verdict.
pub fn compare_c1_c2(
    net: &Network,
    evidence: &Assignment,
    target: &str,
    eps: Epsilon,
) -> Result<DiscrepancyReport> {
    let raw = c1_raw(net, evidence, target, eps)?;
    let c1 = c1_pipeline(net, evidence, target, eps)?;
    let c2 = c2_pipeline(net, evidence, target, eps)?;
    let c1_ranks: Vec<Rank> = c1.degrees.iter().map(|d| d.rank()).collect();
    let c2_ranks: Vec<Rank> = c2.degrees.iter().map(|d| d.rank()).collect();
    let differences = c1_ranks
        .iter()
        .zip(&c2_ranks)
        .map(|(&a, &b)| RankDiff::of(a, b))
        .collect();
    Ok(DiscrepancyReport {
        target: target.to_string(),
        values: c1.values.clone(),
        c1_raw: raw.degrees.iter().map(|d| d.rank()).collect(),
        c1: c1_ranks.clone(),
        c2: c2_ranks.clone(),
        differences,
        orderings_agree: orderings_compatible(&c1_ranks, &c2_ranks),
    })
}

/// Renders a discrepancy report as tab-separated text.
pub fn serialize_report(report: &DiscrepancyReport, eps: Epsilon, raw: bool) -> String {
    let mut out = format!("target={} epsilon={eps}\n", report.target);
    out.push_str(if raw {
        "value\tc1_raw\tc1\tc2\tdiff\n"
    } else {
        "value\tc1\tc2\tdiff\n"
    });
    for (i, value) in report.values.iter().enumerate() {
        if raw {
            out.push_str(&format!(
                "{value}\t{}\t{}\t{}\t{}\n",
                report.c1_raw[i], report.c1[i], report.c2[i], report.differences[i]
            ));
        } else {
            out.push_str(&format!(
                "{value}\t{}\t{}\t{}\n",
                report.c1[i], report.c2[i], report.differences[i]
            ));
        }
    }
    out.push_str(&format!(
        "orderings\t{}\n",
        if report.orderings_agree {
            "compatible"
        } else {
            "inverted"
        }
    ));
    out
}

/// True unless some value pair is strictly ordered in opposite directions
/// by the two rank vectors.
pub fn orderings_compatible(a: &[Rank], b: &[Rank]) -> bool {
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let oa = a[i].cmp(&a[j]);
            let ob = b[i].cmp(&b[j]);
            if oa != std::cmp::Ordering::Equal
                && ob != std::cmp::Ordering::Equal
                && oa != ob
            {
                return false;
            }
        }
    }
    true
}
