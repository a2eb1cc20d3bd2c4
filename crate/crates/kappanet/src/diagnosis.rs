//! Fault ranking under both calculi, tabular belief annotation, and the
//! epsilon sweep that measures how well probability and kappa orderings
//! agree as the abstraction coarsens.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::abstraction::{c1_pipeline, translate_network, Epsilon};
use crate::infer::posterior;
use crate::model::{Assignment, Calculus, ConditionalTable, Degree, Network, Rank, Variable};
use crate::{Error, Result};

/// The fault hypotheses of a diagnosis task: variable plus its designated
/// faulty value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSet {
    pub faults: Vec<(String, String)>,
}

impl FaultSet {
    pub fn of(pairs: &[(&str, &str)]) -> Self {
        FaultSet {
            faults: pairs
                .iter()
                .map(|(v, f)| (v.to_string(), f.to_string()))
                .collect(),
        }
    }
}

/// Belief annotation of a fault row, kappa calculus only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Annotation {
    /// The fault is believed present ("+").
    Believed,
    /// Neither the fault nor its absence is believed ("?").
    Uncommitted,
    None,
}

impl Annotation {
    pub fn sigil(self) -> &'static str {
        match self {
            Annotation::Believed => "+",
            Annotation::Uncommitted => "?",
            Annotation::None => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaultRow {
    pub fault: String,
    /// Posterior degree of the designated faulty value.
    pub degree: Degree,
    pub annotation: Annotation,
}

/// Faults sorted most-plausible first, with kappa belief annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultRanking {
    pub calculus: Calculus,
    pub evidence: Assignment,
    pub rows: Vec<FaultRow>,
}

impl FaultRanking {
    fn degree_of(&self, fault: &str) -> Option<Degree> {
        self.rows
            .iter()
            .find(|r| r.fault == fault)
            .map(|r| r.degree)
    }

    /// Greater means the first degree is the more plausible one.
    fn plausibility(&self, a: Degree, b: Degree) -> Ordering {
        match self.calculus {
            Calculus::Probability => a.prob().partial_cmp(&b.prob()).expect("finite posterior"),
            Calculus::Kappa => b.rank().cmp(&a.rank()),
        }
    }

    /// Fault names with annotation sigils, most plausible first.
    pub fn cells(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| format!("{}{}", r.fault, r.annotation.sigil()))
            .collect()
    }
}

/// Pairwise agreement between two fault rankings. Pairs tied in either
/// ranking are non-comparable (a tie is compatible with any strict order).
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingAgreement {
    pub comparable: usize,
    pub agreeing: usize,
    pub score: f64,
    pub inverted: Vec<(String, String)>,
}

/// Classifies a kappa posterior of a fault variable against its designated
/// faulty value: believed if the faulty value alone has rank 0, uncommitted
/// if it shares rank 0 with another value.
fn annotate(values: &[String], ranks: &[Rank], faulty: &str) -> Annotation {
    let fi = values.iter().position(|v| v == faulty).expect("checked");
    if ranks[fi] != Rank::ZERO {
        return Annotation::None;
    }
    let other_zero = ranks
        .iter()
        .enumerate()
        .any(|(i, &r)| i != fi && r == Rank::ZERO);
    if other_zero {
        Annotation::Uncommitted
    } else {
        Annotation::Believed
    }
}

/// Ranks fault hypotheses by their posterior degree under the network's
/// calculus, most plausible first; ties keep fault declaration order.
pub fn rank_faults(
    net: &Network,
    evidence: &Assignment,
    faults: &FaultSet,
) -> Result<FaultRanking> {
    let mut rows = Vec::new();
    for (var, faulty) in &faults.faults {
        if evidence.contains(var) {
            return Err(Error::TargetObserved(var.clone()));
        }
        let post = posterior(net, evidence, var)?;
        let degree = post.degree_of(faulty).ok_or_else(|| Error::UnknownValue {
            var: var.clone(),
            value: faulty.clone(),
        })?;
        let annotation = match net.calculus {
            Calculus::Kappa => {
                let ranks: Vec<Rank> = post.degrees.iter().map(|d| d.rank()).collect();
                annotate(&post.values, &ranks, faulty)
            }
            Calculus::Probability => Annotation::None,
        };
        rows.push(FaultRow {
            fault: var.clone(),
            degree,
            annotation,
        });
    }
    let ranking = FaultRanking {
        calculus: net.calculus,
        evidence: evidence.clone(),
        rows: Vec::new(),
    };
    // stable sort keeps declaration order among equal degrees
    rows.sort_by(|a, b| ranking.plausibility(b.degree, a.degree));
    Ok(FaultRanking { rows, ..ranking })
}

/// Counts, over all fault pairs strictly ordered in both rankings, how many
/// are ordered identically.
pub fn compare_orderings(a: &FaultRanking, b: &FaultRanking) -> Result<OrderingAgreement> {
    let names_a: BTreeSet<&str> = a.rows.iter().map(|r| r.fault.as_str()).collect();
    let names_b: BTreeSet<&str> = b.rows.iter().map(|r| r.fault.as_str()).collect();
    if names_a != names_b || names_a.len() != a.rows.len() || names_b.len() != b.rows.len() {
        return Err(Error::MismatchedFaultSets);
    }
    let names: Vec<&str> = a.rows.iter().map(|r| r.fault.as_str()).collect();
    let mut comparable = 0;
    let mut agreeing = 0;
    let mut inverted = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            let oa = a.plausibility(
                a.degree_of(names[i]).unwrap(),
                a.degree_of(names[j]).unwrap(),
            );
            let ob = b.plausibility(
                b.degree_of(names[i]).unwrap(),
                b.degree_of(names[j]).unwrap(),
            );
            if oa == Ordering::Equal || ob == Ordering::Equal {
                continue;
            }
            comparable += 1;
            if oa == ob {
                agreeing += 1;
            } else {
                inverted.push((names[i].to_string(), names[j].to_string()));
            }
        }
    }
    let score = if comparable == 0 {
        1.0
    } else {
        agreeing as f64 / comparable as f64
    };
    Ok(OrderingAgreement {
        comparable,
        agreeing,
        score,
        inverted,
    })
}

/// A belief cell: what each kappa route concludes about one fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeliefMark {
    /// The fault is believed absent.
    Ok,
    /// The fault is believed present.
    Bad,
    /// Uncommitted.
    Unknown,
}

impl fmt::Display for BeliefMark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeliefMark::Ok => write!(f, "ok"),
            BeliefMark::Bad => write!(f, "bad"),
            BeliefMark::Unknown => write!(f, "?"),
        }
    }
}

fn belief_mark(values: &[String], ranks: &[Rank], faulty: &str) -> BeliefMark {
    match annotate(values, ranks, faulty) {
        Annotation::Believed => BeliefMark::Bad,
        Annotation::Uncommitted => BeliefMark::Unknown,
        Annotation::None => BeliefMark::Ok,
    }
}

/// One fault's C2-vs-C1 belief comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultBeliefCell {
    pub fault: String,
    /// Kappa-network inference (C2).
    pub c2: BeliefMark,
    /// Abstraction of the probabilistic posterior (C1).
    pub c1: BeliefMark,
    /// True when the two routes disagree (rendered as "*").
    pub differs: bool,
}

/// One evidence run of the sweep.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub evidence: Assignment,
    pub probability: FaultRanking,
    /// One kappa ranking per epsilon, C2 route.
    pub kappa: Vec<(f64, FaultRanking)>,
    /// Probability-vs-kappa ordering agreement per epsilon.
    pub agreements: Vec<(f64, OrderingAgreement)>,
    /// Belief cells per epsilon.
    pub beliefs: Vec<(f64, Vec<FaultBeliefCell>)>,
}

#[derive(Clone, Debug)]
pub enum RunReport {
    Ok(Box<RunResult>),
    Failed { evidence: Assignment, message: String },
}

/// The full sweep output: ordering rows and belief cells, for every run
/// and epsilon.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub epsilons: Vec<f64>,
    pub runs: Vec<RunReport>,
}

/// Runs the fault-ordering experiment: for each evidence run, the
/// probability ordering plus one kappa ordering per epsilon, with
/// per-fault C1-vs-C2 belief cells. A run with impossible evidence is
/// reported in-row; the sweep continues.
pub fn epsilon_sweep(
    net: &Network,
    runs: &[Assignment],
    faults: &FaultSet,
    epsilons: &[Epsilon],
) -> SweepReport {
    debug_assert_eq!(net.calculus, Calculus::Probability);
    let kappa_nets: Vec<(f64, Network)> = epsilons
        .iter()
        .map(|&e| (e.value(), translate_network(net, e)))
        .collect();
    let mut reports = Vec::new();
    for evidence in runs {
        match sweep_run(net, &kappa_nets, evidence, faults, epsilons) {
            Ok(result) => reports.push(RunReport::Ok(Box::new(result))),
            Err(e) => reports.push(RunReport::Failed {
                evidence: evidence.clone(),
                message: e.to_string(),
            }),
        }
    }
    SweepReport {
        epsilons: epsilons.iter().map(|e| e.value()).collect(),
        runs: reports,
    }
}

fn sweep_run(
    net: &Network,
    kappa_nets: &[(f64, Network)],
    evidence: &Assignment,
    faults: &FaultSet,
    epsilons: &[Epsilon],
) -> Result<RunResult> {
    let probability = rank_faults(net, evidence, faults)?;
    let mut kappa = Vec::new();
    let mut agreements = Vec::new();
    let mut beliefs = Vec::new();
    for ((eps_value, kappa_net), eps) in kappa_nets.iter().zip(epsilons) {
        let ranking = rank_faults(kappa_net, evidence, faults)?;
        let agreement = compare_orderings(&probability, &ranking)?;
        let mut cells = Vec::new();
        for (var, faulty) in &faults.faults {
            let c2_post = posterior(kappa_net, evidence, var)?;
            let c2_ranks: Vec<Rank> = c2_post.degrees.iter().map(|d| d.rank()).collect();
            let c2 = belief_mark(&c2_post.values, &c2_ranks, faulty);
            let c1_post = c1_pipeline(net, evidence, var, *eps)?;
            let c1_ranks: Vec<Rank> = c1_post.degrees.iter().map(|d| d.rank()).collect();
            let c1 = belief_mark(&c1_post.values, &c1_ranks, faulty);
            cells.push(FaultBeliefCell {
                fault: var.clone(),
                c2,
                c1,
                differs: c1 != c2,
            });
        }
        kappa.push((*eps_value, ranking));
        agreements.push((*eps_value, agreement));
        beliefs.push((*eps_value, cells));
    }
    Ok(RunResult {
        evidence: evidence.clone(),
        probability,
        kappa,
        agreements,
        beliefs,
    })
}

impl SweepReport {
    /// Ordering table as tab-separated text: per run, one probability row and
    /// one kappa row per epsilon, faults most plausible first.
    pub fn ordering_tsv(&self) -> String {
        let mut out = String::from("run\tevidence\tcalculus\tordering\n");
        for (n, run) in self.runs.iter().enumerate() {
            match run {
                RunReport::Ok(result) => {
                    out.push_str(&format!(
                        "{}\t{}\tPr\t{}\n",
                        n + 1,
                        result.evidence,
                        result.probability.cells().join("\t")
                    ));
                    for ((eps, ranking), (_, agreement)) in
                        result.kappa.iter().zip(&result.agreements)
                    {
                        out.push_str(&format!(
                            "{}\t{}\tkappa eps={eps} score={:.2}\t{}\n",
                            n + 1,
                            result.evidence,
                            agreement.score,
                            ranking.cells().join("\t")
                        ));
                    }
                }
                RunReport::Failed { evidence, message } => {
                    out.push_str(&format!("{}\t{}\terror\t{}\n", n + 1, evidence, message));
                }
            }
        }
        out
    }

    /// Belief table as tab-separated text: per epsilon and run, one
    /// kappa/Pr cell pair per fault, "*" marking route disagreements.
    pub fn belief_tsv(&self) -> String {
        let mut out = String::new();
        let faults: Vec<&str> = match self.runs.iter().find_map(|r| match r {
            RunReport::Ok(res) => Some(res),
            _ => None,
        }) {
            Some(res) => res
                .beliefs
                .first()
                .map(|(_, cells)| cells.iter().map(|c| c.fault.as_str()).collect())
                .unwrap_or_default(),
            None => Vec::new(),
        };
        for &eps in &self.epsilons {
            out.push_str(&format!("# beliefs at eps={eps}\n"));
            out.push_str("evidence");
            for f in &faults {
                out.push_str(&format!("\t{f} kappa\t{f} Pr"));
            }
            out.push('\n');
            for run in &self.runs {
                match run {
                    RunReport::Ok(result) => {
                        out.push_str(&result.evidence.to_string());
                        if let Some((_, cells)) =
                            result.beliefs.iter().find(|(e, _)| *e == eps)
                        {
                            for cell in cells {
                                let star = if cell.differs { "*" } else { "" };
                                out.push_str(&format!("\t{}\t{}{star}", cell.c2, cell.c1));
                            }
                        }
                        out.push('\n');
                    }
                    RunReport::Failed { evidence, message } => {
                        out.push_str(&format!("{evidence}\terror: {message}\n"));
                    }
                }
            }
        }
        out
    }
}

/// The diagnostic car network: the classic structure with this project's
/// own conditional tables (no canonical quantification exists). Faults: alternator, battery, fuel_pump, gas, plugs and
/// starter; observables: engine_start, gas_gauge, lights, engine_turn_over.
pub fn car_network() -> Network {
    let b = |name: &str, pos: &str, neg: &str| Variable::new(name, &[pos, neg]);
    let variables = vec![
        b("alternator", "ok", "faulty"),
        b("battery", "ok", "faulty"),
        b("starter", "ok", "faulty"),
        b("fuel_pump", "ok", "faulty"),
        b("gas", "not_empty", "empty"),
        b("plugs", "ok", "faulty"),
        b("charge_delivered", "yes", "no"),
        b("battery_power", "good", "weak"),
        b("lights", "work", "dont"),
        b("radio", "works", "dead"),
        b("gas_gauge", "not_empty", "empty"),
        b("engine_turn_over", "yes", "no"),
        b("fuel_delivered", "yes", "no"),
        b("spark", "yes", "no"),
        b("combustion", "possible", "impossible"),
        b("engine_start", "yes", "no"),
    ];
    let row = |p: f64| vec![Degree::Prob(p), Degree::Prob(1.0 - p)];
    let table = |child: &str, parents: &[&str], ps: &[f64]| ConditionalTable {
        child: child.into(),
        parents: parents.iter().map(|p| p.to_string()).collect(),
        rows: ps.iter().map(|&p| row(p)).collect(),
    };
    let tables = vec![
        table("alternator", &[], &[0.997]),
        table("battery", &[], &[0.998]),
        table("starter", &[], &[0.99]),
        table("fuel_pump", &[], &[0.95]),
        table("gas", &[], &[0.997]),
        table("plugs", &[], &[0.998]),
        table("charge_delivered", &["alternator"], &[0.995, 0.01]),
        table(
            "battery_power",
            &["battery", "charge_delivered"],
            &[0.995, 0.2, 0.1, 0.005],
        ),
        table("lights", &["battery_power"], &[0.98, 0.05]),
        table("radio", &["battery_power"], &[0.97, 0.1]),
        table(
            "gas_gauge",
            &["battery_power", "gas"],
            &[0.98, 0.03, 0.6, 0.1],
        ),
        table(
            "engine_turn_over",
            &["battery_power", "starter"],
            &[0.95, 0.02, 0.08, 0.005],
        ),
        table(
            "fuel_delivered",
            &["fuel_pump", "gas"],
            &[0.99, 0.01, 0.05, 0.004],
        ),
        table("spark", &["plugs"], &[0.985, 0.03]),
        table(
            "combustion",
            &["fuel_delivered", "spark"],
            &[0.995, 0.02, 0.015, 0.001],
        ),
        // every engine_start row stays in the (0.02, 0.98) band so that at
        // eps = 0.02 the abstracted matrix commits to nothing, while at
        // eps = 0.2 each row commits
        table(
            "engine_start",
            &["engine_turn_over", "combustion"],
            &[0.95, 0.05, 0.03, 0.025],
        ),
    ];
    Network {
        calculus: Calculus::Probability,
        variables,
        tables,
        epsilon: None,
    }
}

/// The six fault hypotheses of the car network.
pub fn car_faults() -> FaultSet {
    FaultSet::of(&[
        ("alternator", "faulty"),
        ("battery", "faulty"),
        ("fuel_pump", "faulty"),
        ("gas", "empty"),
        ("plugs", "faulty"),
        ("starter", "faulty"),
    ])
}

/// The eight evidence runs: engine_start = no crossed with the three other
/// observables.
pub fn car_evidence_runs() -> Vec<Assignment> {
    let mut runs = Vec::new();
    for gauge in ["not_empty", "empty"] {
        for lights in ["work", "dont"] {
            for turn_over in ["yes", "no"] {
                runs.push(Assignment::of(&[
                    ("engine_start", "no"),
                    ("gas_gauge", gauge),
                    ("lights", lights),
                    ("engine_turn_over", turn_over),
                ]));
            }
        }
    }
    runs
}
