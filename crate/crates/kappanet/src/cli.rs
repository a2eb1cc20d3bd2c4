//! Command-line front end: network file I/O, posterior queries, abstraction,
//! pipeline comparison, fault diagnosis and analytic chain/fork output.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::abstraction::{compare_c1_c2, serialize_report, translate_network, Epsilon};
use crate::analytic::{
    chain_figure_data, chain_network, chain_posterior_vector, fork_kappa_margin_figure_data,
    fork_posterior, fork_probability_figure_data, ChainSpec, ForkSpec, ForkTarget,
};
use crate::diagnosis::{epsilon_sweep, rank_faults, FaultSet};
use crate::format::{parse_network, serialize_network};
use crate::infer::{posterior, PosteriorVector};
use crate::model::{Assignment, Calculus, Network};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "kappanet",
    about = "Exact inference for causal networks under probability and kappa calculi"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a posterior degree vector for a target variable.
    Query {
        #[arg(long)]
        network: PathBuf,
        /// Observations, e.g. x1=pos,x2=neg
        #[arg(long)]
        evidence: Option<String>,
        #[arg(long)]
        target: String,
    },
    /// Translate a probability network into a kappa network.
    Abstract {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the two abstraction pipelines on one query.
    Compare {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        evidence: Option<String>,
        #[arg(long)]
        target: String,
        /// Also print the unnormalized C1 ranks.
        #[arg(long)]
        raw: bool,
    },
    /// Rank fault hypotheses for given evidence.
    Diagnose {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        evidence: Option<String>,
        /// Fault hypotheses, e.g. battery=faulty,gas=empty
        #[arg(long)]
        faults: String,
        /// Epsilon values for a sweep, e.g. 0.2,0.02
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Evaluate the analytic chain structure.
    Chain {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// Emit the per-distance figure data instead of the endpoint query.
        #[arg(long)]
        figure: bool,
    },
    /// Evaluate the analytic fork structure.
    Fork {
        #[arg(long)]
        effects: usize,
        #[arg(long, default_value_t = 0)]
        observe: usize,
        /// Emit the per-observation figure data instead of a single query.
        #[arg(long)]
        figure: bool,
    },
}

fn parse_pairs(text: &str, what: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.split_once('=') {
            Some((var, val)) if !var.is_empty() && !val.is_empty() => {
                pairs.push((var.to_string(), val.to_string()));
            }
            _ => {
                return Err(Error::Parse(format!(
                    "malformed {what} item '{part}', expected Var=value"
                )))
            }
        }
    }
    Ok(pairs)
}

fn parse_evidence(text: Option<&str>) -> Result<Assignment> {
    let mut a = Assignment::new();
    if let Some(text) = text {
        for (var, val) in parse_pairs(text, "evidence")? {
            a.set(var, val);
        }
    }
    Ok(a)
}

fn load_network(path: &PathBuf) -> Result<Network> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_network(&text)
}

fn render_posterior(post: &PosteriorVector) -> String {
    let mut out = format!("variable={} calculus={}\n", post.variable, post.calculus);
    for (value, degree) in post.values.iter().zip(&post.degrees) {
        out.push_str(&format!("{value}\t{degree}\n"));
    }
    out
}

/// Executes one parsed command, returning the text to print.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Query {
            network,
            evidence,
            target,
        } => {
            let net = load_network(&network)?;
            let ev = parse_evidence(evidence.as_deref())?;
            let post = posterior(&net, &ev, &target)?;
            Ok(render_posterior(&post))
        }
        Command::Abstract {
            network,
            epsilon,
            out,
        } => {
            let net = load_network(&network)?;
            if net.calculus != Calculus::Probability {
                return Err(Error::Contract(
                    "abstract expects a probability network".into(),
                ));
            }
            let eps = Epsilon::new(epsilon)?;
            let kappa = translate_network(&net, eps);
            fs::write(&out, serialize_network(&kappa))?;
            Ok(String::new())
        }
        Command::Compare {
            network,
            epsilon,
            evidence,
            target,
            raw,
        } => {
            let net = load_network(&network)?;
            if net.calculus != Calculus::Probability {
                return Err(Error::Contract(
                    "compare expects a probability network".into(),
                ));
            }
            let eps = Epsilon::new(epsilon)?;
            let ev = parse_evidence(evidence.as_deref())?;
            let report = compare_c1_c2(&net, &ev, &target, eps)?;
            Ok(serialize_report(&report, eps, raw))
        }
        Command::Diagnose {
            network,
            evidence,
            faults,
            epsilon,
        } => {
            let net = load_network(&network)?;
            let ev = parse_evidence(evidence.as_deref())?;
            let faults = FaultSet {
                faults: parse_pairs(&faults, "fault")?,
            };
            match epsilon {
                None => {
                    let ranking = rank_faults(&net, &ev, &faults)?;
                    let mut out = format!(
                        "evidence={} calculus={}\n",
                        ranking.evidence, ranking.calculus
                    );
                    for row in &ranking.rows {
                        out.push_str(&format!(
                            "{}\t{}\t{}\n",
                            row.fault,
                            row.degree,
                            row.annotation.sigil()
                        ));
                    }
                    Ok(out)
                }
                Some(list) => {
                    if net.calculus != Calculus::Probability {
                        return Err(Error::Contract(
                            "an epsilon sweep expects a probability network".into(),
                        ));
                    }
                    let epsilons = list
                        .split(',')
                        .map(|e| {
                            e.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::Parse(format!("bad epsilon '{e}'")))
                                .and_then(Epsilon::new)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let report = epsilon_sweep(&net, &[ev], &faults, &epsilons);
                    Ok(format!("{}{}", report.ordering_tsv(), report.belief_tsv()))
                }
            }
        }
        Command::Chain {
            length,
            epsilon,
            figure,
        } => {
            if length < 2 {
                return Err(Error::Contract("chain length must be at least 2".into()));
            }
            Epsilon::new(epsilon)?;
            let spec = ChainSpec {
                epsilon,
                ..ChainSpec::default_with_length(length)
            };
            if figure {
                Ok(chain_figure_data(&spec, length - 1)?.to_tsv())
            } else {
                let prob = chain_posterior_vector(&spec, length, Calculus::Probability)?;
                let kappa = chain_posterior_vector(&spec, length, Calculus::Kappa)?;
                let mut out = format!("target=x{length} evidence=x1=pos\n");
                out.push_str(&format!(
                    "probability\t{}\t{}\n",
                    prob.degrees[0], prob.degrees[1]
                ));
                out.push_str(&format!(
                    "kappa\t{}\t{}\n",
                    kappa.degrees[0], kappa.degrees[1]
                ));
                // engine cross-check on the explicit network
                let net = chain_network(&spec, Calculus::Probability);
                let ev = Assignment::of(&[("x1", "pos")]);
                let engine = posterior(&net, &ev, &format!("x{length}"))?;
                debug_assert_eq!(format!("{}", engine.degrees[0]), format!("{}", prob.degrees[0]));
                Ok(out)
            }
        }
        Command::Fork {
            effects,
            observe,
            figure,
        } => {
            if effects < 2 {
                return Err(Error::Contract("fork needs at least 2 effects".into()));
            }
            let spec = ForkSpec::default_with_effects(effects);
            if figure {
                let mut out = fork_probability_figure_data(&spec)?.to_tsv();
                out.push('\n');
                out.push_str(&fork_kappa_margin_figure_data(&spec)?.to_tsv());
                Ok(out)
            } else {
                if observe > effects - 1 {
                    return Err(Error::Contract(format!(
                        "cannot observe {observe} of {effects} effects and still query the last"
                    )));
                }
                let mut out = format!("observed={observe}\n");
                for (target, label) in [(ForkTarget::Root, "y"), (ForkTarget::LastEffect, "xn")] {
                    for calc in [Calculus::Probability, Calculus::Kappa] {
                        let post = fork_posterior(&spec, observe, target, calc)?;
                        out.push_str(&format!(
                            "{label}\t{calc}\t{}\t{}\n",
                            post.degrees[0], post.degrees[1]
                        ));
                    }
                }
                Ok(out)
            }
        }
    }
}

pub fn run() -> Result<String> {
    execute(Cli::parse())
}
