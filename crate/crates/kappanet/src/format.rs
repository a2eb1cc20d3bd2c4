//! The network document format: a TOML text file declaring the calculus,
//! the variables with their ordered domains, and one table per variable
//! whose rows are keyed by explicit parent-value lists, so row order in the
//! file is irrelevant.
//!
//! Probability degrees are written with 17 significant digits so that
//! serialization round-trips losslessly; kappa degrees are written as
//! nonnegative integers or the token `inf`.

use serde::{Deserialize, Serialize};

use crate::model::{
    assignment_count, lex_index, Calculus, ConditionalTable, Degree, Network, Rank, Variable,
};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct DocNetwork {
    calculus: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    variables: Vec<DocVariable>,
    tables: Vec<DocTable>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocVariable {
    name: String,
    values: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocTable {
    child: String,
    #[serde(default)]
    parents: Vec<String>,
    rows: Vec<DocRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocRow {
    #[serde(default)]
    given: Vec<String>,
    degrees: Vec<String>,
}

fn parse_degree(token: &str, calc: Calculus, child: &str) -> Result<Degree> {
    match calc {
        Calculus::Probability => token
            .parse::<f64>()
            .map(Degree::Prob)
            .map_err(|_| Error::Parse(format!("table '{child}': bad probability '{token}'"))),
        Calculus::Kappa => {
            if token == "inf" {
                Ok(Degree::Rank(Rank::Infinity))
            } else {
                token
                    .parse::<u64>()
                    .map(|k| Degree::Rank(Rank::Finite(k)))
                    .map_err(|_| {
                        Error::Parse(format!("table '{child}': bad kappa degree '{token}'"))
                    })
            }
        }
    }
}

fn format_degree(d: Degree) -> String {
    match d {
        Degree::Prob(p) => format!("{p:.16e}"),
        Degree::Rank(k) => k.to_string(),
    }
}

/// Parses a network document, returning a validated [`Network`].
pub fn parse_network(text: &str) -> Result<Network> {
    let doc: DocNetwork =
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim().replace('\n', " ")))?;
    let calculus = match doc.calculus.as_str() {
        "probability" => Calculus::Probability,
        "kappa" => Calculus::Kappa,
        other => {
            return Err(Error::Parse(format!(
                "calculus must be 'probability' or 'kappa', got '{other}'"
            )))
        }
    };
    let variables: Vec<Variable> = doc
        .variables
        .into_iter()
        .map(|v| Variable {
            name: v.name,
            values: v.values,
        })
        .collect();
    let lookup = |name: &str| -> Result<&Variable> {
        variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };

    let mut tables = Vec::new();
    for table in doc.tables {
        lookup(&table.child)?;
        let parent_vars: Vec<&Variable> = table
            .parents
            .iter()
            .map(|p| lookup(p))
            .collect::<Result<_>>()?;
        let parent_cards: Vec<usize> = parent_vars.iter().map(|p| p.values.len()).collect();
        let row_count = assignment_count(&parent_cards);
        let mut rows: Vec<Option<Vec<Degree>>> = vec![None; row_count];
        for row in &table.rows {
            if row.given.len() != parent_vars.len() {
                return Err(Error::Parse(format!(
                    "table '{}': row key {:?} does not match parents {:?}",
                    table.child, row.given, table.parents
                )));
            }
            let key: Vec<usize> = row
                .given
                .iter()
                .zip(&parent_vars)
                .map(|(val, p)| {
                    p.value_index(val).ok_or_else(|| Error::UnknownValue {
                        var: p.name.clone(),
                        value: val.clone(),
                    })
                })
                .collect::<Result<_>>()?;
            let idx = lex_index(&parent_cards, &key);
            if rows[idx].is_some() {
                return Err(Error::Parse(format!(
                    "table '{}': duplicate row for parent assignment {:?}",
                    table.child, row.given
                )));
            }
            let degrees = row
                .degrees
                .iter()
                .map(|t| parse_degree(t, calculus, &table.child))
                .collect::<Result<_>>()?;
            rows[idx] = Some(degrees);
        }
        let rows: Vec<Vec<Degree>> = rows
            .into_iter()
            .enumerate()
            .map(|(idx, row)| {
                row.ok_or_else(|| {
                    let mut tuple = Vec::new();
                    crate::model::lex_decode(&parent_cards, idx, &mut tuple);
                    let key: Vec<&str> = tuple
                        .iter()
                        .zip(&parent_vars)
                        .map(|(&v, p)| p.values[v].as_str())
                        .collect();
                    Error::Parse(format!(
                        "table '{}': missing row for parent assignment {:?}",
                        table.child, key
                    ))
                })
            })
            .collect::<Result<_>>()?;
        tables.push(ConditionalTable {
            child: table.child,
            parents: table.parents,
            rows,
        });
    }

    let net = Network {
        calculus,
        variables,
        tables,
        epsilon: doc.epsilon,
    };
    let report = net.validate();
    if report.is_empty() {
        Ok(net)
    } else {
        Err(Error::InvalidNetwork(report))
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn string_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", quoted.join(", "))
}

/// Serializes a network to document text. Parsing the output reproduces
/// the network exactly (graph, declared orders, degrees).
pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(&format!("calculus = {}\n", quote(&net.calculus.to_string())));
    if let Some(eps) = net.epsilon {
        out.push_str(&format!("epsilon = {eps}\n"));
    }
    for var in &net.variables {
        out.push_str("\n[[variables]]\n");
        out.push_str(&format!("name = {}\n", quote(&var.name)));
        out.push_str(&format!("values = {}\n", string_list(&var.values)));
    }
    for var in &net.variables {
        let table = net
            .table_for(&var.name)
            .expect("validated network has a table per variable");
        out.push_str("\n[[tables]]\n");
        out.push_str(&format!("child = {}\n", quote(&table.child)));
        out.push_str(&format!("parents = {}\n", string_list(&table.parents)));
        let parent_cards: Vec<usize> = table
            .parents
            .iter()
            .map(|p| net.variable(p).expect("validated parent").values.len())
            .collect();
        let mut tuple = Vec::new();
        for (idx, row) in table.rows.iter().enumerate() {
            crate::model::lex_decode(&parent_cards, idx, &mut tuple);
            let key: Vec<String> = tuple
                .iter()
                .zip(&table.parents)
                .map(|(&v, p)| net.variable(p).unwrap().values[v].clone())
                .collect();
            let degrees: Vec<String> = row.iter().map(|&d| format_degree(d)).collect();
            out.push_str("\n[[tables.rows]]\n");
            out.push_str(&format!("given = {}\n", string_list(&key)));
            out.push_str(&format!("degrees = {}\n", string_list(&degrees)));
        }
    }
    out
}
