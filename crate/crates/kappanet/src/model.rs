//! Core network model: variables, degrees, conditional tables and factors.
//!
//! Everything downstream is generic over a [`Calculus`]: probability networks
//! combine degrees by multiplication and merge by addition; kappa networks
//! combine by integer addition (with an absorbing infinity) and merge by
//! minimum. Kappa degrees are exact integers so that equality is testable
//! without tolerances.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

/// Tolerance for probability row normalization checks.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// The two interchangeable calculi a network can be quantified in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Calculus {
    Probability,
    Kappa,
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Calculus::Probability => write!(f, "probability"),
            Calculus::Kappa => write!(f, "kappa"),
        }
    }
}

/// A kappa ranking value: a nonnegative integer or infinity.
///
/// The derived `Ord` places `Infinity` above every finite rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u64),
    Infinity,
}

impl Rank {
    pub const ZERO: Rank = Rank::Finite(0);

    /// Rank addition with absorbing infinity.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Rank) -> Rank {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => Rank::Finite(a + b),
            _ => Rank::Infinity,
        }
    }

    /// Subtracts a finite rank, as used when conditioning. Infinity minus a
    /// finite rank stays infinity.
    ///
    /// Panics if `other` is infinite or exceeds `self`.
    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Rank) -> Rank {
        match (self, other) {
            (Rank::Infinity, Rank::Finite(_)) => Rank::Infinity,
            (Rank::Finite(a), Rank::Finite(b)) => {
                assert!(b <= a, "rank subtraction underflow: {a} - {b}");
                Rank::Finite(a - b)
            }
            (_, Rank::Infinity) => panic!("cannot subtract an infinite rank"),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Rank::Finite(_))
    }

    /// The finite value, panicking on infinity.
    pub fn finite(self) -> u64 {
        match self {
            Rank::Finite(k) => k,
            Rank::Infinity => panic!("expected a finite rank"),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::Infinity => write!(f, "inf"),
        }
    }
}

/// A belief weight under one of the two calculi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Degree {
    Prob(f64),
    Rank(Rank),
}

impl Degree {
    pub fn prob(self) -> f64 {
        match self {
            Degree::Prob(p) => p,
            Degree::Rank(_) => panic!("expected a probability degree, got a kappa rank"),
        }
    }

    pub fn rank(self) -> Rank {
        match self {
            Degree::Rank(k) => k,
            Degree::Prob(_) => panic!("expected a kappa rank, got a probability degree"),
        }
    }

    pub fn conforms_to(self, calc: Calculus) -> bool {
        matches!(
            (self, calc),
            (Degree::Prob(_), Calculus::Probability) | (Degree::Rank(_), Calculus::Kappa)
        )
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Prob(p) => write!(f, "{:.6}", p),
            Degree::Rank(k) => write!(f, "{k}"),
        }
    }
}

impl Calculus {
    /// The neutral element of `combine` (1.0 / rank 0).
    pub fn unit(self) -> Degree {
        match self {
            Calculus::Probability => Degree::Prob(1.0),
            Calculus::Kappa => Degree::Rank(Rank::ZERO),
        }
    }

    /// The absorbing element of `combine` and identity of `merge`
    /// (0.0 / infinity).
    pub fn zero(self) -> Degree {
        match self {
            Calculus::Probability => Degree::Prob(0.0),
            Calculus::Kappa => Degree::Rank(Rank::Infinity),
        }
    }

    /// Conjunctive combination: multiplication or rank addition.
    pub fn combine(self, a: Degree, b: Degree) -> Degree {
        match (self, a, b) {
            (Calculus::Probability, Degree::Prob(x), Degree::Prob(y)) => Degree::Prob(x * y),
            (Calculus::Kappa, Degree::Rank(x), Degree::Rank(y)) => Degree::Rank(x.add(y)),
            _ => panic!("degree does not conform to calculus {self}"),
        }
    }

    /// Disjunctive merge: addition or minimum.
    pub fn merge(self, a: Degree, b: Degree) -> Degree {
        match (self, a, b) {
            (Calculus::Probability, Degree::Prob(x), Degree::Prob(y)) => Degree::Prob(x + y),
            (Calculus::Kappa, Degree::Rank(x), Degree::Rank(y)) => Degree::Rank(x.min(y)),
            _ => panic!("degree does not conform to calculus {self}"),
        }
    }

    /// True if `d` is the calculus zero (probability 0.0 / rank infinity).
    pub fn is_zero(self, d: Degree) -> bool {
        match (self, d) {
            (Calculus::Probability, Degree::Prob(p)) => p == 0.0,
            (Calculus::Kappa, Degree::Rank(k)) => k == Rank::Infinity,
            _ => panic!("degree does not conform to calculus {self}"),
        }
    }
}

/// A discrete variable with a named, ordered domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, values: &[&str]) -> Self {
        Variable {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// A partial assignment of variables to value names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    bindings: BTreeMap<String, String>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn of(pairs: &[(&str, &str)]) -> Self {
        let mut a = Assignment::new();
        for (var, val) in pairs {
            a.set(*var, *val);
        }
        a
    }

    pub fn set(&mut self, var: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.bindings.insert(var.into(), value.into());
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.bindings.get(var).map(|s| s.as_str())
    }

    pub fn contains(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (var, val) in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{var}={val}")?;
            first = false;
        }
        Ok(())
    }
}

/// Per-node quantification: one row of degrees (one per child value) for
/// every full parent assignment, rows in lexicographic parent order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalTable {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<Degree>>,
}

/// A causal network: a DAG of variables, each with one conditional table,
/// evaluated under a single calculus.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub calculus: Calculus,
    pub variables: Vec<Variable>,
    pub tables: Vec<ConditionalTable>,
    /// The abstraction parameter that produced a kappa network, if any.
    pub epsilon: Option<f64>,
}

/// A single invariant violation found by [`Network::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Name of the offending variable, table or edge.
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

impl Network {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn card(&self, index: usize) -> usize {
        self.variables[index].values.len()
    }

    /// The table quantifying `child`, if declared.
    pub fn table_for(&self, child: &str) -> Option<&ConditionalTable> {
        self.tables.iter().find(|t| t.child == child)
    }

    /// Parent indices of variable `index`, per its table.
    pub fn parent_indices(&self, index: usize) -> Vec<usize> {
        let name = &self.variables[index].name;
        match self.table_for(name) {
            Some(t) => t
                .parents
                .iter()
                .filter_map(|p| self.var_index(p))
                .collect(),
            None => Vec::new(),
        }
    }

    /// A topological order of variable indices, or `None` if the parent
    /// links contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, _) in self.variables.iter().enumerate() {
            for p in self.parent_indices(i) {
                indegree[i] += 1;
                children[p].push(i);
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        queue.sort_unstable();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if order.len() == n {
            Some(order)
        } else {
            None
        }
    }

    /// Checks every structural and quantification invariant, reporting all
    /// violations found. A valid network yields an empty report.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        let mut seen_names = HashSet::new();
        for var in &self.variables {
            if !seen_names.insert(var.name.as_str()) {
                report.push(Violation {
                    element: var.name.clone(),
                    message: "duplicate variable name".into(),
                });
            }
            if var.values.len() < 2 {
                report.push(Violation {
                    element: var.name.clone(),
                    message: "variable needs at least 2 values".into(),
                });
            }
            let mut seen_values = HashSet::new();
            for value in &var.values {
                if value.is_empty() {
                    report.push(Violation {
                        element: var.name.clone(),
                        message: "empty value name".into(),
                    });
                }
                if !seen_values.insert(value.as_str()) {
                    report.push(Violation {
                        element: var.name.clone(),
                        message: format!("duplicate value name '{value}'"),
                    });
                }
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                report.push(Violation {
                    element: "epsilon".into(),
                    message: format!("epsilon {eps} outside (0, 1)"),
                });
            }
        }

        let mut quantified: HashMap<&str, usize> = HashMap::new();
        for table in &self.tables {
            *quantified.entry(table.child.as_str()).or_insert(0) += 1;
        }
        for var in &self.variables {
            match quantified.get(var.name.as_str()) {
                None => report.push(Violation {
                    element: var.name.clone(),
                    message: "variable has no conditional table".into(),
                }),
                Some(1) => {}
                Some(n) => report.push(Violation {
                    element: var.name.clone(),
                    message: format!("variable has {n} conditional tables"),
                }),
            }
        }

        for table in &self.tables {
            self.validate_table(table, &mut report);
        }

        if self.topological_order().is_none() {
            report.push(Violation {
                element: "network".into(),
                message: "cycle detected in parent links".into(),
            });
        }
        report
    }

    fn validate_table(&self, table: &ConditionalTable, report: &mut Vec<Violation>) {
        let child = match self.variable(&table.child) {
            Some(v) => v,
            None => {
                report.push(Violation {
                    element: table.child.clone(),
                    message: "table child is not a declared variable".into(),
                });
                return;
            }
        };
        let mut parent_cards = Vec::new();
        for parent in &table.parents {
            match self.variable(parent) {
                Some(p) => parent_cards.push(p.values.len()),
                None => {
                    report.push(Violation {
                        element: table.child.clone(),
                        message: format!("table parent '{parent}' is not a declared variable"),
                    });
                    return;
                }
            }
        }
        let expected_rows = assignment_count(&parent_cards);
        if table.rows.len() != expected_rows {
            report.push(Violation {
                element: table.child.clone(),
                message: format!(
                    "table has {} rows, expected {expected_rows}",
                    table.rows.len()
                ),
            });
            return;
        }
        for (i, row) in table.rows.iter().enumerate() {
            if row.len() != child.values.len() {
                report.push(Violation {
                    element: table.child.clone(),
                    message: format!(
                        "row {i} has {} degrees, expected {}",
                        row.len(),
                        child.values.len()
                    ),
                });
                continue;
            }
            if row.iter().any(|d| !d.conforms_to(self.calculus)) {
                report.push(Violation {
                    element: table.child.clone(),
                    message: format!("row {i} mixes degrees from a different calculus"),
                });
                continue;
            }
            match self.calculus {
                Calculus::Probability => {
                    let mut sum = 0.0;
                    let mut bad_entry = false;
                    for d in row {
                        let p = d.prob();
                        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                            bad_entry = true;
                        }
                        sum += p;
                    }
                    if bad_entry {
                        report.push(Violation {
                            element: table.child.clone(),
                            message: format!("row {i} has a probability outside [0, 1]"),
                        });
                    } else if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        report.push(Violation {
                            element: table.child.clone(),
                            message: format!("row {i} sums to {sum}, expected 1"),
                        });
                    }
                }
                Calculus::Kappa => {
                    let min = row.iter().map(|d| d.rank()).min().unwrap();
                    if min != Rank::ZERO {
                        report.push(Violation {
                            element: table.child.clone(),
                            message: format!("row {i} minimum must be 0, got {min}"),
                        });
                    }
                }
            }
        }
    }
}

/// Number of full assignments of a domain-size vector.
pub fn assignment_count(cards: &[usize]) -> usize {
    cards.iter().product()
}

/// Lexicographic index of a value tuple, first position most significant.
pub fn lex_index(cards: &[usize], values: &[usize]) -> usize {
    debug_assert_eq!(cards.len(), values.len());
    let mut idx = 0;
    for (c, v) in cards.iter().zip(values) {
        debug_assert!(v < c);
        idx = idx * c + v;
    }
    idx
}

/// Inverse of [`lex_index`]: decodes `index` into a value tuple.
pub fn lex_decode(cards: &[usize], mut index: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(cards.len(), 0);
    for (slot, c) in out.iter_mut().zip(cards).rev() {
        *slot = index % c;
        index /= c;
    }
    debug_assert_eq!(index, 0);
}

/// A dense mapping from assignments of a variable subset to degrees.
///
/// Entries are laid out lexicographically over the scope, first scope
/// variable most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub scope: Vec<usize>,
    pub cards: Vec<usize>,
    pub entries: Vec<Degree>,
}

impl Factor {
    /// The scopeless unit factor.
    pub fn unit(calc: Calculus) -> Factor {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            entries: vec![calc.unit()],
        }
    }

    /// Builds the factor for the table of variable `child`, with scope
    /// `parents ++ [child]`.
    pub fn from_table(net: &Network, child: usize) -> Factor {
        let table = net
            .table_for(&net.variables[child].name)
            .expect("validated network has a table per variable");
        let mut scope: Vec<usize> = table
            .parents
            .iter()
            .map(|p| net.var_index(p).expect("validated parent"))
            .collect();
        scope.push(child);
        let cards: Vec<usize> = scope.iter().map(|&v| net.card(v)).collect();
        let mut entries = Vec::with_capacity(assignment_count(&cards));
        for row in &table.rows {
            entries.extend_from_slice(row);
        }
        debug_assert_eq!(entries.len(), assignment_count(&cards));
        Factor {
            scope,
            cards,
            entries,
        }
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    /// Pointwise product (combine) over the union scope.
    pub fn multiply(&self, other: &Factor, calc: Calculus) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(v) {
                scope.push(*v);
                cards.push(*c);
            }
        }
        let self_pos: Vec<usize> = self
            .scope
            .iter()
            .map(|v| scope.iter().position(|s| s == v).unwrap())
            .collect();
        let other_pos: Vec<usize> = other
            .scope
            .iter()
            .map(|v| scope.iter().position(|s| s == v).unwrap())
            .collect();
        let total = assignment_count(&cards);
        let mut entries = Vec::with_capacity(total);
        let mut tuple = Vec::new();
        let mut self_vals = vec![0usize; self.scope.len()];
        let mut other_vals = vec![0usize; other.scope.len()];
        for idx in 0..total {
            lex_decode(&cards, idx, &mut tuple);
            for (slot, &p) in self_vals.iter_mut().zip(&self_pos) {
                *slot = tuple[p];
            }
            for (slot, &p) in other_vals.iter_mut().zip(&other_pos) {
                *slot = tuple[p];
            }
            let a = self.entries[lex_index(&self.cards, &self_vals)];
            let b = other.entries[lex_index(&other.cards, &other_vals)];
            entries.push(calc.combine(a, b));
        }
        Factor {
            scope,
            cards,
            entries,
        }
    }

    /// Merges `var` out of the factor (summation / minimization).
    pub fn marginalize(&self, var: usize, calc: Calculus) -> Factor {
        let pos = self
            .scope
            .iter()
            .position(|&v| v == var)
            .expect("variable in scope");
        let scope: Vec<usize> = self
            .scope
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &v)| v)
            .collect();
        let cards: Vec<usize> = self
            .cards
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &c)| c)
            .collect();
        let total = assignment_count(&cards);
        let mut entries = vec![calc.zero(); total];
        let mut tuple = Vec::new();
        let mut full = vec![0usize; self.scope.len()];
        for (out_entry, out_idx) in entries.iter_mut().zip(0..total) {
            lex_decode(&cards, out_idx, &mut tuple);
            for v in 0..self.cards[pos] {
                let mut t = tuple.iter();
                for (i, slot) in full.iter_mut().enumerate() {
                    *slot = if i == pos { v } else { *t.next().unwrap() };
                }
                let d = self.entries[lex_index(&self.cards, &full)];
                *out_entry = calc.merge(*out_entry, d);
            }
        }
        Factor {
            scope,
            cards,
            entries,
        }
    }

    /// Zeroes every entry where `var` differs from `value`, keeping scope.
    pub fn restrict(&mut self, var: usize, value: usize, calc: Calculus) {
        let pos = match self.scope.iter().position(|&v| v == var) {
            Some(p) => p,
            None => return,
        };
        let mut tuple = Vec::new();
        for idx in 0..self.entries.len() {
            lex_decode(&self.cards, idx, &mut tuple);
            if tuple[pos] != value {
                self.entries[idx] = calc.zero();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_node_chain(rows_b: Vec<Vec<Degree>>) -> Network {
        Network {
            calculus: Calculus::Probability,
            variables: vec![
                Variable::new("a", &["pos", "neg"]),
                Variable::new("b", &["pos", "neg"]),
            ],
            tables: vec![
                ConditionalTable {
                    child: "a".into(),
                    parents: vec![],
                    rows: vec![vec![Degree::Prob(0.5), Degree::Prob(0.5)]],
                },
                ConditionalTable {
                    child: "b".into(),
                    parents: vec!["a".into()],
                    rows: rows_b,
                },
            ],
            epsilon: None,
        }
    }

    #[test]
    fn valid_chain_yields_empty_report() {
        let net = two_node_chain(vec![
            vec![Degree::Prob(0.8), Degree::Prob(0.2)],
            vec![Degree::Prob(0.2), Degree::Prob(0.8)],
        ]);
        assert!(net.validate().is_empty());
    }

    #[test]
    fn unnormalized_probability_row_is_reported() {
        let net = two_node_chain(vec![
            vec![Degree::Prob(0.8), Degree::Prob(0.3)],
            vec![Degree::Prob(0.2), Degree::Prob(0.8)],
        ]);
        let report = net.validate();
        assert_eq!(report.len(), 1);
        assert!(report[0].message.contains("sums to"));
    }

    #[test]
    fn kappa_row_without_zero_minimum_is_reported() {
        let net = Network {
            calculus: Calculus::Kappa,
            variables: vec![Variable::new("a", &["pos", "neg"])],
            tables: vec![ConditionalTable {
                child: "a".into(),
                parents: vec![],
                rows: vec![vec![
                    Degree::Rank(Rank::Finite(1)),
                    Degree::Rank(Rank::Finite(2)),
                ]],
            }],
            epsilon: None,
        };
        let report = net.validate();
        assert_eq!(report.len(), 1);
        assert!(report[0].message.contains("minimum must be 0"));
    }

    #[test]
    fn cycle_is_reported() {
        let net = Network {
            calculus: Calculus::Probability,
            variables: vec![
                Variable::new("a", &["pos", "neg"]),
                Variable::new("b", &["pos", "neg"]),
            ],
            tables: vec![
                ConditionalTable {
                    child: "a".into(),
                    parents: vec!["b".into()],
                    rows: vec![
                        vec![Degree::Prob(0.5), Degree::Prob(0.5)],
                        vec![Degree::Prob(0.5), Degree::Prob(0.5)],
                    ],
                },
                ConditionalTable {
                    child: "b".into(),
                    parents: vec!["a".into()],
                    rows: vec![
                        vec![Degree::Prob(0.5), Degree::Prob(0.5)],
                        vec![Degree::Prob(0.5), Degree::Prob(0.5)],
                    ],
                },
            ],
            epsilon: None,
        };
        let report = net.validate();
        assert!(report.iter().any(|v| v.message.contains("cycle detected")));
    }

    #[test]
    fn combine_and_merge_examples() {
        let p = Calculus::Probability;
        let k = Calculus::Kappa;
        assert_eq!(
            p.combine(Degree::Prob(0.8), Degree::Prob(0.8)),
            Degree::Prob(0.8 * 0.8)
        );
        assert_eq!(
            k.combine(
                Degree::Rank(Rank::Finite(5)),
                Degree::Rank(Rank::Finite(1))
            ),
            Degree::Rank(Rank::Finite(6))
        );
        assert_eq!(
            k.combine(Degree::Rank(Rank::Infinity), Degree::Rank(Rank::Finite(3))),
            Degree::Rank(Rank::Infinity)
        );
        assert_eq!(
            k.merge(
                Degree::Rank(Rank::Finite(2)),
                Degree::Rank(Rank::Finite(5))
            ),
            Degree::Rank(Rank::Finite(2))
        );
        assert_eq!(
            p.merge(Degree::Prob(0.512), Degree::Prob(0.128)),
            Degree::Prob(0.64)
        );
        assert_eq!(
            k.merge(Degree::Rank(Rank::Infinity), Degree::Rank(Rank::Infinity)),
            Degree::Rank(Rank::Infinity)
        );
    }

    fn rank_strategy() -> impl Strategy<Value = Rank> {
        prop_oneof![
            9 => (0u64..100).prop_map(Rank::Finite),
            1 => Just(Rank::Infinity),
        ]
    }

    fn close(a: Degree, b: Degree) -> bool {
        (a.prob() - b.prob()).abs() <= 1e-12
    }

    proptest! {
        #[test]
        fn kappa_semiring_laws(a in rank_strategy(), b in rank_strategy(), c in rank_strategy()) {
            let k = Calculus::Kappa;
            let (da, db, dc) = (Degree::Rank(a), Degree::Rank(b), Degree::Rank(c));
            prop_assert_eq!(k.combine(da, db), k.combine(db, da));
            prop_assert_eq!(k.merge(da, db), k.merge(db, da));
            prop_assert_eq!(k.combine(k.combine(da, db), dc), k.combine(da, k.combine(db, dc)));
            prop_assert_eq!(k.merge(k.merge(da, db), dc), k.merge(da, k.merge(db, dc)));
            prop_assert_eq!(k.combine(da, k.unit()), da);
            prop_assert_eq!(k.merge(da, k.zero()), da);
            // distributivity: a + min(b, c) == min(a + b, a + c)
            prop_assert_eq!(
                k.combine(da, k.merge(db, dc)),
                k.merge(k.combine(da, db), k.combine(da, dc))
            );
        }

        #[test]
        fn probability_semiring_laws(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
            let p = Calculus::Probability;
            let (da, db, dc) = (Degree::Prob(a), Degree::Prob(b), Degree::Prob(c));
            prop_assert_eq!(p.combine(da, db), p.combine(db, da));
            prop_assert_eq!(p.merge(da, db), p.merge(db, da));
            prop_assert!(close(p.combine(p.combine(da, db), dc), p.combine(da, p.combine(db, dc))));
            prop_assert!(close(p.merge(p.merge(da, db), dc), p.merge(da, p.merge(db, dc))));
            prop_assert_eq!(p.combine(da, p.unit()), da);
            prop_assert_eq!(p.merge(da, p.zero()), da);
            prop_assert!(close(
                p.combine(da, p.merge(db, dc)),
                p.merge(p.combine(da, db), p.combine(da, dc))
            ));
        }

        #[test]
        fn lex_index_round_trips(cards in proptest::collection::vec(1usize..=4, 0..=4), seed in any::<usize>()) {
            let total = assignment_count(&cards);
            let idx = seed % total.max(1);
            let mut tuple = Vec::new();
            lex_decode(&cards, idx, &mut tuple);
            prop_assert_eq!(lex_index(&cards, &tuple), idx);
        }
    }
}
