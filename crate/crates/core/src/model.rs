//! Linear compartmental models and the graphs derived from them.
//!
//! A [`Model`] is the quadruple of a directed graph on compartments `1..=n`,
//! one input compartment, one output compartment and a set of leaky
//! compartments. Every edge `j -> i` carries the rate parameter `a_{ij}` and
//! every leak at `i` carries `a_{0i}`, where `0` is a sink vertex that only
//! exists inside an [`AugmentedGraph`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::Polynomial;

/// A compartment index. Real compartments are `1..=n`; [`SINK`] is reserved.
pub type CompartmentId = usize;

/// The leak sink of an augmented graph.
pub const SINK: CompartmentId = 0;

/// The rate parameter `a_{to,from}` of the flow `from -> to`.
///
/// Ordering is lexicographic on `(to, from)`, so leak parameters `a_{0i}`
/// sort before every edge parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamLabel {
    pub to: CompartmentId,
    pub from: CompartmentId,
}

impl ParamLabel {
    /// Label of the edge `from -> to`.
    pub fn edge(from: CompartmentId, to: CompartmentId) -> Self {
        ParamLabel { to, from }
    }

    /// Label of the leak out of compartment `from`.
    pub fn leak(from: CompartmentId) -> Self {
        ParamLabel { to: SINK, from }
    }

    pub fn is_leak(&self) -> bool {
        self.to == SINK
    }
}

impl fmt::Display for ParamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.to < 10 && self.from < 10 {
            write!(f, "a_{{{}{}}}", self.to, self.from)
        } else {
            write!(f, "a_{{{},{}}}", self.to, self.from)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed parameter label `{0}`")]
pub struct LabelParseError(pub String);

impl FromStr for ParamLabel {
    type Err = LabelParseError;

    /// Accepts `a_{21}`, `a_{10,9}`, `a21` and `a_21`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LabelParseError(s.to_string());
        let body = s.trim().strip_prefix('a').ok_or_else(err)?;
        let body = body.strip_prefix('_').unwrap_or(body);
        let body = match body.strip_prefix('{') {
            Some(rest) => rest.strip_suffix('}').ok_or_else(err)?,
            None => body,
        };
        let (to, from) = match body.split_once(',') {
            Some((t, f)) => (t.trim(), f.trim()),
            None if body.len() == 2 && body.bytes().all(|b| b.is_ascii_digit()) => {
                (&body[..1], &body[1..])
            }
            None => return Err(err()),
        };
        let to: usize = to.parse().map_err(|_| err())?;
        let from: usize = from.parse().map_err(|_| err())?;
        if from == SINK || to == from {
            return Err(err());
        }
        Ok(ParamLabel { to, from })
    }
}

/// One broken model invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoCompartments,
    SelfLoop(CompartmentId),
    EdgeOutOfRange(CompartmentId, CompartmentId),
    DuplicateEdge(CompartmentId, CompartmentId),
    InputOutOfRange(CompartmentId),
    OutputOutOfRange(CompartmentId),
    LeakOutOfRange(CompartmentId),
    DuplicateLeak(CompartmentId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoCompartments => write!(f, "model must have at least one compartment"),
            Violation::SelfLoop(v) => write!(f, "self-loop at compartment {v}"),
            Violation::EdgeOutOfRange(a, b) => write!(f, "edge {a}->{b} has an endpoint outside 1..n"),
            Violation::DuplicateEdge(a, b) => write!(f, "duplicate edge {a}->{b}"),
            Violation::InputOutOfRange(v) => write!(f, "input {v} outside 1..n"),
            Violation::OutputOutOfRange(v) => write!(f, "output {v} outside 1..n"),
            Violation::LeakOutOfRange(v) => write!(f, "leak {v} outside 1..n"),
            Violation::DuplicateLeak(v) => write!(f, "duplicate leak at {v}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{0}")]
    OutOfRange(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A single-input single-output linear compartmental model.
///
/// Edges are `(from, to)` pairs. The JSON form is
/// `{"n": 4, "edges": [[1,2],[2,3],[3,4]], "input": 1, "output": 4, "leaks": [3]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub n: usize,
    pub edges: Vec<(CompartmentId, CompartmentId)>,
    pub input: CompartmentId,
    pub output: CompartmentId,
    pub leaks: Vec<CompartmentId>,
}

impl Model {
    /// Builds a model and rejects it if any invariant is broken. Edges and
    /// leaks are stored sorted.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (CompartmentId, CompartmentId)>,
        input: CompartmentId,
        output: CompartmentId,
        leaks: impl IntoIterator<Item = CompartmentId>,
    ) -> Result<Self, ModelError> {
        let model = Model {
            n,
            edges: edges.into_iter().collect(),
            input,
            output,
            leaks: leaks.into_iter().collect(),
        };
        model.ensure_valid()?;
        Ok(model.canonical())
    }

    /// Every invariant violation, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n;
        let in_range = |v: usize| (1..=n).contains(&v);
        if n == 0 {
            out.push(Violation::NoCompartments);
        }
        let mut seen = BTreeSet::new();
        for &(from, to) in &self.edges {
            if from == to {
                out.push(Violation::SelfLoop(from));
            } else if !in_range(from) || !in_range(to) {
                out.push(Violation::EdgeOutOfRange(from, to));
            }
            if !seen.insert((from, to)) {
                out.push(Violation::DuplicateEdge(from, to));
            }
        }
        if !in_range(self.input) {
            out.push(Violation::InputOutOfRange(self.input));
        }
        if !in_range(self.output) {
            out.push(Violation::OutputOutOfRange(self.output));
        }
        let mut seen = BTreeSet::new();
        for &leak in &self.leaks {
            if !in_range(leak) {
                out.push(Violation::LeakOutOfRange(leak));
            }
            if !seen.insert(leak) {
                out.push(Violation::DuplicateLeak(leak));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    /// Same model with edges sorted by `(from, to)` and leaks ascending.
    pub fn canonical(mut self) -> Self {
        self.edges.sort_unstable();
        self.edges.dedup();
        self.leaks.sort_unstable();
        self.leaks.dedup();
        self
    }

    /// The parameter set: one label per edge plus one per leak.
    pub fn params(&self) -> BTreeSet<ParamLabel> {
        self.edges
            .iter()
            .map(|&(from, to)| ParamLabel::edge(from, to))
            .chain(self.leaks.iter().map(|&i| ParamLabel::leak(i)))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Canonical JSON rendering (sorted edges and leaks).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.clone().canonical()).expect("model serializes")
    }

    /// `G~`: the model graph plus the sink vertex and one edge `i -> 0` per leak.
    pub fn build_gtilde(&self) -> Result<AugmentedGraph, ModelError> {
        self.ensure_valid()?;
        Ok(AugmentedGraph::new(self.n, self.params()))
    }

    /// `G~*`: [`Model::build_gtilde`] without any edge leaving the output.
    pub fn build_gtilde_star(&self) -> Result<AugmentedGraph, ModelError> {
        self.ensure_valid()?;
        let out = self.output;
        Ok(AugmentedGraph::new(
            self.n,
            self.params().into_iter().filter(|l| l.from != out),
        ))
    }

    /// The compartmental matrix `A` with symbolic entries.
    pub fn compartmental_matrix(&self) -> Result<SymbolicMatrix, ModelError> {
        self.ensure_valid()?;
        let n = self.n;
        let mut m = SymbolicMatrix::zeros(n);
        for &(from, to) in &self.edges {
            let label = Polynomial::var(ParamLabel::edge(from, to));
            *m.get_mut(to, from) += &label;
            *m.get_mut(from, from) -= &label;
        }
        for &i in &self.leaks {
            let label = Polynomial::var(ParamLabel::leak(i));
            *m.get_mut(i, i) -= &label;
        }
        Ok(m)
    }

    /// The path `1 -> 2 -> ... -> n` with input 1, output n and one leak at `leak`.
    pub fn path_with_leak(n: usize, leak: CompartmentId) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::OutOfRange(format!("path model needs n >= 2, got {n}")));
        }
        if !(1..=n).contains(&leak) {
            return Err(ModelError::OutOfRange(format!("leak {leak} outside 1..={n}")));
        }
        Model::new(n, (1..n).map(|v| (v, v + 1)), 1, n, [leak])
    }

    /// The leak-free path `1 -> ... -> n` plus the back-edge `n -> n-1`.
    pub fn path_with_back_edge(n: usize) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::OutOfRange(format!("cycle model needs n >= 2, got {n}")));
        }
        Model::new(n, (1..n).map(|v| (v, v + 1)).chain([(n, n - 1)]), 1, n, [])
    }
}

/// A model graph on vertices `0..=n` with labelled edges; vertex 0 is the sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedGraph {
    n: usize,
    edges: Vec<ParamLabel>,
}

impl AugmentedGraph {
    /// Edges are given by their labels, which determine the endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = ParamLabel>) -> Self {
        let edges: BTreeSet<ParamLabel> = edges.into_iter().collect();
        AugmentedGraph {
            n,
            edges: edges.into_iter().collect(),
        }
    }

    /// Number of real compartments; vertices are `0..=n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges in label order.
    pub fn edges(&self) -> &[ParamLabel] {
        &self.edges
    }

    pub fn contains(&self, label: &ParamLabel) -> bool {
        self.edges.binary_search(label).is_ok()
    }
}

/// A square matrix of polynomials, addressed with 1-based compartment ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicMatrix {
    n: usize,
    entries: Vec<Polynomial>,
}

impl SymbolicMatrix {
    pub fn zeros(n: usize) -> Self {
        SymbolicMatrix {
            n,
            entries: vec![Polynomial::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `(row, col)`, both in `1..=n`.
    pub fn get(&self, row: usize, col: usize) -> &Polynomial {
        &self.entries[(row - 1) * self.n + (col - 1)]
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut Polynomial {
        &mut self.entries[(row - 1) * self.n + (col - 1)]
    }

    pub fn column_sum(&self, col: usize) -> Polynomial {
        (1..=self.n).fold(Polynomial::zero(), |acc, row| &acc + self.get(row, col))
    }
}
