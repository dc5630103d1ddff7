//! Incoming forests of augmented graphs.
//!
//! An incoming forest is an edge subset whose underlying undirected graph is
//! acyclic and in which no vertex has more than one outgoing edge. The
//! enumeration walks the vertices in ascending order and, for each one,
//! either leaves it without an out-edge or picks one of its out-edges,
//! rejecting choices that close an undirected cycle.

use crate::model::{AugmentedGraph, CompartmentId, ParamLabel};
use crate::symbolic::{Monomial, Polynomial};

/// A set of edges of an augmented graph, sorted in label order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Forest {
    edges: Vec<ParamLabel>,
}

impl Forest {
    pub fn new(mut edges: Vec<ParamLabel>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Forest { edges }
    }

    pub fn edges(&self) -> &[ParamLabel] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Whether the edges contain a directed path from `from` to `to`. Every
    /// vertex has at most one out-edge, so the path is the out-edge chain.
    pub fn has_path(&self, from: CompartmentId, to: CompartmentId) -> bool {
        let mut at = from;
        for _ in 0..=self.edges.len() {
            if at == to {
                return true;
            }
            match self.edges.iter().find(|e| e.from == at) {
                Some(e) => at = e.to,
                None => return false,
            }
        }
        false
    }

    /// Product of the edge labels; the empty forest has productivity 1.
    pub fn productivity(&self) -> Monomial {
        Monomial::new(self.edges.clone())
    }

    /// Comma-joined labels, e.g. `a_{21},a_{32}`.
    pub fn render(&self) -> String {
        self.edges
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Union-find with an undo log so the backtracking search can retract unions.
struct RollbackUnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<(usize, usize)>,
}

impl RollbackUnionFind {
    fn new(n: usize) -> Self {
        RollbackUnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` are already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.log.push((a, b));
        true
    }

    fn undo(&mut self) {
        let (a, b) = self.log.pop().expect("undo without union");
        self.parent[b] = b;
        self.size[a] -= self.size[b];
    }
}

struct Search<'a> {
    out_edges: Vec<Vec<ParamLabel>>,
    target: usize,
    uf: RollbackUnionFind,
    chosen: Vec<ParamLabel>,
    found: &'a mut Vec<Forest>,
}

impl Search<'_> {
    fn visit(&mut self, vertex: usize) {
        if self.chosen.len() == self.target {
            self.found.push(Forest::new(self.chosen.clone()));
            return;
        }
        // Each remaining vertex contributes at most one edge.
        let remaining = self.out_edges[vertex..].iter().filter(|e| !e.is_empty()).count();
        if self.chosen.len() + remaining < self.target {
            return;
        }
        self.visit(vertex + 1);
        for i in 0..self.out_edges[vertex].len() {
            let edge = self.out_edges[vertex][i];
            if self.uf.union(edge.from, edge.to) {
                self.chosen.push(edge);
                self.visit(vertex + 1);
                self.chosen.pop();
                self.uf.undo();
            }
        }
    }
}

/// All `k`-edge incoming forests of `g`, in lexicographic order of their
/// sorted edge lists. `k = 0` yields the single empty forest.
pub fn incoming_forests(g: &AugmentedGraph, k: usize) -> Vec<Forest> {
    let vertices = g.n() + 1;
    let mut out_edges = vec![Vec::new(); vertices];
    for e in g.edges() {
        out_edges[e.from].push(*e);
    }
    let mut found = Vec::new();
    if k <= g.edges().len() {
        let mut search = Search {
            out_edges,
            target: k,
            uf: RollbackUnionFind::new(vertices),
            chosen: Vec::new(),
            found: &mut found,
        };
        search.visit(0);
    }
    found.sort_unstable();
    found
}

/// The `k`-edge incoming forests of `g` that contain a directed path `from -> to`.
pub fn path_forests(g: &AugmentedGraph, k: usize, from: CompartmentId, to: CompartmentId) -> Vec<Forest> {
    incoming_forests(g, k)
        .into_iter()
        .filter(|f| f.has_path(from, to))
        .collect()
}

/// Sum of the productivities of the `k`-edge incoming forests of `g`.
pub fn forest_sum(g: &AugmentedGraph, k: usize) -> Polynomial {
    incoming_forests(g, k)
        .iter()
        .map(|f| (f.productivity(), 1))
        .collect()
}

/// Sum of the productivities of [`path_forests`].
pub fn path_forest_sum(g: &AugmentedGraph, k: usize, from: CompartmentId, to: CompartmentId) -> Polynomial {
    path_forests(g, k, from, to)
        .iter()
        .map(|f| (f.productivity(), 1))
        .collect()
}
