//! Independent oracles and the seeded model corpus shared by the
//! integration tests. Nothing here calls into the enumeration or search code
//! it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use compartmental::forest::Forest;
use compartmental::indist::{check_bijection, ParamBijection};
use compartmental::ioeq::IOEquation;
use compartmental::model::{AugmentedGraph, Model, ParamLabel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0xC0FFEE;

/// Plain union-find for the acyclicity half of the forest check.
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }
}

/// Undirected acyclicity plus out-degree at most one.
pub fn is_incoming_forest(vertices: usize, edges: &[ParamLabel]) -> bool {
    let mut out_degree = vec![0usize; vertices];
    let mut uf = UnionFind((0..vertices).collect());
    for e in edges {
        out_degree[e.from] += 1;
        if out_degree[e.from] > 1 {
            return false;
        }
        let (a, b) = (uf.find(e.from), uf.find(e.to));
        if a == b {
            return false;
        }
        uf.0[a] = b;
    }
    true
}

/// Every `k`-subset of the edges of `g` that passes [`is_incoming_forest`],
/// sorted.
pub fn brute_force_forests(g: &AugmentedGraph, k: usize) -> Vec<Vec<ParamLabel>> {
    let edges = g.edges();
    assert!(edges.len() <= 20, "subset oracle is exponential");
    let mut out = Vec::new();
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let subset: Vec<ParamLabel> = (0..edges.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| edges[i])
            .collect();
        if is_incoming_forest(g.n() + 1, &subset) {
            out.push(subset);
        }
    }
    out.sort();
    out
}

/// Directed reachability by breadth-first search over the forest's edges.
pub fn reaches(forest: &Forest, from: usize, to: usize) -> bool {
    let mut seen = BTreeSet::from([from]);
    let mut frontier = vec![from];
    while let Some(v) = frontier.pop() {
        if v == to {
            return true;
        }
        for e in forest.edges().iter().filter(|e| e.from == v) {
            if seen.insert(e.to) {
                frontier.push(e.to);
            }
        }
    }
    false
}

/// Weakly connected random digraph with at most one leak and at most
/// `max_params` parameters in total.
pub fn random_model(rng: &mut impl Rng, n: usize, max_params: usize) -> Model {
    let mut edges = BTreeSet::new();
    // random spanning tree with random orientations
    for v in 2..=n {
        let u = rng.gen_range(1..v);
        if rng.gen_bool(0.5) {
            edges.insert((u, v));
        } else {
            edges.insert((v, u));
        }
    }
    let leaks: Vec<usize> = if rng.gen_bool(0.6) { vec![rng.gen_range(1..=n)] } else { vec![] };
    let budget = max_params - leaks.len();
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        if edges.len() >= budget {
            break;
        }
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b {
            edges.insert((a, b));
        }
    }
    let input = rng.gen_range(1..=n);
    let output = rng.gen_range(1..=n);
    Model::new(n, edges, input, output, leaks).expect("generator produces valid models")
}

/// The fixed 50-model random corpus: `2 <= n <= 6`, at most 12 parameters.
pub fn random_corpus() -> Vec<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..50)
        .map(|_| {
            let n = rng.gen_range(2..=6);
            random_model(&mut rng, n, 12)
        })
        .collect()
}

/// Leaky paths and back-edge paths for `2 <= n <= n_max`.
pub fn family_models(n_max: usize) -> Vec<Model> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for i in 1..=n {
            out.push(Model::path_with_leak(n, i).unwrap());
        }
        out.push(Model::path_with_back_edge(n).unwrap());
    }
    out
}

fn permutations(items: &[ParamLabel]) -> Vec<Vec<ParamLabel>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Every bijection between the parameter sets that certifies `(a, b)`.
pub fn exhaustive_certificates(a: &IOEquation, b: &IOEquation) -> Vec<ParamBijection> {
    if a.params.len() != b.params.len() || a.n != b.n {
        return Vec::new();
    }
    let domain: Vec<ParamLabel> = a.params.iter().copied().collect();
    let codomain: Vec<ParamLabel> = b.params.iter().copied().collect();
    permutations(&codomain)
        .into_iter()
        .map(|image| ParamBijection::new(domain.iter().copied().zip(image)).unwrap())
        .filter(|phi| check_bijection(a, b, phi).unwrap().is_certified())
        .collect()
}

/// Shuffles with a fixed seed; used to vary input order in tests.
pub fn shuffled<T: Clone>(items: &[T], seed: u64) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}
