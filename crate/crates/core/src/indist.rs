//! Permutation indistinguishability.
//!
//! Two models are permutation indistinguishable when some bijection between
//! their parameter sets carries every coefficient of one input-output
//! equation exactly onto the corresponding coefficient of the other. This
//! module checks a proposed bijection, searches for one, and builds the two
//! explicit maps known for the leaky-path and back-edge families.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ioeq::{CoeffIndex, IOEquation};
use crate::model::ParamLabel;
use crate::symbolic::{Monomial, Polynomial, SymbolicError};

/// Default cap on the parameter count [`search_bijection`] will attempt.
pub const DEFAULT_SEARCH_BOUND: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndistError {
    #[error("renaming is not injective: {0} has two preimages")]
    NotInjective(ParamLabel),
    #[error("renaming maps {0} twice")]
    DuplicateKey(ParamLabel),
    #[error("equations have different orders ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("renaming domain or codomain does not match the parameter sets")]
    DomainMismatch,
    #[error("{0} parameters exceed the search bound of {1}")]
    SearchBound(usize, usize),
    #[error("{0}")]
    OutOfRange(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// A bijective renaming of parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamBijection {
    map: BTreeMap<ParamLabel, ParamLabel>,
}

impl ParamBijection {
    pub fn new(pairs: impl IntoIterator<Item = (ParamLabel, ParamLabel)>) -> Result<Self, IndistError> {
        let mut map = BTreeMap::new();
        let mut image = BTreeSet::new();
        for (a, b) in pairs {
            if map.insert(a, b).is_some() {
                return Err(IndistError::DuplicateKey(a));
            }
            if !image.insert(b) {
                return Err(IndistError::NotInjective(b));
            }
        }
        Ok(ParamBijection { map })
    }

    pub fn identity(labels: impl IntoIterator<Item = ParamLabel>) -> Self {
        ParamBijection {
            map: labels.into_iter().map(|l| (l, l)).collect(),
        }
    }

    pub fn get(&self, label: &ParamLabel) -> Option<ParamLabel> {
        self.map.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<ParamLabel> {
        self.map.keys().copied().collect()
    }

    pub fn codomain(&self) -> BTreeSet<ParamLabel> {
        self.map.values().copied().collect()
    }

    /// Pairs sorted by domain label.
    pub fn pairs(&self) -> impl Iterator<Item = (ParamLabel, ParamLabel)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn inverse(&self) -> ParamBijection {
        ParamBijection {
            map: self.map.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `then ∘ self`: apply `self` first.
    pub fn then(&self, then: &ParamBijection) -> Result<ParamBijection, IndistError> {
        let map = self
            .map
            .iter()
            .map(|(a, b)| then.get(b).map(|c| (*a, c)).ok_or(IndistError::DomainMismatch))
            .collect::<Result<_, _>>()?;
        Ok(ParamBijection { map })
    }

    /// `a -> b` lines sorted by domain label.
    pub fn render(&self) -> String {
        self.pairs().map(|(a, b)| format!("{a} -> {b}\n")).collect()
    }
}

/// A renaming together with the coefficients it was checked on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndistCertificate {
    pub bijection: ParamBijection,
    /// Every coefficient index, each verified as an exact equality.
    pub matched: Vec<CoeffIndex>,
}

/// First coefficient on which a renaming fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub index: CoeffIndex,
    /// The coefficient of the first equation after renaming.
    pub renamed: Polynomial,
    pub expected: Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Certified(IndistCertificate),
    Mismatch(Mismatch),
}

impl CheckOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, CheckOutcome::Certified(_))
    }
}

/// Renames every coefficient of `a` through `phi` and compares it with `b`.
pub fn check_bijection(a: &IOEquation, b: &IOEquation, phi: &ParamBijection) -> Result<CheckOutcome, IndistError> {
    if a.n != b.n {
        return Err(IndistError::DimensionMismatch(a.n, b.n));
    }
    if phi.domain() != a.params || phi.codomain() != b.params {
        return Err(IndistError::DomainMismatch);
    }
    let mut matched = Vec::new();
    for (idx, p) in a.indexed() {
        let renamed = p.relabel(phi)?;
        let expected = b.get(idx);
        if renamed != *expected {
            return Ok(CheckOutcome::Mismatch(Mismatch {
                index: idx,
                renamed,
                expected: expected.clone(),
            }));
        }
        matched.push(idx);
    }
    Ok(CheckOutcome::Certified(IndistCertificate {
        bijection: phi.clone(),
        matched,
    }))
}

/// Per-coefficient occurrence counts of one parameter, in the order of
/// [`IOEquation::indexed`]. Any valid renaming preserves it.
pub type Signature = Vec<usize>;

/// The [`Signature`] of every parameter of `eq`.
pub fn signature_prune(eq: &IOEquation) -> BTreeMap<ParamLabel, Signature> {
    let coeffs: Vec<&Polynomial> = eq.indexed().map(|(_, p)| p).collect();
    eq.params
        .iter()
        .map(|l| {
            let sig = coeffs
                .iter()
                .map(|p| p.terms().map(|(m, _)| m.multiplicity(l)).sum())
                .collect();
            (*l, sig)
        })
        .collect()
}

/// Outcome of [`decide`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Indistinguishable(IndistCertificate),
    /// No renaming exists; `witness` is a coefficient that rules them out.
    Distinguishable { witness: CoeffIndex },
}

/// Cheap shape of a coefficient that any renaming preserves: the sorted
/// list of (degree, coefficient) over its terms.
fn shape(p: &Polynomial) -> Vec<(usize, i64)> {
    let mut s: Vec<(usize, i64)> = p.terms().map(|(m, c)| (m.degree(), c)).collect();
    s.sort_unstable();
    s
}

struct Backtrack<'a> {
    order: Vec<ParamLabel>,
    candidates: Vec<Vec<ParamLabel>>,
    /// Terms of `a` grouped by the search depth at which they become fully assigned.
    triggers: Vec<Vec<(CoeffIndex, &'a Monomial, i64)>>,
    b: &'a IOEquation,
    assigned: BTreeMap<ParamLabel, ParamLabel>,
    used: BTreeSet<ParamLabel>,
    rejections: BTreeMap<CoeffIndex, usize>,
}

impl Backtrack<'_> {
    fn consistent(&mut self, depth: usize) -> bool {
        for &(idx, m, c) in &self.triggers[depth] {
            let image = Monomial::new(m.factors().iter().map(|l| self.assigned[l]).collect());
            if self.b.get(idx).coefficient(&image) != c {
                *self.rejections.entry(idx).or_default() += 1;
                return false;
            }
        }
        true
    }

    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let param = self.order[depth];
        for i in 0..self.candidates[depth].len() {
            let target = self.candidates[depth][i];
            if self.used.contains(&target) {
                continue;
            }
            self.assigned.insert(param, target);
            self.used.insert(target);
            if self.consistent(depth) && self.run(depth + 1) {
                return true;
            }
            self.used.remove(&target);
            self.assigned.remove(&param);
        }
        false
    }
}

/// Decides permutation indistinguishability of two equations, returning a
/// certificate or a witness coefficient.
///
/// Parameters of `a` are tried in order of (signature, label), each against
/// the same-signature parameters of `b` in label order; the first complete
/// renaming found is returned. A term of `a` is checked as soon as all of
/// its factors are assigned. Without a full certificate, the witness is the
/// first coefficient whose shape differs, or otherwise the coefficient that
/// rejected the most partial renamings. Coefficients are scanned from `c_0`
/// upwards, then `d_0` upwards.
pub fn decide(a: &IOEquation, b: &IOEquation, bound: usize) -> Result<Decision, IndistError> {
    if a.n != b.n {
        return Err(IndistError::DimensionMismatch(a.n, b.n));
    }
    let first_index = a.indexed().next().map(|(i, _)| i).unwrap_or(CoeffIndex::Output(0));
    if a.params.len() != b.params.len() {
        return Ok(Decision::Distinguishable { witness: first_index });
    }
    if a.params.len() > bound {
        return Err(IndistError::SearchBound(a.params.len(), bound));
    }
    let mut ascending: Vec<(CoeffIndex, &Polynomial)> = a.indexed().collect();
    ascending.sort_by_key(|(idx, _)| *idx);
    for (idx, p) in ascending {
        if shape(p) != shape(b.get(idx)) {
            return Ok(Decision::Distinguishable { witness: idx });
        }
    }

    let sig_a = signature_prune(a);
    let sig_b = signature_prune(b);
    let mut order: Vec<ParamLabel> = a.params.iter().copied().collect();
    order.sort_by(|x, y| sig_a[x].cmp(&sig_a[y]).then(x.cmp(y)));
    let candidates: Vec<Vec<ParamLabel>> = order
        .iter()
        .map(|p| b.params.iter().copied().filter(|q| sig_b[q] == sig_a[p]).collect())
        .collect();

    let position: BTreeMap<ParamLabel, usize> = order.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut triggers = vec![Vec::new(); order.len().max(1)];
    for (idx, p) in a.indexed() {
        for (m, c) in p.terms() {
            // Constants carry no labels and were compared by `shape`.
            if let Some(depth) = m.factors().iter().map(|l| position[l]).max() {
                triggers[depth].push((idx, m, c));
            }
        }
    }

    let mut search = Backtrack {
        order,
        candidates,
        triggers,
        b,
        assigned: BTreeMap::new(),
        used: BTreeSet::new(),
        rejections: BTreeMap::new(),
    };
    if search.run(0) {
        let phi = ParamBijection {
            map: search.assigned,
        };
        return match check_bijection(a, b, &phi)? {
            CheckOutcome::Certified(cert) => Ok(Decision::Indistinguishable(cert)),
            CheckOutcome::Mismatch(m) => unreachable!("search produced a renaming that fails on {}", m.index),
        };
    }
    let witness = a
        .indexed()
        .map(|(idx, _)| idx)
        .max_by_key(|idx| (search.rejections.get(idx).copied().unwrap_or(0), std::cmp::Reverse(*idx)))
        .unwrap_or(first_index);
    Ok(Decision::Distinguishable { witness })
}

/// Some renaming certifying `(a, b)`, or `None` when the models are
/// distinguishable. See [`decide`] for the search order.
pub fn search_bijection(a: &IOEquation, b: &IOEquation) -> Result<Option<ParamBijection>, IndistError> {
    search_bijection_bounded(a, b, DEFAULT_SEARCH_BOUND)
}

pub fn search_bijection_bounded(
    a: &IOEquation,
    b: &IOEquation,
    bound: usize,
) -> Result<Option<ParamBijection>, IndistError> {
    Ok(match decide(a, b, bound)? {
        Decision::Indistinguishable(cert) => Some(cert.bijection),
        Decision::Distinguishable { .. } => None,
    })
}

fn path_labels(n: usize) -> impl Iterator<Item = ParamLabel> {
    (1..n).map(|v| ParamLabel::edge(v, v + 1))
}

/// Renaming between the path models with single leaks at `i < k < n`: the
/// leak goes to the leak and the path edges leaving `i` and `k` swap.
pub fn phi_leak_pair(n: usize, i: usize, k: usize) -> Result<ParamBijection, IndistError> {
    if !(1 <= i && i < k && k < n) {
        return Err(IndistError::OutOfRange(format!(
            "leak pair needs 1 <= i < k < n, got n={n}, i={i}, k={k}"
        )));
    }
    let out_i = ParamLabel::edge(i, i + 1);
    let out_k = ParamLabel::edge(k, k + 1);
    let pairs = path_labels(n)
        .map(|l| match l {
            l if l == out_i => (l, out_k),
            l if l == out_k => (l, out_i),
            l => (l, l),
        })
        .chain([(ParamLabel::leak(i), ParamLabel::leak(k))]);
    ParamBijection::new(pairs)
}

/// Renaming from the path with a leak at `n-1` to the leak-free path with
/// back-edge `n -> n-1`: the leak becomes the back-edge, the rest is fixed.
pub fn phi_leak_cycle(n: usize) -> Result<ParamBijection, IndistError> {
    if n < 2 {
        return Err(IndistError::OutOfRange(format!("leak/cycle pair needs n >= 2, got {n}")));
    }
    let pairs = path_labels(n)
        .map(|l| (l, l))
        .chain([(ParamLabel::leak(n - 1), ParamLabel::edge(n, n - 1))]);
    ParamBijection::new(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ioeq::ioeq_forests;
    use crate::model::Model;

    fn l(to: usize, from: usize) -> ParamLabel {
        ParamLabel { to, from }
    }

    fn eq_leak(n: usize, i: usize) -> IOEquation {
        ioeq_forests(&Model::path_with_leak(n, i).unwrap()).unwrap()
    }

    fn eq_cycle(n: usize) -> IOEquation {
        ioeq_forests(&Model::path_with_back_edge(n).unwrap()).unwrap()
    }

    #[test]
    fn bijection_construction() {
        assert!(ParamBijection::new([(l(2, 1), l(3, 2)), (l(4, 3), l(3, 2))]).is_err());
        assert!(ParamBijection::new([(l(2, 1), l(3, 2)), (l(2, 1), l(4, 3))]).is_err());
        let phi = ParamBijection::new([(l(2, 1), l(3, 2)), (l(3, 2), l(2, 1))]).unwrap();
        assert_eq!(phi.inverse(), phi);
        assert_eq!(phi.then(&phi).unwrap(), ParamBijection::identity([l(2, 1), l(3, 2)]));
    }

    #[test]
    fn running_example_certificate() {
        let phi = phi_leak_cycle(4).unwrap();
        assert_eq!(phi.get(&l(0, 3)), Some(l(3, 4)));
        assert_eq!(phi.render(), "a_{03} -> a_{34}\na_{21} -> a_{21}\na_{32} -> a_{32}\na_{43} -> a_{43}\n");
        let out = check_bijection(&eq_leak(4, 3), &eq_cycle(4), &phi).unwrap();
        assert!(out.is_certified());

        let swapped = ParamBijection::new([
            (l(0, 3), l(3, 4)),
            (l(2, 1), l(3, 2)),
            (l(3, 2), l(2, 1)),
            (l(4, 3), l(4, 3)),
        ])
        .unwrap();
        assert!(check_bijection(&eq_leak(4, 3), &eq_cycle(4), &swapped).unwrap().is_certified());
    }

    #[test]
    fn identity_certifies_itself() {
        let eq = eq_leak(5, 2);
        let id = ParamBijection::identity(eq.params.iter().copied());
        assert!(check_bijection(&eq, &eq, &id).unwrap().is_certified());
    }

    #[test]
    fn check_reports_first_mismatch_and_errors() {
        let a = eq_leak(4, 3);
        let b = eq_cycle(4);
        let wrong = ParamBijection::new([
            (l(0, 3), l(4, 3)),
            (l(4, 3), l(3, 4)),
            (l(2, 1), l(2, 1)),
            (l(3, 2), l(3, 2)),
        ])
        .unwrap();
        match check_bijection(&a, &b, &wrong).unwrap() {
            CheckOutcome::Mismatch(m) => assert_eq!(m.index, CoeffIndex::Input(0)),
            other => panic!("expected mismatch, got {other:?}"),
        }
        let id = ParamBijection::identity(a.params.iter().copied());
        assert_eq!(check_bijection(&a, &b, &id), Err(IndistError::DomainMismatch));
        assert!(matches!(
            check_bijection(&a, &eq_leak(5, 3), &id),
            Err(IndistError::DimensionMismatch(4, 5))
        ));
    }

    #[test]
    fn search_finds_running_example_map() {
        let phi = search_bijection(&eq_leak(4, 3), &eq_cycle(4)).unwrap().unwrap();
        assert_eq!(phi.get(&l(0, 3)), Some(l(3, 4)));
        assert!(check_bijection(&eq_leak(4, 3), &eq_cycle(4), &phi).unwrap().is_certified());
    }

    #[test]
    fn search_finds_leak_pair_map() {
        let (a, b) = (eq_leak(5, 1), eq_leak(5, 3));
        let phi = search_bijection(&a, &b).unwrap().unwrap();
        assert_eq!(phi.get(&l(0, 1)), Some(l(0, 3)));
        assert!(check_bijection(&a, &b, &phi).unwrap().is_certified());
    }

    #[test]
    fn leak_at_output_is_distinguishable() {
        let decision = decide(&eq_leak(4, 2), &eq_leak(4, 4), DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(decision, Decision::Distinguishable { witness: CoeffIndex::Output(0) });
    }

    #[test]
    fn search_bound_is_enforced() {
        let a = eq_leak(4, 3);
        assert_eq!(search_bijection_bounded(&a, &a, 3), Err(IndistError::SearchBound(4, 3)));
    }

    #[test]
    fn theorem_maps() {
        let phi = phi_leak_pair(4, 1, 3).unwrap();
        let want = ParamBijection::new([
            (l(0, 1), l(0, 3)),
            (l(2, 1), l(4, 3)),
            (l(4, 3), l(2, 1)),
            (l(3, 2), l(3, 2)),
        ])
        .unwrap();
        assert_eq!(phi, want);
        assert!(check_bijection(&eq_leak(4, 1), &eq_leak(4, 3), &phi).unwrap().is_certified());

        let phi = phi_leak_pair(5, 2, 3).unwrap();
        assert_eq!(phi.get(&l(3, 2)), Some(l(4, 3)));
        assert_eq!(phi.get(&l(4, 3)), Some(l(3, 2)));
        assert_eq!(phi.get(&l(0, 2)), Some(l(0, 3)));
        assert!(check_bijection(&eq_leak(5, 2), &eq_leak(5, 3), &phi).unwrap().is_certified());

        assert!(phi_leak_pair(4, 2, 2).is_err());
        assert!(phi_leak_pair(4, 1, 4).is_err());

        let phi = phi_leak_cycle(2).unwrap();
        assert_eq!(phi, ParamBijection::new([(l(0, 1), l(1, 2)), (l(2, 1), l(2, 1))]).unwrap());
        let phi = phi_leak_cycle(6).unwrap();
        assert!(check_bijection(&eq_leak(6, 5), &eq_cycle(6), &phi).unwrap().is_certified());
        assert!(phi_leak_cycle(1).is_err());
    }

    #[test]
    fn signatures_of_running_example() {
        let sig = signature_prune(&eq_leak(4, 3));
        assert_eq!(sig[&l(2, 1)], sig[&l(3, 2)]);
        assert_ne!(sig[&l(4, 3)], sig[&l(0, 3)]);

        let one = ioeq_forests(&Model::new(1, [], 1, 1, [1]).unwrap()).unwrap();
        assert_eq!(signature_prune(&one).len(), 1);

        let multiset = |eq: &IOEquation| {
            let mut v: Vec<Signature> = signature_prune(eq).into_values().collect();
            v.sort();
            v
        };
        assert_eq!(multiset(&eq_leak(4, 3)), multiset(&eq_cycle(4)));
    }
}
