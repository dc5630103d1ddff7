//! Sparse multivariate polynomials with integer coefficients over rate
//! parameters.
//!
//! Monomials are sorted multisets of [`ParamLabel`]s. They are ordered first
//! by degree and then lexicographically by their sorted factor lists, and a
//! [`Polynomial`] prints its terms from the largest monomial down. The text
//! form produced by `Display` parses back to the same polynomial.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use thiserror::Error;

use crate::indist::ParamBijection;
use crate::model::ParamLabel;

/// Parameter values keyed by label.
pub type ParamValues = BTreeMap<ParamLabel, f64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("no value assigned to {0}")]
    Unassigned(ParamLabel),
    #[error("{0} is outside the domain of the renaming")]
    OutsideDomain(ParamLabel),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// A product of parameters, stored as a sorted list of factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<ParamLabel>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut factors: Vec<ParamLabel>) -> Self {
        factors.sort_unstable();
        Monomial(factors)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn factors(&self) -> &[ParamLabel] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of times `label` occurs as a factor.
    pub fn multiplicity(&self, label: &ParamLabel) -> usize {
        self.0.iter().filter(|l| *l == label).count()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i]);
                i += 1;
            } else {
                out.push(other.0[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    fn map_labels(&self, f: impl Fn(&ParamLabel) -> Option<ParamLabel>) -> Result<Monomial, ParamLabel> {
        let mut out = Vec::with_capacity(self.0.len());
        for l in &self.0 {
            out.push(f(l).ok_or(*l)?);
        }
        Ok(Monomial::new(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<ParamLabel> for Monomial {
    fn from_iter<I: IntoIterator<Item = ParamLabel>>(iter: I) -> Self {
        Monomial::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let label = self.0[i];
            let run = self.0[i..].iter().take_while(|l| **l == label).count();
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if run == 1 {
                write!(f, "{label}")?;
            } else {
                write!(f, "{label}^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// An integer-coefficient polynomial. No stored coefficient is zero.
///
/// # Panics
///
/// Arithmetic panics if a coefficient overflows `i64`. The polynomials this
/// crate builds for models with up to 12 compartments stay far below that.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, i64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Polynomial::term(Monomial::one(), c)
    }

    pub fn var(label: ParamLabel) -> Self {
        Polynomial::term(Monomial(vec![label]), 1)
    }

    pub fn term(m: Monomial, c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `m`, zero when absent.
    pub fn coefficient(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, i64)> + ExactSizeIterator {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    /// Every label that occurs in some term.
    pub fn labels(&self) -> BTreeSet<ParamLabel> {
        self.terms.keys().flat_map(|m| m.0.iter().copied()).collect()
    }

    pub fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().checked_add(c).expect("coefficient overflow");
                if sum == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Renames every label through `map`.
    pub fn relabel(&self, map: &ParamBijection) -> Result<Polynomial, SymbolicError> {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let image = m
                .map_labels(|l| map.get(l))
                .map_err(SymbolicError::OutsideDomain)?;
            out.add_term(image, *c);
        }
        Ok(out)
    }

    /// Substitutes `values` and evaluates in double precision.
    pub fn evaluate(&self, values: &ParamValues) -> Result<f64, SymbolicError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut prod = *c as f64;
            for l in &m.0 {
                prod *= values.get(l).ok_or(SymbolicError::Unassigned(*l))?;
            }
            acc += prod;
        }
        Ok(acc)
    }
}

/// Elementary symmetric polynomial of degree `k` in the distinct labels of
/// `vars`: the sum of every product of `k` distinct variables.
///
/// `esp(0, _)` is 1 (also for no variables) and `esp(k, _)` is 0 for negative
/// `k` or `k` larger than the number of variables.
pub fn esp(k: i64, vars: &[ParamLabel]) -> Polynomial {
    let vars: Vec<ParamLabel> = vars.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if k < 0 || k as usize > vars.len() {
        return Polynomial::zero();
    }
    let k = k as usize;
    let mut out = Polynomial::zero();
    // Index combinations in lexicographic order.
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.add_term(Monomial::new(idx.iter().map(|&i| vars[i]).collect()), 1);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < vars.len() - k + p) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
    out
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;

    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.checked_neg().expect("coefficient overflow"));
        }
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;

    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self -= &rhs;
        self
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial::zero() - self.clone()
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1.checked_mul(*c2).expect("coefficient overflow"));
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl FromIterator<(Monomial, i64)> for Polynomial {
    fn from_iter<I: IntoIterator<Item = (Monomial, i64)>>(iter: I) -> Self {
        let mut out = Polynomial::zero();
        for (m, c) in iter {
            out.add_term(m, c);
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, &c)) in self.terms.iter().rev().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            match (i, c < 0) {
                (0, false) => {}
                (0, true) => write!(f, "-")?,
                _ => write!(f, " {sign} ")?,
            }
            let abs = c.unsigned_abs();
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| SymbolicError::Parse(format!("{msg} in `{s}`"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        // Split into signed terms; labels never contain a sign.
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut negative = false;
        let mut current = String::new();
        for ch in compact.chars() {
            if ch == '+' || ch == '-' {
                if !current.is_empty() {
                    pieces.push((negative, std::mem::take(&mut current)));
                } else if !pieces.is_empty() || negative {
                    return Err(err("dangling sign"));
                }
                negative = ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(err("trailing sign"));
        }
        pieces.push((negative, current));

        let mut out = Polynomial::zero();
        for (negative, body) in pieces {
            let mut coeff: i64 = 1;
            let mut factors = Vec::new();
            for (i, factor) in body.split('*').enumerate() {
                if factor.is_empty() {
                    return Err(err("empty factor"));
                }
                if factor.bytes().all(|b| b.is_ascii_digit()) {
                    if i != 0 {
                        return Err(err("coefficient must lead its term"));
                    }
                    coeff = factor.parse().map_err(|_| err("coefficient too large"))?;
                    continue;
                }
                let (label, power) = match factor.rsplit_once('^') {
                    Some((l, p)) => (l, p.parse::<usize>().map_err(|_| err("bad exponent"))?),
                    None => (factor, 1),
                };
                let label: ParamLabel = label.parse().map_err(|e: crate::model::LabelParseError| err(&e.to_string()))?;
                factors.extend(std::iter::repeat_n(label, power));
            }
            if negative {
                coeff = -coeff;
            }
            out.add_term(Monomial::new(factors), coeff);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(to: usize, from: usize) -> ParamLabel {
        ParamLabel { to, from }
    }

    fn v(to: usize, from: usize) -> Polynomial {
        Polynomial::var(l(to, from))
    }

    #[test]
    fn addition_and_cancellation() {
        let p = &v(2, 1) + &v(3, 2);
        assert_eq!(p.len(), 2);
        assert!((&v(2, 1) - &v(2, 1)).is_zero());
        assert!((v(2, 1) + (-v(2, 1))).is_zero());

        let (a, b, c) = (l(1, 2), l(1, 3), l(1, 4));
        let sum = &esp(1, &[a, b]) + &esp(1, &[b, c]);
        assert_eq!(sum.to_string(), "a_{14} + 2*a_{13} + a_{12}");
    }

    #[test]
    fn multiplication() {
        let p = &v(0, 3) * &v(4, 3);
        assert_eq!(p.len(), 1);
        assert_eq!(p.to_string(), "a_{03}*a_{43}");
        assert_eq!(&p * &Polynomial::one(), p);

        let (a, b) = (v(2, 1), v(3, 2));
        let prod = &(&a + &b) * &(&a - &b);
        assert_eq!(prod, &(&a * &a) - &(&b * &b));
        assert_eq!(prod.to_string(), "-a_{32}^2 + a_{21}^2");
    }

    #[test]
    fn esp_small_cases() {
        let q = [l(1, 2), l(1, 3), l(1, 4), l(1, 5)];
        let s2 = esp(2, &q);
        assert_eq!(s2.len(), 6);
        assert!(s2.terms().all(|(m, c)| m.degree() == 2 && c == 1));
        assert_eq!(esp(0, &q), Polynomial::one());
        assert_eq!(esp(0, &[]), Polynomial::one());
        assert!(esp(-1, &q).is_zero());
        assert!(esp(5, &q).is_zero());
        assert!(esp(1, &[]).is_zero());
        assert_eq!(esp(4, &q).len(), 1);
        // duplicates are ignored
        assert_eq!(esp(2, &[q[0], q[0], q[1]]), esp(2, &q[..2]));
    }

    #[test]
    fn relabel_running_example() {
        let p: Polynomial = "a_{21}*a_{32}*a_{43} + a_{21}*a_{32}*a_{03}".parse().unwrap();
        let phi = ParamBijection::new([
            (l(0, 3), l(3, 4)),
            (l(2, 1), l(2, 1)),
            (l(3, 2), l(3, 2)),
            (l(4, 3), l(4, 3)),
        ])
        .unwrap();
        let q = p.relabel(&phi).unwrap();
        let expected: Polynomial = "a_{21}*a_{32}*a_{43} + a_{21}*a_{32}*a_{34}".parse().unwrap();
        assert_eq!(q, expected);

        let short = ParamBijection::new([(l(2, 1), l(2, 1))]).unwrap();
        assert_eq!(p.relabel(&short), Err(SymbolicError::OutsideDomain(l(0, 3))));
    }

    #[test]
    fn relabel_maps_esp_to_esp() {
        let q = [l(2, 1), l(3, 2), l(4, 3), l(0, 3)];
        let image = [l(5, 1), l(6, 1), l(7, 1), l(8, 1)];
        let phi = ParamBijection::new(q.iter().copied().zip(image.iter().copied())).unwrap();
        assert_eq!(esp(2, &q).relabel(&phi).unwrap(), esp(2, &image));
    }

    #[test]
    fn evaluation() {
        let vals: ParamValues = [(l(2, 1), 1.5), (l(3, 2), 2.0)].into_iter().collect();
        assert_eq!((&v(2, 1) + &v(3, 2)).evaluate(&vals).unwrap(), 3.5);
        assert_eq!(Polynomial::zero().evaluate(&ParamValues::new()).unwrap(), 0.0);
        assert_eq!(v(4, 3).evaluate(&vals), Err(SymbolicError::Unassigned(l(4, 3))));

        let q = [l(1, 2), l(1, 3), l(1, 4), l(1, 5)];
        let vals: ParamValues = q.iter().copied().zip([1.0, 2.0, 3.0, 4.0]).collect();
        assert_eq!(esp(4, &q).evaluate(&vals).unwrap(), 24.0);
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(Polynomial::zero().to_string(), "0");
        assert_eq!(Polynomial::constant(-3).to_string(), "-3");
        let p: Polynomial = "a_{21}*a_{32}*a_{43} + a_{21}*a_{32}*a_{03}".parse().unwrap();
        assert_eq!(p.to_string(), "a_{21}*a_{32}*a_{43} + a_{03}*a_{21}*a_{32}");
        let q: Polynomial = "-2*a_{21}^2 + 1 - a_{10,9}".parse().unwrap();
        assert_eq!(q.to_string(), "-2*a_{21}^2 - a_{10,9} + 1");
        assert_eq!(q.to_string().parse::<Polynomial>().unwrap(), q);
        for bad in ["", "+", "a_{21} +", "a_{21}**a_{32}", "a_{21}*3", "x"] {
            assert!(bad.parse::<Polynomial>().is_err(), "{bad}");
        }
    }
}
