//! Input-output equations
//!
//! ```text
//! y^(n) + c_{n-1} y^(n-1) + ... + c_0 y = d_{n-1} u^(n-1) + ... + d_0 u
//! ```
//!
//! of single-input single-output models. [`ioeq_forests`] works for any
//! model: `c_j` sums the productivities of the `(n-j)`-edge incoming forests
//! of `G~`, and `d_j` those of the `(n-j-1)`-edge forests of `G~*` that
//! contain a path from the input to the output. The two path families also
//! have closed forms in elementary symmetric polynomials, and
//! [`charpoly_oracle`] recomputes the `c_j` as the coefficients of
//! `det(sI - A)` without looking at forests at all.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::forest::{forest_sum, path_forest_sum};
use crate::model::{Model, ModelError, ParamLabel, SymbolicMatrix};
use crate::symbolic::{esp, ParamValues, Polynomial, SymbolicError};

/// Largest model the cofactor-expansion oracle accepts.
pub const ORACLE_MAX_COMPARTMENTS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoEqError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("{0}")]
    OutOfRange(String),
}

/// Names one coefficient of an input-output equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoeffIndex {
    /// `c_j`, the coefficient of `y^(j)`.
    Output(usize),
    /// `d_j`, the coefficient of `u^(j)`.
    Input(usize),
}

impl fmt::Display for CoeffIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffIndex::Output(j) => write!(f, "c_{j}"),
            CoeffIndex::Input(j) => write!(f, "d_{j}"),
        }
    }
}

/// Coefficients of one model's input-output equation. `c[j]` is `c_j` and
/// `d[j]` is `d_j`; the leading `c_n = 1` is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IOEquation {
    pub n: usize,
    pub c: Vec<Polynomial>,
    pub d: Vec<Polynomial>,
    /// The parameter set of the model the equation belongs to.
    pub params: BTreeSet<ParamLabel>,
}

impl IOEquation {
    pub fn get(&self, idx: CoeffIndex) -> &Polynomial {
        match idx {
            CoeffIndex::Output(j) => &self.c[j],
            CoeffIndex::Input(j) => &self.d[j],
        }
    }

    /// Coefficients in the order `c_{n-1}, ..., c_0, d_{n-1}, ..., d_0`.
    pub fn indexed(&self) -> impl Iterator<Item = (CoeffIndex, &Polynomial)> {
        let c = (0..self.n).rev().map(|j| (CoeffIndex::Output(j), &self.c[j]));
        let d = (0..self.n).rev().map(|j| (CoeffIndex::Input(j), &self.d[j]));
        c.chain(d)
    }

    /// The equation in `y^(n) + ... = ... d_0 u` layout. Zero coefficients
    /// are left out.
    pub fn render(&self) -> String {
        fn term(coeff: &Polynomial, var: &str, order: usize) -> String {
            let var = match order {
                0 => var.to_string(),
                k => format!("{var}^({k})"),
            };
            if *coeff == Polynomial::one() {
                var
            } else {
                format!("({coeff}) {var}")
            }
        }
        let mut lhs = vec![term(&Polynomial::one(), "y", self.n)];
        for j in (0..self.n).rev() {
            if !self.c[j].is_zero() {
                lhs.push(term(&self.c[j], "y", j));
            }
        }
        let rhs: Vec<String> = (0..self.n)
            .rev()
            .filter(|&j| !self.d[j].is_zero())
            .map(|j| term(&self.d[j], "u", j))
            .collect();
        let rhs = if rhs.is_empty() { "0".to_string() } else { rhs.join(" + ") };
        format!("{} = {}", lhs.join(" + "), rhs)
    }

    /// `{"c": [...], "d": [...]}` with `c[j]`, `d[j]` in canonical text.
    pub fn to_json(&self) -> serde_json::Value {
        let strings = |v: &[Polynomial]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        serde_json::json!({ "c": strings(&self.c), "d": strings(&self.d) })
    }
}

/// Input-output equation of `model` from incoming forests of `G~` and `G~*`.
pub fn ioeq_forests(model: &Model) -> Result<IOEquation, IoEqError> {
    let g = model.build_gtilde()?;
    let g_star = model.build_gtilde_star()?;
    let n = model.n;
    let c = (0..n).map(|j| forest_sum(&g, n - j)).collect();
    let d = (0..n)
        .map(|j| path_forest_sum(&g_star, n - j - 1, model.input, model.output))
        .collect();
    Ok(IOEquation {
        n,
        c,
        d,
        params: model.params(),
    })
}

fn path_edges(n: usize) -> Vec<ParamLabel> {
    (1..n).map(|v| ParamLabel::edge(v, v + 1)).collect()
}

/// `sigma_{n-j}(Q) - x*y*sigma_{n-j-2}(Q \ {x, y})` for `j = 0..n`, where
/// `x, y` is the one pair of parameters in `Q` that never share a forest.
fn esp_coefficients(n: usize, q: &[ParamLabel], pair: [ParamLabel; 2]) -> Vec<Polynomial> {
    let rest: Vec<ParamLabel> = q.iter().copied().filter(|l| !pair.contains(l)).collect();
    let product = &Polynomial::var(pair[0]) * &Polynomial::var(pair[1]);
    (0..n)
        .map(|j| {
            let k = (n - j) as i64;
            &esp(k, q) - &(&product * &esp(k - 2, &rest))
        })
        .collect()
}

fn path_family_equation(n: usize, q: Vec<ParamLabel>, pair: [ParamLabel; 2]) -> IOEquation {
    let c = esp_coefficients(n, &q, pair);
    let mut d = vec![Polynomial::zero(); n];
    d[0] = path_edges(n)
        .into_iter()
        .fold(Polynomial::one(), |acc, l| &acc * &Polynomial::var(l));
    IOEquation {
        n,
        c,
        d,
        params: q.into_iter().collect(),
    }
}

/// Closed form for the path `1 -> ... -> n` with a single leak at `leak < n`.
pub fn ioeq_esp_leak(n: usize, leak: usize) -> Result<IOEquation, IoEqError> {
    if n < 2 || leak < 1 || leak >= n {
        return Err(IoEqError::OutOfRange(format!(
            "leaky path closed form needs 1 <= i < n with n >= 2, got n={n}, i={leak}"
        )));
    }
    let mut q = path_edges(n);
    q.push(ParamLabel::leak(leak));
    let pair = [ParamLabel::leak(leak), ParamLabel::edge(leak, leak + 1)];
    Ok(path_family_equation(n, q, pair))
}

/// Closed form for the leak-free path with the back-edge `n -> n-1`.
pub fn ioeq_esp_cycle(n: usize) -> Result<IOEquation, IoEqError> {
    if n < 2 {
        return Err(IoEqError::OutOfRange(format!("cycle closed form needs n >= 2, got {n}")));
    }
    let mut q = path_edges(n);
    let back = ParamLabel::edge(n, n - 1);
    q.push(back);
    let pair = [ParamLabel::edge(n - 1, n), back];
    Ok(path_family_equation(n, q, pair))
}

/// Evaluates the coefficients of [`ioeq_forests`] at `values`, in the order
/// `c_{n-1}, ..., c_0, d_{n-1}, ..., d_0`.
pub fn coefficient_map(model: &Model, values: &ParamValues) -> Result<Vec<f64>, IoEqError> {
    let eq = ioeq_forests(model)?;
    eq.indexed()
        .map(|(_, p)| p.evaluate(values).map_err(IoEqError::from))
        .collect()
}

/// Polynomial in `s` with polynomial coefficients; index = power of `s`.
type SPoly = Vec<Polynomial>;

fn s_mul(a: &SPoly, b: &SPoly) -> SPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Polynomial::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += &(x * y);
            }
        }
    }
    out
}

fn s_add_assign(acc: &mut SPoly, x: &SPoly, negate: bool) {
    if acc.len() < x.len() {
        acc.resize(x.len(), Polynomial::zero());
    }
    for (a, b) in acc.iter_mut().zip(x) {
        if negate {
            *a -= b;
        } else {
            *a += b;
        }
    }
}

/// Entries of `sI - A`.
fn si_minus_a(a: &SymbolicMatrix) -> Vec<Vec<SPoly>> {
    let n = a.dim();
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    let mut entry = vec![-a.get(i, j)];
                    if i == j {
                        entry.push(Polynomial::one());
                    }
                    entry
                })
                .collect()
        })
        .collect()
}

/// Determinant of the submatrix on `rows` x `cols` by Laplace expansion along
/// the first row, memoised on the set of columns still available.
fn cofactor_det(m: &[Vec<SPoly>], rows: &[usize], cols: &[usize]) -> SPoly {
    fn expand(
        m: &[Vec<SPoly>],
        rows: &[usize],
        cols: &[usize],
        depth: usize,
        mask: u32,
        memo: &mut HashMap<u32, SPoly>,
    ) -> SPoly {
        if depth == rows.len() {
            return vec![Polynomial::one()];
        }
        if let Some(hit) = memo.get(&mask) {
            return hit.clone();
        }
        let mut acc: SPoly = Vec::new();
        let mut sign_negative = false;
        for (ci, &col) in cols.iter().enumerate() {
            if mask & (1 << ci) != 0 {
                continue;
            }
            let entry = &m[rows[depth]][col];
            if entry.iter().any(|p| !p.is_zero()) {
                let minor = expand(m, rows, cols, depth + 1, mask | (1 << ci), memo);
                s_add_assign(&mut acc, &s_mul(entry, &minor), sign_negative);
            }
            sign_negative = !sign_negative;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    expand(m, rows, cols, 0, 0, &mut HashMap::new())
}

fn pad(mut p: SPoly, len: usize) -> Vec<Polynomial> {
    p.resize(len.max(p.len()), Polynomial::zero());
    p.truncate(len);
    p
}

fn check_oracle_size(model: &Model) -> Result<(), IoEqError> {
    model.ensure_valid()?;
    if model.n > ORACLE_MAX_COMPARTMENTS {
        return Err(IoEqError::OutOfRange(format!(
            "cofactor expansion is limited to n <= {ORACLE_MAX_COMPARTMENTS}, got {}",
            model.n
        )));
    }
    Ok(())
}

/// Coefficients of `s^0 .. s^(n-1)` in `det(sI - A)`, by cofactor expansion
/// of the compartmental matrix.
pub fn charpoly_oracle(model: &Model) -> Result<Vec<Polynomial>, IoEqError> {
    check_oracle_size(model)?;
    let m = si_minus_a(&model.compartmental_matrix()?);
    let all: Vec<usize> = (0..model.n).collect();
    Ok(pad(cofactor_det(&m, &all, &all), model.n))
}

/// Coefficients of `s^0 .. s^(n-1)` in the `(out, in)` entry of `adj(sI - A)`,
/// the numerator of the transfer function from input to output.
pub fn numerator_oracle(model: &Model) -> Result<Vec<Polynomial>, IoEqError> {
    check_oracle_size(model)?;
    let m = si_minus_a(&model.compartmental_matrix()?);
    let (input, output) = (model.input - 1, model.output - 1);
    let rows: Vec<usize> = (0..model.n).filter(|&r| r != input).collect();
    let cols: Vec<usize> = (0..model.n).filter(|&c| c != output).collect();
    let mut det = cofactor_det(&m, &rows, &cols);
    if (input + output) % 2 == 1 {
        det = det.into_iter().map(|p| -p).collect();
    }
    Ok(pad(det, model.n))
}
