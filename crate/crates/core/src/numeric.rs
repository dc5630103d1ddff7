//! Fixed-step simulation of `x' = A x + u` and trajectory comparison.
//!
//! Impulse input is realised as the initial state `x(0) = e_in` with `u = 0`;
//! a step input is `u_in = 1` from a zero state. Samples sit on the grid
//! `t_k = k * dt`, so two simulations with the same `dt` and `t_max` can be
//! compared pointwise.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::indist::ParamBijection;
use crate::model::{Model, ModelError, ParamLabel};
use crate::symbolic::ParamValues;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no value for parameter {0}")]
    Missing(ParamLabel),
    #[error("{0} is not a parameter of the model")]
    Unknown(ParamLabel),
    #[error("rate {0} must be positive and finite, got {1}")]
    NonPositiveRate(ParamLabel, f64),
    #[error("invalid time grid: dt={dt}, t_max={t_max}")]
    BadGrid { dt: f64, t_max: f64 },
    #[error("state became non-finite at step {0}")]
    NonFinite(usize),
    #[error("trajectories are sampled on different grids")]
    GridMismatch,
    #[error("parameter values do not match the renaming domain")]
    DomainMismatch,
}

/// Input applied at the input compartment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputSignal {
    Impulse,
    Step,
    None,
}

impl FromStr for InputSignal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "impulse" => Ok(InputSignal::Impulse),
            "step" => Ok(InputSignal::Step),
            "none" => Ok(InputSignal::None),
            other => Err(format!("unknown signal `{other}` (expected impulse, step or none)")),
        }
    }
}

impl fmt::Display for InputSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputSignal::Impulse => "impulse",
            InputSignal::Step => "step",
            InputSignal::None => "none",
        })
    }
}

/// Output samples `y(t_k)` on the grid `t_k = k * dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    /// `t,y` CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,y\n");
        for (t, y) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e},{y:.16e}\n"));
        }
        out
    }
}

/// Dense full state trajectory, used where every compartment matters.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

fn rate_matrix(model: &Model, values: &ParamValues) -> Result<Vec<Vec<f64>>, NumericError> {
    model.ensure_valid()?;
    let params = model.params();
    if let Some(extra) = values.keys().find(|l| !params.contains(l)) {
        return Err(NumericError::Unknown(*extra));
    }
    let rate = |l: ParamLabel| -> Result<f64, NumericError> {
        let v = *values.get(&l).ok_or(NumericError::Missing(l))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(NumericError::NonPositiveRate(l, v));
        }
        Ok(v)
    };
    let n = model.n;
    let mut a = vec![vec![0.0; n]; n];
    for &(from, to) in &model.edges {
        let k = rate(ParamLabel::edge(from, to))?;
        a[to - 1][from - 1] += k;
        a[from - 1][from - 1] -= k;
    }
    for &i in &model.leaks {
        a[i - 1][i - 1] -= rate(ParamLabel::leak(i))?;
    }
    Ok(a)
}

fn steps(t_max: f64, dt: f64) -> Result<usize, NumericError> {
    if !(dt.is_finite() && dt > 0.0 && t_max.is_finite() && t_max >= dt) {
        return Err(NumericError::BadGrid { dt, t_max });
    }
    Ok((t_max / dt + 1e-9).floor() as usize)
}

/// Classical fourth-order Runge-Kutta on the whole state.
pub fn simulate_states(
    model: &Model,
    values: &ParamValues,
    signal: InputSignal,
    t_max: f64,
    dt: f64,
) -> Result<StateTrajectory, NumericError> {
    let a = rate_matrix(model, values)?;
    let steps = steps(t_max, dt)?;
    let n = model.n;
    let input = model.input - 1;
    let mut u = vec![0.0; n];
    let mut x = vec![0.0; n];
    match signal {
        InputSignal::Impulse => x[input] = 1.0,
        InputSignal::Step => u[input] = 1.0,
        InputSignal::None => {}
    }
    let f = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| a[i].iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>() + u[i])
            .collect()
    };
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x.clone());
    for step in 1..=steps {
        let k1 = f(&x);
        let k2 = f(&axpy(&x, &k1, dt / 2.0));
        let k3 = f(&axpy(&x, &k2, dt / 2.0));
        let k4 = f(&axpy(&x, &k3, dt));
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite(step));
        }
        times.push(step as f64 * dt);
        states.push(x.clone());
    }
    Ok(StateTrajectory { times, states })
}

/// Output-compartment trajectory of `model` under `signal`.
pub fn simulate(
    model: &Model,
    values: &ParamValues,
    signal: InputSignal,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory, NumericError> {
    let full = simulate_states(model, values, signal, t_max, dt)?;
    let out = model.output - 1;
    Ok(Trajectory {
        values: full.states.iter().map(|x| x[out]).collect(),
        times: full.times,
    })
}

/// Largest absolute pointwise difference.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory) -> Result<f64, NumericError> {
    if a.times != b.times || a.values.len() != b.values.len() {
        return Err(NumericError::GridMismatch);
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Moves parameter values along a renaming: the result gives `phi(p)` the
/// value that `values` gives `p`.
pub fn transport_params(values: &ParamValues, phi: &ParamBijection) -> Result<ParamValues, NumericError> {
    if values.len() != phi.len() {
        return Err(NumericError::DomainMismatch);
    }
    values
        .iter()
        .map(|(l, v)| phi.get(l).map(|img| (img, *v)).ok_or(NumericError::DomainMismatch))
        .collect()
}
