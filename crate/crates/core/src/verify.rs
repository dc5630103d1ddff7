//! Regenerates the closed forms and indistinguishability results for the
//! leaky-path and back-edge families and reports PASS/FAIL per item.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::indist::{check_bijection, phi_leak_cycle, phi_leak_pair, search_bijection, ParamBijection};
use crate::ioeq::{ioeq_esp_cycle, ioeq_esp_leak, ioeq_forests, IOEquation};
use crate::model::Model;
use crate::numeric::{compare_trajectories, simulate, transport_params, InputSignal, NumericError};
use crate::symbolic::ParamValues;

/// Seed for every random parameter draw in the crate's checks.
pub const SEED: u64 = 0xC0FFEE;
/// Parameter draws per model pair in the numeric transfer check.
pub const TRANSFER_DRAWS: usize = 5;
/// Tolerance on the max-abs output difference of transported simulations.
pub const TRANSFER_TOLERANCE: f64 = 1e-8;
pub const TRANSFER_DT: f64 = 1e-3;
pub const TRANSFER_T_MAX: f64 = 10.0;
/// Largest family size `verify_theorems` accepts.
pub const MAX_FAMILY_SIZE: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub items: Vec<CheckItem>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    fn push(&mut self, name: String, passed: bool, detail: impl Into<String>) {
        self.items.push(CheckItem {
            name,
            passed,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            let verdict = if item.passed { "PASS" } else { "FAIL" };
            if item.detail.is_empty() {
                writeln!(f, "{verdict} {}", item.name)?;
            } else {
                writeln!(f, "{verdict} {} ({})", item.name, item.detail)?;
            }
        }
        let passed = self.items.iter().filter(|i| i.passed).count();
        writeln!(f, "{passed}/{} checks passed", self.items.len())
    }
}

/// Draws positive rates in `[0.5, 2.0)` for every parameter of `model`, in
/// label order.
pub fn random_rates(model: &Model, rng: &mut impl Rng) -> ParamValues {
    model.params().into_iter().map(|l| (l, rng.gen_range(0.5..2.0))).collect()
}

/// Largest output discrepancy between `a` under random rates and `b` under
/// the same rates moved along `phi`, over `draws` seeded draws.
pub fn transfer_discrepancy(a: &Model, b: &Model, phi: &ParamBijection, draws: usize, seed: u64) -> Result<f64, NumericError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let theta = random_rates(a, &mut rng);
        let moved = transport_params(&theta, phi)?;
        let ya = simulate(a, &theta, InputSignal::Impulse, TRANSFER_T_MAX, TRANSFER_DT)?;
        let yb = simulate(b, &moved, InputSignal::Impulse, TRANSFER_T_MAX, TRANSFER_DT)?;
        worst = worst.max(compare_trajectories(&ya, &yb)?);
    }
    Ok(worst)
}

fn certified(a: &IOEquation, b: &IOEquation, phi: &ParamBijection) -> bool {
    check_bijection(a, b, phi).map(|o| o.is_certified()).unwrap_or(false)
}

fn pair_checks(report: &mut Report, tag: &str, models: (&Model, &Model), eqs: (&IOEquation, &IOEquation), phi: &ParamBijection) {
    report.push(format!("certificate {tag}"), certified(eqs.0, eqs.1, phi), "");
    match search_bijection(eqs.0, eqs.1) {
        Ok(Some(found)) => report.push(format!("search {tag}"), certified(eqs.0, eqs.1, &found), ""),
        Ok(None) => report.push(format!("search {tag}"), false, "no renaming found"),
        Err(e) => report.push(format!("search {tag}"), false, e.to_string()),
    }
    match transfer_discrepancy(models.0, models.1, phi, TRANSFER_DRAWS, SEED) {
        Ok(diff) => report.push(
            format!("transfer {tag}"),
            diff <= TRANSFER_TOLERANCE,
            format!("max |dy| = {diff:.3e}"),
        ),
        Err(e) => report.push(format!("transfer {tag}"), false, e.to_string()),
    }
}

/// Runs every family check for `2 <= n <= n_max`.
pub fn verify_theorems(n_max: usize) -> Result<Report, String> {
    if !(2..=MAX_FAMILY_SIZE).contains(&n_max) {
        return Err(format!("n_max must lie in 2..={MAX_FAMILY_SIZE}, got {n_max}"));
    }
    let mut report = Report::default();
    for n in 2..=n_max {
        let leaky: Vec<Model> = (1..=n).map(|i| Model::path_with_leak(n, i).expect("valid family")).collect();
        let cycle = Model::path_with_back_edge(n).expect("valid family");
        let leaky_eqs: Vec<IOEquation> = leaky.iter().map(|m| ioeq_forests(m).expect("valid model")).collect();
        let cycle_eq = ioeq_forests(&cycle).expect("valid model");

        for i in 1..n {
            let ok = ioeq_esp_leak(n, i).map(|e| e == leaky_eqs[i - 1]).unwrap_or(false);
            report.push(format!("closed-form leak n={n} i={i}"), ok, "");
        }
        let ok = ioeq_esp_cycle(n).map(|e| e == cycle_eq).unwrap_or(false);
        report.push(format!("closed-form cycle n={n}"), ok, "");

        let phi = phi_leak_cycle(n).expect("n >= 2");
        pair_checks(
            &mut report,
            &format!("leak-cycle n={n}"),
            (&leaky[n - 2], &cycle),
            (&leaky_eqs[n - 2], &cycle_eq),
            &phi,
        );
        for i in 1..n {
            for k in i + 1..n {
                let phi = phi_leak_pair(n, i, k).expect("i < k < n");
                pair_checks(
                    &mut report,
                    &format!("leak-pair n={n} i={i} k={k}"),
                    (&leaky[i - 1], &leaky[k - 1]),
                    (&leaky_eqs[i - 1], &leaky_eqs[k - 1]),
                    &phi,
                );
            }
        }
    }
    Ok(report)
}
