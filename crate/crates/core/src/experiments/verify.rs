//! Seeded verification suites for the analytical identities and inequalities the
//! algorithms are built on. The CLI `verify` subcommand and the acceptance tests
//! both run these.

use super::generate::generate_dual_instance;
use crate::algorithms::pc_wspt_single;
use crate::errors::{dual_fit_verify, ell1, eta_r, eta_s, w_contributions};
use crate::learn::length_to_permutation;
use crate::model::{
    wspt_order, Instance, Job, JobId, LengthPrediction, MachineEnvironment, PermutationPrediction,
};
use crate::simulator::priority_schedule;
use crate::Result;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), cases: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            format!("{}: ok ({} cases)", self.name, self.cases)
        } else {
            format!(
                "{}: FAILED {}/{} cases; first: {}",
                self.name,
                self.failures.len(),
                self.cases,
                self.failures[0]
            )
        }
    }
}

fn random_single<R: Rng>(rng: &mut R, n_max: usize, weighted: bool) -> Instance {
    let n = rng.random_range(2..=n_max);
    let weights: Vec<f64> =
        (0..n).map(|_| if weighted { rng.random_range(1..=9) as f64 } else { 1.0 }).collect();
    let processing: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
    Instance::single(&weights, &processing)
}

fn random_order<R: Rng>(rng: &mut R, n: usize) -> Vec<JobId> {
    let mut order: Vec<JobId> = (1..=n).collect();
    order.shuffle(rng);
    order
}

fn random_released<R: Rng>(rng: &mut R, n_max: usize, env: u8) -> Instance {
    let n = rng.random_range(2..=n_max);
    let m = rng.random_range(2..=4);
    let jobs: Vec<Job> = (0..n)
        .map(|j| {
            Job::new(
                j + 1,
                rng.random_range(1..=9) as f64,
                rng.random_range(0.1..10.0),
                rng.random_range(0.0..5.0),
            )
        })
        .collect();
    let env = match env {
        0 => MachineEnvironment::Single,
        1 => MachineEnvironment::Identical(m),
        _ => MachineEnvironment::Unrelated {
            machines: m,
            rates: (0..m).map(|_| (0..n).map(|_| rng.random_range(1..=3) as f64).collect()).collect(),
        },
    };
    Instance::new(jobs, env)
}

fn random_partition<R: Rng>(rng: &mut R, n: usize, m: usize) -> PermutationPrediction {
    let mut orders: Vec<Vec<JobId>> = vec![Vec::new(); m];
    for id in random_order(rng, n) {
        orders[rng.random_range(0..m)].push(id);
    }
    PermutationPrediction::Assigned(orders)
}

/// Exact identity: the non-preemptive predicted-order objective on one machine
/// without release dates equals the optimum plus the sequence error.
pub fn verify_lemma_identity(seed: u64, cases: usize) -> SuiteReport {
    let mut report = SuiteReport::new("lemma-identity");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for case in 0..cases {
        report.cases += 1;
        let inst = random_single(&mut rng, 50, true);
        let order = random_order(&mut rng, inst.n());
        let sigma = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let opt = pc_wspt_single(&inst, &sigma)
            .and_then(|s| s.objective(&inst.jobs))
            .unwrap();
        let obj = pc_wspt_single(&inst, &order)
            .and_then(|s| s.objective(&inst.jobs))
            .unwrap();
        let eta = eta_s(&inst, &order).unwrap().eta_s;
        if (obj - (opt + eta)).abs() > 1e-9 * (1.0 + opt) {
            report
                .failures
                .push(format!("case {case}: objective {obj} vs opt {opt} + eta {eta}"));
        }
    }
    report
}

/// Dual-fitting certificate on random instances whose processing requirements and
/// release dates are multiples of `s`.
pub fn verify_dual_fitting(seed: u64, cases: usize) -> SuiteReport {
    let mut report = SuiteReport::new("dual-fitting");
    let s = 1.0 + 2.0f64.sqrt();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for case in 0..cases {
        report.cases += 1;
        let inst = generate_dual_instance(s, &mut rng);
        match dual_fit_verify(&inst, s) {
            Ok(rep) => {
                if !rep.feasible {
                    report.failures.push(format!(
                        "case {case}: constraint violated by {} at {:?}",
                        rep.max_violation, rep.violation
                    ));
                } else if !rep.identity {
                    report.failures.push(format!("case {case}: gap identity failed"));
                }
            }
            Err(e) => report.failures.push(format!("case {case}: {e}")),
        }
    }
    report
}

/// The contribution error equals the sequence error for single orders without
/// release dates.
pub fn verify_error_equivalence(seed: u64, cases: usize) -> SuiteReport {
    let mut report = SuiteReport::new("error-equivalence");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for case in 0..cases {
        report.cases += 1;
        let inst = random_single(&mut rng, 40, true);
        let order = random_order(&mut rng, inst.n());
        let sigma = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let e_s = eta_s(&inst, &order).unwrap().eta_s;
        let e_r = eta_r(
            &inst,
            &PermutationPrediction::SingleOrder(order.clone()),
            &PermutationPrediction::SingleOrder(sigma),
        )
        .unwrap()
        .eta_r;
        if (e_s - e_r).abs() > 1e-9 * (1.0 + e_s) {
            report.failures.push(format!("case {case}: eta_s {e_s} vs eta_r {e_r}"));
        }
    }
    report
}

/// The sequence error of a prediction derived from noisy lengths is at most `n`
/// times the absolute length error (unit weights).
pub fn verify_error_bound(seed: u64, cases: usize) -> SuiteReport {
    let mut report = SuiteReport::new("error-length-bound");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for case in 0..cases {
        report.cases += 1;
        let inst = random_single(&mut rng, 40, false);
        let y: Vec<f64> = inst
            .processings()
            .iter()
            .map(|&p| (p + rng.random_range(-3.0..3.0)).max(0.0))
            .collect();
        let order =
            length_to_permutation(&inst.weights(), &LengthPrediction(y.clone())).unwrap();
        let eta = eta_s(&inst, &order).unwrap().eta_s;
        let bound = inst.n() as f64 * ell1(&inst.processings(), &y);
        if eta > bound + 1e-9 {
            report.failures.push(format!("case {case}: eta {eta} > n*l1 {bound}"));
        }
        // Weighted generalization on a weighted copy of the same lengths.
        let winst = random_single(&mut rng, 40, true);
        let wy: Vec<f64> = winst
            .processings()
            .iter()
            .map(|&p| (p + rng.random_range(-3.0..3.0)).max(0.0))
            .collect();
        let worder =
            length_to_permutation(&winst.weights(), &LengthPrediction(wy.clone())).unwrap();
        let weta = eta_s(&winst, &worder).unwrap().eta_s;
        let wbound = winst.weights().iter().sum::<f64>() * ell1(&winst.processings(), &wy);
        if weta > wbound + 1e-9 {
            report.failures.push(format!("case {case}: weighted eta {weta} > {wbound}"));
        }
    }
    report
}

/// Per-job contributions sum to the priority-schedule objective, with release
/// dates, in all environments.
pub fn verify_decomposition(seed: u64, cases_per_env: usize) -> SuiteReport {
    let mut report = SuiteReport::new("decomposition");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for env in 0..3u8 {
        for case in 0..cases_per_env {
            report.cases += 1;
            let inst = random_released(&mut rng, 25, env);
            let pred = if inst.machines() == 1 {
                PermutationPrediction::SingleOrder(random_order(&mut rng, inst.n()))
            } else {
                random_partition(&mut rng, inst.n(), inst.machines())
            };
            let total: f64 = w_contributions(&inst, &pred).unwrap().iter().sum();
            let obj = priority_schedule(&inst, &pred)
                .and_then(|s| s.objective(&inst.jobs))
                .unwrap();
            if (total - obj).abs() > 1e-6 * (1.0 + obj) {
                report
                    .failures
                    .push(format!("env {env} case {case}: contributions {total} vs objective {obj}"));
            }
        }
    }
    report
}

/// Swapping an adjacent, correctly ordered, non-tied pair of the prediction never
/// decreases the sequence error.
pub fn verify_swap_monotonicity(seed: u64, cases: usize) -> SuiteReport {
    let mut report = SuiteReport::new("swap-monotonicity");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for case in 0..cases {
        report.cases += 1;
        let inst = random_single(&mut rng, 30, true);
        let mut order = random_order(&mut rng, inst.n());
        let before = eta_s(&inst, &order).unwrap().eta_s;
        let k = rng.random_range(0..order.len() - 1);
        let (a, b) = (order[k], order[k + 1]);
        let da = inst.jobs[a - 1].weight * inst.jobs[b - 1].processing;
        let db = inst.jobs[b - 1].weight * inst.jobs[a - 1].processing;
        // Only swaps against the reference order add an inversion.
        let a_first_in_ref = da > db || (da == db && a < b);
        if !a_first_in_ref {
            continue;
        }
        order.swap(k, k + 1);
        let after = eta_s(&inst, &order).unwrap().eta_s;
        if after < before - 1e-9 {
            report.failures.push(format!("case {case}: error fell from {before} to {after}"));
        }
    }
    report
}

/// Runs the named suite: `lemmas`, `dual`, `props`, or `all`.
pub fn verify_suite(name: &str, seed: u64) -> Result<Vec<SuiteReport>> {
    let lemmas = |reports: &mut Vec<SuiteReport>| {
        reports.push(verify_lemma_identity(seed, 1000));
    };
    let dual = |reports: &mut Vec<SuiteReport>| {
        reports.push(verify_dual_fitting(seed, 50));
    };
    let props = |reports: &mut Vec<SuiteReport>| {
        reports.push(verify_error_equivalence(seed, 500));
        reports.push(verify_error_bound(seed, 500));
        reports.push(verify_decomposition(seed, 100));
        reports.push(verify_swap_monotonicity(seed, 500));
    };
    let mut reports = Vec::new();
    match name {
        "lemmas" => lemmas(&mut reports),
        "dual" => dual(&mut reports),
        "props" => props(&mut reports),
        "all" => {
            lemmas(&mut reports);
            dual(&mut reports);
            props(&mut reports);
        }
        other => return Err(crate::Error::Parse(format!("unknown verify suite `{other}`"))),
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(verify_lemma_identity(11, 50).passed());
        assert!(verify_dual_fitting(12, 5).passed());
        assert!(verify_error_equivalence(13, 50).passed());
        assert!(verify_error_bound(14, 50).passed());
        assert!(verify_decomposition(15, 10).passed());
        assert!(verify_swap_monotonicity(16, 50).passed());
    }

    #[test]
    fn unknown_suite_rejected() {
        assert!(verify_suite("everything", 1).is_err());
    }

    #[test]
    fn summary_formats() {
        let mut rep = SuiteReport::new("demo");
        rep.cases = 3;
        assert_eq!(rep.summary(), "demo: ok (3 cases)");
        rep.failures.push("case 1: boom".into());
        assert!(rep.summary().contains("FAILED 1/3"));
    }
}
