//! Randomized property tests over the core types and engines.

use itertools::Itertools;
use predsched_core::algorithms::{
    pc_wspt_single, run_policy, PolicySpec, WdeqPolicy, WrrPolicy,
};
use predsched_core::errors::eta_s;
use predsched_core::model::{
    objective, wspt_order, Instance, Job, MachineEnvironment, PermutationPrediction,
};
use predsched_core::simulator::{priority_schedule, simulate, verify_schedule};
use proptest::prelude::*;

fn single_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    prop::collection::vec((0.1f64..10.0, 0.1f64..10.0), 1..=max_n).prop_map(|jobs| {
        let (weights, processing): (Vec<f64>, Vec<f64>) = jobs.into_iter().unzip();
        Instance::single(&weights, &processing)
    })
}

fn released_instance(max_n: usize, machines: usize) -> impl Strategy<Value = Instance> {
    prop::collection::vec((0.1f64..10.0, 0.1f64..10.0, 0.0f64..5.0), 1..=max_n).prop_map(
        move |rows| {
            let jobs = rows
                .iter()
                .enumerate()
                .map(|(j, &(w, p, r))| Job::new(j + 1, w, p, r))
                .collect();
            let env = if machines == 1 {
                MachineEnvironment::Single
            } else {
                MachineEnvironment::Identical(machines)
            };
            Instance::new(jobs, env)
        },
    )
}

proptest! {
    #[test]
    fn instance_text_round_trip(inst in released_instance(10, 3)) {
        let text = inst.to_text();
        let back = Instance::parse(&text).unwrap();
        prop_assert_eq!(&inst, &back);
        prop_assert_eq!(text, back.to_text());
    }

    #[test]
    fn wspt_order_is_permutation_and_sorted(inst in single_instance(12)) {
        let order = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let mut sorted = order.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (1..=inst.n()).collect::<Vec<_>>());
        for pair in order.windows(2) {
            let (a, b) = (pair[0] - 1, pair[1] - 1);
            let da = inst.jobs[a].weight * inst.jobs[b].processing;
            let db = inst.jobs[b].weight * inst.jobs[a].processing;
            prop_assert!(da > db || (da == db && a < b));
        }
    }

    #[test]
    fn wrr_schedule_is_feasible_and_conserving(inst in released_instance(8, 1)) {
        let sched = simulate(&inst, &mut WrrPolicy { weighted: true }).unwrap();
        verify_schedule(&inst, &sched).unwrap();
        for (j, job) in inst.jobs.iter().enumerate() {
            prop_assert!(sched.completions[j] >= job.release + job.processing - 1e-9);
        }
    }

    #[test]
    fn wdeq_schedule_is_feasible(inst in released_instance(8, 3)) {
        let sched = simulate(&inst, &mut WdeqPolicy).unwrap();
        verify_schedule(&inst, &sched).unwrap();
    }

    #[test]
    fn priority_schedule_matches_nonpreemptive_without_releases(inst in single_instance(8)) {
        // On one machine with all releases at zero, following a fixed order
        // preemptively degenerates to the non-preemptive sequence.
        let order: Vec<usize> = (1..=inst.n()).rev().collect();
        let pre = priority_schedule(&inst, &PermutationPrediction::SingleOrder(order.clone())).unwrap();
        let non = pc_wspt_single(&inst, &order).unwrap();
        for j in 0..inst.n() {
            prop_assert!((pre.completions[j] - non.completions[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn wspt_is_optimal_among_all_orders(inst in single_instance(6)) {
        let sigma = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let best = pc_wspt_single(&inst, &sigma).unwrap().objective(&inst.jobs).unwrap();
        for perm in (1..=inst.n()).permutations(inst.n()) {
            let obj = pc_wspt_single(&inst, &perm).unwrap().objective(&inst.jobs).unwrap();
            prop_assert!(best <= obj + 1e-9 * (1.0 + obj));
        }
    }

    #[test]
    fn eta_s_nonnegative_and_zero_only_on_reference_cost(inst in single_instance(7)) {
        let sigma = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let opt = pc_wspt_single(&inst, &sigma).unwrap().objective(&inst.jobs).unwrap();
        for perm in (1..=inst.n()).permutations(inst.n()) {
            let rep = eta_s(&inst, &perm).unwrap();
            prop_assert!(rep.eta_s >= 0.0);
            let obj = pc_wspt_single(&inst, &perm).unwrap().objective(&inst.jobs).unwrap();
            // The identity behind the sequence error: objective = opt + error.
            prop_assert!((obj - (opt + rep.eta_s)).abs() < 1e-9 * (1.0 + obj));
        }
    }

    #[test]
    fn pts_objective_within_constituent_bounds(inst in single_instance(6)) {
        // Time sharing with factor lambda can lose at most the reciprocal share
        // against either constituent run alone.
        let sigma = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let pred = PermutationPrediction::SingleOrder(sigma.clone());
        let lambda = 0.5;
        let spec: PolicySpec = "pts(wspt,rr,0.5)".parse().unwrap();
        let pts = run_policy(&inst, &spec, Some(&pred), false).unwrap();
        let pts_obj = objective(&pts, &inst.jobs).unwrap();
        let a_obj = pc_wspt_single(&inst, &sigma).unwrap().objective(&inst.jobs).unwrap();
        let rr = run_policy(&inst, &PolicySpec::Rr, None, false).unwrap();
        let rr_obj = objective(&rr, &inst.jobs).unwrap();
        let bound = (a_obj / (1.0 - lambda)).min(rr_obj / lambda);
        prop_assert!(pts_obj <= bound + 1e-6 * (1.0 + bound));
    }
}
