//! MinIncrease greedy for unrelated machines: on release, assign a job to the
//! machine where it increases the weighted-completion-time objective the least,
//! then run preemptive WSPT per machine over assigned jobs.

use crate::model::{Instance, MachineEnvironment, PermutationPrediction, Schedule, Segment};
use crate::{Error, Result};

/// Result of a clairvoyant MinIncrease run.
#[derive(Debug, Clone)]
pub struct MinIncreaseRun {
    pub schedule: Schedule,
    /// Per-machine WSPT orders of the assigned jobs (the induced permutation prediction).
    pub prediction: PermutationPrediction,
    /// Machine index (0-based) per job index.
    pub assignment: Vec<usize>,
    /// The greedy increase `Q_{g(j)j}` realized per job index.
    pub q_values: Vec<f64>,
}

/// Strict priority of `a` over `b` on machine `i`: higher density (`mu_ia > mu_ib`,
/// compared by cross products), ties by lower id.
fn outranks(inst: &Instance, i: usize, a: usize, b: usize) -> bool {
    let da = inst.jobs[a].weight * inst.ptime(i, b);
    let db = inst.jobs[b].weight * inst.ptime(i, a);
    if da != db {
        da > db
    } else {
        a < b
    }
}

/// The objective increase `Q_ij` of placing job `j` on machine `i` at its release:
/// `w_j * (r_j + p_ij + machine time ahead of j)` plus `p_ij` times the weight behind
/// `j`. `active` holds the unfinished jobs currently assigned to machine `i` and
/// `remaining` their remaining processing requirements.
pub fn q_value(inst: &Instance, i: usize, j: usize, release: f64, active: &[usize], remaining: &[f64]) -> f64 {
    let p_ij = inst.ptime(i, j);
    let mut ahead = 0.0;
    let mut weight_behind = 0.0;
    for &k in active {
        if outranks(inst, i, k, j) {
            ahead += inst.rate(i, k) * remaining[k];
        } else {
            weight_behind += inst.jobs[k].weight;
        }
    }
    inst.jobs[j].weight * (release + p_ij + ahead) + p_ij * weight_behind
}

/// The greedy choice for job `j`: machine minimizing `Q_ij`, ties to the lowest
/// machine index. Returns `(machine, Q)`.
pub fn min_increase_assign(
    inst: &Instance,
    j: usize,
    release: f64,
    active: &[Vec<usize>],
    remaining: &[f64],
) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (i, active_i) in active.iter().enumerate() {
        let q = q_value(inst, i, j, release, active_i, remaining);
        if q < best.1 {
            best = (i, q);
        }
    }
    best
}

struct MachineSim {
    i: usize,
    time: f64,
    active: Vec<usize>,
}

impl MachineSim {
    /// Processes the assigned jobs in density order until `until`, recording unit-rate
    /// segments and completions.
    fn advance(
        &mut self,
        inst: &Instance,
        until: f64,
        remaining: &mut [f64],
        completions: &mut [f64],
        segments: &mut Vec<Segment>,
    ) {
        while self.time < until {
            let top = self
                .active
                .iter()
                .copied()
                .reduce(|a, b| if outranks(inst, self.i, b, a) { b } else { a });
            let Some(j) = top else {
                self.time = until;
                return;
            };
            let finish = self.time + inst.rate(self.i, j) * remaining[j];
            let end = finish.min(until);
            if end > self.time {
                segments.push(Segment { start: self.time, end, rates: vec![(self.i, j, 1.0)] });
            }
            if finish <= until {
                remaining[j] = 0.0;
                completions[j] = finish;
                self.active.retain(|&k| k != j);
                self.time = finish;
            } else {
                remaining[j] -= (until - self.time) / inst.rate(self.i, j);
                self.time = until;
            }
        }
    }
}

/// Runs the clairvoyant MinIncrease greedy on the true instance.
pub fn clairvoyant_minincrease_run(inst: &Instance) -> Result<MinIncreaseRun> {
    inst.validate()?;
    if !matches!(inst.env, MachineEnvironment::Unrelated { .. } | MachineEnvironment::Single) {
        return Err(Error::Unsupported("MinIncrease requires unrelated machines".into()));
    }
    let n = inst.n();
    let m = inst.machines();
    let mut remaining = inst.processings();
    let mut completions = vec![f64::NAN; n];
    let mut segments = Vec::new();
    let mut machines: Vec<MachineSim> =
        (0..m).map(|i| MachineSim { i, time: 0.0, active: Vec::new() }).collect();
    let mut assignment = vec![0usize; n];
    let mut q_values = vec![0.0; n];

    let mut releases: Vec<usize> = (0..n).collect();
    releases.sort_by(|&a, &b| {
        inst.jobs[a].release.partial_cmp(&inst.jobs[b].release).unwrap().then(a.cmp(&b))
    });
    for j in releases {
        let r = inst.jobs[j].release;
        for mach in &mut machines {
            mach.advance(inst, r, &mut remaining, &mut completions, &mut segments);
        }
        let active: Vec<Vec<usize>> = machines.iter().map(|mac| mac.active.clone()).collect();
        let (g, q) = min_increase_assign(inst, j, r, &active, &remaining);
        assignment[j] = g;
        q_values[j] = q;
        machines[g].active.push(j);
    }
    for mach in &mut machines {
        mach.advance(inst, f64::INFINITY, &mut remaining, &mut completions, &mut segments);
    }
    segments.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());

    let mut orders: Vec<Vec<usize>> = vec![Vec::new(); m];
    for j in 0..n {
        orders[assignment[j]].push(j);
    }
    for (i, order) in orders.iter_mut().enumerate() {
        order.sort_by(|&a, &b| if outranks(inst, i, a, b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
    }
    let prediction =
        PermutationPrediction::Assigned(orders.into_iter().map(|o| o.into_iter().map(|j| j + 1).collect()).collect());
    Ok(MinIncreaseRun { schedule: Schedule { segments, completions }, prediction, assignment, q_values })
}

/// Schedule and induced permutation prediction of the clairvoyant MinIncrease greedy.
pub fn clairvoyant_minincrease(inst: &Instance) -> Result<(Schedule, PermutationPrediction)> {
    let run = clairvoyant_minincrease_run(inst)?;
    Ok((run.schedule, run.prediction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::simulator::verify_schedule;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn unrelated(jobs: Vec<Job>, rates: Vec<Vec<f64>>) -> Instance {
        let machines = rates.len();
        Instance::new(jobs, MachineEnvironment::Unrelated { machines, rates })
    }

    #[test]
    fn two_equal_jobs_split_over_machines() {
        // Unit weights, p = 2 each, r = 0, two equal machines:
        // Q(1) = (2, 2) -> machine 1; Q(2) = (4, 2) -> machine 2.
        let jobs = vec![Job::new(1, 1.0, 2.0, 0.0), Job::new(2, 1.0, 2.0, 0.0)];
        let inst = unrelated(jobs, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let run = clairvoyant_minincrease_run(&inst).unwrap();
        assert_eq!(run.assignment, vec![0, 1]);
        assert_eq!(run.q_values, vec![2.0, 2.0]);
        assert!(close(run.schedule.completions[0], 2.0));
        assert!(close(run.schedule.completions[1], 2.0));
        verify_schedule(&inst, &run.schedule).unwrap();
    }

    #[test]
    fn prefers_fast_machine() {
        let jobs = vec![Job::new(1, 1.0, 1.0, 0.0)];
        let inst = unrelated(jobs, vec![vec![3.0], vec![1.0]]);
        let run = clairvoyant_minincrease_run(&inst).unwrap();
        assert_eq!(run.assignment, vec![1]);
        assert!(close(run.schedule.completions[0], 1.0));
    }

    #[test]
    fn q_value_counts_higher_density_ahead() {
        // Machine holds job 1 (w=1, p=2, full remaining). New job 2 (w=1, p=2) ties in
        // density, so job 1 counts as ahead: Q = 1*(0 + 2 + 2) = 4.
        let jobs = vec![Job::new(1, 1.0, 2.0, 0.0), Job::new(2, 1.0, 2.0, 0.0)];
        let inst = unrelated(jobs, vec![vec![1.0, 1.0]]);
        let q = q_value(&inst, 0, 1, 0.0, &[0], &[2.0, 2.0]);
        assert!(close(q, 4.0));
        // A lighter job behind contributes its weight times p_ij instead.
        let jobs = vec![Job::new(1, 1.0, 4.0, 0.0), Job::new(2, 1.0, 1.0, 0.0)];
        let inst = unrelated(jobs, vec![vec![1.0, 1.0]]);
        let q = q_value(&inst, 0, 1, 0.0, &[0], &[4.0, 1.0]);
        // Job 2 outranks job 1: Q = 1*(0+1) + 1*1 = 2.
        assert!(close(q, 2.0));
    }

    #[test]
    fn later_release_preempts_lower_density() {
        // Machine 1 only. Job 1: w=1, p=4, r=0. Job 2: w=4, p=1, r=1 preempts.
        let jobs = vec![Job::new(1, 1.0, 4.0, 0.0), Job::new(2, 4.0, 1.0, 1.0)];
        let inst = unrelated(jobs, vec![vec![1.0, 1.0]]);
        let run = clairvoyant_minincrease_run(&inst).unwrap();
        assert!(close(run.schedule.completions[1], 2.0));
        assert!(close(run.schedule.completions[0], 5.0));
        // Q for job 2 at r=1 with 3 units of job 1 remaining and job 1 behind it:
        // 4*(1+1) + 1*1 = 9.
        assert!(close(run.q_values[1], 9.0));
        verify_schedule(&inst, &run.schedule).unwrap();
    }

    #[test]
    fn prediction_lists_per_machine_wspt_orders() {
        let jobs = vec![
            Job::new(1, 1.0, 3.0, 0.0),
            Job::new(2, 2.0, 1.0, 0.0),
            Job::new(3, 1.0, 1.0, 0.0),
        ];
        let inst = unrelated(jobs, vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 1.0]]);
        let run = clairvoyant_minincrease_run(&inst).unwrap();
        if let PermutationPrediction::Assigned(orders) = &run.prediction {
            assert_eq!(orders.len(), 2);
            let total: usize = orders.iter().map(|o| o.len()).sum();
            assert_eq!(total, 3);
            // Each machine order must be sorted by density on that machine.
            for (i, order) in orders.iter().enumerate() {
                for w in order.windows(2) {
                    assert!(outranks(&inst, i, w[0] - 1, w[1] - 1));
                }
            }
        } else {
            panic!("expected assigned prediction");
        }
    }

    #[test]
    fn objective_increases_match_greedy_total() {
        // The final objective equals the sum of realized Q values.
        let jobs = vec![
            Job::new(1, 2.0, 1.5, 0.0),
            Job::new(2, 1.0, 2.0, 0.5),
            Job::new(3, 3.0, 1.0, 1.0),
            Job::new(4, 1.0, 0.5, 1.25),
        ];
        let inst = unrelated(
            jobs,
            vec![vec![1.0, 2.0, 1.0, 3.0], vec![2.0, 1.0, 2.0, 1.0]],
        );
        let run = clairvoyant_minincrease_run(&inst).unwrap();
        let obj = run.schedule.objective(&inst.jobs).unwrap();
        let q_sum: f64 = run.q_values.iter().sum();
        assert!(close(obj, q_sum), "objective {obj} vs q sum {q_sum}");
        verify_schedule(&inst, &run.schedule).unwrap();
    }
}
