//! Event-driven rate-based preemptive scheduling engine.
//!
//! A policy maps the current [`SimState`] to a feasible rate matrix; the engine owns
//! time advancement and steps from event to event (releases, completions, policy
//! epochs), re-querying rates at each event.

use crate::model::{Instance, JobId, MachineEnvironment, PermutationPrediction, Schedule, Segment, CAP_TOL, TOL};
use crate::{Error, Result};

/// Mutable simulation state visible to policies.
#[derive(Debug, Clone)]
pub struct SimState {
    pub time: f64,
    pub released: Vec<bool>,
    pub finished: Vec<bool>,
    /// Remaining processing requirement `p_j(t)`; 0 once finished.
    pub remaining: Vec<f64>,
}

impl SimState {
    pub fn is_alive(&self, j: usize) -> bool {
        self.released[j] && !self.finished[j]
    }

    pub fn alive(&self) -> Vec<usize> {
        (0..self.remaining.len()).filter(|&j| self.is_alive(j)).collect()
    }
}

/// Dense `m x n` rate matrix returned by policies.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub machines: usize,
    pub jobs: usize,
    data: Vec<f64>,
}

impl RateMatrix {
    pub fn zeros(machines: usize, jobs: usize) -> Self {
        RateMatrix { machines, jobs, data: vec![0.0; machines * jobs] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.jobs + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: f64) {
        self.data[i * self.jobs + j] = z;
    }

    pub fn add(&mut self, i: usize, j: usize, z: f64) {
        self.data[i * self.jobs + j] += z;
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.data[i * self.jobs..(i + 1) * self.jobs].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.machines).map(|i| self.get(i, j)).sum()
    }

    /// `(1 - lambda) * a + lambda * b`, entrywise.
    pub fn blend(a: &RateMatrix, b: &RateMatrix, lambda: f64) -> RateMatrix {
        let mut out = RateMatrix::zeros(a.machines, a.jobs);
        for k in 0..a.data.len() {
            out.data[k] = (1.0 - lambda) * a.data[k] + lambda * b.data[k];
        }
        out
    }
}

/// A preemptive rate policy. Policies must return a feasible matrix: per-machine and
/// per-job sums at most 1, zero rate for unreleased or finished jobs.
pub trait RatePolicy {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix>;

    /// Next time (strictly after `state.time`) at which the policy wants to be
    /// re-queried even without a release or completion.
    fn next_epoch(&mut self, _inst: &Instance, _state: &SimState) -> Option<f64> {
        None
    }
}

/// Runs `policy` on `inst` until all jobs complete, recording segments.
pub fn simulate(inst: &Instance, policy: &mut dyn RatePolicy) -> Result<Schedule> {
    simulate_opts(inst, policy, true)
}

/// As [`simulate`], optionally skipping segment recording (completions only).
pub fn simulate_opts(
    inst: &Instance,
    policy: &mut dyn RatePolicy,
    record_segments: bool,
) -> Result<Schedule> {
    inst.validate()?;
    let n = inst.n();
    let m = inst.machines();
    let mut state = SimState {
        time: 0.0,
        released: vec![false; n],
        finished: vec![false; n],
        remaining: inst.processings(),
    };
    let mut completions = vec![f64::NAN; n];
    let mut segments = Vec::new();
    let mut release_times: Vec<f64> = inst.jobs.iter().map(|j| j.release).collect();
    release_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    release_times.dedup();
    let mut next_release_idx = 0usize;

    let max_events = 10_000 + 200 * n;
    for _event in 0..max_events {
        // Releases first, then completions were snapped at the previous step.
        while next_release_idx < release_times.len() && release_times[next_release_idx] <= state.time {
            next_release_idx += 1;
        }
        for j in 0..n {
            if !state.released[j] && inst.jobs[j].release <= state.time {
                state.released[j] = true;
            }
        }
        if state.finished.iter().all(|&f| f) {
            return Ok(Schedule { segments, completions });
        }

        let rates = policy.rates(inst, &state)?;
        validate_rates(inst, &state, &rates)?;

        // Per-job progress rate in units of processing requirement.
        let mut progress = vec![0.0; n];
        for j in 0..n {
            if state.is_alive(j) {
                for i in 0..m {
                    let z = rates.get(i, j);
                    if z > 0.0 {
                        progress[j] += z / inst.rate(i, j);
                    }
                }
            }
        }
        // A step with zero total rate is fine as long as some event still lies
        // ahead (a release, or a time-sharing constituent's virtual release);
        // a genuine stall leaves `t_next` infinite below.
        // Next event: release, earliest completion, or policy epoch.
        let mut t_next = f64::INFINITY;
        if next_release_idx < release_times.len() {
            t_next = t_next.min(release_times[next_release_idx]);
        }
        for j in 0..n {
            if state.is_alive(j) && progress[j] > 0.0 {
                t_next = t_next.min(state.time + state.remaining[j] / progress[j]);
            }
        }
        if let Some(epoch) = policy.next_epoch(inst, &state) {
            if epoch > state.time {
                t_next = t_next.min(epoch);
            }
        }
        if !t_next.is_finite() {
            return Err(Error::NoProgress(state.time));
        }

        let dt = t_next - state.time;
        if record_segments && dt > 0.0 {
            let mut entries = Vec::new();
            for i in 0..m {
                for j in 0..n {
                    let z = rates.get(i, j);
                    if z > 0.0 {
                        entries.push((i, j, z));
                    }
                }
            }
            segments.push(Segment { start: state.time, end: t_next, rates: entries });
        }
        for j in 0..n {
            if state.is_alive(j) && progress[j] > 0.0 {
                state.remaining[j] -= progress[j] * dt;
                if state.remaining[j] <= TOL * inst.jobs[j].processing {
                    state.remaining[j] = 0.0;
                    state.finished[j] = true;
                    completions[j] = t_next;
                }
            }
        }
        state.time = t_next;
    }
    Err(Error::NoProgress(state.time))
}

fn validate_rates(inst: &Instance, state: &SimState, rates: &RateMatrix) -> Result<()> {
    let n = inst.n();
    let m = inst.machines();
    if rates.machines != m || rates.jobs != n {
        return Err(Error::InfeasibleRates {
            time: state.time,
            reason: format!("rate matrix {}x{}, expected {}x{}", rates.machines, rates.jobs, m, n),
        });
    }
    for i in 0..m {
        let s = rates.row_sum(i);
        if s > 1.0 + CAP_TOL {
            return Err(Error::InfeasibleRates {
                time: state.time,
                reason: format!("machine {} rate sum {}", i + 1, s),
            });
        }
    }
    for j in 0..n {
        let s = rates.col_sum(j);
        if s > 1.0 + CAP_TOL {
            return Err(Error::InfeasibleRates {
                time: state.time,
                reason: format!("job {} rate sum {}", j + 1, s),
            });
        }
        for i in 0..m {
            let z = rates.get(i, j);
            if z < 0.0 {
                return Err(Error::InfeasibleRates {
                    time: state.time,
                    reason: format!("negative rate for job {}", j + 1),
                });
            }
            if z > 0.0 && !state.is_alive(j) {
                return Err(Error::InfeasibleRates {
                    time: state.time,
                    reason: format!("positive rate for unreleased/finished job {}", j + 1),
                });
            }
        }
    }
    Ok(())
}

/// Runs the priority-order schedule for `pred`: each machine processes the available
/// assigned job with the highest predicted priority at rate 1. For a single order on
/// `m` identical machines, the `m` highest-priority available jobs run.
pub fn priority_schedule(inst: &Instance, pred: &PermutationPrediction) -> Result<Schedule> {
    let mut policy = PriorityPolicy::new(inst, pred)?;
    simulate(inst, &mut policy)
}

enum PriorityKind {
    Single,
    TopM(usize),
    PerMachine(Vec<usize>),
}

/// Rate policy realizing the priority schedule for a permutation prediction.
pub struct PriorityPolicy {
    pos: Vec<usize>,
    kind: PriorityKind,
}

impl PriorityPolicy {
    pub fn new(inst: &Instance, pred: &PermutationPrediction) -> Result<Self> {
        pred.validate(inst.n())?;
        let pos = pred.positions(inst.n())?;
        let kind = match pred {
            PermutationPrediction::SingleOrder(_) => match inst.env {
                MachineEnvironment::Single => PriorityKind::Single,
                MachineEnvironment::Identical(m) => PriorityKind::TopM(m),
                MachineEnvironment::Unrelated { .. } => {
                    return Err(Error::Unsupported(
                        "single-order prediction on unrelated machines requires an assignment".into(),
                    ))
                }
            },
            PermutationPrediction::Assigned(orders) => {
                if orders.len() != inst.machines() {
                    return Err(Error::InvalidPrediction(format!(
                        "{} machine orders for {} machines",
                        orders.len(),
                        inst.machines()
                    )));
                }
                PriorityKind::PerMachine(pred.assignment(inst.n())?)
            }
        };
        Ok(PriorityPolicy { pos, kind })
    }
}

impl RatePolicy for PriorityPolicy {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix> {
        let n = inst.n();
        let m = inst.machines();
        let mut z = RateMatrix::zeros(m, n);
        match &self.kind {
            PriorityKind::Single => {
                if let Some(j) = state.alive().into_iter().min_by_key(|&j| self.pos[j]) {
                    z.set(0, j, 1.0);
                }
            }
            PriorityKind::TopM(machines) => {
                let mut alive = state.alive();
                alive.sort_by_key(|&j| self.pos[j]);
                for (i, &j) in alive.iter().take(*machines).enumerate() {
                    z.set(i, j, 1.0);
                }
            }
            PriorityKind::PerMachine(machine_of) => {
                for i in 0..m {
                    let best = state
                        .alive()
                        .into_iter()
                        .filter(|&j| machine_of[j] == i)
                        .min_by_key(|&j| self.pos[j]);
                    if let Some(j) = best {
                        z.set(i, j, 1.0);
                    }
                }
            }
        }
        Ok(z)
    }
}

/// Checks a recorded schedule against the model invariants: processing conservation,
/// machine capacity, and no rate outside a job's release-completion window.
pub fn verify_schedule(inst: &Instance, schedule: &Schedule) -> Result<()> {
    let n = inst.n();
    let mut processed = vec![0.0; n];
    for seg in &schedule.segments {
        let dur = seg.end - seg.start;
        let mut row_sums = vec![0.0; inst.machines()];
        for &(i, j, z) in &seg.rates {
            row_sums[i] += z;
            processed[j] += dur * z / inst.rate(i, j);
            if seg.start < inst.jobs[j].release - TOL {
                return Err(Error::InfeasibleRates {
                    time: seg.start,
                    reason: format!("job {} receives rate before release", j + 1),
                });
            }
            if seg.end > schedule.completions[j] + TOL * inst.jobs[j].processing.max(1.0) {
                return Err(Error::InfeasibleRates {
                    time: seg.start,
                    reason: format!("job {} receives rate after completion", j + 1),
                });
            }
        }
        for (i, &s) in row_sums.iter().enumerate() {
            if s > 1.0 + CAP_TOL {
                return Err(Error::InfeasibleRates {
                    time: seg.start,
                    reason: format!("machine {} capacity {}", i + 1, s),
                });
            }
        }
    }
    for j in 0..n {
        let p = inst.jobs[j].processing;
        if (processed[j] - p).abs() > TOL * p.max(1.0) {
            return Err(Error::InvalidInstance(format!(
                "job {} processed {} of {}",
                j + 1,
                processed[j],
                p
            )));
        }
    }
    Ok(())
}

/// Equal-split policy over alive jobs (Round-Robin) on a single machine; used in
/// engine tests. The production policies live in [`crate::algorithms`].
#[cfg(test)]
pub(crate) struct EqualSplit;

#[cfg(test)]
impl RatePolicy for EqualSplit {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix> {
        let alive = state.alive();
        let mut z = RateMatrix::zeros(inst.machines(), inst.n());
        if !alive.is_empty() {
            let share = 1.0 / alive.len() as f64;
            for j in alive {
                z.set(0, j, share);
            }
        }
        Ok(z)
    }
}

pub fn order_of_ids(order: &[JobId]) -> PermutationPrediction {
    PermutationPrediction::SingleOrder(order.to_vec())
}
