//! Scheduling policies: non-clairvoyant (RR/WRR, WDEQ, Proportional Fairness),
//! prediction-clairvoyant (WSPT, P-WSPT, MinIncrease P-WSPT) and the Preferential
//! Time Sharing combiner.

mod minincrease;
mod pf;

pub use minincrease::{clairvoyant_minincrease, clairvoyant_minincrease_run, min_increase_assign, q_value, MinIncreaseRun};
pub use pf::{pf_rates, PfPolicy, PfSolution};

use crate::model::{wspt_order, Instance, JobId, MachineEnvironment, PermutationPrediction, Schedule, Segment};
use crate::simulator::{simulate_opts, PriorityPolicy, RateMatrix, RatePolicy, SimState};
use crate::{Error, Result};

/// WSPT order of the true weights and processing requirements.
pub fn wspt_order_of_instance(inst: &Instance) -> Result<Vec<JobId>> {
    wspt_order(&inst.weights(), &inst.processings())
}

/// Weighted-Round-Robin rates on a single machine: `w_j / sum of alive weights`.
pub fn wrr_rates(weights: &[f64], alive: &[usize]) -> Vec<f64> {
    let mut rates = vec![0.0; weights.len()];
    let total: f64 = alive.iter().map(|&j| weights[j]).sum();
    if total > 0.0 {
        for &j in alive {
            rates[j] = weights[j] / total;
        }
    }
    rates
}

/// WDEQ water-filling on `m` identical machines: weight-proportional shares of the
/// remaining capacity, capping at 1 every job whose share reaches a full machine and
/// redistributing until all shares are below 1. Rates sum to `min(m, alive)`.
pub fn wdeq_rates(weights: &[f64], alive: &[usize], machines: usize) -> Vec<f64> {
    let mut rates = vec![0.0; weights.len()];
    if alive.is_empty() {
        return rates;
    }
    if alive.len() <= machines {
        for &j in alive {
            rates[j] = 1.0;
        }
        return rates;
    }
    let mut uncapped: Vec<usize> = alive.to_vec();
    let mut capacity = machines as f64;
    loop {
        let total_w: f64 = uncapped.iter().map(|&j| weights[j]).sum();
        let mut newly_capped = Vec::new();
        for &j in &uncapped {
            if capacity * weights[j] / total_w >= 1.0 {
                newly_capped.push(j);
            }
        }
        if newly_capped.is_empty() {
            for &j in &uncapped {
                rates[j] = capacity * weights[j] / total_w;
            }
            return rates;
        }
        for &j in &newly_capped {
            rates[j] = 1.0;
            capacity -= 1.0;
        }
        uncapped.retain(|j| !newly_capped.contains(j));
        if uncapped.is_empty() {
            return rates;
        }
    }
}

/// Round-Robin / Weighted-Round-Robin policy for a single machine.
pub struct WrrPolicy {
    /// `false` gives the unweighted Round-Robin equal split.
    pub weighted: bool,
}

impl RatePolicy for WrrPolicy {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix> {
        if inst.machines() != 1 {
            return Err(Error::Unsupported("WRR requires a single machine".into()));
        }
        let alive = state.alive();
        let unit = vec![1.0; inst.n()];
        let weights = if self.weighted { inst.weights() } else { unit };
        let rates = wrr_rates(&weights, &alive);
        let mut z = RateMatrix::zeros(1, inst.n());
        for j in alive {
            z.set(0, j, rates[j]);
        }
        Ok(z)
    }
}

/// Weighted Dynamic EQuipartition policy for identical machines.
pub struct WdeqPolicy;

impl RatePolicy for WdeqPolicy {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix> {
        let m = match inst.env {
            MachineEnvironment::Single => 1,
            MachineEnvironment::Identical(m) => m,
            MachineEnvironment::Unrelated { .. } => {
                return Err(Error::Unsupported("WDEQ requires identical machines".into()))
            }
        };
        let alive = state.alive();
        let per_job = wdeq_rates(&inst.weights(), &alive, m);
        Ok(pour_rates(&per_job, &alive, m, inst.n()))
    }
}

/// Distributes per-job rates over machine rows so that every row sums to at most 1.
/// A job may span two adjacent rows; its total stays at its per-job rate.
fn pour_rates(per_job: &[f64], alive: &[usize], machines: usize, n: usize) -> RateMatrix {
    let mut z = RateMatrix::zeros(machines, n);
    let mut row = 0usize;
    let mut row_left = 1.0f64;
    for &j in alive {
        let mut x = per_job[j];
        while x > 1e-15 && row < machines {
            let take = x.min(row_left);
            z.add(row, j, take);
            x -= take;
            row_left -= take;
            if row_left <= 1e-15 {
                row += 1;
                row_left = 1.0;
            }
        }
    }
    z
}

/// Non-preemptive schedule in the given order on a single machine without release
/// dates. By the Smith-rule decomposition its objective equals
/// `OPT + eta_s(order)` exactly.
pub fn pc_wspt_single(inst: &Instance, order: &[JobId]) -> Result<Schedule> {
    inst.validate()?;
    if inst.machines() != 1 {
        return Err(Error::Unsupported("prediction-clairvoyant WSPT requires a single machine".into()));
    }
    if inst.has_releases() {
        return Err(Error::Unsupported("prediction-clairvoyant WSPT requires zero release dates".into()));
    }
    PermutationPrediction::SingleOrder(order.to_vec()).validate(inst.n())?;
    let mut completions = vec![f64::NAN; inst.n()];
    let mut segments = Vec::with_capacity(inst.n());
    let mut t = 0.0;
    for &id in order {
        let j = id - 1;
        let end = t + inst.jobs[j].processing;
        segments.push(Segment { start: t, end, rates: vec![(0, j, 1.0)] });
        completions[j] = end;
        t = end;
    }
    Ok(Schedule { segments, completions })
}

/// Preemptive WSPT under a predicted single order on identical machines: at any
/// moment the `m` available jobs with highest predicted priority run.
pub fn pc_pwspt_identical(inst: &Instance, order: &[JobId]) -> Result<Schedule> {
    match inst.env {
        MachineEnvironment::Unrelated { .. } => {
            Err(Error::Unsupported("P-WSPT with a single order requires identical machines".into()))
        }
        _ => crate::simulator::priority_schedule(inst, &PermutationPrediction::SingleOrder(order.to_vec())),
    }
}

/// Canonical policy names used by the CLI and experiment configs.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Rr,
    Wrr,
    Wdeq,
    Pf,
    Wspt,
    Pwspt,
    MinIncrease,
    Pts { a: Box<PolicySpec>, b: Box<PolicySpec>, lambda: f64 },
}

impl PolicySpec {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            PolicySpec::Pts { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    pub fn uses_prediction(&self) -> bool {
        match self {
            PolicySpec::Wspt | PolicySpec::Pwspt | PolicySpec::MinIncrease => true,
            PolicySpec::Pts { a, b, .. } => a.uses_prediction() || b.uses_prediction(),
            _ => false,
        }
    }
}

impl std::fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicySpec::Rr => write!(f, "rr"),
            PolicySpec::Wrr => write!(f, "wrr"),
            PolicySpec::Wdeq => write!(f, "wdeq"),
            PolicySpec::Pf => write!(f, "pf"),
            PolicySpec::Wspt => write!(f, "wspt"),
            PolicySpec::Pwspt => write!(f, "pwspt"),
            PolicySpec::MinIncrease => write!(f, "minincrease"),
            PolicySpec::Pts { a, b, lambda } => write!(f, "pts({a},{b},{lambda})"),
        }
    }
}

impl std::str::FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "rr" => return Ok(PolicySpec::Rr),
            "wrr" => return Ok(PolicySpec::Wrr),
            "wdeq" => return Ok(PolicySpec::Wdeq),
            "pf" => return Ok(PolicySpec::Pf),
            "wspt" => return Ok(PolicySpec::Wspt),
            "pwspt" => return Ok(PolicySpec::Pwspt),
            "minincrease" => return Ok(PolicySpec::MinIncrease),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("pts(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("expected pts(<A>,<B>,<lambda>), got `{s}`")));
            }
            let a: PolicySpec = parts[0].parse()?;
            let b: PolicySpec = parts[1].parse()?;
            if matches!(a, PolicySpec::Pts { .. }) || matches!(b, PolicySpec::Pts { .. }) {
                return Err(Error::Parse("nested pts policies are not supported".into()));
            }
            let lambda: f64 = parts[2]
                .parse()
                .map_err(|e| Error::Parse(format!("lambda in `{s}`: {e}")))?;
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::Parse(format!("lambda must lie in (0,1), got {lambda}")));
            }
            return Ok(PolicySpec::Pts { a: Box::new(a), b: Box::new(b), lambda });
        }
        Err(Error::Parse(format!("unknown policy `{s}`")))
    }
}

/// Preferential Time Sharing configuration: trust parameter and the two policies.
#[derive(Debug, Clone)]
pub struct PtsConfig {
    pub lambda: f64,
    pub a: PolicySpec,
    pub b: PolicySpec,
}

impl PtsConfig {
    pub fn new(a: PolicySpec, b: PolicySpec, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidPrediction(format!("lambda must lie in (0,1), got {lambda}")));
        }
        Ok(PtsConfig { lambda, a, b })
    }
}

/// Time-sharing combination of two policies: in every infinitesimal interval policy A
/// runs for a `(1-lambda)` fraction and policy B for the remaining `lambda` fraction.
/// Each constituent sees a job only from its virtual release (`r_j/(1-lambda)` for A,
/// `r_j/lambda` for B) and both share the true remaining processing; a completion
/// removes the job from both views.
pub struct PtsPolicy {
    lambda: f64,
    a: Box<dyn RatePolicy>,
    b: Box<dyn RatePolicy>,
    virtual_a: Vec<f64>,
    virtual_b: Vec<f64>,
}

impl PtsPolicy {
    pub fn new(inst: &Instance, lambda: f64, a: Box<dyn RatePolicy>, b: Box<dyn RatePolicy>) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidPrediction(format!("lambda must lie in (0,1), got {lambda}")));
        }
        let virtual_a = inst.jobs.iter().map(|j| j.release / (1.0 - lambda)).collect();
        let virtual_b = inst.jobs.iter().map(|j| j.release / lambda).collect();
        Ok(PtsPolicy { lambda, a, b, virtual_a, virtual_b })
    }

    fn visible(&self, state: &SimState, virtual_release: &[f64]) -> SimState {
        let mut s = state.clone();
        for j in 0..s.released.len() {
            s.released[j] = virtual_release[j] <= state.time && !state.finished[j];
        }
        s
    }
}

impl RatePolicy for PtsPolicy {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix> {
        let sa = self.visible(state, &self.virtual_a);
        let sb = self.visible(state, &self.virtual_b);
        let za = self.a.rates(inst, &sa)?;
        let zb = self.b.rates(inst, &sb)?;
        Ok(RateMatrix::blend(&za, &zb, self.lambda))
    }

    fn next_epoch(&mut self, inst: &Instance, state: &SimState) -> Option<f64> {
        let mut next = f64::INFINITY;
        for j in 0..inst.n() {
            if !state.finished[j] {
                for &v in [&self.virtual_a[j], &self.virtual_b[j]] {
                    if v > state.time {
                        next = next.min(v);
                    }
                }
            }
        }
        let sa = self.visible(state, &self.virtual_a);
        if let Some(e) = self.a.next_epoch(inst, &sa) {
            if e > state.time {
                next = next.min(e);
            }
        }
        let sb = self.visible(state, &self.virtual_b);
        if let Some(e) = self.b.next_epoch(inst, &sb) {
            if e > state.time {
                next = next.min(e);
            }
        }
        if next.is_finite() {
            Some(next)
        } else {
            None
        }
    }
}

/// Builds the rate policy for a spec. Prediction-clairvoyant specs need `pred`.
pub fn build_policy(
    inst: &Instance,
    spec: &PolicySpec,
    pred: Option<&PermutationPrediction>,
) -> Result<Box<dyn RatePolicy>> {
    match spec {
        PolicySpec::Rr => Ok(Box::new(WrrPolicy { weighted: false })),
        PolicySpec::Wrr => Ok(Box::new(WrrPolicy { weighted: true })),
        PolicySpec::Wdeq => Ok(Box::new(WdeqPolicy)),
        PolicySpec::Pf => Ok(Box::new(PfPolicy::default())),
        PolicySpec::Wspt | PolicySpec::Pwspt | PolicySpec::MinIncrease => {
            let pred = pred.ok_or_else(|| {
                Error::InvalidPrediction(format!("policy `{spec}` requires a prediction"))
            })?;
            Ok(Box::new(PriorityPolicy::new(inst, pred)?))
        }
        PolicySpec::Pts { a, b, lambda } => {
            let pa = build_policy(inst, a, pred)?;
            let pb = build_policy(inst, b, pred)?;
            Ok(Box::new(PtsPolicy::new(inst, *lambda, pa, pb)?))
        }
    }
}

/// Runs a named policy on an instance and returns its schedule.
pub fn run_policy(
    inst: &Instance,
    spec: &PolicySpec,
    pred: Option<&PermutationPrediction>,
    record_segments: bool,
) -> Result<Schedule> {
    if let (PolicySpec::MinIncrease, None) = (spec, pred) {
        // Without a prediction, MinIncrease is the clairvoyant greedy.
        let (schedule, _) = clairvoyant_minincrease(inst)?;
        return Ok(schedule);
    }
    let mut policy = build_policy(inst, spec, pred)?;
    simulate_opts(inst, policy.as_mut(), record_segments)
}

/// Runs Preferential Time Sharing with the given configuration.
pub fn pts_combine(
    inst: &Instance,
    cfg: &PtsConfig,
    pred: Option<&PermutationPrediction>,
) -> Result<Schedule> {
    let spec = PolicySpec::Pts {
        a: Box::new(cfg.a.clone()),
        b: Box::new(cfg.b.clone()),
        lambda: cfg.lambda,
    };
    run_policy(inst, &spec, pred, true)
}
