//! Prediction-error measures: the sequence error over inverted pairs, the
//! contribution-based rate error, the classical l1 and nu length-error measures,
//! and the dual-fitting verifier for the MinIncrease analysis.

use crate::algorithms::{clairvoyant_minincrease_run, wspt_order_of_instance};
use crate::model::{Instance, JobId, MachineEnvironment, PermutationPrediction, wspt_order};
use crate::{Error, Result};

/// Error measures of a prediction against an instance.
#[derive(Debug, Clone, Default)]
pub struct ErrorReport {
    pub eta_s: f64,
    pub eta_r: f64,
    /// Per-job contribution differences; empty for sequence-error-only reports.
    pub per_job: Vec<f64>,
    /// Inverted pairs `(j', j)`: `j'` precedes `j` in the reference order but
    /// follows it in the prediction.
    pub inversions: Vec<(JobId, JobId)>,
    pub ell1: Option<f64>,
    pub nu: Option<f64>,
}

impl ErrorReport {
    /// Flat `eta_s eta_r ell1 nu` record; `-` for absent optional measures.
    pub fn flat(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        format!("{} {} {} {}", self.eta_s, self.eta_r, opt(self.ell1), opt(self.nu))
    }
}

/// Sequence error of a predicted single order: the sum of `w_{j'} p_j - w_j p_{j'}`
/// over all pairs inverted against the true WSPT order (ties by ascending id).
pub fn eta_s(inst: &Instance, order: &[JobId]) -> Result<ErrorReport> {
    inst.validate()?;
    let n = inst.n();
    PermutationPrediction::SingleOrder(order.to_vec()).validate(n)?;
    let sigma = wspt_order(&inst.weights(), &inst.processings())?;
    let mut pos_ref = vec![0usize; n];
    for (k, &id) in sigma.iter().enumerate() {
        pos_ref[id - 1] = k;
    }
    let mut pos_hat = vec![0usize; n];
    for (k, &id) in order.iter().enumerate() {
        pos_hat[id - 1] = k;
    }
    let mut total = 0.0;
    let mut inversions = Vec::new();
    for a in 0..n {
        for b in 0..n {
            // (a, b) inverted: a precedes b in the reference, b precedes a in the prediction.
            if pos_ref[a] < pos_ref[b] && pos_hat[a] > pos_hat[b] {
                total += inst.jobs[a].weight * inst.jobs[b].processing
                    - inst.jobs[b].weight * inst.jobs[a].processing;
                inversions.push((a + 1, b + 1));
            }
        }
    }
    Ok(ErrorReport { eta_s: total, inversions, ..Default::default() })
}

/// Machine index per job for contribution computations. Supported: a single order on
/// one machine, or per-machine orders on any environment.
fn contribution_assignment(inst: &Instance, pred: &PermutationPrediction) -> Result<Vec<usize>> {
    match pred {
        PermutationPrediction::SingleOrder(_) => {
            if inst.machines() == 1 {
                Ok(vec![0; inst.n()])
            } else {
                Err(Error::Unsupported(
                    "contributions for a single order need a single machine; use per-machine orders".into(),
                ))
            }
        }
        PermutationPrediction::Assigned(orders) => {
            if orders.len() != inst.machines() {
                return Err(Error::InvalidPrediction(format!(
                    "{} machine orders for {} machines",
                    orders.len(),
                    inst.machines()
                )));
            }
            pred.assignment(inst.n())
        }
    }
}

/// The objective increase of each job when it is added to its machine at release,
/// under the static priority order `pred`: `p_ij` times the weight of lower-priority
/// available jobs plus `w_j` times release plus remaining work of weakly higher
/// priority (including the job itself). Their sum equals the priority-schedule
/// objective exactly.
pub fn w_contributions(inst: &Instance, pred: &PermutationPrediction) -> Result<Vec<f64>> {
    inst.validate()?;
    let n = inst.n();
    pred.validate(n)?;
    let pos = pred.positions(n)?;
    let machine_of = contribution_assignment(inst, pred)?;

    let mut remaining = inst.processings();
    // Per machine: current time and available unfinished assigned jobs.
    let mut mtime = vec![0.0; inst.machines()];
    let mut active: Vec<Vec<usize>> = vec![Vec::new(); inst.machines()];
    let mut contributions = vec![0.0; n];

    let advance = |i: usize,
                   until: f64,
                   mtime: &mut Vec<f64>,
                   active: &mut Vec<Vec<usize>>,
                   remaining: &mut Vec<f64>| {
        while mtime[i] < until {
            let Some(&j) = active[i].iter().min_by_key(|&&j| pos[j]) else {
                mtime[i] = until;
                return;
            };
            let finish = mtime[i] + inst.rate(i, j) * remaining[j];
            if finish <= until {
                remaining[j] = 0.0;
                active[i].retain(|&k| k != j);
                mtime[i] = finish;
            } else {
                remaining[j] -= (until - mtime[i]) / inst.rate(i, j);
                mtime[i] = until;
            }
        }
    };

    let mut releases: Vec<usize> = (0..n).collect();
    releases.sort_by(|&a, &b| {
        inst.jobs[a].release.partial_cmp(&inst.jobs[b].release).unwrap().then(a.cmp(&b))
    });
    for j in releases {
        let r = inst.jobs[j].release;
        for i in 0..inst.machines() {
            advance(i, r, &mut mtime, &mut active, &mut remaining);
        }
        let i = machine_of[j];
        let p_ij = inst.ptime(i, j);
        let mut ahead = p_ij; // the job itself: full remaining at its release
        let mut weight_behind = 0.0;
        for &k in &active[i] {
            if pos[k] <= pos[j] {
                ahead += inst.rate(i, k) * remaining[k];
            } else {
                weight_behind += inst.jobs[k].weight;
            }
        }
        contributions[j] = p_ij * weight_behind + inst.jobs[j].weight * (r + ahead);
        active[i].push(j);
    }
    Ok(contributions)
}

/// Contribution of a single job id under `pred`.
pub fn w_contribution(inst: &Instance, pred: &PermutationPrediction, id: JobId) -> Result<f64> {
    if id == 0 || id > inst.n() {
        return Err(Error::InvalidPrediction(format!("job id {id} out of range")));
    }
    Ok(w_contributions(inst, pred)?[id - 1])
}

/// Rate error: per-job contribution difference between the prediction and a
/// reference order, summed over jobs.
pub fn eta_r(
    inst: &Instance,
    pred: &PermutationPrediction,
    sigma_ref: &PermutationPrediction,
) -> Result<ErrorReport> {
    if std::mem::discriminant(pred) != std::mem::discriminant(sigma_ref) {
        return Err(Error::InvalidPrediction(
            "prediction and reference must be the same permutation variant".into(),
        ));
    }
    let w_hat = w_contributions(inst, pred)?;
    let w_ref = w_contributions(inst, sigma_ref)?;
    let per_job: Vec<f64> = w_hat.iter().zip(&w_ref).map(|(a, b)| a - b).collect();
    let eta_r = per_job.iter().sum();
    Ok(ErrorReport { eta_r, per_job, ..Default::default() })
}

/// Reference prediction per environment: the true WSPT order on one or identical
/// machines, the MinIncrease per-machine orders on unrelated machines.
pub fn reference_prediction(inst: &Instance) -> Result<PermutationPrediction> {
    match inst.env {
        MachineEnvironment::Unrelated { .. } => {
            Ok(clairvoyant_minincrease_run(inst)?.prediction)
        }
        _ => Ok(PermutationPrediction::SingleOrder(wspt_order_of_instance(inst)?)),
    }
}

/// `sum_j |p_j - y_j|`.
pub fn ell1(p: &[f64], y: &[f64]) -> f64 {
    p.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

/// Total completion time of the SPT schedule for the given lengths (unweighted,
/// single machine, no release dates): `sum_j (n - rank_j + 1) * p_(j)`.
pub fn spt_objective(lengths: &[f64]) -> f64 {
    let mut sorted = lengths.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    sorted.iter().enumerate().map(|(k, &p)| (n - k) as f64 * p).sum()
}

/// `OPT({max(p_j, y_j)}) - OPT({min(p_j, y_j)})` with OPT the SPT objective.
pub fn nu(p: &[f64], y: &[f64]) -> f64 {
    let upper: Vec<f64> = p.iter().zip(y).map(|(a, b)| a.max(*b)).collect();
    let lower: Vec<f64> = p.iter().zip(y).map(|(a, b)| a.min(*b)).collect();
    spt_objective(&upper) - spt_objective(&lower)
}

/// As [`nu`], rejecting instances outside its domain (weights, machines, releases).
pub fn nu_checked(inst: &Instance, y: &[f64]) -> Result<f64> {
    if inst.machines() != 1 || !inst.unit_weights() || inst.has_releases() {
        return Err(Error::Unsupported(
            "nu is defined for unit weights on a single machine without release dates".into(),
        ));
    }
    if y.len() != inst.n() {
        return Err(Error::InvalidPrediction(format!("{} lengths for {} jobs", y.len(), inst.n())));
    }
    Ok(nu(&inst.processings(), y))
}

/// Candidate dual variables built from a MinIncrease run.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// `a_j`: the realized greedy increase of job `j`.
    pub a: Vec<f64>,
    /// `b[i][t]`: weight of jobs assigned to machine `i` unfinished at time `s*t`.
    pub b: Vec<Vec<f64>>,
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct DualFitReport {
    /// All dual constraints hold for `a/(s+1), b/(s+1)`.
    pub feasible: bool,
    /// `sum a - sum b = (1 - 1/s) * objective` to 1e-6 relative.
    pub identity: bool,
    pub max_violation: f64,
    /// Worst violating `(machine, job, slot)`, 1-based machine/job, if any.
    pub violation: Option<(usize, usize, usize)>,
    pub dual: DualSolution,
    pub objective: f64,
}

/// Verifies the dual-fitting certificate for the MinIncrease schedule: builds the
/// candidate duals, checks the objective-gap identity and the feasibility of the
/// scaled variables on the integer slot grid.
pub fn dual_fit_verify(inst: &Instance, s: f64) -> Result<DualFitReport> {
    if !(s > 1.0) {
        return Err(Error::Unsupported(format!("dual fitting needs s > 1, got {s}")));
    }
    inst.validate()?;
    for job in &inst.jobs {
        for (name, v) in [("processing", job.processing), ("release", job.release)] {
            let k = (v / s).round();
            if (v - k * s).abs() > 1e-9 * (1.0 + v.abs()) {
                return Err(Error::Unsupported(format!(
                    "job {} {name} {v} is not an integer multiple of s = {s}",
                    job.id
                )));
            }
        }
    }

    let run = clairvoyant_minincrease_run(inst)?;
    let objective = run.schedule.objective(&inst.jobs)?;
    let n = inst.n();
    let m = inst.machines();
    let completions = &run.schedule.completions;
    let c_max = completions.iter().cloned().fold(0.0f64, f64::max);
    let horizon = (c_max / s).ceil() as usize + 1;

    let a = run.q_values.clone();
    let mut b = vec![vec![0.0; horizon + 1]; m];
    for j in 0..n {
        let i = run.assignment[j];
        for (t, b_it) in b[i].iter_mut().enumerate() {
            if completions[j] > s * t as f64 + 1e-9 {
                *b_it += inst.jobs[j].weight;
            }
        }
    }

    let a_sum: f64 = a.iter().sum();
    let b_sum: f64 = b.iter().map(|row| row.iter().sum::<f64>()).sum();
    let gap = a_sum - b_sum;
    let target = (1.0 - 1.0 / s) * objective;
    let identity = (gap - target).abs() <= 1e-6 * (1.0 + target.abs());

    let mut max_violation = 0.0f64;
    let mut violation = None;
    for i in 0..m {
        for j in 0..n {
            let p_ij = inst.ptime(i, j);
            let w_j = inst.jobs[j].weight;
            let t0 = (inst.jobs[j].release - 1e-9).ceil().max(0.0) as usize;
            for t in t0..=horizon {
                let lhs = a[j] / (s + 1.0) / p_ij;
                let rhs = b[i][t] / (s + 1.0) + w_j * ((t as f64 + 0.5) / p_ij + 0.5);
                let viol = lhs - rhs;
                if viol > max_violation {
                    max_violation = viol;
                    violation = Some((i + 1, j + 1, t));
                }
            }
        }
    }
    let feasible = max_violation <= 1e-9 * (1.0 + objective);

    Ok(DualFitReport {
        feasible,
        identity,
        max_violation,
        violation,
        dual: DualSolution { a, b, s },
        objective,
    })
}
