//! Domain types: jobs, machine environments, predictions and schedules, plus the
//! elementary order/objective operations and the plain-text instance file format.

use crate::{Error, Result};

/// Job ids are 1-based and contiguous; internal vectors are indexed by `id - 1`.
pub type JobId = usize;

/// Absolute/relative comparison tolerance on the natural scale of an instance.
pub const TOL: f64 = 1e-9;
/// Slack allowed on per-machine and per-job rate capacity checks.
pub const CAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: JobId,
    pub weight: f64,
    pub processing: f64,
    pub release: f64,
}

impl Job {
    pub fn new(id: JobId, weight: f64, processing: f64, release: f64) -> Self {
        Job { id, weight, processing, release }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MachineEnvironment {
    Single,
    Identical(usize),
    /// `rates[i][j]` is the slowdown factor of job `j+1` on machine `i+1`:
    /// processing job `j` on machine `i` for one time unit advances it by `1/rates[i][j]`.
    Unrelated { machines: usize, rates: Vec<Vec<f64>> },
}

impl MachineEnvironment {
    pub fn machines(&self) -> usize {
        match self {
            MachineEnvironment::Single => 1,
            MachineEnvironment::Identical(m) => *m,
            MachineEnvironment::Unrelated { machines, .. } => *machines,
        }
    }

    /// The rate `l_ij` for machine index `i` and job index `j` (both 0-based).
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        match self {
            MachineEnvironment::Unrelated { rates, .. } => rates[i][j],
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub jobs: Vec<Job>,
    pub env: MachineEnvironment,
}

impl Instance {
    pub fn new(jobs: Vec<Job>, env: MachineEnvironment) -> Self {
        Instance { jobs, env }
    }

    /// Single-machine instance from weight and processing vectors, all releases zero.
    pub fn single(weights: &[f64], processing: &[f64]) -> Self {
        let jobs = weights
            .iter()
            .zip(processing)
            .enumerate()
            .map(|(j, (&w, &p))| Job::new(j + 1, w, p, 0.0))
            .collect();
        Instance::new(jobs, MachineEnvironment::Single)
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn machines(&self) -> usize {
        self.env.machines()
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.env.rate(i, j)
    }

    /// Total processing time `p_ij = l_ij * p_j` of job index `j` on machine index `i`.
    pub fn ptime(&self, i: usize, j: usize) -> f64 {
        self.rate(i, j) * self.jobs[j].processing
    }

    /// Density `mu_ij = w_j / p_ij`.
    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.jobs[j].weight / self.ptime(i, j)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.weight).collect()
    }

    pub fn processings(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.processing).collect()
    }

    pub fn releases(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.release).collect()
    }

    pub fn has_releases(&self) -> bool {
        self.jobs.iter().any(|j| j.release > 0.0)
    }

    pub fn unit_weights(&self) -> bool {
        self.jobs.iter().all(|j| j.weight == 1.0)
    }

    /// Checks all type invariants; reports the first violated one.
    pub fn validate(&self) -> Result<()> {
        if self.jobs.is_empty() {
            return Err(Error::InvalidInstance("empty job set".into()));
        }
        for (idx, job) in self.jobs.iter().enumerate() {
            if job.id != idx + 1 {
                return Err(Error::InvalidInstance(format!(
                    "job ids must be contiguous starting at 1, found id {} at position {}",
                    job.id,
                    idx + 1
                )));
            }
            if !(job.weight > 0.0) || !job.weight.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "job {}: non-positive weight {}",
                    job.id, job.weight
                )));
            }
            if !(job.processing > 0.0) || !job.processing.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "job {}: non-positive processing {}",
                    job.id, job.processing
                )));
            }
            if !(job.release >= 0.0) || !job.release.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "job {}: negative release {}",
                    job.id, job.release
                )));
            }
        }
        match &self.env {
            MachineEnvironment::Single => {}
            MachineEnvironment::Identical(m) => {
                if *m == 0 {
                    return Err(Error::InvalidInstance("zero machines".into()));
                }
            }
            MachineEnvironment::Unrelated { machines, rates } => {
                if *machines == 0 {
                    return Err(Error::InvalidInstance("zero machines".into()));
                }
                if rates.len() != *machines {
                    return Err(Error::InvalidInstance(format!(
                        "rate matrix has {} rows, expected {}",
                        rates.len(),
                        machines
                    )));
                }
                for (i, row) in rates.iter().enumerate() {
                    if row.len() != self.n() {
                        return Err(Error::InvalidInstance(format!(
                            "rate row {} has {} entries, expected {}",
                            i + 1,
                            row.len(),
                            self.n()
                        )));
                    }
                    for (j, &l) in row.iter().enumerate() {
                        if !(l > 0.0) || !l.is_finite() {
                            return Err(Error::InvalidInstance(format!(
                                "rate l[{}][{}] = {} must be positive and finite",
                                i + 1,
                                j + 1,
                                l
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses the line-oriented instance format: header `n m env`, one line per job
    /// `id weight processing release`, then (unrelated only) `m` rows of `n` rates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let mut head = header.split_whitespace();
        let n: usize = parse_field(head.next(), "n")?;
        let m: usize = parse_field(head.next(), "m")?;
        let env_name = head.next().ok_or_else(|| Error::Parse("missing env in header".into()))?;
        let mut jobs = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse("missing job line".into()))?;
            let mut f = line.split_whitespace();
            jobs.push(Job::new(
                parse_field(f.next(), "id")?,
                parse_field(f.next(), "weight")?,
                parse_field(f.next(), "processing")?,
                parse_field(f.next(), "release")?,
            ));
        }
        let env = match env_name {
            "single" => {
                if m != 1 {
                    return Err(Error::Parse(format!("single environment with m = {m}")));
                }
                MachineEnvironment::Single
            }
            "identical" => MachineEnvironment::Identical(m),
            "unrelated" => {
                let mut rates = Vec::with_capacity(m);
                for _ in 0..m {
                    let line = lines.next().ok_or_else(|| Error::Parse("missing rate row".into()))?;
                    let row: Vec<f64> = line
                        .split_whitespace()
                        .map(|v| v.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                        .collect::<Result<_>>()?;
                    rates.push(row);
                }
                MachineEnvironment::Unrelated { machines: m, rates }
            }
            other => return Err(Error::Parse(format!("unknown environment `{other}`"))),
        };
        let inst = Instance::new(jobs, env);
        inst.validate()?;
        Ok(inst)
    }

    /// Serializes to the instance file format. `parse(to_text(i)) == i` bit-exact.
    pub fn to_text(&self) -> String {
        let env_name = match &self.env {
            MachineEnvironment::Single => "single",
            MachineEnvironment::Identical(_) => "identical",
            MachineEnvironment::Unrelated { .. } => "unrelated",
        };
        let mut out = format!("{} {} {}\n", self.n(), self.machines(), env_name);
        for job in &self.jobs {
            out.push_str(&format!(
                "{} {} {} {}\n",
                job.id, job.weight, job.processing, job.release
            ));
        }
        if let MachineEnvironment::Unrelated { rates, .. } = &self.env {
            for row in rates {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .ok_or_else(|| Error::Parse(format!("missing field `{name}`")))?
        .parse()
        .map_err(|e| Error::Parse(format!("field `{name}`: {e}")))
}

/// A permutation prediction: a single total priority order, or per-machine orders
/// that also encode a job-to-machine assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum PermutationPrediction {
    /// `order[k]` is the id of the job at priority position `k` (earlier = higher).
    SingleOrder(Vec<JobId>),
    /// `orders[i]` is the priority order of the jobs assigned to machine `i+1`.
    Assigned(Vec<Vec<JobId>>),
}

impl PermutationPrediction {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            PermutationPrediction::SingleOrder(order) => {
                check_partition(std::slice::from_ref(order), n)
            }
            PermutationPrediction::Assigned(orders) => check_partition(orders, n),
        }
    }

    /// For `Assigned` predictions: machine index (0-based) per job index.
    pub fn assignment(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            PermutationPrediction::SingleOrder(_) => Err(Error::InvalidPrediction(
                "machine assignment requested for a single-order prediction".into(),
            )),
            PermutationPrediction::Assigned(orders) => {
                self.validate(n)?;
                let mut machine = vec![0usize; n];
                for (i, order) in orders.iter().enumerate() {
                    for &id in order {
                        machine[id - 1] = i;
                    }
                }
                Ok(machine)
            }
        }
    }

    /// Priority position per job index; lower position means higher priority.
    /// For `Assigned`, positions are per machine.
    pub fn positions(&self, n: usize) -> Result<Vec<usize>> {
        self.validate(n)?;
        let mut pos = vec![0usize; n];
        let orders: &[Vec<JobId>] = match self {
            PermutationPrediction::SingleOrder(order) => std::slice::from_ref(order),
            PermutationPrediction::Assigned(orders) => orders,
        };
        for order in orders {
            for (k, &id) in order.iter().enumerate() {
                pos[id - 1] = k;
            }
        }
        Ok(pos)
    }

    /// Serializes as whitespace-separated id lists, one machine per line for `Assigned`.
    pub fn to_text(&self) -> String {
        match self {
            PermutationPrediction::SingleOrder(order) => {
                let ids: Vec<String> = order.iter().map(|id| id.to_string()).collect();
                format!("{}\n", ids.join(" "))
            }
            PermutationPrediction::Assigned(orders) => {
                let mut out = String::new();
                for (i, order) in orders.iter().enumerate() {
                    let ids: Vec<String> = order.iter().map(|id| id.to_string()).collect();
                    out.push_str(&format!("machine {}: {}\n", i + 1, ids.join(" ")));
                }
                out
            }
        }
    }
}

fn check_partition(orders: &[Vec<JobId>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    let mut count = 0usize;
    for order in orders {
        for &id in order {
            if id == 0 || id > n {
                return Err(Error::InvalidPrediction(format!("job id {id} out of range 1..={n}")));
            }
            if seen[id - 1] {
                return Err(Error::InvalidPrediction(format!("job id {id} appears twice")));
            }
            seen[id - 1] = true;
            count += 1;
        }
    }
    if count != n {
        return Err(Error::InvalidPrediction(format!("{count} jobs in prediction, expected {n}")));
    }
    Ok(())
}

/// Predicted processing requirements, one per job.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthPrediction(pub Vec<f64>);

impl LengthPrediction {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::InvalidPrediction(format!(
                "{} predicted lengths for {} jobs",
                self.0.len(),
                n
            )));
        }
        if let Some(y) = self.0.iter().find(|y| !(**y >= 0.0)) {
            return Err(Error::InvalidPrediction(format!("negative predicted length {y}")));
        }
        Ok(())
    }
}

/// One piecewise-constant segment of a schedule. Rates are stored sparsely as
/// `(machine index, job index, rate)` triples with positive rates only.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub rates: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Time-ordered segments; empty if the run did not record them.
    pub segments: Vec<Segment>,
    /// Completion time per job index; `NAN` if the job never completed.
    pub completions: Vec<f64>,
}

impl Schedule {
    pub fn objective(&self, jobs: &[Job]) -> Result<f64> {
        objective(self, jobs)
    }

    /// Golden-test dump: one `t_start t_end machine job rate` line per segment entry,
    /// sorted lexicographically, then `C job time` lines.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        for seg in &self.segments {
            for &(i, j, z) in &seg.rates {
                lines.push(format!("{} {} {} {} {}", seg.start, seg.end, i + 1, j + 1, z));
            }
        }
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        for (j, c) in self.completions.iter().enumerate() {
            out.push_str(&format!("C {} {}\n", j + 1, c));
        }
        out
    }
}

/// WSPT order: non-increasing `w_j / length_j`, ties broken by ascending job id.
pub fn wspt_order(weights: &[f64], lengths: &[f64]) -> Result<Vec<JobId>> {
    if weights.len() != lengths.len() {
        return Err(Error::InvalidInstance(format!(
            "{} weights vs {} lengths",
            weights.len(),
            lengths.len()
        )));
    }
    if let Some(l) = lengths.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidInstance(format!("non-positive length {l}")));
    }
    let mut order: Vec<JobId> = (1..=weights.len()).collect();
    // Compare densities via cross products to avoid division noise on ties.
    order.sort_by(|&a, &b| {
        let da = weights[a - 1] * lengths[b - 1];
        let db = weights[b - 1] * lengths[a - 1];
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });
    Ok(order)
}

/// The weighted sum of completion times.
pub fn objective(schedule: &Schedule, jobs: &[Job]) -> Result<f64> {
    let mut total = 0.0;
    for (j, job) in jobs.iter().enumerate() {
        let c = schedule.completions.get(j).copied().unwrap_or(f64::NAN);
        if !c.is_finite() {
            return Err(Error::MissingCompletion(job.id));
        }
        total += job.weight * c;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_simple_instance() {
        let inst = Instance::single(&[1.0, 1.0], &[1.0, 2.0]);
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn validate_rejects_zero_processing() {
        let inst = Instance::single(&[1.0], &[0.0]);
        assert!(matches!(inst.validate(), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn validate_rejects_rate_dimension_mismatch() {
        let jobs = vec![Job::new(1, 1.0, 1.0, 0.0), Job::new(2, 1.0, 1.0, 0.0)];
        let env = MachineEnvironment::Unrelated {
            machines: 2,
            rates: vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]],
        };
        assert!(Instance::new(jobs, env).validate().is_err());
    }

    #[test]
    fn validate_rejects_duplicate_ids() {
        let jobs = vec![Job::new(1, 1.0, 1.0, 0.0), Job::new(1, 1.0, 1.0, 0.0)];
        assert!(Instance::new(jobs, MachineEnvironment::Single).validate().is_err());
    }

    #[test]
    fn wspt_order_by_density_with_id_ties() {
        // densities (0.5, 1, 1): tie between jobs 2 and 3 broken by id
        assert_eq!(wspt_order(&[1.0, 2.0, 1.0], &[2.0, 2.0, 1.0]).unwrap(), vec![2, 3, 1]);
        assert_eq!(wspt_order(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1, 2]);
        assert_eq!(wspt_order(&[1.0], &[5.0]).unwrap(), vec![1]);
    }

    #[test]
    fn wspt_order_rejects_zero_length() {
        assert!(wspt_order(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn objective_sums_weighted_completions() {
        let jobs = vec![Job::new(1, 1.0, 1.0, 0.0), Job::new(2, 2.0, 1.0, 0.0)];
        let sched = Schedule { segments: vec![], completions: vec![3.0, 2.0] };
        assert_eq!(sched.objective(&jobs).unwrap(), 7.0);
        let one = vec![Job::new(1, 5.0, 1.0, 0.0)];
        let s1 = Schedule { segments: vec![], completions: vec![1.0] };
        assert_eq!(s1.objective(&one).unwrap(), 5.0);
    }

    #[test]
    fn objective_rejects_missing_completion() {
        let jobs = vec![Job::new(1, 1.0, 1.0, 0.0)];
        let sched = Schedule { segments: vec![], completions: vec![] };
        assert!(matches!(sched.objective(&jobs), Err(Error::MissingCompletion(1))));
    }

    #[test]
    fn instance_text_round_trip() {
        let jobs = vec![Job::new(1, 1.5, 0.1, 0.0), Job::new(2, 2.0, 3.25, 1.125)];
        let env = MachineEnvironment::Unrelated {
            machines: 2,
            rates: vec![vec![1.0, 2.5], vec![0.5, 1.0]],
        };
        let inst = Instance::new(jobs, env);
        let text = inst.to_text();
        let back = Instance::parse(&text).unwrap();
        assert_eq!(inst, back);
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn prediction_validation() {
        let p = PermutationPrediction::SingleOrder(vec![2, 1, 3]);
        assert!(p.validate(3).is_ok());
        assert!(p.validate(4).is_err());
        let a = PermutationPrediction::Assigned(vec![vec![2], vec![1, 3]]);
        assert!(a.validate(3).is_ok());
        assert_eq!(a.assignment(3).unwrap(), vec![1, 0, 1]);
        let bad = PermutationPrediction::Assigned(vec![vec![2], vec![2, 3]]);
        assert!(bad.validate(3).is_err());
    }
}
