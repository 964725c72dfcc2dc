//! Sensitivity and online-learning experiment drivers.

use super::config::{ExperimentConfig, ExperimentKind};
use super::generate::generate_instance;
use crate::algorithms::{clairvoyant_minincrease, pc_wspt_single, run_policy, wspt_order_of_instance, PolicySpec};
use crate::errors::{ell1, eta_r, eta_s, reference_prediction};
use crate::learn::{clamp_lengths, empirical_error, erm_learn, length_to_permutation, perturb_lengths, NoiseMode, SampleSet};
use crate::model::{Instance, LengthPrediction, PermutationPrediction};
use crate::simulator::priority_schedule;
use crate::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One evaluated experiment cell; one CSV row.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub distribution: String,
    pub n: usize,
    pub m: usize,
    pub algorithm: String,
    pub lambda: Option<f64>,
    /// Noise level (sensitivity) or round index (online learning).
    pub x: f64,
    pub run: usize,
    pub seed: u64,
    pub objective: f64,
    pub baseline: f64,
    pub ratio: f64,
    pub eta_s: f64,
    pub ell1: f64,
}

/// Online-learning results: the records plus, per repetition and round, the
/// prediction error of the learned permutation measured on the base instance.
#[derive(Debug, Clone)]
pub struct OnlineOutcome {
    pub records: Vec<ExperimentRecord>,
    pub base_errors: Vec<Vec<f64>>,
}

/// Derives an independent stream seed from the master seed and cell coordinates
/// (splitmix64 over the concatenated words).
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    for &t in tags {
        state = state.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(t);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        state = z ^ (z >> 31);
    }
    state
}

/// Clairvoyant baseline per environment: the exact optimum (WSPT) on a single
/// machine without release dates, the preemptive WSPT-priority schedule on
/// identical machines, the greedy assignment schedule on unrelated machines.
pub fn baseline_objective(inst: &Instance) -> Result<f64> {
    match inst.env {
        crate::model::MachineEnvironment::Unrelated { .. } => {
            let (schedule, _) = clairvoyant_minincrease(inst)?;
            schedule.objective(&inst.jobs)
        }
        _ => {
            let order = wspt_order_of_instance(inst)?;
            let schedule = if inst.machines() == 1 && !inst.has_releases() {
                pc_wspt_single(inst, &order)?
            } else {
                priority_schedule(inst, &PermutationPrediction::SingleOrder(order))?
            };
            schedule.objective(&inst.jobs)
        }
    }
}

/// Builds the permutation prediction from predicted lengths and reports the
/// prediction error on the true instance.
fn prediction_from_lengths(inst: &Instance, y: &LengthPrediction) -> Result<(PermutationPrediction, f64)> {
    match inst.env {
        crate::model::MachineEnvironment::Unrelated { .. } => {
            let mut predicted = inst.clone();
            for (job, &len) in predicted.jobs.iter_mut().zip(&clamp_lengths(&y.0)) {
                job.processing = len;
            }
            let (_, pred) = clairvoyant_minincrease(&predicted)?;
            let sref = reference_prediction(inst)?;
            let err = eta_r(inst, &pred, &sref)?.eta_r;
            Ok((pred, err))
        }
        _ => {
            let order = length_to_permutation(&inst.weights(), y)?;
            let err = eta_s(inst, &order)?.eta_s;
            Ok((PermutationPrediction::SingleOrder(order), err))
        }
    }
}

fn record_for(
    cfg: &ExperimentConfig,
    inst: &Instance,
    algo: &PolicySpec,
    pred: &PermutationPrediction,
    x: f64,
    run: usize,
    seed: u64,
    baseline: f64,
    err: f64,
    l1: f64,
) -> ExperimentRecord {
    let objective = run_policy(inst, algo, Some(pred), false)
        .and_then(|s| s.objective(&inst.jobs))
        .unwrap_or(f64::NAN);
    ExperimentRecord {
        experiment: cfg.experiment.to_string(),
        distribution: cfg.distribution.to_string(),
        n: cfg.n,
        m: cfg.m,
        algorithm: algo.to_string(),
        lambda: algo.lambda(),
        x,
        run,
        seed,
        objective,
        baseline,
        ratio: objective / baseline,
        eta_s: err,
        ell1: l1,
    }
}

/// Sensitivity protocol: per run a fixed instance; per noise level a perturbed
/// length prediction shared by all algorithms.
pub fn run_sensitivity(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for run in 0..cfg.runs {
        let mut inst_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, &[1, run as u64]));
        let inst = generate_instance(cfg, &mut inst_rng);
        let baseline = baseline_objective(&inst)?;
        let p = inst.processings();
        for (oi, &omega) in cfg.omegas.iter().enumerate() {
            let cell_seed = derive_seed(cfg.seed, &[2, run as u64, oi as u64]);
            let mut noise_rng = ChaCha12Rng::seed_from_u64(cell_seed);
            let y = perturb_lengths(&p, NoiseMode::Fixed(omega), &mut noise_rng);
            let l1 = ell1(&p, &y.0);
            let (pred, err) = prediction_from_lengths(&inst, &y)?;
            for algo in &cfg.algorithms {
                records.push(record_for(
                    cfg, &inst, algo, &pred, omega, run, cell_seed, baseline, err, l1,
                ));
            }
        }
    }
    Ok(records)
}

/// Online-learning protocol: per repetition a base instance; each round arrives as
/// a noisy copy, evaluated with the permutation learned from all previous rounds.
/// The round-0 prediction comes from an independently sampled instance.
pub fn run_online_learning(cfg: &ExperimentConfig) -> Result<OnlineOutcome> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut base_errors = Vec::new();
    for rep in 0..cfg.runs {
        let mut base_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, &[3, rep as u64]));
        let base = generate_instance(cfg, &mut base_rng);
        let base_p = base.processings();

        let mut init_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, &[4, rep as u64]));
        let init = generate_instance(cfg, &mut init_rng);
        let init_lengths = LengthPrediction(init.processings());

        let mut seen: Vec<Instance> = Vec::new();
        let mut rep_errors = Vec::with_capacity(cfg.rounds);
        for round in 0..cfg.rounds {
            let cell_seed = derive_seed(cfg.seed, &[5, rep as u64, round as u64]);
            let mut noise_rng = ChaCha12Rng::seed_from_u64(cell_seed);
            let y_t = perturb_lengths(&base_p, NoiseMode::Scaled(cfg.gamma), &mut noise_rng);
            let mut arrived = base.clone();
            for (job, &len) in arrived.jobs.iter_mut().zip(&y_t.0) {
                job.processing = len;
            }
            let baseline = baseline_objective(&arrived)?;

            let pred = if round == 0 {
                prediction_from_lengths(&base, &init_lengths)?.0
            } else {
                erm_learn(&SampleSet::new(seen.clone())?)?
            };
            let err_on_round = match &pred {
                PermutationPrediction::SingleOrder(order) => eta_s(&arrived, order)?.eta_s,
                _ => eta_r(&arrived, &pred, &reference_prediction(&arrived)?)?.eta_r,
            };
            rep_errors.push(empirical_error(&pred, &SampleSet::new(vec![base.clone()])?)?);
            let l1 = ell1(&base_p, &y_t.0);
            for algo in &cfg.algorithms {
                records.push(record_for(
                    cfg, &arrived, algo, &pred, round as f64, rep, cell_seed, baseline,
                    err_on_round, l1,
                ));
            }
            seen.push(arrived);
        }
        base_errors.push(rep_errors);
    }
    Ok(OnlineOutcome { records, base_errors })
}

/// Dispatches on the configured experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    match cfg.experiment {
        ExperimentKind::Sensitivity => run_sensitivity(cfg),
        ExperimentKind::Online => Ok(run_online_learning(cfg)?.records),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{DistributionKind, EnvKind};

    fn small_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
        cfg.n = 15;
        cfg.runs = 2;
        cfg.omegas = vec![0.0, 1.0];
        cfg.distribution = DistributionKind::Exponential;
        cfg
    }

    #[test]
    fn baseline_spt_example() {
        let inst = Instance::single(&[1.0, 1.0], &[2.0, 1.0]);
        assert!((baseline_objective(&inst).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn baseline_no_contention_identical() {
        use crate::model::{Job, MachineEnvironment};
        let jobs = vec![Job::new(1, 2.0, 1.0, 0.5), Job::new(2, 1.0, 3.0, 0.0)];
        let inst = Instance::new(jobs, MachineEnvironment::Identical(3));
        let expect = 2.0 * (0.5 + 1.0) + 1.0 * 3.0;
        assert!((baseline_objective(&inst).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn sensitivity_record_grid() {
        let cfg = small_cfg();
        let records = run_sensitivity(&cfg).unwrap();
        assert_eq!(records.len(), cfg.omegas.len() * cfg.algorithms.len() * cfg.runs);
        for r in &records {
            assert!(r.baseline > 0.0 && r.objective.is_finite());
            assert!((r.ratio - r.objective / r.baseline).abs() < 1e-12);
        }
    }

    #[test]
    fn sensitivity_zero_noise_perfect_prediction() {
        let cfg = small_cfg();
        let records = run_sensitivity(&cfg).unwrap();
        for r in records.iter().filter(|r| r.x == 0.0) {
            assert_eq!(r.eta_s, 0.0);
            assert_eq!(r.ell1, 0.0);
            if let Some(lambda) = r.lambda {
                assert!(r.ratio <= 1.0 / (1.0 - lambda) + 1e-6, "ratio {}", r.ratio);
            }
        }
    }

    #[test]
    fn rr_rows_ignore_noise() {
        let cfg = small_cfg();
        let records = run_sensitivity(&cfg).unwrap();
        for run in 0..cfg.runs {
            let rr: Vec<f64> = records
                .iter()
                .filter(|r| r.algorithm == "rr" && r.run == run)
                .map(|r| r.objective)
                .collect();
            assert_eq!(rr.len(), cfg.omegas.len());
            assert!(rr.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn sensitivity_deterministic() {
        let cfg = small_cfg();
        let a = run_sensitivity(&cfg).unwrap();
        let b = run_sensitivity(&cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.objective, y.objective);
            assert_eq!(x.seed, y.seed);
        }
    }

    #[test]
    fn online_round_axis_and_shapes() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Online, EnvKind::Single);
        cfg.n = 10;
        cfg.runs = 2;
        cfg.rounds = 3;
        cfg.gamma = 2.0;
        cfg.distribution = DistributionKind::Exponential;
        let out = run_online_learning(&cfg).unwrap();
        assert_eq!(out.records.len(), cfg.rounds * cfg.algorithms.len() * cfg.runs);
        assert_eq!(out.base_errors.len(), cfg.runs);
        assert!(out.base_errors.iter().all(|e| e.len() == cfg.rounds));
        let max_round = out.records.iter().map(|r| r.x).fold(0.0, f64::max);
        assert_eq!(max_round, (cfg.rounds - 1) as f64);
    }
}
