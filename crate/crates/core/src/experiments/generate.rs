//! Seeded random instance generation for the experiment protocols.

use super::config::{DistributionKind, EnvKind, ExperimentConfig};
use crate::model::{Instance, Job, MachineEnvironment};
use rand::Rng;
use rand_distr::{Distribution, Exp, Pareto, Weibull};

/// Shape of the Pareto distribution used for weights and release dates.
const AUX_PARETO_SHAPE: f64 = 2.0;

/// Draws one processing requirement from the configured length distribution.
pub fn sample_length<R: Rng>(dist: DistributionKind, rng: &mut R) -> f64 {
    match dist {
        DistributionKind::Pareto => Pareto::new(1.0, 1.1).unwrap().sample(rng),
        DistributionKind::Exponential => Exp::new(1.0).unwrap().sample(rng),
        DistributionKind::Weibull => Weibull::new(2.0, 0.5).unwrap().sample(rng),
    }
}

fn sample_aux<R: Rng>(rng: &mut R) -> f64 {
    Pareto::new(1.0, AUX_PARETO_SHAPE).unwrap().sample(rng)
}

/// Generates an instance for the experiment protocol: i.i.d. lengths from the
/// configured distribution; on multiple machines additionally Pareto(2,1) weights
/// and release dates, and small integer machine rates for unrelated environments.
/// The single-machine protocol is unweighted without release dates.
pub fn generate_instance<R: Rng>(cfg: &ExperimentConfig, rng: &mut R) -> Instance {
    let n = cfg.n;
    let lengths: Vec<f64> = (0..n).map(|_| sample_length(cfg.distribution, rng)).collect();
    let (weights, releases): (Vec<f64>, Vec<f64>) = match cfg.env {
        EnvKind::Single => (vec![1.0; n], vec![0.0; n]),
        _ => {
            let w = (0..n).map(|_| sample_aux(rng)).collect();
            let r = (0..n).map(|_| sample_aux(rng)).collect();
            (w, r)
        }
    };
    let jobs: Vec<Job> = (0..n)
        .map(|j| Job::new(j + 1, weights[j], lengths[j], releases[j]))
        .collect();
    let env = match cfg.env {
        EnvKind::Single => MachineEnvironment::Single,
        EnvKind::Identical => MachineEnvironment::Identical(cfg.m),
        EnvKind::Unrelated => {
            let rates = (0..cfg.m)
                .map(|_| (0..n).map(|_| rng.random_range(1..=3) as f64).collect())
                .collect();
            MachineEnvironment::Unrelated { machines: cfg.m, rates }
        }
    };
    Instance::new(jobs, env)
}

/// Random unrelated instance with processing requirements and release dates in
/// `s * {1..10}`, integer machine rates in 1..=3 and integer weights; completions
/// land on multiples of `s` as the dual-fitting identity requires.
pub fn generate_dual_instance<R: Rng>(s: f64, rng: &mut R) -> Instance {
    let n = rng.random_range(2..=20);
    let m = rng.random_range(1..=4);
    let jobs: Vec<Job> = (0..n)
        .map(|j| {
            Job::new(
                j + 1,
                rng.random_range(1..=5) as f64,
                s * rng.random_range(1..=10) as f64,
                s * rng.random_range(0..=10) as f64,
            )
        })
        .collect();
    let rates = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(1..=3) as f64).collect())
        .collect();
    Instance::new(jobs, MachineEnvironment::Unrelated { machines: m, rates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::ExperimentKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn pareto_lengths_at_least_scale() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert!(sample_length(DistributionKind::Pareto, &mut rng) >= 1.0);
        }
    }

    #[test]
    fn aux_pareto_mean_near_two() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let k = 100_000;
        let mean: f64 = (0..k).map(|_| sample_aux(&mut rng)).sum::<f64>() / k as f64;
        assert!((1.9..=2.1).contains(&mean), "mean {mean}");
    }

    #[test]
    fn same_seed_same_instance_text() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Unrelated);
        cfg.n = 20;
        cfg.m = 3;
        let a = generate_instance(&cfg, &mut ChaCha12Rng::seed_from_u64(11));
        let b = generate_instance(&cfg, &mut ChaCha12Rng::seed_from_u64(11));
        assert_eq!(a.to_text(), b.to_text());
        a.validate().unwrap();
    }

    #[test]
    fn single_env_is_unweighted_without_releases() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
        cfg.n = 50;
        let inst = generate_instance(&cfg, &mut ChaCha12Rng::seed_from_u64(1));
        assert!(inst.unit_weights());
        assert!(!inst.has_releases());
    }

    #[test]
    fn dual_instances_are_s_multiples() {
        let s = 1.0 + 2.0f64.sqrt();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let inst = generate_dual_instance(s, &mut rng);
        inst.validate().unwrap();
        for job in &inst.jobs {
            assert!(((job.processing / s) - (job.processing / s).round()).abs() < 1e-9);
            assert!(((job.release / s) - (job.release / s).round()).abs() < 1e-9);
        }
    }
}
