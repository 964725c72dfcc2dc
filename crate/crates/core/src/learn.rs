//! Prediction generation: converting length predictions to permutations, noise
//! models for perturbed lengths, and the empirical-risk-minimizing permutation
//! learner over sampled instances.

use crate::errors::{eta_r, eta_s, reference_prediction};
use crate::model::{Instance, JobId, LengthPrediction, MachineEnvironment, PermutationPrediction, wspt_order};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Floor applied to non-positive predicted lengths before density ordering; tiny
/// predictions sort first.
pub const LENGTH_EPS: f64 = 1e-9;

/// Independent samples of the same job set (shared n and environment).
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<Instance>,
}

impl SampleSet {
    pub fn new(samples: Vec<Instance>) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::InvalidInstance("empty sample set".into()))?;
        for s in &samples {
            s.validate()?;
            if s.n() != first.n() || s.machines() != first.machines() {
                return Err(Error::InvalidInstance(
                    "samples must share job count and machine count".into(),
                ));
            }
        }
        Ok(SampleSet { samples })
    }

    pub fn z(&self) -> usize {
        self.samples.len()
    }

    /// The instance of average weights, processing requirements and release dates;
    /// machine rates are taken from the first sample.
    pub fn average_instance(&self) -> Instance {
        let z = self.z() as f64;
        let first = &self.samples[0];
        let mut avg = first.clone();
        for (j, job) in avg.jobs.iter_mut().enumerate() {
            job.weight = self.samples.iter().map(|s| s.jobs[j].weight).sum::<f64>() / z;
            job.processing = self.samples.iter().map(|s| s.jobs[j].processing).sum::<f64>() / z;
            job.release = self.samples.iter().map(|s| s.jobs[j].release).sum::<f64>() / z;
        }
        avg
    }
}

/// Clamps predicted lengths to the positive floor.
pub fn clamp_lengths(y: &[f64]) -> Vec<f64> {
    y.iter().map(|&v| v.max(LENGTH_EPS)).collect()
}

/// WSPT order of the predicted lengths; non-positive predictions are clamped so
/// they sort first (ties by id).
pub fn length_to_permutation(weights: &[f64], y: &LengthPrediction) -> Result<Vec<JobId>> {
    wspt_order(weights, &clamp_lengths(&y.0))
}

/// Noise model for perturbed length predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    /// Gaussian noise with a fixed standard deviation.
    Fixed(f64),
    /// Gaussian noise with standard deviation `gamma * sqrt(p_j)`.
    Scaled(f64),
}

/// `y_j = max(p_j + N(0, std_j^2), eps)` with the per-job deviation given by `mode`.
pub fn perturb_lengths<R: Rng>(p: &[f64], mode: NoiseMode, rng: &mut R) -> LengthPrediction {
    let y = p
        .iter()
        .map(|&pj| {
            let std = match mode {
                NoiseMode::Fixed(omega) => omega,
                NoiseMode::Scaled(gamma) => gamma * pj.sqrt(),
            };
            let noisy = if std > 0.0 {
                pj + Normal::new(0.0, std).unwrap().sample(rng)
            } else {
                pj
            };
            noisy.max(LENGTH_EPS)
        })
        .collect();
    LengthPrediction(y)
}

/// Learns the permutation minimizing the empirical sequence error over the samples:
/// the WSPT order of the average instance, or per-machine orders from the
/// clairvoyant greedy on the average instance for unrelated machines.
pub fn erm_learn(samples: &SampleSet) -> Result<PermutationPrediction> {
    let avg = samples.average_instance();
    match avg.env {
        MachineEnvironment::Unrelated { .. } => Ok(crate::algorithms::clairvoyant_minincrease(&avg)?.1),
        _ => Ok(PermutationPrediction::SingleOrder(wspt_order(&avg.weights(), &avg.processings())?)),
    }
}

/// Mean prediction error of `pred` over the samples: the sequence error for single
/// orders, the contribution-based error against the per-sample reference for
/// per-machine orders.
pub fn empirical_error(pred: &PermutationPrediction, samples: &SampleSet) -> Result<f64> {
    let mut total = 0.0;
    for s in &samples.samples {
        total += match pred {
            PermutationPrediction::SingleOrder(order) => eta_s(s, order)?.eta_s,
            PermutationPrediction::Assigned(_) => {
                let sref = reference_prediction(s)?;
                eta_r(s, pred, &sref)?.eta_r
            }
        };
    }
    Ok(total / samples.z() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn perfect_lengths_give_reference_order() {
        let w = [1.0, 2.0, 1.0];
        let p = [2.0, 2.0, 1.0];
        let y = LengthPrediction(p.to_vec());
        let order = length_to_permutation(&w, &y).unwrap();
        assert_eq!(order, wspt_order(&w, &p).unwrap());
    }

    #[test]
    fn zero_length_sorts_first_after_clamp() {
        let y = LengthPrediction(vec![1.0, 1.0, 0.0]);
        assert_eq!(length_to_permutation(&[1.0; 3], &y).unwrap(), vec![3, 1, 2]);
    }

    #[test]
    fn equal_lengths_give_identity_order() {
        let y = LengthPrediction(vec![2.0; 4]);
        assert_eq!(length_to_permutation(&[1.0; 4], &y).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn zero_noise_is_exact() {
        let p = [1.0, 2.5, 0.25];
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let y = perturb_lengths(&p, NoiseMode::Fixed(0.0), &mut rng);
        assert_eq!(y.0, p.to_vec());
        let y = perturb_lengths(&p, NoiseMode::Scaled(0.0), &mut rng);
        assert_eq!(y.0, p.to_vec());
    }

    #[test]
    fn perturbation_deterministic_and_clamped() {
        let p = vec![1.0; 200];
        let mut r1 = ChaCha12Rng::seed_from_u64(42);
        let mut r2 = ChaCha12Rng::seed_from_u64(42);
        let y1 = perturb_lengths(&p, NoiseMode::Fixed(10.0), &mut r1);
        let y2 = perturb_lengths(&p, NoiseMode::Fixed(10.0), &mut r2);
        assert_eq!(y1, y2);
        assert!(y1.0.iter().all(|&v| v >= LENGTH_EPS));
        // Large noise on unit jobs must clamp at least one draw.
        assert!(y1.0.iter().any(|&v| v == LENGTH_EPS));
    }

    #[test]
    fn erm_single_sample_is_its_wspt_order() {
        let inst = Instance::single(&[1.0, 1.0], &[3.0, 1.0]);
        let samples = SampleSet::new(vec![inst]).unwrap();
        let pred = erm_learn(&samples).unwrap();
        assert_eq!(pred, PermutationPrediction::SingleOrder(vec![2, 1]));
    }

    #[test]
    fn erm_averages_samples() {
        let s1 = Instance::single(&[1.0, 1.0], &[1.0, 3.0]);
        let s2 = Instance::single(&[1.0, 1.0], &[3.0, 1.0]);
        let samples = SampleSet::new(vec![s1, s2]).unwrap();
        // Averages (2,2): tie broken by id.
        let pred = erm_learn(&samples).unwrap();
        assert_eq!(pred, PermutationPrediction::SingleOrder(vec![1, 2]));
        // By symmetry both orders have the same empirical error.
        let e12 = empirical_error(&PermutationPrediction::SingleOrder(vec![1, 2]), &samples).unwrap();
        let e21 = empirical_error(&PermutationPrediction::SingleOrder(vec![2, 1]), &samples).unwrap();
        assert_eq!(e12, e21);
        assert_eq!(e12, 1.0);
    }

    #[test]
    fn empirical_error_zero_for_perfect_order() {
        let inst = Instance::single(&[1.0, 2.0], &[2.0, 1.0]);
        let order = wspt_order(&inst.weights(), &inst.processings()).unwrap();
        let samples = SampleSet::new(vec![inst.clone(), inst]).unwrap();
        let e = empirical_error(&PermutationPrediction::SingleOrder(order), &samples).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn sample_set_rejects_empty_and_mismatched() {
        assert!(SampleSet::new(vec![]).is_err());
        let a = Instance::single(&[1.0], &[1.0]);
        let b = Instance::single(&[1.0, 1.0], &[1.0, 1.0]);
        assert!(SampleSet::new(vec![a, b]).is_err());
    }
}
