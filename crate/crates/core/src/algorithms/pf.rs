//! Proportional Fairness rates: the Eisenberg-Gale program
//! `max sum_j w_j log(sum_i z_ij / l_ij)` subject to per-machine and per-job rate
//! sums at most 1 and `z >= 0`, solved with a log-barrier interior-point method.

use crate::model::Instance;
use crate::simulator::{RateMatrix, RatePolicy, SimState};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Barrier parameter floor relative to the largest weight; the KKT residual of the
/// returned point is of this order.
const MU_FLOOR: f64 = 1e-8;
/// Barrier shrink factor per outer level.
const MU_SHRINK: f64 = 0.15;
/// Total Newton iteration budget.
const MAX_ITER: usize = 10_000;
/// Newton iteration cap per barrier level; near-degenerate optima re-center slowly
/// and further progress comes from the next level instead.
const LEVEL_ITER: usize = 150;

#[derive(Debug, Clone)]
pub struct PfSolution {
    /// Rates over the full instance; zero for jobs outside the alive set.
    pub rates: RateMatrix,
    /// Complementarity residual of the final iterate, relative to the largest weight.
    pub residual: f64,
    pub iterations: usize,
}

struct Barrier<'a> {
    m: usize,
    k: usize,
    weights: Vec<f64>,
    /// Speed `1/l_ij` per (machine, alive job) pair, row-major.
    speed: Vec<f64>,
    mu: f64,
    _inst: &'a Instance,
}

impl Barrier<'_> {
    fn idx(&self, i: usize, jj: usize) -> usize {
        i * self.k + jj
    }

    fn quality(&self, z: &DVector<f64>, jj: usize) -> f64 {
        (0..self.m).map(|i| z[self.idx(i, jj)] * self.speed[self.idx(i, jj)]).sum()
    }

    fn row_slack(&self, z: &DVector<f64>, i: usize) -> f64 {
        1.0 - (0..self.k).map(|jj| z[self.idx(i, jj)]).sum::<f64>()
    }

    fn col_slack(&self, z: &DVector<f64>, jj: usize) -> f64 {
        1.0 - (0..self.m).map(|i| z[self.idx(i, jj)]).sum::<f64>()
    }

    fn value(&self, z: &DVector<f64>) -> f64 {
        let mut v = 0.0;
        for jj in 0..self.k {
            let q = self.quality(z, jj);
            let u = self.col_slack(z, jj);
            if q <= 0.0 || u <= 0.0 {
                return f64::INFINITY;
            }
            v -= self.weights[jj] * q.ln() + self.mu * u.ln();
        }
        for i in 0..self.m {
            let s = self.row_slack(z, i);
            if s <= 0.0 {
                return f64::INFINITY;
            }
            v -= self.mu * s.ln();
        }
        for v_z in z.iter() {
            if *v_z <= 0.0 {
                return f64::INFINITY;
            }
            v -= self.mu * v_z.ln();
        }
        v
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.m * self.k);
        let q: Vec<f64> = (0..self.k).map(|jj| self.quality(z, jj)).collect();
        let s: Vec<f64> = (0..self.m).map(|i| self.row_slack(z, i)).collect();
        let u: Vec<f64> = (0..self.k).map(|jj| self.col_slack(z, jj)).collect();
        for i in 0..self.m {
            for jj in 0..self.k {
                let v = self.idx(i, jj);
                g[v] = -self.weights[jj] * self.speed[v] / q[jj] - self.mu / z[v]
                    + self.mu / s[i]
                    + self.mu / u[jj];
            }
        }
        g
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let nv = self.m * self.k;
        let mut h = DMatrix::zeros(nv, nv);
        let q: Vec<f64> = (0..self.k).map(|jj| self.quality(z, jj)).collect();
        let s: Vec<f64> = (0..self.m).map(|i| self.row_slack(z, i)).collect();
        let u: Vec<f64> = (0..self.k).map(|jj| self.col_slack(z, jj)).collect();
        for jj in 0..self.k {
            // Rank-one terms from the log objective and the column slack barrier.
            let wq = self.weights[jj] / (q[jj] * q[jj]);
            let cu = self.mu / (u[jj] * u[jj]);
            for i1 in 0..self.m {
                let v1 = self.idx(i1, jj);
                for i2 in 0..self.m {
                    let v2 = self.idx(i2, jj);
                    h[(v1, v2)] += wq * self.speed[v1] * self.speed[v2] + cu;
                }
            }
        }
        for i in 0..self.m {
            let cs = self.mu / (s[i] * s[i]);
            for jj1 in 0..self.k {
                for jj2 in 0..self.k {
                    h[(self.idx(i, jj1), self.idx(i, jj2))] += cs;
                }
            }
        }
        for v in 0..nv {
            h[(v, v)] += self.mu / (z[v] * z[v]);
        }
        h
    }

    /// Largest step along `d` keeping `z`, row and column slacks strictly positive.
    fn max_step(&self, z: &DVector<f64>, d: &DVector<f64>) -> f64 {
        let mut alpha: f64 = f64::INFINITY;
        for v in 0..z.len() {
            if d[v] < 0.0 {
                alpha = alpha.min(-z[v] / d[v]);
            }
        }
        for i in 0..self.m {
            let dd: f64 = (0..self.k).map(|jj| d[self.idx(i, jj)]).sum();
            if dd > 0.0 {
                alpha = alpha.min(self.row_slack(z, i) / dd);
            }
        }
        for jj in 0..self.k {
            let dd: f64 = (0..self.m).map(|i| d[self.idx(i, jj)]).sum();
            if dd > 0.0 {
                alpha = alpha.min(self.col_slack(z, jj) / dd);
            }
        }
        alpha
    }
}

/// Solves the Eisenberg-Gale program for the alive jobs of `inst`.
pub fn pf_rates(inst: &Instance, alive: &[usize]) -> Result<PfSolution> {
    let m = inst.machines();
    let n = inst.n();
    let k = alive.len();
    let mut rates = RateMatrix::zeros(m, n);
    if k == 0 {
        return Ok(PfSolution { rates, residual: 0.0, iterations: 0 });
    }
    let weights: Vec<f64> = alive.iter().map(|&j| inst.jobs[j].weight).collect();
    let w_max = weights.iter().cloned().fold(0.0f64, f64::max);
    let mut speed = vec![0.0; m * k];
    for i in 0..m {
        for (jj, &j) in alive.iter().enumerate() {
            speed[i * k + jj] = 1.0 / inst.rate(i, j);
        }
    }
    let mut bar = Barrier { m, k, weights, speed, mu: w_max.max(1.0), _inst: inst };

    let z0 = 0.5 / m.max(k) as f64;
    let mut z = DVector::from_element(m * k, z0);
    let mu_final = MU_FLOOR * w_max.max(1.0);
    let mut iterations = 0usize;
    loop {
        // Newton iterations at the current barrier level.
        for _ in 0..LEVEL_ITER {
            if iterations >= MAX_ITER {
                return Err(Error::SolverNoConvergence(format!(
                    "proportional fairness barrier solve exceeded {MAX_ITER} Newton iterations (mu={})",
                    bar.mu
                )));
            }
            iterations += 1;
            let g = bar.gradient(&z);
            let mut h = bar.hessian(&z);
            let d = loop {
                match h.clone().cholesky() {
                    Some(ch) => break ch.solve(&g),
                    None => {
                        let ridge = 1e-10 * (1.0 + h.trace() / h.nrows() as f64);
                        for v in 0..h.nrows() {
                            h[(v, v)] += ridge;
                        }
                    }
                }
            };
            let dec2 = g.dot(&d);
            if dec2 <= 1e-12 * (1.0 + w_max) {
                break;
            }
            let step = -d;
            let mut alpha = (0.99 * bar.max_step(&z, &step)).min(1.0);
            let phi0 = bar.value(&z);
            let slope = -dec2;
            let mut taken = false;
            for _ in 0..60 {
                let trial = &z + alpha * &step;
                if bar.value(&trial) <= phi0 + 1e-4 * alpha * slope {
                    z = trial;
                    taken = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !taken {
                break;
            }
        }
        if bar.mu <= mu_final {
            break;
        }
        bar.mu = (bar.mu * MU_SHRINK).max(mu_final);
    }

    for i in 0..m {
        for (jj, &j) in alive.iter().enumerate() {
            rates.set(i, j, z[bar.idx(i, jj)]);
        }
    }
    Ok(PfSolution { rates, residual: bar.mu / w_max.max(1.0), iterations })
}

/// Proportional Fairness rate policy. The optimal rates depend only on the alive set,
/// so solutions are cached per alive set.
#[derive(Default)]
pub struct PfPolicy {
    cache: Option<(Vec<usize>, RateMatrix)>,
}

impl RatePolicy for PfPolicy {
    fn rates(&mut self, inst: &Instance, state: &SimState) -> Result<RateMatrix> {
        let alive = state.alive();
        if let Some((cached_alive, z)) = &self.cache {
            if *cached_alive == alive {
                return Ok(z.clone());
            }
        }
        let sol = pf_rates(inst, &alive)?;
        self.cache = Some((alive, sol.rates.clone()));
        Ok(sol.rates)
    }
}
