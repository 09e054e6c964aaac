//! Discrete-event M/G/1-FCFS simulation: discharge costs, stationary mean
//! cost per job, busy-period statistics, waiting-time moments and CDFs.
//!
//! Backlog is tracked analytically (unit-rate drain between arrivals), so
//! the only events are arrivals. Replications draw from a counter-based
//! generator keyed by (seed, replication index): reruns and thread counts
//! cannot change any estimate.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::WfError;
use crate::service::{QueueSpec, ServiceModel};

/// Simulation parameters; `replications` applies to replication-style
/// estimators, `seed` keys every stream.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub spec: QueueSpec,
    pub seed: u64,
    pub replications: u64,
}

/// A mean with its standard error; acceptance checks use mean ± 3 stderr.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

impl Estimate {
    fn from_samples(samples: &[f64]) -> Estimate {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        Estimate { mean, stderr: (var / n).sqrt(), count: samples.len() as u64 }
    }

    /// Batch-means standard error over a long run.
    fn batch_means(samples: &[f64], batches: usize) -> Estimate {
        let per = samples.len() / batches;
        assert!(per >= 1, "not enough samples for {batches} batches");
        let means: Vec<f64> = (0..batches)
            .map(|b| samples[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
            .collect();
        let mut e = Estimate::from_samples(&means);
        e.count = (per * batches) as u64;
        e
    }

    pub fn within_3_sigma(&self, truth: f64) -> bool {
        (self.mean - truth).abs() <= 3.0 * self.stderr.max(1e-300)
    }
}

/// Per-replication stream: ChaCha keyed by the seed with the replication
/// index as the stream number.
fn stream(seed: u64, replication: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    // (0, 1]: avoids ln(0).
    ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

fn draw_exp(rng: &mut ChaCha12Rng, rate: f64) -> f64 {
    -uniform01(rng).ln() / rate
}

fn draw_service(rng: &mut ChaCha12Rng, model: &ServiceModel) -> f64 {
    match *model {
        ServiceModel::Deterministic { d } => d,
        ServiceModel::Exponential { omega } => draw_exp(rng, omega),
        ServiceModel::Erlang { q, omega } => {
            let mut acc = 0.0;
            for _ in 0..q {
                acc += draw_exp(rng, omega);
            }
            acc
        }
    }
}

/// One discharge from `u0` down to the empty state: every arrival while
/// the backlog is positive pays `cost(backlog)` and adds its service time.
fn discharge_once<F: Fn(f64) -> f64>(
    spec: &QueueSpec,
    cost: &F,
    u0: f64,
    rng: &mut ChaCha12Rng,
) -> f64 {
    let mut backlog = u0;
    let mut total = 0.0;
    loop {
        backlog -= draw_exp(rng, spec.lambda);
        if backlog <= 0.0 {
            return total;
        }
        total += cost(backlog);
        backlog += draw_service(rng, &spec.model);
    }
}

/// Monte-Carlo estimate of the w-function at `u0`.
pub fn sim_discharge_cost<F: Fn(f64) -> f64 + Sync>(
    config: &SimConfig,
    cost: &F,
    u0: f64,
) -> Result<Estimate, WfError> {
    config.spec.stability_check()?;
    if u0 < 0.0 {
        return Err(WfError::Domain("discharge requires u0 >= 0".into()));
    }
    if u0 == 0.0 {
        return Ok(Estimate { mean: 0.0, stderr: 0.0, count: config.replications });
    }
    let samples: Vec<f64> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(config.seed, rep);
            discharge_once(&config.spec, cost, u0, &mut rng)
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Long-run mean cost per admitted job (the waiting cost of each arrival),
/// with the setup convention `(D, D0)` honored for idle arrivals.
pub fn sim_mean_cost<F: Fn(f64) -> f64 + Sync>(
    config: &SimConfig,
    cost: &F,
    warmup: usize,
    measured: usize,
) -> Result<Estimate, WfError> {
    config.spec.stability_check()?;
    let mut rng = stream(config.seed, 0);
    let spec = config.spec;
    let model0 = spec.model0();
    let mut wait = 0.0f64;
    let mut samples = Vec::with_capacity(measured);
    for i in 0..(warmup + measured) {
        if i >= warmup {
            samples.push(cost(wait));
        }
        let service = if wait == 0.0 {
            draw_service(&mut rng, &model0)
        } else {
            draw_service(&mut rng, &spec.model)
        };
        let gap = draw_exp(&mut rng, spec.lambda);
        wait = (wait + service - gap).max(0.0);
    }
    Ok(Estimate::batch_means(&samples, 32))
}

/// First-passage time and arrival count from `u1` down to `u2`.
pub fn sim_busy_period(
    config: &SimConfig,
    u1: f64,
    u2: f64,
) -> Result<(Estimate, Estimate), WfError> {
    config.spec.stability_check()?;
    if !(u1 >= u2 && u2 >= 0.0) {
        return Err(WfError::Domain("busy period requires u1 >= u2 >= 0".into()));
    }
    if u1 == u2 {
        let zero = Estimate { mean: 0.0, stderr: 0.0, count: config.replications };
        return Ok((zero, zero));
    }
    let spec = config.spec;
    let samples: Vec<(f64, f64)> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(config.seed, rep);
            let mut backlog = u1;
            let mut t = 0.0f64;
            let mut n = 0u64;
            loop {
                let gap = draw_exp(&mut rng, spec.lambda);
                if backlog - gap <= u2 {
                    t += backlog - u2;
                    return (t, n as f64);
                }
                backlog -= gap;
                t += gap;
                n += 1;
                backlog += draw_service(&mut rng, &spec.model);
            }
        })
        .collect();
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let counts: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok((Estimate::from_samples(&times), Estimate::from_samples(&counts)))
}

/// Stationary waiting statistics from a long Lindley run under the
/// `(D, D)` convention.
#[derive(Debug, Clone)]
pub struct WaitingStats {
    pub mean: Estimate,
    pub second_moment: Estimate,
    pub zero_fraction: Estimate,
    /// Empirical CDF sampled at the given grid points.
    pub cdf_grid: Vec<(f64, f64)>,
}

pub fn sim_waiting_stats(
    config: &SimConfig,
    jobs: usize,
    grid: &[f64],
) -> Result<WaitingStats, WfError> {
    config.spec.stability_check()?;
    let spec = config.spec;
    let mut rng = stream(config.seed, 0);
    let warmup = jobs / 10;
    let mut wait = 0.0f64;
    let mut w1 = Vec::with_capacity(jobs);
    let mut w2 = Vec::with_capacity(jobs);
    let mut zero = Vec::with_capacity(jobs);
    let mut below = vec![0u64; grid.len()];
    for i in 0..(warmup + jobs) {
        if i >= warmup {
            w1.push(wait);
            w2.push(wait * wait);
            zero.push(if wait == 0.0 { 1.0 } else { 0.0 });
            for (g, b) in grid.iter().zip(below.iter_mut()) {
                if wait <= *g {
                    *b += 1;
                }
            }
        }
        let service = draw_service(&mut rng, &spec.model);
        let gap = draw_exp(&mut rng, spec.lambda);
        wait = (wait + service - gap).max(0.0);
    }
    let cdf_grid = grid
        .iter()
        .zip(below.iter())
        .map(|(g, b)| (*g, *b as f64 / jobs as f64))
        .collect();
    Ok(WaitingStats {
        mean: Estimate::batch_means(&w1, 32),
        second_moment: Estimate::batch_means(&w2, 32),
        zero_fraction: Estimate::batch_means(&zero, 32),
        cdf_grid,
    })
}
