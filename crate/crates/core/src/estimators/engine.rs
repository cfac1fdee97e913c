use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::problem::SumProblem;
use crate::rng::StreamFactory;
use crate::twisting::{check_theta, TwistedDistribution};

/// Samples per work unit. Fixed, so the merge order and therefore every bit
/// of the result is independent of the number of workers.
pub(crate) const CHUNK: u64 = 4096;

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Streaming moments of the likelihood term.
#[derive(Clone, Debug)]
pub(crate) struct Accumulator {
    pub count: u64,
    pub hits: u64,
    pub saturated: u64,
    pub sum_t: CompensatedSum,
    pub sum_t2: CompensatedSum,
    pub sum_t4: CompensatedSum,
    pub max_log_t: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self {
            count: 0,
            hits: 0,
            saturated: 0,
            sum_t: CompensatedSum::default(),
            sum_t2: CompensatedSum::default(),
            sum_t4: CompensatedSum::default(),
            max_log_t: f64::NEG_INFINITY,
        }
    }
}

impl Accumulator {
    fn push_hit(&mut self, log_t: f64) {
        let t = log_t.exp();
        let t2 = t * t;
        self.hits += 1;
        self.sum_t.add(t);
        self.sum_t2.add(t2);
        self.sum_t4.add(t2 * t2);
        self.max_log_t = self.max_log_t.max(log_t);
    }

    pub(crate) fn merge(&mut self, o: &Self) {
        self.count += o.count;
        self.hits += o.hits;
        self.saturated += o.saturated;
        self.sum_t.merge(&o.sum_t);
        self.sum_t2.merge(&o.sum_t2);
        self.sum_t4.merge(&o.sum_t4);
        self.max_log_t = self.max_log_t.max(o.max_log_t);
    }
}

/// One retained sample (debug runs only).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    /// `S_N`.
    pub sum: f64,
    /// `Σ Λᵢ(Xᵢ)`.
    pub hazard_sum: f64,
    /// `ln L = -N ln(1-θ) - θ Σ Λᵢ(Xᵢ)`, whether or not the sample hit.
    pub log_likelihood: f64,
    pub hit: bool,
}

/// Draws `samples` vectors from the `theta`-twisted components and
/// accumulates `T = L · 1{S_N > γ}`.
///
/// Sample `j` reads its component uniforms, in order, from stream `j` of
/// `seed`.
pub(crate) fn run(
    problem: &SumProblem,
    theta: f64,
    samples: u64,
    seed: u64,
    retain: bool,
) -> Result<(Accumulator, Vec<SampleRecord>)> {
    check_theta(theta)?;
    if samples == 0 {
        return Err(domain("sample count must be positive", 0.0));
    }
    let twisted = problem
        .components()
        .iter()
        .map(|c| TwistedDistribution::new(c.clone(), theta))
        .collect::<Result<Vec<_>>>()?;
    let gamma = problem.gamma();
    let log_norm = -(problem.len() as f64) * (-theta).ln_1p();
    let factory = StreamFactory::new(seed);
    let n_chunks = samples.div_ceil(CHUNK);

    let parts: Vec<(Accumulator, Vec<SampleRecord>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(samples);
            let mut acc = Accumulator::default();
            let mut kept = Vec::new();
            let mut xs = vec![0.0; twisted.len()];
            for j in start..end {
                let mut stream = factory.stream(j);
                let mut sum = 0.0;
                for (slot, tw) in xs.iter_mut().zip(&twisted) {
                    let s = tw.sample(&mut stream);
                    acc.saturated += u64::from(s.saturated);
                    *slot = s.value;
                    sum += s.value;
                }
                acc.count += 1;
                let hit = sum > gamma;
                if !(hit || retain) {
                    continue;
                }
                let log_t = if theta == 0.0 {
                    0.0
                } else {
                    let hazard_sum: f64 =
                        xs.iter().zip(&twisted).map(|(&x, tw)| -tw.base().law().log_survival(x)).sum();
                    log_norm - theta * hazard_sum
                };
                if hit {
                    acc.push_hit(log_t);
                }
                if retain {
                    kept.push(SampleRecord {
                        sum,
                        hazard_sum: problem.hazard_sum(&xs),
                        log_likelihood: log_t,
                        hit,
                    });
                }
            }
            (acc, kept)
        })
        .collect();

    let mut total = Accumulator::default();
    let mut records = Vec::new();
    for (acc, kept) in parts {
        total.merge(&acc);
        records.extend(kept);
    }
    Ok((total, records))
}
