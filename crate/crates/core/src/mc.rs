//! Seeded Monte Carlo driver.
//!
//! Samples are grouped into fixed-size chunks. Chunk `c` draws from its own
//! ChaCha stream (`seed`, stream id `c`), so the set of random numbers a chunk
//! sees does not depend on which worker runs it. Chunk statistics are merged
//! in chunk order, which makes every estimate bit-identical for any worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: u64 = 1 << 14;

/// A Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

/// Sample count, seed and (optional) worker count for one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub n: u64,
    pub seed: u64,
    /// `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl McOptions {
    pub fn new(n: u64, seed: u64) -> Self {
        McOptions { n, seed, workers: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// The random stream for chunk `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Running mean / second central moment, merged with Chan's update.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64) * (other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var.max(0.0) / self.count as f64).sqrt()
    }
}

pub(crate) fn run_in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs `n` draws of `sample` and accumulates `dim` parallel statistics.
///
/// `sample` writes one value per statistic into the provided buffer; all
/// statistics share the same random draws.
pub(crate) fn run_multi<F>(opts: McOptions, dim: usize, sample: F) -> Result<Vec<Moments>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    if opts.n == 0 {
        return Err(Error::invalid("Monte Carlo sample count must be positive"));
    }
    let chunks = opts.n.div_ceil(CHUNK_SIZE);
    run_in_pool(opts.workers, || {
        let partial: Vec<Vec<Moments>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(opts.seed, c);
                let len = CHUNK_SIZE.min(opts.n - c * CHUNK_SIZE);
                let mut acc = vec![Moments::default(); dim];
                let mut buf = vec![0.0; dim];
                for _ in 0..len {
                    buf.iter_mut().for_each(|b| *b = 0.0);
                    sample(&mut rng, &mut buf);
                    for (m, &x) in acc.iter_mut().zip(&buf) {
                        m.push(x);
                    }
                }
                acc
            })
            .collect();
        partial.into_iter().fold(vec![Moments::default(); dim], |acc, part| {
            acc.into_iter().zip(part).map(|(a, b)| a.merge(b)).collect()
        })
    })
}

/// Single-statistic version of [`run_multi`].
pub(crate) fn run<F>(opts: McOptions, sample: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let m = run_multi(opts, 1, |rng, out| out[0] = sample(rng))?;
    Ok(estimate(m[0], opts))
}

pub(crate) fn estimate(m: Moments, opts: McOptions) -> McEstimate {
    McEstimate { value: m.mean, stderr: m.stderr(), n: opts.n, seed: opts.seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (a, b) = xs.split_at(313);
        let mut ma = Moments::default();
        let mut mb = Moments::default();
        a.iter().for_each(|&x| ma.push(x));
        b.iter().for_each(|&x| mb.push(x));
        let merged = ma.merge(mb);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9 * all.m2);
    }

    #[test]
    fn uniform_mean_and_worker_independence() {
        let opts = McOptions::new(100_000, 5);
        let one = run(opts.with_workers(1), |rng| rng.random::<f64>()).unwrap();
        let many = run(opts.with_workers(4), |rng| rng.random::<f64>()).unwrap();
        assert_eq!(one.value.to_bits(), many.value.to_bits());
        assert_eq!(one.stderr.to_bits(), many.stderr.to_bits());
        assert!((one.value - 0.5).abs() < 4.0 * one.stderr);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(run(McOptions::new(0, 1), |_| 0.0).is_err());
    }
}
