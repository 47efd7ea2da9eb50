//! Deterministic Monte Carlo accumulation.
//!
//! Trials are grouped into fixed-size chunks; chunk `i` draws from the stream
//! `(seed, i)` and the per-chunk moments are merged in chunk order, so the
//! result does not depend on how many threads rayon uses.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::rng::RngState;

const CHUNK: usize = 256;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    fn estimate(self) -> Estimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            stderr,
            samples: self.n,
        }
    }
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        m.estimate()
    }
}

/// Average `trial` over `trials` independent draws.
///
/// `rng` advances by exactly one draw (the base seed for the chunk streams).
pub fn estimate<F>(trials: usize, rng: &mut RngState, trial: F) -> Result<Estimate>
where
    F: Fn(&mut RngState) -> Result<f64> + Sync,
{
    let seed = rng.fork_seed();
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = RngState::stream(seed, c as u64);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(trial(&mut stream)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total.estimate())
}
