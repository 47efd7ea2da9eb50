//! Erlang distribution helpers and a Monte Carlo estimate of
//! `E[max_i X_i / Σ_i X_i]` for independent Erlang variables.

use std::f64::consts::{E, LOG2_E};

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{self, Estimate};
use crate::rng::RngState;

/// Lower-bound constant for `E[max/sum]`: `(1 − e⁻¹ − ½) / (2 log₂ e)`.
pub const ERLANG_MAX_CONSTANT: f64 = (1.0 - 1.0 / E - 0.5) / (2.0 * LOG2_E);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErlangParams {
    shape: u32,
    rate: f64,
}

impl ErlangParams {
    pub fn new(shape: u32, rate: f64) -> Result<Self> {
        if shape == 0 {
            return Err(Error::invalid("Erlang shape must be at least 1"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid(format!(
                "Erlang rate must be positive, got {rate}"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape as f64 / self.rate
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn check_x(x: f64) -> Result<()> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeX(x));
    }
    Ok(())
}

pub fn erlang_pdf(p: ErlangParams, x: f64) -> Result<f64> {
    check_x(x)?;
    let k = p.shape;
    if x == 0.0 {
        return Ok(if k == 1 { p.rate } else { 0.0 });
    }
    let ln = k as f64 * p.rate.ln() + (k - 1) as f64 * x.ln() - p.rate * x - ln_factorial(k - 1);
    Ok(ln.exp())
}

pub fn erlang_cdf(p: ErlangParams, x: f64) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let lx = p.rate * x;
    let tail: f64 = (0..p.shape)
        .map(|i| (-lx + i as f64 * lx.ln() - ln_factorial(i)).exp())
        .sum();
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// Sum of `k` independent exponentials with rate `λ`.
pub fn erlang_sample(p: ErlangParams, rng: &mut RngState) -> f64 {
    let exp = Exp::new(p.rate).expect("validated rate");
    (0..p.shape).map(|_| exp.sample(rng)).sum()
}

/// Half the sum of `2k` squared standard normals (rate ½), rescaled to rate `λ`.
pub fn erlang_sample_gaussian(p: ErlangParams, rng: &mut RngState) -> f64 {
    let chi2: f64 = (0..2 * p.shape)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z * z
        })
        .sum();
    chi2 * 0.5 / p.rate
}

/// Monte Carlo estimate of `E[max_i X_i / Σ_i X_i]` with `X_i ~ Erlang(k_i, λ)`.
pub fn max_over_sum_estimate(
    ks: &[u32],
    rate: f64,
    trials: usize,
    rng: &mut RngState,
) -> Result<Estimate> {
    if ks.is_empty() {
        return Err(Error::invalid("need at least one shape"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let params = ks
        .iter()
        .map(|&k| ErlangParams::new(k, rate))
        .collect::<Result<Vec<_>>>()?;
    mc::estimate(trials, rng, |r| {
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for &p in &params {
            let x = erlang_sample(p, r);
            max = max.max(x);
            sum += x;
        }
        Ok(max / sum)
    })
}

/// `c · log₂ n / Σ k_i`.
pub fn max_over_sum_lower_bound(ks: &[u32]) -> f64 {
    let total: u32 = ks.iter().sum();
    ERLANG_MAX_CONSTANT * (ks.len() as f64).log2() / total as f64
}
