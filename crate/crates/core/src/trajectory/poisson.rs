//! Poisson sampling for photon counts.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::rng::SimRng;

/// Inverse-CDF sampler for a fixed Poisson mean, used for the bins spent
/// entirely in one state. Exact up to the double-precision resolution of the
/// cumulative table; draws in the residual upper tail fall back to
/// `rand_distr`.
#[derive(Debug, Clone)]
pub(crate) struct PoissonTable {
    mean: f64,
    cdf: Vec<f64>,
    guide: Vec<u32>,
}

const GUIDE_SIZE: usize = 256;

impl PoissonTable {
    pub(crate) fn new(mean: f64) -> Self {
        let mut cdf = Vec::new();
        if mean > 0.0 {
            // Recurrence in log space from the mode keeps it stable for large means.
            let kmax = (mean + 40.0 * mean.sqrt() + 40.0).ceil() as usize;
            let ln_mean = mean.ln();
            let mut acc = 0.0;
            for k in 0..=kmax {
                let ln_p = k as f64 * ln_mean - mean - ln_factorial(k);
                acc += ln_p.exp();
                cdf.push(acc.min(1.0));
                if k as f64 > mean && 1.0 - acc < 1e-17 {
                    break;
                }
            }
        } else {
            cdf.push(1.0);
        }
        let mut guide = Vec::with_capacity(GUIDE_SIZE);
        let mut k = 0usize;
        for g in 0..GUIDE_SIZE {
            let u = g as f64 / GUIDE_SIZE as f64;
            while k + 1 < cdf.len() && cdf[k] <= u {
                k += 1;
            }
            guide.push(k as u32);
        }
        Self { mean, cdf, guide }
    }

    pub(crate) fn sample(&self, rng: &mut SimRng) -> u32 {
        if self.mean <= 0.0 {
            return 0;
        }
        let u: f64 = rng.random();
        let mut k = self.guide[(u * GUIDE_SIZE as f64) as usize] as usize;
        while k < self.cdf.len() && self.cdf[k] <= u {
            k += 1;
        }
        if k == self.cdf.len() {
            return sample_poisson(self.mean, rng);
        }
        k as u32
    }
}

fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// One Poisson draw with arbitrary mean.
pub(crate) fn sample_poisson(mean: f64, rng: &mut SimRng) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u32
}
