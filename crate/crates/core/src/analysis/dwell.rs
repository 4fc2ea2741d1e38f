//! Dark-state dwell statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::jumps::JumpEvents;
use crate::trajectory::{CountTrace, Direction, FluorescenceState};
use crate::{Error, Result};

pub const MIN_COMPLETE_DWELLS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellStatistics {
    /// Mean of the complete dwells, s.
    pub mean_dwell: f64,
    /// Exponential maximum-likelihood mean, censored dwells included as
    /// right-censored observations, s.
    pub mle_mean: f64,
    /// 95 % confidence interval of `mle_mean`, s.
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_complete: usize,
    pub n_censored: usize,
}

/// Statistics from explicit dwell durations.
///
/// Censored dwells (cut by a trace boundary) are left out of `mean_dwell`.
/// The exponential MLE is total time on test over the number of complete
/// dwells; its interval is the exact chi-square interval with `2n` degrees of
/// freedom.
pub fn dwell_statistics_from(complete: &[f64], censored: &[f64]) -> Result<DwellStatistics> {
    if complete.len() < MIN_COMPLETE_DWELLS {
        return Err(Error::InsufficientData {
            needed: MIN_COMPLETE_DWELLS,
            got: complete.len(),
        });
    }
    if complete.iter().chain(censored).any(|d| !(*d >= 0.0)) {
        return Err(Error::invalid("dwell durations must be >= 0"));
    }
    let n = complete.len() as f64;
    let sum_complete: f64 = complete.iter().sum();
    let total = sum_complete + censored.iter().sum::<f64>();
    let mle = total / n;
    let chi2 = ChiSquared::new(2.0 * n).expect("positive dof");
    Ok(DwellStatistics {
        mean_dwell: sum_complete / n,
        mle_mean: mle,
        ci_low: 2.0 * total / chi2.inverse_cdf(0.975),
        ci_high: 2.0 * total / chi2.inverse_cdf(0.025),
        n_complete: complete.len(),
        n_censored: censored.len(),
    })
}

/// Dark dwells measured from detected transitions, in units of whole bins.
pub fn dwell_statistics(events: &JumpEvents, trace: &CountTrace) -> Result<DwellStatistics> {
    let (complete, censored) = dark_dwells(events, trace.counts.len(), trace.bin_width);
    dwell_statistics_from(&complete, &censored)
}

/// `(complete, censored)` dark dwells, s, from detected transitions over a
/// trace of `n_bins` bins.
pub fn dark_dwells(events: &JumpEvents, n_bins: usize, bin_width: f64) -> (Vec<f64>, Vec<f64>) {
    let mut complete = Vec::new();
    let mut censored = Vec::new();
    let mut dark_since: Option<(usize, bool)> =
        (events.initial_state == FluorescenceState::Dark).then_some((0, true));
    for &(bin, dir) in &events.transitions {
        match dir {
            Direction::BrightToDark => dark_since = Some((bin, false)),
            Direction::DarkToBright => {
                if let Some((start, cut)) = dark_since.take() {
                    let d = (bin - start) as f64 * bin_width;
                    if cut {
                        censored.push(d);
                    } else {
                        complete.push(d);
                    }
                }
            }
        }
    }
    if let Some((start, _)) = dark_since {
        censored.push((n_bins - start) as f64 * bin_width);
    }
    (complete, censored)
}
